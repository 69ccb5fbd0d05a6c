use super::*;
use crate::spectral::randomized_eig;

fn small() -> Damage2D {
    Damage2D::new(Damage2DConfig::test_scale()).unwrap()
}

fn zeros(m: &Damage2D) -> DamageField {
    DamageField::zeros(m.config().ny, m.config().nx)
}

#[test]
fn midspan_deflection_matches_beam_theory() {
    let mut c = Damage2DConfig::test_scale();
    c.load.positions = vec![0.5];
    let m = Damage2D::new(c.clone()).unwrap();
    let u = &m.solve(&zeros(&m)).unwrap()[0];
    let (_, w, _) = m.mesh().sample(u, c.length / 2.0, c.height / 2.0).unwrap();
    let i = c.thickness * c.height.powi(3) / 12.0;
    let euler = c.load.magnitude * c.length.powi(3) / (48.0 * c.e0 * i);
    let rel = (-w - euler).abs() / euler;
    assert!(rel <= 0.10, "deflection {} vs {euler} ({rel})", -w);
}

#[test]
fn uniform_softening_scales_response() {
    let m = small();
    let c = m.config();
    // Halves the modulus everywhere.
    let half = DamageField::constant(c.ny, c.nx, 0.5 / (1.0 - c.kappa));
    let y0 = m.forward(&zeros(&m)).unwrap();
    let y1 = m.forward(&half).unwrap();
    assert!((&y1 - &y0 * 2.0).amax() <= 1e-9 * y0.amax());
}

#[test]
fn response_is_linear_in_load() {
    let m = small();
    let f = zeros(&m);
    let a = m.solve(&f).unwrap();
    let b = m.solve_scaled(&f, -2.5).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((v + u * 2.5).amax() <= 1e-12 * u.amax());
    }
}

#[test]
fn bending_strain_signs() {
    let m = small();
    let f = zeros(&m);
    let n = m.config().sensors.strain.len() / 2;
    for (sign, states) in [(1.0, m.solve(&f).unwrap()), (-1.0, m.solve_scaled(&f, -1.0).unwrap())] {
        for u in &states {
            let y = m.observe(u).unwrap();
            for i in 0..n {
                assert!(sign * y[i] > 0.0, "bottom fibre sensor {i} not in tension");
                assert!(sign * y[n + i] < 0.0, "top fibre sensor {i} not in compression");
            }
        }
    }
}

#[test]
fn observation_layout() {
    let m = Damage2D::new(Damage2DConfig::default()).unwrap();
    assert_eq!(m.n_cells(), 1377);
    assert_eq!(m.n_obs(), 160);
    let kinds = m.row_kinds();
    assert_eq!(kinds[0], SensorKind::Strain);
    assert_eq!(kinds[14], SensorKind::Displacement);
    assert_eq!(kinds[17], SensorKind::Rotation);
    assert_eq!(kinds[20], SensorKind::Strain);
    assert!(m.sigma().iter().all(|&s| s > 0.0));
}

#[test]
fn finite_difference_richardson() {
    let m = small();
    let f = m.true_field();
    let fine = m.fd_jacobian_raw(&f, 1e-6).unwrap();
    let scale = fine.amax();
    let e: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| (&m.fd_jacobian_raw(&f, h).unwrap() - &fine).amax() / scale)
        .collect();
    // Central differences: halving the step quarters the error.
    for w in e.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..4.5).contains(&r), "errors {e:?}");
    }
    assert!(e[2] < 1e-4);
}

#[test]
fn rank_bounded_by_observations() {
    let mut c = Damage2DConfig::test_scale();
    c.load.positions = vec![0.3, 0.7];
    let m = Damage2D::new(c).unwrap();
    let block = m.fd_jacobian(&zeros(&m), 1e-6).unwrap();
    let op = assemble_info(&block);
    let rank = crate::linalg::numerical_rank(&op.to_dense(), 1e-10);
    assert!(rank <= m.n_obs() && rank > m.n_obs() / 2, "rank {rank}");
}

#[test]
fn randomized_matches_dense_modes() {
    let m = small();
    let r = mode_report(&m, &zeros(&m), 8).unwrap();
    let rnd = randomized_eig(&r.operator, 8, 20, 3, 11).unwrap();
    for i in 0..8 {
        let (a, b) = (r.modes.eigenvalues[i], rnd.eigenvalues[i]);
        assert!((a - b).abs() <= 1e-6 * a, "mode {i}: {a} vs {b}");
    }
    assert!(r.ratio > 1.0);
}

#[test]
fn full_subspace_recovers_row_space_component() {
    let m = small();
    let f = zeros(&m);
    let block = m.fd_jacobian(&f, 1e-6).unwrap();
    let op = assemble_info(&block);
    let dense = op.to_dense();
    let rank = crate::linalg::numerical_rank(&dense, 1e-9);
    let modes = sym_eig(&op, rank).unwrap();
    let delta = m.true_field().values * 1e-3;
    let y = m.forward(&f).unwrap() + block.jacobian() * &delta;
    let map = subspace_map(&m, &block, &f, &y, &modes, rank, Some(0.0)).unwrap();
    let psi = &modes.modes;
    let target = psi * (psi.transpose() * &delta);
    assert!((&map.update - &target).norm() <= 1e-4 * target.norm());
}

#[test]
fn zero_penalty_residual_is_orthogonal() {
    let m = small();
    let f = zeros(&m);
    let block = m.fd_jacobian(&f, 1e-6).unwrap();
    let modes = sym_eig(&assemble_info(&block), 8).unwrap();
    let y = m.synthesize(3).unwrap();
    let map = subspace_map(&m, &block, &f, &y, &modes, 8, Some(0.0)).unwrap();
    let a = block.whitened_jacobian() * modes.modes.columns(0, 8);
    let r = block.whiten_vector(&(y - m.forward(&f).unwrap())) - &a * &map.coefficients;
    let g = a.transpose() * &r;
    assert!(g.amax() <= 1e-8 * (a.transpose() * block.whiten_vector(&m.forward(&f).unwrap())).amax().max(1.0));
}

#[test]
fn consistent_data_give_zero_update() {
    let m = small();
    let f = zeros(&m);
    let block = m.fd_jacobian(&f, 1e-6).unwrap();
    let modes = sym_eig(&assemble_info(&block), 8).unwrap();
    let y = m.forward(&f).unwrap();
    let map = subspace_map(&m, &block, &f, &y, &modes, 8, None).unwrap();
    assert_eq!(map.update.amax(), 0.0);
    assert_eq!(map.field, f);
}

#[test]
fn clamp_is_idempotent() {
    let v = DVector::from_vec(vec![-0.3, 0.2, 0.95, 1.4, 0.0, 0.9]);
    let f = DamageField::from_vector(2, 3, v).unwrap();
    let once = f.clamped(0.0, 0.9);
    assert_eq!(once.clamped(0.0, 0.9), once);
    assert!(once.values.iter().all(|&d| (0.0..=0.9).contains(&d)));
}

#[test]
fn benchmark_halves_subspace_error() {
    let m = small();
    let seed = m.config().seed;
    let rep = run_benchmark(&m, 8, seed).unwrap();
    assert!(rep.subspace_error_ratio <= 0.5, "ratio {}", rep.subspace_error_ratio);
    assert!(rep.rank <= m.n_obs());
}

#[test]
fn field_csv_layout() {
    let f = DamageField::from_vector(2, 3, DVector::from_vec(vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5])).unwrap();
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "# field ny=2 nx=3");
    assert_eq!(lines.len(), 3);
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row, vec![0.3, 0.4, 0.5]);
}

#[test]
fn invalid_configs_rejected() {
    let mut c = Damage2DConfig::test_scale();
    c.kappa = 0.0;
    assert!(matches!(c.validate(), Err(Error::InvalidArgument(m)) if m.starts_with("kappa")));
    let mut c = Damage2DConfig::test_scale();
    c.sensors.strain.push([1.2, 0.5]);
    assert!(matches!(c.validate(), Err(Error::OutsideDomain { .. })));
    let mut c = Damage2DConfig::test_scale();
    c.load.positions = vec![0.01];
    assert!(c.validate().is_err());
    let m = small();
    assert!(m.forward(&DamageField::zeros(2, 2)).is_err());
}

#[test]
fn jacobian_scales_inversely_with_modulus() {
    let m = small();
    let mut c = m.config().clone();
    c.e0 *= 2.0;
    let stiff = Damage2D::new(c).unwrap();
    let a = m.fd_jacobian_raw(&zeros(&m), 1e-6).unwrap();
    let b = stiff.fd_jacobian_raw(&zeros(&m), 1e-6).unwrap();
    assert!((&b * 2.0 - &a).amax() <= 1e-8 * a.amax());
}

#[test]
fn zero_load_gives_zero_observations() {
    let m = small();
    for u in m.solve_scaled(&zeros(&m), 0.0).unwrap() {
        assert_eq!(m.observe(&u).unwrap().amax(), 0.0);
    }
}

#[test]
fn remote_cell_is_nearly_insensitive() {
    // Single load and a single displacement sensor near the left end:
    // the top-right corner cell carries almost no stress.
    let mut c = Damage2DConfig::test_scale();
    c.load.positions = vec![0.1];
    c.sensors = SensorLayout {
        strain: vec![],
        displacement: vec![[0.1, 0.5]],
        rotation: vec![],
    };
    let m = Damage2D::new(c.clone()).unwrap();
    let j = m.fd_jacobian_raw(&zeros(&m), 1e-6).unwrap();
    let corner = c.n_cells() - 1;
    assert!(j[(0, corner)].abs() <= 1e-4 * j.row(0).amax());
}
