use super::*;
use crate::linalg::min_eigenvalue;

fn bench() -> FusionBenchmark {
    FusionBenchmark::new(FusionConfig::default()).unwrap()
}

fn weak_prior_bench() -> FusionBenchmark {
    FusionBenchmark::new(FusionConfig {
        gamma_pr: 1e-4,
        eps_pr: 1e-6,
        ..FusionConfig::default()
    })
    .unwrap()
}

#[test]
fn exact_data_has_zero_residual() {
    let b = bench();
    let d = synthesize_data(&b, 3, 0.0).unwrap();
    assert_eq!(d.static_obs.len(), b.config().static_test.sensors.len() * b.config().static_test.n_loads);
    assert_eq!(d.dynamic_obs.len(), b.n_dynamic());
    let r = b.residual(&d, &b.p_true(), Blocks::Hybrid).unwrap();
    assert_eq!(r.amax(), 0.0);
}

#[test]
fn data_are_seed_deterministic() {
    let b = bench();
    let a = synthesize_data(&b, 11, 1.0).unwrap();
    let c = synthesize_data(&b, 11, 1.0).unwrap();
    assert_eq!(a, c);
    assert_ne!(a, synthesize_data(&b, 12, 1.0).unwrap());
}

#[test]
fn noise_std_scales_with_sigma() {
    let b = bench();
    let p = b.p_true();
    let f = [b.static_forward(&p).unwrap(), b.dynamic_forward(&p).unwrap()];
    let sig = [b.config().static_test.sigma, b.config().dynamic_test.sigma_log];
    let empirical = |scale: f64| {
        let (mut ss, mut n) = (0.0, 0usize);
        for seed in 0..100 {
            let d = synthesize_data(&b, seed, scale).unwrap();
            for (obs, (fw, s)) in [&d.static_obs, &d.dynamic_obs].iter().zip(f.iter().zip(sig)) {
                ss += (*obs - fw).map(|v| v / s).norm_squared();
                n += obs.len();
            }
        }
        (ss / n as f64).sqrt()
    };
    let (one, two) = (empirical(1.0), empirical(2.0));
    assert!((one - 1.0).abs() < 0.1);
    assert!((two / one - 2.0).abs() < 0.2);
}

#[test]
fn zero_noise_hybrid_recovers_truth() {
    let b = weak_prior_bench();
    let d = synthesize_data(&b, 0, 0.0).unwrap();
    let m = gauss_newton_map(&b, &d, Blocks::Hybrid).unwrap();
    assert!(m.converged);
    assert!((&m.p_map - b.p_true()).amax() <= 1e-3);
}

#[test]
fn strong_prior_pins_estimate_to_mean() {
    let b = FusionBenchmark::new(FusionConfig {
        gamma_pr: 1e11,
        eps_pr: 1e11,
        ..FusionConfig::default()
    })
    .unwrap();
    let d = synthesize_data(&b, 1, 1.0).unwrap();
    let m = gauss_newton_map(&b, &d, Blocks::Hybrid).unwrap();
    assert!(m.p_map.amax() < 1e-3);
}

#[test]
fn linear_model_is_one_ridge_step() {
    let j = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, 0.5, -1.0, 1.0, 0.0, 3.0, 1.0, 2.0, 0.0, -1.0]);
    let y = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
    let prior = PriorModel::difference_precision(3, 0.3, 0.1).unwrap();
    let model = |p: &DVector<f64>, _: bool| Ok((&y - &j * p, Some(j.clone())));
    let opts = GnOptions {
        max_step: f64::INFINITY,
        ..GnOptions::default()
    };
    let m = gauss_newton(model, &prior, DVector::zeros(3), opts).unwrap();
    let h = j.transpose() * &j + prior.precision();
    let ridge = h.clone().cholesky().unwrap().solve(&(j.transpose() * &y));
    assert!((&m.p_map - &ridge).amax() < 1e-12);
    assert!(m.iterations <= 2);
    let cov = h.cholesky().unwrap().inverse();
    for i in 0..3 {
        assert!((m.band[i] - cov[(i, i)].sqrt()).abs() < 1e-14);
    }
}

#[test]
fn band_limits() {
    let q = DMatrix::from_element(1, 1, 0.25);
    let j = DMatrix::from_element(1, 1, 3.0);
    assert!((band_from(&j, &q).unwrap()[0] - 1.0 / (9.0f64 + 0.25).sqrt()).abs() < 1e-15);
    let b = bench();
    let none = band_from(&DMatrix::zeros(0, b.n_params()), b.prior().precision()).unwrap();
    let marg = b.prior().covariance().diagonal().map(f64::sqrt);
    assert!((none - marg).amax() < 1e-10);
}

#[test]
fn bands_shrink_as_blocks_are_added() {
    let b = bench();
    let p = b.p_true();
    let s = posterior_band(&b, &p, Blocks::Static).unwrap();
    let d = posterior_band(&b, &p, Blocks::Dynamic).unwrap();
    let h = posterior_band(&b, &p, Blocks::Hybrid).unwrap();
    let prior = b.prior().covariance().diagonal().map(f64::sqrt);
    for i in 0..b.n_params() {
        assert!(h[i] <= s[i] && h[i] <= d[i] && s[i] <= prior[i] && d[i] <= prior[i]);
        assert!(h[i] > 0.0);
    }
}

#[test]
fn hybrid_information_dominates() {
    let b = bench();
    let p = DVector::zeros(b.n_params());
    let gram = |blocks| {
        let j = b.jacobian(&p, blocks).unwrap();
        j.transpose() * j
    };
    let h = gram(Blocks::Hybrid);
    let scale = crate::linalg::max_eigenvalue(&h);
    for single in [Blocks::Static, Blocks::Dynamic] {
        assert!(min_eigenvalue(&(&h - gram(single))) >= -1e-10 * scale);
    }
}

#[test]
fn densities_add() {
    let b = bench();
    let r = density_report(&b).unwrap();
    assert!(r.additivity_defect() <= 1e-12);
    assert!(r
        .static_density
        .iter()
        .chain(&r.dynamic_density)
        .all(|&v| v >= 0.0));
    let mut cfg = FusionConfig::default();
    cfg.dynamic_test.excitations.clear();
    let r = density_report(&FusionBenchmark::new(cfg).unwrap()).unwrap();
    assert_eq!(r.hybrid_density, r.static_density);
}

#[test]
fn shipped_benchmark_fusion_helps() {
    let b = bench();
    let d = synthesize_data(&b, b.config().seed, 1.0).unwrap();
    let s = gauss_newton_map(&b, &d, Blocks::Static).unwrap();
    let h = gauss_newton_map(&b, &d, Blocks::Hybrid).unwrap();
    assert!(ei_error(&b, &h.p_map) <= ei_error(&b, &s.p_map));
    for m in [&s, &h] {
        assert!(m.misfit_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.misfit_history.last() <= m.misfit_history.first());
        assert!(m.band.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn config_validation_and_parsing() {
    let mut c = FusionConfig::default();
    c.damage.center = 0.3;
    assert!(FusionBenchmark::new(c).is_err());
    let mut c = FusionConfig::default();
    c.static_test.sensors = vec![12.0];
    assert!(FusionBenchmark::new(c).is_err());
    let json = serde_json::to_string(&FusionConfig::default()).unwrap();
    let back: FusionConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, FusionConfig::default());
    assert!(serde_json::from_str::<FusionConfig>(r#"{"lenght": 3.0}"#).is_err());
    assert_eq!("Hybrid".parse::<Blocks>().unwrap(), Blocks::Hybrid);
    assert!("both".parse::<Blocks>().is_err());
}

#[test]
#[ignore]
fn seed_survey() {
    let b = bench();
    let mut wins = 0;
    for seed in 0..20 {
        let d = synthesize_data(&b, seed, 1.0).unwrap();
        let e: Vec<f64> = [Blocks::Static, Blocks::Dynamic, Blocks::Hybrid]
            .iter()
            .map(|&bl| ei_error(&b, &gauss_newton_map(&b, &d, bl).unwrap().p_map))
            .collect();
        wins += usize::from(e[2] <= e[0]);
        println!("seed {seed}: static {:.3} dynamic {:.3} hybrid {:.3}", e[0], e[1], e[2]);
    }
    println!("hybrid beats static on {wins}/20 seeds");
}
