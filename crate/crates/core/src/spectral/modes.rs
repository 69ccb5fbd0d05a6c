use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::csvio::write_row;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{eigh_desc, fix_sign, symmetrize};
use crate::opcore::InfoOperator;
use crate::prior::PriorModel;
use crate::scalar::Scalar;

/// Inner product under which a [`ModeSet`] is orthonormal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Mass,
    Prior,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Mass => "mass",
            Metric::Prior => "prior",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "mass" => Ok(Metric::Mass),
            "prior" => Ok(Metric::Prior),
            other => Err(Error::InvalidArgument(format!("unknown metric '{other}'"))),
        }
    }
}

/// Leading eigenpairs of an information operator.
///
/// Eigenvalues are descending; each mode column has its largest-magnitude
/// component positive. For the prior metric, `whitened` holds the
/// eigenvectors of `C^{1/2} I C^{1/2}` and `modes` their physical images
/// `C^{1/2} w`.
#[derive(Clone, Debug)]
pub struct ModeSet<T: Scalar> {
    pub eigenvalues: DVector<T>,
    pub modes: DMatrix<T>,
    pub metric: Metric,
    pub residual_norms: DVector<T>,
    pub whitened: Option<DMatrix<T>>,
}

#[derive(Serialize)]
struct ModeSetRecord<'a> {
    metric_tag: &'a str,
    eigenvalues: Vec<f64>,
    residual_norms: Vec<f64>,
    /// One array per mode.
    modes: Vec<Vec<f64>>,
}

impl<T: Scalar> ModeSet<T> {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.modes.nrows()
    }

    pub fn mode(&self, i: usize) -> DVector<T> {
        self.modes.column(i).into_owned()
    }

    /// Keeps the modes at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let pick = |m: &DMatrix<T>| m.select_columns(indices);
        Self {
            eigenvalues: self.eigenvalues.select_rows(indices),
            modes: pick(&self.modes),
            metric: self.metric,
            residual_norms: self.residual_norms.select_rows(indices),
            whitened: self.whitened.as_ref().map(pick),
        }
    }

    /// `max |Phi^T G Phi - I|` for metric matrix `G` (identity when `None`).
    pub fn gram_deviation(&self, metric: Option<&DMatrix<T>>) -> T {
        let gram = match metric {
            Some(g) => self.modes.transpose() * g * &self.modes,
            None => self.modes.tr_mul(&self.modes),
        };
        (gram - DMatrix::identity(self.k(), self.k())).amax()
    }

    /// First row eigenvalues, then one row per parameter coordinate.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write_row(w, self.eigenvalues.iter().map(|x| x.as_f64()))?;
        for i in 0..self.dim() {
            write_row(w, self.modes.row(i).iter().map(|x| x.as_f64()))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = ModeSetRecord {
            metric_tag: self.metric.as_str(),
            eigenvalues: self.eigenvalues.iter().map(|x| x.as_f64()).collect(),
            residual_norms: self.residual_norms.iter().map(|x| x.as_f64()).collect(),
            modes: (0..self.k())
                .map(|j| self.modes.column(j).iter().map(|x| x.as_f64()).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&rec)?)
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidArgument(format!("requested {k} modes of an operator of dimension {n}")))
    } else {
        Ok(())
    }
}

/// Leading `k` eigenpairs in the Euclidean metric.
pub fn sym_eig<T: Scalar>(op: &InfoOperator<T>, k: usize) -> Result<ModeSet<T>> {
    let n = op.dim();
    check_k(k, n)?;
    let a = op.to_dense();
    let (vals, vecs) = eigh_desc(&a);
    let eigenvalues = vals.rows(0, k).into_owned();
    let modes = vecs.columns(0, k).into_owned();
    let residual_norms = DVector::from_fn(k, |i, _| {
        let v = modes.column(i);
        (&a * v - v * eigenvalues[i]).norm()
    });
    Ok(ModeSet {
        eigenvalues,
        modes,
        metric: Metric::Euclidean,
        residual_norms,
        whitened: None,
    })
}

/// Generalized problem `I c = lambda M c`, solved by whitening with the
/// Cholesky factor of `M`. Modes are `M`-orthonormal.
pub fn mass_weighted_eig<T: Scalar>(
    op: &InfoOperator<T>,
    mass: &DMatrix<T>,
    k: usize,
) -> Result<ModeSet<T>> {
    let n = op.dim();
    check_dim("mass matrix", n, mass.nrows())?;
    check_dim("mass matrix", n, mass.ncols())?;
    check_k(k, n)?;
    let l = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd("mass matrix".into()))?
        .l();
    let a = op.to_dense();
    // L^{-1} A L^{-T}
    let left = l.solve_lower_triangular(&a).expect("nonzero diagonal");
    let whitened = l
        .solve_lower_triangular(&left.transpose())
        .expect("nonzero diagonal");
    let (vals, vecs) = eigh_desc(&symmetrize(&whitened));
    let eigenvalues = vals.rows(0, k).into_owned();
    let mut modes = DMatrix::zeros(n, k);
    for i in 0..k {
        let y = vecs.column(i).into_owned();
        let mut c = l.tr_solve_lower_triangular(&y).expect("nonzero diagonal");
        fix_sign(&mut c);
        modes.set_column(i, &c);
    }
    let residual_norms = DVector::from_fn(k, |i, _| {
        let c = modes.column(i);
        (&a * c - (mass * c) * eigenvalues[i]).norm()
    });
    Ok(ModeSet {
        eigenvalues,
        modes,
        metric: Metric::Mass,
        residual_norms,
        whitened: None,
    })
}

/// Eigenpairs of the prior-preconditioned operator `C^{1/2} I C^{1/2}`.
/// Physical modes `phi = C^{1/2} w` are orthonormal in the prior precision.
pub fn prior_preconditioned_eig<T: Scalar>(
    op: &InfoOperator<T>,
    prior: &PriorModel<T>,
    k: usize,
) -> Result<ModeSet<T>> {
    let n = op.dim();
    check_dim("prior dimension", n, prior.dim())?;
    check_k(k, n)?;
    let s = prior.cov_sqrt();
    let h = symmetrize(&(s * op.to_dense() * s));
    let (vals, vecs) = eigh_desc(&h);
    let eigenvalues = vals.rows(0, k).into_owned();
    let mut whitened = vecs.columns(0, k).into_owned();
    let mut modes = s * &whitened;
    for i in 0..k {
        let mut phi = modes.column(i).into_owned();
        if fix_sign(&mut phi) {
            modes.set_column(i, &phi);
            let w = -whitened.column(i).into_owned();
            whitened.set_column(i, &w);
        }
    }
    let residual_norms = DVector::from_fn(k, |i, _| {
        let w = whitened.column(i);
        (&h * w - w * eigenvalues[i]).norm()
    });
    Ok(ModeSet {
        eigenvalues,
        modes,
        metric: Metric::Prior,
        residual_norms,
        whitened: Some(whitened),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{assemble_info, ObservationBlock};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_op(d: &[f64]) -> InfoOperator<f64> {
        InfoOperator::from_matrix(DMatrix::from_diagonal(&DVector::from_row_slice(d)), vec![]).unwrap()
    }

    fn rand_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(n, n) * shift
    }

    #[test]
    fn diagonal_operator_modes() {
        let ms = sym_eig(&diag_op(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert_eq!(ms.eigenvalues.as_slice(), &[3.0, 2.0]);
        assert_eq!(ms.mode(0), DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(ms.mode(1), DVector::from_vec(vec![0.0, 1.0, 0.0]));
        assert!(sym_eig(&diag_op(&[1.0]), 2).is_err());
        assert!(sym_eig(&diag_op(&[1.0]), 0).is_err());
    }

    #[test]
    fn rank_one_mode() {
        let a = DVector::<f64>::from_vec(vec![1.0, -3.0, 2.0]);
        let b = ObservationBlock::with_std(DMatrix::from_row_slice(1, 3, a.as_slice()), 1.0, "a").unwrap();
        let ms = sym_eig(&assemble_info(&b), 1).unwrap();
        assert!((ms.eigenvalues[0] - 14.0).abs() < 1e-12);
        // sign rule: largest-magnitude component positive
        let expect = -a.normalize();
        assert!((ms.mode(0) - expect).amax() < 1e-12);
    }

    #[test]
    fn mass_weighted_scaling_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let op = InfoOperator::from_matrix(rand_spd(&mut rng, 5, 0.0), vec![]).unwrap();
        let plain = sym_eig(&op, 3).unwrap();
        let id = mass_weighted_eig(&op, &DMatrix::identity(5, 5), 3).unwrap();
        assert!((&plain.eigenvalues - &id.eigenvalues).amax() < 1e-12);
        assert!((&plain.modes - &id.modes).amax() < 1e-10);
        let four = mass_weighted_eig(&op, &(DMatrix::identity(5, 5) * 4.0), 3).unwrap();
        assert!((&plain.eigenvalues / 4.0 - &four.eigenvalues).amax() < 1e-12);
        // M-orthonormal: same directions scaled by 1/2
        assert!((&plain.modes / 2.0 - &four.modes).amax() < 1e-10);
        assert!(mass_weighted_eig(&op, &(-DMatrix::identity(5, 5)), 2).is_err());
    }

    #[test]
    fn mass_weighted_matches_direct_generalized_solve() {
        // Tridiagonal consistent-mass-like metric on a 1D grid.
        let n = 8;
        let h = 1.0 / n as f64;
        let mass = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 4.0 * h / 6.0,
            1 => h / 6.0,
            _ => 0.0,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let op = InfoOperator::from_matrix(rand_spd(&mut rng, n, 0.1), vec![]).unwrap();
        let ms = mass_weighted_eig(&op, &mass, 4).unwrap();
        // Oracle: eigenvalues of M^{-1} A via general (non-symmetric) Schur form.
        let m_inv_a = mass.clone().try_inverse().unwrap() * op.to_dense();
        let mut direct: Vec<f64> = m_inv_a.complex_eigenvalues().iter().map(|z| z.re).collect();
        direct.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 0..4 {
            assert!((ms.eigenvalues[i] - direct[i]).abs() <= 1e-9 * direct[0]);
            assert!(ms.residual_norms[i] <= 1e-8 * direct[0]);
        }
        assert!(ms.gram_deviation(Some(&mass)) < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let ms = sym_eig(&diag_op(&[2.0, 1.0]), 2).unwrap();
        let mut buf = Vec::new();
        ms.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("2.0000000000000000e0"));
        assert!(ms.to_json().unwrap().contains("\"metric_tag\":\"euclidean\""));
    }
}
