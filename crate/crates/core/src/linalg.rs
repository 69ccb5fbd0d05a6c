//! Dense and banded linear-algebra helpers used across the crate.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// `max |M - M^T|`.
pub fn symmetry_defect<T: Scalar>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Returns `(M + M^T) / 2`.
pub fn symmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * half)
}

/// Flips the column so that its largest-magnitude component is positive.
/// The first index wins among equal magnitudes.
pub fn fix_sign<T: Scalar>(v: &mut DVector<T>) -> bool {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v.len() > 0 && v[best] < T::zero() {
        v.neg_mut();
        true
    } else {
        false
    }
}

/// Symmetric eigendecomposition with eigenvalues in descending order and
/// eigenvectors normalized by the sign rule of [`fix_sign`].
pub fn eigh_desc<T: Scalar>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

pub fn min_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    let (values, _) = eigh_desc(m);
    values.iter().fold(T::max_value().unwrap_or(T::one()), |a, &b| a.min(b))
}

pub fn max_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    let (values, _) = eigh_desc(m);
    values.iter().fold(T::zero(), |a, &b| a.max(b))
}

/// Number of singular values above `rel * sigma_max`.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, rel: T) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    if smax == T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Eigenvalue-thresholded pseudoinverse of a symmetric matrix. Eigenvalues at
/// or below `rel_tol * lambda_max` are treated as zero.
pub fn pinv_sym<T: Scalar>(m: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let n = m.nrows();
    let (values, vectors) = eigh_desc(m);
    let lmax = values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let mut out = DMatrix::zeros(n, n);
    if lmax == T::zero() {
        return out;
    }
    for i in 0..n {
        let l = values[i];
        if l > rel_tol * lmax {
            let v = vectors.column(i);
            out += (v * v.transpose()) / l;
        }
    }
    out
}

/// Symmetric band matrix stored by its lower band, with `LDL^T`
/// factorization (no conjugation, so complex-symmetric systems work too).
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    half_band: usize,
    data: Vec<T>,
}

impl<T: ComplexField + Copy> BandMatrix<T> {
    pub fn zeros(n: usize, half_band: usize) -> Self {
        Self {
            n,
            half_band,
            data: vec![T::zero(); n * (half_band + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_band(&self) -> usize {
        self.half_band
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.half_band);
        i * (self.half_band + 1) + (j + self.half_band - i)
    }

    /// Entry `(i, j)` of the symmetric matrix (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.half_band {
            T::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to the symmetric pair `(i, j)` / `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.half_band, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Replaces row and column `i` by the identity row (homogeneous
    /// Dirichlet constraint).
    pub fn constrain(&mut self, i: usize) {
        let lo = i.saturating_sub(self.half_band);
        for j in lo..i {
            let k = self.idx(i, j);
            self.data[k] = T::zero();
        }
        let hi = (i + self.half_band).min(self.n - 1);
        for r in (i + 1)..=hi {
            let k = self.idx(r, i);
            self.data[k] = T::zero();
        }
        let k = self.idx(i, i);
        self.data[k] = T::one();
    }

    pub fn mul_vec(&self, x: &DVector<T>) -> DVector<T> {
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.half_band);
            for j in lo..i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.idx(i, i)] * x[i];
        }
        y
    }

    /// In-place `LDL^T` factorization. Fails on a pivot whose modulus drops
    /// below `1e-13` of the largest diagonal entry.
    pub fn factorize(mut self) -> Result<BandLdl<T>> {
        let n = self.n;
        let hb = self.half_band;
        let scale = (0..n)
            .map(|i| self.data[self.idx(i, i)].modulus())
            .fold(T::RealField::zero(), |a, b| if b > a { b } else { a });
        let floor = scale * nalgebra::convert::<f64, T::RealField>(1e-13);
        let mut diag = vec![T::zero(); n];
        for i in 0..n {
            let lo = i.saturating_sub(hb);
            for j in lo..i {
                let jlo = j.saturating_sub(hb).max(lo);
                let mut s = self.data[self.idx(i, j)];
                for k in jlo..j {
                    s -= self.data[self.idx(i, k)] * diag[k] * self.data[self.idx(j, k)];
                }
                let l = s / diag[j];
                let k = self.idx(i, j);
                self.data[k] = l;
            }
            let mut d = self.data[self.idx(i, i)];
            for k in lo..i {
                let l = self.data[self.idx(i, k)];
                d -= l * l * diag[k];
            }
            if !(d.modulus() > floor) {
                return Err(Error::Singular(format!(
                    "zero pivot at row {i} of {n} in banded LDL^T"
                )));
            }
            diag[i] = d;
        }
        Ok(BandLdl { band: self, diag })
    }
}

/// Factorized band matrix.
#[derive(Clone, Debug)]
pub struct BandLdl<T> {
    band: BandMatrix<T>,
    diag: Vec<T>,
}

impl<T: ComplexField + Copy> BandLdl<T> {
    pub fn dim(&self) -> usize {
        self.band.n
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        let n = self.band.n;
        let hb = self.band.half_band;
        let mut x = b.clone();
        for i in 0..n {
            let lo = i.saturating_sub(hb);
            let mut s = x[i];
            for k in lo..i {
                s -= self.band.data[self.band.idx(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let hi = (i + hb).min(n - 1);
            let mut s = x[i];
            for r in (i + 1)..=hi {
                s -= self.band.data[self.band.idx(r, i)] * x[r];
            }
            x[i] = s;
        }
        x
    }
}
