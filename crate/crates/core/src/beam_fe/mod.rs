//! Hermite-cubic Euler-Bernoulli beam elements for one- and multi-span
//! beams under moving point loads.
//!
//! Conventions: deflection `w` is positive upward and loads act downward;
//! the bending moment is `M = EI w''` (sagging positive); the observed tilt
//! at a sensor is `theta = -w'`. With these signs the adjoint moment of a
//! tilt sensor equals the normalized influence `mu` of the analytic layer.

mod kernel;
mod system;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use kernel::{assemble_kernel, assemble_kernel_at, static_tilt_jacobian, KernelGrid, KernelParam};
pub(crate) use system::element_dofs;
pub use system::{hermite, BeamSystem};

/// Node coordinates, per-element rigidity and vertically supported nodes.
/// Each node carries a deflection and a slope degree of freedom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamMesh<T> {
    nodes: Vec<T>,
    ei: Vec<T>,
    supports: Vec<usize>,
}

impl<T: Scalar> BeamMesh<T> {
    pub fn new(nodes: Vec<T>, ei: Vec<T>, mut supports: Vec<usize>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("a beam mesh needs at least two nodes".into()));
        }
        if ei.len() != nodes.len() - 1 {
            return Err(Error::DimensionMismatch {
                context: "element rigidities",
                expected: nodes.len() - 1,
                found: ei.len(),
            });
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("node coordinates must increase".into()));
        }
        if ei.iter().any(|&e| !(e > T::zero() && e.is_finite())) {
            return Err(Error::InvalidArgument("element rigidities must be positive".into()));
        }
        supports.sort_unstable();
        supports.dedup();
        let last = nodes.len() - 1;
        if supports.first() != Some(&0) || supports.last() != Some(&last) {
            return Err(Error::InvalidArgument("both beam ends must be supported".into()));
        }
        Ok(Self { nodes, ei, supports })
    }

    /// Simply supported single span with `n_el` equal elements.
    pub fn uniform(length: T, n_el: usize, ei: T) -> Result<Self> {
        Self::spans(&[length], n_el, ei)
    }

    /// Continuous beam over consecutive spans, `n_per_span` equal elements
    /// each, with a vertical support at every span end.
    pub fn spans(lengths: &[T], n_per_span: usize, ei: T) -> Result<Self> {
        if lengths.is_empty() || n_per_span == 0 {
            return Err(Error::InvalidArgument("need at least one span and one element".into()));
        }
        let mut nodes = vec![T::zero()];
        let mut supports = vec![0];
        let mut x0 = T::zero();
        for &l in lengths {
            if !(l > T::zero()) {
                return Err(Error::InvalidArgument("span lengths must be positive".into()));
            }
            for i in 1..=n_per_span {
                nodes.push(x0 + l * T::from_count(i) / T::from_count(n_per_span));
            }
            x0 += l;
            supports.push(nodes.len() - 1);
        }
        let n_el = nodes.len() - 1;
        Self::new(nodes, vec![ei; n_el], supports)
    }

    pub fn two_span(l1: T, l2: T, n_per_span: usize, ei: T) -> Result<Self> {
        Self::spans(&[l1, l2], n_per_span, ei)
    }

    /// Same geometry with new element rigidities.
    pub fn with_ei(&self, ei: Vec<T>) -> Result<Self> {
        Self::new(self.nodes.clone(), ei, self.supports.clone())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn ei(&self) -> &[T] {
        &self.ei
    }

    pub fn supports(&self) -> &[usize] {
        &self.supports
    }

    pub fn support_positions(&self) -> Vec<T> {
        self.supports.iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn n_elements(&self) -> usize {
        self.ei.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn length(&self) -> T {
        self.nodes[self.nodes.len() - 1] - self.nodes[0]
    }

    pub fn element_length(&self, e: usize) -> T {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn element_midpoint(&self, e: usize) -> T {
        (self.nodes[e] + self.nodes[e + 1]) / T::lit(2.0)
    }

    /// Element containing `x` and the local coordinate `xi` in `[0, 1]`.
    /// Interior nodes belong to the element on their right.
    pub fn locate(&self, x: T) -> Result<(usize, T)> {
        let (a, b) = (self.nodes[0], self.nodes[self.nodes.len() - 1]);
        if !(x >= a && x <= b) {
            return Err(Error::OutsideDomain {
                position: x.as_f64(),
                length: self.length().as_f64(),
            });
        }
        // first node strictly greater than x
        let upper = self.nodes.partition_point(|&n| n <= x);
        let e = upper.saturating_sub(1).min(self.n_elements() - 1);
        let xi = (x - self.nodes[e]) / self.element_length(e);
        Ok((e, xi.max(T::zero()).min(T::one())))
    }
}

/// One static load position of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovingLoadCase<T> {
    pub position: T,
    pub magnitude: T,
    /// Design-measure weight of this position (length units).
    pub weight: T,
    pub sigma: T,
}

impl<T: Scalar> MovingLoadCase<T> {
    pub fn new(position: T, magnitude: T, weight: T, sigma: T) -> Result<Self> {
        if !(weight > T::zero() && sigma > T::zero()) {
            return Err(Error::InvalidArgument("load-case weight and sigma must be positive".into()));
        }
        Ok(Self {
            position,
            magnitude,
            weight,
            sigma,
        })
    }

    /// `n_z` equally spaced positions over the whole beam with trapezoid
    /// weights.
    pub fn uniform_sweep(mesh: &BeamMesh<T>, n_z: usize, magnitude: T, sigma: T) -> Result<Vec<Self>> {
        if n_z < 2 {
            return Err(Error::InvalidArgument("a sweep needs at least two positions".into()));
        }
        let x0 = mesh.nodes()[0];
        let len = mesh.length();
        let h = len / T::from_count(n_z - 1);
        (0..n_z)
            .map(|k| {
                let w = if k == 0 || k == n_z - 1 { h / T::lit(2.0) } else { h };
                let z = if k == n_z - 1 { x0 + len } else { x0 + h * T::from_count(k) };
                Self::new(z, magnitude, w, sigma)
            })
            .collect()
    }

    /// Loads at every mesh node with trapezoid weights, the sweep for which
    /// the Hermite solution is exact everywhere.
    pub fn nodal_sweep(mesh: &BeamMesh<T>, magnitude: T, sigma: T) -> Result<Vec<Self>> {
        let nodes = mesh.nodes();
        let n = nodes.len();
        let half = T::lit(0.5);
        (0..n)
            .map(|i| {
                let left = if i > 0 { nodes[i] - nodes[i - 1] } else { T::zero() };
                let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { T::zero() };
                Self::new(nodes[i], magnitude, half * (left + right), sigma)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_construction() {
        let m = BeamMesh::uniform(10.0, 4, 2.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(m.supports(), &[0, 4]);
        let t = BeamMesh::two_span(4.0, 6.0, 2, 1.0).unwrap();
        assert_eq!(t.support_positions(), vec![0.0, 4.0, 10.0]);
        assert_eq!(t.n_dofs(), 10);
        assert!(BeamMesh::new(vec![0.0, 1.0], vec![1.0], vec![0]).is_err());
        assert!(BeamMesh::new(vec![0.0, 1.0], vec![-1.0], vec![0, 1]).is_err());
        assert!(BeamMesh::new(vec![0.0, 0.0], vec![1.0], vec![0, 1]).is_err());
    }

    #[test]
    fn locate_points() {
        let m = BeamMesh::uniform(4.0, 4, 1.0).unwrap();
        assert_eq!(m.locate(0.0).unwrap(), (0, 0.0));
        assert_eq!(m.locate(1.0).unwrap(), (1, 0.0));
        assert_eq!(m.locate(1.5).unwrap(), (1, 0.5));
        assert_eq!(m.locate(4.0).unwrap(), (3, 1.0));
        assert!(matches!(m.locate(4.5), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn sweeps_integrate_length() {
        let m = BeamMesh::two_span(3.0, 5.0, 7, 1.0).unwrap();
        let u = MovingLoadCase::uniform_sweep(&m, 81, 1.0, 0.1).unwrap();
        let total: f64 = u.iter().map(|c| c.weight).sum();
        assert!((total - 8.0).abs() < 1e-12);
        assert_eq!(u.last().unwrap().position, 8.0);
        let n = MovingLoadCase::nodal_sweep(&m, 1.0, 0.1).unwrap();
        let total: f64 = n.iter().map(|c| c.weight).sum();
        assert!((total - 8.0).abs() < 1e-12);
    }
}
