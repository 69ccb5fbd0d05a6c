use nalgebra::DVector;

use super::{BeamMesh, MovingLoadCase};
use crate::error::{check_dim, Result};
use crate::linalg::{BandLdl, BandMatrix};
use crate::scalar::Scalar;

/// Hermite cubic shape functions on an element of length `h`, local
/// coordinate `xi` in `[0, 1]`, dof order `(w_a, w'_a, w_b, w'_b)`.
pub mod hermite {
    use crate::scalar::Scalar;

    pub fn n<T: Scalar>(xi: T, h: T) -> [T; 4] {
        let (x2, x3) = (xi * xi, xi * xi * xi);
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        [
            T::one() - three * x2 + two * x3,
            h * (xi - two * x2 + x3),
            three * x2 - two * x3,
            h * (x3 - x2),
        ]
    }

    /// `dN/dx`
    pub fn dn<T: Scalar>(xi: T, h: T) -> [T; 4] {
        let six = T::lit(6.0);
        let x2 = xi * xi;
        [
            six * (x2 - xi) / h,
            T::one() - T::lit(4.0) * xi + T::lit(3.0) * x2,
            six * (xi - x2) / h,
            T::lit(3.0) * x2 - T::lit(2.0) * xi,
        ]
    }

    /// `d^2N/dx^2`
    pub fn ddn<T: Scalar>(xi: T, h: T) -> [T; 4] {
        let six = T::lit(6.0);
        let twelve = T::lit(12.0);
        [
            (twelve * xi - six) / (h * h),
            (six * xi - T::lit(4.0)) / h,
            (six - twelve * xi) / (h * h),
            (six * xi - T::lit(2.0)) / h,
        ]
    }

    /// Bending stiffness `EI/h^3 [[12, 6h, -12, 6h], ...]`.
    pub fn stiffness<T: Scalar>(ei: T, h: T) -> [[T; 4]; 4] {
        let c = ei / (h * h * h);
        let l = |x: f64| T::lit(x);
        let h2 = h * h;
        [
            [l(12.0) * c, l(6.0) * h * c, l(-12.0) * c, l(6.0) * h * c],
            [l(6.0) * h * c, l(4.0) * h2 * c, l(-6.0) * h * c, l(2.0) * h2 * c],
            [l(-12.0) * c, l(-6.0) * h * c, l(12.0) * c, l(-6.0) * h * c],
            [l(6.0) * h * c, l(2.0) * h2 * c, l(-6.0) * h * c, l(4.0) * h2 * c],
        ]
    }

    /// Consistent mass `rho A h / 420 [[156, 22h, 54, -13h], ...]`.
    pub fn mass<T: Scalar>(rho_a: T, h: T) -> [[T; 4]; 4] {
        let c = rho_a * h / T::lit(420.0);
        let l = |x: f64| T::lit(x);
        let h2 = h * h;
        [
            [l(156.0) * c, l(22.0) * h * c, l(54.0) * c, l(-13.0) * h * c],
            [l(22.0) * h * c, l(4.0) * h2 * c, l(13.0) * h * c, l(-3.0) * h2 * c],
            [l(54.0) * c, l(13.0) * h * c, l(156.0) * c, l(-22.0) * h * c],
            [l(-13.0) * h * c, l(-3.0) * h2 * c, l(-22.0) * h * c, l(4.0) * h2 * c],
        ]
    }

    /// Two-point Gauss abscissae on `[0, 1]` (weights 1/2 each).
    pub fn gauss2<T: Scalar>() -> [T; 2] {
        let d = T::lit(0.5) / T::lit(3.0).sqrt();
        [T::lit(0.5) - d, T::lit(0.5) + d]
    }
}

/// Point inside an element used for moment sampling and quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T> {
    pub element: usize,
    pub xi: T,
    pub x: T,
    /// Gauss weight in length units.
    pub weight: T,
}

/// Assembled and factorized constrained stiffness of a mesh.
#[derive(Clone, Debug)]
pub struct BeamSystem<T: Scalar> {
    mesh: BeamMesh<T>,
    ldl: BandLdl<T>,
}

pub(crate) fn element_dofs(e: usize) -> [usize; 4] {
    [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
}

impl<T: Scalar> BeamSystem<T> {
    pub fn assemble(mesh: &BeamMesh<T>) -> Result<Self> {
        let mut k = BandMatrix::zeros(mesh.n_dofs(), 3);
        for e in 0..mesh.n_elements() {
            let ke = hermite::stiffness(mesh.ei()[e], mesh.element_length(e));
            let dofs = element_dofs(e);
            for a in 0..4 {
                for b in 0..=a {
                    k.add(dofs[a], dofs[b], ke[a][b]);
                }
            }
        }
        for &s in mesh.supports() {
            k.constrain(2 * s);
        }
        Ok(Self {
            mesh: mesh.clone(),
            ldl: k.factorize()?,
        })
    }

    pub fn mesh(&self) -> &BeamMesh<T> {
        &self.mesh
    }

    fn constrained_solve(&self, mut rhs: DVector<T>) -> DVector<T> {
        for &s in self.mesh.supports() {
            rhs[2 * s] = T::zero();
        }
        self.ldl.solve(&rhs)
    }

    /// Consistent nodal load of a downward point force.
    pub fn load_vector(&self, case: &MovingLoadCase<T>) -> Result<DVector<T>> {
        let (e, xi) = self.mesh.locate(case.position)?;
        let n = hermite::n(xi, self.mesh.element_length(e));
        let mut f = DVector::zeros(self.mesh.n_dofs());
        for (a, &d) in element_dofs(e).iter().enumerate() {
            f[d] = -case.magnitude * n[a];
        }
        Ok(f)
    }

    /// Tilt functional `l_r` with `theta(r) = l_r^T u = -w'(r)`.
    pub fn tilt_functional(&self, r: T) -> Result<DVector<T>> {
        let (e, xi) = self.mesh.locate(r)?;
        let dn = hermite::dn(xi, self.mesh.element_length(e));
        let mut l = DVector::zeros(self.mesh.n_dofs());
        for (a, &d) in element_dofs(e).iter().enumerate() {
            l[d] = -dn[a];
        }
        Ok(l)
    }

    pub fn solve_primal(&self, case: &MovingLoadCase<T>) -> Result<DVector<T>> {
        Ok(self.constrained_solve(self.load_vector(case)?))
    }

    pub fn solve_adjoint(&self, r: T) -> Result<DVector<T>> {
        Ok(self.constrained_solve(self.tilt_functional(r)?))
    }

    pub fn solve_rhs(&self, rhs: &DVector<T>) -> Result<DVector<T>> {
        check_dim("beam right-hand side", self.mesh.n_dofs(), rhs.len())?;
        Ok(self.constrained_solve(rhs.clone()))
    }

    fn local(&self, u: &DVector<T>, x: T) -> Result<(usize, T, [T; 4])> {
        check_dim("beam dof vector", self.mesh.n_dofs(), u.len())?;
        let (e, xi) = self.mesh.locate(x)?;
        let d = element_dofs(e);
        Ok((e, xi, [u[d[0]], u[d[1]], u[d[2]], u[d[3]]]))
    }

    fn contract(a: [T; 4], b: [T; 4]) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
    }

    pub fn deflection(&self, u: &DVector<T>, x: T) -> Result<T> {
        let (e, xi, ue) = self.local(u, x)?;
        Ok(Self::contract(hermite::n(xi, self.mesh.element_length(e)), ue))
    }

    /// Observed tilt `-w'(x)`.
    pub fn rotation(&self, u: &DVector<T>, x: T) -> Result<T> {
        let (e, xi, ue) = self.local(u, x)?;
        Ok(-Self::contract(hermite::dn(xi, self.mesh.element_length(e)), ue))
    }

    /// Bending moment `EI w''`; linear within each element.
    pub fn moment(&self, u: &DVector<T>, x: T) -> Result<T> {
        let (e, xi, ue) = self.local(u, x)?;
        Ok(self.mesh.ei()[e] * Self::contract(hermite::ddn(xi, self.mesh.element_length(e)), ue))
    }

    /// Moment inside element `e` at local coordinate `xi`.
    pub fn element_moment(&self, u: &DVector<T>, e: usize, xi: T) -> Option<T> {
        if e >= self.mesh.n_elements() || u.len() != self.mesh.n_dofs() {
            return None;
        }
        let d = element_dofs(e);
        let ue = [u[d[0]], u[d[1]], u[d[2]], u[d[3]]];
        Some(self.mesh.ei()[e] * Self::contract(hermite::ddn(xi, self.mesh.element_length(e)), ue))
    }

    /// Two Gauss points per element, left to right.
    pub fn samples(&self) -> Vec<Sample<T>> {
        let g = hermite::gauss2::<T>();
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(2 * self.mesh.n_elements());
        for e in 0..self.mesh.n_elements() {
            let h = self.mesh.element_length(e);
            for &xi in &g {
                out.push(Sample {
                    element: e,
                    xi,
                    x: self.mesh.nodes()[e] + xi * h,
                    weight: half * h,
                });
            }
        }
        out
    }

    /// Moments at [`BeamSystem::samples`].
    pub fn moment_samples(&self, u: &DVector<T>) -> Result<DVector<T>> {
        check_dim("beam dof vector", self.mesh.n_dofs(), u.len())?;
        let s = self.samples();
        Ok(DVector::from_fn(s.len(), |i, _| {
            self.element_moment(u, s[i].element, s[i].xi).expect("sample inside mesh")
        }))
    }

    /// Sensor tilts for one load case.
    pub fn tilts(&self, sensors: &[T], case: &MovingLoadCase<T>) -> Result<Vec<T>> {
        let u = self.solve_primal(case)?;
        sensors.iter().map(|&r| self.rotation(&u, r)).collect()
    }
}
