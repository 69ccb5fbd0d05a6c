//! Finite-element frequency response of a (possibly nonuniform) beam.

use nalgebra::DVector;
use num_complex::Complex;

use crate::beam_fe::{hermite, BeamMesh};
use crate::beam_fe::element_dofs;
use crate::error::{Error, Result};
use crate::linalg::{BandLdl, BandMatrix};
use crate::scalar::Scalar;

use super::cabs;

/// Hermite-cubic dynamic stiffness `Z = K - omega^2 M + i omega C` with
/// mass-proportional viscous damping `C = (c_d / rhoA) M`.
#[derive(Clone, Debug)]
pub struct FeFrfModel<T: Scalar> {
    mesh: BeamMesh<T>,
    rho_a: T,
    c_d: T,
    force: T,
}

/// FRF value with its element-wise log-magnitude sensitivities.
#[derive(Clone, Debug)]
pub struct FrfRow<T: Scalar> {
    pub h: Complex<T>,
    /// `Re(dH/dp_e / H)` for each element log-rigidity `p_e`.
    pub row: DVector<T>,
}

fn shape_vector<T: Scalar>(mesh: &BeamMesh<T>, x: T, scale: T) -> Result<DVector<Complex<T>>> {
    let (e, xi) = mesh.locate(x)?;
    let n = hermite::n(xi, mesh.element_length(e));
    let mut f = DVector::from_element(mesh.n_dofs(), Complex::new(T::zero(), T::zero()));
    for (a, &d) in element_dofs(e).iter().enumerate() {
        f[d] = Complex::new(scale * n[a], T::zero());
    }
    for &s in mesh.supports() {
        f[2 * s] = Complex::new(T::zero(), T::zero());
    }
    Ok(f)
}

impl<T: Scalar> FeFrfModel<T> {
    pub fn new(mesh: BeamMesh<T>, rho_a: T, c_d: T, force: T) -> Result<Self> {
        if !(rho_a > T::zero() && c_d >= T::zero() && force > T::zero()) {
            return Err(Error::InvalidArgument(
                "rhoA and force must be positive, damping nonnegative".into(),
            ));
        }
        Ok(Self {
            mesh,
            rho_a,
            c_d,
            force,
        })
    }

    pub fn mesh(&self) -> &BeamMesh<T> {
        &self.mesh
    }

    /// Same model with new element rigidities.
    pub fn with_ei(&self, ei: Vec<T>) -> Result<Self> {
        Ok(Self {
            mesh: self.mesh.with_ei(ei)?,
            ..self.clone()
        })
    }

    fn factorize(&self, omega: T) -> Result<BandLdl<Complex<T>>> {
        let mesh = &self.mesh;
        let mut z = BandMatrix::zeros(mesh.n_dofs(), 3);
        let damp = omega * self.c_d / self.rho_a;
        for e in 0..mesh.n_elements() {
            let h = mesh.element_length(e);
            let ke = hermite::stiffness(mesh.ei()[e], h);
            let me = hermite::mass(self.rho_a, h);
            let dofs = element_dofs(e);
            for a in 0..4 {
                for b in 0..=a {
                    let v = Complex::new(ke[a][b] - omega * omega * me[a][b], damp * me[a][b]);
                    z.add(dofs[a], dofs[b], v);
                }
            }
        }
        for &s in mesh.supports() {
            z.constrain(2 * s);
        }
        z.factorize().map_err(|_| Error::Resonance {
            mode: 0,
            omega: omega.as_f64(),
        })
    }

    fn states(&self, r: T, z: T, omega: T) -> Result<(DVector<Complex<T>>, DVector<Complex<T>>, Complex<T>)> {
        let ldl = self.factorize(omega)?;
        let f = shape_vector(&self.mesh, z, self.force)?;
        let l = shape_vector(&self.mesh, r, T::one())?;
        let u = ldl.solve(&f);
        let lam = ldl.solve(&l);
        let h = l.iter().zip(u.iter()).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b);
        Ok((u, lam, h))
    }

    /// Deflection at `r` per harmonic force `F` at `z`.
    pub fn frf(&self, r: T, z: T, omega: T) -> Result<Complex<T>> {
        Ok(self.states(r, z, omega)?.2)
    }

    /// FRF and `Re(dH/dp_e / H)` by the adjoint
    /// `dH/dp_e = -EI_e lambda_e^T k_e u_e`.
    pub fn log_frf_row(&self, r: T, z: T, omega: T) -> Result<FrfRow<T>> {
        let (u, lam, h) = self.states(r, z, omega)?;
        if !(cabs(h) > T::zero()) {
            return Err(Error::Antiresonance {
                z: z.as_f64(),
                omega: omega.as_f64(),
                magnitude: 0.0,
            });
        }
        let mesh = &self.mesh;
        let row = DVector::from_iterator(
            mesh.n_elements(),
            (0..mesh.n_elements()).map(|e| {
                let k0 = hermite::stiffness(mesh.ei()[e], mesh.element_length(e));
                let d = element_dofs(e);
                let mut acc = Complex::new(T::zero(), T::zero());
                for a in 0..4 {
                    for b in 0..4 {
                        acc += lam[d[a]] * u[d[b]] * k0[a][b];
                    }
                }
                (-acc / h).re
            }),
        );
        Ok(FrfRow { h, row })
    }

    /// Central difference of `log|H|` in `p_e = log EI_e` with step `step`.
    ///
    /// Evaluated as `Re ln(1 + l^T (u+ - u-) / H-)` with
    /// `Z+ (u+ - u-) = (Z- - Z+) u-`, so no two nearly equal FRFs are
    /// subtracted.
    pub fn log_frf_fd(&self, r: T, z: T, omega: T, element: usize, step: T) -> Result<T> {
        let mesh = &self.mesh;
        if element >= mesh.n_elements() || !(step > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "element {element} of {} with step {step:?}",
                mesh.n_elements()
            )));
        }
        let bump = |sign: T| {
            let mut ei = mesh.ei().to_vec();
            ei[element] *= (sign * step).exp();
            self.with_ei(ei)
        };
        let (plus, minus) = (bump(T::one())?, bump(-T::one())?);
        let (u_m, _, h_m) = minus.states(r, z, omega)?;
        let d_ei = minus.mesh.ei()[element] - plus.mesh.ei()[element];
        let ke = hermite::stiffness(d_ei, mesh.element_length(element));
        let dofs = element_dofs(element);
        let mut rhs = DVector::from_element(mesh.n_dofs(), Complex::new(T::zero(), T::zero()));
        for a in 0..4 {
            for b in 0..4 {
                rhs[dofs[a]] += u_m[dofs[b]] * ke[a][b];
            }
        }
        for &s in mesh.supports() {
            rhs[2 * s] = Complex::new(T::zero(), T::zero());
        }
        let du = plus.factorize(omega)?.solve(&rhs);
        let l = shape_vector(mesh, r, T::one())?;
        let dh = l.iter().zip(du.iter()).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b);
        let two = T::one() + T::one();
        Ok(cabs(Complex::new(T::one(), T::zero()) + dh / h_m).ln() / (two * step))
    }
}
