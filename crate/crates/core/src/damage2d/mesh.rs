//! Structured bilinear plane-stress mesh.

use nalgebra::{DVector, SMatrix};

use crate::error::{Error, Result};
use crate::linalg::{BandLdl, BandMatrix};

use super::Damage2DConfig;

type Mat8 = SMatrix<f64, 8, 8>;

/// Rectangular mesh of `ny x nx` equal Q4 cells. Node `(i, j)` (column `i`
/// along x, row `j` along y) has id `i (ny + 1) + j` and dofs
/// `2 id` (u_x), `2 id + 1` (u_y).
#[derive(Clone, Debug)]
pub struct PlaneMesh {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    /// Element stiffness for unit modulus.
    k_unit: Mat8,
    fixed: Vec<usize>,
}

/// Local corner order: (0,0), (1,0), (1,1), (0,1).
const CORNERS: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];
const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Strain-displacement rows at `(xi, eta)`: `(eps_xx, eps_yy, gamma_xy)`.
fn b_matrix(xi: f64, eta: f64, dx: f64, dy: f64) -> SMatrix<f64, 3, 8> {
    let mut b = SMatrix::<f64, 3, 8>::zeros();
    for a in 0..4 {
        let dndx = XI[a] * (1.0 + ETA[a] * eta) / 4.0 * 2.0 / dx;
        let dndy = ETA[a] * (1.0 + XI[a] * xi) / 4.0 * 2.0 / dy;
        b[(0, 2 * a)] = dndx;
        b[(1, 2 * a + 1)] = dndy;
        b[(2, 2 * a)] = dndy;
        b[(2, 2 * a + 1)] = dndx;
    }
    b
}

/// Selective reduced integration: normal stresses on 2x2 Gauss points,
/// shear on the centre point (avoids shear locking in bending).
fn unit_stiffness(dx: f64, dy: f64, nu: f64, t: f64) -> Mat8 {
    let c = 1.0 / (1.0 - nu * nu);
    let d_normal = nalgebra::Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, 0.0);
    let d_shear = nalgebra::Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0);
    let jac = dx * dy / 4.0;
    let g = 1.0 / 3f64.sqrt();
    let mut k = Mat8::zeros();
    for &xi in &[-g, g] {
        for &eta in &[-g, g] {
            let b = b_matrix(xi, eta, dx, dy);
            k += b.transpose() * d_normal * b * (jac * t);
        }
    }
    let b0 = b_matrix(0.0, 0.0, dx, dy);
    k += b0.transpose() * d_shear * b0 * (4.0 * jac * t);
    k
}

impl PlaneMesh {
    pub fn new(c: &Damage2DConfig) -> Result<Self> {
        let dx = c.length / c.nx as f64;
        let dy = c.height / c.ny as f64;
        let mut mesh = Self {
            nx: c.nx,
            ny: c.ny,
            dx,
            dy,
            k_unit: unit_stiffness(dx, dy, c.poisson, c.thickness),
            fixed: vec![],
        };
        // Pin at bottom-left, roller (u_y) at bottom-right.
        let left = mesh.node(0, 0);
        let right = mesh.node(c.nx, 0);
        mesh.fixed = vec![2 * left, 2 * left + 1, 2 * right + 1];
        Ok(mesh)
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn n_dofs(&self) -> usize {
        2 * (self.nx + 1) * (self.ny + 1)
    }

    pub fn half_band(&self) -> usize {
        2 * self.ny + 5
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    /// Global dofs of cell `(row, col)` in local corner order.
    fn cell_dofs(&self, row: usize, col: usize) -> [usize; 8] {
        let mut d = [0; 8];
        for (a, &(di, dj)) in CORNERS.iter().enumerate() {
            let n = self.node(col + di, row + dj);
            d[2 * a] = 2 * n;
            d[2 * a + 1] = 2 * n + 1;
        }
        d
    }

    /// Constrained, factorized stiffness for the given cell moduli
    /// (row-major, bottom row first).
    pub fn factorize(&self, moduli: &[f64]) -> Result<BandLdl<f64>> {
        if moduli.len() != self.nx * self.ny {
            return Err(Error::DimensionMismatch {
                context: "cell moduli",
                expected: self.nx * self.ny,
                found: moduli.len(),
            });
        }
        let mut k = BandMatrix::zeros(self.n_dofs(), self.half_band());
        for row in 0..self.ny {
            for col in 0..self.nx {
                let e = moduli[row * self.nx + col];
                let d = self.cell_dofs(row, col);
                for a in 0..8 {
                    for b in 0..=a {
                        k.add(d[a], d[b], e * self.k_unit[(a, b)]);
                    }
                }
            }
        }
        for &f in &self.fixed {
            k.constrain(f);
        }
        k.factorize()
    }

    /// `scale * k_e u_e` of cell `index` scattered to global dofs (unit
    /// modulus element stiffness).
    pub fn cell_force(&self, index: usize, u: &DVector<f64>, scale: f64) -> DVector<f64> {
        let d = self.cell_dofs(index / self.nx, index % self.nx);
        let ue = nalgebra::SVector::<f64, 8>::from_fn(|a, _| u[d[a]]);
        let fe = self.k_unit * ue * scale;
        let mut f = DVector::zeros(self.n_dofs());
        for a in 0..8 {
            f[d[a]] = fe[a];
        }
        self.constrain_rhs(f)
    }

    pub fn constrain_rhs(&self, mut f: DVector<f64>) -> DVector<f64> {
        for &d in &self.fixed {
            f[d] = 0.0;
        }
        f
    }

    /// Consistent nodal loads of a downward uniform traction with resultant
    /// `total` spread over `[center - width/2, center + width/2]` of the
    /// top edge.
    pub fn top_traction(&self, center: f64, width: f64, total: f64) -> DVector<f64> {
        let q = total / width;
        let (a, b) = (center - width / 2.0, center + width / 2.0);
        let mut f = DVector::zeros(self.n_dofs());
        for col in 0..self.nx {
            let x0 = col as f64 * self.dx;
            let x1 = x0 + self.dx;
            let (lo, hi) = (a.max(x0), b.min(x1));
            if hi <= lo {
                continue;
            }
            // Integrals of the linear edge shape functions over [lo, hi].
            let s = |x: f64| (x - x0) / self.dx;
            let (sl, sh) = (s(lo), s(hi));
            let right = self.dx * (sh * sh - sl * sl) / 2.0;
            let left = (hi - lo) - right;
            f[2 * self.node(col, self.ny) + 1] -= q * left;
            f[2 * self.node(col + 1, self.ny) + 1] -= q * right;
        }
        f
    }

    /// `(du_x/dx, u_y, du_y/dx)` at `(x, y)` by bilinear interpolation.
    pub fn sample(&self, u: &DVector<f64>, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        let length = self.nx as f64 * self.dx;
        let height = self.ny as f64 * self.dy;
        if !(0.0..=length).contains(&x) || !(0.0..=height).contains(&y) {
            return Err(Error::OutsideDomain { position: x, length });
        }
        let col = ((x / self.dx) as usize).min(self.nx - 1);
        let row = ((y / self.dy) as usize).min(self.ny - 1);
        let s = x / self.dx - col as f64;
        let t = y / self.dy - row as f64;
        let d = self.cell_dofs(row, col);
        let ux = |a: usize| u[d[2 * a]];
        let uy = |a: usize| u[d[2 * a + 1]];
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
        let wx = [-(1.0 - t), 1.0 - t, t, -t];
        let mut out = (0.0, 0.0, 0.0);
        for a in 0..4 {
            out.0 += wx[a] * ux(a) / self.dx;
            out.1 += w[a] * uy(a);
            out.2 += wx[a] * uy(a) / self.dx;
        }
        Ok(out)
    }
}
