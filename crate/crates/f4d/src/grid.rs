//! Pole-offset equiangular discretization of the unit sphere.
//!
//! Nodes sit at `u_i = pi (i + 1/2) / nu`, `v_j = 2 pi j / nv`, so no sample
//! lies on a pole and `v` wraps periodically. Two quadrature rules live here:
//! the spherical weights `w_ij = sin(u_i) du dv` (summing to `4 pi`), used
//! when averaging over the sphere as a domain, and the flat parameter weight
//! `du dv`, used for the L2 inner products of vector fields where the field
//! magnitudes already carry the area density.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{F4dError, Result};

pub const EPS_DEG: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    nu: usize,
    nv: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    weights: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(nu: usize, nv: usize) -> Result<Arc<Self>> {
        if nu < 4 || nv < 4 {
            return Err(F4dError::ResolutionTooSmall { nu, nv });
        }
        let du = PI / nu as f64;
        let dv = 2.0 * PI / nv as f64;
        let u: Vec<f64> = (0..nu).map(|i| (i as f64 + 0.5) * du).collect();
        let v: Vec<f64> = (0..nv).map(|j| j as f64 * dv).collect();
        let mut weights = Vec::with_capacity(nu * nv);
        for ui in &u {
            let w = ui.sin() * du * dv;
            for _ in 0..nv {
                weights.push(w);
            }
        }
        Ok(Arc::new(Self { nu, nv, u, v, weights }))
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn du(&self) -> f64 {
        PI / self.nu as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * PI / self.nv as f64
    }

    /// Flat parameter-area weight of one cell, `du * dv`.
    pub fn cell_area(&self) -> f64 {
        self.du() * self.dv()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Spherical quadrature weights `sin(u_i) du dv`, row-major.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn same_grid(a: &Arc<SphericalGrid>, b: &Arc<SphericalGrid>) -> Result<()> {
        if Arc::ptr_eq(a, b) || (a.nu == b.nu && a.nv == b.nv) {
            Ok(())
        } else {
            Err(F4dError::GridMismatch {
                aipu: a.nu,
                aipv: a.nv,
                bipu: b.nu,
                bipv: b.nv,
            })
        }
    }

    /// Unit direction of the grid point, `(sin u cos v, sin u sin v, cos u)`.
    pub fn direction(&self, i: usize, j: usize) -> [f64; 3] {
        let (su, cu) = self.u[i].sin_cos();
        let (sv, cv) = self.v[j].sin_cos();
        [su * cv, su * sv, cu]
    }

    /// Bilinear sample of a scalar row-major field at spherical coordinates
    /// `(uq, vq)`: clamped at the u boundary rows, periodic in v.
    pub fn sample_scalar(&self, data: &[f64], uq: f64, vq: f64) -> f64 {
        let (i0, i1, fu, j0, j1, fv) = self.locate(uq, vq);
        let a = data[self.idx(i0, j0)];
        let b = data[self.idx(i0, j1)];
        let c = data[self.idx(i1, j0)];
        let d = data[self.idx(i1, j1)];
        (a * (1.0 - fv) + b * fv) * (1.0 - fu) + (c * (1.0 - fv) + d * fv) * fu
    }

    /// Bilinear sample of a 3-vector field, same boundary rules.
    pub fn sample_vec3(&self, data: &[[f64; 3]], uq: f64, vq: f64) -> [f64; 3] {
        let (i0, i1, fu, j0, j1, fv) = self.locate(uq, vq);
        let a = data[self.idx(i0, j0)];
        let b = data[self.idx(i0, j1)];
        let c = data[self.idx(i1, j0)];
        let d = data[self.idx(i1, j1)];
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = (a[k] * (1.0 - fv) + b[k] * fv) * (1.0 - fu)
                + (c[k] * (1.0 - fv) + d[k] * fv) * fu;
        }
        out
    }

    fn locate(&self, uq: f64, vq: f64) -> (usize, usize, f64, usize, usize, f64) {
        let x = uq / self.du() - 0.5;
        let (i0, fu) = if x <= 0.0 {
            (0usize, 0.0)
        } else if x >= (self.nu - 1) as f64 {
            (self.nu - 2, 1.0)
        } else {
            let i = x.floor() as usize;
            (i.min(self.nu - 2), x - x.floor())
        };
        let i1 = i0 + 1;

        let y = (vq / self.dv()).rem_euclid(self.nv as f64);
        let j0 = (y.floor() as usize) % self.nv;
        let fv = y - y.floor();
        let j1 = (j0 + 1) % self.nv;
        (i0, i1, fu, j0, j1, fv)
    }
}

/// d/du of a row-major scalar field: central in the interior, second-order
/// one-sided at the first and last u rows.
pub fn d_du(grid: &SphericalGrid, data: &[f64], out: &mut [f64]) {
    let (nu, nv) = (grid.nu, grid.nv);
    let h2 = 2.0 * grid.du();
    for j in 0..nv {
        out[j] = (-3.0 * data[j] + 4.0 * data[nv + j] - data[2 * nv + j]) / h2;
        let l = nu - 1;
        out[l * nv + j] =
            (3.0 * data[l * nv + j] - 4.0 * data[(l - 1) * nv + j] + data[(l - 2) * nv + j]) / h2;
    }
    for i in 1..nu - 1 {
        for j in 0..nv {
            out[i * nv + j] = (data[(i + 1) * nv + j] - data[(i - 1) * nv + j]) / h2;
        }
    }
}

/// d/dv of a row-major scalar field, central with periodic wrap.
pub fn d_dv(grid: &SphericalGrid, data: &[f64], out: &mut [f64]) {
    let (nu, nv) = (grid.nu, grid.nv);
    let h2 = 2.0 * grid.dv();
    for i in 0..nu {
        let row = i * nv;
        for j in 0..nv {
            let jp = (j + 1) % nv;
            let jm = (j + nv - 1) % nv;
            out[row + j] = (data[row + jp] - data[row + jm]) / h2;
        }
    }
}

/// Transpose of [`d_du`] as a linear operator under the plain (unweighted)
/// dot product. Needed by adjoint-mode gradients.
pub fn d_du_transpose(grid: &SphericalGrid, data: &[f64], out: &mut [f64]) {
    let (nu, nv) = (grid.nu, grid.nv);
    let h2 = 2.0 * grid.du();
    out.iter_mut().for_each(|x| *x = 0.0);
    for j in 0..nv {
        // row 0 stencil scatters into rows 0..3
        out[j] += -3.0 * data[j] / h2;
        out[nv + j] += 4.0 * data[j] / h2;
        out[2 * nv + j] += -data[j] / h2;
        let l = nu - 1;
        out[l * nv + j] += 3.0 * data[l * nv + j] / h2;
        out[(l - 1) * nv + j] += -4.0 * data[l * nv + j] / h2;
        out[(l - 2) * nv + j] += data[l * nv + j] / h2;
    }
    for i in 1..nu - 1 {
        for j in 0..nv {
            let c = data[i * nv + j] / h2;
            out[(i + 1) * nv + j] += c;
            out[(i - 1) * nv + j] -= c;
        }
    }
}

/// Transpose of [`d_dv`]; the periodic central stencil is antisymmetric.
pub fn d_dv_transpose(grid: &SphericalGrid, data: &[f64], out: &mut [f64]) {
    d_dv(grid, data, out);
    out.iter_mut().for_each(|x| *x = -*x);
}
