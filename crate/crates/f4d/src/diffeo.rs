//! Sampled orientation-preserving self-maps of the sphere and their actions
//! on surfaces and SRNFs.
//!
//! A diffeo is stored as absolute target coordinates per grid point together
//! with the determinant of its parameter-plane Jacobian. Interpolation and
//! composition work on the displacement form `(gamma_u - u, gamma_v - v)`,
//! which stays smooth across the v seam.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{F4dError, Result};
use crate::field::Field3;
use crate::grid::{d_du, d_dv, SphericalGrid};
use crate::srnf::Srnf;
use crate::surface::Surface;

const U_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereDiffeo {
    grid: Arc<SphericalGrid>,
    target_u: Vec<f64>,
    target_v: Vec<f64>,
    jac_det: Vec<f64>,
    coeffs: Option<Vec<f64>>,
}

fn wrap_pm_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl SphereDiffeo {
    pub fn identity(grid: Arc<SphericalGrid>) -> Self {
        let n = grid.len();
        let mut target_u = Vec::with_capacity(n);
        let mut target_v = Vec::with_capacity(n);
        for i in 0..grid.nu() {
            for j in 0..grid.nv() {
                target_u.push(grid.u()[i]);
                target_v.push(grid.v()[j]);
            }
        }
        Self {
            grid,
            target_u,
            target_v,
            jac_det: vec![1.0; n],
            coeffs: None,
        }
    }

    /// Builds the map `s -> s + d(s)` and its Jacobian determinant.
    /// The identity (zero displacement) yields `jac_det == 1` exactly.
    pub fn from_displacement(grid: Arc<SphericalGrid>, disp_u: &[f64], disp_v: &[f64]) -> Self {
        assert_eq!(disp_u.len(), grid.len());
        assert_eq!(disp_v.len(), grid.len());
        let mut target_u = Vec::with_capacity(grid.len());
        let mut target_v = Vec::with_capacity(grid.len());
        for i in 0..grid.nu() {
            for j in 0..grid.nv() {
                let k = grid.idx(i, j);
                target_u.push((grid.u()[i] + disp_u[k]).clamp(U_CLAMP, PI - U_CLAMP));
                target_v.push((grid.v()[j] + disp_v[k]).rem_euclid(2.0 * PI));
            }
        }
        let jac_det = jacobian_from_displacement(&grid, disp_u, disp_v);
        Self {
            grid,
            target_u,
            target_v,
            jac_det,
            coeffs: None,
        }
    }

    /// Reassembles a diffeo from stored fields (used by the readers); the
    /// caller is responsible for validity checks.
    pub fn from_raw_parts(
        grid: Arc<SphericalGrid>,
        target_u: Vec<f64>,
        target_v: Vec<f64>,
        jac_det: Vec<f64>,
        coeffs: Option<Vec<f64>>,
    ) -> Self {
        assert_eq!(target_u.len(), grid.len());
        assert_eq!(target_v.len(), grid.len());
        assert_eq!(jac_det.len(), grid.len());
        Self {
            grid,
            target_u,
            target_v,
            jac_det,
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn target_u(&self) -> &[f64] {
        &self.target_u
    }

    pub fn target_v(&self) -> &[f64] {
        &self.target_v
    }

    pub fn jac_det(&self) -> &[f64] {
        &self.jac_det
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    pub fn set_coeffs(&mut self, coeffs: Option<Vec<f64>>) {
        self.coeffs = coeffs;
    }

    pub fn min_jac(&self) -> f64 {
        self.jac_det.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.min_jac() > 0.0
    }

    pub fn require_valid(&self) -> Result<()> {
        let min_jac = self.min_jac();
        if min_jac > 0.0 {
            Ok(())
        } else {
            Err(F4dError::InvalidDiffeo { min_jac })
        }
    }

    /// Displacement fields `(gamma_u - u, wrap(gamma_v - v))`.
    pub fn displacement(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut du = Vec::with_capacity(g.len());
        let mut dv = Vec::with_capacity(g.len());
        for i in 0..g.nu() {
            for j in 0..g.nv() {
                let k = g.idx(i, j);
                du.push(self.target_u[k] - g.u()[i]);
                dv.push(wrap_pm_pi(self.target_v[k] - g.v()[j]));
            }
        }
        (du, dv)
    }

    /// Evaluates the map at an arbitrary point by interpolating the
    /// displacement field.
    pub fn eval(&self, uq: f64, vq: f64) -> (f64, f64) {
        let (du, dv) = self.displacement();
        let au = self.grid.sample_scalar(&du, uq, vq);
        let av = self.grid.sample_scalar(&dv, uq, vq);
        ((uq + au).clamp(U_CLAMP, PI - U_CLAMP), (vq + av).rem_euclid(2.0 * PI))
    }

    /// Composition `self( other(s) )`.
    pub fn compose(&self, other: &SphereDiffeo) -> SphereDiffeo {
        let g = &self.grid;
        let (d1u, d1v) = self.displacement();
        let mut du = Vec::with_capacity(g.len());
        let mut dv = Vec::with_capacity(g.len());
        for i in 0..g.nu() {
            for j in 0..g.nv() {
                let k = g.idx(i, j);
                let (tu, tv) = (other.target_u[k], other.target_v[k]);
                let au = g.sample_scalar(&d1u, tu, tv);
                let av = g.sample_scalar(&d1v, tu, tv);
                du.push(tu + au - g.u()[i]);
                dv.push(wrap_pm_pi(tv - g.v()[j]) + av);
            }
        }
        SphereDiffeo::from_displacement(g.clone(), &du, &dv)
    }

    /// Numerical inverse by displacement fixed-point iteration; intended for
    /// small diffeos where the iteration contracts.
    pub fn invert_small(&self, iters: usize) -> SphereDiffeo {
        let g = &self.grid;
        let (du, dv) = self.displacement();
        let mut inv_u = vec![0.0; g.len()];
        let mut inv_v = vec![0.0; g.len()];
        for _ in 0..iters {
            let mut next_u = Vec::with_capacity(g.len());
            let mut next_v = Vec::with_capacity(g.len());
            for i in 0..g.nu() {
                for j in 0..g.nv() {
                    let k = g.idx(i, j);
                    let uq = g.u()[i] + inv_u[k];
                    let vq = g.v()[j] + inv_v[k];
                    next_u.push(-g.sample_scalar(&du, uq, vq));
                    next_v.push(-g.sample_scalar(&dv, uq, vq));
                }
            }
            inv_u = next_u;
            inv_v = next_v;
        }
        SphereDiffeo::from_displacement(g.clone(), &inv_u, &inv_v)
    }
}

fn jacobian_from_displacement(grid: &SphericalGrid, disp_u: &[f64], disp_v: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut duu = vec![0.0; n];
    let mut duv = vec![0.0; n];
    let mut dvu = vec![0.0; n];
    let mut dvv = vec![0.0; n];
    d_du(grid, disp_u, &mut duu);
    d_dv(grid, disp_u, &mut duv);
    d_du(grid, disp_v, &mut dvu);
    d_dv(grid, disp_v, &mut dvv);
    (0..n)
        .map(|k| (1.0 + duu[k]) * (1.0 + dvv[k]) - duv[k] * dvu[k])
        .collect()
}

/// Reparameterization of a surface, `(f o gamma)(s) = f(gamma(s))`.
pub fn apply_diffeo_surface(f: &Surface, gamma: &SphereDiffeo) -> Result<Surface> {
    SphericalGrid::same_grid(f.grid(), gamma.grid())?;
    Ok(Surface::new(warp_field(f.field(), gamma)))
}

/// Group action on SRNFs, `sqrt(|J_gamma|) * (q o gamma)`.
pub fn srnf_group_action(q: &Srnf, gamma: &SphereDiffeo) -> Result<Srnf> {
    SphericalGrid::same_grid(q.grid(), gamma.grid())?;
    let mut out = warp_field(q.field(), gamma);
    for (p, jac) in out.data_mut().iter_mut().zip(gamma.jac_det.iter()) {
        let s = jac.max(0.0).sqrt();
        for x in p.iter_mut() {
            *x *= s;
        }
    }
    Ok(Srnf::new(out))
}

fn warp_field(f: &Field3, gamma: &SphereDiffeo) -> Field3 {
    let g = f.grid();
    let data = (0..g.len())
        .map(|k| g.sample_vec3(f.data(), gamma.target_u[k], gamma.target_v[k]))
        .collect();
    Field3::from_data(g.clone(), data)
}
