//! Numerical inversion of the square-root normal field map.
//!
//! No analytic inverse is known, so a surface is recovered by descending
//! `E(f) = |Q(f) - q|^2` over deformations of an initial surface spanned by
//! per-coordinate spherical harmonics. The gradient is computed in adjoint
//! mode through the normal-field stencils and projected onto the harmonic
//! span; the basis degree ramps up in stages so coarse structure settles
//! before fine detail. Translation is unobservable through Q, so every
//! accepted iterate is recentred. Residual contributions from the two rows
//! nearest each pole carry half weight (the map is least accurate there).

use std::sync::Arc;

use crate::error::Result;
use crate::field::{cross, dot3, norm3, Field3};
use crate::grid::{d_du_transpose, d_dv_transpose, SphericalGrid, EPS_DEG};
use crate::harmonics::make_scalar_basis;
use crate::par;
use crate::srnf::{srnf_map, Srnf};
use crate::surface::{centroid, partials, Surface};

#[derive(Debug, Clone)]
pub struct InversionConfig {
    /// Harmonic degree of the deformation basis.
    pub l_max: usize,
    /// Initial gradient step.
    pub step: f64,
    /// Iteration cap per ramp stage.
    pub max_iter: usize,
    /// Relative energy decrease below which a stage stops.
    pub tol: f64,
    /// Starting surface.
    pub init: Surface,
}

impl InversionConfig {
    /// Defaults with the preshape sphere as the starting point.
    pub fn for_grid(grid: &Arc<SphericalGrid>) -> Self {
        let r = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        let init = Surface::from_fn(grid.clone(), move |u, v| {
            [r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos()]
        });
        Self {
            l_max: 8,
            step: 0.1,
            max_iter: 400,
            tol: 1e-10,
            init,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InversionResult {
    pub surface: Surface,
    /// Square root of the final (pole-weighted) objective.
    pub residual: f64,
    pub converged: bool,
}

fn pole_weights(grid: &SphericalGrid) -> Vec<f64> {
    let mut w = vec![1.0; grid.len()];
    for i in [0, 1, grid.nu() - 2, grid.nu() - 1] {
        for j in 0..grid.nv() {
            w[grid.idx(i, j)] = 0.5;
        }
    }
    w
}

fn objective(q_hat: &Srnf, q_target: &Srnf, rho: &[f64]) -> f64 {
    let w = q_hat.grid().cell_area();
    let mut acc = 0.0;
    for ((a, b), r) in q_hat
        .field()
        .data()
        .iter()
        .zip(q_target.field().data())
        .zip(rho)
    {
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        acc += r * dot3(d, d);
    }
    acc * w
}

/// Full gradient of the objective with respect to the surface samples.
fn surface_gradient(f: &Surface, q_target: &Srnf, rho: &[f64]) -> Field3 {
    let grid = f.grid().clone();
    let w = grid.cell_area();
    let (fu, fv) = partials(f.field());

    // n, q, and the sensitivity s = dE/dn at each point
    let mut s_field = Field3::zeros(grid.clone());
    for k in 0..grid.len() {
        let n = cross(fu.data()[k], fv.data()[k]);
        let nn = norm3(n);
        if nn < EPS_DEG {
            continue; // q is clamped to zero there, no gradient flows
        }
        let inv_sqrt = 1.0 / nn.sqrt();
        let q = [n[0] * inv_sqrt, n[1] * inv_sqrt, n[2] * inv_sqrt];
        let tq = q_target.field().data()[k];
        let r = [q[0] - tq[0], q[1] - tq[1], q[2] - tq[2]];
        let nh = [n[0] / nn, n[1] / nn, n[2] / nn];
        let rn = dot3(r, nh);
        // dq/dn = |n|^{-1/2} (I - nh nh^T / 2), symmetric
        let coeff = 2.0 * w * rho[k] * inv_sqrt;
        for c in 0..3 {
            s_field.data_mut()[k][c] = coeff * (r[c] - 0.5 * rn * nh[c]);
        }
    }

    // <s, dn> = <Du^T (fv x s) + Dv^T (s x fu), df>
    let mut a = Field3::zeros(grid.clone());
    let mut b = Field3::zeros(grid.clone());
    for k in 0..grid.len() {
        a.data_mut()[k] = cross(fv.data()[k], s_field.data()[k]);
        b.data_mut()[k] = cross(s_field.data()[k], fu.data()[k]);
    }
    let mut grad = Field3::zeros(grid.clone());
    let mut comp = vec![0.0; grid.len()];
    let mut out = vec![0.0; grid.len()];
    for c in 0..3 {
        for (x, p) in comp.iter_mut().zip(a.data()) {
            *x = p[c];
        }
        d_du_transpose(&grid, &comp, &mut out);
        for (g, o) in grad.data_mut().iter_mut().zip(out.iter()) {
            g[c] += o;
        }
        for (x, p) in comp.iter_mut().zip(b.data()) {
            *x = p[c];
        }
        d_dv_transpose(&grid, &comp, &mut out);
        for (g, o) in grad.data_mut().iter_mut().zip(out.iter()) {
            g[c] += o;
        }
    }
    grad
}

/// Projects a grid gradient onto the per-coordinate span of the scalar
/// basis, returning the descent direction as a grid field.
fn project_to_basis(grad: &Field3, basis: &[Vec<f64>]) -> Field3 {
    let grid = grad.grid().clone();
    let coeffs: Vec<[f64; 3]> = par::map_slice(basis, |b| {
        let mut c = [0.0; 3];
        for (g, y) in grad.data().iter().zip(b.iter()) {
            for k in 0..3 {
                c[k] += g[k] * y;
            }
        }
        c
    });
    let mut dir = Field3::zeros(grid.clone());
    for (b, c) in basis.iter().zip(&coeffs) {
        for (d, y) in dir.data_mut().iter_mut().zip(b.iter()) {
            for k in 0..3 {
                d[k] += c[k] * y;
            }
        }
    }
    dir
}

fn recentre(f: &Surface) -> Surface {
    let c = centroid(f);
    f.translated([-c[0], -c[1], -c[2]])
}

/// Recovers a surface whose SRNF best matches `q`, starting from
/// `cfg.init`. The returned residual never exceeds the residual of the
/// starting point and the descent is monotone under the line search.
pub fn invert_srnf(q: &Srnf, cfg: &InversionConfig) -> Result<InversionResult> {
    let basis = make_scalar_basis(q.grid(), cfg.l_max);
    invert_srnf_with_basis(q, cfg, &basis)
}

/// As [`invert_srnf`] with a caller-supplied full-degree scalar basis
/// (ordered by degree, so stage prefixes are valid sub-bases).
pub fn invert_srnf_with_basis(
    q: &Srnf,
    cfg: &InversionConfig,
    full_basis: &[Vec<f64>],
) -> Result<InversionResult> {
    SphericalGrid::same_grid(q.grid(), cfg.init.grid())?;
    assert_eq!(full_basis.len(), (cfg.l_max + 1) * (cfg.l_max + 1));
    let grid = q.grid().clone();
    let rho = pole_weights(&grid);

    let mut f = recentre(&cfg.init);
    let mut e = objective(&srnf_map(&f), q, &rho);
    let scale = objective(&Srnf::new(Field3::zeros(grid.clone())), q, &rho).max(1e-30);

    // degree ramp: coarse modes first, warm-started
    let mut stages: Vec<usize> = (1..=cfg.l_max).step_by(2).collect();
    if stages.last() != Some(&cfg.l_max) {
        stages.push(cfg.l_max);
    }
    let mut done = e <= 1e-14 * scale;
    for &l in &stages {
        if done {
            break;
        }
        let basis = &full_basis[..(l + 1) * (l + 1)];
        let mut step = cfg.step;
        for _ in 0..cfg.max_iter {
            let grad = surface_gradient(&f, q, &rho);
            let dir = project_to_basis(&grad, basis);
            let dir_sq: f64 = dir.data().iter().map(|p| dot3(*p, *p)).sum();
            if dir_sq.sqrt() < 1e-14 * scale {
                break; // stationary within this span
            }
            let mut accepted = false;
            let mut stage_settled = false;
            while step >= 1e-14 {
                let mut cand = f.field().clone();
                cand.axpy(-step, &dir);
                let cand = recentre(&Surface::new(cand));
                let e_cand = objective(&srnf_map(&cand), q, &rho);
                if e_cand < e {
                    let rel = (e - e_cand) / e;
                    f = cand;
                    e = e_cand;
                    step = (step * 1.5).min(10.0);
                    accepted = true;
                    stage_settled = rel < cfg.tol;
                    break;
                }
                step *= 0.5;
            }
            if e <= 1e-14 * scale {
                done = true;
                break;
            }
            if !accepted || stage_settled {
                break;
            }
        }
    }

    // convergence is judged on the final-degree span
    let grad = surface_gradient(&f, q, &rho);
    let dir = project_to_basis(&grad, full_basis);
    let dir_norm: f64 = dir.data().iter().map(|p| dot3(*p, *p)).sum::<f64>().sqrt();
    let converged = e <= 1e-10 * scale || dir_norm <= 1e-5 * scale.sqrt().max(1e-30);

    Ok(InversionResult {
        surface: f,
        residual: e.max(0.0).sqrt(),
        converged,
    })
}

/// Inverts a sequence of SRNFs, warm-starting each frame with the previous
/// solution. A frame that fails to converge is reported but does not abort
/// the chain.
pub fn invert_trajectory(qs: &[Srnf], cfg: &InversionConfig) -> Result<Vec<InversionResult>> {
    assert!(!qs.is_empty(), "empty trajectory");
    let basis = make_scalar_basis(qs[0].grid(), cfg.l_max);
    let mut out = Vec::with_capacity(qs.len());
    let mut cfg_k = cfg.clone();
    for q in qs {
        let res = invert_srnf_with_basis(q, &cfg_k, &basis)?;
        cfg_k.init = res.surface.clone();
        out.push(res);
    }
    Ok(out)
}
