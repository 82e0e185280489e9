//! Spatial registration of surfaces in SRNF space: alternating Procrustes
//! rotation and gradient descent over reparameterizations, applied pairwise
//! or sequentially along a trajectory.

use std::sync::Arc;

use nalgebra::Matrix3;

use crate::diffeo::{apply_diffeo_surface, srnf_group_action, SphereDiffeo};
use crate::error::Result;
use crate::field::{dot3, l2_inner};
use crate::grid::SphericalGrid;
use crate::harmonics::{make_tangent_basis, TangentBasis};
use crate::par;
use crate::rotation::Rotation3;
use crate::srnf::{srnf_map, Srnf};
use crate::surface::Surface;

#[derive(Debug, Clone)]
pub struct RegistrationConfig {
    /// Harmonic degree of the tangent basis for the diffeo search.
    pub l_max: usize,
    /// Initial gradient step; halved on energy increase.
    pub step: f64,
    /// Inner gradient-descent iteration cap.
    pub max_iter: usize,
    /// Alternation rounds between rotation and reparameterization.
    pub outer_iters: usize,
    /// Relative energy decrease below which iteration stops.
    pub tol: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            l_max: 6,
            step: 0.1,
            max_iter: 100,
            outer_iters: 10,
            tol: 1e-6,
        }
    }
}

/// Default tangent basis for a grid (degree 6, 48 elements).
pub fn make_tangent_basis_default(grid: &Arc<SphericalGrid>) -> TangentBasis {
    make_tangent_basis(grid, RegistrationConfig::default().l_max)
}

#[derive(Debug, Clone)]
pub struct RegistrationResult {
    pub rotation: Rotation3,
    pub diffeo: SphereDiffeo,
    /// Energy after each accepted move, rotation updates included.
    pub energy_trace: Vec<f64>,
    pub converged: bool,
    /// Set when the Procrustes cross-covariance was numerically rank
    /// deficient and the rotation is not unique.
    pub rank_deficient: bool,
}

/// Optimal rotation aligning `q2` onto `q1` by Procrustes analysis of the
/// quadrature-weighted cross-covariance. The determinant guard keeps the
/// result in SO(3).
pub fn optimal_rotation(q1: &Srnf, q2: &Srnf) -> Result<Rotation3> {
    optimal_rotation_detailed(q1, q2).map(|(r, _)| r)
}

pub fn optimal_rotation_detailed(q1: &Srnf, q2: &Srnf) -> Result<(Rotation3, bool)> {
    SphericalGrid::same_grid(q1.grid(), q2.grid())?;
    let w = q1.grid().cell_area();
    let mut a = Matrix3::zeros();
    for (p, q) in q1.field().data().iter().zip(q2.field().data()) {
        for r in 0..3 {
            for c in 0..3 {
                a[(r, c)] += p[r] * q[c] * w;
            }
        }
    }
    let svd: nalgebra::SVD<f64, nalgebra::Const<3>, nalgebra::Const<3>> = a.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with vt");
    let mut r: Matrix3<f64> = u * vt;
    if r.determinant() < 0.0 {
        // negate the last column of V, i.e. the last row of V^T
        let mut vt2 = vt;
        for c in 0..3 {
            vt2[(2, c)] = -vt2[(2, c)];
        }
        r = u * vt2;
    }
    let s = svd.singular_values;
    let rank_deficient = s[2] <= 1e-12 * s[0].max(1e-300);
    Ok((Rotation3::from_matrix_unchecked(r), rank_deficient))
}

fn energy(q1: &Srnf, q2: &Srnf) -> f64 {
    let d = q1.field().sub(q2.field());
    l2_inner(&d, &d).expect("same grid")
}

/// Gradient descent on `E(gamma) = |q1 - q2 * gamma|^2` over diffeos spanned
/// by a tangent basis. The differential of the action along each basis
/// element is taken by forward finite differences of the action itself
/// (delta = 1e-4). Steps that raise the energy or fold the grid are rejected
/// and the step halves; underflow below 1e-12 returns the best iterate with
/// `converged = false`.
pub fn register_diffeo(
    q1: &Srnf,
    q2: &Srnf,
    basis: &TangentBasis,
    step: f64,
    max_iter: usize,
) -> Result<(SphereDiffeo, Vec<f64>, bool)> {
    let id = SphereDiffeo::identity(q1.grid().clone());
    register_diffeo_from(q1, q2, basis, step, max_iter, 1e-6, id)
}

pub(crate) fn register_diffeo_from(
    q1: &Srnf,
    q2: &Srnf,
    basis: &TangentBasis,
    step: f64,
    max_iter: usize,
    tol: f64,
    gamma0: SphereDiffeo,
) -> Result<(SphereDiffeo, Vec<f64>, bool)> {
    const FD_DELTA: f64 = 1e-4;
    const STEP_FLOOR: f64 = 1e-12;

    SphericalGrid::same_grid(q1.grid(), q2.grid())?;
    let grid = q1.grid().clone();
    let w = grid.cell_area();

    let mut gamma = gamma0;
    let mut q2_cur = srnf_group_action(q2, &gamma)?;
    let mut e = energy(q1, &q2_cur);
    let mut trace = vec![e];
    let mut step = step;
    let mut converged = false;

    for _ in 0..max_iter {
        if e <= 1e-14 {
            converged = true;
            break;
        }
        let residual = q1.field().sub(q2_cur.field());

        // coefficients <q1 - q2_cur, dphi(b_i)> by forward differencing
        let coeffs: Vec<f64> = par::map_slice(basis.elements(), |b| {
            let du: Vec<f64> = b.comp_u.iter().map(|x| x * FD_DELTA).collect();
            let dv: Vec<f64> = b.comp_v.iter().map(|x| x * FD_DELTA).collect();
            let probe = SphereDiffeo::from_displacement(grid.clone(), &du, &dv);
            let moved = srnf_group_action(&q2_cur, &probe).expect("same grid");
            let mut acc = 0.0;
            for ((m, c), r) in moved
                .field()
                .data()
                .iter()
                .zip(q2_cur.field().data())
                .zip(residual.data())
            {
                let d = [
                    (m[0] - c[0]) / FD_DELTA,
                    (m[1] - c[1]) / FD_DELTA,
                    (m[2] - c[2]) / FD_DELTA,
                ];
                acc += dot3(d, *r);
            }
            acc * w
        });

        // update direction sum_i coeff_i b_i in chart components
        let mut dir_u = vec![0.0; grid.len()];
        let mut dir_v = vec![0.0; grid.len()];
        for (b, c) in basis.elements().iter().zip(&coeffs) {
            for k in 0..grid.len() {
                dir_u[k] += c * b.comp_u[k];
                dir_v[k] += c * b.comp_v[k];
            }
        }
        let dir_norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if dir_norm < 1e-14 {
            converged = true;
            break;
        }

        // backtracking line search on the composed map
        let mut accepted = false;
        while step >= STEP_FLOOR {
            let du: Vec<f64> = dir_u.iter().map(|x| x * step).collect();
            let dv: Vec<f64> = dir_v.iter().map(|x| x * step).collect();
            let inc = SphereDiffeo::from_displacement(grid.clone(), &du, &dv);
            if !inc.is_orientation_preserving() {
                step *= 0.5;
                continue;
            }
            let cand = gamma.compose(&inc);
            if !cand.is_orientation_preserving() {
                step *= 0.5;
                continue;
            }
            let q2_cand = srnf_group_action(q2, &cand)?;
            let e_cand = energy(q1, &q2_cand);
            if e_cand < e {
                let rel = (e - e_cand) / e.max(1e-300);
                gamma = cand;
                q2_cur = q2_cand;
                e = e_cand;
                trace.push(e);
                step = (step * 1.5).min(1.0);
                accepted = true;
                if rel < tol {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            break;
        }
    }
    Ok((gamma, trace, converged))
}

/// Registers `f2` onto `f1` by alternating the closed-form rotation and the
/// diffeo descent, rotation first. Inputs are expected in preshape form.
pub fn register_pair(f1: &Surface, f2: &Surface, cfg: &RegistrationConfig) -> Result<RegistrationResult> {
    let basis = make_tangent_basis(f1.grid(), cfg.l_max);
    register_pair_with_basis(&srnf_map(f1), &srnf_map(f2), &basis, cfg)
}

pub fn register_pair_with_basis(
    q1: &Srnf,
    q2: &Srnf,
    basis: &TangentBasis,
    cfg: &RegistrationConfig,
) -> Result<RegistrationResult> {
    SphericalGrid::same_grid(q1.grid(), q2.grid())?;
    let mut gamma = SphereDiffeo::identity(q1.grid().clone());
    let mut rotation = Rotation3::identity();
    let mut rank_deficient = false;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut last_e = f64::INFINITY;

    for _ in 0..cfg.outer_iters {
        let warped = srnf_group_action(q2, &gamma)?;
        let (r, rd) = optimal_rotation_detailed(q1, &warped)?;
        rank_deficient |= rd;
        rotation = r;
        let q2_rot = q2.rotated(&rotation);

        let (g, t, _conv) = register_diffeo_from(
            q1,
            &q2_rot,
            basis,
            cfg.step,
            cfg.max_iter,
            cfg.tol,
            gamma.clone(),
        )?;
        gamma = g;
        let e = *t.last().expect("trace nonempty");
        trace.extend(t);
        if last_e.is_finite() && (last_e - e).abs() / last_e.max(1e-300) < cfg.tol {
            converged = true;
            break;
        }
        last_e = e;
        if e <= 1e-14 {
            converged = true;
            break;
        }
    }
    Ok(RegistrationResult {
        rotation,
        diffeo: gamma,
        energy_trace: trace,
        converged,
        rank_deficient,
    })
}

/// Registered trajectory plus the per-frame composed transforms.
#[derive(Debug, Clone)]
pub struct TrajectoryRegistration {
    pub frames: Vec<Surface>,
    pub results: Vec<RegistrationResult>,
}

/// Sequential registration of a frame sequence: the first frame is
/// registered to `f_ref` and that transform is applied to every frame; each
/// later frame is then registered to its already-registered predecessor.
/// The per-frame results carry the total composed transform.
pub fn register_trajectory(
    frames: &[Surface],
    f_ref: &Surface,
    cfg: &RegistrationConfig,
) -> Result<TrajectoryRegistration> {
    assert!(!frames.is_empty(), "empty trajectory");
    let grid = frames[0].grid().clone();
    let basis = make_tangent_basis(&grid, cfg.l_max);
    let q_ref = srnf_map(f_ref);

    let first = register_pair_with_basis(&q_ref, &srnf_map(&frames[0]), &basis, cfg)?;
    let mut registered: Vec<Surface> = Vec::with_capacity(frames.len());
    for f in frames {
        let warped = apply_diffeo_surface(f, &first.diffeo)?;
        registered.push(warped.rotated(&first.rotation));
    }

    let mut results: Vec<RegistrationResult> = Vec::with_capacity(frames.len());
    results.push(first.clone());
    for i in 1..frames.len() {
        let prev_q = srnf_map(&registered[i - 1]);
        let res = register_pair_with_basis(&prev_q, &srnf_map(&registered[i]), &basis, cfg)?;
        let warped = apply_diffeo_surface(&registered[i], &res.diffeo)?;
        registered[i] = warped.rotated(&res.rotation);
        // total transform for frame i: first (O0, g0), then this increment
        let total = RegistrationResult {
            rotation: res.rotation.compose(&first.rotation),
            diffeo: first.diffeo.compose(&res.diffeo),
            energy_trace: res.energy_trace,
            converged: res.converged,
            rank_deficient: res.rank_deficient,
        };
        results.push(total);
    }
    Ok(TrajectoryRegistration {
        frames: registered,
        results,
    })
}

/// Quadrature-weighted mean great-circle distance between two sampled
/// correspondences, normalized by the total weight.
pub fn registration_error(est: &SphereDiffeo, truth: &SphereDiffeo) -> Result<f64> {
    SphericalGrid::same_grid(est.grid(), truth.grid())?;
    let grid = est.grid();
    let mut acc = 0.0;
    let mut total = 0.0;
    for k in 0..grid.len() {
        let a = unit_dir(est.target_u()[k], est.target_v()[k]);
        let b = unit_dir(truth.target_u()[k], truth.target_v()[k]);
        let c = crate::field::cross(a, b);
        let angle = crate::field::norm3(c).atan2(dot3(a, b));
        acc += angle * grid.weights()[k];
        total += grid.weights()[k];
    }
    Ok(acc / total)
}

fn unit_dir(u: f64, v: f64) -> [f64; 3] {
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    [su * cv, su * sv, cu]
}

/// Mean displacement of a single diffeo from the identity.
pub fn identity_registration_error(gamma: &SphereDiffeo) -> f64 {
    registration_error(&SphereDiffeo::identity(gamma.grid().clone()), gamma).expect("same grid")
}

/// Applies a registration result to a surface: `O (f o gamma)`.
pub fn apply_registration(f: &Surface, res: &RegistrationResult) -> Result<Surface> {
    Ok(apply_diffeo_surface(f, &res.diffeo)?.rotated(&res.rotation))
}

pub fn srnf_distance(q1: &Srnf, q2: &Srnf) -> f64 {
    energy(q1, q2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field3;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn bumpy(grid: Arc<SphericalGrid>) -> Surface {
        Surface::from_fn(grid, |u, v| {
            let rho = 1.0 + 0.2 * (2.0 * v).cos() * (2.0 * u).sin();
            [rho * u.sin() * v.cos(), rho * u.sin() * v.sin(), rho * u.cos()]
        })
    }

    fn random_rotation(rng: &mut ChaCha12Rng) -> Rotation3 {
        let axis = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        Rotation3::from_axis_angle(axis, rng.gen_range(0.0..std::f64::consts::PI))
    }

    #[test]
    fn rotation_recovery() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let q1 = srnf_map(&bumpy(g));
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r = random_rotation(&mut rng);
            let q2 = q1.rotated(&r.transpose());
            let rec = optimal_rotation(&q1, &q2).unwrap();
            assert!(rec.frobenius_distance(&r) < 1e-8);
        }
    }

    #[test]
    fn self_alignment_is_identity() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let q = srnf_map(&bumpy(g));
        let r = optimal_rotation(&q, &q).unwrap();
        assert!(r.frobenius_distance(&Rotation3::identity()) < 1e-10);
    }

    #[test]
    fn mirrored_input_still_yields_proper_rotation() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let q1 = srnf_map(&bumpy(g.clone()));
        let mirrored = Field3::from_data(
            g.clone(),
            q1.field()
                .data()
                .iter()
                .map(|p| [-p[0], p[1], p[2]])
                .collect(),
        );
        let q2 = Srnf::new(mirrored);
        let r = optimal_rotation(&q1, &q2).unwrap();
        assert!((r.det() - 1.0).abs() < 1e-10);
        assert!(r.orthogonality_defect() < 1e-10);
    }

    #[test]
    fn procrustes_local_optimality() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let q1 = srnf_map(&bumpy(g.clone()));
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let r0 = random_rotation(&mut rng);
        let q2 = q1.rotated(&r0);
        let r = optimal_rotation(&q1, &q2).unwrap();
        let base = srnf_distance(&q1, &q2.rotated(&r)).powi(2);
        for _ in 0..100 {
            let axis = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let pert = Rotation3::from_axis_angle(axis, 1e-4);
            let e = srnf_distance(&q1, &q2.rotated(&pert.compose(&r))).powi(2);
            assert!(e >= base - 1e-9, "perturbation improved energy: {e} < {base}");
        }
    }

    #[test]
    fn diffeo_descent_recovers_synthetic_warp() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let q1 = srnf_map(&bumpy(g.clone()));
        let basis = make_tangent_basis(&g, 3);

        // ground-truth diffeo from small random basis coefficients
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut du = vec![0.0; g.len()];
        let mut dv = vec![0.0; g.len()];
        for b in basis.elements() {
            let c = rng.gen_range(-0.04..0.04);
            for k in 0..g.len() {
                du[k] += c * b.comp_u[k];
                dv[k] += c * b.comp_v[k];
            }
        }
        let gamma0 = SphereDiffeo::from_displacement(g.clone(), &du, &dv);
        assert!(gamma0.is_orientation_preserving());
        let q2 = srnf_group_action(&q1, &gamma0).unwrap();

        let (_, trace, _) = register_diffeo(&q2, &q1, &basis, 0.1, 100).unwrap();
        let initial = trace[0];
        let fin = *trace.last().unwrap();
        assert!(
            fin <= 0.1 * initial,
            "energy {initial} -> {fin} (ratio {})",
            fin / initial
        );
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "trace not monotone");
        }
    }

    #[test]
    fn self_registration_is_near_identity() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let f = bumpy(g);
        let cfg = RegistrationConfig {
            l_max: 2,
            ..Default::default()
        };
        let res = register_pair(&f, &f, &cfg).unwrap();
        assert!(*res.energy_trace.last().unwrap() < 1e-10);
        assert!(res.rotation.frobenius_distance(&Rotation3::identity()) < 1e-6);
        assert!(identity_registration_error(&res.diffeo) < 1e-6);
    }

    #[test]
    fn registration_error_metric_properties() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let id = SphereDiffeo::identity(g.clone());
        assert_eq!(registration_error(&id, &id).unwrap(), 0.0);

        // exact oracle for a pole-axis rotation by delta: per-point
        // great-circle distance is 2 asin(sin u |sin(delta/2)|)
        let delta = 0.37;
        let dv = vec![delta; g.len()];
        let du = vec![0.0; g.len()];
        let rot = SphereDiffeo::from_displacement(g.clone(), &du, &dv);
        let got = registration_error(&id, &rot).unwrap();
        let mut acc = 0.0;
        let mut tot = 0.0;
        for i in 0..g.nu() {
            for j in 0..g.nv() {
                let d = 2.0 * (g.u()[i].sin() * (delta / 2.0).sin()).asin();
                acc += d * g.weights()[g.idx(i, j)];
                tot += g.weights()[g.idx(i, j)];
            }
        }
        assert!((got - acc / tot).abs() < 1e-9);
    }

    #[test]
    fn registration_error_matches_haversine_oracle() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut rand_diffeo = |scale: f64| {
            let du: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-scale..scale)).collect();
            let dv: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-scale..scale)).collect();
            SphereDiffeo::from_displacement(g.clone(), &du, &dv)
        };
        let a = rand_diffeo(0.3);
        let b = rand_diffeo(0.3);
        let got = registration_error(&a, &b).unwrap();

        let hav = |u1: f64, v1: f64, u2: f64, v2: f64| {
            // colatitude haversine
            let s1 = ((u1 - u2) / 2.0).sin();
            let s2 = ((v1 - v2) / 2.0).sin();
            2.0 * (s1 * s1 + u1.sin() * u2.sin() * s2 * s2).sqrt().min(1.0).asin()
        };
        let mut acc = 0.0;
        let mut tot = 0.0;
        for k in 0..g.len() {
            acc += hav(a.target_u()[k], a.target_v()[k], b.target_u()[k], b.target_v()[k])
                * g.weights()[k];
            tot += g.weights()[k];
        }
        assert!((got - acc / tot).abs() < 1e-12);
    }

    #[test]
    fn registration_error_triangle_inequality() {
        let g = SphericalGrid::new(8, 8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let mut rand_diffeo = || {
            let du: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let dv: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-0.4..0.4)).collect();
            SphereDiffeo::from_displacement(g.clone(), &du, &dv)
        };
        for _ in 0..20 {
            let (a, b, c) = (rand_diffeo(), rand_diffeo(), rand_diffeo());
            let ab = registration_error(&a, &b).unwrap();
            let bc = registration_error(&b, &c).unwrap();
            let ac = registration_error(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }
}
