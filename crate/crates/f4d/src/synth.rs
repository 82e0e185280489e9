//! Synthetic surface families and seeded random generators used by the
//! evaluation harness and tests: spheres, ellipsoids, an articulated-arm
//! family (a capsule-like body with a protrusion that swings along a great
//! circle), random smooth radial surfaces, random sphere diffeomorphisms,
//! and random time warps. Everything is deterministic per seed.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::diffeo::SphereDiffeo;
use crate::error::{F4dError, Result};
use crate::grid::SphericalGrid;
use crate::harmonics::TangentBasis;
use crate::rotation::Rotation3;
use crate::surface::Surface;
use crate::trajectory::{uniform_times, TimeWarp};

/// Per-trial seed derived from a master seed; the fixed splitting rule keeps
/// parallel trial order irrelevant.
pub fn split_seed(master: u64, trial: u64) -> u64 {
    master ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn sphere(grid: Arc<SphericalGrid>, radius: f64) -> Surface {
    Surface::from_fn(grid, move |u, v| {
        [
            radius * u.sin() * v.cos(),
            radius * u.sin() * v.sin(),
            radius * u.cos(),
        ]
    })
}

pub fn ellipsoid(grid: Arc<SphericalGrid>, a: f64, b: f64, c: f64) -> Surface {
    Surface::from_fn(grid, move |u, v| {
        [a * u.sin() * v.cos(), b * u.sin() * v.sin(), c * u.cos()]
    })
}

fn dir(u: f64, v: f64) -> [f64; 3] {
    [u.sin() * v.cos(), u.sin() * v.sin(), u.cos()]
}

fn arc(a: [f64; 3], b: [f64; 3]) -> f64 {
    crate::field::dot3(a, b).clamp(-1.0, 1.0).acos()
}

/// Radial graph over the sphere: `f = rho(u, v) * direction(u, v)` with a
/// sum of Gaussian bumps in geodesic distance. Radial construction keeps
/// the surface embedded and genus zero.
pub fn bump_surface(grid: Arc<SphericalGrid>, bumps: &[(f64, f64, [f64; 3])]) -> Surface {
    let bumps = bumps.to_vec();
    Surface::from_fn(grid, move |u, v| {
        let d = dir(u, v);
        let mut rho = 1.0;
        for (amp, sigma, center) in &bumps {
            let t = arc(d, *center) / sigma;
            rho += amp * (-t * t).exp();
        }
        [rho * d[0], rho * d[1], rho * d[2]]
    })
}

/// Capsule-like body with one protruding arm whose direction swings by
/// `theta` in the xz great circle.
pub fn arm_surface(grid: Arc<SphericalGrid>, theta: f64) -> Surface {
    let arm_dir = [theta.sin(), 0.0, theta.cos()];
    bump_surface(
        grid,
        &[
            (0.25, 0.9, [0.0, 1.0, 0.0]), // broad shoulder lump
            (0.9, 0.55, arm_dir),         // the swinging arm
        ],
    )
}

/// Random smooth radial surface: a few bumps with seeded directions,
/// amplitudes, and widths.
pub fn random_smooth_surface(grid: Arc<SphericalGrid>, seed: u64) -> Surface {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_bumps = 4;
    let mut bumps = Vec::with_capacity(n_bumps);
    for _ in 0..n_bumps {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        let center = [r * phi.cos(), r * phi.sin(), z];
        let amp = rng.gen_range(-0.25..0.25);
        let sigma = rng.gen_range(0.5..1.0);
        bumps.push((amp, sigma, center));
    }
    bump_surface(grid, &bumps)
}

pub fn random_rotation(seed: u64) -> Rotation3 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let axis = [
        rng.gen_range(-1.0..1.0f64),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ];
    let angle = rng.gen_range(0.0..PI);
    Rotation3::from_axis_angle(axis, angle)
}

/// Random orientation-preserving sphere diffeo: i.i.d. normal coefficients
/// over the tangent basis scaled by `magnitude`, applied as five composed
/// small steps `gamma_id + (magnitude/5) sum c_i b_i`. Draws that fold the
/// grid (non-positive Jacobian anywhere) are rejected and redrawn.
pub fn random_sphere_diffeo(
    basis: &TangentBasis,
    seed: u64,
    magnitude: f64,
) -> Result<SphereDiffeo> {
    const N_STEPS: usize = 5;
    const MAX_ATTEMPTS: usize = 100;
    let grid = basis.grid().clone();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    for _ in 0..MAX_ATTEMPTS {
        let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.sample(StandardNormal)).collect();
        let mut du = vec![0.0; grid.len()];
        let mut dv = vec![0.0; grid.len()];
        for (b, c) in basis.elements().iter().zip(&coeffs) {
            let s = c * magnitude / N_STEPS as f64;
            for k in 0..grid.len() {
                du[k] += s * b.comp_u[k];
                dv[k] += s * b.comp_v[k];
            }
        }
        let step = SphereDiffeo::from_displacement(grid.clone(), &du, &dv);
        if !step.is_orientation_preserving() {
            continue;
        }
        let mut gamma = step.clone();
        let mut ok = true;
        for _ in 1..N_STEPS {
            gamma = gamma.compose(&step);
            if !gamma.is_orientation_preserving() {
                ok = false;
                break;
            }
        }
        if ok {
            gamma.set_coeffs(Some(coeffs));
            return Ok(gamma);
        }
    }
    Err(F4dError::MagnitudeTooLarge {
        magnitude,
        attempts: MAX_ATTEMPTS,
    })
}

/// Random time warp: normalized cumulative sums of `exp(magnitude * g)` with
/// `g` a low-order Fourier series with seeded normal coefficients. Strictly
/// increasing by construction, endpoints exactly 0 and 1.
pub fn random_time_warp(seed: u64, magnitude: f64, n: usize) -> TimeWarp {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    const ORDER: usize = 2;
    let mut coeffs = Vec::with_capacity(2 * ORDER);
    for k in 1..=ORDER {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        coeffs.push((a / k as f64, b / k as f64));
    }
    let g = |t: f64| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let w = 2.0 * PI * (i + 1) as f64 * t;
                a * w.cos() + b * w.sin()
            })
            .sum::<f64>()
    };
    let times = uniform_times(n);
    let mut samples = Vec::with_capacity(n);
    samples.push(0.0);
    let mut acc = 0.0;
    for w in times.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        acc += (magnitude * g(mid)).exp() * (w[1] - w[0]);
        samples.push(acc);
    }
    let total = *samples.last().unwrap();
    for s in &mut samples {
        *s /= total;
    }
    samples[0] = 0.0;
    samples[n - 1] = 1.0;
    TimeWarp::new(samples).expect("positive increments")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::make_tangent_basis;
    use crate::registration::identity_registration_error;

    #[test]
    fn zero_magnitude_diffeo_is_identity() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let basis = make_tangent_basis(&g, 2);
        let gamma = random_sphere_diffeo(&basis, 7, 0.0).unwrap();
        assert!(identity_registration_error(&gamma) < 1e-12);
        assert!((gamma.min_jac() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_diffeos_are_orientation_preserving() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let basis = make_tangent_basis(&g, 2);
        for seed in 0..10 {
            let gamma = random_sphere_diffeo(&basis, seed, 0.08).unwrap();
            assert!(gamma.min_jac() > 0.0);
        }
    }

    #[test]
    fn mean_displacement_grows_with_magnitude() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let basis = make_tangent_basis(&g, 2);
        let mean_err = |mag: f64| {
            (0..20)
                .map(|s| {
                    identity_registration_error(
                        &random_sphere_diffeo(&basis, split_seed(3, s), mag).unwrap(),
                    )
                })
                .sum::<f64>()
                / 20.0
        };
        let (a, b, c) = (mean_err(0.01), mean_err(0.03), mean_err(0.08));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn zero_magnitude_warp_is_identity() {
        let xi = random_time_warp(5, 0.0, 33);
        assert!(xi.is_identity());
    }

    #[test]
    fn warps_are_valid_and_distinct() {
        let a = random_time_warp(1, 0.5, 64);
        let b = random_time_warp(2, 0.5, 64);
        assert_eq!(a.samples()[0], 0.0);
        assert_eq!(*a.samples().last().unwrap(), 1.0);
        for w in a.samples().windows(2) {
            assert!(w[1] > w[0]);
        }
        let sup = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(sup > 0.0);
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let g = SphericalGrid::new(16, 16).unwrap();
        let a = random_smooth_surface(g.clone(), 42);
        let b = random_smooth_surface(g.clone(), 42);
        assert_eq!(a.field().data(), b.field().data());
        let basis = make_tangent_basis(&g, 2);
        let d1 = random_sphere_diffeo(&basis, 9, 0.05).unwrap();
        let d2 = random_sphere_diffeo(&basis, 9, 0.05).unwrap();
        assert_eq!(d1.target_u(), d2.target_u());
    }
}
