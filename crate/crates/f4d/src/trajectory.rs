//! Trajectories in SRNF space, their transported square-root velocity
//! fields, time warps, and the warp group action.
//!
//! The ambient SRNF space is flat under L2, so the transport in the velocity
//!-field map is the identity and the reference point drops out; the map
//! reduces to `q(t) = h'(t) / sqrt(|h'(t)|)` and its inverse integrates
//! `h' = q |q|` in closed form.

use std::sync::Arc;

use crate::error::{F4dError, Result};
use crate::field::{l2_norm, Field3};
use crate::grid::{SphericalGrid, EPS_DEG};
use crate::srnf::{srnf_map, Srnf};
use crate::surface::Surface;

/// A time-indexed sequence of surfaces (a 4D surface as stored on disk).
#[derive(Debug, Clone)]
pub struct SurfaceSequence {
    pub times: Vec<f64>,
    pub frames: Vec<Surface>,
}

impl SurfaceSequence {
    pub fn new(times: Vec<f64>, frames: Vec<Surface>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(F4dError::DegenerateTimeGrid {
                frames: frames.len(),
            });
        }
        assert_eq!(times.len(), frames.len());
        for w in times.windows(2) {
            assert!(w[1] > w[0], "times must be strictly increasing");
        }
        let grid = frames[0].grid().clone();
        for f in &frames {
            SphericalGrid::same_grid(&grid, f.grid())?;
        }
        Ok(Self { times, frames })
    }

    pub fn uniform(frames: Vec<Surface>) -> Result<Self> {
        let times = uniform_times(frames.len());
        Self::new(times, frames)
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        self.frames[0].grid()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// SRNF trajectory of the sequence; times are rescaled affinely onto
    /// `[0, 1]` (a no-op for sequences already spanning it).
    pub fn srnf_trajectory(&self) -> Result<Trajectory> {
        let frames = self.frames.iter().map(srnf_map).collect();
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        let times = self.times.iter().map(|&t| (t - t0) / (t1 - t0)).collect();
        Trajectory::new(times, frames)
    }
}

/// A sampled curve `[0, 1] -> SRNF space`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Arc<SphericalGrid>,
    times: Vec<f64>,
    frames: Vec<Srnf>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, frames: Vec<Srnf>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(F4dError::DegenerateTimeGrid {
                frames: frames.len(),
            });
        }
        assert_eq!(times.len(), frames.len());
        let grid = frames[0].grid().clone();
        for f in &frames {
            SphericalGrid::same_grid(&grid, f.grid())?;
        }
        for w in times.windows(2) {
            assert!(w[1] > w[0], "times must be strictly increasing");
        }
        assert!(times[0] == 0.0 && *times.last().unwrap() == 1.0, "times must span [0, 1]");
        Ok(Self { grid, times, frames })
    }

    pub fn uniform(frames: Vec<Srnf>) -> Result<Self> {
        let t = uniform_times(frames.len());
        Self::new(t, frames)
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Srnf] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Linear resampling onto `n` uniform time samples.
    pub fn resample(&self, n: usize) -> Result<Trajectory> {
        let times = uniform_times(n);
        let frames = times
            .iter()
            .map(|&t| Srnf::new(interp_frames(&self.times, self.frames.iter().map(|f| f.field()), t)))
            .collect();
        Trajectory::new(times, frames)
    }

    /// Time-composition `h o xi`, sampling frames at warped times.
    pub fn compose_warp(&self, xi: &TimeWarp) -> Result<Trajectory> {
        let frames = xi
            .samples()
            .iter()
            .map(|&t| Srnf::new(interp_frames(&self.times, self.frames.iter().map(|f| f.field()), t)))
            .collect();
        Trajectory::new(xi.times().to_vec(), frames)
    }
}

pub fn uniform_times(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn interp_frames<'a>(
    times: &[f64],
    frames: impl Iterator<Item = &'a Field3>,
    t: f64,
) -> Field3 {
    let frames: Vec<&Field3> = frames.collect();
    let t = t.clamp(times[0], *times.last().unwrap());
    // locate segment
    let mut i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return frames[i].clone(),
        Err(i) => i,
    };
    i = i.clamp(1, times.len() - 1);
    let (t0, t1) = (times[i - 1], times[i]);
    let a = (t - t0) / (t1 - t0);
    let mut out = frames[i - 1].scaled(1.0 - a);
    out.axpy(a, frames[i]);
    out
}

/// Scaled velocity field of a trajectory.
#[derive(Debug, Clone)]
pub struct Tsrvf {
    grid: Arc<SphericalGrid>,
    times: Vec<f64>,
    values: Vec<Field3>,
}

impl Tsrvf {
    pub fn new(times: Vec<f64>, values: Vec<Field3>) -> Self {
        assert!(values.len() >= 2 && times.len() == values.len());
        let grid = values[0].grid().clone();
        Self { grid, times, values }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Field3] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise-in-time linear combination `a * self + b * other`.
    pub fn lerp(&self, other: &Tsrvf, a: f64, b: f64) -> Tsrvf {
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(p, q)| {
                let mut out = p.scaled(a);
                out.axpy(b, q);
                out
            })
            .collect();
        Tsrvf::new(self.times.clone(), values)
    }

    pub fn scaled(&self, s: f64) -> Tsrvf {
        Tsrvf::new(self.times.clone(), self.values.iter().map(|f| f.scaled(s)).collect())
    }

    pub fn sub(&self, other: &Tsrvf) -> Tsrvf {
        self.lerp(other, 1.0, -1.0)
    }
}

/// Time derivative of a frame sequence: central differences inside, second
/// order one-sided at the ends. Exact for quadratic-in-time sequences.
fn time_derivative(times: &[f64], frames: &[&Field3]) -> Vec<Field3> {
    let n = frames.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let d = if k == 0 {
            let h = times[1] - times[0];
            let mut d = frames[0].scaled(-3.0 / (2.0 * h));
            d.axpy(4.0 / (2.0 * h), frames[1]);
            d.axpy(-1.0 / (2.0 * h), frames[2]);
            d
        } else if k == n - 1 {
            let h = times[n - 1] - times[n - 2];
            let mut d = frames[n - 1].scaled(3.0 / (2.0 * h));
            d.axpy(-4.0 / (2.0 * h), frames[n - 2]);
            d.axpy(1.0 / (2.0 * h), frames[n - 3]);
            d
        } else {
            let h2 = times[k + 1] - times[k - 1];
            let mut d = frames[k + 1].scaled(1.0 / h2);
            d.axpy(-1.0 / h2, frames[k - 1]);
            d
        };
        out.push(d);
    }
    out
}

/// `q(t) = h'(t) / sqrt(|h'(t)|)`; frames with `|h'| < EPS_DEG` map to zero.
pub fn tsrvf_map(h: &Trajectory) -> Tsrvf {
    let frames: Vec<&Field3> = h.frames().iter().map(|f| f.field()).collect();
    let vel = time_derivative(h.times(), &frames);
    let values = vel
        .into_iter()
        .map(|v| {
            let n = l2_norm(&v);
            if n < EPS_DEG {
                Field3::zeros(h.grid().clone())
            } else {
                v.scaled(1.0 / n.sqrt())
            }
        })
        .collect();
    Tsrvf::new(h.times().to_vec(), values)
}

/// Reconstructs the trajectory from its velocity field and start point by
/// trapezoid integration of `h' = q |q|`.
pub fn tsrvf_inverse(q: &Tsrvf, h0: &Srnf) -> Result<Trajectory> {
    SphericalGrid::same_grid(q.grid(), h0.grid())?;
    let vel: Vec<Field3> = q
        .values()
        .iter()
        .map(|f| f.scaled(l2_norm(f)))
        .collect();
    let mut frames = Vec::with_capacity(q.len());
    let mut cur = h0.field().clone();
    frames.push(Srnf::new(cur.clone()));
    for k in 1..q.len() {
        let dt = q.times()[k] - q.times()[k - 1];
        cur.axpy(dt / 2.0, &vel[k - 1]);
        cur.axpy(dt / 2.0, &vel[k]);
        frames.push(Srnf::new(cur.clone()));
    }
    Trajectory::new(q.times().to_vec(), frames)
}

/// Monotone reparameterization of `[0, 1]` with fixed endpoints, sampled on
/// a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWarp {
    times: Vec<f64>,
    samples: Vec<f64>,
}

impl TimeWarp {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        for (k, w) in samples.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(F4dError::NonMonotoneWarp { index: k + 1 });
            }
        }
        assert!(samples.len() >= 2);
        assert!(
            samples[0] == 0.0 && *samples.last().unwrap() == 1.0,
            "warp endpoints must be exactly 0 and 1"
        );
        let times = uniform_times(samples.len());
        Ok(Self { times, samples })
    }

    pub fn identity(n: usize) -> Self {
        let times = uniform_times(n);
        Self {
            samples: times.clone(),
            times,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.samples == self.times
    }

    /// Piecewise-linear evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        interp_scalar(&self.times, &self.samples, t)
    }

    /// Composition `(self o other)(t) = self(other(t))`.
    pub fn compose(&self, other: &TimeWarp) -> Result<TimeWarp> {
        let mut samples: Vec<f64> = other.samples.iter().map(|&t| self.eval(t)).collect();
        // endpoints are exact by construction of both factors
        samples[0] = 0.0;
        let n = samples.len();
        samples[n - 1] = 1.0;
        TimeWarp::new(samples)
    }

    /// Numerical inverse on the same grid; valid since the warp is strictly
    /// increasing with exact endpoints.
    pub fn inverse(&self) -> Result<TimeWarp> {
        let samples: Vec<f64> = self
            .times
            .iter()
            .map(|&t| interp_scalar(&self.samples, &self.times, t))
            .collect();
        TimeWarp::new(samples)
    }

    /// Discrete derivative: central inside, second-order one-sided at ends.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.samples.len();
        let h = 1.0 / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * self.samples[0] + 4.0 * self.samples[1] - self.samples[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * self.samples[n - 1] - 4.0 * self.samples[n - 2] + self.samples[n - 3])
                        / (2.0 * h)
                } else {
                    (self.samples[k + 1] - self.samples[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }
}

fn interp_scalar(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let x = x.clamp(xs[0], *xs.last().unwrap());
    let mut i = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i,
    };
    i = i.clamp(1, xs.len() - 1);
    let a = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] * (1.0 - a) + ys[i] * a
}

/// Warp group action `(q (.) xi)(t) = q(xi(t)) sqrt(xi'(t))`.
pub fn warp_action(q: &Tsrvf, xi: &TimeWarp) -> Result<Tsrvf> {
    assert_eq!(q.len(), xi.len(), "warp and trajectory time grids differ");
    if xi.samples() == q.times() {
        // exact identity on this grid
        return Ok(q.clone());
    }
    let deriv = xi.derivative();
    let values = xi
        .samples()
        .iter()
        .zip(deriv.iter())
        .map(|(&t, &d)| {
            let f = interp_frames(q.times(), q.values().iter(), t);
            f.scaled(d.max(0.0).sqrt())
        })
        .collect();
    Ok(Tsrvf::new(q.times().to_vec(), values))
}

/// L2 distance between velocity fields, trapezoid rule in time:
/// `sqrt( integral |q1(t) - q2(t)|^2 dt )`.
pub fn trajectory_distance(q1: &Tsrvf, q2: &Tsrvf) -> Result<f64> {
    SphericalGrid::same_grid(q1.grid(), q2.grid())?;
    assert_eq!(q1.len(), q2.len(), "trajectories must share the time grid");
    let w = q1.grid().cell_area();
    let mut acc = 0.0;
    for k in 0..q1.len() {
        let mut d2 = 0.0;
        for (p, q) in q1.values()[k].data().iter().zip(q2.values()[k].data()) {
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            d2 += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        }
        d2 *= w;
        let coeff = if k == 0 {
            (q1.times()[1] - q1.times()[0]) / 2.0
        } else if k == q1.len() - 1 {
            (q1.times()[k] - q1.times()[k - 1]) / 2.0
        } else {
            (q1.times()[k + 1] - q1.times()[k - 1]) / 2.0
        };
        acc += coeff * d2;
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_distance;
    use crate::grid::SphericalGrid;

    fn grid() -> Arc<SphericalGrid> {
        SphericalGrid::new(8, 8).unwrap()
    }

    /// Smooth trajectory whose velocity never vanishes (a vanishing
    /// velocity puts a square-root cusp in the scaled field).
    fn smooth_traj(g: &Arc<SphericalGrid>, n: usize) -> Trajectory {
        let times = uniform_times(n);
        let frames = times
            .iter()
            .map(|&t| {
                Srnf::new(Field3::from_fn(g.clone(), |u, v| {
                    let a = 1.0 + 3e-4 * (t + 0.2 * (std::f64::consts::PI * t).sin());
                    [a * u.sin() * v.cos(), a * u.sin() * v.sin(), a * u.cos()]
                }))
            })
            .collect();
        Trajectory::new(times, frames).unwrap()
    }

    /// Cubic-in-time trajectory: every stencil and quadrature error term is
    /// exactly proportional to h^2, so refinement ratios are exact.
    fn cubic_traj(g: &Arc<SphericalGrid>, n: usize) -> Trajectory {
        let times = uniform_times(n);
        let frames = times
            .iter()
            .map(|&t| {
                Srnf::new(Field3::from_fn(g.clone(), |u, v| {
                    let a = 1.0 + 3e-4 * t * t * t;
                    [a * u.sin() * v.cos(), a * u.sin() * v.sin(), a * u.cos()]
                }))
            })
            .collect();
        Trajectory::new(times, frames).unwrap()
    }

    #[test]
    fn constant_trajectory_has_zero_tsrvf() {
        let g = grid();
        let f = Srnf::new(Field3::from_fn(g.clone(), |u, v| [u.sin(), v.cos(), 1.0]));
        let h = Trajectory::uniform(vec![f.clone(); 8]).unwrap();
        let q = tsrvf_map(&h);
        for val in q.values() {
            assert!(l2_norm(val) < 1e-12);
        }
    }

    #[test]
    fn straight_line_has_constant_tsrvf() {
        let g = grid();
        let a = Field3::from_fn(g.clone(), |u, v| [u.sin() * v.cos(), u.sin() * v.sin(), u.cos()]);
        let b = a.scaled(2.0);
        let times = uniform_times(16);
        let frames: Vec<Srnf> = times
            .iter()
            .map(|&t| {
                let mut f = a.scaled(1.0 - t);
                f.axpy(t, &b);
                Srnf::new(f)
            })
            .collect();
        let q = tsrvf_map(&Trajectory::new(times, frames).unwrap());
        let diff = b.sub(&a);
        let expect = diff.scaled(1.0 / l2_norm(&diff).sqrt());
        for val in q.values() {
            assert!(l2_distance(val, &expect).unwrap() < 1e-10);
        }
    }

    #[test]
    fn tsrvf_norm_squared_equals_velocity_norm() {
        let g = grid();
        let h = smooth_traj(&g, 16);
        let q = tsrvf_map(&h);
        let frames: Vec<&Field3> = h.frames().iter().map(|f| f.field()).collect();
        let vel = time_derivative(h.times(), &frames);
        for (qv, hv) in q.values().iter().zip(vel.iter()) {
            let lhs = crate::field::l2_inner(qv, qv).unwrap();
            let rhs = l2_norm(hv);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_error_is_second_order_in_time() {
        let g = grid();
        let rms = |n: usize| {
            let h = cubic_traj(&g, n);
            let q = tsrvf_map(&h);
            let back = tsrvf_inverse(&q, &h.frames()[0]).unwrap();
            let mut acc = 0.0;
            for (a, b) in h.frames().iter().zip(back.frames()) {
                let d = crate::field::rms_distance(a.field(), b.field());
                acc += d * d;
            }
            (acc / n as f64).sqrt()
        };
        let e64 = rms(64);
        let e128 = rms(128);
        assert!(e64 <= 1e-6, "rms at T=64: {e64}");
        assert!(e128 <= e64 / 4.0, "rms {e64} -> {e128}");
    }

    #[test]
    fn zero_field_inverts_to_constant() {
        let g = grid();
        let q = Tsrvf::new(
            uniform_times(8),
            (0..8).map(|_| Field3::zeros(g.clone())).collect(),
        );
        let h0 = Srnf::new(Field3::from_fn(g.clone(), |u, _| [u, 0.0, 1.0]));
        let h = tsrvf_inverse(&q, &h0).unwrap();
        for f in h.frames() {
            assert!(l2_distance(f.field(), h0.field()).unwrap() < 1e-14);
        }
    }

    #[test]
    fn identity_warp_action_is_exact() {
        let g = grid();
        let q = tsrvf_map(&smooth_traj(&g, 16));
        let xi = TimeWarp::identity(16);
        let qw = warp_action(&q, &xi).unwrap();
        for (a, b) in q.values().iter().zip(qw.values()) {
            assert!(l2_distance(a, b).unwrap() == 0.0);
        }
    }

    #[test]
    fn warp_action_composes() {
        let g = grid();
        let n = 128;
        let q = tsrvf_map(&smooth_traj(&g, n));
        let xi1 = TimeWarp::new(
            uniform_times(n)
                .iter()
                .map(|&t| t + 0.08 * (std::f64::consts::PI * t).sin() * t * (1.0 - t) * 4.0)
                .collect(),
        )
        .unwrap();
        let xi2 = TimeWarp::new(
            uniform_times(n)
                .iter()
                .map(|&t| t + 0.15 * t * (1.0 - t))
                .collect(),
        )
        .unwrap();
        let lhs = warp_action(&warp_action(&q, &xi1).unwrap(), &xi2).unwrap();
        let rhs = warp_action(&q, &xi1.compose(&xi2).unwrap()).unwrap();
        let d = trajectory_distance(&lhs, &rhs).unwrap();
        let scale = trajectory_distance(&q, &q.scaled(0.0)).unwrap();
        assert!(d <= 1e-3 * scale.max(1e-12), "composition error {d} vs scale {scale}");
    }

    #[test]
    fn warp_isometry_error_halves_under_refinement() {
        let g = grid();
        let err = |n: usize| {
            let q1 = tsrvf_map(&smooth_traj(&g, n));
            let h2 = {
                let times = uniform_times(n);
                let frames = times
                    .iter()
                    .map(|&t| {
                        Srnf::new(Field3::from_fn(g.clone(), |u, v| {
                            let a = 1.0
                                + 2e-4 * (t + 0.1 * (2.0 * std::f64::consts::PI * t).cos());
                            [a * u.sin() * v.cos(), a * u.sin() * v.sin(), a * u.cos()]
                        }))
                    })
                    .collect();
                Trajectory::new(times, frames).unwrap()
            };
            let q2 = tsrvf_map(&h2);
            let xi = TimeWarp::new(
                uniform_times(n)
                    .iter()
                    .map(|&t| t + 0.15 * (std::f64::consts::PI * t).sin().powi(2) * (1.0 - t) * t * 4.0)
                    .collect(),
            )
            .unwrap();
            let before = trajectory_distance(&q1, &q2).unwrap();
            let after = trajectory_distance(
                &warp_action(&q1, &xi).unwrap(),
                &warp_action(&q2, &xi).unwrap(),
            )
            .unwrap();
            (after - before).abs() / before
        };
        let e128 = err(128);
        let e256 = err(256);
        assert!(e128 < 1e-2, "isometry defect {e128}");
        assert!(e256 <= 0.5 * e128 + 1e-12, "{e128} -> {e256}");
    }

    #[test]
    fn non_monotone_warp_rejected() {
        let samples = vec![0.0, 0.5, 0.4, 1.0];
        assert!(matches!(
            TimeWarp::new(samples),
            Err(F4dError::NonMonotoneWarp { index: 2 })
        ));
    }
}
