//! Dynamic-programming temporal alignment of velocity fields.
//!
//! The energy `|q1 - q2 (.) xi|^2` is minimized over discrete monotone warps
//! on the T x T lattice with local steps `(a, b)`, `1 <= a, b <= 3`, slopes
//! in lowest terms, so the warp derivative stays within `[1/3, 3]`. Edge
//! costs are trapezoid-rule integrals of the pointwise squared frame
//! distance along the segment, with the `sqrt(xi')` factor from the segment
//! slope and `q2` linearly interpolated at fractional indices. All frame
//! inner products are precomputed into a cross-Gram table, so the lattice
//! sweep itself touches only scalars.

use crate::error::{F4dError, Result};
use crate::field::l2_inner;
use crate::grid::SphericalGrid;
use crate::par;
use crate::trajectory::{TimeWarp, Tsrvf};

/// Allowed predecessor steps `(a, b)`: gcd-free pairs with components in
/// `1..=5` whose slope `b/a` stays within `[1/3, 3]`. The denser menu near
/// slope 1 lets the piecewise `sqrt(xi')` factor track smooth rates; the
/// `[1/3, 3]` bound is the usual local rate constraint.
pub const DP_STEPS: [(usize, usize); 31] = [
    (1, 1),
    (1, 2),
    (2, 1),
    (1, 3),
    (2, 3),
    (3, 1),
    (3, 2),
    (3, 4),
    (4, 3),
    (2, 5),
    (3, 5),
    (4, 5),
    (5, 2),
    (5, 3),
    (5, 4),
    (5, 6),
    (6, 5),
    (3, 7),
    (4, 7),
    (5, 7),
    (6, 7),
    (7, 3),
    (7, 4),
    (7, 5),
    (7, 6),
    (3, 8),
    (5, 8),
    (7, 8),
    (8, 3),
    (8, 5),
    (8, 7),
];

/// Precomputed frame inner products driving the lattice search.
#[derive(Debug, Clone)]
pub struct DpGram {
    /// `|q1[i]|^2`
    n1: Vec<f64>,
    /// `|q2[j]|^2`
    n2: Vec<f64>,
    /// `<q2[j], q2[j+1]>`
    adj2: Vec<f64>,
    /// `<q1[i], q2[j]>`, row-major in `i`
    cross: Vec<f64>,
    t: usize,
    dt: f64,
}

impl DpGram {
    /// Builds the tables from per-frame inner products supplied by `ip`.
    /// `ip(side_a, i, side_b, j)` must return the inner product between
    /// frame `i` of trajectory `side_a` and frame `j` of `side_b`, where
    /// the sides are 0 for `q1` and 1 for `q2`.
    pub fn from_inner_products(t: usize, ip: impl Fn(usize, usize, usize, usize) -> f64 + Sync) -> Result<Self> {
        if t < 2 {
            return Err(F4dError::DegenerateTimeGrid { frames: t });
        }
        let n1: Vec<f64> = (0..t).map(|i| ip(0, i, 0, i)).collect();
        let n2: Vec<f64> = (0..t).map(|j| ip(1, j, 1, j)).collect();
        let adj2: Vec<f64> = (0..t - 1).map(|j| ip(1, j, 1, j + 1)).collect();
        let rows = par::map_indexed(t, |i| {
            let mut row = Vec::with_capacity(t);
            for j in 0..t {
                row.push(ip(0, i, 1, j));
            }
            row
        });
        let cross = rows.into_iter().flatten().collect();
        Ok(Self {
            n1,
            n2,
            adj2,
            cross,
            t,
            dt: 1.0 / (t - 1) as f64,
        })
    }

    pub fn from_tsrvfs(q1: &Tsrvf, q2: &Tsrvf) -> Result<Self> {
        SphericalGrid::same_grid(q1.grid(), q2.grid())?;
        assert_eq!(q1.len(), q2.len(), "resample trajectories to a common T first");
        let v1 = q1.values();
        let v2 = q2.values();
        Self::from_inner_products(q1.len(), |sa, i, sb, j| {
            let a = if sa == 0 { &v1[i] } else { &v2[i] };
            let b = if sb == 0 { &v1[j] } else { &v2[j] };
            l2_inner(a, b).expect("same grid")
        })
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Squared distance between `q1[i]` and `c * q2` interpolated at the
    /// fractional index `jf`.
    fn sample_cost(&self, i: usize, jf: f64, c: f64) -> f64 {
        let j0 = jf.floor() as usize;
        let phi = jf - j0 as f64;
        let (g, nn2) = if phi == 0.0 {
            (self.cross[i * self.t + j0], self.n2[j0])
        } else {
            let g = (1.0 - phi) * self.cross[i * self.t + j0] + phi * self.cross[i * self.t + j0 + 1];
            let nn2 = (1.0 - phi) * (1.0 - phi) * self.n2[j0]
                + 2.0 * phi * (1.0 - phi) * self.adj2[j0]
                + phi * phi * self.n2[j0 + 1];
            (g, nn2)
        };
        self.n1[i] - 2.0 * c * g + c * c * nn2
    }

    /// Cost of the lattice edge arriving at `(i, j)` with step `(a, b)`:
    /// trapezoid integral over the `a + 1` time samples of the segment.
    pub fn edge_cost(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        let c = (b as f64 / a as f64).sqrt();
        let mut acc = 0.0;
        for k in 0..=a {
            let w = if k == 0 || k == a { 0.5 } else { 1.0 };
            let jf = (j - b) as f64 + (k * b) as f64 / a as f64;
            acc += w * self.sample_cost(i - a + k, jf, c);
        }
        acc * self.dt
    }
}

/// DP minimization over monotone lattice paths from `(0,0)` to `(T-1,T-1)`.
/// Returns the piecewise-linear warp through the optimal path and the
/// aligned distance (the square root of the optimal energy).
pub fn dp_align_gram(gram: &DpGram) -> (TimeWarp, f64) {
    let t = gram.t;
    let mut cost = vec![f64::INFINITY; t * t];
    let mut back = vec![u8::MAX; t * t];
    cost[0] = 0.0;
    for i in 1..t {
        for j in 1..t {
            let mut best = f64::INFINITY;
            let mut arg = u8::MAX;
            for (s, &(a, b)) in DP_STEPS.iter().enumerate() {
                if i < a || j < b {
                    continue;
                }
                let prev = cost[(i - a) * t + (j - b)];
                if !prev.is_finite() {
                    continue;
                }
                let c = prev + gram.edge_cost(i, j, a, b);
                if c < best {
                    best = c;
                    arg = s as u8;
                }
            }
            cost[i * t + j] = best;
            back[i * t + j] = arg;
        }
    }

    // backtrack the vertex chain
    let mut verts = vec![(t - 1, t - 1)];
    let (mut i, mut j) = (t - 1, t - 1);
    while (i, j) != (0, 0) {
        let (a, b) = DP_STEPS[back[i * t + j] as usize];
        i -= a;
        j -= b;
        verts.push((i, j));
    }
    verts.reverse();

    // piecewise-linear warp through the path, sampled on the uniform grid
    let denom = (t - 1) as f64;
    let mut samples = vec![0.0; t];
    for seg in verts.windows(2) {
        let (i0, j0) = seg[0];
        let (i1, j1) = seg[1];
        for ti in i0..=i1 {
            let jr = j0 as f64 + (ti - i0) as f64 * (j1 - j0) as f64 / (i1 - i0) as f64;
            samples[ti] = jr / denom;
        }
    }
    samples[0] = 0.0;
    samples[t - 1] = 1.0;
    let warp = TimeWarp::new(samples).expect("DP path is monotone");
    (warp, cost[t * t - 1].max(0.0).sqrt())
}

/// Aligns `q2` onto `q1` over discrete monotone warps; see [`dp_align_gram`].
pub fn dp_align(q1: &Tsrvf, q2: &Tsrvf) -> Result<(TimeWarp, f64)> {
    let gram = DpGram::from_tsrvfs(q1, q2)?;
    Ok(dp_align_gram(&gram))
}

/// Objective of the action form `|q1 - (q2 o xi) sqrt(xi')|^2` with the
/// central-difference rate estimate, evaluated from the Gram tables;
/// matches `trajectory_distance(q1, warp_action(q2, xi))^2` up to rounding.
fn action_objective_terms(gram: &DpGram, samples: &[f64], t_lo: usize, t_hi: usize) -> f64 {
    let t = gram.t;
    let h = gram.dt;
    let denom = (t - 1) as f64;
    let mut acc = 0.0;
    for k in t_lo..=t_hi {
        let d = if k == 0 {
            (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * h)
        } else if k == t - 1 {
            (3.0 * samples[t - 1] - 4.0 * samples[t - 2] + samples[t - 3]) / (2.0 * h)
        } else {
            (samples[k + 1] - samples[k - 1]) / (2.0 * h)
        };
        let c = d.max(0.0).sqrt();
        let coeff = if k == 0 || k == t - 1 { h / 2.0 } else { h };
        acc += coeff * gram.sample_cost(k, (samples[k] * denom).min(denom), c);
    }
    acc
}

/// Polishes a DP warp by coordinate-descent on the action objective: each
/// interior sample is line-searched within its monotone interval against
/// the exact re-applied energy. The lattice path is a good global start;
/// the polish removes its slope quantization.
pub fn refine_warp(gram: &DpGram, warp: &TimeWarp, sweeps: usize) -> TimeWarp {
    let t = gram.t;
    let mut samples = warp.samples().to_vec();
    let margin = 1e-9;
    for _ in 0..sweeps {
        let mut improved = false;
        for k in 1..t - 1 {
            let lo = samples[k - 1] + margin;
            let hi = samples[k + 1] - margin;
            if hi <= lo {
                continue;
            }
            // terms whose value depends on samples[k]
            let t_lo = k.saturating_sub(2).min(if k <= 2 { 0 } else { k - 1 });
            let t_hi = (k + 1).max(if k >= t - 3 { t - 1 } else { k + 1 }).min(t - 1);
            let eval = |x: f64, samples: &mut Vec<f64>| {
                let old = samples[k];
                samples[k] = x;
                let j = action_objective_terms(gram, samples, t_lo, t_hi);
                samples[k] = old;
                j
            };
            // two-level grid search: robust to interpolation kinks
            let mut best_x = samples[k];
            let mut best_j = eval(best_x, &mut samples);
            let coarse = 32;
            for step in 0..=coarse {
                let x = lo + (hi - lo) * step as f64 / coarse as f64;
                let j = eval(x, &mut samples);
                if j < best_j {
                    best_j = j;
                    best_x = x;
                }
            }
            let span = (hi - lo) / coarse as f64;
            for step in 0..=coarse {
                let x = (best_x - span + 2.0 * span * step as f64 / coarse as f64)
                    .clamp(lo, hi);
                let j = eval(x, &mut samples);
                if j < best_j {
                    best_j = j;
                    best_x = x;
                }
            }
            if best_x != samples[k] {
                samples[k] = best_x;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    TimeWarp::new(samples).expect("refinement preserves monotonicity")
}

/// DP alignment followed by the coordinate polish; returns the refined warp
/// and the re-applied aligned distance.
pub fn dp_align_refined(q1: &Tsrvf, q2: &Tsrvf) -> Result<(TimeWarp, f64)> {
    let gram = DpGram::from_tsrvfs(q1, q2)?;
    let (warp, _) = dp_align_gram(&gram);
    let refined = refine_warp(&gram, &warp, 20);
    let d = action_objective_terms(&gram, refined.samples(), 0, gram.t - 1)
        .max(0.0)
        .sqrt();
    Ok((refined, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field3;
    use crate::grid::SphericalGrid;
    use crate::trajectory::{trajectory_distance, uniform_times, warp_action, Trajectory};
    use crate::Srnf;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    /// Exhaustive monotone-path search with the same steps and edge costs;
    /// accumulates per path in walk order, like the DP recursion.
    fn exhaustive_min(gram: &DpGram) -> f64 {
        fn rec(gram: &DpGram, i: usize, j: usize, acc: f64, best: &mut f64) {
            let t = gram.len();
            if i == t - 1 && j == t - 1 {
                if acc < *best {
                    *best = acc;
                }
                return;
            }
            for &(a, b) in DP_STEPS.iter() {
                let (ni, nj) = (i + a, j + b);
                if ni <= t - 1 && nj <= t - 1 {
                    rec(gram, ni, nj, acc + gram.edge_cost(ni, nj, a, b), best);
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(gram, 0, 0, 0.0, &mut best);
        best
    }

    fn scalar_gram(s1: &[f64], s2: &[f64]) -> DpGram {
        DpGram::from_inner_products(s1.len(), |sa, i, sb, j| {
            let a = if sa == 0 { s1[i] } else { s2[i] };
            let b = if sb == 0 { s1[j] } else { s2[j] };
            a * b
        })
        .unwrap()
    }

    #[test]
    fn self_alignment_is_identity_with_zero_distance() {
        let s: Vec<f64> = (0..16).map(|k| (k as f64 * 0.3).sin() + 2.0).collect();
        let gram = scalar_gram(&s, &s);
        let (warp, d) = dp_align_gram(&gram);
        assert!(warp.is_identity());
        assert_eq!(d, 0.0);
    }

    #[test]
    fn dp_matches_exhaustive_search_exactly() {
        let mut rng = ChaCha12Rng::seed_from_u64(1234);
        for _ in 0..50 {
            let s1: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s2: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gram = scalar_gram(&s1, &s2);
            let (_, d) = dp_align_gram(&gram);
            let brute = exhaustive_min(&gram);
            assert_eq!(d, brute.max(0.0).sqrt(), "dp {d} vs brute {brute}");
        }
    }

    #[test]
    fn recovers_synthetic_warp() {
        let g = SphericalGrid::new(8, 8).unwrap();
        let n = 128;
        let times = uniform_times(n);
        let frames: Vec<Srnf> = times
            .iter()
            .map(|&t| {
                Srnf::new(Field3::from_fn(g.clone(), |u, v| {
                    let w = 2.0 * std::f64::consts::PI * t;
                    let a = 1.0 + 0.3 * t;
                    [
                        a * u.sin() * v.cos() + 0.3 * w.sin() + 0.1 * (2.0 * w).sin(),
                        a * u.sin() * v.sin() + 0.3 * w.cos() + 0.1 * (2.0 * w).cos(),
                        a * u.cos(),
                    ]
                }))
            })
            .collect();
        let q1 = crate::trajectory::tsrvf_map(&Trajectory::new(times, frames).unwrap());

        let xi0 = crate::synth::random_time_warp(17, 0.35, n);
        let q2 = warp_action(&q1, &xi0).unwrap();

        let (xi, dp_distance) = dp_align(&q1, &q2).unwrap();
        let d_raw = trajectory_distance(&q1, &q2).unwrap();
        // aligned distance in the Eq.-9 sense: apply the warp, then measure
        let d_aligned = trajectory_distance(&q1, &warp_action(&q2, &xi).unwrap()).unwrap();
        assert!(
            d_aligned <= 0.05 * d_raw,
            "aligned {d_aligned} vs unaligned {d_raw}"
        );
        assert!(dp_distance <= d_raw);

        // xi should approximate the inverse of xi0
        let xi0_inv = xi0.inverse().unwrap();
        let sup = xi
            .samples()
            .iter()
            .zip(xi0_inv.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 2.0 / n as f64, "sup warp error {sup}");
    }
}
