//! Scratch probe for DP warp-recovery quality across warp strengths and
//! time resolutions.

use f4d::field::Field3;
use f4d::synth::random_time_warp;
use f4d::trajectory::{trajectory_distance, tsrvf_map, uniform_times, warp_action, Trajectory};
use f4d::{dp_align, SphericalGrid, Srnf};

fn main() {
    let g = SphericalGrid::new(8, 8).unwrap();
    for &n in &[64usize, 128] {
        for &mag in &[0.2, 0.4, 0.6, 0.9] {
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
            let q1 = tsrvf_map(&Trajectory::new(times.clone(), frames).unwrap());
            let xi0 = random_time_warp(17, mag, n);
            let q2 = warp_action(&q1, &xi0).unwrap();
            let (xi, d_aligned) = dp_align(&q1, &q2).unwrap();
            let reapplied = trajectory_distance(&q1, &warp_action(&q2, &xi).unwrap()).unwrap();
            let d_raw = trajectory_distance(&q1, &q2).unwrap();
            let norm = trajectory_distance(&q1, &q1.scaled(0.0)).unwrap();
            let xi0_inv = xi0.inverse().unwrap();
            let sup = xi
                .samples()
                .iter()
                .zip(xi0_inv.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let slope_bounds = xi0
                .derivative()
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
            println!(
                "n={n:4} mag={mag:.2}: |q|={norm:.4} raw={d_raw:.4} dp={d_aligned:.5} reapplied={reapplied:.5} ratio={:.4} sup={sup:.4} (2/T={:.4}) slopes=[{:.2},{:.2}]",
                reapplied / d_raw,
                2.0 / n as f64,
                slope_bounds.0,
                slope_bounds.1,
            );
        }
    }
}
