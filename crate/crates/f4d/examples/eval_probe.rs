//! Scratch probe for the temporal-eval criterion margins.

use f4d::eval::{eval_temporal, EvalConfig};

fn main() {
    for &(frames, mag) in &[(64usize, 0.3), (64, 0.4), (64, 0.5), (128, 0.4)] {
        let cfg = EvalConfig {
            seed: 7,
            trials: 10,
            nu: 24,
            nv: 24,
            frames,
            warp_magnitude: mag,
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let rep = eval_temporal(&cfg).unwrap();
        let med = |col: &str| rep.summary[col].median;
        let maxcol = |col: &str| rep.items.iter().map(|m| m[col]).fold(0.0f64, f64::max);
        println!(
            "T={frames} mag={mag}: base={:.4} same_pre={:.4} same_post={:.4} same_ratio(med)={:.4} same_ratio(max)={:.4} cross_post/base(med)={:.4} (max)={:.4}  [{:.1}s]",
            med("baseline"),
            med("same_pre"),
            med("same_post"),
            med("same_post_over_pre"),
            maxcol("same_post_over_pre"),
            med("cross_post_over_baseline"),
            maxcol("cross_post_over_baseline"),
            t0.elapsed().as_secs_f64()
        );
    }
}
