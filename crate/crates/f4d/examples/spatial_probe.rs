//! Scratch probe for spatial-registration recovery margins.

use f4d::eval::{eval_spatial, EvalConfig};

fn main() {
    for &(nu, trials, tol, max_iter, outer) in
        &[(32usize, 6usize, 1e-6, 100usize, 0usize), (32, 6, 1e-8, 300, 0)]
    {
        let cfg = EvalConfig {
            seed: 11,
            trials,
            nu,
            nv: nu,
            magnitude: 0.05,
            tol,
            max_iter,
            ..Default::default()
        };
        let _ = outer;
        let t0 = std::time::Instant::now();
        let rep = eval_spatial(&cfg).unwrap();
        println!("grid={nu} tol={tol:.0e} iters={max_iter}  [{:.1}s]", t0.elapsed().as_secs_f64());
        for (i, m) in rep.items.iter().enumerate() {
            println!(
                "  trial {i}: before={:.5} after={:.5} ratio={:.4} E0={:.3e} E1={:.3e}",
                m["error_before"],
                m["error_after"],
                m["error_after"] / m["error_before"],
                m["energy_initial"],
                m["energy_final"]
            );
        }
    }
}
