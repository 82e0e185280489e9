//! Straight-line geodesics between aligned velocity fields and the full
//! spatiotemporal pipeline from two raw surface sequences to a geodesic of
//! 4D surfaces.

use crate::error::Result;
use crate::inversion::{invert_trajectory, InversionConfig, InversionResult};
use crate::registration::{register_trajectory, RegistrationConfig, TrajectoryRegistration};
use crate::srnf::Srnf;
use crate::trajectory::{
    trajectory_distance, tsrvf_inverse, tsrvf_map, warp_action, SurfaceSequence, TimeWarp,
    Trajectory, Tsrvf,
};
use crate::{align::dp_align_refined, par};

/// Straight-line segment between two aligned velocity fields:
/// `beta(tau_k) = (1 - tau_k) q1 + tau_k q2` with `tau_k = k / (n_steps-1)`.
pub fn geodesic(q1: &Tsrvf, q2_aligned: &Tsrvf, n_steps: usize) -> Vec<Tsrvf> {
    assert!(n_steps >= 2, "a geodesic needs at least its endpoints");
    (0..n_steps)
        .map(|k| {
            let tau = k as f64 / (n_steps - 1) as f64;
            q1.lerp(q2_aligned, 1.0 - tau, tau)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub registration: RegistrationConfig,
    /// Common time resolution the two sequences are resampled to.
    pub resample_t: usize,
    /// Geodesic sample count, endpoints included.
    pub n_steps: usize,
    /// Visualization inversion; `None` skips surface recovery.
    pub inversion: Option<InversionConfig>,
}

#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub taus: Vec<f64>,
    /// Geodesic samples in TSRVF space.
    pub tsrvfs: Vec<Tsrvf>,
    /// SRNF trajectories recovered per sample.
    pub srnf_paths: Vec<Trajectory>,
    /// Per-sample surface sequences, when inversion was requested.
    pub surfaces: Option<Vec<Vec<InversionResult>>>,
    pub warp: TimeWarp,
    /// Rate-invariant distance after alignment (the DP optimum).
    pub aligned_distance: f64,
    /// Distance before temporal alignment.
    pub unaligned_distance: f64,
    pub registered1: TrajectoryRegistration,
    pub registered2: TrajectoryRegistration,
}

/// Four-step pipeline: sequential spatial registration of both sequences to
/// a shared reference (the first frame of `a`), velocity-field mapping,
/// DP temporal alignment applied to both the TSRVF and the SRNF trajectory,
/// straight-line geodesic, and per-sample inversion back to SRNFs (and to
/// surfaces when configured).
pub fn register_and_geodesic(
    a: &SurfaceSequence,
    b: &SurfaceSequence,
    cfg: &PipelineConfig,
) -> Result<GeodesicResult> {
    let f_ref = a.frames[0].clone();
    let reg1 = register_trajectory(&a.frames, &f_ref, &cfg.registration)?;
    let reg2 = register_trajectory(&b.frames, &f_ref, &cfg.registration)?;

    let h1 = SurfaceSequence::new(a.times.clone(), reg1.frames.clone())?
        .srnf_trajectory()?
        .resample(cfg.resample_t)?;
    let h2 = SurfaceSequence::new(b.times.clone(), reg2.frames.clone())?
        .srnf_trajectory()?
        .resample(cfg.resample_t)?;

    let q1 = tsrvf_map(&h1);
    let q2 = tsrvf_map(&h2);
    let unaligned_distance = trajectory_distance(&q1, &q2)?;
    let (warp, aligned_distance) = dp_align_refined(&q1, &q2)?;
    let q2_star = warp_action(&q2, &warp)?;
    let h2_star = h2.compose_warp(&warp)?;

    let tsrvfs = geodesic(&q1, &q2_star, cfg.n_steps);
    let taus: Vec<f64> = (0..cfg.n_steps)
        .map(|k| k as f64 / (cfg.n_steps - 1) as f64)
        .collect();

    // start points interpolate between the two registered start SRNFs
    let srnf_paths: Vec<Trajectory> = taus
        .iter()
        .zip(tsrvfs.iter())
        .map(|(&tau, beta)| {
            let mut h0 = h1.frames()[0].field().scaled(1.0 - tau);
            h0.axpy(tau, h2_star.frames()[0].field());
            tsrvf_inverse(beta, &Srnf::new(h0))
        })
        .collect::<Result<_>>()?;

    let surfaces = match &cfg.inversion {
        None => None,
        Some(inv_cfg) => {
            let per_path: Vec<Result<Vec<InversionResult>>> =
                par::map_slice(&srnf_paths, |path| {
                    invert_trajectory(path.frames(), inv_cfg)
                });
            let mut out = Vec::with_capacity(per_path.len());
            for r in per_path {
                out.push(r?);
            }
            Some(out)
        }
    };

    Ok(GeodesicResult {
        taus,
        tsrvfs,
        srnf_paths,
        surfaces,
        warp,
        aligned_distance,
        unaligned_distance,
        registered1: reg1,
        registered2: reg2,
    })
}
