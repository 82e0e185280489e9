//! Karcher means, PCA modes of variation, random synthesis, and the
//! PCA-expressiveness cross-validation protocol.
//!
//! All statistics run in the flat TSRVF (or SRNF/surface) function space.
//! Fields are flattened with square-root metric weights so Euclidean inner
//! products of the flattened vectors equal the trajectory L2 inner product,
//! and the covariance eigenproblem is solved through the n x n Gram matrix
//! since the ambient dimension dwarfs the sample count.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::align::dp_align_refined;
use crate::error::{F4dError, Result};
use crate::field::Field3;
use crate::par;
use crate::srnf::srnf_map;
use crate::surface::Surface;
use crate::trajectory::{
    trajectory_distance, warp_action, SurfaceSequence, TimeWarp, Trajectory, Tsrvf,
};

#[derive(Debug, Clone)]
pub enum MeanInit {
    /// Start from the first input (the stated algorithm).
    First,
    /// Start from a seed-chosen input.
    Random { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct KarcherConfig {
    /// Relative change in the mean norm below which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub init: MeanInit,
}

impl Default for KarcherConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 20,
            init: MeanInit::First,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanResult {
    pub mean: Tsrvf,
    /// Total warp composed per input across iterations.
    pub warps: Vec<TimeWarp>,
    pub aligned: Vec<Tsrvf>,
    /// Sum of squared aligned distances after each mean update.
    pub cost_trace: Vec<f64>,
    pub converged: bool,
}

fn average(tsrvfs: &[Tsrvf]) -> Tsrvf {
    let n = tsrvfs.len() as f64;
    let mut acc = tsrvfs[0].scaled(1.0 / n);
    for q in &tsrvfs[1..] {
        acc = acc.lerp(q, 1.0, 1.0 / n);
    }
    acc
}

fn spread_cost(mean: &Tsrvf, aligned: &[Tsrvf]) -> f64 {
    aligned
        .iter()
        .map(|q| trajectory_distance(mean, q).expect("shared grids").powi(2))
        .sum()
}

/// Karcher mean of velocity fields under the rate-invariant distance:
/// alternates DP alignment of every input to the current mean with the
/// cross-sectional average. Inputs must be spatially pre-registered and
/// share grid and time resolution. An alignment that fails to lower the
/// recomputed distance is discarded, so the objective never increases.
pub fn karcher_mean(tsrvfs: &[Tsrvf], cfg: &KarcherConfig) -> Result<MeanResult> {
    if tsrvfs.len() < 2 {
        return Err(F4dError::InsufficientData {
            needed: 2,
            got: tsrvfs.len(),
        });
    }
    let t = tsrvfs[0].len();
    let init_idx = match cfg.init {
        MeanInit::First => 0,
        MeanInit::Random { seed } => {
            ChaCha12Rng::seed_from_u64(seed).gen_range(0..tsrvfs.len())
        }
    };
    let mut mean = tsrvfs[init_idx].clone();
    let mut aligned: Vec<Tsrvf> = tsrvfs.to_vec();
    let mut warps: Vec<TimeWarp> = vec![TimeWarp::identity(t); tsrvfs.len()];
    let mut cost_trace = Vec::new();
    let mut prev_norm = trajectory_distance(&mean, &mean.scaled(0.0))?;
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        // align every input to the current mean
        let updates: Vec<(Tsrvf, Option<TimeWarp>)> = par::map_slice(&aligned, |q| {
            let d_old = trajectory_distance(&mean, q).expect("shared grids");
            let (xi, _) = dp_align_refined(&mean, q).expect("shared grids");
            let q_new = warp_action(q, &xi).expect("same t");
            let d_new = trajectory_distance(&mean, &q_new).expect("shared grids");
            if d_new <= d_old {
                (q_new, Some(xi))
            } else {
                (q.clone(), None)
            }
        });
        for (k, (q_new, xi)) in updates.into_iter().enumerate() {
            if let Some(xi) = xi {
                warps[k] = warps[k].compose(&xi)?;
                aligned[k] = q_new;
            }
        }

        mean = average(&aligned);
        cost_trace.push(spread_cost(&mean, &aligned));

        let norm = trajectory_distance(&mean, &mean.scaled(0.0))?;
        if (norm - prev_norm).abs() <= cfg.tol * prev_norm.max(1e-300) {
            converged = true;
            break;
        }
        prev_norm = norm;
    }

    Ok(MeanResult {
        mean,
        warps,
        aligned,
        cost_trace,
        converged,
    })
}

/// Mean velocity field plus the leading eigenpairs of the sample covariance.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Tsrvf,
    /// Descending nonnegative eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm modes under the weighted flattening.
    pub eigenvectors: Vec<Tsrvf>,
    pub k: usize,
    pub sample_size: usize,
    /// Requested rank exceeded the sample rank.
    pub truncated: bool,
}

/// Square-root metric weight per time sample: trapezoid coefficient in `t`
/// times the flat cell area, so flattened Euclidean products equal the
/// trajectory L2 inner product.
fn flatten_weights(q: &Tsrvf) -> Vec<f64> {
    let cell = q.grid().cell_area();
    let times = q.times();
    let n = times.len();
    (0..n)
        .map(|k| {
            let c = if k == 0 {
                (times[1] - times[0]) / 2.0
            } else if k == n - 1 {
                (times[k] - times[k - 1]) / 2.0
            } else {
                (times[k + 1] - times[k - 1]) / 2.0
            };
            (c * cell).sqrt()
        })
        .collect()
}

fn flatten(q: &Tsrvf, w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(q.len() * q.grid().len() * 3);
    for (frame, wk) in q.values().iter().zip(w) {
        for p in frame.data() {
            out.push(p[0] * wk);
            out.push(p[1] * wk);
            out.push(p[2] * wk);
        }
    }
    out
}

fn unflatten(q_like: &Tsrvf, w: &[f64], x: &[f64]) -> Tsrvf {
    let grid = q_like.grid().clone();
    let per_frame = grid.len() * 3;
    let values = (0..q_like.len())
        .map(|k| {
            let mut data = Vec::with_capacity(grid.len());
            let base = k * per_frame;
            for p in 0..grid.len() {
                data.push([
                    x[base + 3 * p] / w[k],
                    x[base + 3 * p + 1] / w[k],
                    x[base + 3 * p + 2] / w[k],
                ]);
            }
            Field3::from_data(grid.clone(), data)
        })
        .collect();
    Tsrvf::new(q_like.times().to_vec(), values)
}

/// PCA of velocity fields already aligned to `mean`, via the Gram trick.
/// Returns at most `min(k, n - 1)` components; fewer when the sample rank
/// is lower still (flagged through `truncated`).
pub fn pca(tsrvfs: &[Tsrvf], mean: &Tsrvf, k: usize) -> Result<PcaModel> {
    let n = tsrvfs.len();
    if n < 2 {
        return Err(F4dError::InsufficientData { needed: 2, got: n });
    }
    let w = flatten_weights(mean);
    let mbar = flatten(mean, &w);
    let rows: Vec<Vec<f64>> = par::map_slice(tsrvfs, |q| {
        let mut x = flatten(q, &w);
        for (a, b) in x.iter_mut().zip(&mbar) {
            *a -= b;
        }
        x
    });

    // n x n Gram matrix of centered rows
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram[(i, j)] = g / (n as f64 - 1.0);
            gram[(j, i)] = gram[(i, j)];
        }
    }
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let k_req = k.min(n - 1);
    let tiny = 1e-10 * eig.eigenvalues[order[0]].abs().max(1e-300);
    let mut eigenvalues = Vec::new();
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for &idx in order.iter().take(k_req) {
        let lam = eig.eigenvalues[idx];
        if lam <= tiny {
            break;
        }
        // unit mode: X^T y / sqrt(lam (n-1))
        let y = eig.eigenvectors.column(idx);
        let scale = 1.0 / (lam * (n as f64 - 1.0)).sqrt();
        let dim = rows[0].len();
        let mut mode = vec![0.0; dim];
        for (i, row) in rows.iter().enumerate() {
            let c = y[i] * scale;
            for (m, x) in mode.iter_mut().zip(row) {
                *m += c * x;
            }
        }
        eigenvalues.push(lam);
        modes.push(mode);
    }
    // Gram-Schmidt polish: rounding in near-degenerate eigenpairs is
    // amplified by the 1/sqrt(lam) scaling
    for i in 0..modes.len() {
        for j in 0..i {
            let c: f64 = modes[i].iter().zip(&modes[j]).map(|(a, b)| a * b).sum();
            let prev = modes[j].clone();
            for (a, b) in modes[i].iter_mut().zip(&prev) {
                *a -= c * b;
            }
        }
        let norm = modes[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        for a in modes[i].iter_mut() {
            *a /= norm;
        }
    }
    let eigenvectors: Vec<Tsrvf> = modes.iter().map(|m| unflatten(mean, &w, m)).collect();
    let truncated = eigenvalues.len() < k;
    Ok(PcaModel {
        mean: mean.clone(),
        k: eigenvalues.len(),
        sample_size: n,
        eigenvalues,
        eigenvectors,
        truncated,
    })
}

/// Flattening weights of a model's time grid, as stored in the model file.
pub fn model_flatten_weights(model: &PcaModel) -> Vec<f64> {
    flatten_weights(&model.mean)
}

impl PcaModel {
    /// Inner product of two velocity fields in the flattened metric.
    pub fn metric_inner(&self, a: &Tsrvf, b: &Tsrvf) -> f64 {
        let w = flatten_weights(&self.mean);
        flatten(a, &w)
            .iter()
            .zip(flatten(b, &w))
            .map(|(x, y)| x * y)
            .sum()
    }

    /// Projects onto the retained modes and reconstructs.
    pub fn reconstruct(&self, q: &Tsrvf) -> Tsrvf {
        let centered = q.sub(&self.mean);
        let mut out = self.mean.clone();
        for e in &self.eigenvectors {
            let c = self.metric_inner_centered(&centered, e);
            out = out.lerp(e, 1.0, c);
        }
        out
    }

    fn metric_inner_centered(&self, centered: &Tsrvf, e: &Tsrvf) -> f64 {
        let w = flatten_weights(&self.mean);
        flatten(centered, &w)
            .iter()
            .zip(flatten(e, &w))
            .map(|(x, y)| x * y)
            .sum()
    }

    /// Residual norm after projection, in the flattened metric.
    pub fn reconstruction_error(&self, q: &Tsrvf) -> f64 {
        let rec = self.reconstruct(q);
        trajectory_distance(q, &rec).expect("shared grids")
    }
}

/// Samples along the i-th principal direction, `mean + tau sqrt(sigma_i) e_i`.
pub fn principal_path(model: &PcaModel, i: usize, taus: &[f64]) -> Result<Vec<Tsrvf>> {
    if i >= model.k {
        return Err(F4dError::IndexOutOfRange { index: i, k: model.k });
    }
    let sd = model.eigenvalues[i].sqrt();
    Ok(taus
        .iter()
        .map(|&tau| model.mean.lerp(&model.eigenvectors[i], 1.0, tau * sd))
        .collect())
}

/// Draws standard-normal mode coefficients, clamps them to
/// `[-clamp, clamp]`, and forms `mean + sum tau_i sqrt(sigma_i) e_i`.
/// Deterministic per seed.
pub fn sample_random(model: &PcaModel, seed: u64, clamp: f64) -> Tsrvf {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = model.mean.clone();
    for (lam, e) in model.eigenvalues.iter().zip(&model.eigenvectors) {
        let tau: f64 = rng.sample(StandardNormal);
        let tau = tau.clamp(-clamp, clamp);
        out = out.lerp(e, 1.0, tau * lam.sqrt());
    }
    out
}

/// Raw coefficient draws used by `sample_random` for a given seed (handy
/// for checking the clamp contract).
pub fn sample_coefficients(model: &PcaModel, seed: u64, clamp: f64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..model.k)
        .map(|_| {
            let tau: f64 = rng.sample(StandardNormal);
            tau.clamp(-clamp, clamp)
        })
        .collect()
}

/// Representation a cross-validated PCA runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    /// Raw surface coordinates.
    SurfaceSpace,
    /// SRNFs of the surfaces.
    SrnfSpace,
    /// SRNF trajectories of the sequences, no temporal alignment.
    CurveSpace,
    /// Velocity fields, with test items DP-aligned to the training mean.
    TsrvfSpace,
}

#[derive(Debug, Clone)]
pub enum CvDataset {
    Surfaces(Vec<Surface>),
    Sequences(Vec<SurfaceSequence>),
}

impl CvDataset {
    pub fn len(&self) -> usize {
        match self {
            CvDataset::Surfaces(v) => v.len(),
            CvDataset::Sequences(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CvStats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    /// Mean reconstruction error of each fold's test items.
    pub per_fold_mean: Vec<f64>,
}

pub fn summarize(errors: &[f64]) -> (f64, f64, f64) {
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    (mean, var.sqrt(), median)
}

/// Items as velocity fields in one representation. Static surfaces become
/// two-frame constant "trajectories" so one PCA code path serves all modes.
fn cv_items(dataset: &CvDataset, mode: CvMode) -> Result<Vec<Tsrvf>> {
    match (dataset, mode) {
        (CvDataset::Surfaces(fs), CvMode::SurfaceSpace) => Ok(fs
            .iter()
            .map(|f| constant_item(f.field().clone()))
            .collect()),
        (CvDataset::Surfaces(fs), CvMode::SrnfSpace) => Ok(fs
            .iter()
            .map(|f| constant_item(srnf_map(f).into_field()))
            .collect()),
        (CvDataset::Sequences(seqs), CvMode::CurveSpace) => seqs
            .iter()
            .map(|s| {
                let h = s.srnf_trajectory()?;
                Ok(trajectory_as_item(&h))
            })
            .collect(),
        (CvDataset::Sequences(seqs), CvMode::TsrvfSpace) => seqs
            .iter()
            .map(|s| Ok(crate::trajectory::tsrvf_map(&s.srnf_trajectory()?)))
            .collect(),
        _ => Err(F4dError::InsufficientData {
            needed: 0,
            got: dataset.len(),
        }),
    }
}

fn constant_item(f: Field3) -> Tsrvf {
    Tsrvf::new(vec![0.0, 1.0], vec![f.clone(), f])
}

fn trajectory_as_item(h: &Trajectory) -> Tsrvf {
    Tsrvf::new(
        h.times().to_vec(),
        h.frames().iter().map(|f| f.field().clone()).collect(),
    )
}

/// Deterministic fold assignment: seeded shuffle, contiguous chunks.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let mut out = vec![Vec::new(); folds];
    for (pos, i) in idx.into_iter().enumerate() {
        out[pos % folds].push(i);
    }
    out
}

/// K-fold PCA reconstruction protocol: fit on the training split in the
/// chosen representation, project and reconstruct each test item, report
/// the residual norm in that representation's metric.
pub fn expressiveness_cv(
    dataset: &CvDataset,
    mode: CvMode,
    folds: usize,
    k: usize,
    seed: u64,
) -> Result<CvStats> {
    if dataset.len() < folds || folds < 2 {
        return Err(F4dError::InsufficientData {
            needed: folds.max(2),
            got: dataset.len(),
        });
    }
    let items = cv_items(dataset, mode)?;
    let assignment = fold_indices(items.len(), folds, seed);

    let mut all_errors = Vec::new();
    let mut per_fold_mean = Vec::new();
    for test_idx in &assignment {
        let train: Vec<Tsrvf> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| !test_idx.contains(i))
            .map(|(_, q)| q.clone())
            .collect();
        let mean = average(&train);
        // temporal alignment only in velocity-field mode
        let (mean, train): (Tsrvf, Vec<Tsrvf>) = if mode == CvMode::TsrvfSpace {
            let km = karcher_mean(
                &train,
                &KarcherConfig {
                    max_iter: 5,
                    ..Default::default()
                },
            )?;
            (km.mean, km.aligned)
        } else {
            (mean, train)
        };
        let model = pca(&train, &mean, k)?;

        let mut fold_errors = Vec::new();
        for &ti in test_idx {
            let mut item = items[ti].clone();
            if mode == CvMode::TsrvfSpace {
                let (xi, _) = dp_align_refined(&model.mean, &item)?;
                item = warp_action(&item, &xi)?;
            }
            fold_errors.push(model.reconstruction_error(&item));
        }
        per_fold_mean.push(fold_errors.iter().sum::<f64>() / fold_errors.len() as f64);
        all_errors.extend(fold_errors);
    }
    let (mean, std, median) = summarize(&all_errors);
    Ok(CvStats {
        mean,
        std,
        median,
        per_fold_mean,
    })
}
