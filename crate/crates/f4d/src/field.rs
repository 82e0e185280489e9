//! Grid-sampled fields of 3-vectors and their L2 geometry.

use std::sync::Arc;

use crate::error::Result;
use crate::grid::SphericalGrid;

/// A 3-vector per grid point, row-major in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    grid: Arc<SphericalGrid>,
    data: Vec<[f64; 3]>,
}

impl Field3 {
    pub fn zeros(grid: Arc<SphericalGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            data: vec![[0.0; 3]; n],
        }
    }

    pub fn from_data(grid: Arc<SphericalGrid>, data: Vec<[f64; 3]>) -> Self {
        assert_eq!(data.len(), grid.len(), "field size must match grid");
        Self { grid, data }
    }

    pub fn from_fn(grid: Arc<SphericalGrid>, mut f: impl FnMut(f64, f64) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.nu() {
            for j in 0..grid.nv() {
                data.push(f(grid.u()[i], grid.v()[j]));
            }
        }
        Self { grid, data }
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 3] {
        self.data[self.grid.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let data = self.data.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    /// `self + s * other`, in place.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            for k in 0..3 {
                a[k] += s * b[k];
            }
        }
    }

    pub fn translated(&self, t: [f64; 3]) -> Self {
        let data = self
            .data
            .iter()
            .map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]])
            .collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])])
            .collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }
}

/// Linear combination `sum_k coeffs[k] * fields[k]`.
pub fn linear_combination(fields: &[&Field3], coeffs: &[f64]) -> Field3 {
    assert!(!fields.is_empty() && fields.len() == coeffs.len());
    let mut out = Field3::zeros(fields[0].grid().clone());
    for (f, &c) in fields.iter().zip(coeffs) {
        out.axpy(c, f);
    }
    out
}

/// L2 inner product of two fields over the parameter domain,
/// `sum_ij <a_ij, b_ij> du dv`. Field magnitudes (SRNFs, velocity fields)
/// already carry the local area density, so the flat cell weight is the
/// one that makes `|q|^2` integrate surface area.
pub fn l2_inner(a: &Field3, b: &Field3) -> Result<f64> {
    SphericalGrid::same_grid(a.grid(), b.grid())?;
    let w = a.grid().cell_area();
    let mut acc = 0.0;
    for (p, q) in a.data.iter().zip(b.data.iter()) {
        acc += p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    }
    Ok(acc * w)
}

pub fn l2_norm(a: &Field3) -> f64 {
    l2_inner(a, a).expect("same grid").sqrt()
}

pub fn l2_distance(a: &Field3, b: &Field3) -> Result<f64> {
    SphericalGrid::same_grid(a.grid(), b.grid())?;
    let w = a.grid().cell_area();
    let mut acc = 0.0;
    for (p, q) in a.data.iter().zip(b.data.iter()) {
        let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        acc += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    }
    Ok((acc * w).sqrt())
}

/// Root-mean-square pointwise Euclidean distance, no quadrature weight.
pub fn rms_distance(a: &Field3, b: &Field3) -> f64 {
    let mut acc = 0.0;
    for (p, q) in a.data.iter().zip(b.data.iter()) {
        let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        acc += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    }
    (acc / a.data.len() as f64).sqrt()
}

pub fn max_pointwise_distance(a: &Field3, b: &Field3) -> f64 {
    a.data
        .iter()
        .zip(b.data.iter())
        .map(|(p, q)| {
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .fold(0.0, f64::max)
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
