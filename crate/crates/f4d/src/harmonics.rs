//! Real spherical harmonics on the grid, their sphere gradients, and the
//! orthonormal bases built from them: tangent fields for diffeomorphism
//! descent and scalar fields for surface deformation.

use std::sync::Arc;

use crate::grid::SphericalGrid;
use crate::par;

/// Associated Legendre values `P_l^m(x)` for one `(l, m)` with `m >= 0`,
/// plus `P_{l-1}^m(x)` (zero when `l - 1 < m`), via the standard three-term
/// recurrence.
fn assoc_legendre_pair(l: usize, m: usize, x: f64) -> (f64, f64) {
    debug_assert!(m <= l);
    // P_m^m
    let mut pmm = 1.0;
    if m > 0 {
        let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
    }
    if l == m {
        return (pmm, 0.0);
    }
    let mut pm1 = pmm; // P_{m}^m
    let mut p = x * (2.0 * m as f64 + 1.0) * pmm; // P_{m+1}^m
    for ll in (m + 2)..=l {
        let next = ((2.0 * ll as f64 - 1.0) * x * p - (ll as f64 + m as f64 - 1.0) * pm1)
            / (ll as f64 - m as f64);
        pm1 = p;
        p = next;
    }
    (p, pm1)
}

fn normalization(l: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio *= k as f64;
    }
    ((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) / ratio).sqrt()
}

/// Real spherical harmonic and its polar derivative at `(u, v)`.
/// Returns `(Y, dY/du, dY/dv)` for the convention
/// `Y_{l,m>0} = sqrt(2) N P_l^m(cos u) cos(m v)`,
/// `Y_{l,0} = N P_l^0(cos u)`,
/// `Y_{l,m<0} = sqrt(2) N P_l^|m|(cos u) sin(|m| v)`.
pub fn real_harmonic(l: usize, m: i64, u: f64, v: f64) -> (f64, f64, f64) {
    let ma = m.unsigned_abs() as usize;
    let x = u.cos();
    let su = u.sin();
    let (p, pprev) = assoc_legendre_pair(l, ma, x);
    // dP_l^m(cos u)/du = (l cos u P_l^m - (l + m) P_{l-1}^m) / sin u
    let dp_du = ((l as f64) * x * p - (l as f64 + ma as f64) * pprev) / su;
    let n = normalization(l, ma);
    let (ang, dang) = if m > 0 {
        let t = ma as f64 * v;
        (std::f64::consts::SQRT_2 * t.cos(), -std::f64::consts::SQRT_2 * ma as f64 * t.sin())
    } else if m < 0 {
        let t = ma as f64 * v;
        (std::f64::consts::SQRT_2 * t.sin(), std::f64::consts::SQRT_2 * ma as f64 * t.cos())
    } else {
        (1.0, 0.0)
    };
    (n * p * ang, n * dp_du * ang, n * p * dang)
}

/// Tangent vector field on the sphere in `(u, v)` chart components.
#[derive(Debug, Clone)]
pub struct TangentField {
    pub comp_u: Vec<f64>,
    pub comp_v: Vec<f64>,
}

/// Gradient fields of spherical harmonics, orthonormalized under the round
/// quadrature inner product on tangent fields.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    grid: Arc<SphericalGrid>,
    elements: Vec<TangentField>,
}

impl TangentBasis {
    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn elements(&self) -> &[TangentField] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Round-metric inner product of tangent fields:
/// `sum (a_u b_u + sin^2 u * a_v b_v) w_ij` with the spherical weights.
pub fn tangent_inner(grid: &SphericalGrid, a: &TangentField, b: &TangentField) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.nu() {
        let s2 = grid.u()[i].sin().powi(2);
        for j in 0..grid.nv() {
            let k = grid.idx(i, j);
            acc += (a.comp_u[k] * b.comp_u[k] + s2 * a.comp_v[k] * b.comp_v[k]) * grid.weights()[k];
        }
    }
    acc
}

/// Raw (un-orthonormalized) gradients of `Y_lm` for `1 <= l <= l_max`.
/// Chart components of the sphere gradient are `(dY/du, dY/dv / sin^2 u)`.
pub fn harmonic_gradients(grid: &Arc<SphericalGrid>, l_max: usize) -> Vec<TangentField> {
    let mut lm = Vec::new();
    for l in 1..=l_max {
        for m in -(l as i64)..=(l as i64) {
            lm.push((l, m));
        }
    }
    par::map_slice(&lm, |&(l, m)| {
        let mut comp_u = Vec::with_capacity(grid.len());
        let mut comp_v = Vec::with_capacity(grid.len());
        for i in 0..grid.nu() {
            let s2 = grid.u()[i].sin().powi(2);
            for j in 0..grid.nv() {
                let (_, dyu, dyv) = real_harmonic(l, m, grid.u()[i], grid.v()[j]);
                comp_u.push(dyu);
                comp_v.push(dyv / s2);
            }
        }
        TangentField { comp_u, comp_v }
    })
}

/// Orthonormal tangent basis from harmonic gradients by modified
/// Gram-Schmidt; near-zero candidates are dropped.
pub fn make_tangent_basis(grid: &Arc<SphericalGrid>, l_max: usize) -> TangentBasis {
    assert!(l_max >= 1, "tangent basis needs l_max >= 1");
    let mut raw = harmonic_gradients(grid, l_max);
    let mut elements: Vec<TangentField> = Vec::with_capacity(raw.len());
    for mut cand in raw.drain(..) {
        for e in &elements {
            let c = tangent_inner(grid, &cand, e);
            for k in 0..grid.len() {
                cand.comp_u[k] -= c * e.comp_u[k];
                cand.comp_v[k] -= c * e.comp_v[k];
            }
        }
        let norm = tangent_inner(grid, &cand, &cand).sqrt();
        if norm < 1e-10 {
            continue;
        }
        for k in 0..grid.len() {
            cand.comp_u[k] /= norm;
            cand.comp_v[k] /= norm;
        }
        elements.push(cand);
    }
    TangentBasis {
        grid: grid.clone(),
        elements,
    }
}

/// Scalar harmonic fields `Y_lm` for `0 <= l <= l_max`, each scaled to unit
/// flat-weighted L2 norm. Used as a per-coordinate deformation basis.
pub fn make_scalar_basis(grid: &Arc<SphericalGrid>, l_max: usize) -> Vec<Vec<f64>> {
    let mut lm = Vec::new();
    for l in 0..=l_max {
        for m in -(l as i64)..=(l as i64) {
            lm.push((l, m));
        }
    }
    let w = grid.cell_area();
    par::map_slice(&lm, |&(l, m)| {
        let mut field = Vec::with_capacity(grid.len());
        for i in 0..grid.nu() {
            for j in 0..grid.nv() {
                field.push(real_harmonic(l, m, grid.u()[i], grid.v()[j]).0);
            }
        }
        let norm = (field.iter().map(|x| x * x).sum::<f64>() * w).sqrt();
        if norm > 0.0 {
            for x in &mut field {
                *x /= norm;
            }
        }
        field
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_count_before_orthonormalization() {
        let g = SphericalGrid::new(16, 16).unwrap();
        assert_eq!(harmonic_gradients(&g, 1).len(), 3);
        assert_eq!(harmonic_gradients(&g, 2).len(), 8);
    }

    #[test]
    fn gram_matrix_is_identity() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let basis = make_tangent_basis(&g, 3);
        assert_eq!(basis.len(), 15);
        for (i, a) in basis.elements().iter().enumerate() {
            for (j, b) in basis.elements().iter().enumerate() {
                let gij = tangent_inner(&g, a, b);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gij - expect).abs() < 1e-6,
                    "gram[{i}][{j}] = {gij}"
                );
            }
        }
    }

    #[test]
    fn polar_derivative_matches_finite_difference() {
        let (u, v) = (1.1, 2.3);
        let h = 1e-6;
        for l in 1..=6usize {
            for m in -(l as i64)..=(l as i64) {
                let (_, dyu, dyv) = real_harmonic(l, m, u, v);
                let fd_u = (real_harmonic(l, m, u + h, v).0 - real_harmonic(l, m, u - h, v).0)
                    / (2.0 * h);
                let fd_v = (real_harmonic(l, m, u, v + h).0 - real_harmonic(l, m, u, v - h).0)
                    / (2.0 * h);
                assert!((dyu - fd_u).abs() < 1e-6, "l={l} m={m} dYdu");
                assert!((dyv - fd_v).abs() < 1e-6, "l={l} m={m} dYdv");
            }
        }
    }

    #[test]
    fn harmonics_orthonormal_under_round_quadrature() {
        let g = SphericalGrid::new(64, 64).unwrap();
        // spot check a few pairs with the spherical weights
        let pairs = [(1, 0), (2, 1), (3, -2), (4, 4)];
        for &(l1, m1) in &pairs {
            for &(l2, m2) in &pairs {
                let mut acc = 0.0;
                for i in 0..g.nu() {
                    for j in 0..g.nv() {
                        let y1 = real_harmonic(l1, m1, g.u()[i], g.v()[j]).0;
                        let y2 = real_harmonic(l2, m2, g.u()[i], g.v()[j]).0;
                        acc += y1 * y2 * g.weights()[g.idx(i, j)];
                    }
                }
                let expect = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-3,
                    "<Y{l1}{m1}, Y{l2}{m2}> = {acc}"
                );
            }
        }
    }
}
