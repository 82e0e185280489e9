//! Surfaces as maps from the spherical grid to R^3: coordinate normal
//! fields, surface area, and preshape normalization (zero centroid, unit
//! area).

use std::sync::Arc;

use crate::error::{F4dError, Result};
use crate::field::{cross, Field3};
use crate::grid::{d_du, d_dv, SphericalGrid, EPS_DEG};
use crate::rotation::Rotation3;

#[derive(Debug, Clone, PartialEq)]
pub struct Surface(pub(crate) Field3);

impl Surface {
    pub fn new(field: Field3) -> Self {
        Self(field)
    }

    pub fn from_fn(grid: Arc<SphericalGrid>, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        Self(Field3::from_fn(grid, f))
    }

    pub fn field(&self) -> &Field3 {
        &self.0
    }

    pub fn into_field(self) -> Field3 {
        self.0
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        self.0.grid()
    }

    pub fn rotated(&self, r: &Rotation3) -> Self {
        Self(r.apply_field(&self.0))
    }

    pub fn translated(&self, t: [f64; 3]) -> Self {
        Self(self.0.translated(t))
    }
}

/// Component-wise partial derivatives of a vector field.
pub(crate) fn partials(f: &Field3) -> (Field3, Field3) {
    let grid = f.grid().clone();
    let n = grid.len();
    let mut comp = vec![0.0; n];
    let mut der = vec![0.0; n];
    let mut fu = Field3::zeros(grid.clone());
    let mut fv = Field3::zeros(grid.clone());
    for k in 0..3 {
        for (c, p) in comp.iter_mut().zip(f.data()) {
            *c = p[k];
        }
        d_du(&grid, &comp, &mut der);
        for (o, d) in fu.data_mut().iter_mut().zip(der.iter()) {
            o[k] = *d;
        }
        d_dv(&grid, &comp, &mut der);
        for (o, d) in fv.data_mut().iter_mut().zip(der.iter()) {
            o[k] = *d;
        }
    }
    (fu, fv)
}

/// Coordinate normal field `n = df/du x df/dv`. Degenerate points simply
/// produce `n = 0`; downstream maps handle them.
pub fn normal_field(f: &Surface) -> Field3 {
    let (fu, fv) = partials(&f.0);
    let mut n = Field3::zeros(f.grid().clone());
    for ((o, a), b) in n.data_mut().iter_mut().zip(fu.data()).zip(fv.data()) {
        *o = cross(*a, *b);
    }
    n
}

/// Total surface area, `integral of |n| du dv`.
pub fn surface_area(f: &Surface) -> f64 {
    area_of_normal(&normal_field(f))
}

pub fn area_of_normal(n: &Field3) -> f64 {
    let w = n.grid().cell_area();
    n.data()
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .sum::<f64>()
        * w
}

/// Area-weighted centroid of the surface.
pub fn centroid(f: &Surface) -> [f64; 3] {
    let n = normal_field(f);
    let w = f.grid().cell_area();
    let mut acc = [0.0; 3];
    let mut mass = 0.0;
    for (p, nn) in f.0.data().iter().zip(n.data()) {
        let a = (nn[0] * nn[0] + nn[1] * nn[1] + nn[2] * nn[2]).sqrt() * w;
        mass += a;
        for k in 0..3 {
            acc[k] += a * p[k];
        }
    }
    if mass > 0.0 {
        for c in &mut acc {
            *c /= mass;
        }
    }
    acc
}

/// Translate to zero area-weighted centroid and scale to unit area.
pub fn preshape_normalize(f: &Surface) -> Result<Surface> {
    let area = surface_area(f);
    if area <= EPS_DEG * 4.0 * std::f64::consts::PI {
        return Err(F4dError::DegenerateSurface { area });
    }
    let c = centroid(f);
    let s = 1.0 / area.sqrt();
    let data = f
        .0
        .data()
        .iter()
        .map(|p| [(p[0] - c[0]) * s, (p[1] - c[1]) * s, (p[2] - c[2]) * s])
        .collect();
    Ok(Surface(Field3::from_data(f.grid().clone(), data)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{norm3, rms_distance};
    use std::f64::consts::PI;

    fn unit_sphere(grid: Arc<SphericalGrid>) -> Surface {
        Surface::from_fn(grid, |u, v| {
            [u.sin() * v.cos(), u.sin() * v.sin(), u.cos()]
        })
    }

    #[test]
    fn sphere_normal_norm_is_sin_u() {
        let g = SphericalGrid::new(64, 64).unwrap();
        let f = unit_sphere(g.clone());
        let n = normal_field(&f);
        let mut max_err = 0.0f64;
        for i in 0..g.nu() {
            for j in 0..g.nv() {
                max_err = max_err.max((norm3(n.at(i, j)) - g.u()[i].sin()).abs());
            }
        }
        assert!(max_err < 1e-2, "max |n| error {max_err}");
    }

    #[test]
    fn constant_surface_has_zero_normal() {
        let g = SphericalGrid::new(8, 8).unwrap();
        let f = Surface::from_fn(g, |_, _| [1.0, 2.0, 3.0]);
        let n = normal_field(&f);
        assert!(n.data().iter().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn ellipsoid_area_matches_prolate_spheroid_formula() {
        // closed-form oracle for the prolate spheroid a = b = 1, c = 2
        let (a, c) = (1.0f64, 2.0f64);
        let e = (1.0 - a * a / (c * c)).sqrt();
        let analytic = 2.0 * PI * a * a * (1.0 + (c / (a * e)) * e.asin());

        let g = SphericalGrid::new(128, 128).unwrap();
        let f = Surface::from_fn(g, |u, v| {
            [u.sin() * v.cos(), u.sin() * v.sin(), 2.0 * u.cos()]
        });
        let area = surface_area(&f);
        assert!(
            (area - analytic).abs() <= 1e-2 * analytic,
            "area {area} vs {analytic}"
        );
    }

    #[test]
    fn preshape_normalizes_offset_sphere() {
        let g = SphericalGrid::new(64, 64).unwrap();
        let f = Surface::from_fn(g.clone(), |u, v| {
            [
                3.0 * u.sin() * v.cos() + 1.0,
                3.0 * u.sin() * v.sin() + 2.0,
                3.0 * u.cos() + 3.0,
            ]
        });
        let p = preshape_normalize(&f).unwrap();
        let c = centroid(&p);
        assert!(norm3(c) < 1e-9, "centroid {c:?}");
        assert!((surface_area(&p) - 1.0).abs() < 1e-6);

        // the result is a sphere with radius 1/sqrt(4 pi), up to quadrature
        let r = 1.0 / (4.0 * PI).sqrt();
        let expect = Surface::from_fn(g, |u, v| {
            [r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos()]
        });
        assert!(rms_distance(p.field(), expect.field()) < 1e-3 * r);
    }

    #[test]
    fn preshape_is_idempotent() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let f = Surface::from_fn(g, |u, v| {
            let rho = 1.0 + 0.2 * (3.0 * v).cos() * u.sin();
            [rho * u.sin() * v.cos(), rho * u.sin() * v.sin(), rho * u.cos()]
        });
        let p1 = preshape_normalize(&f).unwrap();
        let p2 = preshape_normalize(&p1).unwrap();
        assert!(rms_distance(p1.field(), p2.field()) < 1e-12);
    }

    #[test]
    fn zero_surface_is_degenerate() {
        let g = SphericalGrid::new(8, 8).unwrap();
        let f = Surface::from_fn(g, |_, _| [0.0, 0.0, 0.0]);
        assert!(matches!(
            preshape_normalize(&f),
            Err(F4dError::DegenerateSurface { .. })
        ));
    }
}
