//! The square-root normal field map: `q = n / |n|^(1/2)`.
//!
//! `|q|^2` equals the pointwise area density `|n|`, so the L2 norm of a
//! surface's field integrates its total area. The map is translation
//! invariant and rotation equivariant.

use std::sync::Arc;

use crate::field::{norm3, Field3};
use crate::grid::{SphericalGrid, EPS_DEG};
use crate::rotation::Rotation3;
use crate::surface::{normal_field, Surface};

#[derive(Debug, Clone, PartialEq)]
pub struct Srnf(pub(crate) Field3);

impl Srnf {
    pub fn new(field: Field3) -> Self {
        Self(field)
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
}

pub fn srnf_map(f: &Surface) -> Srnf {
    let n = normal_field(f);
    Srnf(scale_normal(n))
}

/// Rescales a normal field into its square-root form; points with
/// `|n| < EPS_DEG` collapse to zero.
pub(crate) fn scale_normal(mut n: Field3) -> Field3 {
    for p in n.data_mut() {
        let m = norm3(*p);
        if m < EPS_DEG {
            *p = [0.0; 3];
        } else {
            let s = 1.0 / m.sqrt();
            for x in p.iter_mut() {
                *x *= s;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{dot3, l2_inner, max_pointwise_distance, rms_distance};
    use crate::surface::preshape_normalize;

    fn unit_sphere(grid: Arc<SphericalGrid>) -> Surface {
        Surface::from_fn(grid, |u, v| {
            [u.sin() * v.cos(), u.sin() * v.sin(), u.cos()]
        })
    }

    fn bumpy(grid: Arc<SphericalGrid>) -> Surface {
        Surface::from_fn(grid, |u, v| {
            let rho = 1.0 + 0.15 * (2.0 * v).cos() * (2.0 * u).sin();
            [rho * u.sin() * v.cos(), rho * u.sin() * v.sin(), rho * u.cos()]
        })
    }

    #[test]
    fn sphere_srnf_is_sqrt_sin_u_radial() {
        let g = SphericalGrid::new(64, 64).unwrap();
        let q = srnf_map(&unit_sphere(g.clone()));
        let expect = Field3::from_fn(g, |u, v| {
            let s = u.sin().sqrt();
            [s * u.sin() * v.cos(), s * u.sin() * v.sin(), s * u.cos()]
        });
        assert!(max_pointwise_distance(q.field(), &expect) < 1e-2);
    }

    #[test]
    fn rotation_equivariance() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let f = bumpy(g);
        let r = Rotation3::from_axis_angle([0.3, -1.0, 0.7], 1.234);
        let a = srnf_map(&f.rotated(&r));
        let b = srnf_map(&f).rotated(&r);
        assert!(rms_distance(a.field(), b.field()) < 1e-10);
    }

    #[test]
    fn translation_invariance() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let f = bumpy(g);
        let a = srnf_map(&f.translated([10.0, -4.0, 2.5]));
        let b = srnf_map(&f);
        assert!(rms_distance(a.field(), b.field()) < 1e-10);
    }

    #[test]
    fn pointwise_norm_law() {
        let g = SphericalGrid::new(32, 32).unwrap();
        let f = bumpy(g.clone());
        let q = srnf_map(&f);
        let n = normal_field(&f); // recomputed independently
        for (qq, nn) in q.field().data().iter().zip(n.data()) {
            assert!((dot3(*qq, *qq) - norm3(*nn)).abs() < 1e-10);
        }
    }

    #[test]
    fn preshape_sphere_srnf_has_unit_norm() {
        let g = SphericalGrid::new(64, 64).unwrap();
        let f = preshape_normalize(&unit_sphere(g)).unwrap();
        let q = srnf_map(&f);
        let nsq = l2_inner(q.field(), q.field()).unwrap();
        assert!((nsq - 1.0).abs() < 1e-3, "|q|^2 = {nsq}");
    }
}
