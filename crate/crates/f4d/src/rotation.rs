//! Proper rotations of R^3.

use nalgebra::Matrix3;

use crate::field::Field3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix that is already orthogonal with determinant +1.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Rodrigues rotation about `axis` (normalized internally) by `angle`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
        let k = Matrix3::new(0.0, -z, y, z, 0.0, -x, -y, x, 0.0);
        let m = Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos());
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation3) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.0 * nalgebra::Vector3::new(p[0], p[1], p[2]);
        [v[0], v[1], v[2]]
    }

    pub fn apply_field(&self, f: &Field3) -> Field3 {
        let data = f.data().iter().map(|p| self.apply(*p)).collect();
        Field3::from_data(f.grid().clone(), data)
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Geodesic angle on SO(3) between two rotations.
    pub fn angle_to(&self, other: &Rotation3) -> f64 {
        let rel = self.0.transpose() * other.0;
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    pub fn frobenius_distance(&self, other: &Rotation3) -> f64 {
        (self.0 - other.0).norm()
    }

    /// Max deviation from orthogonality, `|R^T R - I|_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.0.transpose() * self.0 - Matrix3::identity();
        d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_angle_is_proper() {
        let r = Rotation3::from_axis_angle([1.0, 2.0, -0.5], 1.1);
        assert!(r.orthogonality_defect() < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_recovers_rotation_magnitude() {
        let r = Rotation3::from_axis_angle([0.0, 0.0, 1.0], 0.3);
        assert!((Rotation3::identity().angle_to(&r) - 0.3).abs() < 1e-12);
    }
}
