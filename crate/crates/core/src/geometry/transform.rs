use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Rigid transform `p -> R p + t` between two frames.
///
/// `rotation` is kept orthonormal by construction; all constructors go
/// through [`Rotation3`] or an explicit re-orthonormalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for HomogeneousTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl HomogeneousTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vec3) -> Self {
        Self {
            rotation: *rotation.matrix(),
            translation,
        }
    }

    /// Rotation by `angle` radians about the y axis followed by `translation`.
    pub fn about_y(angle: f64, translation: Vec3) -> Self {
        Self::new(Rotation3::from_axis_angle(&Vector3::y_axis(), angle), translation)
    }

    /// The drone-to-camera transform of an overhead camera: a half turn about y.
    pub fn half_turn_y(translation: Vec3) -> Self {
        // exact entries, no trig round-off
        let rotation = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Max deviation of `RᵀR` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity())
            .abs()
            .max()
    }
}

pub fn apply_transform(t: &HomogeneousTransform, p: &Vec3) -> Vec3 {
    t.apply(p)
}
