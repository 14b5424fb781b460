//! SE(3) / SO(3) operators in closed form.
//!
//! Twists and wrenches are ordered angular-first: a twist is `[ω; v]` and a
//! wrench is `[τ; f]`, so that `wrench · twist` is power. All 6×6 block
//! formulas below follow that ordering.

use core::f64::consts::PI;
use core::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

/// Below this rotation angle the exponential switches to Taylor series.
const SMALL_ANGLE: f64 = 1e-4;

/// A rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

/// Body or spatial velocity (or a finite screw), angular part first.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

/// Torque/force pair, dual to [`Twist`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub torque: Vector3<f64>,
    pub force: Vector3<f64>,
}

impl Twist {
    pub fn new(angular: Vector3<f64>, linear: Vector3<f64>) -> Self {
        Self { angular, linear }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            angular: v.fixed_rows::<3>(0).into_owned(),
            linear: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.angular);
        v.fixed_rows_mut::<3>(3).copy_from(&self.linear);
        v
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.angular * s, self.linear * s)
    }

    pub fn is_finite(&self) -> bool {
        self.angular
            .iter()
            .chain(self.linear.iter())
            .all(|x| x.is_finite())
    }
}

impl Wrench {
    pub fn new(torque: Vector3<f64>, force: Vector3<f64>) -> Self {
        Self { torque, force }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            torque: v.fixed_rows::<3>(0).into_owned(),
            force: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.torque);
        v.fixed_rows_mut::<3>(3).copy_from(&self.force);
        v
    }

    /// Instantaneous power delivered along `twist`.
    pub fn power(&self, twist: &Twist) -> f64 {
        self.torque.dot(&twist.angular) + self.force.dot(&twist.linear)
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new(Matrix3::identity(), translation)
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Self {
        Self::new(rotation, Vector3::zeros())
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    pub fn compose(&self, other: &Pose) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Largest deviation of `RᵀR` from identity and of `det R` from one.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        let det = (self.rotation.determinant() - 1.0).abs();
        gram.amax().max(det)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.orthonormality_error() < tol && self.translation.iter().all(|x| x.is_finite())
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Pose> for &'a Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Skew matrix with `hat3(v) * w == v × w`.
pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// 4×4 matrix form of a twist.
pub fn hat6(x: &Twist) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&x.angular));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&x.linear);
    m
}

/// Inverse of [`hat6`]; the bottom row is ignored.
pub fn vee6(m: &Matrix4<f64>) -> Twist {
    let rot = m.fixed_view::<3, 3>(0, 0).into_owned();
    Twist::new(vee3(&rot), m.fixed_view::<3, 1>(0, 3).into_owned())
}

/// `exp(scale · hat6(x))` by the Rodrigues formula.
pub fn exp_se3(x: &Twist, scale: f64) -> Pose {
    let w = x.angular * scale;
    let v = x.linear * scale;
    let theta = w.norm();
    let (a, b, c) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    } else {
        let (s, co) = (libm::sin(theta), libm::cos(theta));
        let t2 = theta * theta;
        (s / theta, (1.0 - co) / t2, (theta - s) / (t2 * theta))
    };
    let wh = hat3(&w);
    let wh2 = wh * wh;
    let rotation = Matrix3::identity() + wh * a + wh2 * b;
    let left_jac = Matrix3::identity() + wh * b + wh2 * c;
    Pose::new(rotation, left_jac * v)
}

/// Adjoint `Ad_g = [[R, 0], [û R, R]]`.
pub fn adjoint(g: &Pose) -> Matrix6<f64> {
    let r = &g.rotation;
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    m.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(hat3(&g.translation) * r));
    m
}

/// Small adjoint `ad_x = [[ω̂, 0], [v̂, ω̂]]`, so `ad_x y = [x, y]`.
pub fn ad_small(x: &Twist) -> Matrix6<f64> {
    let wh = hat3(&x.angular);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&hat3(&x.linear));
    m
}

/// Co-adjoint `Ad*_g = Ad_{g⁻¹}ᵀ`, mapping wrenches so that power is preserved.
pub fn coadjoint(g: &Pose) -> Matrix6<f64> {
    adjoint(&g.inverse()).transpose()
}

pub fn pose_inverse(g: &Pose) -> Pose {
    g.inverse()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = libm::fmod(a, two_pi);
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// Rotation about the inertial z-axis.
pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hat3_basis() {
        let m = hat3(&Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(
            m,
            Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0)
        );
        assert_eq!(hat3(&Vector3::zeros()), Matrix3::zeros());
    }

    #[test]
    fn hat6_basis() {
        let m = hat6(&Twist::new(Vector3::z(), Vector3::zeros()));
        assert_eq!(m.fixed_view::<3, 3>(0, 0).into_owned(), hat3(&Vector3::z()));
        assert_eq!(m.row(3).iter().copied().sum::<f64>(), 0.0);
        assert_eq!(hat6(&Twist::zero()), Matrix4::zeros());
    }

    #[test]
    fn exp_quarter_turn() {
        let g = exp_se3(
            &Twist::new(Vector3::new(0.0, 0.0, PI / 2.0), Vector3::zeros()),
            1.0,
        );
        assert_relative_eq!(g.rotation, rot_z(PI / 2.0), epsilon = 1e-15);
        assert_eq!(g.translation, Vector3::zeros());
        let id = exp_se3(&Twist::zero(), 3.0);
        assert_eq!(id, Pose::identity());
    }

    #[test]
    fn adjoint_pure_translation() {
        let g = Pose::from_translation(Vector3::new(0.0, 0.0, 1.0));
        let x = Twist::new(Vector3::x(), Vector3::zeros());
        let y = Twist::from_vector(&(adjoint(&g) * x.to_vector()));
        assert_relative_eq!(y.angular, Vector3::x());
        // u × ω = z × x = y
        assert_relative_eq!(y.linear, Vector3::y());
        assert_eq!(adjoint(&Pose::identity()), Matrix6::identity());
        assert_eq!(coadjoint(&Pose::identity()), Matrix6::identity());
    }

    #[test]
    fn coadjoint_pure_rotation_rotates_both_parts() {
        let g = Pose::from_rotation(rot_x(0.7));
        let w = Wrench::new(Vector3::new(0.1, 0.2, 0.3), Vector3::new(1.0, -2.0, 0.5));
        let out = Wrench::from_vector(&(coadjoint(&g) * w.to_vector()));
        assert_relative_eq!(out.force, g.rotation * w.force, epsilon = 1e-14);
        assert_relative_eq!(out.torque, g.rotation * w.torque, epsilon = 1e-14);
    }

    #[test]
    fn inverse_of_translation() {
        let g = Pose::from_translation(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(g.inverse().translation, Vector3::new(-1.0, -2.0, -3.0));
        assert_eq!(Pose::identity().inverse(), Pose::identity());
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_relative_eq!(wrap_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-15);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(3.1 - (-3.1)), 6.2 - 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn ad_of_self_vanishes() {
        let x = Twist::new(Vector3::new(0.3, -1.0, 2.0), Vector3::new(1.0, 0.5, -0.2));
        assert_relative_eq!(
            ad_small(&x) * x.to_vector(),
            Vector6::zeros(),
            epsilon = 1e-15
        );
        assert_eq!(ad_small(&Twist::zero()), Matrix6::zeros());
    }
}
