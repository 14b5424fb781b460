//! Pinhole line features and their interaction matrix.
//!
//! Image coordinates are normalized (unit focal length, principal point at the
//! origin). A segment projects to the image line `x·sinθ + y·cosθ = ρ`, with
//! `θ = atan2(Δy, −Δx)` taken from the direction first → second endpoint and
//! `ρ` signed. This keeps `θ` continuous while the line sweeps through the
//! image center.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, Vector3};

use crate::liegroup::{rot_z, wrap_angle, Pose};
use crate::{Error, Result};

/// Endpoints closer than this to the image plane are rejected.
pub const MIN_DEPTH: f64 = 1e-3;

/// A 3D line segment in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub id: u32,
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
}

/// Plane `aX + bY + cZ + d = 0` in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Plane {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Expresses the inertial plane `n·p + d = 0` in the frame of `camera`.
    pub fn in_camera(normal: &Vector3<f64>, offset: f64, camera: &Pose) -> Self {
        let n = camera.rotation.transpose() * normal;
        Self::new(n.x, n.y, n.z, normal.dot(&camera.translation) + offset)
    }
}

/// Target lines plus the (approximately known) plane they lie on.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub lines: Vec<Segment>,
    pub plane: Plane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFeature {
    pub id: u32,
    pub theta: f64,
    pub rho: f64,
}

/// Line parameters ordered by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSet {
    pub entries: Vec<LineFeature>,
}

impl FeatureSet {
    /// Sorts by id; duplicate ids are rejected.
    pub fn new(mut entries: Vec<LineFeature>) -> Result<Self> {
        entries.sort_by_key(|e| e.id);
        if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Correspondence(w[0].id));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `[θ_1, ρ_1, …, θ_n, ρ_n]`.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.len(),
            self.entries.iter().flat_map(|e| [e.theta, e.rho]),
        )
    }

    /// Adds `delta` (same layout as [`to_vector`](Self::to_vector)), wrapping θ.
    pub fn perturbed(&self, delta: &DVector<f64>) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| LineFeature {
                id: e.id,
                theta: wrap_angle(e.theta + delta[2 * i]),
                rho: e.rho + delta[2 * i + 1],
            })
            .collect();
        Self { entries }
    }
}

/// Projects a segment seen from `camera` to `(θ, ρ)`.
pub fn project_line(camera: &Pose, segment: &Segment) -> Result<(f64, f64)> {
    let rt = camera.rotation.transpose();
    let p1 = rt * (segment.start - camera.translation);
    let p2 = rt * (segment.end - camera.translation);
    for p in [&p1, &p2] {
        if !(p.z > MIN_DEPTH) {
            return Err(Error::NotVisible {
                id: segment.id,
                depth: p.z,
            });
        }
    }
    let (x1, y1) = (p1.x / p1.z, p1.y / p1.z);
    let (x2, y2) = (p2.x / p2.z, p2.y / p2.z);
    let (dx, dy) = (x2 - x1, y2 - y1);
    if libm::hypot(dx, dy) < 1e-12 {
        return Err(Error::DegenerateLine { id: segment.id });
    }
    let theta = wrap_angle(libm::atan2(dy, -dx));
    let rho = x1 * libm::sin(theta) + y1 * libm::cos(theta);
    Ok((theta, rho))
}

/// Features of every scene line, sorted by id.
pub fn features_of(camera: &Pose, scene: &Scene) -> Result<FeatureSet> {
    let entries = scene
        .lines
        .iter()
        .map(|seg| {
            project_line(camera, seg).map(|(theta, rho)| LineFeature {
                id: seg.id,
                theta,
                rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureSet::new(entries)
}

/// 2×6 interaction matrix of one line, columns ordered `[ω; v]`.
pub fn interaction_row(theta: f64, rho: f64, plane: &Plane) -> Result<SMatrix<f64, 2, 6>> {
    if plane.d == 0.0 {
        return Err(Error::DegeneratePlane);
    }
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let lt = (-plane.a * c + plane.b * s) / plane.d;
    let lr = (plane.a * rho * s + plane.b * rho * c + plane.c) / plane.d;
    let r2 = 1.0 + rho * rho;
    #[rustfmt::skip]
    let m = SMatrix::<f64, 2, 6>::new(
        rho * s, rho * c, 1.0, lt * s, lt * c, -rho * lt,
        c * r2, -s * r2, 0.0, lr * s, lr * c, -lr * rho,
    );
    Ok(m)
}

/// Stacks [`interaction_row`] for every feature.
pub fn stack_interaction(features: &FeatureSet, plane: &Plane) -> Result<DMatrix<f64>> {
    if features.is_empty() {
        return Err(Error::EmptyFeatures);
    }
    let mut l = DMatrix::zeros(2 * features.len(), 6);
    for (i, f) in features.entries.iter().enumerate() {
        let row = interaction_row(f.theta, f.rho, plane)?;
        l.view_mut((2 * i, 0), (2, 6)).copy_from(&row);
    }
    Ok(l)
}

/// `e_s = s_d − s` with wrapped θ differences.
pub fn feature_error(desired: &FeatureSet, current: &FeatureSet) -> Result<DVector<f64>> {
    if desired.len() != current.len() {
        return Err(Error::Correspondence(u32::MAX));
    }
    let mut e = DVector::zeros(2 * desired.len());
    for (i, (d, c)) in desired.entries.iter().zip(&current.entries).enumerate() {
        if d.id != c.id {
            return Err(Error::Correspondence(d.id.min(c.id)));
        }
        e[2 * i] = wrap_angle(d.theta - c.theta);
        e[2 * i + 1] = d.rho - c.rho;
    }
    Ok(e)
}

/// Keeps the origin and the ZYX yaw of `camera`, dropping roll and pitch.
pub fn virtualize(camera: &Pose) -> Result<Pose> {
    let r = &camera.rotation;
    let cos_pitch = libm::hypot(r[(0, 0)], r[(1, 0)]);
    if cos_pitch < 1e-6 {
        return Err(Error::DegenerateAttitude);
    }
    let yaw = libm::atan2(r[(1, 0)], r[(0, 0)]);
    Ok(Pose::new(rot_z(yaw), camera.translation))
}

/// Camera frame with the platform's roll and pitch removed.
///
/// The real camera is `g_u · m` for a platform pose `g_u` and a fixed mount
/// rotation `m`; the virtual camera keeps the real origin and uses
/// `virtualize(g_u) · m`, so only the platform tilt is compensated.
pub fn virtual_camera(platform: &Pose, camera: &Pose) -> Result<Pose> {
    let level = virtualize(platform)?;
    let mount: Matrix3<f64> = platform.rotation.transpose() * camera.rotation;
    Ok(Pose::new(level.rotation * mount, camera.translation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{rot_x, rot_y};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn seg(id: u32, a: [f64; 3], b: [f64; 3]) -> Segment {
        Segment {
            id,
            start: Vector3::from(a),
            end: Vector3::from(b),
        }
    }

    #[test]
    fn horizontal_line_through_center() {
        let (theta, rho) = project_line(
            &Pose::identity(),
            &seg(0, [-1.0, 0.0, 2.0], [1.0, 0.0, 2.0]),
        )
        .unwrap();
        assert_relative_eq!(rho, 0.0, epsilon = 1e-15);
        assert_relative_eq!(libm::sin(theta), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn offset_line_in_reference_plane() {
        // y = 0.1 at depth 1/3 projects to y = 0.3.
        let z = 1.0 / 3.0;
        let (theta, rho) =
            project_line(&Pose::identity(), &seg(0, [-0.1, 0.1, z], [0.1, 0.1, z])).unwrap();
        assert_relative_eq!(theta, PI);
        assert_relative_eq!(rho, -0.3, epsilon = 1e-14);
    }

    #[test]
    fn behind_camera_is_rejected() {
        let r = project_line(
            &Pose::identity(),
            &seg(4, [0.0, 0.0, -1.0], [1.0, 0.0, 1.0]),
        );
        assert!(matches!(r, Err(Error::NotVisible { id: 4, .. })));
        let r = project_line(&Pose::identity(), &seg(5, [0.0, 0.0, 1.0], [0.0, 0.0, 2.0]));
        assert!(matches!(r, Err(Error::DegenerateLine { id: 5 })));
    }

    #[test]
    fn reference_interaction_row() {
        let l = interaction_row(0.0, 0.0, &Plane::new(0.0, 0.0, 3.0, -1.0)).unwrap();
        #[rustfmt::skip]
        let expected = SMatrix::<f64, 2, 6>::new(
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0, -3.0, 0.0,
        );
        assert_eq!(l, expected);
        assert!(interaction_row(0.0, 0.0, &Plane::new(0.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn wrapped_error() {
        let d = FeatureSet::new(alloc::vec![LineFeature {
            id: 0,
            theta: 3.1,
            rho: 0.0
        }])
        .unwrap();
        let s = FeatureSet::new(alloc::vec![LineFeature {
            id: 0,
            theta: -3.1,
            rho: 0.0
        }])
        .unwrap();
        let e = feature_error(&d, &s).unwrap();
        assert_relative_eq!(e[0], 6.2 - 2.0 * PI, epsilon = 1e-12);
        let other = FeatureSet::new(alloc::vec![LineFeature {
            id: 1,
            theta: 0.0,
            rho: 0.0
        }])
        .unwrap();
        assert!(matches!(
            feature_error(&d, &other),
            Err(Error::Correspondence(_))
        ));
    }

    #[test]
    fn virtualize_cases() {
        let level = Pose::new(rot_z(0.4), Vector3::new(1.0, 2.0, 3.0));
        assert_relative_eq!(
            virtualize(&level).unwrap().rotation,
            level.rotation,
            epsilon = 1e-15
        );
        let rolled = Pose::new(rot_x(0.3), Vector3::new(1.0, 0.0, 0.0));
        let v = virtualize(&rolled).unwrap();
        assert_relative_eq!(v.rotation, Matrix3::identity(), epsilon = 1e-15);
        assert_eq!(v.translation, rolled.translation);
        let g = Pose::from_rotation(rot_z(PI / 4.0) * rot_y(0.2));
        assert_relative_eq!(
            virtualize(&g).unwrap().rotation,
            rot_z(PI / 4.0),
            epsilon = 1e-15
        );
        assert!(virtualize(&Pose::from_rotation(rot_y(PI / 2.0))).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = LineFeature {
            id: 2,
            theta: 0.0,
            rho: 0.0,
        };
        assert!(FeatureSet::new(alloc::vec![f, f]).is_err());
    }
}
