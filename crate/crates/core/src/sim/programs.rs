use core::f64::consts::PI;

use nalgebra::Vector3;

use crate::liegroup::{Pose, Twist};
use crate::{Error, Result};

/// Reference camera motion. Desired features are the projection of the scene
/// from the reference camera, shifted along its optical axis by the desired
/// indentation `f_d / k̂` so that vision and force agree at the setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureProgram {
    /// Stay at the contact pose.
    Hold { contact_camera: Pose },
    /// Piecewise-constant offsets in the camera x/y plane visiting the corners
    /// `(+a, +a), (−a, +a), (−a, −a), (+a, −a)` for `dwell` seconds each and
    /// holding the last corner for the rest of the run.
    Square {
        contact_camera: Pose,
        half_width: f64,
        dwell: f64,
    },
    /// Figure-eight `x = A sin ωt`, `y = (A/2) sin 2ωt` in the camera x/y plane.
    Lemniscate {
        contact_camera: Pose,
        amplitude: f64,
        period: f64,
    },
}

const SQUARE: [[f64; 2]; 4] = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];

impl FeatureProgram {
    pub fn contact_camera(&self) -> &Pose {
        match self {
            Self::Hold { contact_camera }
            | Self::Square { contact_camera, .. }
            | Self::Lemniscate { contact_camera, .. } => contact_camera,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Hold { .. } => true,
            Self::Square {
                half_width, dwell, ..
            } => half_width.is_finite() && dwell > 0.0,
            Self::Lemniscate {
                amplitude, period, ..
            } => amplitude.is_finite() && period > 0.0,
        };
        if ok && self.contact_camera().is_valid(1e-9) {
            Ok(())
        } else {
            Err(Error::Config("invalid feature program"))
        }
    }

    /// In-plane offset and its rate at time `t`.
    pub fn offset(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        match *self {
            Self::Hold { .. } => ([0.0; 2], [0.0; 2]),
            Self::Square {
                half_width, dwell, ..
            } => {
                let k = libm::floor(t / dwell) as usize;
                let c = SQUARE[k.min(SQUARE.len() - 1)];
                ([c[0] * half_width, c[1] * half_width], [0.0; 2])
            }
            Self::Lemniscate {
                amplitude, period, ..
            } => {
                let w = 2.0 * PI / period;
                let (s1, c1) = libm::sincos(w * t);
                let (s2, c2) = libm::sincos(2.0 * w * t);
                (
                    [amplitude * s1, 0.5 * amplitude * s2],
                    [amplitude * w * c1, amplitude * w * c2],
                )
            }
        }
    }

    /// Reference camera pose and body twist for indentation `depth` and its rate.
    pub fn desired_camera(&self, t: f64, depth: f64, depth_rate: f64) -> (Pose, Twist) {
        let (o, od) = self.offset(t);
        let pose = self
            .contact_camera()
            .compose(&Pose::from_translation(Vector3::new(o[0], o[1], depth)));
        (
            pose,
            Twist::new(Vector3::zeros(), Vector3::new(od[0], od[1], depth_rate)),
        )
    }
}

/// Desired normal force `f_d(t)` [N].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForceProgram {
    Constant(f64),
    /// `before` for `t ≤ switch_time`, `after` afterwards.
    Step {
        before: f64,
        after: f64,
        switch_time: f64,
    },
    /// `mean + amplitude · sin(omega · t)`.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        omega: f64,
    },
}

impl ForceProgram {
    /// `(f_d, ḟ_d)` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Self::Constant(f) => (f, 0.0),
            Self::Step {
                before,
                after,
                switch_time,
            } => (if t <= switch_time { before } else { after }, 0.0),
            Self::Sinusoid {
                mean,
                amplitude,
                omega,
            } => {
                let (s, c) = libm::sincos(omega * t);
                (mean + amplitude * s, amplitude * omega * c)
            }
        }
    }

    /// Times at which the setpoint jumps.
    pub fn switch_times(&self) -> alloc::vec::Vec<f64> {
        match *self {
            Self::Step { switch_time, .. } => alloc::vec![switch_time],
            _ => alloc::vec::Vec::new(),
        }
    }
}
