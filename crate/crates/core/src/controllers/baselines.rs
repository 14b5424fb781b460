//! Reference laws used for comparison.

use nalgebra::{DMatrix, DVector};

use super::cftsmc::{lambda1_solve, sat, sat_vec};
use super::{Command, ControlInput, FLAG_DECOUPLING_FALLBACK, FLAG_ILL_CONDITIONED};
use crate::liegroup::{adjoint, Pose};
use crate::linalg::damped_pinv;

/// `q̇ = K_p J_t† Ad(ᵗg_c) L† e_s` with `K_p = kp·I`.
pub fn classical_ibvs_command(
    e_s: &DVector<f64>,
    l: &DMatrix<f64>,
    tip_jacobian: &DMatrix<f64>,
    camera_mount: &Pose,
    kp: f64,
) -> Command {
    let lp = damped_pinv(l);
    let jp = damped_pinv(tip_jacobian);
    let ad = DMatrix::from_column_slice(6, 6, adjoint(camera_mount).as_slice());
    let mut flags = 0;
    if lp.ill_conditioned || jp.ill_conditioned {
        flags |= FLAG_ILL_CONDITIONED;
    }
    Command {
        qdot: (&jp.matrix * ad * &lp.matrix * e_s) * kp,
        flags,
        delta_s: DVector::zeros(e_s.len()),
        delta_f: 0.0,
    }
}

/// Gains of the PD (vision) / PI (force) baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp_s: f64,
    pub kd_s: f64,
    pub kp_f: f64,
    pub ki_f: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp_s: 2.0,
            kd_s: 0.01,
            kp_f: 100.0,
            ki_f: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PidState {
    pub prev_e_s: Option<DVector<f64>>,
    pub integral_f: f64,
}

/// Integral sliding surfaces `σ = e + c∫e` with a saturated reaching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CismcGains {
    pub c_s: f64,
    pub k_s: f64,
    pub delta_s: f64,
    pub c_f: f64,
    pub k_f: f64,
    pub delta_f: f64,
}

impl Default for CismcGains {
    fn default() -> Self {
        Self {
            c_s: 1.0,
            k_s: 0.05,
            delta_s: 0.05,
            c_f: 20.0,
            k_f: 20.0,
            delta_f: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CismcState {
    pub integral_s: Option<DVector<f64>>,
    pub integral_f: f64,
}

/// Combines a feature-space vision demand and a force-rate demand through
/// `J† L†`, injecting the force demand along `L λ₁ / k̂`.
fn combine(input: &ControlInput<'_>, vision: DVector<f64>, force_rate: f64, k_hat: f64) -> Command {
    let lp = damped_pinv(input.l);
    let jp = damped_pinv(input.camera_jacobian);
    let mut flags = 0;
    if lp.ill_conditioned || jp.ill_conditioned {
        flags |= FLAG_ILL_CONDITIONED;
    }
    let mut x = vision;
    if input.in_contact {
        match lambda1_solve(input.l, &lp.matrix) {
            Ok(l1) => x += input.l * l1 * (force_rate / k_hat),
            Err(_) => flags |= FLAG_DECOUPLING_FALLBACK,
        }
    }
    Command {
        qdot: &jp.matrix * (&lp.matrix * x),
        flags,
        delta_s: DVector::zeros(input.e_s.len()),
        delta_f: 0.0,
    }
}

/// PD on the feature error and PI on the force error, feedback only.
pub fn baseline_pid_command(
    state: &mut PidState,
    gains: &PidGains,
    input: &ControlInput<'_>,
    k_hat: f64,
    dt: f64,
) -> Command {
    let e = input.e_s;
    let de = match &state.prev_e_s {
        Some(prev) => (e - prev) / dt,
        None => DVector::zeros(e.len()),
    };
    state.prev_e_s = Some(e.clone());
    let vision = e * gains.kp_s + de * gains.kd_s;
    let mut force = 0.0;
    if input.in_contact {
        state.integral_f += input.e_f * dt;
        force = gains.kp_f * input.e_f + gains.ki_f * state.integral_f;
    }
    combine(input, vision, force, k_hat)
}

/// Cascaded integral sliding-mode baseline with equivalent-control feedforward.
pub fn baseline_cismc_command(
    state: &mut CismcState,
    gains: &CismcGains,
    input: &ControlInput<'_>,
    k_hat: f64,
    dt: f64,
) -> Command {
    let e = input.e_s;
    let integral = state
        .integral_s
        .get_or_insert_with(|| DVector::zeros(e.len()));
    *integral += e * dt;
    let sigma_s = e + &*integral * gains.c_s;
    let vision = input.sdot_d + e * gains.c_s + sat_vec(&sigma_s, gains.delta_s) * gains.k_s;
    let mut force = 0.0;
    if input.in_contact {
        state.integral_f += input.e_f * dt;
        let sigma_f = input.e_f + gains.c_f * state.integral_f;
        force = input.fdot_d + gains.c_f * input.e_f + gains.k_f * sat(sigma_f, gains.delta_f);
    }
    combine(input, vision, force, k_hat)
}
