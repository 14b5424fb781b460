use nalgebra::{DMatrix, DVector};

use super::{
    Command, ControlInput, ControllerState, ShaperParams, FLAG_DECOUPLING_FALLBACK,
    FLAG_ILL_CONDITIONED,
};
use crate::linalg::damped_pinv;
use crate::{Error, Result};

/// Below this norm the shaper's scalar factor is treated as zero.
const SHAPER_GUARD: f64 = 1e-12;

fn sig(x: f64, power: f64) -> f64 {
    libm::copysign(libm::pow(x.abs(), power), x)
}

/// Fixed-time shaper
/// `Θ(e) = (C1‖e‖^((M−1)/QJ) + C2‖e‖^((N−1)/QJ))^(QJ) e + sig^J(e)`, with `Θ(0) = 0`.
pub fn shaper(e: &DVector<f64>, p: &ShaperParams) -> DVector<f64> {
    let mut out = e.map(|x| sig(x, p.j));
    let n = e.norm();
    if n > SHAPER_GUARD {
        out += e * shaper_gain(n, p);
    }
    out
}

/// Scalar form of [`shaper`].
pub fn shaper_scalar(e: f64, p: &ShaperParams) -> f64 {
    let n = e.abs();
    let linear = if n > SHAPER_GUARD {
        shaper_gain(n, p) * e
    } else {
        0.0
    };
    linear + sig(e, p.j)
}

fn shaper_gain(norm: f64, p: &ShaperParams) -> f64 {
    let qj = p.q * p.j;
    let inner = p.c1 * libm::pow(norm, (p.m - 1.0) / qj) + p.c2 * libm::pow(norm, (p.n - 1.0) / qj);
    libm::pow(inner, qj)
}

/// Boundary-layer saturation: `e/δ` inside the layer, `sign(e)` outside.
pub fn sat(e: f64, delta: f64) -> f64 {
    if e.abs() >= delta {
        libm::copysign(1.0, e)
    } else {
        e / delta
    }
}

pub fn sat_vec(e: &DVector<f64>, delta: f64) -> DVector<f64> {
    e.map(|x| sat(x, delta))
}

/// Minimum-norm `λ₁` with `Q L† L λ₁ = 1`.
pub fn lambda1_solve(l: &DMatrix<f64>, l_pinv: &DMatrix<f64>) -> Result<DVector<f64>> {
    let v: DVector<f64> = (l_pinv.row(5) * l).transpose();
    let vv = v.norm_squared();
    if !(vv > 1e-20) {
        return Err(Error::DecouplingInfeasible);
    }
    Ok(v / vv)
}

/// Joint-rate command of the cascaded fixed-time law. Does not adapt the networks.
pub fn cftsmc_command(state: &ControllerState, input: &ControlInput<'_>) -> Result<Command> {
    let g = &state.gains;
    let mut flags = 0;
    let lp = damped_pinv(input.l);
    let jp = damped_pinv(input.camera_jacobian);
    if damped_pinv(&(input.l * input.camera_jacobian)).ill_conditioned || lp.ill_conditioned {
        flags |= FLAG_ILL_CONDITIONED;
    }
    let delta_s = state.net_s.eval(input.e_s);
    let delta_f = state.net_f.eval(&state.force_input(input.e_f, input.p_t))[0];

    let mut x = input.sdot_d - &delta_s
        + shaper(input.e_s, &state.shaper)
        + sat_vec(input.e_s, g.delta_s) * g.k_s;
    if input.in_contact {
        match lambda1_solve(input.l, &lp.matrix) {
            Ok(l1) => {
                let ll = input.l * l1;
                let drive = (input.fdot_d - delta_f + shaper_scalar(input.e_f, &state.shaper))
                    / state.k_hat
                    + g.k_f * sat(input.e_f, g.delta_f);
                x += ll * drive;
            }
            Err(_) => flags |= FLAG_DECOUPLING_FALLBACK,
        }
    }
    Ok(Command {
        qdot: &jp.matrix * (&lp.matrix * x),
        flags,
        delta_s,
        delta_f,
    })
}

/// One Euler step of the weight adaptation, followed by projection.
///
/// `Ẇ_s = −Γ_s φ_s (λ_s e_s + k̂ e_f (Q L†)ᵀ)ᵀ` and
/// `Ẇ_f = −Γ_f φ_f (e_f + λ_s Q L† e_s)`; the force terms only run in contact.
pub fn rbf_update(state: &mut ControllerState, input: &ControlInput<'_>, dt: f64) {
    let g = &state.gains;
    let qlp: DVector<f64> = damped_pinv(input.l).matrix.row(5).transpose();
    let mut drive_s = input.e_s * g.lambda_s;
    if input.in_contact {
        drive_s += &qlp * (state.k_hat * input.e_f);
    }
    let phi_s = state.net_s.basis(input.e_s);
    let w_dot_s = &phi_s * drive_s.transpose() * (-g.gamma_s);
    let (gamma_f, lambda_s) = (g.gamma_f, g.lambda_s);
    state.net_s.integrate(&w_dot_s, dt);
    if input.in_contact {
        let f_in = state.force_input(input.e_f, input.p_t);
        let phi_f = state.net_f.basis(&f_in);
        let drive_f = input.e_f + lambda_s * qlp.dot(input.e_s);
        let w_dot_f =
            DMatrix::from_column_slice(phi_f.len(), 1, (phi_f * (-gamma_f * drive_f)).as_slice());
        state.net_f.integrate(&w_dot_f, dt);
    }
}
