//! Hybrid vision/force control laws.
//!
//! The main law is the cascaded fast fixed-time sliding-mode controller
//! (CFTSMC): a feature-space demand built from the shaper `Θ`, a saturated
//! robust term and RBF-network estimates of the lumped uncertainties, mapped to
//! joint rates through `J† L†`. During contact the force demand is injected
//! along `L λ₁`, where `λ₁` solves `Q L† L λ₁ = 1`, so that it reaches the
//! normal direction of the camera twist with unit gain.
//!
//! PD/PI, integral sliding-mode and classical IBVS laws are provided as
//! baselines.

mod baselines;
mod cftsmc;
mod rbf;

use nalgebra::{DMatrix, DVector};

pub use baselines::{
    baseline_cismc_command, baseline_pid_command, classical_ibvs_command, CismcGains, CismcState,
    PidGains, PidState,
};
pub use cftsmc::{cftsmc_command, lambda1_solve, rbf_update, sat, sat_vec, shaper, shaper_scalar};
pub use rbf::RbfNet;

use crate::liegroup::Pose;
use crate::{Error, Result};

/// The pseudo-inverse of `L J` or `L` was ill conditioned this step.
pub const FLAG_ILL_CONDITIONED: u8 = 1;
/// `Q L† L` vanished; only the vision demand was applied.
pub const FLAG_DECOUPLING_FALLBACK: u8 = 2;
/// The tip was in contact this step.
pub const FLAG_CONTACT: u8 = 4;

/// Parameters of the shaper `Θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShaperParams {
    pub m: f64,
    pub n: f64,
    pub j: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for ShaperParams {
    fn default() -> Self {
        Self {
            m: 2.0,
            n: 0.5,
            j: 1.0,
            q: 1.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

impl ShaperParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.m > 1.0
            && self.n > 0.0
            && self.n < 1.0
            && self.j > 0.0
            && self.q > 0.0
            && self.c1 > 0.0
            && self.c2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "shaper needs M > 1, 0 < N < 1 and positive J, Q, C1, C2",
            ))
        }
    }

    /// Constants `(L1, B1, L2, B2, B3)` of the fixed-time bound
    /// `V̇ ≤ −(L1·V^B1 + L2·V^B2)^B3` for `V = ½‖e‖²` under `ė = −Θ(e)`.
    ///
    /// Dropping `sig^J` and writing `‖e‖ = (2V)^½` inside the bracket of `Θ`
    /// gives `B3 = QJ`, `B1 = (N+1)/2QJ`, `B2 = (M+1)/2QJ`, with
    /// `L1 = C2·2^B1` and `L2 = C1·2^B2`, so `B1·B3 < 1 < B2·B3`.
    pub fn lyapunov_constants(&self) -> (f64, f64, f64, f64, f64) {
        let qj = self.q * self.j;
        let b1 = (self.n + 1.0) / (2.0 * qj);
        let b2 = (self.m + 1.0) / (2.0 * qj);
        let l1 = self.c2 * libm::pow(2.0, b1);
        let l2 = self.c1 * libm::pow(2.0, b2);
        (l1, b1, l2, b2, qj)
    }

    /// Fixed-time settling bound `1/(L1^B3 (1 − B1B3)) + 1/(L2^B3 (B2B3 − 1))`.
    pub fn settling_bound(&self) -> f64 {
        let (l1, b1, l2, b2, b3) = self.lyapunov_constants();
        1.0 / (libm::pow(l1, b3) * (1.0 - b1 * b3)) + 1.0 / (libm::pow(l2, b3) * (b2 * b3 - 1.0))
    }
}

/// Gains of the CFTSMC law and of the classical IBVS baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub lambda_s: f64,
    pub k_s: f64,
    pub k_f: f64,
    pub delta_s: f64,
    pub delta_f: f64,
    /// Adaptation gain, `Γ_s = gamma_s · I`.
    pub gamma_s: f64,
    /// Adaptation gain, `Γ_f = gamma_f · I`.
    pub gamma_f: f64,
    /// Classical IBVS gain, `K_p = kp · I`.
    pub kp: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            lambda_s: 1.0,
            k_s: 0.5,
            k_f: 1.0,
            delta_s: 0.05,
            delta_f: 0.1,
            gamma_s: 10.0,
            gamma_f: 10.0,
            kp: 1.0,
        }
    }
}

impl Gains {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lambda_s,
            self.k_s,
            self.k_f,
            self.delta_s,
            self.delta_f,
            self.gamma_s,
            self.gamma_f,
            self.kp,
        ];
        if all.iter().all(|&g| g > 0.0 && g.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("all gains must be positive and finite"))
        }
    }
}

/// Layout of the two estimator networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfConfig {
    pub centers: usize,
    pub sigma: f64,
    pub bound: f64,
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self {
            centers: 9,
            sigma: 0.5,
            bound: 50.0,
        }
    }
}

/// Mutable state of the CFTSMC law.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    /// Vision estimator: input `e_s`, output `Δ̂_s`.
    pub net_s: RbfNet,
    /// Force estimator: input `[e_f, p_t]`, output `Δ̂_f`.
    pub net_f: RbfNet,
    pub gains: Gains,
    pub shaper: ShaperParams,
    pub k_hat: f64,
}

impl ControllerState {
    pub fn new(
        n_lines: usize,
        gains: Gains,
        shaper: ShaperParams,
        rbf: RbfConfig,
        k_hat: f64,
    ) -> Result<Self> {
        gains.validate()?;
        shaper.validate()?;
        if !(k_hat > 0.0) {
            return Err(Error::Config("estimated stiffness must be positive"));
        }
        if rbf.centers == 0 || !(rbf.sigma > 0.0) || !(rbf.bound > 0.0) {
            return Err(Error::Config(
                "RBF network needs centers, a positive width and a positive bound",
            ));
        }
        Ok(Self {
            net_s: RbfNet::diagonal_grid(
                2 * n_lines,
                2 * n_lines,
                rbf.centers,
                rbf.sigma,
                rbf.bound,
            ),
            net_f: RbfNet::diagonal_grid(2, 1, rbf.centers, rbf.sigma, rbf.bound),
            gains,
            shaper,
            k_hat,
        })
    }

    pub(crate) fn force_input(&self, e_f: f64, p_t: f64) -> DVector<f64> {
        DVector::from_vec(alloc::vec![e_f, p_t])
    }
}

/// Measurements and references for one control step.
#[derive(Debug, Clone, Copy)]
pub struct ControlInput<'a> {
    pub e_s: &'a DVector<f64>,
    pub e_f: f64,
    pub p_t: f64,
    pub sdot_d: &'a DVector<f64>,
    pub fdot_d: f64,
    /// Stacked interaction matrix, `2N_l × 6`.
    pub l: &'a DMatrix<f64>,
    /// Camera body Jacobian, `6 × dof`.
    pub camera_jacobian: &'a DMatrix<f64>,
    /// Tip body Jacobian, `6 × dof`.
    pub tip_jacobian: &'a DMatrix<f64>,
    /// Camera frame in the tip frame.
    pub camera_mount: &'a Pose,
    pub in_contact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub qdot: DVector<f64>,
    pub flags: u8,
    pub delta_s: DVector<f64>,
    pub delta_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Cftsmc,
    ClassicalIbvs,
    Pid,
    Cismc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] =
        [Self::Cftsmc, Self::ClassicalIbvs, Self::Pid, Self::Cismc];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cftsmc => "cftsmc",
            Self::ClassicalIbvs => "classical_ibvs",
            Self::Pid => "pid",
            Self::Cismc => "cismc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Everything needed to build a controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    pub gains: Gains,
    pub shaper: ShaperParams,
    pub rbf: RbfConfig,
    pub pid: PidGains,
    pub cismc: CismcGains,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            kind: ControllerKind::Cftsmc,
            gains: Gains::default(),
            shaper: ShaperParams::default(),
            rbf: RbfConfig::default(),
            pid: PidGains::default(),
            cismc: CismcGains::default(),
        }
    }
}

/// A controller of any kind together with its internal state.
#[derive(Debug, Clone)]
pub struct Controller {
    pub kind: ControllerKind,
    pub state: ControllerState,
    pub pid_gains: PidGains,
    pub pid: PidState,
    pub cismc_gains: CismcGains,
    pub cismc: CismcState,
}

impl Controller {
    pub fn new(config: &ControllerConfig, n_lines: usize, k_hat: f64) -> Result<Self> {
        Ok(Self {
            kind: config.kind,
            state: ControllerState::new(n_lines, config.gains, config.shaper, config.rbf, k_hat)?,
            pid_gains: config.pid,
            pid: PidState::default(),
            cismc_gains: config.cismc,
            cismc: CismcState::default(),
        })
    }

    /// Computes the command for this step and advances any internal state by `dt`.
    pub fn step(&mut self, input: &ControlInput<'_>, dt: f64) -> Result<Command> {
        match self.kind {
            ControllerKind::Cftsmc => {
                let cmd = cftsmc_command(&self.state, input)?;
                rbf_update(&mut self.state, input, dt);
                Ok(cmd)
            }
            ControllerKind::ClassicalIbvs => Ok(classical_ibvs_command(
                input.e_s,
                input.l,
                input.tip_jacobian,
                input.camera_mount,
                self.state.gains.kp,
            )),
            ControllerKind::Pid => Ok(baseline_pid_command(
                &mut self.pid,
                &self.pid_gains,
                input,
                self.state.k_hat,
                dt,
            )),
            ControllerKind::Cismc => Ok(baseline_cismc_command(
                &mut self.cismc,
                &self.cismc_gains,
                input,
                self.state.k_hat,
                dt,
            )),
        }
    }
}
