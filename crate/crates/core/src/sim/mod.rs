//! Fixed-step closed-loop simulation of the velocity-controlled system.
//!
//! Each step measures the plant (kinematics, camera features with noise,
//! contact force from the true stiffness), evaluates the controller against
//! the reference programs, logs everything, and integrates the joint rates
//! through a first-order actuator lag with explicit Euler.

mod programs;
mod scenarios;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use programs::{FeatureProgram, ForceProgram};
pub use scenarios::{
    scenario_test1, scenario_test1_initial_states, scenario_test2, scenario_test3,
    stock_controller, TEST1_THETA, TEST_PLANE,
};

use crate::contact::{self, Environment};
use crate::controllers::{
    ControlInput, Controller, ControllerConfig, ControllerKind, FLAG_CONTACT,
};
use crate::kinematics::{forward_kinematics, ArmGeometry, ArmState, KinematicsSnapshot};
use crate::liegroup::Pose;
use crate::vision::{self, features_of, FeatureSet, Plane, Scene};
use crate::{Error, Result};

/// Inertial plane `normal · p + offset = 0` holding the target lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPlane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl WorldPlane {
    pub fn in_camera(&self, camera: &Pose) -> Plane {
        Plane::in_camera(&self.normal, self.offset, camera)
    }
}

/// Injected uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    /// Half-width of the uniform noise added to every θ and ρ.
    pub feature_noise: f64,
    /// `k_true / k̂`.
    pub stiffness_ratio: f64,
    /// Actuator time constant [s]; zero makes the plant follow commands exactly.
    pub actuator_tau: f64,
}

impl Default for Disturbance {
    fn default() -> Self {
        Self {
            feature_noise: 2e-3,
            stiffness_ratio: 0.9,
            actuator_tau: 0.02,
        }
    }
}

impl Disturbance {
    pub fn none() -> Self {
        Self {
            feature_noise: 0.0,
            stiffness_ratio: 1.0,
            actuator_tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: ArmGeometry,
    pub scene: Scene,
    pub target_plane: WorldPlane,
    /// Workpiece frame; its XY plane is the surface and z points out of it.
    pub surface_pose: Pose,
    pub k_hat: f64,
    /// F/T sensor frame in the tip frame.
    pub sensor_mount: Pose,
    pub initial_state: ArmState,
    pub feature_program: FeatureProgram,
    pub force_program: ForceProgram,
    pub controller: ControllerConfig,
    pub dt: f64,
    pub duration: f64,
    pub disturbance: Disturbance,
    pub seed: u64,
}

impl Scenario {
    pub fn environment(&self) -> Environment {
        Environment {
            surface_pose: self.surface_pose,
            k_true: self.k_hat * self.disturbance.stiffness_ratio,
            k_hat: self.k_hat,
        }
    }

    /// Number of integration steps; the log holds one more record.
    pub fn steps(&self) -> usize {
        libm::round(self.duration / self.dt) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.duration >= self.dt) {
            return Err(Error::Config("need dt > 0 and duration >= dt"));
        }
        if !(self.k_hat > 0.0) || !(self.disturbance.stiffness_ratio > 0.0) {
            return Err(Error::Config("stiffness must be positive"));
        }
        if !(self.disturbance.feature_noise >= 0.0) || !(self.disturbance.actuator_tau >= 0.0) {
            return Err(Error::Config("noise and actuator lag must be non-negative"));
        }
        if self.scene.lines.is_empty() {
            return Err(Error::EmptyFeatures);
        }
        self.geometry.validate()?;
        if self.initial_state.q_a.len() != self.geometry.n_a() {
            return Err(Error::Dimension {
                expected: self.geometry.n_a(),
                got: self.initial_state.q_a.len(),
            });
        }
        self.feature_program.validate()
    }

    /// Desired features and their rate at time `t`.
    pub fn desired_features(&self, t: f64) -> Result<(FeatureSet, DVector<f64>)> {
        let (f, fdot) = self.force_program.eval(t);
        let (pose, twist) =
            self.feature_program
                .desired_camera(t, f / self.k_hat, fdot / self.k_hat);
        let s = features_of(&pose, &self.scene)?;
        let plane = self.target_plane.in_camera(&pose);
        let l = vision::stack_interaction(&s, &plane)?;
        Ok((s, l * twist.to_vector()))
    }

    pub fn with_controller(mut self, kind: ControllerKind) -> Self {
        self.controller.kind = kind;
        self
    }
}

/// One logged step.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub q: DVector<f64>,
    pub qdot_des: DVector<f64>,
    pub s: DVector<f64>,
    pub e_s: DVector<f64>,
    pub f_n: f64,
    pub e_f: f64,
    pub p_t: f64,
    pub delta_s: DVector<f64>,
    pub delta_f: f64,
    pub w_s_norm: f64,
    pub w_f_norm: f64,
    pub flags: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub controller: ControllerKind,
    pub seed: u64,
    pub dt: f64,
    pub records: Vec<Record>,
}

impl TrajectoryLog {
    pub fn vision_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.e_s.norm()).collect()
    }

    pub fn force_errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.e_f).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// A run that stopped early, with everything logged up to the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: TrajectoryLog,
}

/// Plant update: `q̇ ← q̇ + (dt/τ)(q̇_des − q̇)`, then `q ← q + dt·q̇`.
pub fn integrate(state: &mut ArmState, qdot_des: &DVector<f64>, dt: f64, tau: f64) {
    let qdot = if tau > 0.0 {
        let current = state.qdot();
        let alpha = (dt / tau).min(1.0);
        &current + (qdot_des - &current) * alpha
    } else {
        qdot_des.clone()
    };
    let q = state.q() + &qdot * dt;
    state.set_qdot(&qdot);
    state.set_q(&q);
}

/// Measurements taken from the plant at one instant.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub kinematics: KinematicsSnapshot,
    pub features: FeatureSet,
    pub penetration: f64,
    pub f_n: f64,
}

/// The plant: kinematics, camera and environment.
#[derive(Debug, Clone)]
pub struct Plant {
    pub state: ArmState,
    rng: ChaCha8Rng,
}

impl Plant {
    pub fn new(state: ArmState, seed: u64) -> Self {
        Self {
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn measure(&mut self, scenario: &Scenario) -> Result<Measurement> {
        let kin = forward_kinematics(&self.state, &scenario.geometry)?;
        let camera = vision::virtual_camera(&kin.uav_pose, &kin.camera_pose)?;
        let mut features = features_of(&camera, &scenario.scene)?;
        let a = scenario.disturbance.feature_noise;
        if a > 0.0 {
            let noise = DVector::from_fn(2 * features.len(), |_, _| self.rng.random_range(-a..=a));
            features = features.perturbed(&noise);
        }
        let env = scenario.environment();
        let reading = contact::read_contact(&kin.tip_pose, &env, &scenario.sensor_mount);
        let f_n = contact::wrench_to_fn(&reading.wrench, &scenario.sensor_mount);
        Ok(Measurement {
            kinematics: kin,
            features,
            penetration: reading.penetration,
            f_n,
        })
    }

    /// Advances the plant by `dt` under the commanded joint rates.
    pub fn step(&mut self, qdot_des: &DVector<f64>, scenario: &Scenario) {
        integrate(
            &mut self.state,
            qdot_des,
            scenario.dt,
            scenario.disturbance.actuator_tau,
        );
    }
}

/// Runs the closed loop for the whole scenario.
pub fn run(scenario: &Scenario) -> core::result::Result<TrajectoryLog, Box<RunFailure>> {
    let mut log = TrajectoryLog {
        scenario: scenario.name.clone(),
        controller: scenario.controller.kind,
        seed: scenario.seed,
        dt: scenario.dt,
        records: Vec::new(),
    };
    if let Err(error) = scenario.validate() {
        return Err(Box::new(RunFailure {
            error,
            partial: log,
        }));
    }
    let n_lines = scenario.scene.lines.len();
    let mut controller = match Controller::new(&scenario.controller, n_lines, scenario.k_hat) {
        Ok(c) => c,
        Err(error) => {
            return Err(Box::new(RunFailure {
                error,
                partial: log,
            }))
        }
    };
    let mut plant = Plant::new(scenario.initial_state.clone(), scenario.seed);
    let steps = scenario.steps();
    log.records.reserve(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * scenario.dt;
        match control_step(scenario, &mut plant, &mut controller, t) {
            Ok(record) => {
                if k < steps {
                    plant.step(&record.qdot_des, scenario);
                }
                log.records.push(record);
            }
            Err(e) => {
                return Err(Box::new(RunFailure {
                    error: e.at_step(k),
                    partial: log,
                }))
            }
        }
    }
    Ok(log)
}

fn control_step(
    scenario: &Scenario,
    plant: &mut Plant,
    controller: &mut Controller,
    t: f64,
) -> Result<Record> {
    let m = plant.measure(scenario)?;
    let (s_d, sdot_d) = scenario.desired_features(t)?;
    let (f_d, fdot_d) = scenario.force_program.eval(t);
    let e_s = vision::feature_error(&s_d, &m.features)?;
    let e_f = f_d - m.f_n;
    let l: DMatrix<f64> = vision::stack_interaction(&m.features, &scenario.scene.plane)?;
    let in_contact = m.penetration >= 0.0;
    let input = ControlInput {
        e_s: &e_s,
        e_f,
        p_t: m.penetration,
        sdot_d: &sdot_d,
        fdot_d,
        l: &l,
        camera_jacobian: &m.kinematics.camera_jacobian,
        tip_jacobian: &m.kinematics.tip_jacobian,
        camera_mount: &scenario.geometry.camera_mount,
        in_contact,
    };
    let cmd = controller.step(&input, scenario.dt)?;
    if !cmd.qdot.iter().all(|x| x.is_finite()) {
        return Err(Error::Config("controller produced a non-finite command"));
    }
    let mut flags = cmd.flags;
    if in_contact {
        flags |= FLAG_CONTACT;
    }
    Ok(Record {
        t,
        q: plant.state.q(),
        qdot_des: cmd.qdot,
        s: m.features.to_vector(),
        e_s,
        f_n: m.f_n,
        e_f,
        p_t: m.penetration,
        delta_s: cmd.delta_s,
        delta_f: cmd.delta_f,
        w_s_norm: controller.state.net_s.weight_norm(),
        w_f_norm: controller.state.net_f.weight_norm(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_without_lag() {
        let mut s = ArmState::zeros(2);
        let cmd = DVector::from_vec(alloc::vec![1.0, 0.0, -2.0, 0.0, 0.5, 0.0]);
        for _ in 0..10 {
            integrate(&mut s, &cmd, 0.01, 0.0);
        }
        assert!((s.q() - &cmd * 0.1).amax() < 1e-15);
    }

    #[test]
    fn zero_command_is_a_fixed_point() {
        let mut s = ArmState::zeros(2);
        s.q_a[0] = 1.5;
        let before = s.clone();
        integrate(&mut s, &DVector::zeros(6), 1e-3, 0.02);
        assert_eq!(s, before);
    }
}
