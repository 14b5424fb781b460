//! Scenario files.
//!
//! A scenario file is a JSON object with a `schema_version` and one key per
//! scenario field. Quantities are SI and keys carry their unit (`dt_s`,
//! `k_hat_n_per_m`, `translation_m`). Unknown keys are rejected.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use tdacm_core::controllers::{
    CismcGains, ControllerConfig, ControllerKind, Gains, PidGains, RbfConfig, ShaperParams,
};
use tdacm_core::kinematics::{ArmGeometry, ArmState, UAV_DOF};
use tdacm_core::liegroup::{Pose, Twist};
use tdacm_core::sim::{Disturbance, FeatureProgram, ForceProgram, Scenario, WorldPlane};
use tdacm_core::vision::{Plane, Scene, Segment};

use crate::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub geometry: GeometryDto,
    pub scene: SceneDto,
    pub target_plane: WorldPlaneDto,
    pub surface_pose: PoseDto,
    pub k_hat_n_per_m: f64,
    pub sensor_mount: PoseDto,
    pub initial_state: StateDto,
    pub feature_program: FeatureProgramDto,
    pub force_program: ForceProgramDto,
    pub controller: ControllerDto,
    pub dt_s: f64,
    pub duration_s: f64,
    pub disturbance: DisturbanceDto,
    pub seed: u64,
}

/// Rotation as rows, translation in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDto {
    pub rotation: [[f64; 3]; 3],
    pub translation_m: [f64; 3],
}

impl From<&Pose> for PoseDto {
    fn from(p: &Pose) -> Self {
        let r = &p.rotation;
        Self {
            rotation: [0, 1, 2].map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]),
            translation_m: p.translation.into(),
        }
    }
}

impl PoseDto {
    fn to_pose(self, field: &str) -> AppResult<Pose> {
        let r = Matrix3::from_fn(|i, j| self.rotation[i][j]);
        let p = Pose::new(r, Vector3::from(self.translation_m));
        if p.is_valid(1e-6) {
            Ok(p)
        } else {
            Err(AppError::Config(format!(
                "{field}: rotation is not orthonormal"
            )))
        }
    }
}

/// Significant points are the Gauss–Legendre nodes of `n_points`, so only
/// the count is stored. `strain_basis` lists the columns of `B`, angular first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDto {
    pub length_m: f64,
    pub n_points: usize,
    pub strain_basis: Vec<[f64; 6]>,
    pub reference_strain: [f64; 6],
    pub uav_rest_pose: PoseDto,
    pub arm_base_mount: PoseDto,
    pub tip_mount: PoseDto,
    pub camera_mount: PoseDto,
    pub curvature_bound_per_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDto {
    pub id: u32,
    pub start_m: [f64; 3],
    pub end_m: [f64; 3],
}

/// `a X + b Y + c Z + d = 0` in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneDto {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDto {
    pub lines: Vec<SegmentDto>,
    pub interaction_plane: PlaneDto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldPlaneDto {
    pub normal: [f64; 3],
    pub offset_m: f64,
}

/// UAV coordinates are `[x_m, y_m, z_m, yaw_rad]`; arm coordinates are
/// curvatures in 1/m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDto {
    pub uav: [f64; UAV_DOF],
    pub arm_per_m: Vec<f64>,
    pub uav_rate: [f64; UAV_DOF],
    pub arm_rate_per_m_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureProgramDto {
    Hold {
        contact_camera: PoseDto,
    },
    Square {
        contact_camera: PoseDto,
        half_width_m: f64,
        dwell_s: f64,
    },
    Lemniscate {
        contact_camera: PoseDto,
        amplitude_m: f64,
        period_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceProgramDto {
    Constant {
        force_n: f64,
    },
    Step {
        before_n: f64,
        after_n: f64,
        switch_time_s: f64,
    },
    Sinusoid {
        mean_n: f64,
        amplitude_n: f64,
        omega_rad_per_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsDto {
    pub lambda_s: f64,
    pub k_s: f64,
    pub k_f: f64,
    pub delta_s: f64,
    pub delta_f_n: f64,
    pub gamma_s: f64,
    pub gamma_f: f64,
    pub kp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaperDto {
    pub m: f64,
    pub n: f64,
    pub j: f64,
    pub q: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbfDto {
    pub centers: usize,
    pub sigma: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidDto {
    pub kp_s: f64,
    pub kd_s: f64,
    pub kp_f: f64,
    pub ki_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CismcDto {
    pub c_s: f64,
    pub k_s: f64,
    pub delta_s: f64,
    pub c_f: f64,
    pub k_f: f64,
    pub delta_f_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerDto {
    pub kind: String,
    pub gains: GainsDto,
    pub shaper: ShaperDto,
    pub rbf: RbfDto,
    pub pid: PidDto,
    pub cismc: CismcDto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceDto {
    pub feature_noise: f64,
    pub stiffness_ratio: f64,
    pub actuator_tau_s: f64,
}

fn twist(v: &[f64; 6]) -> Twist {
    Twist::from_vector(&Vector6::from_row_slice(v))
}

fn array6(t: &Twist) -> [f64; 6] {
    t.to_vector().into()
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let g = &s.geometry;
        let c = &s.controller;
        let st = &s.initial_state;
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name: s.name.clone(),
            geometry: GeometryDto {
                length_m: g.length,
                n_points: g.n_points(),
                strain_basis: g
                    .b
                    .column_iter()
                    .map(|col| [0, 1, 2, 3, 4, 5].map(|i| col[i]))
                    .collect(),
                reference_strain: array6(&g.xi_star),
                uav_rest_pose: (&g.g_s).into(),
                arm_base_mount: (&g.g_as).into(),
                tip_mount: (&g.tip_mount).into(),
                camera_mount: (&g.camera_mount).into(),
                curvature_bound_per_m: g.curvature_bound,
            },
            scene: SceneDto {
                lines: s
                    .scene
                    .lines
                    .iter()
                    .map(|l| SegmentDto {
                        id: l.id,
                        start_m: l.start.into(),
                        end_m: l.end.into(),
                    })
                    .collect(),
                interaction_plane: PlaneDto {
                    a: s.scene.plane.a,
                    b: s.scene.plane.b,
                    c: s.scene.plane.c,
                    d: s.scene.plane.d,
                },
            },
            target_plane: WorldPlaneDto {
                normal: s.target_plane.normal.into(),
                offset_m: s.target_plane.offset,
            },
            surface_pose: (&s.surface_pose).into(),
            k_hat_n_per_m: s.k_hat,
            sensor_mount: (&s.sensor_mount).into(),
            initial_state: StateDto {
                uav: [0, 1, 2, 3].map(|i| st.q_u[i]),
                arm_per_m: st.q_a.iter().copied().collect(),
                uav_rate: [0, 1, 2, 3].map(|i| st.qdot_u[i]),
                arm_rate_per_m_s: st.qdot_a.iter().copied().collect(),
            },
            feature_program: match s.feature_program {
                FeatureProgram::Hold { contact_camera } => FeatureProgramDto::Hold {
                    contact_camera: (&contact_camera).into(),
                },
                FeatureProgram::Square {
                    contact_camera,
                    half_width,
                    dwell,
                } => FeatureProgramDto::Square {
                    contact_camera: (&contact_camera).into(),
                    half_width_m: half_width,
                    dwell_s: dwell,
                },
                FeatureProgram::Lemniscate {
                    contact_camera,
                    amplitude,
                    period,
                } => FeatureProgramDto::Lemniscate {
                    contact_camera: (&contact_camera).into(),
                    amplitude_m: amplitude,
                    period_s: period,
                },
            },
            force_program: match s.force_program {
                ForceProgram::Constant(f) => ForceProgramDto::Constant { force_n: f },
                ForceProgram::Step {
                    before,
                    after,
                    switch_time,
                } => ForceProgramDto::Step {
                    before_n: before,
                    after_n: after,
                    switch_time_s: switch_time,
                },
                ForceProgram::Sinusoid {
                    mean,
                    amplitude,
                    omega,
                } => ForceProgramDto::Sinusoid {
                    mean_n: mean,
                    amplitude_n: amplitude,
                    omega_rad_per_s: omega,
                },
            },
            controller: ControllerDto {
                kind: c.kind.name().to_string(),
                gains: GainsDto {
                    lambda_s: c.gains.lambda_s,
                    k_s: c.gains.k_s,
                    k_f: c.gains.k_f,
                    delta_s: c.gains.delta_s,
                    delta_f_n: c.gains.delta_f,
                    gamma_s: c.gains.gamma_s,
                    gamma_f: c.gains.gamma_f,
                    kp: c.gains.kp,
                },
                shaper: ShaperDto {
                    m: c.shaper.m,
                    n: c.shaper.n,
                    j: c.shaper.j,
                    q: c.shaper.q,
                    c1: c.shaper.c1,
                    c2: c.shaper.c2,
                },
                rbf: RbfDto {
                    centers: c.rbf.centers,
                    sigma: c.rbf.sigma,
                    bound: c.rbf.bound,
                },
                pid: PidDto {
                    kp_s: c.pid.kp_s,
                    kd_s: c.pid.kd_s,
                    kp_f: c.pid.kp_f,
                    ki_f: c.pid.ki_f,
                },
                cismc: CismcDto {
                    c_s: c.cismc.c_s,
                    k_s: c.cismc.k_s,
                    delta_s: c.cismc.delta_s,
                    c_f: c.cismc.c_f,
                    k_f: c.cismc.k_f,
                    delta_f_n: c.cismc.delta_f,
                },
            },
            dt_s: s.dt,
            duration_s: s.duration,
            disturbance: DisturbanceDto {
                feature_noise: s.disturbance.feature_noise,
                stiffness_ratio: s.disturbance.stiffness_ratio,
                actuator_tau_s: s.disturbance.actuator_tau,
            },
            seed: s.seed,
        }
    }
}

impl ScenarioFile {
    /// Builds and validates the scenario.
    pub fn to_scenario(&self) -> AppResult<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let g = &self.geometry;
        let mut geometry = ArmGeometry::new(g.length_m, g.n_points)?;
        if g.strain_basis.is_empty() {
            return Err(AppError::Config(
                "geometry.strain_basis: need at least one column".into(),
            ));
        }
        geometry.b = DMatrix::from_fn(6, g.strain_basis.len(), |i, j| g.strain_basis[j][i]);
        geometry.xi_star = twist(&g.reference_strain);
        geometry.g_s = g.uav_rest_pose.to_pose("geometry.uav_rest_pose")?;
        geometry.g_as = g.arm_base_mount.to_pose("geometry.arm_base_mount")?;
        geometry.tip_mount = g.tip_mount.to_pose("geometry.tip_mount")?;
        geometry.camera_mount = g.camera_mount.to_pose("geometry.camera_mount")?;
        geometry.curvature_bound = g.curvature_bound_per_m;

        let st = &self.initial_state;
        if st.arm_per_m.len() != st.arm_rate_per_m_s.len() {
            return Err(AppError::Config(
                "initial_state: arm_per_m and arm_rate_per_m_s differ in length".into(),
            ));
        }
        let initial_state = ArmState {
            q_u: DVector::from_row_slice(&st.uav),
            q_a: DVector::from_row_slice(&st.arm_per_m),
            qdot_u: DVector::from_row_slice(&st.uav_rate),
            qdot_a: DVector::from_row_slice(&st.arm_rate_per_m_s),
        };

        let c = &self.controller;
        let kind = ControllerKind::from_name(&c.kind).ok_or_else(|| {
            AppError::Config(format!("controller.kind: unknown controller '{}'", c.kind))
        })?;
        let controller = ControllerConfig {
            kind,
            gains: Gains {
                lambda_s: c.gains.lambda_s,
                k_s: c.gains.k_s,
                k_f: c.gains.k_f,
                delta_s: c.gains.delta_s,
                delta_f: c.gains.delta_f_n,
                gamma_s: c.gains.gamma_s,
                gamma_f: c.gains.gamma_f,
                kp: c.gains.kp,
            },
            shaper: ShaperParams {
                m: c.shaper.m,
                n: c.shaper.n,
                j: c.shaper.j,
                q: c.shaper.q,
                c1: c.shaper.c1,
                c2: c.shaper.c2,
            },
            rbf: RbfConfig {
                centers: c.rbf.centers,
                sigma: c.rbf.sigma,
                bound: c.rbf.bound,
            },
            pid: PidGains {
                kp_s: c.pid.kp_s,
                kd_s: c.pid.kd_s,
                kp_f: c.pid.kp_f,
                ki_f: c.pid.ki_f,
            },
            cismc: CismcGains {
                c_s: c.cismc.c_s,
                k_s: c.cismc.k_s,
                delta_s: c.cismc.delta_s,
                c_f: c.cismc.c_f,
                k_f: c.cismc.k_f,
                delta_f: c.cismc.delta_f_n,
            },
        };

        let feature_program = match self.feature_program {
            FeatureProgramDto::Hold { contact_camera } => FeatureProgram::Hold {
                contact_camera: contact_camera.to_pose("feature_program.contact_camera")?,
            },
            FeatureProgramDto::Square {
                contact_camera,
                half_width_m,
                dwell_s,
            } => FeatureProgram::Square {
                contact_camera: contact_camera.to_pose("feature_program.contact_camera")?,
                half_width: half_width_m,
                dwell: dwell_s,
            },
            FeatureProgramDto::Lemniscate {
                contact_camera,
                amplitude_m,
                period_s,
            } => FeatureProgram::Lemniscate {
                contact_camera: contact_camera.to_pose("feature_program.contact_camera")?,
                amplitude: amplitude_m,
                period: period_s,
            },
        };
        let force_program = match self.force_program {
            ForceProgramDto::Constant { force_n } => ForceProgram::Constant(force_n),
            ForceProgramDto::Step {
                before_n,
                after_n,
                switch_time_s,
            } => ForceProgram::Step {
                before: before_n,
                after: after_n,
                switch_time: switch_time_s,
            },
            ForceProgramDto::Sinusoid {
                mean_n,
                amplitude_n,
                omega_rad_per_s,
            } => ForceProgram::Sinusoid {
                mean: mean_n,
                amplitude: amplitude_n,
                omega: omega_rad_per_s,
            },
        };

        let p = self.scene.interaction_plane;
        let scenario = Scenario {
            name: self.name.clone(),
            geometry,
            scene: Scene {
                lines: self
                    .scene
                    .lines
                    .iter()
                    .map(|l| Segment {
                        id: l.id,
                        start: Vector3::from(l.start_m),
                        end: Vector3::from(l.end_m),
                    })
                    .collect(),
                plane: Plane::new(p.a, p.b, p.c, p.d),
            },
            target_plane: WorldPlane {
                normal: Vector3::from(self.target_plane.normal),
                offset: self.target_plane.offset_m,
            },
            surface_pose: self.surface_pose.to_pose("surface_pose")?,
            k_hat: self.k_hat_n_per_m,
            sensor_mount: self.sensor_mount.to_pose("sensor_mount")?,
            initial_state,
            feature_program,
            force_program,
            controller,
            dt: self.dt_s,
            duration: self.duration_s,
            disturbance: Disturbance {
                feature_noise: self.disturbance.feature_noise,
                stiffness_ratio: self.disturbance.stiffness_ratio,
                actuator_tau: self.disturbance.actuator_tau_s,
            },
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Parses a scenario from JSON text; `origin` names the source in errors.
pub fn parse_scenario(text: &str, origin: &str) -> AppResult<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| AppError::Json {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.to_scenario()
}

pub fn load_scenario(path: &Path) -> AppResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn scenario_json(s: &Scenario) -> String {
    let mut text =
        serde_json::to_string_pretty(&ScenarioFile::from(s)).expect("scenario serializes");
    text.push('\n');
    text
}

pub fn save_scenario(s: &Scenario, path: &Path) -> AppResult<()> {
    fs::write(path, scenario_json(s)).map_err(|e| AppError::io(path, e))
}
