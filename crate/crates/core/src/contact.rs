//! Frictionless unilateral spring contact with a planar workpiece.

use nalgebra::{DMatrix, DVector, Vector3, Vector6};

use crate::liegroup::{coadjoint, Pose, Twist, Wrench};

/// Row that picks the normal force (linear z) out of a tip wrench.
pub const Q: [f64; 6] = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];

/// Static workpiece. Its local XY plane is the surface and its z-axis points
/// out of the material, toward the robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub surface_pose: Pose,
    pub k_true: f64,
    pub k_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReading {
    pub penetration: f64,
    pub normal_force: f64,
    pub wrench: Wrench,
}

/// Depth of the tip origin below the surface; negative when clear of it.
pub fn penetration(tip: &Pose, env: &Environment) -> f64 {
    let n = env.surface_pose.rotation.column(2);
    -n.dot(&(tip.translation - env.surface_pose.translation))
}

pub fn normal_force(penetration: f64, k: f64) -> f64 {
    if penetration >= 0.0 {
        k * penetration
    } else {
        0.0
    }
}

/// Wrench seen by a sensor at `sensor_mount` (sensor frame in the tip frame)
/// for a normal contact force of magnitude `f_n`.
///
/// The sensor reports the push the tip exerts on the surface, `−f_n · n`,
/// which in the tip frame is `f_n · e_z` for a tip facing the surface squarely.
pub fn sensed_wrench(f_n: f64, tip: &Pose, surface: &Pose, sensor_mount: &Pose) -> Wrench {
    let n_tip = -(tip.rotation.transpose() * surface.rotation.column(2));
    let at_tip = Wrench::new(Vector3::zeros(), n_tip * f_n);
    // F_f = Ad*_{g_tf}⁻¹ F_t, and Ad*_{g}⁻¹ = Ad_gᵀ.
    let map = crate::liegroup::adjoint(sensor_mount).transpose();
    Wrench::from_vector(&(map * at_tip.to_vector()))
}

/// `f_n = Q · Ad*_{g_tf} · F_f`, where `g_tf` is the sensor frame in the tip frame.
pub fn wrench_to_fn(wrench_f: &Wrench, sensor_mount: &Pose) -> f64 {
    let at_tip: Vector6<f64> = coadjoint(sensor_mount) * wrench_f.to_vector();
    at_tip[5]
}

/// Nominal force rate `k̂ · Q · ϱ_c`.
pub fn force_rate(k_hat: f64, camera_twist: &Twist) -> f64 {
    k_hat * camera_twist.linear.z
}

/// Force rate written through the features: `k̂ · Q · L† · ṡ`.
pub fn force_rate_from_features(k_hat: f64, l_pinv: &DMatrix<f64>, sdot: &DVector<f64>) -> f64 {
    k_hat * (l_pinv.row(5) * sdot)[0]
}

/// Full contact measurement for the simulator.
pub fn read_contact(tip: &Pose, env: &Environment, sensor_mount: &Pose) -> ContactReading {
    let p = penetration(tip, env);
    let f = normal_force(p, env.k_true);
    ContactReading {
        penetration: p,
        normal_force: f,
        wrench: sensed_wrench(f, tip, &env.surface_pose, sensor_mount),
    }
}
