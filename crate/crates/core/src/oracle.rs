//! Finite-difference and identity checks over random samples.
//!
//! Each check draws its samples from a seeded ChaCha stream and reports the
//! worst error it saw next to the tolerance it must beat.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kinematics::{
    forward_kinematics, tangent_operator, tangent_operator_dot, ArmGeometry, ArmState, UAV_DOF,
};
use crate::liegroup::wrap_angle;
use crate::liegroup::{ad_small, adjoint, coadjoint, exp_se3, hat6, vee6, Pose, Twist};
use crate::vision::{interaction_row, project_line, Plane, Segment};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl OracleResult {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

pub fn random_vec3<R: Rng>(rng: &mut R, scale: f64) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_twist<R: Rng>(rng: &mut R, angular: f64, linear: f64) -> Twist {
    Twist::new(random_vec3(rng, angular), random_vec3(rng, linear))
}

pub fn random_pose<R: Rng>(rng: &mut R) -> Pose {
    exp_se3(&random_twist(rng, PI, 2.0), 1.0)
}

/// `exp(A)` by scaling and squaring around a 12th-order Taylor polynomial.
pub fn expm_series(a: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = a.abs().row_sum().max();
    let mut k = 0;
    while norm / libm::pow(2.0, k as f64) > 0.5 {
        k += 1;
    }
    let scaled = a / libm::pow(2.0, k as f64);
    let mut term = Matrix4::identity();
    let mut sum = Matrix4::identity();
    for n in 1..=12 {
        term = term * scaled / n as f64;
        sum += term;
    }
    for _ in 0..k {
        sum = sum * sum;
    }
    sum
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-12)
}

/// Adjoint homomorphism, co-adjoint power invariance, bracket form of `ad`,
/// and closed-form `exp` against the series.
pub fn lie_identities(seed: u64, samples: usize) -> Vec<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hom, mut power, mut bracket, mut series) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..samples {
        let g1 = random_pose(&mut rng);
        let g2 = random_pose(&mut rng);
        let lhs = adjoint(&g1.compose(&g2));
        let rhs = adjoint(&g1) * adjoint(&g2);
        hom = hom.max(rel((lhs - rhs).amax(), lhs.amax()));

        let x = random_twist(&mut rng, 1.0, 1.0).to_vector();
        let w: Vector6<f64> = random_twist(&mut rng, 1.0, 1.0).to_vector();
        let p0 = w.dot(&x);
        let p1 = (coadjoint(&g1) * w).dot(&(adjoint(&g1) * x));
        power = power.max((p1 - p0).abs() / (w.norm() * x.norm()));

        let a = random_twist(&mut rng, 2.0, 2.0);
        let b = random_twist(&mut rng, 2.0, 2.0);
        let ha = hat6(&a);
        let hb = hat6(&b);
        let br = vee6(&(ha * hb - hb * ha)).to_vector();
        let ad = ad_small(&a) * b.to_vector();
        bracket = bracket.max(rel((br - ad).amax(), br.amax().max(1.0)));

        let x = random_twist(&mut rng, PI, 2.0);
        let closed = exp_se3(&x, 1.0).to_matrix();
        let reference = expm_series(&hat6(&x));
        series = series.max((closed - reference).amax());
    }
    alloc::vec![
        OracleResult {
            name: "adjoint homomorphism",
            max_error: hom,
            tolerance: 1e-9,
            samples
        },
        OracleResult {
            name: "co-adjoint power invariance",
            max_error: power,
            tolerance: 1e-9,
            samples
        },
        OracleResult {
            name: "ad bracket consistency",
            max_error: bracket,
            tolerance: 1e-9,
            samples
        },
        OracleResult {
            name: "exp closed form vs series",
            max_error: series,
            tolerance: 1e-9,
            samples
        },
    ]
}

/// `T` against central differences of `exp`, and `Ṫ` against central
/// differences of `T`.
pub fn tangent_operators(seed: u64, samples: usize) -> Vec<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 1e-6;
    let (mut t_err, mut td_err) = (0f64, 0f64);
    for i in 0..samples {
        // Alternate large and tiny rotations so both coefficient branches run.
        let ang = if i % 4 == 0 { 0.05 } else { 2.5 };
        let x = random_twist(&mut rng, ang, 1.0);
        let xd = random_twist(&mut rng, 1.0, 1.0);
        let scale: f64 = rng.random_range(0.1..1.5);
        let plus = Twist::from_vector(&(x.to_vector() + xd.to_vector() * eps));
        let minus = Twist::from_vector(&(x.to_vector() - xd.to_vector() * eps));
        let fd =
            (exp_se3(&plus, scale).to_matrix() - exp_se3(&minus, scale).to_matrix()) / (2.0 * eps);
        let t = tangent_operator(&x, scale);
        let body = Twist::from_vector(&(t * xd.to_vector() * scale));
        let analytic = exp_se3(&x, scale).to_matrix() * hat6(&body);
        t_err = t_err.max(rel((fd - analytic).amax(), analytic.amax()));

        let fd_t = (tangent_operator(&plus, scale) - tangent_operator(&minus, scale)) / (2.0 * eps);
        let td = tangent_operator_dot(&x, &xd, scale);
        td_err = td_err.max(rel((fd_t - td).amax(), td.amax().max(1.0)));
    }
    alloc::vec![
        OracleResult {
            name: "tangent operator vs exp differences",
            max_error: t_err,
            tolerance: 1e-5,
            samples
        },
        OracleResult {
            name: "tangent operator rate vs differences",
            max_error: td_err,
            tolerance: 1e-5,
            samples
        },
    ]
}

/// Geometry with non-trivial mounts, for exercising every term of the chain.
pub fn random_geometry<R: Rng>(rng: &mut R) -> ArmGeometry {
    let n = rng.random_range(2..7);
    let length = rng.random_range(0.2..0.8);
    let mut geom = ArmGeometry::new(length, n).expect("valid geometry");
    geom.g_s = random_pose(rng);
    geom.g_as = random_pose(rng);
    geom.tip_mount = random_pose(rng);
    geom.camera_mount = random_pose(rng);
    geom
}

pub fn random_state<R: Rng>(rng: &mut R, n_a: usize) -> ArmState {
    let mut s = ArmState::zeros(n_a);
    for i in 0..UAV_DOF {
        s.q_u[i] = rng.random_range(-1.0..1.0);
        s.qdot_u[i] = rng.random_range(-1.0..1.0);
    }
    s.q_u[3] = rng.random_range(-PI..PI);
    for i in 0..n_a {
        s.q_a[i] = rng.random_range(-6.0..6.0);
        s.qdot_a[i] = rng.random_range(-3.0..3.0);
    }
    s
}

fn body_difference(g: &Pose, plus: &Pose, minus: &Pose, eps: f64) -> Vector6<f64> {
    let d = (plus.to_matrix() - minus.to_matrix()) / (2.0 * eps);
    vee6(&(g.inverse().to_matrix() * d)).to_vector()
}

/// Body Jacobians and their rates against central differences of the chain.
#[allow(clippy::needless_range_loop)]
pub fn jacobians(seed: u64, samples: usize) -> Vec<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 1e-6;
    let (mut j_err, mut jd_err, mut lin_err) = (0f64, 0f64, 0f64);
    for _ in 0..samples {
        let geom = random_geometry(&mut rng);
        let state = random_state(&mut rng, geom.n_a());
        let snap = forward_kinematics(&state, &geom).expect("in-bound state");
        let q = state.q();
        let qdot = state.qdot();
        let dof = q.len();
        let n = snap.point_poses.len();
        let mut fd_j = alloc::vec![DMatrix::<f64>::zeros(6, dof); n + 1];
        for k in 0..dof {
            let mut sp = state.clone();
            let mut sm = state.clone();
            let mut dq = DVector::zeros(dof);
            dq[k] = eps;
            sp.set_q(&(&q + &dq));
            sm.set_q(&(&q - &dq));
            let p = forward_kinematics(&sp, &geom).expect("in-bound state");
            let m = forward_kinematics(&sm, &geom).expect("in-bound state");
            for i in 0..n {
                let col = body_difference(
                    &snap.point_poses[i],
                    &p.point_poses[i],
                    &m.point_poses[i],
                    eps,
                );
                fd_j[i].column_mut(k).copy_from(&col);
            }
            let col = body_difference(&snap.camera_pose, &p.camera_pose, &m.camera_pose, eps);
            fd_j[n].column_mut(k).copy_from(&col);
        }
        for i in 0..n {
            j_err = j_err.max(rel(
                (&fd_j[i] - &snap.jacobians[i]).amax(),
                snap.jacobians[i].amax(),
            ));
            let tw = snap.point_twists[i].to_vector();
            let jq = &snap.jacobians[i] * &qdot;
            lin_err = lin_err.max((DVector::from_column_slice(tw.as_slice()) - jq).amax());
        }
        j_err = j_err.max(rel(
            (&fd_j[n] - &snap.camera_jacobian).amax(),
            snap.camera_jacobian.amax(),
        ));

        let mut sp = state.clone();
        let mut sm = state.clone();
        sp.set_q(&(&q + &qdot * eps));
        sm.set_q(&(&q - &qdot * eps));
        let p = forward_kinematics(&sp, &geom).expect("in-bound state");
        let m = forward_kinematics(&sm, &geom).expect("in-bound state");
        for i in 0..n {
            let fd = (&p.jacobians[i] - &m.jacobians[i]) / (2.0 * eps);
            let scale = snap.jacobian_dots[i].amax().max(snap.jacobians[i].amax());
            jd_err = jd_err.max(rel((fd - &snap.jacobian_dots[i]).amax(), scale));
        }
    }
    alloc::vec![
        OracleResult {
            name: "body Jacobian vs pose differences",
            max_error: j_err,
            tolerance: 1e-4,
            samples
        },
        OracleResult {
            name: "Jacobian rate vs Jacobian differences",
            max_error: jd_err,
            tolerance: 1e-4,
            samples
        },
        OracleResult {
            name: "twist equals Jacobian times rates",
            max_error: lin_err,
            tolerance: 1e-9,
            samples
        },
    ]
}

/// Feature rates from moving the camera against `L ϱ_c`, using the exact
/// plane through each random line.
pub fn interaction_matrix(seed: u64, samples: usize) -> Vec<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 1e-6;
    let mut worst = 0f64;
    let mut done = 0;
    while done < samples {
        let camera = random_pose(&mut rng);
        let in_front = |rng: &mut ChaCha8Rng| -> Vector3<f64> {
            Vector3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(0.5..2.0),
            )
        };
        let (c1, c2, c3) = (in_front(&mut rng), in_front(&mut rng), in_front(&mut rng));
        let n: Vector3<f64> = (c2 - c1).cross(&(c3 - c1));
        let d: f64 = -n.dot(&c1);
        // Skip planes passing near the optical center.
        if n.norm() < 1e-3 || (d / n.norm()).abs() < 0.1 || (c2 - c1).norm() < 0.1 {
            continue;
        }
        let plane = Plane::new(n.x, n.y, n.z, d);
        let seg = Segment {
            id: 0,
            start: camera.transform_point(&c1),
            end: camera.transform_point(&c2),
        };
        let twist = random_twist(&mut rng, 1.0, 1.0);
        let Ok((theta, rho)) = project_line(&camera, &seg) else {
            continue;
        };
        let plus = camera.compose(&exp_se3(&twist, eps));
        let minus = camera.compose(&exp_se3(&twist, -eps));
        let (Ok(sp), Ok(sm)) = (project_line(&plus, &seg), project_line(&minus, &seg)) else {
            continue;
        };
        let fd = nalgebra::Vector2::new(wrap_angle(sp.0 - sm.0), sp.1 - sm.1) / (2.0 * eps);
        let l = interaction_row(theta, rho, &plane).expect("plane off the optical center");
        let predicted = l * twist.to_vector();
        // Lines that graze the image center have tiny rates; normalize by the twist too.
        let scale = fd.norm().max(1e-3 * twist.to_vector().norm());
        worst = worst.max((fd - predicted).norm() / scale);
        done += 1;
    }
    alloc::vec![OracleResult {
        name: "interaction matrix vs projection differences",
        max_error: worst,
        tolerance: 1e-3,
        samples,
    }]
}

/// All checks with the default sample counts.
pub fn run_all(seed: u64) -> Vec<OracleResult> {
    let mut out = lie_identities(seed, 10_000);
    out.extend(tangent_operators(seed.wrapping_add(1), 1_000));
    out.extend(jacobians(seed.wrapping_add(2), 100));
    out.extend(interaction_matrix(seed.wrapping_add(3), 100));
    out
}
