//! Constant-strain kinematics of a UAV carrying a single-section continuum arm.
//!
//! The generalized coordinates are `q_t = [q_u; q_a]`, where `q_u = [x, y, z, yaw]`
//! drives the UAV through `g_u = g_s · exp(embed(q_u))` and `q_a` are the arm's
//! bending curvatures. The arm strain `ξ = B q_a + ξ*` is constant along the
//! backbone, so each significant point is reached by one exponential
//! `g_{a_i} = g_{a_{i-1}} · exp(h_i ξ)`.
//!
//! All twists and Jacobians are body quantities expressed in the local frame
//! they describe. The tangent operator is the right Jacobian of the exponential,
//! which yields the recursion
//!
//! ```text
//! ϱ_i = Ad(E_i⁻¹) ϱ_{i-1} + h_i T(h_i ξ) B q̇_a,        E_i = exp(h_i ξ)
//! J̇_i = Ad(E_i⁻¹) J̇_{i-1} − ad(η_i) Ad(E_i⁻¹) J_{i-1} + h_i Ṫ_i B̄
//! ```
//!
//! with `η_i = h_i T_i B q̇_a` and `B̄ = [0 | B]` padding out the UAV columns.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix6, Vector3, Vector6};

use crate::liegroup::{ad_small, adjoint, exp_se3, Pose, Twist};
use crate::{Error, Result};

/// UAV joint count: x, y, z, yaw.
pub const UAV_DOF: usize = 4;

/// Below this angle the tangent-operator coefficients use their Taylor series.
const SERIES_ANGLE: f64 = 0.3;

/// Generalized coordinates and rates of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub q_u: DVector<f64>,
    pub q_a: DVector<f64>,
    pub qdot_u: DVector<f64>,
    pub qdot_a: DVector<f64>,
}

impl ArmState {
    /// At rest at the origin of the chart.
    pub fn zeros(n_a: usize) -> Self {
        Self {
            q_u: DVector::zeros(UAV_DOF),
            q_a: DVector::zeros(n_a),
            qdot_u: DVector::zeros(UAV_DOF),
            qdot_a: DVector::zeros(n_a),
        }
    }

    pub fn dof(&self) -> usize {
        self.q_u.len() + self.q_a.len()
    }

    /// Stacked `q_t = [q_u; q_a]`.
    pub fn q(&self) -> DVector<f64> {
        stack(&self.q_u, &self.q_a)
    }

    /// Stacked `q̇_t = [q̇_u; q̇_a]`.
    pub fn qdot(&self) -> DVector<f64> {
        stack(&self.qdot_u, &self.qdot_a)
    }

    pub fn set_q(&mut self, q: &DVector<f64>) {
        let n_u = self.q_u.len();
        self.q_u.copy_from(&q.rows(0, n_u));
        self.q_a.copy_from(&q.rows(n_u, q.len() - n_u));
    }

    pub fn set_qdot(&mut self, qdot: &DVector<f64>) {
        let n_u = self.qdot_u.len();
        self.qdot_u.copy_from(&qdot.rows(0, n_u));
        self.qdot_a.copy_from(&qdot.rows(n_u, qdot.len() - n_u));
    }
}

fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(a);
    v.rows_mut(a.len(), b.len()).copy_from(b);
    v
}

/// Static description of the arm and its mounts.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmGeometry {
    pub length: f64,
    pub abscissae: Vec<f64>,
    pub steps: Vec<f64>,
    /// 6×n_a strain selection matrix.
    pub b: DMatrix<f64>,
    pub xi_star: Twist,
    /// UAV pose at `q_u = 0`.
    pub g_s: Pose,
    /// Arm base in the UAV frame.
    pub g_as: Pose,
    /// Tip frame in the frame of the last significant point.
    pub tip_mount: Pose,
    /// Camera frame in the tip frame.
    pub camera_mount: Pose,
    pub curvature_bound: f64,
}

impl ArmGeometry {
    /// Bending-only arm of length `length` sampled at `n_points` Gauss–Legendre
    /// nodes, with identity mounts.
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        let (abscissae, steps) = quadrature_abscissae(n_points, length)?;
        let mut b = DMatrix::zeros(6, 2);
        b[(0, 0)] = 1.0;
        b[(1, 1)] = 1.0;
        Ok(Self {
            length,
            abscissae,
            steps,
            b,
            xi_star: Twist::new(Vector3::zeros(), Vector3::z()),
            g_s: Pose::identity(),
            g_as: Pose::identity(),
            tip_mount: Pose::identity(),
            camera_mount: Pose::identity(),
            curvature_bound: 30.0,
        })
    }

    pub fn n_a(&self) -> usize {
        self.b.ncols()
    }

    /// Number of Gauss–Legendre nodes, excluding the base and the tip.
    pub fn n_points(&self) -> usize {
        self.abscissae.len().saturating_sub(2)
    }

    pub fn dof(&self) -> usize {
        UAV_DOF + self.n_a()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || self.abscissae.len() < 2 {
            return Err(Error::Config("arm length and abscissae"));
        }
        if self.steps.len() + 1 != self.abscissae.len() || self.steps.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("abscissae must be strictly increasing"));
        }
        let last = self.abscissae[self.abscissae.len() - 1];
        if (last - self.length).abs() > 1e-12 * self.length.max(1.0) {
            return Err(Error::Config("last abscissa must equal the arm length"));
        }
        if self.b.nrows() != 6 || crate::linalg::rank(&self.b, 1e-12) != self.b.ncols() {
            return Err(Error::Config("B must be 6×n_a with full column rank"));
        }
        Ok(())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes on `[-1, 1]`, ascending.
pub fn gauss_legendre_nodes(n: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
    }
    nodes
}

/// Significant-point abscissae `[0, X_1, …, X_n, l_c]` and steps `h_i`.
///
/// The interior points are the `n_points` Gauss–Legendre nodes mapped to
/// `[0, l_c]`; the tip `l_c` is appended so the last point is the arm end.
pub fn quadrature_abscissae(n_points: usize, length: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_points < 2 {
        return Err(Error::Config("n_points must be at least 2"));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Config("arm length must be positive"));
    }
    let mut xs = Vec::with_capacity(n_points + 2);
    xs.push(0.0);
    xs.extend(
        gauss_legendre_nodes(n_points)
            .into_iter()
            .map(|t| 0.5 * length * (t + 1.0)),
    );
    xs.push(length);
    let steps = xs.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((xs, steps))
}

/// Constant strain `B q_a + ξ*`.
pub fn strain_of(q_a: &DVector<f64>, geom: &ArmGeometry) -> Result<Twist> {
    if q_a.len() != geom.n_a() {
        return Err(Error::Dimension {
            expected: geom.n_a(),
            got: q_a.len(),
        });
    }
    let bq = &geom.b * q_a;
    let v = Vector6::from_iterator(bq.iter().copied()) + geom.xi_star.to_vector();
    Ok(Twist::from_vector(&v))
}

/// Twist slots of the UAV coordinates: x, y, z into linear, yaw into angular z.
const UAV_SLOTS: [usize; UAV_DOF] = [3, 4, 5, 2];

/// Lifts `[x, y, z, yaw]` into a twist with zero roll and pitch.
pub fn embed_uav(q_u: &DVector<f64>) -> Twist {
    let mut v = Vector6::zeros();
    for (k, &slot) in UAV_SLOTS.iter().enumerate() {
        v[slot] = q_u[k];
    }
    Twist::from_vector(&v)
}

/// 6×4 embedding matrix with `embed_uav(q) = E q`.
pub fn uav_embedding() -> DMatrix<f64> {
    let mut e = DMatrix::zeros(6, UAV_DOF);
    for (k, &slot) in UAV_SLOTS.iter().enumerate() {
        e[(slot, k)] = 1.0;
    }
    e
}

/// `g_u = g_s · exp(embed(q_u))`.
pub fn uav_pose(q_u: &DVector<f64>, g_s: &Pose) -> Result<Pose> {
    if q_u.len() != UAV_DOF {
        return Err(Error::Dimension {
            expected: UAV_DOF,
            got: q_u.len(),
        });
    }
    Ok(g_s.compose(&exp_se3(&embed_uav(q_u), 1.0)))
}

struct Coefficients {
    c: [f64; 4],
    /// `(1/θ) dc/dθ`, so that `dc/dt = g · (ω·ω̇)`.
    g: [f64; 4],
}

fn tangent_coefficients(theta: f64) -> Coefficients {
    if theta < SERIES_ANGLE {
        let u = theta * theta;
        let series = [
            [-0.5, 0.0, 1.0 / 720.0, -1.0 / 20160.0, 1.0 / 1209600.0],
            [
                1.0 / 6.0,
                0.0,
                -1.0 / 5040.0,
                1.0 / 181440.0,
                -1.0 / 13305600.0,
            ],
            [
                -1.0 / 24.0,
                1.0 / 360.0,
                -1.0 / 13440.0,
                1.0 / 907200.0,
                -1.0 / 95800320.0,
            ],
            [
                1.0 / 120.0,
                -1.0 / 2520.0,
                1.0 / 120960.0,
                -1.0 / 9979200.0,
                1.0 / 1245404160.0,
            ],
        ];
        let mut c = [0.0; 4];
        let mut g = [0.0; 4];
        for (k, a) in series.iter().enumerate() {
            c[k] = a[0] + u * (a[1] + u * (a[2] + u * (a[3] + u * a[4])));
            g[k] = 2.0 * (a[1] + u * (2.0 * a[2] + u * (3.0 * a[3] + 4.0 * u * a[4])));
        }
        return Coefficients { c, g };
    }
    let (s, co) = (libm::sin(theta), libm::cos(theta));
    let t = theta;
    let num = [
        -(4.0 - t * s - 4.0 * co),
        4.0 * t - 5.0 * s + t * co,
        -(2.0 - t * s - 2.0 * co),
        2.0 * t - 3.0 * s + t * co,
    ];
    let dnum = [
        -(3.0 * s - t * co),
        4.0 - 4.0 * co - t * s,
        -(s - t * co),
        2.0 - 2.0 * co - t * s,
    ];
    let mut c = [0.0; 4];
    let mut g = [0.0; 4];
    for k in 0..4 {
        let p = (k + 2) as i32;
        let den = 2.0 * libm::pow(t, p as f64);
        let dden = 2.0 * p as f64 * libm::pow(t, (p - 1) as f64);
        c[k] = num[k] / den;
        g[k] = (dnum[k] - c[k] * dden) / den / t;
    }
    Coefficients { c, g }
}

/// Right Jacobian of the SE(3) exponential at `scale·x`:
/// `d/dt exp(scale·x) = exp(scale·x) · hat6(T · scale·ẋ)`.
pub fn tangent_operator(x: &Twist, scale: f64) -> Matrix6<f64> {
    let xs = x.scaled(scale);
    let coef = tangent_coefficients(xs.angular.norm());
    let ad = ad_small(&xs);
    let mut out = Matrix6::identity();
    let mut pow = Matrix6::identity();
    for c in coef.c {
        pow *= ad;
        out += pow * c;
    }
    out
}

/// Time derivative of [`tangent_operator`] when `x` moves with rate `xdot`.
pub fn tangent_operator_dot(x: &Twist, xdot: &Twist, scale: f64) -> Matrix6<f64> {
    let xs = x.scaled(scale);
    let xds = xdot.scaled(scale);
    let coef = tangent_coefficients(xs.angular.norm());
    let wdw = xs.angular.dot(&xds.angular);
    let a = ad_small(&xs);
    let da = ad_small(&xds);
    let mut powers = [Matrix6::identity(); 5];
    for k in 1..5 {
        powers[k] = powers[k - 1] * a;
    }
    let mut out = Matrix6::zeros();
    for k in 1..=4 {
        let mut d_pow = Matrix6::zeros();
        for j in 0..k {
            d_pow += powers[j] * da * powers[k - 1 - j];
        }
        out += powers[k] * (coef.g[k - 1] * wdw) + d_pow * coef.c[k - 1];
    }
    out
}

fn to_dmatrix(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(6, 6, m.as_slice())
}

/// Everything the controller and simulator need from one kinematics pass.
#[derive(Debug, Clone)]
pub struct KinematicsSnapshot {
    pub uav_pose: Pose,
    pub base_pose: Pose,
    /// Poses of the significant points after the base, ending at `X = l_c`.
    pub point_poses: Vec<Pose>,
    pub point_twists: Vec<Twist>,
    pub jacobians: Vec<DMatrix<f64>>,
    pub jacobian_dots: Vec<DMatrix<f64>>,
    pub tip_pose: Pose,
    pub camera_pose: Pose,
    pub tip_twist: Twist,
    pub camera_twist: Twist,
    pub tip_jacobian: DMatrix<f64>,
    pub camera_jacobian: DMatrix<f64>,
}

/// Poses, body twists, Jacobians and Jacobian rates of every frame on the chain.
pub fn forward_kinematics(state: &ArmState, geom: &ArmGeometry) -> Result<KinematicsSnapshot> {
    let n_a = geom.n_a();
    let dof = UAV_DOF + n_a;
    if state.q_u.len() != UAV_DOF || state.qdot_u.len() != UAV_DOF {
        return Err(Error::Dimension {
            expected: UAV_DOF,
            got: state.q_u.len().min(state.qdot_u.len()),
        });
    }
    if state.qdot_a.len() != n_a {
        return Err(Error::Dimension {
            expected: n_a,
            got: state.qdot_a.len(),
        });
    }
    let norm = state.q_a.norm();
    if !(norm <= geom.curvature_bound) {
        return Err(Error::CurvatureBound {
            norm,
            bound: geom.curvature_bound,
        });
    }
    let xi = strain_of(&state.q_a, geom)?;
    let bq_dot = &geom.b * &state.qdot_a;
    let xi_dot = Twist::from_vector(&Vector6::from_iterator(bq_dot.iter().copied()));

    let e = uav_embedding();
    let q_emb = embed_uav(&state.q_u);
    let qd_emb = embed_uav(&state.qdot_u);
    let g_u = geom.g_s.compose(&exp_se3(&q_emb, 1.0));
    let t_u = to_dmatrix(&tangent_operator(&q_emb, 1.0));
    let td_u = to_dmatrix(&tangent_operator_dot(&q_emb, &qd_emb, 1.0));
    let mut j_u = DMatrix::zeros(6, dof);
    j_u.columns_mut(0, UAV_DOF).copy_from(&(&t_u * &e));
    let mut jd_u = DMatrix::zeros(6, dof);
    jd_u.columns_mut(0, UAV_DOF).copy_from(&(&td_u * &e));

    let ad_base = to_dmatrix(&adjoint(&geom.g_as.inverse()));
    let mut pose = g_u.compose(&geom.g_as);
    let base_pose = pose;
    let mut jac = &ad_base * &j_u;
    let mut jac_dot = &ad_base * &jd_u;

    let n = geom.steps.len();
    let mut point_poses = Vec::with_capacity(n);
    let mut point_twists = Vec::with_capacity(n);
    let mut jacobians = Vec::with_capacity(n);
    let mut jacobian_dots = Vec::with_capacity(n);
    let qdot = state.qdot();
    for &h in &geom.steps {
        let step = exp_se3(&xi, h);
        pose = pose.compose(&step);
        let ad_inv = to_dmatrix(&adjoint(&step.inverse()));
        let t = tangent_operator(&xi, h);
        let td = tangent_operator_dot(&xi, &xi_dot, h);
        let t_b = to_dmatrix(&(t * h)) * &geom.b;
        let td_b = to_dmatrix(&(td * h)) * &geom.b;
        let eta = &t_b * &state.qdot_a;
        let ad_eta = to_dmatrix(&ad_small(&Twist::from_vector(&Vector6::from_iterator(
            eta.iter().copied(),
        ))));
        let moved = &ad_inv * &jac;
        let mut next_dot = &ad_inv * &jac_dot - &ad_eta * &moved;
        let mut next = moved;
        {
            let mut cols = next.columns_mut(UAV_DOF, n_a);
            cols += &t_b;
        }
        {
            let mut cols = next_dot.columns_mut(UAV_DOF, n_a);
            cols += &td_b;
        }
        jac = next;
        jac_dot = next_dot;
        point_poses.push(pose);
        point_twists.push(twist_of(&(&jac * &qdot)));
        jacobians.push(jac.clone());
        jacobian_dots.push(jac_dot.clone());
    }

    let tip_pose = pose.compose(&geom.tip_mount);
    let camera_pose = tip_pose.compose(&geom.camera_mount);
    let tip_jacobian = to_dmatrix(&adjoint(&geom.tip_mount.inverse())) * &jac;
    let camera_jacobian = to_dmatrix(&adjoint(&geom.camera_mount.inverse())) * &tip_jacobian;
    let tip_twist = twist_of(&(&tip_jacobian * &qdot));
    let camera_twist = twist_of(&(&camera_jacobian * &qdot));
    Ok(KinematicsSnapshot {
        uav_pose: g_u,
        base_pose,
        point_poses,
        point_twists,
        jacobians,
        jacobian_dots,
        tip_pose,
        camera_pose,
        tip_twist,
        camera_twist,
        tip_jacobian,
        camera_jacobian,
    })
}

fn twist_of(v: &DVector<f64>) -> Twist {
    Twist::from_vector(&Vector6::from_iterator(v.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_nodes() {
        let (xs, hs) = quadrature_abscissae(2, 1.0).unwrap();
        let r = 0.5 / 3f64.sqrt();
        assert_relative_eq!(xs[1], 0.5 - r, epsilon = 1e-15);
        assert_relative_eq!(xs[2], 0.5 + r, epsilon = 1e-15);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[3], 1.0);
        assert_relative_eq!(hs.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(quadrature_abscissae(1, 1.0).is_err());
    }

    #[test]
    fn straight_arm_tip() {
        let geom = ArmGeometry::new(0.4, 5).unwrap();
        let snap = forward_kinematics(&ArmState::zeros(2), &geom).unwrap();
        assert_relative_eq!(
            snap.tip_pose.translation,
            Vector3::new(0.0, 0.0, 0.4),
            epsilon = 1e-15
        );
        assert_eq!(snap.point_poses.len(), 6);
    }

    #[test]
    fn tangent_at_zero_is_identity() {
        assert_eq!(tangent_operator(&Twist::zero(), 1.0), Matrix6::identity());
        let x = Twist::new(Vector3::new(0.3, 0.1, -0.2), Vector3::new(1.0, 0.0, 0.5));
        assert_eq!(
            tangent_operator_dot(&x, &Twist::zero(), 0.7),
            Matrix6::zeros()
        );
    }

    #[test]
    fn coefficient_branches_meet() {
        let lo = tangent_coefficients(SERIES_ANGLE * (1.0 - 1e-12));
        let hi = tangent_coefficients(SERIES_ANGLE * (1.0 + 1e-12));
        for k in 0..4 {
            assert_relative_eq!(lo.c[k], hi.c[k], max_relative = 1e-9);
            assert_relative_eq!(lo.g[k], hi.g[k], max_relative = 1e-6);
        }
    }

    #[test]
    fn uav_yaw_quarter_turn() {
        let q = DVector::from_vec(alloc::vec![0.0, 0.0, 0.0, PI / 2.0]);
        let g = uav_pose(&q, &Pose::identity()).unwrap();
        assert_relative_eq!(
            g.rotation,
            crate::liegroup::rot_z(PI / 2.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn curvature_bound_rejected() {
        let geom = ArmGeometry::new(0.4, 3).unwrap();
        let mut s = ArmState::zeros(2);
        s.q_a[0] = 31.0;
        assert!(matches!(
            forward_kinematics(&s, &geom),
            Err(Error::CurvatureBound { .. })
        ));
    }
}
