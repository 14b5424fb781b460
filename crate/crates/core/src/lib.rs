//! Kinematics, line-feature visual servoing and hybrid vision/force control
//! for tendon-driven aerial continuum manipulators.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches files,
//! command lines or serialization lives in the companion `tdacm` crate.
//!
//! Layout:
//!
//! - [`liegroup`]: closed-form SE(3) operators (hat, exp, Ad, ad, Ad*).
//! - [`kinematics`]: constant-strain forward kinematics of the coupled
//!   UAV + continuum arm, with body Jacobians and their time derivatives.
//! - [`vision`]: pinhole projection of 3D lines to `(θ, ρ)` features and the
//!   line interaction matrix.
//! - [`contact`]: unilateral spring contact and wrench transforms.
//! - [`controllers`]: the cascaded fast fixed-time sliding-mode law with RBF
//!   network estimators, plus the baselines used for comparison.
//! - [`sim`]: fixed-step closed-loop simulator and the stock scenarios.
//! - [`metrics`]: RMSE / STD / IAE / ITAE indices.
//! - [`oracle`]: finite-difference self-checks behind the `check` command.
#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod contact;
pub mod controllers;
mod error;
pub mod kinematics;
pub mod liegroup;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod sim;
pub mod vision;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
