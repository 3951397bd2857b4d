//! Observer design for systems with a matrix Lie group symmetry.
//!
//! The crate is organised bottom-up:
//!
//! * [`lie`]: SO(3)/SE(3) elements, their algebras, exp/log, Adjoint and the
//!   bi-invariant inner product.
//! * [`actions`]: group actions on points (vectors, directions, the group
//!   itself, SLAM pose/landmark tuples), infinitesimal generators and
//!   numerical equivariance certificates.
//! * [`bundle`]: cross-sections splitting a state into base and fiber
//!   coordinates, and the matching split of equivariant vector fields.
//! * [`observer`]: the gradient observer on the group with autonomous error
//!   dynamics.
//! * [`systems`]: attitude, sphere and SLAM examples wired into the above.
//! * [`integrate`]: fixed-step Lie group integrators.
//!
//! Everything is generic over a [`Real`] scalar; `f64` aliases live at the
//! crate root.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod bundle;
mod error;
pub mod integrate;
pub mod lie;
pub mod observer;
pub mod random;
pub mod systems;

pub use error::{Error, Result};

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Scalar type the geometry is written over.
///
/// Implemented for `f32` and `f64`. Tolerances that guard group membership
/// scale with the machine epsilon of the type, see [`Real::membership_tol`].
pub trait Real: RealField + Copy + ToPrimitive {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion used for reporting and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Frobenius tolerance used when validating `RᵀR = I`.
    fn membership_tol() -> Self {
        let eps = Self::default_epsilon() * Self::lit(64.0);
        let floor = Self::lit(1e-9);
        if eps > floor {
            eps
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type GroupElement = lie::GroupElement<f64>;
pub type AlgebraElement = lie::AlgebraElement<f64>;
pub type Metric = lie::Metric<f64>;
pub type Point = actions::Point<f64>;
pub type SlamState = actions::SlamState<f64>;
pub type BundlePoint = bundle::BundlePoint<f64>;
pub type BaseCoordinate = bundle::BaseCoordinate<f64>;
pub type ObserverProblem = observer::ObserverProblem<f64>;
pub type ObserverState = observer::ObserverState<f64>;
pub type IntegratorConfig = integrate::IntegratorConfig<f64>;
pub type Trajectory = integrate::Trajectory<f64>;
