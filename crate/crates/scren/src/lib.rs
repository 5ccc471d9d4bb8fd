//! Numerical toolkit for multi-qudit entanglement monogamy.
//!
//! The crate builds generalized W-class states, their coherent and partially
//! coherent superpositions with the vacuum, and evaluates negativity-based
//! entanglement measures on them: pure-state negativity, SCREN (the square of
//! the convex-roof extended negativity), qubit tangle, and the multi-party
//! SCREN residuals entering the monogamy and strong-monogamy inequalities.
//! Mixed-state measures are computed by multi-start derivative-free
//! minimization over unitarily parameterized pure-state ensembles.
//!
//! All core math is generic over the real scalar type through
//! [`Scalar`]; `f64` aliases for the main types live at the crate root.
//!
//! Conventions:
//! - parties are indexed from 0 in the API (serialized reports use 1-based
//!   labels);
//! - the product basis is mixed-radix row-major with party 0 as the most
//!   significant digit;
//! - negativity is unnormalized, `‖ρ^{T_B}‖₁ − 1`.

pub mod error;
pub mod io;
pub mod layout;
pub mod linalg;
pub mod measures;
pub mod monogamy;
pub mod roof;
pub mod states;

use nalgebra::RealField;

pub use error::{Error, Result};
pub use layout::{PartitionMap, SubsystemLayout};

/// Real scalar type the numerics are generic over (`f32`, `f64`).
pub trait Scalar: RealField + Copy {}
impl<T: RealField + Copy> Scalar for T {}

/// Converts an `f64` constant (tolerances etc.) into the working scalar.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Lossy conversion back to `f64` for diagnostics and serialization.
pub(crate) fn to_f64<T: Scalar>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

pub type PureState64 = linalg::PureState<f64>;
pub type DensityMatrix64 = linalg::DensityMatrix<f64>;
pub type WClassCoefficients64 = states::WClassCoefficients<f64>;
pub type PcsState64 = states::PcsState<f64>;
pub type Decomposition64 = roof::Decomposition<f64>;
pub type RoofResult64 = roof::RoofResult<f64>;
pub type MeasureValue64 = measures::MeasureValue<f64>;
pub type MonogamyReport64 = monogamy::MonogamyReport<f64>;

pub type PureState32 = linalg::PureState<f32>;
pub type DensityMatrix32 = linalg::DensityMatrix<f32>;
pub type WClassCoefficients32 = states::WClassCoefficients<f32>;
pub type PcsState32 = states::PcsState<f32>;
