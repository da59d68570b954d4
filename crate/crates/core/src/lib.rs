//! Measure spaces of homogeneous type, function norms on them, and the
//! Maz'ya–Shaposhnikova type limit `lim_{s→0} s^{1/q} ‖G_s^{1/q}‖_Y`.

pub mod error;
pub mod logscalar;
pub mod conditions;
pub mod family;
pub mod io;
pub mod norms;
pub mod ms;
pub mod operators;
pub mod scenarios;
pub mod space;

pub use error::{Error, Result};
pub use logscalar::LogScalar;
