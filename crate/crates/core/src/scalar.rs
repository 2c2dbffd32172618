//! Scalar abstraction for cost arithmetic.
//!
//! Geometry lives on an integer grid ([`Length`]); only costs, weights and
//! annealing temperatures are real-valued. Those are generic over [`Scalar`],
//! implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Integer grid length used for coordinates, widths and heights.
pub type Length = i64;

/// Real scalar used for costs, weights and temperatures.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts a grid length. Exact for lengths below 2^24 (f32) / 2^53 (f64).
    fn from_len(v: Length) -> Self {
        Self::from_i64(v).expect("grid length representable as scalar")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}
