use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the metrics and reports are computed in: f32 or f64.
pub trait Score:
    Float + FromPrimitive + Debug + Display + FromStr + Default + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Converts an `f64` constant or count into the scalar.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite value representable in scalar")
    }

    fn ratio(num: usize, den: usize) -> Self {
        Self::of(num as f64) / Self::of(den as f64)
    }
}

impl Score for f32 {}
impl Score for f64 {}
