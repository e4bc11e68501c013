//! Scalar abstraction shared by the numeric modules.
//!
//! Everything below the simulation engine is written against [`Real`] so the
//! same formulas can run in `f32` or `f64`. The engine itself fixes `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// dB to linear power ratio.
#[inline]
pub fn db_to_lin<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Linear power ratio to dB.
#[inline]
pub fn lin_to_db<T: Real>(lin: T) -> T {
    T::lit(10.0) * lin.log10()
}

/// dBm to watts.
#[inline]
pub fn dbm_to_watt<T: Real>(dbm: T) -> T {
    db_to_lin(dbm - T::lit(30.0))
}

/// Watts to dBm.
#[inline]
pub fn watt_to_dbm<T: Real>(w: T) -> T {
    lin_to_db(w) + T::lit(30.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip() {
        for db in [-120.0_f64, -3.0, 0.0, 6.02, 40.0] {
            assert!((lin_to_db(db_to_lin(db)) - db).abs() < 1e-12);
        }
        assert!((watt_to_dbm(40.0_f64) - 46.0206).abs() < 1e-4);
        assert!((dbm_to_watt(30.0_f32) - 1.0).abs() < 1e-6);
    }
}
