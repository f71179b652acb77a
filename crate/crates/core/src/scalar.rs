//! Floating-point abstraction shared by every numerical module.
//!
//! All link-level math (probabilities, pathloss, steering vectors, gains,
//! SINR) is written against [`Real`], so the simulator can run in `f64`
//! (the default) or `f32` for cheaper sweeps.

use std::fmt::{Debug, Display};
use std::num::ParseFloatError;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used throughout the simulator.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + FromStr<Err = ParseFloatError>
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` constant, rounding to nearest for narrower types.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Uniform sample on `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal sample.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform sample on `[lo, hi)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        lo + (hi - lo) * Self::unit(rng)
    }

    fn db_to_linear(self) -> Self {
        Self::lit(10.0).powf(self / Self::lit(10.0))
    }

    /// `10·log10(x)`; zero maps to negative infinity.
    fn linear_to_db(self) -> Self {
        Self::lit(10.0) * self.log10()
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardUniform as Distribution<$t>>::sample(&StandardUniform, rng)
            }

            #[inline]
            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
