//! Floating point scalar abstraction.
//!
//! Everything that evaluates admissible functions or runs transforms is
//! generic over [`Real`]. Lattice arithmetic never touches this trait; it
//! stays in exact integers (see [`crate::intlat`]).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// `exp(-2 pi i * num / den)` with the fraction reduced mod 1 in exact
    /// integer arithmetic before the angle is formed.
    fn unit_root(num: i128, den: i128) -> Complex<Self> {
        debug_assert!(den > 0);
        let r = num.rem_euclid(den);
        if r == 0 {
            return Complex::new(Self::one(), Self::zero());
        }
        if 2 * r == den {
            return Complex::new(-Self::one(), Self::zero());
        }
        if 4 * r == den {
            return Complex::new(Self::zero(), -Self::one());
        }
        if 4 * r == 3 * den {
            return Complex::new(Self::zero(), Self::one());
        }
        let angle = -Self::TAU() * Self::lit(r as f64 / den as f64);
        Complex::new(angle.cos(), angle.sin())
    }
}

impl Real for f32 {}
impl Real for f64 {}
