//! Scalar abstraction: training runs in f32; f64 exists for the
//! finite-difference gradient checker.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn maximum(self, other: Self) -> Self;
    fn is_finite(self) -> bool;
}

impl Real for f32 {
    const ZERO: f32 = 0.0;
    const ONE: f32 = 1.0;

    fn from_f64(x: f64) -> f32 {
        x as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn exp(self) -> f32 {
        libm::expf(self)
    }

    fn ln(self) -> f32 {
        libm::logf(self)
    }

    fn sqrt(self) -> f32 {
        libm::sqrtf(self)
    }

    fn tanh(self) -> f32 {
        libm::tanhf(self)
    }

    fn maximum(self, other: f32) -> f32 {
        if self > other { self } else { other }
    }

    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

impl Real for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;

    fn from_f64(x: f64) -> f64 {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn exp(self) -> f64 {
        libm::exp(self)
    }

    fn ln(self) -> f64 {
        libm::log(self)
    }

    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }

    fn tanh(self) -> f64 {
        libm::tanh(self)
    }

    fn maximum(self, other: f64) -> f64 {
        if self > other { self } else { other }
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}
