//! Float helpers routed through `libm` so results do not depend on whether
//! the crate is built with `std`.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn exp_f32(x: f32) -> f32 {
    libm::expf(x)
}

#[inline]
pub fn ln_f32(x: f32) -> f32 {
    libm::logf(x)
}

#[inline]
pub fn sqrt_f32(x: f32) -> f32 {
    libm::sqrtf(x)
}

#[inline]
pub fn tanh_f32(x: f32) -> f32 {
    libm::tanhf(x)
}

/// Complementary error function (Numerical Recipes rational approximation,
/// absolute error below 1.2e-7 — plenty for p-values quoted to two digits).
pub fn erfc(x: f64) -> f64 {
    let z = abs(x);
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let ans = t * exp(poly);
    if x >= 0.0 { ans } else { 2.0 - ans }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / core::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_points() {
        // erfc(0) = 1, erfc(1) = 0.157299..., erfc(-1) = 1.842700...
        assert!(abs(erfc(0.0) - 1.0) < 1e-7);
        assert!(abs(erfc(1.0) - 0.15729920705) < 1e-6);
        assert!(abs(erfc(-1.0) - 1.84270079295) < 1e-6);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!(abs(normal_cdf(0.0) - 0.5) < 1e-7);
        assert!(abs(normal_cdf(1.96) - 0.9750021) < 1e-5);
        assert!(abs(normal_cdf(-1.96) - 0.0249979) < 1e-5);
    }
}
