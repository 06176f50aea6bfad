//! Fréchet distance between Gaussians fitted to two embedding sets:
//! |mu_x - mu_y|^2 + Tr(Sx + Sy - 2 (Sx Sy)^{1/2}).

use alloc::vec::Vec;

use super::linalg::{matmul_square, sqrtm_psd, sym_eigen};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    EmptyInput,
    DimensionMismatch,
    TooFewSamples { have: usize, need: usize },
    NumericalFailure,
    InsufficientActives { protein: alloc::string::String },
}

impl core::fmt::Display for MetricError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetricError::EmptyInput => write!(f, "empty input set"),
            MetricError::DimensionMismatch => write!(f, "embedding dimensions differ"),
            MetricError::TooFewSamples { have, need } => {
                write!(f, "need at least {need} samples, have {have}")
            }
            MetricError::NumericalFailure => {
                write!(f, "covariance product has a clearly negative eigenvalue")
            }
            MetricError::InsufficientActives { protein } => {
                write!(f, "protein {protein} has too few actives")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricError {}

const EIG_CLAMP: f64 = 1e-8;

fn mean_and_cov(xs: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let mut mean = alloc::vec![0.0; dim];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    // Sample covariance (n - 1 denominator).
    let mut cov = alloc::vec![0.0; dim * dim];
    for x in xs {
        for i in 0..dim {
            let ci = x[i] - mean[i];
            for j in 0..dim {
                cov[i * dim + j] += ci * (x[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for c in cov.iter_mut() {
        *c /= denom;
    }
    (mean, cov)
}

/// Squared Fréchet distance between the Gaussian fits of X and Y. The
/// matrix square root goes through the symmetric form
/// (Sx^{1/2} Sy Sx^{1/2})^{1/2}; eigenvalues below -1e-8 are an error,
/// small negatives clamp to zero.
pub fn frechet_distance(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64, MetricError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if x.len() < 2 || y.len() < 2 {
        return Err(MetricError::TooFewSamples {
            have: x.len().min(y.len()),
            need: 2,
        });
    }
    let dim = x[0].len();
    if x.iter().chain(y.iter()).any(|v| v.len() != dim) {
        return Err(MetricError::DimensionMismatch);
    }

    let (mx, sx) = mean_and_cov(x, dim);
    let (my, sy) = mean_and_cov(y, dim);

    let mut mean_term = 0.0;
    for i in 0..dim {
        let d = mx[i] - my[i];
        mean_term += d * d;
    }

    let sqrt_sx = sqrtm_psd(&sx, dim, EIG_CLAMP).ok_or(MetricError::NumericalFailure)?;
    let inner = matmul_square(&matmul_square(&sqrt_sx, &sy, dim), &sqrt_sx, dim);
    // inner is symmetric up to rounding; symmetrize before eigen.
    let mut sym = inner.clone();
    for i in 0..dim {
        for j in 0..dim {
            sym[i * dim + j] = 0.5 * (inner[i * dim + j] + inner[j * dim + i]);
        }
    }
    let eig = sym_eigen(&sym, dim);
    let mut tr_sqrt = 0.0;
    for &l in &eig.values {
        if l < -EIG_CLAMP {
            return Err(MetricError::NumericalFailure);
        }
        tr_sqrt += math::sqrt(l.max(0.0));
    }

    let tr_x: f64 = (0..dim).map(|i| sx[i * dim + i]).sum();
    let tr_y: f64 = (0..dim).map(|i| sy[i * dim + i]).sum();
    Ok((mean_term + tr_x + tr_y - 2.0 * tr_sqrt).max(0.0))
}
