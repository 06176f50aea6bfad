//! Neural-net primitives with explicit backward passes.
//!
//! All buffers are row-major slices with explicit dimensions. Backward
//! functions accumulate into parameter gradients (`+=`) and overwrite
//! activation gradients.

use alloc::vec::Vec;

use super::real::Real;

/// `out[r, o] = sum_i x[r, i] w[i, o] + b[o]`
pub fn linear_forward<T: Real>(
    x: &[T],
    w: &[T],
    b: &[T],
    rows: usize,
    d_in: usize,
    d_out: usize,
    out: &mut [T],
) {
    debug_assert_eq!(x.len(), rows * d_in);
    debug_assert_eq!(w.len(), d_in * d_out);
    debug_assert_eq!(out.len(), rows * d_out);
    for r in 0..rows {
        let xr = &x[r * d_in..(r + 1) * d_in];
        let or = &mut out[r * d_out..(r + 1) * d_out];
        or.copy_from_slice(b);
        for (i, &xv) in xr.iter().enumerate() {
            if xv == T::ZERO {
                continue;
            }
            let wrow = &w[i * d_out..(i + 1) * d_out];
            for (o, &wv) in wrow.iter().enumerate() {
                or[o] += xv * wv;
            }
        }
    }
}

/// Backward of `linear_forward`. `dx` is overwritten; `dw`/`db` accumulate.
pub fn linear_backward<T: Real>(
    x: &[T],
    w: &[T],
    dout: &[T],
    rows: usize,
    d_in: usize,
    d_out: usize,
    dx: &mut [T],
    dw: &mut [T],
    db: &mut [T],
) {
    for v in dx.iter_mut() {
        *v = T::ZERO;
    }
    for r in 0..rows {
        let xr = &x[r * d_in..(r + 1) * d_in];
        let dor = &dout[r * d_out..(r + 1) * d_out];
        let dxr = &mut dx[r * d_in..(r + 1) * d_in];
        for (o, &d) in dor.iter().enumerate() {
            db[o] += d;
        }
        for i in 0..d_in {
            let wrow = &w[i * d_out..(i + 1) * d_out];
            let dwrow = &mut dw[i * d_out..(i + 1) * d_out];
            let xv = xr[i];
            let mut acc = T::ZERO;
            for (o, &d) in dor.iter().enumerate() {
                acc += wrow[o] * d;
                dwrow[o] += xv * d;
            }
            dxr[i] = acc;
        }
    }
}

pub const LN_EPS: f64 = 1e-5;

pub struct LayerNormCache<T> {
    /// Normalized activations per element.
    pub xhat: Vec<T>,
    /// 1 / sqrt(var + eps) per row.
    pub inv_std: Vec<T>,
}

pub fn layernorm_forward<T: Real>(
    x: &[T],
    gain: &[T],
    bias: &[T],
    rows: usize,
    d: usize,
    out: &mut [T],
) -> LayerNormCache<T> {
    let mut xhat = alloc::vec![T::ZERO; rows * d];
    let mut inv_std = alloc::vec![T::ZERO; rows];
    let eps = T::from_f64(LN_EPS);
    let inv_d = T::ONE / T::from_f64(d as f64);
    for r in 0..rows {
        let xr = &x[r * d..(r + 1) * d];
        let mut mean = T::ZERO;
        for &v in xr {
            mean += v;
        }
        mean *= inv_d;
        let mut var = T::ZERO;
        for &v in xr {
            let c = v - mean;
            var += c * c;
        }
        var *= inv_d;
        let istd = T::ONE / (var + eps).sqrt();
        inv_std[r] = istd;
        for i in 0..d {
            let xh = (xr[i] - mean) * istd;
            xhat[r * d + i] = xh;
            out[r * d + i] = gain[i] * xh + bias[i];
        }
    }
    LayerNormCache { xhat, inv_std }
}

pub fn layernorm_backward<T: Real>(
    dout: &[T],
    gain: &[T],
    cache: &LayerNormCache<T>,
    rows: usize,
    d: usize,
    dx: &mut [T],
    dgain: &mut [T],
    dbias: &mut [T],
) {
    let inv_d = T::ONE / T::from_f64(d as f64);
    for r in 0..rows {
        let dor = &dout[r * d..(r + 1) * d];
        let xh = &cache.xhat[r * d..(r + 1) * d];
        let istd = cache.inv_std[r];
        let mut sum_dy = T::ZERO;
        let mut sum_dy_xhat = T::ZERO;
        for i in 0..d {
            let dy = dor[i] * gain[i];
            sum_dy += dy;
            sum_dy_xhat += dy * xh[i];
            dgain[i] += dor[i] * xh[i];
            dbias[i] += dor[i];
        }
        for i in 0..d {
            let dy = dor[i] * gain[i];
            dx[r * d + i] = istd * (dy - inv_d * sum_dy - xh[i] * inv_d * sum_dy_xhat);
        }
    }
}

const GELU_C: f64 = 0.7978845608028654; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

/// Tanh-approximation GELU (smooth, so finite differences behave).
pub fn gelu_forward<T: Real>(x: &[T], out: &mut [T]) {
    let c = T::from_f64(GELU_C);
    let a = T::from_f64(GELU_A);
    let half = T::from_f64(0.5);
    for (o, &v) in out.iter_mut().zip(x.iter()) {
        let u = c * (v + a * v * v * v);
        *o = half * v * (T::ONE + u.tanh());
    }
}

pub fn gelu_backward<T: Real>(x: &[T], dout: &[T], dx: &mut [T]) {
    let c = T::from_f64(GELU_C);
    let a = T::from_f64(GELU_A);
    let half = T::from_f64(0.5);
    let three = T::from_f64(3.0);
    for i in 0..x.len() {
        let v = x[i];
        let u = c * (v + a * v * v * v);
        let t = u.tanh();
        let sech2 = T::ONE - t * t;
        let du = c * (T::ONE + three * a * v * v);
        let grad = half * (T::ONE + t) + half * v * sech2 * du;
        dx[i] = dout[i] * grad;
    }
}

/// Softmax over each row with an exact boolean mask: masked entries come
/// out exactly zero and rows renormalize over the survivors. A fully
/// masked row yields all zeros.
pub fn masked_softmax_rows<T: Real>(scores: &mut [T], row_len: usize, mask: &[bool]) {
    debug_assert_eq!(scores.len(), mask.len());
    let rows = scores.len() / row_len;
    for r in 0..rows {
        let row = &mut scores[r * row_len..(r + 1) * row_len];
        let m = &mask[r * row_len..(r + 1) * row_len];
        let mut max: Option<T> = None;
        for i in 0..row_len {
            if m[i] {
                max = Some(match max {
                    Some(cur) => cur.maximum(row[i]),
                    None => row[i],
                });
            }
        }
        let Some(max) = max else {
            for v in row.iter_mut() {
                *v = T::ZERO;
            }
            continue;
        };
        let mut sum = T::ZERO;
        for i in 0..row_len {
            if m[i] {
                let e = (row[i] - max).exp();
                row[i] = e;
                sum += e;
            } else {
                row[i] = T::ZERO;
            }
        }
        let inv = T::ONE / sum;
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
}

/// Backward through a masked softmax: dscore = (dprob - sum(dprob * prob)) * prob.
pub fn softmax_backward_rows<T: Real>(probs: &[T], dprobs: &[T], row_len: usize, dscores: &mut [T]) {
    let rows = probs.len() / row_len;
    for r in 0..rows {
        let p = &probs[r * row_len..(r + 1) * row_len];
        let dp = &dprobs[r * row_len..(r + 1) * row_len];
        let ds = &mut dscores[r * row_len..(r + 1) * row_len];
        let mut dot = T::ZERO;
        for i in 0..row_len {
            dot += dp[i] * p[i];
        }
        for i in 0..row_len {
            ds[i] = (dp[i] - dot) * p[i];
        }
    }
}

/// Mean cross-entropy over positions where `target != ignore_id`, plus
/// dlogits. Returns (loss, n_counted).
pub fn cross_entropy<T: Real>(
    logits: &[T],
    targets: &[u32],
    vocab: usize,
    ignore_id: u32,
    dlogits: &mut [T],
) -> (f64, usize) {
    let rows = targets.len();
    debug_assert_eq!(logits.len(), rows * vocab);
    let counted = targets.iter().filter(|&&t| t != ignore_id).count();
    for v in dlogits.iter_mut() {
        *v = T::ZERO;
    }
    if counted == 0 {
        return (0.0, 0);
    }
    let inv_count = T::ONE / T::from_f64(counted as f64);
    let mut loss = 0.0f64;
    for r in 0..rows {
        if targets[r] == ignore_id {
            continue;
        }
        let row = &logits[r * vocab..(r + 1) * vocab];
        let drow = &mut dlogits[r * vocab..(r + 1) * vocab];
        let mut max = row[0];
        for &v in row.iter() {
            max = max.maximum(v);
        }
        let mut sum = T::ZERO;
        for &v in row.iter() {
            sum += (v - max).exp();
        }
        let lse = max + sum.ln();
        let t = targets[r] as usize;
        loss += (lse - row[t]).to_f64();
        for i in 0..vocab {
            let p = (row[i] - lse).exp();
            drow[i] = p * inv_count;
        }
        drow[t] -= inv_count;
    }
    (loss / counted as f64, counted)
}

/// Inverted dropout; the cached mask already carries the 1/(1-p) scale.
pub fn dropout_forward<T: Real>(
    x: &mut [T],
    rate: f64,
    rng: &mut crate::rng::Rng,
) -> Vec<T> {
    debug_assert!((0.0..1.0).contains(&rate));
    let keep_scale = T::from_f64(1.0 / (1.0 - rate));
    let mut mask = alloc::vec![T::ZERO; x.len()];
    for i in 0..x.len() {
        if rng.f64() >= rate {
            mask[i] = keep_scale;
            x[i] *= keep_scale;
        } else {
            x[i] = T::ZERO;
        }
    }
    mask
}

pub fn dropout_backward<T: Real>(dout: &mut [T], mask: &[T]) {
    for (d, &m) in dout.iter_mut().zip(mask.iter()) {
        *d *= m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn randv(rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.normal() * 0.5).collect()
    }

    /// Central finite differences of a scalar function of a parameter
    /// vector, compared against an analytic gradient.
    fn check_grad(
        param: &mut [f64],
        grad: &[f64],
        mut f: impl FnMut(&[f64]) -> f64,
        tol: f64,
        label: &str,
    ) {
        let h = 1e-6;
        let scale = grad
            .iter()
            .fold(0.0f64, |m, &g| m.max(g.abs()))
            .max(1e-10);
        for i in 0..param.len() {
            let orig = param[i];
            param[i] = orig + h;
            let fp = f(param);
            param[i] = orig - h;
            let fm = f(param);
            param[i] = orig;
            let fd = (fp - fm) / (2.0 * h);
            let err = (fd - grad[i]).abs() / scale;
            assert!(
                err < tol,
                "{label}[{i}]: analytic {} vs fd {fd}, rel err {err}",
                grad[i]
            );
        }
    }

    #[test]
    fn linear_grads_match_finite_differences() {
        let mut rng = Rng::new(1);
        let (rows, d_in, d_out) = (3, 4, 5);
        let x = randv(&mut rng, rows * d_in);
        let mut w = randv(&mut rng, d_in * d_out);
        let mut b = randv(&mut rng, d_out);
        let proj = randv(&mut rng, rows * d_out); // fixed linear functional of output

        let loss = |x: &[f64], w: &[f64], b: &[f64]| -> f64 {
            let mut out = vec![0.0; rows * d_out];
            linear_forward(x, w, b, rows, d_in, d_out, &mut out);
            out.iter().zip(proj.iter()).map(|(o, p)| o * p).sum()
        };

        let mut dx = vec![0.0; rows * d_in];
        let mut dw = vec![0.0; d_in * d_out];
        let mut db = vec![0.0; d_out];
        linear_backward(&x, &w, &proj, rows, d_in, d_out, &mut dx, &mut dw, &mut db);

        let mut xm = x.clone();
        let wc = w.clone();
        let bc = b.clone();
        check_grad(&mut xm, &dx, |xv| loss(xv, &wc, &bc), 1e-7, "dx");
        let xc = x.clone();
        check_grad(&mut w, &dw, |wv| loss(&xc, wv, &bc), 1e-7, "dw");
        let wc = w.clone();
        check_grad(&mut b, &db, |bv| loss(&xc, &wc, bv), 1e-7, "db");
    }

    #[test]
    fn layernorm_grads_match_finite_differences() {
        let mut rng = Rng::new(2);
        let (rows, d) = (3, 6);
        let x = randv(&mut rng, rows * d);
        let mut g = vec![1.0; d];
        let mut b = vec![0.0; d];
        for v in g.iter_mut() {
            *v += rng.normal() * 0.1;
        }
        let proj = randv(&mut rng, rows * d);

        let loss = |x: &[f64], g: &[f64], b: &[f64]| -> f64 {
            let mut out = vec![0.0; rows * d];
            layernorm_forward(x, g, b, rows, d, &mut out);
            out.iter().zip(proj.iter()).map(|(o, p)| o * p).sum()
        };

        let mut out = vec![0.0; rows * d];
        let cache = layernorm_forward(&x, &g, &b, rows, d, &mut out);
        let mut dx = vec![0.0; rows * d];
        let mut dg = vec![0.0; d];
        let mut db = vec![0.0; d];
        layernorm_backward(&proj, &g, &cache, rows, d, &mut dx, &mut dg, &mut db);

        let mut xm = x.clone();
        let gc = g.clone();
        let bc = b.clone();
        check_grad(&mut xm, &dx, |xv| loss(xv, &gc, &bc), 1e-6, "ln dx");
        let xc = x.clone();
        check_grad(&mut g, &dg, |gv| loss(&xc, gv, &bc), 1e-6, "ln dg");
        let gc2 = g.clone();
        check_grad(&mut b, &db, |bv| loss(&xc, &gc2, bv), 1e-6, "ln db");
    }

    #[test]
    fn gelu_grad_matches_finite_differences() {
        let mut rng = Rng::new(3);
        let mut x = randv(&mut rng, 16);
        let proj = randv(&mut rng, 16);
        let loss = |x: &[f64]| -> f64 {
            let mut out = vec![0.0; x.len()];
            gelu_forward(x, &mut out);
            out.iter().zip(proj.iter()).map(|(o, p)| o * p).sum()
        };
        let mut dx = vec![0.0; x.len()];
        gelu_backward(&x, &proj, &mut dx);
        check_grad(&mut x, &dx, loss, 1e-7, "gelu dx");
    }

    #[test]
    fn masked_softmax_rows_sum_to_one_and_zero_masked() {
        let mut scores = vec![0.3, -1.0, 2.0, 0.0, 5.0, 5.0, 5.0, 5.0];
        let mask = vec![true, true, false, true, false, false, false, false];
        masked_softmax_rows(&mut scores, 4, &mask);
        let s0: f64 = scores[..4].iter().sum();
        assert!((s0 - 1.0).abs() < 1e-12);
        assert_eq!(scores[2], 0.0);
        assert!(scores[4..].iter().all(|&v| v == 0.0), "fully masked row is zero");
    }

    #[test]
    fn softmax_backward_matches_finite_differences() {
        let mut rng = Rng::new(4);
        let row_len = 5;
        let mut scores = randv(&mut rng, row_len * 2);
        let mask = vec![true, true, true, false, true, true, true, true, true, false];
        let proj = randv(&mut rng, row_len * 2);

        let loss = |s: &[f64]| -> f64 {
            let mut p = s.to_vec();
            masked_softmax_rows(&mut p, row_len, &mask);
            p.iter().zip(proj.iter()).map(|(a, b)| a * b).sum()
        };

        let mut probs = scores.clone();
        masked_softmax_rows(&mut probs, row_len, &mask);
        let mut ds = vec![0.0; scores.len()];
        softmax_backward_rows(&probs, &proj, row_len, &mut ds);
        // Gradient w.r.t. masked entries is zero by construction; finite
        // differences agree because the masked value never enters.
        check_grad(&mut scores, &ds, loss, 1e-6, "softmax ds");
    }

    #[test]
    fn cross_entropy_uniform_logits_is_ln_vocab() {
        let vocab = 7;
        let logits = vec![0.0f64; 2 * vocab];
        let targets = vec![3u32, 5u32];
        let mut dlogits = vec![0.0; logits.len()];
        let (loss, n) = cross_entropy(&logits, &targets, vocab, 0, &mut dlogits);
        assert_eq!(n, 2);
        assert!((loss - (vocab as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_ignores_pad_and_matches_fd() {
        let mut rng = Rng::new(5);
        let vocab = 6;
        let mut logits = randv(&mut rng, 4 * vocab);
        let targets = vec![2u32, 0u32, 4u32, 1u32]; // 0 is pad

        let loss = |lg: &[f64]| -> f64 {
            let mut d = vec![0.0; lg.len()];
            cross_entropy(lg, &targets, vocab, 0, &mut d).0
        };
        let mut dlogits = vec![0.0; logits.len()];
        let (_, n) = cross_entropy(&logits, &targets, vocab, 0, &mut dlogits);
        assert_eq!(n, 3);
        assert!(dlogits[vocab..2 * vocab].iter().all(|&v| v == 0.0));
        check_grad(&mut logits, &dlogits, loss, 1e-7, "ce dlogits");
    }

    #[test]
    fn confident_correct_logits_drive_loss_to_zero() {
        let vocab = 4;
        let mut logits = vec![0.0f64; vocab];
        logits[2] = 50.0;
        let mut d = vec![0.0; vocab];
        let (loss, _) = cross_entropy(&logits, &[2u32], vocab, 0, &mut d);
        assert!(loss < 1e-12, "loss {loss}");
    }

    #[test]
    fn dropout_round_trip_scales() {
        let mut rng = Rng::new(6);
        let mut x = vec![1.0f64; 1000];
        let mask = dropout_forward(&mut x, 0.25, &mut rng);
        let kept = x.iter().filter(|&&v| v != 0.0).count();
        assert!((kept as f64 / 1000.0 - 0.75).abs() < 0.05);
        for &v in &x {
            assert!(v == 0.0 || (v - 1.0 / 0.75).abs() < 1e-12);
        }
        let mut d = vec![1.0f64; 1000];
        dropout_backward(&mut d, &mask);
        for (dv, xv) in d.iter().zip(x.iter()) {
            assert_eq!(*dv == 0.0, *xv == 0.0);
        }
    }
}
