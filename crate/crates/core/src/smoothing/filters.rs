//! The window and spectral filters: moving average, exponential smoothing,
//! Gaussian, Savitzky-Golay and truncated Fourier approximation.
//!
//! Convolutions are evaluated relative to an anchor sample,
//! `s = t_a + sum_i c_i (t_i - t_a)`, which is algebraically the plain
//! weighted sum whenever the weights sum to one, but maps a constant window
//! to exactly that constant.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};

/// A set of convolution weights and the window position the output sample
/// corresponds to.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionKernel {
    pub weights: Vec<f64>,
    pub anchor: usize,
}

impl ConvolutionKernel {
    /// Uniform trailing window of `w + 1` samples ending at the output index.
    pub fn moving_average(w: usize) -> Self {
        let taps = w + 1;
        ConvolutionKernel {
            weights: vec![1.0 / taps as f64; taps],
            anchor: w,
        }
    }

    /// `w`-tap Gaussian with standard deviation `(w - 1) / 5`, normalised to
    /// unit sum and anchored at the (lower) middle tap.
    pub fn gaussian(w: usize) -> Self {
        assert!(w >= 1);
        let centre = (w as f64 - 1.0) / 2.0;
        let sigma = (w as f64 - 1.0) / 5.0;
        let mut weights: Vec<f64> = if w == 1 {
            vec![1.0]
        } else {
            (0..w)
                .map(|i| {
                    let z = (i as f64 - centre) / sigma;
                    (-0.5 * z * z).exp()
                })
                .collect()
        };
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|c| *c /= total);
        ConvolutionKernel {
            weights,
            anchor: (w - 1) / 2,
        }
    }

    /// Least-squares polynomial smoothing weights: the degree-`n` fit over a
    /// `w`-sample window evaluated at window position `position`.
    pub fn savitzky_golay(w: usize, n: usize, position: usize) -> Self {
        let projection = sg_projection(w, n);
        ConvolutionKernel {
            weights: projection[position].clone(),
            anchor: position,
        }
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn anchored_sum(window: &[f64], weights: &[f64], anchor: usize) -> f64 {
    let base = window[anchor];
    base + window
        .iter()
        .zip(weights)
        .map(|(t, c)| c * (t - base))
        .sum::<f64>()
}

/// Trailing moving average: `s_j = mean(t_{j-w}..=t_j)` for `j = w..m-1`.
/// Output length is `m - w`.
pub fn smooth_ma(series: &TimeSeries, w: usize) -> Result<TimeSeries> {
    let t = series.values();
    let m = t.len();
    if w < 2 || w >= m {
        return Err(Error::Parameter(format!(
            "moving average window {w} must satisfy 2 <= w < {m}"
        )));
    }
    let kernel = ConvolutionKernel::moving_average(w);
    let out = (w..m)
        .map(|j| anchored_sum(&t[j - w..=j], &kernel.weights, kernel.anchor))
        .collect();
    Ok(TimeSeries::from_finite(out))
}

pub fn exp_alpha(w: usize) -> f64 {
    2.0 / (w as f64 + 1.0)
}

/// Recursive exponential smoothing, `s_j = a t_j + (1 - a) s_{j-1}` with
/// `a = 2 / (w + 1)`.
pub fn smooth_exp(series: &TimeSeries, w: usize) -> Result<TimeSeries> {
    if w < 1 {
        return Err(Error::Parameter("exponential smoothing window must be >= 1".into()));
    }
    let alpha = exp_alpha(w);
    let t = series.values();
    let mut out = Vec::with_capacity(t.len());
    let mut s = t[0];
    out.push(s);
    for &x in &t[1..] {
        s += alpha * (x - s);
        out.push(s);
    }
    Ok(TimeSeries::from_finite(out))
}

/// First-order variant `s_j = a t_j + (1 - a) t_{j-1}` (no recursion on the
/// smoothed value).
pub fn smooth_exp_literal(series: &TimeSeries, w: usize) -> Result<TimeSeries> {
    if w < 1 {
        return Err(Error::Parameter("exponential smoothing window must be >= 1".into()));
    }
    let alpha = exp_alpha(w);
    let t = series.values();
    let out = std::iter::once(t[0])
        .chain(t.windows(2).map(|p| p[1] + (1.0 - alpha) * (p[0] - p[1])))
        .collect();
    Ok(TimeSeries::from_finite(out))
}

/// Gaussian smoothing with a `w`-tap kernel; kernels are truncated and
/// renormalised where they overhang the series ends.
pub fn smooth_gauss(series: &TimeSeries, w: usize) -> Result<TimeSeries> {
    let t = series.values();
    let m = t.len();
    if w < 2 || w > m {
        return Err(Error::Parameter(format!(
            "Gaussian window {w} must satisfy 2 <= w <= {m}"
        )));
    }
    let kernel = ConvolutionKernel::gaussian(w);
    let a = kernel.anchor as isize;
    let out = (0..m as isize)
        .map(|j| {
            let base = t[j as usize];
            let mut acc = 0.0;
            let mut total = 0.0;
            for (i, c) in kernel.weights.iter().enumerate() {
                let idx = j - a + i as isize;
                if idx >= 0 && (idx as usize) < m {
                    acc += c * (t[idx as usize] - base);
                    total += c;
                }
            }
            base + acc / total
        })
        .collect();
    Ok(TimeSeries::from_finite(out))
}

pub(crate) fn check_sg(w: usize, n: usize) -> Result<()> {
    if n < 1 || w.is_multiple_of(2) || w <= 2 * n {
        return Err(Error::Parameter(format!(
            "Savitzky-Golay needs odd w > 2n and n >= 1, got w={w}, n={n}"
        )));
    }
    Ok(())
}

/// Hat matrix `Q Q^T` of the degree-`n` polynomial fit on `w` equispaced
/// points. Row `p` holds the weights giving the fitted value at position `p`.
/// The basis is Chebyshev polynomials on [-1, 1], orthonormalised by
/// two passes of modified Gram-Schmidt.
pub(crate) fn sg_projection(w: usize, n: usize) -> Vec<Vec<f64>> {
    let half = (w as f64 - 1.0) / 2.0;
    let xs: Vec<f64> = (0..w).map(|i| (i as f64 - half) / half.max(1.0)).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let col: Vec<f64> = xs.iter().map(|&x| chebyshev(d, x)).collect();
        columns.push(col);
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for mut v in columns {
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    (0..w)
        .map(|p| {
            (0..w)
                .map(|i| basis.iter().map(|q| q[p] * q[i]).sum())
                .collect()
        })
        .collect()
}

fn chebyshev(d: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    match d {
        0 => 1.0,
        _ => {
            for _ in 1..d {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Savitzky-Golay smoothing. Interior points take the centre value of the
/// local fit; the first and last `w / 2` points use the fit of the nearest
/// full window evaluated at their offset.
pub fn smooth_sg(series: &TimeSeries, w: usize, n: usize) -> Result<TimeSeries> {
    check_sg(w, n)?;
    let t = series.values();
    let m = t.len();
    if w > m {
        return Err(Error::Parameter(format!(
            "Savitzky-Golay window {w} exceeds series length {m}"
        )));
    }
    let projection = sg_projection(w, n);
    let half = w / 2;
    let out = (0..m)
        .map(|j| {
            let (start, row) = if j < half {
                (0, j)
            } else if j + half >= m {
                (m - w, j - (m - w))
            } else {
                (j - half, half)
            };
            anchored_sum(&t[start..start + w], &projection[row], row)
        })
        .collect();
    Ok(TimeSeries::from_finite(out))
}

/// Number of non-zero frequencies kept for proportion `r` of `m` terms.
pub fn dft_retained(r: f64, m: usize) -> usize {
    ((r * m as f64 / 2.0).floor() as usize).max(1)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Truncated Fourier approximation: keep the DC term and the
/// `max(1, floor(r m / 2))` lowest frequencies with their conjugate mirrors.
pub fn smooth_dft(series: &TimeSeries, r: f64) -> Result<TimeSeries> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter(format!("DFT proportion {r} must lie in (0, 1]")));
    }
    let t = series.values();
    let m = t.len();
    let k = dft_retained(r, m);
    let mut buf: Vec<Complex<f64>> = t.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(m), p.plan_fft_inverse(m))
    });
    fwd.process(&mut buf);
    for (f, c) in buf.iter_mut().enumerate() {
        let freq = f.min(m - f);
        if freq > k {
            *c = Complex::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(TimeSeries::from_finite(buf.iter().map(|c| c.re * scale).collect()))
}
