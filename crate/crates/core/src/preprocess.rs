//! Baseline removal and intensity normalization.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const DEFAULT_TOPHAT_WINDOW: usize = 100;

/// Running extreme over `[t - left, t + right]` clipped to the signal.
/// `keep(a, b)` is true when `a` should replace `b` as the extreme.
fn sliding(f: &[f64], left: usize, right: usize, keep: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let n = f.len();
    let mut out = Vec::with_capacity(n);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for t in 0..n {
        let hi = (t + right).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&b| keep(f[next], f[b])) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&i| i + left < t) {
            dq.pop_front();
        }
        out.push(f[*dq.front().expect("window is never empty")]);
    }
    out
}

/// Flat erosion with a window of `w` samples covering `[t - (w-1)/2, t + w/2]`.
pub fn erode(f: &[f64], w: usize) -> Vec<f64> {
    sliding(f, (w - 1) / 2, w / 2, |a, b| a <= b)
}

/// Flat dilation with the reflected window `[t - w/2, t + (w-1)/2]`.
pub fn dilate(f: &[f64], w: usize) -> Vec<f64> {
    sliding(f, w / 2, (w - 1) / 2, |a, b| a >= b)
}

/// Top-hat baseline removal: the baseline is the morphological opening of `f`
/// with a flat element of `window` bins. Returns `(f - baseline, baseline)`.
pub fn tophat_baseline(f: &[f64], window: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if window == 0 {
        return Err(Error::Parameter("top-hat window must be positive".into()));
    }
    if window > f.len() {
        return Err(Error::Parameter(format!(
            "top-hat window {window} exceeds spectrum length {}",
            f.len()
        )));
    }
    let baseline = dilate(&erode(f, window), window);
    let corrected = f.iter().zip(&baseline).map(|(a, b)| a - b).collect();
    Ok((corrected, baseline))
}

/// Total-ion-count normalization: `f / sum(max(f, 0))`.
pub fn tic_normalize(f: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = f.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateSpectrum("total ion count is zero".into()));
    }
    Ok(f.iter().map(|v| v / total).collect())
}
