//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// `1/2 (c2 - m c1)^2 + lambda |m - 1|`, written out directly.
pub fn objective(c1: f64, c2: f64, m: f64, lambda: f64) -> f64 {
    0.5 * (c2 - m * c1).powi(2) + lambda * (m - 1.0).abs()
}

/// Minimum of the scalar objective over the grid `{j * 1e-6 : j >= 0}` up to
/// `max(1, c2 / c1) + 1`.
///
/// The objective is convex in `m`, so the grid minimizer lies within one cell
/// of the minimizer of any coarser grid; the search zooms in over 1000-point
/// grids and finishes on the exact 1e-6 lattice.
pub fn grid_min(c1: f64, c2: f64, lambda: f64) -> (f64, f64) {
    const STEP: f64 = 1e-6;
    let f = |m: f64| objective(c1, c2, m, lambda);
    let mut lo = 0.0f64;
    let mut hi = (c2 / c1).max(1.0) + 1.0;
    loop {
        let h = (hi - lo) / 1000.0;
        if h <= 100.0 * STEP {
            break;
        }
        let best = (0..=1000)
            .map(|i| lo + i as f64 * h)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        lo = (best - 2.0 * h).max(0.0);
        hi = best + 2.0 * h;
    }
    let j0 = (lo / STEP).floor() as i64;
    let j1 = (hi / STEP).ceil() as i64;
    (j0..=j1)
        .map(|j| j as f64 * STEP)
        .filter(|&m| m >= 0.0)
        .map(|m| (m, f(m)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// The three cases of the subdifferential argument: `m = y - t` when
/// `y - 1 > t`, `m = y + t` when `y - 1 < -t`, `m = 1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Above,
    Below,
    One,
}

pub fn three_case(c1: f64, c2: f64, lambda: f64) -> (Case, f64) {
    let y = c2 / c1;
    let t = lambda / (c1 * c1);
    if y - 1.0 > t {
        (Case::Above, y - t)
    } else if y - 1.0 < -t {
        (Case::Below, y + t)
    } else {
        (Case::One, 1.0)
    }
}

/// Opening by definition: min over each window, then max over the windows
/// containing each sample.
pub fn opening_brute(f: &[f64], w: usize) -> Vec<f64> {
    let n = f.len() as isize;
    let (left, right) = (((w - 1) / 2) as isize, (w / 2) as isize);
    let eroded: Vec<f64> = (0..n)
        .map(|t| {
            (t - left..=t + right)
                .filter(|s| (0..n).contains(s))
                .map(|s| f[s as usize])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    (0..n)
        .map(|t| {
            (0..n)
                .filter(|&s| s - left <= t && t <= s + right)
                .map(|s| eroded[s as usize])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}
