//! Closed-form sparse frame-multiplier masks.
//!
//! For coefficient magnitudes `|c1|`, `|c2|` the mask minimizes
//! `1/2 (|c2| - m |c1|)^2 + lambda |m - 1|` elementwise. With `y = |c2|/|c1|`
//! and threshold `t = lambda / |c1|^2` the minimizer is the soft threshold of
//! `y - 1` towards zero: `m = 1` when `|y - 1| <= t`, otherwise
//! `m = y - sign(y - 1) t`.
//!
//! The spatial variant keeps the center's own deviation `y - 1` but takes the
//! shrinkage decision from neighbor-pooled statistics `y~` and `c1~`:
//! `m - 1 = (y - 1) * max(0, 1 - lambda / (|c1~|^2 |y~ - 1|))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::CoefficientGrid;
use crate::stats::median_in_place;

/// Relative magnitude under which a `c1` coefficient counts as trivial.
pub const TRIVIAL_REL: f64 = 1e-12;

/// Real mask over the coefficient index grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskGrid {
    time_len: usize,
    channels: usize,
    values: Vec<f64>,
}

impl MaskGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.time_len, self.channels)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.channels + l]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Spatial weights: one offset `(d_row, d_col)` and weight per neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborWeights {
    pub offsets: Vec<(isize, isize)>,
    pub weights: Vec<f64>,
}

impl NeighborWeights {
    /// The center alone with weight 1.
    pub fn identity() -> Self {
        Self {
            offsets: vec![(0, 0)],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// How neighbor statistics are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    /// Weighted sums `y~ = sum w_j y_j`, `c1~ = sum w_j c1_j`.
    #[default]
    Linear,
    /// Elementwise medians of `y_j` and of `|c1_j|`; weights are ignored.
    Median,
}

/// Shrink `d_own` towards zero using the decision pair `(d_ref, t_ref)`:
/// zero when `|d_ref| <= t_ref`, else `d_own * (1 - t_ref / |d_ref|)`.
///
/// Written as `d_own - sign(d_own) * t_ref * (|d_own| / |d_ref|)` so that
/// `d_own == d_ref` reduces exactly to the soft threshold `d - sign(d) t`.
#[inline]
pub fn shrink(d_own: f64, d_ref: f64, t_ref: f64) -> f64 {
    // NaN thresholds (0/0) and infinite ones both land in the zero branch.
    if !(d_ref.abs() > t_ref) {
        return 0.0;
    }
    d_own - d_own.signum() * t_ref * (d_own.abs() / d_ref.abs())
}

fn triviality_floor(c1: &CoefficientGrid) -> f64 {
    let max = c1.values().iter().map(|c| c.norm()).fold(0.0, f64::max);
    TRIVIAL_REL * max.max(1e-300)
}

fn check_pair(c1: &CoefficientGrid, c2: &CoefficientGrid) -> Result<()> {
    if !c1.same_shape(c2) {
        return Err(Error::InputShape(format!(
            "coefficient grids {:?} and {:?} differ",
            c1.shape(),
            c2.shape()
        )));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Parameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// The λ-independent part of a basic mask: `d = y - 1` (zero where `c1` is
/// trivial) and `e = |c1|^2` per coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskTerms {
    time_len: usize,
    channels: usize,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl MaskTerms {
    pub fn new(c1: &CoefficientGrid, c2: &CoefficientGrid) -> Result<Self> {
        check_pair(c1, c2)?;
        let eps = triviality_floor(c1);
        let n = c1.values().len();
        let mut d = Vec::with_capacity(n);
        let mut e = Vec::with_capacity(n);
        for (a, b) in c1.values().iter().zip(c2.values()) {
            let a1 = a.norm();
            if a1 <= eps {
                d.push(0.0);
            } else {
                d.push(b.norm() / a1 - 1.0);
            }
            e.push(a.norm_sqr());
        }
        let (time_len, channels) = c1.shape();
        Ok(Self {
            time_len,
            channels,
            d,
            e,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.time_len, self.channels)
    }

    /// Mask deviation `m - 1` at one coefficient.
    #[inline]
    pub fn deviation_at(&self, i: usize, lambda: f64) -> f64 {
        let d = self.d[i];
        shrink(d, d, lambda / self.e[i])
    }

    pub fn deviation(&self, lambda: f64) -> Vec<f64> {
        (0..self.d.len())
            .map(|i| self.deviation_at(i, lambda))
            .collect()
    }
}

/// Mask deviation `m - 1` of the closed-form basic mask.
pub fn mask_deviation(c1: &CoefficientGrid, c2: &CoefficientGrid, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(MaskTerms::new(c1, c2)?.deviation(lambda))
}

/// Closed-form minimizer of `1/2 || |c2| - m|c1| ||^2 + lambda ||m - 1||_1`.
pub fn estimate_mask(c1: &CoefficientGrid, c2: &CoefficientGrid, lambda: f64) -> Result<MaskGrid> {
    let dev = mask_deviation(c1, c2, lambda)?;
    let (time_len, channels) = c1.shape();
    Ok(MaskGrid {
        time_len,
        channels,
        values: dev.into_iter().map(|v| 1.0 + v).collect(),
    })
}

/// Neighbor-pooled mask deviation `m - 1`.
///
/// `neighbor_c1[j]`, `neighbor_c2[j]` and `weights.weights[j]` describe the
/// same neighbor; the center must be among them.
pub fn spatial_mask_deviation(
    c1: &CoefficientGrid,
    c2: &CoefficientGrid,
    neighbor_c1: &[&CoefficientGrid],
    neighbor_c2: &[&CoefficientGrid],
    weights: &NeighborWeights,
    lambda: f64,
    reducer: Reducer,
) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_pair(c1, c2)?;
    let n = weights.len();
    if n == 0 || neighbor_c1.len() != n || neighbor_c2.len() != n || weights.offsets.len() != n {
        return Err(Error::Parameter(format!(
            "{} weights for {} / {} neighbor grids",
            n,
            neighbor_c1.len(),
            neighbor_c2.len()
        )));
    }
    if weights
        .weights
        .iter()
        .any(|w| !(w.is_finite() && *w >= 0.0))
        || (weights.total() - 1.0).abs() > 1e-9
    {
        return Err(Error::Parameter(
            "neighbor weights must be nonnegative and sum to 1".into(),
        ));
    }
    for (a, b) in neighbor_c1.iter().zip(neighbor_c2) {
        check_pair(c1, a)?;
        check_pair(c1, b)?;
    }

    let eps_center = triviality_floor(c1);
    let eps: Vec<f64> = neighbor_c1.iter().map(|g| triviality_floor(g)).collect();
    let mut ratios = vec![0.0; n];
    let mut mags = vec![0.0; n];
    let mut out = Vec::with_capacity(c1.values().len());

    for (i, (a, b)) in c1.values().iter().zip(c2.values()).enumerate() {
        let a1 = a.norm();
        if a1 <= eps_center {
            out.push(0.0);
            continue;
        }
        let d_own = b.norm() / a1 - 1.0;
        for j in 0..n {
            let nj = neighbor_c1[j].values()[i];
            let mj = nj.norm();
            ratios[j] = if mj <= eps[j] {
                1.0
            } else {
                neighbor_c2[j].values()[i].norm() / mj
            };
            mags[j] = mj;
        }
        let (y_ref, energy) = match reducer {
            Reducer::Linear => {
                let mut y = 0.0;
                let mut c = Complex64::default();
                for j in 0..n {
                    let w = weights.weights[j];
                    y += w * ratios[j];
                    c += neighbor_c1[j].values()[i] * w;
                }
                (y, c.norm_sqr())
            }
            Reducer::Median => {
                let y = median_in_place(&mut ratios).unwrap_or(1.0);
                let c = median_in_place(&mut mags).unwrap_or(0.0);
                (y, c * c)
            }
        };
        out.push(shrink(d_own, y_ref - 1.0, lambda / energy));
    }
    Ok(out)
}

/// Spatially-aware mask: the center's ratio shrunk with a neighbor-pooled
/// threshold.
pub fn estimate_mask_spatial(
    c1: &CoefficientGrid,
    c2: &CoefficientGrid,
    neighbor_c1: &[&CoefficientGrid],
    neighbor_c2: &[&CoefficientGrid],
    weights: &NeighborWeights,
    lambda: f64,
    reducer: Reducer,
) -> Result<MaskGrid> {
    let dev = spatial_mask_deviation(c1, c2, neighbor_c1, neighbor_c2, weights, lambda, reducer)?;
    let (time_len, channels) = c1.shape();
    Ok(MaskGrid {
        time_len,
        channels,
        values: dev.into_iter().map(|v| 1.0 + v).collect(),
    })
}

/// `1/2 || |c2| - m |c1| ||^2 + lambda || m - 1 ||_1`.
pub fn mask_objective(
    c1: &CoefficientGrid,
    c2: &CoefficientGrid,
    mask: &[f64],
    lambda: f64,
) -> Result<f64> {
    check_pair(c1, c2)?;
    if mask.len() != c1.values().len() {
        return Err(Error::InputShape(format!(
            "mask has {} entries for {} coefficients",
            mask.len(),
            c1.values().len()
        )));
    }
    Ok(c1
        .values()
        .iter()
        .zip(c2.values())
        .zip(mask)
        .map(|((a, b), &m)| scalar_objective(a.norm(), b.norm(), m, lambda))
        .sum())
}

/// Objective of a single coefficient.
#[inline]
pub fn scalar_objective(c1_abs: f64, c2_abs: f64, m: f64, lambda: f64) -> f64 {
    let r = c2_abs - m * c1_abs;
    0.5 * r * r + lambda * (m - 1.0).abs()
}

/// Closed-form mask for scalar magnitudes.
pub fn scalar_mask(c1_abs: f64, c2_abs: f64, lambda: f64) -> f64 {
    if c1_abs <= 0.0 {
        return 1.0;
    }
    let d = c2_abs / c1_abs - 1.0;
    1.0 + shrink(d, d, lambda / (c1_abs * c1_abs))
}
