//! End-to-end runs driven by a [`RunConfig`].

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::DatasetGrid;
use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::peakpick::{extract_peaks, pick_dataset, tune_lambda_dataset, Peak, PeakIndicator};
use crate::preprocess::{tic_normalize, tophat_baseline};

/// Baseline removal and TIC normalization as configured. Spots that cannot
/// be preprocessed are zeroed and reported.
pub fn preprocess_grid(grid: &DatasetGrid, cfg: &RunConfig) -> Result<(DatasetGrid, Vec<Error>)> {
    if cfg.baseline.is_none() && !cfg.tic {
        return Ok((grid.clone(), Vec::new()));
    }
    let spots = grid.present_spots();
    let mut failures = Vec::new();
    let mut data = Vec::with_capacity(grid.data().len());
    for (i, &(row, col)) in spots.iter().enumerate() {
        match preprocess_row(grid.row(i), cfg) {
            Ok(f) => data.extend(f),
            Err(e) => {
                failures.push(Error::Spot {
                    row,
                    col,
                    source: Box::new(e),
                });
                data.extend(std::iter::repeat_n(0.0, grid.spectrum_len()));
            }
        }
    }
    Ok((grid.with_data(data)?, failures))
}

pub fn preprocess_row(f: &[f64], cfg: &RunConfig) -> Result<Vec<f64>> {
    let mut f = f.to_vec();
    if let Some(w) = cfg.baseline {
        f = tophat_baseline(&f, w)?.0;
    }
    if cfg.tic {
        f = tic_normalize(&f)?;
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotPeaks {
    pub row: usize,
    pub col: usize,
    pub peaks: Vec<Peak>,
}

#[derive(Debug)]
pub struct PickRun {
    /// Indicator `z` of every present spot, on the input layout.
    pub indicators: DatasetGrid,
    pub peaks: Vec<SpotPeaks>,
    pub failures: Vec<Error>,
    pub warnings: Vec<String>,
}

/// Preprocess, pick and extract peaks for every spot.
pub fn run_pick(grid: &DatasetGrid, cfg: &RunConfig, threads: Option<usize>) -> Result<PickRun> {
    cfg.validate()?;
    let mut warnings = cfg.slice.warnings();
    let spatial = match &cfg.spatial {
        Some(_) if grid.dims() == (1, 1) => {
            warnings
                .push("spatial mode needs a spot grid; picking the single spectrum alone".into());
            None
        }
        s => s.as_ref(),
    };
    let frame = Frame::new(&cfg.frame)?;
    let (input, mut failures) = preprocess_grid(grid, cfg)?;
    let picks = pick_dataset(&input, &cfg.slice, &frame, &cfg.lambda, spatial, threads)?;
    let mut peaks = Vec::with_capacity(picks.spots.len());
    for (&(row, col), z) in picks.spots.iter().zip(&picks.indicators) {
        let list = match z {
            Some(z) => extract_peaks(z, grid.mz(), &cfg.extract)?,
            None => Vec::new(),
        };
        peaks.push(SpotPeaks {
            row,
            col,
            peaks: list,
        });
    }
    let indicators = picks.to_grid(grid)?;
    failures.extend(picks.failures);
    Ok(PickRun {
        indicators,
        peaks,
        failures,
        warnings,
    })
}

/// Indicator of a single spectrum under `cfg` (spatial settings ignored).
pub fn pick_one(f: &[f64], cfg: &RunConfig) -> Result<PeakIndicator> {
    cfg.validate()?;
    let frame = Frame::new(&cfg.frame)?;
    let f = preprocess_row(f, cfg)?;
    crate::peakpick::pick_spectrum(&f, &cfg.slice, &frame, &cfg.lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotLambda {
    pub row: usize,
    pub col: usize,
    pub lambda: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub target: usize,
    /// λ tuned on the mean spectrum.
    pub global: Option<f64>,
    pub global_error: Option<String>,
    pub per_spot: Vec<SpotLambda>,
}

/// λ reaching `target` peaks, on the mean spectrum and per spot.
pub fn run_tune(
    grid: &DatasetGrid,
    cfg: &RunConfig,
    target: usize,
    per_spot: bool,
) -> Result<LambdaReport> {
    cfg.validate()?;
    let frame = Frame::new(&cfg.frame)?;
    let (input, failures) = preprocess_grid(grid, cfg)?;
    let (global, global_error) =
        match tune_lambda_dataset(&input, &cfg.slice, &frame, target, &cfg.extract) {
            Ok(l) => (Some(l), None),
            Err(e @ Error::UnattainableTarget { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
    let mut spots = Vec::new();
    if per_spot {
        let failed: Vec<(usize, usize)> = failures
            .iter()
            .filter_map(|e| match e {
                Error::Spot { row, col, .. } => Some((*row, *col)),
                _ => None,
            })
            .collect();
        for (i, (row, col)) in input.present_spots().into_iter().enumerate() {
            let r = if failed.contains(&(row, col)) {
                Err(Error::DegenerateSpectrum("preprocessing failed".into()))
            } else {
                crate::peakpick::tune_lambda(input.row(i), &cfg.slice, &frame, target, &cfg.extract)
            };
            spots.push(match r {
                Ok(l) => SpotLambda {
                    row,
                    col,
                    lambda: Some(l),
                    error: None,
                },
                Err(e) => SpotLambda {
                    row,
                    col,
                    lambda: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(LambdaReport {
        target,
        global,
        global_error,
        per_spot: spots,
    })
}
