//! Slice-pair peak picking: masks between consecutive overlapping slices of a
//! spectrum are turned into a per-bin indicator `z`, from which discrete
//! peaks are extracted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetGrid;
use crate::error::{Error, Result};
use crate::frames::{mad_sigma, CoefficientGrid, Frame};
use crate::multiplier::{shrink, spatial_mask_deviation, MaskTerms};
use crate::spatial::{resolve_neighbors, NeighborhoodSpec};

pub const DEFAULT_LAMBDA: f64 = 1.5e-3;
/// Smallest λ the noise-adaptive policy resolves to.
pub const LAMBDA_FLOOR: f64 = 1e-15;
/// Search interval of [`tune_lambda`].
pub const TUNE_RANGE: (f64, f64) = (1e-9, 1e3);
const TUNE_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub slice_len: usize,
    pub overlap: f64,
    /// Samples at each slice edge whose scores are ignored. `None`
    /// picks `min(frame support radius, (M - H) / 2)`; `Some(0)` accumulates
    /// every time position.
    #[serde(default)]
    pub edge_guard: Option<usize>,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            slice_len: 60,
            overlap: 0.5,
            edge_guard: None,
        }
    }
}

impl SliceConfig {
    pub fn new(slice_len: usize, overlap: f64) -> Self {
        Self {
            slice_len,
            overlap,
            edge_guard: None,
        }
    }

    /// `H = round(M (1 - O))`.
    pub fn hop(&self) -> usize {
        (self.slice_len as f64 * (1.0 - self.overlap)).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.slice_len == 0 {
            return Err(Error::Parameter("slice length must be positive".into()));
        }
        if !(self.overlap > 0.0 && self.overlap < 1.0) {
            return Err(Error::Parameter(format!(
                "overlap must lie in (0, 1), got {}",
                self.overlap
            )));
        }
        if self.hop() == 0 {
            return Err(Error::Parameter(format!(
                "overlap {} leaves a zero hop for slices of {}",
                self.overlap, self.slice_len
            )));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.overlap < 0.5 {
            out.push(format!(
                "overlap {} is below 0.5; a peak may fall into only one slice",
                self.overlap
            ));
        }
        out
    }

    /// `K = ceil((L - M) / H) + 1`.
    pub fn slice_count(&self, len: usize) -> Result<usize> {
        self.validate()?;
        if len < self.slice_len {
            return Err(Error::InputShape(format!(
                "spectrum of length {len} is shorter than one slice ({})",
                self.slice_len
            )));
        }
        Ok((len - self.slice_len).div_ceil(self.hop()) + 1)
    }

    pub fn starts(&self, len: usize) -> Result<Vec<usize>> {
        let h = self.hop();
        Ok((0..self.slice_count(len)?).map(|i| i * h).collect())
    }

    /// Edge guard in samples for slices analyzed with `frame`.
    pub fn guard(&self, frame: &Frame) -> usize {
        self.edge_guard.unwrap_or_else(|| {
            frame
                .support_radius()
                .min(self.slice_len.saturating_sub(self.hop()) / 2)
        })
    }
}

fn slice_at(f: &[f64], start: usize, len: usize) -> Vec<f64> {
    let mut s = vec![0.0; len];
    let end = (start + len).min(f.len());
    s[..end - start].copy_from_slice(&f[start..end]);
    s
}

/// Overlapping slices `f[iH .. iH + M)`, the last one zero-padded.
pub fn slice_spectrum(f: &[f64], cfg: &SliceConfig) -> Result<Vec<Vec<f64>>> {
    Ok(cfg
        .starts(f.len())?
        .into_iter()
        .map(|s| slice_at(f, s, cfg.slice_len))
        .collect())
}

/// Nonnegative per-bin indicator of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakIndicator {
    z: Vec<f64>,
}

impl PeakIndicator {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if let Some(i) = z.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Parameter(format!("indicator bin {i} is {}", z[i])));
        }
        Ok(Self { z })
    }

    pub fn zeros(len: usize) -> Self {
        Self { z: vec![0.0; len] }
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn into_values(self) -> Vec<f64> {
        self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub mz: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractParams {
    pub min_score: f64,
    pub min_separation: usize,
}

impl Default for ExtractParams {
    fn default() -> Self {
        Self {
            min_score: 0.0,
            min_separation: 3,
        }
    }
}

impl ExtractParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_score >= 0.0 && self.min_score.is_finite()) {
            return Err(Error::Parameter(format!(
                "min score must be nonnegative, got {}",
                self.min_score
            )));
        }
        if self.min_separation == 0 {
            return Err(Error::Parameter("min separation must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    #[default]
    Fixed,
    NoiseAdaptive,
    TargetCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPolicy {
    pub mode: LambdaMode,
    pub base_lambda: f64,
    #[serde(default)]
    pub target: Option<usize>,
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        Self::fixed(DEFAULT_LAMBDA)
    }
}

impl LambdaPolicy {
    pub fn fixed(lambda: f64) -> Self {
        Self {
            mode: LambdaMode::Fixed,
            base_lambda: lambda,
            target: None,
        }
    }

    pub fn noise_adaptive(base: f64) -> Self {
        Self {
            mode: LambdaMode::NoiseAdaptive,
            base_lambda: base,
            target: None,
        }
    }

    pub fn target_count(target: usize) -> Self {
        Self {
            mode: LambdaMode::TargetCount,
            base_lambda: DEFAULT_LAMBDA,
            target: Some(target),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_lambda.is_finite() && self.base_lambda > 0.0) {
            return Err(Error::Parameter(format!(
                "lambda must be positive, got {}",
                self.base_lambda
            )));
        }
        match (self.mode, self.target) {
            (LambdaMode::TargetCount, None) => Err(Error::Parameter(
                "target_count mode needs a target peak count".into(),
            )),
            (LambdaMode::TargetCount, Some(0)) => Err(Error::Parameter(
                "target peak count must be positive".into(),
            )),
            (LambdaMode::TargetCount, Some(_)) => Ok(()),
            (_, Some(_)) => Err(Error::Parameter(
                "a target peak count is only valid in target_count mode".into(),
            )),
            (_, None) => Ok(()),
        }
    }
}

/// λ for one slice pair. `noise_adaptive` scales the base by the squared
/// noise level estimated from both grids with the top decile of magnitudes
/// left out.
pub fn resolve_lambda(
    policy: &LambdaPolicy,
    c1: &CoefficientGrid,
    c2: &CoefficientGrid,
) -> Result<f64> {
    policy.validate()?;
    match policy.mode {
        LambdaMode::Fixed => Ok(policy.base_lambda),
        LambdaMode::NoiseAdaptive => {
            let sigma = pair_noise_sigma(c1, c2)?;
            Ok((policy.base_lambda * sigma * sigma).max(LAMBDA_FLOOR))
        }
        LambdaMode::TargetCount => Err(Error::Misuse(
            "target_count λ comes from tune_lambda, not from a single slice pair".into(),
        )),
    }
}

fn pair_noise_sigma(c1: &CoefficientGrid, c2: &CoefficientGrid) -> Result<f64> {
    let mut mags = c1.magnitudes();
    mags.extend(c2.values().iter().map(|c| c.norm()));
    let keep = mags.len() - mags.len() / 10;
    if keep == 0 {
        return Err(Error::EmptyInput(
            "no coefficients for noise estimation".into(),
        ));
    }
    if keep < mags.len() {
        mags.select_nth_unstable_by(keep, f64::total_cmp);
        mags.truncate(keep);
    }
    mad_sigma(&mut mags, c1.is_complex() || c2.is_complex())
}

/// Time positions of a slice pair that contribute scores. Both ends are
/// guarded, including the outer ends of the first and last pair: there the
/// periodic analysis wraps the opposite end of the slice around and would
/// score peaks that sit elsewhere.
fn scored_positions(guard: usize, frame: &Frame) -> std::ops::Range<usize> {
    let m = frame.slice_len();
    let a = frame.time_step();
    guard.div_ceil(a)..m.saturating_sub(guard).div_ceil(a)
}

/// Negative mask deviations of one slice pair, ready to be re-thresholded.
#[derive(Debug, Clone)]
struct PairTerms {
    start: usize,
    // (time position, d = y - 1 < 0, e = |c1|^2)
    entries: Vec<(usize, f64, f64)>,
    sigma: Option<f64>,
}

/// A spectrum sliced and analyzed once; indicators for any λ are cheap.
#[derive(Debug, Clone)]
pub struct PreparedSpectrum {
    len: usize,
    step: usize,
    positions: usize,
    pairs: Vec<PairTerms>,
}

impl PreparedSpectrum {
    pub fn new(f: &[f64], cfg: &SliceConfig, frame: &Frame, with_noise: bool) -> Result<Self> {
        check_frame(cfg, frame)?;
        let starts = cfg.starts(f.len())?;
        if starts.len() < 2 {
            return Err(Error::InsufficientLength {
                len: f.len(),
                slices: starts.len(),
            });
        }
        let guard = cfg.guard(frame);
        let (positions, channels) = frame.shape();
        let n_pairs = starts.len() - 1;
        let mut pairs = Vec::with_capacity(n_pairs);
        let mut prev = frame.analyze(&slice_at(f, starts[0], cfg.slice_len))?;
        for i in 0..n_pairs {
            let next = frame.analyze(&slice_at(f, starts[i + 1], cfg.slice_len))?;
            let terms = MaskTerms::new(&prev, &next)?;
            let mut entries = Vec::new();
            for k in scored_positions(guard, frame) {
                for l in 0..channels {
                    let j = k * channels + l;
                    if terms.d[j] < 0.0 {
                        entries.push((k, terms.d[j], terms.e[j]));
                    }
                }
            }
            let sigma = if with_noise {
                Some(pair_noise_sigma(&prev, &next)?)
            } else {
                None
            };
            pairs.push(PairTerms {
                start: starts[i],
                entries,
                sigma,
            });
            prev = next;
        }
        Ok(Self {
            len: f.len(),
            step: frame.time_step(),
            positions,
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Per-pair λ under a fixed or noise-adaptive policy.
    pub fn lambdas(&self, policy: &LambdaPolicy) -> Result<Vec<f64>> {
        policy.validate()?;
        match policy.mode {
            LambdaMode::Fixed => Ok(vec![policy.base_lambda; self.pairs.len()]),
            LambdaMode::NoiseAdaptive => self
                .pairs
                .iter()
                .map(|p| {
                    let s = p.sigma.ok_or_else(|| {
                        Error::Misuse("spectrum was prepared without noise estimates".into())
                    })?;
                    Ok((policy.base_lambda * s * s).max(LAMBDA_FLOOR))
                })
                .collect(),
            LambdaMode::TargetCount => Err(Error::Misuse(
                "target_count λ comes from tune_lambda".into(),
            )),
        }
    }

    /// Indicator with λ `lambda(i)` for pair `i`.
    pub fn indicator_with(&self, lambda: impl Fn(usize) -> f64) -> PeakIndicator {
        let mut z = vec![0.0; self.len];
        let mut s = vec![0.0; self.positions];
        for (i, pair) in self.pairs.iter().enumerate() {
            let lam = lambda(i);
            s.iter_mut().for_each(|v| *v = 0.0);
            for &(k, d, e) in &pair.entries {
                s[k] -= shrink(d, d, lam / e);
            }
            accumulate(&mut z, pair.start, self.step, &s);
        }
        PeakIndicator { z }
    }

    pub fn indicator(&self, lambda: f64) -> PeakIndicator {
        self.indicator_with(|_| lambda)
    }
}

fn accumulate(z: &mut [f64], start: usize, step: usize, s: &[f64]) {
    for (k, &v) in s.iter().enumerate() {
        let bin = start + k * step;
        if bin >= z.len() {
            break;
        }
        if v > z[bin] {
            z[bin] = v;
        }
    }
}

fn check_frame(cfg: &SliceConfig, frame: &Frame) -> Result<()> {
    cfg.validate()?;
    if frame.slice_len() != cfg.slice_len {
        return Err(Error::Parameter(format!(
            "frame built for slices of {} but slicing uses {}",
            frame.slice_len(),
            cfg.slice_len
        )));
    }
    Ok(())
}

/// Indicator of one spectrum. A `target_count` policy tunes λ first with
/// default extraction parameters.
pub fn pick_spectrum(
    f: &[f64],
    cfg: &SliceConfig,
    frame: &Frame,
    policy: &LambdaPolicy,
) -> Result<PeakIndicator> {
    policy.validate()?;
    let prepared = PreparedSpectrum::new(f, cfg, frame, policy.mode == LambdaMode::NoiseAdaptive)?;
    pick_prepared(&prepared, policy, &ExtractParams::default())
}

fn pick_prepared(
    prepared: &PreparedSpectrum,
    policy: &LambdaPolicy,
    extract: &ExtractParams,
) -> Result<PeakIndicator> {
    if policy.mode == LambdaMode::TargetCount {
        let target = policy.target.unwrap_or(1);
        let lambda = tune_prepared(prepared, target, extract)?;
        return Ok(prepared.indicator(lambda));
    }
    let lambdas = prepared.lambdas(policy)?;
    Ok(prepared.indicator_with(|i| lambdas[i]))
}

/// `(bin, score)` of the extracted peaks, by descending score.
pub fn extract_bins(z: &[f64], params: &ExtractParams) -> Vec<(usize, f64)> {
    let n = z.len();
    let mut cand: Vec<(usize, f64)> = (0..n)
        .filter(|&t| {
            let v = z[t];
            v > params.min_score && (t == 0 || v > z[t - 1]) && (t + 1 == n || v > z[t + 1])
        })
        .map(|t| (t, z[t]))
        .collect();
    cand.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let sep = params.min_separation.max(1);
    let mut blocked = vec![false; n];
    let mut out = Vec::new();
    for (t, v) in cand {
        if blocked[t] {
            continue;
        }
        out.push((t, v));
        let lo = t.saturating_sub(sep - 1);
        let hi = (t + sep).min(n);
        blocked[lo..hi].iter_mut().for_each(|b| *b = true);
    }
    out
}

/// Strict local maxima of `z` above `min_score`, greedily thinned so that
/// accepted peaks are at least `min_separation` bins apart.
pub fn extract_peaks(z: &PeakIndicator, axis: &[f64], params: &ExtractParams) -> Result<Vec<Peak>> {
    params.validate()?;
    if axis.len() != z.len() {
        return Err(Error::InputShape(format!(
            "axis of length {} for an indicator of length {}",
            axis.len(),
            z.len()
        )));
    }
    Ok(extract_bins(z.values(), params)
        .into_iter()
        .map(|(bin, score)| Peak {
            bin,
            mz: axis[bin],
            score,
        })
        .collect())
}

/// Largest λ in [`TUNE_RANGE`] whose indicator yields at least `target`
/// peaks, found by bisection in log λ. A λ giving exactly `target` peaks is
/// preferred when one is seen.
pub fn tune_lambda(
    f: &[f64],
    cfg: &SliceConfig,
    frame: &Frame,
    target: usize,
    extract: &ExtractParams,
) -> Result<f64> {
    let prepared = PreparedSpectrum::new(f, cfg, frame, false)?;
    tune_prepared(&prepared, target, extract)
}

/// [`tune_lambda`] on the mean spectrum of a dataset, giving one global λ.
pub fn tune_lambda_dataset(
    grid: &DatasetGrid,
    cfg: &SliceConfig,
    frame: &Frame,
    target: usize,
    extract: &ExtractParams,
) -> Result<f64> {
    tune_lambda(&grid.mean_spectrum()?, cfg, frame, target, extract)
}

pub fn tune_prepared(
    prepared: &PreparedSpectrum,
    target: usize,
    extract: &ExtractParams,
) -> Result<f64> {
    extract.validate()?;
    if target == 0 {
        return Err(Error::Parameter(
            "target peak count must be positive".into(),
        ));
    }
    let count = |lambda: f64| extract_bins(prepared.indicator(lambda).values(), extract).len();
    let (mut lo, mut hi) = TUNE_RANGE;
    let c_lo = count(lo);
    if c_lo < target {
        return Err(Error::UnattainableTarget {
            target,
            max_count: c_lo,
        });
    }
    let c_hi = count(hi);
    if c_hi >= target {
        return Ok(hi);
    }
    let mut lo_count = c_lo;
    let mut exact = (c_lo == target).then_some(lo);
    for _ in 0..TUNE_MAX_ITER {
        if (hi / lo).ln() < 1e-6 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let c = count(mid);
        if c >= target {
            lo = mid;
            lo_count = c;
            if c == target {
                exact = Some(mid);
            }
        } else {
            hi = mid;
        }
    }
    Ok(if lo_count == target {
        lo
    } else {
        exact.unwrap_or(lo)
    })
}

/// Indicators of every present spot of a dataset.
#[derive(Debug)]
pub struct DatasetPicks {
    pub dims: (usize, usize),
    pub spots: Vec<(usize, usize)>,
    /// One entry per present spot; `None` where the spot failed.
    pub indicators: Vec<Option<PeakIndicator>>,
    /// `Error::Spot` for each failed spot.
    pub failures: Vec<Error>,
}

impl DatasetPicks {
    /// Indicators as a dataset on `grid`'s layout; failed spots are zero.
    pub fn to_grid(&self, grid: &DatasetGrid) -> Result<DatasetGrid> {
        let len = grid.spectrum_len();
        let mut data = Vec::with_capacity(self.indicators.len() * len);
        for ind in &self.indicators {
            match ind {
                Some(z) => data.extend_from_slice(z.values()),
                None => data.extend(std::iter::repeat_n(0.0, len)),
            }
        }
        grid.with_data(data)
    }
}

/// Per-spot picking over a dataset, in parallel on `threads` workers
/// (`None` uses all cores). With `spatial`, each spot's masks pool
/// coefficients of its neighbors. Results do not depend on the worker count.
pub fn pick_dataset(
    grid: &DatasetGrid,
    cfg: &SliceConfig,
    frame: &Frame,
    policy: &LambdaPolicy,
    spatial: Option<&NeighborhoodSpec>,
    threads: Option<usize>,
) -> Result<DatasetPicks> {
    policy.validate()?;
    check_frame(cfg, frame)?;
    if let Some(spec) = spatial {
        spec.validate()?;
    }
    let slices = cfg.slice_count(grid.spectrum_len())?;
    if slices < 2 {
        return Err(Error::InsufficientLength {
            len: grid.spectrum_len(),
            slices,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let spots = grid.present_spots();
    let extract = ExtractParams::default();
    let results: Vec<Result<PeakIndicator>> = pool.install(|| {
        spots
            .par_iter()
            .enumerate()
            .map(|(i, &spot)| match spatial {
                None => {
                    let prepared = PreparedSpectrum::new(
                        grid.row(i),
                        cfg,
                        frame,
                        policy.mode == LambdaMode::NoiseAdaptive,
                    )?;
                    pick_prepared(&prepared, policy, &extract)
                }
                Some(spec) => pick_spot_spatial(grid, spot, cfg, frame, policy, spec, &extract),
            })
            .collect()
    });
    let mut indicators = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (r, &(row, col)) in results.into_iter().zip(&spots) {
        match r {
            Ok(z) => indicators.push(Some(z)),
            Err(e) => {
                indicators.push(None);
                failures.push(Error::Spot {
                    row,
                    col,
                    source: Box::new(e),
                });
            }
        }
    }
    Ok(DatasetPicks {
        dims: grid.dims(),
        spots,
        indicators,
        failures,
    })
}

fn pick_spot_spatial(
    grid: &DatasetGrid,
    spot: (usize, usize),
    cfg: &SliceConfig,
    frame: &Frame,
    policy: &LambdaPolicy,
    spec: &NeighborhoodSpec,
    extract: &ExtractParams,
) -> Result<PeakIndicator> {
    let (coords, weights) = resolve_neighbors(spot, grid.dims(), Some(grid.occupancy()), spec)?;
    let rows: Vec<&[f64]> = coords
        .iter()
        .map(|&(r, c)| grid.spot(r, c).expect("resolved neighbors are present"))
        .collect();
    let center = weights
        .offsets
        .iter()
        .position(|&o| o == (0, 0))
        .expect("the center is always a neighbor");
    let f = rows[center];
    let len = f.len();
    let starts = cfg.starts(len)?;
    let n_pairs = starts.len() - 1;

    let fixed = match policy.mode {
        LambdaMode::Fixed => Some(policy.base_lambda),
        LambdaMode::NoiseAdaptive => None,
        LambdaMode::TargetCount => {
            let prepared = PreparedSpectrum::new(f, cfg, frame, false)?;
            Some(tune_prepared(
                &prepared,
                policy.target.unwrap_or(1),
                extract,
            )?)
        }
    };

    let guard = cfg.guard(frame);
    let (positions, channels) = frame.shape();
    let analyze_all = |start: usize| -> Result<Vec<CoefficientGrid>> {
        rows.iter()
            .map(|row| frame.analyze(&slice_at(row, start, cfg.slice_len)))
            .collect()
    };
    let mut z = vec![0.0; len];
    let mut s = vec![0.0; positions];
    let mut prev = analyze_all(starts[0])?;
    for i in 0..n_pairs {
        let next = analyze_all(starts[i + 1])?;
        let lambda = match fixed {
            Some(l) => l,
            None => resolve_lambda(policy, &prev[center], &next[center])?,
        };
        let c1: Vec<&CoefficientGrid> = prev.iter().collect();
        let c2: Vec<&CoefficientGrid> = next.iter().collect();
        let dev = spatial_mask_deviation(
            &prev[center],
            &next[center],
            &c1,
            &c2,
            &weights,
            lambda,
            spec.reducer(),
        )?;
        s.iter_mut().for_each(|v| *v = 0.0);
        for k in scored_positions(guard, frame) {
            for &v in &dev[k * channels..(k + 1) * channels] {
                if v < 0.0 {
                    s[k] -= v;
                }
            }
        }
        accumulate(&mut z, starts[i], frame.time_step(), &s);
        prev = next;
    }
    Ok(PeakIndicator { z })
}
