//! Finite Gabor and constant-Q filterbank frames over fixed-length slices.
//!
//! Both frames treat a slice as one period of a periodic signal: window shifts
//! and filter convolutions wrap around the slice end. Analysis is DFT based.
//!
//! The Gabor atoms are `g[k,l](t) = w((t - k*a) mod M) * exp(2*pi*i*l*b*t/M)` with
//! a zero-phase Hann window `w` of unit l2 norm. The filterbank uses analytic
//! (positive-frequency only) raised-cosine responses whose centers are
//! geometrically spaced and whose bandwidths grow with the center frequency.
//!
//! Frequencies are in cycles per sample. On a physical time axis sampled at
//! `fs` Hz a frequency `f` Hz maps to `f / fs`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::median_in_place;

/// Gaussian MAD constant for real-valued coefficients: `median(|x|) = 0.6745 sigma`.
pub const MAD_REAL: f64 = 0.6745;

/// Same constant for circular complex Gaussian coefficients with `E|c|^2 = sigma^2`:
/// `median(|c|) = sqrt(ln 2) sigma`.
pub const MAD_COMPLEX: f64 = 0.832_554_611_157_697_7;

/// Share of the lower frame bound relative to the upper one below which a
/// frame is treated as degenerate.
const DEGENERATE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborFrameSpec {
    /// Slice length `M` in samples.
    pub slice_len: usize,
    /// Hann window width `W` in samples, at most `M`.
    pub window_width: usize,
    /// Time step `a`; must divide `M`.
    pub time_step: usize,
    /// Channel stride `b`; must divide `M`.
    pub freq_step: usize,
}

impl Default for GaborFrameSpec {
    fn default() -> Self {
        Self {
            slice_len: 60,
            window_width: 20,
            time_step: 1,
            freq_step: 1,
        }
    }
}

impl GaborFrameSpec {
    pub fn new(slice_len: usize, window_width: usize) -> Self {
        Self {
            slice_len,
            window_width,
            time_step: 1,
            freq_step: 1,
        }
    }

    pub fn time_positions(&self) -> usize {
        self.slice_len / self.time_step
    }

    pub fn channels(&self) -> usize {
        self.slice_len / self.freq_step
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.slice_len;
        if m == 0 {
            return Err(Error::InvalidSpec("slice length must be positive".into()));
        }
        if self.window_width == 0 || self.window_width > m {
            return Err(Error::InvalidSpec(format!(
                "window width {} must lie in 1..={m}",
                self.window_width
            )));
        }
        if self.time_step == 0 || !m.is_multiple_of(self.time_step) {
            return Err(Error::InvalidSpec(format!(
                "time step {} must divide the slice length {m}",
                self.time_step
            )));
        }
        if self.freq_step == 0 || !m.is_multiple_of(self.freq_step) {
            return Err(Error::InvalidSpec(format!(
                "channel stride {} must divide the slice length {m}",
                self.freq_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterbankFrameSpec {
    pub slice_len: usize,
    /// Center of the lowest filter, cycles/sample.
    pub fmin: f64,
    /// Half-width of the lowest filter, cycles/sample. Scales with the center.
    pub bw: f64,
    /// Filters per octave.
    pub bins: usize,
}

impl Default for FilterbankFrameSpec {
    fn default() -> Self {
        Self {
            slice_len: 60,
            fmin: 0.02,
            bw: 0.02,
            bins: 30,
        }
    }
}

impl FilterbankFrameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.slice_len < 2 {
            return Err(Error::InvalidSpec("slice length must be at least 2".into()));
        }
        if !(self.fmin.is_finite() && self.fmin > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "fmin {} must be positive",
                self.fmin
            )));
        }
        if self.fmin >= 0.5 {
            return Err(Error::InvalidSpec(format!(
                "fmin {} must lie below Nyquist (0.5 cycles/sample)",
                self.fmin
            )));
        }
        if !(self.bw.is_finite() && self.bw > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "bandwidth {} must be positive",
                self.bw
            )));
        }
        if self.bins == 0 {
            return Err(Error::InvalidSpec(
                "bins per octave must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Geometric filter centers from `fmin` up to Nyquist.
    pub fn centers(&self) -> Vec<f64> {
        (0..)
            .map(|j| self.fmin * (j as f64 / self.bins as f64).exp2())
            .take_while(|&f| f <= 0.5 + 1e-12)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameSpec {
    Gabor(GaborFrameSpec),
    Filterbank(FilterbankFrameSpec),
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec::Gabor(GaborFrameSpec::default())
    }
}

impl FrameSpec {
    pub fn slice_len(&self) -> usize {
        match self {
            FrameSpec::Gabor(g) => g.slice_len,
            FrameSpec::Filterbank(f) => f.slice_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FrameSpec::Gabor(g) => g.validate(),
            FrameSpec::Filterbank(f) => f.validate(),
        }
    }

    pub fn build(&self) -> Result<Frame> {
        Frame::new(self)
    }
}

/// Which frame produced a coefficient grid.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameTag {
    Gabor(GaborFrameSpec),
    Filterbank(FilterbankFrameSpec),
    CustomFilterbank { slice_len: usize, filters: usize },
    Raw,
}

/// Complex analysis coefficients of one slice, row-major over `[time, channel]`.
#[derive(Clone, PartialEq)]
pub struct CoefficientGrid {
    time_len: usize,
    channels: usize,
    values: Vec<Complex64>,
    frame: FrameTag,
}

impl fmt::Debug for CoefficientGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientGrid")
            .field("shape", &(self.time_len, self.channels))
            .field("frame", &self.frame)
            .finish_non_exhaustive()
    }
}

impl CoefficientGrid {
    /// Wrap raw values, e.g. for tests or externally computed coefficients.
    pub fn from_values(time_len: usize, channels: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != time_len * channels {
            return Err(Error::InputShape(format!(
                "{} values for a {time_len}x{channels} grid",
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Parameter("coefficients must be finite".into()));
        }
        Ok(Self {
            time_len,
            channels,
            values,
            frame: FrameTag::Raw,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.time_len, self.channels)
    }

    pub fn frame(&self) -> &FrameTag {
        &self.frame
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.values[k * self.channels + l]
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.values[k * self.channels..(k + 1) * self.channels]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// True when any coefficient has a nonzero imaginary part.
    pub fn is_complex(&self) -> bool {
        self.values.iter().any(|c| c.im != 0.0)
    }

    pub fn same_shape(&self, other: &CoefficientGrid) -> bool {
        self.shape() == other.shape()
    }
}

/// Lower and upper frame bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    fn checked(lower: f64, upper: f64) -> Result<Self> {
        if !(upper > 0.0) || lower <= DEGENERATE_RATIO * upper {
            return Err(Error::DegenerateFrame { upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn condition(&self) -> f64 {
        self.upper / self.lower
    }
}

fn plan_pair(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::InputShape(format!(
            "slice has {got} samples, frame expects {want}"
        )));
    }
    Ok(())
}

/// Zero-phase Hann window of width `width`, wrapped into length `len`, unit l2 norm.
pub fn hann_window(len: usize, width: usize) -> Vec<f64> {
    let mut w = vec![0.0; len];
    let lo = -((width / 2) as isize);
    let hi = width.div_ceil(2) as isize - 1;
    for d in lo..=hi {
        let v = 0.5 + 0.5 * (2.0 * std::f64::consts::PI * d as f64 / width as f64).cos();
        w[d.rem_euclid(len as isize) as usize] = v;
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    w
}

#[derive(Clone)]
pub struct GaborFrame {
    spec: GaborFrameSpec,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GaborFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaborFrame")
            .field("spec", &self.spec)
            .finish()
    }
}

impl GaborFrame {
    pub fn new(spec: GaborFrameSpec) -> Result<Self> {
        spec.validate()?;
        let window = hann_window(spec.slice_len, spec.window_width);
        let (fft, _) = plan_pair(spec.slice_len);
        Ok(Self { spec, window, fft })
    }

    pub fn spec(&self) -> &GaborFrameSpec {
        &self.spec
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn analyze(&self, slice: &[f64]) -> Result<CoefficientGrid> {
        check_len(slice.len(), self.spec.slice_len)?;
        let input: Vec<Complex64> = slice.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.analyze_complex(&input)
    }

    pub fn analyze_complex(&self, slice: &[Complex64]) -> Result<CoefficientGrid> {
        let m = self.spec.slice_len;
        check_len(slice.len(), m)?;
        let (kt, kf) = (self.spec.time_positions(), self.spec.channels());
        let mut values = Vec::with_capacity(kt * kf);
        let mut buf = vec![Complex64::default(); m];
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        for k in 0..kt {
            let shift = k * self.spec.time_step;
            for (t, b) in buf.iter_mut().enumerate() {
                *b = slice[t] * self.window[(t + m - shift) % m];
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            values.extend((0..kf).map(|l| buf[l * self.spec.freq_step]));
        }
        Ok(CoefficientGrid {
            time_len: kt,
            channels: kf,
            values,
            frame: FrameTag::Gabor(self.spec),
        })
    }

    /// Extreme eigenvalues of the frame operator, which is real symmetric
    /// with `S[t,t'] = K_f * sum_k w(t-ka) w(t'-ka)` when `t - t'` is a
    /// multiple of `K_f`, else zero.
    pub fn bounds(&self) -> Result<FrameBounds> {
        let m = self.spec.slice_len;
        let (kt, kf) = (self.spec.time_positions(), self.spec.channels());
        let w = &self.window;
        let s = DMatrix::from_fn(m, m, |t, u| {
            if !(t + m - u).is_multiple_of(kf) {
                return 0.0;
            }
            let acc: f64 = (0..kt)
                .map(|k| {
                    let shift = k * self.spec.time_step;
                    w[(t + m - shift) % m] * w[(u + m - shift) % m]
                })
                .sum();
            kf as f64 * acc
        });
        let eig = SymmetricEigen::new(s).eigenvalues;
        let lower = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        FrameBounds::checked(lower, upper)
    }

    /// Half-width of the window support in samples.
    pub fn support_radius(&self) -> usize {
        self.spec.window_width.div_ceil(2)
    }
}

#[derive(Clone)]
pub struct FilterbankFrame {
    spec: Option<FilterbankFrameSpec>,
    slice_len: usize,
    centers: Vec<f64>,
    responses: Vec<Vec<f64>>,
    band: Vec<bool>,
    impulse: Vec<Vec<Complex64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FilterbankFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterbankFrame")
            .field("spec", &self.spec)
            .field("filters", &self.responses.len())
            .finish()
    }
}

/// Signed frequency of DFT bin `n` in cycles/sample, Nyquist counted as +0.5.
fn bin_frequency(n: usize, len: usize) -> f64 {
    if 2 * n <= len {
        n as f64 / len as f64
    } else {
        (n as f64 - len as f64) / len as f64
    }
}

impl FilterbankFrame {
    pub fn new(spec: FilterbankFrameSpec) -> Result<Self> {
        spec.validate()?;
        let m = spec.slice_len;
        let centers = spec.centers();
        let responses = centers
            .iter()
            .map(|&fc| {
                let half = spec.bw * fc / spec.fmin;
                (0..m)
                    .map(|n| {
                        let nu = bin_frequency(n, m);
                        let x = (nu - fc) / half;
                        if nu > 0.0 && x.abs() <= 1.0 {
                            0.5 + 0.5 * (std::f64::consts::PI * x).cos()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let band = (0..m)
            .map(|n| 2 * n <= m && bin_frequency(n, m) > spec.fmin / 2.0)
            .collect();
        Ok(Self::assemble(Some(spec), m, centers, responses, band))
    }

    /// Filterbank from explicit nonnegative responses sampled on the length-`M`
    /// DFT grid. Frame bounds are evaluated over every frequency.
    pub fn from_responses(slice_len: usize, responses: Vec<Vec<f64>>) -> Result<Self> {
        if slice_len == 0 || responses.is_empty() {
            return Err(Error::InvalidSpec(
                "need a positive length and at least one filter".into(),
            ));
        }
        for r in &responses {
            if r.len() != slice_len {
                return Err(Error::InvalidSpec(format!(
                    "response has {} samples, expected {slice_len}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidSpec(
                    "responses must be finite and nonnegative".into(),
                ));
            }
        }
        let band = (0..slice_len).map(|n| 2 * n <= slice_len).collect();
        Ok(Self::assemble(None, slice_len, Vec::new(), responses, band))
    }

    fn assemble(
        spec: Option<FilterbankFrameSpec>,
        m: usize,
        centers: Vec<f64>,
        responses: Vec<Vec<f64>>,
        band: Vec<bool>,
    ) -> Self {
        let (fft, ifft) = plan_pair(m);
        let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
        let impulse = responses
            .iter()
            .map(|h| {
                let mut buf: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                ifft.process_with_scratch(&mut buf, &mut scratch);
                buf.iter_mut().for_each(|v| *v /= m as f64);
                buf
            })
            .collect();
        Self {
            spec,
            slice_len: m,
            centers,
            responses,
            band,
            impulse,
            fft,
            ifft,
        }
    }

    pub fn spec(&self) -> Option<&FilterbankFrameSpec> {
        self.spec.as_ref()
    }

    pub fn filters(&self) -> usize {
        self.responses.len()
    }

    /// Center frequencies (empty for custom filterbanks).
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Frequency response of filter `l` on the DFT grid.
    pub fn response(&self, l: usize) -> &[f64] {
        &self.responses[l]
    }

    /// Time-domain impulse response of filter `l`, i.e. its channel output
    /// for a unit impulse at sample 0.
    pub fn impulse_response(&self, l: usize) -> &[Complex64] {
        &self.impulse[l]
    }

    fn tag(&self) -> FrameTag {
        match self.spec {
            Some(s) => FrameTag::Filterbank(s),
            None => FrameTag::CustomFilterbank {
                slice_len: self.slice_len,
                filters: self.responses.len(),
            },
        }
    }

    pub fn analyze(&self, slice: &[f64]) -> Result<CoefficientGrid> {
        check_len(slice.len(), self.slice_len)?;
        let input: Vec<Complex64> = slice.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.analyze_complex(&input)
    }

    pub fn analyze_complex(&self, slice: &[Complex64]) -> Result<CoefficientGrid> {
        let m = self.slice_len;
        check_len(slice.len(), m)?;
        let kf = self.responses.len();
        let scratch_len = self
            .fft
            .get_inplace_scratch_len()
            .max(self.ifft.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];
        let mut spectrum = slice.to_vec();
        self.fft.process_with_scratch(&mut spectrum, &mut scratch);

        let mut values = vec![Complex64::default(); m * kf];
        let mut buf = vec![Complex64::default(); m];
        let scale = 1.0 / m as f64;
        for (l, h) in self.responses.iter().enumerate() {
            for ((b, s), &g) in buf.iter_mut().zip(&spectrum).zip(h) {
                *b = s * g;
            }
            self.ifft.process_with_scratch(&mut buf, &mut scratch);
            for (k, b) in buf.iter().enumerate() {
                values[k * kf + l] = b * scale;
            }
        }
        Ok(CoefficientGrid {
            time_len: m,
            channels: kf,
            values,
            frame: self.tag(),
        })
    }

    /// Summed squared response per DFT bin, `S(n) = sum_l |H_l(n)|^2`.
    pub fn response_energy(&self) -> Vec<f64> {
        (0..self.slice_len)
            .map(|n| self.responses.iter().map(|h| h[n] * h[n]).sum())
            .collect()
    }

    /// Frame bounds for real-valued slices over the covered band.
    ///
    /// A real slice has `|F(n)| = |F(M-n)|`, so each positive bin sees the
    /// mean of the summed squared responses at `n` and its mirror. DC and
    /// Nyquist are their own mirrors.
    pub fn bounds(&self) -> Result<FrameBounds> {
        let m = self.slice_len;
        let energy = self.response_energy();
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        for n in (0..m).filter(|&n| self.band[n]) {
            let mirror = (m - n) % m;
            let r = if mirror == n {
                energy[n]
            } else {
                0.5 * (energy[n] + energy[mirror])
            };
            lower = lower.min(r);
            upper = upper.max(r);
        }
        if !lower.is_finite() {
            return Err(Error::DegenerateFrame { upper: 0.0 });
        }
        FrameBounds::checked(lower, upper)
    }

    /// Smallest radius holding 90% of every filter's impulse-response energy
    /// within that circular distance of sample 0.
    pub fn support_radius(&self) -> usize {
        let m = self.slice_len;
        self.impulse
            .iter()
            .map(|h| {
                let total: f64 = h.iter().map(|v| v.norm_sqr()).sum();
                (0..=m / 2)
                    .find(|&r| {
                        let inside: f64 = h
                            .iter()
                            .enumerate()
                            .filter(|(t, _)| (*t).min(m - *t) <= r)
                            .map(|(_, v)| v.norm_sqr())
                            .sum();
                        inside >= 0.9 * total
                    })
                    .unwrap_or(m / 2)
            })
            .max()
            .unwrap_or(0)
    }
}

/// A built analysis frame; immutable and shareable across workers.
#[derive(Debug, Clone)]
pub enum Frame {
    Gabor(GaborFrame),
    Filterbank(FilterbankFrame),
}

impl Frame {
    pub fn new(spec: &FrameSpec) -> Result<Self> {
        Ok(match spec {
            FrameSpec::Gabor(g) => Frame::Gabor(GaborFrame::new(*g)?),
            FrameSpec::Filterbank(f) => Frame::Filterbank(FilterbankFrame::new(*f)?),
        })
    }

    pub fn slice_len(&self) -> usize {
        match self {
            Frame::Gabor(g) => g.spec.slice_len,
            Frame::Filterbank(f) => f.slice_len,
        }
    }

    /// `(K_t, K_f)` of the coefficient grids this frame produces.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Frame::Gabor(g) => (g.spec.time_positions(), g.spec.channels()),
            Frame::Filterbank(f) => (f.slice_len, f.filters()),
        }
    }

    /// Samples between consecutive time positions of the coefficient grid.
    pub fn time_step(&self) -> usize {
        match self {
            Frame::Gabor(g) => g.spec.time_step,
            Frame::Filterbank(_) => 1,
        }
    }

    pub fn analyze(&self, slice: &[f64]) -> Result<CoefficientGrid> {
        match self {
            Frame::Gabor(g) => g.analyze(slice),
            Frame::Filterbank(f) => f.analyze(slice),
        }
    }

    pub fn bounds(&self) -> Result<FrameBounds> {
        match self {
            Frame::Gabor(g) => g.bounds(),
            Frame::Filterbank(f) => f.bounds(),
        }
    }

    /// Samples on either side of a time position that its atom reaches.
    pub fn support_radius(&self) -> usize {
        match self {
            Frame::Gabor(g) => g.support_radius(),
            Frame::Filterbank(f) => f.support_radius(),
        }
    }
}

/// `frame_bounds` for either frame kind.
pub fn frame_bounds(spec: &FrameSpec) -> Result<FrameBounds> {
    Frame::new(spec)?.bounds()
}

/// Robust noise level of a coefficient grid: `median(|c|) / kappa` over the
/// coefficients not flagged in `exclude`.
///
/// `kappa` is [`MAD_REAL`] for real-valued grids and [`MAD_COMPLEX`] when any
/// coefficient is complex, so the estimate is consistent for Gaussian noise in
/// both cases.
pub fn mad_noise_sigma(coeffs: &CoefficientGrid, exclude: Option<&[bool]>) -> Result<f64> {
    if let Some(ex) = exclude {
        if ex.len() != coeffs.values.len() {
            return Err(Error::InputShape(format!(
                "exclusion mask has {} entries for {} coefficients",
                ex.len(),
                coeffs.values.len()
            )));
        }
    }
    let mut mags: Vec<f64> = coeffs
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| exclude.is_none_or(|ex| !ex[*i]))
        .map(|(_, c)| c.norm())
        .collect();
    mad_sigma(&mut mags, coeffs.is_complex())
}

/// [`mad_noise_sigma`] on precomputed magnitudes. Reorders `magnitudes`.
pub fn mad_sigma(magnitudes: &mut [f64], complex: bool) -> Result<f64> {
    let med = median_in_place(magnitudes)
        .ok_or_else(|| Error::EmptyInput("no coefficients left for noise estimation".into()))?;
    Ok(med / if complex { MAD_COMPLEX } else { MAD_REAL })
}
