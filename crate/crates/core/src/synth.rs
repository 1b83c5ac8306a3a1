//! Annotated synthetic spectra and spatial phantoms.
//!
//! Spectra are sums of Gaussian peaks on an exponentially decaying baseline
//! with additive Gaussian noise whose level decays along the axis, mimicking
//! the low-mass offset and heteroscedastic noise of MALDI-TOF data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetGrid, Spectrum};
use crate::error::{Error, Result};
use crate::peakpick::Peak;

/// FWHM of a Gaussian divided by its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    pub n_peaks: usize,
    /// Full width at half maximum, in bins.
    pub peak_width: (f64, f64),
    pub amplitude: (f64, f64),
    pub baseline_amp: f64,
    /// Decay length of the baseline in bins; 0 disables it.
    pub baseline_scale: f64,
    pub noise_sigma0: f64,
    /// Noise std is `noise_sigma0 * exp(-t * noise_decay)` at bin `t`.
    pub noise_decay: f64,
    /// Bins kept free of peak centers at both ends.
    pub edge_margin: usize,
    pub mz_range: (f64, f64),
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            length: 15_000,
            n_peaks: 20,
            peak_width: (3.0, 7.0),
            amplitude: (0.25, 1.0),
            baseline_amp: 1.0,
            baseline_scale: 1500.0,
            noise_sigma0: 0.02,
            noise_decay: 1.0 / 15_000.0,
            edge_margin: 100,
            mz_range: (1000.0, 10_000.0),
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Parameter(format!(
            "{name} range ({lo}, {hi}) must be positive and ordered"
        )));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::Parameter(format!(
            "{name} must be nonnegative, got {v}"
        )));
    }
    Ok(())
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Parameter("spectrum length must be positive".into()));
        }
        check_range("peak width", self.peak_width)?;
        check_range("amplitude", self.amplitude)?;
        check_range("m/z", self.mz_range)?;
        if self.mz_range.0 == self.mz_range.1 && self.length > 1 {
            return Err(Error::Parameter("m/z range is empty".into()));
        }
        check_nonneg("baseline amplitude", self.baseline_amp)?;
        check_nonneg("baseline scale", self.baseline_scale)?;
        check_nonneg("noise sigma", self.noise_sigma0)?;
        check_nonneg("noise decay", self.noise_decay)
    }

    /// Minimum distance between peak centers in bins.
    pub fn min_separation(&self) -> usize {
        (3.0 * self.peak_width.1).ceil() as usize
    }
}

/// Axis whose square root is linear in the bin index, like a TOF m/z axis.
pub fn tof_axis(len: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    if len == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.sqrt(), hi.sqrt());
    (0..len)
        .map(|t| {
            let r = a + (b - a) * t as f64 / (len - 1) as f64;
            r * r
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn add_gaussian(f: &mut [f64], center: f64, fwhm: f64, amp: f64) {
    let sigma = fwhm / FWHM_PER_SIGMA;
    let reach = (8.0 * sigma).ceil() as usize + 1;
    let c = center.round() as usize;
    let lo = c.saturating_sub(reach);
    let hi = (c + reach + 1).min(f.len());
    for (t, v) in f.iter_mut().enumerate().take(hi).skip(lo) {
        let x = (t as f64 - center) / sigma;
        *v += amp * (-0.5 * x * x).exp();
    }
}

/// One annotated spectrum; the truth lists every inserted apex with its
/// amplitude as score, in ascending bin order.
pub fn synth_spectrum(spec: &SynthSpec) -> Result<(Spectrum, Vec<Peak>)> {
    spec.validate()?;
    let l = spec.length;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_peaks;

    let sep = spec.min_separation();
    let usable = (l - 1).checked_sub(2 * spec.edge_margin);
    let slack = usable.and_then(|u| u.checked_sub(n.saturating_sub(1) * sep));
    let slack = match (n, slack) {
        (0, _) => 0,
        (_, Some(s)) => s,
        (_, None) => {
            return Err(Error::Generation(format!(
                "{n} peaks {sep} bins apart do not fit in {l} bins with margin {}",
                spec.edge_margin
            )))
        }
    };
    let widths: Vec<f64> = (0..n).map(|_| uniform(&mut rng, spec.peak_width)).collect();
    let mut offsets: Vec<usize> = (0..n).map(|_| rng.random_range(0..=slack)).collect();
    offsets.sort_unstable();
    let centers: Vec<usize> = offsets
        .iter()
        .enumerate()
        .map(|(i, o)| spec.edge_margin + o + i * sep)
        .collect();
    let amps: Vec<f64> = (0..n).map(|_| uniform(&mut rng, spec.amplitude)).collect();

    let mut f = vec![0.0; l];
    for i in 0..n {
        add_gaussian(&mut f, centers[i] as f64, widths[i], amps[i]);
    }
    if spec.baseline_scale > 0.0 {
        for (t, v) in f.iter_mut().enumerate() {
            *v += spec.baseline_amp * (-(t as f64) / spec.baseline_scale).exp();
        }
    }
    if spec.noise_sigma0 > 0.0 {
        for (t, v) in f.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v += spec.noise_sigma0 * (-(t as f64) * spec.noise_decay).exp() * z;
        }
    }

    let mz = tof_axis(l, spec.mz_range);
    let truth = centers
        .iter()
        .zip(&amps)
        .map(|(&c, &a)| Peak {
            bin: c,
            mz: mz[c],
            score: a,
        })
        .collect();
    Ok((Spectrum::new(mz, f)?, truth))
}

/// A batch of spectra from consecutive seeds starting at `spec.seed`.
pub fn synth_corpus(spec: &SynthSpec, count: usize) -> Result<Vec<(Spectrum, Vec<Peak>)>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            synth_spectrum(&SynthSpec {
                seed: spec.seed.wrapping_add(i),
                ..*spec
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Square,
    Triangle,
    Circle,
    Cross,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [
        ShapeKind::Square,
        ShapeKind::Triangle,
        ShapeKind::Circle,
        ShapeKind::Cross,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Circle => "circle",
            ShapeKind::Cross => "cross",
        }
    }
}

/// A shape on the spot grid bound to one spectrum bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub bin: usize,
    /// `(row, col)` of the center; may fall between spots.
    pub center: (f64, f64),
    /// Half extent in spots.
    pub radius: f64,
}

impl ShapeSpec {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let dy = row as f64 - self.center.0;
        let dx = col as f64 - self.center.1;
        let r = self.radius;
        match self.kind {
            ShapeKind::Square => dx.abs() <= r && dy.abs() <= r,
            ShapeKind::Circle => dx * dx + dy * dy <= r * r,
            // apex up, base down
            ShapeKind::Triangle => dy.abs() <= r && dx.abs() <= 0.5 * (dy + r),
            ShapeKind::Cross => {
                let arm = r / 3.0;
                (dx.abs() <= arm && dy.abs() <= r) || (dy.abs() <= arm && dx.abs() <= r)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dims: (usize, usize),
    pub length: usize,
    pub shapes: Vec<ShapeSpec>,
    pub peak_amplitude: f64,
    /// FWHM in bins.
    pub peak_width: f64,
    /// Log-std of the per-spot multiplicative amplitude jitter.
    pub amplitude_jitter: f64,
    pub noise_sigma: f64,
    pub mz_range: (f64, f64),
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self::quadrants((40, 40), 300, [60, 120, 180, 240])
    }
}

impl PhantomSpec {
    /// Square, triangle, circle and cross centered in the four quadrants.
    pub fn quadrants(dims: (usize, usize), length: usize, bins: [usize; 4]) -> Self {
        let (h, w) = (dims.0 / 2, dims.1 / 2);
        let radius = (0.35 * h.min(w) as f64).floor();
        let shapes = ShapeKind::ALL
            .iter()
            .zip(bins)
            .enumerate()
            .map(|(i, (&kind, bin))| ShapeSpec {
                kind,
                bin,
                center: (
                    (i / 2 * h) as f64 + (h as f64 - 1.0) / 2.0,
                    (i % 2 * w) as f64 + (w as f64 - 1.0) / 2.0,
                ),
                radius,
            })
            .collect();
        Self {
            dims,
            length,
            shapes,
            peak_amplitude: 1.0,
            peak_width: 5.0,
            amplitude_jitter: 0.8,
            noise_sigma: 0.05,
            mz_range: (1000.0, 10_000.0),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (rows, cols) = self.dims;
        if rows == 0 || cols == 0 || self.length == 0 {
            return Err(Error::Parameter(
                "phantom dimensions must be positive".into(),
            ));
        }
        check_range("m/z", self.mz_range)?;
        if !(self.peak_amplitude > 0.0 && self.peak_width > 0.0) {
            return Err(Error::Parameter(
                "peak amplitude and width must be positive".into(),
            ));
        }
        check_nonneg("amplitude jitter", self.amplitude_jitter)?;
        check_nonneg("noise sigma", self.noise_sigma)?;
        for (i, s) in self.shapes.iter().enumerate() {
            if s.bin >= self.length {
                return Err(Error::Generation(format!(
                    "{} bound to bin {} beyond length {}",
                    s.kind.name(),
                    s.bin,
                    self.length
                )));
            }
            if self.shapes[..i].iter().any(|o| o.bin == s.bin) {
                return Err(Error::Generation(format!("bin {} bound twice", s.bin)));
            }
            let (cy, cx) = s.center;
            if !(s.radius >= 0.0
                && cy - s.radius >= 0.0
                && cx - s.radius >= 0.0
                && cy + s.radius <= (rows - 1) as f64
                && cx + s.radius <= (cols - 1) as f64)
            {
                return Err(Error::Generation(format!(
                    "{} does not fit in a {rows}x{cols} grid",
                    s.kind.name()
                )));
            }
        }
        Ok(())
    }
}

/// Membership of every spot in one phantom shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeMap {
    pub kind: ShapeKind,
    pub bin: usize,
    pub mz: f64,
    /// Row-major, `rows * cols` entries.
    pub members: Vec<bool>,
}

impl ShapeMap {
    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }
}

/// A phantom dataset: in-shape spots carry a peak at their shape's bin, all
/// spots carry noise.
pub fn synth_phantom(spec: &PhantomSpec) -> Result<(DatasetGrid, Vec<ShapeMap>)> {
    spec.validate()?;
    let (rows, cols) = spec.dims;
    let mz = tof_axis(spec.length, spec.mz_range);
    let mut owner: Vec<Option<usize>> = vec![None; rows * cols];
    let mut maps = Vec::with_capacity(spec.shapes.len());
    for (s, shape) in spec.shapes.iter().enumerate() {
        let mut members = vec![false; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                if shape.contains(r, c) {
                    let i = r * cols + c;
                    if let Some(o) = owner[i] {
                        return Err(Error::Generation(format!(
                            "{} and {} overlap at spot ({r}, {c})",
                            spec.shapes[o].kind.name(),
                            shape.kind.name()
                        )));
                    }
                    owner[i] = Some(s);
                    members[i] = true;
                }
            }
        }
        maps.push(ShapeMap {
            kind: shape.kind,
            bin: shape.bin,
            mz: mz[shape.bin],
            members,
        });
    }

    let spectra: Vec<Vec<f64>> = (0..rows * cols)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            let mut f = vec![0.0; spec.length];
            if let Some(s) = owner[i] {
                let z: f64 = rng.sample(StandardNormal);
                let amp = spec.peak_amplitude * (spec.amplitude_jitter * z).exp();
                add_gaussian(&mut f, spec.shapes[s].bin as f64, spec.peak_width, amp);
            }
            if spec.noise_sigma > 0.0 {
                for v in &mut f {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += spec.noise_sigma * z;
                }
            }
            f
        })
        .collect();
    Ok((DatasetGrid::from_rows(spec.dims, mz, spectra)?, maps))
}
