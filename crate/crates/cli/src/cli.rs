use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use framepick::peakpick::LambdaMode;
use framepick::{
    Error, FilterbankFrameSpec, FrameSpec, GaborFrameSpec, Kernel, NeighborhoodSpec, Result,
    RunConfig,
};

/// Peak picking and denoising for mass spectra and imaging datasets.
///
/// Datasets are `.csv` files holding one `mz,intensity` spectrum or binary
/// container files holding a grid of spectra. Every output records the full
/// run configuration; pass an output back through `--config` to rerun it.
#[derive(Debug, Parser)]
#[command(name = "framepick", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate annotated synthetic data.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Pick peaks: writes peak lists as JSON and optionally the indicator z.
    Pick(PickArgs),
    /// Write the indicator z as a dataset.
    ///
    /// Peak intensities in z do not have any relation to peak intensities in
    /// the original spectrum: z only says where peaks are.
    Denoise(DenoiseArgs),
    /// Score detected peak lists against ground truth.
    Eval(EvalArgs),
    /// Render one m/z bin or bin range of a dataset as a grayscale image.
    Render(RenderArgs),
    /// Find the regularization weight that yields a target peak count.
    TuneLambda(TuneArgs),
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// Independent spectra with Gaussian peaks, baseline and decaying noise.
    Spectra(SpectraArgs),
    /// A spot grid with four shapes, each bound to its own m/z bin.
    Phantom(PhantomArgs),
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 15_000)]
    pub length: usize,
    #[arg(long, default_value_t = 20)]
    pub peaks: usize,
    /// Noise standard deviation at the start of the axis.
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.0)]
    pub baseline_amp: f64,
    /// Decay length of the baseline in bins; 0 disables it.
    #[arg(long, default_value_t = 1500.0)]
    pub baseline_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset file; `.csv` is allowed for a single spectrum.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth peak lists (JSON).
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[arg(long, default_value_t = 40)]
    pub rows: usize,
    #[arg(long, default_value_t = 40)]
    pub cols: usize,
    #[arg(long, default_value_t = 300)]
    pub length: usize,
    /// Bins of the square, triangle, circle and cross.
    #[arg(long, value_delimiter = ',', default_values_t = [60, 120, 180, 240])]
    pub bins: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Log-std of the per-spot peak amplitude.
    #[arg(long, default_value_t = 0.8)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FrameKind {
    Gabor,
    Filterbank,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Fixed,
    NoiseAdaptive,
    TargetCount,
}

/// Settings shared by every command that runs the pipeline. Unset flags
/// keep the value from `--config`, or the default.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// JSON config, or any JSON output of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Slice length M in samples.
    #[arg(long)]
    pub slice_len: Option<usize>,
    /// Fractional slice overlap in (0, 1).
    #[arg(long)]
    pub overlap: Option<f64>,
    #[arg(long, value_enum)]
    pub frame: Option<FrameKind>,
    /// Hann window width of the Gabor frame.
    #[arg(long)]
    pub window_width: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub lambda_mode: Option<ModeArg>,
    /// Peak count for the target-count mode.
    #[arg(long)]
    pub target: Option<usize>,
    /// none, average, gaussian:SIGMA, disk:RADIUS or median.
    #[arg(long)]
    pub spatial: Option<String>,
    /// Odd side length of the spatial window.
    #[arg(long)]
    pub kernel_size: Option<usize>,
    /// none or tophat:WINDOW.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Normalize each spectrum to unit total ion count.
    #[arg(long)]
    pub tic: bool,
    #[arg(long)]
    pub min_score: Option<f64>,
    /// Minimum distance in bins between reported peaks.
    #[arg(long)]
    pub min_separation: Option<usize>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PickArgs {
    pub input: PathBuf,
    /// Peak lists (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the indicator z as a dataset.
    #[arg(long)]
    pub indicators: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    /// Dataset file; `.csv` is allowed for a single spectrum.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Output of `pick`.
    #[arg(long)]
    pub detected: PathBuf,
    /// Output of `simulate`, or any file with the same `spots` layout.
    #[arg(long)]
    pub truth: PathBuf,
    /// Relative m/z tolerance.
    #[arg(long, default_value_t = framepick::eval::DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub input: PathBuf,
    /// Single bin index.
    #[arg(long, conflicts_with_all = ["bins", "mz"])]
    pub bin: Option<usize>,
    /// Inclusive bin range LO:HI.
    #[arg(long, conflicts_with = "mz")]
    pub bins: Option<String>,
    /// The bin nearest to this m/z.
    #[arg(long)]
    pub mz: Option<f64>,
    /// Fraction of the brightest spots clipped before scaling.
    #[arg(long, default_value_t = 0.0)]
    pub hotspot: f64,
    /// `.png` or `.pgm`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    pub input: PathBuf,
    /// Tune every spot, not only the mean spectrum.
    #[arg(long)]
    pub per_spot: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn parse_number<T: std::str::FromStr>(what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("bad {what}: {s:?}")))
}

fn parse_spatial(s: &str) -> Result<Option<Kernel>> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let kernel = match (name, arg) {
        ("none", None) => return Ok(None),
        ("average", None) => Kernel::Average,
        ("median", None) => Kernel::Median,
        ("gaussian", None) => Kernel::Gaussian { sigma: 0.5 },
        ("gaussian", Some(a)) => Kernel::Gaussian {
            sigma: parse_number("gaussian sigma", a)?,
        },
        ("disk", Some(a)) => Kernel::Disk {
            radius: parse_number("disk radius", a)?,
        },
        _ => {
            return Err(bad(format!(
                "--spatial takes none, average, gaussian:SIGMA, disk:RADIUS or median, not {s:?}"
            )))
        }
    };
    Ok(Some(kernel))
}

fn parse_baseline(s: &str) -> Result<Option<usize>> {
    match s.split_once(':') {
        None if s == "none" => Ok(None),
        None if s == "tophat" => Ok(Some(framepick::preprocess::DEFAULT_TOPHAT_WINDOW)),
        Some(("tophat", w)) => Ok(Some(parse_number("top-hat window", w)?)),
        _ => Err(bad(format!(
            "--baseline takes none or tophat:WINDOW, not {s:?}"
        ))),
    }
}

impl PipelineArgs {
    /// The validated configuration: `--config` (or defaults) overridden by flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.slice_len {
            cfg.slice.slice_len = m;
            match &mut cfg.frame {
                FrameSpec::Gabor(g) => g.slice_len = m,
                FrameSpec::Filterbank(f) => f.slice_len = m,
            }
        }
        if let Some(o) = self.overlap {
            cfg.slice.overlap = o;
        }
        match (self.frame, &cfg.frame) {
            (Some(FrameKind::Gabor), FrameSpec::Filterbank(_)) => {
                cfg.frame = FrameSpec::Gabor(GaborFrameSpec {
                    slice_len: cfg.slice.slice_len,
                    ..GaborFrameSpec::default()
                })
            }
            (Some(FrameKind::Filterbank), FrameSpec::Gabor(_)) => {
                cfg.frame = FrameSpec::Filterbank(FilterbankFrameSpec {
                    slice_len: cfg.slice.slice_len,
                    ..FilterbankFrameSpec::default()
                })
            }
            _ => {}
        }
        if let Some(w) = self.window_width {
            match &mut cfg.frame {
                FrameSpec::Gabor(g) => g.window_width = w,
                FrameSpec::Filterbank(_) => {
                    return Err(bad("--window-width applies to the gabor frame only"))
                }
            }
        }
        if let Some(l) = self.lambda {
            cfg.lambda.base_lambda = l;
        }
        if let Some(t) = self.target {
            cfg.lambda.target = Some(t);
            if self.lambda_mode.is_none() {
                cfg.lambda.mode = LambdaMode::TargetCount;
            }
        }
        if let Some(mode) = self.lambda_mode {
            cfg.lambda.mode = match mode {
                ModeArg::Fixed => LambdaMode::Fixed,
                ModeArg::NoiseAdaptive => LambdaMode::NoiseAdaptive,
                ModeArg::TargetCount => LambdaMode::TargetCount,
            };
        }
        if let Some(s) = &self.spatial {
            cfg.spatial = parse_spatial(s)?.map(|kernel| NeighborhoodSpec {
                kernel,
                size: cfg.spatial.map_or(3, |old| old.size),
            });
        }
        if let Some(k) = self.kernel_size {
            match &mut cfg.spatial {
                Some(spec) => spec.size = k,
                None => return Err(bad("--kernel-size needs a spatial kernel (--spatial)")),
            }
        }
        if let Some(b) = &self.baseline {
            cfg.baseline = parse_baseline(b)?;
        }
        if self.tic {
            cfg.tic = true;
        }
        if let Some(s) = self.min_score {
            cfg.extract.min_score = s;
        }
        if let Some(s) = self.min_separation {
            cfg.extract.min_separation = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threads == Some(0) {
            return Err(bad("--threads must be positive"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
