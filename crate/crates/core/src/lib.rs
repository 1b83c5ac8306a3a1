//! Peak picking for (imaging) mass spectrometry with sparse frame multipliers.
//!
//! Each spectrum is cut into overlapping slices, consecutive slices are
//! analyzed in a Gabor or constant-Q filterbank frame, and the closed-form
//! mask between their coefficient magnitudes marks where a slice gains
//! energy the next one lacks. Negative mask deviations accumulate into a
//! per-bin indicator whose local maxima are the peaks.

pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod frames;
pub mod io;
pub mod multiplier;
pub mod peakpick;
pub mod pipeline;
pub mod preprocess;
pub mod spatial;
mod stats;
pub mod synth;

pub use config::RunConfig;
pub use dataset::{DatasetGrid, Spectrum};
pub use error::{Error, Result};
pub use frames::{
    CoefficientGrid, FilterbankFrame, FilterbankFrameSpec, Frame, FrameBounds, FrameSpec,
    GaborFrame, GaborFrameSpec,
};
pub use multiplier::{MaskGrid, NeighborWeights, Reducer};
pub use peakpick::{
    DatasetPicks, ExtractParams, LambdaMode, LambdaPolicy, Peak, PeakIndicator, SliceConfig,
};
pub use spatial::{Kernel, NeighborhoodSpec};
pub use synth::{PhantomSpec, SynthSpec};
