//! The full parameter set of a run, validated up front and echoed into every
//! output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::FrameSpec;
use crate::peakpick::{ExtractParams, LambdaPolicy, SliceConfig};
use crate::spatial::NeighborhoodSpec;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub slice: SliceConfig,
    pub frame: FrameSpec,
    pub lambda: LambdaPolicy,
    /// Neighborhood for spatially-aware picking; `None` picks each spot alone.
    pub spatial: Option<NeighborhoodSpec>,
    /// Top-hat window in bins; `None` keeps the baseline.
    pub baseline: Option<usize>,
    pub tic: bool,
    pub extract: ExtractParams,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.slice.validate()?;
        self.frame.validate()?;
        if self.frame.slice_len() != self.slice.slice_len {
            return Err(Error::Parameter(format!(
                "frame slice length {} differs from slicing length {}",
                self.frame.slice_len(),
                self.slice.slice_len
            )));
        }
        self.lambda.validate()?;
        if let Some(s) = &self.spatial {
            s.validate()?;
        }
        if self.baseline == Some(0) {
            return Err(Error::Parameter("top-hat window must be positive".into()));
        }
        self.extract.validate()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Format(format!("bad config: {e}")))
    }

    /// Reads a JSON config file. Outputs of this crate embed their config
    /// under a `config` key, so such files are accepted as well.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        match value.get("config") {
            Some(inner) if inner.is_object() => Self::from_json(inner.clone()),
            _ => Self::from_json(value),
        }
    }
}
