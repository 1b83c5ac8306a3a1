//! Scoring detected peaks against annotated ground truth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peakpick::Peak;

pub const DEFAULT_REL_TOL: f64 = 0.01;

/// Outcome of matching detected peaks to reference peaks. Indices refer to
/// the input slices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// `(detected, reference)` pairs in matching order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_detected: Vec<usize>,
    pub unmatched_reference: Vec<usize>,
}

/// Greedy one-to-one matching: detected peaks in descending score order each
/// take the nearest unmatched reference within `rel_tol * mz_ref`.
pub fn match_peaks(detected: &[Peak], reference: &[Peak], rel_tol: f64) -> Result<Matching> {
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(Error::Parameter(format!(
            "relative tolerance must be positive, got {rel_tol}"
        )));
    }
    let mut order: Vec<usize> = (0..detected.len()).collect();
    order.sort_by(|&a, &b| {
        detected[b]
            .score
            .total_cmp(&detected[a].score)
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; reference.len()];
    let mut out = Matching::default();
    for d in order {
        let mz = detected[d].mz;
        let best = reference
            .iter()
            .enumerate()
            .filter(|(r, p)| !taken[*r] && (mz - p.mz).abs() <= rel_tol * p.mz)
            .min_by(|(ra, a), (rb, b)| {
                (mz - a.mz)
                    .abs()
                    .total_cmp(&(mz - b.mz).abs())
                    .then(a.mz.total_cmp(&b.mz))
                    .then(ra.cmp(rb))
            })
            .map(|(r, _)| r);
        match best {
            Some(r) => {
                taken[r] = true;
                out.pairs.push((d, r));
            }
            None => out.unmatched_detected.push(d),
        }
    }
    out.unmatched_detected.sort_unstable();
    out.unmatched_reference = (0..reference.len()).filter(|&r| !taken[r]).collect();
    Ok(out)
}

/// Sensitivity, FDR and F1 of one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub sensitivity: f64,
    pub fdr: f64,
    pub f1: f64,
    pub n_reference: usize,
    pub n_detected: usize,
    pub n_correct: usize,
    pub n_false: usize,
}

/// Harmonic mean of precision `1 - fdr` and sensitivity; 0 when both are 0.
pub fn f1_score(sensitivity: f64, fdr: f64) -> f64 {
    let precision = 1.0 - fdr;
    let denom = precision + sensitivity;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * precision * sensitivity / denom
    }
}

/// Scores from raw counts.
pub fn score(n_reference: usize, n_detected: usize, n_correct: usize) -> Scores {
    let n_false = n_detected.saturating_sub(n_correct);
    let sensitivity = if n_reference == 0 {
        if n_detected == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        n_correct as f64 / n_reference as f64
    };
    let fdr = if n_detected == 0 {
        0.0
    } else {
        n_false as f64 / n_detected as f64
    };
    Scores {
        sensitivity,
        fdr,
        f1: f1_score(sensitivity, fdr),
        n_reference,
        n_detected,
        n_correct,
        n_false,
    }
}

impl Scores {
    pub fn from_matching(m: &Matching) -> Self {
        let n_detected = m.pairs.len() + m.unmatched_detected.len();
        let n_reference = m.pairs.len() + m.unmatched_reference.len();
        score(n_reference, n_detected, m.pairs.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Scores over all spectra pooled.
    pub sensitivity: f64,
    pub fdr: f64,
    pub f1: f64,
    pub n_reference: usize,
    pub n_detected: usize,
    pub n_correct: usize,
    pub n_false: usize,
    /// Means of the per-spectrum scores.
    pub mean_sensitivity: f64,
    pub mean_fdr: f64,
    pub mean_f1: f64,
    pub rel_tol: f64,
    pub per_spectrum: Vec<Scores>,
}

/// Scores each `(detected, reference)` pair of lists and aggregates them.
pub fn evaluate(runs: &[(Vec<Peak>, Vec<Peak>)], rel_tol: f64) -> Result<EvalReport> {
    let per_spectrum = runs
        .iter()
        .map(|(d, r)| match_peaks(d, r, rel_tol).map(|m| Scores::from_matching(&m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_scores(per_spectrum, rel_tol))
}

impl EvalReport {
    pub fn from_scores(per_spectrum: Vec<Scores>, rel_tol: f64) -> Self {
        let sum = |f: fn(&Scores) -> usize| per_spectrum.iter().map(f).sum::<usize>();
        let pooled = score(
            sum(|s| s.n_reference),
            sum(|s| s.n_detected),
            sum(|s| s.n_correct),
        );
        let n = per_spectrum.len().max(1) as f64;
        let mean = |f: fn(&Scores) -> f64| per_spectrum.iter().map(f).sum::<f64>() / n;
        Self {
            sensitivity: pooled.sensitivity,
            fdr: pooled.fdr,
            f1: pooled.f1,
            n_reference: pooled.n_reference,
            n_detected: pooled.n_detected,
            n_correct: pooled.n_correct,
            n_false: pooled.n_false,
            mean_sensitivity: mean(|s| s.sensitivity),
            mean_fdr: mean(|s| s.fdr),
            mean_f1: mean(|s| s.f1),
            rel_tol,
            per_spectrum,
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "spectra      {}", self.per_spectrum.len())?;
        writeln!(f, "tolerance    {:.4} (relative m/z)", self.rel_tol)?;
        writeln!(
            f,
            "peaks        {} reference, {} detected, {} correct, {} false",
            self.n_reference, self.n_detected, self.n_correct, self.n_false
        )?;
        writeln!(f, "sensitivity  {:.4}", self.sensitivity)?;
        writeln!(f, "fdr          {:.4}", self.fdr)?;
        writeln!(f, "f1           {:.4}", self.f1)?;
        if self.per_spectrum.len() > 1 {
            writeln!(
                f,
                "mean         sensitivity {:.4}, fdr {:.4}, f1 {:.4}",
                self.mean_sensitivity, self.mean_fdr, self.mean_f1
            )?;
        }
        Ok(())
    }
}
