//! Neighborhood kernels over the spot grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplier::{NeighborWeights, Reducer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Average,
    Gaussian { sigma: f64 },
    Disk { radius: f64 },
    Median,
}

/// A square offset window of side `size` with a weighting rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub kernel: Kernel,
    pub size: usize,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        Self {
            kernel: Kernel::Gaussian { sigma: 0.5 },
            size: 3,
        }
    }
}

impl NeighborhoodSpec {
    pub fn new(kernel: Kernel, size: usize) -> Self {
        Self { kernel, size }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "kernel size must be odd and positive, got {}",
                self.size
            )));
        }
        match self.kernel {
            Kernel::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => Err(
                Error::Parameter(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            Kernel::Disk { radius } if !(radius.is_finite() && radius > 0.0) => Err(
                Error::Parameter(format!("disk radius must be positive, got {radius}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn reducer(&self) -> Reducer {
        match self.kernel {
            Kernel::Median => Reducer::Median,
            _ => Reducer::Linear,
        }
    }

    fn half(&self) -> isize {
        (self.size / 2) as isize
    }
}

fn normalized(offsets: Vec<(isize, isize)>, raw: Vec<f64>) -> NeighborWeights {
    let total: f64 = raw.iter().sum();
    NeighborWeights {
        offsets,
        weights: raw.into_iter().map(|w| w / total).collect(),
    }
}

/// Weights over the full `size x size` window, offsets in row-major order.
/// Offsets with zero weight (outside a disk) are left out.
pub fn kernel_weights(spec: &NeighborhoodSpec) -> Result<NeighborWeights> {
    spec.validate()?;
    let h = spec.half();
    let mut offsets = Vec::with_capacity(spec.size * spec.size);
    let mut raw = Vec::with_capacity(spec.size * spec.size);
    for dr in -h..=h {
        for dc in -h..=h {
            let r2 = (dr * dr + dc * dc) as f64;
            let w = match spec.kernel {
                Kernel::Average | Kernel::Median => 1.0,
                Kernel::Gaussian { sigma } => (-r2 / (2.0 * sigma * sigma)).exp(),
                Kernel::Disk { radius } => {
                    if r2 <= radius * radius {
                        1.0
                    } else {
                        continue;
                    }
                }
            };
            offsets.push((dr, dc));
            raw.push(w);
        }
    }
    Ok(normalized(offsets, raw))
}

/// Neighbor coordinates of `center` on a `rows x cols` grid. Offsets that fall
/// outside the grid or onto absent spots (`occupancy[r * cols + c] == false`)
/// are dropped and the remaining weights renormalized. The center is always
/// kept.
pub fn resolve_neighbors(
    center: (usize, usize),
    dims: (usize, usize),
    occupancy: Option<&[bool]>,
    spec: &NeighborhoodSpec,
) -> Result<(Vec<(usize, usize)>, NeighborWeights)> {
    let (rows, cols) = dims;
    if center.0 >= rows || center.1 >= cols {
        return Err(Error::Parameter(format!(
            "spot {center:?} outside a {rows}x{cols} grid"
        )));
    }
    if let Some(occ) = occupancy {
        if occ.len() != rows * cols {
            return Err(Error::InputShape(format!(
                "occupancy has {} entries for a {rows}x{cols} grid",
                occ.len()
            )));
        }
    }
    let full = kernel_weights(spec)?;
    let mut coords = Vec::with_capacity(full.len());
    let mut offsets = Vec::with_capacity(full.len());
    let mut raw = Vec::with_capacity(full.len());
    for (&(dr, dc), &w) in full.offsets.iter().zip(&full.weights) {
        let r = center.0 as isize + dr;
        let c = center.1 as isize + dc;
        if r < 0 || c < 0 || r >= rows as isize || c >= cols as isize {
            continue;
        }
        let (r, c) = (r as usize, c as usize);
        let is_center = dr == 0 && dc == 0;
        if !is_center && occupancy.is_some_and(|occ| !occ[r * cols + c]) {
            continue;
        }
        coords.push((r, c));
        offsets.push((dr, dc));
        raw.push(w);
    }
    if raw.len() == full.len() {
        return Ok((coords, full));
    }
    Ok((coords, normalized(offsets, raw)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_three() {
        let w = kernel_weights(&NeighborhoodSpec::new(Kernel::Average, 3)).unwrap();
        assert_eq!(w.len(), 9);
        assert!(w.weights.iter().all(|&x| (x - 1.0 / 9.0).abs() < 1e-15));
    }

    #[test]
    fn size_one_is_identity() {
        for kernel in [
            Kernel::Average,
            Kernel::Gaussian { sigma: 2.0 },
            Kernel::Disk { radius: 0.5 },
            Kernel::Median,
        ] {
            let w = kernel_weights(&NeighborhoodSpec::new(kernel, 1)).unwrap();
            assert_eq!(w, NeighborWeights::identity());
        }
    }

    #[test]
    fn narrow_gaussian_concentrates_on_center() {
        let w =
            kernel_weights(&NeighborhoodSpec::new(Kernel::Gaussian { sigma: 0.05 }, 3)).unwrap();
        assert!((w.weights[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_drops_corners() {
        let w = kernel_weights(&NeighborhoodSpec::new(Kernel::Disk { radius: 1.0 }, 3)).unwrap();
        assert_eq!(w.len(), 5);
        assert!(!w.offsets.contains(&(1, 1)));
    }

    #[test]
    fn corner_and_interior() {
        let spec = NeighborhoodSpec::new(Kernel::Average, 3);
        let (coords, w) = resolve_neighbors((0, 0), (5, 5), None, &spec).unwrap();
        assert_eq!(coords, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(w.weights.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let (coords, w) = resolve_neighbors((2, 2), (5, 5), None, &spec).unwrap();
        assert_eq!(coords.len(), 9);
        assert_eq!(w, kernel_weights(&spec).unwrap());
        let (coords, w) = resolve_neighbors((0, 0), (1, 1), None, &spec).unwrap();
        assert_eq!(coords, vec![(0, 0)]);
        assert_eq!(w.weights, vec![1.0]);
    }

    #[test]
    fn holes_are_dropped() {
        let spec = NeighborhoodSpec::new(Kernel::Average, 3);
        let mut occ = vec![true; 9];
        occ[1] = false;
        let (coords, w) = resolve_neighbors((1, 1), (3, 3), Some(&occ), &spec).unwrap();
        assert_eq!(coords.len(), 8);
        assert!(!coords.contains(&(0, 1)));
        assert!(w.weights.iter().all(|&x| (x - 0.125).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(kernel_weights(&NeighborhoodSpec::new(Kernel::Average, 4)).is_err());
        assert!(kernel_weights(&NeighborhoodSpec::new(Kernel::Average, 0)).is_err());
        assert!(
            kernel_weights(&NeighborhoodSpec::new(Kernel::Gaussian { sigma: 0.0 }, 3)).is_err()
        );
    }
}
