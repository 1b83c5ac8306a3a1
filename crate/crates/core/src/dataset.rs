//! In-memory spectra and spot grids.

use crate::error::{Error, Result};

/// One measured spectrum: a strictly increasing m/z axis and intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    mz: Vec<f64>,
    intensity: Vec<f64>,
}

impl Spectrum {
    pub fn new(mz: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if mz.len() != intensity.len() {
            return Err(Error::InputShape(format!(
                "{} m/z values for {} intensities",
                mz.len(),
                intensity.len()
            )));
        }
        check_axis(&mz)?;
        if let Some(i) = intensity.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("intensity {i} is not finite")));
        }
        Ok(Self { mz, intensity })
    }

    /// Intensities on the axis `0, 1, .., L-1`.
    pub fn from_intensities(intensity: Vec<f64>) -> Result<Self> {
        let mz = (0..intensity.len()).map(|i| i as f64).collect();
        Self::new(mz, intensity)
    }

    pub fn mz(&self) -> &[f64] {
        &self.mz
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.mz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mz.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.mz, self.intensity)
    }
}

pub(crate) fn check_axis(mz: &[f64]) -> Result<()> {
    if let Some(i) = mz.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("m/z value {i} is not finite")));
    }
    if let Some(i) = mz.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!(
            "m/z axis not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// A `rows x cols` grid of spectra sharing one m/z axis. Only present spots
/// carry data; their intensities are stored row-major in spot order.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetGrid {
    rows: usize,
    cols: usize,
    mz: Vec<f64>,
    occupancy: Vec<bool>,
    index: Vec<Option<usize>>,
    data: Vec<f64>,
}

impl DatasetGrid {
    /// `data` holds one length-`mz.len()` row per present spot.
    pub fn new(
        dims: (usize, usize),
        mz: Vec<f64>,
        occupancy: Vec<bool>,
        data: Vec<f64>,
    ) -> Result<Self> {
        let (rows, cols) = dims;
        if occupancy.len() != rows * cols {
            return Err(Error::InputShape(format!(
                "occupancy has {} entries for a {rows}x{cols} grid",
                occupancy.len()
            )));
        }
        check_axis(&mz)?;
        let present = occupancy.iter().filter(|&&p| p).count();
        if data.len() != present * mz.len() {
            return Err(Error::InputShape(format!(
                "{} intensity values for {present} spots of length {}",
                data.len(),
                mz.len()
            )));
        }
        let mut next = 0;
        let index = occupancy
            .iter()
            .map(|&p| {
                p.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            mz,
            occupancy,
            index,
            data,
        })
    }

    /// Fully occupied grid from one spectrum per spot in row-major order.
    pub fn from_rows(dims: (usize, usize), mz: Vec<f64>, spectra: Vec<Vec<f64>>) -> Result<Self> {
        if spectra.len() != dims.0 * dims.1 {
            return Err(Error::InputShape(format!(
                "{} spectra for a {}x{} grid",
                spectra.len(),
                dims.0,
                dims.1
            )));
        }
        if let Some(bad) = spectra.iter().position(|s| s.len() != mz.len()) {
            return Err(Error::InputShape(format!(
                "spectrum {bad} has length {}, axis has {}",
                spectra[bad].len(),
                mz.len()
            )));
        }
        let data = spectra.concat();
        Self::new(dims, mz, vec![true; dims.0 * dims.1], data)
    }

    /// A 1x1 grid holding a single spectrum.
    pub fn single(spectrum: Spectrum) -> Self {
        let (mz, intensity) = spectrum.into_parts();
        Self::new((1, 1), mz, vec![true], intensity).expect("a spectrum is a valid 1x1 grid")
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn mz(&self) -> &[f64] {
        &self.mz
    }

    pub fn spectrum_len(&self) -> usize {
        self.mz.len()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    /// Number of present spots.
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.mz.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Intensities of the `i`-th present spot.
    pub fn row(&self, i: usize) -> &[f64] {
        let l = self.mz.len();
        &self.data[i * l..(i + 1) * l]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(|i| self.row(i))
    }

    /// Row index of the spot at `(r, c)`, if present.
    pub fn row_index(&self, r: usize, c: usize) -> Option<usize> {
        if r >= self.rows || c >= self.cols {
            return None;
        }
        self.index[r * self.cols + c]
    }

    pub fn spot(&self, r: usize, c: usize) -> Option<&[f64]> {
        self.row_index(r, c).map(|i| self.row(i))
    }

    /// Coordinates of the present spots in row order.
    pub fn present_spots(&self) -> Vec<(usize, usize)> {
        (0..self.rows * self.cols)
            .filter(|&i| self.occupancy[i])
            .map(|i| (i / self.cols, i % self.cols))
            .collect()
    }

    pub fn spectrum(&self, i: usize) -> Spectrum {
        Spectrum {
            mz: self.mz.clone(),
            intensity: self.row(i).to_vec(),
        }
    }

    /// Same grid with every row replaced by `f(row)`; rows must keep length.
    pub fn map_rows<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            let out = f(row)?;
            if out.len() != row.len() {
                return Err(Error::InputShape("row length changed".into()));
            }
            data.extend(out);
        }
        Self::new(self.dims(), self.mz.clone(), self.occupancy.clone(), data)
    }

    /// Same layout with new per-row data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.dims(), self.mz.clone(), self.occupancy.clone(), data)
    }

    /// Elementwise mean over present spots.
    pub fn mean_spectrum(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptyInput("dataset has no spectra".into()));
        }
        let mut mean = vec![0.0; self.mz.len()];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        Ok(mean)
    }
}
