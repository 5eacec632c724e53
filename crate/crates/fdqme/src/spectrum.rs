use crate::error::{Error, Result};
use crate::grid::{trapezoid, validate};

/// Negative values smaller than this fraction of the peak are round-off and
/// get clipped to zero.
pub const CLIP_THRESHOLD: f64 = 1e-12;

/// Real spectral density sampled on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Vec<f64>,
    values: Vec<f64>,
    norm: f64,
    normalized: bool,
}

impl Spectrum {
    /// Validates the grid, clips round-off negativity and records the area.
    pub fn new(grid: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        validate(&grid)?;
        if grid.len() != values.len() {
            return Err(Error::DimMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite spectral value".into()));
        }
        let peak = values.iter().fold(0.0f64, |m, &v| m.max(v));
        let min = values.iter().fold(0.0f64, |m, &v| m.min(v));
        if peak > 0.0 && min < -CLIP_THRESHOLD * peak {
            return Err(Error::NegativeSpectrum { min: min / peak });
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let norm = trapezoid(&grid, &values);
        Ok(Self {
            grid,
            values,
            norm,
            normalized: false,
        })
    }

    /// Like [`Spectrum::new`] but clips any negativity, returning the most
    /// negative value relative to the peak (zero if none) as a diagnostic.
    pub fn clipped(grid: Vec<f64>, values: Vec<f64>) -> Result<(Self, f64)> {
        let peak = values.iter().fold(0.0f64, |m, &v| m.max(v));
        let min = values.iter().fold(0.0f64, |m, &v| m.min(v));
        let rel = if peak > 0.0 { min / peak } else { 0.0 };
        let s = Self::new(grid, values.into_iter().map(|v| v.max(0.0)).collect())?;
        Ok((s, rel))
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoidal area of the stored values.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescaled to unit trapezoidal area on its own grid.
    pub fn normalized(mut self) -> Result<Self> {
        if !(self.norm > 0.0) {
            return Err(Error::Grid(format!("cannot normalize spectrum of area {}", self.norm)));
        }
        let s = 1.0 / self.norm;
        self.values.iter_mut().for_each(|v| *v *= s);
        self.norm = trapezoid(&self.grid, &self.values);
        self.normalized = true;
        Ok(self)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self.norm *= factor;
        self.normalized = false;
        self
    }

    /// Grid point and value of the global maximum.
    pub fn peak(&self) -> (f64, f64) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
        (self.grid[k], v)
    }

    /// Grid points of all interior local maxima.
    pub fn local_maxima(&self) -> Vec<f64> {
        crate::baths::local_maxima(&self.grid, &self.values)
    }

    /// Full width at half maximum, with linear interpolation of the crossings.
    pub fn fwhm(&self) -> Result<f64> {
        let (k0, half) = {
            let (x, v) = self.peak();
            (self.grid.iter().position(|&g| g == x).unwrap_or(0), v / 2.0)
        };
        let ys = &self.values;
        let xs = &self.grid;
        let left = (1..=k0).rev().find(|&k| ys[k - 1] < half).map(|k| {
            xs[k - 1] + (half - ys[k - 1]) * (xs[k] - xs[k - 1]) / (ys[k] - ys[k - 1])
        });
        let right = (k0..ys.len() - 1).find(|&k| ys[k + 1] < half).map(|k| {
            xs[k] + (ys[k] - half) * (xs[k + 1] - xs[k]) / (ys[k] - ys[k + 1])
        });
        match (left, right) {
            (Some(l), Some(r)) => Ok(r - l),
            _ => Err(Error::Grid("half-maximum crossing outside the grid".into())),
        }
    }
}
