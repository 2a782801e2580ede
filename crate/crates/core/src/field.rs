//! Phase maps, sampled complex fields, and phase arithmetic.
//!
//! Wrapped phase lives in the half-open interval [-pi, pi). Quantization
//! snaps to the `levels` centers -pi + k*2pi/levels, k = 0..levels-1, with
//! exact midpoints rounding toward the lower level so the mapping is total
//! and deterministic.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Wrap an arbitrary finite phase into [-pi, pi).
pub fn wrap_phase(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::NonFinitePhase(phi));
    }
    Ok(wrap(phi))
}

/// Wrap assuming the input is finite. `rem_euclid` returns a value in
/// [0, 2pi); rounding can land exactly on 2pi for huge inputs, which folds
/// back to -pi.
#[inline]
pub fn wrap(phi: f64) -> f64 {
    let w = (phi + std::f64::consts::PI).rem_euclid(TWO_PI) - std::f64::consts::PI;
    if w >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        w
    }
}

/// Snap one wrapped phase to the nearest of `levels` centers, midpoints
/// rounding down. `ceil(x - 0.5)` is round-half-down; the index wraps mod
/// `levels` because +pi and -pi are the same angle.
#[inline]
pub(crate) fn quantize_one(phi: f64, levels: u32) -> f64 {
    let step = TWO_PI / levels as f64;
    let k = ((phi + std::f64::consts::PI) / step - 0.5).ceil();
    let k = (k as i64).rem_euclid(levels as i64);
    -std::f64::consts::PI + k as f64 * step
}

/// Snap a single phase value to `levels` orientation levels.
pub fn quantize_phase(phi: f64, levels: u32) -> Result<f64> {
    if levels < 2 {
        return Err(Error::BadLevelCount(levels));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinitePhase(phi));
    }
    Ok(quantize_one(wrap(phi), levels))
}

/// A sampled scalar phase profile on a uniform grid.
///
/// `values` are wrapped to [-pi, pi). `levels == 0` means continuous;
/// `levels == L > 0` asserts every sample sits exactly on one of the L
/// centers. Row index is y, column index is x; sample (r, c) sits at
/// physical position ((c - ncols/2) * pitch, (r - nrows/2) * pitch).
#[derive(Debug, Clone)]
pub struct PhaseMap {
    values: Array2<f64>,
    pitch: f64,
    wavelength: f64,
    levels: u32,
}

impl PhaseMap {
    /// Build from raw values, wrapping each sample. Rejects non-finite
    /// entries and non-positive pitch or wavelength.
    pub fn new(values: Array2<f64>, pitch: f64, wavelength: f64) -> Result<Self> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "phase map",
                message: format!("pitch must be positive and finite, got {pitch:e}"),
            });
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "phase map",
                message: format!("wavelength must be positive and finite, got {wavelength:e}"),
            });
        }
        let mut values = values;
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinitePhase(*v));
            }
            *v = wrap(*v);
        }
        Ok(PhaseMap { values, pitch, wavelength, levels: 0 })
    }

    /// As [`PhaseMap::new`] but marks the map as already quantized to
    /// `levels`; every sample must sit exactly on a level center.
    pub fn new_quantized(
        values: Array2<f64>,
        pitch: f64,
        wavelength: f64,
        levels: u32,
    ) -> Result<Self> {
        if levels < 2 {
            return Err(Error::BadLevelCount(levels));
        }
        let map = PhaseMap::new(values, pitch, wavelength)?;
        for &v in map.values.iter() {
            if quantize_one(v, levels) != v {
                return Err(Error::InvalidGeometry {
                    context: "phase map",
                    message: format!("value {v:e} is not on a {levels}-level center"),
                });
            }
        }
        Ok(PhaseMap { levels, ..map })
    }

    /// Quantize to `levels >= 2` orientation levels. Idempotent: quantizing
    /// a map already on those centers returns it unchanged.
    pub fn quantize(&self, levels: u32) -> Result<PhaseMap> {
        if levels < 2 {
            return Err(Error::BadLevelCount(levels));
        }
        let values = self.values.mapv(|v| quantize_one(v, levels));
        Ok(PhaseMap { values, pitch: self.pitch, wavelength: self.wavelength, levels })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Samples per side for square maps; errors are impossible because the
    /// shape is validated where squareness matters (propagation, I/O).
    pub fn shape(&self) -> (usize, usize) {
        let s = self.values.dim();
        (s.0, s.1)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// 0 for continuous maps, the level count otherwise.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Unit-amplitude complex field e^{i phi} over the same grid.
    pub fn to_field(&self) -> Result<ComplexField> {
        let data = self.values.mapv(|v| Complex64::from_polar(1.0, v));
        ComplexField::new(data, self.pitch, self.wavelength)
    }
}

/// A sampled scalar complex field on a uniform square grid with even side,
/// the shape every propagator in [`crate::propagate`] requires.
#[derive(Debug, Clone)]
pub struct ComplexField {
    data: Array2<Complex64>,
    pitch: f64,
    wavelength: f64,
}

impl ComplexField {
    pub fn new(data: Array2<Complex64>, pitch: f64, wavelength: f64) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadFieldShape { rows, cols });
        }
        if !(pitch > 0.0 && pitch.is_finite()) || !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "complex field",
                message: format!("pitch {pitch:e} / wavelength {wavelength:e} must be positive"),
            });
        }
        Ok(ComplexField { data, pitch, wavelength })
    }

    pub fn zeros(side: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        ComplexField::new(Array2::zeros((side, side)), pitch, wavelength)
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<Complex64> {
        self.data
    }

    pub fn side(&self) -> usize {
        self.data.dim().0
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Physical coordinate of sample index along either axis.
    #[inline]
    pub fn coord(&self, idx: usize) -> f64 {
        (idx as f64 - (self.side() / 2) as f64) * self.pitch
    }

    /// Total power sum(|E|^2) * pitch^2, the discrete Parseval invariant.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.pitch * self.pitch
    }

    pub(crate) fn with_data(&self, data: Array2<Complex64>, pitch: f64) -> Result<Self> {
        ComplexField::new(data, pitch, self.wavelength)
    }
}
