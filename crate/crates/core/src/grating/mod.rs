//! Rigorous transmission analysis of the binary nanobeam grating: a 1D
//! lamellar layer (period Lambda, beam width w, thickness t) of dispersive
//! beam material in a transparent surround, on a glass substrate, probed at
//! normal incidence from the cover side.
//!
//! `rcwa` carries the coupled-wave solver, `slab` the homogeneous-film and
//! effective-medium references used to validate it, `sweep` the design-space
//! scan that picks half-wave geometries.

pub mod rcwa;
pub mod slab;
pub mod sweep;

pub use rcwa::{rcwa_1d, Polarization};
pub use slab::{emt_indices, tmm_slab};
pub use sweep::{design_sweep, sweep_csv, SweepPoint, SweepRanges, SweepResult};

use crate::dispersion::DispersionTable;
use crate::error::{Error, Result};

/// One-dimensional lamellar grating on a substrate, surround-filled.
/// All lengths in meters. The beam occupies `[0, width)` of each period.
#[derive(Debug, Clone)]
pub struct GratingGeometry {
    pub period: f64,
    pub width: f64,
    pub thickness: f64,
    /// Complex index of the beam material, by wavelength.
    pub beam: DispersionTable,
    /// Index of the material between and above the beams (1.0 for air).
    pub n_surround: f64,
    pub n_substrate: f64,
    pub n_cover: f64,
}

impl GratingGeometry {
    pub fn new(
        period: f64,
        width: f64,
        thickness: f64,
        beam: DispersionTable,
        n_surround: f64,
        n_substrate: f64,
        n_cover: f64,
    ) -> Result<Self> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(period) || !finite_pos(thickness) {
            return Err(Error::InvalidGeometry {
                context: "grating",
                message: format!("period {period:e} and thickness {thickness:e} must be positive"),
            });
        }
        if !(width.is_finite() && (0.0..=period).contains(&width)) {
            return Err(Error::InvalidGeometry {
                context: "grating",
                message: format!("beam width {width:e} must lie in [0, period {period:e}]"),
            });
        }
        if !finite_pos(n_surround) || !finite_pos(n_substrate) || !finite_pos(n_cover) {
            return Err(Error::InvalidGeometry {
                context: "grating",
                message: "surround, substrate and cover indices must be positive".into(),
            });
        }
        Ok(GratingGeometry {
            period,
            width,
            thickness,
            beam,
            n_surround,
            n_substrate,
            n_cover,
        })
    }

    pub fn fill_factor(&self) -> f64 {
        self.width / self.period
    }

    /// True when only the zeroth transmitted order propagates in both the
    /// cover and the substrate at this wavelength.
    pub fn is_subwavelength(&self, wavelength: f64) -> bool {
        let n_max = self.n_substrate.max(self.n_cover);
        self.period < wavelength / n_max
    }
}

/// Zeroth-order complex transmission of the grating for one polarization,
/// with the power bookkeeping needed for energy checks.
#[derive(Debug, Clone)]
pub struct DiffractionResult {
    /// Complex amplitude of the zeroth transmitted order, referenced to the
    /// incident field (substrate-side, power-consistent normalization).
    pub t0: num_complex::Complex64,
    /// Power efficiency of every propagating transmitted order.
    pub transmitted: Vec<f64>,
    /// Power efficiency of every propagating reflected order.
    pub reflected: Vec<f64>,
    /// Fourier orders retained per side (solver ran with 2N+1 harmonics).
    pub harmonics: usize,
}

impl DiffractionResult {
    pub fn total_transmitted(&self) -> f64 {
        self.transmitted.iter().sum()
    }

    pub fn total_reflected(&self) -> f64 {
        self.reflected.iter().sum()
    }

    /// Transmitted + reflected power; equals 1 for lossless structures.
    pub fn power_sum(&self) -> f64 {
        self.total_transmitted() + self.total_reflected()
    }
}
