//! Hologram phase synthesis: per-cell analytic virtual-point phase and
//! full-aperture Gerchberg-Saxton, plus assembly and quantization.
//!
//! Per-cell mode gives each 50 um display cell the phase of a spherical
//! wave diverging from its own virtual point P = (Mag*x_c, Mag*y_c, -d_c):
//!
//!   phi(x, y) = wrap( k * sqrt((x-X)^2 + (y-Y)^2 + d_c^2) - k * d_c )
//!
//! so lighting that cell alone shows conjugate pixel (i, j) at depth d_c.
//! Full-GS mode retrieves one aperture-wide phase whose far field carries a
//! delta per target pixel, then adds the same spherical carrier referenced
//! to the aperture center so the far-field pattern focuses at depth d_c.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::field::PhaseMap;
use crate::field::wrap;
use crate::geometry::{DisplayPattern, SystemGeometry};
use crate::gs::{gs_retrieve, GsPropagator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    PerCell,
    FullGs,
}

/// Gerchberg-Saxton controls for [`DesignMode::FullGs`].
#[derive(Debug, Clone, Copy)]
pub struct GsSettings {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GsSettings {
    fn default() -> Self {
        GsSettings { iterations: 50, seed: 0 }
    }
}

/// Samples per side for a given pitch; the pitch must divide the aperture
/// into an even integer number of samples.
pub fn grid_samples(geom: &SystemGeometry, pitch: f64) -> Result<usize> {
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::InvalidGeometry {
            context: "design grid",
            message: format!("pitch must be positive, got {pitch:e}"),
        });
    }
    let n = (geom.aperture / pitch).round() as usize;
    if n == 0 || (n as f64 * pitch - geom.aperture).abs() > 1e-9 * geom.aperture {
        return Err(Error::InvalidGeometry {
            context: "design grid",
            message: format!(
                "pitch {pitch:e} does not divide the {:e} aperture into whole samples",
                geom.aperture
            ),
        });
    }
    if n % 2 != 0 {
        return Err(Error::InvalidGeometry {
            context: "design grid",
            message: format!("need an even sample count, got {n}"),
        });
    }
    Ok(n)
}

/// Steepest local fringe of cell (i, j): max of sin(theta) = r_t / R over
/// the cell's sample extent, where r_t is the transverse distance to the
/// cell's virtual point. The gradient magnitude k * r_t / R is monotone in
/// r_t, so the cell's far corner attains the maximum.
fn cell_max_sine(geom: &SystemGeometry, grid_n: usize, i: usize, j: usize) -> f64 {
    let pitch = geom.aperture / grid_n as f64;
    let coord = |idx: usize| (idx as f64 - (grid_n / 2) as f64) * pitch;
    let (x_src, y_src) = geom.virtual_source(i, j);
    let (r0, r1) = geom.cell_sample_range(i, grid_n);
    let (c0, c1) = geom.cell_sample_range(j, grid_n);
    let du = (coord(c0) - x_src).abs().max((coord(c1 - 1) - x_src).abs());
    let dv = (coord(r0) - y_src).abs().max((coord(r1 - 1) - y_src).abs());
    let rt = du.hypot(dv);
    rt / rt.hypot(geom.conjugate_distance)
}

/// Reject pitches that put fewer than 4 samples on the steepest 2 pi fringe
/// of the cells in question.
fn check_sampling(geom: &SystemGeometry, grid_n: usize, max_sine: f64) -> Result<()> {
    let pitch = geom.aperture / grid_n as f64;
    let limit = geom.wavelength / (4.0 * max_sine);
    if pitch > limit {
        let required_n = (geom.aperture / limit).ceil() as usize;
        return Err(Error::Undersampled {
            grid_n,
            pitch_nm: pitch * 1e9,
            limit_nm: limit * 1e9,
            required_n: required_n + required_n % 2,
        });
    }
    Ok(())
}

/// Write cell (i, j)'s spherical-wave phase into `values` over the cell's
/// sample range. `values` spans the full grid.
fn fill_cell(values: &mut Array2<f64>, geom: &SystemGeometry, grid_n: usize, i: usize, j: usize) {
    let pitch = geom.aperture / grid_n as f64;
    let k = 2.0 * std::f64::consts::PI / geom.wavelength;
    let d = geom.conjugate_distance;
    let coord = |idx: usize| (idx as f64 - (grid_n / 2) as f64) * pitch;
    let (x_src, y_src) = geom.virtual_source(i, j);
    let (r0, r1) = geom.cell_sample_range(i, grid_n);
    let (c0, c1) = geom.cell_sample_range(j, grid_n);
    for r in r0..r1 {
        let v = coord(r) - y_src;
        for c in c0..c1 {
            let u = coord(c) - x_src;
            let phase = k * ((u * u + v * v + d * d).sqrt() - d);
            values[[r, c]] = wrap(phase);
        }
    }
}

/// Phase of one display cell on its own sample window (row range x column
/// range of the full grid).
pub fn cell_phase(i: usize, j: usize, geom: &SystemGeometry, pitch: f64) -> Result<PhaseMap> {
    if i >= geom.pixels || j >= geom.pixels {
        return Err(Error::InvalidGeometry {
            context: "cell phase",
            message: format!("cell ({i}, {j}) outside {0}x{0} grid", geom.pixels),
        });
    }
    let grid_n = grid_samples(geom, pitch)?;
    geom.check_tiling(grid_n)?;
    check_sampling(geom, grid_n, cell_max_sine(geom, grid_n, i, j))?;

    let mut full = Array2::zeros((grid_n, grid_n));
    fill_cell(&mut full, geom, grid_n, i, j);
    let (r0, r1) = geom.cell_sample_range(i, grid_n);
    let (c0, c1) = geom.cell_sample_range(j, grid_n);
    let cell = full.slice(ndarray::s![r0..r1, c0..c1]).to_owned();
    PhaseMap::new(cell, pitch, geom.wavelength)
}

/// Frequency-grid bin (row, col) of the far-field delta that steers light
/// to the virtual point of cell (i, j), under the e^{+i 2 pi u x} forward
/// kernel used by [`gs_retrieve`].
pub fn gs_target_bin(
    geom: &SystemGeometry,
    grid_n: usize,
    i: usize,
    j: usize,
) -> Result<(usize, usize)> {
    let (x_src, y_src) = geom.virtual_source(i, j);
    let scale = geom.aperture / (geom.wavelength * geom.conjugate_distance);
    let h = (grid_n / 2) as i64;
    let col = h + (x_src * scale).round() as i64;
    let row = h + (y_src * scale).round() as i64;
    if row < 0 || row >= grid_n as i64 || col < 0 || col >= grid_n as i64 {
        return Err(Error::InvalidGeometry {
            context: "gs target",
            message: format!("cell ({i}, {j}) maps outside the frequency grid"),
        });
    }
    Ok((row as usize, col as usize))
}

/// Assemble the full-aperture hologram. `gs_target` selects the pixels the
/// Gerchberg-Saxton far field should light; `None` means all pixels (the
/// per-cell mode always encodes every cell and ignores both GS arguments).
/// `levels == 0` leaves the map continuous.
pub fn assemble_hologram(
    geom: &SystemGeometry,
    mode: DesignMode,
    pitch: f64,
    levels: u32,
    gs: &GsSettings,
    gs_target: Option<&DisplayPattern>,
) -> Result<PhaseMap> {
    let grid_n = grid_samples(geom, pitch)?;
    geom.check_tiling(grid_n)?;

    let map = match mode {
        DesignMode::PerCell => {
            let mut max_sine = 0.0f64;
            for i in 0..geom.pixels {
                for j in 0..geom.pixels {
                    max_sine = max_sine.max(cell_max_sine(geom, grid_n, i, j));
                }
            }
            check_sampling(geom, grid_n, max_sine)?;
            let mut values = Array2::zeros((grid_n, grid_n));
            for i in 0..geom.pixels {
                for j in 0..geom.pixels {
                    fill_cell(&mut values, geom, grid_n, i, j);
                }
            }
            PhaseMap::new(values, pitch, geom.wavelength)?
        }
        DesignMode::FullGs => {
            if let Some(p) = gs_target {
                p.check_against(geom)?;
            }
            let mut target = Array2::zeros((grid_n, grid_n));
            let mut any = false;
            for i in 0..geom.pixels {
                for j in 0..geom.pixels {
                    if gs_target.map_or(true, |p| p.is_lit(i, j)) {
                        let (r, c) = gs_target_bin(geom, grid_n, i, j)?;
                        target[[r, c]] = 1.0;
                        any = true;
                    }
                }
            }
            if !any {
                return Err(Error::EmptyTarget);
            }
            let gs_res = gs_retrieve(
                &target,
                gs.iterations,
                GsPropagator::Fraunhofer,
                gs.seed,
                pitch,
                geom.wavelength,
            )?;
            // Spherical carrier focusing the far-field pattern at depth d_c.
            let k = 2.0 * std::f64::consts::PI / geom.wavelength;
            let d = geom.conjugate_distance;
            let coord = |idx: usize| (idx as f64 - (grid_n / 2) as f64) * pitch;
            let psi = gs_res.phase.values();
            let values = Array2::from_shape_fn((grid_n, grid_n), |(r, c)| {
                let x = coord(c);
                let y = coord(r);
                wrap(psi[[r, c]] + k * ((x * x + y * y + d * d).sqrt() - d))
            });
            PhaseMap::new(values, pitch, geom.wavelength)?
        }
    };
    if levels > 0 {
        map.quantize(levels)
    } else {
        Ok(map)
    }
}
