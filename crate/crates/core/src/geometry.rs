//! System-level geometry: the hologram aperture and its display-pixel
//! tiling, the pattern of lit pixels, and the viewing eye.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// The combiner aperture seen as an M x M grid of display pixels (cells),
/// each of which images to one virtual point at distance `conjugate_distance`
/// behind the combiner, laterally magnified by `magnification`.
#[derive(Debug, Clone, Copy)]
pub struct SystemGeometry {
    /// Aperture side length [m].
    pub aperture: f64,
    /// Display pixels per side.
    pub pixels: usize,
    /// Display pixel (cell) pitch [m]; aperture = pixels * pixel_size.
    pub pixel_size: f64,
    /// Distance from aperture to the virtual image plane [m].
    pub conjugate_distance: f64,
    /// Lateral magnification from cell position to virtual source position.
    pub magnification: f64,
    /// Design wavelength [m].
    pub wavelength: f64,
}

impl SystemGeometry {
    pub fn new(
        aperture: f64,
        pixels: usize,
        pixel_size: f64,
        conjugate_distance: f64,
        magnification: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let bad = |message: String| Error::InvalidGeometry { context: "system geometry", message };
        if pixels == 0 {
            return Err(bad("pixel count must be >= 1".into()));
        }
        for (name, v) in [
            ("aperture", aperture),
            ("pixel_size", pixel_size),
            ("conjugate_distance", conjugate_distance),
            ("magnification", magnification),
            ("wavelength", wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} must be positive and finite, got {v:e}")));
            }
        }
        let expected = pixels as f64 * pixel_size;
        if (aperture - expected).abs() > 1e-9 * aperture {
            return Err(bad(format!(
                "aperture {aperture:e} != pixels * pixel_size = {expected:e}"
            )));
        }
        Ok(SystemGeometry {
            aperture,
            pixels,
            pixel_size,
            conjugate_distance,
            magnification,
            wavelength,
        })
    }

    /// Center of display cell `(i, j)` = (row, col) in aperture coordinates,
    /// returned as (x, y) with x along columns and y along rows.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let half = self.aperture / 2.0;
        let x = (j as f64 + 0.5) * self.pixel_size - half;
        let y = (i as f64 + 0.5) * self.pixel_size - half;
        (x, y)
    }

    /// Virtual point source for cell `(i, j)`: laterally magnified cell
    /// center at depth `conjugate_distance` behind the aperture.
    pub fn virtual_source(&self, i: usize, j: usize) -> (f64, f64) {
        let (x, y) = self.cell_center(i, j);
        (self.magnification * x, self.magnification * y)
    }

    /// Half-open sample index range [a, b) covered by cell index `c` on a
    /// grid of `grid_n` samples across the aperture.
    pub fn cell_sample_range(&self, c: usize, grid_n: usize) -> (usize, usize) {
        cell_range(c, self.pixels, grid_n)
    }

    /// Validate that `grid_n` samples tile the cells exactly.
    pub fn check_tiling(&self, grid_n: usize) -> Result<()> {
        check_cell_tiling(self.pixels, grid_n)
    }
}

/// Half-open sample index range [a, b) of cell `c` when `cells` cells tile
/// `grid_n` samples. Integer ceil arithmetic, so adjacent cells tile
/// exactly even when `cells` does not divide `grid_n`.
pub fn cell_range(c: usize, cells: usize, grid_n: usize) -> (usize, usize) {
    let a = (c * grid_n).div_ceil(cells);
    let b = ((c + 1) * grid_n).div_ceil(cells);
    (a, b.min(grid_n))
}

/// Every sample in exactly one cell, no empty cell.
pub fn check_cell_tiling(cells: usize, grid_n: usize) -> Result<()> {
    if grid_n < cells {
        return Err(Error::NonTilingGrid {
            grid_n,
            cells,
            message: "fewer samples than cells".into(),
        });
    }
    let mut prev_end = 0usize;
    for c in 0..cells {
        let (a, b) = cell_range(c, cells, grid_n);
        if a != prev_end || b <= a {
            return Err(Error::NonTilingGrid {
                grid_n,
                cells,
                message: format!("cell {c} covers [{a}, {b}) after [0, {prev_end})"),
            });
        }
        prev_end = b;
    }
    if prev_end != grid_n {
        return Err(Error::NonTilingGrid {
            grid_n,
            cells,
            message: format!("cells cover [0, {prev_end}) of {grid_n} samples"),
        });
    }
    Ok(())
}

/// Which display pixels are lit. Square boolean mask plus the pixel pitch.
#[derive(Debug, Clone)]
pub struct DisplayPattern {
    lit: Array2<bool>,
    pixel_size: f64,
}

impl DisplayPattern {
    pub fn new(lit: Array2<bool>, pixel_size: f64) -> Result<Self> {
        let (rows, cols) = lit.dim();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidGeometry {
                context: "display pattern",
                message: format!("mask must be square and non-empty, got {rows}x{cols}"),
            });
        }
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "display pattern",
                message: format!("pixel size must be positive, got {pixel_size:e}"),
            });
        }
        Ok(DisplayPattern { lit, pixel_size })
    }

    pub fn all_on(side: usize, pixel_size: f64) -> Result<Self> {
        DisplayPattern::new(Array2::from_elem((side, side), true), pixel_size)
    }

    /// Single lit pixel at (row, col).
    pub fn single(side: usize, i: usize, j: usize, pixel_size: f64) -> Result<Self> {
        if i >= side || j >= side {
            return Err(Error::InvalidGeometry {
                context: "display pattern",
                message: format!("pixel ({i}, {j}) outside {side}x{side} grid"),
            });
        }
        let mut lit = Array2::from_elem((side, side), false);
        lit[[i, j]] = true;
        DisplayPattern::new(lit, pixel_size)
    }

    /// Parse an ASCII mask: one line per row, characters '0'/'1', spaces
    /// ignored, '#' starts a comment. All rows must have equal length and
    /// the mask must be square.
    pub fn parse_ascii(text: &str, pixel_size: f64, origin: &Path) -> Result<Self> {
        let err = |message: String| Error::PatternParse { path: origin.to_owned(), message };
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let mut row = Vec::new();
            for ch in line.chars() {
                match ch {
                    '0' => row.push(false),
                    '1' => row.push(true),
                    c if c.is_whitespace() => {}
                    c => return Err(err(format!("line {}: bad character `{c}`", lineno + 1))),
                }
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
        let side = rows.len();
        if side == 0 {
            return Err(err("empty mask".into()));
        }
        let mut lit = Array2::from_elem((side, side), false);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != side {
                return Err(err(format!(
                    "row {} has {} entries, expected {side} (square mask)",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                lit[[i, j]] = v;
            }
        }
        DisplayPattern::new(lit, pixel_size)
    }

    pub fn side(&self) -> usize {
        self.lit.dim().0
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    pub fn is_lit(&self, i: usize, j: usize) -> bool {
        self.lit[[i, j]]
    }

    pub fn lit_count(&self) -> usize {
        self.lit.iter().filter(|&&v| v).count()
    }

    /// Row-major list of lit (row, col) indices.
    pub fn lit_pixels(&self) -> Vec<(usize, usize)> {
        let side = self.side();
        let mut out = Vec::new();
        for i in 0..side {
            for j in 0..side {
                if self.lit[[i, j]] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The pattern must match the geometry's pixel grid: same pixel count
    /// and the same pitch to within one part in 1e9.
    pub fn check_against(&self, geom: &SystemGeometry) -> Result<()> {
        if self.side() != geom.pixels {
            return Err(Error::InvalidGeometry {
                context: "display pattern",
                message: format!(
                    "mask is {}x{} but geometry has {} pixels per side",
                    self.side(),
                    self.side(),
                    geom.pixels
                ),
            });
        }
        if (self.pixel_size - geom.pixel_size).abs() > 1e-9 * geom.pixel_size {
            return Err(Error::InvalidGeometry {
                context: "display pattern",
                message: format!(
                    "mask pixel size {:e} != geometry pixel size {:e}",
                    self.pixel_size, geom.pixel_size
                ),
            });
        }
        Ok(())
    }
}

/// Idealized viewing eye: a thin lens at the aperture plane, a retina
/// `retina_distance` behind it. `accommodation`, when set, overrides the
/// resting focal length `focal`.
#[derive(Debug, Clone, Copy)]
pub struct EyeGeometry {
    pub focal: f64,
    pub retina_distance: f64,
    pub accommodation: Option<f64>,
}

impl EyeGeometry {
    pub fn new(focal: f64, retina_distance: f64) -> Result<Self> {
        let bad = |message: String| Error::InvalidGeometry { context: "eye geometry", message };
        if !(focal > 0.0 && focal.is_finite()) {
            return Err(bad(format!("focal length must be positive, got {focal:e}")));
        }
        if !(retina_distance > 0.0 && retina_distance.is_finite()) {
            return Err(bad(format!("retina distance must be positive, got {retina_distance:e}")));
        }
        Ok(EyeGeometry { focal, retina_distance, accommodation: None })
    }

    pub fn accommodated_to(mut self, focal: f64) -> Result<Self> {
        if !(focal > 0.0 && focal.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "eye geometry",
                message: format!("accommodation must be positive, got {focal:e}"),
            });
        }
        self.accommodation = Some(focal);
        Ok(self)
    }

    /// Focal length in effect: the accommodation override if present.
    pub fn effective_focal(&self) -> f64 {
        self.accommodation.unwrap_or(self.focal)
    }

    /// Focal length that images a plane `object_distance` in front of the
    /// lens onto the retina: 1/f = 1/d_obj + 1/d_retina.
    pub fn accommodated_focal(object_distance: f64, retina_distance: f64) -> f64 {
        1.0 / (1.0 / object_distance + 1.0 / retina_distance)
    }
}
