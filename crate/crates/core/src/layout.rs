//! Translate a quantized phase map into a fabrication layout: one rotated
//! silicon nanobeam per unit cell, oriented at theta = phi/2 so the
//! geometric phase of the converted circular polarization reproduces phi.
//!
//! A beam is pi-symmetric, so orientations live in [-pi/2, pi/2); the
//! two-to-one wrap from phase to angle is exact on quantization levels.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PhaseMap;

pub const DEFAULT_UNIT_CELL: f64 = 230e-9;
pub const DEFAULT_BEAM_WIDTH: f64 = 70e-9;
pub const DEFAULT_BEAM_LENGTH: f64 = 180e-9;

/// One nanobeam: center position and in-plane rotation. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nanobeam {
    pub x: f64,
    pub y: f64,
    /// Orientation in [-pi/2, pi/2).
    pub theta: f64,
    pub width: f64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct NanobeamLayout {
    unit_cell: f64,
    aperture: f64,
    cells_per_side: usize,
    beams: Vec<Nanobeam>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutFormat {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for LayoutFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(LayoutFormat::Json),
            "csv" => Ok(LayoutFormat::Csv),
            "svg" => Ok(LayoutFormat::Svg),
            other => Err(Error::Config(format!("unknown layout format {other:?}"))),
        }
    }
}

/// Place one beam per unit cell across the aperture of the quantized phase
/// map. Each beam takes the orientation wrap(phi)/2 of the map sample under
/// its center. The tiled region is centered in the aperture.
pub fn generate_layout(
    phase: &PhaseMap,
    unit_cell: f64,
    beam_width: f64,
    beam_length: f64,
) -> Result<NanobeamLayout> {
    if phase.levels() == 0 {
        return Err(Error::UnquantizedLayout);
    }
    let finite_pos = |v: f64| v.is_finite() && v > 0.0;
    if !finite_pos(unit_cell) || !finite_pos(beam_width) || !finite_pos(beam_length) {
        return Err(Error::InvalidGeometry {
            context: "layout",
            message: "unit cell and beam dimensions must be positive".into(),
        });
    }
    // Worst-case rotation: the beam diagonal must stay inside the cell.
    let diagonal = beam_width.hypot(beam_length);
    if diagonal > unit_cell * (1.0 + 1e-12) {
        return Err(Error::BeamDoesNotFit {
            width_nm: beam_width * 1e9,
            length_nm: beam_length * 1e9,
            unit_cell_nm: unit_cell * 1e9,
            diagonal_nm: diagonal * 1e9,
        });
    }
    let (rows, cols) = phase.shape();
    let aperture_x = cols as f64 * phase.pitch();
    let aperture_y = rows as f64 * phase.pitch();
    if (aperture_x - aperture_y).abs() > 1e-12 * aperture_x.max(aperture_y) {
        return Err(Error::BadFieldShape { rows, cols });
    }
    let aperture = aperture_x;
    let cells_per_side = (aperture / unit_cell).floor() as usize;
    if cells_per_side == 0 {
        return Err(Error::InvalidGeometry {
            context: "layout",
            message: format!("unit cell {unit_cell:e} larger than aperture {aperture:e}"),
        });
    }

    let margin = 0.5 * (aperture - cells_per_side as f64 * unit_cell);
    let values = phase.values();
    let pitch = phase.pitch();
    let mut beams = Vec::with_capacity(cells_per_side * cells_per_side);
    for ci in 0..cells_per_side {
        let y = -0.5 * aperture + margin + (ci as f64 + 0.5) * unit_cell;
        let row = (((y + 0.5 * aperture) / pitch) as usize).min(rows - 1);
        for cj in 0..cells_per_side {
            let x = -0.5 * aperture + margin + (cj as f64 + 0.5) * unit_cell;
            let col = (((x + 0.5 * aperture) / pitch) as usize).min(cols - 1);
            let theta = 0.5 * values[[row, col]];
            beams.push(Nanobeam {
                x,
                y,
                theta,
                width: beam_width,
                length: beam_length,
            });
        }
    }
    Ok(NanobeamLayout {
        unit_cell,
        aperture,
        cells_per_side,
        beams,
    })
}

#[derive(Serialize)]
struct JsonDocOut<'a> {
    schema_version: u32,
    unit_cell_m: f64,
    aperture_m: f64,
    cells_per_side: usize,
    beams: &'a [Nanobeam],
}

#[derive(Deserialize)]
struct JsonDocIn {
    schema_version: u32,
    unit_cell_m: f64,
    aperture_m: f64,
    cells_per_side: usize,
    beams: Vec<Nanobeam>,
}

impl NanobeamLayout {
    pub fn unit_cell(&self) -> f64 {
        self.unit_cell
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn beams(&self) -> &[Nanobeam] {
        &self.beams
    }

    /// Distinct orientations present, ascending.
    pub fn orientations(&self) -> Vec<f64> {
        let mut seen: Vec<u64> = self.beams.iter().map(|b| b.theta.to_bits()).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.into_iter().map(f64::from_bits).collect()
    }

    pub fn write(&self, format: LayoutFormat, out: &mut dyn Write) -> Result<()> {
        match format {
            LayoutFormat::Json => self.write_json(out),
            LayoutFormat::Csv => self.write_csv(out),
            LayoutFormat::Svg => self.write_svg(out, 1),
        }
    }

    /// Schema v1 JSON document; lengths in meters so that a round trip
    /// through `from_json` is bit-exact.
    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        let doc = JsonDocOut {
            schema_version: 1,
            unit_cell_m: self.unit_cell,
            aperture_m: self.aperture,
            cells_per_side: self.cells_per_side,
            beams: &self.beams,
        };
        serde_json::to_writer(&mut *out, &doc)
            .map_err(|e| Error::Numerical(format!("json encode: {e}")))?;
        out.write_all(b"\n").map_err(|e| Error::io("<layout json>", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonDocIn = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("layout json: {e}")))?;
        if doc.schema_version != 1 {
            return Err(Error::Config(format!(
                "unsupported layout schema version {}",
                doc.schema_version
            )));
        }
        Ok(NanobeamLayout {
            unit_cell: doc.unit_cell_m,
            aperture: doc.aperture_m,
            cells_per_side: doc.cells_per_side,
            beams: doc.beams,
        })
    }

    /// One row per beam: positions in nm, orientation in radians.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let io_err = |e| Error::io("<layout csv>", e);
        out.write_all(b"x_nm, y_nm, theta_rad, w_nm, l_nm\n").map_err(io_err)?;
        for b in &self.beams {
            writeln!(
                out,
                "{}, {}, {}, {}, {}",
                b.x * 1e9,
                b.y * 1e9,
                b.theta,
                b.width * 1e9,
                b.length * 1e9
            )
            .map_err(io_err)?;
        }
        Ok(())
    }

    /// Rotated-rectangle preview in nm user units. `decimate` keeps every
    /// k-th cell per axis so large layouts stay viewable.
    pub fn write_svg(&self, out: &mut dyn Write, decimate: usize) -> Result<()> {
        let io_err = |e| Error::io("<layout svg>", e);
        let k = decimate.max(1);
        let span = self.aperture * 1e9;
        writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {span:.1} {span:.1}\" width=\"800\" height=\"800\">"
        )
        .map_err(io_err)?;
        writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{span:.1}\" height=\"{span:.1}\" fill=\"white\" stroke=\"black\"/>"
        )
        .map_err(io_err)?;
        for ci in (0..self.cells_per_side).step_by(k) {
            for cj in (0..self.cells_per_side).step_by(k) {
                let b = &self.beams[ci * self.cells_per_side + cj];
                let cx = (b.x + 0.5 * self.aperture) * 1e9;
                let cy = (b.y + 0.5 * self.aperture) * 1e9;
                let w = b.width * 1e9;
                let l = b.length * 1e9;
                // Unrotated beam is long along y; rotate about its center.
                writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#4a4a4a\" transform=\"rotate({:.4} {:.2} {:.2})\"/>",
                    cx - 0.5 * w,
                    cy - 0.5 * l,
                    w,
                    l,
                    b.theta.to_degrees(),
                    cx,
                    cy
                )
                .map_err(io_err)?;
            }
        }
        writeln!(out, "</svg>").map_err(io_err)
    }
}
