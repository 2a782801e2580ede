//! Grid scan over grating geometry looking for half-wave operating points:
//! equal TE/TM transmission amplitude and differential phase pi.

use num_complex::Complex64;

use super::rcwa::{rcwa_1d, Polarization};
use super::GratingGeometry;
use crate::dispersion::DispersionTable;
use crate::error::{Error, Result};
use crate::field::TWO_PI;

/// Cartesian sweep grid and objective weights. Lengths in meters; every
/// axis must be nonempty. Points with width > period or a propagating
/// nonzero order (period >= wavelength / max(n_cover, n_substrate)) are
/// skipped as infeasible.
#[derive(Debug, Clone)]
pub struct SweepRanges {
    pub wavelengths: Vec<f64>,
    pub periods: Vec<f64>,
    pub widths: Vec<f64>,
    pub thicknesses: Vec<f64>,
    /// Fourier orders per side for each evaluation.
    pub harmonics: usize,
    /// Weight on the amplitude mismatch ||t_TE| - |t_TM||.
    pub weight_amplitude: f64,
    /// Weight on the phase error |wrap(dphi - pi)|.
    pub weight_phase: f64,
}

impl SweepRanges {
    pub fn inclusive(
        wavelength: f64,
        periods: (f64, f64, usize),
        widths: (f64, f64, usize),
        thicknesses: (f64, f64, usize),
    ) -> Self {
        let axis = |(lo, hi, n): (f64, f64, usize)| -> Vec<f64> {
            if n <= 1 {
                vec![lo]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        };
        SweepRanges {
            wavelengths: vec![wavelength],
            periods: axis(periods),
            widths: axis(widths),
            thicknesses: axis(thicknesses),
            harmonics: 15,
            weight_amplitude: 1.0,
            weight_phase: 1.0,
        }
    }
}

/// Both-polarization response of one grid point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub wavelength: f64,
    pub period: f64,
    pub width: f64,
    pub thickness: f64,
    pub t_te: Complex64,
    pub t_tm: Complex64,
    pub power_sum_te: f64,
    pub power_sum_tm: f64,
    /// wrap(arg t_TM - arg t_TE).
    pub dphi: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// All feasible grid points in lexicographic (wavelength, period,
    /// width, thickness) order.
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the lowest objective (first on ties).
    pub best: usize,
}

impl SweepResult {
    /// Point indices sorted best-first (stable, so grid order breaks ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            self.points[a].objective.partial_cmp(&self.points[b].objective).unwrap()
        });
        idx
    }
}

fn wrap(phi: f64) -> f64 {
    let w = (phi + std::f64::consts::PI).rem_euclid(TWO_PI) - std::f64::consts::PI;
    if w >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        w
    }
}

/// Evaluate the grating over the grid and rank by the half-wave objective
/// weight_amplitude * ||t_TE| - |t_TM|| + weight_phase * |wrap(dphi - pi)|.
pub fn design_sweep(
    ranges: &SweepRanges,
    beam: &DispersionTable,
    n_surround: f64,
    n_substrate: f64,
    n_cover: f64,
) -> Result<SweepResult> {
    for (axis, name) in [
        (&ranges.wavelengths, "wavelength"),
        (&ranges.periods, "period"),
        (&ranges.widths, "width"),
        (&ranges.thicknesses, "thickness"),
    ] {
        if axis.is_empty() {
            return Err(Error::InvalidGeometry {
                context: "design sweep",
                message: format!("empty {name} range"),
            });
        }
    }
    if !(ranges.weight_amplitude >= 0.0 && ranges.weight_phase >= 0.0) {
        return Err(Error::InvalidGeometry {
            context: "design sweep",
            message: "objective weights must be nonnegative".into(),
        });
    }

    let mut points = Vec::new();
    for &lam in &ranges.wavelengths {
        for &period in &ranges.periods {
            for &width in &ranges.widths {
                for &thickness in &ranges.thicknesses {
                    if width > period {
                        continue;
                    }
                    let geom = GratingGeometry::new(
                        period,
                        width,
                        thickness,
                        beam.clone(),
                        n_surround,
                        n_substrate,
                        n_cover,
                    )?;
                    if !geom.is_subwavelength(lam) {
                        continue;
                    }
                    let te = rcwa_1d(&geom, lam, Polarization::TE, ranges.harmonics)?;
                    let tm = rcwa_1d(&geom, lam, Polarization::TM, ranges.harmonics)?;
                    let dphi = wrap(tm.t0.arg() - te.t0.arg());
                    let objective = ranges.weight_amplitude * (te.t0.norm() - tm.t0.norm()).abs()
                        + ranges.weight_phase * wrap(dphi - std::f64::consts::PI).abs();
                    points.push(SweepPoint {
                        wavelength: lam,
                        period,
                        width,
                        thickness,
                        t_te: te.t0,
                        t_tm: tm.t0,
                        power_sum_te: te.power_sum(),
                        power_sum_tm: tm.power_sum(),
                        dphi,
                        objective,
                    });
                }
            }
        }
    }

    if points.is_empty() {
        return Err(Error::EmptySweep);
    }
    let best = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.objective.partial_cmp(&b.1.objective).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(SweepResult { points, best })
}

/// CSV rendering, one row per (grid point, polarization), TE before TM,
/// rows in grid order.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "lambda_nm, period_nm, width_nm, thickness_nm, pol, t_abs, t_phase_rad, dphi_rad, sum_eff\n",
    );
    for p in points {
        for (pol, t, sum) in [
            ("TE", p.t_te, p.power_sum_te),
            ("TM", p.t_tm, p.power_sum_tm),
        ] {
            out.push_str(&format!(
                "{:.3}, {:.3}, {:.3}, {:.3}, {}, {:.9}, {:.9}, {:.9}, {:.9}\n",
                p.wavelength * 1e9,
                p.period * 1e9,
                p.width * 1e9,
                p.thickness * 1e9,
                pol,
                t.norm(),
                t.arg(),
                p.dphi,
                sum,
            ));
        }
    }
    out
}
