//! End-to-end viewing simulation: display mask through the metasurface,
//! thin-lens eye, retina (or conjugate-plane) intensity.
//!
//! Per lit display cell, the aperture field over that cell's sample window
//! is amp * e^{i s phi(x,y)} for the polarization-converted channel (s from
//! the input helicity, phi from the phase map) and a constant co-polarized
//! leakage amplitude for the zeroth order. The eye leg (lens of focal f,
//! free space d_retina) collapses to one scaled Fourier transform because
//! the lens and Fresnel chirps combine into a single separable quadratic
//! phase; the transform is numerically identical to
//! fresnel_single(thin_lens(U, f), d_retina).
//!
//! Display cells are mutually incoherent by default (their intensities
//! add); a real display's pixels share no phase reference. The co- and
//! cross-polarized channels are orthogonal polarizations, so their
//! intensities always add regardless of mode.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft2_centered, Direction};
use crate::field::PhaseMap;
use crate::geometry::{cell_range, check_cell_tiling, DisplayPattern, EyeGeometry};
use crate::pb::{Helicity, PBElement};
use crate::propagate::quadratic_phase_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Retina,
    Conjugate,
}

impl Plane {
    pub fn as_str(&self) -> &'static str {
        match self {
            Plane::Retina => "retina",
            Plane::Conjugate => "conjugate",
        }
    }
}

/// Simulated intensity on the retina or the conjugate plane.
#[derive(Debug, Clone)]
pub struct RetinaImage {
    intensity: Array2<f64>,
    pitch: f64,
    wavelength: f64,
    plane: Plane,
    /// Power delivered by the geometric-phase (converted) channel.
    cross_power: f64,
    /// Power delivered by the unconverted zeroth-order channel.
    co_power: f64,
}

impl RetinaImage {
    pub fn intensity(&self) -> &Array2<f64> {
        &self.intensity
    }

    pub fn side(&self) -> usize {
        self.intensity.dim().0
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn coord(&self, idx: usize) -> f64 {
        (idx as f64 - (self.side() / 2) as f64) * self.pitch
    }

    pub fn total_power(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.pitch * self.pitch
    }

    pub fn cross_power(&self) -> f64 {
        self.cross_power
    }

    pub fn co_power(&self) -> f64 {
        self.co_power
    }

    #[cfg(test)]
    pub(crate) fn for_tests(intensity: Array2<f64>, pitch: f64, wavelength: f64) -> Self {
        RetinaImage {
            intensity,
            pitch,
            wavelength,
            plane: Plane::Retina,
            cross_power: 0.0,
            co_power: 0.0,
        }
    }

    /// Fraction of arriving power carried by the zeroth order.
    pub fn zeroth_order_fraction(&self) -> f64 {
        let total = self.cross_power + self.co_power;
        if total > 0.0 {
            self.co_power / total
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EyeSimOptions {
    /// Nanobeam transmission pair; its own rotation angle is irrelevant
    /// here because the phase map supplies theta = phi/2 per sample.
    pub element: PBElement,
    pub input: Helicity,
    /// Crossed circular analyzer: drops the co-polarized channel.
    pub analyzer: bool,
    /// Treat lit display cells as mutually coherent (sum fields, not
    /// intensities). Used for single-beam bench reproductions.
    pub coherent: bool,
}

impl Default for EyeSimOptions {
    fn default() -> Self {
        EyeSimOptions {
            element: PBElement::ideal(0.0),
            input: Helicity::Right,
            analyzer: false,
            coherent: false,
        }
    }
}

/// One output channel: constant amplitude, with or without the map's
/// geometric phase.
struct Channel {
    amp: Complex64,
    modulated: bool,
}

struct PlaneJob<'a> {
    map: &'a PhaseMap,
    mask: &'a DisplayPattern,
    /// Multiplies the map phase inside e^{i * phase_factor * phi}.
    phase_factor: f64,
    /// Separable quadratic phase (lens + propagation chirp), 1D factor.
    chirp: Vec<Complex64>,
    /// |prefactor|^2 of the scaled Fourier transform.
    scale: f64,
    out_pitch: f64,
    plane: Plane,
    coherent: bool,
}

fn validate_grids(map: &PhaseMap, mask: &DisplayPattern) -> Result<usize> {
    let (rows, cols) = map.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::BadFieldShape { rows, cols });
    }
    check_cell_tiling(mask.side(), rows)?;
    let aperture_map = rows as f64 * map.pitch();
    let aperture_mask = mask.side() as f64 * mask.pixel_size();
    if (aperture_map - aperture_mask).abs() > map.pitch() {
        return Err(Error::InvalidGeometry {
            context: "eye simulation",
            message: format!(
                "mask aperture {aperture_mask:e} != phase-map aperture {aperture_map:e}"
            ),
        });
    }
    Ok(rows)
}

/// Quadratic chirps must advance < pi per sample at the grid edge.
fn check_chirp_sampling(n: usize, pitch: f64, coeff: f64) -> Result<()> {
    let x_max = (n / 2) as f64 * pitch;
    let step = 2.0 * coeff.abs() * x_max * pitch;
    if step > std::f64::consts::PI {
        return Err(Error::InvalidGeometry {
            context: "eye simulation",
            message: format!(
                "combined lens/propagation chirp aliases: {step:.3} rad per sample at the edge"
            ),
        });
    }
    Ok(())
}

fn fill_patch(
    work: &mut Array2<Complex64>,
    values: &Array2<f64>,
    chirp: &[Complex64],
    phase_factor: f64,
    amp: Complex64,
    modulated: bool,
    rows: (usize, usize),
    cols: (usize, usize),
) {
    for r in rows.0..rows.1 {
        let cy = chirp[r] * amp;
        for c in cols.0..cols.1 {
            let v = if modulated {
                Complex64::from_polar(1.0, phase_factor * values[[r, c]])
            } else {
                Complex64::new(1.0, 0.0)
            };
            work[[r, c]] = v * cy * chirp[c];
        }
    }
}

fn run_plane(job: &PlaneJob, channels: &[Channel]) -> Result<RetinaImage> {
    let n = validate_grids(job.map, job.mask)?;
    let cells = job.mask.side();
    let values = job.map.values();
    let lit = job.mask.lit_pixels();

    let mut work: Array2<Complex64> = Array2::zeros((n, n));
    let mut intensity: Array2<f64> = Array2::zeros((n, n));
    let mut channel_power = vec![0.0f64; channels.len()];

    let transform_and_accumulate =
        |work: &mut Array2<Complex64>, power: &mut f64, intensity: &mut Array2<f64>| {
            fft2_centered(work, Direction::Forward, 1.0);
            let mut sum = 0.0;
            for (i, w) in intensity.iter_mut().zip(work.iter()) {
                let p = w.norm_sqr() * job.scale;
                *i += p;
                sum += p;
            }
            *power += sum * job.out_pitch * job.out_pitch;
        };

    for (ch_idx, ch) in channels.iter().enumerate() {
        if ch.amp.norm_sqr() == 0.0 {
            continue;
        }
        work.fill(Complex64::new(0.0, 0.0));
        let mut pending = false;
        for &(i, j) in &lit {
            let rows = cell_range(i, cells, n);
            let cols = cell_range(j, cells, n);
            fill_patch(
                &mut work,
                values,
                &job.chirp,
                job.phase_factor,
                ch.amp,
                ch.modulated,
                rows,
                cols,
            );
            pending = true;
            if !job.coherent {
                transform_and_accumulate(
                    &mut work,
                    &mut channel_power[ch_idx],
                    &mut intensity,
                );
                work.fill(Complex64::new(0.0, 0.0));
                pending = false;
            }
        }
        if pending {
            transform_and_accumulate(&mut work, &mut channel_power[ch_idx], &mut intensity);
        }
    }

    Ok(RetinaImage {
        intensity,
        pitch: job.out_pitch,
        wavelength: job.map.wavelength(),
        plane: job.plane,
        cross_power: channel_power[0],
        co_power: channel_power.get(1).copied().unwrap_or(0.0),
    })
}

/// Render what the eye sees on the retina.
pub fn eye_simulate(
    map: &PhaseMap,
    mask: &DisplayPattern,
    eye: &EyeGeometry,
    opts: &EyeSimOptions,
) -> Result<RetinaImage> {
    let n = validate_grids(map, mask)?;
    let lambda = map.wavelength();
    let pitch = map.pitch();
    let k = 2.0 * std::f64::consts::PI / lambda;
    let f = eye.effective_focal();
    let dz = eye.retina_distance;
    // Lens e^{-i k r^2/(2f)} times Fresnel input chirp e^{+i k r^2/(2 dz)}.
    let coeff = 0.5 * k * (1.0 / dz - 1.0 / f);
    check_chirp_sampling(n, pitch, coeff)?;

    let job = PlaneJob {
        map,
        mask,
        phase_factor: opts.input.phase_sign(),
        chirp: quadratic_phase_1d(n, pitch, coeff),
        scale: (pitch * pitch / (lambda * dz)).powi(2),
        out_pitch: lambda * dz / (n as f64 * pitch),
        plane: Plane::Retina,
        coherent: opts.coherent,
    };
    let mut channels = vec![Channel { amp: opts.element.cross_amplitude_base(), modulated: true }];
    if !opts.analyzer {
        channels.push(Channel { amp: opts.element.co_amplitude(), modulated: false });
    }
    run_plane(&job, &channels)
}

/// Reconstruct the virtual image: back-propagate the converted channel by
/// the conjugate distance `d_c`. Output pitch grows to lambda*d_c/(n*pitch),
/// so the window covers the full magnified image. Equivalent to the
/// conjugated forward Fresnel solve; only the converted channel carries the
/// image, so the zeroth order is omitted.
pub fn conjugate_reconstruct(
    map: &PhaseMap,
    mask: &DisplayPattern,
    conjugate_distance: f64,
    opts: &EyeSimOptions,
) -> Result<RetinaImage> {
    if !(conjugate_distance > 0.0 && conjugate_distance.is_finite()) {
        return Err(Error::InvalidGeometry {
            context: "conjugate reconstruction",
            message: format!("conjugate distance must be positive, got {conjugate_distance:e}"),
        });
    }
    let n = validate_grids(map, mask)?;
    let lambda = map.wavelength();
    let pitch = map.pitch();
    let k = 2.0 * std::f64::consts::PI / lambda;
    // Backward propagation: conj . fresnel_single(d_c) . conj. The outer
    // conjugation is dropped (intensity only); the inner one flips the sign
    // of the map phase.
    let coeff = 0.5 * k / conjugate_distance;
    check_chirp_sampling(n, pitch, coeff)?;

    let job = PlaneJob {
        map,
        mask,
        phase_factor: -opts.input.phase_sign(),
        chirp: quadratic_phase_1d(n, pitch, coeff),
        scale: (pitch * pitch / (lambda * conjugate_distance)).powi(2),
        out_pitch: lambda * conjugate_distance / (n as f64 * pitch),
        plane: Plane::Conjugate,
        coherent: opts.coherent,
    };
    let channels =
        vec![Channel { amp: opts.element.cross_amplitude_base().conj(), modulated: true }];
    run_plane(&job, &channels)
}

/// Sweep the eye's focal length and score each image by peak concentration
/// (max intensity / total power). Returns the sharpest focal length and the
/// full (f, sharpness) curve.
pub fn accommodation_sweep(
    map: &PhaseMap,
    mask: &DisplayPattern,
    eye: &EyeGeometry,
    f_min: f64,
    f_max: f64,
    steps: usize,
    opts: &EyeSimOptions,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if !(f_min > 0.0 && f_max.is_finite() && f_min <= f_max) {
        return Err(Error::InvalidGeometry {
            context: "accommodation sweep",
            message: format!("need 0 < f_min <= f_max, got [{f_min:e}, {f_max:e}]"),
        });
    }
    if steps < 3 {
        return Err(Error::InvalidGeometry {
            context: "accommodation sweep",
            message: format!("need at least 3 steps, got {steps}"),
        });
    }
    let mut curve = Vec::with_capacity(steps);
    let mut best = (f_min, f64::NEG_INFINITY);
    for s in 0..steps {
        let f = f_min + (f_max - f_min) * s as f64 / (steps - 1) as f64;
        let eye_f = EyeGeometry { accommodation: Some(f), ..*eye };
        let img = eye_simulate(map, mask, &eye_f, opts)?;
        let peak = img.intensity.iter().cloned().fold(0.0f64, f64::max);
        let total = img.intensity.iter().sum::<f64>();
        let sharpness = if total > 0.0 { peak / total } else { 0.0 };
        curve.push((f, sharpness));
        if sharpness > best.1 {
            best = (f, sharpness);
        }
    }
    Ok((best.0, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{assemble_hologram, DesignMode, GsSettings};
    use crate::geometry::SystemGeometry;

    const GRID: usize = 512;

    fn geometry() -> SystemGeometry {
        SystemGeometry::new(500e-6, 10, 50e-6, 0.25, 100.0, 543e-9).unwrap()
    }

    fn eye_focused() -> EyeGeometry {
        let f = EyeGeometry::accommodated_focal(0.25, 0.025);
        EyeGeometry::new(0.017, 0.025).unwrap().accommodated_to(f).unwrap()
    }

    fn design(geom: &SystemGeometry) -> PhaseMap {
        assemble_hologram(
            geom,
            DesignMode::PerCell,
            geom.aperture / GRID as f64,
            0,
            &GsSettings::default(),
            None,
        )
        .unwrap()
    }

    fn peak_coords(img: &RetinaImage) -> (f64, f64) {
        let mut best = (0usize, 0usize);
        let mut best_val = -1.0;
        for (r, row) in img.intensity().rows().into_iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if *v > best_val {
                    best_val = *v;
                    best = (r, c);
                }
            }
        }
        (img.coord(best.1), img.coord(best.0))
    }

    #[test]
    fn corner_pixel_focuses_at_inverted_lattice_point() {
        // Cell (0,0) center (-225 um, -225 um); virtual point Mag*x_c at
        // -22.5 mm; imaged onto the retina inverted with scale d_r/d_c:
        // expected spot (+2.25 mm, +2.25 mm).
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::single(10, 0, 0, 50e-6).unwrap();
        let img = eye_simulate(&map, &mask, &eye_focused(), &EyeSimOptions::default()).unwrap();
        let (x, y) = peak_coords(&img);
        assert!((x - 2.25e-3).abs() < 250e-6, "x = {x:e}");
        assert!((y - 2.25e-3).abs() < 250e-6, "y = {y:e}");
    }

    #[test]
    fn full_gs_single_pixel_hits_the_same_spot() {
        // Pins the sign chain of the GS target mapping end to end.
        let geom = geometry();
        let mask = DisplayPattern::single(10, 2, 7, 50e-6).unwrap();
        let map = assemble_hologram(
            &geom,
            DesignMode::FullGs,
            geom.aperture / GRID as f64,
            0,
            &GsSettings { iterations: 10, seed: 3 },
            Some(&mask),
        )
        .unwrap();
        // Whole-aperture hologram: illuminate fully and coherently.
        let full = DisplayPattern::all_on(10, 50e-6).unwrap();
        let opts = EyeSimOptions { coherent: true, ..Default::default() };
        let img = eye_simulate(&map, &full, &eye_focused(), &opts).unwrap();
        let (x, y) = peak_coords(&img);
        // Cell (2,7): x_c = -125 um, y_c = -... (2.5 - 5 + 0.5)*50 um.
        let (xc, yc) = geom.cell_center(2, 7);
        let scale = 100.0 * 0.025 / 0.25;
        let (want_x, want_y) = (-scale * xc, -scale * yc);
        assert!((x - want_x).abs() < 250e-6, "x = {x:e}, want {want_x:e}");
        assert!((y - want_y).abs() < 250e-6, "y = {y:e}, want {want_y:e}");
    }

    #[test]
    fn conjugate_spot_is_upright_at_magnified_position() {
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::single(10, 0, 0, 50e-6).unwrap();
        let img =
            conjugate_reconstruct(&map, &mask, 0.25, &EyeSimOptions::default()).unwrap();
        assert_eq!(img.plane(), Plane::Conjugate);
        let (x, y) = peak_coords(&img);
        assert!((x + 22.5e-3).abs() < 2.5e-3, "x = {x:e}");
        assert!((y + 22.5e-3).abs() < 2.5e-3, "y = {y:e}");
    }

    #[test]
    fn incoherent_intensities_add_exactly() {
        let geom = geometry();
        let map = design(&geom);
        let a = DisplayPattern::single(10, 1, 1, 50e-6).unwrap();
        let b = DisplayPattern::single(10, 8, 3, 50e-6).unwrap();
        let mut both = ndarray::Array2::from_elem((10, 10), false);
        both[[1, 1]] = true;
        both[[8, 3]] = true;
        let ab = DisplayPattern::new(both, 50e-6).unwrap();
        let eye = eye_focused();
        let opts = EyeSimOptions::default();
        let ia = eye_simulate(&map, &a, &eye, &opts).unwrap();
        let ib = eye_simulate(&map, &b, &eye, &opts).unwrap();
        let iab = eye_simulate(&map, &ab, &eye, &opts).unwrap();
        for ((s, x), y) in iab
            .intensity()
            .iter()
            .zip(ia.intensity().iter())
            .zip(ib.intensity().iter())
        {
            assert!((s - (x + y)).abs() <= 1e-12 * s.max(1.0), "{s} vs {} ", x + y);
        }
    }

    #[test]
    fn coherent_mode_sums_fields_not_intensities() {
        // With two overlapping-target masks the coherent image differs from
        // the intensity sum; with one pixel they agree.
        let geom = geometry();
        let map = design(&geom);
        let one = DisplayPattern::single(10, 4, 4, 50e-6).unwrap();
        let eye = eye_focused();
        let inc = eye_simulate(&map, &one, &eye, &EyeSimOptions::default()).unwrap();
        let coh = eye_simulate(
            &map,
            &one,
            &eye,
            &EyeSimOptions { coherent: true, ..Default::default() },
        )
        .unwrap();
        for (a, b) in inc.intensity().iter().zip(coh.intensity().iter()) {
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn analyzer_removes_zeroth_order() {
        use num_complex::Complex64;
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::all_on(10, 50e-6).unwrap();
        // Lossy, partially converting element.
        let elem = crate::pb::PBElement::new(
            Complex64::new(0.9, 0.0),
            Complex64::from_polar(0.7, 2.8),
            0.0,
        )
        .unwrap();
        let eye = eye_focused();
        let without = eye_simulate(
            &map,
            &mask,
            &eye,
            &EyeSimOptions { element: elem, ..Default::default() },
        )
        .unwrap();
        let with = eye_simulate(
            &map,
            &mask,
            &eye,
            &EyeSimOptions { element: elem, analyzer: true, ..Default::default() },
        )
        .unwrap();
        assert!(without.co_power() > 0.0);
        assert!(without.zeroth_order_fraction() > 0.0);
        assert_eq!(with.co_power(), 0.0);
        assert_eq!(with.zeroth_order_fraction(), 0.0);
        assert!(with.total_power() < without.total_power());
    }

    #[test]
    fn output_power_bounded_by_input() {
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::all_on(10, 50e-6).unwrap();
        let img = eye_simulate(&map, &mask, &eye_focused(), &EyeSimOptions::default()).unwrap();
        // Unit-amplitude illumination over the full aperture, ideal element:
        // input power = aperture area.
        let input = (500e-6f64).powi(2);
        assert!(img.total_power() <= input * (1.0 + 1e-9));
        assert!(img.total_power() > 0.5 * input);
    }

    #[test]
    fn mismatched_mask_rejected() {
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::all_on(10, 49e-6).unwrap();
        assert!(eye_simulate(&map, &mask, &eye_focused(), &EyeSimOptions::default()).is_err());
    }

    #[test]
    fn sweep_finds_thin_lens_focus_for_flat_phase() {
        // Flat phase and full mask: collimated beam, sharpest at f = d_r.
        let flat = PhaseMap::new(ndarray::Array2::zeros((GRID, GRID)), 500e-6 / GRID as f64, 543e-9)
            .unwrap();
        let mask = DisplayPattern::all_on(10, 50e-6).unwrap();
        let eye = EyeGeometry::new(0.017, 0.025).unwrap();
        let opts = EyeSimOptions { coherent: true, ..Default::default() };
        let (best, curve) =
            accommodation_sweep(&flat, &mask, &eye, 20e-3, 30e-3, 11, &opts).unwrap();
        assert!((best - 25e-3).abs() < 1.01e-3, "best = {best:e}");
        assert_eq!(curve.len(), 11);
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let geom = geometry();
        let map = design(&geom);
        let mask = DisplayPattern::all_on(10, 50e-6).unwrap();
        let eye = EyeGeometry::new(0.017, 0.025).unwrap();
        let opts = EyeSimOptions::default();
        assert!(accommodation_sweep(&map, &mask, &eye, 0.0, 0.03, 5, &opts).is_err());
        assert!(accommodation_sweep(&map, &mask, &eye, 0.03, 0.02, 5, &opts).is_err());
        assert!(accommodation_sweep(&map, &mask, &eye, 0.02, 0.03, 2, &opts).is_err());
    }
}
