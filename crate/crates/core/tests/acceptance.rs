//! Acceptance gate: ten end-to-end criteria, one test each, every test
//! printing a single `ACCEPTANCE n (name): PASS|FAIL` line (visible with
//! `--nocapture` and on failure). Tolerances and golden thresholds are
//! pinned as constants next to each criterion; goldens marked "frozen"
//! were recorded from reference runs of this code and its independent
//! Python oracles and must not drift.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pbholo::design::{assemble_hologram, DesignMode, GsSettings};
use pbholo::dispersion::DispersionTable;
use pbholo::eye::{accommodation_sweep, conjugate_reconstruct, eye_simulate, EyeSimOptions};
use pbholo::fft::{fft2_centered, Direction};
use pbholo::field::{wrap, ComplexField, PhaseMap};
use pbholo::geometry::{DisplayPattern, EyeGeometry, SystemGeometry};
use pbholo::grating::{
    design_sweep, rcwa_1d, tmm_slab, GratingGeometry, Polarization, SweepRanges,
};
use pbholo::metrics::{
    cell_energies, cell_energy_fraction, conjugate_lattice, local_maxima, retina_lattice,
};
use pbholo::pb::{pb_output, Helicity, PBElement};
use pbholo::propagate::{angular_spectrum, fresnel_single};

const APERTURE: f64 = 500e-6;
const WAVELENGTH: f64 = 543e-9;
const CONJUGATE_DISTANCE: f64 = 0.25;
const MAGNIFICATION: f64 = 100.0;
const RETINA_DISTANCE: f64 = 0.025;
const EYE_FOCAL: f64 = 0.017;

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn default_geometry(pixels: usize) -> SystemGeometry {
    SystemGeometry::new(
        APERTURE,
        pixels,
        APERTURE / pixels as f64,
        CONJUGATE_DISTANCE,
        MAGNIFICATION,
        WAVELENGTH,
    )
    .unwrap()
}

/// Eye focused on the virtual image plane: f = 1/(1/0.25 + 1/0.025) m.
fn accommodated_eye() -> EyeGeometry {
    EyeGeometry::new(EYE_FOCAL, RETINA_DISTANCE)
        .unwrap()
        .accommodated_to(EyeGeometry::accommodated_focal(CONJUGATE_DISTANCE, RETINA_DISTANCE))
        .unwrap()
}

fn single_pixel_mask(pixels: usize, i: usize, j: usize) -> DisplayPattern {
    let mut lit = Array2::from_elem((pixels, pixels), false);
    lit[[i, j]] = true;
    DisplayPattern::new(lit, APERTURE / pixels as f64).unwrap()
}

fn full_mask(pixels: usize) -> DisplayPattern {
    DisplayPattern::new(
        Array2::from_elem((pixels, pixels), true),
        APERTURE / pixels as f64,
    )
    .unwrap()
}

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} ({name}): {verdict} - {detail}");
}

// --- 1 -------------------------------------------------------------------

/// Each of the 100 single-pixel masks must put most retina energy into its
/// own target cell. Golden threshold frozen from the reference run of this
/// pipeline (observed minimum 0.7726 over all 100 pixels, edge pixels
/// lowest; cross-checked against the independent Python Fourier-optics
/// oracle which gives 0.772 for the corner cell).
const MIN_IN_CELL_FRACTION: f64 = 0.76;
const MAX_TOTAL_SECONDS: f64 = 60.0;

#[test]
fn criterion_01_single_pixel_locality() {
    let start = Instant::now();
    let geom = default_geometry(10);
    let grid_n = 2048usize;
    let map = assemble_hologram(
        &geom,
        DesignMode::PerCell,
        APERTURE / grid_n as f64,
        8,
        &GsSettings::default(),
        None,
    )
    .unwrap();
    let eye = accommodated_eye();
    let lattice = retina_lattice(&geom, RETINA_DISTANCE);
    let opts = EyeSimOptions::default();

    let mut min_frac = f64::INFINITY;
    let mut min_cell = (0usize, 0usize);
    for i in 0..10 {
        for j in 0..10 {
            let mask = single_pixel_mask(10, i, j);
            let img = eye_simulate(&map, &mask, &eye, &opts).unwrap();
            let frac = cell_energies(&img, &lattice, &[(i, j)])[0];
            if frac < min_frac {
                min_frac = frac;
                min_cell = (i, j);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = min_frac >= MIN_IN_CELL_FRACTION && elapsed <= MAX_TOTAL_SECONDS;
    report(
        1,
        "single-pixel locality",
        pass,
        &format!(
            "min in-cell fraction {min_frac:.4} at cell {min_cell:?} (threshold {MIN_IN_CELL_FRACTION}), {elapsed:.1} s for 100 pixels at 2048^2 (budget {MAX_TOTAL_SECONDS} s)"
        ),
    );
    assert!(pass, "min fraction {min_frac} at {min_cell:?}, elapsed {elapsed:.1} s");
}

// --- 2 -------------------------------------------------------------------

/// Full mask at best accommodation: exactly 100 dominant maxima on the
/// inverted 10x10 retina lattice, each within half a cell spacing, and the
/// lattice span (extent scaled to full cell count) equal to 5 mm +/- 5%.
const LATTICE_SPAN: f64 = 5e-3;
const SPAN_REL_TOL: f64 = 0.05;

#[test]
fn criterion_02_full_lattice_reconstruction() {
    let geom = default_geometry(10);
    let grid_n = 2048usize;
    let map = assemble_hologram(
        &geom,
        DesignMode::PerCell,
        APERTURE / grid_n as f64,
        8,
        &GsSettings::default(),
        None,
    )
    .unwrap();
    let eye = accommodated_eye();
    let img = eye_simulate(&map, &full_mask(10), &eye, &EyeSimOptions::default()).unwrap();

    let lattice = retina_lattice(&geom, RETINA_DISTANCE);
    let pitch = lattice.cell_pitch();
    let maxima = local_maxima(&img, 100, 0.5 * pitch);

    let mut claimed = [[false; 10]; 10];
    let mut worst = 0.0f64;
    let mut misplaced = 0usize;
    for &(x, y, _) in &maxima {
        let mut best = f64::INFINITY;
        let mut cell = (0usize, 0usize);
        for i in 0..10 {
            for j in 0..10 {
                let (cx, cy) = lattice.position(i, j);
                let d = (x - cx).hypot(y - cy);
                if d < best {
                    best = d;
                    cell = (i, j);
                }
            }
        }
        worst = worst.max(best);
        if best > 0.5 * pitch || claimed[cell.0][cell.1] {
            misplaced += 1;
        }
        claimed[cell.0][cell.1] = true;
    }
    let cells_hit: usize = claimed.iter().flatten().filter(|&&c| c).count();

    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &maxima {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    // Peak-to-peak extent covers 9 of 10 cell pitches.
    let span = 0.5 * ((xmax - xmin) + (ymax - ymin)) * 10.0 / 9.0;

    let pass = maxima.len() == 100
        && misplaced == 0
        && cells_hit == 100
        && (span - LATTICE_SPAN).abs() <= SPAN_REL_TOL * LATTICE_SPAN;
    report(
        2,
        "full-lattice reconstruction",
        pass,
        &format!(
            "{} maxima, {} distinct cells, worst offset {:.1} um (limit {:.1} um), span {:.3} mm (target 5 mm +/- 5%)",
            maxima.len(),
            cells_hit,
            worst * 1e6,
            0.5 * pitch * 1e6,
            span * 1e3
        ),
    );
    assert!(pass, "maxima {}, cells {}, misplaced {}, span {:.4} mm", maxima.len(), cells_hit, misplaced, span * 1e3);
}

// --- 3 -------------------------------------------------------------------

/// Controls. Zero phase: energy concentrates in the central diffraction
/// core (box of +/- two first-zero widths, 2 lambda d_r / A); golden frozen
/// from the reference run (observed 0.9026, the square-aperture value
/// 0.9499^2 plus sampling). Random phase: speckle spreads energy so no
/// target cell exceeds twice the mean cell energy.
const ZERO_PHASE_CORE_MIN: f64 = 0.90;
const SPECKLE_MAX_OVER_MEAN: f64 = 2.0;

#[test]
fn criterion_03_zero_and_random_phase_controls() {
    let grid_n = 512usize;
    let pitch = APERTURE / grid_n as f64;

    // Zero phase, one coherent full-aperture cell, eye focused at the
    // retina (flat wavefront from infinity): plain square-aperture PSF.
    let flat = PhaseMap::new(Array2::zeros((grid_n, grid_n)), pitch, WAVELENGTH).unwrap();
    let eye_flat = EyeGeometry::new(EYE_FOCAL, RETINA_DISTANCE)
        .unwrap()
        .accommodated_to(RETINA_DISTANCE)
        .unwrap();
    let coherent = EyeSimOptions { coherent: true, ..Default::default() };
    let img = eye_simulate(&flat, &full_mask(1), &eye_flat, &coherent).unwrap();
    let core_half_width = 2.0 * WAVELENGTH * RETINA_DISTANCE / APERTURE;
    let core_fraction = cell_energy_fraction(&img, (0.0, 0.0), 2.0 * core_half_width);

    // Random phase, incoherent 10x10 display at best accommodation.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Array2::from_shape_fn((grid_n, grid_n), |_| rng.random_range(-PI..PI));
    let noisy = PhaseMap::new(noise, pitch, WAVELENGTH).unwrap();
    let img_noise =
        eye_simulate(&noisy, &full_mask(10), &accommodated_eye(), &EyeSimOptions::default())
            .unwrap();
    let geom = default_geometry(10);
    let lattice = retina_lattice(&geom, RETINA_DISTANCE);
    let all: Vec<(usize, usize)> =
        (0..10).flat_map(|i| (0..10).map(move |j| (i, j))).collect();
    let energies = cell_energies(&img_noise, &lattice, &all);
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let max = energies.iter().cloned().fold(0.0f64, f64::max);

    let pass = core_fraction >= ZERO_PHASE_CORE_MIN && max < SPECKLE_MAX_OVER_MEAN * mean;
    report(
        3,
        "zero/random phase controls",
        pass,
        &format!(
            "zero-phase core fraction {core_fraction:.4} (threshold {ZERO_PHASE_CORE_MIN}), speckle max/mean {:.3} (limit {SPECKLE_MAX_OVER_MEAN})",
            max / mean
        ),
    );
    assert!(pass, "core {core_fraction:.4}, speckle ratio {:.3}", max / mean);
}

// --- 4 -------------------------------------------------------------------

/// Quantizing a linear phase ramp to 8 levels scales the design-order
/// efficiency by sinc^2(pi/8) relative to the continuous ramp.
const QUANT_REL_TOL: f64 = 0.01;

#[test]
fn criterion_04_quantization_efficiency_law() {
    let n = 512usize;
    let periods = 8i64; // 64 samples per period, a multiple of the 8 levels
    let pitch = APERTURE / n as f64;
    let ramp = Array2::from_shape_fn((n, n), |(_, c)| {
        wrap(2.0 * PI * periods as f64 * (c as f64 - (n / 2) as f64) / n as f64)
    });
    let continuous = PhaseMap::new(ramp, pitch, WAVELENGTH).unwrap();
    let quantized = continuous.quantize(8).unwrap();

    let order_power = |map: &PhaseMap| -> f64 {
        let mut field = Array2::from_shape_fn((n, n), |idx| {
            Complex64::from_polar(1.0, map.values()[idx])
        });
        fft2_centered(&mut field, Direction::Forward, 1.0 / n as f64);
        let total: f64 = field.iter().map(|v| v.norm_sqr()).sum();
        field[[n / 2, (n as i64 / 2 + periods) as usize]].norm_sqr() / total
    };
    let eta_cont = order_power(&continuous);
    let eta_quant = order_power(&quantized);
    let ratio = eta_quant / eta_cont;
    let sinc = (PI / 8.0).sin() / (PI / 8.0);
    let law = sinc * sinc;

    let pass = (ratio / law - 1.0).abs() <= QUANT_REL_TOL && (eta_cont - 1.0).abs() < 1e-9;
    report(
        4,
        "8-level quantization law",
        pass,
        &format!(
            "efficiency ratio {ratio:.5} vs sinc^2(pi/8) = {law:.5} (rel err {:.2e}, tol {QUANT_REL_TOL})",
            ratio / law - 1.0
        ),
    );
    assert!(pass, "ratio {ratio:.6} vs {law:.6}");
}

// --- 5 -------------------------------------------------------------------

/// Conjugate-plane geometry: the reconstructed virtual image spans 100x
/// the aperture at 250 mm, and an accommodation sweep puts best focus at
/// f = 1/(1/250 + 1/25) mm = 22.73 mm within one sweep step.
const CONJUGATE_SPAN: f64 = 0.05;
const CONJ_SPAN_REL_TOL: f64 = 0.02;

#[test]
fn criterion_05_conjugate_geometry_and_accommodation() {
    let geom = default_geometry(10);
    let grid_n = 512usize;
    let pitch = APERTURE / grid_n as f64;
    let map = assemble_hologram(
        &geom,
        DesignMode::PerCell,
        pitch,
        8,
        &GsSettings::default(),
        None,
    )
    .unwrap();

    let img =
        conjugate_reconstruct(&map, &full_mask(10), CONJUGATE_DISTANCE, &EyeSimOptions::default())
            .unwrap();
    let lattice = conjugate_lattice(&geom);
    let maxima = local_maxima(&img, 100, 0.5 * lattice.cell_pitch());
    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in &maxima {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let span = 0.5 * ((xmax - xmin) + (ymax - ymin)) * 10.0 / 9.0;
    let span_ok = maxima.len() == 100
        && (span - CONJUGATE_SPAN).abs() <= CONJ_SPAN_REL_TOL * CONJUGATE_SPAN;

    // Sweep 20..26 mm in 13 steps (0.5 mm): best focus for the 250 mm
    // virtual image must land within one step of 250/11 mm. Accommodation
    // only bites when the whole aperture works as one wavefront, so the
    // sweep uses the full-aperture phase-retrieved hologram of a single
    // target pixel, treated coherently.
    let gs_map = assemble_hologram(
        &geom,
        DesignMode::FullGs,
        pitch,
        8,
        &GsSettings { iterations: 20, seed: 1 },
        Some(&single_pixel_mask(10, 5, 5)),
    )
    .unwrap();
    let eye = EyeGeometry::new(EYE_FOCAL, RETINA_DISTANCE).unwrap();
    let coherent = EyeSimOptions { coherent: true, ..Default::default() };
    let (best_f, curve) = accommodation_sweep(
        &gs_map,
        &full_mask(10),
        &eye,
        0.020,
        0.026,
        13,
        &coherent,
    )
    .unwrap();
    let step = (0.026 - 0.020) / 12.0;
    let expected_f = EyeGeometry::accommodated_focal(CONJUGATE_DISTANCE, RETINA_DISTANCE);
    let sweep_ok = curve.len() == 13 && (best_f - expected_f).abs() <= step;

    let pass = span_ok && sweep_ok;
    report(
        5,
        "conjugate geometry",
        pass,
        &format!(
            "span {:.2} mm (target 50 mm +/- 2%), best focus {:.3} mm vs {:.3} mm (step {:.2} mm)",
            span * 1e3,
            best_f * 1e3,
            expected_f * 1e3,
            step * 1e3
        ),
    );
    assert!(pass, "span {:.4} m, best_f {:.5} m", span, best_f);
}

// --- 6 -------------------------------------------------------------------

/// Polarization-conversion identities of the nanobeam cell model.
#[test]
fn criterion_06_polarization_model_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_energy = 0.0f64;
    let mut worst_leak = 0.0f64;
    let mut worst_phase = 0.0f64;
    for _ in 0..1000 {
        let t_te = Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-PI..PI));
        let t_tm = Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-PI..PI));
        let theta = rng.random_range(-PI..PI);
        let el = PBElement::new(t_te, t_tm, theta).unwrap();

        // Energy split: leakage + conversion = (|t_TE|^2 + |t_TM|^2)/2.
        let budget = 0.5 * (t_te.norm_sqr() + t_tm.norm_sqr());
        worst_energy = worst_energy
            .max((el.leakage_efficiency() + el.conversion_efficiency() - budget).abs());

        // Full conversion: equal magnitudes, pi retardance.
        let mag = rng.random_range(0.1..1.0);
        let phase = rng.random_range(-PI..PI);
        let half_wave = PBElement::new(
            Complex64::from_polar(mag, phase),
            Complex64::from_polar(mag, phase + PI),
            theta,
        )
        .unwrap();
        worst_leak = worst_leak.max(half_wave.leakage_efficiency());

        // Geometric phase of the converted channel is +/- 2 theta.
        for hel in [Helicity::Right, Helicity::Left] {
            let out = pb_output(&el, hel);
            if out.cross.norm() > 1e-12 {
                let got = (out.cross / el.cross_amplitude_base()).arg();
                let want = hel.phase_sign() * 2.0 * theta;
                worst_phase = worst_phase.max(wrap(got - want).abs());
            }
        }
    }
    let pass = worst_energy < 1e-12 && worst_leak < 1e-12 && worst_phase < 1e-9;
    report(
        6,
        "polarization identities",
        pass,
        &format!(
            "energy identity {worst_energy:.2e} (tol 1e-12), half-wave leakage {worst_leak:.2e} (tol 1e-12), geometric phase error {worst_phase:.2e} (tol 1e-9)"
        ),
    );
    assert!(pass);
}

// --- 7 -------------------------------------------------------------------

/// Rigorous grating solver oracles at the operating point: 230 nm period,
/// 70 nm beams, 543 nm light, polysilicon on glass.
///
/// KNOWN HONEST FAILURE: the N=11 vs N=41 zeroth-order amplitude check
/// passes for TE (2.2e-4) but fails for TM (3.4e-3 > 1e-3; the independent
/// Python oracle reproduces both deltas to all printed digits). TM Fourier
/// factorization converges intrinsically slower for high-contrast lossy
/// profiles even with the correct inverse-rule formulation (Li, JOSA A 13,
/// 1870 (1996)); this geometry first reaches 1e-3 near N = 17. The solver
/// itself is validated independently: both limits match the analytic slab
/// to 1e-10, power is conserved losslessly to 1e-9, deep-subwavelength
/// retardance matches effective-medium theory, the lossy operating point
/// matches a corrected independent oracle to 2e-14, and the amplitudes are
/// holomorphic in the permittivity (Cauchy-Riemann test) as Maxwell's
/// equations require. The criterion is kept as written and reported
/// honestly rather than loosened.
const LIMIT_TOL: f64 = 1e-8;
const LOSSLESS_TOL: f64 = 1e-6;
const CONVERGENCE_TOL: f64 = 1e-3;

#[test]
fn criterion_07_grating_solver_oracles() {
    let table = DispersionTable::load(&data_file("polysilicon_nk.txt")).unwrap();
    let n_beam = table.interpolate(WAVELENGTH).unwrap().conj();
    let thickness = 155e-9;

    // (a) fill-factor limits against the analytic single-film solution.
    let mut worst_limit = 0.0f64;
    for (width, n_slab) in [(0.0, Complex64::new(1.0, 0.0)), (230e-9, n_beam)] {
        let geom =
            GratingGeometry::new(230e-9, width, thickness, table.clone(), 1.0, 1.46, 1.0).unwrap();
        let airy = tmm_slab(n_slab, thickness, WAVELENGTH, 1.0, 1.46);
        for pol in [Polarization::TE, Polarization::TM] {
            let out = rcwa_1d(&geom, WAVELENGTH, pol, 15).unwrap();
            worst_limit = worst_limit.max((out.t0 - airy).norm());
        }
    }
    let limits_ok = worst_limit < LIMIT_TOL;

    // (b) lossless energy conservation at every sweep point.
    let glass_beam = DispersionTable::constant(2.0).unwrap();
    let ranges = SweepRanges::inclusive(
        WAVELENGTH,
        (230e-9, 230e-9, 1),
        (50e-9, 90e-9, 3),
        (100e-9, 250e-9, 3),
    );
    let sweep = design_sweep(&ranges, &glass_beam, 1.0, 1.46, 1.0).unwrap();
    let mut worst_power = 0.0f64;
    for p in &sweep.points {
        worst_power = worst_power.max((p.power_sum_te - 1.0).abs());
        worst_power = worst_power.max((p.power_sum_tm - 1.0).abs());
    }
    let lossless_ok = worst_power < LOSSLESS_TOL;

    // (c) harmonic-count convergence of the zeroth-order amplitude.
    let design =
        GratingGeometry::new(230e-9, 70e-9, thickness, table.clone(), 1.0, 1.46, 1.0).unwrap();
    let conv = |pol: Polarization| -> f64 {
        let lo = rcwa_1d(&design, WAVELENGTH, pol, 11).unwrap().t0;
        let hi = rcwa_1d(&design, WAVELENGTH, pol, 41).unwrap().t0;
        (lo - hi).norm()
    };
    let conv_te = conv(Polarization::TE);
    let conv_tm = conv(Polarization::TM);
    let convergence_ok = conv_te < CONVERGENCE_TOL && conv_tm < CONVERGENCE_TOL;

    // (d) the retardance crosses pi between 100 and 250 nm thickness, and
    // the 155 nm operating thickness lies within 15% of that crossing.
    let dphi_minus_pi = |t: f64| -> f64 {
        let g = GratingGeometry::new(230e-9, 70e-9, t, table.clone(), 1.0, 1.46, 1.0).unwrap();
        let te = rcwa_1d(&g, WAVELENGTH, Polarization::TE, 15).unwrap().t0;
        let tm = rcwa_1d(&g, WAVELENGTH, Polarization::TM, 15).unwrap().t0;
        wrap(tm.arg() - te.arg() - PI)
    };
    let mut crossing = f64::NAN;
    let steps = 60usize;
    let mut prev_t = 100e-9;
    let mut prev_v = dphi_minus_pi(prev_t);
    for s in 1..=steps {
        let t = 100e-9 + (250e-9 - 100e-9) * s as f64 / steps as f64;
        let v = dphi_minus_pi(t);
        if v == 0.0 || v.signum() != prev_v.signum() {
            let (mut a, mut b) = (prev_t, t);
            let mut fa = prev_v;
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                let fm = dphi_minus_pi(m);
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            crossing = 0.5 * (a + b);
            break;
        }
        prev_t = t;
        prev_v = v;
    }
    let crossing_ok = crossing.is_finite()
        && (100e-9..=250e-9).contains(&crossing)
        && (155e-9 - crossing).abs() <= 0.15 * crossing;

    let pass = limits_ok && lossless_ok && convergence_ok && crossing_ok;
    report(
        7,
        "grating solver oracles",
        pass,
        &format!(
            "limits {worst_limit:.1e} (tol 1e-8), lossless {worst_power:.1e} (tol 1e-6), N11-N41 TE {conv_te:.1e} / TM {conv_tm:.1e} (tol 1e-3), pi crossing {:.1} nm with 155 nm at {:.1}% (tol 15%)",
            crossing * 1e9,
            (155e-9 - crossing).abs() / crossing * 100.0
        ),
    );
    assert!(
        pass,
        "limits_ok {limits_ok}, lossless_ok {lossless_ok}, convergence_ok {convergence_ok} (TE {conv_te:.2e}, TM {conv_tm:.2e}), crossing_ok {crossing_ok} ({:.2} nm). TM convergence at N=11 is a known honest failure; see the test doc comment.",
        crossing * 1e9
    );
}

// --- 8 -------------------------------------------------------------------

/// 100x100 cells on a 4096^2 grid: design a hologram for a random
/// 500-pixel pattern, simulate, and identify lit cells as the 500 most
/// energetic target cells on the retina lattice.
///
/// Only the iterative full-aperture design is physical at this scale: a
/// single 5 um cell has a retina-plane diffraction spot of order 3 mm
/// (1.22 lambda d_r / w), sixty times the 50 um lattice pitch, so the
/// analytic per-cell mode cannot localize and a control run measures
/// chance-level identification (0.052, where random ranking gives 0.050).
/// The full-aperture design forms every image point with the whole 500 um
/// aperture (spot ~33 um) and resolves the lattice. Reference run of this
/// pipeline identifies 500/500; the criterion floor is 80%.
const SCALE_MIN_CORRECT: f64 = 0.80;
const MAX_MEMORY_GB: f64 = 8.0;

fn peak_rss_gb() -> f64 {
    let status = std::fs::read_to_string("/proc/self/status").unwrap_or_default();
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: f64 = rest.trim().trim_end_matches(" kB").trim().parse().unwrap_or(0.0);
            return kb / 1024.0 / 1024.0;
        }
    }
    0.0
}

#[test]
fn criterion_08_hundred_by_hundred_scale() {
    let pixels = 100usize;
    let grid_n = 4096usize;
    let geom = default_geometry(pixels);

    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let chosen = rand::seq::index::sample(&mut rng, pixels * pixels, 500);
    let mut lit = Array2::from_elem((pixels, pixels), false);
    for idx in chosen.iter() {
        lit[[idx / pixels, idx % pixels]] = true;
    }
    let pattern = DisplayPattern::new(lit.clone(), APERTURE / pixels as f64).unwrap();

    let map = assemble_hologram(
        &geom,
        DesignMode::FullGs,
        APERTURE / grid_n as f64,
        8,
        &GsSettings { iterations: 30, seed: 0 },
        Some(&pattern),
    )
    .unwrap();

    let mask = DisplayPattern::all_on(pixels, APERTURE / pixels as f64).unwrap();
    let opts = EyeSimOptions { coherent: true, ..Default::default() };
    let img = eye_simulate(&map, &mask, &accommodated_eye(), &opts).unwrap();

    let lattice = retina_lattice(&geom, RETINA_DISTANCE);
    let all: Vec<(usize, usize)> =
        (0..pixels).flat_map(|i| (0..pixels).map(move |j| (i, j))).collect();
    let energies = cell_energies(&img, &lattice, &all);
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| energies[b].partial_cmp(&energies[a]).unwrap());
    let correct = order[..500].iter().filter(|&&idx| lit[[all[idx].0, all[idx].1]]).count();
    let rate = correct as f64 / 500.0;
    let mem = peak_rss_gb();

    let pass = rate >= SCALE_MIN_CORRECT && mem < MAX_MEMORY_GB;
    report(
        8,
        "100x100 scale",
        pass,
        &format!(
            "identification {correct}/500 = {rate:.3} (threshold {SCALE_MIN_CORRECT}), peak memory {mem:.2} GB (limit {MAX_MEMORY_GB} GB)"
        ),
    );
    assert!(pass, "rate {rate:.3}, memory {mem:.2} GB");
}

// --- 9 -------------------------------------------------------------------

/// Scalar propagation engine: exact angular-spectrum inverse, Gaussian
/// expansion law, Airy first zero.
#[test]
fn criterion_09_propagation_engine() {
    // Angular-spectrum round trip on a random band-limited field under a
    // compact Gaussian envelope (the reversed leg widens and crops its
    // window, so content must stay inside the original one).
    let n = 256usize;
    let pitch = 2e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut spectrum = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for r in n / 2 - 8..n / 2 + 8 {
        for c in n / 2 - 8..n / 2 + 8 {
            spectrum[[r, c]] =
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    fft2_centered(&mut spectrum, Direction::Inverse, 1.0);
    let sigma = 24e-6;
    for (idx, v) in spectrum.indexed_iter_mut() {
        let x = (idx.1 as f64 - (n / 2) as f64) * pitch;
        let y = (idx.0 as f64 - (n / 2) as f64) * pitch;
        *v *= (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
    }
    let field = ComplexField::new(spectrum, pitch, WAVELENGTH).unwrap();
    let dz = 300e-6;
    let back = angular_spectrum(&angular_spectrum(&field, dz).unwrap(), -dz).unwrap();
    let peak = field.data().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut round_trip = 0.0f64;
    for (a, b) in field.data().iter().zip(back.data().iter()) {
        round_trip = round_trip.max((a - b).norm() / peak);
    }
    let round_trip_ok = round_trip < 1e-9;

    // Gaussian beam: w(z_R) = w0 sqrt(2) via second moments.
    let w0 = 40e-6;
    let n2 = 512usize;
    let pitch2 = 2e-6;
    let gauss = Array2::from_shape_fn((n2, n2), |(r, c)| {
        let x = (c as f64 - (n2 / 2) as f64) * pitch2;
        let y = (r as f64 - (n2 / 2) as f64) * pitch2;
        Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
    });
    let beam = ComplexField::new(gauss, pitch2, WAVELENGTH).unwrap();
    let z_r = PI * w0 * w0 / WAVELENGTH;
    let out = angular_spectrum(&beam, z_r).unwrap();
    let width = |f: &ComplexField| -> f64 {
        let (mut p, mut xx) = (0.0f64, 0.0f64);
        for (idx, v) in f.data().indexed_iter() {
            let x = (idx.1 as f64 - (n2 / 2) as f64) * f.pitch();
            let w = v.norm_sqr();
            p += w;
            xx += w * x * x;
        }
        // Gaussian 1/e^2 intensity radius from the second moment.
        2.0 * (xx / p).sqrt()
    };
    let expansion = width(&out) / width(&beam);
    let gaussian_ok = (expansion - std::f64::consts::SQRT_2).abs() < 0.01 * std::f64::consts::SQRT_2;

    // Airy pattern: first dark ring of a circular aperture at the radius
    // 1.22 lambda z / D, within one output pixel.
    let n3 = 512usize;
    let pitch3 = 2e-6;
    let radius = 100e-6;
    let disk = Array2::from_shape_fn((n3, n3), |(r, c)| {
        let x = (c as f64 - (n3 / 2) as f64) * pitch3;
        let y = (r as f64 - (n3 / 2) as f64) * pitch3;
        if x.hypot(y) <= radius {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let aperture = ComplexField::new(disk, pitch3, WAVELENGTH).unwrap();
    let dz3 = 0.05;
    let far = fresnel_single(&aperture, dz3).unwrap();
    let row = far.data().row(n3 / 2);
    let mut first_min = None;
    for c in n3 / 2 + 1..n3 - 1 {
        let (a, b, d) =
            (row[c - 1].norm_sqr(), row[c].norm_sqr(), row[c + 1].norm_sqr());
        if b <= a && b < d {
            first_min = Some((c - n3 / 2) as f64 * far.pitch());
            break;
        }
    }
    let airy_expect = 1.22 * WAVELENGTH * dz3 / (2.0 * radius);
    let airy_err = (first_min.unwrap_or(f64::NAN) - airy_expect).abs();
    let airy_ok = airy_err <= far.pitch();

    let pass = round_trip_ok && gaussian_ok && airy_ok;
    report(
        9,
        "propagation engine",
        pass,
        &format!(
            "round trip {round_trip:.1e} (tol 1e-9), Gaussian expansion {expansion:.4} vs sqrt(2) (tol 1%), Airy first zero error {:.2} um (limit {:.2} um)",
            airy_err * 1e6,
            far.pitch() * 1e6
        ),
    );
    assert!(pass, "round {round_trip:.2e}, expansion {expansion:.4}, airy err {airy_err:.2e}");
}

// --- 10 ------------------------------------------------------------------

/// Byte-identical outputs across repeated CLI runs with the same config
/// and seed, over all four pipelines.
#[test]
fn criterion_10_cli_determinism() {
    let exe = env!("CARGO_BIN_EXE_pbholo");
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let config = root.join("run.cfg");
    std::fs::write(
        &config,
        format!(
            "grid_n = 512\nmode = full_gs\nseed = 7\nlevels = 8\n\
             thickness_min_m = 1.4e-7\nthickness_max_m = 1.7e-7\nthickness_steps = 4\n\
             harmonics = 9\nunit_cell_m = 5e-6\nsvg_decimate = 1\nnk_file = {}\n",
            data_file("polysilicon_nk.txt").display()
        ),
    )
    .unwrap();
    let pattern = root.join("f.txt");
    std::fs::copy(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../patterns/f.txt"),
        &pattern,
    )
    .unwrap();

    let run_all = |out_root: &Path| {
        let run = |args: &[&str]| {
            let status = std::process::Command::new(exe)
                .args(args)
                .current_dir(root)
                .stdout(std::process::Stdio::null())
                .status()
                .unwrap();
            assert!(status.success(), "pbholo {args:?} failed");
        };
        let cfg = config.to_str().unwrap().to_string();
        let design_out = out_root.join("design");
        run(&[
            "design",
            pattern.to_str().unwrap(),
            "--config",
            &cfg,
            "--out",
            design_out.to_str().unwrap(),
        ]);
        let phase = design_out.join("phase.pgm");
        run(&[
            "simulate",
            phase.to_str().unwrap(),
            pattern.to_str().unwrap(),
            "--config",
            &cfg,
            "--out",
            out_root.join("sim").to_str().unwrap(),
        ]);
        run(&["grating", "--config", &cfg, "--out", out_root.join("grating").to_str().unwrap()]);
        run(&[
            "layout",
            phase.to_str().unwrap(),
            "--config",
            &cfg,
            "--out",
            out_root.join("layout").to_str().unwrap(),
        ]);
    };

    let out1 = root.join("run1");
    let out2 = root.join("run2");
    run_all(&out1);
    run_all(&out2);

    fn collect(dir: &Path, base: &Path, files: &mut Vec<PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                collect(&p, base, files);
            } else {
                files.push(p.strip_prefix(base).unwrap().to_path_buf());
            }
        }
    }
    let mut files1 = Vec::new();
    collect(&out1, &out1, &mut files1);
    files1.sort();
    let mut files2 = Vec::new();
    collect(&out2, &out2, &mut files2);
    files2.sort();
    assert_eq!(files1, files2, "run output file sets differ");
    assert!(files1.len() >= 10, "expected full artifact set, got {files1:?}");

    let mut diff = None;
    for rel in &files1 {
        let a = std::fs::read(out1.join(rel)).unwrap();
        let b = std::fs::read(out2.join(rel)).unwrap();
        if a != b {
            diff = Some(rel.clone());
            break;
        }
    }
    let pass = diff.is_none();
    report(
        10,
        "CLI determinism",
        pass,
        &format!(
            "{} files byte-identical across reruns (design, simulate, grating, layout)",
            files1.len()
        ),
    );
    assert!(pass, "first differing file: {diff:?}");
}
