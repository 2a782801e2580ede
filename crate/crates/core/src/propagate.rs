//! Scalar diffraction between parallel planes, plus the thin-lens phase.
//!
//! Two propagators with different sampling behavior:
//!
//! * [`angular_spectrum`]: grid-preserving transfer-function method. Exact
//!   for band-limited fields; evanescent components are dropped and the
//!   transfer function is band-limited following Matsushima & Shimobaba
//!   (Opt. Express 17, 2009) to suppress wrap-around aliasing. Backward
//!   steps (dz < 0) zero-pad 2x before transforming. Steps whose usable
//!   band would fall below 5% of Nyquist are rejected rather than silently
//!   aliased.
//! * [`fresnel_single`]: single-transform Fresnel method for long forward
//!   throws. Rescales the grid to output pitch lambda*dz/(n*pitch) and
//!   conserves power exactly in the discrete sense.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft2_centered, Direction};
use crate::field::ComplexField;

/// Fraction of Nyquist below which an angular-spectrum step is refused.
pub const MIN_BAND_FRACTION: f64 = 0.05;

/// exp(i * coeff * x^2) sampled at x = (idx - n/2) * pitch.
pub(crate) fn quadratic_phase_1d(n: usize, pitch: f64, coeff: f64) -> Vec<Complex64> {
    (0..n)
        .map(|idx| {
            let x = (idx as f64 - (n / 2) as f64) * pitch;
            Complex64::from_polar(1.0, coeff * x * x)
        })
        .collect()
}

/// Multiply a field by the separable phase chirp(y) * chirp(x).
pub(crate) fn apply_separable(data: &mut Array2<Complex64>, row_factor: &[Complex64], col_factor: &[Complex64]) {
    for (r, mut row) in data.rows_mut().into_iter().enumerate() {
        let fr = row_factor[r];
        for (c, v) in row.iter_mut().enumerate() {
            *v *= fr * col_factor[c];
        }
    }
}

fn embed_centered(src: &Array2<Complex64>, side: usize) -> Array2<Complex64> {
    let n = src.dim().0;
    let off = (side - n) / 2;
    let mut out = Array2::zeros((side, side));
    out.slice_mut(ndarray::s![off..off + n, off..off + n]).assign(src);
    out
}

fn crop_centered(src: &Array2<Complex64>, side: usize) -> Array2<Complex64> {
    let big = src.dim().0;
    let off = (big - side) / 2;
    src.slice(ndarray::s![off..off + side, off..off + side]).to_owned()
}

/// Band-limited angular-spectrum propagation over a signed distance `dz`.
/// The output grid equals the input grid. `dz == 0` returns the field
/// unchanged.
pub fn angular_spectrum(field: &ComplexField, dz: f64) -> Result<ComplexField> {
    if !dz.is_finite() {
        return Err(Error::Numerical(format!("propagation distance {dz:e} is not finite")));
    }
    if dz == 0.0 {
        return Ok(field.clone());
    }
    let n = field.side();
    let pitch = field.pitch();
    let lambda = field.wavelength();
    // Backward legs widen the window so the reversed diffraction cone stays
    // inside the grid instead of wrapping.
    let side = if dz < 0.0 { 2 * n } else { n };

    let du = 1.0 / (side as f64 * pitch);
    let u_limit = 1.0 / (lambda * (2.0 * du * dz).hypot(1.0));
    let u_nyquist = 1.0 / (2.0 * pitch);
    if u_limit < MIN_BAND_FRACTION * u_nyquist {
        let denom = (2.0 * pitch / (MIN_BAND_FRACTION * lambda)).powi(2) - 1.0;
        let required_n = if denom > 0.0 {
            (2.0 * dz.abs() / (pitch * denom.sqrt())).ceil() as usize
        } else {
            usize::MAX
        };
        return Err(Error::AliasUnsafe {
            dz_mm: dz * 1e3,
            limit_frac: u_limit / u_nyquist,
            required_n,
        });
    }

    let mut work = if side == n { field.data().clone() } else { embed_centered(field.data(), side) };
    fft2_centered(&mut work, Direction::Forward, 1.0);

    let inv_lambda_sq = 1.0 / (lambda * lambda);
    let freq = |idx: usize| (idx as f64 - (side / 2) as f64) * du;
    for (r, mut row) in work.rows_mut().into_iter().enumerate() {
        let uy = freq(r);
        if uy.abs() > u_limit {
            row.fill(Complex64::new(0.0, 0.0));
            continue;
        }
        for (c, v) in row.iter_mut().enumerate() {
            let ux = freq(c);
            if ux.abs() > u_limit {
                *v = Complex64::new(0.0, 0.0);
                continue;
            }
            let w_sq = inv_lambda_sq - ux * ux - uy * uy;
            if w_sq <= 0.0 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * dz * w_sq.sqrt());
            }
        }
    }

    let ntot = (side * side) as f64;
    fft2_centered(&mut work, Direction::Inverse, 1.0 / ntot);
    let out = if side == n { work } else { crop_centered(&work, n) };
    field.with_data(out, pitch)
}

/// Single-transform Fresnel propagation over `dz > 0`. Output pitch is
/// lambda * dz / (n * pitch); power is conserved exactly.
pub fn fresnel_single(field: &ComplexField, dz: f64) -> Result<ComplexField> {
    if !(dz > 0.0 && dz.is_finite()) {
        return Err(Error::NonForwardFresnel(dz));
    }
    let n = field.side();
    let pitch_in = field.pitch();
    let lambda = field.wavelength();
    let k = 2.0 * std::f64::consts::PI / lambda;
    let pitch_out = lambda * dz / (n as f64 * pitch_in);

    let mut work = field.data().clone();
    let chirp_in = quadratic_phase_1d(n, pitch_in, k / (2.0 * dz));
    apply_separable(&mut work, &chirp_in, &chirp_in);
    fft2_centered(&mut work, Direction::Forward, 1.0);

    // Prefactor pitch^2 / (i lambda dz) * e^{i k dz} and the output-plane
    // chirp; |prefactor| * pitch_out * n = pitch_in makes Parseval exact.
    // The prefactor rides on the row factor so it is applied exactly once.
    let pref = Complex64::new(0.0, -1.0) * (pitch_in * pitch_in / (lambda * dz))
        * Complex64::from_polar(1.0, k * dz);
    let chirp_out_cols = quadratic_phase_1d(n, pitch_out, k / (2.0 * dz));
    let mut chirp_out_rows = chirp_out_cols.clone();
    for v in chirp_out_rows.iter_mut() {
        *v *= pref;
    }
    apply_separable(&mut work, &chirp_out_rows, &chirp_out_cols);

    field.with_data(work, pitch_out)
}

/// Inverse of [`fresnel_single`] over a forward distance `dz > 0`: recovers
/// the plane a converging field came from. Implemented by conjugation,
/// which maps backward propagation onto a forward solve.
pub fn fresnel_single_backward(field: &ComplexField, dz: f64) -> Result<ComplexField> {
    if !(dz > 0.0 && dz.is_finite()) {
        return Err(Error::NonForwardFresnel(dz));
    }
    let conj = field.with_data(field.data().mapv(|c| c.conj()), field.pitch())?;
    let prop = fresnel_single(&conj, dz)?;
    let data = prop.data().mapv(|c| c.conj());
    prop.with_data(data, prop.pitch())
}

/// Ideal thin lens of focal length `f`: multiplies by e^{-i k r^2 / (2 f)}.
/// Negative f is a diverging lens; only f = 0 is meaningless.
pub fn thin_lens(field: &ComplexField, f: f64) -> Result<ComplexField> {
    if f == 0.0 || !f.is_finite() {
        return Err(Error::InvalidGeometry {
            context: "thin lens",
            message: format!("focal length must be nonzero and finite, got {f:e}"),
        });
    }
    let n = field.side();
    let k = 2.0 * std::f64::consts::PI / field.wavelength();
    let mut data = field.data().clone();
    let chirp = quadratic_phase_1d(n, field.pitch(), -k / (2.0 * f));
    apply_separable(&mut data, &chirp, &chirp);
    field.with_data(data, field.pitch())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_field(n: usize, pitch: f64, lambda: f64, waist: f64) -> ComplexField {
        let data = Array2::from_shape_fn((n, n), |(r, c)| {
            let x = (c as f64 - (n / 2) as f64) * pitch;
            let y = (r as f64 - (n / 2) as f64) * pitch;
            Complex64::new((-(x * x + y * y) / (waist * waist)).exp(), 0.0)
        });
        ComplexField::new(data, pitch, lambda).unwrap()
    }

    #[test]
    fn zero_distance_is_identity() {
        let f = gaussian_field(64, 1e-6, 543e-9, 10e-6);
        let g = angular_spectrum(&f, 0.0).unwrap();
        assert_eq!(f.data(), g.data());
    }

    #[test]
    fn angular_spectrum_round_trip() {
        let f = gaussian_field(256, 1e-6, 543e-9, 20e-6);
        let fwd = angular_spectrum(&f, 200e-6).unwrap();
        let back = angular_spectrum(&fwd, -200e-6).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in back.data().iter().zip(f.data().iter()) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-9, "round-trip error {}", (num / den).sqrt());
    }

    #[test]
    fn angular_spectrum_conserves_power_within_band() {
        let f = gaussian_field(256, 1e-6, 543e-9, 20e-6);
        let g = angular_spectrum(&f, 150e-6).unwrap();
        assert_abs_diff_eq!(g.power(), f.power(), epsilon = 1e-9 * f.power());
    }

    #[test]
    fn gaussian_spreads_by_sqrt2_at_rayleigh_range() {
        // w0 = 20 um, lambda = 543 nm => z_R = pi w0^2 / lambda = 2.3142 mm.
        let w0 = 20e-6;
        let lambda = 543e-9;
        let z_r = std::f64::consts::PI * w0 * w0 / lambda;
        let f = gaussian_field(512, 1e-6, lambda, w0);
        let g = angular_spectrum(&f, z_r).unwrap();
        // Second-moment width: for I ~ exp(-2 r^2 / w^2), w = 2 sqrt(<x^2>).
        let n = g.side();
        let mut m0 = 0.0;
        let mut m2 = 0.0;
        for (r, row) in g.data().rows().into_iter().enumerate() {
            let y = (r as f64 - (n / 2) as f64) * g.pitch();
            for (c, v) in row.iter().enumerate() {
                let x = (c as f64 - (n / 2) as f64) * g.pitch();
                let i = v.norm_sqr();
                m0 += i;
                m2 += i * (x * x + y * y);
            }
        }
        // <x^2> is half the radial second moment by symmetry.
        let w_meas = 2.0 * (m2 / m0 / 2.0).sqrt();
        let w_want = w0 * 2.0_f64.sqrt();
        assert!(
            (w_meas / w_want - 1.0).abs() < 0.01,
            "w = {w_meas:e}, want {w_want:e}"
        );
    }

    #[test]
    fn refuses_alias_unsafe_step() {
        let f = gaussian_field(64, 0.5e-6, 543e-9, 5e-6);
        let err = angular_spectrum(&f, 0.5).unwrap_err();
        match err {
            Error::AliasUnsafe { required_n, .. } => assert!(required_n > 64),
            other => panic!("expected AliasUnsafe, got {other:?}"),
        }
    }

    #[test]
    fn fresnel_rejects_non_forward() {
        let f = gaussian_field(64, 1e-6, 543e-9, 10e-6);
        assert!(matches!(fresnel_single(&f, 0.0), Err(Error::NonForwardFresnel(_))));
        assert!(matches!(fresnel_single(&f, -0.1), Err(Error::NonForwardFresnel(_))));
    }

    #[test]
    fn fresnel_conserves_power_exactly() {
        let f = gaussian_field(128, 1e-6, 543e-9, 15e-6);
        let g = fresnel_single(&f, 0.05).unwrap();
        assert_abs_diff_eq!(g.power(), f.power(), epsilon = 1e-12 * f.power());
        let want = 543e-9 * 0.05 / (128.0 * 1e-6);
        assert_abs_diff_eq!(g.pitch(), want, epsilon = 1e-18);
    }

    #[test]
    fn fresnel_output_pitch_and_focus() {
        // Plane wave through a lens, propagated to the focal plane, focuses
        // to the center sample.
        let n = 256;
        let pitch = 2e-6;
        let lambda = 543e-9;
        let data = Array2::from_elem((n, n), Complex64::new(1.0, 0.0));
        let f = ComplexField::new(data, pitch, lambda).unwrap();
        let focal = 0.05;
        let lensed = thin_lens(&f, focal).unwrap();
        let focus = fresnel_single(&lensed, focal).unwrap();
        let mut best = (0, 0);
        let mut best_val = -1.0;
        for (r, row) in focus.data().rows().into_iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if v.norm_sqr() > best_val {
                    best_val = v.norm_sqr();
                    best = (r, c);
                }
            }
        }
        assert_eq!(best, (n / 2, n / 2));
    }

    #[test]
    fn backward_fresnel_inverts_forward() {
        let f = gaussian_field(128, 1e-6, 543e-9, 12e-6);
        let fwd = fresnel_single(&f, 0.02).unwrap();
        let back = fresnel_single_backward(&fwd, 0.02).unwrap();
        assert_abs_diff_eq!(back.pitch(), f.pitch(), epsilon = 1e-15);
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in back.data().iter().zip(f.data().iter()) {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-10);
    }
}
