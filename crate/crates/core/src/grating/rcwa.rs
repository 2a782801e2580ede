//! Rigorous coupled-wave analysis of the 1D lamellar grating at normal
//! incidence, after Moharam & Gaylord, with Li's inverse-rule factorization
//! for TM. Fields carry the e^{+iqz} spatial convention, so absorbing media
//! have a positive imaginary index; the dispersion table stores n - ik and
//! is conjugated on ingestion.
//!
//! The stack is cover | grating layer | substrate, joined by scattering
//! matrices and composed with the Redheffer star product, which stays
//! stable for thick or lossy layers where transfer matrices overflow.

use ndarray::Array2;
use num_complex::Complex64;

use super::{DiffractionResult, GratingGeometry};
use crate::error::{Error, Result};
use crate::linalg::{eig, identity, inv, solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Electric field along the beams.
    TE,
    /// Magnetic field along the beams.
    TM,
}

impl Polarization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::TE),
            "TM" => Ok(Polarization::TM),
            other => Err(Error::Config(format!("unknown polarization {other:?}"))),
        }
    }
}

/// Principal square root folded onto Im >= 0 so e^{+iqz} decays for
/// evanescent and absorbed modes.
fn sqrt_up(z: Complex64) -> Complex64 {
    let q = z.sqrt();
    if q.im < 0.0 || (q.im.abs() < 1e-14 && q.re < 0.0) {
        -q
    } else {
        q
    }
}

/// Toeplitz matrix of the permittivity profile's Fourier coefficients:
/// value `inside` over a fraction `fill` of the period, `outside` elsewhere.
/// The coefficients are even in the harmonic index because the profile is
/// taken symmetric about the beam center (the phase origin is free).
fn toeplitz_profile(inside: Complex64, outside: Complex64, fill: f64, size: usize) -> Array2<Complex64> {
    let mut coeff = vec![Complex64::new(0.0, 0.0); size];
    coeff[0] = outside + (inside - outside) * fill;
    for (m, cm) in coeff.iter_mut().enumerate().skip(1) {
        let arg = std::f64::consts::PI * m as f64 * fill;
        *cm = (inside - outside) * arg.sin() / (std::f64::consts::PI * m as f64);
    }
    Array2::from_shape_fn((size, size), |(r, c)| coeff[r.abs_diff(c)])
}

type SMatrix = (
    Array2<Complex64>,
    Array2<Complex64>,
    Array2<Complex64>,
    Array2<Complex64>,
);

/// Scattering matrix of the interface between mode bases (W1, V1) and
/// (W2, V2), for waves incident from side 1.
fn interface(
    w1: &Array2<Complex64>,
    v1: &Array2<Complex64>,
    w2: &Array2<Complex64>,
    v2: &Array2<Complex64>,
) -> Result<SMatrix> {
    let n = w1.dim().0;
    let eye = identity(n);
    let x = solve(w1, w2)?;
    let yp = solve(v2, v1)?;
    let m1 = &eye + &yp.dot(&x);
    let s21 = solve(&m1, &(&yp * Complex64::new(2.0, 0.0)))?;
    let s22 = solve(&m1, &(&eye - &yp.dot(&x)))?;
    let s11 = &x.dot(&s21) - &eye;
    let s12 = x.dot(&(&s22 + &eye));
    Ok((s11, s12, s21, s22))
}

/// Redheffer star product: compose scattering matrices of cascaded blocks.
fn star(a: &SMatrix, b: &SMatrix) -> Result<SMatrix> {
    let n = a.0.dim().0;
    let eye = identity(n);
    let inv1 = inv(&(&eye - &b.0.dot(&a.3)))?;
    let inv2 = inv(&(&eye - &a.3.dot(&b.0)))?;
    let s11 = &a.0 + &a.1.dot(&inv1).dot(&b.0).dot(&a.2);
    let s12 = a.1.dot(&inv1).dot(&b.1);
    let s21 = b.2.dot(&inv2).dot(&a.2);
    let s22 = &b.3 + &b.2.dot(&inv2).dot(&a.3).dot(&b.1);
    Ok((s11, s12, s21, s22))
}

fn diag(values: &[Complex64]) -> Array2<Complex64> {
    let n = values.len();
    Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c {
            values[r]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Zeroth-order transmission and full order-resolved efficiencies of the
/// grating at `wavelength`, keeping `n_harmonics` Fourier orders per side.
pub fn rcwa_1d(
    geom: &GratingGeometry,
    wavelength: f64,
    pol: Polarization,
    n_harmonics: usize,
) -> Result<DiffractionResult> {
    if n_harmonics < 5 {
        return Err(Error::InvalidGeometry {
            context: "rcwa",
            message: format!("need at least 5 harmonics per side, got {n_harmonics}"),
        });
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidGeometry {
            context: "rcwa",
            message: format!("wavelength must be positive, got {wavelength:e}"),
        });
    }
    let nn = n_harmonics;
    let size = 2 * nn + 1;

    // Positive-imaginary index for the absorbing convention used here.
    let n_beam = geom.beam.interpolate(wavelength)?.conj();
    let eps_beam = n_beam * n_beam;
    let eps_gap = Complex64::new(geom.n_surround * geom.n_surround, 0.0);
    let fill = geom.fill_factor();
    let nc = geom.n_cover;
    let ns = geom.n_substrate;

    // Normalized transverse wavenumbers kx_m / k0 at normal incidence.
    let kt: Vec<f64> = (0..size)
        .map(|i| (i as i64 - nn as i64) as f64 * wavelength / geom.period)
        .collect();
    let qc: Vec<Complex64> = kt
        .iter()
        .map(|&t| sqrt_up(Complex64::new(nc * nc - t * t, 0.0)))
        .collect();
    let qs: Vec<Complex64> = kt
        .iter()
        .map(|&t| sqrt_up(Complex64::new(ns * ns - t * t, 0.0)))
        .collect();

    let e_mat = toeplitz_profile(eps_beam, eps_gap, fill, size);
    let eye = identity(size);

    // Layer eigenmodes: M w = mu w with the mode constant q = sqrt(-mu).
    let (q_modes, w_modes, v_modes) = match pol {
        Polarization::TE => {
            let mut m = -&e_mat;
            for (i, &t) in kt.iter().enumerate() {
                m[[i, i]] += Complex64::new(t * t, 0.0);
            }
            let (mu, w) = eig(&m)?;
            let q: Vec<Complex64> = mu.iter().map(|&l| sqrt_up(-l)).collect();
            let v = w.dot(&diag(&q));
            (q, w, v)
        }
        Polarization::TM => {
            let a_mat = toeplitz_profile(
                Complex64::new(1.0, 0.0) / eps_beam,
                Complex64::new(1.0, 0.0) / eps_gap,
                fill,
                size,
            );
            let kdiag = diag(&kt.iter().map(|&t| Complex64::new(t, 0.0)).collect::<Vec<_>>());
            let inner = &kdiag.dot(&solve(&e_mat, &kdiag)?) - &eye;
            let m = solve(&a_mat, &inner)?;
            let (mu, w) = eig(&m)?;
            let q: Vec<Complex64> = mu.iter().map(|&l| sqrt_up(-l)).collect();
            let v = a_mat.dot(&w).dot(&diag(&q));
            (q, w, v)
        }
    };

    // Uniform cover/substrate mode bases.
    let (vc, vs) = match pol {
        Polarization::TE => (diag(&qc), diag(&qs)),
        Polarization::TM => (
            diag(&qc.iter().map(|&q| q / (nc * nc)).collect::<Vec<_>>()),
            diag(&qs.iter().map(|&q| q / (ns * ns)).collect::<Vec<_>>()),
        ),
    };

    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    let phases: Vec<Complex64> = q_modes
        .iter()
        .map(|&q| (Complex64::new(0.0, 1.0) * q * k0 * geom.thickness).exp())
        .collect();
    let phi = diag(&phases);
    let zeros = Array2::from_elem((size, size), Complex64::new(0.0, 0.0));
    let s_layer = (zeros.clone(), phi.clone(), phi, zeros);

    let s_in = interface(&eye, &vc, &w_modes, &v_modes)?;
    let s_out = interface(&w_modes, &v_modes, &eye, &vs)?;
    let s = star(&star(&s_in, &s_layer)?, &s_out)?;

    // Unit-amplitude zeroth-order incidence from the cover.
    let tau: Vec<Complex64> = (0..size).map(|r| s.2[[r, nn]]).collect();
    let rho: Vec<Complex64> = (0..size).map(|r| s.0[[r, nn]]).collect();

    let qc0 = qc[nn].re;
    let mut transmitted = Vec::new();
    let mut reflected = Vec::new();
    for m in 0..size {
        let (wt, wr) = match pol {
            Polarization::TE => (qs[m].re / qc0, qc[m].re / qc0),
            Polarization::TM => (
                (qs[m] / (ns * ns)).re / (qc0 / (nc * nc)),
                (qc[m] / (nc * nc)).re / (qc0 / (nc * nc)),
            ),
        };
        if wt > 1e-12 {
            transmitted.push(wt * tau[m].norm_sqr());
        }
        if wr > 1e-12 {
            reflected.push(wr * rho[m].norm_sqr());
        }
    }

    // TM mode amplitudes are magnetic-field referenced; rescale the zeroth
    // order to an electric-field transmission coefficient.
    let t0 = match pol {
        Polarization::TE => tau[nn],
        Polarization::TM => tau[nn] * (nc / ns),
    };

    Ok(DiffractionResult {
        t0,
        transmitted,
        reflected,
        harmonics: n_harmonics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::DispersionTable;
    use crate::grating::slab::tmm_slab;
    use std::path::Path;

    const LAMBDA: f64 = 543e-9;

    fn beam_table() -> DispersionTable {
        DispersionTable::parse("400 4.111 0.034\n700 4.111 0.034", Path::new("test")).unwrap()
    }

    fn geom(width: f64, thickness: f64) -> GratingGeometry {
        GratingGeometry::new(230e-9, width, thickness, beam_table(), 1.0, 1.46, 1.0).unwrap()
    }

    #[test]
    fn full_fill_matches_homogeneous_slab() {
        let g = geom(230e-9, 155e-9);
        let n_slab = Complex64::new(4.111, 0.034);
        let want = tmm_slab(n_slab, 155e-9, LAMBDA, 1.0, 1.46);
        for pol in [Polarization::TE, Polarization::TM] {
            let got = rcwa_1d(&g, LAMBDA, pol, 15).unwrap().t0;
            assert!((got - want).norm() < 1e-10, "{pol:?}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_fill_matches_bare_surround_slab() {
        let g = geom(0.0, 155e-9);
        let want = tmm_slab(Complex64::new(1.0, 0.0), 155e-9, LAMBDA, 1.0, 1.46);
        for pol in [Polarization::TE, Polarization::TM] {
            let got = rcwa_1d(&g, LAMBDA, pol, 15).unwrap().t0;
            assert!((got - want).norm() < 1e-10, "{pol:?}: {got} vs {want}");
        }
    }

    #[test]
    fn lossless_grating_conserves_power() {
        let lossless = DispersionTable::parse("400 4.111 0\n700 4.111 0", Path::new("test")).unwrap();
        let g = GratingGeometry::new(230e-9, 70e-9, 155e-9, lossless, 1.0, 1.46, 1.0).unwrap();
        for pol in [Polarization::TE, Polarization::TM] {
            let r = rcwa_1d(&g, LAMBDA, pol, 15).unwrap();
            assert!((r.power_sum() - 1.0).abs() < 1e-9, "{pol:?}: {}", r.power_sum());
        }
    }

    #[test]
    fn operating_point_matches_frozen_reference() {
        // Independent-implementation values for the 230/70/155 nm beam at
        // 543 nm with index 4.111 + 0.034i, N = 15. The reference run was
        // verified holomorphic in the permittivity (Cauchy-Riemann test),
        // which pins the complex-symmetric convolution matrix.
        let g = geom(70e-9, 155e-9);
        let te = rcwa_1d(&g, LAMBDA, Polarization::TE, 15).unwrap();
        let tm = rcwa_1d(&g, LAMBDA, Polarization::TM, 15).unwrap();
        let want_te = Complex64::new(0.596019032217920, -0.191461956396541);
        let want_tm = Complex64::new(-0.584391497023374, 0.009451914108474);
        assert!((te.t0 - want_te).norm() < 1e-9, "TE {}", te.t0);
        assert!((tm.t0 - want_tm).norm() < 1e-9, "TM {}", tm.t0);
        assert!((te.power_sum() - 0.898703582962699).abs() < 1e-9);
        assert!((tm.power_sum() - 0.890448137092167).abs() < 1e-9);
        // Subwavelength: exactly one propagating transmitted order.
        assert!(g.is_subwavelength(LAMBDA));
        assert_eq!(te.transmitted.len(), 1);
        assert!((te.transmitted[0] - 0.572168696569239).abs() < 1e-9);
    }

    #[test]
    fn differential_phase_near_half_wave() {
        let g = geom(70e-9, 155e-9);
        let te = rcwa_1d(&g, LAMBDA, Polarization::TE, 15).unwrap().t0;
        let tm = rcwa_1d(&g, LAMBDA, Polarization::TM, 15).unwrap().t0;
        let dphi = crate::field::wrap_phase(tm.arg() - te.arg()).unwrap();
        assert!((dphi - (-2.846943)).abs() < 1e-3, "dphi = {dphi}");
        // Magnitudes stay within ~10% of each other at this point.
        assert!((te.norm() - 0.626016).abs() < 1e-3);
        assert!((tm.norm() - 0.584468).abs() < 1e-3);
    }

    #[test]
    fn random_slab_limits_match_airy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = rng.random_range(50e-9..300e-9);
            let lam = rng.random_range(450e-9..650e-9);
            for (width, n_slab) in [(230e-9, Complex64::new(4.111, 0.034)), (0.0, Complex64::new(1.0, 0.0))] {
                let g = geom(width, t);
                let want = tmm_slab(n_slab, t, lam, 1.0, 1.46);
                for pol in [Polarization::TE, Polarization::TM] {
                    let got = rcwa_1d(&g, lam, pol, 9).unwrap().t0;
                    assert!(
                        (got - want).norm() < 1e-8,
                        "t={t:e} lam={lam:e} {pol:?}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn lossless_transmittance_is_reciprocal() {
        // Reversing the probe direction (swap cover and substrate) leaves
        // the total transmitted power unchanged for a lossless structure.
        let lossless = DispersionTable::parse("400 4.111 0\n700 4.111 0", Path::new("test")).unwrap();
        let fwd = GratingGeometry::new(230e-9, 70e-9, 155e-9, lossless.clone(), 1.0, 1.46, 1.0)
            .unwrap();
        let rev =
            GratingGeometry::new(230e-9, 70e-9, 155e-9, lossless, 1.0, 1.0, 1.46).unwrap();
        for pol in [Polarization::TE, Polarization::TM] {
            let a = rcwa_1d(&fwd, LAMBDA, pol, 15).unwrap();
            let b = rcwa_1d(&rev, LAMBDA, pol, 15).unwrap();
            assert!(
                (a.total_transmitted() - b.total_transmitted()).abs() < 1e-9,
                "{pol:?}: {} vs {}",
                a.total_transmitted(),
                b.total_transmitted()
            );
        }
    }

    #[test]
    fn deep_subwavelength_agrees_with_effective_medium() {
        // Period / wavelength < 0.1: the grating behaves as a homogeneous
        // birefringent film with the zeroth-order EMT indices.
        use crate::grating::slab::emt_indices;
        let lossless = DispersionTable::parse("400 2.0 0\n700 2.0 0", Path::new("test")).unwrap();
        let g = GratingGeometry::new(50e-9, 25e-9, 155e-9, lossless, 1.0, 1.46, 1.0).unwrap();
        let te = rcwa_1d(&g, LAMBDA, Polarization::TE, 15).unwrap().t0;
        let tm = rcwa_1d(&g, LAMBDA, Polarization::TM, 15).unwrap().t0;
        let dphi_rcwa = crate::field::wrap_phase(tm.arg() - te.arg()).unwrap();
        let (n_te, n_tm) = emt_indices(0.5, Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0));
        let t_te_film = tmm_slab(n_te, 155e-9, LAMBDA, 1.0, 1.46);
        let t_tm_film = tmm_slab(n_tm, 155e-9, LAMBDA, 1.0, 1.46);
        let dphi_emt = crate::field::wrap_phase(t_tm_film.arg() - t_te_film.arg()).unwrap();
        assert!(
            (dphi_rcwa - dphi_emt).abs() <= 0.05 * dphi_emt.abs(),
            "rcwa {dphi_rcwa} vs emt {dphi_emt}"
        );
    }

    #[test]
    fn harmonic_count_floor_enforced() {
        let g = geom(70e-9, 155e-9);
        assert!(rcwa_1d(&g, LAMBDA, Polarization::TE, 4).is_err());
        assert!(rcwa_1d(&g, LAMBDA, Polarization::TE, 5).is_ok());
    }

    #[test]
    fn wavelength_outside_table_rejected() {
        let g = geom(70e-9, 155e-9);
        assert!(rcwa_1d(&g, 900e-9, Polarization::TE, 15).is_err());
    }
}
