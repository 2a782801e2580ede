//! Gerchberg-Saxton phase retrieval between the aperture and its far field.
//!
//! The propagator pair is the unitary centered Fourier pair with the
//! e^{+i 2 pi u x} forward kernel, so a far-field delta at frequency offset
//! +u0 corresponds to an aperture ramp e^{-i 2 pi u0 x}. One iteration:
//! impose unit source amplitude (keep phase), propagate forward, record the
//! image-plane error, replace the magnitude by the target (keep phase),
//! propagate backward. The recorded error sequence ||(|F|) - T|| / ||T|| is
//! non-increasing (alternating projections).

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft::{fft2_centered, Direction};
use crate::field::PhaseMap;

/// Plane-to-plane transform linking the aperture to the target plane.
/// Only the far-field (Fraunhofer) pair is meaningful for this display:
/// the conjugate plane sits in the aperture's far field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsPropagator {
    Fraunhofer,
}

#[derive(Debug, Clone)]
pub struct GsResult {
    /// Retrieved aperture phase.
    pub phase: PhaseMap,
    /// Image-domain relative error after each forward propagation.
    pub errors: Vec<f64>,
}

/// Retrieve the aperture phase whose far-field magnitude best matches
/// `target` (nonnegative amplitudes on the centered frequency grid).
/// `pitch` and `wavelength` only annotate the returned map.
pub fn gs_retrieve(
    target: &Array2<f64>,
    n_iter: usize,
    propagator: GsPropagator,
    seed: u64,
    pitch: f64,
    wavelength: f64,
) -> Result<GsResult> {
    let GsPropagator::Fraunhofer = propagator;
    let (rows, cols) = target.dim();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::BadFieldShape { rows, cols });
    }
    if n_iter == 0 {
        return Err(Error::InvalidGeometry {
            context: "gs_retrieve",
            message: "need at least one iteration".into(),
        });
    }
    let n = rows;
    let mut target_norm_sq = 0.0;
    for &t in target.iter() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Numerical(format!("target amplitude {t:e} invalid")));
        }
        target_norm_sq += t * t;
    }
    if target_norm_sq == 0.0 {
        return Err(Error::EmptyTarget);
    }
    // Match total power to the unit-amplitude source so the magnitude
    // replacement is a pure projection, not a rescale.
    let gain = n as f64 / target_norm_sq.sqrt();
    let target = target.mapv(|t| t * gain);
    let target_norm = n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = Array2::from_shape_fn((n, n), |_| {
        Complex64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
    });

    let unitary = 1.0 / n as f64;
    let mut errors = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        fft2_centered(&mut field, Direction::Inverse, unitary);
        let mut err_sq = 0.0;
        for (f, &t) in field.iter().zip(target.iter()) {
            let d = f.norm() - t;
            err_sq += d * d;
        }
        errors.push(err_sq.sqrt() / target_norm);
        for (f, &t) in field.iter_mut().zip(target.iter()) {
            let m = f.norm();
            *f = if m > 0.0 { *f * (t / m) } else { Complex64::new(t, 0.0) };
        }
        fft2_centered(&mut field, Direction::Forward, unitary);
        for f in field.iter_mut() {
            let m = f.norm();
            *f = if m > 0.0 { *f / m } else { Complex64::new(1.0, 0.0) };
        }
    }
    let phase = PhaseMap::new(field.mapv(|c| c.arg()), pitch, wavelength)?;
    Ok(GsResult { phase, errors })
}
