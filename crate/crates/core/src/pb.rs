//! Jones model of one geometric-phase nanobeam cell.
//!
//! A form-birefringent beam with complex transmissions (t_TE, t_TM) along
//! its principal axes, rotated in-plane by theta, acts on a circular input
//! as
//!
//!   E_out = co * |same helicity>  +  cross * |flipped helicity>
//!
//! with co = (t_TE + t_TM)/2 and cross = ((t_TE - t_TM)/2) * e^{i s 2 theta},
//! s = +1 for right-circular input and -1 for left. The cross term carries
//! the geometric phase 2*theta used for holography; the co term is
//! unconverted leakage (the zeroth order). The two outputs are orthogonal
//! polarizations, so intensities add and the energy identity
//! |co|^2 + |cross|^2 = (|t_TE|^2 + |t_TM|^2)/2 holds exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::wrap;

/// One nanobeam: principal-axis transmissions plus in-plane rotation.
#[derive(Debug, Clone, Copy)]
pub struct PBElement {
    t_te: Complex64,
    t_tm: Complex64,
    theta: f64,
}

impl PBElement {
    /// Tiny slack over 1 absorbs rounding in solver-derived coefficients.
    const PASSIVITY_SLACK: f64 = 1e-9;

    pub fn new(t_te: Complex64, t_tm: Complex64, theta: f64) -> Result<Self> {
        if !(t_te.re.is_finite() && t_te.im.is_finite() && t_tm.re.is_finite() && t_tm.im.is_finite())
        {
            return Err(Error::Numerical("non-finite transmission coefficient".into()));
        }
        if !theta.is_finite() {
            return Err(Error::NonFinitePhase(theta));
        }
        if t_te.norm() > 1.0 + Self::PASSIVITY_SLACK {
            return Err(Error::NonPassiveElement { which: "t_TE", magnitude: t_te.norm() });
        }
        if t_tm.norm() > 1.0 + Self::PASSIVITY_SLACK {
            return Err(Error::NonPassiveElement { which: "t_TM", magnitude: t_tm.norm() });
        }
        Ok(PBElement { t_te, t_tm, theta })
    }

    /// Lossless ideal half-wave element (t_TE = 1, t_TM = -1) at `theta`.
    /// Converts all light into the cross-polarized channel.
    pub fn ideal(theta: f64) -> Self {
        PBElement { t_te: Complex64::new(1.0, 0.0), t_tm: Complex64::new(-1.0, 0.0), theta }
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        PBElement::new(self.t_te, self.t_tm, theta)
    }

    pub fn t_te(&self) -> Complex64 {
        self.t_te
    }

    pub fn t_tm(&self) -> Complex64 {
        self.t_tm
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Principal-axis retardance arg(t_TM) - arg(t_TE), wrapped.
    pub fn delta_phi(&self) -> f64 {
        wrap(self.t_tm.arg() - self.t_te.arg())
    }

    /// Leakage amplitude into the unconverted (co-polarized) channel;
    /// independent of theta.
    pub fn co_amplitude(&self) -> Complex64 {
        0.5 * (self.t_te + self.t_tm)
    }

    /// Converted amplitude before the geometric-phase factor e^{i s 2 theta}.
    pub fn cross_amplitude_base(&self) -> Complex64 {
        0.5 * (self.t_te - self.t_tm)
    }

    /// Fraction of incident power leaking through unconverted.
    pub fn leakage_efficiency(&self) -> f64 {
        self.co_amplitude().norm_sqr()
    }

    /// Fraction of incident power converted into the geometric-phase channel.
    pub fn conversion_efficiency(&self) -> f64 {
        self.cross_amplitude_base().norm_sqr()
    }
}

/// Circular polarization handedness of the illumination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Right,
    Left,
}

impl Helicity {
    /// Sign s of the imposed geometric phase e^{i s 2 theta}.
    pub fn phase_sign(self) -> f64 {
        match self {
            Helicity::Right => 1.0,
            Helicity::Left => -1.0,
        }
    }

    pub fn flipped(self) -> Helicity {
        match self {
            Helicity::Right => Helicity::Left,
            Helicity::Left => Helicity::Right,
        }
    }
}

/// Output of one cell on a unit-amplitude circular input.
#[derive(Debug, Clone, Copy)]
pub struct PBResponse {
    /// Amplitude staying in the input helicity (no geometric phase).
    pub co: Complex64,
    /// Amplitude in the flipped helicity, geometric phase included.
    pub cross: Complex64,
    /// Sign of the imposed geometric phase: +1 for R input, -1 for L.
    pub phase_sign: f64,
}

/// Split a circular input into the co- and cross-polarized output channels
/// of `element`.
pub fn pb_output(element: &PBElement, input: Helicity) -> PBResponse {
    let s = input.phase_sign();
    let geometric = Complex64::from_polar(1.0, s * 2.0 * element.theta());
    PBResponse {
        co: element.co_amplitude(),
        cross: element.cross_amplitude_base() * geometric,
        phase_sign: s,
    }
}
