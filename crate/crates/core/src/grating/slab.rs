//! Homogeneous-film references: the Airy transmission of a single slab and
//! the zeroth-order effective-medium indices of a subwavelength lamellar
//! grating. Both serve as independent checks on the coupled-wave solver.

use num_complex::Complex64;

/// Complex transmission of a homogeneous slab (index `n`, thickness `t`)
/// between cover `nc` and substrate `ns`, normal incidence, all internal
/// reflections summed. Phase convention e^{+i n k0 t}; absorbing films take
/// a positive imaginary index.
pub fn tmm_slab(n: Complex64, thickness: f64, wavelength: f64, nc: f64, ns: f64) -> Complex64 {
    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    let ncc = Complex64::new(nc, 0.0);
    let nsc = Complex64::new(ns, 0.0);
    let r1 = (ncc - n) / (ncc + n);
    let t1 = 2.0 * ncc / (ncc + n);
    let r2 = (n - nsc) / (n + nsc);
    let t2 = 2.0 * n / (n + nsc);
    let d = n * k0 * thickness;
    let ph = (Complex64::new(0.0, 1.0) * d).exp();
    t1 * t2 * ph / (1.0 + r1 * r2 * ph * ph)
}

/// Zeroth-order effective indices (TE, TM) of a deeply subwavelength
/// lamellar grating: beam index `n_beam` filling fraction `fill` of the
/// period, `n_gap` elsewhere. TE averages permittivity; TM averages
/// inverse permittivity.
pub fn emt_indices(fill: f64, n_beam: Complex64, n_gap: Complex64) -> (Complex64, Complex64) {
    let eps_b = n_beam * n_beam;
    let eps_g = n_gap * n_gap;
    let te = (fill * eps_b + (1.0 - fill) * eps_g).sqrt();
    let tm = (fill / eps_b + (1.0 - fill) / eps_g).sqrt().finv();
    (te, tm)
}
