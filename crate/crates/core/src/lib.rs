//! Design and verification toolkit for geometric-phase (Pancharatnam-Berry)
//! nanobeam holograms used as see-through near-eye displays.
//!
//! The pipeline, end to end:
//!
//! 1. [`design`] synthesizes a wrapped phase map that turns a sparse set of
//!    display pixels into virtual point sources behind the combiner, either
//!    analytically per cell or by Gerchberg-Saxton retrieval ([`gs`]).
//! 2. [`field::PhaseMap::quantize`] snaps the map to the discrete orientation
//!    levels a nanobeam process can fabricate.
//! 3. [`pb`] models one metasurface cell: a form-birefringent nanobeam acting
//!    on circular polarization, splitting light into a leakage (co-polarized)
//!    and a geometric-phase (cross-polarized) channel.
//! 4. [`eye`] reconstructs what the viewer sees: scalar diffraction
//!    ([`propagate`]) through an idealized eye onto the retina, plus the
//!    conjugate-plane view and an accommodation sweep.
//! 5. [`grating`] closes the loop on step 3 with a rigorous coupled-wave
//!    solver for the lamellar nanobeam cross-section, so the Jones
//!    coefficients fed to the polarization model are grounded in Maxwell
//!    solutions rather than assumed.
//! 6. [`layout`] turns a quantized map into a fabrication-ready list of
//!    rotated nanobeams (CSV / JSON / SVG).
//!
//! Everything is deterministic: a fixed seed and config reproduce output
//! files byte for byte. All internal lengths are meters; angles radians.

pub mod cli;
pub mod config;
pub mod design;
pub mod dispersion;
pub mod error;
pub mod eye;
pub mod fft;
pub mod field;
pub mod geometry;
pub mod grating;
pub mod gs;
pub mod io;
pub mod layout;
pub mod linalg;
pub mod metrics;
pub mod pb;
pub mod propagate;

pub use error::{Error, Result};
