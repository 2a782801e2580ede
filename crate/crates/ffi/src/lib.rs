//! C ABI for the pbholo toolkit.
//!
//! Conventions:
//! - Handles (`PbConfig`, `PbPhaseMap`) are opaque; free them with the
//!   matching `_free` function. A `NULL` return means failure.
//! - Fallible calls return 0 on success, 2 on invalid input, 3 on numerical
//!   failure (the same codes the CLI exits with). The message behind the
//!   most recent failure on the current thread is available through
//!   `pbholo_last_error`.
//! - Strings cross the boundary as NUL-terminated UTF-8. Output strings use
//!   a caller buffer plus a required-length return so callers can size and
//!   retry.
//! - Every entry point catches panics; a panic surfaces as code 3 instead
//!   of unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pbholo::config::RunConfig;
use pbholo::dispersion::DispersionTable;
use pbholo::error::Error;
use pbholo::field::PhaseMap;
use pbholo::grating::{rcwa_1d, GratingGeometry, Polarization};

pub const PBHOLO_OK: i32 = 0;
pub const PBHOLO_ERR_INPUT: i32 = 2;
pub const PBHOLO_ERR_NUMERICAL: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn record_error(message: String) {
    let c = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn failed(e: Error) -> i32 {
    let code = e.exit_code();
    record_error(e.to_string());
    code
}

fn bad_input(message: &str) -> i32 {
    record_error(message.to_string());
    PBHOLO_ERR_INPUT
}

/// Run `f` with panics converted to an error code, never unwinding into C.
fn guarded(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            record_error(format!("internal panic: {msg}"));
            PBHOLO_ERR_NUMERICAL
        }
    }
}

/// Borrow a required UTF-8 C string argument.
///
/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(bad_input(&format!("{what} must not be NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| bad_input(&format!("{what} must be valid UTF-8")))
}

/// Copy `text` into `buf` (truncated, always NUL-terminated when `cap > 0`)
/// and return the full untruncated length in bytes, excluding the NUL.
unsafe fn copy_out(text: &str, buf: *mut c_char, cap: usize) -> usize {
    if !buf.is_null() && cap > 0 {
        let n = text.len().min(cap - 1);
        std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, n);
        *buf.add(n) = 0;
    }
    text.len()
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn pbholo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the current thread's last error message into `buf`. Returns the
/// message length in bytes (excluding the NUL terminator), 0 when no error
/// has been recorded since the last successful call that clears it.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be NULL to query the length.
#[no_mangle]
pub unsafe extern "C" fn pbholo_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => copy_out(msg.to_str().unwrap_or(""), buf, cap),
        None => copy_out("", buf, cap),
    })
}

/// Opaque run configuration handle.
pub struct PbConfig {
    inner: RunConfig,
}

/// New configuration with every field at its default.
#[no_mangle]
pub extern "C" fn pbholo_config_default() -> *mut PbConfig {
    clear_error();
    Box::into_raw(Box::new(PbConfig { inner: RunConfig::default() }))
}

/// Parse a full `key = value` configuration text. Returns NULL on error.
///
/// # Safety
/// `text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pbholo_config_parse(text: *const c_char) -> *mut PbConfig {
    clear_error();
    let mut out: *mut PbConfig = std::ptr::null_mut();
    guarded(|| {
        let text = match utf8_arg(text, "config text") {
            Ok(t) => t,
            Err(code) => return code,
        };
        match RunConfig::parse(text) {
            Ok(inner) => {
                out = Box::into_raw(Box::new(PbConfig { inner }));
                PBHOLO_OK
            }
            Err(e) => failed(e),
        }
    });
    out
}

/// Apply one `key = value` assignment; the config is unchanged on failure.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` valid strings.
#[no_mangle]
pub unsafe extern "C" fn pbholo_config_set(
    cfg: *mut PbConfig,
    key: *const c_char,
    value: *const c_char,
) -> i32 {
    clear_error();
    guarded(|| {
        if cfg.is_null() {
            return bad_input("config handle must not be NULL");
        }
        let key = match utf8_arg(key, "key") {
            Ok(k) => k,
            Err(code) => return code,
        };
        let value = match utf8_arg(value, "value") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match (*cfg).inner.set_key(key, value) {
            Ok(()) => PBHOLO_OK,
            Err(e) => failed(e),
        }
    })
}

/// Copy the resolved (sorted, fully explicit) configuration text into `buf`;
/// returns the full length in bytes excluding the NUL terminator.
///
/// # Safety
/// `cfg` must be a live handle; `buf` NULL or `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pbholo_config_resolved(
    cfg: *const PbConfig,
    buf: *mut c_char,
    cap: usize,
) -> usize {
    if cfg.is_null() {
        bad_input("config handle must not be NULL");
        return 0;
    }
    copy_out(&(*cfg).inner.resolved(), buf, cap)
}

/// # Safety
/// `cfg` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pbholo_config_free(cfg: *mut PbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn run_with_paths(
    cfg: *const PbConfig,
    paths: &[(*const c_char, &str)],
    run: impl FnOnce(&RunConfig, &[&Path]) -> Result<(), Error>,
) -> i32 {
    clear_error();
    guarded(|| {
        if cfg.is_null() {
            return bad_input("config handle must not be NULL");
        }
        let mut resolved = Vec::with_capacity(paths.len());
        for &(ptr, what) in paths {
            match utf8_arg(ptr, what) {
                Ok(s) => resolved.push(Path::new(s)),
                Err(code) => return code,
            }
        }
        match run(&(*cfg).inner, &resolved) {
            Ok(()) => PBHOLO_OK,
            Err(e) => failed(e),
        }
    })
}

/// Design a hologram for `pattern_path` and write the run artifacts
/// (config echo, phase map) into `out_dir`. Mirrors `pbholo design`.
///
/// # Safety
/// `cfg` must be a live handle; the paths valid strings.
#[no_mangle]
pub unsafe extern "C" fn pbholo_run_design(
    cfg: *const PbConfig,
    pattern_path: *const c_char,
    out_dir: *const c_char,
) -> i32 {
    run_with_paths(
        cfg,
        &[(pattern_path, "pattern path"), (out_dir, "output directory")],
        |cfg, p| pbholo::cli::cmd_design(cfg, p[0], p[1]),
    )
}

/// Simulate the retina or conjugate image of a designed phase map under the
/// display mask at `mask_path`. Mirrors `pbholo simulate`.
///
/// # Safety
/// `cfg` must be a live handle; the paths valid strings.
#[no_mangle]
pub unsafe extern "C" fn pbholo_run_simulate(
    cfg: *const PbConfig,
    phase_path: *const c_char,
    mask_path: *const c_char,
    out_dir: *const c_char,
) -> i32 {
    run_with_paths(
        cfg,
        &[
            (phase_path, "phase-map path"),
            (mask_path, "mask path"),
            (out_dir, "output directory"),
        ],
        |cfg, p| pbholo::cli::cmd_simulate(cfg, p[0], p[1], p[2]),
    )
}

/// Sweep the nanobeam grating design space and write sweep.csv plus the
/// best operating point. Mirrors `pbholo grating`.
///
/// # Safety
/// `cfg` must be a live handle; `out_dir` a valid string.
#[no_mangle]
pub unsafe extern "C" fn pbholo_run_grating(cfg: *const PbConfig, out_dir: *const c_char) -> i32 {
    run_with_paths(cfg, &[(out_dir, "output directory")], |cfg, p| {
        pbholo::cli::cmd_grating(cfg, p[0])
    })
}

/// Export a quantized phase map as a nanobeam layout (JSON, CSV, SVG).
/// Mirrors `pbholo layout`.
///
/// # Safety
/// `cfg` must be a live handle; the paths valid strings.
#[no_mangle]
pub unsafe extern "C" fn pbholo_run_layout(
    cfg: *const PbConfig,
    phase_path: *const c_char,
    out_dir: *const c_char,
) -> i32 {
    run_with_paths(
        cfg,
        &[(phase_path, "phase-map path"), (out_dir, "output directory")],
        |cfg, p| pbholo::cli::cmd_layout(cfg, p[0], p[1]),
    )
}

/// Opaque phase-map handle.
pub struct PbPhaseMap {
    inner: PhaseMap,
}

/// Load a 16-bit phase PGM (with its sidecar) written by this toolkit.
/// Returns NULL on error.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_load(path: *const c_char) -> *mut PbPhaseMap {
    clear_error();
    let mut out: *mut PbPhaseMap = std::ptr::null_mut();
    guarded(|| {
        let path = match utf8_arg(path, "phase-map path") {
            Ok(p) => p,
            Err(code) => return code,
        };
        match pbholo::io::read_phase_pgm(Path::new(path)) {
            Ok(inner) => {
                out = Box::into_raw(Box::new(PbPhaseMap { inner }));
                PBHOLO_OK
            }
            Err(e) => failed(e),
        }
    });
    out
}

/// Samples per side of a square phase map (0 for a NULL handle).
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_side(map: *const PbPhaseMap) -> usize {
    if map.is_null() {
        bad_input("phase-map handle must not be NULL");
        return 0;
    }
    (*map).inner.shape().0
}

/// Sample pitch in meters (NaN for a NULL handle).
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_pitch(map: *const PbPhaseMap) -> f64 {
    if map.is_null() {
        bad_input("phase-map handle must not be NULL");
        return f64::NAN;
    }
    (*map).inner.pitch()
}

/// Design wavelength in meters (NaN for a NULL handle).
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_wavelength(map: *const PbPhaseMap) -> f64 {
    if map.is_null() {
        bad_input("phase-map handle must not be NULL");
        return f64::NAN;
    }
    (*map).inner.wavelength()
}

/// Quantization level count baked into the map (0 means continuous).
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_levels(map: *const PbPhaseMap) -> u32 {
    if map.is_null() {
        bad_input("phase-map handle must not be NULL");
        return 0;
    }
    (*map).inner.levels()
}

/// Copy the wrapped phase samples (row-major, radians in [-pi, pi)) into
/// `buf`, which must hold side*side doubles.
///
/// # Safety
/// `map` must be a live handle; `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_values(
    map: *const PbPhaseMap,
    buf: *mut f64,
    cap: usize,
) -> i32 {
    clear_error();
    guarded(|| {
        if map.is_null() {
            return bad_input("phase-map handle must not be NULL");
        }
        if buf.is_null() {
            return bad_input("output buffer must not be NULL");
        }
        let values = (*map).inner.values();
        let needed = values.len();
        if cap < needed {
            return bad_input(&format!("buffer holds {cap} doubles, need {needed}"));
        }
        for (i, v) in values.iter().enumerate() {
            *buf.add(i) = *v;
        }
        PBHOLO_OK
    })
}

/// # Safety
/// `map` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pbholo_phase_map_free(map: *mut PbPhaseMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Wrap a phase into [-pi, pi). Non-finite input yields NaN.
#[no_mangle]
pub extern "C" fn pbholo_wrap_phase(phi: f64) -> f64 {
    if phi.is_finite() {
        pbholo::field::wrap(phi)
    } else {
        f64::NAN
    }
}

/// Snap a phase to the nearest of `levels` centers spanning [-pi, pi).
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pbholo_quantize_phase(phi: f64, levels: u32, out: *mut f64) -> i32 {
    clear_error();
    guarded(|| {
        if out.is_null() {
            return bad_input("output pointer must not be NULL");
        }
        match pbholo::field::quantize_phase(phi, levels) {
            Ok(q) => {
                *out = q;
                PBHOLO_OK
            }
            Err(e) => failed(e),
        }
    })
}

/// Probe polarization for the grating solver.
#[repr(C)]
#[derive(Clone, Copy)]
pub enum PbPolarization {
    /// Electric field along the beams.
    Te = 0,
    /// Electric field across the beams.
    Tm = 1,
}

/// One lamellar nanobeam grating evaluation point. Lengths in meters; the
/// beam index is given as n - i k with k >= 0 (absorbing).
#[repr(C)]
#[derive(Clone, Copy)]
pub struct PbGratingParams {
    pub wavelength_m: f64,
    pub period_m: f64,
    pub width_m: f64,
    pub thickness_m: f64,
    pub beam_n: f64,
    pub beam_k: f64,
    pub n_surround: f64,
    pub n_substrate: f64,
    pub n_cover: f64,
    /// Fourier orders kept per side (the solver uses 2*harmonics + 1).
    pub harmonics: u32,
}

/// Zeroth-order response of the grating for one polarization.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct PbGratingResponse {
    pub t0_re: f64,
    pub t0_im: f64,
    /// Summed power of all propagating transmitted orders.
    pub transmitted: f64,
    /// Summed power of all propagating reflected orders.
    pub reflected: f64,
}

/// Solve the rigorous coupled-wave problem at one design point.
///
/// # Safety
/// `params` and `out` must point to valid structs.
#[no_mangle]
pub unsafe extern "C" fn pbholo_grating_solve(
    params: *const PbGratingParams,
    pol: PbPolarization,
    out: *mut PbGratingResponse,
) -> i32 {
    clear_error();
    guarded(|| {
        if params.is_null() || out.is_null() {
            return bad_input("params and out must not be NULL");
        }
        let p = *params;
        if !(p.beam_n.is_finite() && p.beam_k.is_finite() && p.beam_n > 0.0 && p.beam_k >= 0.0) {
            return bad_input("beam index requires n > 0 and k >= 0");
        }
        // Flat two-point table spanning any physical wavelength.
        let table_text = format!("1 {0} {1}\n1e9 {0} {1}\n", p.beam_n, p.beam_k);
        let table = match DispersionTable::parse(&table_text, Path::new("<inline>")) {
            Ok(t) => t,
            Err(e) => return failed(e),
        };
        let geom = match GratingGeometry::new(
            p.period_m,
            p.width_m,
            p.thickness_m,
            table,
            p.n_surround,
            p.n_substrate,
            p.n_cover,
        ) {
            Ok(g) => g,
            Err(e) => return failed(e),
        };
        let polarization = match pol {
            PbPolarization::Te => Polarization::TE,
            PbPolarization::Tm => Polarization::TM,
        };
        match rcwa_1d(&geom, p.wavelength_m, polarization, p.harmonics as usize) {
            Ok(res) => {
                *out = PbGratingResponse {
                    t0_re: res.t0.re,
                    t0_im: res.t0.im,
                    transmitted: res.total_transmitted(),
                    reflected: res.total_reflected(),
                };
                PBHOLO_OK
            }
            Err(e) => failed(e),
        }
    })
}
