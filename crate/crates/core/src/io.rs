//! File formats: 16-bit binary PGM for phase maps and intensity images
//! (each with a plain-text sidecar carrying the physical metadata), ASCII
//! or 8-bit-PGM display patterns, and an optional false-color PNG preview.
//!
//! Phase encoding is linear on [-pi, pi): code 0 is -pi, code 65535 is
//! pi*(1 - 2/65536), so all power-of-two level sets round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::eye::RetinaImage;
use crate::field::{PhaseMap, TWO_PI};
use crate::geometry::DisplayPattern;

const PHASE_SCALE: f64 = 65536.0 / TWO_PI;

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".txt");
    path.with_file_name(name)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn pgm_header(width: usize, height: usize, maxval: u32) -> Vec<u8> {
    format!("P5\n{width} {height}\n{maxval}\n").into_bytes()
}

/// Minimal binary-PGM reader: returns (width, height, maxval, samples) with
/// 16-bit samples decoded big-endian per the format.
fn read_pgm(path: &Path) -> Result<(usize, usize, u32, Vec<u16>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        message,
    };
    if !bytes.starts_with(b"P5") {
        return Err(bad("not a binary PGM (missing P5 magic)".into()));
    }
    // Header tokens: width, height, maxval; '#' starts a comment.
    let mut pos = 2usize;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        while pos < bytes.len() {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header".into()));
        }
        let token = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = token.parse().map_err(|_| bad(format!("bad header token {token:?}")))?;
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("missing whitespace after maxval".into()));
    }
    pos += 1;
    let (w, h, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if w == 0 || h == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad(format!("unsupported PGM dimensions {w}x{h} maxval {maxval}")));
    }
    let data = &bytes[pos..];
    let samples = if maxval > 255 {
        if data.len() != 2 * w * h {
            return Err(bad(format!("expected {} payload bytes, got {}", 2 * w * h, data.len())));
        }
        data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        if data.len() != w * h {
            return Err(bad(format!("expected {} payload bytes, got {}", w * h, data.len())));
        }
        data.iter().map(|&b| b as u16).collect()
    };
    Ok((w, h, maxval, samples))
}

fn parse_sidecar(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            message: format!("sidecar line without '=': {line:?}"),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn sidecar_value<'a>(pairs: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            message: format!("sidecar missing key {key}"),
        })
}

/// Write the phase map as 16-bit PGM plus a `<name>.txt` sidecar with
/// pitch, quantization level count (0 = continuous) and wavelength.
pub fn write_phase_pgm(map: &PhaseMap, path: &Path) -> Result<()> {
    let (rows, cols) = map.shape();
    let mut bytes = pgm_header(cols, rows, 65535);
    bytes.reserve(2 * rows * cols);
    for &phi in map.values().iter() {
        let code = ((phi + std::f64::consts::PI) * PHASE_SCALE).round();
        let code = (code as i64).clamp(0, 65535) as u16;
        bytes.extend_from_slice(&code.to_be_bytes());
    }
    write_bytes(path, &bytes)?;
    let sidecar = format!(
        "pitch_m = {}\nlevels = {}\nwavelength_m = {}\n",
        map.pitch(),
        map.levels(),
        map.wavelength()
    );
    write_text(&sidecar_path(path), &sidecar)
}

/// Read a phase map written by `write_phase_pgm`. Quantized maps are
/// re-snapped to their exact level centers (the 16-bit code is within a
/// quarter level of the center for any level count up to 16384).
pub fn read_phase_pgm(path: &Path) -> Result<PhaseMap> {
    let (w, h, maxval, samples) = read_pgm(path)?;
    if maxval != 65535 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            message: format!("phase PGM must be 16-bit (maxval 65535), got {maxval}"),
        });
    }
    let side = sidecar_path(path);
    let pairs = parse_sidecar(&read_to_string(&side)?, &side)?;
    let parse_f = |key: &str| -> Result<f64> {
        sidecar_value(&pairs, key, &side)?.parse().map_err(|_| Error::UnsupportedFormat {
            path: side.clone(),
            message: format!("bad float for {key}"),
        })
    };
    let pitch = parse_f("pitch_m")?;
    let wavelength = parse_f("wavelength_m")?;
    let levels: u32 =
        sidecar_value(&pairs, "levels", &side)?.parse().map_err(|_| Error::UnsupportedFormat {
            path: side.clone(),
            message: "bad integer for levels".into(),
        })?;
    let values = Array2::from_shape_vec(
        (h, w),
        samples
            .iter()
            .map(|&c| -std::f64::consts::PI + c as f64 / PHASE_SCALE)
            .collect(),
    )
    .expect("shape matches sample count");
    let map = PhaseMap::new(values, pitch, wavelength)?;
    if levels > 0 {
        map.quantize(levels)
    } else {
        Ok(map)
    }
}

/// Write simulated intensity as a max-normalized 16-bit PGM plus sidecar
/// (pitch, plane, total power). Normalization keeps the file viewable; the
/// physical scale lives in the sidecar.
pub fn write_intensity_pgm(img: &RetinaImage, path: &Path) -> Result<()> {
    let n = img.side();
    let peak = img.intensity().iter().cloned().fold(0.0f64, f64::max);
    let mut bytes = pgm_header(n, n, 65535);
    bytes.reserve(2 * n * n);
    for &v in img.intensity().iter() {
        let code = if peak > 0.0 {
            ((v / peak) * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&code.to_be_bytes());
    }
    write_bytes(path, &bytes)?;
    let sidecar = format!(
        "pitch_m = {}\nplane = {}\ntotal_power = {}\n",
        img.pitch(),
        img.plane().as_str(),
        img.total_power()
    );
    write_text(&sidecar_path(path), &sidecar)
}

/// Read a pattern whose pixels tile a square aperture: the pixel pitch is
/// `aperture / side`, whatever side count the file declares.
pub fn read_pattern_for_aperture(path: &Path, aperture: f64) -> Result<DisplayPattern> {
    let probe = read_pattern(path, 1.0)?;
    read_pattern(path, aperture / probe.side() as f64)
}

/// Display pattern from either an ASCII 0/1 grid or an 8-bit binary PGM
/// (threshold: >= 128 is lit).
pub fn read_pattern(path: &Path, pixel_size: f64) -> Result<DisplayPattern> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        let (w, h, maxval, samples) = read_pgm(path)?;
        if maxval > 255 {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                message: format!("pattern PGM must be 8-bit, got maxval {maxval}"),
            });
        }
        let lit = Array2::from_shape_vec(
            (h, w),
            samples.iter().map(|&v| v >= 128).collect(),
        )
        .expect("shape matches sample count");
        return DisplayPattern::new(lit, pixel_size);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::PatternParse {
        path: path.to_path_buf(),
        message: "pattern file is neither PGM nor UTF-8 text".into(),
    })?;
    DisplayPattern::parse_ascii(&text, pixel_size, path)
}

/// Five-stop heat colormap for documentation PNGs.
fn heat_color(t: f64) -> [u8; 3] {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.00, [0.0, 0.0, 0.05]),
        (0.25, [0.25, 0.0, 0.45]),
        (0.55, [0.85, 0.2, 0.1]),
        (0.80, [1.0, 0.65, 0.0]),
        (1.00, [1.0, 1.0, 0.9]),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut rgb = STOPS[STOPS.len() - 1].1;
    for w in STOPS.windows(2) {
        let ((t0, c0), (t1, c1)) = (w[0], w[1]);
        if t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + f * (c1[0] - c0[0]),
                c0[1] + f * (c1[1] - c0[1]),
                c0[2] + f * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    [
        (rgb[0] * 255.0).round() as u8,
        (rgb[1] * 255.0).round() as u8,
        (rgb[2] * 255.0).round() as u8,
    ]
}

/// False-color PNG of the intensity (max-normalized, gamma 0.5 so dim
/// structure stays visible).
pub fn write_intensity_png(img: &RetinaImage, path: &Path) -> Result<()> {
    let n = img.side();
    let peak = img.intensity().iter().cloned().fold(0.0f64, f64::max);
    let mut rgb = image::RgbImage::new(n as u32, n as u32);
    for (r, row) in img.intensity().rows().into_iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = if peak > 0.0 { (v / peak).sqrt() } else { 0.0 };
            rgb.put_pixel(c as u32, r as u32, image::Rgb(heat_color(t)));
        }
    }
    rgb.save(path).map_err(|e| Error::Png(e.to_string()))
}
