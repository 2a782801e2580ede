//! Tabulated material dispersion n(lambda) - i k(lambda).
//!
//! Table files are whitespace-separated columns `wavelength_nm n k` with `#`
//! comments, strictly increasing wavelengths. Interpolation is linear in n
//! and k separately; queries outside the tabulated range are errors, never
//! extrapolated. The returned complex index uses the n - i*k sign
//! convention (absorbing for e^{-i(kz - wt)} phasors); consumers using the
//! opposite phasor convention conjugate at the point of use.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DispersionTable {
    /// Strictly increasing, in meters.
    wavelengths: Vec<f64>,
    n: Vec<f64>,
    k: Vec<f64>,
}

impl DispersionTable {
    /// Parse the text format described in the module docs.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |message: String| Error::DispersionParse { path: origin.to_owned(), message };
        let mut wavelengths = Vec::new();
        let mut n = Vec::new();
        let mut k = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!(
                    "line {}: expected `wavelength_nm n k`, got {} fields",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("line {}: bad {what} `{s}`", lineno + 1)))
            };
            let wl_nm = parse(fields[0], "wavelength")?;
            let nv = parse(fields[1], "n")?;
            let kv = parse(fields[2], "k")?;
            if !(wl_nm > 0.0) || !(nv > 0.0) || kv < 0.0 {
                return Err(err(format!(
                    "line {}: require wavelength > 0, n > 0, k >= 0",
                    lineno + 1
                )));
            }
            if let Some(&last) = wavelengths.last() {
                if wl_nm * 1e-9 <= last {
                    return Err(err(format!(
                        "line {}: wavelengths must be strictly increasing",
                        lineno + 1
                    )));
                }
            }
            wavelengths.push(wl_nm * 1e-9);
            n.push(nv);
            k.push(kv);
        }
        if wavelengths.len() < 2 {
            return Err(err("need at least two rows".into()));
        }
        Ok(DispersionTable { wavelengths, n, k })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DispersionTable::parse(&text, path)
    }

    /// A dispersionless material with a real index (vacuum gap, glass, ...).
    pub fn constant(index: f64) -> Result<Self> {
        if !(index >= 1.0 && index.is_finite()) {
            return Err(Error::InvalidGeometry {
                context: "dispersion",
                message: format!("constant refractive index must be >= 1, got {index}"),
            });
        }
        Ok(DispersionTable {
            wavelengths: vec![1e-9, 100e-6],
            n: vec![index, index],
            k: vec![0.0, 0.0],
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.wavelengths[0], *self.wavelengths.last().unwrap())
    }

    /// Linear interpolation at `wavelength` (meters); returns n - i k.
    pub fn interpolate(&self, wavelength: f64) -> Result<Complex64> {
        let (lo, hi) = self.range();
        if !(wavelength >= lo && wavelength <= hi) {
            return Err(Error::WavelengthOutOfRange {
                wavelength_nm: wavelength * 1e9,
                min_nm: lo * 1e9,
                max_nm: hi * 1e9,
            });
        }
        let i = match self.wavelengths.binary_search_by(|w| w.partial_cmp(&wavelength).unwrap()) {
            Ok(i) => return Ok(Complex64::new(self.n[i], -self.k[i])),
            Err(i) => i - 1,
        };
        let t = (wavelength - self.wavelengths[i]) / (self.wavelengths[i + 1] - self.wavelengths[i]);
        let n = self.n[i] + t * (self.n[i + 1] - self.n[i]);
        let k = self.k[i] + t * (self.k[i + 1] - self.k[i]);
        Ok(Complex64::new(n, -k))
    }
}
