//! Run configuration: line-based `key = value` text with `#` comments.
//! Unknown and duplicate keys are rejected, and [`RunConfig::resolved`]
//! echoes every setting so an output directory fully documents its run.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::design::{DesignMode, GsSettings};
use crate::error::{Error, Result};
use crate::eye::{EyeSimOptions, Plane};
use crate::geometry::{EyeGeometry, SystemGeometry};
use crate::grating::SweepRanges;
use crate::pb::{Helicity, PBElement};

/// Eye focus policy for simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accommodation {
    /// Focus the virtual image plane onto the retina.
    Auto,
    /// Use the eye's relaxed focal length unchanged.
    Relaxed,
    /// Explicit focal length [m].
    Fixed(f64),
}

impl Accommodation {
    fn as_config_value(&self) -> String {
        match self {
            Accommodation::Auto => "auto".into(),
            Accommodation::Relaxed => "relaxed".into(),
            Accommodation::Fixed(f) => format!("{f}"),
        }
    }
}

/// Every tunable of the four pipelines, with physically sensible defaults
/// (500 um aperture split into 10x10 cells, 543 nm, x100 virtual image at
/// 0.25 m; polysilicon beams on glass for the grating solver).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub aperture: f64,
    pub pixels: usize,
    pub conjugate_distance: f64,
    pub magnification: f64,
    pub wavelength: f64,
    pub grid_n: usize,
    pub levels: u32,
    pub mode: DesignMode,
    pub gs_iterations: usize,
    pub seed: u64,
    pub eye_focal: f64,
    pub retina_distance: f64,
    pub accommodation: Accommodation,
    pub analyzer: bool,
    pub coherent: bool,
    pub plane: Plane,
    pub png: bool,
    pub t_te_abs: f64,
    pub t_te_phase: f64,
    pub t_tm_abs: f64,
    pub t_tm_phase: f64,
    pub nk_file: String,
    pub n_surround: f64,
    pub n_substrate: f64,
    pub n_cover: f64,
    pub period_range: (f64, f64, usize),
    pub width_range: (f64, f64, usize),
    pub thickness_range: (f64, f64, usize),
    pub harmonics: usize,
    pub weight_amplitude: f64,
    pub weight_phase: f64,
    pub unit_cell: f64,
    pub beam_width: f64,
    pub beam_length: f64,
    pub svg_decimate: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            aperture: 500e-6,
            pixels: 10,
            conjugate_distance: 0.25,
            magnification: 100.0,
            wavelength: 543e-9,
            grid_n: 2048,
            levels: 8,
            mode: DesignMode::PerCell,
            gs_iterations: 50,
            seed: 0,
            eye_focal: 0.017,
            retina_distance: 0.025,
            accommodation: Accommodation::Auto,
            analyzer: false,
            coherent: false,
            plane: Plane::Retina,
            png: false,
            t_te_abs: 1.0,
            t_te_phase: 0.0,
            t_tm_abs: 1.0,
            t_tm_phase: std::f64::consts::PI,
            nk_file: "data/polysilicon_nk.txt".into(),
            n_surround: 1.0,
            n_substrate: 1.46,
            n_cover: 1.0,
            period_range: (230e-9, 230e-9, 1),
            width_range: (50e-9, 90e-9, 5),
            thickness_range: (100e-9, 250e-9, 16),
            harmonics: 15,
            weight_amplitude: 1.0,
            weight_phase: 1.0,
            unit_cell: 230e-9,
            beam_width: 70e-9,
            beam_length: 180e-9,
            svg_decimate: 16,
        }
    }
}

fn mode_str(mode: DesignMode) -> &'static str {
    match mode {
        DesignMode::PerCell => "per_cell",
        DesignMode::FullGs => "full_gs",
    }
}

pub fn parse_mode(s: &str) -> Result<DesignMode> {
    match s {
        "per_cell" => Ok(DesignMode::PerCell),
        "full_gs" => Ok(DesignMode::FullGs),
        other => Err(Error::Config(format!(
            "mode must be per_cell or full_gs, got `{other}`"
        ))),
    }
}

pub fn parse_plane(s: &str) -> Result<Plane> {
    match s {
        "retina" => Ok(Plane::Retina),
        "conjugate" => Ok(Plane::Conjugate),
        other => Err(Error::Config(format!(
            "plane must be retina or conjugate, got `{other}`"
        ))),
    }
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected on or off, got `{other}`"))),
    }
}

fn switch_str(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {raw:?}", line_no + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", line_no + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key = value` assignment, keeping the config valid: on any
    /// parse or validation error the config is left unchanged.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let mut next = self.clone();
        next.set(key.trim(), value.trim())?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{value}` for {key}")))
        }
        match key {
            "aperture_m" => self.aperture = num(key, value)?,
            "pixels" => self.pixels = num(key, value)?,
            "conjugate_distance_m" => self.conjugate_distance = num(key, value)?,
            "magnification" => self.magnification = num(key, value)?,
            "wavelength_m" => self.wavelength = num(key, value)?,
            "grid_n" => self.grid_n = num(key, value)?,
            "levels" => self.levels = num(key, value)?,
            "mode" => self.mode = parse_mode(value)?,
            "gs_iterations" => self.gs_iterations = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "eye_focal_m" => self.eye_focal = num(key, value)?,
            "retina_distance_m" => self.retina_distance = num(key, value)?,
            "accommodation" => {
                self.accommodation = match value {
                    "auto" => Accommodation::Auto,
                    "relaxed" => Accommodation::Relaxed,
                    _ => Accommodation::Fixed(num(key, value)?),
                }
            }
            "analyzer" => self.analyzer = parse_switch(value)?,
            "coherent" => self.coherent = parse_switch(value)?,
            "plane" => self.plane = parse_plane(value)?,
            "png" => self.png = parse_switch(value)?,
            "t_te_abs" => self.t_te_abs = num(key, value)?,
            "t_te_phase_rad" => self.t_te_phase = num(key, value)?,
            "t_tm_abs" => self.t_tm_abs = num(key, value)?,
            "t_tm_phase_rad" => self.t_tm_phase = num(key, value)?,
            "nk_file" => self.nk_file = value.to_string(),
            "n_surround" => self.n_surround = num(key, value)?,
            "n_substrate" => self.n_substrate = num(key, value)?,
            "n_cover" => self.n_cover = num(key, value)?,
            "period_min_m" => self.period_range.0 = num(key, value)?,
            "period_max_m" => self.period_range.1 = num(key, value)?,
            "period_steps" => self.period_range.2 = num(key, value)?,
            "width_min_m" => self.width_range.0 = num(key, value)?,
            "width_max_m" => self.width_range.1 = num(key, value)?,
            "width_steps" => self.width_range.2 = num(key, value)?,
            "thickness_min_m" => self.thickness_range.0 = num(key, value)?,
            "thickness_max_m" => self.thickness_range.1 = num(key, value)?,
            "thickness_steps" => self.thickness_range.2 = num(key, value)?,
            "harmonics" => self.harmonics = num(key, value)?,
            "weight_amplitude" => self.weight_amplitude = num(key, value)?,
            "weight_phase" => self.weight_phase = num(key, value)?,
            "unit_cell_m" => self.unit_cell = num(key, value)?,
            "beam_width_m" => self.beam_width = num(key, value)?,
            "beam_length_m" => self.beam_length = num(key, value)?,
            "svg_decimate" => self.svg_decimate = num(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let lengths = [
            ("aperture_m", self.aperture),
            ("conjugate_distance_m", self.conjugate_distance),
            ("wavelength_m", self.wavelength),
            ("eye_focal_m", self.eye_focal),
            ("retina_distance_m", self.retina_distance),
            ("period_min_m", self.period_range.0),
            ("period_max_m", self.period_range.1),
            ("width_min_m", self.width_range.0),
            ("width_max_m", self.width_range.1),
            ("thickness_min_m", self.thickness_range.0),
            ("thickness_max_m", self.thickness_range.1),
            ("unit_cell_m", self.unit_cell),
            ("beam_width_m", self.beam_width),
            ("beam_length_m", self.beam_length),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v:e}")));
            }
        }
        if let Accommodation::Fixed(f) = self.accommodation {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!(
                    "accommodation must be auto, relaxed, or a positive focal length, got {f:e}"
                )));
            }
        }
        for (name, v) in [
            ("t_te_abs", self.t_te_abs),
            ("t_te_phase_rad", self.t_te_phase),
            ("t_tm_abs", self.t_tm_abs),
            ("t_tm_phase_rad", self.t_tm_phase),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v:e}")));
            }
        }
        if !(self.magnification > 0.0 && self.magnification.is_finite()) {
            return Err(Error::Config(format!(
                "magnification must be positive, got {:e}",
                self.magnification
            )));
        }
        for (name, v) in [
            ("pixels", self.pixels),
            ("grid_n", self.grid_n),
            ("gs_iterations", self.gs_iterations),
            ("period_steps", self.period_range.2),
            ("width_steps", self.width_range.2),
            ("thickness_steps", self.thickness_range.2),
            ("svg_decimate", self.svg_decimate),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }

    /// The full settings table, sorted by key; parses back to `self`.
    pub fn resolved(&self) -> String {
        let mut pairs: Vec<(&str, String)> = vec![
            ("accommodation", self.accommodation.as_config_value()),
            ("analyzer", switch_str(self.analyzer).into()),
            ("aperture_m", format!("{}", self.aperture)),
            ("beam_length_m", format!("{}", self.beam_length)),
            ("beam_width_m", format!("{}", self.beam_width)),
            ("coherent", switch_str(self.coherent).into()),
            ("conjugate_distance_m", format!("{}", self.conjugate_distance)),
            ("eye_focal_m", format!("{}", self.eye_focal)),
            ("grid_n", format!("{}", self.grid_n)),
            ("gs_iterations", format!("{}", self.gs_iterations)),
            ("harmonics", format!("{}", self.harmonics)),
            ("levels", format!("{}", self.levels)),
            ("magnification", format!("{}", self.magnification)),
            ("mode", mode_str(self.mode).into()),
            ("n_cover", format!("{}", self.n_cover)),
            ("n_substrate", format!("{}", self.n_substrate)),
            ("n_surround", format!("{}", self.n_surround)),
            ("nk_file", self.nk_file.clone()),
            ("period_max_m", format!("{}", self.period_range.1)),
            ("period_min_m", format!("{}", self.period_range.0)),
            ("period_steps", format!("{}", self.period_range.2)),
            ("pixels", format!("{}", self.pixels)),
            ("plane", self.plane.as_str().into()),
            ("png", switch_str(self.png).into()),
            ("retina_distance_m", format!("{}", self.retina_distance)),
            ("seed", format!("{}", self.seed)),
            ("svg_decimate", format!("{}", self.svg_decimate)),
            ("t_te_abs", format!("{}", self.t_te_abs)),
            ("t_te_phase_rad", format!("{}", self.t_te_phase)),
            ("t_tm_abs", format!("{}", self.t_tm_abs)),
            ("t_tm_phase_rad", format!("{}", self.t_tm_phase)),
            ("thickness_max_m", format!("{}", self.thickness_range.1)),
            ("thickness_min_m", format!("{}", self.thickness_range.0)),
            ("thickness_steps", format!("{}", self.thickness_range.2)),
            ("unit_cell_m", format!("{}", self.unit_cell)),
            ("wavelength_m", format!("{}", self.wavelength)),
            ("weight_amplitude", format!("{}", self.weight_amplitude)),
            ("weight_phase", format!("{}", self.weight_phase)),
            ("width_max_m", format!("{}", self.width_range.1)),
            ("width_min_m", format!("{}", self.width_range.0)),
            ("width_steps", format!("{}", self.width_range.2)),
        ];
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for (k, v) in pairs {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Aperture geometry with `pixels` cells per side; the cell pitch is
    /// derived so the cells tile the aperture exactly.
    pub fn system_geometry(&self) -> Result<SystemGeometry> {
        SystemGeometry::new(
            self.aperture,
            self.pixels,
            self.aperture / self.pixels as f64,
            self.conjugate_distance,
            self.magnification,
            self.wavelength,
        )
    }

    /// Same geometry with the pixel count taken from a pattern file instead
    /// of the config (a 1x1 pattern gives a single full-aperture cell).
    pub fn system_geometry_for(&self, pixels: usize) -> Result<SystemGeometry> {
        SystemGeometry::new(
            self.aperture,
            pixels,
            self.aperture / pixels as f64,
            self.conjugate_distance,
            self.magnification,
            self.wavelength,
        )
    }

    pub fn eye_geometry(&self) -> Result<EyeGeometry> {
        let eye = EyeGeometry::new(self.eye_focal, self.retina_distance)?;
        match self.accommodation {
            Accommodation::Relaxed => Ok(eye),
            Accommodation::Fixed(f) => eye.accommodated_to(f),
            Accommodation::Auto => eye.accommodated_to(EyeGeometry::accommodated_focal(
                self.conjugate_distance,
                self.retina_distance,
            )),
        }
    }

    /// Sample pitch implied by `grid_n` samples across the aperture.
    pub fn grid_pitch(&self) -> f64 {
        self.aperture / self.grid_n as f64
    }

    pub fn gs_settings(&self) -> GsSettings {
        GsSettings { iterations: self.gs_iterations, seed: self.seed }
    }

    /// Nanobeam transmission pair for simulation (defaults are the ideal
    /// half-wave element, t_te = 1 and t_tm = -1).
    pub fn element(&self) -> Result<PBElement> {
        PBElement::new(
            Complex64::from_polar(self.t_te_abs, self.t_te_phase),
            Complex64::from_polar(self.t_tm_abs, self.t_tm_phase),
            0.0,
        )
    }

    pub fn eye_sim_options(&self) -> Result<EyeSimOptions> {
        Ok(EyeSimOptions {
            element: self.element()?,
            input: Helicity::Right,
            analyzer: self.analyzer,
            coherent: self.coherent,
        })
    }

    pub fn sweep_ranges(&self) -> SweepRanges {
        let mut ranges = SweepRanges::inclusive(
            self.wavelength,
            self.period_range,
            self.width_range,
            self.thickness_range,
        );
        ranges.harmonics = self.harmonics;
        ranges.weight_amplitude = self.weight_amplitude;
        ranges.weight_phase = self.weight_phase;
        ranges
    }
}
