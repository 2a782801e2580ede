//! Command-line front end. Four pipelines, each a plain function over a
//! [`RunConfig`] and file paths so they are testable without spawning a
//! process:
//!
//! * `design`   pattern file -> phase-map PGM
//! * `simulate` phase map + display mask -> intensity PGM + metrics report
//! * `grating`  dispersion table + sweep ranges -> CSV + best-point report
//! * `layout`   quantized phase map -> nanobeam JSON/CSV/SVG
//!
//! Every run directory gets `config_resolved.txt` so outputs are fully
//! reproducible; reruns with the same config and seed are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{self, RunConfig};
use crate::design::{assemble_hologram, DesignMode};
use crate::dispersion::DispersionTable;
use crate::error::{Error, Result};
use crate::eye::{conjugate_reconstruct, eye_simulate, Plane, RetinaImage};
use crate::field::wrap;
use crate::geometry::DisplayPattern;
use crate::grating::{design_sweep, sweep_csv};
use crate::io;
use crate::layout::generate_layout;
use crate::metrics::{cell_energies, conjugate_lattice, peak_position, retina_lattice};

#[derive(Parser)]
#[command(
    name = "pbholo",
    version,
    about = "Geometric-phase hologram design and verification for near-eye displays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn mode_arg(s: &str) -> std::result::Result<DesignMode, String> {
    config::parse_mode(s).map_err(|e| e.to_string())
}

fn plane_arg(s: &str) -> std::result::Result<Plane, String> {
    config::parse_plane(s).map_err(|e| e.to_string())
}

fn switch_arg(s: &str) -> std::result::Result<bool, String> {
    config::parse_switch(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
pub enum Command {
    /// Synthesize a hologram phase map from a display pattern
    Design {
        /// Pattern file: ASCII 0/1 grid or 8-bit PGM
        pattern: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// per_cell or full_gs
        #[arg(long, value_parser = mode_arg)]
        mode: Option<DesignMode>,
    },
    /// Propagate a phase map through the eye model and report metrics
    Simulate {
        /// Phase-map PGM written by `design`
        phase: PathBuf,
        /// Display mask: ASCII 0/1 grid or 8-bit PGM
        mask: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Crossed circular analyzer: on or off
        #[arg(long, value_parser = switch_arg)]
        analyzer: Option<bool>,
        /// retina or conjugate
        #[arg(long, value_parser = plane_arg)]
        plane: Option<Plane>,
    },
    /// Sweep nanobeam grating geometries with the rigorous solver
    Grating {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export a quantized phase map as a nanobeam layout
    Layout {
        /// Phase-map PGM written by `design`
        phase: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn prepare_out_dir(out: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    io::write_text(&out.join("config_resolved.txt"), &cfg.resolved())
}

fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Design pipeline: the pattern's side count fixes the cell grid (so a 1x1
/// pattern yields a single full-aperture cell), per_cell encodes every
/// cell, full_gs targets the lit ones.
pub fn cmd_design(cfg: &RunConfig, pattern_file: &Path, out: &Path) -> Result<()> {
    let pattern = io::read_pattern_for_aperture(pattern_file, cfg.aperture)?;
    let mut cfg = cfg.clone();
    cfg.pixels = pattern.side();
    let geom = cfg.system_geometry()?;
    prepare_out_dir(out, &cfg)?;

    let map = assemble_hologram(
        &geom,
        cfg.mode,
        cfg.grid_pitch(),
        cfg.levels,
        &cfg.gs_settings(),
        Some(&pattern),
    )?;
    let phase_path = out.join("phase.pgm");
    io::write_phase_pgm(&map, &phase_path)?;
    println!(
        "design: {0}x{0} pattern, {1}x{1} samples, levels {2}, mode {3}",
        pattern.side(),
        cfg.grid_n,
        cfg.levels,
        if cfg.mode == DesignMode::PerCell { "per_cell" } else { "full_gs" },
    );
    println!("wrote {}", phase_path.display());
    Ok(())
}

fn lit_pixels(mask: &DisplayPattern) -> Vec<(usize, usize)> {
    let mut lit = Vec::new();
    for i in 0..mask.side() {
        for j in 0..mask.side() {
            if mask.is_lit(i, j) {
                lit.push((i, j));
            }
        }
    }
    lit
}

fn simulation_report(
    img: &RetinaImage,
    cfg: &RunConfig,
    mask: &DisplayPattern,
    effective_focal: f64,
) -> Result<String> {
    let geom = cfg.system_geometry_for(mask.side())?;
    let lattice = match img.plane() {
        Plane::Retina => retina_lattice(&geom, cfg.retina_distance),
        Plane::Conjugate => conjugate_lattice(&geom),
    };
    let lit = lit_pixels(mask);
    let unlit: Vec<(usize, usize)> = (0..mask.side())
        .flat_map(|i| (0..mask.side()).map(move |j| (i, j)))
        .filter(|&(i, j)| !mask.is_lit(i, j))
        .collect();
    let lit_fracs = cell_energies(img, &lattice, &lit);
    let unlit_fracs = cell_energies(img, &lattice, &unlit);
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let mean_lit = mean(&lit_fracs);
    let mean_unlit = mean(&unlit_fracs);
    let contrast = if unlit.is_empty() || mean_unlit == 0.0 {
        f64::INFINITY
    } else {
        mean_lit / mean_unlit
    };
    let ((px, py), _) = peak_position(img);

    let mut rep = String::new();
    writeln!(rep, "plane = {}", img.plane().as_str()).unwrap();
    writeln!(rep, "grid_n = {}", img.side()).unwrap();
    writeln!(rep, "pixels = {}", mask.side()).unwrap();
    writeln!(rep, "output_pitch_m = {:.9e}", img.pitch()).unwrap();
    writeln!(rep, "image_lattice_pitch_m = {:.9e}", lattice.cell_pitch()).unwrap();
    writeln!(rep, "image_lattice_span_m = {:.9e}", lattice.span()).unwrap();
    writeln!(rep, "effective_focal_m = {:.9e}", effective_focal).unwrap();
    writeln!(rep, "total_power = {:.9e}", img.total_power()).unwrap();
    writeln!(rep, "cross_power = {:.9e}", img.cross_power()).unwrap();
    writeln!(rep, "co_power = {:.9e}", img.co_power()).unwrap();
    writeln!(rep, "zeroth_order_fraction = {:.9}", img.zeroth_order_fraction()).unwrap();
    writeln!(rep, "peak_x_m = {:.9e}", px).unwrap();
    writeln!(rep, "peak_y_m = {:.9e}", py).unwrap();
    writeln!(rep, "lit_cells = {}", lit.len()).unwrap();
    for (&(i, j), frac) in lit.iter().zip(&lit_fracs) {
        writeln!(rep, "cell[{i},{j}] = {frac:.9}").unwrap();
    }
    writeln!(rep, "mean_lit_fraction = {mean_lit:.9}").unwrap();
    writeln!(rep, "mean_unlit_fraction = {mean_unlit:.9}").unwrap();
    writeln!(rep, "contrast = {contrast:.9}").unwrap();
    Ok(rep)
}

/// Simulation pipeline: retina view through the eye model, or direct
/// conjugate-plane reconstruction.
pub fn cmd_simulate(
    cfg: &RunConfig,
    phase_file: &Path,
    mask_file: &Path,
    out: &Path,
) -> Result<()> {
    let map = io::read_phase_pgm(phase_file)?;
    let aperture = map.pitch() * map.shape().0 as f64;
    if (aperture - cfg.aperture).abs() > map.pitch() {
        return Err(Error::InvalidGeometry {
            context: "simulate",
            message: format!(
                "phase map spans {aperture:e} m but the config aperture is {:e} m",
                cfg.aperture
            ),
        });
    }
    let mask = io::read_pattern_for_aperture(mask_file, cfg.aperture)?;
    prepare_out_dir(out, cfg)?;

    let opts = cfg.eye_sim_options()?;
    let eye = cfg.eye_geometry()?;
    let (img, focal) = match cfg.plane {
        Plane::Retina => (eye_simulate(&map, &mask, &eye, &opts)?, eye.effective_focal()),
        Plane::Conjugate => {
            (conjugate_reconstruct(&map, &mask, cfg.conjugate_distance, &opts)?, f64::NAN)
        }
    };

    let img_path = out.join("intensity.pgm");
    io::write_intensity_pgm(&img, &img_path)?;
    if cfg.png {
        io::write_intensity_png(&img, &out.join("intensity.png"))?;
    }
    let report = simulation_report(&img, cfg, &mask, focal)?;
    io::write_text(&out.join("metrics.txt"), &report)?;
    println!(
        "simulate: plane {}, {} lit cells, zeroth-order fraction {:.6}",
        img.plane().as_str(),
        lit_pixels(&mask).len(),
        img.zeroth_order_fraction(),
    );
    println!("wrote {}", img_path.display());
    Ok(())
}

/// Grating pipeline: full sweep CSV plus a report on the best point.
pub fn cmd_grating(cfg: &RunConfig, out: &Path) -> Result<()> {
    let table = DispersionTable::load(Path::new(&cfg.nk_file))?;
    prepare_out_dir(out, cfg)?;
    let result = design_sweep(
        &cfg.sweep_ranges(),
        &table,
        cfg.n_surround,
        cfg.n_substrate,
        cfg.n_cover,
    )?;
    io::write_text(&out.join("sweep.csv"), &sweep_csv(&result.points))?;

    let best = &result.points[result.best];
    let mut rep = String::new();
    writeln!(rep, "wavelength_nm = {:.3}", best.wavelength * 1e9).unwrap();
    writeln!(rep, "period_nm = {:.3}", best.period * 1e9).unwrap();
    writeln!(rep, "width_nm = {:.3}", best.width * 1e9).unwrap();
    writeln!(rep, "thickness_nm = {:.3}", best.thickness * 1e9).unwrap();
    writeln!(rep, "t_te_abs = {:.9}", best.t_te.norm()).unwrap();
    writeln!(rep, "t_te_phase_rad = {:.9}", best.t_te.arg()).unwrap();
    writeln!(rep, "t_tm_abs = {:.9}", best.t_tm.norm()).unwrap();
    writeln!(rep, "t_tm_phase_rad = {:.9}", best.t_tm.arg()).unwrap();
    writeln!(rep, "dphi_rad = {:.9}", best.dphi).unwrap();
    writeln!(rep, "dphi_minus_pi_rad = {:.9}", wrap(best.dphi - std::f64::consts::PI)).unwrap();
    writeln!(rep, "power_sum_te = {:.9}", best.power_sum_te).unwrap();
    writeln!(rep, "power_sum_tm = {:.9}", best.power_sum_tm).unwrap();
    writeln!(rep, "objective = {:.9}", best.objective).unwrap();
    io::write_text(&out.join("best.txt"), &rep)?;
    println!(
        "grating: {} feasible points, best period {:.1} nm width {:.1} nm thickness {:.1} nm, dphi {:.4} rad",
        result.points.len(),
        best.period * 1e9,
        best.width * 1e9,
        best.thickness * 1e9,
        best.dphi,
    );
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}

/// Layout pipeline: quantized phase map to nanobeam JSON, CSV and SVG.
pub fn cmd_layout(cfg: &RunConfig, phase_file: &Path, out: &Path) -> Result<()> {
    let map = io::read_phase_pgm(phase_file)?;
    prepare_out_dir(out, cfg)?;
    let layout = generate_layout(&map, cfg.unit_cell, cfg.beam_width, cfg.beam_length)?;

    let json_path = out.join("layout.json");
    layout.write_json(&mut create_writer(&json_path)?)?;
    layout.write_csv(&mut create_writer(&out.join("layout.csv"))?)?;
    layout.write_svg(&mut create_writer(&out.join("layout.svg"))?, cfg.svg_decimate)?;

    let mut rep = String::new();
    writeln!(rep, "cells_per_side = {}", layout.cells_per_side()).unwrap();
    writeln!(rep, "beams = {}", layout.beams().len()).unwrap();
    writeln!(rep, "distinct_orientations = {}", layout.orientations().len()).unwrap();
    writeln!(rep, "unit_cell_m = {:e}", layout.unit_cell()).unwrap();
    io::write_text(&out.join("layout_summary.txt"), &rep)?;
    println!(
        "layout: {0}x{0} unit cells, {1} beams, {2} distinct orientations",
        layout.cells_per_side(),
        layout.beams().len(),
        layout.orientations().len(),
    );
    println!("wrote {}", json_path.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design { pattern, config, out, seed, mode } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            cmd_design(&cfg, &pattern, &out)
        }
        Command::Simulate { phase, mask, config, out, seed, analyzer, plane } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(a) = analyzer {
                cfg.analyzer = a;
            }
            if let Some(p) = plane {
                cfg.plane = p;
            }
            cmd_simulate(&cfg, &phase, &mask, &out)
        }
        Command::Grating { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            cmd_grating(&cfg, &out)
        }
        Command::Layout { phase, config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            cmd_layout(&cfg, &phase, &out)
        }
    }
}

/// Process entry point: 0 on success, 2 on input errors, 3 on numerical
/// failures.
pub fn run() -> i32 {
    match dispatch(Cli::parse()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
