//! Quantitative checks on simulated images: where the spots should land
//! and how much power each one collects.

use crate::eye::RetinaImage;
use crate::geometry::SystemGeometry;

/// Geometric image of the display lattice in an output plane. The retina
/// image is inverted (negative scale), the conjugate virtual image upright.
#[derive(Debug, Clone, Copy)]
pub struct ImageLattice {
    scale: f64,
    cells: usize,
    pixel_size: f64,
    aperture: f64,
}

impl ImageLattice {
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Imaged pixel pitch (spot spacing).
    pub fn cell_pitch(&self) -> f64 {
        self.scale.abs() * self.pixel_size
    }

    /// Expected spot position for display pixel (i, j), as (x, y).
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        let x = (j as f64 + 0.5) * self.pixel_size - 0.5 * self.aperture;
        let y = (i as f64 + 0.5) * self.pixel_size - 0.5 * self.aperture;
        (self.scale * x, self.scale * y)
    }

    /// Center-to-center span of the outermost spots, per axis.
    pub fn span(&self) -> f64 {
        self.cell_pitch() * (self.cells - 1) as f64
    }
}

/// Spot lattice on the retina: inverted, scaled by Mag * d_retina / d_c.
pub fn retina_lattice(geom: &SystemGeometry, retina_distance: f64) -> ImageLattice {
    ImageLattice {
        scale: -geom.magnification * retina_distance / geom.conjugate_distance,
        cells: geom.pixels,
        pixel_size: geom.pixel_size,
        aperture: geom.aperture,
    }
}

/// Spot lattice in the conjugate plane: upright, scaled by Mag.
pub fn conjugate_lattice(geom: &SystemGeometry) -> ImageLattice {
    ImageLattice {
        scale: geom.magnification,
        cells: geom.pixels,
        pixel_size: geom.pixel_size,
        aperture: geom.aperture,
    }
}

fn coord_to_index(img: &RetinaImage, coord: f64) -> i64 {
    (coord / img.pitch() + (img.side() / 2) as f64).ceil() as i64
}

/// Fraction of the image's total power inside a square box of side
/// `box_size` centered on `center` (half-open in each coordinate).
pub fn cell_energy_fraction(img: &RetinaImage, center: (f64, f64), box_size: f64) -> f64 {
    let total: f64 = img.intensity().iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    box_energy(img, center, box_size) / total
}

fn box_energy(img: &RetinaImage, center: (f64, f64), box_size: f64) -> f64 {
    let n = img.side() as i64;
    let half = 0.5 * box_size;
    let clamp = |v: i64| v.clamp(0, n) as usize;
    let c0 = clamp(coord_to_index(img, center.0 - half));
    let c1 = clamp(coord_to_index(img, center.0 + half));
    let r0 = clamp(coord_to_index(img, center.1 - half));
    let r1 = clamp(coord_to_index(img, center.1 + half));
    let mut sum = 0.0;
    for r in r0..r1 {
        for c in c0..c1 {
            sum += img.intensity()[[r, c]];
        }
    }
    sum
}

/// Per-lit-pixel share of total image power, each integrated over one
/// lattice cell around the expected spot. Entries follow `pixels` order.
pub fn cell_energies(
    img: &RetinaImage,
    lattice: &ImageLattice,
    pixels: &[(usize, usize)],
) -> Vec<f64> {
    let total: f64 = img.intensity().iter().sum();
    pixels
        .iter()
        .map(|&(i, j)| {
            if total <= 0.0 {
                0.0
            } else {
                box_energy(img, lattice.position(i, j), lattice.cell_pitch()) / total
            }
        })
        .collect()
}

/// Brightest sample, refined to sub-pixel (x, y) by a separable 3-point
/// parabolic fit. Returns ((x, y), peak value).
pub fn peak_position(img: &RetinaImage) -> ((f64, f64), f64) {
    let data = img.intensity();
    let n = img.side();
    let mut best = (0usize, 0usize);
    let mut best_val = f64::NEG_INFINITY;
    for r in 0..n {
        for c in 0..n {
            if data[[r, c]] > best_val {
                best_val = data[[r, c]];
                best = (r, c);
            }
        }
    }
    let refine = |lo: f64, mid: f64, hi: f64| -> f64 {
        let denom = lo - 2.0 * mid + hi;
        if denom < 0.0 {
            (0.5 * (lo - hi) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let (r, c) = best;
    let dr = if r > 0 && r + 1 < n {
        refine(data[[r - 1, c]], data[[r, c]], data[[r + 1, c]])
    } else {
        0.0
    };
    let dc = if c > 0 && c + 1 < n {
        refine(data[[r, c - 1]], data[[r, c]], data[[r, c + 1]])
    } else {
        0.0
    };
    let x = img.coord(c) + dc * img.pitch();
    let y = img.coord(r) + dr * img.pitch();
    ((x, y), best_val)
}

/// Up to `count` strict 3x3 local maxima, brightest first, each at least
/// `min_separation` (Euclidean) from every brighter one kept.
pub fn local_maxima(img: &RetinaImage, count: usize, min_separation: f64) -> Vec<(f64, f64, f64)> {
    let data = img.intensity();
    let n = img.side();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for r in 1..n - 1 {
        for c in 1..n - 1 {
            let v = data[[r, c]];
            if v <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'probe: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let w = data[[(r as i64 + dr) as usize, (c as i64 + dc) as usize]];
                    if w >= v {
                        is_max = false;
                        break 'probe;
                    }
                }
            }
            if is_max {
                candidates.push((v, r, c));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut kept: Vec<(f64, f64, f64)> = Vec::new();
    for (v, r, c) in candidates {
        let (x, y) = (img.coord(c), img.coord(r));
        let clear = kept
            .iter()
            .all(|&(kx, ky, _)| ((x - kx).powi(2) + (y - ky).powi(2)).sqrt() >= min_separation);
        if clear {
            kept.push((x, y, v));
            if kept.len() == count {
                break;
            }
        }
    }
    kept
}
