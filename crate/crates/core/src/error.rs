use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the toolkit. Exit-code policy: invalid input or
/// geometry maps to 2, numerical failures map to 3 (see [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("phase value is not finite: {0}")]
    NonFinitePhase(f64),

    #[error("quantization level count must be >= 2, got {0}")]
    BadLevelCount(u32),

    #[error("{context}: {message}")]
    InvalidGeometry { context: &'static str, message: String },

    #[error("transmission coefficient |{which}| = {magnitude:.6} exceeds 1 (element must be passive)")]
    NonPassiveElement { which: &'static str, magnitude: f64 },

    #[error("dispersion table {path:?}: {message}")]
    DispersionParse { path: PathBuf, message: String },

    #[error(
        "wavelength {wavelength_nm:.1} nm outside table range [{min_nm:.1}, {max_nm:.1}] nm"
    )]
    WavelengthOutOfRange { wavelength_nm: f64, min_nm: f64, max_nm: f64 },

    #[error("display pattern {path:?}: {message}")]
    PatternParse { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error(
        "grid of {grid_n} samples undersamples the cell-edge fringe: pitch {pitch_nm:.1} nm > limit {limit_nm:.1} nm (need >= {required_n} samples)"
    )]
    Undersampled { grid_n: usize, pitch_nm: f64, limit_nm: f64, required_n: usize },

    #[error("grid of {grid_n} samples does not tile {cells}x{cells} cells: {message}")]
    NonTilingGrid { grid_n: usize, cells: usize, message: String },

    #[error(
        "angular-spectrum step of {dz_mm:.3} mm is alias-unsafe on this grid: band limit {limit_frac:.4} of Nyquist < 0.05 (pad to >= {required_n} samples per side)"
    )]
    AliasUnsafe { dz_mm: f64, limit_frac: f64, required_n: usize },

    #[error("single-transform Fresnel propagation requires dz > 0, got {0:.6e} m")]
    NonForwardFresnel(f64),

    #[error("field is not square with even side: {rows}x{cols}")]
    BadFieldShape { rows: usize, cols: usize },

    #[error("Gerchberg-Saxton target has no power")]
    EmptyTarget,

    #[error("layout requires a quantized phase map (levels > 0)")]
    UnquantizedLayout,

    #[error(
        "beam {width_nm:.0} x {length_nm:.0} nm does not fit the {unit_cell_nm:.0} nm unit cell under any rotation (diagonal {diagonal_nm:.1} nm)"
    )]
    BeamDoesNotFit { width_nm: f64, length_nm: f64, unit_cell_nm: f64, diagonal_nm: f64 },

    #[error("design sweep produced no candidates")]
    EmptySweep,

    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported file format for {path:?}: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("{path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png encode: {0}")]
    Png(String),
}

impl Error {
    /// CLI exit code: 2 for invalid input/geometry, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AliasUnsafe { .. }
            | Error::Lapack { .. }
            | Error::Numerical(_)
            | Error::EmptySweep => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
