//! Command implementations behind the `irstd` binary.
//!
//! Data goes to stdout or to the requested files; diagnostics go to
//! stderr. Exit codes: 0 success, 2 usage error, 3 data error.

pub mod args;
pub mod bundle;
mod commands;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use irstd::io::{grid_from_csv, grid_to_csv, load_gray, save_gray, BitDepth, ImageFormat, LevelScaling};
use irstd::GrayImage;
use thiserror::Error;

pub use args::Cli;
pub use commands::run;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<irstd::Error> for CliError {
    fn from(e: irstd::Error) -> Self {
        match e {
            irstd::Error::InvalidParameter(_) | irstd::Error::InvalidWindow(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `path` if given, otherwise to `stdout`.
pub(crate) fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("stdout: {e}"))),
    }
}

/// `base` with `suffix` appended to its file name.
pub(crate) fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `dir/x.pgm` next to its `dir/x.scale.json` sidecar.
pub fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("scale.json")
}

/// Loads a map from a grid CSV (exact) or an image file. An image with a
/// scale sidecar is mapped back to its original range.
pub fn load_map(path: &Path) -> CliResult<GrayImage> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        return Ok(grid_from_csv(&text)?);
    }
    let img = load_gray(path)?;
    let side = sidecar_path(path);
    if side.exists() {
        let text = fs::read_to_string(&side)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", side.display())))?;
        let scaling: LevelScaling = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("bad sidecar {}: {e}", side.display())))?;
        return Ok(scaling.restore(&img));
    }
    Ok(img)
}

/// Writes `<base>.pgm` (16-bit, rescaled), `<base>.scale.json` and the
/// exact `<base>.csv`. Returns the written paths.
pub fn save_map(base: &Path, map: &GrayImage) -> CliResult<Vec<PathBuf>> {
    let pgm = with_suffix(base, ".pgm");
    let csv = with_suffix(base, ".csv");
    let side = sidecar_path(&pgm);
    if let Some(dir) = pgm.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    let scaling = LevelScaling::fit(map);
    save_gray(&pgm, &scaling.quantize(map), ImageFormat::PgmP5, BitDepth::Sixteen)?;
    let json = serde_json::to_string_pretty(&scaling).expect("scaling serializes");
    write_file(&side, json + "\n")?;
    write_file(&csv, grid_to_csv(map))?;
    Ok(vec![pgm, side, csv])
}
