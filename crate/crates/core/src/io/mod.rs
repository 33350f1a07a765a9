//! File formats: run configuration, curve/report CSV, calibration model files
//! and SVG plots.

pub mod config;
pub mod csv;
pub mod svg;

use std::fs;
use std::path::Path;

use crate::calibration::CalibrationModel;
use crate::error::{Error, Result};

pub use config::{ChainSpec, LinkSpec, MountSpec, RunConfig};
pub use csv::{curve_csv, parse_curve_csv, read_curve_csv, shape_csv, sweep_csv, write_curve_csv, xy_csv};
pub use svg::{emit_plot, plot_curves, plot_outline, plot_shape};

/// Formats `x` rounded to 9 significant digits, in shortest plain form.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_model(model: &CalibrationModel, path: &Path) -> Result<()> {
    write_text(path, &model.to_toml_string())
}

pub fn load_model(path: &Path) -> Result<CalibrationModel> {
    CalibrationModel::from_toml_str(&read_text(path)?)
}
