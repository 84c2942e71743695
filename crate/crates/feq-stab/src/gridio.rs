//! Grid files: whitespace-separated numeric rows, `2·dim` columns per
//! point (first slot then second slot). Written with shortest round-trip
//! decimal forms, so write-then-read reproduces points bitwise.

use std::fmt::Write as _;
use std::path::Path;

use feq_core::domain::{PairPoint, VectorElement};

use crate::error::CliError;

pub fn read_grid(path: &Path, dim: usize) -> Result<Vec<PairPoint>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let grid_err = |message: String| CliError::Grid {
        path: path.display().to_string(),
        message,
    };
    let mut points = Vec::new();
    for (row_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = row_idx + 1;
        let mut coords = Vec::with_capacity(2 * dim);
        for (col_idx, token) in line.split_whitespace().enumerate() {
            let col = col_idx + 1;
            let value: f64 = token.parse().map_err(|_| {
                grid_err(format!("row {row}, column {col}: invalid number '{token}'"))
            })?;
            if value.is_nan() {
                return Err(grid_err(format!("row {row}, column {col}: value is NaN")));
            }
            if !value.is_finite() {
                return Err(grid_err(format!(
                    "row {row}, column {col}: value is not finite"
                )));
            }
            coords.push(value);
        }
        if coords.len() != 2 * dim {
            return Err(grid_err(format!(
                "row {row}: expected {} columns for dimension {dim}, found {}",
                2 * dim,
                coords.len()
            )));
        }
        let (first, second) = coords.split_at(dim);
        let point = PairPoint::new(
            VectorElement::new(first.to_vec())?,
            VectorElement::new(second.to_vec())?,
        )?;
        points.push(point);
    }
    if points.is_empty() {
        return Err(grid_err("no grid rows found".to_string()));
    }
    Ok(points)
}

pub fn render_grid(grid: &[PairPoint]) -> String {
    let mut out = String::new();
    for point in grid {
        let mut first = true;
        for coord in point.first().coords().iter().chain(point.second().coords()) {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{coord}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn write_grid(path: &Path, grid: &[PairPoint]) -> Result<(), CliError> {
    std::fs::write(path, render_grid(grid)).map_err(|e| CliError::io(path, e))
}
