//! The `bound` subcommand: tabulate contraction factors and stability
//! constants as a deterministic CSV, one row per swept parameter value.
//!
//! For `thm31` the sweep walks the product-bound exponent `p`; for
//! `thm32` it walks the additive-bound exponent `r` with `rho` held
//! fixed. Each row reports the closed-form transport factor, the
//! coefficient of the summed majorant series, and the reference closed
//! form recorded by the catalog. The last column flags rows where those
//! two constants disagree (`yes`), agree (`no`), or where the series
//! diverges (`divergent`, factor at or above 1).
//!
//! A `.feq` file target produces a single row pricing that document: the
//! eigenfactor (when one exists) and the series multiplier `1/(1 - c)`
//! relating the one-step envelope to the summed series.

use std::fmt::Write as _;
use std::path::Path;

use feq_core::catalog::{
    thm31_factor, thm31_reference_constant, thm31_series_constant, thm32_factor,
    thm32_reference_constant, thm32_series_constant,
};
use feq_core::dsl::parse_spec;
use feq_core::engine::eigenfactor;

use crate::args::exits;
use crate::error::CliError;
use crate::report::fmt_f64;

pub const CSV_HEADER: &str = "param,eigenfactor,series_constant,reference_constant,discrepancy";

/// Relative disagreement beyond which the two closed forms are flagged.
const DISCREPANCY_REL_TOL: f64 = 1e-9;

struct SweepDefaults {
    min: f64,
    max: f64,
    step: f64,
}

fn family_defaults(target: &str) -> SweepDefaults {
    match target {
        "thm31" => SweepDefaults {
            min: 3.0,
            max: 5.0,
            step: 0.5,
        },
        _ => SweepDefaults {
            min: 2.5,
            max: 4.0,
            step: 0.5,
        },
    }
}

/// Inclusive arithmetic progression; empty when `min > max`.
fn sweep_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    for (name, v) in [("--min", min), ("--max", max), ("--step", step)] {
        if !v.is_finite() {
            return Err(CliError::Invalid(format!("{name} must be finite, got {v}")));
        }
    }
    if step <= 0.0 {
        return Err(CliError::Invalid(format!(
            "--step must be positive, got {step}"
        )));
    }
    if min > max {
        return Ok(Vec::new());
    }
    // Slack of half an ulp-scale step so `max` itself survives rounding.
    let count = ((max - min) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return Err(CliError::Invalid(format!(
            "sweep would produce {count} rows; narrow the range or enlarge --step"
        )));
    }
    Ok((0..=count).map(|k| min + k as f64 * step).collect())
}

fn family_row(target: &str, value: f64, rho: f64) -> Result<String, CliError> {
    let (factor, series, reference) = match target {
        "thm31" => (
            thm31_factor(value),
            thm31_series_constant(value),
            thm31_reference_constant(value),
        ),
        _ => {
            if !(rho.is_finite() && rho.abs() < 1.0) {
                return Err(CliError::Invalid(format!(
                    "--rho must satisfy |rho| < 1, got {rho}"
                )));
            }
            (
                thm32_factor(value),
                thm32_series_constant(value),
                thm32_reference_constant(value),
            )
        }
    };
    let row = if factor >= 1.0 {
        format!(
            "{},{},,{},divergent",
            fmt_f64(value),
            fmt_f64(factor),
            fmt_f64(reference)
        )
    } else {
        let disagree = (series - reference).abs() > DISCREPANCY_REL_TOL * reference.abs();
        format!(
            "{},{},{},{},{}",
            fmt_f64(value),
            fmt_f64(factor),
            fmt_f64(series),
            fmt_f64(reference),
            if disagree { "yes" } else { "no" }
        )
    };
    Ok(row)
}

fn file_row(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc = parse_spec(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    Ok(match eigenfactor(&doc.operator, &doc.bound) {
        Some(c) if c < 1.0 => {
            // No catalog normalization to compare against: report the bare
            // series multiplier and leave the reference column empty.
            format!(",{},{},,no", fmt_f64(c), fmt_f64(1.0 / (1.0 - c)))
        }
        Some(c) => format!(",{c},,,divergent"),
        None => ",,,,no".to_string(),
    })
}

pub fn cmd_bound(
    target: &str,
    min: Option<f64>,
    max: Option<f64>,
    step: Option<f64>,
    rho: f64,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    match target {
        "thm31" | "thm32" => {
            let defaults = family_defaults(target);
            let values = sweep_values(
                min.unwrap_or(defaults.min),
                max.unwrap_or(defaults.max),
                step.unwrap_or(defaults.step),
            )?;
            for value in values {
                let _ = writeln!(csv, "{}", family_row(target, value, rho)?);
            }
        }
        path => {
            let _ = writeln!(csv, "{}", file_row(Path::new(path))?);
        }
    }
    match out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| CliError::io(path, e))?,
        None => print!("{csv}"),
    }
    Ok(exits::OK)
}
