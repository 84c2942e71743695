//! Structured run reports: a JSON document with stable key order, a CSV
//! view of the convergence series, and the human summary printed to
//! standard output.
//!
//! Every verdict string is `PASS`, `FAIL`, or `SKIPPED`, and every `FAIL`
//! section carries a witness point. The timestamp lives in exactly one
//! metadata field (`generated_at`) so reproducibility checks can mask it;
//! everything else is a pure function of the command line and the build.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Coordinates of one grid point: one vector per argument slot (two for
/// pair points, four for quad points).
pub type SlotCoords = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub metadata: Metadata,
    pub warnings: Vec<String>,
    pub operator: OperatorSummary,
    pub rate: Option<RateSummary>,
    pub mu_star: Option<MuStarSection>,
    pub admissibility: Option<AuditSummary>,
    /// Product-bound audit over four-slot tuples (`check --four-point`).
    pub four_point_audit: Option<AuditSummary>,
    pub stability: Option<StabilitySummary>,
    pub residuals: Option<ResidualSection>,
    pub convergence: Option<ConvergenceSection>,
    pub verdicts: VerdictSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Subcommand that produced the report (`demo`, `run`, `check`).
    pub command: String,
    /// Catalog entry name or spec file path.
    pub target: String,
    /// Family parameters the run was instantiated with.
    pub params: BTreeMap<String, f64>,
    pub eta: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub depth_cap: u32,
    pub grid: GridMeta,
    /// The only volatile field; mask it when comparing reports.
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub box_half: f64,
    pub dim: usize,
    /// `default` or the path the grid was read from.
    pub source: String,
    /// Number of points actually used.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub terms: usize,
    pub abs_coef_sum: f64,
    pub all_diagonal: bool,
    /// Factor `c` with `Λμ = c·μ`; absent when the envelope is not an
    /// eigenfunction of the transport.
    pub eigenfactor: Option<f64>,
    /// `Some(c < 1)` when the factor exists, `None` otherwise.
    pub contractive: Option<bool>,
    /// Parameter-range bookkeeping for catalog entries.
    pub hypothesis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    /// Measured per-step delta ratio.
    pub rate: f64,
    /// Number of consecutive increments the ratio was fitted over.
    pub window: usize,
    /// Whether the measurement was normalized by the closed-form factor's
    /// expected decay before fitting.
    pub normalized: bool,
    /// Closed-form factor for comparison, when one exists.
    pub closed_form: Option<f64>,
    /// |rate − closed_form| / closed_form, when a closed form exists.
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStarSection {
    /// True when no eigenfactor exists and the values are measured
    /// partial sums with ratio-certified tails rather than closed forms.
    pub empirical: bool,
    /// Summed series at a unit-norm point (both slots norm 1).
    pub unit_value: f64,
    /// Summed series with both slots at the grid box radius.
    pub box_value: f64,
    pub max_value: f64,
    pub max_point: SlotCoords,
    pub table: Vec<MuRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuRow {
    pub point: SlotCoords,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub grid_size: usize,
    /// Largest defect/envelope ratio over envelope-positive points.
    pub max_ratio: f64,
    /// Envelope-zero points whose defect failed to vanish.
    pub zero_envelope_violations: usize,
    pub seed: u64,
    pub eta: f64,
    pub verdict: String,
    pub witness: Option<SlotCoords>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub grid_size: usize,
    /// Largest `‖f − K‖ − μ*` over the grid (negative: bound holds with
    /// margin everywhere).
    pub max_gap: f64,
    /// Slack allowed on top of μ*: tolerance plus arithmetic allowance.
    pub allowance: f64,
    pub worst_point: Option<SlotCoords>,
    pub verdict: String,
    pub witness: Option<SlotCoords>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSection {
    /// Verdict threshold for the residual maxima.
    pub tolerance: f64,
    /// Number of four-slot probe tuples.
    pub quads: usize,
    /// Largest additivity defect of the limit in the first slot.
    pub additivity_first_max: f64,
    /// Largest additivity defect of the limit in the second slot.
    pub additivity_second_max: f64,
    /// Largest four-point equation residual of the limit.
    pub equation_max: f64,
    pub verdict: String,
    pub witness: Option<SlotCoords>,
    /// Four-slot inequality audit of the perturbed model itself (second
    /// catalog family only).
    pub four_point: Option<FourPointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourPointSummary {
    pub r: f64,
    pub quads: usize,
    /// Smallest `rhs − lhs` over the tuples (negative: violated).
    pub worst_slack: f64,
    /// Largest `lhs/rhs` over tuples with positive right side.
    pub max_ratio: f64,
    pub verdict: String,
    pub witness: Option<SlotCoords>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSection {
    /// Grid point the trace was recorded at (the μ* argmax).
    pub point: SlotCoords,
    pub stop_reason: String,
    /// Number of operator applications performed.
    pub iterations: usize,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `‖Tⁿf − Tⁿ⁺¹f‖` at the trace point; absent when the final step
    /// could not be resolved (divergent runs).
    pub delta: Option<f64>,
    /// Transported envelope at the same level: the certified ceiling for
    /// `delta`.
    pub lambda_bound: f64,
    /// Certified remaining distance to the limit after step `n`.
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub admissibility: String,
    pub stability: String,
    pub residuals: String,
    pub overall: String,
}

pub const PASS: &str = "PASS";
pub const FAIL: &str = "FAIL";
pub const SKIPPED: &str = "SKIPPED";

/// Combine section verdicts: any FAIL fails the run; otherwise any PASS
/// passes it; all-SKIPPED stays SKIPPED.
pub fn overall_verdict(parts: &[&str]) -> String {
    if parts.iter().any(|v| *v == FAIL) {
        FAIL.to_string()
    } else if parts.iter().all(|v| *v == SKIPPED) {
        SKIPPED.to_string()
    } else {
        PASS.to_string()
    }
}

/// Serialize the report as pretty-printed JSON with a trailing newline.
pub fn render_report(report: &StabilityReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Write the JSON report; I/O failures carry the path.
pub fn write_report(report: &StabilityReport, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, render_report(report)).map_err(|e| CliError::io(path, e))
}

/// Read a report back (used by round-trip checks).
pub fn read_report(path: &Path) -> Result<StabilityReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Render the convergence series as CSV: a header plus one data row per
/// recorded level.
pub fn render_convergence_csv(section: &ConvergenceSection) -> String {
    let mut out = String::from("n,delta,lambda_bound,tail\n");
    for row in &section.rows {
        let delta = row.delta.map_or_else(|| "nan".to_string(), fmt_f64);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.n,
            delta,
            fmt_f64(row.lambda_bound),
            fmt_f64(row.tail)
        );
    }
    out
}

/// Shortest decimal form that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Human summary printed to standard output; deterministic (no timestamp).
pub fn print_summary(report: &StabilityReport) {
    let meta = &report.metadata;
    let params = meta
        .params
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} {}{}",
        meta.command,
        meta.target,
        if params.is_empty() {
            String::new()
        } else {
            format!(" ({params})")
        }
    );
    println!(
        "grid: {} points, box {}, dim {}, source {}",
        meta.grid.points, meta.grid.box_half, meta.grid.dim, meta.grid.source
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
    match report.operator.eigenfactor {
        Some(c) => println!(
            "eigenfactor {c} ({})",
            if report.operator.contractive == Some(true) {
                "contractive"
            } else {
                "not contractive"
            }
        ),
        None => println!("eigenfactor absent (empirical tails)"),
    }
    if let Some(rate) = &report.rate {
        match (rate.closed_form, rate.relative_gap) {
            (Some(c), Some(gap)) => println!(
                "measured rate {} (window {}, closed form {c}, relative gap {})",
                rate.rate, rate.window, gap
            ),
            _ => println!("measured rate {} (window {})", rate.rate, rate.window),
        }
    }
    if let Some(mu) = &report.mu_star {
        println!(
            "mu*: unit {}, box {}, max {}{}",
            mu.unit_value,
            mu.box_value,
            mu.max_value,
            if mu.empirical { " (empirical)" } else { "" }
        );
    }
    if let Some(a) = &report.admissibility {
        println!(
            "admissibility {} (max ratio {}, zero-envelope violations {}, {} points)",
            a.verdict, a.max_ratio, a.zero_envelope_violations, a.grid_size
        );
    }
    if let Some(s) = &report.stability {
        println!(
            "stability {} (max gap {}, allowance {}, {} points)",
            s.verdict, s.max_gap, s.allowance, s.grid_size
        );
    }
    if let Some(r) = &report.residuals {
        println!(
            "residuals {} (additivity {} / {}, equation {}, tolerance {}, {} tuples)",
            r.verdict,
            r.additivity_first_max,
            r.additivity_second_max,
            r.equation_max,
            r.tolerance,
            r.quads
        );
        if let Some(fp) = &r.four_point {
            println!(
                "four-point bound {} (worst slack {}, max ratio {}, {} tuples)",
                fp.verdict, fp.worst_slack, fp.max_ratio, fp.quads
            );
        }
    }
    if let Some(c) = &report.convergence {
        println!(
            "convergence: {} after {} iterations",
            c.stop_reason, c.iterations
        );
    }
    println!("overall {}", report.verdicts.overall);
}
