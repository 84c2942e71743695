//! Command-line front end for the direct-iteration stability engine:
//! demo runs of the built-in operator families, generic runs from `.feq`
//! documents, envelope audits, parameter sweeps, and machine-readable
//! reports.
//!
//! Exit codes: 0 all verdicts pass; 1 a verdict failed or an
//! operational error occurred; 2 the transport is not contractive
//! (closed-form factor at or above 1, or measured divergence); 3 the
//! admissibility audit failed; 4 a `.feq` document did not parse; 64
//! command-line usage error.

pub mod args;
pub mod error;
pub mod gridio;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use args::{exits, Cli, Command};
pub use error::CliError;

/// Route a parsed command line to its pipeline; returns the process exit
/// code.
pub fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Demo {
            name,
            entry,
            model,
            grid,
            engine,
            output,
        } => pipeline::cmd_demo(name, &entry, &model, &grid, &engine, &output),
        Command::Run {
            spec,
            model,
            grid,
            engine,
            output,
        } => pipeline::cmd_run(&spec, &model, &grid, &engine, &output),
        Command::Bound {
            target,
            min,
            max,
            step,
            rho,
            out,
        } => sweep::cmd_bound(&target, min, max, step, rho, out.as_deref()),
        Command::Check {
            target,
            entry,
            model,
            grid,
            four_point,
            out,
        } => pipeline::cmd_check(&target, &entry, &model, &grid, four_point, out.as_deref()),
        Command::ExportSpec { name, entry, out } => {
            pipeline::cmd_export(name, &entry, out.as_deref())
        }
    }
}
