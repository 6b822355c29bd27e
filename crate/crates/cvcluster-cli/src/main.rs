//! Command-line driver for the cvcluster toolkit.
//!
//! Five subcommands cover the toolkit's experiments: `kappa-sweep` certifies
//! that outcome-averaged teleported channels do not depend on the resource
//! anti-squeezing, `threshold-table` prints the calibrated logical-error
//! table, `delete-check` verifies exact node deletion on cluster lattices,
//! `ellipse-plot` draws squeezed-thermal uncertainty ellipses, and
//! `gate-demo` traces a single teleported gate step by step.
//!
//! Exit codes are a stable contract: 0 on success, 2 when a numerical
//! invariant the command checks is breached, 3 on configuration errors.
//! All outputs are byte-deterministic for a fixed configuration and seed,
//! and every file embeds the configuration that produced it.

mod deletecheck;
mod demo;
mod ellipse;
mod sweep;
mod tables;
mod util;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "cvcluster",
    version,
    about = "Simulation toolkit for cluster-state computation with impure squeezed modes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify that outcome-averaged channels ignore anti-squeezing.
    KappaSweep(sweep::SweepArgs),
    /// Emit the calibrated squeezing-to-error table.
    ThresholdTable(tables::TableArgs),
    /// Verify exact node deletion against never-attached references.
    DeleteCheck(deletecheck::DeleteArgs),
    /// Draw 1-sigma uncertainty ellipses of squeezed-thermal states.
    EllipsePlot(ellipse::EllipseArgs),
    /// Trace one teleported gate with sampled outcomes.
    GateDemo(demo::DemoArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors; everything else is
            // a configuration problem.
            let code = if err.use_stderr() { util::EXIT_CONFIG } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    let result = match cli.command {
        Command::KappaSweep(args) => sweep::run(args),
        Command::ThresholdTable(args) => tables::run(args),
        Command::DeleteCheck(args) => deletecheck::run(args),
        Command::EllipsePlot(args) => ellipse::run(args),
        Command::GateDemo(args) => demo::run(args),
    };

    match result {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            std::process::exit(util::EXIT_CONFIG);
        }
    }
}
