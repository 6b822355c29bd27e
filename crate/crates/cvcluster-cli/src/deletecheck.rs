use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use cvcluster::cluster::{FlowerbedGraph, NodeKind};
use cvcluster::gaussian::SqueezedThermalSpec;
use cvcluster::Error;

use crate::util::{
    check_formats, out_dir, resolve_s, to_json_string, write_output, CmdResult, ConfigEcho,
    Failure, Format, EXIT_BREACH, EXIT_OK,
};

/// Checks node deletion on freshly built lattices: after measuring a node's
/// position and applying the outcome-proportional corrections, the survivors
/// must match a lattice built without that node to within the tolerance,
/// for every node choice and sampled outcome. Also confirms that deleting a
/// pinned (input-marked) node is rejected. Exits 2 on any deviation.
#[derive(Args, Debug)]
pub struct DeleteArgs {
    /// Seed for node choices and measurement outcomes.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (default: $CVCLUSTER_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Json])]
    pub format: Vec<Format>,
    /// Lattice rows.
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    /// Lattice columns.
    #[arg(long, default_value_t = 3)]
    pub cols: usize,
    /// Number of delete-and-compare trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Squeezing in dB (sets s = 10^(dB/20)).
    #[arg(long, conflicts_with = "s")]
    pub squeeze_db: Option<f64>,
    /// Squeezing factor s >= 1.
    #[arg(long)]
    pub s: Option<f64>,
    /// Additional anti-squeezing of the resource modes.
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    /// Bound on the post-deletion deviation from the reference lattice.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
struct Trial {
    trial: usize,
    node: usize,
    outcome: f64,
    cov_deviation: f64,
    mean_deviation: f64,
}

pub fn run(args: DeleteArgs) -> CmdResult {
    let formats = check_formats(&args.format, &[Format::Csv, Format::Json])?;
    if args.trials == 0 {
        return Err(Failure("trials must be at least 1".into()));
    }
    if !(args.tolerance > 0.0) {
        return Err(Failure(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    let s = resolve_s(args.squeeze_db, args.s, 1.78);
    let resource = SqueezedThermalSpec::new(s, args.delta)?;

    let mut config = ConfigEcho::new("delete-check");
    config.push("seed", args.seed);
    config.push("rows", args.rows);
    config.push("cols", args.cols);
    config.push("trials", args.trials);
    config.push("s", s);
    config.push("delta", args.delta);
    config.push("tolerance", args.tolerance);

    let n_nodes = args.rows * args.cols;
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut trials = Vec::with_capacity(args.trials);
    let (mut max_cov, mut max_mean) = (0.0f64, 0.0f64);

    for trial in 0..args.trials {
        let mut graph = FlowerbedGraph::build(args.rows, args.cols, resource)?;
        let node = rng.random_range(0..n_nodes);
        let record = graph.delete_node(node, &mut rng)?;
        let reference = FlowerbedGraph::build_without(args.rows, args.cols, resource, node)?;

        let cov_deviation = (graph.state().cov() - reference.state().cov())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mean_deviation = (graph.state().mean() - reference.state().mean())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        max_cov = max_cov.max(cov_deviation);
        max_mean = max_mean.max(mean_deviation);
        trials.push(Trial {
            trial,
            node,
            outcome: record.outcome.values[0],
            cov_deviation,
            mean_deviation,
        });
    }

    // The rejection path: marking a node as an input must make it
    // undeletable.
    let mut pinned = FlowerbedGraph::build(args.rows, args.cols, resource)?;
    pinned.set_kind(0, NodeKind::Input)?;
    let rejection_exercised = matches!(
        pinned.delete_node_with_outcome(0, 0.0),
        Err(Error::NodeNotDeletable { node: 0, .. })
    );

    let pass = max_cov < args.tolerance && max_mean < args.tolerance && rejection_exercised;

    let dir = out_dir(args.out);
    for format in formats {
        match format {
            Format::Csv => {
                let mut text = config.csv_header();
                text.push_str("trial,node,outcome,cov_deviation,mean_deviation\n");
                for t in &trials {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{}",
                        t.trial, t.node, t.outcome, t.cov_deviation, t.mean_deviation
                    );
                }
                let _ = writeln!(
                    text,
                    "# summary max_cov_deviation={max_cov} max_mean_deviation={max_mean} \
                     rejection_path_exercised={rejection_exercised} pass={pass}"
                );
                write_output(&dir, "delete_check.csv", &text)?;
            }
            Format::Json => {
                let value = serde_json::json!({
                    "config": config.json_value(),
                    "trials": trials,
                    "max_cov_deviation": max_cov,
                    "max_mean_deviation": max_mean,
                    "rejection_path_exercised": rejection_exercised,
                    "pass": pass,
                });
                write_output(&dir, "delete_check.json", &to_json_string(&value))?;
            }
            _ => unreachable!("rejected by check_formats"),
        }
    }

    println!(
        "{} trials on a {}x{} lattice: max cov deviation {}, max mean deviation {}",
        args.trials, args.rows, args.cols, max_cov, max_mean
    );
    if !pass {
        eprintln!(
            "invariant breach: deviation above {} or rejection path not exercised",
            args.tolerance
        );
        return Ok(EXIT_BREACH);
    }
    Ok(EXIT_OK)
}
