use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cvcluster::cluster;
use cvcluster::gaussian::{GaussianState, SqueezedThermalSpec};

use crate::util::{
    check_formats, out_dir, resolve_s, to_json_string, write_output, CmdResult, ConfigEcho,
    Failure, Format, EXIT_OK,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GateChoice {
    OneMode,
    TwoMode,
}

/// Runs one teleported gate on a vacuum input with sampled measurement
/// outcomes and writes the full trace: the resource used, each outcome with
/// its density, the corrections applied, the conditioned final state, and
/// the outcome-averaged channel reference the conditioned run scatters
/// around.
#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Seed for the measurement outcomes.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output directory (default: $CVCLUSTER_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Json])]
    pub format: Vec<Format>,
    /// Which teleported gate to run.
    #[arg(long, value_enum, default_value_t = GateChoice::OneMode)]
    pub gate: GateChoice,
    /// Shear bit of the one-mode gate: 0 teleports the Fourier gate alone,
    /// 1 the Fourier-plus-shear generator.
    #[arg(long, default_value_t = 1)]
    pub shear_bit: u8,
    /// Squeezing in dB (sets s = 10^(dB/20)).
    #[arg(long, conflicts_with = "s")]
    pub squeeze_db: Option<f64>,
    /// Squeezing factor s >= 1.
    #[arg(long)]
    pub s: Option<f64>,
    /// Additional anti-squeezing of the resource modes.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Also embed the full averaged output state, not just its moments.
    #[arg(long)]
    pub average: bool,
}

fn moments_json(state: &GaussianState) -> serde_json::Value {
    serde_json::json!({
        "mean": state.mean().iter().copied().collect::<Vec<f64>>(),
        "cov_diag": (0..2 * state.n_modes())
            .map(|i| state.cov()[(i, i)])
            .collect::<Vec<f64>>(),
    })
}

pub fn run(args: DemoArgs) -> CmdResult {
    let formats = check_formats(&args.format, &[Format::Json])?;
    if args.shear_bit > 1 {
        return Err(Failure(format!(
            "shear bit must be 0 or 1, got {}",
            args.shear_bit
        )));
    }
    let s = resolve_s(args.squeeze_db, args.s, 1.78);
    let resource = SqueezedThermalSpec::new(s, args.delta)?;
    let m = f64::from(args.shear_bit);
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);

    let (gate_name, input, final_state, record, averaged) = match args.gate {
        GateChoice::OneMode => {
            let input = GaussianState::vacuum(1)?;
            let (state, record) = cluster::one_mode_gate_sampled(&input, 0, m, resource, &mut rng)?;
            let averaged = cluster::one_mode_gate_averaged(&input, 0, m, resource)?;
            ("one-mode", input, state, record, averaged)
        }
        GateChoice::TwoMode => {
            let input = GaussianState::vacuum(2)?;
            let (state, record) = cluster::two_mode_gate_sampled(&input, 0, 1, resource, &mut rng)?;
            let averaged = cluster::two_mode_gate_averaged(&input, 0, 1, resource)?;
            ("two-mode", input, state, record, averaged)
        }
    };

    let mut config = ConfigEcho::new("gate-demo");
    config.push("seed", args.seed);
    config.push("gate", gate_name);
    config.push("shear_bit", args.shear_bit);
    config.push("s", s);
    config.push("delta", args.delta);
    config.push("average", args.average);

    let mut value = serde_json::json!({
        "config": config.json_value(),
        "gate": gate_name,
        "input_state": input,
        "trace": record,
        "final_state": final_state,
        "final_moments": moments_json(&final_state),
        "averaged_reference_moments": moments_json(&averaged),
    });
    if args.average {
        value["averaged_state"] = serde_json::to_value(&averaged).expect("state serializes");
    }

    let dir = out_dir(args.out);
    for format in formats {
        match format {
            Format::Json => {
                write_output(&dir, "gate_demo.json", &to_json_string(&value))?;
            }
            _ => unreachable!("rejected by check_formats"),
        }
    }

    for outcome in &record.outcomes {
        println!(
            "measured mode {} -> {} (density {})",
            outcome.mode, outcome.values[0], outcome.density
        );
    }
    for correction in &record.corrections {
        println!(
            "correction on mode {}: {:?} shift {}",
            correction.mode, correction.quadrature, correction.amount
        );
    }
    Ok(EXIT_OK)
}
