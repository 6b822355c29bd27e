use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use cvcluster::cluster;
use cvcluster::gaussian::{random_physical_state, GaussianState, SqueezedThermalSpec};
use cvcluster::grid::{
    gkp_zero, one_mode_gate_averaged_grid, GridSpec, GridWigner, OutcomeAverageOptions,
};

use crate::util::{
    check_formats, out_dir, resolve_s, to_json_string, write_output, CmdResult, ConfigEcho,
    Failure, Format, EXIT_BREACH, EXIT_OK,
};

const DELTAS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
const GKP_DELTA: f64 = 0.25;
const CONTROL_OUTCOME: f64 = 0.8;
const MC_TOLERANCE: f64 = 0.05;
const CONTROL_FLOOR: f64 = 0.01;

/// Runs the outcome-averaged one-mode channel along the anti-squeezing
/// sweep δ ∈ {0, 0.5, 1, 2, 4} on every route (exact covariance averaging,
/// Monte-Carlo over sampled outcomes, and the phase-space grid with both a
/// Gaussian and an approximate-GKP input), and checks that the results do
/// not move with δ. A conditioned single-outcome control column must move,
/// or the sweep would prove nothing. Exits 2 on any breach.
#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Seed for the random input state and outcome sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (default: $CVCLUSTER_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output encodings; `bin` exports the averaged grids themselves.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv])]
    pub format: Vec<Format>,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 128)]
    pub grid_n: usize,
    /// Grid half-extent in quadrature units.
    #[arg(long, default_value_t = 8.0)]
    pub grid_l: f64,
    /// Squeezing in dB (sets s = 10^(dB/20)).
    #[arg(long, conflicts_with = "s")]
    pub squeeze_db: Option<f64>,
    /// Squeezing factor s >= 1.
    #[arg(long)]
    pub s: Option<f64>,
    /// Shear parameter of the teleported gate.
    #[arg(long, default_value_t = 0.0)]
    pub shear_m: f64,
    /// Bound on the cross-delta deviation of the covariance route.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Monte-Carlo sample count per delta.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    path: &'static str,
    input: &'static str,
    delta: f64,
    mean_q: f64,
    mean_p: f64,
    var_q: f64,
    var_p: f64,
    cov_qp: f64,
}

#[derive(Clone, Debug, Serialize)]
struct Summary {
    path: &'static str,
    input: &'static str,
    /// `max`: deviation must stay under `bound`; `min`: it must exceed it.
    kind: &'static str,
    deviation: f64,
    bound: f64,
    pass: bool,
}

fn state_moments(state: &GaussianState) -> [f64; 5] {
    [
        state.mean()[0],
        state.mean()[1],
        state.cov()[(0, 0)],
        state.cov()[(1, 1)],
        state.cov()[(0, 1)],
    ]
}

fn row(path: &'static str, input: &'static str, delta: f64, m: [f64; 5]) -> SweepRow {
    SweepRow {
        path,
        input,
        delta,
        mean_q: m[0],
        mean_p: m[1],
        var_q: m[2],
        var_p: m[3],
        cov_qp: m[4],
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn moment_gap(a: [f64; 5], b: [f64; 5]) -> f64 {
    max_abs((0..5).map(|i| a[i] - b[i]))
}

/// Relative gap: per component, |a − b| / max(1, |b|).
fn relative_gap(a: [f64; 5], b: [f64; 5]) -> f64 {
    max_abs((0..5).map(|i| (a[i] - b[i]) / b[i].abs().max(1.0)))
}

pub fn run(args: SweepArgs) -> CmdResult {
    let formats = check_formats(&args.format, &[Format::Csv, Format::Json, Format::Bin])?;
    let s = resolve_s(args.squeeze_db, args.s, 1.78);
    if !(args.tolerance > 0.0) {
        return Err(Failure(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    let spec = GridSpec::new(args.grid_n, args.grid_l)?;
    let grid_tol = if args.grid_n >= 256 { 1e-4 } else { 5e-4 };

    let mut config = ConfigEcho::new("kappa-sweep");
    config.push("seed", args.seed);
    config.push("s", s);
    config.push("shear_m", args.shear_m);
    config.push("grid_n", args.grid_n);
    config.push("grid_l", args.grid_l);
    config.push("samples", args.samples);
    config.push("deltas", "0,0.5,1,2,4");
    config.push("tolerance_covariance", args.tolerance);
    config.push("tolerance_monte_carlo", MC_TOLERANCE);
    config.push("tolerance_grid", grid_tol);
    config.push("control_floor", CONTROL_FLOOR);

    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let input = random_physical_state(&mut rng, 1)?;
    let vacuum_grid = GridWigner::discretize(spec, &GaussianState::vacuum(1)?)?;
    let gkp_grid = gkp_zero(spec, GKP_DELTA)?;
    let opts = OutcomeAverageOptions::default();

    let mut rows = Vec::new();
    let mut covariance = Vec::new();
    let mut monte_carlo = Vec::new();
    let mut grids_vacuum = Vec::new();
    let mut grids_gkp = Vec::new();
    let mut control = Vec::new();

    for (i, &delta) in DELTAS.iter().enumerate() {
        let resource = SqueezedThermalSpec::new(s, delta)?;

        let averaged = cluster::one_mode_gate_averaged(&input, 0, args.shear_m, resource)?;
        covariance.push(state_moments(&averaged));
        rows.push(row("covariance-averaged", "random-gaussian", delta, covariance[i]));

        let mc = cluster::one_mode_gate_monte_carlo(
            &input,
            0,
            args.shear_m,
            resource,
            args.samples,
            args.seed.wrapping_add(1000 + i as u64),
        )?;
        monte_carlo.push(state_moments(&mc));
        rows.push(row("monte-carlo", "random-gaussian", delta, monte_carlo[i]));

        let (vac_out, _) =
            one_mode_gate_averaged_grid(&vacuum_grid, args.shear_m, resource, &opts)?;
        let vm = vac_out.moments()?;
        rows.push(row(
            "grid-averaged",
            "vacuum",
            delta,
            [vm.mean_q, vm.mean_p, vm.var_q, vm.var_p, vm.cov_qp],
        ));
        grids_vacuum.push(vac_out);

        let (gkp_out, _) = one_mode_gate_averaged_grid(&gkp_grid, args.shear_m, resource, &opts)?;
        let gm = gkp_out.moments()?;
        rows.push(row(
            "grid-averaged",
            "gkp",
            delta,
            [gm.mean_q, gm.mean_p, gm.var_q, gm.var_p, gm.cov_qp],
        ));
        grids_gkp.push(gkp_out);

        let (conditioned, _) =
            cluster::one_mode_gate_conditioned(&input, 0, args.shear_m, resource, CONTROL_OUTCOME)?;
        control.push(state_moments(&conditioned));
        rows.push(row(
            "conditioned-control",
            "random-gaussian",
            delta,
            control[i],
        ));
    }

    // Deviations are measured against the δ = 0 run of the same route.
    let cov_dev = max_abs(
        covariance[1..]
            .iter()
            .map(|m| moment_gap(*m, covariance[0])),
    );
    let mc_dev = (0..DELTAS.len())
        .map(|i| relative_gap(monte_carlo[i], covariance[i]))
        .fold(0.0f64, f64::max);
    let grid_dev = |grids: &[GridWigner]| -> cvcluster::Result<f64> {
        let mut worst = 0.0f64;
        for grid in &grids[1..] {
            worst = worst.max(grids[0].compare(grid)?.l_inf);
        }
        Ok(worst)
    };
    let vac_dev = grid_dev(&grids_vacuum)?;
    let gkp_dev = grid_dev(&grids_gkp)?;
    let control_dev = max_abs(control[1..].iter().map(|m| moment_gap(*m, control[0])));

    let summaries = vec![
        Summary {
            path: "covariance-averaged",
            input: "random-gaussian",
            kind: "max",
            deviation: cov_dev,
            bound: args.tolerance,
            pass: cov_dev < args.tolerance,
        },
        Summary {
            path: "monte-carlo",
            input: "random-gaussian",
            kind: "max",
            deviation: mc_dev,
            bound: MC_TOLERANCE,
            pass: mc_dev < MC_TOLERANCE,
        },
        Summary {
            path: "grid-averaged",
            input: "vacuum",
            kind: "max",
            deviation: vac_dev,
            bound: grid_tol,
            pass: vac_dev < grid_tol,
        },
        Summary {
            path: "grid-averaged",
            input: "gkp",
            kind: "max",
            deviation: gkp_dev,
            bound: grid_tol,
            pass: gkp_dev < grid_tol,
        },
        Summary {
            path: "conditioned-control",
            input: "random-gaussian",
            kind: "min",
            deviation: control_dev,
            bound: CONTROL_FLOOR,
            pass: control_dev > CONTROL_FLOOR,
        },
    ];

    let dir = out_dir(args.out);
    for format in formats {
        match format {
            Format::Csv => {
                let mut text = config.csv_header();
                text.push_str("path,input,delta,mean_q,mean_p,var_q,var_p,cov_qp\n");
                for r in &rows {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{},{},{},{}",
                        r.path, r.input, r.delta, r.mean_q, r.mean_p, r.var_q, r.var_p, r.cov_qp
                    );
                }
                for s in &summaries {
                    let _ = writeln!(
                        text,
                        "# summary path={} input={} kind={} deviation={} bound={} pass={}",
                        s.path, s.input, s.kind, s.deviation, s.bound, s.pass
                    );
                }
                write_output(&dir, "kappa_sweep.csv", &text)?;
            }
            Format::Json => {
                let value = serde_json::json!({
                    "config": config.json_value(),
                    "rows": rows,
                    "summaries": summaries,
                });
                write_output(&dir, "kappa_sweep.json", &to_json_string(&value))?;
            }
            Format::Bin => {
                std::fs::create_dir_all(&dir)?;
                for (grids, input_name) in [(&grids_vacuum, "vacuum"), (&grids_gkp, "gkp")] {
                    for (grid, &delta) in grids.iter().zip(DELTAS.iter()) {
                        let name = format!("kappa_sweep_{input_name}_delta{delta}.wig");
                        let path = dir.join(&name);
                        grid.save(&path)?;
                        println!("wrote {}", path.display());
                    }
                }
            }
            Format::Svg => unreachable!("rejected by check_formats"),
        }
    }

    let mut failed = false;
    for s in &summaries {
        let verdict = if s.pass { "ok" } else { "BREACH" };
        println!(
            "{}: {} ({}) deviation {} vs bound {} [{}]",
            verdict, s.path, s.input, s.deviation, s.bound, s.kind
        );
        if !s.pass {
            failed = true;
            eprintln!(
                "invariant breach: {} ({}) deviation {} violates {} bound {}",
                s.path, s.input, s.deviation, s.kind, s.bound
            );
        }
    }
    Ok(if failed { EXIT_BREACH } else { EXIT_OK })
}
