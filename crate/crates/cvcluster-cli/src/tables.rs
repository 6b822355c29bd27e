use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use cvcluster::threshold::{
    SqueezingLevel, ThresholdModel, DEFAULT_ANCHOR_DB, DEFAULT_ANCHOR_MISBIN,
};

use crate::util::{
    check_formats, out_dir, parse_anchor, to_json_string, write_output, CmdResult, ConfigEcho,
    Failure, Format, EXIT_OK,
};

/// The squeezing levels every table includes; user levels are merged in.
const DEFAULT_LEVELS: [f64; 3] = [15.6, 17.4, 20.5];

/// Levels below this sit outside the regime the single-multiplier noise
/// model was calibrated for and get flagged in the output.
const CALIBRATED_FLOOR_DB: f64 = 15.6;

/// Emits the logical-error table of the calibrated misbin model: one row
/// per squeezing level with the squeezed variance, the accumulated noise,
/// and the error probability.
#[derive(Args, Debug)]
pub struct TableArgs {
    /// Output directory (default: $CVCLUSTER_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv])]
    pub format: Vec<Format>,
    /// Extra squeezing levels in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// Calibration anchor as `db:p`, e.g. `20.5:1e-6`.
    #[arg(long, value_parser = parse_anchor)]
    pub anchor: Option<(f64, f64)>,
}

pub fn run(args: TableArgs) -> CmdResult {
    let formats = check_formats(&args.format, &[Format::Csv, Format::Json])?;
    let (anchor_db, anchor_p) = args.anchor.unwrap_or((DEFAULT_ANCHOR_DB, DEFAULT_ANCHOR_MISBIN));
    let model = ThresholdModel::calibrated(SqueezingLevel::from_db(anchor_db)?, anchor_p)?;

    let mut levels: Vec<f64> = DEFAULT_LEVELS.to_vec();
    for &db in &args.levels {
        if !db.is_finite() {
            return Err(Failure(format!("squeezing level must be finite, got {db}")));
        }
        levels.push(db);
    }
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    levels.dedup();

    let table = model.table(&levels)?;
    let notes: Vec<String> = levels
        .iter()
        .filter(|&&db| db < CALIBRATED_FLOOR_DB)
        .map(|&db| {
            format!(
                "{db} dB lies outside the calibrated regime; alternative constructions reach lower thresholds"
            )
        })
        .collect();

    let mut config = ConfigEcho::new("threshold-table");
    config.push("anchor_db", anchor_db);
    config.push("anchor_p", anchor_p);
    config.push("multiplier", model.multiplier());

    let dir = out_dir(args.out);
    for format in formats {
        match format {
            Format::Csv => {
                let mut text = config.csv_header();
                text.push_str(&table.to_csv());
                for note in &notes {
                    let _ = writeln!(text, "# note: {note}");
                }
                write_output(&dir, "threshold_table.csv", &text)?;
            }
            Format::Json => {
                let value = serde_json::json!({
                    "config": config.json_value(),
                    "calibration": {
                        "anchor_db": table.anchor_db,
                        "anchor_misbin": table.anchor_misbin,
                        "multiplier": table.multiplier,
                    },
                    "rows": table.rows,
                    "notes": notes,
                });
                write_output(&dir, "threshold_table.json", &to_json_string(&value))?;
            }
            _ => unreachable!("rejected by check_formats"),
        }
    }

    for row in &table.rows {
        println!("{} dB: p_err = {}", row.db, row.p_err);
    }
    Ok(EXIT_OK)
}
