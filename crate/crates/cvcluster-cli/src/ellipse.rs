use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use cvcluster::gaussian::SqueezedThermalSpec;

use crate::util::{
    check_formats, out_dir, parse_state_pair, to_json_string, write_output, CmdResult, ConfigEcho,
    Format, EXIT_OK,
};

const SIZE: f64 = 480.0;
const CENTER: f64 = SIZE / 2.0;
const PLOT_HALF: f64 = 190.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Draws the 1-σ uncertainty ellipses of squeezed-thermal states in the
/// (q, p) plane: semi-axis √κ along q, √ε along p. Pure states (δ = 0) are
/// drawn solid, impure ones dashed. Output is byte-deterministic.
#[derive(Args, Debug)]
pub struct EllipseArgs {
    /// Output directory (default: $CVCLUSTER_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Svg])]
    pub format: Vec<Format>,
    /// States as `s:delta`, repeatable or comma separated. Defaults to the
    /// vacuum, a pure 5-dB squeezed state, and an impure variant of it.
    #[arg(long = "state", value_parser = parse_state_pair, value_delimiter = ',')]
    pub states: Vec<(f64, f64)>,
}

struct Drawn {
    s: f64,
    delta: f64,
    db: f64,
    semi_q: f64,
    semi_p: f64,
}

pub fn run(args: EllipseArgs) -> CmdResult {
    let formats = check_formats(&args.format, &[Format::Svg, Format::Json])?;
    let pairs = if args.states.is_empty() {
        vec![(1.0, 0.0), (1.78, 0.0), (1.78, 1.0)]
    } else {
        args.states.clone()
    };

    let mut drawn = Vec::with_capacity(pairs.len());
    for &(s, delta) in &pairs {
        let spec = SqueezedThermalSpec::new(s, delta)?;
        drawn.push(Drawn {
            s,
            delta,
            db: 20.0 * s.log10(),
            semi_q: spec.kappa().sqrt(),
            semi_p: spec.epsilon().sqrt(),
        });
    }

    let mut config = ConfigEcho::new("ellipse-plot");
    for (i, d) in drawn.iter().enumerate() {
        config.push(&format!("state_{i}"), format!("s={} delta={}", d.s, d.delta));
    }

    // Data half-range: the largest semi-axis plus a margin, rounded up to
    // the next half unit so tick positions stay tidy.
    let largest = drawn
        .iter()
        .map(|d| d.semi_q.max(d.semi_p))
        .fold(0.0f64, f64::max);
    let range = ((largest * 1.25) * 2.0).ceil() / 2.0;
    let scale = PLOT_HALF / range;

    let dir = out_dir(args.out);
    for format in formats {
        match format {
            Format::Svg => {
                let svg = render(&config, &drawn, range, scale);
                write_output(&dir, "ellipses.svg", &svg)?;
            }
            Format::Json => {
                let states: Vec<serde_json::Value> = drawn
                    .iter()
                    .map(|d| {
                        serde_json::json!({
                            "s": d.s,
                            "delta": d.delta,
                            "db": d.db,
                            "semi_q": d.semi_q,
                            "semi_p": d.semi_p,
                        })
                    })
                    .collect();
                let value = serde_json::json!({
                    "config": config.json_value(),
                    "states": states,
                });
                write_output(&dir, "ellipses.json", &to_json_string(&value))?;
            }
            _ => unreachable!("rejected by check_formats"),
        }
    }

    for d in &drawn {
        println!(
            "s={} ({:.2} dB), delta={}: semi-axes q {} p {}",
            d.s, d.db, d.delta, d.semi_q, d.semi_p
        );
    }
    Ok(EXIT_OK)
}

fn render(config: &ConfigEcho, drawn: &[Drawn], range: f64, scale: f64) -> String {
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    svg.push_str(&config.svg_comment());
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>"
    );

    // Axes through the origin, labelled in quadrature units.
    let (lo, hi) = (CENTER - PLOT_HALF, CENTER + PLOT_HALF);
    let _ = writeln!(
        svg,
        "<line x1=\"{lo:.2}\" y1=\"{CENTER}\" x2=\"{hi:.2}\" y2=\"{CENTER}\" \
         stroke=\"#444444\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{CENTER}\" y1=\"{lo:.2}\" x2=\"{CENTER}\" y2=\"{hi:.2}\" \
         stroke=\"#444444\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" font-family=\"sans-serif\">q</text>",
        hi + 6.0,
        CENTER + 5.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" font-family=\"sans-serif\">p</text>",
        CENTER - 4.0,
        lo - 8.0
    );

    // Unit ticks along both axes.
    let mut tick = 1.0;
    while tick <= range {
        for sign in [-1.0, 1.0] {
            let x = CENTER + sign * tick * scale;
            let y = CENTER - sign * tick * scale;
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"#444444\" stroke-width=\"1\"/>",
                CENTER - 4.0,
                CENTER + 4.0
            );
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#444444\" stroke-width=\"1\"/>",
                CENTER - 4.0,
                CENTER + 4.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\" \
                 text-anchor=\"middle\">{}</text>",
                CENTER + 18.0,
                sign * tick
            );
        }
        tick += 1.0;
    }

    for (i, d) in drawn.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if d.delta > 0.0 {
            " stroke-dasharray=\"7 4\""
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            "<ellipse cx=\"{CENTER}\" cy=\"{CENTER}\" rx=\"{:.2}\" ry=\"{:.2}\" fill=\"none\" \
             stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
            d.semi_q * scale,
            d.semi_p * scale
        );

        // Legend entry: sample line plus label, top-left corner.
        let y = 24.0 + 20.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"16\" y1=\"{y:.2}\" x2=\"44\" y2=\"{y:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"{dash}/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"50\" y=\"{:.2}\" font-size=\"13\" font-family=\"sans-serif\">\
             s={} ({:.2} dB), &#948;={}</text>",
            y + 4.0,
            d.s,
            d.db,
            d.delta
        );
    }

    svg.push_str("</svg>\n");
    svg
}
