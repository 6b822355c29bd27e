use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Environment variable consulted for the output directory when `--out` is
/// absent; falls back to the current directory.
pub const OUT_DIR_ENV: &str = "CVCLUSTER_OUT";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes of the stable CI contract.
pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Output encodings a command may emit. Each command accepts a subset and
/// rejects the rest as a configuration error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    Bin,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
            Format::Bin => "bin",
        }
    }
}

/// Validates the requested formats against what a command supports,
/// returning a deduplicated list in request order.
pub fn check_formats(requested: &[Format], supported: &[Format]) -> Result<Vec<Format>, Failure> {
    let mut accepted = Vec::new();
    for &format in requested {
        if !supported.contains(&format) {
            let names: Vec<&str> = supported.iter().map(|f| f.name()).collect();
            return Err(Failure(format!(
                "format `{}` not supported by this command (choose from {})",
                format.name(),
                names.join(", ")
            )));
        }
        if !accepted.contains(&format) {
            accepted.push(format);
        }
    }
    Ok(accepted)
}

/// A command failure that is not an invariant breach: bad configuration or
/// an I/O problem. Both map to the config-error exit code.
#[derive(Debug)]
pub struct Failure(pub String);

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<cvcluster::Error> for Failure {
    fn from(err: cvcluster::Error) -> Self {
        Failure(err.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure(format!("i/o error: {err}"))
    }
}

pub type CmdResult = Result<i32, Failure>;

/// The run configuration echoed into every output file: command, artifact
/// version, seed, and whatever knobs the command used, in insertion order.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub version: String,
    pub entries: Vec<(String, String)>,
}

impl ConfigEcho {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// `# key=value` comment lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command={} version={}", self.command, self.version);
        for (key, value) in &self.entries {
            let _ = writeln!(out, "# {key}={value}");
        }
        out
    }

    /// An XML comment for SVG outputs.
    pub fn svg_comment(&self) -> String {
        let mut out = format!("<!-- command={} version={}", self.command, self.version);
        for (key, value) in &self.entries {
            let _ = write!(out, " {key}={value}");
        }
        out.push_str(" -->\n");
        out
    }

    /// The `config` object for JSON outputs.
    pub fn json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), self.command.clone().into());
        map.insert("version".into(), self.version.clone().into());
        for (key, value) in &self.entries {
            map.insert(key.clone(), value.clone().into());
        }
        serde_json::Value::Object(map)
    }
}

/// Resolves the output directory: flag, then environment, then `.`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes a file under the output directory, creating it if needed, and
/// reports the path on stdout.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Pretty JSON with a trailing newline; field order follows struct order,
/// so output is byte-deterministic.
pub fn to_json_string(value: &serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("valid JSON value");
    out.push('\n');
    out
}

/// Parses `db:p`, e.g. `20.5:1e-6`.
pub fn parse_anchor(text: &str) -> Result<(f64, f64), String> {
    let (db, p) = text
        .split_once(':')
        .ok_or_else(|| format!("expected db:p, got `{text}`"))?;
    let db: f64 = db.trim().parse().map_err(|_| format!("bad dB value `{db}`"))?;
    let p: f64 = p.trim().parse().map_err(|_| format!("bad probability `{p}`"))?;
    Ok((db, p))
}

/// Parses `s:delta`, e.g. `1.78:0.5`.
pub fn parse_state_pair(text: &str) -> Result<(f64, f64), String> {
    let (s, delta) = text
        .split_once(':')
        .ok_or_else(|| format!("expected s:delta, got `{text}`"))?;
    let s: f64 = s.trim().parse().map_err(|_| format!("bad s value `{s}`"))?;
    let delta: f64 = delta
        .trim()
        .parse()
        .map_err(|_| format!("bad delta value `{delta}`"))?;
    Ok((s, delta))
}

/// Squeezing factor from the `--squeeze-db`/`--s` pair of flags.
pub fn resolve_s(squeeze_db: Option<f64>, s: Option<f64>, default_s: f64) -> f64 {
    match (squeeze_db, s) {
        (Some(db), _) => 10f64.powf(db / 20.0),
        (None, Some(s)) => s,
        (None, None) => default_s,
    }
}
