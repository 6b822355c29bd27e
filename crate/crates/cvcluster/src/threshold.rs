//! Error-probability model for grid-encoded qubits carried on a finitely
//! squeezed cluster.
//!
//! Every gate teleportation stamps the squeezed-quadrature variance ε of a
//! fresh resource mode onto the logical state, so after a fixed-depth
//! syndrome extraction the accumulated quadrature noise is σ² = kε for some
//! circuit-dependent multiplier k. A logical error happens when that noise
//! carries a quadrature past the midpoint between neighbouring grid teeth,
//! a distance of √π/2, giving the misbin probability
//! p = erfc(√(π / 8σ²)).
//!
//! The multiplier is not hard-coded: [`ThresholdModel::calibrated`] recovers
//! k from one published anchor point (by default p = 10⁻⁶ at 20.5 dB), and
//! everything else follows from the two formulas above. Only ε enters; the
//! anti-squeezed variance κ of the resource modes never appears, which is
//! the threshold-level face of the κ-cancellation this crate certifies.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Result};

const LN10: f64 = std::f64::consts::LN_10;

/// An amount of squeezing, stored in decibels.
///
/// `db` is the positive "x dB of squeezing" figure of merit: the squeezed
/// variance is ε = ½·10^(−db/10), so the signed variance level
/// 10·log₁₀(2ε) equals −db. The squeezing factor s relates as db = 20·log₁₀ s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingLevel {
    db: f64,
}

impl SqueezingLevel {
    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::TargetOutOfRange(db));
        }
        Ok(Self { db })
    }

    /// From a squeezing factor s ≥ 1.
    pub fn from_s(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 1.0 {
            return Err(Error::InvalidSqueezingFactor(s));
        }
        Ok(Self {
            db: 20.0 * s.log10(),
        })
    }

    /// From the squeezed variance ε > 0.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::NonPositiveVariance(epsilon));
        }
        Ok(Self {
            db: -10.0 * (2.0 * epsilon).log10(),
        })
    }

    pub fn db(&self) -> f64 {
        self.db
    }

    /// Squeezed variance ε = ½·10^(−db/10).
    pub fn epsilon(&self) -> f64 {
        0.5 * 10f64.powf(-self.db / 10.0)
    }

    /// Squeezing factor s = 10^(db/20).
    pub fn s(&self) -> f64 {
        10f64.powf(self.db / 20.0)
    }
}

/// Probability that Gaussian quadrature noise of total variance σ² carries
/// an outcome across the nearest bin boundary at distance √π/2:
/// p = erfc(√(π / 8σ²)).
pub fn misbin_probability(sigma2: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    Ok(erfc(erfc_argument(sigma2)))
}

/// Natural log of [`misbin_probability`], stable far past the ~1e-308 f64
/// underflow of the probability itself.
///
/// Below the crossover the log of the library erfc is exact; above it the
/// large-x expansion ln erfc(x) = −x² − ln(x√π) + ln(1 − u + 3u² − 15u³ +
/// 105u⁴), u = 1/(2x²), is accurate to ~1e-11 absolute.
pub fn log_misbin_probability(sigma2: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    let x = erfc_argument(sigma2);
    if x < 20.0 {
        Ok(erfc(x).ln())
    } else {
        let u = 0.5 / (x * x);
        let series = 1.0 + u * (-1.0 + u * (3.0 + u * (-15.0 + u * 105.0)));
        Ok(-x * x - (x * std::f64::consts::PI.sqrt()).ln() + series.ln())
    }
}

fn erfc_argument(sigma2: f64) -> f64 {
    (std::f64::consts::PI / (8.0 * sigma2)).sqrt()
}

/// The calibrated noise model: total logical noise σ² = multiplier · ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModel {
    multiplier: f64,
    anchor_db: f64,
    anchor_misbin: f64,
}

/// Published operating point used for the default calibration: a misbin
/// probability of 10⁻⁶ at 20.5 dB of squeezing.
pub const DEFAULT_ANCHOR_DB: f64 = 20.5;
pub const DEFAULT_ANCHOR_MISBIN: f64 = 1e-6;

impl ThresholdModel {
    /// Solves misbin(k · ε(anchor)) = anchor_misbin for the multiplier k by
    /// bisection on k ∈ [1, 10⁴] to 1e-9 relative width.
    pub fn calibrated(anchor: SqueezingLevel, anchor_misbin: f64) -> Result<Self> {
        if !(anchor_misbin > 0.0 && anchor_misbin < 1.0) {
            return Err(Error::AnchorOutOfRange(anchor_misbin));
        }
        let eps = anchor.epsilon();
        let target = anchor_misbin.ln();
        let objective = |k: f64| log_misbin_probability(k * eps).map(|lp| lp - target);

        let (mut lo, mut hi) = (1.0f64, 1e4f64);
        let f_lo = objective(lo)?;
        let f_hi = objective(hi)?;
        if f_lo.signum() == f_hi.signum() {
            return Err(Error::NoCalibrationRoot { lo, hi });
        }
        // Misbin grows with k, so f_lo < 0 < f_hi here.
        while hi - lo > 1e-9 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if objective(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            multiplier: 0.5 * (lo + hi),
            anchor_db: anchor.db(),
            anchor_misbin,
        })
    }

    /// Calibration against the default anchor.
    pub fn default_calibration() -> Self {
        Self::calibrated(
            SqueezingLevel::from_db(DEFAULT_ANCHOR_DB).expect("finite"),
            DEFAULT_ANCHOR_MISBIN,
        )
        .expect("default anchor always brackets a root")
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn anchor(&self) -> (f64, f64) {
        (self.anchor_db, self.anchor_misbin)
    }

    /// Total logical noise variance at a given squeezing level.
    pub fn total_noise(&self, level: SqueezingLevel) -> f64 {
        self.multiplier * level.epsilon()
    }

    pub fn misbin(&self, level: SqueezingLevel) -> Result<f64> {
        misbin_probability(self.total_noise(level))
    }

    pub fn log10_misbin(&self, level: SqueezingLevel) -> Result<f64> {
        Ok(log_misbin_probability(self.total_noise(level))? / LN10)
    }

    /// One row per requested squeezing level.
    pub fn table(&self, levels_db: &[f64]) -> Result<ThresholdTable> {
        if levels_db.is_empty() {
            return Err(Error::EmptyInput);
        }
        let rows = levels_db
            .iter()
            .map(|&db| {
                let level = SqueezingLevel::from_db(db)?;
                Ok(ThresholdRow {
                    db,
                    epsilon: level.epsilon(),
                    sigma2_total: self.total_noise(level),
                    p_err: self.misbin(level)?,
                    log10_p_err: self.log10_misbin(level)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ThresholdTable {
            multiplier: self.multiplier,
            anchor_db: self.anchor_db,
            anchor_misbin: self.anchor_misbin,
            rows,
        })
    }

    /// Least squeezing (in dB) whose misbin probability does not exceed
    /// `target`. Bisection on db ∈ [0.01, 200] to 1e-9 dB.
    pub fn required_squeezing(&self, target: f64) -> Result<SqueezingLevel> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::TargetOutOfRange(target));
        }
        let target_ln = target.ln();
        let objective = |db: f64| -> Result<f64> {
            let level = SqueezingLevel::from_db(db)?;
            Ok(log_misbin_probability(self.total_noise(level))? - target_ln)
        };
        let (mut lo, mut hi) = (0.01f64, 200.0f64);
        let f_lo = objective(lo)?;
        let f_hi = objective(hi)?;
        if f_lo.signum() == f_hi.signum() {
            return Err(Error::NoCalibrationRoot { lo, hi });
        }
        // Misbin falls as squeezing rises: f_lo > 0 > f_hi.
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if objective(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        SqueezingLevel::from_db(0.5 * (lo + hi))
    }
}

/// One squeezing level of a threshold table. The log-space column survives
/// where `p_err` itself underflows to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub db: f64,
    pub epsilon: f64,
    pub sigma2_total: f64,
    pub p_err: f64,
    pub log10_p_err: f64,
}

/// A calibrated misbin table, serializable to JSON via serde or to CSV via
/// [`ThresholdTable::to_csv`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub multiplier: f64,
    pub anchor_db: f64,
    pub anchor_misbin: f64,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    /// Deterministic CSV: calibration in `#` comment lines, then one row per
    /// level. Floats use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# anchor_db={} anchor_misbin={} multiplier={}\n",
            self.anchor_db, self.anchor_misbin, self.multiplier
        ));
        out.push_str("db,epsilon,sigma2_total,p_err\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.db, row.epsilon, row.sigma2_total, row.p_err
            ));
        }
        out
    }
}
