use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::gaussian::{GaussianState, Quadrature};
use crate::{Error, Result};

/// A square cell-centered phase-space grid over [−l, l]²: n points per axis
/// at xᵢ = −l + (i + ½)h with h = 2l/n.
///
/// Cell centering makes negation exact on the index set, −xᵢ = x_{n−1−i},
/// so the Fourier gate is a lossless axis remap, and it makes the midpoint
/// quadrature Σ f(xᵢ)·h spectrally accurate for smooth decaying integrands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    l: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGridSpec(format!(
                "need at least 2 points per axis, got {n}"
            )));
        }
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidGridSpec(format!("half-extent must be positive, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.l
    }

    pub fn step(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.l + (i as f64 + 0.5) * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// First and second moments of a grid distribution, midpoint-quadrature
/// estimates normalized by the grid mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

/// Pointwise comparison of two grids on the same spec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridComparison {
    /// max |a − b| over all cells.
    pub l_inf: f64,
    /// Σ |a − b| · h², the integrated absolute difference.
    pub l1: f64,
}

/// A Wigner function sampled on a [`GridSpec`]: `data[[i, j]]` is the value
/// at (q, p) = (xᵢ, xⱼ).
#[derive(Clone, Debug, PartialEq)]
pub struct GridWigner {
    spec: GridSpec,
    data: Array2<f64>,
}

const FILE_VERSION: u64 = 1;

/// Sidecar metadata written next to the binary payload.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    version: u64,
    n: usize,
    l: f64,
    layout: String,
    mass: f64,
}

impl GridWigner {
    /// Samples `f(q, p)` at every grid point.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let pts = spec.points();
        let data = Array2::from_shape_fn((spec.n(), spec.n()), |(i, j)| f(pts[i], pts[j]));
        Self { spec, data }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            data: Array2::zeros((spec.n(), spec.n())),
        }
    }

    pub(crate) fn from_data(spec: GridSpec, data: Array2<f64>) -> Self {
        debug_assert_eq!(data.dim(), (spec.n(), spec.n()));
        Self { spec, data }
    }

    /// Samples the Wigner function of a single-mode Gaussian state. The grid
    /// must reach 5σ past the mean along both axes.
    pub fn discretize(spec: GridSpec, state: &GaussianState) -> Result<Self> {
        if state.n_modes() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: 2 * state.n_modes(),
            });
        }
        let (mq, mp) = (state.mean()[0], state.mean()[1]);
        let (vq, vp) = (state.q_variance(0), state.p_variance(0));
        let c = state.cov()[(0, 1)];
        let required = (mq.abs() + 5.0 * vq.sqrt()).max(mp.abs() + 5.0 * vp.sqrt());
        if spec.half_extent() < required {
            return Err(Error::ExtentTooSmall {
                required,
                extent: spec.half_extent(),
            });
        }
        let det = vq * vp - c * c;
        if det <= 0.0 {
            return Err(Error::DegenerateMarginal(det));
        }
        let norm = 1.0 / (std::f64::consts::TAU * det.sqrt());
        Ok(Self::from_fn(spec, |q, p| {
            let (dq, dp) = (q - mq, p - mp);
            let quad = (vp * dq * dq - 2.0 * c * dq * dp + vq * dp * dp) / det;
            norm * (-0.5 * quad).exp()
        }))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    /// Midpoint-quadrature integral of the grid.
    pub fn mass(&self) -> f64 {
        let h = self.spec.step();
        self.data.sum() * h * h
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rescales so the grid integrates to one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.mass();
        if !mass.is_finite() || mass.abs() < 1e-300 {
            return Err(Error::DegenerateMarginal(mass));
        }
        Ok(Self {
            spec: self.spec,
            data: &self.data / mass,
        })
    }

    /// Marginal distribution of one quadrature (the other integrated out).
    pub fn marginal(&self, quadrature: Quadrature) -> Vec<f64> {
        let h = self.spec.step();
        match quadrature {
            Quadrature::Q => self.data.rows().into_iter().map(|r| r.sum() * h).collect(),
            Quadrature::P => self.data.columns().into_iter().map(|c| c.sum() * h).collect(),
        }
    }

    /// Midpoint-quadrature moments, normalized by the mass.
    pub fn moments(&self) -> Result<Moments> {
        let mass = self.mass();
        if !mass.is_finite() || mass.abs() < 1e-300 {
            return Err(Error::DegenerateMarginal(mass));
        }
        let pts = self.spec.points();
        let h2 = self.spec.step() * self.spec.step();
        let (mut sq, mut sp) = (0.0, 0.0);
        for ((i, j), &w) in self.data.indexed_iter() {
            sq += pts[i] * w;
            sp += pts[j] * w;
        }
        let mean_q = sq * h2 / mass;
        let mean_p = sp * h2 / mass;
        let (mut vq, mut vp, mut cqp) = (0.0, 0.0, 0.0);
        for ((i, j), &w) in self.data.indexed_iter() {
            let (dq, dp) = (pts[i] - mean_q, pts[j] - mean_p);
            vq += dq * dq * w;
            vp += dp * dp * w;
            cqp += dq * dp * w;
        }
        Ok(Moments {
            mass,
            mean_q,
            mean_p,
            var_q: vq * h2 / mass,
            var_p: vp * h2 / mass,
            cov_qp: cqp * h2 / mass,
        })
    }

    /// L∞ and L1 distance to another grid on the same spec.
    pub fn compare(&self, other: &Self) -> Result<GridComparison> {
        if self.spec != other.spec {
            return Err(Error::GridSpecMismatch);
        }
        let mut l_inf = 0.0f64;
        let mut l1 = 0.0f64;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            let d = (a - b).abs();
            l_inf = l_inf.max(d);
            l1 += d;
        }
        let h = self.spec.step();
        Ok(GridComparison {
            l_inf,
            l1: l1 * h * h,
        })
    }

    /// Writes the grid as little-endian binary (u64 version, u64 n, f64
    /// half-extent, then n² f64 values row-major with q as the slow index)
    /// plus a human-readable JSON sidecar at `<path>.json`.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut buf =
            Vec::with_capacity(24 + 8 * self.data.len());
        buf.extend_from_slice(&FILE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.spec.n() as u64).to_le_bytes());
        buf.extend_from_slice(&self.spec.half_extent().to_le_bytes());
        for &v in self.data.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;

        let sidecar = Sidecar {
            version: FILE_VERSION,
            n: self.spec.n(),
            l: self.spec.half_extent(),
            layout: "row-major, q slow".to_string(),
            mass: self.mass(),
        };
        let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        fs::write(sidecar_path(path), json)
    }

    /// Reads a grid written by [`GridWigner::save`]. A sidecar, if present,
    /// must agree with the binary header.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::InvalidGridSpec(format!("cannot read {}: {e}", path.display())))?;
        if bytes.len() < 24 {
            return Err(Error::InvalidGridSpec("file shorter than header".into()));
        }
        let version = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        if version != FILE_VERSION {
            return Err(Error::InvalidGridSpec(format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let l = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let spec = GridSpec::new(n, l)?;
        if bytes.len() != 24 + 8 * n * n {
            return Err(Error::InvalidGridSpec(format!(
                "payload is {} bytes, expected {}",
                bytes.len() - 24,
                8 * n * n
            )));
        }
        let values: Vec<f64> = bytes[24..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let data = Array2::from_shape_vec((n, n), values).expect("length checked");

        let sidecar = sidecar_path(path);
        if sidecar.exists() {
            let text = fs::read_to_string(&sidecar)
                .map_err(|e| Error::InvalidGridSpec(format!("cannot read sidecar: {e}")))?;
            let meta: Sidecar = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidGridSpec(format!("malformed sidecar: {e}")))?;
            if meta.version != version || meta.n != n || meta.l != l {
                return Err(Error::GridSpecMismatch);
            }
        }
        Ok(Self { spec, data })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}
