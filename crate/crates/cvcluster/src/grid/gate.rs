use ndarray::Array2;

use super::ops::{convolve_axis, fourier_remap, interp_1d};
use super::{GridSpec, GridWigner};
use crate::gaussian::{Quadrature, SqueezedThermalSpec};
use crate::{Error, Result};

/// Controls for numerically averaging a grid channel over the measurement
/// outcome.
#[derive(Clone, Copy, Debug)]
pub struct OutcomeAverageOptions {
    /// Half-width of the outcome range in standard deviations of the
    /// outcome marginal.
    pub n_sigma: f64,
    /// Target spacing of the trapezoid rule in outcome units.
    pub spacing: f64,
    /// Permitted relative loss between input mass and averaged output mass.
    pub coverage_tol: f64,
}

impl Default for OutcomeAverageOptions {
    fn default() -> Self {
        Self {
            n_sigma: 6.0,
            spacing: 0.2,
            coverage_tol: 0.01,
        }
    }
}

/// Bookkeeping from an outcome average.
#[derive(Clone, Copy, Debug)]
pub struct OutcomeAverageReport {
    pub n_outcomes: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Output mass over input mass.
    pub coverage: f64,
}

fn gaussian_1d(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (std::f64::consts::TAU * variance).sqrt()
}

/// The conditioned one-mode gate computed entirely in phase space, with no
/// covariance algebra anywhere.
///
/// The joint Wigner function of the input (mode 1) and a fresh resource
/// mode (mode 2) after CZ[1] is W_in(q₁, p₁ − q₂)·W_node(q₂, p₂ − q₁);
/// projecting p₁ + m·q₁ onto the outcome `t` leaves the slice integral
///
///   W_out(q₂, p₂; t) = ∫ dq₁ W_in(q₁, t − m·q₁ − q₂) · W_node(q₂, p₂ − q₁),
///
/// evaluated on the grid as a dense matrix product over q₁, with the
/// off-grid momentum argument of W_in read through Keys interpolation. The
/// returned grid includes the X(−t) correction shift and is unnormalized:
/// its mass is the probability density of the outcome.
pub fn one_mode_gate_conditioned_grid(
    input: &GridWigner,
    m: f64,
    resource: SqueezedThermalSpec,
    t: f64,
) -> Result<GridWigner> {
    let kernel = epsilon_kernel(input.spec(), resource);
    let work = padded_axis(input.spec(), resource.kappa());
    Ok(conditioned_with_kernel(input, m, resource, t, &kernel, work))
}

/// The q axis the slices are computed on: the requested axis widened by
/// whole grid cells until it holds the pre-correction envelope, whose
/// prior width is √κ around an outcome-proportional center.
///
/// Before the X(−t) shift the conditioned mass sits near β·t (β close to
/// one for strong anti-squeezing), which can dwarf the requested window
/// even though the shifted result lands back inside it. Computing on the
/// requested window alone would clip that transient excursion by an amount
/// that grows with κ, polluting the κ-independence of the averaged channel
/// with a pure windowing artifact. Whole-cell padding keeps the original
/// points exactly on the padded axis, so no resampling is introduced.
fn padded_axis(spec: GridSpec, kappa: f64) -> GridSpec {
    let reach = 5.2 * kappa.sqrt();
    let pad_cells = ((reach - spec.half_extent()) / spec.step()).ceil().max(0.0) as usize;
    if pad_cells == 0 {
        return spec;
    }
    let l = spec.half_extent() + pad_cells as f64 * spec.step();
    GridSpec::new(spec.n() + 2 * pad_cells, l).expect("padded axis parameters are valid")
}

fn epsilon_kernel(spec: GridSpec, resource: SqueezedThermalSpec) -> Array2<f64> {
    let pts = spec.points();
    let eps = resource.epsilon();
    Array2::from_shape_fn((spec.n(), spec.n()), |(i1, j2)| {
        gaussian_1d(pts[j2] - pts[i1], eps)
    })
}

fn conditioned_with_kernel(
    input: &GridWigner,
    m: f64,
    resource: SqueezedThermalSpec,
    t: f64,
    kernel: &Array2<f64>,
    work: GridSpec,
) -> GridWigner {
    let spec = input.spec();
    let n = spec.n();
    let h = spec.step();
    let pts = spec.points();
    let kappa = resource.kappa();

    // slice[(i2, i1)] = W_in(x_{i1}, t − m·x_{i1} − y_{i2}) with y the
    // padded q₂ axis.
    let mut slice = Array2::zeros((work.n(), n));
    for i1 in 0..n {
        let row = input.data().row(i1);
        let base = t - m * pts[i1];
        for i2 in 0..work.n() {
            slice[(i2, i1)] = interp_1d(row, spec, base - work.point(i2));
        }
    }
    // uncorrected[(i2, j2)] = h·G_κ(y_{i2})·Σ_{i1} slice·G_ε(x_{j2}−x_{i1}).
    let mut uncorrected = slice.dot(kernel);
    for (i2, mut row) in uncorrected.rows_mut().into_iter().enumerate() {
        row *= h * gaussian_1d(work.point(i2), kappa);
    }
    // X(−t): W(q, p) ← W(q + t, p), read off the padded axis so mass that
    // merely passes through the pad on its way home is not lost.
    let corrected = Array2::from_shape_fn((n, n), |(i, j)| {
        interp_1d(uncorrected.column(j), work, pts[i] + t)
    });
    GridWigner::from_data(spec, corrected)
}

/// The outcome-averaged one-mode channel by brute force: conditioned slices
/// across a trapezoid grid of outcomes, corrections applied per outcome,
/// accumulated with their densities (the conditioned grids are
/// density-weighted already, so the trapezoid sum is the average).
///
/// The outcome range is centered on the outcome marginal's mean and sized
/// from its variance (input moments plus the resource's κ), so trapezoid
/// truncation is negligible for any κ. Mass lost past
/// `opts.coverage_tol` is an error.
pub fn one_mode_gate_averaged_grid(
    input: &GridWigner,
    m: f64,
    resource: SqueezedThermalSpec,
    opts: &OutcomeAverageOptions,
) -> Result<(GridWigner, OutcomeAverageReport)> {
    if !(opts.n_sigma > 0.0) || !(opts.spacing > 0.0) || !(opts.coverage_tol > 0.0) {
        return Err(Error::InvalidGridSpec(
            "outcome averaging options must be positive".into(),
        ));
    }
    let mom = input.moments()?;
    let mean_t = mom.mean_p + m * mom.mean_q;
    let var_t =
        mom.var_p + m * m * mom.var_q + 2.0 * m * mom.cov_qp + resource.kappa();
    let sigma_t = var_t.max(1e-12).sqrt();
    let t_min = mean_t - opts.n_sigma * sigma_t;
    let t_max = mean_t + opts.n_sigma * sigma_t;
    let n_outcomes = (((t_max - t_min) / opts.spacing).ceil() as usize + 1).max(65);
    let h_t = (t_max - t_min) / (n_outcomes - 1) as f64;

    let kernel = epsilon_kernel(input.spec(), resource);
    let work = padded_axis(input.spec(), resource.kappa());
    let mut accumulated = GridWigner::zeros(input.spec());
    for k in 0..n_outcomes {
        let t = t_min + k as f64 * h_t;
        let conditioned = conditioned_with_kernel(input, m, resource, t, &kernel, work);
        let weight = if k == 0 || k == n_outcomes - 1 {
            0.5 * h_t
        } else {
            h_t
        };
        accumulated
            .data_mut()
            .scaled_add(weight, conditioned.data());
    }

    let coverage = accumulated.mass() / mom.mass;
    if (coverage - 1.0).abs() > opts.coverage_tol {
        return Err(Error::OutcomeCoverage { mass: coverage });
    }
    Ok((
        accumulated,
        OutcomeAverageReport {
            n_outcomes,
            t_min,
            t_max,
            coverage,
        },
    ))
}

/// The same averaged channel through the closed-form grid route: the ideal
/// F·P(m) as a coordinate substitution (an exact remap when m = 0), then an
/// ε-variance Gaussian blur of the momentum axis.
pub fn one_mode_gate_averaged_closed_grid(
    input: &GridWigner,
    m: f64,
    resource: SqueezedThermalSpec,
) -> Result<GridWigner> {
    let mapped = if m == 0.0 {
        fourier_remap(input)
    } else {
        // F·P(m) = [[−m, −1], [1, 0]] on (q, p).
        super::ops::substitute_symplectic(input, &[[-m, -1.0], [1.0, 0.0]])?
    };
    convolve_axis(&mapped, Quadrature::P, resource.epsilon())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianState;
    use crate::grid::gkp_zero;

    fn resource(delta: f64) -> SqueezedThermalSpec {
        SqueezedThermalSpec::new(1.78, delta).unwrap()
    }

    fn vacuum_grid() -> GridWigner {
        let spec = GridSpec::new(128, 8.0).unwrap();
        GridWigner::discretize(spec, &GaussianState::vacuum(1).unwrap()).unwrap()
    }

    #[test]
    fn conditioned_grid_matches_covariance_route_on_vacuum() {
        let spec = GridSpec::new(128, 8.0).unwrap();
        let grid = vacuum_grid();
        let (m, t) = (0.4, 0.7);
        for delta in [0.0, 1.5] {
            let res = resource(delta);
            let conditioned = one_mode_gate_conditioned_grid(&grid, m, res, t).unwrap();

            let input = GaussianState::vacuum(1).unwrap();
            let (expected_state, record) =
                crate::cluster::one_mode_gate_conditioned(&input, 0, m, res, t).unwrap();
            // The grid result is density-weighted; its mass is p(t).
            let density = record.outcomes[0].density;
            assert!(
                (conditioned.mass() - density).abs() < 1e-6,
                "delta {delta}: mass {} vs density {density}",
                conditioned.mass()
            );
            let expected = GridWigner::discretize(spec, &expected_state).unwrap();
            let diff = conditioned.normalized().unwrap().compare(&expected).unwrap();
            assert!(diff.l_inf < 2e-4, "delta {delta}: l_inf {}", diff.l_inf);
        }
    }

    #[test]
    fn averaged_grid_routes_agree_on_vacuum() {
        let grid = vacuum_grid();
        let res = resource(1.0);
        let (brute, report) =
            one_mode_gate_averaged_grid(&grid, 0.0, res, &OutcomeAverageOptions::default())
                .unwrap();
        assert!((report.coverage - 1.0).abs() < 1e-6, "coverage {}", report.coverage);
        let closed = one_mode_gate_averaged_closed_grid(&grid, 0.0, res).unwrap();
        let diff = brute.compare(&closed).unwrap();
        // Residual is interpolation bias at n = 128; it shrinks as h³.
        assert!(diff.l_inf < 5e-5, "l_inf {}", diff.l_inf);

        // Both match the covariance-route expectation: vacuum stays round in
        // q and picks up ε in p.
        let mom = brute.moments().unwrap();
        assert!((mom.var_q - 0.5).abs() < 1e-5);
        assert!((mom.var_p - (0.5 + res.epsilon())).abs() < 1e-5);
    }

    #[test]
    fn averaged_grid_is_kappa_free_for_gkp_input() {
        let spec = GridSpec::new(128, 8.0).unwrap();
        let gkp = gkp_zero(spec, 0.25).unwrap();
        let opts = OutcomeAverageOptions::default();
        let (clean, _) = one_mode_gate_averaged_grid(&gkp, 0.0, resource(0.0), &opts).unwrap();
        let (noisy, _) = one_mode_gate_averaged_grid(&gkp, 0.0, resource(3.0), &opts).unwrap();
        let diff = clean.compare(&noisy).unwrap();
        // Interpolation bias is nearly identical for the two resources, so
        // the cross-resource gap sits far below the per-route bias.
        assert!(diff.l_inf < 1e-5, "l_inf {}", diff.l_inf);
    }

    #[test]
    fn conditioned_grid_is_kappa_sensitive_for_gkp_input() {
        let spec = GridSpec::new(128, 8.0).unwrap();
        let gkp = gkp_zero(spec, 0.25).unwrap();
        let t = 0.8;
        let clean = one_mode_gate_conditioned_grid(&gkp, 0.0, resource(0.0), t)
            .unwrap()
            .normalized()
            .unwrap();
        let noisy = one_mode_gate_conditioned_grid(&gkp, 0.0, resource(3.0), t)
            .unwrap()
            .normalized()
            .unwrap();
        let diff = clean.compare(&noisy).unwrap();
        assert!(diff.l1 > 0.01, "l1 {}", diff.l1);
    }

    #[test]
    fn coverage_failure_is_detected() {
        let grid = vacuum_grid();
        let opts = OutcomeAverageOptions {
            n_sigma: 0.5,
            coverage_tol: 1e-3,
            ..OutcomeAverageOptions::default()
        };
        assert!(matches!(
            one_mode_gate_averaged_grid(&grid, 0.0, resource(0.0), &opts),
            Err(Error::OutcomeCoverage { .. })
        ));
    }
}
