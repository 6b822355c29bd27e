use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::{
    condition_on_quadrature, sample_quadrature, GaussianState,
    MeasurementOutcome, Quadrature, SqueezedThermalSpec, SymplecticTransform,
};
use crate::{Error, Result};

/// Which teleported gate a record describes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// Teleports F·P(m) onto `mode` through one fresh resource mode.
    OneMode { mode: usize, shear_m: f64 },
    /// Teleports CZ[−1] between `first` and `second` through two fresh
    /// resource modes.
    TwoMode { first: usize, second: usize },
}

/// An outcome-dependent displacement applied after a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub mode: usize,
    pub quadrature: Quadrature,
    pub amount: f64,
}

/// Everything observable about one teleportation step: the gate, the
/// resource parameters consumed, the measured outcomes with their densities,
/// and the corrections that were applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateStepRecord {
    pub gate: GateKind,
    pub resource: SqueezedThermalSpec,
    pub outcomes: Vec<MeasurementOutcome>,
    pub corrections: Vec<Correction>,
}

/// The symplectic map the one-mode gate teleports in the noiseless limit:
/// the Fourier gate after the shear, F·P(m), acting on `mode`.
pub fn one_mode_gate_ideal(n_modes: usize, mode: usize, m: f64) -> Result<SymplecticTransform> {
    let shear = SymplecticTransform::shear(n_modes, mode, m)?;
    SymplecticTransform::fourier(n_modes, mode)?.compose(&shear)
}

/// The symplectic map the two-mode gate teleports in the noiseless limit:
/// CZ[−1] between `first` and `second`.
pub fn two_mode_gate_ideal(
    n_modes: usize,
    first: usize,
    second: usize,
) -> Result<SymplecticTransform> {
    SymplecticTransform::cz(n_modes, first, second, -1.0)
}

/// Adds classical Gaussian noise of the given variance to p̂ of one mode.
pub fn momentum_blur(state: &GaussianState, mode: usize, variance: f64) -> Result<GaussianState> {
    state.expect_mode(mode)?;
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::NonPositiveBlur(variance));
    }
    let idx = state.p_index(mode);
    let mut cov = state.cov().clone();
    cov[(idx, idx)] += variance;
    Ok(GaussianState::from_parts_unchecked(state.mean().clone(), cov))
}

/// Entangles a fresh resource mode to `mode` for the one-mode gate and
/// applies the measurement-basis shear. The resource mode is appended last;
/// the measured operator p̂ + m·q̂ of the input becomes plain p̂ of `mode`.
fn one_mode_pre_measurement(
    input: &GaussianState,
    mode: usize,
    m: f64,
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    input.expect_mode(mode)?;
    let node = GaussianState::squeezed_thermal(resource);
    let joint = input.tensor(&node);
    let n = joint.n_modes();
    let entangle = SymplecticTransform::cz(n, mode, n - 1, 1.0)?;
    let shear = SymplecticTransform::shear(n, mode, m)?;
    shear.compose(&entangle)?.apply_to(&joint)
}

/// One teleportation step with a pinned measurement outcome `t`: entangle a
/// fresh resource mode, project p̂ + m·q̂ of the input onto `t`, displace the
/// output by X(−t), and renumber so the output sits where the input was.
pub fn one_mode_gate_conditioned(
    input: &GaussianState,
    mode: usize,
    m: f64,
    resource: SqueezedThermalSpec,
    t: f64,
) -> Result<(GaussianState, GateStepRecord)> {
    let pre = one_mode_pre_measurement(input, mode, m, resource)?;
    let measured = condition_on_quadrature(&pre, mode, Quadrature::P, t)?;
    // After removal the fresh mode is last; correct it, then move it home.
    let out_mode = measured.state.n_modes() - 1;
    let corrected = SymplecticTransform::displace_q(measured.state.n_modes(), out_mode, -t)?
        .apply_to(&measured.state)?;
    let output = corrected.move_mode(out_mode, mode);
    let record = GateStepRecord {
        gate: GateKind::OneMode { mode, shear_m: m },
        resource,
        outcomes: vec![measured.outcome],
        corrections: vec![Correction {
            mode,
            quadrature: Quadrature::Q,
            amount: -t,
        }],
    };
    Ok((output, record))
}

/// Like [`one_mode_gate_conditioned`] with the outcome drawn from its exact
/// marginal distribution.
pub fn one_mode_gate_sampled<R: rand::Rng + ?Sized>(
    input: &GaussianState,
    mode: usize,
    m: f64,
    resource: SqueezedThermalSpec,
    rng: &mut R,
) -> Result<(GaussianState, GateStepRecord)> {
    let pre = one_mode_pre_measurement(input, mode, m, resource)?;
    let t = sample_quadrature(&pre, mode, Quadrature::P, rng)?;
    one_mode_gate_conditioned(input, mode, m, resource, t)
}

/// The outcome-averaged one-mode channel in closed form.
///
/// Averaging the corrected output over the outcome distribution is the law
/// of total covariance for the affine family y ↦ y + d·t: marginalize the
/// measured mode, then fold the outcome's variance and cross-covariances
/// back in through the correction gain d. The resource's κ enters the
/// conditioned state and the outcome spread with opposite signs and cancels
/// here identically; only ε survives.
pub fn one_mode_gate_averaged(
    input: &GaussianState,
    mode: usize,
    m: f64,
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    let pre = one_mode_pre_measurement(input, mode, m, resource)?;
    let o_idx = pre.p_index(mode);
    // Correction X(−t) lands on q̂ of the fresh mode (appended last).
    let d_idx = pre.q_index(pre.n_modes() - 1);
    let averaged = average_out(&pre, &[o_idx], &[vec![(d_idx, -1.0)]]);
    Ok(averaged.remove_mode(mode).move_mode(input.n_modes() - 1, mode))
}

/// Monte-Carlo estimate of the averaged one-mode channel: `samples` runs of
/// [`one_mode_gate_sampled`] from a seeded generator, combined by the law of
/// total covariance.
pub fn one_mode_gate_monte_carlo(
    input: &GaussianState,
    mode: usize,
    m: f64,
    resource: SqueezedThermalSpec,
    samples: usize,
    seed: u64,
) -> Result<GaussianState> {
    if samples == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (state, _) = one_mode_gate_sampled(input, mode, m, resource, &mut rng)?;
        runs.push(state);
    }
    Ok(mix_states(&runs))
}

/// Entangles the two fresh resource modes (A then B appended last) into the
/// chain first-A-B-second.
fn two_mode_pre_measurement(
    input: &GaussianState,
    first: usize,
    second: usize,
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    input.expect_mode(first)?;
    input.expect_mode(second)?;
    if first == second {
        return Err(Error::DuplicateMode(first));
    }
    let node = GaussianState::squeezed_thermal(resource);
    let joint = input.tensor(&node).tensor(&node);
    let n = joint.n_modes();
    let (a, b) = (n - 2, n - 1);
    let chain = SymplecticTransform::cz(n, b, second, 1.0)?
        .compose(&SymplecticTransform::cz(n, a, b, 1.0)?)?
        .compose(&SymplecticTransform::cz(n, first, a, 1.0)?)?;
    chain.apply_to(&joint)
}

/// One two-mode teleportation step with pinned outcomes: p̂ of resource mode
/// A reads `r`, p̂ of B reads `t`; the corrections are Z(−t) on `first` and
/// Z(−r) on `second`. The density recorded for the second outcome is
/// conditional on the first, so the two densities multiply to the joint.
pub fn two_mode_gate_conditioned(
    input: &GaussianState,
    first: usize,
    second: usize,
    resource: SqueezedThermalSpec,
    r: f64,
    t: f64,
) -> Result<(GaussianState, GateStepRecord)> {
    let pre = two_mode_pre_measurement(input, first, second, resource)?;
    let n = pre.n_modes();
    let after_a = condition_on_quadrature(&pre, n - 2, Quadrature::P, r)?;
    // A is gone, so B now sits last.
    let after_b = condition_on_quadrature(&after_a.state, n - 2, Quadrature::P, t)?;
    let n_out = after_b.state.n_modes();
    let correct = SymplecticTransform::displace_p(n_out, first, -t)?
        .compose(&SymplecticTransform::displace_p(n_out, second, -r)?)?;
    let output = correct.apply_to(&after_b.state)?;
    let record = GateStepRecord {
        gate: GateKind::TwoMode { first, second },
        resource,
        outcomes: vec![after_a.outcome, after_b.outcome],
        corrections: vec![
            Correction {
                mode: first,
                quadrature: Quadrature::P,
                amount: -t,
            },
            Correction {
                mode: second,
                quadrature: Quadrature::P,
                amount: -r,
            },
        ],
    };
    Ok((output, record))
}

/// Like [`two_mode_gate_conditioned`] with both outcomes drawn from the
/// exact joint distribution (first marginally, second conditionally).
pub fn two_mode_gate_sampled<R: rand::Rng + ?Sized>(
    input: &GaussianState,
    first: usize,
    second: usize,
    resource: SqueezedThermalSpec,
    rng: &mut R,
) -> Result<(GaussianState, GateStepRecord)> {
    let pre = two_mode_pre_measurement(input, first, second, resource)?;
    let n = pre.n_modes();
    let r = sample_quadrature(&pre, n - 2, Quadrature::P, rng)?;
    let after_a = condition_on_quadrature(&pre, n - 2, Quadrature::P, r)?;
    let t = sample_quadrature(&after_a.state, n - 2, Quadrature::P, rng)?;
    two_mode_gate_conditioned(input, first, second, resource, r, t)
}

/// The outcome-averaged two-mode channel in closed form, by the same
/// marginalize-then-correct identity as the one-mode version but with a
/// 2×2 outcome block (the two outcomes are correlated through the chain
/// and through any input correlations).
pub fn two_mode_gate_averaged(
    input: &GaussianState,
    first: usize,
    second: usize,
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    let pre = two_mode_pre_measurement(input, first, second, resource)?;
    let n = pre.n_modes();
    let o_a = pre.p_index(n - 2);
    let o_b = pre.p_index(n - 1);
    let corrections = vec![
        vec![(pre.p_index(second), -1.0)], // outcome r → Z(−r) on second
        vec![(pre.p_index(first), -1.0)],  // outcome t → Z(−t) on first
    ];
    let averaged = average_out(&pre, &[o_a, o_b], &corrections);
    Ok(averaged.remove_mode(n - 1).remove_mode(n - 2))
}

/// Monte-Carlo estimate of the averaged two-mode channel.
pub fn two_mode_gate_monte_carlo(
    input: &GaussianState,
    first: usize,
    second: usize,
    resource: SqueezedThermalSpec,
    samples: usize,
    seed: u64,
) -> Result<GaussianState> {
    if samples == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (state, _) = two_mode_gate_sampled(input, first, second, resource, &mut rng)?;
        runs.push(state);
    }
    Ok(mix_states(&runs))
}

/// Accumulated channel noise of a chain of averaged one-mode gates on a
/// single logical mode, isolated from any signal by driving a noiseless
/// zero-covariance probe: Σ ↦ (F·P(m)) Σ (F·P(m))ᵀ + diag(0, ε) per step.
///
/// The returned state is deliberately sub-physical; it is a noise ledger,
/// not a quantum state. A chain of k identity gates (all shears zero)
/// accumulates ⌊k/2⌋·ε in q̂ and ⌈k/2⌉·ε in p̂.
pub fn averaged_noise_budget(
    shears: &[f64],
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    if shears.is_empty() {
        return Err(Error::EmptyInput);
    }
    let eps = resource.epsilon();
    let mut probe = GaussianState::from_parts_unchecked(DVector::zeros(2), DMatrix::zeros(2, 2));
    for &m in shears {
        let ideal = one_mode_gate_ideal(1, 0, m)?;
        probe = momentum_blur(&ideal.apply_to(&probe)?, 0, eps)?;
    }
    Ok(probe)
}

/// Outcome averaging as exact linear algebra. For measured coordinates o
/// (flat indices) with outcome-dependent corrections y ↦ y + Σₖ dₖ·oₖ, the
/// averaged moments are
///   μ' = μ + D μₒ,   Σ' = Σ + D C ᵀ + C Dᵀ + D Σₒₒ Dᵀ,
/// with C the cross-covariance Σ[:, o] and D the correction gains. Rows and
/// columns belonging to measured modes are left stale; callers drop them.
fn average_out(
    pre: &GaussianState,
    measured: &[usize],
    corrections: &[Vec<(usize, f64)>],
) -> GaussianState {
    debug_assert_eq!(measured.len(), corrections.len());
    let dim = 2 * pre.n_modes();
    let k = measured.len();

    let mut d = DMatrix::zeros(dim, k);
    for (col, gains) in corrections.iter().enumerate() {
        for &(idx, gain) in gains {
            d[(idx, col)] = gain;
        }
    }
    let mut c = DMatrix::zeros(dim, k);
    let mut s_oo = DMatrix::zeros(k, k);
    let mut mu_o = DVector::zeros(k);
    for (col, &o) in measured.iter().enumerate() {
        mu_o[col] = pre.mean()[o];
        for i in 0..dim {
            c[(i, col)] = pre.cov()[(i, o)];
        }
        for (row, &o2) in measured.iter().enumerate() {
            s_oo[(row, col)] = pre.cov()[(o2, o)];
        }
    }

    let mean = pre.mean() + &d * mu_o;
    let cov = pre.cov() + &d * c.transpose() + &c * d.transpose() + &d * s_oo * d.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::from_parts_unchecked(mean, cov)
}

/// Moment-matched mixture of equally weighted Gaussian states: the mean of
/// means, and the mean covariance plus the covariance of the means.
fn mix_states(states: &[GaussianState]) -> GaussianState {
    let n = states.len();
    let dim = states[0].mean().len();
    let mut mean = DVector::zeros(dim);
    for s in states {
        mean += s.mean();
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(dim, dim);
    for s in states {
        let d = s.mean() - &mean;
        cov += s.cov();
        cov += &d * d.transpose();
    }
    cov /= n as f64;
    GaussianState::from_parts_unchecked(mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resource(delta: f64) -> SqueezedThermalSpec {
        SqueezedThermalSpec::new(1.78, delta).unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn averaged_one_mode_channel_is_ideal_plus_momentum_blur() {
        let spec = resource(1.3);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let input = crate::gaussian::random_physical_state(&mut rng, 2).unwrap();
        for m in [0.0, 0.7, -1.2] {
            let averaged = one_mode_gate_averaged(&input, 1, m, spec).unwrap();
            let ideal = one_mode_gate_ideal(2, 1, m).unwrap().apply_to(&input).unwrap();
            let expected = momentum_blur(&ideal, 1, spec.epsilon()).unwrap();
            assert!(max_abs_diff(averaged.cov(), expected.cov()) < 1e-12, "m = {m}");
            let mean_diff = (averaged.mean() - expected.mean())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(mean_diff < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn averaged_channel_ignores_excess_antisqueezing() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let input = crate::gaussian::random_physical_state(&mut rng, 3).unwrap();
        let reference = one_mode_gate_averaged(&input, 0, 0.4, resource(0.0)).unwrap();
        for delta in [0.5, 1.0, 2.0, 4.0] {
            let noisy = one_mode_gate_averaged(&input, 0, 0.4, resource(delta)).unwrap();
            assert!(
                max_abs_diff(noisy.cov(), reference.cov()) < 1e-12,
                "delta = {delta}"
            );
        }
    }

    #[test]
    fn conditioned_one_mode_output_depends_on_kappa() {
        // Single vacuum input, identity gate, fixed nonzero outcome: the
        // conditioned q-variance is κ/(1 + 2κ), manifestly κ-dependent.
        let input = GaussianState::vacuum(1).unwrap();
        for delta in [0.0, 2.0] {
            let spec = resource(delta);
            let kappa = spec.kappa();
            let (out, record) = one_mode_gate_conditioned(&input, 0, 0.0, spec, 0.9).unwrap();
            assert!((out.q_variance(0) - kappa / (1.0 + 2.0 * kappa)).abs() < 1e-12);
            // Outcome density: the measured operator spreads as ½ + κ.
            let var = 0.5 + kappa;
            let expected =
                (-0.5 * 0.9 * 0.9 / var).exp() / (std::f64::consts::TAU * var).sqrt();
            assert!((record.outcomes[0].density - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form_average() {
        let spec = resource(1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let input = crate::gaussian::random_physical_state(&mut rng, 2).unwrap();
        let exact = one_mode_gate_averaged(&input, 0, 0.5, spec).unwrap();
        let mc = one_mode_gate_monte_carlo(&input, 0, 0.5, spec, 4000, 99).unwrap();
        let scale = exact
            .cov()
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(max_abs_diff(mc.cov(), exact.cov()) / scale < 0.05);
    }

    #[test]
    fn averaged_two_mode_channel_is_cz_minus_one_plus_blur() {
        let spec = resource(2.0);
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let input = crate::gaussian::random_physical_state(&mut rng, 3).unwrap();
        let averaged = two_mode_gate_averaged(&input, 0, 2, spec).unwrap();
        let ideal = two_mode_gate_ideal(3, 0, 2).unwrap().apply_to(&input).unwrap();
        let eps = spec.epsilon();
        let expected = momentum_blur(&momentum_blur(&ideal, 0, eps).unwrap(), 2, eps).unwrap();
        assert!(max_abs_diff(averaged.cov(), expected.cov()) < 1e-12);
        let mean_diff = (averaged.mean() - expected.mean())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(mean_diff < 1e-12);
    }

    #[test]
    fn two_mode_joint_density_factorizes_correctly() {
        // The product of the recorded densities must equal the joint density
        // of (r, t); check against the bivariate normal built from the
        // pre-measurement covariance.
        let spec = resource(0.7);
        let input = GaussianState::vacuum(2).unwrap();
        let (r, t) = (0.6, -1.1);
        let (_, record) = two_mode_gate_conditioned(&input, 0, 1, spec, r, t).unwrap();
        let joint_recorded: f64 = record.outcomes.iter().map(|o| o.density).product();

        let pre = two_mode_pre_measurement(&input, 0, 1, spec).unwrap();
        let (oa, ob) = (pre.p_index(2), pre.p_index(3));
        let saa = pre.cov()[(oa, oa)];
        let sbb = pre.cov()[(ob, ob)];
        let sab = pre.cov()[(oa, ob)];
        let det = saa * sbb - sab * sab;
        let quad = (sbb * r * r - 2.0 * sab * r * t + saa * t * t) / det;
        let expected = (-0.5 * quad).exp() / (std::f64::consts::TAU * det.sqrt());
        assert!(
            (joint_recorded - expected).abs() < 1e-12,
            "recorded {joint_recorded}, expected {expected}"
        );
    }

    #[test]
    fn two_mode_monte_carlo_agrees_with_closed_form() {
        let spec = resource(0.5);
        let input = GaussianState::vacuum(2).unwrap();
        let exact = two_mode_gate_averaged(&input, 0, 1, spec).unwrap();
        let mc = two_mode_gate_monte_carlo(&input, 0, 1, spec, 4000, 7).unwrap();
        assert!(max_abs_diff(mc.cov(), exact.cov()) < 0.06);
    }

    #[test]
    fn noise_budget_of_identity_chain_alternates() {
        let spec = resource(3.0);
        let eps = spec.epsilon();
        for k in 1..=6usize {
            let ledger = averaged_noise_budget(&vec![0.0; k], spec).unwrap();
            let expected_q = (k / 2) as f64 * eps;
            let expected_p = k.div_ceil(2) as f64 * eps;
            assert!(
                (ledger.q_variance(0) - expected_q).abs() < 1e-14,
                "k = {k}: q {}",
                ledger.q_variance(0)
            );
            assert!(
                (ledger.p_variance(0) - expected_p).abs() < 1e-14,
                "k = {k}: p {}",
                ledger.p_variance(0)
            );
        }
    }

    #[test]
    fn gate_records_serialize() {
        let spec = resource(1.0);
        let input = GaussianState::vacuum(1).unwrap();
        let (_, record) = one_mode_gate_conditioned(&input, 0, 0.3, spec, 0.2).unwrap();
        let json = serde_json::to_string(&record).unwrap();
        let back: GateStepRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn invalid_modes_are_rejected() {
        let spec = resource(0.0);
        let input = GaussianState::vacuum(2).unwrap();
        assert!(matches!(
            one_mode_gate_averaged(&input, 2, 0.0, spec),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(matches!(
            two_mode_gate_averaged(&input, 1, 1, spec),
            Err(Error::DuplicateMode(1))
        ));
        assert!(matches!(
            one_mode_gate_monte_carlo(&input, 0, 0.0, spec, 0, 1),
            Err(Error::EmptyInput)
        ));
    }
}
