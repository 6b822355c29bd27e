//! Randomized invariants over the core algebra: things that should hold for
//! every state, transform, lattice and squeezing level, not just the worked
//! examples.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cvcluster::cluster::{one_mode_gate_ideal, FlowerbedGraph};
use cvcluster::gaussian::{
    condition_on_quadrature, random_physical_state, symplectic_form, GaussianState, Quadrature,
    SqueezedThermalSpec, SymplecticTransform,
};
use cvcluster::grid::{GridSpec, GridWigner};
use cvcluster::threshold::{SqueezingLevel, ThresholdModel};

fn seeded_state(seed: u64, n_modes: usize) -> GaussianState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    random_physical_state(&mut rng, n_modes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn random_states_are_physical_and_symmetric(seed in 0u64..1 << 48, n in 1usize..4) {
        let state = seeded_state(seed, n);
        let nu_min = state
            .symplectic_eigenvalues()
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        prop_assert!(nu_min >= 0.5 - 1e-9, "nu_min {nu_min}");
        let asym = (state.cov() - state.cov().transpose()).amax();
        prop_assert!(asym < 1e-12, "asymmetry {asym}");
    }

    #[test]
    fn gate_words_stay_symplectic_with_unit_determinant(
        seed in 0u64..1 << 48,
        steps in prop::collection::vec((0u8..4, -1.5f64..1.5), 1..10),
    ) {
        let _ = seed;
        let mut word = SymplecticTransform::identity(2);
        for (kind, x) in steps {
            let step = match kind {
                0 => SymplecticTransform::shear(2, 0, x).unwrap(),
                1 => SymplecticTransform::fourier(2, 1).unwrap(),
                2 => SymplecticTransform::cz(2, 0, 1, x).unwrap(),
                _ => one_mode_gate_ideal(2, 0, x).unwrap(),
            };
            word = step.compose(&word).unwrap();
        }
        let s = word.matrix();
        let omega = symplectic_form(2);
        prop_assert!((s.transpose() * &omega * s - &omega).amax() < 1e-10);
        prop_assert!((s.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditioning_covariance_ignores_the_outcome_value(
        seed in 0u64..1 << 48,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let state = seeded_state(seed, 2);
        let at_a = condition_on_quadrature(&state, 1, Quadrature::Q, a).unwrap();
        let at_b = condition_on_quadrature(&state, 1, Quadrature::Q, b).unwrap();
        let gap = (at_a.state.cov() - at_b.state.cov()).amax();
        prop_assert!(gap < 1e-12, "covariance moved by {gap}");
    }

    #[test]
    fn tensor_factors_keep_their_moments(seed in 0u64..1 << 48) {
        let left = seeded_state(seed, 1);
        let right = seeded_state(seed ^ 0xDEAD_BEEF, 2);
        let joint = left.tensor(&right);
        prop_assert_eq!(joint.n_modes(), 3);
        // Left factor occupies mode 0, right factor modes 1..3; the joint
        // covariance carries no cross terms between the factors.
        prop_assert!((joint.mean()[joint.q_index(0)] - left.mean()[0]).abs() < 1e-15);
        prop_assert!((joint.cov()[(joint.q_index(0), joint.q_index(0))] - left.cov()[(0, 0)]).abs() < 1e-15);
        for k in 0..2 {
            let jq = joint.q_index(1 + k);
            prop_assert!((joint.cov()[(jq, jq)] - right.cov()[(k, k)]).abs() < 1e-15);
            prop_assert!(joint.cov()[(joint.q_index(0), jq)].abs() < 1e-15);
        }
    }

    #[test]
    fn squeezed_thermal_state_matches_its_spec(
        s in 1.0f64..3.0,
        delta in prop_oneof![Just(0.0f64), 0.01f64..4.0],
    ) {
        let spec = SqueezedThermalSpec::new(s, delta).unwrap();
        let state = GaussianState::squeezed_thermal(spec);
        prop_assert!((state.q_variance(0) - spec.kappa()).abs() < 1e-15);
        prop_assert!((state.p_variance(0) - spec.epsilon()).abs() < 1e-15);
        prop_assert_eq!(spec.is_pure(), delta == 0.0);
        // kappa * epsilon = (1 + (delta/s)^2) / 4: exactly the vacuum
        // uncertainty product when pure, strictly above it otherwise.
        let purity_product = spec.kappa() * spec.epsilon();
        if delta == 0.0 {
            prop_assert!((purity_product - 0.25).abs() < 1e-15);
        } else {
            prop_assert!(purity_product > 0.25 + 1e-7);
        }
    }

    #[test]
    fn lattice_deletion_prunes_exactly_the_incident_edges(
        seed in 0u64..1 << 48,
        rows in 1usize..4,
        cols in 2usize..5,
    ) {
        let resource = SqueezedThermalSpec::new(1.78, 1.0).unwrap();
        let mut graph = FlowerbedGraph::build(rows, cols, resource).unwrap();
        let full_edges = graph.edges().len();
        let node = seed as usize % (rows * cols);
        let degree = graph
            .edges()
            .iter()
            .filter(|e| e.a == node || e.b == node)
            .count();
        graph.delete_node_with_outcome(node, 0.3).unwrap();
        prop_assert_eq!(graph.nodes().len(), rows * cols - 1);
        prop_assert_eq!(graph.edges().len(), full_edges - degree);
        prop_assert!(graph.edges().iter().all(|e| e.a != node && e.b != node));
    }

    #[test]
    fn misbin_probability_is_monotone_in_squeezing(
        db in 12.0f64..25.0,
        bump in 0.1f64..5.0,
    ) {
        let model = ThresholdModel::default_calibration();
        let lo = model.misbin(SqueezingLevel::from_db(db).unwrap()).unwrap();
        let hi = model.misbin(SqueezingLevel::from_db(db + bump).unwrap()).unwrap();
        prop_assert!(hi < lo, "p({db}) = {lo} but p({}) = {hi}", db + bump);
    }

    #[test]
    fn required_squeezing_inverts_the_misbin_model(exp in 2.0f64..10.0) {
        let target = 10f64.powf(-exp);
        let model = ThresholdModel::default_calibration();
        let level = model.required_squeezing(target).unwrap();
        let achieved = model.misbin(level).unwrap();
        // The inverse bisects the level to 1e-9 dB, which maps to a few
        // parts in 1e9 of probability at the steep end of the curve.
        prop_assert!((achieved - target).abs() / target < 1e-7);
    }

    #[test]
    fn grid_discretization_reproduces_gaussian_moments(
        s in 1.0f64..1.6,
        delta in 0.0f64..1.0,
        dq in -0.5f64..0.5,
    ) {
        let spec = SqueezedThermalSpec::new(s, delta).unwrap();
        let shifted = SymplecticTransform::displace_q(1, 0, dq)
            .unwrap()
            .apply_to(&GaussianState::squeezed_thermal(spec))
            .unwrap();
        let grid = GridWigner::discretize(GridSpec::new(128, 8.0).unwrap(), &shifted).unwrap();
        let mom = grid.moments().unwrap();
        // The variance bound is set by window truncation: the q tail past
        // the extent contributes up to ~3e-8 for the widest states here.
        prop_assert!((mom.mass - 1.0).abs() < 1e-8, "mass {}", mom.mass);
        prop_assert!((mom.mean_q - dq).abs() < 1e-8);
        prop_assert!((mom.var_q - spec.kappa()).abs() < 1e-6);
        prop_assert!((mom.var_p - spec.epsilon()).abs() < 1e-6);
    }

    #[test]
    fn state_json_round_trips_exactly(seed in 0u64..1 << 48) {
        let state = seeded_state(seed, 2);
        let json = serde_json::to_string(&state).unwrap();
        let back: GaussianState = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
        prop_assert!((state.mean() - back.mean()).amax() == 0.0);
        prop_assert!((state.cov() - back.cov()).amax() == 0.0);
    }
}
