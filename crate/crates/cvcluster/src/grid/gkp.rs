use super::{GridSpec, GridWigner};
use crate::{Error, Result};

/// The approximate grid-encoded logical zero on a phase-space grid, from the
/// closed form of its Wigner function.
///
/// The wavefunction is a comb of Gaussian teeth of variance Δ²/2 centered at
/// the even multiples of √π, under a Gaussian envelope of variance 1/(2Δ²):
///
///   ψ(q) ∝ Σₙ exp(−Δ²μₙ²/2) · exp(−(q − μₙ)²/(2Δ²)),   μₙ = 2n√π.
///
/// The Wigner function of a real comb is a double sum over tooth pairs,
///
///   W(q, p) ∝ e^(−Δ²p²) Σⱼₖ aⱼaₖ exp(−(q − μ̄ⱼₖ)²/Δ²) · cos(p(μⱼ − μₖ)),
///
/// with μ̄ⱼₖ the pair midpoint; the j≠k cross terms carry the cosine
/// interference that makes the function negative between the teeth. The
/// normalization ∫∫W = 1 uses the matching closed form of ‖ψ‖², so no
/// numerical integration enters anywhere.
pub fn gkp_zero(spec: GridSpec, delta: f64) -> Result<GridWigner> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidToothWidth(delta));
    }
    let spacing = 2.0 * std::f64::consts::PI.sqrt();
    // Teeth a little beyond the grid edge still leak mass inside; anything
    // farther than 4Δ + one spacing past the edge cannot reach it.
    let reach = spec.half_extent() + 4.0 * delta + spacing;
    let n_max = (reach / spacing).ceil() as i64;
    let teeth: Vec<f64> = (-n_max..=n_max).map(|n| n as f64 * spacing).collect();
    let weights: Vec<f64> = teeth
        .iter()
        .map(|mu| (-0.5 * delta * delta * mu * mu).exp())
        .collect();

    // ‖ψ‖² = Δ√π Σⱼₖ aⱼaₖ exp(−(μⱼ−μₖ)²/(4Δ²)); the pair-distance Gaussian
    // kills all j≠k terms at any sensible Δ, but keep them for exactness.
    let mut norm = 0.0;
    for (j, &mu_j) in teeth.iter().enumerate() {
        for (k, &mu_k) in teeth.iter().enumerate() {
            let d = mu_j - mu_k;
            norm += weights[j] * weights[k] * (-d * d / (4.0 * delta * delta)).exp();
        }
    }
    norm *= delta * std::f64::consts::PI.sqrt();

    let prefactor = delta / std::f64::consts::PI.sqrt() / norm;
    let inv_d2 = 1.0 / (delta * delta);
    Ok(GridWigner::from_fn(spec, |q, p| {
        let mut sum = 0.0;
        for (j, &mu_j) in teeth.iter().enumerate() {
            for (k, &mu_k) in teeth.iter().enumerate() {
                let mid = 0.5 * (mu_j + mu_k);
                let dq = q - mid;
                let gauss = (-dq * dq * inv_d2).exp();
                if gauss > 0.0 {
                    sum += weights[j] * weights[k] * gauss * (p * (mu_j - mu_k)).cos();
                }
            }
        }
        prefactor * (-delta * delta * p * p).exp() * sum
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Quadrature;

    fn standard() -> GridWigner {
        gkp_zero(GridSpec::new(256, 8.0).unwrap(), 0.25).unwrap()
    }

    #[test]
    fn gkp_zero_is_normalized_up_to_envelope_truncation() {
        // The grid reaches 2.8σ of the Δ = 0.25 envelopes, so it holds all
        // mass except the ~1% analytic Gaussian tails.
        let grid = standard();
        assert!(grid.mass() > 0.985 && grid.mass() < 0.9995, "mass {}", grid.mass());

        // On a grid that comfortably contains the envelopes the closed-form
        // normalization integrates to one tightly; the leftover is the
        // erfc(4) ≈ 1.5e-8 momentum-envelope tail beyond the extent.
        let wide = gkp_zero(GridSpec::new(384, 16.0).unwrap(), 0.25).unwrap();
        assert!((wide.mass() - 1.0).abs() < 1e-7, "mass {}", wide.mass());
    }

    #[test]
    fn gkp_zero_has_negative_interference_fringes() {
        let grid = standard();
        assert!(grid.min_value() < -1e-3, "min {}", grid.min_value());
    }

    #[test]
    fn gkp_zero_is_even_in_both_quadratures() {
        let grid = standard();
        let n = grid.spec().n();
        for i in (0..n).step_by(17) {
            for j in (0..n).step_by(13) {
                let w = grid.data()[[i, j]];
                assert!((w - grid.data()[[n - 1 - i, n - 1 - j]]).abs() < 1e-12);
                assert!((w - grid.data()[[i, n - 1 - j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn position_marginal_peaks_on_even_teeth() {
        let grid = standard();
        let spec = grid.spec();
        let marginal = grid.marginal(Quadrature::Q);
        let value_at = |x: f64| {
            let idx = ((x + spec.half_extent()) / spec.step() - 0.5).round() as usize;
            marginal[idx]
        };
        let root_pi = std::f64::consts::PI.sqrt();
        // Teeth sit at even multiples of √π; odd multiples are valleys.
        assert!(value_at(0.0) > 10.0 * value_at(root_pi));
        assert!(value_at(2.0 * root_pi) > 10.0 * value_at(root_pi));
    }

    #[test]
    fn tooth_width_is_validated() {
        let spec = GridSpec::new(64, 8.0).unwrap();
        assert!(matches!(gkp_zero(spec, 0.0), Err(Error::InvalidToothWidth(_))));
        assert!(matches!(gkp_zero(spec, 1.0), Err(Error::InvalidToothWidth(_))));
    }

    #[test]
    fn narrower_teeth_sharpen_the_momentum_envelope() {
        let spec = GridSpec::new(128, 8.0).unwrap();
        let wide = gkp_zero(spec, 0.4).unwrap();
        let narrow = gkp_zero(spec, 0.2).unwrap();
        // Smaller Δ means a broader p-envelope, so more variance in p.
        let mp_wide = wide.moments().unwrap().var_p;
        let mp_narrow = narrow.moments().unwrap().var_p;
        assert!(mp_narrow > mp_wide);
    }
}
