use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::gaussian::{symplectic_form, GaussianState, SqueezedThermalSpec};
use crate::{Error, Result};

/// The two-mode gate worked out as raw phase-space algebra over the Wigner
/// factor product, with no covariance-formalism conditioning anywhere.
///
/// After the entangling chain in-A-B-in' and the projections p̂_A = r,
/// p̂_B = t, the unmeasured coordinates are z = (q₁, p₁, q₄, p₄, u, v) with
/// u, v the positions of the two resource modes, and the total Wigner
/// function is the factor product
///
///   W_in(q₁, p₁ − u, q₄, p₄ − v) · W_A(u, r − q₁ − v) · W_B(v, t − u − q₄).
///
/// Each factor contributes A_fᵀ Λ_f A_f to a six-variable precision matrix,
/// (u, v) are marginalized by a precision-form Schur complement, and the
/// outcome pair's own distribution comes from the same assembly with (r, t)
/// promoted to variables. Everything downstream (conditioned states, the
/// outcome-averaged channel, pointwise values) is read off that assembly.
struct Assembly {
    /// Conditional covariance of (q₁, p₁, q₄, p₄) given the outcomes.
    sigma4: DMatrix<f64>,
    /// Conditional mean is mean_base + mean_r·r + mean_t·t.
    mean_base: DVector<f64>,
    mean_r: DVector<f64>,
    mean_t: DVector<f64>,
    /// Moments of the outcome pair (r, t).
    mu_rt: Vector2<f64>,
    sigma_rt: Matrix2<f64>,
    /// Six-variable pieces kept for pointwise evaluation: precision, linear
    /// coefficients, and the (u, v) block data.
    lam_zz: DMatrix<f64>,
    h0: DVector<f64>,
    hr: DVector<f64>,
    ht: DVector<f64>,
}

/// Factor argument maps. Input arguments are in state ordering
/// (q₁, q₄, p₁, p₄); z is (q₁, p₁, q₄, p₄, u, v).
const A_IN: [[f64; 6]; 4] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 0.0, -1.0],
];
const A_NODE_A: [[f64; 6]; 2] = [
    [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
];
const A_NODE_B: [[f64; 6]; 2] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0, -1.0, 0.0],
];

fn rows_to_matrix<const R: usize>(rows: &[[f64; 6]; R], extra: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(R, 6 + extra);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

fn assemble(input: &GaussianState, resource: SqueezedThermalSpec) -> Result<Assembly> {
    if input.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: 2 * input.n_modes(),
        });
    }
    let sigma_in = input.cov().clone();
    let lam_in = sigma_in
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let lam_node = Matrix2::new(1.0 / resource.kappa(), 0.0, 0.0, 1.0 / resource.epsilon());

    // Precision over Z = (z, r, t): the measured momenta enter the node
    // argument rows with coefficient +1 in their own column; the input
    // factor has no (r, t) coupling.
    let a_in = rows_to_matrix(&A_IN, 2);
    let mut a_a = rows_to_matrix(&A_NODE_A, 2);
    a_a[(1, 6)] = 1.0;
    let mut a_b = rows_to_matrix(&A_NODE_B, 2);
    a_b[(1, 7)] = 1.0;

    let lam_full = a_in.transpose() * &lam_in * &a_in
        + a_a.transpose() * lam_node * &a_a
        + a_b.transpose() * lam_node * &a_b;
    let h_full = a_in.transpose() * &lam_in * input.mean();

    let lam_zz = lam_full.view((0, 0), (6, 6)).into_owned();
    let lam_z_rt = lam_full.view((0, 6), (6, 2)).into_owned();
    let lam_rtrt = lam_full.view((6, 6), (2, 2)).into_owned();
    let h0 = h_full.rows(0, 6).into_owned();
    // Fixing (r, t) shifts the linear term of z by −Λ_z,rt·(r, t).
    let hr = -lam_z_rt.column(0).into_owned();
    let ht = -lam_z_rt.column(1).into_owned();

    // Marginalize (u, v) out of the conditioned six-variable Gaussian.
    let lam_kk = lam_zz.view((0, 0), (4, 4)).into_owned();
    let lam_ku = lam_zz.view((0, 4), (4, 2)).into_owned();
    let lam_uu = lam_zz.view((4, 4), (2, 2)).into_owned();
    let lam_uu_inv = lam_uu
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let lam_marg = &lam_kk - &lam_ku * &lam_uu_inv * lam_ku.transpose();
    let sigma4 = lam_marg
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let fold =
        |h: &DVector<f64>| h.rows(0, 4).into_owned() - &lam_ku * &lam_uu_inv * h.rows(4, 2);
    let mean_base = &sigma4 * fold(&h0);
    let mean_r = &sigma4 * fold(&hr);
    let mean_t = &sigma4 * fold(&ht);

    // Outcome-pair moments: marginalize all six z out of the full Gaussian.
    let lam_zz_inv = lam_zz
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let lam_rt_marg = &lam_rtrt - lam_z_rt.transpose() * &lam_zz_inv * &lam_z_rt;
    let h_rt_marg = -lam_z_rt.transpose() * &lam_zz_inv * &h0;
    let sigma_rt_d = lam_rt_marg
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let mu_rt_d = &sigma_rt_d * h_rt_marg;
    let sigma_rt = Matrix2::new(
        sigma_rt_d[(0, 0)],
        sigma_rt_d[(0, 1)],
        sigma_rt_d[(1, 0)],
        sigma_rt_d[(1, 1)],
    );
    let mu_rt = Vector2::new(mu_rt_d[0], mu_rt_d[1]);

    Ok(Assembly {
        sigma4,
        mean_base,
        mean_r,
        mean_t,
        mu_rt,
        sigma_rt,
        lam_zz,
        h0,
        hr,
        ht,
    })
}

/// Permutation from the internal k-ordering (q₁, p₁, q₄, p₄) to the state
/// ordering (q₁, q₄, p₁, p₄).
fn k_to_state(mean: &DVector<f64>, cov: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let perm = [0usize, 2, 1, 3];
    let m = DVector::from_fn(4, |i, _| mean[perm[i]]);
    let c = DMatrix::from_fn(4, 4, |i, j| cov[(perm[i], perm[j])]);
    (m, c)
}

/// Conditioned two-mode output for pinned outcomes, with the Z(−t), Z(−r)
/// corrections applied, plus the joint probability density of the outcomes.
pub fn two_mode_conditioned_precision(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
    r: f64,
    t: f64,
) -> Result<(GaussianState, f64)> {
    let asm = assemble(input, resource)?;
    let mut mean_k = &asm.mean_base + &asm.mean_r * r + &asm.mean_t * t;
    mean_k[1] -= t; // Z(−t) on the first output momentum
    mean_k[3] -= r; // Z(−r) on the second
    let (mean, cov) = k_to_state(&mean_k, &asm.sigma4);

    let d = Vector2::new(r, t) - asm.mu_rt;
    let det = asm.sigma_rt.determinant();
    let inv = asm
        .sigma_rt
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(det))?;
    let density = (-0.5 * d.dot(&(inv * d))).exp() / (std::f64::consts::TAU * det.sqrt());

    Ok((GaussianState::from_parts(mean, cov)?, density))
}

/// The outcome-averaged two-mode channel from the precision assembly: the
/// law of total covariance applied to the affine outcome dependence of the
/// corrected conditional mean.
pub fn two_mode_averaged_precision(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
) -> Result<GaussianState> {
    let asm = assemble(input, resource)?;
    // Corrected mean = base + (mean_r − ê_{p₄})·r + (mean_t − ê_{p₁})·t.
    let mut gain = DMatrix::zeros(4, 2);
    for i in 0..4 {
        gain[(i, 0)] = asm.mean_r[i];
        gain[(i, 1)] = asm.mean_t[i];
    }
    gain[(3, 0)] -= 1.0;
    gain[(1, 1)] -= 1.0;

    let mu_rt = DVector::from_vec(vec![asm.mu_rt[0], asm.mu_rt[1]]);
    let sigma_rt = DMatrix::from_fn(2, 2, |i, j| asm.sigma_rt[(i, j)]);
    let mean_k = &asm.mean_base + &gain * mu_rt;
    let cov_k = &asm.sigma4 + &gain * sigma_rt * gain.transpose();
    let (mean, cov) = k_to_state(&mean_k, &cov_k);
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::from_parts(mean, cov)
}

fn gauss(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (std::f64::consts::TAU * variance).sqrt()
}

/// Direct evaluation of the three-factor Wigner product at a six-variable
/// point z = (q₁, p₁, q₄, p₄, u, v). Ground truth for the assembly.
pub fn two_mode_factor_product(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
    r: f64,
    t: f64,
    z: &[f64; 6],
) -> Result<f64> {
    if input.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: 2 * input.n_modes(),
        });
    }
    let lam_in = input
        .cov()
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let det_in = input.cov().determinant();
    let args = DVector::from_vec(vec![z[0], z[2], z[1] - z[4], z[3] - z[5]]);
    let d = args - input.mean();
    let norm_in = 1.0 / ((std::f64::consts::TAU).powi(2) * det_in.sqrt());
    let w_in = norm_in * (-0.5 * d.dot(&(&lam_in * &d))).exp();

    let (kappa, eps) = (resource.kappa(), resource.epsilon());
    let w_a = gauss(z[4], kappa) * gauss(r - z[0] - z[5], eps);
    let w_b = gauss(z[5], kappa) * gauss(t - z[4] - z[2], eps);
    Ok(w_in * w_a * w_b)
}

/// Closed-form value of the (u, v)-marginalized factor product at an output
/// point k = (q₁, p₁, q₄, p₄): outcome density times the conditional
/// four-variable Gaussian. No corrections are applied here; this is the raw
/// marginal the quadrature check integrates.
pub fn two_mode_marginalized_value(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
    r: f64,
    t: f64,
    k: &[f64; 4],
) -> Result<f64> {
    let asm = assemble(input, resource)?;
    let mean_k = &asm.mean_base + &asm.mean_r * r + &asm.mean_t * t;
    let kv = DVector::from_vec(k.to_vec());
    let d = kv - mean_k;
    let lam4 = asm
        .sigma4
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(0.0))?;
    let det4 = asm.sigma4.determinant();
    let n4 =
        (-0.5 * d.dot(&(&lam4 * &d))).exp() / ((std::f64::consts::TAU).powi(2) * det4.sqrt());

    let drt = Vector2::new(r, t) - asm.mu_rt;
    let det_rt = asm.sigma_rt.determinant();
    let inv_rt = asm
        .sigma_rt
        .try_inverse()
        .ok_or(Error::DegenerateMarginal(det_rt))?;
    let density =
        (-0.5 * drt.dot(&(inv_rt * drt))).exp() / (std::f64::consts::TAU * det_rt.sqrt());
    Ok(density * n4)
}

/// Validates the algebraic (u, v) marginalization against brute-force 2-D
/// midpoint quadrature of the factor product at the given output points.
/// Returns the largest absolute discrepancy.
pub fn validate_marginalization_by_quadrature(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
    r: f64,
    t: f64,
    points: &[[f64; 4]],
    n_quad: usize,
) -> Result<f64> {
    if points.is_empty() || n_quad < 8 {
        return Err(Error::EmptyInput);
    }
    let asm = assemble(input, resource)?;
    let lam_uu = asm.lam_zz.view((4, 4), (2, 2)).into_owned();
    let lam_uu_inv = lam_uu.try_inverse().ok_or(Error::DegenerateMarginal(0.0))?;
    let lam_uk = asm.lam_zz.view((4, 0), (2, 4)).into_owned();
    let sigma_u = lam_uu_inv[(0, 0)].sqrt().max(lam_uu_inv[(1, 1)].sqrt());

    let mut worst = 0.0f64;
    for k in points {
        let kv = DVector::from_vec(k.to_vec());
        let h_u = asm.h0.rows(4, 2) + asm.hr.rows(4, 2) * r + asm.ht.rows(4, 2) * t;
        let center = &lam_uu_inv * (h_u - &lam_uk * kv);
        let half = 8.0 * sigma_u;
        let step = 2.0 * half / n_quad as f64;
        let mut integral = 0.0;
        for iu in 0..n_quad {
            let u = center[0] - half + (iu as f64 + 0.5) * step;
            for iv in 0..n_quad {
                let v = center[1] - half + (iv as f64 + 0.5) * step;
                integral +=
                    two_mode_factor_product(input, resource, r, t, &[k[0], k[1], k[2], k[3], u, v])?;
            }
        }
        integral *= step * step;
        let closed = two_mode_marginalized_value(input, resource, r, t, k)?;
        worst = worst.max((integral - closed).abs());
    }
    Ok(worst)
}

/// Outcome of testing the two candidate momentum-argument structures for
/// the averaged channel against the assembly.
///
/// Writing the averaged output as W_out(x) = W_blur(Mx), with W_blur the
/// input blurred by ε in both momenta, the canonical candidate
/// M: (q₁, q₄, p₁ + q₄, p₄ + q₁) is the inverse of CZ[−1] and reproduces
/// the channel. The rival reading (q₁, q₄, p₁ + q₄, p₄ + p₁), which couples
/// the two momenta instead, is not even a canonical transformation, so it
/// cannot describe any Gaussian unitary's action.
#[derive(Clone, Copy, Debug)]
pub struct ArgumentVerdict {
    /// max residual of M Σ_out Mᵀ = Σ_blur and M μ_out = μ_blur for the
    /// canonical candidate.
    pub canonical_residual: f64,
    /// The same residual for the rival candidate.
    pub rival_residual: f64,
    /// ‖MᵀΩM − Ω‖∞ for the canonical candidate (zero: it is symplectic).
    pub canonical_symplectic_defect: f64,
    /// ‖MᵀΩM − Ω‖∞ for the rival (one: the momenta fail to commute).
    pub rival_symplectic_defect: f64,
}

pub fn argument_structure_verdict(
    input: &GaussianState,
    resource: SqueezedThermalSpec,
) -> Result<ArgumentVerdict> {
    let averaged = two_mode_averaged_precision(input, resource)?;
    let eps = resource.epsilon();
    let mut sigma_blur = input.cov().clone();
    sigma_blur[(2, 2)] += eps;
    sigma_blur[(3, 3)] += eps;
    let mu_blur = input.mean().clone();

    // State ordering (q₁, q₄, p₁, p₄).
    let canonical = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            1.0, 0.0, 0.0, 1.0,
        ],
    );
    let rival = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, 1.0,
        ],
    );

    let residual = |m: &DMatrix<f64>| -> f64 {
        let cov_resid = (m * averaged.cov() * m.transpose() - &sigma_blur)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mean_resid = (m * averaged.mean() - &mu_blur)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        cov_resid.max(mean_resid)
    };
    let omega = symplectic_form(2);
    let defect = |m: &DMatrix<f64>| -> f64 {
        (m.transpose() * &omega * m - &omega)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    };

    Ok(ArgumentVerdict {
        canonical_residual: residual(&canonical),
        rival_residual: residual(&rival),
        canonical_symplectic_defect: defect(&canonical),
        rival_symplectic_defect: defect(&rival),
    })
}
