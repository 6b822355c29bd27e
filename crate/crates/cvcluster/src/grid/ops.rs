use ndarray::{Array2, ArrayView1};

use super::{GridSpec, GridWigner};
use crate::gaussian::Quadrature;
use crate::{Error, Result};

/// Keys cubic convolution kernel with a = −1/2 (third-order accurate).
fn keys_kernel(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        (1.5 * s - 2.5) * s * s + 1.0
    } else if s < 2.0 {
        ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0
    } else {
        0.0
    }
}

/// Tap indices and weights for interpolating at physical coordinate `y`.
/// Values outside the grid read as zero, which is the right boundary
/// condition for decaying Wigner functions.
fn keys_taps(spec: GridSpec, y: f64) -> ([isize; 4], [f64; 4]) {
    let u = (y + spec.half_extent()) / spec.step() - 0.5;
    let base = u.floor();
    let frac = u - base;
    let base = base as isize;
    (
        [base - 1, base, base + 1, base + 2],
        [
            keys_kernel(frac + 1.0),
            keys_kernel(frac),
            keys_kernel(frac - 1.0),
            keys_kernel(frac - 2.0),
        ],
    )
}

/// 1-D Keys interpolation of a sampled axis at physical coordinate `y`.
pub(crate) fn interp_1d(values: ArrayView1<f64>, spec: GridSpec, y: f64) -> f64 {
    let ([i0, i1, i2, i3], [w0, w1, w2, w3]) = keys_taps(spec, y);
    let n = values.len() as isize;
    let sample = |i: isize, w: f64| {
        if w != 0.0 && (0..n).contains(&i) {
            w * values[i as usize]
        } else {
            0.0
        }
    };
    sample(i0, w0) + sample(i1, w1) + sample(i2, w2) + sample(i3, w3)
}

/// Bicubic (separable Keys) evaluation of a grid Wigner function at an
/// arbitrary phase-space point.
pub fn interpolate(grid: &GridWigner, q: f64, p: f64) -> f64 {
    let spec = grid.spec();
    let (rows, row_w) = keys_taps(spec, q);
    let n = spec.n() as isize;
    let mut value = 0.0;
    for (ri, &r) in rows.iter().enumerate() {
        if row_w[ri] != 0.0 && (0..n).contains(&r) {
            value += row_w[ri] * interp_1d(grid.data().row(r as usize), spec, p);
        }
    }
    value
}

/// Convolves one axis with a centered Gaussian kernel of the given variance
/// by direct quadrature (dense kernel matrix, no periodic wraparound).
///
/// The kernel must be resolved by the grid; a standard deviation under half
/// a step would alias, so it is rejected.
pub fn convolve_axis(
    grid: &GridWigner,
    axis: Quadrature,
    variance: f64,
) -> Result<GridWigner> {
    if !variance.is_finite() || variance <= 0.0 {
        return Err(Error::NonPositiveBlur(variance));
    }
    let spec = grid.spec();
    let h = spec.step();
    if variance.sqrt() < 0.5 * h {
        return Err(Error::InvalidGridSpec(format!(
            "blur sigma {} under half the grid step {h}",
            variance.sqrt()
        )));
    }
    let pts = spec.points();
    let norm = h / (std::f64::consts::TAU * variance).sqrt();
    let kernel = Array2::from_shape_fn((spec.n(), spec.n()), |(a, b)| {
        let d = pts[a] - pts[b];
        norm * (-0.5 * d * d / variance).exp()
    });
    let data = match axis {
        Quadrature::Q => kernel.dot(grid.data()),
        Quadrature::P => grid.data().dot(&kernel),
    };
    Ok(GridWigner::from_data(spec, data))
}

/// The Fourier gate as an exact index remap: with W'(x) = W(F⁻¹x) and
/// F: (q, p) ↦ (−p, q), cell centering gives W'[i, j] = W[j, n−1−i] with no
/// interpolation at all.
pub fn fourier_remap(grid: &GridWigner) -> GridWigner {
    let spec = grid.spec();
    let n = spec.n();
    let data = Array2::from_shape_fn((n, n), |(i, j)| grid.data()[[j, n - 1 - i]]);
    GridWigner::from_data(spec, data)
}

/// Applies a linear symplectic phase-space map S to the grid:
/// W'(x) = W(S⁻¹x), evaluated by bicubic interpolation. `s` is row-major
/// [[a, b], [c, d]] acting on (q, p); det S must be 1 to 1e-12.
pub fn substitute_symplectic(grid: &GridWigner, s: &[[f64; 2]; 2]) -> Result<GridWigner> {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if (det - 1.0).abs() > 1e-12 {
        return Err(Error::NotSymplectic {
            defect: (det - 1.0).abs(),
        });
    }
    // Inverse of a unit-determinant 2×2.
    let inv = [[s[1][1], -s[0][1]], [-s[1][0], s[0][0]]];
    let spec = grid.spec();
    let pts = spec.points();
    let data = Array2::from_shape_fn((spec.n(), spec.n()), |(i, j)| {
        let q = inv[0][0] * pts[i] + inv[0][1] * pts[j];
        let p = inv[1][0] * pts[i] + inv[1][1] * pts[j];
        interpolate(grid, q, p)
    });
    Ok(GridWigner::from_data(spec, data))
}

/// Shifts the grid along one axis by `amount` (W'(x) = W(x − shift·ê)),
/// interpolating off-grid values.
pub fn shift_axis(grid: &GridWigner, axis: Quadrature, amount: f64) -> GridWigner {
    let spec = grid.spec();
    let n = spec.n();
    let pts = spec.points();
    let mut data = Array2::zeros((n, n));
    match axis {
        Quadrature::Q => {
            for i in 0..n {
                let ([a0, a1, a2, a3], w) = keys_taps(spec, pts[i] - amount);
                for (tap, weight) in [(a0, w[0]), (a1, w[1]), (a2, w[2]), (a3, w[3])] {
                    if weight != 0.0 && (0..n as isize).contains(&tap) {
                        let src = grid.data().row(tap as usize);
                        let mut dst = data.row_mut(i);
                        dst.scaled_add(weight, &src);
                    }
                }
            }
        }
        Quadrature::P => {
            for j in 0..n {
                let ([a0, a1, a2, a3], w) = keys_taps(spec, pts[j] - amount);
                for (tap, weight) in [(a0, w[0]), (a1, w[1]), (a2, w[2]), (a3, w[3])] {
                    if weight != 0.0 && (0..n as isize).contains(&tap) {
                        let src = grid.data().column(tap as usize);
                        let mut dst = data.column_mut(j);
                        dst.scaled_add(weight, &src);
                    }
                }
            }
        }
    }
    GridWigner::from_data(spec, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{GaussianState, SymplecticTransform};
    use nalgebra::{DMatrix, DVector};

    fn vacuum_grid(n: usize, l: f64) -> GridWigner {
        let spec = GridSpec::new(n, l).unwrap();
        GridWigner::discretize(spec, &GaussianState::vacuum(1).unwrap()).unwrap()
    }

    #[test]
    fn keys_kernel_partitions_unity_on_grid_points() {
        // At zero fractional offset the kernel reproduces values exactly.
        assert_eq!(keys_kernel(0.0), 1.0);
        assert_eq!(keys_kernel(1.0), 0.0);
        assert_eq!(keys_kernel(2.0), 0.0);
        // Partition of unity for arbitrary offsets.
        for frac in [0.1, 0.25, 0.5, 0.9] {
            let total = keys_kernel(frac + 1.0)
                + keys_kernel(frac)
                + keys_kernel(frac - 1.0)
                + keys_kernel(frac - 2.0);
            assert!((total - 1.0).abs() < 1e-15, "frac {frac}");
        }
    }

    #[test]
    fn interpolation_is_exact_on_grid_points_and_close_off_grid() {
        let grid = vacuum_grid(128, 8.0);
        let spec = grid.spec();
        let w = grid.data()[[60, 70]];
        assert!((interpolate(&grid, spec.point(60), spec.point(70)) - w).abs() < 1e-15);

        let (q, p) = (0.37f64, -0.81f64);
        let exact = (-(q * q + p * p)).exp() / std::f64::consts::PI;
        assert!((interpolate(&grid, q, p) - exact).abs() < 1e-5);
    }

    #[test]
    fn fourier_remap_is_exact_and_of_order_four() {
        let spec = GridSpec::new(64, 6.0).unwrap();
        // An asymmetric smooth function to rule out accidental symmetry.
        let grid = GridWigner::from_fn(spec, |q, p| {
            (-(q - 0.7).powi(2) - (p + 0.3).powi(2)).exp() * (1.0 + 0.2 * q)
        });
        let once = fourier_remap(&grid);
        let twice = fourier_remap(&once);
        let four = fourier_remap(&fourier_remap(&twice));
        assert_eq!(four, grid);
        // F² is the parity flip.
        let n = spec.n();
        for i in (0..n).step_by(7) {
            for j in (0..n).step_by(11) {
                assert_eq!(twice.data()[[i, j]], grid.data()[[n - 1 - i, n - 1 - j]]);
            }
        }
    }

    #[test]
    fn fourier_remap_matches_covariance_transformation() {
        let mean = DVector::from_vec(vec![0.4, -0.2]);
        let cov = DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.6]);
        let state = GaussianState::from_parts(mean, cov).unwrap();
        let spec = GridSpec::new(128, 8.0).unwrap();
        let grid = GridWigner::discretize(spec, &state).unwrap();

        let rotated = SymplecticTransform::fourier(1, 0)
            .unwrap()
            .apply_to(&state)
            .unwrap();
        let expected = GridWigner::discretize(spec, &rotated).unwrap();
        let diff = fourier_remap(&grid).compare(&expected).unwrap();
        assert!(diff.l_inf < 1e-13, "l_inf {}", diff.l_inf);
    }

    #[test]
    fn convolution_matches_gaussian_covariance_addition() {
        let grid = vacuum_grid(128, 8.0);
        let blurred = convolve_axis(&grid, Quadrature::P, 0.25).unwrap();

        let mut cov = DMatrix::identity(2, 2) * 0.5;
        cov[(1, 1)] = 0.75;
        let expected_state = GaussianState::from_parts(DVector::zeros(2), cov).unwrap();
        let expected = GridWigner::discretize(grid.spec(), &expected_state).unwrap();
        let diff = blurred.compare(&expected).unwrap();
        assert!(diff.l_inf < 1e-12, "l_inf {}", diff.l_inf);
    }

    #[test]
    fn convolution_rejects_unresolvable_kernels() {
        let grid = vacuum_grid(32, 8.0);
        assert!(matches!(
            convolve_axis(&grid, Quadrature::P, 0.0),
            Err(Error::NonPositiveBlur(_))
        ));
        assert!(matches!(
            convolve_axis(&grid, Quadrature::P, 1e-4),
            Err(Error::InvalidGridSpec(_))
        ));
    }

    #[test]
    fn shear_substitution_matches_covariance_transformation() {
        let state = GaussianState::vacuum(1).unwrap();
        let spec = GridSpec::new(256, 8.0).unwrap();
        let grid = GridWigner::discretize(spec, &state).unwrap();
        let m = 0.6;
        let substituted = substitute_symplectic(&grid, &[[1.0, 0.0], [m, 1.0]]).unwrap();

        let sheared = SymplecticTransform::shear(1, 0, m)
            .unwrap()
            .apply_to(&state)
            .unwrap();
        let expected = GridWigner::discretize(spec, &sheared).unwrap();
        let diff = substituted.compare(&expected).unwrap();
        assert!(diff.l_inf < 1e-4, "l_inf {}", diff.l_inf);
        let mom = substituted.moments().unwrap();
        assert!((mom.var_p - 0.5 * (1.0 + m * m)).abs() < 1e-5);
        assert!((mom.cov_qp - 0.5 * m).abs() < 1e-5);
    }

    #[test]
    fn substitution_rejects_area_changing_maps() {
        let grid = vacuum_grid(32, 6.0);
        assert!(matches!(
            substitute_symplectic(&grid, &[[2.0, 0.0], [0.0, 1.0]]),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn shift_moves_the_mean_without_spreading() {
        let grid = vacuum_grid(128, 8.0);
        let shifted = shift_axis(&grid, Quadrature::Q, 1.3);
        let mom = shifted.moments().unwrap();
        assert!((mom.mean_q - 1.3).abs() < 1e-6, "mean {}", mom.mean_q);
        assert!((mom.var_q - 0.5).abs() < 1e-5);
        assert!((mom.mass - 1.0).abs() < 1e-6);
    }
}
