//! Small dense complex linear-algebra kernels shared across the crate.
//!
//! Everything here works on `ndarray` matrices of `Complex64`. The kernels
//! are deliberately simple — matrices in this crate are at most a few hundred
//! rows — and tuned for determinism rather than peak speed: iterative methods
//! use fixed seeded starts so repeated runs agree bitwise.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seed for the deterministic starting vectors of the iterative kernels.
const START_SEED: u64 = 0x5eed;

/// Conjugate transpose.
pub fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

/// Maximum column sum of absolute values (the induced 1-norm).
pub fn one_norm(m: &Array2<Complex64>) -> f64 {
    let mut best = 0.0_f64;
    for col in m.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Euclidean norm of a complex vector.
pub fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Draws `n` standard complex Gaussian entries (independent real and
/// imaginary parts) from `rng`.
pub(crate) fn complex_gaussian(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

fn seeded_start(n: usize) -> Array1<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v = Array1::from(complex_gaussian(&mut rng, n));
    let norm = l2_norm(v.as_slice().unwrap());
    if norm > 0.0 {
        v.mapv_inplace(|z| z / norm);
    }
    v
}

/// Largest singular value of `m` together with a unit right-singular vector,
/// by power iteration on the Gram operator `m* m`.
///
/// Converges when successive singular-value estimates differ by less than
/// `tol * max(1, sigma)` or after `max_iter` steps, whichever comes first.
pub fn sigma_max(m: &Array2<Complex64>, tol: f64, max_iter: usize) -> (f64, Array1<Complex64>) {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return (0.0, Array1::zeros(n));
    }
    let madj = adjoint(m);
    let mut v = seeded_start(n);
    let mut sigma = 0.0_f64;
    for _ in 0..max_iter {
        let w = m.dot(&v);
        let next = l2_norm(w.as_slice().unwrap());
        let u = madj.dot(&w);
        let unorm = l2_norm(u.as_slice().unwrap());
        let done = (next - sigma).abs() <= tol * next.max(1.0);
        sigma = next;
        if unorm < 1e-300 {
            // Image collapsed: v is (numerically) in the kernel of the Gram
            // operator, so the current estimate is as good as it gets.
            return (sigma, v);
        }
        v = u.mapv(|z| z / unorm);
        if done {
            break;
        }
    }
    (sigma, v)
}

/// Leading `count` singular values of `m`, largest first, by power iteration
/// with deflation against previously found right-singular vectors.
pub fn top_singular_values(
    m: &Array2<Complex64>,
    count: usize,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = m.ncols();
    let count = count.min(n);
    let madj = adjoint(m);
    let mut basis: Vec<Array1<Complex64>> = Vec::with_capacity(count);
    let mut sigmas = Vec::with_capacity(count);
    for k in 0..count {
        let mut v = seeded_start(n);
        // Re-seed the start differently per component so a start orthogonal
        // to the next singular space cannot recur.
        if k > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(START_SEED.wrapping_add(k as u64));
            v = Array1::from(complex_gaussian(&mut rng, n));
        }
        orthogonalize(&mut v, &basis);
        let norm = l2_norm(v.as_slice().unwrap());
        if norm < 1e-300 {
            sigmas.push(0.0);
            continue;
        }
        v.mapv_inplace(|z| z / norm);
        let mut sigma = 0.0_f64;
        for _ in 0..max_iter {
            let w = m.dot(&v);
            let next = l2_norm(w.as_slice().unwrap());
            let mut u = madj.dot(&w);
            orthogonalize(&mut u, &basis);
            let unorm = l2_norm(u.as_slice().unwrap());
            let done = (next - sigma).abs() <= tol * next.max(1.0);
            sigma = next;
            if unorm < 1e-300 {
                break;
            }
            v = u.mapv(|z| z / unorm);
            if done {
                break;
            }
        }
        sigmas.push(sigma);
        basis.push(v);
    }
    sigmas
}

fn orthogonalize(v: &mut Array1<Complex64>, basis: &[Array1<Complex64>]) {
    // Two rounds of classical Gram-Schmidt are enough at these sizes.
    for _ in 0..2 {
        for b in basis {
            let proj: Complex64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= proj * bi;
            }
        }
    }
}

/// Inverse of a square matrix by Gauss–Jordan elimination with partial
/// pivoting, or `None` if a pivot degenerates.
pub fn invert(m: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let mut a = m.clone();
    let mut inv: Array2<Complex64> = Array2::eye(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[[i, col]]
                    .norm()
                    .partial_cmp(&a[[j, col]].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[[pivot_row, col]].norm() < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap([pivot_row, j], [col, j]);
                inv.swap([pivot_row, j], [col, j]);
            }
        }
        let pivot = a[[col, col]];
        for j in 0..n {
            a[[col, j]] /= pivot;
            inv[[col, j]] /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[[row, col]];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let acj = a[[col, j]];
                let icj = inv[[col, j]];
                a[[row, j]] -= factor * acj;
                inv[[row, j]] -= factor * icj;
            }
        }
    }
    Some(inv)
}

/// Matrix exponential by 13th-order Padé approximation with scaling and
/// squaring. Returns `None` if the result overflows to non-finite entries.
pub fn matrix_exp(m: &Array2<Complex64>) -> Option<Array2<Complex64>> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64_764_752_532_480_000.0, 32_382_376_266_240_000.0, 7_771_770_303_897_600.0,
        1_187_353_796_428_800.0, 129_060_195_264_000.0, 10_559_470_521_600.0,
        670_442_572_800.0, 33_522_128_640.0, 1_323_241_920.0, 40_840_800.0,
        960_960.0, 16_380.0, 182.0, 1.0,
    ];
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let norm = one_norm(m);
    if !norm.is_finite() {
        return None;
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = m.mapv(|z| z / 2f64.powi(s as i32));
    let eye: Array2<Complex64> = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = &a6 * B[13] + &a4 * B[11] + &a2 * B[9];
    let u = a.dot(&(a6.dot(&u_inner) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &eye * B[1]));
    let v_inner = &a6 * B[12] + &a4 * B[10] + &a2 * B[8];
    let v = a6.dot(&v_inner) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &eye * B[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut result = invert(&q)?.dot(&p);
    for _ in 0..s {
        result = result.dot(&result);
    }
    if result.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(result)
    } else {
        None
    }
}

/// Largest eigenvalue of the Hermitian part `(m + m*) / 2`.
///
/// This is the initial growth rate of `t -> ||exp(t m)||` at `t = 0`; it is
/// nonpositive exactly when the semigroup generated by `m` is a contraction
/// in the Euclidean norm.
pub fn numerical_abscissa(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let herm = (m + &adjoint(m)).mapv(|z| z * 0.5);
    // Shift to make the operator positive definite so power iteration finds
    // the top of the spectrum rather than the largest magnitude.
    let shift = one_norm(&herm) + 1.0;
    let eye: Array2<Complex64> = Array2::eye(n);
    let shifted = &herm + &(eye * Complex64::new(shift, 0.0));
    let mut v = seeded_start(n);
    let mut lambda = 0.0_f64;
    for _ in 0..10_000 {
        let w = shifted.dot(&v);
        let norm = l2_norm(w.as_slice().unwrap());
        if norm < 1e-300 {
            break;
        }
        let next = norm - shift;
        let done = (next - lambda).abs() <= 1e-13 * norm.max(1.0);
        lambda = next;
        v = w.mapv(|z| z / norm);
        if done {
            break;
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sigma_max_matches_diagonal() {
        let m = Array2::from_diag(&Array1::from(vec![c(3.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0)]));
        let (sigma, v) = sigma_max(&m, 1e-14, 10_000);
        assert_relative_eq!(sigma, 3.0, epsilon = 1e-10);
        assert_relative_eq!(l2_norm(v.as_slice().unwrap()), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn top_singular_values_are_sorted_and_complete() {
        let m = Array2::from_shape_fn((4, 4), |(i, j)| c((i * 7 + j * 3) as f64 % 5.0, j as f64 - i as f64));
        let sigmas = top_singular_values(&m, 4, 1e-13, 20_000);
        assert_eq!(sigmas.len(), 4);
        for w in sigmas.windows(2) {
            assert!(w[0] >= w[1] - 1e-8, "not sorted: {:?}", sigmas);
        }
        // Frobenius norm equals the root of the sum of squared singular values.
        let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let from_sigmas: f64 = sigmas.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert_relative_eq!(frob, from_sigmas, epsilon = 1e-8);
    }

    #[test]
    fn invert_roundtrip() {
        let m = Array2::from_shape_fn((3, 3), |(i, j)| {
            c(1.0 / (1.0 + (i + 2 * j) as f64), (i as f64 - j as f64) * 0.3)
        });
        let inv = invert(&m).expect("matrix is nonsingular");
        let prod = m.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod[[i, j]].re, expect, epsilon = 1e-10);
                assert_relative_eq!(prod[[i, j]].im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn invert_rejects_singular() {
        let mut m: Array2<Complex64> = Array2::zeros((2, 2));
        m[[0, 0]] = c(1.0, 0.0);
        m[[1, 0]] = c(2.0, 0.0);
        assert!(invert(&m).is_none());
    }

    #[test]
    fn matrix_exp_of_diagonal() {
        let m = Array2::from_diag(&Array1::from(vec![c(1.0, 0.0), c(-2.0, 1.0)]));
        let e = matrix_exp(&m).unwrap();
        assert_relative_eq!(e[[0, 0]].re, 1.0f64.exp(), epsilon = 1e-12);
        let expect = c(-2.0, 1.0).exp();
        assert_relative_eq!(e[[1, 1]].re, expect.re, epsilon = 1e-12);
        assert_relative_eq!(e[[1, 1]].im, expect.im, epsilon = 1e-12);
        assert_relative_eq!(e[[0, 1]].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn matrix_exp_nilpotent_is_polynomial() {
        // Strictly upper triangular: exp is I + N.
        let mut m: Array2<Complex64> = Array2::zeros((2, 2));
        m[[0, 1]] = c(5.0, -3.0);
        let e = matrix_exp(&m).unwrap();
        assert_relative_eq!(e[[0, 0]].re, 1.0, epsilon = 1e-13);
        assert_relative_eq!(e[[0, 1]].re, 5.0, epsilon = 1e-12);
        assert_relative_eq!(e[[0, 1]].im, -3.0, epsilon = 1e-12);
        assert_relative_eq!(e[[1, 1]].re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn abscissa_of_skew_hermitian_is_zero() {
        // Skew-Hermitian generators give unitary groups: abscissa 0.
        let mut m: Array2<Complex64> = Array2::zeros((2, 2));
        m[[0, 1]] = c(0.0, 2.0);
        m[[1, 0]] = c(0.0, 2.0);
        assert!(numerical_abscissa(&m).abs() < 1e-10);
    }

    #[test]
    fn abscissa_of_hermitian_is_top_eigenvalue() {
        let m = Array2::from_diag(&Array1::from(vec![c(-3.0, 0.0), c(0.7, 0.0)]));
        assert_relative_eq!(numerical_abscissa(&m), 0.7, epsilon = 1e-9);
    }
}
