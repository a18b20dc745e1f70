//! Landau–Kolmogorov-type inequalities along matrix semigroups.
//!
//! For a matrix `B` whose semigroup `e^{tB}` stays bounded by `K`, the norm
//! of `B w` is controlled by the geometric mean of `||w||` and `||B^2 w||`:
//! the classical square-function inequality caps the ratio
//! `||Bw||^2 / (K^2 ||w|| ||B^2 w||)` at `4`. This module builds test
//! generators (explicit matrices, certified contractions, seeded random
//! contractions), measures their semigroup bound over a time window, and
//! samples the inequality and its higher-order relatives over random
//! vectors.
//!
//! Contractions are certified through the numerical abscissa: when the
//! Hermitian part of `B` is negative semidefinite, `||e^{tB}|| <= 1` for
//! every `t >= 0`, so the bound `K = 1` is global rather than
//! window-measured and the cap of `4` is rigorous, not empirical.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, complex_gaussian, l2_norm, matrix_exp, numerical_abscissa, sigma_max};
use crate::opnorm::mix_seed;

/// Largest matrix dimension accepted by the semigroup machinery.
pub const MAX_DIM: usize = 8;
/// Numerical-abscissa slack under which a matrix counts as a contraction
/// generator.
pub const CONTRACTION_TOL: f64 = 1e-12;

/// A generator together with its certified or measured semigroup bound.
#[derive(Debug, Clone)]
pub struct GeneratorCase {
    matrix: Array2<Complex64>,
    bound: f64,
    contraction: bool,
}

fn validate_matrix(m: &Array2<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidShape(format!(
            "generator must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > MAX_DIM {
        return Err(Error::invalid(
            "matrix",
            format!("dimension {} exceeds the supported {}", m.nrows(), MAX_DIM),
        ));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    Ok(())
}

impl GeneratorCase {
    /// Wraps `matrix`, certifying it as a contraction when its numerical
    /// abscissa is nonpositive and otherwise measuring the semigroup bound
    /// on `[0, t_max]` at `steps` evenly spaced times.
    pub fn new(matrix: Array2<Complex64>, t_max: f64, steps: usize) -> Result<Self> {
        validate_matrix(&matrix)?;
        if numerical_abscissa(&matrix) <= CONTRACTION_TOL {
            return Ok(GeneratorCase {
                matrix,
                bound: 1.0,
                contraction: true,
            });
        }
        let bound = semigroup_bound(&matrix, t_max, steps)?;
        Ok(GeneratorCase {
            matrix,
            bound,
            contraction: false,
        })
    }

    /// Wraps a matrix that must already generate a contraction semigroup.
    pub fn contraction(matrix: Array2<Complex64>) -> Result<Self> {
        validate_matrix(&matrix)?;
        let omega = numerical_abscissa(&matrix);
        if omega > CONTRACTION_TOL {
            return Err(Error::invalid(
                "matrix",
                format!("numerical abscissa {omega:.3e} is positive; not a contraction generator"),
            ));
        }
        Ok(GeneratorCase {
            matrix,
            bound: 1.0,
            contraction: true,
        })
    }

    /// A seeded random contraction generator: a complex Gaussian matrix
    /// shifted down by its own numerical abscissa (plus a hair), which
    /// pushes the Hermitian part just below zero.
    pub fn random_contraction(n: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::invalid("n", format!("need 1..={MAX_DIM} rows")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n as f64).sqrt();
        let mut g = Array2::from_shape_vec((n, n), complex_gaussian(&mut rng, n * n))
            .expect("shape matches sample count");
        g.mapv_inplace(|z| z * scale);
        let omega = numerical_abscissa(&g);
        for d in 0..n {
            g[[d, d]] -= omega + 1e-9;
        }
        GeneratorCase::contraction(g)
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// Semigroup bound `K`: global (`1`) for contractions, window-measured
    /// otherwise.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_contraction(&self) -> bool {
        self.contraction
    }
}

/// Measures `max ||e^{tB}||` over `steps` evenly spaced times in
/// `(0, t_max]`, together with the value `1` at `t = 0`. Fails with the
/// first time at which the propagator stops being finite.
pub fn semigroup_bound(m: &Array2<Complex64>, t_max: f64, steps: usize) -> Result<f64> {
    validate_matrix(m)?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::invalid("t_max", "must be positive and finite"));
    }
    if steps < 10 {
        return Err(Error::invalid("steps", "need at least 10"));
    }
    let h = t_max / steps as f64;
    let step = matrix_exp(&m.mapv(|z| z * h))
        .ok_or(Error::UnboundedOverWindow { t: h })?;
    let mut propagator: Array2<Complex64> = Array2::eye(m.nrows());
    let mut worst = 1.0_f64;
    for i in 1..=steps {
        propagator = step.dot(&propagator);
        let t = h * i as f64;
        if propagator.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::UnboundedOverWindow { t });
        }
        // Scale out the largest entry so the Gram iteration cannot overflow
        // while the propagator itself is still finite.
        let peak = propagator.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        let sigma = if peak == 0.0 {
            0.0
        } else {
            let (unit_sigma, _) = sigma_max(&propagator.mapv(|z| z / peak), 1e-11, 20_000);
            peak * unit_sigma
        };
        if !sigma.is_finite() {
            return Err(Error::UnboundedOverWindow { t });
        }
        worst = worst.max(sigma);
    }
    Ok(worst)
}

/// Samples the square-function ratio `||Bw||^2 / (K^2 ||w|| ||B^2 w||)`
/// over seeded Gaussian vectors, returning the largest ratio seen. Vectors
/// with `||B^2 w||` below `1e-12` are skipped (there the inequality is
/// void); if every sample is skipped the ratio is reported as `0`. With
/// `use_adjoint` the samples probe `B*` instead, which generates the
/// adjoint semigroup with the same bound.
pub fn check_kallman_rota(
    case: &GeneratorCase,
    trials: usize,
    seed: u64,
    use_adjoint: bool,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one sample"));
    }
    let b = if use_adjoint {
        adjoint(case.matrix())
    } else {
        case.matrix().clone()
    };
    let n = b.nrows();
    let k2 = case.bound() * case.bound();
    let mut worst = 0.0_f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, trial as u64));
        let w = ndarray::Array1::from(complex_gaussian(&mut rng, n));
        let bw = b.dot(&w);
        let bbw = b.dot(&bw);
        let n0 = l2_norm(w.as_slice().expect("contiguous"));
        let n1 = l2_norm(bw.as_slice().expect("contiguous"));
        let n2 = l2_norm(bbw.as_slice().expect("contiguous"));
        if n2 < 1e-12 || n0 == 0.0 {
            continue;
        }
        let ratio = (n1 * n1) / (k2 * (n0 * n2));
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Samples the higher-order ratio
/// `||B^k w||^n / ((||B^n w|| + ||w||)^k ||w||^{n-k})` for `2 <= n <= 5`,
/// `1 <= k < n`, returning the largest value seen over seeded Gaussian
/// vectors.
pub fn check_rota_ratio(
    case: &GeneratorCase,
    n: u32,
    k: u32,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(2..=5).contains(&n) {
        return Err(Error::invalid("n", "need 2..=5"));
    }
    if k == 0 || k >= n {
        return Err(Error::invalid("k", "need 1..=n-1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one sample"));
    }
    let b = case.matrix();
    let dim = b.nrows();
    let mut worst = 0.0_f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0x40_74, trial as u64));
        let w = ndarray::Array1::from(complex_gaussian(&mut rng, dim));
        let mut powers = vec![l2_norm(w.as_slice().expect("contiguous"))];
        let mut cur = w;
        for _ in 0..n {
            cur = b.dot(&cur);
            powers.push(l2_norm(cur.as_slice().expect("contiguous")));
        }
        let n0 = powers[0];
        let nk = powers[k as usize];
        let nn = powers[n as usize];
        if n0 == 0.0 {
            continue;
        }
        let num = nk.powi(n as i32);
        let den = (nn + n0).powi(k as i32) * n0.powi((n - k) as i32);
        if den == 0.0 {
            continue;
        }
        worst = worst.max(num / den);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn minus_identity(n: usize) -> Array2<Complex64> {
        Array2::from_diag_elem(n, c(-1.0, 0.0))
    }

    #[test]
    fn nilpotent_window_bound() {
        let mut m: Array2<Complex64> = Array2::zeros((2, 2));
        m[[0, 1]] = c(1.0, 0.0);
        let case = GeneratorCase::new(m, 2.0, 200).unwrap();
        assert!(!case.is_contraction());
        // sup over [0, 2] of the largest singular value of [[1, t], [0, 1]]
        // is attained at t = 2 and equals 1 + sqrt(2).
        assert_relative_eq!(case.bound(), 2.414213562373095, epsilon = 1e-9);
    }

    #[test]
    fn contraction_certificates() {
        let case = GeneratorCase::contraction(minus_identity(3)).unwrap();
        assert!(case.is_contraction());
        assert_eq!(case.bound(), 1.0);
        // A positive-abscissa matrix is refused the certificate...
        let expanding = Array2::from_diag_elem(2, c(1.0, 0.0));
        assert!(GeneratorCase::contraction(expanding.clone()).is_err());
        // ...but `new` falls back to measuring its window bound.
        let case = GeneratorCase::new(expanding, 1.0, 20).unwrap();
        assert!(!case.is_contraction());
        assert_relative_eq!(case.bound(), std::f64::consts::E, epsilon = 1e-6);
    }

    #[test]
    fn minus_identity_square_ratio_is_exactly_one() {
        let case = GeneratorCase::contraction(minus_identity(3)).unwrap();
        let ratio = check_kallman_rota(&case, 50, 11, false).unwrap();
        assert_eq!(ratio.to_bits(), 1.0_f64.to_bits());
        let ratio = check_kallman_rota(&case, 50, 11, true).unwrap();
        assert_eq!(ratio.to_bits(), 1.0_f64.to_bits());
    }

    #[test]
    fn minus_identity_higher_ratio_is_exactly_a_quarter() {
        let case = GeneratorCase::contraction(minus_identity(4)).unwrap();
        let ratio = check_rota_ratio(&case, 3, 2, 50, 11).unwrap();
        assert_eq!(ratio.to_bits(), 0.25_f64.to_bits());
    }

    #[test]
    fn random_contractions_respect_the_cap() {
        for seed in 0..6u64 {
            let n = 2 + (seed as usize) % 3;
            let case = GeneratorCase::random_contraction(n, seed).unwrap();
            assert!(case.is_contraction());
            let ratio = check_kallman_rota(&case, 200, seed, seed % 2 == 1).unwrap();
            assert!(
                (0.0..=4.0 + 1e-9).contains(&ratio),
                "seed {seed}: ratio {ratio} escapes [0, 4]"
            );
        }
    }

    #[test]
    fn nilpotent_second_power_voids_the_ratio() {
        let mut m: Array2<Complex64> = Array2::zeros((2, 2));
        m[[0, 1]] = c(1.0, 0.0);
        let case = GeneratorCase::new(m, 2.0, 50).unwrap();
        // B^2 = 0, so every sample is rejected and the ratio degenerates.
        assert_eq!(check_kallman_rota(&case, 50, 3, false).unwrap(), 0.0);
    }

    #[test]
    fn runaway_semigroup_is_reported_with_its_time() {
        let m = Array2::from_diag_elem(1, c(50.0, 0.0));
        let err = semigroup_bound(&m, 20.0, 100).unwrap_err();
        match err {
            Error::UnboundedOverWindow { t } => {
                assert!((14.0..14.5).contains(&t), "overflow at t = {t}");
            }
            other => panic!("expected an overflow report, got {other:?}"),
        }
    }

    #[test]
    fn parameter_validation() {
        let m = minus_identity(2);
        assert!(semigroup_bound(&m, 0.0, 100).is_err());
        assert!(semigroup_bound(&m, 1.0, 5).is_err());
        assert!(GeneratorCase::random_contraction(0, 1).is_err());
        assert!(GeneratorCase::random_contraction(MAX_DIM + 1, 1).is_err());
        let case = GeneratorCase::contraction(m).unwrap();
        assert!(check_rota_ratio(&case, 1, 1, 10, 1).is_err());
        assert!(check_rota_ratio(&case, 6, 2, 10, 1).is_err());
        assert!(check_rota_ratio(&case, 3, 0, 10, 1).is_err());
        assert!(check_rota_ratio(&case, 3, 3, 10, 1).is_err());
        assert!(check_kallman_rota(&case, 0, 1, false).is_err());
    }

    proptest! {
        // Splitting the square-function bound with a free parameter: for
        // contraction generators, ||Bw|| <= eps ||B^2 w|| + (1/eps + eps) ||w||.
        #[test]
        fn interpolation_with_a_free_parameter(seed in 0u64..200, eps in 0.05f64..20.0) {
            let case = GeneratorCase::random_contraction(3, seed).unwrap();
            let b = case.matrix();
            for trial in 0..10u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0xE0, trial));
                let w = ndarray::Array1::from(complex_gaussian(&mut rng, 3));
                let bw = b.dot(&w);
                let bbw = b.dot(&bw);
                let n0 = l2_norm(w.as_slice().unwrap());
                let n1 = l2_norm(bw.as_slice().unwrap());
                let n2 = l2_norm(bbw.as_slice().unwrap());
                prop_assert!(n1 <= eps * n2 + (1.0 / eps + eps) * n0 + 1e-9 * (n0 + n2));
            }
        }
    }
}
