//! Complex strict-convexity probes for window norms.
//!
//! A norm is complex strictly convex when no point of the unit sphere is
//! the center of a nondegenerate analytic disc `x + zeta * y`, `|zeta| <= 1`,
//! lying entirely inside the closed unit ball. Hybrid norms with a sup-type
//! component (the star norm, plain `linf`) fail this: a unit bulk leaves
//! room for a whole disc in an uncoupled coordinate. Euclidean and `l1`
//! norms have no such flat spots.
//!
//! [`csc_witness_search`] hunts for such discs — first over ordered basis
//! pairs, which catches every coordinate-aligned flat deterministically,
//! then over seeded random pairs — and returns the disc it finds as a
//! checkable certificate. [`verify_witness`] re-audits a certificate on a
//! denser boundary sample, and [`cuc_modulus_estimate`] quantifies the
//! phenomenon: how much a disc of a given radius forces its center inside
//! the ball.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::complex_gaussian;
use crate::opnorm::mix_seed;
use crate::vector_norms::{eval_norm, spec_compatible, IndexedVector, NormSpec, Window};

/// Slack admitted when testing membership of the unit ball.
pub const FEAS_TOL: f64 = 1e-9;
/// Smallest disc radius that counts as a convexity failure.
pub const WITNESS_FLOOR: f64 = 0.1;
/// Boundary phases sampled during feasibility checks.
pub const ZETA_SAMPLES: usize = 64;

/// An analytic disc witnessing a failure of complex strict convexity:
/// `||x|| = 1` yet `||x + zeta * y|| <= 1 + FEAS_TOL` for all `|zeta| <= 1`.
#[derive(Debug, Clone)]
pub struct ConvexityWitness {
    /// Disc center, on the unit sphere.
    pub x: IndexedVector,
    /// Disc direction, of norm at least [`WITNESS_FLOOR`].
    pub y: IndexedVector,
    /// `max ||x + zeta y|| - 1` over the audit sample (can be negative).
    pub sup_violation: f64,
}

fn unit_circle(samples: usize) -> Vec<Complex64> {
    (0..samples)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / samples as f64))
        .collect()
}

fn normalized(spec: &NormSpec, x: &IndexedVector) -> Result<Option<IndexedVector>> {
    let n = eval_norm(spec, x)?;
    if n == 0.0 || !n.is_finite() {
        return Ok(None);
    }
    Ok(Some(IndexedVector::new(
        x.window(),
        x.values().iter().map(|z| z / n).collect(),
    )?))
}

/// Largest norm of `x + zeta * scale * d` over `zeta` in `{0}` and the
/// sampled unit circle.
fn disc_extent(
    spec: &NormSpec,
    x: &IndexedVector,
    d: &IndexedVector,
    scale: f64,
    samples: usize,
) -> Result<f64> {
    let mut worst = eval_norm(spec, x)?;
    for zeta in unit_circle(samples) {
        let shifted = IndexedVector::new(
            x.window(),
            x.values()
                .iter()
                .zip(d.values())
                .map(|(xi, di)| xi + zeta * scale * di)
                .collect(),
        )?;
        worst = worst.max(eval_norm(spec, &shifted)?);
    }
    Ok(worst)
}

/// Tries to inflate a disc centered at unit vector `x` along direction `d`.
/// Returns a witness when a radius of at least [`WITNESS_FLOOR`] fits.
fn probe_pair(spec: &NormSpec, x: &IndexedVector, d: &IndexedVector) -> Result<Option<ConvexityWitness>> {
    let feasible = |t: f64| -> Result<bool> {
        Ok(disc_extent(spec, x, d, t, ZETA_SAMPLES)? <= 1.0 + FEAS_TOL)
    };
    if !feasible(WITNESS_FLOOR)? {
        return Ok(None);
    }
    let mut lo = WITNESS_FLOOR;
    let mut hi = 2.0;
    if feasible(hi)? {
        lo = hi;
    } else {
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let y = IndexedVector::new(x.window(), d.values().iter().map(|z| z * lo).collect())?;
    let witness = ConvexityWitness {
        x: x.clone(),
        y,
        sup_violation: 0.0,
    };
    let extent = verify_witness(spec, &witness, 4 * ZETA_SAMPLES)?;
    Ok(Some(ConvexityWitness {
        sup_violation: extent - 1.0,
        ..witness
    }))
}

/// Searches for a complex strict-convexity failure of `spec` on `window`.
///
/// The deterministic first pass probes every ordered pair of basis vectors
/// (center from the first, disc direction from the second); `trials` seeded
/// random pairs follow. Returns the first witness found, or `None` when the
/// norm resisted every probe — evidence of, not proof of, strict convexity.
pub fn csc_witness_search(
    spec: &NormSpec,
    window: Window,
    trials: usize,
    seed: u64,
) -> Result<Option<ConvexityWitness>> {
    spec_compatible(spec, &window)?;
    for j in window.indices() {
        let Some(x) = normalized(spec, &IndexedVector::basis(window, j)?)? else {
            continue;
        };
        for k in window.indices() {
            if k == j {
                continue;
            }
            let Some(d) = normalized(spec, &IndexedVector::basis(window, k)?)? else {
                continue;
            };
            if let Some(w) = probe_pair(spec, &x, &d)? {
                return Ok(Some(w));
            }
        }
    }
    let n = window.len();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, trial as u64));
        let raw_x = IndexedVector::new(window, complex_gaussian(&mut rng, n))?;
        let raw_d = IndexedVector::new(window, complex_gaussian(&mut rng, n))?;
        let (Some(x), Some(d)) = (normalized(spec, &raw_x)?, normalized(spec, &raw_d)?) else {
            continue;
        };
        if let Some(w) = probe_pair(spec, &x, &d)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Re-audits a witness disc on `boundary_samples` phases plus the center,
/// returning the largest norm encountered.
pub fn verify_witness(
    spec: &NormSpec,
    witness: &ConvexityWitness,
    boundary_samples: usize,
) -> Result<f64> {
    if boundary_samples < 4 {
        return Err(Error::invalid("boundary_samples", "need at least 4"));
    }
    disc_extent(spec, &witness.x, &witness.y, 1.0, boundary_samples)
}

/// Estimates the disc-fitting modulus of `spec` at radius `epsilon`:
/// one minus the largest `s` such that some disc `s u + epsilon D d`
/// (`u`, `d` unit vectors, `D` the closed unit disc) fits inside the unit
/// ball. Zero means an `epsilon`-disc fits with its center on the sphere —
/// the flat-spot phenomenon — while a Euclidean norm forces the center in
/// to `sqrt(1 - epsilon^2)`.
pub fn cuc_modulus_estimate(
    spec: &NormSpec,
    window: Window,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid("epsilon", "must lie in (0, 1]"));
    }
    spec_compatible(spec, &window)?;

    let mut pairs: Vec<(IndexedVector, IndexedVector)> = Vec::new();
    for j in window.indices() {
        for k in window.indices() {
            if k == j {
                continue;
            }
            let (u, d) = (
                normalized(spec, &IndexedVector::basis(window, j)?)?,
                normalized(spec, &IndexedVector::basis(window, k)?)?,
            );
            if let (Some(u), Some(d)) = (u, d) {
                pairs.push((u, d));
            }
        }
    }
    let n = window.len();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0xC0C0, trial as u64));
        let raw_u = IndexedVector::new(window, complex_gaussian(&mut rng, n))?;
        let raw_d = IndexedVector::new(window, complex_gaussian(&mut rng, n))?;
        if let (Some(u), Some(d)) = (normalized(spec, &raw_u)?, normalized(spec, &raw_d)?) {
            pairs.push((u, d));
        }
    }

    let mut best_s = 0.0_f64;
    for (u, d) in &pairs {
        let feasible = |s: f64| -> Result<bool> {
            let scaled = IndexedVector::new(
                u.window(),
                u.values().iter().map(|z| z * s).collect(),
            )?;
            Ok(disc_extent(spec, &scaled, d, epsilon, ZETA_SAMPLES)? <= 1.0 + FEAS_TOL)
        };
        if feasible(1.0)? {
            best_s = 1.0;
            break;
        }
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best_s = best_s.max(lo);
    }
    Ok(1.0 - best_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Window {
        Window::symmetric(2)
    }

    #[test]
    fn star_norm_carries_a_coordinate_disc() {
        let w = csc_witness_search(&NormSpec::Star, window(), 0, 7)
            .unwrap()
            .expect("star norm has flat spots");
        // Structured pass: center at the first bulk basis vector, disc
        // pointing along coordinate 1 with radius about 1.
        assert!((eval_norm(&NormSpec::Star, &w.x).unwrap() - 1.0).abs() < 1e-12);
        assert!((w.x.entry(-2).norm() - 1.0).abs() < 1e-12);
        let radius = w.y.entry(1).norm();
        assert!((0.9..=1.1).contains(&radius), "disc radius {radius}");
        assert!(w.sup_violation <= 2.0 * FEAS_TOL);
        let extent = verify_witness(&NormSpec::Star, &w, 512).unwrap();
        assert!(extent <= 1.0 + 2.0 * FEAS_TOL);
    }

    #[test]
    fn sup_norm_carries_a_coordinate_disc() {
        let w = csc_witness_search(&NormSpec::sup(), window(), 0, 7)
            .unwrap()
            .expect("sup norm has flat spots");
        assert!((w.x.entry(-2).norm() - 1.0).abs() < 1e-12);
        assert!((w.y.entry(-1).norm() - 1.0).abs() < 0.1);
        assert!(verify_witness(&NormSpec::sup(), &w, 512).unwrap() <= 1.0 + 2.0 * FEAS_TOL);
    }

    #[test]
    fn euclidean_norm_resists_the_search() {
        let found = csc_witness_search(&NormSpec::l2(), window(), 300, 7).unwrap();
        assert!(found.is_none(), "Euclidean balls have no analytic flat discs");
    }

    #[test]
    fn one_norm_resists_the_search() {
        let found = csc_witness_search(&NormSpec::Lp(1.0), window(), 300, 7).unwrap();
        assert!(found.is_none(), "complex l1 is strictly convex");
    }

    #[test]
    fn sum_coupled_blocks_resist_the_search() {
        use crate::absolute_norms::PsiFunction;
        // Additive coupling of two Euclidean blocks stays strictly convex.
        let spec = NormSpec::PsiSum {
            psi: PsiFunction::One,
            part0: vec![-2, -1, 0],
            part1: vec![1, 2],
            norm0: Box::new(NormSpec::l2()),
            norm1: Box::new(NormSpec::l2()),
        };
        let found = csc_witness_search(&spec, window(), 200, 7).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn disc_fitting_modulus_separates_the_geometries() {
        // Flat-spot norms admit a full unit disc at the sphere.
        let flat = cuc_modulus_estimate(&NormSpec::sup(), window(), 1.0, 50, 3).unwrap();
        assert!(flat <= 1e-6, "sup-norm modulus {flat}");
        let star = cuc_modulus_estimate(&NormSpec::Star, window(), 1.0, 50, 3).unwrap();
        assert!(star <= 1e-6, "star modulus {star}");
        // A Euclidean ball forces the center to sqrt(1 - eps^2).
        let l2_full = cuc_modulus_estimate(&NormSpec::l2(), window(), 1.0, 50, 3).unwrap();
        assert!(l2_full >= 0.9, "Euclidean modulus at radius 1: {l2_full}");
        let l2_part = cuc_modulus_estimate(&NormSpec::l2(), window(), 0.6, 50, 3).unwrap();
        assert!((l2_part - 0.2).abs() <= 0.01, "expected about 1 - sqrt(0.64), got {l2_part}");
    }

    #[test]
    fn modulus_validates_epsilon() {
        assert!(cuc_modulus_estimate(&NormSpec::l2(), window(), 0.0, 10, 1).is_err());
        assert!(cuc_modulus_estimate(&NormSpec::l2(), window(), 1.5, 10, 1).is_err());
    }
}
