//! Scalar shape functions that generate absolute normalized norms on pairs.
//!
//! A *shape function* is a convex function `psi` on `[0, 1]` with
//! `psi(0) = psi(1) = 1` that sits between the envelope `max(1 - t, t)` and
//! the constant `1`. Every such function induces a norm on complex pairs via
//!
//! ```text
//! |(z, v)|  =  (|z| + |v|) * psi(|v| / (|z| + |v|))
//! ```
//!
//! with the envelope itself giving the sup norm and the constant `1` giving
//! the sum norm. Two-block norms built this way combine with the window
//! norms of [`crate::vector_norms`] to produce the product spaces studied by
//! the rest of the crate.
//!
//! Besides evaluation, this module provides:
//!
//! * a membership check (endpoint values, envelope bounds, grid convexity),
//! * contact analysis against the envelope, which governs whether the induced
//!   sum norm preserves complex strict convexity of its factors,
//! * the dual shape function, computed pointwise from the defining
//!   variational formula, and
//! * a plain CSV interchange format (`t,psi`).

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

/// Grid resolution used by [`psi_dual`] when callers take the default.
pub const DUAL_GRID: usize = 4096;

/// Accuracy target for the inner maximization of [`psi_dual`].
pub const DUAL_TOL: f64 = 1e-10;

/// Two values closer than this count as touching in contact analysis.
pub const CONTACT_TOL: f64 = 1e-10;

/// Slack allowed in the membership inequalities.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// The pointwise lower envelope `max(1 - t, t)` of all shape functions.
pub fn envelope(t: f64) -> f64 {
    (1.0 - t).max(t)
}

/// A shape function on `[0, 1]`.
///
/// The `Max` and `One` variants are the two extreme members (sup norm and
/// sum norm); `Power(p)` interpolates between them through the `lp` pair
/// norms; `PiecewiseLinear` represents arbitrary members, including every
/// function returned by [`psi_dual`].
#[derive(Debug, Clone, PartialEq)]
pub enum PsiFunction {
    /// `max(1 - t, t)`: generates the sup norm on pairs.
    Max,
    /// Constant `1`: generates the sum norm on pairs.
    One,
    /// `((1 - t)^p + t^p)^(1/p)` for `p >= 1`: generates the `lp` pair norm.
    Power(f64),
    /// Linear interpolation through `(t, value)` breakpoints covering `[0, 1]`.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl PsiFunction {
    /// Builds the `lp`-generating shape function, requiring `p >= 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::invalid("p", format!("exponent must be >= 1, got {p}")));
        }
        Ok(PsiFunction::Power(p))
    }

    /// Builds a piecewise-linear shape function from breakpoints.
    ///
    /// Breakpoint abscissas must be strictly increasing from exactly `0` to
    /// exactly `1`. Endpoint values within `1e-9` of `1` are snapped to `1`;
    /// all values are clamped into the admissible band
    /// `[max(1 - t, t), 1]` after a `1e-9` validity check so that the stored
    /// function satisfies the defining inequalities exactly.
    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("points", "need at least two breakpoints"));
        }
        for &(t, v) in &points {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::invalid("points", format!("non-finite breakpoint ({t}, {v})")));
            }
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 1.0 {
            return Err(Error::invalid("points", "breakpoints must span exactly [0, 1]"));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("points", "breakpoint abscissas must strictly increase"));
        }
        let mut cleaned = Vec::with_capacity(points.len());
        for (i, &(t, v)) in points.iter().enumerate() {
            let is_endpoint = i == 0 || i == points.len() - 1;
            if is_endpoint {
                if (v - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(
                        "points",
                        format!("endpoint value {v} at t = {t} must equal 1"),
                    ));
                }
                cleaned.push((t, 1.0));
                continue;
            }
            let lo = envelope(t);
            if v < lo - 1e-9 || v > 1.0 + 1e-9 {
                return Err(Error::invalid(
                    "points",
                    format!("value {v} at t = {t} leaves the band [{lo}, 1]"),
                ));
            }
            cleaned.push((t, v.clamp(lo, 1.0)));
        }
        Ok(PsiFunction::PiecewiseLinear(cleaned))
    }

    /// Evaluates the shape function at `t` in `[0, 1]`.
    ///
    /// # Examples
    ///
    /// ```
    /// use resnorm::absolute_norms::PsiFunction;
    /// assert_eq!(PsiFunction::Max.eval(0.25).unwrap(), 0.75);
    /// assert!(PsiFunction::Max.eval(1.1).is_err());
    /// ```
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutsideUnitInterval { value: t });
        }
        Ok(match self {
            PsiFunction::Max => envelope(t),
            PsiFunction::One => 1.0,
            PsiFunction::Power(p) => {
                if *p == 1.0 {
                    1.0
                } else {
                    ((1.0 - t).powf(*p) + t.powf(*p)).powf(1.0 / p)
                }
            }
            PsiFunction::PiecewiseLinear(pts) => {
                let (left, right) = bracket(pts, t);
                if left.0 == t {
                    left.1
                } else if right.0 == t {
                    right.1
                } else {
                    let w = (t - left.0) / (right.0 - left.0);
                    left.1 + w * (right.1 - left.1)
                }
            }
        })
    }

    /// A subgradient slope of the shape function at `t`.
    ///
    /// At kinks (the midpoint of `Max`, breakpoints of `PiecewiseLinear`)
    /// this returns the average of the one-sided slopes, which is a valid
    /// subgradient by convexity. The ascent code in [`crate::opnorm`] only
    /// needs *some* subgradient, so the choice among them is free.
    pub fn slope(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutsideUnitInterval { value: t });
        }
        Ok(match self {
            PsiFunction::Max => {
                if t < 0.5 {
                    -1.0
                } else if t > 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            PsiFunction::One => 0.0,
            PsiFunction::Power(p) => {
                if *p == 1.0 {
                    0.0
                } else {
                    let base = (1.0 - t).powf(*p) + t.powf(*p);
                    base.powf(1.0 / p - 1.0) * (t.powf(p - 1.0) - (1.0 - t).powf(p - 1.0))
                }
            }
            PsiFunction::PiecewiseLinear(pts) => {
                let idx = pts.iter().position(|&(a, _)| a >= t).unwrap_or(pts.len() - 1);
                let seg = |i: usize| (pts[i + 1].1 - pts[i].1) / (pts[i + 1].0 - pts[i].0);
                if pts[idx].0 == t {
                    // Exactly at a breakpoint: average the adjacent slopes.
                    if idx == 0 {
                        seg(0)
                    } else if idx == pts.len() - 1 {
                        seg(idx - 1)
                    } else {
                        0.5 * (seg(idx - 1) + seg(idx))
                    }
                } else {
                    seg(idx - 1)
                }
            }
        })
    }
}

fn bracket(pts: &[(f64, f64)], t: f64) -> ((f64, f64), (f64, f64)) {
    let mut lo = 0;
    let mut hi = pts.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pts[mid].0 <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (pts[lo], pts[hi])
}

/// Norm of the pair with block magnitudes `(z, v)` under the norm generated
/// by `psi`: `(z + v) * psi(v / (z + v))`, with the zero pair mapping to `0`.
pub fn pair_norm(psi: &PsiFunction, z: f64, v: f64) -> Result<f64> {
    if !(z >= 0.0 && v >= 0.0 && z.is_finite() && v.is_finite()) {
        return Err(Error::NegativeModulus { z, v });
    }
    let s = z + v;
    if s == 0.0 {
        return Ok(0.0);
    }
    // Guard against the quotient rounding a hair above 1 when z is tiny.
    let t = (v / s).clamp(0.0, 1.0);
    Ok(s * psi.eval(t)?)
}

/// Checks the defining inequalities of a shape function on a uniform grid.
fn membership_failure(psi: &PsiFunction, grid_n: usize) -> Result<Option<String>> {
    let vals = sample(psi, grid_n)?;
    if (vals[0].1 - 1.0).abs() > MEMBERSHIP_TOL {
        return Ok(Some(format!("psi(0) = {} != 1", vals[0].1)));
    }
    if (vals[grid_n - 1].1 - 1.0).abs() > MEMBERSHIP_TOL {
        return Ok(Some(format!("psi(1) = {} != 1", vals[grid_n - 1].1)));
    }
    for &(t, v) in &vals {
        if !v.is_finite() {
            return Ok(Some(format!("psi({t}) is not finite")));
        }
        if v > 1.0 + MEMBERSHIP_TOL {
            return Ok(Some(format!("psi({t}) = {v} exceeds 1")));
        }
        if v < envelope(t) - MEMBERSHIP_TOL {
            return Ok(Some(format!("psi({t}) = {v} dips below max(1 - t, t)")));
        }
    }
    for w in vals.windows(3) {
        if w[1].1 > 0.5 * (w[0].1 + w[2].1) + MEMBERSHIP_TOL {
            return Ok(Some(format!("midpoint convexity fails near t = {}", w[1].0)));
        }
    }
    Ok(None)
}

fn sample(psi: &PsiFunction, grid_n: usize) -> Result<Vec<(f64, f64)>> {
    let step = 1.0 / (grid_n - 1) as f64;
    (0..grid_n)
        .map(|i| {
            let t = if i == grid_n - 1 { 1.0 } else { i as f64 * step };
            Ok((t, psi.eval(t)?))
        })
        .collect()
}

/// Outcome of [`psi_analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiAnalysis {
    /// Whether the function passed the membership check on the grid.
    pub is_member: bool,
    /// Whether the function stays strictly above the envelope at every
    /// interior grid point (separation more than [`CONTACT_TOL`]).
    ///
    /// When this holds, the two-block sum norm generated by the function
    /// preserves complex uniform and strict convexity of its factors; a
    /// contact with the envelope at an interior point destroys it.
    pub strictly_above_envelope: bool,
    /// Largest interior grid point `t <= 1/2` where the function touches the
    /// descending branch `1 - t` of the envelope, if any.
    pub lower_contact: Option<f64>,
    /// Smallest interior grid point `t >= 1/2` where the function touches the
    /// ascending branch `t` of the envelope, if any.
    pub upper_contact: Option<f64>,
    /// Grid resolution the analysis ran at.
    pub grid_n: usize,
}

/// Analyzes a shape function on a uniform grid of `grid_n >= 100` points:
/// membership, strict separation from the envelope, and envelope contacts.
pub fn psi_analyze(psi: &PsiFunction, grid_n: usize) -> Result<PsiAnalysis> {
    if grid_n < 100 {
        return Err(Error::invalid("grid_n", format!("need at least 100 points, got {grid_n}")));
    }
    let vals = sample(psi, grid_n)?;
    let is_member = membership_failure(psi, grid_n)?.is_none();
    let mut strictly = true;
    let mut lower = None;
    let mut upper = None;
    for &(t, v) in &vals[1..grid_n - 1] {
        if v - envelope(t) <= CONTACT_TOL {
            strictly = false;
        }
        if t <= 0.5 && (v - (1.0 - t)).abs() <= CONTACT_TOL {
            lower = Some(t); // grid is ascending, so the last hit is the largest
        }
        if t >= 0.5 && upper.is_none() && (v - t).abs() <= CONTACT_TOL {
            upper = Some(t);
        }
    }
    Ok(PsiAnalysis {
        is_member,
        strictly_above_envelope: strictly,
        lower_contact: lower,
        upper_contact: upper,
        grid_n,
    })
}

/// Dual shape function, computed on a uniform grid of `grid_n` points.
///
/// The dual at `t` is the supremum over `s` in `[0, 1]` of
///
/// ```text
/// ((1 - t)(1 - s) + t s) / psi(s)
/// ```
///
/// which is again a shape function; duality exchanges the sup and sum
/// generators and fixes the Euclidean one. Each pointwise supremum is
/// bracketed by a 512-point coarse scan and refined by golden-section search
/// until the bracket is narrower than `tol / 16`, so the returned values
/// carry roughly `tol` accuracy even at kinks of the objective.
///
/// The input must pass the membership check on the same grid; the result is
/// returned as [`PsiFunction::PiecewiseLinear`] with `grid_n` breakpoints.
pub fn psi_dual(psi: &PsiFunction, grid_n: usize, tol: f64) -> Result<PsiFunction> {
    if grid_n < 100 {
        return Err(Error::invalid("grid_n", format!("need at least 100 points, got {grid_n}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", format!("tolerance must be positive, got {tol}")));
    }
    if let Some(reason) = membership_failure(psi, grid_n)? {
        return Err(Error::InvalidShape(reason));
    }
    const COARSE: usize = 512;
    let coarse_s: Vec<f64> = (0..=COARSE).map(|j| j as f64 / COARSE as f64).collect();
    let coarse_psi: Vec<f64> = coarse_s.iter().map(|&s| psi.eval(s)).collect::<Result<_>>()?;
    let width_tol = (tol / 16.0).max(1e-14);
    let step = 1.0 / (grid_n - 1) as f64;
    let mut points = Vec::with_capacity(grid_n);
    for i in 0..grid_n {
        let t = if i == grid_n - 1 { 1.0 } else { i as f64 * step };
        let objective = |s: f64| -> f64 {
            let psi_s = psi.eval(s).unwrap_or(f64::NEG_INFINITY);
            ((1.0 - t) * (1.0 - s) + t * s) / psi_s
        };
        let mut best_j = 0;
        let mut best = f64::NEG_INFINITY;
        for (j, (&s, &ps)) in coarse_s.iter().zip(&coarse_psi).enumerate() {
            let q = ((1.0 - t) * (1.0 - s) + t * s) / ps;
            if q > best {
                best = q;
                best_j = j;
            }
        }
        let lo = coarse_s[best_j.saturating_sub(1)];
        let hi = coarse_s[(best_j + 1).min(COARSE)];
        let refined = golden_max(objective, lo, hi, width_tol);
        let value = best.max(refined).clamp(envelope(t), 1.0);
        points.push((t, value));
    }
    PsiFunction::piecewise_linear(points)
}

/// Golden-section search for the maximum of `f` on `[a, b]`, run until the
/// bracket is narrower than `width_tol`. Returns the best value seen at any
/// evaluated point, including the endpoints, which keeps the result reliable
/// when the maximizer sits at a kink.
fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, width_tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = a;
    let mut hi = b;
    let mut best = f(lo).max(f(hi));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width_tol {
        best = best.max(f1).max(f2);
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    best.max(f1).max(f2)
}

/// Writes a shape function as `t,psi` CSV rows.
///
/// Piecewise-linear functions are written breakpoint-for-breakpoint (the
/// representation is exact); other variants are sampled on a uniform grid of
/// `grid_n` points. Floats are printed in Rust's shortest round-trip format,
/// so output is byte-identical across runs.
pub fn write_psi_csv<W: Write>(psi: &PsiFunction, grid_n: usize, mut out: W) -> Result<()> {
    writeln!(out, "t,psi")?;
    match psi {
        PsiFunction::PiecewiseLinear(pts) => {
            for &(t, v) in pts {
                writeln!(out, "{t},{v}")?;
            }
        }
        _ => {
            if grid_n < 2 {
                return Err(Error::invalid("grid_n", "need at least 2 sample points"));
            }
            for (t, v) in sample(psi, grid_n)? {
                writeln!(out, "{t},{v}")?;
            }
        }
    }
    Ok(())
}

/// Reads a shape function from `t,psi` CSV rows, returning it as a validated
/// piecewise-linear function.
pub fn read_psi_csv<R: Read>(input: R) -> Result<PsiFunction> {
    let reader = BufReader::new(input);
    let mut points = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if idx == 0 {
            if line != "t,psi" {
                return Err(Error::Csv {
                    line: 1,
                    message: format!("expected header `t,psi`, got `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |field: Option<&str>, name: &str| -> Result<f64> {
            field
                .ok_or_else(|| Error::Csv {
                    line: idx + 1,
                    message: format!("missing {name} field"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv {
                    line: idx + 1,
                    message: format!("bad {name} value: {e}"),
                })
        };
        let t = parse(fields.next(), "t")?;
        let v = parse(fields.next(), "psi")?;
        if fields.next().is_some() {
            return Err(Error::Csv {
                line: idx + 1,
                message: "too many fields".into(),
            });
        }
        points.push((t, v));
    }
    PsiFunction::piecewise_linear(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_known_values() {
        assert_eq!(PsiFunction::Max.eval(0.25).unwrap(), 0.75);
        assert_eq!(PsiFunction::One.eval(0.9).unwrap(), 1.0);
        assert_relative_eq!(
            PsiFunction::Power(2.0).eval(0.5).unwrap(),
            0.7071067811865476,
            epsilon = 1e-15
        );
        assert_eq!(PsiFunction::Power(1.0).eval(0.3).unwrap(), 1.0);
        assert_eq!(PsiFunction::Power(2.0).eval(0.0).unwrap(), 1.0);
        assert_eq!(PsiFunction::Power(2.0).eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        assert!(matches!(
            PsiFunction::Max.eval(-0.1),
            Err(Error::OutsideUnitInterval { .. })
        ));
        assert!(matches!(
            PsiFunction::One.eval(1.1),
            Err(Error::OutsideUnitInterval { .. })
        ));
        assert!(PsiFunction::Max.eval(f64::NAN).is_err());
    }

    #[test]
    fn piecewise_linear_interpolates() {
        let psi = PsiFunction::piecewise_linear(vec![(0.0, 1.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        assert_eq!(psi.eval(0.5).unwrap(), 0.6);
        assert_relative_eq!(psi.eval(0.25).unwrap(), 0.8, epsilon = 1e-15);
        assert_relative_eq!(psi.eval(0.75).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(psi.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_linear_validates() {
        // Does not span [0, 1].
        assert!(PsiFunction::piecewise_linear(vec![(0.1, 1.0), (1.0, 1.0)]).is_err());
        // Endpoint far from 1.
        assert!(PsiFunction::piecewise_linear(vec![(0.0, 0.8), (1.0, 1.0)]).is_err());
        // Dips below the envelope.
        assert!(PsiFunction::piecewise_linear(vec![(0.0, 1.0), (0.5, 0.3), (1.0, 1.0)]).is_err());
        // Non-monotone abscissas.
        assert!(
            PsiFunction::piecewise_linear(vec![(0.0, 1.0), (0.6, 0.9), (0.4, 0.9), (1.0, 1.0)])
                .is_err()
        );
    }

    #[test]
    fn slopes_are_subgradients() {
        assert_eq!(PsiFunction::Max.slope(0.2).unwrap(), -1.0);
        assert_eq!(PsiFunction::Max.slope(0.8).unwrap(), 1.0);
        assert_eq!(PsiFunction::Max.slope(0.5).unwrap(), 0.0);
        assert_eq!(PsiFunction::One.slope(0.4).unwrap(), 0.0);
        assert_relative_eq!(PsiFunction::Power(2.0).slope(0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(PsiFunction::Power(2.0).slope(0.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(PsiFunction::Power(2.0).slope(1.0).unwrap(), 1.0, epsilon = 1e-15);
        let pl = PsiFunction::piecewise_linear(vec![(0.0, 1.0), (0.5, 0.6), (1.0, 1.0)]).unwrap();
        assert_relative_eq!(pl.slope(0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(pl.slope(0.2).unwrap(), -0.8, epsilon = 1e-15);
    }

    #[test]
    fn pair_norm_matches_sup_and_sum() {
        assert_relative_eq!(pair_norm(&PsiFunction::Max, 3.0, 4.0).unwrap(), 4.0, epsilon = 1e-14);
        assert_relative_eq!(pair_norm(&PsiFunction::One, 3.0, 4.0).unwrap(), 7.0, epsilon = 1e-15);
        assert_relative_eq!(
            pair_norm(&PsiFunction::Power(2.0), 3.0, 4.0).unwrap(),
            5.0,
            epsilon = 1e-12
        );
        assert_eq!(pair_norm(&PsiFunction::Max, 0.0, 0.0).unwrap(), 0.0);
        assert!(pair_norm(&PsiFunction::Max, -1.0, 2.0).is_err());
        assert!(pair_norm(&PsiFunction::Max, f64::NAN, 2.0).is_err());
    }

    #[test]
    fn analyze_classifies_the_extremes() {
        let max = psi_analyze(&PsiFunction::Max, 1001).unwrap();
        assert!(max.is_member);
        assert!(!max.strictly_above_envelope);
        assert_eq!(max.lower_contact, Some(0.5));
        assert_eq!(max.upper_contact, Some(0.5));

        let one = psi_analyze(&PsiFunction::One, 1001).unwrap();
        assert!(one.is_member);
        assert!(one.strictly_above_envelope);
        assert_eq!(one.lower_contact, None);
        assert_eq!(one.upper_contact, None);

        let p2 = psi_analyze(&PsiFunction::Power(2.0), 4096).unwrap();
        assert!(p2.is_member);
        assert!(p2.strictly_above_envelope);
    }

    #[test]
    fn analyze_finds_partial_contacts() {
        // Hug the descending envelope branch up to t = 0.25, then rejoin 1.
        let psi = PsiFunction::piecewise_linear(vec![(0.0, 1.0), (0.25, 0.75), (1.0, 1.0)]).unwrap();
        let report = psi_analyze(&psi, 1001).unwrap();
        assert!(report.is_member);
        assert!(!report.strictly_above_envelope);
        assert_eq!(report.lower_contact, Some(0.25));
        assert_eq!(report.upper_contact, None);
    }

    #[test]
    fn analyze_requires_reasonable_grid() {
        assert!(psi_analyze(&PsiFunction::Max, 99).is_err());
    }

    #[test]
    fn dual_swaps_sup_and_sum() {
        let dual_of_one = psi_dual(&PsiFunction::One, 1001, 1e-10).unwrap();
        let dual_of_max = psi_dual(&PsiFunction::Max, 1001, 1e-10).unwrap();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            assert_relative_eq!(dual_of_one.eval(t).unwrap(), envelope(t), epsilon = 1e-9);
            assert_relative_eq!(dual_of_max.eval(t).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn euclidean_shape_is_self_dual() {
        let p2 = PsiFunction::Power(2.0);
        let dual = psi_dual(&p2, DUAL_GRID, DUAL_TOL).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..=500 {
            let t = i as f64 / 500.0;
            worst = worst.max((dual.eval(t).unwrap() - p2.eval(t).unwrap()).abs());
        }
        assert!(worst < 1e-7, "self-duality gap {worst}");
        assert_relative_eq!(dual.eval(0.5).unwrap(), 0.7071067811865475, epsilon = 1e-7);
    }

    #[test]
    fn double_dual_returns_to_start() {
        let psi = PsiFunction::Power(3.0);
        let dual = psi_dual(&psi, DUAL_GRID, DUAL_TOL).unwrap();
        let ddual = psi_dual(&dual, DUAL_GRID, DUAL_TOL).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..=500 {
            let t = i as f64 / 500.0;
            worst = worst.max((ddual.eval(t).unwrap() - psi.eval(t).unwrap()).abs());
        }
        assert!(worst < 1e-6, "double-dual gap {worst}");
    }

    #[test]
    fn dual_rejects_non_members() {
        // Direct variant construction bypasses the constructor's clamping, so
        // the membership gate inside psi_dual has to catch the dip.
        let bad = PsiFunction::PiecewiseLinear(vec![(0.0, 1.0), (0.5, 0.2), (1.0, 1.0)]);
        assert!(matches!(psi_dual(&bad, 1001, 1e-10), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn dual_dominates_contact_lines() {
        // A contact with the envelope at t0 forces the dual to dominate the
        // line (1 - t) + t * t0 / (1 - t0), because t0 is a feasible point of
        // the defining supremum.
        let t0 = 0.25;
        let psi = PsiFunction::piecewise_linear(vec![(0.0, 1.0), (t0, 1.0 - t0), (1.0, 1.0)]).unwrap();
        let dual = psi_dual(&psi, 1001, 1e-10).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let line = (1.0 - t) + t * t0 / (1.0 - t0);
            assert!(
                dual.eval(t).unwrap() >= line - 1e-9,
                "dual({t}) = {} below contact line {line}",
                dual.eval(t).unwrap()
            );
        }
    }

    #[test]
    fn csv_roundtrip_preserves_breakpoints() {
        let psi = PsiFunction::piecewise_linear(vec![
            (0.0, 1.0),
            (0.3, 0.85),
            (0.5, 0.8),
            (0.9, 0.95),
            (1.0, 1.0),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_psi_csv(&psi, 0, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,psi\n"));
        let back = read_psi_csv(buf.as_slice()).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn csv_sampling_roundtrip_approximates() {
        let mut buf = Vec::new();
        write_psi_csv(&PsiFunction::Power(2.0), 513, &mut buf).unwrap();
        let back = read_psi_csv(buf.as_slice()).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert_relative_eq!(
                back.eval(t).unwrap(),
                PsiFunction::Power(2.0).eval(t).unwrap(),
                epsilon = 1e-5
            );
        }
    }

    #[test]
    fn csv_reports_line_numbers() {
        let input = "t,psi\n0,1\nnot-a-number,0.9\n1,1\n";
        match read_psi_csv(input.as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected csv error, got {other:?}"),
        }
        assert!(read_psi_csv("wrong,header\n0,1\n1,1\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn power_family_stays_in_band(p in 1.0f64..8.0, t in 0.0f64..=1.0) {
            let psi = PsiFunction::power(p).unwrap();
            let v = psi.eval(t).unwrap();
            prop_assert!(v <= 1.0 + 1e-12);
            prop_assert!(v >= envelope(t) - 1e-12);
        }

        #[test]
        fn pair_norm_is_homogeneous(
            p in 1.0f64..6.0,
            z in 0.0f64..10.0,
            v in 0.0f64..10.0,
            c in 0.01f64..100.0,
        ) {
            let psi = PsiFunction::power(p).unwrap();
            let lhs = pair_norm(&psi, c * z, c * v).unwrap();
            let rhs = c * pair_norm(&psi, z, v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }

        #[test]
        fn pair_norm_between_sup_and_sum(
            p in 1.0f64..6.0,
            z in 0.0f64..10.0,
            v in 0.0f64..10.0,
        ) {
            let psi = PsiFunction::power(p).unwrap();
            let n = pair_norm(&psi, z, v).unwrap();
            prop_assert!(n <= z + v + 1e-12);
            prop_assert!(n >= z.max(v) - 1e-12);
        }
    }
}
