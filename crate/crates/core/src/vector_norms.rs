//! Norms on finite windows of doubly infinite sequences.
//!
//! Vectors here live on an integer *window* `[lo, hi]` of coordinates of a
//! bilateral sequence, and carry their window with them. Three families of
//! norms are provided:
//!
//! * the `lp` scale for `1 <= p <= inf`,
//! * a hybrid *star* norm `max(||bulk||_2, |x_1|) + |x_0|`, where the bulk is
//!   everything away from coordinates `0` and `1` — a Euclidean space with a
//!   sup-appended coordinate, then a sum-appended one, and
//! * general two-block sums: the window splits into two index sets, each
//!   carries its own norm, and the two block norms combine through a shape
//!   function from [`crate::absolute_norms`].
//!
//! The star norm is the reason this crate exists: it is an equivalent
//! renorming of `l2` (within a factor `sqrt(2)` both ways) under which one of
//! the shift operators in [`crate::shift_operators`] has resolvent norm
//! constant on an entire disc. Alongside evaluation, the module computes
//! norming functionals (support functionals realizing the norm, used as exact
//! subgradients by the ascent in [`crate::opnorm`]) and the split ratio
//! diagnostics for blocked norms.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;

use crate::absolute_norms::{pair_norm, PsiFunction};
use crate::error::{Error, Result};

/// Inclusive integer interval of sequence coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    /// Window `[lo, hi]`, requiring `lo <= hi`.
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid("window", format!("lo = {lo} exceeds hi = {hi}")));
        }
        Ok(Window { lo, hi })
    }

    /// Symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: usize) -> Self {
        let n = half_width as i64;
        Window { lo: -n, hi: n }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Number of coordinates in the window.
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // lo <= hi is enforced at construction
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    /// Offset of coordinate `k` inside the window's storage, if present.
    pub fn position(&self, k: i64) -> Option<usize> {
        self.contains(k).then(|| (k - self.lo) as usize)
    }

    /// Coordinates in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// A complex vector indexed by a [`Window`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedVector {
    window: Window,
    values: Vec<Complex64>,
}

impl IndexedVector {
    /// Wraps `values` over `window`; lengths must agree.
    pub fn new(window: Window, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::invalid(
                "values",
                format!("{} values for a window of length {}", values.len(), window.len()),
            ));
        }
        Ok(IndexedVector { window, values })
    }

    pub fn zeros(window: Window) -> Self {
        IndexedVector {
            window,
            values: vec![Complex64::new(0.0, 0.0); window.len()],
        }
    }

    /// Standard basis vector `e_k`; `k` must lie in the window.
    pub fn basis(window: Window, k: i64) -> Result<Self> {
        let pos = window
            .position(k)
            .ok_or_else(|| Error::invalid("k", format!("index {k} outside window")))?;
        let mut v = IndexedVector::zeros(window);
        v.values[pos] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Builds a vector by evaluating `f` at every window coordinate.
    pub fn from_fn(window: Window, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let values = window.indices().map(&mut f).collect();
        IndexedVector { window, values }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Coordinate `k`, reading `0` outside the window.
    pub fn entry(&self, k: i64) -> Complex64 {
        match self.window.position(k) {
            Some(p) => self.values[p],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Copy with every coordinate outside `keep` zeroed.
    fn masked(&self, keep: &[bool]) -> IndexedVector {
        let values = self
            .values
            .iter()
            .zip(keep)
            .map(|(&z, &k)| if k { z } else { Complex64::new(0.0, 0.0) })
            .collect();
        IndexedVector {
            window: self.window,
            values,
        }
    }
}

/// Unimodular phase of `z`, defaulting to `1` at the origin.
pub(crate) fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// A norm on windowed vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    /// The `lp` norm for `1 <= p`; use `f64::INFINITY` for the sup norm.
    Lp(f64),
    /// `max(||x restricted away from {0, 1}||_2, |x_1|) + |x_0|`.
    ///
    /// Requires the window to contain coordinates `0` and `1`.
    Star,
    /// Two-block sum: `part0` and `part1` name disjoint blocks of window
    /// coordinates, each block is measured by its own norm, and the two block
    /// norms are combined by `(a + b) * psi(b / (a + b))`.
    ///
    /// Every coordinate carrying mass must belong to one of the blocks;
    /// evaluating on a vector with mass outside both is a partition error.
    /// Zero coordinates may be left unlisted, which is what allows blocked
    /// norms to nest as inner norms of other blocked norms.
    PsiSum {
        psi: PsiFunction,
        part0: Vec<i64>,
        part1: Vec<i64>,
        norm0: Box<NormSpec>,
        norm1: Box<NormSpec>,
    },
}

impl NormSpec {
    /// Shorthand for the Euclidean norm.
    pub fn l2() -> Self {
        NormSpec::Lp(2.0)
    }

    /// Shorthand for the sup norm.
    pub fn sup() -> Self {
        NormSpec::Lp(f64::INFINITY)
    }
}

/// Validates that `spec` can be evaluated on vectors over `window`.
pub fn spec_compatible(spec: &NormSpec, window: &Window) -> Result<()> {
    match spec {
        NormSpec::Lp(p) => {
            if p.is_nan() || *p < 1.0 {
                return Err(Error::invalid("p", format!("exponent must be >= 1, got {p}")));
            }
            Ok(())
        }
        NormSpec::Star => {
            if window.contains(0) && window.contains(1) {
                Ok(())
            } else {
                Err(Error::IncompatibleWindow(format!(
                    "star norm needs coordinates 0 and 1, window is [{}, {}]",
                    window.lo(),
                    window.hi()
                )))
            }
        }
        NormSpec::PsiSum {
            part0,
            part1,
            norm0,
            norm1,
            ..
        } => {
            partition_masks(window, part0, part1)?;
            spec_compatible(norm0, window)?;
            spec_compatible(norm1, window)
        }
    }
}

/// Builds boolean membership masks for the two parts, verifying the parts
/// are disjoint subsets of the window.
fn partition_masks(window: &Window, part0: &[i64], part1: &[i64]) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut owner: HashMap<i64, u8> = HashMap::with_capacity(part0.len() + part1.len());
    for (tag, part) in [(0u8, part0), (1u8, part1)] {
        for &k in part {
            if !window.contains(k) {
                return Err(Error::BadPartition(format!("index {k} outside window")));
            }
            if owner.insert(k, tag).is_some() {
                return Err(Error::BadPartition(format!("index {k} listed twice")));
            }
        }
    }
    let mut mask0 = vec![false; window.len()];
    let mut mask1 = vec![false; window.len()];
    for (&k, &tag) in &owner {
        let pos = window.position(k).unwrap();
        if tag == 0 {
            mask0[pos] = true;
        } else {
            mask1[pos] = true;
        }
    }
    Ok((mask0, mask1))
}

/// Splits `x` into its two block restrictions, verifying the blocks are
/// disjoint, lie inside the window, and cover every coordinate of `x` that
/// carries mass. Coordinates outside both blocks are invisible to a blocked
/// norm, so mass there is a partition error rather than silently dropped;
/// allowing *zero* coordinates to go unlisted is what lets blocked norms
/// nest (an inner norm only ever sees its own block of the window).
fn blocked_parts(
    x: &IndexedVector,
    part0: &[i64],
    part1: &[i64],
) -> Result<(IndexedVector, IndexedVector)> {
    let window = x.window();
    let (mask0, mask1) = partition_masks(&window, part0, part1)?;
    for (pos, z) in x.values().iter().enumerate() {
        if !mask0[pos] && !mask1[pos] && z.norm() != 0.0 {
            let k = window.lo() + pos as i64;
            return Err(Error::BadPartition(format!(
                "coordinate {k} carries mass but belongs to neither block"
            )));
        }
    }
    Ok((x.masked(&mask0), x.masked(&mask1)))
}

/// Evaluates `spec` on `x`.
pub fn eval_norm(spec: &NormSpec, x: &IndexedVector) -> Result<f64> {
    match spec {
        NormSpec::Lp(p) => {
            if p.is_nan() || *p < 1.0 {
                return Err(Error::invalid("p", format!("exponent must be >= 1, got {p}")));
            }
            let vals = x.values();
            if *p == 1.0 {
                Ok(vals.iter().map(|z| z.norm()).sum())
            } else if *p == 2.0 {
                Ok(vals.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            } else if p.is_infinite() {
                Ok(vals.iter().map(|z| z.norm()).fold(0.0, f64::max))
            } else {
                let sum: f64 = vals.iter().map(|z| z.norm().powf(*p)).sum();
                Ok(sum.powf(1.0 / p))
            }
        }
        NormSpec::Star => {
            let window = x.window();
            spec_compatible(spec, &window)?;
            let mut bulk_sq = 0.0;
            for k in window.indices() {
                if k != 0 && k != 1 {
                    bulk_sq += x.entry(k).norm_sqr();
                }
            }
            Ok(bulk_sq.sqrt().max(x.entry(1).norm()) + x.entry(0).norm())
        }
        NormSpec::PsiSum {
            psi,
            part0,
            part1,
            norm0,
            norm1,
        } => {
            let (x0, x1) = blocked_parts(x, part0, part1)?;
            let a = eval_norm(norm0, &x0)?;
            let b = eval_norm(norm1, &x1)?;
            pair_norm(psi, a, b)
        }
    }
}

/// Split diagnostics for a two-block norm, produced by [`theta_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSplit {
    /// Mass fraction `a / (a + b)` carried by the first block.
    pub theta: f64,
    /// Norm of the first block in its own norm.
    pub part0_norm: f64,
    /// Norm of the second block in its own norm.
    pub part1_norm: f64,
    /// Norm of the whole vector under the blocked norm.
    pub total: f64,
    /// Whether `total <= part0_norm / theta` held (always true for members,
    /// since the shape function is bounded by `1`).
    pub total_bound_holds: bool,
    /// Whether `part0_norm <= 2 theta total` held (always true for members,
    /// since the shape function dominates `max(1 - t, t) >= 1/2`).
    pub part_bound_holds: bool,
}

/// Computes the block norms, the split ratio, and the two-sided bounds that
/// relate a block to the whole for a [`NormSpec::PsiSum`] norm.
///
/// Errors with [`Error::ZeroVector`] on the zero vector (the ratio is then
/// undefined) and with `InvalidParameter` for non-blocked norms.
pub fn theta_split(spec: &NormSpec, x: &IndexedVector) -> Result<ThetaSplit> {
    let NormSpec::PsiSum {
        psi,
        part0,
        part1,
        norm0,
        norm1,
    } = spec
    else {
        return Err(Error::invalid("spec", "theta_split needs a two-block norm"));
    };
    let (x0, x1) = blocked_parts(x, part0, part1)?;
    let a = eval_norm(norm0, &x0)?;
    let b = eval_norm(norm1, &x1)?;
    if a + b == 0.0 {
        return Err(Error::ZeroVector);
    }
    let total = pair_norm(psi, a, b)?;
    let theta = a / (a + b);
    const SLACK: f64 = 1e-12;
    let total_bound_holds = if a == 0.0 {
        true // theta = 0 makes the upper bound vacuous
    } else {
        total * theta <= a * (1.0 + SLACK) + SLACK
    };
    let part_bound_holds = a <= 2.0 * theta * total + SLACK;
    Ok(ThetaSplit {
        theta,
        part0_norm: a,
        part1_norm: b,
        total,
        total_bound_holds,
        part_bound_holds,
    })
}

/// A support functional at `y`: a vector `g` with dual norm `1` such that
/// `Re <g, y> = ||y||` (pairing `<g, y> = sum conj(g_k) y_k`).
///
/// The returned functional doubles as an exact norm subgradient, which is
/// what the operator-norm ascent consumes: for any `x`,
/// `Re <g, x> <= ||x||`, with equality at `x = y`.
pub fn norming_functional(spec: &NormSpec, y: &IndexedVector) -> Result<IndexedVector> {
    let total = eval_norm(spec, y)?;
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    let window = y.window();
    match spec {
        NormSpec::Lp(p) => {
            if *p == 1.0 {
                Ok(IndexedVector::from_fn(window, |k| {
                    let z = y.entry(k);
                    if z.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        phase(z)
                    }
                }))
            } else if p.is_infinite() {
                let mut arg = window.lo();
                let mut best = -1.0;
                for k in window.indices() {
                    let r = y.entry(k).norm();
                    if r > best {
                        best = r;
                        arg = k;
                    }
                }
                let mut g = IndexedVector::zeros(window);
                let pos = window.position(arg).unwrap();
                g.values_mut()[pos] = phase(y.entry(arg));
                Ok(g)
            } else {
                let p = *p;
                Ok(IndexedVector::from_fn(window, |k| {
                    let z = y.entry(k);
                    if z.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        phase(z) * (z.norm() / total).powf(p - 1.0)
                    }
                }))
            }
        }
        NormSpec::Star => {
            spec_compatible(spec, &window)?;
            let mut bulk_sq = 0.0;
            for k in window.indices() {
                if k != 0 && k != 1 {
                    bulk_sq += y.entry(k).norm_sqr();
                }
            }
            let bulk = bulk_sq.sqrt();
            let y1 = y.entry(1).norm();
            let mut g = IndexedVector::zeros(window);
            if bulk >= y1 && bulk > 0.0 {
                for k in window.indices() {
                    if k != 0 && k != 1 {
                        let pos = window.position(k).unwrap();
                        g.values_mut()[pos] = y.entry(k) / bulk;
                    }
                }
            } else if y1 > 0.0 {
                let pos = window.position(1).unwrap();
                g.values_mut()[pos] = phase(y.entry(1));
            }
            let pos0 = window.position(0).unwrap();
            g.values_mut()[pos0] = phase(y.entry(0));
            // When y_0 = 0 the phase defaults to 1, still dual-feasible.
            Ok(g)
        }
        NormSpec::PsiSum {
            psi,
            part0,
            part1,
            norm0,
            norm1,
        } => {
            let (mask0, mask1) = partition_masks(&window, part0, part1)?;
            let (x0, x1) = blocked_parts(y, part0, part1)?;
            let a = eval_norm(norm0, &x0)?;
            let b = eval_norm(norm1, &x1)?;
            let t = (b / (a + b)).clamp(0.0, 1.0);
            let s = psi.slope(t)?;
            // Tangent-line coefficients of the shape function at t: these
            // weight the block functionals so the combined functional pairs
            // to (a + b) psi(t) and stays in the dual unit ball.
            let w0 = psi.eval(t)? - t * s;
            let w1 = psi.eval(t)? + (1.0 - t) * s;
            let mut g = IndexedVector::zeros(window);
            if a > 0.0 {
                let g0 = norming_functional(norm0, &x0)?;
                for (gi, (g0i, &m)) in g.values_mut().iter_mut().zip(g0.values().iter().zip(&mask0)) {
                    if m {
                        *gi = w0 * g0i;
                    }
                }
            }
            if b > 0.0 {
                let g1 = norming_functional(norm1, &x1)?;
                for (gi, (g1i, &m)) in g.values_mut().iter_mut().zip(g1.values().iter().zip(&mask1)) {
                    if m {
                        *gi = w1 * g1i;
                    }
                }
            }
            Ok(g)
        }
    }
}

/// Writes a vector as `index,re,im` CSV rows in window order.
pub fn write_vector_csv<W: Write>(x: &IndexedVector, mut out: W) -> Result<()> {
    writeln!(out, "index,re,im")?;
    for k in x.window().indices() {
        let z = x.entry(k);
        writeln!(out, "{k},{},{}", z.re, z.im)?;
    }
    Ok(())
}

/// Reads a vector from `index,re,im` CSV rows; the indices must form a
/// contiguous range with no duplicates.
pub fn read_vector_csv<R: Read>(input: R) -> Result<IndexedVector> {
    let reader = BufReader::new(input);
    let mut rows: Vec<(i64, Complex64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if idx == 0 {
            if line != "index,re,im" {
                return Err(Error::Csv {
                    line: 1,
                    message: format!("expected header `index,re,im`, got `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Csv {
                line: idx + 1,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let k: i64 = fields[0].trim().parse().map_err(|e| Error::Csv {
            line: idx + 1,
            message: format!("bad index: {e}"),
        })?;
        let re: f64 = fields[1].trim().parse().map_err(|e| Error::Csv {
            line: idx + 1,
            message: format!("bad re: {e}"),
        })?;
        let im: f64 = fields[2].trim().parse().map_err(|e| Error::Csv {
            line: idx + 1,
            message: format!("bad im: {e}"),
        })?;
        rows.push((k, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            line: 1,
            message: "no data rows".into(),
        });
    }
    rows.sort_by_key(|&(k, _)| k);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Csv {
                line: 0,
                message: format!("duplicate index {}", w[0].0),
            });
        }
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::Csv {
                line: 0,
                message: format!("gap between indices {} and {}", w[0].0, w[1].0),
            });
        }
    }
    let window = Window::new(rows[0].0, rows[rows.len() - 1].0)?;
    IndexedVector::new(window, rows.into_iter().map(|(_, z)| z).collect())
}
