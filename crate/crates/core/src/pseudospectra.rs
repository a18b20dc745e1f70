//! Resolvent-norm scans over regions of the complex plane.
//!
//! A scan evaluates `||(T - lambda)^{-1}||` in a chosen norm at every point
//! of a structured grid, either for one of the weighted shifts (via the
//! analytic resolvent window plus its truncation bound) or for an arbitrary
//! dense matrix (via direct inversion). The resulting [`PseudoGrid`] backs
//! two analyses: a flatness report, which decides whether the sampled norm
//! is constant up to a relative tolerance, and a level-set classification,
//! which tags each point against the `1/epsilon` threshold while honoring
//! both the estimator tolerance and the per-point truncation bound.
//!
//! Disc grids are concentric rings rather than a clipped lattice: the
//! outermost ring lies exactly on the boundary circle, where the constancy
//! statements for the shift operators are sharpest.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::invert;
use crate::opnorm::{estimate_opnorm, mix_seed, NormEstimate, OpnormConfig};
use crate::shift_operators::ShiftSpec;
use crate::vector_norms::NormSpec;

/// Uncertainty granted to the ascent estimator when classifying level sets.
pub const ESTIMATE_TOL: f64 = 1e-6;

/// A region of the complex plane to scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Closed disc; grids place their last ring exactly on the boundary.
    Disc { center: Complex64, radius: f64 },
    /// Axis-aligned closed rectangle between two corners.
    Rectangle {
        corner_min: Complex64,
        corner_max: Complex64,
    },
}

/// What the scan inverts at each grid point.
#[derive(Debug, Clone)]
pub enum ScanTarget {
    /// One of the weighted shifts, using its analytic resolvent window.
    Shift(ShiftSpec),
    /// An explicit square matrix `T`; the scan inverts `T - lambda I`.
    Dense(Array2<Complex64>),
}

/// The scan's reading at a single grid point.
#[derive(Debug, Clone)]
pub struct GridValue {
    pub lambda: Complex64,
    pub estimate: NormEstimate,
    /// Bound on how far the windowed value may sit below the full-lattice
    /// one (zero for dense targets, which are not truncations of anything).
    pub truncation_bound: f64,
}

/// A completed scan: the grid geometry plus one reading per point.
#[derive(Debug, Clone)]
pub struct PseudoGrid {
    region: Region,
    resolution: usize,
    norm: NormSpec,
    values: Vec<GridValue>,
    estimate_tol: f64,
}

/// Summary of how constant the sampled norm is across a grid.
#[derive(Debug, Clone, Copy)]
pub struct FlatnessReport {
    pub max_value: f64,
    pub min_value: f64,
    /// `(max - min) / max`; zero for an identically-zero grid.
    pub relative_variation: f64,
    /// Whether `relative_variation <= tolerance`.
    pub is_flat: bool,
    pub tolerance: f64,
    /// Grid point attaining the maximum.
    pub argmax: Complex64,
    /// Grid point attaining the minimum.
    pub argmin: Complex64,
}

/// Classification of one grid point against the `1/epsilon` level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSetTag {
    /// Resolvent norm provably above the level even after tolerances.
    StrictPseudospectrum,
    /// Within tolerance of the level: on the boundary level set as far as
    /// this scan can resolve.
    BoundaryLevelSet,
    /// Provably below the level.
    Exterior,
}

/// Enumerates the sample points of a region at the given resolution.
///
/// Discs use `resolution - 1` concentric rings of `resolution + 1` equally
/// spaced angles around the center point, `resolution^2` points in all,
/// with the outermost ring exactly on the boundary circle. Rectangles use
/// an inclusive `resolution x resolution` lattice.
pub fn grid_points(region: &Region, resolution: usize) -> Result<Vec<Complex64>> {
    if resolution < 2 {
        return Err(Error::invalid("resolution", "need at least 2"));
    }
    let mut points = Vec::with_capacity(resolution * resolution);
    match region {
        Region::Disc { center, radius } => {
            if !(*radius > 0.0) || !radius.is_finite() {
                return Err(Error::invalid("radius", "must be positive and finite"));
            }
            points.push(*center);
            let rings = resolution - 1;
            let angles = resolution + 1;
            for i in 1..=rings {
                let r = radius * i as f64 / rings as f64;
                for j in 0..angles {
                    let theta = std::f64::consts::TAU * j as f64 / angles as f64;
                    points.push(center + Complex64::from_polar(r, theta));
                }
            }
        }
        Region::Rectangle {
            corner_min,
            corner_max,
        } => {
            if !(corner_min.re <= corner_max.re && corner_min.im <= corner_max.im) {
                return Err(Error::invalid("corner_min", "corners must be ordered"));
            }
            let steps = (resolution - 1) as f64;
            for i in 0..resolution {
                let re = corner_min.re + (corner_max.re - corner_min.re) * i as f64 / steps;
                for j in 0..resolution {
                    let im = corner_min.im + (corner_max.im - corner_min.im) * j as f64 / steps;
                    points.push(Complex64::new(re, im));
                }
            }
        }
    }
    Ok(points)
}

/// Scans `target`'s resolvent norm in `norm` over `region`.
///
/// `half_width` fixes the resolvent window for shift targets (minimum 4);
/// `None` lets each point choose the smallest window whose truncation bound
/// clears the default tail budget. Dense targets ignore it. Every point
/// derives its own estimator seed from `cfg.seed` and the point index, so
/// scans are deterministic yet decorrelated across the grid.
pub fn scan_grid(
    target: &ScanTarget,
    norm: &NormSpec,
    region: &Region,
    resolution: usize,
    half_width: Option<usize>,
    cfg: &OpnormConfig,
) -> Result<PseudoGrid> {
    let points = grid_points(region, resolution)?;
    let mut values = Vec::with_capacity(points.len());
    for (idx, &lambda) in points.iter().enumerate() {
        let point_cfg = OpnormConfig {
            seed: mix_seed(cfg.seed, idx as u64),
            ..cfg.clone()
        };
        let (matrix, truncation_bound) = match target {
            ScanTarget::Shift(spec) => {
                let hw = match half_width {
                    Some(hw) => hw,
                    None => spec.default_half_width(lambda)?,
                };
                let r = spec.resolvent_matrix(lambda, hw)?;
                let bound = r.truncation_tail();
                (r.into_matrix(), bound)
            }
            ScanTarget::Dense(t) => {
                if t.nrows() != t.ncols() {
                    return Err(Error::InvalidShape(format!(
                        "dense scan target must be square, got {}x{}",
                        t.nrows(),
                        t.ncols()
                    )));
                }
                let mut shifted = t.clone();
                for d in 0..shifted.nrows() {
                    shifted[[d, d]] -= lambda;
                }
                let inv = invert(&shifted).ok_or(Error::SingularMatrix)?;
                (inv, 0.0)
            }
        };
        let estimate = estimate_opnorm(&matrix, norm, norm, &point_cfg)?;
        values.push(GridValue {
            lambda,
            estimate,
            truncation_bound,
        });
    }
    Ok(PseudoGrid {
        region: *region,
        resolution,
        norm: norm.clone(),
        values,
        estimate_tol: ESTIMATE_TOL,
    })
}

impl PseudoGrid {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn values(&self) -> &[GridValue] {
        &self.values
    }

    /// Estimator tolerance used by [`PseudoGrid::classify`].
    pub fn estimate_tol(&self) -> f64 {
        self.estimate_tol
    }

    /// Measures how constant the sampled norm is across the grid.
    pub fn flatness_report(&self, tolerance: f64) -> Result<FlatnessReport> {
        if self.values.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if !(tolerance >= 0.0) {
            return Err(Error::invalid("tolerance", "must be nonnegative"));
        }
        let mut max_value = f64::NEG_INFINITY;
        let mut min_value = f64::INFINITY;
        let mut argmax = self.values[0].lambda;
        let mut argmin = self.values[0].lambda;
        for v in &self.values {
            let x = v.estimate.value;
            if x > max_value {
                max_value = x;
                argmax = v.lambda;
            }
            if x < min_value {
                min_value = x;
                argmin = v.lambda;
            }
        }
        let relative_variation = if max_value > 0.0 {
            (max_value - min_value) / max_value
        } else {
            0.0
        };
        Ok(FlatnessReport {
            max_value,
            min_value,
            relative_variation,
            is_flat: relative_variation <= tolerance,
            tolerance,
            argmax,
            argmin,
        })
    }

    /// Tags each grid point against the `1/epsilon` resolvent level.
    ///
    /// A point counts as boundary when its reading sits within the combined
    /// uncertainty band (estimator tolerance plus that point's truncation
    /// bound) of the level, strict when it clears the band upward, and
    /// exterior otherwise.
    pub fn classify(&self, epsilon: f64) -> Result<Vec<(Complex64, LevelSetTag)>> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be positive and finite"));
        }
        if self.values.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let threshold = 1.0 / epsilon;
        Ok(self
            .values
            .iter()
            .map(|v| {
                let band = self.estimate_tol + v.truncation_bound;
                let tag = if (v.estimate.value - threshold).abs() <= band {
                    LevelSetTag::BoundaryLevelSet
                } else if v.estimate.value > threshold {
                    LevelSetTag::StrictPseudospectrum
                } else {
                    LevelSetTag::Exterior
                };
                (v.lambda, tag)
            })
            .collect())
    }
}

/// Writes a grid as CSV with columns `re,im,norm,trunc_bound`.
pub fn write_grid_csv<W: std::io::Write>(grid: &PseudoGrid, out: &mut W) -> Result<()> {
    writeln!(out, "re,im,norm,trunc_bound")?;
    for v in grid.values() {
        writeln!(
            out,
            "{},{},{},{}",
            v.lambda.re, v.lambda.im, v.estimate.value, v.truncation_bound
        )?;
    }
    Ok(())
}
