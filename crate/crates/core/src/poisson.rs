//! Germ process: a Poisson process on `R^d × K` with intensity measure
//! `f(y) dy Q(ds)`, restricted to a box and sampled by thinning.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, Aabb, Point};
use crate::grains::{Grain, MarkDistribution};
use crate::math;
use crate::sausage;
use crate::stats::{Estimate, Moments};

/// Germ intensity `f: R^d → [0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityField {
    Constant(f64),
    /// `scale·|y|^2`.
    Quadratic { scale: f64 },
    /// `max(0, offset + slope·y)`.
    Affine { offset: f64, slope: Point },
    /// `value` on each box (first match wins), 0 elsewhere.
    PiecewiseConstant { pieces: Vec<(Aabb, f64)> },
}

impl IntensityField {
    pub fn constant(c: f64) -> Result<Self> {
        let f = IntensityField::Constant(c);
        f.validate()?;
        Ok(f)
    }

    pub fn quadratic() -> Self {
        IntensityField::Quadratic { scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64, what: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{what} must be finite and >= 0 (got {v})")))
            }
        };
        match self {
            IntensityField::Constant(c) => nonneg(*c, "constant intensity"),
            IntensityField::Quadratic { scale } => nonneg(*scale, "quadratic scale"),
            IntensityField::Affine { offset, slope } => {
                if offset.is_finite() && slope.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("affine coefficients must be finite"))
                }
            }
            IntensityField::PiecewiseConstant { pieces } => {
                for (b, v) in pieces {
                    nonneg(*v, "piecewise intensity value")?;
                    if let Some((first, _)) = pieces.first() {
                        if b.dim() != first.dim() {
                            return Err(Error::config("piecewise boxes must share one dimension"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Dimension the field is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            IntensityField::Affine { slope, .. } => Some(slope.dim()),
            IntensityField::PiecewiseConstant { pieces } => pieces.first().map(|(b, _)| b.dim()),
            _ => None,
        }
    }

    #[inline]
    pub fn value(&self, y: &Point) -> f64 {
        match self {
            IntensityField::Constant(c) => *c,
            IntensityField::Quadratic { scale } => scale * y.norm_sq(),
            IntensityField::Affine { offset, slope } => (offset + slope.dot(y)).max(0.0),
            IntensityField::PiecewiseConstant { pieces } => pieces
                .iter()
                .find(|(b, _)| b.contains(y))
                .map_or(0.0, |(_, v)| *v),
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            IntensityField::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Checks that the discontinuity set is `H^n`-negligible. The built-in
    /// continuous families have none; box faces of a piecewise field are
    /// `(d−1)`-dimensional and therefore never negligible for `n < d`.
    pub fn check_discontinuities(&self, n: usize) -> Result<()> {
        match self {
            IntensityField::PiecewiseConstant { pieces } if pieces.iter().any(|(_, v)| *v > 0.0) => {
                Err(Error::config(format!(
                    "piecewise-constant intensity jumps on box faces, which are not H^{n}-negligible"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Upper bound `M ≥ sup_{y ∈ box} f(y)`; the exact supremum for every built-in family.
pub fn intensity_bound(f: &IntensityField, bx: &Aabb) -> f64 {
    match f {
        IntensityField::Constant(c) => *c,
        IntensityField::Quadratic { scale } => {
            scale * bx.corners().map(|c| c.norm_sq()).fold(0.0, f64::max)
        }
        IntensityField::Affine { .. } => bx.corners().map(|c| f.value(&c)).fold(0.0, f64::max),
        IntensityField::PiecewiseConstant { pieces } => pieces
            .iter()
            .filter(|(b, _)| b.intersects(bx))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max),
    }
}

/// Intensity and mark law of one Boolean model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub intensity: IntensityField,
    pub marks: MarkDistribution,
}

impl Scenario {
    pub fn new(intensity: IntensityField, marks: MarkDistribution) -> Result<Self> {
        intensity.validate()?;
        check_dim(marks.dim())?;
        if let Some(d) = intensity.dim() {
            if d != marks.dim() {
                return Err(Error::config(format!(
                    "intensity lives in R^{d} but grains live in R^{}",
                    marks.dim()
                )));
            }
        }
        if marks.grain_dim() >= marks.dim() {
            return Err(Error::config("grain dimension n must be below the space dimension d"));
        }
        Ok(Scenario { intensity, marks })
    }

    pub fn dim(&self) -> usize {
        self.marks.dim()
    }

    pub fn grain_dim(&self) -> usize {
        self.marks.grain_dim()
    }

    /// `b_{d−n}`.
    pub fn codim_ball_volume(&self) -> f64 {
        crate::geometry::ball_volume(self.dim() - self.grain_dim()).expect("1 <= d - n <= 3")
    }

    /// `b_{d−n} r^{d−n}`.
    pub fn normalizer(&self, r: f64) -> f64 {
        self.codim_ball_volume() * math::powi(r, (self.dim() - self.grain_dim()) as i32)
    }
}

/// One realization of the marked germ process on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedGermSample {
    pub germs: Vec<(Point, Grain)>,
    pub window_used: Aabb,
    pub intensity_bound_used: f64,
    /// Number of thinning proposals.
    pub proposed: u64,
}

/// Mean below which Poisson counts are drawn by sequential inversion.
pub const POISSON_INVERSION_LIMIT: f64 = 10.0;

/// Poisson(`mean`) variate.
///
/// Inversion by sequential search for `mean < 10`; above, the transformed
/// rejection with squeeze of Hörmann (PTRD, 1993). Both consume uniforms
/// from `rng` in a fixed order, so a given stream always yields the same
/// count.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < POISSON_INVERSION_LIMIT {
        let mut p = math::exp(-mean);
        let mut cdf = p;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return k;
    }
    let slam = math::sqrt(mean);
    let loglam = math::ln(mean);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = math::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = math::ln(v) + math::ln(inv_alpha) - math::ln(a / (us * us) + b);
        let rhs = -mean + k * loglam - math::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Thinning sampler: `N ~ Poisson(M·vol(box))` uniform proposals, each kept
/// with probability `f(y)/M` and given an independent mark from `q`.
pub fn sample_germs<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    bx: &Aabb,
    rng: &mut R,
) -> Result<MarkedGermSample> {
    if bx.dim() != q.dim() {
        return Err(Error::config("sampling box and grains differ in dimension"));
    }
    let bound = intensity_bound(f, bx);
    if !bound.is_finite() {
        return Err(Error::config("intensity is not bounded on the sampling box"));
    }
    let mut out = MarkedGermSample {
        germs: Vec::new(),
        window_used: *bx,
        intensity_bound_used: bound,
        proposed: 0,
    };
    let mean = bound * bx.volume();
    if bound == 0.0 || mean == 0.0 {
        return Ok(out);
    }
    let proposals = sample_poisson(mean, rng);
    out.proposed = proposals;
    for _ in 0..proposals {
        let y = bx.sample_uniform(rng);
        if rng.random::<f64>() * bound < f.value(&y) {
            let g = q.sample(rng);
            out.germs.push((y, g));
        }
    }
    Ok(out)
}

/// Result of the `∫_K ∫_{(−Z_0(s))⊕R} f dy Q(ds) < ∞` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinitenessDiagnostic {
    pub finite: bool,
    pub estimate: Estimate,
}

pub const FINITENESS_MARK_DRAWS: usize = 10_000;
const FINITENESS_POINTS_PER_MARK: usize = 64;

/// Monte Carlo estimate of `∫_K ∫_{(−Z_0(s))⊕R} f(y) dy Q(ds)`.
pub fn check_finiteness<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    radius: f64,
    rng: &mut R,
) -> Result<FinitenessDiagnostic> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::config("finiteness radius must be positive"));
    }
    let origin = Point::origin(q.dim());
    let mut per_mark = Moments::new();
    for _ in 0..FINITENESS_MARK_DRAWS {
        let g = q.sample(rng);
        let inner = sausage::integral(&g, &origin, true, radius, f, FINITENESS_POINTS_PER_MARK, rng);
        per_mark.push(inner.value);
    }
    let estimate = Estimate::from_moments(&per_mark);
    Ok(FinitenessDiagnostic {
        finite: estimate.value.is_finite() && estimate.std_error.is_finite(),
        estimate,
    })
}
