//! Exact mean densities and finite-radius capacity probabilities.
//!
//! `λ_Θ(x) = ∫_K ∫_{x − Z_0(s)} f dH^n Q(ds)`: the inner line integral is
//! computed by Gauss–Legendre quadrature of `y ↦ f(x − y)` over `Z_0(s)`,
//! the outer mark integral by Monte Carlo (a single term for deterministic
//! marks).

use alloc::vec::Vec;

use rand::Rng;

use crate::boolean::MAX_QUERY_RADIUS;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::geometry::Point;
use crate::grains::{Grain, MarkDistribution};
use crate::math;
use crate::poisson::{IntensityField, Scenario};
use crate::quadrature::{GaussLegendre, DEFAULT_ORDER};
use crate::sausage;
use crate::stats::{Estimate, Moments};
use crate::stream::derive_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    ExactQuadrature,
    Analytic,
    Stationary,
    Convolution,
}

impl DensityMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensityMethod::ExactQuadrature => "exact_quadrature",
            DensityMethod::Analytic => "analytic",
            DensityMethod::Stationary => "stationary",
            DensityMethod::Convolution => "convolution",
        }
    }
}

/// Mean density values on a list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    points: Vec<Point>,
    values: Vec<f64>,
    std_errors: Vec<f64>,
    method: DensityMethod,
}

impl DensityField {
    pub fn new(
        points: Vec<Point>,
        values: Vec<f64>,
        std_errors: Vec<f64>,
        method: DensityMethod,
    ) -> Result<Self> {
        if points.len() != values.len() || points.len() != std_errors.len() {
            return Err(Error::config("density field columns differ in length"));
        }
        for (p, v) in points.iter().zip(&values) {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Numeric {
                    value: *v,
                    point: *p,
                });
            }
        }
        Ok(DensityField {
            points,
            values,
            std_errors,
            method,
        })
    }

    /// `c·E_Q[H^n(Z_0)]` at every point.
    pub fn stationary(points: Vec<Point>, c: f64, q: &MarkDistribution) -> Result<Self> {
        let v = c * q.mean_hn();
        let n = points.len();
        Self::new(points, alloc::vec![v; n], alloc::vec![0.0; n], DensityMethod::Stationary)
    }

    /// The planar segment example `(x₁² + x₂²)·E[L] + E[L³]/3`.
    pub fn analytic_segment(points: Vec<Point>, el: f64, el3: f64) -> Result<Self> {
        let values = points
            .iter()
            .map(|x| analytic_segment_density(el, el3, x))
            .collect::<Result<Vec<_>>>()?;
        let n = points.len();
        Self::new(points, values, alloc::vec![0.0; n], DensityMethod::Analytic)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_errors(&self) -> &[f64] {
        &self.std_errors
    }

    pub fn method(&self) -> DensityMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(point, value, standard error)` rows in grid order.
    pub fn rows(&self) -> impl Iterator<Item = (&Point, f64, f64)> + '_ {
        self.points
            .iter()
            .zip(&self.values)
            .zip(&self.std_errors)
            .map(|((p, v), s)| (p, *v, *s))
    }
}

fn check_point(q: &MarkDistribution, x: &Point) -> Result<()> {
    if x.dim() != q.dim() {
        return Err(Error::config(alloc::format!(
            "point has {} coordinates but the scenario lives in R^{}",
            x.dim(),
            q.dim()
        )));
    }
    if !x.is_finite() {
        return Err(Error::config("point coordinates must be finite"));
    }
    Ok(())
}

fn line_term(f: &IntensityField, g: &Grain, x: &Point, rule: &GaussLegendre) -> Result<f64> {
    g.integrate_with(|y| f.value(&(*x - *y)), rule)
}

/// `λ_Θ(x)` with its Monte Carlo standard error (0 for deterministic marks).
pub fn exact_density<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    x: &Point,
    mark_draws: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let rule = GaussLegendre::new(DEFAULT_ORDER)?;
    exact_density_with(f, q, x, mark_draws, &rule, rng)
}

/// [`exact_density`] with an explicit line rule.
pub fn exact_density_with<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    x: &Point,
    mark_draws: usize,
    rule: &GaussLegendre,
    rng: &mut R,
) -> Result<Estimate> {
    check_point(q, x)?;
    if let MarkDistribution::Deterministic(g) = q {
        return Ok(Estimate::exact(line_term(f, g, x, rule)?));
    }
    if mark_draws == 0 {
        return Err(Error::config("mark_draws must be positive"));
    }
    let mut m = Moments::new();
    for _ in 0..mark_draws {
        let g = q.sample(rng);
        m.push(line_term(f, &g, x, rule)?);
    }
    Ok(Estimate::from_moments(&m))
}

/// `∫_{Z_0} f(x − y) H^n(dy)` for a deterministic grain.
pub fn deterministic_density(f: &IntensityField, g: &Grain, x: &Point) -> Result<f64> {
    if x.dim() != g.dim() {
        return Err(Error::config("point and grain differ in dimension"));
    }
    let rule = GaussLegendre::new(DEFAULT_ORDER)?;
    line_term(f, g, x, &rule)
}

/// `(x₁² + x₂²)·E[L] + E[L³]/3`.
pub fn analytic_segment_density(el: f64, el3: f64, x: &Point) -> Result<f64> {
    if x.dim() != 2 {
        return Err(Error::config("the analytic segment density is planar"));
    }
    Ok(x.norm_sq() * el + el3 / 3.0)
}

/// `Λ(Z^{x,r})` and `P(x ∈ Θ⊕r) = 1 − e^{−Λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityProbability {
    pub lambda: Estimate,
    pub probability: Estimate,
}

impl CapacityProbability {
    pub fn from_lambda(lambda: Estimate) -> Self {
        let survival = math::exp(-lambda.value);
        CapacityProbability {
            lambda,
            probability: Estimate {
                value: -math::expm1(-lambda.value),
                std_error: survival * lambda.std_error,
            },
        }
    }
}

/// Monte Carlo `P(x ∈ Θ⊕r)`. Every sample draws a fresh mark and one
/// uniform proposal on the bounding box of `(x − Z_0(s))⊕r`.
pub fn capacity_probability<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    x: &Point,
    r: f64,
    mc_points: usize,
    rng: &mut R,
) -> Result<CapacityProbability> {
    check_point(q, x)?;
    if !(r > 0.0 && r < MAX_QUERY_RADIUS) {
        return Err(Error::query(alloc::format!(
            "radius {r} outside (0, {MAX_QUERY_RADIUS})"
        )));
    }
    if mc_points == 0 {
        return Err(Error::config("mc_points must be positive"));
    }
    let lambda = match q {
        MarkDistribution::Deterministic(g) => sausage::integral(g, x, true, r, f, mc_points, rng),
        _ => {
            let mut m = Moments::new();
            for _ in 0..mc_points {
                let g = q.sample(rng);
                let bx = sausage::proposal_box(&g, x, true, r);
                m.push(sausage::draw(&g, x, true, r, f, &bx, rng));
            }
            Estimate::from_moments(&m)
        }
    };
    if !lambda.value.is_finite() {
        return Err(Error::Numeric {
            value: lambda.value,
            point: *x,
        });
    }
    Ok(CapacityProbability::from_lambda(lambda))
}

/// [`exact_density`] at every point; point `i` draws from `derive_stream(seed, i)`.
pub fn density_field<E: Executor + ?Sized>(
    exec: &E,
    scenario: &Scenario,
    points: &[Point],
    mark_draws: usize,
    seed: u64,
) -> Result<DensityField> {
    let rule = GaussLegendre::new(DEFAULT_ORDER)?;
    let results = exec.map_indexed(points.len(), |i| {
        let mut rng = derive_stream(seed, i as u64);
        exact_density_with(
            &scenario.intensity,
            &scenario.marks,
            &points[i],
            mark_draws,
            &rule,
            &mut rng,
        )
    });
    let mut values = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for r in results {
        let e = r?;
        values.push(e.value);
        errors.push(e.std_error);
    }
    let method = if scenario.marks.is_deterministic() {
        DensityMethod::Convolution
    } else {
        DensityMethod::ExactQuadrature
    };
    DensityField::new(points.to_vec(), values, errors, method)
}

/// Capacity probabilities at every `(point, radius)` pair, point-major;
/// pair `k` draws from `derive_stream(seed, k)`.
pub fn capacity_sweep<E: Executor + ?Sized>(
    exec: &E,
    scenario: &Scenario,
    points: &[Point],
    radii: &[f64],
    mc_points: usize,
    seed: u64,
) -> Result<Vec<CapacityProbability>> {
    let nr = radii.len();
    exec.map_indexed(points.len() * nr, |k| {
        let mut rng = derive_stream(seed, k as u64);
        capacity_probability(
            &scenario.intensity,
            &scenario.marks,
            &points[k / nr],
            radii[k % nr],
            mc_points,
            &mut rng,
        )
    })
    .into_iter()
    .collect()
}
