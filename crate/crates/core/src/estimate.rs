//! Mean-density estimators built from i.i.d. realizations.
//!
//! `λ̂^N(x) = Σ_i 1{Θ_i ∩ B_R(x) ≠ ∅} / (N b_{d−n} R^{d−n})`, together with
//! the grain-count and contact-distribution variants, the `n = 0` histogram
//! and bias/variance/MSE studies.
//!
//! The slice functions take stored realizations. For large `N` the
//! streaming [`tally`] simulates, queries and drops each realization in turn.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::boolean::{BooleanRealization, RealizationShape, MAX_QUERY_RADIUS};
use crate::error::{Error, Result};
use crate::exec::{fold_replicates, Accumulate, Executor};
use crate::geometry::{ball_volume, Aabb, Point};
use crate::math;
use crate::poisson::Scenario;
use crate::stats::{fit_line, Moments, NeumaierSum};
use crate::stream::derive_seed;

/// `R_N = c0·N^{−β}` with `β ∈ (0, 1/(d−n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSchedule {
    c0: f64,
    beta: f64,
    codim: usize,
}

impl BandwidthSchedule {
    pub fn new(c0: f64, beta: f64, dim: usize, grain_dim: usize) -> Result<Self> {
        if grain_dim >= dim {
            return Err(Error::config("bandwidth schedules need n < d"));
        }
        let codim = dim - grain_dim;
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::config(format!("bandwidth.c0 = {c0} must be a positive real")));
        }
        let upper = 1.0 / codim as f64;
        if !(beta > 0.0 && beta < upper) {
            return Err(Error::config(format!(
                "bandwidth.beta = {beta} outside the admissible interval (0, {upper}) for d - n = {codim}"
            )));
        }
        Ok(BandwidthSchedule { c0, beta, codim })
    }

    /// `c0 = 1`, `β = 1/(d−n+2)`.
    pub fn default_for(dim: usize, grain_dim: usize) -> Result<Self> {
        let codim = dim.saturating_sub(grain_dim);
        Self::new(1.0, 1.0 / (codim as f64 + 2.0), dim, grain_dim)
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn radius(&self, n: u64) -> f64 {
        self.c0 * libm::pow(n as f64, -self.beta)
    }

    /// `N·R_N^{d−n}`.
    pub fn effective_sample(&self, n: u64) -> f64 {
        n as f64 * math::powi(self.radius(n), self.codim as i32)
    }
}

/// One evaluation of `λ̂` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub x: Point,
    pub n: u64,
    pub radius: f64,
    pub lambda_hat: f64,
    /// Binomial plug-in `√(p̂(1−p̂)/N)/(b_{d−n}R^{d−n})`.
    pub std_error: f64,
    /// Square of [`std_error`](Self::std_error).
    pub empirical_variance: f64,
    pub exact_lambda: Option<f64>,
    pub finite_r_mean_oracle: Option<f64>,
}

impl EstimateReport {
    fn from_hits(x: Point, hits: u64, n: u64, radius: f64, normalizer: f64) -> Self {
        let p = proportion(hits, n);
        let se = math::sqrt(p * (1.0 - p) / n as f64) / normalizer;
        EstimateReport {
            x,
            n,
            radius,
            lambda_hat: p / normalizer,
            std_error: se,
            empirical_variance: se * se,
            exact_lambda: None,
            finite_r_mean_oracle: None,
        }
    }
}

#[inline]
fn proportion(count: u64, n: u64) -> f64 {
    count as f64 / n as f64
}

/// `b_{d−n} r^{d−n}`.
pub fn normalizer(dim: usize, grain_dim: usize, r: f64) -> Result<f64> {
    if grain_dim >= dim {
        return Err(Error::config("estimators need n < d"));
    }
    let k = dim - grain_dim;
    Ok(ball_volume(k)? * math::powi(r, k as i32))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("radius {r} must be a positive real")))
    }
}

fn common_shape(realizations: &[BooleanRealization]) -> Result<RealizationShape> {
    let first = realizations
        .first()
        .ok_or_else(|| Error::config("at least one realization is required"))?;
    let shape = *first.shape();
    if realizations.iter().any(|r| !r.shape().compatible(&shape)) {
        return Err(Error::config(
            "realizations do not share one scenario shape (dimensions, window, r_max)",
        ));
    }
    Ok(shape)
}

fn count_hits(realizations: &[BooleanRealization], x: &Point, r: f64) -> Result<u64> {
    let mut hits = 0;
    for real in realizations {
        if real.hits(x, r)? {
            hits += 1;
        }
    }
    Ok(hits)
}

/// `T̂^N(B_r(x))`: the fraction of realizations meeting `B_r(x)`.
pub fn empirical_capacity(realizations: &[BooleanRealization], x: &Point, r: f64) -> Result<f64> {
    common_shape(realizations)?;
    let hits = count_hits(realizations, x, r)?;
    Ok(proportion(hits, realizations.len() as u64))
}

/// `λ̂^N(x)` with bandwidth `radius`.
pub fn density_estimate(
    realizations: &[BooleanRealization],
    x: &Point,
    radius: f64,
) -> Result<EstimateReport> {
    check_radius(radius)?;
    let shape = common_shape(realizations)?;
    let hits = count_hits(realizations, x, radius)?;
    let norm = normalizer(shape.dim, shape.grain_dim, radius)?;
    Ok(EstimateReport::from_hits(
        *x,
        hits,
        realizations.len() as u64,
        radius,
        norm,
    ))
}

/// Mean number of grains meeting `B_r(x)`, divided by `b_{d−n} r^{d−n}`.
pub fn count_estimate(realizations: &[BooleanRealization], x: &Point, r: f64) -> Result<f64> {
    check_radius(r)?;
    let shape = common_shape(realizations)?;
    let mut total = 0u64;
    for real in realizations {
        total += u64::from(real.hit_count(x, r)?);
    }
    Ok(proportion(total, realizations.len() as u64) / normalizer(shape.dim, shape.grain_dim, r)?)
}

/// Half the least-squares slope of `r ↦ T̂^N(B_r(x))` over `r_grid`.
pub fn contact_derivative(
    realizations: &[BooleanRealization],
    x: &Point,
    r_grid: &[f64],
) -> Result<f64> {
    let shape = common_shape(realizations)?;
    check_contact(shape.dim, shape.grain_dim, r_grid)?;
    let caps = r_grid
        .iter()
        .map(|r| empirical_capacity(realizations, x, *r))
        .collect::<Result<Vec<_>>>()?;
    half_slope(r_grid, &caps)
}

fn check_contact(dim: usize, grain_dim: usize, r_grid: &[f64]) -> Result<()> {
    if grain_dim + 1 != dim {
        return Err(Error::config(format!(
            "the contact-distribution route needs n = d - 1 (got d = {dim}, n = {grain_dim})"
        )));
    }
    if r_grid.len() < 2 {
        return Err(Error::config("the contact-distribution fit needs at least two radii"));
    }
    for r in r_grid {
        check_radius(*r)?;
    }
    Ok(())
}

fn half_slope(r_grid: &[f64], caps: &[f64]) -> Result<f64> {
    let (slope, _) =
        fit_line(r_grid, caps).ok_or_else(|| Error::config("r_grid radii must not all coincide"))?;
    Ok(0.5 * slope)
}

/// `card{i : |X_i − x| ≤ R} / (N·2R)`.
pub fn histogram_reduction(samples: &[f64], x: f64, radius: f64) -> Result<f64> {
    check_radius(radius)?;
    if samples.is_empty() {
        return Err(Error::config("at least one sample is required"));
    }
    let inside = samples.iter().filter(|s| (x - **s).abs() <= radius).count() as u64;
    Ok(proportion(inside, samples.len() as u64) / normalizer(1, 0, radius)?)
}

/// Which realizations to simulate for streaming estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scenario: Scenario,
    pub window: Aabb,
    pub r_max: f64,
}

impl SimulationPlan {
    pub fn new(scenario: Scenario, window: Aabb, r_max: f64) -> Result<Self> {
        if window.dim() != scenario.dim() {
            return Err(Error::config("window and scenario differ in dimension"));
        }
        if !(r_max > 0.0 && r_max < MAX_QUERY_RADIUS) {
            return Err(Error::config(format!(
                "r_max = {r_max} outside (0, {MAX_QUERY_RADIUS})"
            )));
        }
        Ok(SimulationPlan {
            scenario,
            window,
            r_max,
        })
    }

    /// Smallest plan whose window holds every query ball.
    pub fn covering(scenario: Scenario, queries: &[Query]) -> Result<Self> {
        let first = queries
            .first()
            .ok_or_else(|| Error::config("at least one query is required"))?;
        let mut window = Aabb::from_point(first.x);
        let mut r_max: f64 = 0.0;
        for q in queries {
            window = window.union(&Aabb::from_point(q.x).dilate(q.r));
            r_max = r_max.max(q.r);
        }
        Self::new(scenario, window, r_max)
    }

    pub fn simulate<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<BooleanRealization> {
        BooleanRealization::simulate(&self.scenario, &self.window, self.r_max, rng)
    }

    fn check(&self, queries: &[Query]) -> Result<()> {
        for q in queries {
            check_radius(q.r)?;
            if q.x.dim() != self.scenario.dim() {
                return Err(Error::config("query point dimension mismatch"));
            }
            if q.r > self.r_max || !self.window.contains_ball(&q.x, q.r) {
                return Err(Error::query(format!(
                    "ball B_{}({:?}) is not inside the observation window with r <= r_max",
                    q.r,
                    q.x.coords()
                )));
            }
        }
        Ok(())
    }
}

/// A ball `B_r(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub x: Point,
    pub r: f64,
}

/// Per-query hit and grain counts over a run of realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct HitTally {
    n: u64,
    hits: Vec<u64>,
    grains: Vec<u64>,
    /// `Σ_i (hit_count_i)²`, for the count-route standard error.
    grains_sq: Vec<u64>,
    error: Option<(u64, Error)>,
}

impl HitTally {
    pub fn new(queries: usize) -> Self {
        HitTally {
            n: 0,
            hits: vec![0; queries],
            grains: vec![0; queries],
            grains_sq: vec![0; queries],
            error: None,
        }
    }

    /// Adds one realization.
    pub fn record(&mut self, real: &BooleanRealization, queries: &[Query]) -> Result<()> {
        for (k, q) in queries.iter().enumerate() {
            let c = u64::from(real.hit_count(&q.x, q.r)?);
            self.hits[k] += u64::from(c > 0);
            self.grains[k] += c;
            self.grains_sq[k] += c * c;
        }
        self.n += 1;
        Ok(())
    }

    pub fn replicates(&self) -> u64 {
        self.n
    }

    pub fn hits(&self, k: usize) -> u64 {
        self.hits[k]
    }

    pub fn grains(&self, k: usize) -> u64 {
        self.grains[k]
    }

    pub fn capacity(&self, k: usize) -> f64 {
        proportion(self.hits[k], self.n)
    }

    /// Mean grain count and its standard error for query `k`.
    pub fn mean_count(&self, k: usize) -> (f64, f64) {
        let n = self.n as f64;
        let mean = proportion(self.grains[k], self.n);
        let var = if self.n > 1 {
            ((self.grains_sq[k] as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, math::sqrt(var / n))
    }

    fn into_result(self) -> Result<Self> {
        match self.error {
            Some((_, e)) => Err(e),
            None => Ok(self),
        }
    }
}

impl Accumulate for HitTally {
    fn merge(&mut self, other: Self) {
        self.n += other.n;
        for k in 0..self.hits.len() {
            self.hits[k] += other.hits[k];
            self.grains[k] += other.grains[k];
            self.grains_sq[k] += other.grains_sq[k];
        }
        self.error = match (self.error.take(), other.error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
    }
}

/// Simulates `n` realizations (replicate `i` from `derive_stream(seed, i)`)
/// and tallies every query on each.
pub fn tally<E: Executor + ?Sized>(
    exec: &E,
    plan: &SimulationPlan,
    queries: &[Query],
    n: u64,
    seed: u64,
) -> Result<HitTally> {
    plan.check(queries)?;
    if n == 0 {
        return Err(Error::config("N must be positive"));
    }
    fold_replicates(
        exec,
        seed,
        n,
        || HitTally::new(queries.len()),
        |acc, rng, i| {
            if acc.error.is_some() {
                return;
            }
            let res = plan.simulate(rng).and_then(|real| acc.record(&real, queries));
            if let Err(e) = res {
                acc.error = Some((i, e));
            }
        },
    )
    .into_result()
}

/// Streaming estimators evaluated from one [`HitTally`].
impl SimulationPlan {
    pub fn normalizer(&self, r: f64) -> f64 {
        self.scenario.normalizer(r)
    }

    pub fn report(&self, t: &HitTally, queries: &[Query], k: usize) -> EstimateReport {
        let q = queries[k];
        EstimateReport::from_hits(q.x, t.hits(k), t.replicates(), q.r, self.normalizer(q.r))
    }

    pub fn count_estimate(&self, t: &HitTally, queries: &[Query], k: usize) -> (f64, f64) {
        let norm = self.normalizer(queries[k].r);
        let (m, se) = t.mean_count(k);
        (m / norm, se / norm)
    }

    /// Half-slope fit over the queries `ks`, which must share one centre.
    pub fn contact_derivative(&self, t: &HitTally, queries: &[Query], ks: &[usize]) -> Result<f64> {
        let radii: Vec<f64> = ks.iter().map(|k| queries[*k].r).collect();
        check_contact(self.scenario.dim(), self.scenario.grain_dim(), &radii)?;
        let x = queries[ks[0]].x;
        if ks.iter().any(|k| queries[*k].x != x) {
            return Err(Error::config("contact-distribution radii must share one centre"));
        }
        let caps: Vec<f64> = ks.iter().map(|k| t.capacity(*k)).collect();
        half_slope(&radii, &caps)
    }
}

/// `λ̂` from each of `experiments` independent runs of `n` realizations at
/// the queries; experiment `e` uses seed `derive_seed(seed, e)`.
/// Returns one row per experiment, one entry per query.
pub fn repeated_estimates<E: Executor + ?Sized>(
    exec: &E,
    plan: &SimulationPlan,
    queries: &[Query],
    n: u64,
    experiments: u64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..experiments)
        .map(|e| {
            let t = tally(exec, plan, queries, n, derive_seed(seed, e))?;
            Ok((0..queries.len())
                .map(|k| plan.report(&t, queries, k).lambda_hat)
                .collect())
        })
        .collect()
}

/// Bias, variance and MSE of `λ̂` at one point and one `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub x: Point,
    pub n: u64,
    pub radius: f64,
    /// Mean of `λ̂` over the experiments.
    pub lambda_hat: f64,
    /// Standard error of that mean.
    pub std_error: f64,
    pub exact: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
}

/// `Σ λ̂ Δx` against `Σ λ Δx` over a grid of cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCheck {
    pub n: u64,
    pub estimated: f64,
    pub exact: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub region: Vec<RegionCheck>,
}

/// Inputs of [`convergence_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub scenario: Scenario,
    pub x_grid: Vec<Point>,
    /// `λ_Θ` at each grid point.
    pub exact: Vec<f64>,
    /// Cell volume `Δx` when the grid is a midpoint grid over a region.
    pub cell_volume: Option<f64>,
    pub schedule: BandwidthSchedule,
    pub n_grid: Vec<u64>,
    pub replications: u64,
}

/// Runs `replications` experiments of `N` realizations for every `N` in
/// `n_grid`. Experiment `e` at `N` uses seed
/// `derive_seed(derive_seed(seed, N), e)`.
pub fn convergence_study<E: Executor + ?Sized>(
    exec: &E,
    plan: &StudyPlan,
    window: &Aabb,
    seed: u64,
) -> Result<StudyTable> {
    if plan.x_grid.is_empty() || plan.exact.len() != plan.x_grid.len() {
        return Err(Error::config("x_grid and exact values must be nonempty and aligned"));
    }
    if plan.n_grid.is_empty() || plan.n_grid.windows(2).any(|w| w[0] >= w[1]) || plan.n_grid[0] == 0 {
        return Err(Error::config("N_grid must be a strictly increasing list of positive integers"));
    }
    if plan.replications < 2 {
        return Err(Error::config("replications must be at least 2"));
    }
    let r_max = plan.schedule.radius(plan.n_grid[0]);
    let sim = SimulationPlan::new(plan.scenario.clone(), *window, r_max)?;
    let mut rows = Vec::new();
    let mut region = Vec::new();
    for &n in &plan.n_grid {
        let radius = plan.schedule.radius(n);
        let queries: Vec<Query> = plan.x_grid.iter().map(|x| Query { x: *x, r: radius }).collect();
        let runs = repeated_estimates(exec, &sim, &queries, n, plan.replications, derive_seed(seed, n))?;
        let mut means = Vec::with_capacity(queries.len());
        for (k, q) in queries.iter().enumerate() {
            let mut m = Moments::new();
            let mut sq = NeumaierSum::new();
            let exact = plan.exact[k];
            for run in &runs {
                m.push(run[k]);
                sq.add((run[k] - exact) * (run[k] - exact));
            }
            let mean = m.mean();
            means.push(mean);
            rows.push(StudyRow {
                x: q.x,
                n,
                radius,
                lambda_hat: mean,
                std_error: m.std_error(),
                exact,
                bias: mean - exact,
                variance: m.variance(),
                mse: sq.value() / plan.replications as f64,
            });
        }
        if let Some(dv) = plan.cell_volume {
            let est: NeumaierSum = means.iter().map(|v| v * dv).collect();
            let ex: NeumaierSum = plan.exact.iter().map(|v| v * dv).collect();
            let (est, ex) = (est.value(), ex.value());
            region.push(RegionCheck {
                n,
                estimated: est,
                exact: ex,
                relative_error: (est - ex).abs() / ex.abs(),
            });
        }
    }
    Ok(StudyTable { rows, region })
}
