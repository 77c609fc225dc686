//! Typical grains `Z_0(s)`, the mark law `Q`, and the regularity
//! certificate `H^n(Z̃_0 ∩ B_r(x)) ≥ γ r^n`.
//!
//! Every grain contains the origin: points sit at it, segments start at it,
//! polylines have it as a vertex.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, check_same_dim, Aabb, Point, SegmentShape};
use crate::math;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq)]
pub enum Grain {
    /// `{0}`; `n = 0`.
    Point { dim: usize },
    /// `{τ·direction : τ ∈ [0, length]}`; `n = 1`.
    Segment { length: f64, direction: Point },
    /// Chain of segments through `vertices`, one of which is the origin; `n = 1`.
    Polyline { vertices: Vec<Point> },
}

impl Grain {
    pub fn point(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Grain::Point { dim })
    }

    pub fn segment(length: f64, direction: Point) -> Result<Self> {
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::config("segment length must be finite and nonnegative"));
        }
        let norm = direction.norm();
        if !((norm - 1.0).abs() < 1e-9) {
            return Err(Error::config("segment direction must be a unit vector"));
        }
        Ok(Grain::Segment {
            length,
            direction: direction * (1.0 / norm),
        })
    }

    /// Planar segment of length `l` at angle `alpha`.
    pub fn segment_at_angle(length: f64, alpha: f64) -> Result<Self> {
        Grain::segment(length, Point::direction(2, alpha, 0.0)?)
    }

    pub fn polyline(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::config("a polyline needs at least two vertices"));
        }
        let dim = vertices[0].dim();
        for v in &vertices {
            check_same_dim(v, &vertices[0])?;
        }
        if !vertices.iter().any(|v| *v == Point::origin(dim)) {
            return Err(Error::config("a polyline grain must have the origin as a vertex"));
        }
        Ok(Grain::Polyline { vertices })
    }

    pub fn dim(&self) -> usize {
        match self {
            Grain::Point { dim } => *dim,
            Grain::Segment { direction, .. } => direction.dim(),
            Grain::Polyline { vertices } => vertices[0].dim(),
        }
    }

    /// Hausdorff dimension `n` of the grain family.
    pub fn hausdorff_dim(&self) -> usize {
        match self {
            Grain::Point { .. } => 0,
            _ => 1,
        }
    }

    /// The constituent segments (none for a point grain).
    pub fn pieces(&self) -> impl Iterator<Item = SegmentShape> + '_ {
        let single = match self {
            Grain::Segment { length, direction } => Some(SegmentShape {
                a: Point::origin(direction.dim()),
                b: *direction * *length,
            }),
            _ => None,
        };
        let chain: &[Point] = match self {
            Grain::Polyline { vertices } => vertices,
            _ => &[],
        };
        single
            .into_iter()
            .chain(chain.windows(2).map(|w| SegmentShape { a: w[0], b: w[1] }))
    }

    /// `H^n(Z_0)`: 1 for a point, total length otherwise.
    pub fn hn_measure(&self) -> f64 {
        match self {
            Grain::Point { .. } => 1.0,
            Grain::Segment { length, .. } => *length,
            Grain::Polyline { .. } => self.pieces().map(|s| s.length()).sum(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Grain::Point { .. } => 0.0,
            Grain::Segment { length, .. } => *length,
            Grain::Polyline { vertices } => {
                let mut d: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        d = d.max(a.distance(b));
                    }
                }
                d
            }
        }
    }

    /// `max_{y ∈ Z_0} |y|`; never exceeds the diameter since `0 ∈ Z_0`.
    pub fn reach(&self) -> f64 {
        match self {
            Grain::Point { .. } => 0.0,
            Grain::Segment { length, .. } => *length,
            Grain::Polyline { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        let origin = Aabb::from_point(Point::origin(self.dim()));
        self.pieces()
            .fold(origin, |acc, s| acc.union(&s.bounding_box()))
    }

    /// Distance from `x` to the grain.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::config(alloc::format!(
                "dimension mismatch: point has {} coordinates, grain lives in R^{}",
                x.dim(),
                self.dim()
            )));
        }
        Ok(self.distance_unchecked(x))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, x: &Point) -> f64 {
        match self {
            Grain::Point { .. } => x.norm(),
            Grain::Segment { length, direction } => {
                let t = x.dot(direction).clamp(0.0, *length);
                x.distance(&(*direction * t))
            }
            Grain::Polyline { .. } => self
                .pieces()
                .map(|s| s.distance_unchecked(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `∫_{Z_0} h dH^n` with a Gauss–Legendre rule of the given order per segment.
    pub fn integrate_along<F: FnMut(&Point) -> f64>(&self, h: F, order: usize) -> Result<f64> {
        let rule = GaussLegendre::new(order)?;
        self.integrate_with(h, &rule)
    }

    pub fn integrate_with<F: FnMut(&Point) -> f64>(
        &self,
        mut h: F,
        rule: &GaussLegendre,
    ) -> Result<f64> {
        let mut eval = |p: &Point| {
            let v = h(p);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric { value: v, point: *p })
            }
        };
        if let Grain::Point { dim } = self {
            return eval(&Point::origin(*dim));
        }
        let mut total = 0.0;
        for s in self.pieces() {
            let len = s.length();
            if len == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for (t, w) in rule.nodes().iter().zip(rule.weights()) {
                acc += w * eval(&s.point_at(0.5 * (1.0 + t)))?;
            }
            total += 0.5 * len * acc;
        }
        Ok(total)
    }
}

/// Free-function form of [`Grain::hn_measure`].
pub fn hn_measure(g: &Grain) -> f64 {
    g.hn_measure()
}

/// Free-function form of [`Grain::distance`].
pub fn grain_distance(g: &Grain, x: &Point) -> Result<f64> {
    g.distance(x)
}

/// Free-function form of [`Grain::integrate_along`].
pub fn integrate_along<F: FnMut(&Point) -> f64>(g: &Grain, h: F, order: usize) -> Result<f64> {
    g.integrate_along(h, order)
}

/// Law of the segment length `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthLaw {
    Fixed(f64),
    Uniform { min: f64, max: f64 },
    /// Exponential with the given rate conditioned on `L ≤ max`.
    TruncatedExponential { rate: f64, max: f64 },
}

/// Quantile used to truncate unbounded length laws when no bound is given.
pub const DEFAULT_TRUNCATION_QUANTILE: f64 = 0.9999;

impl LengthLaw {
    pub fn fixed(l: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::config("fixed length must be positive and finite"));
        }
        Ok(LengthLaw::Fixed(l))
    }

    pub fn uniform(min: f64, max: f64) -> Result<Self> {
        if !(min >= 0.0 && max > 0.0 && min <= max) || !max.is_finite() {
            return Err(Error::config(
                "uniform length law needs 0 <= min <= max, max > 0, finite",
            ));
        }
        Ok(LengthLaw::Uniform { min, max })
    }

    /// `max = None` truncates at the [`DEFAULT_TRUNCATION_QUANTILE`] quantile.
    pub fn truncated_exponential(rate: f64, max: Option<f64>) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::config("exponential rate must be positive and finite"));
        }
        let max = max.unwrap_or(-math::ln(1.0 - DEFAULT_TRUNCATION_QUANTILE) / rate);
        if !(max > 0.0) || !max.is_finite() {
            return Err(Error::config("truncation length must be positive and finite"));
        }
        Ok(LengthLaw::TruncatedExponential { rate, max })
    }

    /// Almost-sure upper bound `L_max`.
    pub fn max(&self) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => l,
            LengthLaw::Uniform { max, .. } => max,
            LengthLaw::TruncatedExponential { max, .. } => max,
        }
    }

    /// `E[L^k]`.
    pub fn moment(&self, k: u32) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => math::powi(l, k as i32),
            LengthLaw::Uniform { min, max } => {
                if min == max {
                    return math::powi(min, k as i32);
                }
                let e = k as i32 + 1;
                (math::powi(max, e) - math::powi(min, e)) / ((k as f64 + 1.0) * (max - min))
            }
            LengthLaw::TruncatedExponential { rate, max } => {
                let rule = GaussLegendre::new(16).expect("valid order");
                let mass = -math::expm1(-rate * max);
                rule.integrate_composite(0.0, max, 64, |l| {
                    math::powi(l, k as i32) * rate * math::exp(-rate * l)
                }) / mass
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => l,
            LengthLaw::Uniform { min, max } => min + rng.random::<f64>() * (max - min),
            LengthLaw::TruncatedExponential { rate, max } => {
                let u: f64 = rng.random();
                (-math::ln1p(u * math::expm1(-rate * max)) / rate).min(max)
            }
        }
    }
}

/// Law of the segment direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationLaw {
    Fixed(Point),
    /// Isotropic: uniform angle in the plane, uniform on the sphere in 3-d,
    /// a fair sign in 1-d.
    Uniform,
}

impl OrientationLaw {
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Point {
        match *self {
            OrientationLaw::Fixed(dir) => dir,
            OrientationLaw::Uniform => match dim {
                1 => Point::x(if rng.random::<bool>() { 1.0 } else { -1.0 }),
                2 => {
                    let (s, c) = math::sin_cos(2.0 * PI * rng.random::<f64>());
                    Point::xy(c, s)
                }
                _ => {
                    let z = 2.0 * rng.random::<f64>() - 1.0;
                    let (s, c) = math::sin_cos(2.0 * PI * rng.random::<f64>());
                    let rho = math::sqrt((1.0 - z * z).max(0.0));
                    Point::xyz(rho * c, rho * s, z)
                }
            },
        }
    }
}

/// The mark law `Q`, viewed through the grain it produces.
#[derive(Debug, Clone, PartialEq)]
pub enum MarkDistribution {
    Deterministic(Grain),
    SegmentLaw {
        dim: usize,
        length: LengthLaw,
        orientation: OrientationLaw,
    },
}

impl MarkDistribution {
    pub fn deterministic(g: Grain) -> Self {
        MarkDistribution::Deterministic(g)
    }

    pub fn segment_law(dim: usize, length: LengthLaw, orientation: OrientationLaw) -> Result<Self> {
        check_dim(dim)?;
        if let OrientationLaw::Fixed(d) = orientation {
            if d.dim() != dim || (d.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config(
                    "fixed orientation must be a unit vector of the scenario dimension",
                ));
            }
        }
        Ok(MarkDistribution::SegmentLaw {
            dim,
            length,
            orientation,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            MarkDistribution::Deterministic(g) => g.dim(),
            MarkDistribution::SegmentLaw { dim, .. } => *dim,
        }
    }

    pub fn grain_dim(&self) -> usize {
        match self {
            MarkDistribution::Deterministic(g) => g.hausdorff_dim(),
            MarkDistribution::SegmentLaw { .. } => 1,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, MarkDistribution::Deterministic(_))
    }

    /// Almost-sure bound on the grain diameter.
    pub fn diameter_bound(&self) -> f64 {
        match self {
            MarkDistribution::Deterministic(g) => g.diameter(),
            MarkDistribution::SegmentLaw { length, .. } => length.max(),
        }
    }

    /// Almost-sure bound on `max_{y ∈ Z_0} |y|`, used for guard zones.
    pub fn reach_bound(&self) -> f64 {
        match self {
            MarkDistribution::Deterministic(g) => g.reach(),
            MarkDistribution::SegmentLaw { length, .. } => length.max(),
        }
    }

    /// `E_Q[H^n(Z_0)]`.
    pub fn mean_hn(&self) -> f64 {
        match self {
            MarkDistribution::Deterministic(g) => g.hn_measure(),
            MarkDistribution::SegmentLaw { length, .. } => length.moment(1),
        }
    }

    /// `E[L^k]` for segment laws; the grain length for deterministic segments.
    pub fn length_moment(&self, k: u32) -> Option<f64> {
        match self {
            MarkDistribution::SegmentLaw { length, .. } => Some(length.moment(k)),
            MarkDistribution::Deterministic(g @ Grain::Segment { .. }) => {
                Some(math::powi(g.hn_measure(), k as i32))
            }
            MarkDistribution::Deterministic(_) => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Grain {
        match self {
            MarkDistribution::Deterministic(g) => g.clone(),
            MarkDistribution::SegmentLaw {
                dim,
                length,
                orientation,
            } => Grain::Segment {
                length: length.sample(rng),
                direction: orientation.sample(*dim, rng),
            },
        }
    }
}

/// Free-function form of [`MarkDistribution::sample`].
pub fn sample_mark<R: Rng + ?Sized>(q: &MarkDistribution, rng: &mut R) -> Grain {
    q.sample(rng)
}

/// How the enlarged grain `Z̃_0 ⊇ Z_0` is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRule {
    /// `Z̃_0 = Z_0`.
    Identity,
    /// Curves shorter than 1 are continued along their last edge (from the
    /// anchored endpoint for segments) until their length is 1.
    ExtendToUnitLength,
}

/// Witness `(γ, Z̃_0)` for `H^n(Z̃_0(s) ∩ B_r(x)) ≥ γ r^n`, `x ∈ Z_0(s)`, `r ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityCertificate {
    pub gamma: f64,
    pub extension: ExtensionRule,
}

impl RegularityCertificate {
    pub fn for_marks(q: &MarkDistribution) -> Self {
        let extension = if q.grain_dim() == 0 {
            ExtensionRule::Identity
        } else {
            ExtensionRule::ExtendToUnitLength
        };
        RegularityCertificate {
            gamma: 1.0,
            extension,
        }
    }

    pub fn extend(&self, g: &Grain) -> Grain {
        if self.extension == ExtensionRule::Identity {
            return g.clone();
        }
        match g {
            Grain::Point { .. } => g.clone(),
            Grain::Segment { length, direction } => Grain::Segment {
                length: length.max(1.0),
                direction: *direction,
            },
            Grain::Polyline { vertices } => {
                let total = g.hn_measure();
                if total >= 1.0 {
                    return g.clone();
                }
                let dim = vertices[0].dim();
                let dir = vertices
                    .windows(2)
                    .rev()
                    .map(|w| w[1] - w[0])
                    .find(|d| d.norm() > 0.0)
                    .map(|d| d * (1.0 / d.norm()))
                    .unwrap_or_else(|| Point::origin(dim).with(0, 1.0));
                let mut out = vertices.clone();
                let last = *out.last().unwrap();
                out.push(last + dir * (1.0 - total));
                Grain::Polyline { vertices: out }
            }
        }
    }

    /// `H^n(Z̃_0)`.
    pub fn extended_measure(&self, g: &Grain) -> f64 {
        self.extend(g).hn_measure()
    }

    /// `H^n(Z̃_0 ∩ B_r(x))`.
    pub fn covered_measure(&self, g: &Grain, x: &Point, r: f64) -> f64 {
        let ext = self.extend(g);
        match ext {
            Grain::Point { .. } => {
                if x.norm() <= r {
                    1.0
                } else {
                    0.0
                }
            }
            _ => ext.pieces().map(|s| s.length_in_ball(x, r)).sum(),
        }
    }

    /// Checks the lower bound at one `(x, r)`.
    pub fn holds_at(&self, g: &Grain, x: &Point, r: f64) -> bool {
        let n = g.hausdorff_dim() as i32;
        self.covered_measure(g, x, r) >= self.gamma * math::powi(r, n) - 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DEFAULT_ORDER;
    use crate::stats::Moments;
    use crate::stream::derive_stream;
    use alloc::vec;

    fn polyline() -> Grain {
        Grain::polyline(vec![
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(1.0, 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn hn_measure_examples() {
        assert_eq!(Grain::segment_at_angle(1.0, 0.0).unwrap().hn_measure(), 1.0);
        assert_eq!(Grain::point(2).unwrap().hn_measure(), 1.0);
        assert_eq!(polyline().hn_measure(), 3.0);
    }

    #[test]
    fn distance_examples() {
        let s = Grain::segment_at_angle(1.0, 0.0).unwrap();
        assert!((s.distance(&Point::xy(0.5, 0.2)).unwrap() - 0.2).abs() < 1e-15);
        let p = Grain::point(2).unwrap();
        assert_eq!(p.distance(&Point::xy(3.0, 4.0)).unwrap(), 5.0);
        // Oracle: min over member segments via the geometry routine.
        let x = Point::xy(2.0, 1.0);
        let oracle = polyline()
            .pieces()
            .map(|s| crate::geometry::dist_point_segment(&x, &s).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(oracle, 1.0);
        assert_eq!(polyline().distance(&x).unwrap(), oracle);
    }

    #[test]
    fn polyline_requires_origin_vertex() {
        assert!(Grain::polyline(vec![Point::xy(1.0, 0.0), Point::xy(2.0, 0.0)]).is_err());
        assert!(Grain::polyline(vec![Point::xy(0.0, 0.0)]).is_err());
    }

    #[test]
    fn integrate_examples() {
        let s = Grain::segment_at_angle(1.0, 0.0).unwrap();
        for order in 2..6 {
            let v = s.integrate_along(|p| p.norm_sq(), order).unwrap();
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = Grain::point(2).unwrap();
        assert_eq!(p.integrate_along(|_| 7.0, 1).unwrap(), 7.0);
        let s = Grain::segment_at_angle(2.0, PI / 2.0).unwrap();
        assert!((s.integrate_along(|_| 1.0, DEFAULT_ORDER).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_reports_non_finite() {
        let s = Grain::segment_at_angle(1.0, 0.0).unwrap();
        let err = s
            .integrate_along(|p| if p.get(0) > 0.5 { f64::NAN } else { 1.0 }, 4)
            .unwrap_err();
        match err {
            Error::Numeric { point, .. } => assert!(point.get(0) > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_integrand_recovers_measure() {
        for g in [
            Grain::point(3).unwrap(),
            Grain::segment_at_angle(0.37, 1.1).unwrap(),
            polyline(),
        ] {
            let v = g.integrate_along(|_| 1.0, DEFAULT_ORDER).unwrap();
            assert!((v - g.hn_measure()).abs() < 1e-14);
        }
    }

    #[test]
    fn deterministic_mark_is_constant() {
        let g = Grain::segment_at_angle(1.0, 0.0).unwrap();
        let q = MarkDistribution::deterministic(g.clone());
        let mut rng = derive_stream(1, 0);
        for _ in 0..10 {
            assert_eq!(sample_mark(&q, &mut rng), g);
        }
    }

    fn length_moments(q: &MarkDistribution, k: i32, draws: usize) -> Moments {
        let mut rng = derive_stream(17, 3);
        (0..draws)
            .map(|_| libm::pow(q.sample(&mut rng).hn_measure(), k as f64))
            .collect()
    }

    #[test]
    fn fixed_length_mean() {
        let q = MarkDistribution::segment_law(2, LengthLaw::fixed(1.0).unwrap(), OrientationLaw::Uniform)
            .unwrap();
        let m = length_moments(&q, 1, 100_000);
        assert!((m.mean() - 1.0).abs() <= 3.0 * m.std_error() + 1e-12);
    }

    #[test]
    fn uniform_length_third_moment() {
        // ∫_0^2 l^3 / 2 dl = 2
        let q = MarkDistribution::segment_law(
            2,
            LengthLaw::uniform(0.0, 2.0).unwrap(),
            OrientationLaw::Uniform,
        )
        .unwrap();
        let m = length_moments(&q, 3, 100_000);
        assert!((m.mean() - 2.0).abs() <= 3.0 * m.std_error(), "{}", m.mean());
        assert!((q.length_moment(3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_exponential_moments() {
        let law = LengthLaw::truncated_exponential(2.0, None).unwrap();
        assert!((law.max() - libm::log(1e4) / 2.0).abs() < 1e-9);
        // Untruncated mean 0.5, truncation removes ~1e-4 mass.
        assert!((law.moment(1) - 0.5).abs() < 2e-3);
        let q = MarkDistribution::segment_law(2, law, OrientationLaw::Uniform).unwrap();
        let m = length_moments(&q, 1, 100_000);
        assert!((m.mean() - law.moment(1)).abs() <= 3.0 * m.std_error());
        let mut rng = derive_stream(5, 5);
        for _ in 0..10_000 {
            assert!(q.sample(&mut rng).diameter() <= q.diameter_bound());
        }
    }

    #[test]
    fn sampled_grains_contain_origin() {
        let q = MarkDistribution::segment_law(
            3,
            LengthLaw::uniform(0.5, 1.5).unwrap(),
            OrientationLaw::Uniform,
        )
        .unwrap();
        let mut rng = derive_stream(2, 0);
        for _ in 0..1000 {
            let g = q.sample(&mut rng);
            assert_eq!(g.distance(&Point::origin(3)).unwrap(), 0.0);
            assert!((g.diameter() - g.hn_measure()).abs() < 1e-15);
            assert!(g.diameter() <= q.diameter_bound());
        }
    }

    #[test]
    fn isotropic_directions_are_unit_and_centered() {
        for dim in 1..=3 {
            let mut rng = derive_stream(11, dim as u64);
            let mut mean = [0.0; 3];
            let n = 20_000;
            for _ in 0..n {
                let d = OrientationLaw::Uniform.sample(dim, &mut rng);
                assert!((d.norm() - 1.0).abs() < 1e-12);
                for k in 0..dim {
                    mean[k] += d.get(k) / n as f64;
                }
            }
            // Each coordinate has variance 1/dim; 5 SE band.
            let se = libm::sqrt(1.0 / dim as f64 / n as f64);
            assert!(mean.iter().all(|m| m.abs() < 5.0 * se), "{mean:?}");
        }
    }

    #[test]
    fn regularity_certificate_sampled() {
        let q = MarkDistribution::segment_law(
            2,
            LengthLaw::uniform(0.0, 2.0).unwrap(),
            OrientationLaw::Uniform,
        )
        .unwrap();
        let cert = RegularityCertificate::for_marks(&q);
        assert_eq!(cert.gamma, 1.0);
        let mut rng = derive_stream(8, 8);
        for _ in 0..1000 {
            let g = q.sample(&mut rng);
            let t: f64 = rng.random::<f64>() * g.hn_measure();
            let x = g.pieces().next().unwrap().point_at(t / g.hn_measure().max(1e-300));
            let r = rng.random::<f64>().max(1e-9);
            assert!(cert.holds_at(&g, &x, r), "grain {g:?} x {x:?} r {r}");
        }
    }

    #[test]
    fn certificate_extends_short_curves() {
        let cert = RegularityCertificate {
            gamma: 1.0,
            extension: ExtensionRule::ExtendToUnitLength,
        };
        let short = Grain::segment_at_angle(0.2, 0.3).unwrap();
        assert!((cert.extended_measure(&short) - 1.0).abs() < 1e-15);
        let tiny = Grain::polyline(vec![Point::xy(0.0, 0.0), Point::xy(0.1, 0.0), Point::xy(0.1, 0.1)])
            .unwrap();
        assert!((cert.extended_measure(&tiny) - 1.0).abs() < 1e-12);
        assert!(cert.holds_at(&tiny, &Point::xy(0.1, 0.05), 0.9));
        // Without the extension the bound fails for this grain.
        let plain = RegularityCertificate {
            gamma: 1.0,
            extension: ExtensionRule::Identity,
        };
        assert!(!plain.holds_at(&tiny, &Point::xy(0.1, 0.05), 0.9));
    }
}
