//! Weighted Minkowski content of a grain used as a fixed compact set:
//! `μ(S⊕r) / (b_{d−n} r^{d−n}) → ∫_S f dH^n` with `μ = f·H^d`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::boolean::MAX_QUERY_RADIUS;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::geometry::{ball_volume, Point};
use crate::grains::{Grain, RegularityCertificate};
use crate::math;
use crate::poisson::{intensity_bound, IntensityField};
use crate::quadrature::DEFAULT_ORDER;
use crate::sausage;
use crate::stats::Estimate;
use crate::stream::derive_stream;

pub const DEFAULT_MC_POINTS: usize = 1_000_000;

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < MAX_QUERY_RADIUS {
        Ok(())
    } else {
        Err(Error::config(format!("radius {r} outside (0, {MAX_QUERY_RADIUS})")))
    }
}

/// Monte Carlo `μ(S⊕r) = ∫_{S⊕r} f(y) dy`.
pub fn sausage_integral<R: Rng + ?Sized>(
    s: &Grain,
    f: &IntensityField,
    r: f64,
    mc_points: usize,
    rng: &mut R,
) -> Result<Estimate> {
    check_radius(r)?;
    if mc_points == 0 {
        return Err(Error::config("mc_points must be positive"));
    }
    let origin = Point::origin(s.dim());
    Ok(sausage::integral(s, &origin, false, r, f, mc_points, rng))
}

/// `b_{d−n} r^{d−n}` for the set `s`.
fn normalizer(s: &Grain, r: f64) -> Result<f64> {
    let k = s.dim() - s.hausdorff_dim();
    Ok(ball_volume(k)? * math::powi(r, k as i32))
}

/// Ratios `μ(S⊕r)/(b_{d−n}r^{d−n})` over a grid of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiRun {
    pub set: Grain,
    pub intensity: IntensityField,
    pub r_grid: Vec<f64>,
    pub mc_points: usize,
    pub ratios: Vec<Estimate>,
    /// `∫_S f dH^n` by line quadrature.
    pub target: f64,
}

impl MinkowskiRun {
    /// Estimates every ratio; radius `i` draws from `derive_stream(seed, i)`.
    pub fn execute<E: Executor + ?Sized>(
        exec: &E,
        set: Grain,
        intensity: IntensityField,
        r_grid: Vec<f64>,
        mc_points: usize,
        seed: u64,
    ) -> Result<Self> {
        for r in &r_grid {
            check_radius(*r)?;
        }
        if set.hausdorff_dim() >= set.dim() {
            return Err(Error::config("the set must be lower dimensional"));
        }
        let ratios = exec
            .map_indexed(r_grid.len(), |i| {
                let r = r_grid[i];
                let mut rng = derive_stream(seed, i as u64);
                let mu = sausage_integral(&set, &intensity, r, mc_points, &mut rng)?;
                let norm = normalizer(&set, r)?;
                Ok(Estimate {
                    value: mu.value / norm,
                    std_error: mu.std_error / norm,
                })
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Self::from_ratios(set, intensity, r_grid, mc_points, ratios)
    }

    /// A run from precomputed ratios.
    pub fn from_ratios(
        set: Grain,
        intensity: IntensityField,
        r_grid: Vec<f64>,
        mc_points: usize,
        ratios: Vec<Estimate>,
    ) -> Result<Self> {
        if ratios.len() != r_grid.len() {
            return Err(Error::config("one ratio per radius is required"));
        }
        for (r, e) in r_grid.iter().zip(&ratios) {
            check_radius(*r)?;
            if !e.value.is_finite() {
                return Err(Error::Numeric {
                    value: e.value,
                    point: Point::origin(set.dim()),
                });
            }
        }
        let target = set.integrate_along(|y| intensity.value(y), DEFAULT_ORDER)?;
        Ok(MinkowskiRun {
            set,
            intensity,
            r_grid,
            mc_points,
            ratios,
            target,
        })
    }
}

/// Extrapolated `r → 0` limit of the ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentLimit {
    pub limit: Estimate,
    pub target: f64,
    pub abs_error: f64,
    /// `|limit − target| ≤ 3·SE + 2%·|target|`.
    pub within_band: bool,
}

/// Line through the ratios at the two smallest radii, evaluated at `r = 0`.
pub fn content_limit(run: &MinkowskiRun) -> Result<ContentLimit> {
    if run.r_grid.len() < 3 {
        return Err(Error::config(format!(
            "content_limit needs at least 3 radii (got {})",
            run.r_grid.len()
        )));
    }
    let mut order: Vec<usize> = (0..run.r_grid.len()).collect();
    order.sort_by(|a, b| run.r_grid[*a].total_cmp(&run.r_grid[*b]));
    let (i1, i2) = (order[0], order[1]);
    let (r1, r2) = (run.r_grid[i1], run.r_grid[i2]);
    if r1 == r2 {
        return Err(Error::config("the two smallest radii coincide"));
    }
    let (g1, g2) = (run.ratios[i1], run.ratios[i2]);
    let span = r2 - r1;
    let value = (r2 * g1.value - r1 * g2.value) / span;
    let (a, b) = (r2 * g1.std_error, r1 * g2.std_error);
    let se = math::sqrt(a * a + b * b) / span;
    let abs_error = (value - run.target).abs();
    Ok(ContentLimit {
        limit: Estimate {
            value,
            std_error: se,
        },
        target: run.target,
        abs_error,
        within_band: abs_error <= 3.0 * se + 0.02 * run.target.abs(),
    })
}

/// `(H^n(Z̃_0)/γ)·2^n·4^d·b_d/b_{d−n}`: the uniform ratio bound for `f ≡ 1`
/// with `η` the normalized `H^n` on the enlarged set.
pub fn lemma_bound(set: &Grain, cert: &RegularityCertificate) -> Result<f64> {
    let d = set.dim();
    let n = set.hausdorff_dim();
    let mass = cert.extended_measure(set);
    Ok(mass / cert.gamma
        * math::powi(2.0, n as i32)
        * math::powi(4.0, d as i32)
        * ball_volume(d)?
        / ball_volume(d - n)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    pub bound: f64,
    /// `min_r (bound − ratio(r))`.
    pub worst_margin: f64,
}

/// Compares every ratio with [`lemma_bound`] scaled by `sup f` over `S⊕2`.
pub fn bound_check(run: &MinkowskiRun, cert: &RegularityCertificate) -> Result<BoundCheck> {
    let region = run.set.bounding_box().dilate(MAX_QUERY_RADIUS);
    let bound = lemma_bound(&run.set, cert)? * intensity_bound(&run.intensity, &region);
    let worst_margin = run
        .ratios
        .iter()
        .map(|e| bound - e.value)
        .fold(f64::INFINITY, f64::min);
    Ok(BoundCheck {
        holds: worst_margin > 0.0,
        bound,
        worst_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::grains::MarkDistribution;
    use alloc::vec;
    use core::f64::consts::PI;

    fn unit_x() -> Grain {
        Grain::segment(1.0, Point::xy(1.0, 0.0)).unwrap()
    }

    fn one() -> IntensityField {
        IntensityField::constant(1.0).unwrap()
    }

    #[test]
    fn stadium_area() {
        let mut rng = derive_stream(1, 0);
        let e = sausage_integral(&unit_x(), &one(), 0.1, 200_000, &mut rng).unwrap();
        assert!(e.within(0.2 + PI * 0.01, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn disc_area() {
        let mut rng = derive_stream(2, 0);
        let e = sausage_integral(&Grain::point(2).unwrap(), &one(), 0.5, 200_000, &mut rng).unwrap();
        assert!(e.within(PI * 0.25, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn radius_must_be_below_two() {
        let mut rng = derive_stream(3, 0);
        assert!(sausage_integral(&unit_x(), &one(), 2.0, 10, &mut rng).is_err());
        assert!(MinkowskiRun::execute(&Sequential, unit_x(), one(), vec![0.1, 2.5], 10, 1).is_err());
    }

    #[test]
    fn zero_intensity_has_zero_limit() {
        let run = MinkowskiRun::execute(
            &Sequential,
            unit_x(),
            IntensityField::constant(0.0).unwrap(),
            vec![0.2, 0.1, 0.05],
            1000,
            4,
        )
        .unwrap();
        assert!(run.ratios.iter().all(|e| e.value == 0.0));
        assert_eq!(content_limit(&run).unwrap().limit.value, 0.0);
    }

    #[test]
    fn exact_ratios_extrapolate_linearly() {
        let radii = vec![0.2, 0.1, 0.05];
        let ratios = radii.iter().map(|r| Estimate::exact(1.0 + PI * r / 2.0)).collect();
        let run = MinkowskiRun::from_ratios(unit_x(), one(), radii, 0, ratios).unwrap();
        let lim = content_limit(&run).unwrap();
        assert!((lim.limit.value - 1.0).abs() < 1e-12);
        assert!(lim.within_band);
        assert!((run.target - 1.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_radii() {
        let run = MinkowskiRun::from_ratios(unit_x(), one(), vec![0.1, 0.05], 0, vec![Estimate::exact(1.0); 2])
            .unwrap();
        assert!(matches!(content_limit(&run), Err(Error::Config(_))));
    }

    #[test]
    fn lemma_constants() {
        let seg = RegularityCertificate::for_marks(&MarkDistribution::deterministic(unit_x()));
        assert!((lemma_bound(&unit_x(), &seg).unwrap() - 16.0 * PI).abs() < 1e-12);
        let p = Grain::point(2).unwrap();
        let cert = RegularityCertificate::for_marks(&MarkDistribution::deterministic(p.clone()));
        assert!((lemma_bound(&p, &cert).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_fixture_violates_bound() {
        let radii = vec![0.2, 0.1, 0.05];
        let cert = RegularityCertificate::for_marks(&MarkDistribution::deterministic(unit_x()));
        let honest: Vec<Estimate> = radii.iter().map(|r| Estimate::exact(1.0 + PI * r / 2.0)).collect();
        let run = MinkowskiRun::from_ratios(unit_x(), one(), radii.clone(), 0, honest.clone()).unwrap();
        let ok = bound_check(&run, &cert).unwrap();
        assert!(ok.holds && ok.worst_margin > 0.0);
        let scaled = honest.iter().map(|e| Estimate::exact(e.value * 100.0)).collect();
        let run = MinkowskiRun::from_ratios(unit_x(), one(), radii, 0, scaled).unwrap();
        let bad = bound_check(&run, &cert).unwrap();
        assert!(!bad.holds && bad.worst_margin < 0.0);
    }
}
