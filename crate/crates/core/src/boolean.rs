//! Boolean-model realizations `Θ = ⋃ (x_i + Z_0(s_i))` over an observation
//! window with a guard zone.
//!
//! Germs are simulated on `window ⊕ (L_max + r_max)`, so every grain that
//! can meet a ball `B_r(x) ⊆ window` with `r ≤ r_max` is present and
//! in-window queries carry no edge effect.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{clip_segment_box, Aabb, Point, MAX_DIM};
use crate::grains::{Grain, MarkDistribution};
use crate::math;
use crate::poisson::{sample_germs, IntensityField, Scenario};

/// Largest admissible query radius (exclusive).
pub const MAX_QUERY_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedGrain {
    pub germ: Point,
    pub grain: Grain,
}

/// Everything two realizations must share to be pooled by an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationShape {
    pub dim: usize,
    pub grain_dim: usize,
    pub window: Aabb,
    pub guard_margin: f64,
    pub r_max: f64,
}

impl RealizationShape {
    /// Same dimensions, window and `r_max`; guard margins may differ since
    /// each one already covers every admissible query.
    pub fn compatible(&self, other: &RealizationShape) -> bool {
        self.dim == other.dim
            && self.grain_dim == other.grain_dim
            && self.window == other.window
            && self.r_max == other.r_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BooleanRealization {
    placed: Vec<PlacedGrain>,
    shape: RealizationShape,
    index: GridIndex,
}

impl BooleanRealization {
    /// Simulates one realization observed on `window` for query radii up to `r_max`.
    pub fn simulate<R: Rng + ?Sized>(
        scenario: &Scenario,
        window: &Aabb,
        r_max: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let margin = scenario.marks.diameter_bound() + r_max;
        Self::simulate_with_margin(scenario, window, r_max, margin, rng)
    }

    /// As [`simulate`](Self::simulate) with an explicit guard margin, which
    /// must be at least `L_max + r_max`.
    pub fn simulate_with_margin<R: Rng + ?Sized>(
        scenario: &Scenario,
        window: &Aabb,
        r_max: f64,
        guard_margin: f64,
        rng: &mut R,
    ) -> Result<Self> {
        check_radius_cap(r_max)?;
        if window.dim() != scenario.dim() {
            return Err(Error::config("window and scenario differ in dimension"));
        }
        let needed = scenario.marks.diameter_bound() + r_max;
        if !(guard_margin >= needed) {
            return Err(Error::config(format!(
                "guard margin {guard_margin} is below L_max + r_max = {needed}"
            )));
        }
        let extended = window.dilate(guard_margin);
        let sample = sample_germs(&scenario.intensity, &scenario.marks, &extended, rng)?;
        let placed = sample
            .germs
            .into_iter()
            .map(|(germ, grain)| PlacedGrain { germ, grain })
            .collect();
        let shape = RealizationShape {
            dim: scenario.dim(),
            grain_dim: scenario.grain_dim(),
            window: *window,
            guard_margin,
            r_max,
        };
        Ok(Self::assemble(placed, shape))
    }

    /// Realization from explicit grains; the guard margin is set to the
    /// largest grain reach plus `r_max`.
    pub fn from_grains(
        dim: usize,
        grain_dim: usize,
        window: Aabb,
        r_max: f64,
        placed: Vec<PlacedGrain>,
    ) -> Result<Self> {
        check_radius_cap(r_max)?;
        if window.dim() != dim {
            return Err(Error::config("window dimension mismatch"));
        }
        for p in &placed {
            if p.germ.dim() != dim || p.grain.dim() != dim || p.grain.hausdorff_dim() != grain_dim {
                return Err(Error::config("placed grain does not match the realization dimensions"));
            }
        }
        let reach = placed.iter().map(|p| p.grain.reach()).fold(0.0, f64::max);
        let shape = RealizationShape {
            dim,
            grain_dim,
            window,
            guard_margin: reach + r_max,
            r_max,
        };
        Ok(Self::assemble(placed, shape))
    }

    fn assemble(placed: Vec<PlacedGrain>, shape: RealizationShape) -> Self {
        let index = GridIndex::build(&placed, &shape);
        BooleanRealization {
            placed,
            shape,
            index,
        }
    }

    pub fn placed_grains(&self) -> &[PlacedGrain] {
        &self.placed
    }

    pub fn len(&self) -> usize {
        self.placed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placed.is_empty()
    }

    pub fn shape(&self) -> &RealizationShape {
        &self.shape
    }

    pub fn observation_window(&self) -> &Aabb {
        &self.shape.window
    }

    pub fn guard_margin(&self) -> f64 {
        self.shape.guard_margin
    }

    fn check_query(&self, x: &Point, r: f64) -> Result<()> {
        if x.dim() != self.shape.dim {
            return Err(Error::config("query point dimension mismatch"));
        }
        if !(r >= 0.0) || r > self.shape.r_max {
            return Err(Error::query(format!(
                "query radius {r} outside [0, r_max = {}]",
                self.shape.r_max
            )));
        }
        if !self.shape.window.contains_ball(x, r) {
            return Err(Error::query(format!(
                "ball B_{r}({:?}) is not inside the observation window",
                x.coords()
            )));
        }
        Ok(())
    }

    /// `Θ ∩ B_r(x) ≠ ∅` (closed ball).
    pub fn hits(&self, x: &Point, r: f64) -> Result<bool> {
        self.check_query(x, r)?;
        let mut hit = false;
        self.index.for_each_candidate(x, r, |i| {
            let p = &self.placed[i as usize];
            if p.grain.distance_unchecked(&(*x - p.germ)) <= r {
                hit = true;
                return false;
            }
            true
        });
        Ok(hit)
    }

    /// Number of grains meeting `B_r(x)`.
    pub fn hit_count(&self, x: &Point, r: f64) -> Result<u32> {
        self.check_query(x, r)?;
        let mut count = 0;
        self.index.for_each_candidate(x, r, |i| {
            let p = &self.placed[i as usize];
            if p.grain.distance_unchecked(&(*x - p.germ)) <= r {
                count += 1;
            }
            true
        });
        Ok(count)
    }

    /// Brute-force [`hit_count`](Self::hit_count) over all grains.
    pub fn hit_count_scan(&self, x: &Point, r: f64) -> Result<u32> {
        self.check_query(x, r)?;
        Ok(self
            .placed
            .iter()
            .filter(|p| p.grain.distance_unchecked(&(*x - p.germ)) <= r)
            .count() as u32)
    }

    /// `H^n(Θ ∩ A)`: clipped lengths for curves, contained germs for points.
    /// Distinct grains overlap on an `H^n`-null set almost surely, so the
    /// per-grain measures are summed.
    pub fn measure_in_region(&self, region: &Aabb) -> Result<f64> {
        if region.dim() != self.shape.dim {
            return Err(Error::config("region dimension mismatch"));
        }
        if !self.shape.window.contains_box(region) {
            return Err(Error::query("region is not inside the observation window"));
        }
        let mut total = crate::stats::NeumaierSum::new();
        for p in &self.placed {
            match &p.grain {
                Grain::Point { .. } => {
                    if region.contains(&p.germ) {
                        total.add(1.0);
                    }
                }
                g => {
                    for s in g.pieces() {
                        if let Some(c) = clip_segment_box(&s.translate(&p.germ), region) {
                            total.add(c.length());
                        }
                    }
                }
            }
        }
        Ok(total.value())
    }
}

/// Free-function form of [`BooleanRealization::simulate`] taking `f` and `Q` separately.
pub fn simulate<R: Rng + ?Sized>(
    f: &IntensityField,
    q: &MarkDistribution,
    window: &Aabb,
    r_max: f64,
    rng: &mut R,
) -> Result<BooleanRealization> {
    let scenario = Scenario::new(f.clone(), q.clone())?;
    BooleanRealization::simulate(&scenario, window, r_max, rng)
}

fn check_radius_cap(r_max: f64) -> Result<()> {
    if !(0.0..MAX_QUERY_RADIUS).contains(&r_max) {
        return Err(Error::config(format!(
            "r_max must lie in [0, {MAX_QUERY_RADIUS}) (got {r_max})"
        )));
    }
    Ok(())
}

const MAX_CELLS_PER_AXIS: usize = 256;

/// Uniform grid over the germ domain; each grain is filed under the cell of
/// its germ. A grain meeting `B_r(x)` has its germ within `reach + r` of `x`.
#[derive(Debug, Clone, PartialEq)]
struct GridIndex {
    lo: [f64; MAX_DIM],
    cell: f64,
    counts: [usize; MAX_DIM],
    dim: usize,
    reach: f64,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    fn build(placed: &[PlacedGrain], shape: &RealizationShape) -> Self {
        let dim = shape.dim;
        let domain = shape.window.dilate(shape.guard_margin);
        let reach = placed.iter().map(|p| p.grain.reach()).fold(0.0, f64::max);
        let mut cell = reach + shape.r_max;
        let max_extent = (0..dim).map(|k| domain.extent(k)).fold(0.0, f64::max);
        cell = cell.max(max_extent / MAX_CELLS_PER_AXIS as f64);
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let mut counts = [1usize; MAX_DIM];
        let mut lo = [0.0; MAX_DIM];
        for k in 0..dim {
            lo[k] = domain.lo().get(k);
            counts[k] = (math::ceil(domain.extent(k) / cell) as usize).clamp(1, MAX_CELLS_PER_AXIS);
        }
        let mut index = GridIndex {
            lo,
            cell,
            counts,
            dim,
            reach,
            start: Vec::new(),
            items: Vec::new(),
        };
        let total: usize = counts.iter().product();
        let cells: Vec<usize> = placed.iter().map(|p| index.flat(&index.cell_of(&p.germ))).collect();
        let mut start = alloc::vec![0u32; total + 1];
        for &c in &cells {
            start[c + 1] += 1;
        }
        for c in 0..total {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut items = alloc::vec![0u32; placed.len()];
        for (i, &c) in cells.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        index.start = start;
        index.items = items;
        index
    }

    fn axis_cell(&self, k: usize, v: f64) -> usize {
        let c = math::floor((v - self.lo[k]) / self.cell);
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.counts[k] - 1)
        }
    }

    fn cell_of(&self, p: &Point) -> [usize; MAX_DIM] {
        let mut c = [0usize; MAX_DIM];
        for k in 0..self.dim {
            c[k] = self.axis_cell(k, p.get(k));
        }
        c
    }

    fn flat(&self, c: &[usize; MAX_DIM]) -> usize {
        (c[2] * self.counts[1] + c[1]) * self.counts[0] + c[0]
    }

    /// Calls `visit` with every grain whose germ may lie within
    /// `reach + r` of `x`; stops early when `visit` returns false.
    fn for_each_candidate<F: FnMut(u32) -> bool>(&self, x: &Point, r: f64, mut visit: F) {
        let q = self.reach + r;
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for k in 0..self.dim {
            lo[k] = self.axis_cell(k, x.get(k) - q);
            hi[k] = self.axis_cell(k, x.get(k) + q);
        }
        for c2 in lo[2]..=hi[2] {
            for c1 in lo[1]..=hi[1] {
                for c0 in lo[0]..=hi[0] {
                    let f = self.flat(&[c0, c1, c2]);
                    let (a, b) = (self.start[f] as usize, self.start[f + 1] as usize);
                    for &i in &self.items[a..b] {
                        if !visit(i) {
                            return;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grains::{LengthLaw, OrientationLaw};
    use crate::stats::Moments;
    use crate::stream::derive_stream;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn unit_segment_at_origin(window: Aabb, r_max: f64) -> BooleanRealization {
        BooleanRealization::from_grains(
            2,
            1,
            window,
            r_max,
            vec![PlacedGrain {
                germ: Point::xy(0.0, 0.0),
                grain: Grain::segment_at_angle(1.0, 0.0).unwrap(),
            }],
        )
        .unwrap()
    }

    fn stationary(c: f64) -> Scenario {
        Scenario::new(
            IntensityField::constant(c).unwrap(),
            MarkDistribution::segment_law(2, LengthLaw::fixed(1.0).unwrap(), OrientationLaw::Uniform)
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hit_examples() {
        let w = Aabb::cube(2, -1.0, 2.0).unwrap();
        let r = unit_segment_at_origin(w, 0.5);
        assert!(r.hits(&Point::xy(0.5, 0.05), 0.1).unwrap());
        assert!(!r.hits(&Point::xy(0.5, 0.5), 0.1).unwrap());
        // closed ball: distance exactly r counts
        assert!(r.hits(&Point::xy(0.5, 0.25), 0.25).unwrap());
        let empty = BooleanRealization::from_grains(2, 1, w, 0.5, vec![]).unwrap();
        assert!(!empty.hits(&Point::xy(0.5, 0.5), 0.1).unwrap());
        assert_eq!(empty.hit_count(&Point::xy(0.5, 0.5), 0.1).unwrap(), 0);
    }

    #[test]
    fn hit_count_two_grains() {
        let w = Aabb::cube(2, -1.0, 2.0).unwrap();
        let r = BooleanRealization::from_grains(
            2,
            1,
            w,
            0.5,
            vec![
                PlacedGrain {
                    germ: Point::xy(0.0, 0.0),
                    grain: Grain::segment_at_angle(1.0, 0.0).unwrap(),
                },
                PlacedGrain {
                    germ: Point::xy(0.0, 0.55),
                    grain: Grain::segment_at_angle(1.0, 0.0).unwrap(),
                },
            ],
        )
        .unwrap();
        assert_eq!(r.hit_count(&Point::xy(0.5, 0.05), 0.1).unwrap(), 1);
        assert_eq!(r.hit_count(&Point::xy(0.5, 0.3), 0.3).unwrap(), 2);
    }

    #[test]
    fn query_errors() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let r = unit_segment_at_origin(w, 0.2);
        assert!(matches!(r.hits(&Point::xy(0.5, 0.5), 0.3), Err(Error::Query(_))));
        assert!(matches!(r.hits(&Point::xy(0.05, 0.5), 0.1), Err(Error::Query(_))));
        assert!(matches!(
            r.measure_in_region(&Aabb::cube(2, -0.5, 0.5).unwrap()),
            Err(Error::Query(_))
        ));
        let s = stationary(1.0);
        assert!(BooleanRealization::simulate(&s, &w, 2.0, &mut derive_stream(0, 0)).is_err());
    }

    #[test]
    fn measure_examples() {
        let w = Aabb::cube(2, -1.0, 2.0).unwrap();
        let r = unit_segment_at_origin(w, 0.0);
        let a = Aabb::new(Point::xy(0.0, -1.0), Point::xy(0.5, 1.0)).unwrap();
        assert!((r.measure_in_region(&a).unwrap() - 0.5).abs() < 1e-15);
        let empty = BooleanRealization::from_grains(2, 1, w, 0.0, vec![]).unwrap();
        assert_eq!(empty.measure_in_region(&a).unwrap(), 0.0);
    }

    #[test]
    fn zero_intensity_realization_is_empty() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let r = BooleanRealization::simulate(&stationary(0.0), &w, 0.2, &mut derive_stream(1, 0)).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn grain_count_uses_extended_window() {
        // extended window [-1.2, 2.2]^2, mean 50 * 3.4^2
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let s = stationary(50.0);
        let m: Moments = (0..400)
            .map(|i| {
                BooleanRealization::simulate(&s, &w, 0.2, &mut derive_stream(2, i))
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let want = 50.0 * 3.4 * 3.4;
        assert!((m.mean() - want).abs() <= 3.0 * m.std_error(), "{} vs {want}", m.mean());
        let r = BooleanRealization::simulate(&s, &w, 0.2, &mut derive_stream(2, 0)).unwrap();
        let ext = w.dilate(1.2);
        assert!(r.placed_grains().iter().all(|p| ext.contains(&p.germ)));
    }

    #[test]
    fn simulation_is_deterministic() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let s = stationary(20.0);
        let a = BooleanRealization::simulate(&s, &w, 0.2, &mut derive_stream(3, 7)).unwrap();
        let b = BooleanRealization::simulate(&s, &w, 0.2, &mut derive_stream(3, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stationary_measure_mean() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let s = stationary(1.0);
        let m: Moments = (0..10_000)
            .map(|i| {
                BooleanRealization::simulate(&s, &w, 0.0, &mut derive_stream(4, i))
                    .unwrap()
                    .measure_in_region(&w)
                    .unwrap()
            })
            .collect();
        assert!((m.mean() - 1.0).abs() <= 3.0 * m.std_error(), "{}", m.mean());
    }

    #[test]
    fn point_grain_measure_counts_points() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let r = BooleanRealization::from_grains(
            2,
            0,
            w,
            0.0,
            vec![
                PlacedGrain { germ: Point::xy(0.2, 0.2), grain: Grain::point(2).unwrap() },
                PlacedGrain { germ: Point::xy(0.7, 0.2), grain: Grain::point(2).unwrap() },
            ],
        )
        .unwrap();
        let left = Aabb::new(Point::xy(0.0, 0.0), Point::xy(0.5, 1.0)).unwrap();
        assert_eq!(r.measure_in_region(&left).unwrap(), 1.0);
        assert_eq!(r.measure_in_region(&w).unwrap(), 2.0);
    }

    #[test]
    fn guard_zone_sufficiency_by_coupling() {
        let w = Aabb::cube(2, 0.0, 1.0).unwrap();
        let s = stationary(30.0);
        let r_max = 0.3;
        for rep in 0..20 {
            let big =
                BooleanRealization::simulate_with_margin(&s, &w, r_max, 3.0, &mut derive_stream(5, rep))
                    .unwrap();
            let needed = w.dilate(1.0 + r_max);
            let kept: Vec<PlacedGrain> = big
                .placed_grains()
                .iter()
                .filter(|p| needed.contains(&p.germ))
                .cloned()
                .collect();
            let small = BooleanRealization::from_grains(2, 1, w, r_max, kept).unwrap();
            let mut rng = derive_stream(6, rep);
            for _ in 0..200 {
                let r = rng.random::<f64>() * r_max;
                let inner = Aabb::new(w.lo(), w.hi()).unwrap();
                let x = Point::xy(
                    inner.lo().get(0) + r + rng.random::<f64>() * (1.0 - 2.0 * r),
                    inner.lo().get(1) + r + rng.random::<f64>() * (1.0 - 2.0 * r),
                );
                assert_eq!(big.hit_count(&x, r).unwrap(), small.hit_count(&x, r).unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_matches_brute_force(seed in 0u64..1_000_000, qx in 0.3..0.7f64, qy in 0.3..0.7f64, r in 0.0..0.3f64) {
            let w = Aabb::cube(2, 0.0, 1.0).unwrap();
            let s = Scenario::new(
                IntensityField::quadratic(),
                MarkDistribution::segment_law(2, LengthLaw::uniform(0.0, 1.5).unwrap(), OrientationLaw::Uniform).unwrap(),
            ).unwrap();
            let real = BooleanRealization::simulate(&s, &w, 0.3, &mut derive_stream(seed, 0)).unwrap();
            let x = Point::xy(qx, qy);
            prop_assert_eq!(real.hit_count(&x, r).unwrap(), real.hit_count_scan(&x, r).unwrap());
            prop_assert_eq!(real.hits(&x, r).unwrap(), real.hit_count(&x, r).unwrap() > 0);
        }

        #[test]
        fn hits_monotone_in_radius(seed in 0u64..1_000_000, r1 in 0.0..0.3f64, r2 in 0.0..0.3f64) {
            let w = Aabb::cube(2, 0.0, 1.0).unwrap();
            let real = BooleanRealization::simulate(&stationary(5.0), &w, 0.3, &mut derive_stream(seed, 1)).unwrap();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let x = Point::xy(0.5, 0.5);
            prop_assert!(real.hit_count(&x, lo).unwrap() <= real.hit_count(&x, hi).unwrap());
            if real.hits(&x, lo).unwrap() {
                prop_assert!(real.hits(&x, hi).unwrap());
            }
        }

        #[test]
        fn measure_additive_over_partition(seed in 0u64..1_000_000, cut in 0.05..0.95f64, cut2 in 0.05..0.95f64) {
            let w = Aabb::cube(2, 0.0, 1.0).unwrap();
            let real = BooleanRealization::simulate(&stationary(10.0), &w, 0.0, &mut derive_stream(seed, 2)).unwrap();
            let parts = [
                Aabb::new(Point::xy(0.0, 0.0), Point::xy(cut, cut2)).unwrap(),
                Aabb::new(Point::xy(cut, 0.0), Point::xy(1.0, cut2)).unwrap(),
                Aabb::new(Point::xy(0.0, cut2), Point::xy(cut, 1.0)).unwrap(),
                Aabb::new(Point::xy(cut, cut2), Point::xy(1.0, 1.0)).unwrap(),
            ];
            let whole = real.measure_in_region(&w).unwrap();
            let sum: f64 = parts.iter().map(|p| real.measure_in_region(p).unwrap()).sum();
            prop_assert!((whole - sum).abs() <= 1e-9 * whole.max(1.0));
        }
    }
}
