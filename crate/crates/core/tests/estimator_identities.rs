use std::f64::consts::PI;

use meandense_core::estimate::{histogram_reduction, tally, Query, SimulationPlan};
use meandense_core::exec::Sequential;
use meandense_core::{
    derive_stream, Aabb, Grain, IntensityField, LengthLaw, MarkDistribution, OrientationLaw, Point, Scenario,
};
use rand::Rng;

fn stationary(c: f64) -> Scenario {
    let q = MarkDistribution::segment_law(2, LengthLaw::Fixed(1.0), OrientationLaw::Uniform).unwrap();
    Scenario::new(IntensityField::constant(c).unwrap(), q).unwrap()
}

#[test]
fn count_route_matches_poisson_mean() {
    let queries = [Query { x: Point::xy(0.0, 0.0), r: 0.1 }];
    let plan = SimulationPlan::covering(stationary(1.0), &queries).unwrap();
    let t = tally(&Sequential, &plan, &queries, 10_000, 3).unwrap();
    let (v, se) = plan.count_estimate(&t, &queries, 0);
    let oracle = (0.2 + PI * 0.01) / 0.2;
    assert!((v - oracle).abs() <= 3.0 * se, "{v} ± {se} vs {oracle}");
}

#[test]
fn contact_route_on_empty_model() {
    let x = Point::xy(0.0, 0.0);
    let radii = [0.02, 0.04, 0.06, 0.08];
    let queries: Vec<Query> = radii.iter().map(|r| Query { x, r: *r }).collect();
    let plan = SimulationPlan::covering(stationary(0.0), &queries).unwrap();
    let t = tally(&Sequential, &plan, &queries, 100, 4).unwrap();
    assert_eq!(plan.contact_derivative(&t, &queries, &[0, 1, 2, 3]).unwrap(), 0.0);
}

#[test]
fn histogram_of_uniform_samples() {
    let mut rng = derive_stream(5, 0);
    let n = 100_000usize;
    let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let r = (n as f64).powf(-1.0 / 3.0);
    let v = histogram_reduction(&samples, 0.5, r).unwrap();
    let p = v * 2.0 * r;
    let se = (p * (1.0 - p) / n as f64).sqrt() / (2.0 * r);
    assert!((v - 1.0).abs() <= 3.0 * se, "{v} ± {se}");
}

#[test]
fn zero_intensity_realizations_are_empty() {
    let plan = SimulationPlan::new(stationary(0.0), Aabb::cube(2, 0.0, 1.0).unwrap(), 0.5).unwrap();
    let real = plan.simulate(&mut derive_stream(6, 0)).unwrap();
    assert!(real.is_empty());
    let _ = Grain::point(2).unwrap();
}
