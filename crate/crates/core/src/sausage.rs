//! Monte Carlo integrals of an intensity over the closed `r`-neighbourhood
//! of a translated (optionally reflected) grain, `T = anchor ± Z_0`.
//!
//! Proposals are uniform on the bounding box of `T⊕r`; each sample is
//! `vol(box)·f(y)·1{dist(y, T) ≤ r}`.

use rand::Rng;

use crate::geometry::{Aabb, Point};
use crate::grains::Grain;
use crate::poisson::IntensityField;
use crate::stats::{Estimate, Moments};

/// Bounding box of `(anchor ± Z_0)⊕r`.
pub fn proposal_box(g: &Grain, anchor: &Point, reflected: bool, r: f64) -> Aabb {
    let bb = g.bounding_box();
    let bb = if reflected {
        Aabb::new(-bb.hi(), -bb.lo()).expect("negated box stays ordered")
    } else {
        bb
    };
    bb.translate(anchor).dilate(r)
}

/// One unbiased sample of `∫_{T⊕r} f`.
#[inline]
pub fn draw<R: Rng + ?Sized>(
    g: &Grain,
    anchor: &Point,
    reflected: bool,
    r: f64,
    f: &IntensityField,
    bx: &Aabb,
    rng: &mut R,
) -> f64 {
    let y = bx.sample_uniform(rng);
    let local = if reflected { *anchor - y } else { y - *anchor };
    if g.distance_unchecked(&local) <= r {
        bx.volume() * f.value(&y)
    } else {
        0.0
    }
}

/// Mean of `points` samples with its standard error.
pub fn integral<R: Rng + ?Sized>(
    g: &Grain,
    anchor: &Point,
    reflected: bool,
    r: f64,
    f: &IntensityField,
    points: usize,
    rng: &mut R,
) -> Estimate {
    let bx = proposal_box(g, anchor, reflected, r);
    let mut m = Moments::new();
    for _ in 0..points {
        m.push(draw(g, anchor, reflected, r, f, &bx, rng));
    }
    Estimate::from_moments(&m)
}
