//! Points, boxes, closed balls and segments in dimension 1, 2 or 3.
//!
//! All sets are closed: a distance exactly equal to a radius is inside.

use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;

pub const MAX_DIM: usize = 3;

/// A point (or vector) of `R^d`, `d ∈ {1, 2, 3}`.
///
/// Coordinates beyond `dim` are kept at zero so that norms and dot products
/// can run over the full backing array.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("point coordinates must be finite"));
        }
        let mut backing = [0.0; MAX_DIM];
        backing[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: backing,
            dim: coords.len() as u8,
        })
    }

    pub fn origin(dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Point {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    pub const fn x(u: f64) -> Self {
        Point {
            coords: [u, 0.0, 0.0],
            dim: 1,
        }
    }

    pub const fn xy(u: f64, v: f64) -> Self {
        Point {
            coords: [u, v, 0.0],
            dim: 2,
        }
    }

    pub const fn xyz(u: f64, v: f64, w: f64) -> Self {
        Point {
            coords: [u, v, w],
            dim: 3,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    /// Copy of `self` with one coordinate replaced.
    pub fn with(mut self, axis: usize, value: f64) -> Self {
        debug_assert!(axis < self.dim());
        self.coords[axis] = value;
        self
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Unit vector from polar angles: `α` in the plane (d = 2), polar angle
    /// `θ` from the last axis and azimuth `φ` (d = 3). For d = 1 the sign of
    /// `cos α` picks the direction.
    pub fn direction(dim: usize, alpha: f64, polar: f64) -> Result<Self> {
        check_dim(dim)?;
        let (s, c) = math::sin_cos(alpha);
        Ok(match dim {
            1 => Point::x(if c >= 0.0 { 1.0 } else { -1.0 }),
            2 => Point::xy(c, s),
            _ => {
                let (sp, cp) = math::sin_cos(polar);
                Point::xyz(sp * c, sp * s, cp)
            }
        })
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        Point {
            coords: [
                self.coords[0] + rhs.coords[0],
                self.coords[1] + rhs.coords[1],
                self.coords[2] + rhs.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        Point {
            coords: [
                self.coords[0] - rhs.coords[0],
                self.coords[1] - rhs.coords[1],
                self.coords[2] - rhs.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, k: f64) -> Point {
        Point {
            coords: [self.coords[0] * k, self.coords[1] * k, self.coords[2] * k],
            dim: self.dim,
        }
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self * -1.0
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::config(alloc::format!(
            "dimension must be 1, 2 or 3 (got {dim})"
        )))
    }
}

pub(crate) fn check_same_dim(a: &Point, b: &Point) -> Result<()> {
    if a.dim == b.dim {
        Ok(())
    } else {
        Err(Error::config(alloc::format!(
            "dimension mismatch: {} vs {}",
            a.dim,
            b.dim
        )))
    }
}

/// Closed axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        check_same_dim(&lo, &hi)?;
        for k in 0..lo.dim() {
            if !(lo.get(k) <= hi.get(k)) {
                return Err(Error::config(alloc::format!(
                    "box bounds inverted on axis {k}: {} > {}",
                    lo.get(k),
                    hi.get(k)
                )));
            }
        }
        Ok(Aabb { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut a = Point::origin(dim);
        let mut b = Point::origin(dim);
        for k in 0..dim {
            a.coords[k] = lo;
            b.coords[k] = hi;
        }
        Aabb::new(a, b)
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi.get(axis) - self.lo.get(axis)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.extent(k)).product()
    }

    pub fn center(&self) -> Point {
        (self.lo + self.hi) * 0.5
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim()).all(|k| self.lo.get(k) <= x.get(k) && x.get(k) <= self.hi.get(k))
    }

    /// True if the closed ball `B_r(x)` lies inside the box.
    pub fn contains_ball(&self, x: &Point, r: f64) -> bool {
        (0..self.dim()).all(|k| self.lo.get(k) <= x.get(k) - r && x.get(k) + r <= self.hi.get(k))
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// Box grown by `margin` on every side.
    pub fn dilate(&self, margin: f64) -> Aabb {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for k in 0..self.dim() {
            lo.coords[k] -= margin;
            hi.coords[k] += margin;
        }
        Aabb { lo, hi }
    }

    pub fn translate(&self, v: &Point) -> Aabb {
        Aabb {
            lo: self.lo + *v,
            hi: self.hi + *v,
        }
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..self.dim())
            .all(|k| self.lo.get(k) <= other.hi.get(k) && other.lo.get(k) <= self.hi.get(k))
    }

    /// The `2^d` corners.
    pub fn corners(&self) -> impl Iterator<Item = Point> + '_ {
        let d = self.dim();
        (0..1usize << d).map(move |mask| {
            let mut p = self.lo;
            for k in 0..d {
                if mask & (1 << k) != 0 {
                    p.coords[k] = self.hi.get(k);
                }
            }
            p
        })
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for k in 0..self.dim() {
            lo.coords[k] = lo.coords[k].min(other.lo.get(k));
            hi.coords[k] = hi.coords[k].max(other.hi.get(k));
        }
        Aabb { lo, hi }
    }

    pub fn from_point(p: Point) -> Aabb {
        Aabb { lo: p, hi: p }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut p = self.lo;
        for k in 0..self.dim() {
            p.coords[k] += rng.random::<f64>() * self.extent(k);
        }
        p
    }
}

/// Closed ball `{y : |y − center| ≤ radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::config("ball radius must be finite and nonnegative"));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.center.distance(x) <= self.radius
    }
}

/// Closed segment `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentShape {
    pub a: Point,
    pub b: Point,
}

impl SegmentShape {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        check_same_dim(&a, &b)?;
        Ok(SegmentShape { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    pub fn translate(&self, v: &Point) -> SegmentShape {
        SegmentShape {
            a: self.a + *v,
            b: self.b + *v,
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_point(self.a).union(&Aabb::from_point(self.b))
    }

    /// Distance without the dimension check, for hot loops.
    #[inline]
    pub(crate) fn distance_unchecked(&self, x: &Point) -> f64 {
        let d = self.b - self.a;
        let len_sq = d.norm_sq();
        if len_sq == 0.0 {
            return x.distance(&self.a);
        }
        let t = ((*x - self.a).dot(&d) / len_sq).clamp(0.0, 1.0);
        x.distance(&(self.a + d * t))
    }

    /// `H^1` measure of the segment inside the closed ball `B_r(c)`.
    pub fn length_in_ball(&self, c: &Point, r: f64) -> f64 {
        let d = self.b - self.a;
        let qa = d.norm_sq();
        if qa == 0.0 {
            return 0.0;
        }
        let w = self.a - *c;
        let qb = 2.0 * d.dot(&w);
        let qc = w.norm_sq() - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            return 0.0;
        }
        let sq = math::sqrt(disc);
        let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
        let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
        if t1 <= t0 {
            0.0
        } else {
            (t1 - t0) * math::sqrt(qa)
        }
    }
}

/// Euclidean distance from `x` to the closed segment `s`.
pub fn dist_point_segment(x: &Point, s: &SegmentShape) -> Result<f64> {
    check_same_dim(x, &s.a)?;
    Ok(s.distance_unchecked(x))
}

/// The part of `s` inside the closed box, or `None` when they are disjoint.
/// The result may be degenerate when `s` only touches the box.
pub fn clip_segment_box(s: &SegmentShape, bx: &Aabb) -> Option<SegmentShape> {
    if s.a.dim() != bx.dim() {
        return None;
    }
    let d = s.b - s.a;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for k in 0..bx.dim() {
        let (lo, hi) = (bx.lo.get(k), bx.hi.get(k));
        let p = d.get(k);
        let a = s.a.get(k);
        if p == 0.0 {
            if a < lo || a > hi {
                return None;
            }
            continue;
        }
        let (mut u, mut v) = ((lo - a) / p, (hi - a) / p);
        if u > v {
            core::mem::swap(&mut u, &mut v);
        }
        t0 = t0.max(u);
        t1 = t1.min(v);
        if t0 > t1 {
            return None;
        }
    }
    let clamp = |mut p: Point| {
        for k in 0..bx.dim() {
            p.coords[k] = p.coords[k].clamp(bx.lo.get(k), bx.hi.get(k));
        }
        p
    };
    let a = if t0 == 0.0 { s.a } else { clamp(s.point_at(t0)) };
    let b = if t1 == 1.0 { s.b } else { clamp(s.point_at(t1)) };
    Some(SegmentShape { a, b })
}

/// Volume `b_k` of the unit ball in `R^k`.
pub fn ball_volume(k: usize) -> Result<f64> {
    match k {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::config(alloc::format!(
            "unit-ball volume only supported for k in 1..=3 (got {k})"
        ))),
    }
}
