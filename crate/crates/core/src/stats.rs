//! Compensated accumulation and small statistical helpers.

use core::ops::AddAssign;

use crate::math;

/// Kahan–Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Running first and second moments with compensated sums.
///
/// Moments are kept as raw power sums so that merging partial results is an
/// exact concatenation; the variance is formed once at the end.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    sum: NeumaierSum,
    sum_sq: NeumaierSum,
    shift: Option<f64>,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        // Shift by the first value to keep the power sums well conditioned.
        let shift = *self.shift.get_or_insert(x);
        let y = x - shift;
        self.count += 1;
        self.sum.add(y);
        self.sum_sq.add(y * y);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let Some(shift) = self.shift else {
            *self = *other;
            return;
        };
        let other_shift = other.shift.unwrap_or(shift);
        let delta = other_shift - shift;
        let n = other.count as f64;
        let s1 = other.sum.value();
        let s2 = other.sum_sq.value();
        // Σ(y + δ) and Σ(y + δ)^2 re-expressed around our shift.
        self.sum.add(s1 + n * delta);
        self.sum_sq.add(s2 + 2.0 * delta * s1 + n * delta * delta);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.shift.unwrap_or(0.0) + self.sum.value() / self.count as f64
    }

    /// Unbiased sample variance (`n − 1` denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let s1 = self.sum.value();
        let s2 = self.sum_sq.value();
        ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        math::sqrt(self.variance() / self.count as f64)
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// A Monte Carlo value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub const fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
        }
    }

    pub fn from_moments(m: &Moments) -> Self {
        Estimate {
            value: m.mean(),
            std_error: m.std_error(),
        }
    }

    /// `|self − target| ≤ k·se + abs_floor`.
    pub fn within(&self, target: f64, k: f64, abs_floor: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + abs_floor
    }
}

/// Ordinary least-squares line `y = intercept + slope·x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
