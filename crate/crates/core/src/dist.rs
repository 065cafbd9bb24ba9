//! Discretized probability distributions over elapsed time.
//!
//! Every distribution lives on a uniform grid of `step`-minute ticks: the
//! atom at grid index `k` sits at time `k * step` and carries the mass of the
//! underlying continuous density over the half-open cell
//! `[k*step - step/2, k*step + step/2)`. All distributions that interact in
//! one solve share the same step, which makes convolution an exact discrete
//! sum and first-order stochastic dominance an aligned CDF sweep.

use crate::error::{Error, Result};
use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

/// Tolerance on the sum-to-one invariant.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Cumulative tail mass that may be trimmed from each side after convolution.
const TRIM_TAIL_MASS: f64 = 1e-12;
/// Slack in CDF comparisons; absorbs trim/renormalization noise.
const DOMINANCE_TOL: f64 = 1e-12;
/// Truncated normals carry mass out to this many standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Largest grid index whose time is `<= x` (times strictly above `x` start at
/// the next index). The small epsilon keeps grid-aligned boundaries exact for
/// steps that are not binary fractions.
fn grid_cut(x: f64, step: f64) -> i64 {
    (x / step + 1e-9).floor() as i64
}

/// A nonnegative-time random variable as a probability mass function on a
/// uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    step: f64,
    first: i64,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// A normal law with the given mean and standard deviation, truncated at
    /// `±4σ` and discretized by integrating the density over each grid cell.
    /// With `std == 0` this degenerates to [`DiscreteDistribution::point_mass`].
    pub fn truncated_normal(mean: f64, std: f64, step: f64) -> Result<Self> {
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "truncated normal requires mean > 0, got {mean}"
            )));
        }
        if !std.is_finite() || std < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "truncated normal requires std >= 0, got {std}"
            )));
        }
        check_step(step)?;
        if std == 0.0 {
            return Self::point_mass_unchecked(mean, step);
        }

        let lo = mean - TRUNCATION_SIGMAS * std;
        let hi = mean + TRUNCATION_SIGMAS * std;
        // Index of the cell containing x: cells are [k - 1/2, k + 1/2) * step.
        let cell_of = |x: f64| (x / step + 0.5).floor() as i64;
        let k_lo = cell_of(lo);
        let k_hi = cell_of(hi);

        let mut weights = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        for k in k_lo..=k_hi {
            let cell_lo = ((k as f64) - 0.5) * step;
            let cell_hi = ((k as f64) + 0.5) * step;
            let a = cell_lo.max(lo);
            let b = cell_hi.min(hi);
            let mass = if b > a {
                std_normal_cdf((b - mean) / std) - std_normal_cdf((a - mean) / std)
            } else {
                0.0
            };
            weights.push(mass.max(0.0));
        }

        let mut dist = DiscreteDistribution {
            step,
            first: k_lo,
            weights,
        };
        dist.strip_zero_ends();
        if dist.weights.iter().sum::<f64>() <= 0.0 {
            // Degenerate window far narrower than one cell.
            return Self::point_mass_unchecked(mean, step);
        }
        dist.normalize();
        Ok(dist)
    }

    /// A unit atom at the grid point nearest `t`, ties snapping toward the
    /// lower grid point.
    pub fn point_mass(t: f64, step: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "point mass requires t >= 0, got {t}"
            )));
        }
        check_step(step)?;
        Self::point_mass_unchecked(t, step)
    }

    fn point_mass_unchecked(t: f64, step: f64) -> Result<Self> {
        // Round half toward the lower grid point.
        let k = (t / step - 0.5).ceil() as i64;
        Ok(DiscreteDistribution {
            step,
            first: k,
            weights: vec![1.0],
        })
    }

    /// Exact PMF of the sum of two independent variables on the same grid.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same_step(other)?;
        let n = self.weights.len();
        let m = other.weights.len();
        let mut weights = vec![0.0; n + m - 1];
        for (i, &wi) in self.weights.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            for (j, &wj) in other.weights.iter().enumerate() {
                weights[i + j] += wi * wj;
            }
        }
        let mut out = DiscreteDistribution {
            step: self.step,
            first: self.first + other.first,
            weights,
        };
        out.strip_zero_ends();
        out.trim_tails();
        out.normalize();
        Ok(out)
    }

    /// `P(X > d)`. A variable landing exactly on `d` does not count: an order
    /// completing exactly at its deadline is on time.
    pub fn prob_greater(&self, d: f64) -> f64 {
        let cut = grid_cut(d, self.step);
        let mut p = 0.0;
        // Sum from the upper tail so tiny tail atoms are not swamped.
        for (i, &w) in self.weights.iter().enumerate().rev() {
            if self.first + i as i64 > cut {
                p += w;
            } else {
                break;
            }
        }
        p.min(1.0)
    }

    /// First-order stochastic dominance: true iff this law's CDF is at least
    /// `other`'s at every grid point (self is stochastically smaller).
    pub fn dominates(&self, other: &Self) -> Result<bool> {
        self.check_same_step(other)?;
        let lo = self.first.min(other.first);
        let hi = self.last_index().max(other.last_index());
        let mut cdf_self = 0.0;
        let mut cdf_other = 0.0;
        for k in lo..=hi {
            cdf_self += self.weight_at(k);
            cdf_other += other.weight_at(k);
            if cdf_self < cdf_other - DOMINANCE_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w * (self.first + i as i64) as f64;
        }
        acc * self.step
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            let t = (self.first + i as i64) as f64 * self.step;
            acc += w * (t - mean) * (t - mean);
        }
        acc
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Time of the first grid point carrying mass.
    pub fn origin(&self) -> f64 {
        self.first as f64 * self.step
    }

    pub fn support_min(&self) -> f64 {
        self.origin()
    }

    pub fn support_max(&self) -> f64 {
        self.last_index() as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one atom
    }

    /// Iterate `(time, mass)` pairs in grid order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| ((self.first + i as i64) as f64 * self.step, w))
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn last_index(&self) -> i64 {
        self.first + self.weights.len() as i64 - 1
    }

    fn weight_at(&self, k: i64) -> f64 {
        if k < self.first || k > self.last_index() {
            0.0
        } else {
            self.weights[(k - self.first) as usize]
        }
    }

    fn check_same_step(&self, other: &Self) -> Result<()> {
        if self.step == other.step {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.step,
                right: other.step,
            })
        }
    }

    fn strip_zero_ends(&mut self) {
        let mut lo = 0;
        while lo + 1 < self.weights.len() && self.weights[lo] == 0.0 {
            lo += 1;
        }
        let mut hi = self.weights.len();
        while hi > lo + 1 && self.weights[hi - 1] == 0.0 {
            hi -= 1;
        }
        if lo > 0 || hi < self.weights.len() {
            self.weights = self.weights[lo..hi].to_vec();
            self.first += lo as i64;
        }
    }

    fn trim_tails(&mut self) {
        let mut lo = 0;
        let mut acc = 0.0;
        while lo + 1 < self.weights.len() && acc + self.weights[lo] < TRIM_TAIL_MASS {
            acc += self.weights[lo];
            lo += 1;
        }
        let mut hi = self.weights.len();
        acc = 0.0;
        while hi > lo + 1 && acc + self.weights[hi - 1] < TRIM_TAIL_MASS {
            acc += self.weights[hi - 1];
            hi -= 1;
        }
        if lo > 0 || hi < self.weights.len() {
            self.weights = self.weights[lo..hi].to_vec();
            self.first += lo as i64;
        }
    }

    fn normalize(&mut self) {
        let sum: f64 = self.weights.iter().sum();
        debug_assert!(sum > 0.0, "cannot normalize an all-zero mass function");
        for w in &mut self.weights {
            *w /= sum;
        }
    }

    /// Suffix sums over atom weights: `suffix[i] = sum(weights[i..])`, with a
    /// trailing zero. Used for O(1) tail lookups against a fixed law.
    pub(crate) fn suffix_sums(&self) -> Vec<f64> {
        let mut suffix = vec![0.0; self.weights.len() + 1];
        for i in (0..self.weights.len()).rev() {
            suffix[i] = suffix[i + 1] + self.weights[i];
        }
        suffix
    }
}

fn check_step(step: f64) -> Result<()> {
    if !step.is_finite() || step <= 0.0 {
        Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {step}"
        )))
    } else {
        Ok(())
    }
}

/// `P(F + G > d)` without materializing the convolution, given precomputed
/// suffix sums for `g`. Matches `f.convolve(g).prob_greater(d)` up to trim
/// noise, in O(|f| + |g|).
pub(crate) fn tail_of_sum(
    f: &DiscreteDistribution,
    g: &DiscreteDistribution,
    g_suffix: &[f64],
    d: f64,
) -> f64 {
    debug_assert_eq!(f.step, g.step);
    let cut = grid_cut(d, f.step);
    let mut total = 0.0;
    for (i, &wf) in f.weights.iter().enumerate() {
        let fi = f.first + i as i64;
        // First g index that puts the sum strictly past the cut.
        let j = cut - fi - g.first + 1;
        let p = if j <= 0 {
            1.0
        } else if j as usize >= g_suffix.len() {
            0.0
        } else {
            g_suffix[j as usize]
        };
        total += wf * p;
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tn(mean: f64, std: f64) -> DiscreteDistribution {
        DiscreteDistribution::truncated_normal(mean, std, 0.25).unwrap()
    }

    fn pm(t: f64) -> DiscreteDistribution {
        DiscreteDistribution::point_mass(t, 0.25).unwrap()
    }

    fn self_convolve(law: &DiscreteDistribution, n: u32) -> DiscreteDistribution {
        let mut acc = law.clone();
        for _ in 1..n {
            acc = acc.convolve(law).unwrap();
        }
        acc
    }

    #[test]
    fn truncated_normal_matches_construction_contract() {
        let law = tn(20.0, 2.0);
        assert_abs_diff_eq!(law.mean(), 20.0, epsilon = 1e-6);
        assert!(law.support_min() >= 12.0);
        assert!(law.support_max() <= 28.0);
        assert_abs_diff_eq!(law.total_mass(), 1.0, epsilon = NORMALIZATION_TOL);
    }

    #[test]
    fn zero_std_is_a_point_mass() {
        let law = DiscreteDistribution::truncated_normal(5.0, 0.0, 0.25).unwrap();
        assert_eq!(law.len(), 1);
        assert_abs_diff_eq!(law.mean(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn truncation_tail_is_negligible() {
        // Closed form: mass beyond mean + 4 sigma is 1 - Phi(4) ~ 3.17e-5
        // before truncation, and exactly zero after.
        let law = DiscreteDistribution::truncated_normal(2.9, 0.2, 0.05).unwrap();
        let closed_form = 1.0 - std_normal_cdf(4.0);
        assert!((law.prob_greater(3.7) - closed_form).abs() < 2e-3);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DiscreteDistribution::truncated_normal(0.0, 1.0, 0.25).is_err());
        assert!(DiscreteDistribution::truncated_normal(-3.0, 1.0, 0.25).is_err());
        assert!(DiscreteDistribution::truncated_normal(10.0, 1.0, 0.0).is_err());
        assert!(DiscreteDistribution::truncated_normal(10.0, -1.0, 0.25).is_err());
        assert!(DiscreteDistribution::point_mass(-1.0, 0.25).is_err());
    }

    #[test]
    fn point_mass_snaps_to_nearest_grid_point_ties_low() {
        assert_abs_diff_eq!(pm(0.0).mean(), 0.0, epsilon = 1e-12);
        assert_eq!(pm(470.0).prob_greater(480.0), 0.0);
        let snapped = pm(470.1);
        assert_eq!(snapped.len(), 1);
        assert_abs_diff_eq!(snapped.mean(), 470.0, epsilon = 1e-12);
        // Exact half-cell tie snaps down.
        assert_abs_diff_eq!(pm(470.125).mean(), 470.0, epsilon = 1e-12);
    }

    #[test]
    fn convolve_point_masses() {
        let sum = pm(5.0).convolve(&pm(10.0)).unwrap();
        assert_eq!(sum.len(), 1);
        assert_abs_diff_eq!(sum.mean(), 15.0, epsilon = 1e-12);
    }

    #[test]
    fn convolve_adds_means() {
        let f = tn(20.0, 2.0);
        let g = tn(30.0, 2.0);
        let sum = f.convolve(&g).unwrap();
        assert_abs_diff_eq!(sum.mean(), f.mean() + g.mean(), epsilon = 1e-6);
    }

    #[test]
    fn iid_sum_variance_rule() {
        // 11-fold sum of a unit law with sigma 2: mean 220, std sqrt(44).
        let total = self_convolve(&tn(20.0, 2.0), 11);
        assert_abs_diff_eq!(total.mean(), 220.0, epsilon = 220.0 * 0.01);
        assert_abs_diff_eq!(total.std_dev(), 44.0_f64.sqrt(), epsilon = 44.0_f64.sqrt() * 0.01);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let f = pm(5.0);
        let g = DiscreteDistribution::point_mass(5.0, 0.5).unwrap();
        assert!(matches!(f.convolve(&g), Err(Error::GridMismatch { .. })));
        assert!(matches!(f.dominates(&g), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn completing_exactly_at_the_deadline_is_on_time() {
        assert_eq!(pm(480.0).prob_greater(480.0), 0.0);
        assert!(pm(480.25).prob_greater(480.0) > 0.999);
    }

    #[test]
    fn worked_two_order_lateness_probabilities() {
        // Grid 0.1: a deadline landing exactly on an atom treats the whole
        // half-open cell as on time, which biases the tail low by up to half
        // an atom; 0.25 would leave the second value just outside ±0.005.
        let step = 0.1;
        let x_unit = DiscreteDistribution::truncated_normal(20.0, 2.0, step).unwrap();
        let y_unit = DiscreteDistribution::truncated_normal(30.0, 2.0, step).unwrap();
        let setup_y = DiscreteDistribution::point_mass(10.0, step).unwrap();
        let setup_x = DiscreteDistribution::point_mass(5.0, step).unwrap();

        // First sequence: 11 units of X, setup, 8 units of Y.
        let first = self_convolve(&x_unit, 11)
            .convolve(&setup_y)
            .unwrap()
            .convolve(&self_convolve(&y_unit, 8))
            .unwrap();
        assert!((first.prob_greater(480.0) - 0.125).abs() < 0.005);

        // Second sequence: setup 10, 8 units of Y, setup 5, 11 units of X.
        let second = setup_y
            .convolve(&self_convolve(&y_unit, 8))
            .unwrap()
            .convolve(&setup_x)
            .unwrap()
            .convolve(&self_convolve(&x_unit, 11))
            .unwrap();
        assert!((second.prob_greater(480.0) - 0.284).abs() < 0.005);
    }

    #[test]
    fn dominance_basics() {
        let f = tn(20.0, 2.0);
        assert!(f.dominates(&f).unwrap());
        assert!(pm(5.0).dominates(&pm(10.0)).unwrap());
        assert!(!pm(10.0).dominates(&pm(5.0)).unwrap());
    }

    #[test]
    fn crossing_cdfs_are_incomparable() {
        let wide = tn(20.0, 5.0);
        let narrow = tn(20.0, 1.0);
        assert!(!wide.dominates(&narrow).unwrap());
        assert!(!narrow.dominates(&wide).unwrap());
    }

    #[test]
    fn dominance_implies_tail_ordering() {
        let f = tn(20.0, 2.0);
        let g = f.convolve(&tn(5.0, 1.0)).unwrap();
        assert!(f.dominates(&g).unwrap());
        for d in [0.0, 18.0, 20.0, 22.5, 26.0, 40.0] {
            assert!(f.prob_greater(d) <= g.prob_greater(d) + 1e-12);
        }
    }

    #[test]
    fn mean_of_point_mass() {
        assert_abs_diff_eq!(pm(7.0).mean(), 7.0, epsilon = 1e-12);
        let symmetric = tn(30.0, 2.0);
        assert_abs_diff_eq!(symmetric.mean(), 30.0, epsilon = 1e-6);
    }

    #[test]
    fn tail_of_sum_matches_convolution() {
        let f = tn(20.0, 2.0);
        let g = tn(30.0, 3.0);
        let suffix = g.suffix_sums();
        let full = f.convolve(&g).unwrap();
        for d in [40.0, 48.0, 50.0, 52.5, 61.0] {
            let fast = tail_of_sum(&f, &g, &suffix, d);
            assert_abs_diff_eq!(fast, full.prob_greater(d), epsilon = 1e-9);
        }
    }
}
