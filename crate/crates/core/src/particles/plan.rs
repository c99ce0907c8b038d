//! Finite windows of lattice particles with controlled excluded mass.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numvar::SystemConfig;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::stable::{std_pdf, std_sf, StableLawAtTime};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// What happens to particles outside the retained window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Drop them; the window is widened until their expected count is below tolerance.
    Exclude,
    /// Replace their count by an independent Poisson variable with the same mean;
    /// the window is widened until the law error bound `mass · max q` is below tolerance.
    PoissonCompensated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub j_min: i64,
    pub j_max: i64,
    /// Spatial margin `M`: the window covers `[-M, L + M]`.
    pub margin: f64,
    pub tol_trunc: f64,
    /// Expected number of excluded particles inside `[0, L]`, averaged over the shift.
    pub boundary_mass: f64,
    /// Upper bound on any single excluded particle's hit probability.
    pub max_excluded_q: f64,
    pub rule: TailRule,
}

impl TruncationPlan {
    pub fn particles(&self) -> u64 {
        (self.j_max - self.j_min + 1) as u64
    }

    /// Total-variation error of the count law caused by the tail treatment.
    pub fn law_error_bound(&self) -> f64 {
        match self.rule {
            TailRule::Exclude => self.boundary_mass,
            TailRule::PoissonCompensated => self.boundary_mass * self.max_excluded_q,
        }
    }
}

/// `(1/a) ∫_lo^hi P(X > v) dv` for `0 <= lo < hi`.
fn tail_mass(law: &StableLawAtTime, a: f64, lo: f64, hi: f64) -> f64 {
    let s = law.sigma;
    let alpha = law.alpha();
    let (x0, x1) = (lo / s, hi / s);
    let mut points = vec![x0];
    let mut p = x0.max(1e-3);
    while p * 2.0 < x1 {
        p *= 2.0;
        if p > x0 {
            points.push(p);
        }
    }
    points.push(x1);
    let est = integrate_with_breaks(|x| std_sf(alpha, x), &points, Tolerance::new(1e-300, 1e-10));
    s * est.value / a
}

/// Excluded mass and largest excluded hit probability with `k` extra cells on each side.
pub(crate) fn excluded(law: &StableLawAtTime, config: &SystemConfig, l: f64, k: i64) -> (f64, f64) {
    if law.sigma == 0.0 {
        return (0.0, 0.0);
    }
    let a = config.a;
    let ell_cells = (l / a).ceil() as i64;
    let j_max = ell_cells + k;
    let right_lo = a * j_max as f64 - l;
    let right = tail_mass(law, a, right_lo, right_lo + l);
    let w = a * k as f64;
    let left = tail_mass(law, a, w, w + l);
    let d = w / law.sigma;
    let q = std_sf(law.alpha(), d).min(l / law.sigma * std_pdf(law.alpha(), d));
    (right + left, q.min(1.0))
}

/// Window for the `Exclude` rule with the default particle budget.
pub fn plan_truncation(config: &SystemConfig, l: f64, tol_trunc: f64) -> Result<TruncationPlan> {
    plan_truncation_with(config, l, tol_trunc, TailRule::Exclude, DEFAULT_BUDGET)
}

/// Smallest symmetric window (in whole cells) meeting `tol_trunc` under `rule`.
pub fn plan_truncation_with(
    config: &SystemConfig,
    l: f64,
    tol_trunc: f64,
    rule: TailRule,
    budget: u64,
) -> Result<TruncationPlan> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(invalid(format!("L must be nonnegative and finite, got {l}")));
    }
    if !(tol_trunc > 0.0) {
        return Err(invalid("truncation tolerance must be positive"));
    }
    let law = config.law()?;
    let ell_cells = (l / config.a).ceil() as i64;
    let crit = |k: i64| {
        let (m, q) = excluded(&law, config, l, k);
        match rule {
            TailRule::Exclude => m,
            TailRule::PoissonCompensated => m * q,
        }
    };
    let particles = |k: i64| (ell_cells + 2 * k) as u64;
    let make = |k: i64| {
        let (m, q) = excluded(&law, config, l, k);
        TruncationPlan {
            j_min: 1 - k,
            j_max: ell_cells + k,
            margin: config.a * k as f64,
            tol_trunc,
            boundary_mass: m,
            max_excluded_q: q,
            rule,
        }
    };
    if l == 0.0 || crit(0) <= tol_trunc {
        return Ok(make(0));
    }
    let over_budget = |k: i64| {
        let k_budget = ((budget.saturating_sub(ell_cells as u64)) / 2) as i64;
        Error::TruncationBudget {
            particles: particles(k),
            achievable: crit(k_budget),
        }
    };
    let mut lo = 0i64;
    let mut hi = 1i64;
    while crit(hi) > tol_trunc {
        lo = hi;
        hi *= 2;
        if particles(lo) > budget {
            return Err(over_budget(lo));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if crit(mid) <= tol_trunc {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if particles(hi) > budget {
        return Err(over_budget(hi));
    }
    Ok(make(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_example() {
        let c = SystemConfig::new(2.0, 0.5, 1.0, 1.0).unwrap();
        let p = plan_truncation(&c, 10.0, 1e-8).unwrap();
        assert!(p.boundary_mass < 1e-8);
        assert!(p.j_min <= 1 && p.j_max >= 10);
    }

    #[test]
    fn small_time_window_is_a_few_sigma() {
        let c = SystemConfig::new(2.0, 0.5, 1.0, 1e-2).unwrap();
        let sigma = c.law().unwrap().sigma;
        let p = plan_truncation(&c, 5.0, 1e-8).unwrap();
        assert!(p.margin <= 10.0 * sigma + 1.0, "margin {} sigma {sigma}", p.margin);
    }

    #[test]
    fn windows_are_nested() {
        let c = SystemConfig::new(1.5, 1.0, 1.0, 2.0).unwrap();
        let wide = plan_truncation(&c, 7.0, 1e-8).unwrap();
        let narrow = plan_truncation(&c, 7.0, 0.1).unwrap();
        assert!(wide.j_min <= narrow.j_min && wide.j_max >= narrow.j_max);
    }

    #[test]
    fn budget_is_enforced() {
        let c = SystemConfig::new(0.3, 1.0, 1.0, 1.0).unwrap();
        match plan_truncation(&c, 10.0, 1e-7) {
            Err(Error::TruncationBudget { particles, achievable }) => {
                assert!(particles > DEFAULT_BUDGET);
                assert!(achievable > 1e-7);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        let p = plan_truncation_with(&c, 10.0, 1e-7, TailRule::PoissonCompensated, DEFAULT_BUDGET).unwrap();
        assert!(p.law_error_bound() <= 1e-7);
    }

    #[test]
    fn excluded_mass_matches_direct_sum() {
        // Σ over excluded j of the shift-averaged hit probability.
        let c = SystemConfig::new(1.5, 1.0, 1.0, 1.0).unwrap();
        let law = c.law().unwrap();
        let l = 2.5;
        let k = 3;
        let (mass, _) = excluded(&law, &c, l, k);
        let (x, w) = crate::quad::gauss_legendre(64);
        let mut direct = 0.0;
        for j in (-5_000i64..=(1 - k - 1)).chain((3 + k + 1)..=5_000) {
            for (xi, wi) in x.iter().zip(&w) {
                let eps = 0.5 * (xi + 1.0);
                let u = j as f64 - eps;
                direct += 0.5 * wi * law.prob_interval(-u, l - u).unwrap();
            }
        }
        // Cells beyond |j| = 5000 carry about 3e-6.
        assert!((mass - direct).abs() < 5e-5, "{mass} vs {direct}");
    }
}
