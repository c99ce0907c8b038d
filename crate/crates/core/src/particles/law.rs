//! Exact law of the count as a shift mixture of Poisson-binomial laws.

use serde::{Deserialize, Serialize};

use super::plan::{TailRule, TruncationPlan};
use crate::error::{Error, Result};
use crate::numvar::SystemConfig;
use crate::quad::gauss_legendre;
use crate::special::ln_gamma;
use crate::stable::StableLawAtTime;

pub const MAX_LAW_PARTICLES: u64 = 100_000;
pub const MAX_CUMULANT_PARTICLES: u64 = 2_000_000;
const PRUNE: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingLaw {
    pub j_min: i64,
    /// Shift-averaged hit probability of each retained particle.
    pub qs: Vec<f64>,
    /// `pmf[k] = P(N = k)`.
    pub pmf: Vec<f64>,
    /// Cumulants `c1..c4` of the count, shift randomness included.
    pub cumulants: [f64; 4],
    /// `E_ε Var(N | ε)`, the averaged conditional variance.
    pub conditional_variance: f64,
    pub boundary_mass: f64,
    pub quadrature_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingCumulants {
    pub cumulants: [f64; 4],
    pub conditional_variance: f64,
}

impl CountingCumulants {
    pub fn skew_ratio(&self) -> f64 {
        self.cumulants[2] / self.cumulants[1].powf(1.5)
    }
}

impl CountingLaw {
    pub fn skew_ratio(&self) -> f64 {
        self.cumulants[2] / self.cumulants[1].powf(1.5)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Nodes and weights on `[0, 1]` for averaging over the shift.
///
/// Hit probabilities change on the scale `σ/a` in `ε` and have kinks where
/// a cell boundary crosses an interval end, so the range is split there and
/// into composite panels when `σ ≪ a`.
fn shift_nodes(sigma: f64, a: f64, b: f64, l: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(64);
    let mut breaks = vec![0.0, 1.0];
    for end in [b / a, (b + l) / a] {
        let kink = end.ceil() - end;
        if kink > 1e-12 && kink < 1.0 - 1e-12 {
            breaks.push(kink);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let per_unit = ((a / (4.0 * sigma)).ceil() as usize).clamp(1, 256);
    let mut nodes = Vec::new();
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) * per_unit as f64).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / panels as f64;
        for p in 0..panels {
            let lo = seg[0] + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
            }
        }
    }
    nodes
}

/// Hit probabilities of `[b, b + L]` given the shift `eps`.
fn hit_probs(law: &StableLawAtTime, plan: &TruncationPlan, a: f64, b: f64, l: f64, eps: f64, out: &mut Vec<f64>) {
    out.clear();
    for j in plan.j_min..=plan.j_max {
        let u = a * (j as f64 - eps) - b;
        out.push(law.prob_interval(-u, l - u).unwrap_or(0.0));
    }
}

/// Poisson-binomial pmf by sequential convolution, pruning negligible tails.
/// Returns `(offset, probs)` with `probs[i] = P(N = offset + i)`.
pub fn poisson_binomial(qs: &[f64]) -> (usize, Vec<f64>) {
    let mut offset = 0usize;
    let mut pmf = vec![1.0];
    for &q in qs {
        if q <= 0.0 {
            continue;
        }
        if q >= 1.0 {
            offset += 1;
            continue;
        }
        let p = 1.0 - q;
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * p + pmf[k - 1] * q;
        }
        pmf[0] *= p;
        let lead = pmf.iter().take_while(|&&v| v < PRUNE).count();
        if lead > 0 && lead < pmf.len() {
            pmf.drain(..lead);
            offset += lead;
        }
        while pmf.len() > 1 && *pmf.last().unwrap() < PRUNE {
            pmf.pop();
        }
    }
    let total: f64 = pmf.iter().sum();
    if total > 0.0 {
        pmf.iter_mut().for_each(|v| *v /= total);
    }
    (offset, pmf)
}

pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

fn convolve_poisson(pmf: &[f64], lambda: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return pmf.to_vec();
    }
    let mut po = Vec::new();
    let mut k = 0;
    loop {
        let p = poisson_pmf(lambda, k);
        po.push(p);
        if (k as f64) > lambda && p < PRUNE {
            break;
        }
        k += 1;
    }
    let mut out = vec![0.0; pmf.len() + po.len() - 1];
    for (i, &a) in pmf.iter().enumerate() {
        for (j, &b) in po.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Per-node cumulants of a sum of independent indicators.
fn indicator_cumulants(qs: &[f64]) -> [f64; 4] {
    let mut k = [0.0; 4];
    for &q in qs {
        let v = q * (1.0 - q);
        k[0] += q;
        k[1] += v;
        k[2] += v * (1.0 - 2.0 * q);
        k[3] += v * (1.0 - 6.0 * v);
    }
    k
}

/// Cumulants of the shift mixture from per-node cumulants via central moments.
fn mixture_cumulants(nodes: &[(f64, [f64; 4])]) -> [f64; 4] {
    let mu: f64 = nodes.iter().map(|(w, k)| w * k[0]).sum();
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for (w, k) in nodes {
        let d = k[0] - mu;
        m2 += w * (k[1] + d * d);
        m3 += w * (k[2] + 3.0 * k[1] * d + d * d * d);
        m4 += w * (k[3] + 3.0 * k[1] * k[1] + 4.0 * k[2] * d + 6.0 * k[1] * d * d + d.powi(4));
    }
    [mu, m2, m3, m4 - 3.0 * m2 * m2]
}

fn check_window(plan: &TruncationPlan, limit: u64) -> Result<()> {
    if plan.particles() > limit {
        return Err(Error::WindowTooLarge(format!(
            "{} retained particles exceed the limit of {limit}",
            plan.particles()
        )));
    }
    Ok(())
}

fn compensation(plan: &TruncationPlan) -> f64 {
    match plan.rule {
        TailRule::PoissonCompensated => plan.boundary_mass,
        TailRule::Exclude => 0.0,
    }
}

fn require_spread(law: &StableLawAtTime) -> Result<()> {
    if law.sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateLaw("exact law needs t > 0".into()))
    }
}

/// Cumulants `c1..c4` of the count without forming the pmf.
pub fn exact_cumulants(config: &SystemConfig, l: f64, plan: &TruncationPlan) -> Result<CountingCumulants> {
    check_window(plan, MAX_CUMULANT_PARTICLES)?;
    let law = config.law()?;
    require_spread(&law)?;
    let mut qs = Vec::with_capacity(plan.particles() as usize);
    let mut per_node = Vec::new();
    for (eps, w) in shift_nodes(law.sigma, config.a, 0.0, l) {
        hit_probs(&law, plan, config.a, 0.0, l, eps, &mut qs);
        per_node.push((w, indicator_cumulants(&qs)));
    }
    let extra = compensation(plan);
    let mut c = mixture_cumulants(&per_node);
    c.iter_mut().for_each(|v| *v += extra);
    let cond: f64 = per_node.iter().map(|(w, k)| w * k[1]).sum::<f64>() + extra;
    Ok(CountingCumulants {
        cumulants: c,
        conditional_variance: cond,
    })
}

/// Exact law of `N_t[0, L]` for the retained window of `plan`.
pub fn exact_law(config: &SystemConfig, l: f64, plan: &TruncationPlan) -> Result<CountingLaw> {
    exact_law_shifted(config, 0.0, l, plan)
}

/// Exact law of the count in `[b, b + L]`; the window of `plan` is moved along
/// with the interval and widened by one cell.
pub fn exact_law_shifted(config: &SystemConfig, b: f64, l: f64, plan: &TruncationPlan) -> Result<CountingLaw> {
    check_window(plan, MAX_LAW_PARTICLES)?;
    let law = config.law()?;
    require_spread(&law)?;
    let a = config.a;
    let cells = (b / a).floor() as i64;
    let frac = b - a * cells as f64;
    let window = TruncationPlan {
        j_min: plan.j_min + cells,
        j_max: plan.j_max + cells + if frac > 0.0 { 1 } else { 0 },
        ..*plan
    };
    let mut qs = Vec::with_capacity(window.particles() as usize);
    let mut qbar = vec![0.0; window.particles() as usize];
    let mut per_node = Vec::new();
    let mut mix: Vec<f64> = Vec::new();
    for (eps, w) in shift_nodes(law.sigma, a, b, l) {
        hit_probs(&law, &window, a, b, l, eps, &mut qs);
        for (acc, q) in qbar.iter_mut().zip(&qs) {
            *acc += w * q;
        }
        per_node.push((w, indicator_cumulants(&qs)));
        let (off, pmf) = poisson_binomial(&qs);
        if mix.len() < off + pmf.len() {
            mix.resize(off + pmf.len(), 0.0);
        }
        for (i, p) in pmf.iter().enumerate() {
            mix[off + i] += w * p;
        }
    }
    // The widened window retains one more particle than `plan` accounts for;
    // its excluded mass is whatever the retained particles miss of `L/a`.
    let extra = if frac > 0.0 && plan.rule == TailRule::PoissonCompensated {
        (l / a - qbar.iter().sum::<f64>()).max(0.0)
    } else {
        compensation(plan)
    };
    let mut pmf = convolve_poisson(&mix, extra);
    while pmf.len() > 1 && *pmf.last().unwrap() < PRUNE {
        pmf.pop();
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|v| *v /= total);
    let mut c = mixture_cumulants(&per_node);
    c.iter_mut().for_each(|v| *v += extra);
    let cond: f64 = per_node.iter().map(|(w, k)| w * k[1]).sum::<f64>() + extra;
    Ok(CountingLaw {
        j_min: window.j_min,
        qs: qbar,
        pmf,
        cumulants: c,
        conditional_variance: cond,
        boundary_mass: if plan.rule == TailRule::PoissonCompensated { extra } else { plan.boundary_mass },
        quadrature_nodes: per_node.len(),
    })
}

/// Exact total variation distance between the count law and `Poisson(lambda)`.
pub fn tv_to_poisson(law: &CountingLaw, lambda: f64) -> f64 {
    let mut diff = 0.0;
    let mut covered = 0.0;
    for (k, &p) in law.pmf.iter().enumerate() {
        let po = poisson_pmf(lambda, k);
        covered += po;
        diff += (p - po).abs();
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::plan::plan_truncation;

    #[test]
    fn degenerate_indicators_give_point_mass() {
        let (off, pmf) = poisson_binomial(&[1.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!((off, pmf), (3, vec![1.0]));
    }

    #[test]
    fn convolution_matches_brute_force() {
        let qs = [0.1, 0.7, 0.35, 0.9];
        let (off, pmf) = poisson_binomial(&qs);
        let mut brute = [0.0; 5];
        for mask in 0..16u32 {
            let mut p = 1.0;
            for (i, q) in qs.iter().enumerate() {
                p *= if mask & (1 << i) != 0 { *q } else { 1.0 - q };
            }
            brute[mask.count_ones() as usize] += p;
        }
        for (k, b) in brute.iter().enumerate() {
            let v = if k >= off { pmf.get(k - off).copied().unwrap_or(0.0) } else { 0.0 };
            assert!((v - b).abs() < 1e-15);
        }
    }

    #[test]
    fn second_cumulant_is_number_variance_for_whole_cells() {
        let c = SystemConfig::new(2.0, 0.5, 1.0, 1.0).unwrap();
        let plan = plan_truncation(&c, 4.0, 1e-12).unwrap();
        let law = exact_law(&c, 4.0, &plan).unwrap();
        let v = crate::numvar::numvar_brownian_closed(1.0, 1.0, 4.0);
        assert!((law.cumulants[1] - v).abs() < 1e-9);
        assert!((law.cumulants[0] - 4.0).abs() < 1e-9);
        assert!((law.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let qsum: f64 = law.qs.iter().sum();
        assert!((qsum - 4.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_cumulants_of_identical_nodes_are_the_node_cumulants() {
        let k = indicator_cumulants(&[0.2, 0.5, 0.9]);
        let m = mixture_cumulants(&[(0.25, k), (0.75, k)]);
        for i in 0..4 {
            assert!((m[i] - k[i]).abs() < 1e-15);
        }
    }
}
