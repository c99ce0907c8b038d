//! The acceptance suite: one pass/fail record per criterion, serializable as a
//! deterministic JSON report. Timings go to stderr only.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gp::{
    cov_g, fbm_limit_check, increment_cov, longmem_slope, markov_violation_witness, ols, scaling_check, FTable, F_TOL,
};
use crate::numvar::{
    f_limit_variance, numvar, numvar_brownian_closed, numvar_cauchy_closed, poisson_tv_bounds, saturation_level,
    saturation_level_integral, SystemConfig,
};
use crate::particles::{
    clt_diagnostic, empirical_numvar, exact_cumulants, exact_law, plan_truncation_with, simulate_counts,
    simulate_poisson_initial, tv_to_poisson, TailRule, TruncationPlan, DEFAULT_BUDGET,
};
use crate::particles::stats::{bootstrap_variance_ci, mean_ci, BOOTSTRAP_RESAMPLES};
use crate::stable::{tail_constant, StableParams};
use crate::VERSION;

const V_TOL: f64 = 1e-10;
/// Asymptotic 1% critical value of the Kolmogorov distribution.
const KS_CRIT_1PCT: f64 = 1.627_624;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptOptions {
    pub seed: u64,
    /// Multiplies every numerical tolerance; values below 1 tighten the suite.
    pub tolerance_scale: f64,
    /// Number of seeds for the Monte Carlo coverage criterion.
    pub mc_seeds: usize,
}

impl Default for AcceptOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            tolerance_scale: 1.0,
            mc_seeds: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub version: String,
    pub seed: u64,
    pub tolerance_scale: String,
    pub mc_seeds: usize,
    pub criteria: Vec<Criterion>,
    pub all_pass: bool,
}

impl AcceptanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Builder {
    id: u32,
    name: &'static str,
    metrics: BTreeMap<String, f64>,
}

impl Builder {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            metrics: BTreeMap::new(),
        }
    }

    fn m(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    fn done(self, pass: bool, summary: String) -> Criterion {
        Criterion {
            id: self.id,
            name: self.name.into(),
            pass,
            summary,
            metrics: self.metrics,
        }
    }
}

fn cfg(alpha: f64, c: f64, t: f64) -> Result<SystemConfig> {
    SystemConfig::new(alpha, c, 1.0, t)
}

/// `c = 1/2` for the Gaussian case so that it matches the Brownian closed form.
fn c_for(alpha: f64) -> f64 {
    if alpha == 2.0 {
        0.5
    } else {
        1.0
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn timed<F: FnOnce() -> Result<Criterion>>(id: u32, name: &'static str, f: F) -> (Criterion, Duration) {
    let start = Instant::now();
    let c = f().unwrap_or_else(|e| Builder::new(id, name).done(false, format!("error: {e}")));
    let elapsed = start.elapsed();
    eprintln!("criterion {id:>2} ({name}): {:.2} s", elapsed.as_secs_f64());
    (c, elapsed)
}

fn c1(o: &AcceptOptions) -> Result<Criterion> {
    let start = Instant::now();
    let mut b = Builder::new(1, "closed-form agreement");
    let ls: Vec<f64> = (1..=500).map(|k| 0.1 * k as f64).collect();
    let brown = cfg(2.0, 0.5, 1.0)?;
    let cauchy = cfg(1.0, 1.0, 1.0)?;
    let (mut eb, mut ec) = (0.0f64, 0.0f64);
    for &l in &ls {
        eb = eb.max((numvar(&brown, l, V_TOL)?.value - numvar_brownian_closed(1.0, 1.0, l)).abs());
        ec = ec.max((numvar(&cauchy, l, V_TOL)?.value - numvar_cauchy_closed(1.0, 1.0, l)).abs());
    }
    let tol = 1e-8 * o.tolerance_scale;
    let fast = start.elapsed() < Duration::from_secs(10);
    b.m("max_err_brownian", eb);
    b.m("max_err_cauchy", ec);
    let pass = eb < tol && ec < tol && fast;
    Ok(b.done(
        pass,
        format!("max error {:.2e} (Brownian), {:.2e} (Cauchy) over L in 0.1..50; under 10 s: {fast}", eb, ec),
    ))
}

fn c2(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(2, "saturation");
    let l = 1e3;
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.2, 1.5, 2.0] {
        let config = cfg(alpha, c_for(alpha), 1.0)?;
        let sat = saturation_level(&config)?;
        let gap = numvar(&config, l, V_TOL)?.value - sat;
        let integral_gap = (saturation_level_integral(&config)? - sat).abs();
        let tol = if alpha == 2.0 { 1e-8 } else { 1e-3 } * o.tolerance_scale;
        // Leading algebraic correction -k_α (2ct/a) L^{1-α} / (α - 1); zero for α = 2.
        let predicted = if alpha == 2.0 {
            0.0
        } else {
            -tail_constant(alpha) * 2.0 * config.c() * l.powf(1.0 - alpha) / (alpha - 1.0)
        };
        b.m(format!("gap_alpha_{alpha}"), gap);
        b.m(format!("predicted_gap_alpha_{alpha}"), predicted);
        b.m(format!("integral_gap_alpha_{alpha}"), integral_gap);
        let ok = gap.abs() < tol && integral_gap < 1e-6 * o.tolerance_scale;
        pass &= ok;
        parts.push(format!("α={alpha}: V(1e3)-sat={gap:.3e} (tol {tol:.0e}, {})", if ok { "ok" } else { "FAIL" }));
    }
    Ok(b.done(pass, parts.join("; ")))
}

fn c3(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(3, "divergence regimes");
    let ls = log_grid(1e2, 1e4, 21);
    let half = cfg(0.5, 1.0, 1.0)?;
    let logs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let v_half = ls
        .iter()
        .map(|&l| numvar(&half, l, V_TOL).map(|v| v.value.ln()))
        .collect::<Result<Vec<_>>>()?;
    let (slope_half, _) = ols(&logs, &v_half);
    let cauchy = cfg(1.0, 1.0, 1.0)?;
    let v_one = ls
        .iter()
        .map(|&l| numvar(&cauchy, l, V_TOL).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let (slope_one, _) = ols(&logs, &v_one);
    let target_one = 4.0 * cauchy.c() * cauchy.t / (cauchy.a * std::f64::consts::PI);
    b.m("loglog_slope_alpha_0.5", slope_half);
    b.m("log_slope_alpha_1", slope_one);
    b.m("log_slope_target_alpha_1", target_one);
    let ok_half = (slope_half - 0.5).abs() < 0.02 * o.tolerance_scale;
    let ok_one = ((slope_one - target_one) / target_one).abs() < 0.02 * o.tolerance_scale;
    Ok(b.done(
        ok_half && ok_one,
        format!(
            "α=0.5 log-log slope {slope_half:.4} (target 0.5 ± 0.02, {}); α=1 slope vs log L {slope_one:.5} (target {target_one:.5} ± 2%, {})",
            if ok_half { "ok" } else { "FAIL" },
            if ok_one { "ok" } else { "FAIL" }
        ),
    ))
}

/// `(α, c, t, L)` with integer `L/a`, so the count variance equals `V`.
pub const MC_CONFIGS: [(f64, f64, f64, f64); 9] = [
    (0.5, 1.0, 0.5, 2.0),
    (0.5, 1.0, 1.0, 1.0),
    (1.0, 1.0, 0.5, 1.0),
    (1.0, 1.0, 1.0, 5.0),
    (1.5, 1.0, 1.0, 3.0),
    (1.5, 1.0, 2.0, 10.0),
    (2.0, 0.5, 0.5, 1.0),
    (2.0, 0.5, 1.0, 5.0),
    (2.0, 0.5, 2.0, 50.0),
];
pub const MC_REPLICATIONS: usize = 100_000;

fn c4(o: &AcceptOptions) -> Result<Criterion> {
    let start = Instant::now();
    let mut b = Builder::new(4, "Monte Carlo consistency");
    let prepared = MC_CONFIGS
        .iter()
        .map(|&(alpha, c, t, l)| {
            let config = cfg(alpha, c, t)?;
            let plan = plan_truncation_with(&config, l, 1e-6, TailRule::PoissonCompensated, DEFAULT_BUDGET)?;
            Ok((config, l, plan, numvar(&config, l, V_TOL)?.value))
        })
        .collect::<Result<Vec<(SystemConfig, f64, TruncationPlan, f64)>>>()?;
    let mut seeds_ok = 0usize;
    let mut hits_total = 0usize;
    let mut per_seed = Vec::new();
    let mut per_config = [0usize; 9];
    for k in 0..o.mc_seeds {
        let seed = o.seed.wrapping_add(k as u64);
        let mut hits = 0;
        for (i, (config, l, plan, v)) in prepared.iter().enumerate() {
            let sample = simulate_counts(config, *l, plan, MC_REPLICATIONS, seed)?;
            let e = empirical_numvar(&sample)?;
            if e.ci.0 <= *v && *v <= e.ci.1 {
                hits += 1;
                per_config[i] += 1;
            }
        }
        hits_total += hits;
        if hits >= 8 {
            seeds_ok += 1;
        }
        per_seed.push(hits.to_string());
    }
    let needed = (0.95 * o.mc_seeds as f64).ceil() as usize;
    let fast = start.elapsed() < Duration::from_secs(300);
    b.m("seeds_with_8_of_9", seeds_ok as f64);
    b.m("seeds", o.mc_seeds as f64);
    b.m("coverage", hits_total as f64 / (9 * o.mc_seeds) as f64);
    for (i, &(alpha, _, t, l)) in MC_CONFIGS.iter().enumerate() {
        b.m(format!("hits_alpha_{alpha}_t_{t}_L_{l}"), per_config[i] as f64);
    }
    Ok(b.done(
        seeds_ok >= needed && fast,
        format!(
            "CI hits per seed (of 9): [{}]; {seeds_ok}/{} seeds reach 8/9 (need {needed}); under 5 min: {fast}",
            per_seed.join(","),
            o.mc_seeds
        ),
    ))
}

fn c5(_: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(5, "Poisson sandwich");
    let mut inside = 0;
    let mut total = 0;
    let mut worst = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        for l in [1.0, 3.0, 10.0] {
            let config = cfg(alpha, c_for(alpha), 1.0)?;
            let plan = plan_truncation_with(&config, l, 1e-8, TailRule::PoissonCompensated, DEFAULT_BUDGET)?;
            let law = exact_law(&config, l, &plan)?;
            let tv = tv_to_poisson(&law, l / config.a);
            let (lo, hi) = poisson_tv_bounds(l / config.a, law.conditional_variance)?;
            total += 1;
            if lo <= tv && tv <= hi {
                inside += 1;
            } else {
                worst.push(format!("α={alpha},L={l}: {tv:.4} not in [{lo:.4},{hi:.4}]"));
            }
            b.m(format!("tv_alpha_{alpha}_L_{l}"), tv);
        }
    }
    let summary = if worst.is_empty() {
        format!("{inside}/{total} configs inside the bounds")
    } else {
        format!("{inside}/{total} inside; {}", worst.join("; "))
    };
    Ok(b.done(inside == total, summary))
}

/// Two-sided normal quantile for a familywise 95% level over the 8 intervals of criterion 6.
const Z_BONFERRONI_8: f64 = 2.734_368_786_533_176;

fn c6(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(6, "Poisson invariance");
    let (theta, l) = (1.0, 10.0);
    let level = 1.0 - 0.05 / 8.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 1.5] {
        for t in [1.0, 5.0] {
            let law = StableParams::new(alpha, 1.0)?.at(t)?;
            let s = simulate_poisson_initial(theta, &law, l, MC_REPLICATIONS, o.seed, 0.5)?;
            let (mean, mlo, mhi) = mean_ci(&s.counts, Z_BONFERRONI_8);
            let (vlo, vhi) = bootstrap_variance_ci(&s.counts, BOOTSTRAP_RESAMPLES, level, s.seed);
            let target = theta * l;
            let ok = mlo <= target && target <= mhi && vlo <= target && target <= vhi;
            pass &= ok;
            b.m(format!("mean_alpha_{alpha}_t_{t}"), mean);
            b.m(format!("var_ci_lo_alpha_{alpha}_t_{t}"), vlo);
            b.m(format!("var_ci_hi_alpha_{alpha}_t_{t}"), vhi);
            parts.push(format!("α={alpha},t={t}: {}", if ok { "ok" } else { "FAIL" }));
        }
    }
    Ok(b.done(
        pass,
        format!("mean and variance CIs (familywise 95%) contain θL=10: {}", parts.join(", ")),
    ))
}

fn c7(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(7, "CLT");
    let mut pass = true;
    let mut parts = Vec::new();
    let replications = 10_000;
    let crit = KS_CRIT_1PCT / (replications as f64).sqrt() * o.tolerance_scale;
    for alpha in [0.5, 1.0] {
        let config = cfg(alpha, 1.0, 1.0)?;
        let skew = |l: f64| -> Result<f64> {
            let plan = plan_truncation_with(&config, l, 1e-4, TailRule::PoissonCompensated, DEFAULT_BUDGET)?;
            Ok(exact_cumulants(&config, l, &plan)?.skew_ratio())
        };
        let (s10, s1000) = (skew(10.0)?, skew(1e3)?);
        let plan = plan_truncation_with(&config, 1e3, 1e-6, TailRule::PoissonCompensated, DEFAULT_BUDGET)?;
        let sample = simulate_counts(&config, 1e3, &plan, replications, o.seed)?;
        let v = numvar(&config, 1e3, V_TOL)?.value;
        let ks = clt_diagnostic(&sample, v, None)?.ks;
        let ok = s10 >= 5.0 * s1000 && ks.stat < crit;
        pass &= ok;
        b.m(format!("skew_ratio_alpha_{alpha}_L_10"), s10);
        b.m(format!("skew_ratio_alpha_{alpha}_L_1000"), s1000);
        b.m(format!("ks_alpha_{alpha}"), ks.stat);
        parts.push(format!(
            "α={alpha}: skew ratio drops {:.1}x, KS {:.4} vs {:.4}",
            s10 / s1000,
            ks.stat,
            crit
        ));
    }
    Ok(b.done(pass, parts.join("; ")))
}

fn c8(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(8, "limit-process structure");
    let grid: Vec<f64> = (1..=500).map(|k| 0.02 * k as f64).collect();
    let sr = log_grid(0.1, 10.0, 10);
    let us = [0.0, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];
    let fs = log_grid(0.01, 100.0, 40);
    let mut failures = Vec::new();
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let config = cfg(alpha, c_for(alpha), 1.0)?;
        match cov_g(&config, &grid) {
            Ok(cov) => b.m(format!("jitter_alpha_{alpha}"), cov.jitter),
            Err(e) => failures.push(format!("α={alpha} PSD: {e}")),
        }
        let mut max_inc = f64::NEG_INFINITY;
        for &s in &sr {
            for &r in &sr {
                for &u in &us {
                    max_inc = max_inc.max(increment_cov(&config, s, r, u)?);
                }
            }
        }
        b.m(format!("max_increment_cov_alpha_{alpha}"), max_inc);
        if max_inc > 0.0 {
            failures.push(format!("α={alpha}: increment covariance {max_inc:.2e} > 0"));
        }
        let mut table = FTable::new(&config);
        table.fill(&fs)?;
        let f = fs.iter().map(|&s| table.get(s)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = f64::NEG_INFINITY;
        for k in 1..fs.len() - 1 {
            let left = (f[k] - f[k - 1]) / (fs[k] - fs[k - 1]);
            let right = (f[k + 1] - f[k]) / (fs[k + 1] - fs[k]);
            worst = worst.max((right - left) / (1.0 + left.abs()));
        }
        b.m(format!("max_second_difference_alpha_{alpha}"), worst);
        if worst > 1e-8 * o.tolerance_scale {
            failures.push(format!("α={alpha}: concavity defect {worst:.2e}"));
        }
        match markov_violation_witness(&config) {
            Ok(w) => b.m(format!("witness_gap_alpha_{alpha}"), w.gap),
            Err(e) => failures.push(format!("α={alpha} witness: {e}")),
        }
        for scale in [2.0, 10.0] {
            let gap = scaling_check(&config, scale, &[1.0, 2.0, 3.0])?;
            b.m(format!("scaling_gap_alpha_{alpha}_b_{scale}"), gap);
            if !(gap < 1e-8 * o.tolerance_scale) {
                failures.push(format!("α={alpha}, b={scale}: scaling gap {gap:.2e}"));
            }
        }
    }
    let summary = if failures.is_empty() {
        "PSD on 500 points, increment covariances <= 0, f concave, witnesses found, scaling gaps < 1e-8 for α in {0.5,1,1.5,2}".into()
    } else {
        failures.join("; ")
    };
    Ok(b.done(failures.is_empty(), summary))
}

fn c9(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(9, "long memory");
    let us = log_grid(1e2, 1e4, 21);
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, tol) in [(0.5, 0.05), (1.0, 0.05), (1.5, 0.1)] {
        let fit = longmem_slope(&cfg(alpha, 1.0, 1.0)?, 1.0, 1.0, &us)?;
        let ok = (fit.slope + alpha + 1.0).abs() < tol * o.tolerance_scale;
        pass &= ok;
        b.m(format!("slope_alpha_{alpha}"), fit.slope);
        parts.push(format!("α={alpha}: {:.4} (target {} ± {tol})", fit.slope, -(alpha + 1.0)));
    }
    Ok(b.done(pass, parts.join("; ")))
}

fn c10(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(10, "fBm limit");
    let bs = [10.0, 1e2, 1e3, 1e4];
    let ss = [0.5, 1.0, 2.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.3, 0.5, 0.7] {
        let rows = fbm_limit_check(&cfg(alpha, 1.0, 1.0)?, &bs, &ss)?;
        let mut monotone = true;
        let mut worst: f64 = 0.0;
        for (j, &s) in ss.iter().enumerate() {
            let ratios: Vec<f64> = (0..bs.len()).map(|i| rows[i * ss.len() + j].ratio).collect();
            monotone &= ratios.windows(2).all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
            worst = worst.max((ratios[bs.len() - 1] - 1.0).abs());
            if s == 1.0 {
                b.m(format!("ratio_alpha_{alpha}_b_1e4_s_1"), ratios[bs.len() - 1]);
            }
        }
        let ok = monotone && worst <= 0.02 * o.tolerance_scale;
        pass &= ok;
        parts.push(format!("α={alpha}: monotone {monotone}, worst |ratio-1| at b=1e4 {worst:.4}"));
    }
    Ok(b.done(pass, format!("{} (tolerance 0.02)", parts.join("; "))))
}

fn c11(o: &AcceptOptions) -> Result<Criterion> {
    let mut b = Builder::new(11, "f = V_1 identity");
    let ss: Vec<f64> = (1..=200).map(|k| 0.1 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let config = cfg(alpha, c_for(alpha), 1.0)?;
        let mut w: f64 = 0.0;
        for &s in &ss {
            let f = f_limit_variance(&config, s, F_TOL)?.value;
            w = w.max((f - numvar(&config, s, V_TOL)?.value).abs());
        }
        b.m(format!("max_gap_alpha_{alpha}"), w);
        worst = worst.max(w);
    }
    Ok(b.done(
        worst < 1e-7 * o.tolerance_scale,
        format!("max |f(s) - V(t=1, L=s)| = {worst:.2e} over s in 0.1..20, α in {{0.5,1,1.5,2}}"),
    ))
}

/// Criteria 1 through 11.
pub fn run_criteria(o: &AcceptOptions) -> Vec<Criterion> {
    type Run = fn(&AcceptOptions) -> Result<Criterion>;
    let list: [(u32, &'static str, Run); 11] = [
        (1, "closed-form agreement", c1),
        (2, "saturation", c2),
        (3, "divergence regimes", c3),
        (4, "Monte Carlo consistency", c4),
        (5, "Poisson sandwich", c5),
        (6, "Poisson invariance", c6),
        (7, "CLT", c7),
        (8, "limit-process structure", c8),
        (9, "long memory", c9),
        (10, "fBm limit", c10),
        (11, "f = V_1 identity", c11),
    ];
    list.iter().map(|&(id, name, f)| timed(id, name, || f(o)).0).collect()
}

fn report(o: &AcceptOptions, criteria: Vec<Criterion>) -> AcceptanceReport {
    let all_pass = criteria.iter().all(|c| c.pass);
    AcceptanceReport {
        version: VERSION.into(),
        seed: o.seed,
        tolerance_scale: format!("{}", o.tolerance_scale),
        mc_seeds: o.mc_seeds,
        criteria,
        all_pass,
    }
}

/// Runs criteria 1 to 11 twice and adds criterion 12, byte equality of the two reports.
pub fn run_acceptance(o: &AcceptOptions) -> AcceptanceReport {
    let first = report(o, run_criteria(o)).to_json();
    eprintln!("criterion 12: repeating the suite");
    let second_criteria = run_criteria(o);
    let second = report(o, second_criteria.clone()).to_json();
    let same = first == second;
    let mut b = Builder::new(12, "reproducibility");
    b.m("report_bytes", first.len() as f64);
    let c12 = b.done(
        same,
        if same {
            "two runs with the same seed give byte-identical reports".into()
        } else {
            "reports of two runs with the same seed differ".into()
        },
    );
    let mut criteria = second_criteria;
    criteria.push(c12);
    report(o, criteria)
}

impl Criterion {
    /// One line: `criterion  N PASS|FAIL name: summary`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.summary
        )
    }
}
