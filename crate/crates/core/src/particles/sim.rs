//! Monte Carlo counts for the lattice system and the Poisson-initial system.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{TailRule, TruncationPlan};
use crate::error::{invalid, Result};
use crate::numvar::SystemConfig;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::rng::stream;
use crate::stable::{std_pdf, std_sf, StableLawAtTime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingSample {
    pub replications: usize,
    pub counts: Vec<u64>,
    pub seed: u64,
    pub config: SystemConfig,
    #[serde(rename = "L")]
    pub l: f64,
    pub plan: Option<TruncationPlan>,
}

/// Hit-probability bound for a particle at least `d >= 0` away from `[0, L]`.
fn hit_bound(law: &StableLawAtTime, l: f64, d: f64) -> f64 {
    let x = d / law.sigma;
    std_sf(law.alpha(), x).min(l / law.sigma * std_pdf(law.alpha(), x)).min(1.0)
}

fn poisson_draw(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

/// Blocks of cells walking away from the interval, with a hit-probability
/// bound valid for every cell in the block and every shift.
#[derive(Debug, Clone)]
struct FarZone {
    dir: i64,
    blocks: Vec<(i64, i64, f64)>,
}

impl FarZone {
    fn new(law: &StableLawAtTime, a: f64, l: f64, start: i64, end: i64, dir: i64) -> Self {
        let distance = |j: i64| {
            if dir > 0 {
                a * (j - 1) as f64 - l
            } else {
                -a * j as f64
            }
        };
        let mut blocks = Vec::new();
        let mut block_start = start;
        let mut size: i64 = 1;
        while law.sigma > 0.0 && (end - block_start) * dir >= 0 {
            let len = size.min((end - block_start) * dir + 1);
            let b = hit_bound(law, l, distance(block_start).max(0.0));
            if b <= 0.0 {
                break;
            }
            blocks.push((block_start, len, b));
            block_start += dir * len;
            size = size.saturating_mul(2);
        }
        Self { dir, blocks }
    }

    /// Hits by thinning: candidates are proposed at rate `b` per block and
    /// accepted with probability `q / b`.
    fn hits(&self, rng: &mut ChaCha8Rng, law: &StableLawAtTime, a: f64, l: f64, eps: f64) -> u64 {
        let mut hits = 0;
        for &(block_start, len, b) in &self.blocks {
            let geo = Geometric::new(b).expect("bound in (0, 1]");
            let mut offset: i64 = -1;
            loop {
                let skip = geo.sample(rng).min(i64::MAX as u64 / 4) as i64;
                offset = offset.saturating_add(1).saturating_add(skip);
                if offset >= len {
                    break;
                }
                let j = block_start + self.dir * offset;
                let u = a * (j as f64 - eps);
                let q = law.prob_interval(-u, l - u).unwrap_or(0.0);
                if rng.random::<f64>() * b < q {
                    hits += 1;
                }
            }
        }
        hits
    }
}

/// Half-width, beyond the interval, of the zone where every particle is sampled directly.
fn core_margin(law: &StableLawAtTime, a: f64) -> f64 {
    40.0 * law.sigma + 2.0 * a
}

struct Layout {
    core_min: i64,
    core_max: i64,
    right: FarZone,
    left: FarZone,
}

impl Layout {
    fn new(config: &SystemConfig, law: &StableLawAtTime, l: f64, plan: &TruncationPlan) -> Self {
        let a = config.a;
        let margin = core_margin(law, a);
        let core_min = plan.j_min.max((-margin / a).floor() as i64);
        let core_max = plan.j_max.min(((l + margin) / a).ceil() as i64 + 1);
        Self {
            core_min,
            core_max,
            right: FarZone::new(law, a, l, core_max + 1, plan.j_max, 1),
            left: FarZone::new(law, a, l, core_min - 1, plan.j_min, -1),
        }
    }
}

fn one_replication(
    config: &SystemConfig,
    law: &StableLawAtTime,
    l: f64,
    plan: &TruncationPlan,
    layout: &Layout,
    rng: &mut ChaCha8Rng,
) -> u64 {
    let a = config.a;
    let eps: f64 = rng.random();
    let mut count = 0u64;
    for j in layout.core_min..=layout.core_max {
        let x = a * (j as f64 - eps) + law.sample(rng);
        if (0.0..=l).contains(&x) {
            count += 1;
        }
    }
    count += layout.right.hits(rng, law, a, l, eps);
    count += layout.left.hits(rng, law, a, l, eps);
    if plan.rule == TailRule::PoissonCompensated {
        count += poisson_draw(rng, plan.boundary_mass);
    }
    count
}

/// Counts in `[0, L]` at time `t` for `replications` independent copies of the system.
///
/// Each replication draws its own shift `ε` and uses its own random stream,
/// so the output depends only on `seed`. Particles near the interval are
/// displaced one by one; far particles are handled by exact thinning.
pub fn simulate_counts(
    config: &SystemConfig,
    l: f64,
    plan: &TruncationPlan,
    replications: usize,
    seed: u64,
) -> Result<CountingSample> {
    if !(l >= 0.0) {
        return Err(invalid("L must be nonnegative"));
    }
    if replications == 0 {
        return Err(invalid("replications must be positive"));
    }
    let law = config.law()?;
    let counts: Vec<u64> = if l == 0.0 {
        vec![0; replications]
    } else {
        let layout = Layout::new(config, &law, l, plan);
        (0..replications)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(seed, "lattice-counts", r as u64);
                one_replication(config, &law, l, plan, &layout, &mut rng)
            })
            .collect()
    };
    Ok(CountingSample {
        replications,
        counts,
        seed,
        config: *config,
        l,
        plan: Some(*plan),
    })
}

/// Counts in `[0, L]` for particles started from a Poisson process of intensity `theta`.
///
/// Initial points are placed on `[-M, L + M]` with `M` chosen so that the
/// expected number of outside points reaching the interval is below `tol`;
/// that remainder is added as an independent Poisson count, which is exact
/// by the marking property of Poisson processes.
pub fn simulate_poisson_initial(
    theta: f64,
    law: &StableLawAtTime,
    l: f64,
    replications: usize,
    seed: u64,
    tol: f64,
) -> Result<CountingSample> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid(format!("intensity must be positive, got {theta}")));
    }
    if !(l >= 0.0) || replications == 0 {
        return Err(invalid("need L >= 0 and at least one replication"));
    }
    let outside = |m: f64| {
        if law.sigma == 0.0 || l == 0.0 {
            return 0.0;
        }
        let s = law.sigma;
        let (x0, x1) = (m / s, (m + l) / s);
        2.0 * theta * s * integrate_with_breaks(|x| std_sf(law.alpha(), x), &[x0, 0.5 * (x0 + x1), x1], Tolerance::new(1e-300, 1e-10)).value
    };
    let mut m = 0.0;
    if outside(0.0) > tol {
        let mut hi = law.sigma.max(1e-12);
        while outside(hi) > tol && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if outside(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        m = hi;
    }
    let remainder = outside(m);
    let width = l + 2.0 * m;
    let counts: Vec<u64> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, "poisson-initial", r as u64);
            let n = poisson_draw(&mut rng, theta * width);
            let mut count = 0;
            for _ in 0..n {
                let x = -m + width * rng.random::<f64>() + law.sample(&mut rng);
                if (0.0..=l).contains(&x) {
                    count += 1;
                }
            }
            count + poisson_draw(&mut rng, remainder)
        })
        .collect();
    Ok(CountingSample {
        replications,
        counts,
        seed,
        config: SystemConfig {
            stable: law.params,
            a: 1.0 / theta,
            t: law.t,
        },
        l,
        plan: None,
    })
}
