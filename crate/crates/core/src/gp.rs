//! The limiting Gaussian fluctuation process: covariances, exact path
//! sampling and structural diagnostics.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numvar::{f_limit_variance, SystemConfig};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::rng::stream;
use crate::special::gamma;
use crate::stable::std_pdf;

pub const F_TOL: f64 = 1e-11;
const JITTER_START: f64 = 1e-14;
const JITTER_MAX: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CovKind {
    GAlpha { alpha: f64, c: f64, a: f64 },
    Fbm { h: f64, k: f64 },
    Brownian { scale: f64 },
    BrownianBridge { a: f64 },
}

/// A covariance matrix on a grid together with a certified factor `L Lᵀ ≈ C + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSpec {
    pub grid: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub kind: CovKind,
    pub factor: DMatrix<f64>,
    /// Diagonal jitter added before factorization, relative to the largest diagonal entry.
    pub jitter: f64,
}

/// Cache of `f = V_1` values keyed by argument.
#[derive(Debug, Clone)]
pub struct FTable {
    config: SystemConfig,
    values: HashMap<u64, f64>,
}

impl FTable {
    pub fn new(config: &SystemConfig) -> Self {
        Self {
            config: *config,
            values: HashMap::new(),
        }
    }

    /// Evaluate `f` at every argument not yet cached.
    pub fn fill(&mut self, args: &[f64]) -> Result<()> {
        let mut todo: Vec<f64> = args
            .iter()
            .copied()
            .filter(|s| !self.values.contains_key(&s.to_bits()))
            .collect();
        todo.sort_by(f64::total_cmp);
        todo.dedup();
        let config = self.config;
        let computed = todo
            .par_iter()
            .map(|&s| f_limit_variance(&config, s, F_TOL).map(|e| (s, e.value)))
            .collect::<Result<Vec<_>>>()?;
        for (s, v) in computed {
            self.values.insert(s.to_bits(), v);
        }
        Ok(())
    }

    pub fn get(&mut self, s: f64) -> Result<f64> {
        if let Some(v) = self.values.get(&s.to_bits()) {
            return Ok(*v);
        }
        let v = f_limit_variance(&self.config, s, F_TOL)?.value;
        self.values.insert(s.to_bits(), v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid must not be empty"));
    }
    if grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(invalid("grid points must be nonnegative and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// Covariance matrix `½(f(s_i) + f(s_j) - f(|s_i - s_j|))` without certification.
pub fn cov_g_matrix(grid: &[f64], table: &mut FTable) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let mut args: Vec<f64> = grid.to_vec();
    for i in 0..n {
        for j in 0..i {
            args.push(grid[i] - grid[j]);
        }
    }
    table.fill(&args)?;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let fi = table.get(grid[i])?;
        m[(i, i)] = fi;
        for j in 0..i {
            let v = 0.5 * (fi + table.get(grid[j])? - table.get(grid[i] - grid[j])?);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Lower factor with escalating jitter; rows with zero variance get zero factor rows.
pub fn certify(matrix: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = matrix.nrows();
    let live: Vec<usize> = (0..n).filter(|&i| matrix[(i, i)] > 0.0).collect();
    for i in 0..n {
        if matrix[(i, i)] < 0.0 {
            return Err(Error::NotPsd {
                min_eigenvalue: matrix[(i, i)],
            });
        }
    }
    let mut factor = DMatrix::zeros(n, n);
    if live.is_empty() {
        return Ok((factor, 0.0));
    }
    let sub = DMatrix::from_fn(live.len(), live.len(), |i, j| matrix[(live[i], live[j])]);
    let max_diag = live.iter().map(|&i| matrix[(i, i)]).fold(0.0, f64::max);
    let mut jitter = 0.0;
    loop {
        let trial = &sub + DMatrix::identity(live.len(), live.len()) * (jitter * max_diag);
        if let Some(ch) = trial.cholesky() {
            let l = ch.l();
            for (a, &i) in live.iter().enumerate() {
                for (b, &j) in live.iter().enumerate() {
                    factor[(i, j)] = l[(a, b)];
                }
            }
            return Ok((factor, jitter));
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX * (1.0 + 1e-9) {
            let eig = SymmetricEigen::new(sub);
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
}

/// Covariance of the limit process on `grid`, certified positive semidefinite.
pub fn cov_g(config: &SystemConfig, grid: &[f64]) -> Result<CovSpec> {
    check_grid(grid)?;
    let mut table = FTable::new(config);
    let matrix = cov_g_matrix(grid, &mut table)?;
    let (factor, jitter) = certify(&matrix)?;
    Ok(CovSpec {
        grid: grid.to_vec(),
        matrix,
        kind: CovKind::GAlpha {
            alpha: config.alpha(),
            c: config.c(),
            a: config.a,
        },
        factor,
        jitter,
    })
}

fn from_kernel<K: Fn(f64, f64) -> f64>(grid: &[f64], kind: CovKind, k: K) -> Result<CovSpec> {
    check_grid(grid)?;
    let n = grid.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| k(grid[i], grid[j]));
    let (factor, jitter) = certify(&matrix)?;
    Ok(CovSpec {
        grid: grid.to_vec(),
        matrix,
        kind,
        factor,
        jitter,
    })
}

pub fn fbm_kernel(h: f64, k: f64, s: f64, r: f64) -> f64 {
    0.5 * k * (s.powf(2.0 * h) + r.powf(2.0 * h) - (s - r).abs().powf(2.0 * h))
}

/// Fractional Brownian motion covariance `k/2 (s^{2H} + r^{2H} - |s - r|^{2H})`.
pub fn cov_fbm(h: f64, k: f64, grid: &[f64]) -> Result<CovSpec> {
    if !(h > 0.0 && h < 1.0) {
        return Err(invalid(format!("Hurst index must lie in (0, 1), got {h}")));
    }
    if !(k > 0.0) {
        return Err(invalid("fBm scale must be positive"));
    }
    from_kernel(grid, CovKind::Fbm { h, k }, |s, r| fbm_kernel(h, k, s, r))
}

pub fn cov_brownian(scale: f64, grid: &[f64]) -> Result<CovSpec> {
    from_kernel(grid, CovKind::Brownian { scale }, |s, r| scale * s.min(r))
}

/// Brownian bridge on `[0, a]`: `min(s, r) - s r / a`.
pub fn cov_brownian_bridge(a: f64, grid: &[f64]) -> Result<CovSpec> {
    if grid.iter().any(|&s| s > a) {
        return Err(invalid("bridge grid must lie in [0, a]"));
    }
    from_kernel(grid, CovKind::BrownianBridge { a }, |s, r| s.min(r) - s * r / a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub grid: Vec<f64>,
    /// `paths[r][i]` is replication `r` at `grid[i]`.
    pub paths: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Exact Gaussian paths `L z` with `z` standard normal, one stream per replication.
pub fn sample_paths(cov: &CovSpec, replications: usize, seed: u64) -> PathSample {
    let n = cov.grid.len();
    let paths = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, "gp-paths", r as u64);
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let x = &cov.factor * z;
            x.iter().copied().collect()
        })
        .collect();
    PathSample {
        grid: cov.grid.clone(),
        paths,
        seed,
    }
}

/// Scale of `Y = (X_1(1) - X_2(1)) / a`.
fn y_scale(config: &SystemConfig) -> f64 {
    (2.0 * config.c()).powf(1.0 / config.alpha()) / config.a
}

/// `Cov(G(u+s) - G(u), G(u+s+r) - G(u+s))`, i.e. `½(f(s+r+u) - f(r+u) - f(s+u) + f(u))`
/// for adjacent increments of lengths `s` and `r` separated by the lag `u`.
///
/// Evaluated from `f'' = -(2/a²) p_Y(·/a)` as
/// `-(1/a²) ∫_0^{s+r} min(z, s, r, s+r-z) p_Y((u+z)/a) dz`.
pub fn increment_cov(config: &SystemConfig, s: f64, r: f64, u: f64) -> Result<f64> {
    if !(s >= 0.0 && r >= 0.0 && u >= 0.0) {
        return Err(invalid("increment lengths and lag must be nonnegative"));
    }
    if s == 0.0 || r == 0.0 {
        return Ok(0.0);
    }
    let a = config.a;
    let sy = y_scale(config);
    let alpha = config.alpha();
    let p = |z: f64| std_pdf(alpha, (u + z) / (a * sy)) / sy;
    let w = |z: f64| z.min(s).min(r).min(s + r - z).max(0.0);
    let mut points = vec![0.0, s.min(r), s.max(r), s + r];
    points.dedup();
    let est = integrate_with_breaks(|z| w(z) * p(z), &points, Tolerance::new(1e-300, 1e-12));
    Ok(-est.value / (a * a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongMemFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<(f64, f64)>,
    /// Lags dropped because `|cov| < 1e-14`.
    pub dropped: Vec<f64>,
}

/// Ordinary least squares slope of `log|increment_cov|` against `log u`.
pub fn longmem_slope(config: &SystemConfig, s: f64, r: f64, u_grid: &[f64]) -> Result<LongMemFit> {
    if config.alpha() >= 2.0 {
        return Err(invalid("long-memory slope needs alpha < 2"));
    }
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &u in u_grid {
        let v = increment_cov(config, s, r, u)?;
        if v.abs() < 1e-14 {
            dropped.push(u);
        } else {
            points.push((u, v));
        }
    }
    if points.len() < 2 {
        return Err(Error::Quadrature("fewer than two usable lags for the slope fit".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let (slope, intercept) = ols(&xs, &ys);
    Ok(LongMemFit {
        slope,
        intercept,
        points,
        dropped,
    })
}

/// Least squares line `y = slope x + intercept`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `max |Cov^{c}(b s_i, b s_j) - b Cov^{c/b^α}(s_i, s_j)|` over the grid.
pub fn scaling_check(config: &SystemConfig, b: f64, grid: &[f64]) -> Result<f64> {
    if !(b > 0.0) {
        return Err(invalid("scale factor must be positive"));
    }
    check_grid(grid)?;
    let scaled_grid: Vec<f64> = grid.iter().map(|s| b * s).collect();
    let lhs = cov_g_matrix(&scaled_grid, &mut FTable::new(config))?;
    let small = SystemConfig::new(config.alpha(), config.c() / b.powf(config.alpha()), config.a, config.t)?;
    let rhs = cov_g_matrix(grid, &mut FTable::new(&small))? * b;
    Ok((lhs - rhs).abs().max())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    /// The scale parameter of the row (`b` or `ε`).
    pub param: f64,
    pub s: f64,
    pub value: f64,
    pub target: f64,
    pub ratio: f64,
}

fn ratio_row(param: f64, s: f64, value: f64, target: f64) -> RatioRow {
    let ratio = if value == 0.0 && target == 0.0 { 1.0 } else { value / target };
    RatioRow {
        param,
        s,
        value,
        target,
        ratio,
    }
}

/// `k_{α,c,a} = (4c/(aπ)) Γ(α-1) sin(-απ/2)`, the fBm scale for α < 1.
pub fn fbm_constant(config: &SystemConfig) -> Result<f64> {
    let alpha = config.alpha();
    if alpha >= 1.0 {
        return Err(Error::FbmLimitRequiresAlphaBelowOne(alpha));
    }
    Ok(4.0 * config.c() / (config.a * PI) * gamma(alpha - 1.0) * (-0.5 * alpha * PI).sin())
}

/// Rows `f(b s) / b^{1-α}` against `k s^{1-α}` for each `(b, s)`.
pub fn fbm_limit_check(config: &SystemConfig, b_grid: &[f64], s_grid: &[f64]) -> Result<Vec<RatioRow>> {
    let k = fbm_constant(config)?;
    let alpha = config.alpha();
    let mut table = FTable::new(config);
    let args: Vec<f64> = b_grid.iter().flat_map(|b| s_grid.iter().map(move |s| b * s)).collect();
    table.fill(&args)?;
    let mut rows = Vec::new();
    for &b in b_grid {
        for &s in s_grid {
            let v = table.get(b * s)? / b.powf(1.0 - alpha);
            rows.push(ratio_row(b, s, v, k * s.powf(1.0 - alpha)));
        }
    }
    Ok(rows)
}

/// Rows `f(ε s)/ε` against the Brownian target `s/a`.
pub fn small_time_brownian_check(config: &SystemConfig, eps_grid: &[f64], s_grid: &[f64]) -> Result<Vec<RatioRow>> {
    let mut table = FTable::new(config);
    let mut rows = Vec::new();
    for &e in eps_grid {
        if !(e > 0.0) {
            return Err(invalid("epsilon must be positive"));
        }
        for &s in s_grid {
            rows.push(ratio_row(e, s, table.get(e * s)? / e, s / config.a));
        }
    }
    Ok(rows)
}

/// Rows `f(s)` against the small-α Poisson target `(1 - e^{-2c}) s / a`.
pub fn alpha_zero_check(config: &SystemConfig, s_grid: &[f64]) -> Result<Vec<RatioRow>> {
    let mut table = FTable::new(config);
    let level = -(-2.0 * config.c()).exp_m1() / config.a;
    s_grid
        .iter()
        .map(|&s| Ok(ratio_row(config.alpha(), s, table.get(s)?, level * s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub s: f64,
    pub r: f64,
    pub u: f64,
    pub gap: f64,
}

pub const WITNESS_GAP: f64 = 1e-3;

/// Largest Markov defect `|C(s,u) - C(s,r) C(r,u) / C(r,r)|` over `s < r < u` in `grid`.
///
/// Errors with `NoWitness` if the defect never exceeds [`WITNESS_GAP`].
pub fn markov_witness<K: FnMut(f64, f64) -> Result<f64>>(mut cov: K, grid: &[f64]) -> Result<Witness> {
    let mut best = Witness {
        s: f64::NAN,
        r: f64::NAN,
        u: f64::NAN,
        gap: 0.0,
    };
    for (i, &s) in grid.iter().enumerate() {
        for (j, &r) in grid.iter().enumerate().skip(i + 1) {
            let crr = cov(r, r)?;
            if crr <= 0.0 {
                continue;
            }
            let csr = cov(s, r)?;
            for &u in grid.iter().skip(j + 1) {
                let gap = (cov(s, u)? - csr * cov(r, u)? / crr).abs();
                if gap > best.gap {
                    best = Witness { s, r, u, gap };
                }
            }
        }
    }
    if best.gap > WITNESS_GAP {
        Ok(best)
    } else {
        Err(Error::NoWitness { max_gap: best.gap })
    }
}

/// The witness grid `{0.5, 1, ..., 5}`.
pub fn witness_grid() -> Vec<f64> {
    (1..=10).map(|k| 0.5 * k as f64).collect()
}

/// Markov-violation witness for the limit process of `config`.
pub fn markov_violation_witness(config: &SystemConfig) -> Result<Witness> {
    let grid = witness_grid();
    let mut table = FTable::new(config);
    let mut args = grid.clone();
    for &s in &grid {
        for &r in &grid {
            args.push((s - r).abs());
        }
    }
    table.fill(&args)?;
    markov_witness(
        |s, r| Ok(0.5 * (table.get(s)? + table.get(r)? - table.get((s - r).abs())?)),
        &grid,
    )
}

/// `min(s, r)/a - ∬_{[0,r/a]×[0,s/a]} p_Y(x - y) dx dy`, reduced to one integral
/// over `z = x - y` weighted by the overlap length.
pub fn bridge_form(config: &SystemConfig, s: f64, r: f64) -> Result<f64> {
    let a = config.a;
    let (x, y) = (r / a, s / a);
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let sy = y_scale(config);
    let alpha = config.alpha();
    // Length of {v in [0, y] : v + z in [0, x]}.
    let overlap = |z: f64| ((x - z).min(y) - (-z).max(0.0)).max(0.0);
    let mut points = vec![-y, 0.0, x - y, x];
    points.sort_by(f64::total_cmp);
    points.dedup();
    let est = integrate_with_breaks(
        |z| overlap(z) * std_pdf(alpha, z.abs() / sy) / sy,
        &points,
        Tolerance::new(1e-300, 1e-12),
    );
    Ok(s.min(r) / a - est.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstPoint {
    pub s: f64,
    pub f: f64,
    pub h: f64,
}

/// Diagnostic local Hurst index `log(f(s)/κ) / (2 log s)`; `s = 1` is skipped.
pub fn hurst_profile(config: &SystemConfig, grid: &[f64], kappa: f64) -> Result<Vec<HurstPoint>> {
    let mut table = FTable::new(config);
    let mut out = Vec::new();
    for &s in grid {
        if s <= 0.0 || s == 1.0 {
            continue;
        }
        let f = table.get(s)?;
        out.push(HurstPoint {
            s,
            f,
            h: (f / kappa).ln() / (2.0 * s.ln()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numvar::{numvar_brownian_closed, numvar_cauchy_closed};

    fn cfg(alpha: f64, c: f64) -> SystemConfig {
        SystemConfig::new(alpha, c, 1.0, 1.0).unwrap()
    }

    #[test]
    fn cov_examples() {
        let c = cfg(2.0, 0.5);
        let cov = cov_g(&c, &[1.0, 2.0]).unwrap();
        let f2 = numvar_brownian_closed(1.0, 1.0, 2.0);
        let f1 = numvar_brownian_closed(1.0, 1.0, 1.0);
        assert!((cov.matrix[(0, 1)] - 0.5 * f2).abs() < 1e-9);
        assert!((cov.matrix[(0, 0)] - f1).abs() < 1e-9);
        let zero = cov_g(&c, &[0.0]).unwrap();
        assert_eq!(zero.matrix[(0, 0)], 0.0);
        assert_eq!(zero.factor[(0, 0)], 0.0);
    }

    #[test]
    fn fbm_examples() {
        let b = cov_fbm(0.5, 1.0, &[0.5, 1.0, 3.0]).unwrap();
        assert!((b.matrix[(0, 2)] - 0.5).abs() < 1e-15);
        assert!((b.matrix[(1, 2)] - 1.0).abs() < 1e-15);
        let q = cov_fbm(0.25, 2.5, &[1.0]).unwrap();
        assert!((q.matrix[(0, 0)] - 2.5).abs() < 1e-15);
        assert!(cov_fbm(1.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn increment_examples() {
        let c = cfg(1.0, 1.0);
        assert_eq!(increment_cov(&c, 0.0, 1.0, 2.0).unwrap(), 0.0);
        let v = increment_cov(&c, 1.0, 1.0, 0.0).unwrap();
        let oracle = 0.5 * (numvar_cauchy_closed(1.0, 1.0, 2.0) - 2.0 * numvar_cauchy_closed(1.0, 1.0, 1.0));
        assert!(v < 0.0 && (v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        let h = cfg(0.5, 1.0);
        let near = increment_cov(&h, 1.0, 1.0, 1e2).unwrap();
        let far = increment_cov(&h, 1.0, 1.0, 1e3).unwrap();
        assert!(far < 0.0 && far.abs() < near.abs());
    }

    #[test]
    fn fbm_constant_example() {
        let k = fbm_constant(&cfg(0.5, 1.0)).unwrap();
        assert!((k - 4.0 * (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((k - 3.1915).abs() < 1e-4);
        assert!(matches!(fbm_constant(&cfg(1.0, 1.0)), Err(Error::FbmLimitRequiresAlphaBelowOne(_))));
    }

    #[test]
    fn witness_examples() {
        let grid = witness_grid();
        assert!(matches!(markov_witness(|s, r| Ok(s.min(r)), &grid), Err(Error::NoWitness { .. })));
        assert!(markov_violation_witness(&cfg(1.0, 1.0)).unwrap().gap > 1e-3);
        assert!(markov_violation_witness(&cfg(2.0, 0.5)).is_ok());
    }

    #[test]
    fn certify_reports_negative_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match certify(&m) {
            Err(Error::NotPsd { min_eigenvalue }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slope_examples() {
        let ug: Vec<f64> = (0..=20).map(|k| 10f64.powf(2.0 + 0.1 * k as f64)).collect();
        for (alpha, tol) in [(0.5, 0.05), (1.0, 0.05), (1.5, 0.1)] {
            let fit = longmem_slope(&cfg(alpha, 1.0), 1.0, 1.0, &ug).unwrap();
            assert!((fit.slope + alpha + 1.0).abs() < tol, "{alpha}: {}", fit.slope);
        }
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scaling_check(&cfg(1.0, 1.0), 1.0, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(scaling_check(&cfg(1.0, 1.0), 2.0, &[1.0, 2.0, 3.0]).unwrap() < 1e-8);
        assert!(scaling_check(&cfg(0.5, 1.0), 10.0, &[1.0, 2.0, 3.0]).unwrap() < 1e-8);
    }

    #[test]
    fn fbm_ratios_increase_in_b() {
        let rows = fbm_limit_check(&cfg(0.5, 1.0), &[10.0, 1e2, 1e3, 1e4], &[1.0]).unwrap();
        assert!(rows.windows(2).all(|w| w[0].ratio <= w[1].ratio && w[1].ratio < 1.0));
        assert!(fbm_limit_check(&cfg(1.5, 1.0), &[10.0], &[1.0]).is_err());
    }

    #[test]
    fn small_time_examples() {
        let rows = small_time_brownian_check(&cfg(1.0, 1.0), &[1e-4], &[0.0, 1.0]).unwrap();
        assert_eq!((rows[0].value, rows[0].target, rows[0].ratio), (0.0, 0.0, 1.0));
        assert!((rows[1].ratio - 1.0).abs() < 0.01);
        // Cauchy oracle for the same point.
        let exact = numvar_cauchy_closed(1.0, 1.0, 1e-4) / 1e-4;
        assert!((rows[1].value - exact).abs() < 1e-6);
        let z = alpha_zero_check(&cfg(0.05, 1.0), &[1.0]).unwrap();
        assert!((z[0].ratio - 1.0).abs() < 0.02);
    }

    #[test]
    fn bridge_form_matches_cov() {
        for alpha in [0.5, 1.0, 2.0] {
            let c = cfg(alpha, 1.0);
            let cov = cov_g(&c, &[0.7, 2.5]).unwrap();
            assert!((cov.matrix[(0, 1)] - bridge_form(&c, 0.7, 2.5).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn hurst_profile_skips_unit_point() {
        let h = hurst_profile(&cfg(0.5, 1.0), &[0.5, 1.0, 2.0], 1.0).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.iter().all(|p| p.h.is_finite()));
    }
}
