//! Number variance of the lattice system, its closed forms, saturation
//! levels, the limit variance `f` and related reference curves.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{alternating_tail, integrate, integrate_with_breaks, Estimate, Tolerance};
use crate::special::{gamma, norm_cdf, ln_gamma};
use crate::stable::{std_pdf, std_sf, tail_constant, StableLawAtTime, StableParams};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Lattice spacing `a` and observation time `t` for a given driving law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub stable: StableParams,
    pub a: f64,
    pub t: f64,
}

impl SystemConfig {
    pub fn new(alpha: f64, c: f64, a: f64, t: f64) -> Result<Self> {
        let stable = StableParams::new(alpha, c)?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("a must be positive and finite, got {a}")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("t must be nonnegative and finite, got {t}")));
        }
        Ok(Self { stable, a, t })
    }

    pub fn alpha(&self) -> f64 {
        self.stable.alpha
    }

    pub fn c(&self) -> f64 {
        self.stable.c
    }

    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn law(&self) -> Result<StableLawAtTime> {
        self.stable.at(self.t)
    }

    /// Scale of the displacement difference `(X_1(t) - X_2(t)) / a` in lattice units.
    pub fn diff_scale(&self) -> f64 {
        (2.0 * self.c() * self.t).powf(1.0 / self.alpha()) / self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedBrownian,
    ClosedCauchy,
    MonteCarlo,
    SineKernel,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedBrownian => "closed_brownian",
            Method::ClosedCauchy => "closed_cauchy",
            Method::MonteCarlo => "monte_carlo",
            Method::SineKernel => "sine_kernel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub err: f64,
}

/// Tabulated number variance with per-point absolute errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumVarCurve {
    pub config: SystemConfig,
    pub method: Method,
    pub points: Vec<CurvePoint>,
}

/// Result of a number-variance evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumVar {
    pub value: f64,
    pub err: f64,
    /// Value before clamping to `[0, L/a]`.
    pub raw: f64,
    pub note: Option<String>,
}

pub const DETERMINISTIC_NOTE: &str = "deterministic lattice: at t = 0 every particle sits at its lattice site, so the variance given the shift is 0; \
the shift-averaged count variance frac(L/a)(1 - frac(L/a)) is reported by count_variance";

/// `∫_0^∞ amp(ψ) sin²(ψ/2)/ψ² dψ` for an amplitude varying on scale `psi_scale`.
///
/// The range is split at a zero of `cos ψ`; beyond it the integrand is
/// written as `amp/(2ψ²) - amp·cos ψ/(2ψ²)`, the first part mapped onto a
/// finite interval and the second summed over half periods.
fn sin2_transform<F: Fn(f64) -> f64>(amp: F, psi_scale: f64, tol: f64) -> Estimate {
    let target = (psi_scale * 8.0).clamp(4.0 * PI, 2000.0);
    let n = (target / (2.0 * PI)).ceil().max(2.0);
    let psi0 = (2.0 * n + 0.5) * PI;
    let mut points: Vec<f64> = (0..=(2.0 * n) as usize).map(|k| k as f64 * PI).collect();
    for m in [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0] {
        let p = m * psi_scale;
        if p > 0.0 && p < psi0 {
            points.push(p);
        }
    }
    points.push(psi0);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let kernel = |x: f64| {
        if x < 1e-4 {
            0.25 - x * x / 48.0
        } else {
            let s = (0.5 * x).sin();
            s * s / (x * x)
        }
    };
    let tol_near = Tolerance::new(0.25 * tol, 0.0).with_max_intervals(points.len() * 20 + 4000);
    let near = integrate_with_breaks(|x| amp(x) * kernel(x), &points, tol_near);
    if amp(psi0) == 0.0 && amp(2.0 * psi0) == 0.0 {
        return near;
    }
    let smooth = integrate(
        |u: f64| if u == 0.0 { 0.0 } else { amp(psi0 / u) } / (2.0 * psi0),
        0.0,
        1.0,
        Tolerance::new(0.25 * tol, 0.0),
    );
    let osc = alternating_tail(|x: f64| amp(x) * x.cos() / (2.0 * x * x), psi0, PI, 0.25 * tol);
    near + smooth - osc
}

/// Number variance `V_t[L]` by Fourier quadrature, absolute tolerance `tol`.
pub fn numvar(config: &SystemConfig, l: f64, tol: f64) -> Result<NumVar> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(invalid(format!("L must be nonnegative and finite, got {l}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if config.t == 0.0 {
        return Ok(NumVar {
            value: 0.0,
            err: 0.0,
            raw: 0.0,
            note: Some(DETERMINISTIC_NOTE.into()),
        });
    }
    if l == 0.0 {
        return Ok(NumVar {
            value: 0.0,
            err: 0.0,
            raw: 0.0,
            note: None,
        });
    }
    let ell = l / config.a;
    let alpha = config.alpha();
    let kappa = 2.0 * config.c() * config.t;
    // e^{-κ(ψ/L)^α} decays on the scale ψ_E = L κ^{-1/α}.
    let psi_scale = l * kappa.powf(-1.0 / alpha);
    let pref = 4.0 * ell / PI;
    let amp = |x: f64| (-kappa * (x / l).powf(alpha)).exp();
    let est = sin2_transform(amp, psi_scale, tol / pref);
    let raw = ell - pref * est.value;
    Ok(NumVar {
        value: raw.clamp(0.0, ell),
        err: pref * est.err + 4.0 * f64::EPSILON * ell,
        raw,
        note: None,
    })
}

/// Number variance as the integrated two-sided tail of the displacement difference,
/// `∫_0^{L/a} P(|Y| > λ) dλ` with `Y = (X_1(t) - X_2(t))/a`.
pub fn numvar_tail_form(config: &SystemConfig, l: f64, tol: f64) -> Result<Estimate> {
    if config.t == 0.0 || l == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let ell = l / config.a;
    let sy = config.diff_scale();
    let alpha = config.alpha();
    let mut points = vec![0.0, ell];
    let mut p = sy * 1e-3;
    while p < ell {
        points.push(p);
        p *= 4.0;
    }
    points.sort_by(f64::total_cmp);
    let tol = Tolerance::new(tol, 0.0).with_max_intervals(20_000);
    Ok(integrate_with_breaks(|lam: f64| 2.0 * std_sf(alpha, lam / sy), &points, tol))
}

/// Gaussian closed form for `α = 2, c = 1/2`.
pub fn numvar_brownian_closed(a: f64, t: f64, l: f64) -> f64 {
    if l == 0.0 || t == 0.0 {
        return 0.0;
    }
    2.0 / a * (l * norm_cdf(-l / (2.0 * t).sqrt()) + (t / PI).sqrt() * (-(-l * l / (4.0 * t)).exp_m1()))
}

/// Cauchy closed form for `α = 1, c = 1`.
pub fn numvar_cauchy_closed(a: f64, t: f64, l: f64) -> f64 {
    if l == 0.0 || t == 0.0 {
        return 0.0;
    }
    let r = l / (2.0 * t);
    l / a * (1.0 - 2.0 / PI * r.atan()) + 2.0 * t / (a * PI) * (r * r).ln_1p()
}

/// Poisson-like limit `(L/a)(1 - e^{-2ct})` obtained as α → 0.
pub fn numvar_alpha_zero_limit(a: f64, c: f64, t: f64, l: f64) -> f64 {
    l / a * -(-2.0 * c * t).exp_m1()
}

fn require_saturating(config: &SystemConfig) -> Result<()> {
    if config.alpha() <= 1.0 {
        return Err(Error::Diverges(format!(
            "number variance diverges for alpha = {} <= 1",
            config.alpha()
        )));
    }
    if config.t <= 0.0 {
        return Err(invalid("saturation level needs t > 0"));
    }
    Ok(())
}

/// Large-L limit `(2/(aπ)) (2ct)^{1/α} Γ(1 - 1/α)` for α ∈ (1, 2].
pub fn saturation_level(config: &SystemConfig) -> Result<f64> {
    require_saturating(config)?;
    let alpha = config.alpha();
    Ok(2.0 / (config.a * PI) * (2.0 * config.t * config.c()).powf(1.0 / alpha) * gamma(1.0 - 1.0 / alpha))
}

/// Saturation level as `E|Y|` computed from the density.
///
/// `∫_0^X x p(x) dx` by quadrature; the remainder `X·P(S > X) + ∫_X^∞ P(S > x) dx`
/// uses the large-x expansion integrated term by term.
pub fn saturation_level_integral(config: &SystemConfig) -> Result<f64> {
    require_saturating(config)?;
    let alpha = config.alpha();
    let sy = config.diff_scale();
    let mut big_x = 16.0;
    let tail = loop {
        if alpha == 2.0 {
            big_x = 40.0;
            break 0.0;
        }
        if let Some(v) = tail_integral_series(alpha, big_x) {
            break v;
        }
        big_x *= 2.0;
        if big_x > 1e6 {
            return Err(Error::Quadrature("tail expansion did not converge".into()));
        }
    };
    let mut points = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    points.retain(|&p| p < big_x);
    points.push(big_x);
    let head = integrate_with_breaks(|x: f64| x * std_pdf(alpha, x), &points, Tolerance::new(1e-15, 1e-14));
    let rest = big_x * std_sf(alpha, big_x) + tail;
    Ok(2.0 * sy * (head.value + rest))
}

/// `∫_X^∞ P(S > x) dx` from the term-wise integrated tail expansion.
fn tail_integral_series(alpha: f64, x: f64) -> Option<f64> {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=80usize {
        let kf = k as f64;
        let mag = (ln_gamma(kf * alpha) - ln_gamma(kf + 1.0) + (1.0 - kf * alpha) * lx).exp() / (kf * alpha - 1.0);
        if mag > prev && k > 2 {
            return None;
        }
        prev = mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (0.5 * kf * PI * alpha).sin() * mag;
        if k > 1 && mag < 1e-17 * sum.abs() {
            return Some(sum / PI);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DivergentPower,
    DivergentLog,
    SaturatingPower,
    SaturatingGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub saturation_level: Option<f64>,
    /// `k_α · 2ct / a`, the coefficient of `L^{-α}` in `P(|X(2t)| > L)/a`; absent for α = 2.
    pub leading_constant: Option<f64>,
}

impl RegimeReport {
    /// Leading large-L behaviour of `V`: the divergent term for α ≤ 1, the
    /// saturation gap `V - κ_sat` for 1 < α < 2, zero for α = 2.
    pub fn leading_term(&self, alpha: f64, l: f64) -> f64 {
        let k = self.leading_constant.unwrap_or(0.0);
        match self.regime {
            Regime::DivergentPower => k * l.powf(1.0 - alpha) / (1.0 - alpha),
            Regime::DivergentLog => k * l.ln(),
            Regime::SaturatingPower => -k * l.powf(1.0 - alpha) / (alpha - 1.0),
            Regime::SaturatingGaussian => 0.0,
        }
    }
}

pub fn classify_regime(config: &SystemConfig) -> Result<RegimeReport> {
    if config.t <= 0.0 {
        return Err(invalid("regime classification needs t > 0"));
    }
    let alpha = config.alpha();
    let regime = if alpha < 1.0 {
        Regime::DivergentPower
    } else if alpha == 1.0 {
        Regime::DivergentLog
    } else if alpha < 2.0 {
        Regime::SaturatingPower
    } else {
        Regime::SaturatingGaussian
    };
    let saturation_level = if alpha > 1.0 { Some(saturation_level(config)?) } else { None };
    let leading_constant = if alpha < 2.0 {
        Some(tail_constant(alpha) * 2.0 * config.c() * config.t / config.a)
    } else {
        None
    };
    Ok(RegimeReport {
        regime,
        saturation_level,
        leading_constant,
    })
}

/// Limit variance `f(s) = (4s/(aπ)) ∫_0^∞ sin²(u/2)/u² (1 - e^{-2c(u/s)^α}) du`.
pub fn f_limit_variance(config: &SystemConfig, s: f64, tol: f64) -> Result<Estimate> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(invalid(format!("s must be nonnegative and finite, got {s}")));
    }
    if s == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let alpha = config.alpha();
    let two_c = 2.0 * config.c();
    let pref = 4.0 * s / (config.a * PI);
    let amp = |u: f64| -(-two_c * (u / s).powf(alpha)).exp_m1();
    let est = sin2_transform(amp, s * two_c.powf(-1.0 / alpha), tol / pref);
    Ok(est.scale(pref))
}

/// Barbour–Hall sandwich for the total variation distance to `Poisson(λ)`.
///
/// `lower = min(1, 1/λ)(λ - V)/32`, `upper = (1 - e^{-λ})(λ - V)/λ`.
pub fn poisson_tv_bounds(lambda: f64, v: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if v > lambda * (1.0 + 1e-12) || v < 0.0 {
        return Err(Error::Inconsistent(format!(
            "variance {v} must lie in [0, lambda = {lambda}]"
        )));
    }
    let gap = (lambda - v).max(0.0);
    let lower = (1.0f64).min(1.0 / lambda) * gap / 32.0;
    let upper = -(-lambda).exp_m1() * gap / lambda;
    Ok((lower, upper))
}

/// Number variance of the sine-kernel process in units of the spacing,
/// `2ℓ∫_ℓ^∞ k + 2∫_0^ℓ z k` with `k(z) = sin²(πz)/(πz)²`, `ℓ = L/a`.
pub fn sine_kernel_numvar(a: f64, l: f64, tol: f64) -> Result<Estimate> {
    if !(l >= 0.0 && a > 0.0) {
        return Err(invalid("sine kernel needs a > 0 and L >= 0"));
    }
    if l == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let ell = l / a;
    // 2∫_0^ℓ sin²(πz)/(π² z) dz, panels at the integers.
    let mut points: Vec<f64> = (0..=ell.floor() as usize).map(|k| k as f64).collect();
    points.push(ell);
    points.dedup();
    let body = |z: f64| {
        if z < 1e-8 {
            z
        } else {
            let s = (PI * z).sin();
            s * s / (PI * PI * z)
        }
    };
    let inner = integrate_with_breaks(
        body,
        &points,
        Tolerance::new(0.25 * tol, 0.0).with_max_intervals(points.len() * 8 + 1000),
    )
    .scale(2.0);
    // ∫_ℓ^∞ sin²(πz)/(πz)² = 1/(2π²ℓ) - ∫_ℓ^∞ cos(2πz)/(2π²z²).
    let start = (ell - 0.25).ceil() + 0.25;
    let gap = integrate(
        |z: f64| (2.0 * PI * z).cos() / (2.0 * PI * PI * z * z),
        ell,
        start,
        Tolerance::new(1e-17, 0.0),
    );
    let osc = alternating_tail(|z: f64| (2.0 * PI * z).cos() / (2.0 * PI * PI * z * z), start, 0.5, 0.25 * tol / ell);
    let outer = Estimate::exact(1.0 / (2.0 * PI * PI * ell)) - gap - osc;
    Ok(inner + outer.scale(2.0 * ell))
}

/// Shift-fluctuation part of the count variance,
/// `Var_ε E[N | ε] = 2 Σ_{k≥1} sin²(πkℓ)/(πk)² e^{-2ct(2πk/a)^α}`.
pub fn lattice_fluctuation_variance(config: &SystemConfig, l: f64) -> f64 {
    let ell = l / config.a;
    let frac = ell - ell.floor();
    if config.t == 0.0 {
        return frac * (1.0 - frac);
    }
    if frac == 0.0 {
        return 0.0;
    }
    let alpha = config.alpha();
    let kappa = 2.0 * config.c() * config.t;
    let mut sum = 0.0;
    for k in 1..=2_000_000u64 {
        let kf = k as f64;
        let damp = (-kappa * (2.0 * PI * kf / config.a).powf(alpha)).exp();
        let s = (PI * kf * frac).sin();
        sum += s * s / (PI * PI * kf * kf) * damp;
        if damp / kf < 1e-18 {
            break;
        }
    }
    2.0 * sum
}

/// Variance of the count `N_t[0, L]` including the randomness of the shift.
pub fn count_variance(config: &SystemConfig, l: f64, tol: f64) -> Result<f64> {
    Ok(numvar(config, l, tol)?.value + lattice_fluctuation_variance(config, l))
}

/// Evaluate `numvar` on a grid of interval lengths.
pub fn numvar_curve(config: &SystemConfig, ls: &[f64], tol: f64) -> Result<NumVarCurve> {
    let points = ls
        .iter()
        .map(|&l| {
            numvar(config, l, tol).map(|v| CurvePoint {
                l,
                v: v.value,
                err: v.err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NumVarCurve {
        config: *config,
        method: Method::Quadrature,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{sici, EULER_GAMMA};

    fn cfg(alpha: f64, c: f64, a: f64, t: f64) -> SystemConfig {
        SystemConfig::new(alpha, c, a, t).unwrap()
    }

    #[test]
    fn numvar_examples() {
        assert_eq!(numvar(&cfg(1.5, 1.0, 1.0, 1.0), 0.0, 1e-9).unwrap().value, 0.0);
        let b = numvar(&cfg(2.0, 0.5, 1.0, 1.0), 2.0, 1e-10).unwrap();
        assert!((b.value - numvar_brownian_closed(1.0, 1.0, 2.0)).abs() < 1e-8, "{b:?}");
        let c = numvar(&cfg(1.0, 1.0, 1.0, 0.5), 1.0, 1e-10).unwrap();
        let expect = 0.5 + 2f64.ln() / PI;
        assert!((c.value - expect).abs() < 1e-8);
        assert!((expect - 0.720_636).abs() < 1e-6);
        let z = numvar(&cfg(1.5, 1.0, 1.0, 0.0), 3.5, 1e-9).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.note.is_some());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(numvar_brownian_closed(1.0, 1.0, 0.0), 0.0);
        assert!((numvar_brownian_closed(1.0, 1.0, 1e6) - 2.0 / PI.sqrt()).abs() < 1e-12);
        assert_eq!(numvar_brownian_closed(2.0, 1.0, 1.0), 0.5 * numvar_brownian_closed(1.0, 1.0, 1.0));
        assert_eq!(numvar_cauchy_closed(1.0, 1.0, 0.0), 0.0);
        assert!((numvar_cauchy_closed(1.0, 0.5, 1.0) - (0.5 + 2f64.ln() / PI)).abs() < 1e-15);
        assert!((numvar_alpha_zero_limit(1.0, 1.0, 1.0, 3.0) - 3.0 * (1.0 - (-2f64).exp())).abs() < 1e-15);
        assert_eq!(numvar_alpha_zero_limit(1.0, 1.0, 0.0, 3.0), 0.0);
        assert!((numvar_alpha_zero_limit(1.0, 1.0, 1e3, 3.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cauchy_small_time_tracks_sine_kernel_asymptote() {
        // With t = 1/(4π) the Cauchy curve approaches (1/π²)(ln(2πL) + 1).
        let v = numvar_cauchy_closed(1.0, 1.0 / (4.0 * PI), 100.0);
        let asym = ((2.0 * PI * 100.0).ln() + 1.0) / (PI * PI);
        assert!((v / asym - 1.0).abs() < 1e-3, "{v} vs {asym}");
    }

    #[test]
    fn saturation_examples() {
        let s = saturation_level(&cfg(2.0, 0.5, 1.0, 1.0)).unwrap();
        assert!((s - 2.0 / PI.sqrt()).abs() < 1e-14);
        let s15 = saturation_level(&cfg(1.5, 1.0, 1.0, 1.0)).unwrap();
        let oracle = 2.0 / PI * 2f64.powf(2.0 / 3.0) * gamma(1.0 / 3.0);
        assert!((s15 - oracle).abs() < 1e-13 && (s15 - 2.707).abs() < 1e-3);
        let half = saturation_level(&cfg(1.5, 1.0, 2.0, 1.0)).unwrap();
        assert!((half - 0.5 * s15).abs() < 1e-14);
        assert!(matches!(saturation_level(&cfg(1.0, 1.0, 1.0, 1.0)), Err(Error::Diverges(_))));
        for (alpha, c, t) in [(2.0, 0.5, 1.0), (1.5, 1.0, 1.0), (1.2, 2.0, 3.0), (1.05, 1.0, 1.0)] {
            let c = cfg(alpha, c, 1.0, t);
            let g = saturation_level(&c).unwrap();
            let i = saturation_level_integral(&c).unwrap();
            assert!((g - i).abs() < 1e-6, "alpha {alpha}: {g} vs {i}");
        }
        assert!(saturation_level_integral(&cfg(0.7, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn saturation_regularized_fourier_oracle() {
        // κ_sat = (2/(aπ)) ∫_0^∞ (1 - e^{-2ct φ^α}) / φ² dφ, a = 1.
        for (alpha, c, t) in [(1.5, 1.0, 1.0), (1.2, 2.0, 3.0)] {
            let k = 2.0 * c * t;
            let head = integrate(|p: f64| -(-k * p.powf(alpha)).exp_m1() / (p * p), 0.0, 1.0, Tolerance::new(1e-14, 1e-14));
            let tail = crate::quad::integrate_to_infinity(|p: f64| -(-k * p.powf(alpha)).exp_m1() / (p * p), 1.0, Tolerance::new(1e-14, 1e-14));
            let v = 2.0 / PI * (head.value + tail.value);
            let g = saturation_level(&cfg(alpha, c, 1.0, t)).unwrap();
            assert!((v - g).abs() < 1e-8, "{v} vs {g}");
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&cfg(0.5, 1.0, 1.0, 1.0)).unwrap().regime, Regime::DivergentPower);
        assert_eq!(classify_regime(&cfg(1.0, 1.0, 1.0, 1.0)).unwrap().regime, Regime::DivergentLog);
        let r = classify_regime(&cfg(1.5, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::SaturatingPower);
        assert!((r.saturation_level.unwrap() - 2.707).abs() < 1e-3);
        let g = classify_regime(&cfg(2.0, 0.5, 1.0, 1.0)).unwrap();
        assert_eq!(g.regime, Regime::SaturatingGaussian);
        assert!(g.leading_constant.is_none());
    }

    #[test]
    fn f_examples() {
        let tol = 1e-10;
        assert_eq!(f_limit_variance(&cfg(1.5, 1.0, 1.0, 1.0), 0.0, tol).unwrap().value, 0.0);
        let b = f_limit_variance(&cfg(2.0, 0.5, 1.0, 7.0), 2.0, tol).unwrap();
        assert!((b.value - numvar_brownian_closed(1.0, 1.0, 2.0)).abs() < 1e-8);
        let c = f_limit_variance(&cfg(1.0, 1.0, 1.0, 7.0), 1.0, tol).unwrap();
        assert!((c.value - numvar_cauchy_closed(1.0, 1.0, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn tv_bound_examples() {
        assert_eq!(poisson_tv_bounds(3.0, 3.0).unwrap(), (0.0, 0.0));
        let (lo, hi) = poisson_tv_bounds(1.0, 0.0).unwrap();
        assert!((lo - 1.0 / 32.0).abs() < 1e-16 && (hi - (1.0 - (-1f64).exp())).abs() < 1e-16);
        let (lo, hi) = poisson_tv_bounds(2.0, 1.0).unwrap();
        assert!((lo - 2.0 / 128.0).abs() < 1e-16);
        assert!((hi - (1.0 - (-2f64).exp()) * 2.0 / 4.0).abs() < 1e-16);
        assert!(matches!(poisson_tv_bounds(2.0, 2.5), Err(Error::Inconsistent(_))));
    }

    /// Closed form of the sine-kernel number variance through Si and Ci.
    fn sine_oracle(ell: f64) -> f64 {
        let x = 2.0 * PI * ell;
        let (si, ci) = sici(x);
        (x.ln() + EULER_GAMMA + 1.0 - x.cos() - ci) / (PI * PI) + ell * (1.0 - 2.0 / PI * si)
    }

    #[test]
    fn sine_kernel_matches_sici_oracle() {
        for &l in &[0.3, 1.0, 2.5, 10.0, 123.4, 1000.0] {
            let v = sine_kernel_numvar(1.0, l, 1e-11).unwrap();
            assert!((v.value - sine_oracle(l)).abs() < 1e-9, "L={l}: {} vs {}", v.value, sine_oracle(l));
        }
        assert_eq!(sine_kernel_numvar(1.0, 0.0, 1e-9).unwrap().value, 0.0);
        let v = sine_kernel_numvar(1.0, 1e3, 1e-10).unwrap().value;
        let asym = ((2.0 * PI * 1e3).ln() + EULER_GAMMA + 1.0) / (PI * PI);
        assert!((v / asym - 1.0).abs() < 0.01);
    }

    #[test]
    fn lattice_term_limits() {
        let c0 = cfg(1.5, 1.0, 1.0, 0.0);
        assert!((lattice_fluctuation_variance(&c0, 2.3) - 0.3 * 0.7).abs() < 1e-12);
        let c = cfg(1.5, 1.0, 1.0, 1e-12);
        assert!((lattice_fluctuation_variance(&c, 2.3) - 0.21).abs() < 1e-5);
        assert_eq!(lattice_fluctuation_variance(&cfg(1.5, 1.0, 1.0, 1.0), 3.0), 0.0);
    }
}
