//! Symmetric α-stable laws with characteristic function `exp(-c t |θ|^α)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::special::{erfc, gamma, ln_gamma};

/// Index `alpha` and rate `c` of the driving Lévy process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub c: f64,
}

impl StableParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("c must be positive and finite, got {c}")));
        }
        Ok(Self { alpha, c })
    }

    pub fn at(self, t: f64) -> Result<StableLawAtTime> {
        StableLawAtTime::new(self, t)
    }
}

/// Law of `X(t) = sigma * S`, where `S` has characteristic function `exp(-|θ|^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLawAtTime {
    pub params: StableParams,
    pub t: f64,
    pub sigma: f64,
}

impl StableLawAtTime {
    pub fn new(params: StableParams, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("t must be nonnegative and finite, got {t}")));
        }
        let sigma = (params.c * t).powf(1.0 / params.alpha);
        Ok(Self { params, t, sigma })
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn char_fn(&self, theta: f64) -> f64 {
        (-self.t * self.params.c * theta.abs().powf(self.params.alpha)).exp()
    }

    fn require_spread(&self) -> Result<()> {
        if self.sigma > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateLaw("t = 0 gives a point mass at the origin".into()))
        }
    }

    fn require_finite(z: f64) -> Result<()> {
        if z.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("argument must be finite, got {z}")))
        }
    }

    /// Density at `z`.
    ///
    /// Closed forms for α ∈ {1, 2}; otherwise Fourier inversion while the
    /// integrand has few oscillations on its effective support, and the
    /// Zolotarev representation (or the convergent tail series) beyond.
    pub fn density(&self, z: f64) -> Result<f64> {
        self.require_spread()?;
        Self::require_finite(z)?;
        Ok(std_pdf(self.alpha(), z.abs() / self.sigma) / self.sigma)
    }

    /// Density by direct Fourier inversion, `(1/π)∫_0^∞ cos(zθ) e^{-ctθ^α} dθ`.
    pub fn density_fourier(&self, z: f64) -> Result<f64> {
        self.require_spread()?;
        Self::require_finite(z)?;
        Ok(std_pdf_fourier(self.alpha(), z.abs() / self.sigma) / self.sigma)
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        self.require_spread()?;
        Self::require_finite(z)?;
        let x = z / self.sigma;
        Ok(if x < 0.0 {
            std_sf(self.alpha(), -x)
        } else {
            1.0 - std_sf(self.alpha(), x)
        })
    }

    /// `P(X > z)`, accurate in the far right tail.
    pub fn sf(&self, z: f64) -> Result<f64> {
        self.require_spread()?;
        Self::require_finite(z)?;
        let x = z / self.sigma;
        Ok(if x < 0.0 {
            1.0 - std_sf(self.alpha(), -x)
        } else {
            std_sf(self.alpha(), x)
        })
    }

    /// `P(lo <= X <= hi)` without cancellation when both ends are in one tail.
    pub fn prob_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        if self.sigma == 0.0 {
            return Ok(if lo <= 0.0 && 0.0 <= hi { 1.0 } else { 0.0 });
        }
        let a = self.alpha();
        let (l, h) = (lo / self.sigma, hi / self.sigma);
        let p = if l >= 0.0 {
            std_sf(a, l) - std_sf(a, h)
        } else if h <= 0.0 {
            std_sf(a, -h) - std_sf(a, -l)
        } else {
            1.0 - std_sf(a, -l) - std_sf(a, h)
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// `P(|X| > x)`.
    pub fn tail_prob(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(invalid(format!("tail_prob needs a positive finite x, got {x}")));
        }
        if self.sigma == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * std_sf(self.alpha(), x / self.sigma))
    }

    /// Leading-order tail `k_α c t x^{-α}`; zero for the Gaussian case.
    pub fn tail_asymptotic(&self, x: f64) -> f64 {
        tail_constant(self.alpha()) * self.params.c * self.t * x.powf(-self.alpha())
    }

    /// `E|X|^δ` for `-1 < δ < α` (any `δ > -1` when α = 2).
    pub fn abs_moment(&self, delta: f64) -> Result<f64> {
        let alpha = self.alpha();
        let gaussian = alpha == 2.0;
        if delta <= -1.0 || (!gaussian && delta >= alpha) {
            return Err(Error::MomentDoesNotExist { order: delta, alpha });
        }
        if delta == 0.0 {
            return Ok(1.0);
        }
        let s = self.params.c * self.t;
        let base = s.powf(delta / alpha) * 2f64.powf(delta) * gamma(0.5 * (1.0 + delta)) / PI.sqrt();
        if gaussian {
            return Ok(base);
        }
        Ok(base * gamma(1.0 - delta / alpha) / gamma(1.0 - 0.5 * delta))
    }

    /// One exact draw of `X(t)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        self.sigma * sample_std(self.alpha(), rng)
    }
}

/// Tail constant `k_α` with `P(|X| > x) ~ k_α c t x^{-α}`.
pub fn tail_constant(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        return 0.0;
    }
    if alpha == 1.0 {
        return 2.0 / PI;
    }
    2.0 / PI * gamma(alpha) * (0.5 * PI * alpha).sin()
}

/// Chambers–Mallows–Stuck draw of the standard law.
pub fn sample_std<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return std::f64::consts::SQRT_2 * z;
    }
    let v = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break PI * (u - 0.5);
        }
    };
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * ((((1.0 - alpha) * v).cos()) / w).powf((1.0 - alpha) / alpha)
}

const ZERO_CUTOFF: f64 = 36.841_361_487_904_734; // -ln(1e-16)

/// Density of the standard law at `x >= 0`.
pub fn std_pdf(alpha: f64, x: f64) -> f64 {
    let x = x.abs();
    if alpha == 2.0 {
        return (-0.25 * x * x).exp() / (2.0 * PI.sqrt());
    }
    if alpha == 1.0 {
        return 1.0 / (PI * (1.0 + x * x));
    }
    if x == 0.0 {
        return gamma(1.0 + 1.0 / alpha) / PI;
    }
    if let Some(v) = tail_series(alpha, x, true) {
        return v;
    }
    let theta_star = ZERO_CUTOFF.powf(1.0 / alpha);
    if x * theta_star <= 20.0 * PI {
        std_pdf_fourier(alpha, x)
    } else {
        zolotarev(alpha, x, true)
    }
}

/// Survival function of the standard law at `x >= 0`.
pub fn std_sf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { 0.5 } else { 1.0 - std_sf(alpha, -x) };
    }
    if alpha == 2.0 {
        return 0.5 * erfc(0.5 * x);
    }
    if alpha == 1.0 {
        return (1.0 / x).atan() / PI;
    }
    if let Some(v) = tail_series(alpha, x, false) {
        return v;
    }
    zolotarev(alpha, x, false)
}

/// `(1/π)∫_0^∞ cos(xθ) e^{-θ^α} dθ` with panels at the half periods of the cosine.
///
/// At most 4000 panels are used, so the result is only reliable for
/// `x·θ* <= 4000π`, where `θ*^α = -ln 1e-16`.
pub fn std_pdf_fourier(alpha: f64, x: f64) -> f64 {
    let theta_star = ZERO_CUTOFF.powf(1.0 / alpha);
    let mut points = vec![0.0];
    if x > 0.0 {
        let half = PI / x;
        let n = ((theta_star / half).floor() as usize).min(4000);
        for k in 1..=n {
            points.push(k as f64 * half);
        }
    }
    // Resolve the decay scale of e^{-θ^α} near the origin.
    for &p in &[1e-6, 1e-3, 1.0] {
        if p < theta_star {
            points.push(p);
        }
    }
    points.push(theta_star);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let tol = Tolerance::new(1e-16, 1e-13).with_max_intervals(4 * points.len() + 400);
    integrate_with_breaks(|th: f64| (x * th).cos() * (-th.powf(alpha)).exp(), &points, tol).value / PI
}

/// Sum of the large-x expansion if it reaches full double precision.
///
/// The series converges for α < 1 and is asymptotic for α > 1; it is used
/// only when its terms drop below 1e-17 of the running sum before growing.
fn tail_series(alpha: f64, x: f64, density: bool) -> Option<f64> {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=60usize {
        let kf = k as f64;
        let s = (0.5 * kf * PI * alpha).sin();
        let shift = if density { 1.0 } else { 0.0 };
        let log_mag = ln_gamma(kf * alpha + shift) - ln_gamma(kf + 1.0) - (kf * alpha + shift) * lx;
        let mag = log_mag.exp();
        if mag > prev_mag && k > 2 {
            return None;
        }
        prev_mag = mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * s * mag;
        sum += term;
        if k > 1 && mag < 1e-17 * sum.abs() {
            return if sum > 0.0 { Some(sum / PI) } else { None };
        }
    }
    None
}

fn zolotarev_ln_v(alpha: f64, zeta: f64, th: f64) -> f64 {
    let c = th.cos();
    zeta * (c.ln() - (alpha * th).sin().ln()) + ((alpha - 1.0) * th).cos().ln() - c.ln()
}

/// Zolotarev single-integral representation on `(0, π/2)`.
fn zolotarev(alpha: f64, x: f64, density: bool) -> f64 {
    let zeta = alpha / (alpha - 1.0);
    let shift = zeta * x.ln();
    let lg = |th: f64| shift + zolotarev_ln_v(alpha, zeta, th);
    // Locate g = 1, where both integrands change character.
    let eps = 1e-13;
    let (mut lo, mut hi) = (eps, FRAC_PI_2 * (1.0 - eps));
    let (flo, fhi) = (lg(lo), lg(hi));
    let mut points = vec![0.0];
    if flo.is_finite() && fhi.is_finite() && flo.signum() != fhi.signum() {
        let increasing = fhi > flo;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let v = lg(mid);
            if (v > 0.0) == increasing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        // The transition can be very close to an endpoint; fan breakpoints out
        // geometrically so the adaptive rule sees it on every scale.
        let (near, sign) = if root < FRAC_PI_4 { (0.0, 1.0) } else { (FRAC_PI_2, -1.0) };
        let d = (root - near).abs();
        let mut k = 1.0 / 1024.0;
        while k < 1.0 {
            points.push(near + sign * d * k);
            k *= 2.0;
        }
        points.push(root);
        let mut step = 2.0 * d;
        while step < FRAC_PI_4 {
            points.push(near + sign * step);
            step *= 2.0;
        }
        // For α near 1 the transition width is about 1/ζ, so the root needs
        // breakpoints on both sides down to that scale.
        let finest = (1e-6 / zeta.abs()).max(1e-13 * root);
        for (dir, room) in [(-1.0, root), (1.0, FRAC_PI_2 - root)] {
            let mut off = 0.25 * room;
            while off > finest {
                points.push(root + dir * off);
                off *= 0.25;
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
    }
    points.push(FRAC_PI_2);
    let tol = Tolerance::new(1e-300, 1e-13).with_max_intervals(400 + points.len());
    if density {
        let f = |th: f64| {
            let l = lg(th);
            if !l.is_finite() || l > 700.0 {
                return 0.0;
            }
            let g = l.exp();
            g * (-g).exp()
        };
        let v = integrate_with_breaks(f, &points, tol).value;
        alpha / (PI * (alpha - 1.0).abs() * x) * v
    } else if alpha < 1.0 {
        let f = |th: f64| {
            let l = lg(th);
            if l.is_nan() {
                return 0.0;
            }
            if l > 700.0 {
                return 1.0;
            }
            -(-l.exp()).exp_m1()
        };
        integrate_with_breaks(f, &points, tol).value / PI
    } else {
        let f = |th: f64| {
            let l = lg(th);
            if !l.is_finite() {
                return if l == f64::NEG_INFINITY { 1.0 } else { 0.0 };
            }
            if l > 700.0 {
                return 0.0;
            }
            (-l.exp()).exp()
        };
        integrate_with_breaks(f, &points, tol).value / PI
    }
}
