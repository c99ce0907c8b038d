//! Special functions not covered by `statrs`.

use std::f64::consts::{FRAC_PI_2, PI};

pub use statrs::function::erf::erfc;
pub use statrs::function::gamma::{gamma, ln_gamma};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Standard normal cdf.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Sine and cosine integrals `(Si(x), Ci(x))`.
///
/// Power series for `|x| <= 2`, Lentz continued fraction for the complex
/// exponential integral beyond.
pub fn sici(x: f64) -> (f64, f64) {
    const MAXIT: usize = 200;
    const FPMIN: f64 = 1e-300;
    let t = x.abs();
    if t == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let (si, ci) = if t > 2.0 {
        // Complex arithmetic as (re, im) pairs.
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let inv = |a: (f64, f64)| {
            let d = a.0 * a.0 + a.1 * a.1;
            (a.0 / d, -a.1 / d)
        };
        let mut b = (1.0, t);
        let mut c = (1.0 / FPMIN, 0.0);
        let mut d = inv(b);
        let mut h = d;
        for i in 2..=MAXIT {
            let a = -((i - 1) as f64).powi(2);
            b.0 += 2.0;
            let ad = mul((a, 0.0), d);
            d = inv((ad.0 + b.0, ad.1 + b.1));
            let ac = mul((a, 0.0), inv(c));
            c = (b.0 + ac.0, b.1 + ac.1);
            let del = mul(c, d);
            h = mul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < f64::EPSILON {
                break;
            }
        }
        h = mul((t.cos(), -t.sin()), h);
        (FRAC_PI_2 + h.1, -h.0)
    } else {
        let mut sum = 0.0;
        let mut sums = 0.0;
        let mut sumc = 0.0;
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..=MAXIT {
            fact *= t / k as f64;
            let term = fact / k as f64;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < f64::EPSILON {
                break;
            }
            odd = !odd;
        }
        (sums, sumc + t.ln() + EULER_GAMMA)
    };
    (if x < 0.0 { -si } else { si }, ci)
}

/// Kolmogorov distribution survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Theta-function form, fast for small λ.
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += (-m * m * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        return (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
