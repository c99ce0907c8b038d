use std::f64::consts::PI;

use proptest::prelude::*;
use stabvar::particles::stats::ks_continuous;
use stabvar::quad::{integrate_to_infinity, integrate_with_breaks, Tolerance};
use stabvar::rng::stream;
use stabvar::stable::{std_pdf, StableParams};

const ALPHAS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

/// Asymptotic KS critical value at level 0.01/5, so that the five per-α
/// tests together keep a 1% false-failure rate: `sqrt(ln(2/0.002)/2)`.
const KS_CRIT_FAMILY: f64 = 1.858_5;

#[test]
fn density_integrates_to_one() {
    for alpha in ALPHAS {
        let head = integrate_with_breaks(|x| std_pdf(alpha, x), &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0], Tolerance::new(1e-14, 1e-13));
        let tail = integrate_to_infinity(|x| std_pdf(alpha, x), 8.0, Tolerance::new(1e-14, 1e-13));
        let total = 2.0 * (head.value + tail.value);
        assert!((total - 1.0).abs() < 1e-8, "alpha {alpha}: {total}");
    }
}

#[test]
fn closed_forms_on_a_symmetric_range() {
    let gauss = StableParams::new(2.0, 1.0).unwrap().at(1.0).unwrap();
    let cauchy = StableParams::new(1.0, 1.0).unwrap().at(1.0).unwrap();
    for k in -100..=100 {
        let z = 0.1 * k as f64;
        // Variance 2ct for α = 2, scale ct for α = 1.
        let g = (-z * z / 4.0).exp() / (4.0 * PI).sqrt();
        let c = 1.0 / (PI * (1.0 + z * z));
        assert!((gauss.density(z).unwrap() - g).abs() < 1e-8);
        assert!((cauchy.density(z).unwrap() - c).abs() < 1e-8);
        assert!((cauchy.cdf(z).unwrap() - (0.5 + z.atan() / PI)).abs() < 1e-10);
    }
}

#[test]
fn sampler_matches_cdf() {
    let n = 100_000;
    let crit = KS_CRIT_FAMILY / (n as f64).sqrt();
    for (i, alpha) in ALPHAS.into_iter().enumerate() {
        let law = StableParams::new(alpha, 0.7).unwrap().at(1.3).unwrap();
        let mut rng = stream(11, "test-sampler", i as u64);
        let mut xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        let ks = ks_continuous(&mut xs, |x| law.cdf(x).unwrap());
        assert!(ks.stat < crit, "alpha {alpha}: KS {}", ks.stat);
    }
}

#[test]
fn time_scaling_of_draws() {
    // Same stream: draws at time λt equal λ^{1/α} times draws at time t.
    let n = 100_000;
    let crit = 1.63 / (n as f64).sqrt();
    for alpha in [0.5, 1.5] {
        let lambda = 3.0;
        let base = StableParams::new(alpha, 1.0).unwrap().at(1.0).unwrap();
        let later = StableParams::new(alpha, 1.0).unwrap().at(lambda).unwrap();
        let mut a = stream(5, "test-scaling", 0);
        let mut b = stream(5, "test-scaling", 0);
        let mut scaled: Vec<f64> = (0..n).map(|_| lambda.powf(1.0 / alpha) * base.sample(&mut a)).collect();
        let direct: Vec<f64> = (0..n).map(|_| later.sample(&mut b)).collect();
        for (x, y) in scaled.iter().zip(&direct).take(100) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
        let ks = ks_continuous(&mut scaled, |x| later.cdf(x).unwrap());
        assert!(ks.stat < crit, "alpha {alpha}: KS {}", ks.stat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_symmetric_and_monotone(alpha in 0.2f64..=2.0, c in 0.1f64..3.0, t in 0.1f64..3.0, z in 0.0f64..50.0, dz in 0.001f64..5.0) {
        let law = StableParams::new(alpha, c).unwrap().at(t).unwrap();
        let f = law.cdf(z).unwrap();
        prop_assert!((f + law.cdf(-z).unwrap() - 1.0).abs() < 1e-10);
        prop_assert!(law.cdf(z + dz).unwrap() >= f - 1e-15);
        prop_assert!(law.density(z).unwrap() >= 0.0);
    }

    #[test]
    fn tail_matches_asymptote_far_out(alpha in 0.3f64..1.9) {
        let law = StableParams::new(alpha, 1.0).unwrap().at(1.0).unwrap();
        let x = 1e6;
        let exact = law.tail_prob(x).unwrap();
        prop_assert!((exact / law.tail_asymptotic(x) - 1.0).abs() < 1e-2);
    }
}
