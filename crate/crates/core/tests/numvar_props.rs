use proptest::prelude::*;
use stabvar::gp::ols;
use stabvar::numvar::{numvar, numvar_tail_form, saturation_level, SystemConfig};
use stabvar::stable::StableParams;

const TOL: f64 = 1e-10;

fn v(config: &SystemConfig, l: f64) -> f64 {
    numvar(config, l, TOL).unwrap().value
}

#[test]
fn monotone_and_concave_in_l() {
    for (alpha, c, t) in [(0.5, 1.0, 1.0), (1.0, 1.0, 0.3), (1.5, 2.0, 1.0), (2.0, 0.5, 2.0)] {
        let config = SystemConfig::new(alpha, c, 1.0, t).unwrap();
        let ls: Vec<f64> = (0..=60).map(|k| 0.25 * k as f64).collect();
        let vs: Vec<f64> = ls.iter().map(|&l| v(&config, l)).collect();
        for w in vs.windows(3) {
            assert!(w[1] - w[0] >= -1e-9, "alpha {alpha}: not monotone");
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9, "alpha {alpha}: not concave");
        }
    }
}

#[test]
fn derivative_is_a_tail_probability() {
    let h = 1e-3;
    for (alpha, c, a, t) in [(0.7, 1.0, 1.0, 1.0), (1.2, 0.5, 2.0, 1.5), (2.0, 1.0, 0.5, 0.2)] {
        let config = SystemConfig::new(alpha, c, a, t).unwrap();
        let law = StableParams::new(alpha, c).unwrap().at(2.0 * t / a.powf(alpha)).unwrap();
        for l in [0.3, 1.0, 4.0] {
            let d = (v(&config, l + h) - v(&config, l - h)) / (2.0 * h);
            let p = law.tail_prob(l / a).unwrap() / a;
            assert!((d - p).abs() < 1e-6, "alpha {alpha}, L {l}: {d} vs {p}");
        }
    }
}

#[test]
fn gap_to_saturation_decays_like_l_to_one_minus_alpha() {
    let config = SystemConfig::new(1.5, 1.0, 1.0, 1.0).unwrap();
    let sat = saturation_level(&config).unwrap();
    let ls: Vec<f64> = (0..=10).map(|k| 10f64.powf(2.0 + 0.2 * k as f64)).collect();
    let xs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = ls.iter().map(|&l| (sat - v(&config, l)).ln()).collect();
    let (slope, _) = ols(&xs, &ys);
    assert!((-0.55..=-0.45).contains(&slope), "slope {slope}");
}

#[test]
fn large_time_approaches_poisson_cap() {
    let l = 3.0;
    for alpha in [0.5, 1.0, 2.0] {
        let ts = [0.1, 1.0, 10.0, 100.0, 1e4, 1e6];
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| v(&SystemConfig::new(alpha, 1.0, 1.0, t).unwrap(), l))
            .collect();
        assert!(vs.windows(2).all(|w| w[1] >= w[0] - 1e-10), "alpha {alpha}: {vs:?}");
        assert!(l - vs[vs.len() - 1] < 1e-2, "alpha {alpha}: {vs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn value_lies_between_zero_and_l_over_a(alpha in 0.2f64..=2.0, c in 0.1f64..3.0, a in 0.3f64..3.0, t in 0.0f64..5.0, l in 0.0f64..40.0) {
        let config = SystemConfig::new(alpha, c, a, t).unwrap();
        let r = numvar(&config, l, TOL).unwrap();
        prop_assert!(r.raw >= -r.err - 1e-12);
        prop_assert!(r.raw <= l / a + r.err + 1e-12);
    }

    #[test]
    fn transform_and_tail_routes_agree(alpha in 0.3f64..=2.0, c in 0.2f64..2.0, t in 0.05f64..3.0, l in 0.05f64..30.0) {
        let config = SystemConfig::new(alpha, c, 1.0, t).unwrap();
        let direct = numvar(&config, l, TOL).unwrap().value;
        let tail = numvar_tail_form(&config, l, TOL).unwrap().value;
        prop_assert!((direct - tail).abs() < 1e-8, "{} vs {}", direct, tail);
    }
}
