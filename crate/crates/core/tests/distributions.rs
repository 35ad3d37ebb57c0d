use proptest::prelude::*;
use qlab::{Family, SpecF64};

fn spec_strategy() -> impl Strategy<Value = SpecF64> {
    prop_oneof![
        (0.1f64..10.0).prop_map(|l| SpecF64::exponential(l).unwrap()),
        (0.2f64..5.0, 0.1f64..4.0).prop_map(|(a, l)| SpecF64::gamma(a, l).unwrap()),
        (0.2f64..5.0).prop_map(|k| SpecF64::weibull(k).unwrap()),
        (0.5f64..8.0).prop_map(|g| SpecF64::pareto(g).unwrap()),
        (-3.0f64..0.0, 0.5f64..4.0).prop_map(|(a, w)| SpecF64::uniform(a, a + w).unwrap()),
        (1usize..5).prop_map(|d| SpecF64::normal(d).unwrap()),
        (0.0f64..3.0, 0.2f64..3.0, 0.5f64..3.0, 1usize..4)
            .prop_map(|(c, t, k, d)| SpecF64::exponential_power(c, t, k, d).unwrap()),
        (0.0f64..3.0, 1usize..3).prop_map(|(b, d)| SpecF64::log_polynomial(b, d as f64 + 6.0, d).unwrap()),
    ]
}

proptest! {
    #[test]
    fn json_round_trip(spec in spec_strategy()) {
        let text = spec.to_json().to_string();
        prop_assert_eq!(SpecF64::from_json_str(&text).unwrap(), spec);
    }

    #[test]
    fn sample_prefixes_are_stable(spec in spec_strategy(), seed in any::<u64>(), k in 1usize..40_000) {
        let long = spec.sample(seed, 40_000);
        let short = spec.sample(seed, k);
        prop_assert_eq!(&long[..short.len()], &short[..]);
    }

    #[test]
    fn samples_lie_in_support(spec in spec_strategy(), seed in any::<u64>()) {
        let d = spec.dimension();
        let pts = spec.sample(seed, 500);
        if d == 1 {
            let (lo, hi) = spec.support_1d();
            prop_assert!(pts.iter().all(|&x| x >= lo && x <= hi));
        }
        prop_assert!(pts.iter().all(|x| x.is_finite()));
    }
}

#[test]
fn normal_alias_is_exponential_power() {
    let n = SpecF64::from_json_str(r#"{"family":"normal","dimension":2}"#).unwrap();
    assert!(matches!(n.family(), Family::ExponentialPower { .. }));
    assert_eq!(n.family_name(), "normal");
    assert!(SpecF64::from_json_str(r#"{"family":"exponential","lambda":1,"dimension":1,"extra":3}"#).is_err());
}

#[test]
fn empirical_survival_matches_closed_form() {
    let spec = SpecF64::exponential_power(1.0, 0.5, 2.0, 3).unwrap();
    let norms = spec.sample_norms(9, 200_000);
    for x in [0.5, 1.5, 3.0, 4.5] {
        let emp = norms.iter().filter(|&&r| r > x).count() as f64 / norms.len() as f64;
        let exact = spec.survival(x).unwrap();
        let se = (exact * (1.0 - exact) / norms.len() as f64).sqrt();
        assert!((emp - exact).abs() < 5.0 * se + 1e-6, "x={x}: {emp} vs {exact}");
    }
}
