use lowlying::exactpoly::{int, rat, Rational};
use lowlying::moments::{predicted_centered_moment, MomentSpec, Sign};
use lowlying::testfn::TestFunction;
use lowlying::vanishing::{bound_sweep, vanishing_bound, VanishingQuery, PRIOR_BOUNDS};
use num_traits::Zero;
use proptest::prelude::*;

/// Even `n` and `σ ≤ 2/n`; each property picks `r` past the threshold.
fn window() -> impl Strategy<Value = (usize, Rational)> {
    (prop::sample::select(vec![2usize, 4, 6]), 1i64..=12, 1i64..=12).prop_filter_map("sigma <= 2/n", |(n, p, q)| {
        let s = rat(p, q);
        (s <= rat(2, n as i64)).then_some((n, s))
    })
}

fn first_valid_r(s: &Rational) -> u64 {
    // r − 1/σ − 1/2 > 0
    let need = Rational::from_integer(1.into()) / s + rat(1, 2);
    need.floor().to_integer().try_into().map(|x: u64| x + 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bound_is_moment_over_threshold_power((n, s) in window(), extra in 0u64..20, minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let r = first_valid_r(&s) + extra;
        let b = vanishing_bound(&VanishingQuery { r, n, sigma: s.clone(), sign }).unwrap();
        let moment = predicted_centered_moment(&MomentSpec::minimal(TestFunction::fejer(s.clone()).unwrap(), n, sign).unwrap()).unwrap();
        let threshold = int(r as i64) - Rational::from_integer(1.into()) / &s - rat(1, 2);
        prop_assert!(b > Rational::zero());
        prop_assert_eq!(b, moment / num_traits::pow(threshold, n));
    }

    #[test]
    fn bound_decreases_in_r((n, s) in window(), extra in 0u64..30) {
        let r = first_valid_r(&s) + extra;
        let q = |r| VanishingQuery { r, n, sigma: s.clone(), sign: Sign::Minus };
        prop_assert!(vanishing_bound(&q(r + 1)).unwrap() < vanishing_bound(&q(r)).unwrap());
    }

    #[test]
    fn nonpositive_threshold_is_rejected((n, s) in window()) {
        let r = first_valid_r(&s) - 1;
        let q = VanishingQuery { r, n, sigma: s, sign: Sign::Minus };
        prop_assert!(vanishing_bound(&q).is_err());
    }

    #[test]
    fn sweep_best_is_the_minimum(r in 5u64..12) {
        let sigmas: Vec<Rational> = (1..=6).map(|k| rat(k, 6)).collect();
        let t = bound_sweep(r, &[2, 4, 6], &sigmas, Sign::Minus);
        let vals: Vec<Rational> = [2usize, 4, 6]
            .iter()
            .flat_map(|&n| sigmas.iter().map(move |s| (n, s.clone())))
            .filter_map(|(n, s)| vanishing_bound(&VanishingQuery { r, n, sigma: s, sign: Sign::Minus }).ok())
            .collect();
        let min = vals.iter().min().unwrap();
        let best = t.best().unwrap();
        prop_assert_eq!(best.bound.as_deref().unwrap(), lowlying::exactpoly::format_rational(min));
    }
}

#[test]
fn order_five_beats_prior_bounds() {
    let b = vanishing_bound(&VanishingQuery { r: 5, n: 4, sigma: rat(1, 2), sign: Sign::Minus }).unwrap();
    assert_eq!(b, rat(496, 65625));
    for (_, p, q) in PRIOR_BOUNDS {
        assert!(b < rat(p, q));
    }
    assert!(rat(1, 49) < rat(1, 32));
}

#[test]
fn odd_moments_are_rejected() {
    assert!(vanishing_bound(&VanishingQuery { r: 5, n: 3, sigma: rat(1, 2), sign: Sign::Minus }).is_err());
}
