use lowlying::exactpoly::{binomial, int, neg_one_pow, rat, to_f64, Rational};
use lowlying::moments::oracle::{oracle_numeric, Functional};
use lowlying::moments::{
    bar_x_xi_routes, check_window, gaussian_moment, i_integral, minimal_a, predicted_centered_moment, q_n_via_classes,
    r_moment, s_correction, sigma_phi_sq, valid_as, x_xi, MomentSpec, Sign,
};
use lowlying::testfn::TestFunction;
use num_traits::Zero;
use proptest::prelude::*;

/// `(σ, n)` with σ ≤ 2/n, on a grid with denominators up to 12.
fn window(nmax: usize) -> impl Strategy<Value = (Rational, usize)> {
    (2usize..=nmax, 1i64..=24, 1i64..=12).prop_filter_map("sigma <= 2/n", |(n, p, q)| {
        let s = rat(p, q);
        (s <= rat(2, n as i64)).then_some((s, n))
    })
}

fn fejer(s: &Rational) -> TestFunction {
    TestFunction::fejer(s.clone()).unwrap()
}

fn close(exact: &Rational, numeric: f64) -> bool {
    (to_f64(exact) - numeric).abs() <= 1e-7
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn correction_is_independent_of_a((s, n) in window(6)) {
        let tf = fejer(&s);
        let as_ = valid_as(&s, n);
        prop_assert!(!as_.is_empty());
        let first = s_correction(&tf, n, as_[0]).unwrap();
        for &a in &as_[1..] {
            prop_assert_eq!(&s_correction(&tf, n, a).unwrap(), &first, "a={}", a);
        }
    }

    #[test]
    fn class_expansion_equals_closed_form((s, n) in window(6)) {
        let tf = fejer(&s);
        for a in valid_as(&s, n).into_iter().filter(|&a| a >= 1) {
            prop_assert_eq!(q_n_via_classes(&tf, n, a).unwrap(), r_moment(&tf, n, a).unwrap(), "a={}", a);
        }
    }

    #[test]
    fn mock_gaussian_below_one_over_n((s, n) in window(7)) {
        prop_assume!(s < rat(1, n as i64));
        let tf = fejer(&s);
        prop_assert_eq!(minimal_a(&s, n, true).unwrap(), 0);
        prop_assert!(s_correction(&tf, n, 0).unwrap().is_zero());
        let spec = MomentSpec::minimal(tf.clone(), n, Sign::Minus).unwrap();
        prop_assert_eq!(predicted_centered_moment(&spec).unwrap(), gaussian_moment(&tf, n));
    }

    #[test]
    fn signs_average_to_gaussian((s, n) in window(6)) {
        let tf = fejer(&s);
        let plus = predicted_centered_moment(&MomentSpec::minimal(tf.clone(), n, Sign::Plus).unwrap()).unwrap();
        let minus = predicted_centered_moment(&MomentSpec::minimal(tf.clone(), n, Sign::Minus).unwrap()).unwrap();
        prop_assert_eq!(plus + minus, gaussian_moment(&tf, n) * int(2));
        if n % 2 == 1 {
            prop_assert!(gaussian_moment(&tf, n).is_zero());
        } else {
            let k = n / 2;
            let dfact: i64 = (1..n as i64).step_by(2).product();
            prop_assert_eq!(gaussian_moment(&tf, n), int(dfact) * num_traits::pow(rat(1, 3), k));
        }
    }

    #[test]
    fn window_rejects_outside((s, n) in window(6), extra in 1usize..3) {
        let too_big = n.div_ceil(2) + extra;
        prop_assert!(check_window(&s, n, too_big, true).is_err());
        prop_assert!(check_window(&(rat(2, n as i64) + rat(1, 97)), n, n.div_ceil(2), true).is_err());
    }

    #[test]
    fn i_integral_reduces_to_delta_zero((s, n) in window(5), alpha in 0usize..3, delta in 1usize..4) {
        prop_assume!(alpha + delta < n);
        let tf = fejer(&s);
        let lhs = i_integral(&tf, n, alpha, delta).unwrap();
        let mut rhs = Rational::zero();
        for j in 0..=delta {
            rhs += int(1 << (delta - j))
                * neg_one_pow(j as i64)
                * Rational::from_integer(binomial(delta as i64, j as i64))
                * i_integral(&tf, n, alpha + j, 0).unwrap();
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bar_x_routes_agree((s, n) in window(6), t in 0usize..3) {
        let tf = fejer(&s);
        prop_assume!(t < n.div_ceil(2));
        prop_assume!(check_window(&s, n, n.div_ceil(2), true).is_ok());
        let (via_x, via_sine) = bar_x_xi_routes(&tf, n, t).unwrap();
        prop_assert_eq!(via_x, via_sine);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_values_match_quadrature((s, n) in window(4)) {
        let tf = fejer(&s);
        prop_assert!(close(&sigma_phi_sq(&tf), oracle_numeric(&tf, Functional::SigmaPhiSq).unwrap()));
        // Only i <= ceil(n/2) enters a moment; R(m, m) needs T_1, whose
        // spatial integrand decays too slowly for a quick quadrature.
        for i in 1..=n.div_ceil(2) {
            let exact = r_moment(&tf, n, i).unwrap();
            let num = oracle_numeric(&tf, Functional::RMoment { m: n, i }).unwrap();
            prop_assert!(close(&exact, num), "R({n},{i}) = {} vs {num}", to_f64(&exact));
        }
        for ell in 0..=n {
            let exact = x_xi(&tf, n, ell).unwrap();
            let num = oracle_numeric(&tf, Functional::XXi { n, ell }).unwrap();
            prop_assert!(close(&exact, num), "X({n},{ell}) = {} vs {num}", to_f64(&exact));
        }
    }
}
