use lowlying::exactpoly::{factorial, neg_one_pow, rat, Rational};
use lowlying::sop::{
    class_canonical, class_canonical_bruteforce, class_sums, compositions, eta, exp_neg_coeff, h_partial_sums, j_sets,
    soshnikov_coeff, symmetric_transform_check, tuple_feasible, verify_h_vanishes, verify_lemmas, verify_single_simp,
    vertex_witness, SystemOfParameters, DEFAULT_ENUM_CAP,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn system(nmax: usize) -> impl Strategy<Value = SystemOfParameters> {
    (1usize..=nmax)
        .prop_flat_map(|n| {
            let comps = compositions(n);
            (proptest::sample::select(comps), proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n))
        })
        .prop_map(|(l, e)| SystemOfParameters::new(l, &e).unwrap())
}

/// A system with an admissible `a ≤ ⌈n/2⌉`.
fn system_with_a(nmax: usize) -> impl Strategy<Value = (SystemOfParameters, usize)> {
    system(nmax).prop_flat_map(|s| {
        let top = s.n().div_ceil(2);
        (Just(s), 0..=top)
    })
}

fn tuple(nmax: usize, tmax: usize) -> impl Strategy<Value = (usize, Vec<u32>)> {
    (2usize..=nmax, 1usize..=tmax)
        .prop_flat_map(|(n, t)| (Just(n), proptest::collection::vec(1u32..(1 << n), t)))
}

fn relabel(subsets: &[u32], perm: &[usize]) -> Vec<u32> {
    subsets
        .iter()
        .map(|s| (0..perm.len()).filter(|b| s >> b & 1 == 1).fold(0u32, |acc, b| acc | 1 << perm[b]))
        .collect()
}

/// Coefficients of `1/(1 + u)` and `log(1 + u)` with `u = e^z − 1`, by direct
/// power-series arithmetic.
fn series_oracle(kmax: usize) -> (Vec<Rational>, Vec<Rational>) {
    let u: Vec<Rational> = (0..=kmax)
        .map(|k| if k == 0 { Rational::zero() } else { Rational::new(1.into(), factorial(k as u64)) })
        .collect();
    let mul = |a: &[Rational], b: &[Rational]| -> Vec<Rational> {
        let mut c = vec![Rational::zero(); kmax + 1];
        for i in 0..=kmax {
            for j in 0..=(kmax - i) {
                c[i + j] += &a[i] * &b[j];
            }
        }
        c
    };
    let mut recip = vec![Rational::zero(); kmax + 1];
    let mut log = vec![Rational::zero(); kmax + 1];
    let mut power = {
        let mut one = vec![Rational::zero(); kmax + 1];
        one[0] = Rational::one();
        one
    };
    for m in 0..=kmax {
        for k in 0..=kmax {
            recip[k] += neg_one_pow(m as i64) * &power[k];
            if m >= 1 {
                log[k] += neg_one_pow(m as i64 + 1) * &power[k] / Rational::from_integer((m as i64).into());
            }
        }
        power = mul(&power, &u);
    }
    (recip, log)
}

#[test]
fn generating_identities_to_twelve() {
    let (recip, log) = series_oracle(12);
    for k in 1..=12 {
        assert_eq!(exp_neg_coeff(k), recip[k], "k={k}");
        assert_eq!(soshnikov_coeff(k), log[k], "k={k}");
        assert_eq!(soshnikov_coeff(k), if k == 1 { Rational::one() } else { Rational::zero() });
        assert_eq!(exp_neg_coeff(k), neg_one_pow(k as i64) / Rational::from_integer(factorial(k as u64)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn j_sets_satisfy_sign_condition((s, a) in system_with_a(9)) {
        lowlying::sop::check_invariants(&s, a).unwrap();
        for j in j_sets(&s, a) {
            for idx in 1..=s.n() {
                let inside = j.set >> (idx - 1) & 1 == 1;
                let prod = eta(&s, j.ell, idx).unwrap() * s.epsilon(idx);
                prop_assert_eq!(prod == j.zeta, inside);
            }
        }
    }

    #[test]
    fn j_sets_are_unique((s, a) in system_with_a(9)) {
        let js = j_sets(&s, a);
        for (x, y) in js.iter().zip(js.iter().skip(1)) {
            prop_assert!(x.ell < y.ell);
        }
        for x in &js {
            for y in &js {
                if x.ell != y.ell {
                    prop_assert_ne!(x.set, y.set);
                }
            }
        }
    }

    #[test]
    fn canonical_matches_bruteforce((n, xs) in tuple(6, 3), (m, ys) in tuple(6, 3)) {
        let same_fast = class_canonical(n, &xs) == class_canonical(m, &ys);
        let same_slow = n == m && class_canonical_bruteforce(n, &xs) == class_canonical_bruteforce(m, &ys);
        prop_assert_eq!(same_fast, same_slow);
    }

    #[test]
    fn canonical_is_an_orbit_invariant((n, xs) in tuple(8, 3), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut moved = relabel(&xs, &perm);
        moved.shuffle(&mut rng);
        let c = class_canonical(n, &xs);
        prop_assert_eq!(&class_canonical(n, &moved), &c);
        prop_assert_eq!(class_canonical(n, &c.subsets), c);
    }

    #[test]
    fn elimination_agrees_with_witnesses((n, xs) in tuple(7, 3), a_raw in 1usize..4, pts in proptest::collection::vec(proptest::collection::vec(0u32..=64, 7), 32)) {
        let a = a_raw.min(n.div_ceil(2)).min(n - 1);
        let fm = tuple_feasible(&xs, n, a).unwrap();
        if vertex_witness(&xs, n, a) {
            prop_assert!(fm);
        }
        // Random rational points in the box: any strict witness forces feasibility.
        let b = rat(1, (n - a) as i64);
        for p in &pts {
            let y: Vec<Rational> = p[..n].iter().map(|&k| &b * rat(k as i64, 64)).collect();
            let total: Rational = y.iter().sum();
            let ok = xs.iter().all(|s| {
                let inner: Rational = (0..n).filter(|j| s >> j & 1 == 1).map(|j| y[j].clone()).sum();
                total > Rational::one() + inner * rat(2, 1)
            });
            if ok {
                prop_assert!(fm, "point {:?} is a witness", p);
            }
        }
    }

    #[test]
    fn single_simp_holds(n in 1usize..=11, f_raw in 0usize..11) {
        let f = f_raw % n;
        prop_assert!(verify_single_simp(n, f));
    }

    #[test]
    fn h_sum_vanishes(f in 1usize..=10, g_raw in 0usize..=10) {
        let g = g_raw % (f + 1);
        prop_assert!(verify_h_vanishes(f, g));
        if g >= 1 && g < f {
            let want = neg_one_pow(f as i64) / Rational::from_integer(factorial(g as u64) * factorial((f - g) as u64));
            for h in h_partial_sums(f, g) {
                prop_assert_eq!(&h, &want);
            }
        }
    }

    #[test]
    fn symmetric_transform(n in 0usize..=12, p in -20i64..=20, q in 21i64..=40) {
        prop_assume!(p != 0);
        prop_assert!(symmetric_transform_check(n, &rat(p, q)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn class_sums_independent_of_shards(n in 2usize..=5, a_raw in 1usize..=3, shards in 2usize..=6) {
        let a = a_raw.min(n.div_ceil(2)).min(n - 1);
        let one = class_sums(n, a, 2, 1, DEFAULT_ENUM_CAP).unwrap();
        let many = class_sums(n, a, 2, shards, DEFAULT_ENUM_CAP).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn lemma_suite_passes(n in 2usize..=6, a_raw in 1usize..=3) {
        let a = a_raw.min(n.div_ceil(2)).min(n - 1);
        let r = verify_lemmas(n, a, 3, 2, DEFAULT_ENUM_CAP).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}

#[test]
fn enumeration_cap_is_a_resource_error() {
    assert!(matches!(class_sums(9, 2, 1, 1, DEFAULT_ENUM_CAP), Err(lowlying::Error::Resource(_))));
}
