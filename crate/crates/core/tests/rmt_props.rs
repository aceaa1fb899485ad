use lowlying::exactpoly::{rat, to_f64, Rational};
use lowlying::rmt::{abs_eigenangles, eigenangles, sample_haar_so, sample_rng, sample_z, EnsembleSpec, FmKernel};
use lowlying::testfn::TestFunction;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn fejer(p: i64, q: i64) -> TestFunction {
    TestFunction::fejer(rat(p, q)).unwrap()
}

/// `Z = φ̂(0) + (2/M) Σ_k φ̂(k/M) tr(U^k)`, from matrix powers alone.
fn z_by_traces(tf: &TestFunction, u: &DMatrix<f64>) -> f64 {
    let m = u.nrows();
    let kmax = (tf.sigma() * Rational::from_integer(m.into())).floor().to_integer();
    let kmax: usize = kmax.try_into().unwrap();
    let mut acc = to_f64(&tf.fhat().evaluate(&rat(0, 1)));
    let mut pow = u.clone();
    for k in 1..=kmax {
        acc += 2.0 / m as f64 * to_f64(&tf.fhat().evaluate(&rat(k as i64, m as i64))) * pow.trace();
        pow = &pow * u;
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn haar_samples_are_special_orthogonal(m in 2usize..=16, seed in any::<u64>(), idx in 0u64..1000) {
        let u = sample_haar_so(m, &mut sample_rng(seed, idx)).unwrap();
        let err = (u.transpose() * &u - DMatrix::<f64>::identity(m, m)).abs().max();
        prop_assert!(err < 1e-12, "orthogonality error {err}");
        prop_assert!((u.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigenangles_are_negation_symmetric(m in 2usize..=16, seed in any::<u64>()) {
        let u = sample_haar_so(m, &mut sample_rng(seed, 0)).unwrap();
        let s = eigenangles(&u).unwrap();
        prop_assert_eq!(s.angles.len(), m);
        s.check_symmetry(1e-9).unwrap();
    }

    #[test]
    fn symmetric_part_recovers_abs_angles(m in 2usize..=16, seed in any::<u64>()) {
        let u = sample_haar_so(m, &mut sample_rng(seed, 1)).unwrap();
        let mut full: Vec<f64> = eigenangles(&u).unwrap().angles.iter().map(|t| t.abs()).collect();
        let mut half = abs_eigenangles(&u).unwrap();
        full.sort_by(f64::total_cmp);
        half.sort_by(f64::total_cmp);
        // acos loses accuracy near 0 and π, so compare cosines.
        for (a, b) in full.iter().zip(&half) {
            prop_assert!((a.cos() - b.cos()).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn z_matches_trace_formula(m in 2usize..=14, seed in any::<u64>(), p in 1i64..=6) {
        let tf = fejer(p, 6);
        let u = sample_haar_so(m, &mut sample_rng(seed, 2)).unwrap();
        let z = FmKernel::new(&tf, m).unwrap().z(&abs_eigenangles(&u).unwrap());
        prop_assert!((z - z_by_traces(&tf, &u)).abs() < 1e-9);
    }

    #[test]
    fn z_is_conjugation_invariant(m in 2usize..=12, seed in any::<u64>()) {
        let tf = fejer(3, 5);
        let u = sample_haar_so(m, &mut sample_rng(seed, 3)).unwrap();
        let v = sample_haar_so(m, &mut sample_rng(seed, 4)).unwrap();
        let w = &v * &u * v.transpose();
        let k = FmKernel::new(&tf, m).unwrap();
        let (zu, zw) = (k.z(&abs_eigenangles(&u).unwrap()), k.z(&abs_eigenangles(&w).unwrap()));
        prop_assert!((zu - zw).abs() < 1e-9, "{zu} vs {zw}");
    }

    #[test]
    fn kernel_is_even_and_periodic(m in 1usize..=40, theta in -10.0f64..10.0, p in 1i64..=6) {
        let k = FmKernel::new(&fejer(p, 6), m).unwrap();
        let v = k.value(theta);
        prop_assert!((v - k.value(-theta)).abs() < 1e-12);
        prop_assert!((v - k.value(theta + std::f64::consts::TAU)).abs() < 1e-9);
    }

    #[test]
    fn sample_streams_are_reproducible(m in 2usize..=10, seed in any::<u64>(), samples in 1usize..20) {
        let tf = fejer(1, 4);
        let spec = EnsembleSpec::new(m, samples, seed);
        let a = sample_z(&tf, &spec).unwrap();
        let b = sample_z(&tf, &spec).unwrap();
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        // A prefix run gives the same leading samples.
        let short = sample_z(&tf, &EnsembleSpec::new(m, 1, seed)).unwrap();
        prop_assert_eq!(short[0].to_bits(), a[0].to_bits());
    }
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_samples() {
    let tf = fejer(3, 5);
    let spec = EnsembleSpec::new(21, 500, 9);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_z(&tf, &spec).unwrap())
    };
    let one: Vec<u64> = run(1).iter().map(|x| x.to_bits()).collect();
    let many: Vec<u64> = run(5).iter().map(|x| x.to_bits()).collect();
    assert_eq!(one, many);
}

#[test]
fn invalid_specs_are_rejected() {
    let tf = fejer(1, 2);
    assert!(sample_z(&tf, &EnsembleSpec::new(1, 10, 0)).is_err());
    assert!(sample_z(&tf, &EnsembleSpec::new(10, 0, 0)).is_err());
    let mut spec = EnsembleSpec::new(10, 5, 0);
    spec.parity = lowlying::rmt::Parity::Odd;
    assert!(sample_z(&tf, &spec).is_err());
}
