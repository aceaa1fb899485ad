//! Globally adaptive Gauss–Kronrod (7/15) quadrature in `f64`.
//!
//! Only the numeric oracle and test-function evaluation use this; every
//! exact path stays in rational arithmetic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: `(estimate, error estimate)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integration settings.
#[derive(Clone, Copy, Debug)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            abs_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

/// Integrate over `[a, b]` after splitting at `breaks` (points outside are
/// ignored). Splitting at known kinks lets the Kronrod rule converge fast.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOpts) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], val: v, err: e });
    }
    let mut n = heap.len();
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Numeric("integrand returned a non-finite value".into()));
        }
        if err <= opts.abs_tol {
            break;
        }
        if n >= opts.max_panels {
            return Err(Error::Tolerance(format!(
                "error estimate {err:.3e} above {:.1e} after {n} panels",
                opts.abs_tol
            )));
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, val: v2, err: e2 });
        n += 1;
        // Re-sum occasionally to stop cancellation drift in the running error.
        if n % 256 == 0 {
            err = heap.iter().map(|p| p.err).sum();
            total = heap.iter().map(|p| p.val).sum();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &[], QuadOpts::default()).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn kink_split() {
        let v = integrate(|x: f64| x.abs(), -1.0, 2.0, &[0.0], QuadOpts::default()).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, &[], QuadOpts::default())
            .unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn budget_error() {
        let r = integrate(
            |x: f64| (1.0 / x).sin(),
            1e-9,
            1.0,
            &[],
            QuadOpts { abs_tol: 1e-15, max_panels: 20 },
        );
        assert!(matches!(r, Err(Error::Tolerance(_))));
    }
}
