//! Floating-point recomputation of the exact functionals by adaptive quadrature.
//!
//! Nothing here touches the convolution machinery: `T_k(A)` is integrated in
//! the spatial domain against the closed-form `φ`, and the outer integrals
//! are nested adaptive Gauss–Kronrod over `[0, σ]`.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::exactpoly::to_f64;
use crate::quad::{integrate, QuadOpts};
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Which functional to recompute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    SigmaPhiSq,
    SineTransform { k: usize, a_num: i64, a_den: i64 },
    RMoment { m: usize, i: usize },
    XXi { n: usize, ell: usize },
    IIntegral { n: usize, alpha: usize, delta: usize },
}

const TARGET: f64 = 1e-9;

fn opts(tol: f64) -> QuadOpts {
    QuadOpts { abs_tol: tol, max_panels: 400_000 }
}

pub fn oracle_numeric(tf: &TestFunction, what: Functional) -> Result<f64> {
    match what {
        Functional::SigmaPhiSq => sigma_sq(tf),
        Functional::SineTransform { k, a_num, a_den } => t_spatial(tf, k, a_num as f64 / a_den as f64),
        Functional::RMoment { m, i } => r_moment(tf, m, i),
        Functional::XXi { n, ell } => x_xi(tf, n, ell),
        Functional::IIntegral { n, alpha, delta } => {
            if alpha + delta >= n {
                return Err(Error::Domain("alpha + delta must be < n".into()));
            }
            i_integral(tf, n, alpha, delta)
        }
    }
}

fn fhat(tf: &TestFunction, y: f64) -> f64 {
    tf.fhat().evaluate_f64(y)
}

fn sigma_sq(tf: &TestFunction) -> Result<f64> {
    let s = to_f64(tf.sigma());
    let v = integrate(|y| y * fhat(tf, y).powi(2), 0.0, s, &[], opts(1e-13))?;
    Ok(4.0 * v)
}

/// `T_k(A) = ∫_0^∞ φ(x)^k sin(2πAx)/(πx) dx`, truncated where the envelope
/// `(πσx)^{-2k}` guarantees a tail below `1e-11`.
pub fn t_spatial(tf: &TestFunction, k: usize, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let s = to_f64(tf.sigma());
    let kk = k as f64;
    let env = (PI * s).powf(-2.0 * kk) / (2.0 * kk * PI * 1e-11);
    let cut = env.powf(1.0 / (2.0 * kk)).clamp(50.0, 2.0e5);
    let f = |x: f64| {
        let kern = if x.abs() < 1e-12 { 2.0 * a } else { (2.0 * PI * a * x).sin() / (PI * x) };
        tf.phi_value_numeric(x).powi(k as i32) * kern
    };
    let step = 0.5 / (a.abs() + kk * s).max(1.0);
    let nb = (cut / step) as usize;
    let breaks: Vec<f64> = (1..nb).map(|j| j as f64 * step).collect();
    integrate(f, 0.0, cut, &breaks, QuadOpts { abs_tol: 1e-11, max_panels: nb + 200_000 })
}

/// `∫_{[-σ,σ]^d} Π φ̂(x_j) g(Σ c_j |x_j|) dx` with `c_j = ±1`, by nesting.
fn nested<G: Fn(f64) -> Result<f64> + Copy>(tf: &TestFunction, signs: &[f64], partial: f64, g: G, tol: f64) -> Result<f64> {
    let Some((&c, rest)) = signs.split_first() else {
        return g(partial);
    };
    let s = to_f64(tf.sigma());
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let mut breaks = Vec::new();
    let jmax = (rest.len() + 8) as i64;
    for j in -jmax..=jmax {
        breaks.push((j as f64 * s - partial) * c);
        breaks.push((1.0 + j as f64 * s - partial) * c);
        breaks.push((-1.0 + j as f64 * s - partial) * c);
    }
    let v = integrate(
        |y| match nested(tf, rest, partial + c * y, g, tol) {
            Ok(v) => 2.0 * fhat(tf, y) * v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        s,
        &breaks,
        opts(tol),
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    v
}

fn i_integral(tf: &TestFunction, n: usize, alpha: usize, delta: usize) -> Result<f64> {
    let k = n - alpha - delta;
    let mut signs = vec![1.0; alpha];
    signs.extend(std::iter::repeat_n(-1.0, delta));
    let g = |u: f64| {
        let arg = 1.0 + u;
        let t = t_spatial(tf, k, arg.abs())?;
        Ok(if arg < 0.0 { -t } else { t })
    };
    nested(tf, &signs, 0.0, g, TARGET)
}

fn r_moment(tf: &TestFunction, m: usize, i: usize) -> Result<f64> {
    if i < 1 || i > m {
        return Err(Error::Domain("R(m, i) needs 1 <= i <= m".into()));
    }
    let phi0 = tf.phi_value_numeric(0.0).powi(m as i32);
    let mut acc = 0.0;
    for ell in 0..i {
        let v = i_integral(tf, m, ell, 0)?;
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom_f(m, ell) * (v - 0.5 * phi0);
    }
    let pre = 2f64.powi(m as i32 - 1) * if m % 2 == 1 { 1.0 } else { -1.0 };
    Ok(pre * acc)
}

fn binom_f(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `∫_{[0,σ]^n} Π φ̂ 1{Σ⁺ − Σ⁻ > 1}`; the innermost coordinate integrates
/// `φ̂` over the exact interval where the indicator holds.
fn x_xi(tf: &TestFunction, n: usize, ell: usize) -> Result<f64> {
    if n == 0 || ell > n {
        return Err(Error::Domain("X(xi_l) needs 0 <= l <= n".into()));
    }
    let signs: Vec<f64> = (0..n).map(|j| if j < n - ell { 1.0 } else { -1.0 }).collect();
    x_rec(tf, &signs, 0.0)
}

fn x_rec(tf: &TestFunction, signs: &[f64], partial: f64) -> Result<f64> {
    let s = to_f64(tf.sigma());
    if let [c] = signs {
        // c·y + partial > 1
        let (lo, hi) = if *c > 0.0 { (1.0 - partial, s) } else { (0.0, partial - 1.0) };
        let (lo, hi) = (lo.max(0.0), hi.min(s));
        if hi <= lo {
            return Ok(0.0);
        }
        return integrate(|y| fhat(tf, y), lo, hi, &[], opts(1e-13));
    }
    let (c, rest) = signs.split_first().expect("non-empty");
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let r = rest.len() as i64;
    let breaks: Vec<f64> = (-r..=r)
        .map(|j| (1.0 + j as f64 * s - partial) * c)
        .collect();
    let v = integrate(
        |y| match x_rec(tf, rest, partial + c * y) {
            Ok(v) => fhat(tf, y) * v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        s,
        &breaks,
        opts(TARGET / 10.0),
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    v
}
