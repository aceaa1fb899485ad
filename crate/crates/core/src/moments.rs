//! Closed-form corrections to the Gaussian moments, computed exactly.
//!
//! Every quantity reduces to integrals of convolution powers of `φ̂`:
//!
//! * `T_k(A) = ∫ φ^k(x) sin(2πAx)/(2πx) dx = ∫_0^A ψ_k`, with `ψ_k` the transform of `φ^k`;
//! * `V(m, ℓ) = ∫ Π φ̂(x_j) T_{m-ℓ}(1 + Σ|x_j|) dx`, reduced to one dimension by folding
//!   each `φ̂` onto `[0, σ]` and convolving;
//! * `X(ξ_ℓ)`, the mass above 1 of `n-ℓ` positive and `ℓ` negative half-densities.
//!
//! The oscillatory sine integral is never evaluated directly on this path.

pub mod oracle;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactpoly::{binomial, factorial, format_rational, int, neg_one_pow, PiecewisePoly, Rational};
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Which split family: `Plus` is SO(even) / root number +1, `Minus` is SO(odd) / root number −1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> Rational {
        match self {
            Sign::Plus => Rational::one(),
            Sign::Minus => -Rational::one(),
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" | "even" => Ok(Sign::Plus),
            "minus" | "-" | "odd" => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("sign must be plus or minus, got '{s}'"))),
        }
    }
}

/// Parameters of one predicted centered moment.
#[derive(Clone, Debug)]
pub struct MomentSpec {
    pub tf: TestFunction,
    pub n: usize,
    pub a: usize,
    pub sign: Sign,
    /// Accept σ exactly on a closed boundary (`σ = 1/(n−a)` or `σ = 2/n`).
    pub allow_boundary: bool,
}

fn le(x: &Rational, bound: &Rational, allow_boundary: bool) -> bool {
    if allow_boundary {
        x <= bound
    } else {
        x < bound
    }
}

fn ceil_half(n: usize) -> usize {
    n.div_ceil(2)
}

impl MomentSpec {
    /// Spec with the smallest admissible `a`.
    pub fn minimal(tf: TestFunction, n: usize, sign: Sign) -> Result<Self> {
        let a = minimal_a(tf.sigma(), n, true)?;
        let spec = MomentSpec { tf, n, a, sign, allow_boundary: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_window(self.tf.sigma(), self.n, self.a, self.allow_boundary)
    }
}

/// Validity window: `σ ≤ 2/n`, `a ≤ ⌈n/2⌉` and `σ ≤ 1/(n−a)`.
pub fn check_window(sigma: &Rational, n: usize, a: usize, allow_boundary: bool) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("moment order n must be >= 1".into()));
    }
    let two_over_n = Rational::new(BigInt::from(2), BigInt::from(n));
    if !le(sigma, &two_over_n, allow_boundary) {
        return Err(Error::Domain(format!(
            "unsupported support: sigma = {} exceeds 2/n = {}",
            format_rational(sigma),
            format_rational(&two_over_n)
        )));
    }
    if a > ceil_half(n) {
        return Err(Error::Domain(format!("a = {a} exceeds ceil(n/2) = {}", ceil_half(n))));
    }
    if a < n {
        let bound = Rational::new(BigInt::one(), BigInt::from(n - a));
        if !le(sigma, &bound, allow_boundary) {
            return Err(Error::Domain(format!(
                "sigma = {} violates sigma <= 1/(n-a) = {}",
                format_rational(sigma),
                format_rational(&bound)
            )));
        }
    }
    Ok(())
}

/// Smallest `a ≥ 0` with `σ ≤ 1/(n−a)`. `a = 0` is the mock-Gaussian regime.
pub fn minimal_a(sigma: &Rational, n: usize, allow_boundary: bool) -> Result<usize> {
    for a in 0..=ceil_half(n) {
        if check_window(sigma, n, a, allow_boundary).is_ok() {
            return Ok(a);
        }
    }
    check_window(sigma, n, ceil_half(n), allow_boundary)?;
    unreachable!("window check failed without an error")
}

/// All admissible `a` for `(σ, n)`.
pub fn valid_as(sigma: &Rational, n: usize) -> Vec<usize> {
    (0..=ceil_half(n))
        .filter(|&a| check_window(sigma, n, a, true).is_ok())
        .collect()
}

/// `σ_φ² = 2∫|y| φ̂(y)² dy`.
pub fn sigma_phi_sq(tf: &TestFunction) -> Rational {
    let sq = tf.fhat().multiply(tf.fhat());
    let Some((lo, hi)) = sq.support() else {
        return Rational::zero();
    };
    let (lo, hi) = (lo.clone(), hi.clone());
    let right = sq.restrict(&Rational::zero(), &hi).multiply_by_monomial(1);
    let left = sq.restrict(&lo, &Rational::zero()).multiply_by_monomial(1).scale(&-Rational::one());
    right.add(&left).total_integral() * int(2)
}

/// `T_k(A) = ∫_0^A ψ_k`, for `A ≥ 0`.
pub fn sine_transform(tf: &TestFunction, k: usize, a: &Rational) -> Result<Rational> {
    if a < &Rational::zero() {
        return Err(Error::Domain("sine_transform needs A >= 0".into()));
    }
    let c = tf.phi_power_cumulative(k)?;
    Ok(c.evaluate(a) - c.evaluate(&Rational::zero()))
}

/// `∫ D(s) T_k(1 + s) ds`, with `T_k` extended oddly to negative arguments.
fn integrate_against_t(tf: &TestFunction, density: &PiecewisePoly, k: usize) -> Result<Rational> {
    let Some((lo, hi)) = density.support() else {
        return Ok(Rational::zero());
    };
    let c = tf.phi_power_cumulative(k)?;
    let one = Rational::one();
    let shifted = c.window(&(lo + &one), &(hi + &one)).translate(&-one);
    let c0 = c.evaluate(&Rational::zero());
    Ok(density.multiply(&shifted).total_integral() - c0 * density.total_integral())
}

/// Density of `Σ_α |x| − Σ_δ |x|` under independent `φ̂` weights, as a
/// function (the α = δ = 0 point mass is not representable and returns `None`).
fn signed_folded_density(tf: &TestFunction, alpha: usize, delta: usize) -> Result<Option<PiecewisePoly>> {
    let pos = if alpha > 0 {
        Some(tf.half_power(alpha)?.scale(&Rational::from_integer(BigInt::from(2).pow(alpha as u32))))
    } else {
        None
    };
    let neg = if delta > 0 {
        Some(
            tf.half_power(delta)?
                .reflect()
                .scale(&Rational::from_integer(BigInt::from(2).pow(delta as u32))),
        )
    } else {
        None
    };
    Ok(match (pos, neg) {
        (None, None) => None,
        (Some(p), None) => Some(p),
        (None, Some(q)) => Some(q),
        (Some(p), Some(q)) => Some(p.convolve(&q)),
    })
}

/// `V(m, ℓ) = ∫_{[-σ,σ]^ℓ} Π φ̂(x_j) T_{m−ℓ}(1 + Σ|x_j|) dx`.
pub fn v_term(tf: &TestFunction, m: usize, ell: usize) -> Result<Rational> {
    if ell >= m {
        return Err(Error::Domain(format!("V(m, l) needs l < m, got m={m}, l={ell}")));
    }
    i_integral(tf, m, ell, 0)
}

/// `R(m, i; φ)`.
pub fn r_moment(tf: &TestFunction, m: usize, i: usize) -> Result<Rational> {
    if i < 1 || i > m {
        return Err(Error::Domain(format!("R(m, i) needs 1 <= i <= m, got m={m}, i={i}")));
    }
    let phi0_m = num_traits::pow(tf.phi_at_zero(), m);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut acc = Rational::zero();
    for ell in 0..i {
        let v = v_term(tf, m, ell)?;
        let term = v - &half * &phi0_m;
        acc += neg_one_pow(ell as i64) * Rational::from_integer(binomial(m as i64, ell as i64)) * term;
    }
    let pre = Rational::from_integer(BigInt::from(2).pow(m as u32 - 1)) * neg_one_pow(m as i64 + 1);
    Ok(pre * acc)
}

/// `S(n, a; φ) = Σ_ℓ n!/((n−2ℓ)! ℓ!) R(n−2ℓ, a−2ℓ) (σ_φ²/2)^ℓ`, `0 ≤ ℓ ≤ ⌊(a−1)/2⌋`.
pub fn s_correction(tf: &TestFunction, n: usize, a: usize) -> Result<Rational> {
    check_window(tf.sigma(), n, a, true)?;
    if a == 0 {
        return Ok(Rational::zero());
    }
    let half_var = sigma_phi_sq(tf) / int(2);
    let mut acc = Rational::zero();
    for ell in 0..=((a - 1) / 2) {
        let coef = Rational::new(
            factorial(n as u64),
            factorial((n - 2 * ell) as u64) * factorial(ell as u64),
        );
        let r = r_moment(tf, n - 2 * ell, a - 2 * ell)?;
        acc += coef * r * num_traits::pow(half_var.clone(), ell);
    }
    Ok(acc)
}

/// `(n−1)!!`.
pub fn double_factorial_odd(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n as i64 - 1;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

/// Gaussian part `1_{n even} (n−1)!! σ_φ^n`.
pub fn gaussian_moment(tf: &TestFunction, n: usize) -> Rational {
    if n % 2 == 1 {
        return Rational::zero();
    }
    Rational::from_integer(double_factorial_odd(n)) * num_traits::pow(sigma_phi_sq(tf), n / 2)
}

/// `1_{n even}(n−1)!! σ_φ^n ± S(n, a; φ)`.
pub fn predicted_centered_moment(spec: &MomentSpec) -> Result<Rational> {
    spec.validate()?;
    let s = s_correction(&spec.tf, spec.n, spec.a)?;
    Ok(gaussian_moment(&spec.tf, spec.n) + spec.sign.factor() * s)
}

/// `μ± = φ̂(0) + ½∫_{-1}^{1} φ̂`, for `σ ≤ 1`.
pub fn mean_value(tf: &TestFunction) -> Result<Rational> {
    if tf.sigma() > &Rational::one() {
        return Err(Error::Domain(format!(
            "mean_value needs sigma <= 1, got {}",
            format_rational(tf.sigma())
        )));
    }
    let f0 = tf.fhat().evaluate(&Rational::zero());
    let mass = tf.fhat().definite_integral(&int(-1), &int(1));
    Ok(f0 + mass / int(2))
}

/// `I(α, δ) = ∫ φ^{n−α−δ}(x_1) Π φ̂(x_j) sin(2πx_1(1 + Σ_α|x| − Σ_δ|x|))/(2πx_1)`.
pub fn i_integral(tf: &TestFunction, n: usize, alpha: usize, delta: usize) -> Result<Rational> {
    if alpha + delta >= n {
        return Err(Error::Domain(format!(
            "I(alpha, delta) needs alpha + delta < n, got {alpha} + {delta} >= {n}"
        )));
    }
    let k = n - alpha - delta;
    match signed_folded_density(tf, alpha, delta)? {
        None => sine_transform(tf, k, &Rational::one()),
        Some(d) => integrate_against_t(tf, &d, k),
    }
}

/// `X(ξ_ℓ) = ∫_{[0,∞)^n} Π φ̂(y_i) 1{y_1 + … + y_{n−ℓ} − y_{n−ℓ+1} − … − y_n > 1} dy`.
pub fn x_xi(tf: &TestFunction, n: usize, ell: usize) -> Result<Rational> {
    if n == 0 || ell > n {
        return Err(Error::Domain(format!("X(xi_l) needs 0 <= l <= n, n >= 1; got n={n}, l={ell}")));
    }
    let pos = if n > ell { Some(tf.half_power(n - ell)?) } else { None };
    let neg = if ell > 0 { Some(tf.half_power(ell)?.reflect()) } else { None };
    let d = match (pos, neg) {
        (Some(p), Some(q)) => p.convolve(&q),
        (Some(p), None) => p,
        (None, Some(q)) => q,
        (None, None) => unreachable!("n >= 1"),
    };
    let Some((_, hi)) = d.support() else {
        return Ok(Rational::zero());
    };
    if hi <= &Rational::one() {
        return Ok(Rational::zero());
    }
    Ok(d.definite_integral(&Rational::one(), &hi.clone()))
}

/// `Q_n = 2^{n−1}(−1)^n Σ_{ℓ<a} (−1)^ℓ C(n,ℓ) X(ξ_ℓ)`.
pub fn q_n_via_classes(tf: &TestFunction, n: usize, a: usize) -> Result<Rational> {
    check_window(tf.sigma(), n, a, true)?;
    let mut acc = Rational::zero();
    for ell in 0..a {
        acc += neg_one_pow(ell as i64)
            * Rational::from_integer(binomial(n as i64, ell as i64))
            * x_xi(tf, n, ell)?;
    }
    Ok(Rational::from_integer(BigInt::from(2).pow(n as u32 - 1)) * neg_one_pow(n as i64) * acc)
}

/// `X̄(ξ_t)` by two independent routes, which must agree exactly:
///
/// * `2^{t+1} Σ_{i=0}^{a−1−t} C(n−t, i) X(ξ_{i+t})` with `a = ⌈n/2⌉`;
/// * `φ(0)^n − 2 V(n, t)`.
pub fn bar_x_xi(tf: &TestFunction, n: usize, t: usize) -> Result<Rational> {
    let (via_x, via_sine) = bar_x_xi_routes(tf, n, t)?;
    if via_x != via_sine {
        return Err(Error::InvariantViolation(format!(
            "bar X(xi_{t}) for n={n}, {}: {} from X terms vs {} from the sine transform",
            tf.label(),
            format_rational(&via_x),
            format_rational(&via_sine)
        )));
    }
    Ok(via_x)
}

/// Both routes of [`bar_x_xi`], unchecked.
pub fn bar_x_xi_routes(tf: &TestFunction, n: usize, t: usize) -> Result<(Rational, Rational)> {
    let a = ceil_half(n);
    check_window(tf.sigma(), n, a, true)?;
    if t + 1 > a {
        return Err(Error::Domain(format!("bar X(xi_t) needs t <= ceil(n/2) - 1, got t={t}, n={n}")));
    }
    let mut sum = Rational::zero();
    for i in 0..(a - t) {
        sum += Rational::from_integer(binomial((n - t) as i64, i as i64)) * x_xi(tf, n, i + t)?;
    }
    let via_x = Rational::from_integer(BigInt::from(2).pow(t as u32 + 1)) * sum;
    let via_sine = num_traits::pow(tf.phi_at_zero(), n) - v_term(tf, n, t)? * int(2);
    Ok((via_x, via_sine))
}
