//! Compactly supported piecewise polynomials with `BigRational` coefficients.
//!
//! Pieces are half-open: piece `i` lives on `[b_i, b_{i+1})`. At the final
//! right endpoint [`PiecewisePoly::evaluate`] returns the left limit. Every
//! constructor canonicalizes, so two constructions of the same function
//! compare equal with `==`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub type Rational = BigRational;

/// `n/d` as a `Rational`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"p/q"` or `"p"`. Decimal literals are rejected so that exact
/// parameters never silently pass through a float.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(Error::Parse(format!(
            "'{t}' is not an exact rational; write it as p/q (e.g. 3/5)"
        )));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in '{t}'")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in '{t}'")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in '{t}'")));
    }
    Ok(Rational::new(n, d))
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64`. Handles numerators and denominators far outside the `f64`
/// range by shifting both before dividing.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// Binomial coefficient, zero when `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Dense polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let mut c = Rational::zero();
            if let Some(a) = self.coeffs.get(i) {
                c += a;
            }
            if let Some(b) = other.coeffs.get(i) {
                c += b;
            }
            out.push(c);
        }
        Poly::new(out)
    }

    pub fn add_assign(&mut self, other: &Poly) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `x^k p(x)`.
    pub fn shift_degree(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        Poly::new(out)
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / int(i as i64 + 1));
        }
        Poly::new(out)
    }

    /// `p(x + c)` by repeated synthetic division (Taylor shift).
    pub fn taylor_shift(&self, c: &Rational) -> Poly {
        if c.is_zero() || self.coeffs.len() <= 1 {
            return self.clone();
        }
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &a[j + 1] * c;
                a[j] += t;
            }
        }
        Poly::new(a)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }
}

/// Bivariate polynomial `sum c[i][j] x^i t^j`, used only inside convolution.
struct BiPoly {
    c: Vec<Vec<Rational>>,
}

impl BiPoly {
    /// Antiderivative in `t` of `p(t) q(x - t)`.
    fn conv_kernel(p: &Poly, q: &Poly) -> BiPoly {
        let dp = p.coeffs.len();
        let dq = q.coeffs.len();
        // c[i][s] with i the power of x and s the power of t, before integration.
        let mut c = vec![vec![Rational::zero(); dp + dq]; dq.max(1)];
        for (k, qk) in q.coeffs.iter().enumerate() {
            if qk.is_zero() {
                continue;
            }
            for j in 0..=k {
                let mut w = qk * Rational::from_integer(binomial(k as i64, j as i64));
                if j % 2 == 1 {
                    w = -w;
                }
                let i = k - j;
                for (r, pr) in p.coeffs.iter().enumerate() {
                    if pr.is_zero() {
                        continue;
                    }
                    c[i][j + r] += &w * pr;
                }
            }
        }
        for row in c.iter_mut() {
            let mut out = Vec::with_capacity(row.len() + 1);
            out.push(Rational::zero());
            for (s, v) in row.iter().enumerate() {
                out.push(v / int(s as i64 + 1));
            }
            *row = out;
        }
        BiPoly { c }
    }

    /// Substitute `t = c` (a constant).
    fn at_const(&self, t: &Rational) -> Poly {
        let mut out = Vec::with_capacity(self.c.len());
        for row in &self.c {
            let mut acc = Rational::zero();
            for v in row.iter().rev() {
                acc = acc * t + v;
            }
            out.push(acc);
        }
        Poly::new(out)
    }

    /// Substitute `t = x - c`.
    fn at_shift(&self, c: &Rational) -> Poly {
        // Powers of (x - c) built incrementally.
        let base = Poly::new(vec![-c.clone(), Rational::one()]);
        let maxj = self.c.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut pows = Vec::with_capacity(maxj);
        let mut cur = Poly::constant(Rational::one());
        for _ in 0..maxj {
            pows.push(cur.clone());
            cur = cur.mul(&base);
        }
        let mut out = Poly::zero();
        for (i, row) in self.c.iter().enumerate() {
            let mut acc = Poly::zero();
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    acc.add_assign(&pows[j].scale(v));
                }
            }
            out.add_assign(&acc.shift_degree(i));
        }
        out
    }
}

enum Limit {
    /// `t = c`
    Const(Rational),
    /// `t = x - c`
    Shift(Rational),
}

/// Compactly supported piecewise polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiecewisePoly {
    breakpoints: Vec<Rational>,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    pub fn zero() -> Self {
        PiecewisePoly::default()
    }

    /// Validating constructor. `pieces[i]` holds ascending coefficients on
    /// `[breakpoints[i], breakpoints[i+1])`.
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Vec<Rational>>) -> Result<Self> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::Domain(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        Ok(Self::from_parts(
            breakpoints,
            pieces.into_iter().map(Poly::new).collect(),
        ))
    }

    /// Trusted constructor for internal use; canonicalizes.
    pub(crate) fn from_parts(breakpoints: Vec<Rational>, pieces: Vec<Poly>) -> Self {
        let mut p = PiecewisePoly { breakpoints, pieces };
        p.canonicalize();
        p
    }

    /// `poly` on `[lo, hi)`, zero elsewhere.
    pub fn single(lo: Rational, hi: Rational, poly: Poly) -> Self {
        assert!(lo < hi, "empty interval");
        Self::from_parts(vec![lo, hi], vec![poly])
    }

    /// Indicator of `[lo, hi)`.
    pub fn indicator(lo: Rational, hi: Rational) -> Self {
        Self::single(lo, hi, Poly::constant(Rational::one()))
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `(lo, hi)` of the support hull, `None` for the zero function.
    pub fn support(&self) -> Option<(&Rational, &Rational)> {
        Some((self.breakpoints.first()?, self.breakpoints.last()?))
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    fn canonicalize(&mut self) {
        let mut bps: Vec<Rational> = Vec::with_capacity(self.breakpoints.len());
        let mut pcs: Vec<Poly> = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            if pcs.last() == Some(p) {
                *bps.last_mut().unwrap() = self.breakpoints[i + 1].clone();
                continue;
            }
            if bps.is_empty() {
                bps.push(self.breakpoints[i].clone());
            }
            pcs.push(p.clone());
            bps.push(self.breakpoints[i + 1].clone());
        }
        while pcs.first().is_some_and(Poly::is_zero) {
            pcs.remove(0);
            bps.remove(0);
        }
        while pcs.last().is_some_and(Poly::is_zero) {
            pcs.pop();
            bps.pop();
        }
        if pcs.is_empty() {
            bps.clear();
        }
        self.breakpoints = bps;
        self.pieces = pcs;
    }

    /// Index of the piece containing `x`, with the left-limit rule at the
    /// final endpoint.
    fn locate(&self, x: &Rational) -> Option<usize> {
        let (lo, hi) = self.support()?;
        if x < lo || x > hi {
            return None;
        }
        if x == hi {
            return Some(self.pieces.len() - 1);
        }
        // Largest i with b_i <= x.
        let i = self.breakpoints.partition_point(|b| b <= x) - 1;
        Some(i)
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        match self.locate(x) {
            Some(i) => self.pieces[i].eval(x),
            None => Rational::zero(),
        }
    }

    /// Float evaluation by Horner on the piece that contains `x`.
    pub fn evaluate_f64(&self, x: f64) -> f64 {
        let Some((lo, hi)) = self.support() else {
            return 0.0;
        };
        let (lo, hi) = (to_f64(lo), to_f64(hi));
        if !(lo..=hi).contains(&x) {
            return 0.0;
        }
        let i = self
            .breakpoints
            .partition_point(|b| to_f64(b) <= x)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        self.pieces[i].eval_f64(x)
    }

    /// Polynomials of `self` on each interval of the refinement `bps`, which
    /// must contain every breakpoint of `self` lying inside `[bps[0], bps[last]]`.
    fn refine(&self, bps: &[Rational]) -> Vec<Poly> {
        let mut out = Vec::with_capacity(bps.len().saturating_sub(1));
        let mut k = 0usize;
        for w in bps.windows(2) {
            let x = &w[0];
            while k + 1 < self.breakpoints.len() && &self.breakpoints[k + 1] <= x {
                k += 1;
            }
            let inside = !self.pieces.is_empty()
                && &self.breakpoints[0] <= x
                && k < self.pieces.len()
                && x < &self.breakpoints[k + 1];
            out.push(if inside {
                self.pieces[k].clone()
            } else {
                Poly::zero()
            });
        }
        out
    }

    fn merged_breakpoints(&self, other: &Self) -> Vec<Rational> {
        let mut bps: Vec<Rational> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .cloned()
            .collect();
        bps.sort();
        bps.dedup();
        bps
    }

    pub fn add(&self, other: &Self) -> Self {
        let bps = self.merged_breakpoints(other);
        if bps.len() < 2 {
            return Self::zero();
        }
        let a = self.refine(&bps);
        let b = other.refine(&bps);
        let pieces = a.iter().zip(&b).map(|(p, q)| p.add(q)).collect();
        Self::from_parts(bps, pieces)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_parts(
            self.breakpoints.clone(),
            self.pieces.iter().map(|p| p.scale(c)).collect(),
        )
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &Self) -> Self {
        let (Some((a0, a1)), Some((b0, b1))) = (self.support(), other.support()) else {
            return Self::zero();
        };
        let lo = a0.max(b0).clone();
        let hi = a1.min(b1).clone();
        if lo >= hi {
            return Self::zero();
        }
        let bps: Vec<Rational> = self
            .merged_breakpoints(other)
            .into_iter()
            .filter(|b| b >= &lo && b <= &hi)
            .collect();
        let a = self.refine(&bps);
        let b = other.refine(&bps);
        let pieces = a.iter().zip(&b).map(|(p, q)| p.mul(q)).collect();
        Self::from_parts(bps, pieces)
    }

    /// `x^k p(x)`.
    pub fn multiply_by_monomial(&self, k: usize) -> Self {
        Self::from_parts(
            self.breakpoints.clone(),
            self.pieces.iter().map(|p| p.shift_degree(k)).collect(),
        )
    }

    /// `x -> p(-x)`.
    pub fn reflect(&self) -> Self {
        let bps = self.breakpoints.iter().rev().map(|b| -b.clone()).collect();
        let pieces = self.pieces.iter().rev().map(Poly::reflect).collect();
        Self::from_parts(bps, pieces)
    }

    /// `x -> p(x - c)`.
    pub fn translate(&self, c: &Rational) -> Self {
        let bps = self.breakpoints.iter().map(|b| b + c).collect();
        let neg = -c.clone();
        let pieces = self.pieces.iter().map(|p| p.taylor_shift(&neg)).collect();
        Self::from_parts(bps, pieces)
    }

    /// `p * 1_[lo, hi)`.
    pub fn restrict(&self, lo: &Rational, hi: &Rational) -> Self {
        if lo >= hi || self.is_zero() {
            return Self::zero();
        }
        self.multiply(&Self::indicator(lo.clone(), hi.clone()))
    }

    /// Exact `∫_lo^hi p`. Reversed bounds flip the sign.
    pub fn definite_integral(&self, lo: &Rational, hi: &Rational) -> Rational {
        if lo > hi {
            return -self.definite_integral(hi, lo);
        }
        let mut acc = Rational::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let a = (&self.breakpoints[i]).max(lo);
            let b = (&self.breakpoints[i + 1]).min(hi);
            if a < b {
                let ip = p.integral();
                acc += ip.eval(b) - ip.eval(a);
            }
        }
        acc
    }

    pub fn total_integral(&self) -> Rational {
        match self.support() {
            Some((lo, hi)) => self.definite_integral(&lo.clone(), &hi.clone()),
            None => Rational::zero(),
        }
    }

    /// `x -> ∫_{-∞}^x p`.
    pub fn antiderivative(&self) -> Cumulative {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut run = Rational::zero();
        for (i, p) in self.pieces.iter().enumerate() {
            let ip = p.integral();
            let a = &self.breakpoints[i];
            let b = &self.breakpoints[i + 1];
            let offset = &run - ip.eval(a);
            pieces.push(ip.add(&Poly::constant(offset)));
            run += ip.eval(b) - ip.eval(a);
        }
        Cumulative {
            body: Self::from_parts(self.breakpoints.clone(), pieces),
            right: self.breakpoints.last().cloned().unwrap_or_else(Rational::zero),
            total: run,
        }
    }

    /// Exact convolution `∫ p(t) q(x - t) dt`.
    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut bps: Vec<Rational> = Vec::new();
        for a in &self.breakpoints {
            for b in &other.breakpoints {
                bps.push(a + b);
            }
        }
        bps.sort();
        bps.dedup();
        let mut acc = vec![Poly::zero(); bps.len() - 1];
        let mut deposit = |lo: &Rational, hi: &Rational, poly: Poly| {
            if lo >= hi || poly.is_zero() {
                return;
            }
            let s = bps.partition_point(|b| b < lo);
            let e = bps.partition_point(|b| b < hi);
            for slot in &mut acc[s..e] {
                slot.add_assign(&poly);
            }
        };
        for (i, p) in self.pieces.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (a0, a1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            for (j, q) in other.pieces.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let (b0, b1) = (&other.breakpoints[j], &other.breakpoints[j + 1]);
                let kern = BiPoly::conv_kernel(p, q);
                let eval = |l: &Limit| match l {
                    Limit::Const(c) => kern.at_const(c),
                    Limit::Shift(c) => kern.at_shift(c),
                };
                let piece = |lower: Limit, upper: Limit| eval(&upper).add(&eval(&lower).scale(&-Rational::one()));
                let x0 = a0 + b0;
                let x3 = a1 + b1;
                let p1 = a1 + b0;
                let p2 = a0 + b1;
                let (m1, m2) = if p1 <= p2 { (p1.clone(), p2.clone()) } else { (p2.clone(), p1.clone()) };
                deposit(&x0, &m1, piece(Limit::Const(a0.clone()), Limit::Shift(b0.clone())));
                if m1 < m2 {
                    let mid = if p1 <= p2 {
                        piece(Limit::Const(a0.clone()), Limit::Const(a1.clone()))
                    } else {
                        piece(Limit::Shift(b1.clone()), Limit::Shift(b0.clone()))
                    };
                    deposit(&m1, &m2, mid);
                }
                deposit(&m2, &x3, piece(Limit::Shift(b1.clone()), Limit::Const(a1.clone())));
            }
        }
        Self::from_parts(bps, acc)
    }

    /// `k`-fold self-convolution; `k = 0` has no function representative and
    /// is rejected.
    pub fn convolution_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain(
                "zero-fold convolution is a point mass, not a piecewise polynomial".into(),
            ));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.convolve(self);
        }
        Ok(acc)
    }
}

/// Cumulative integral `x -> ∫_{-∞}^x p`: equal to `body` inside the support
/// of `p` and to `total` from the right edge onwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cumulative {
    pub body: PiecewisePoly,
    pub right: Rational,
    pub total: Rational,
}

impl Cumulative {
    pub fn evaluate(&self, x: &Rational) -> Rational {
        if x >= &self.right {
            self.total.clone()
        } else {
            self.body.evaluate(x)
        }
    }

    /// The cumulative function restricted to `[lo, hi)` as a piecewise polynomial.
    pub fn window(&self, lo: &Rational, hi: &Rational) -> PiecewisePoly {
        if lo >= hi {
            return PiecewisePoly::zero();
        }
        let mut out = self.body.restrict(lo, hi);
        if &self.right < hi && !self.total.is_zero() {
            let start = (&self.right).max(lo).clone();
            out = out.add(&PiecewisePoly::single(
                start,
                hi.clone(),
                Poly::constant(self.total.clone()),
            ));
        }
        out
    }
}

impl fmt::Display for PiecewisePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            let cs: Vec<String> = p.coeffs.iter().map(format_rational).collect();
            writeln!(
                f,
                "[{}, {}): [{}]",
                format_rational(&self.breakpoints[i]),
                format_rational(&self.breakpoints[i + 1]),
                cs.join(", ")
            )?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PiecewiseWire {
    breakpoints: Vec<String>,
    pieces: Vec<Vec<String>>,
}

impl Serialize for PiecewisePoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PiecewiseWire {
            breakpoints: self.breakpoints.iter().map(format_rational).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.coeffs.iter().map(format_rational).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewisePoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = PiecewiseWire::deserialize(d)?;
        let parse = |s: &String| parse_rational(s).map_err(D::Error::custom);
        let bps = w.breakpoints.iter().map(parse).collect::<std::result::Result<Vec<_>, _>>()?;
        let pieces = w
            .pieces
            .iter()
            .map(|p| p.iter().map(parse).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        PiecewisePoly::new(bps, pieces).map_err(D::Error::custom)
    }
}

/// Sign helper for `(-1)^k`.
pub fn neg_one_pow(k: i64) -> Rational {
    if k.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(sigma: Rational) -> PiecewisePoly {
        let inv = Rational::one() / &sigma;
        let inv2 = &inv * &inv;
        PiecewisePoly::from_parts(
            vec![-sigma.clone(), Rational::zero(), sigma],
            vec![
                Poly::new(vec![inv.clone(), inv2.clone()]),
                Poly::new(vec![inv, -inv2]),
            ],
        )
    }

    #[test]
    fn triangle_values() {
        let t = triangle(rat(1, 2));
        assert_eq!(t.evaluate(&int(0)), int(2));
        assert_eq!(t.evaluate(&rat(1, 4)), int(1));
        assert_eq!(t.evaluate(&int(3)), int(0));
        assert_eq!(t.evaluate(&rat(1, 2)), int(0));
    }

    #[test]
    fn box_convolves_to_triangle() {
        let b = PiecewisePoly::indicator(rat(-1, 2), rat(1, 2));
        assert_eq!(b.convolve(&b), triangle(int(1)));
    }

    #[test]
    fn additive_inverse_is_zero() {
        let t = triangle(rat(1, 3));
        assert!(t.add(&t.scale(&int(-1))).is_zero());
    }

    #[test]
    fn products() {
        let b = PiecewisePoly::indicator(int(0), int(1));
        assert_eq!(b.multiply(&b), b);
        let t = triangle(int(1));
        assert_eq!(t.multiply(&t).evaluate(&int(0)), int(1));
    }

    #[test]
    fn cubic_bspline_edge_mass() {
        for s in [rat(1, 2), rat(3, 5), int(1)] {
            let t = triangle(s.clone());
            let c = t.convolve(&t);
            let two_s = &s * int(2);
            assert_eq!(c.definite_integral(&s, &two_s), rat(1, 24));
        }
    }

    #[test]
    fn variance_integral() {
        let t = triangle(rat(1, 2));
        let sq = t.multiply(&t);
        let right = sq.restrict(&int(0), &int(1)).multiply_by_monomial(1);
        let abs_weighted = right.add(&right.reflect());
        assert_eq!(abs_weighted.definite_integral(&rat(-1, 2), &rat(1, 2)), rat(1, 6));
    }

    #[test]
    fn integrals() {
        let t = triangle(int(1));
        assert_eq!(t.definite_integral(&int(-1), &int(1)), int(1));
        assert_eq!(t.definite_integral(&rat(1, 3), &rat(1, 3)), int(0));
        assert_eq!(t.restrict(&int(0), &int(1)).total_integral(), rat(1, 2));
    }

    #[test]
    fn reflect_translate() {
        let t = triangle(rat(2, 7));
        assert_eq!(t.reflect(), t);
        let c = rat(5, 3);
        assert_eq!(t.translate(&c).translate(&-c.clone()), t);
        assert_eq!(t.translate(&c).evaluate(&c), t.evaluate(&int(0)));
    }

    #[test]
    fn antiderivative_and_window() {
        let t = triangle(int(1));
        let a = t.antiderivative();
        assert_eq!(a.evaluate(&int(-2)), int(0));
        assert_eq!(a.evaluate(&int(0)), rat(1, 2));
        assert_eq!(a.evaluate(&int(7)), int(1));
        let w = a.window(&int(0), &int(3));
        assert_eq!(w.evaluate(&int(2)), int(1));
        assert_eq!(w.evaluate(&rat(1, 2)), a.evaluate(&rat(1, 2)));
        assert_eq!(w.definite_integral(&int(1), &int(3)), int(2));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/5").unwrap(), rat(3, 5));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert!(parse_rational("0.6").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
    }

    #[test]
    fn serde_roundtrip() {
        let t = triangle(rat(3, 5));
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"5/3\""));
        let back: PiecewisePoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn big_to_f64() {
        let big = Rational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399) * 4);
        assert!((to_f64(&big) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 4), BigInt::zero());
        assert_eq!(binomial(-1, 0), BigInt::zero());
        assert_eq!(binomial(4, -1), BigInt::zero());
    }
}
