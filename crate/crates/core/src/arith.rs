//! Ramanujan, Gauss and Kloosterman sums, Dirichlet character tables, and
//! brute-force checks of their identities.
//!
//! Roots of unity are evaluated in `f64`; moduli stay small enough that
//! every identity checked is separated far beyond the `1e-6` tolerance.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::par;
use crate::{Error, Result};

/// Largest modulus factored by trial division.
pub const FACTOR_CAP: u64 = 1_000_000;

/// `e(x) = exp(2πix)` for `x = k/n`.
pub fn e_frac(k: i64, n: u64) -> Complex64 {
    let r = k.rem_euclid(n as i64) as f64 / n as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// Prime factorization `[(p, e)]` in increasing `p`.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 || n > FACTOR_CAP {
        return Err(Error::Domain(format!("factorize needs 1 <= n <= {FACTOR_CAP}, got {n}")));
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    Ok(out)
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.iter().fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1)))
}

pub fn mobius(n: u64) -> Result<i64> {
    let f = factorize(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

/// Number of divisors.
pub fn tau(n: u64) -> Result<u64> {
    Ok(factorize(n)?.iter().map(|&(_, e)| e as u64 + 1).product())
}

pub fn divisors(n: u64) -> Result<Vec<u64>> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n)? {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    Ok(ds)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, when `(a, m) = 1`.
pub fn mod_inverse(a: i64, m: u64) -> Option<u64> {
    let g = (a.rem_euclid(m as i64)).extended_gcd(&(m as i64));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i64) as u64)
}

/// `(x, y^∞)`: the largest divisor of `x` built from primes dividing `y`.
pub fn gcd_saturate(x: u64, y: u64) -> Result<u64> {
    if x == 0 || y == 0 {
        return Err(Error::Domain("gcd_saturate needs x, y >= 1".into()));
    }
    let (mut rest, mut out) = (x, 1);
    loop {
        let g = rest.gcd(&y);
        if g == 1 {
            return Ok(out);
        }
        rest /= g;
        out *= g;
    }
}

/// `Σ_{a mod q, (a,q)=1} e(an/q)`, rounded to the nearest integer.
pub fn ramanujan_exponential(n: i64, q: u64) -> Result<i64> {
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let s: Complex64 = (0..q).filter(|a| a.gcd(&q) == 1).map(|a| e_frac(a as i64 * n, q)).sum();
    let r = s.re.round();
    if (s.re - r).abs() > 1e-6 || s.im.abs() > 1e-6 {
        return Err(Error::Numeric(format!("exponential Ramanujan sum {s} is not an integer")));
    }
    Ok(r as i64)
}

/// `Σ_{d | (n,q)} μ(q/d) d`.
pub fn ramanujan_divisor(n: i64, q: u64) -> Result<i64> {
    let g = n.unsigned_abs().gcd(&q);
    let mut acc = 0i64;
    for d in divisors(g)? {
        acc += mobius(q / d)? * d as i64;
    }
    Ok(acc)
}

/// `μ(q/(q,n)) φ(q) / φ(q/(q,n))`.
pub fn ramanujan_von_sterneck(n: i64, q: u64) -> Result<i64> {
    let g = n.unsigned_abs().gcd(&q);
    let r = q / g;
    Ok(mobius(r)? * (euler_phi(q)? / euler_phi(r)?) as i64)
}

/// Ramanujan sum `R(n, q)`; the three evaluations must agree.
pub fn ramanujan(n: i64, q: u64) -> Result<i64> {
    let a = ramanujan_exponential(n, q)?;
    let b = ramanujan_divisor(n, q)?;
    let c = ramanujan_von_sterneck(n, q)?;
    if a != b || b != c {
        return Err(Error::InvariantViolation(format!(
            "R({n}, {q}): exponential {a}, divisor {b}, von Sterneck {c}"
        )));
    }
    Ok(b)
}

/// A Dirichlet character mod `q`. `values[a] = Some((k, ord))` means
/// `χ(a) = e(k/ord)`; `None` marks non-units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub values: Vec<Option<(u64, u64)>>,
    pub is_principal: bool,
    /// Not induced from any modulus `d | q`, `d < q`.
    pub is_primitive: bool,
}

impl DirichletCharacter {
    pub fn value(&self, a: i64) -> Complex64 {
        match self.values[a.rem_euclid(self.modulus as i64) as usize] {
            Some((k, ord)) => e_frac(k as i64, ord),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Order of the character: the lcm of the orders of its values.
    pub fn order(&self) -> u64 {
        self.values.iter().flatten().fold(1, |acc, &(_, ord)| acc.lcm(&ord))
    }

    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }
}

/// Generators of `(Z/p^e)*` with their orders, and a discrete-log table
/// mapping each unit to its exponent vector.
fn prime_power_structure(p: u64, e: u32) -> (Vec<u64>, HashMap<u64, Vec<u64>>) {
    let pe = p.pow(e);
    let mut logs = HashMap::new();
    if p == 2 {
        match e {
            1 => {
                logs.insert(1 % pe, vec![]);
                (vec![], logs)
            }
            2 => {
                logs.insert(1, vec![0]);
                logs.insert(3, vec![1]);
                (vec![2], logs)
            }
            _ => {
                // a ≡ (−1)^s 5^t mod 2^e
                let ord5 = pe / 4;
                let mut five = 1;
                for t in 0..ord5 {
                    logs.insert(five, vec![0, t]);
                    logs.insert(pe - five, vec![1, t]);
                    five = five * 5 % pe;
                }
                (vec![2, ord5], logs)
            }
        }
    } else {
        let phi = (p - 1) * p.pow(e - 1);
        let g = primitive_root_prime_power(p, e);
        let mut x = 1;
        for k in 0..phi {
            logs.insert(x, vec![k]);
            x = x * g % pe;
        }
        (vec![phi], logs)
    }
}

fn primitive_root_prime_power(p: u64, e: u32) -> u64 {
    let qs: Vec<u64> = factorize(p - 1).expect("p - 1 below cap").iter().map(|f| f.0).collect();
    let g = (2..p.max(3))
        .find(|&g| qs.iter().all(|&r| mod_pow(g, (p - 1) / r, p) != 1))
        .unwrap_or(1);
    if e >= 2 && mod_pow(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn build_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    if q == 0 {
        return Err(Error::Domain("modulus must be >= 1".into()));
    }
    let fac = factorize(q)?;
    // One generator per cyclic factor, across all prime powers.
    let mut orders = Vec::new();
    let mut comps = Vec::new();
    for &(p, e) in &fac {
        let pe = p.pow(e);
        let (ords, logs) = prime_power_structure(p, e);
        orders.extend(ords.iter().copied());
        comps.push((pe, logs));
    }
    let big_l = orders.iter().fold(1u64, |acc, o| acc.lcm(o));
    // Exponent vectors of every unit.
    let unit_logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|a| {
            if a.gcd(&q) != 1 {
                return None;
            }
            Some(comps.iter().flat_map(|(pe, logs)| logs[&(a % pe)].clone()).collect())
        })
        .collect();
    let count: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut js = Vec::with_capacity(orders.len());
        let mut r = idx;
        for &o in &orders {
            js.push(r % o);
            r /= o;
        }
        let values = unit_logs
            .iter()
            .map(|l| {
                l.as_ref().map(|l| {
                    let k = js
                        .iter()
                        .zip(l)
                        .zip(&orders)
                        .fold(0u64, |acc, ((j, x), o)| (acc + j * x % o * (big_l / o)) % big_l);
                    let g = k.gcd(&big_l);
                    (k / g, big_l / g)
                })
            })
            .collect();
        let values: Vec<Option<(u64, u64)>> = values;
        let is_primitive = primitive(q, &fac, &values);
        out.push(DirichletCharacter { modulus: q, values, is_principal: js.iter().all(|&j| j == 0), is_primitive });
    }
    Ok(out)
}

/// `χ` is induced from `q/p` iff it is trivial on the units `≡ 1 mod q/p`.
fn primitive(q: u64, fac: &[(u64, u32)], values: &[Option<(u64, u64)>]) -> bool {
    fac.iter().all(|&(p, _)| {
        let d = q / p;
        (1..q)
            .step_by(d as usize)
            .filter_map(|a| values[a as usize])
            .any(|(k, _)| k != 0)
    })
}

type CharCache = Mutex<HashMap<u64, Arc<Vec<DirichletCharacter>>>>;

fn char_cache() -> &'static CharCache {
    static CACHE: OnceLock<CharCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// All `φ(q)` characters mod `q`, principal first. Tables are cached per modulus.
pub fn enumerate_characters(q: u64) -> Result<Arc<Vec<DirichletCharacter>>> {
    if let Some(c) = char_cache().lock().expect("cache lock").get(&q) {
        return Ok(c.clone());
    }
    let built = Arc::new(build_characters(q)?);
    char_cache().lock().expect("cache lock").insert(q, built.clone());
    Ok(built)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    ExactInteger,
    FloatWithTolerance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumValue {
    pub re: f64,
    pub im: f64,
    pub exactness: Exactness,
}

impl SumValue {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `G_χ(n) = Σ_{a mod q} χ(a) e(an/q)`, without any bound check.
pub fn gauss_sum_raw(chi: &DirichletCharacter, n: i64) -> Complex64 {
    let q = chi.modulus;
    (0..q).map(|a| chi.value(a as i64) * e_frac(a as i64 * n, q)).sum()
}

/// `G_χ(n)`, with `|G_χ(n)| ≤ √q` checked for primitive `χ`. Imprimitive
/// characters can exceed it: the principal one gives Ramanujan sums up to
/// `φ(q)`, and e.g. the real non-principal character mod 8 has `|G(2)| = 4`.
pub fn gauss_sum(chi: &DirichletCharacter, n: i64) -> Result<SumValue> {
    let q = chi.modulus;
    let g = gauss_sum_raw(chi, n);
    if chi.is_primitive && g.norm() > (q as f64).sqrt() + 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "|G_chi({n})| = {} exceeds sqrt({q})",
            g.norm()
        )));
    }
    Ok(SumValue { re: g.re, im: g.im, exactness: Exactness::FloatWithTolerance })
}

/// `S(m, n; q) = Σ_{d mod q, (d,q)=1} e((md + n d̄)/q)`, checked against
/// `(m,n,q) √min(q/(m,q), q/(n,q)) τ(q)`.
pub fn kloosterman(m: i64, n: i64, q: u64) -> Result<SumValue> {
    if q == 0 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for d in 0..q {
        if let Some(inv) = mod_inverse(d as i64, q) {
            let x = (m.rem_euclid(q as i64) as u64 * d + n.rem_euclid(q as i64) as u64 * inv) % q;
            s += e_frac(x as i64, q);
        }
    }
    if s.im.abs() > 1e-9 {
        return Err(Error::Numeric(format!("Kloosterman sum S({m},{n};{q}) has imaginary part {}", s.im)));
    }
    let (mu, nu) = (m.unsigned_abs(), n.unsigned_abs());
    let g3 = mu.gcd(&nu).gcd(&q) as f64;
    let min = (q / mu.gcd(&q)).min(q / nu.gcd(&q)) as f64;
    let bound = g3 * min.sqrt() * tau(q)? as f64;
    if s.re.abs() > bound + 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "|S({m},{n};{q})| = {} exceeds {bound}",
            s.re.abs()
        )));
    }
    Ok(SumValue { re: s.re, im: 0.0, exactness: Exactness::FloatWithTolerance })
}

/// Both sides of the twisted Kloosterman factorization:
/// `S(m², NQ; Nb)` and `−(1/φ(b)) Σ_χ G_χ(m²) G_χ((Q,b^∞)) χ̄(Q/(Q,b^∞)) χ(N)`.
pub fn kloosterman_factorization_sides(big_n: u64, b: u64, q: u64, m: u64) -> Result<(f64, Complex64)> {
    if !is_prime(big_n) {
        return Err(Error::Domain(format!("N = {big_n} is not prime")));
    }
    if b == 0 || q == 0 || m == 0 {
        return Err(Error::Domain("b, Q, m must be >= 1".into()));
    }
    if b.is_multiple_of(big_n) || q.is_multiple_of(big_n) || m.is_multiple_of(big_n) {
        return Err(Error::Domain(format!("N = {big_n} must not divide b, Q or m")));
    }
    let m2 = (m * m) as i64;
    let lhs = kloosterman(m2, (big_n * q) as i64, big_n * b)?.re;
    let sat = gcd_saturate(q, b)?;
    let rest = (q / sat) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for chi in enumerate_characters(b)?.iter() {
        let g1 = gauss_sum(chi, m2)?.complex();
        let g2 = gauss_sum(chi, sat as i64)?.complex();
        acc += g1 * g2 * chi.value(rest).conj() * chi.value(big_n as i64);
    }
    let rhs = -acc / euler_phi(b)? as f64;
    Ok((lhs, rhs))
}

pub fn verify_kloosterman_factorization(big_n: u64, b: u64, q: u64, m: u64) -> Result<bool> {
    let (lhs, rhs) = kloosterman_factorization_sides(big_n, b, q, m)?;
    Ok((lhs - rhs.re).abs() < 1e-6 && rhs.im.abs() < 1e-6)
}

/// Counts for one identity sweep.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub identity: String,
    pub checked: usize,
    pub failures: Vec<String>,
    /// Cases outside the identity's hypotheses that would have failed it; reported, not counted as failures.
    pub out_of_scope: usize,
}

impl SweepReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    fn merge(identity: &str, parts: Vec<(usize, Vec<String>)>) -> SweepReport {
        let mut r = SweepReport { identity: identity.into(), ..Default::default() };
        for (c, f) in parts {
            r.checked += c;
            r.failures.extend(f);
        }
        r
    }
}

fn collect<T>(res: Result<T>, what: String, fails: &mut Vec<String>) -> Option<T> {
    match res {
        Ok(v) => Some(v),
        Err(e) => {
            fails.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Three-way Ramanujan agreement for `1 ≤ n, q ≤ max`.
pub fn ramanujan_sweep(max: u64) -> SweepReport {
    let qs: Vec<u64> = (1..=max).collect();
    let parts = par::map_slice(&qs, |&q| {
        let mut fails = Vec::new();
        for n in 1..=max as i64 {
            collect(ramanujan(n, q), format!("R({n},{q})"), &mut fails);
        }
        (max as usize, fails)
    });
    SweepReport::merge("ramanujan three-way agreement", parts)
}

/// `|G_χ(n)| ≤ √q` for primitive `χ` mod `q ≤ qmax`, `0 ≤ n ≤ nmax`,
/// and `G_{χ₀}(n) = R(n, q)`. Imprimitive characters above `√q` are counted
/// in `out_of_scope`.
pub fn gauss_sweep(qmax: u64, nmax: i64) -> SweepReport {
    let qs: Vec<u64> = (1..=qmax).collect();
    let parts = par::map_slice(&qs, |&q| {
        let mut fails = Vec::new();
        let (mut count, mut skipped) = (0, 0);
        let Some(chars) = collect(enumerate_characters(q), format!("characters mod {q}"), &mut fails) else {
            return (0, fails, 0);
        };
        for chi in chars.iter() {
            for n in 0..=nmax {
                count += 1;
                let Some(g) = collect(gauss_sum(chi, n), format!("G mod {q}, n={n}"), &mut fails) else {
                    continue;
                };
                if !chi.is_primitive && g.complex().norm() > (q as f64).sqrt() + 1e-9 {
                    skipped += 1;
                }
                if chi.is_principal {
                    match ramanujan(n, q) {
                        Ok(r) if (g.re - r as f64).abs() < 1e-6 && g.im.abs() < 1e-6 => {}
                        other => fails.push(format!("principal G mod {q}, n={n} = {g:?} vs {other:?}")),
                    }
                }
            }
        }
        (count, fails, skipped)
    });
    let skipped = parts.iter().map(|p| p.2).sum();
    let mut r = SweepReport::merge("gauss sum bound", parts.into_iter().map(|p| (p.0, p.1)).collect());
    r.out_of_scope = skipped;
    r
}

/// Kloosterman bound for `q ≤ qmax`, `0 ≤ m, n ≤ mnmax`, plus the symmetry `S(m,n) = S(n,m)`.
pub fn kloosterman_sweep(qmax: u64, mnmax: i64) -> SweepReport {
    let qs: Vec<u64> = (1..=qmax).collect();
    let parts = par::map_slice(&qs, |&q| {
        let mut fails = Vec::new();
        let mut count = 0;
        for m in 0..=mnmax {
            for n in 0..=mnmax {
                count += 1;
                let s = collect(kloosterman(m, n, q), format!("S({m},{n};{q})"), &mut fails);
                if n < m {
                    let t = kloosterman(n, m, q).ok();
                    if let (Some(s), Some(t)) = (s, t) {
                        if (s.re - t.re).abs() > 1e-9 {
                            fails.push(format!("S({m},{n};{q}) != S({n},{m};{q})"));
                        }
                    }
                }
            }
        }
        (count, fails)
    });
    SweepReport::merge("kloosterman bound", parts)
}

/// Row and column orthogonality of the character table for `q ≤ qmax`.
pub fn orthogonality_sweep(qmax: u64) -> SweepReport {
    let qs: Vec<u64> = (1..=qmax).collect();
    let parts = par::map_slice(&qs, |&q| {
        let mut fails = Vec::new();
        let Some(chars) = collect(enumerate_characters(q), format!("characters mod {q}"), &mut fails) else {
            return (0, fails);
        };
        let phi = euler_phi(q).unwrap_or(0) as f64;
        if chars.len() as f64 != phi {
            fails.push(format!("mod {q}: {} characters, phi = {phi}", chars.len()));
        }
        let units: Vec<i64> = (0..q).filter(|a| a.gcd(&q) == 1).map(|a| a as i64).collect();
        let mut count = 0;
        for (i, x) in chars.iter().enumerate() {
            for (j, y) in chars.iter().enumerate() {
                count += 1;
                let s: Complex64 = units.iter().map(|&a| x.value(a) * y.value(a).conj()).sum();
                let want = if i == j { phi } else { 0.0 };
                if (s - want).norm() > 1e-9 {
                    fails.push(format!("row orthogonality mod {q} ({i},{j}) = {s}"));
                }
            }
        }
        for &a in &units {
            for &b in &units {
                count += 1;
                let s: Complex64 = chars.iter().map(|c| c.value(a) * c.value(b).conj()).sum();
                let want = if a == b { phi } else { 0.0 };
                if (s - want).norm() > 1e-9 {
                    fails.push(format!("column orthogonality mod {q} ({a},{b}) = {s}"));
                }
            }
        }
        (count, fails)
    });
    SweepReport::merge("character orthogonality", parts)
}

/// Every admissible `(N, b, Q, m)` with `N ∈ ns`, `b ≤ bmax`, `Q ≤ qmax`, `m ≤ mmax`.
pub fn factorization_sweep(ns: &[u64], bmax: u64, qmax: u64, mmax: u64) -> SweepReport {
    let cases: Vec<(u64, u64)> = ns
        .iter()
        .flat_map(|&n| (1..=bmax).filter(move |b| b % n != 0).map(move |b| (n, b)))
        .collect();
    let parts = par::map_slice(&cases, |&(n, b)| {
        let mut fails = Vec::new();
        let mut count = 0;
        for q in (1..=qmax).filter(|q| q % n != 0) {
            for m in (1..=mmax).filter(|m| m % n != 0) {
                count += 1;
                match kloosterman_factorization_sides(n, b, q, m) {
                    Ok((l, r)) if (l - r.re).abs() < 1e-6 && r.im.abs() < 1e-6 => {}
                    Ok((l, r)) => fails.push(format!("N={n} b={b} Q={q} m={m}: {l} vs {r}")),
                    Err(e) => fails.push(format!("N={n} b={b} Q={q} m={m}: {e}")),
                }
            }
        }
        (count, fails)
    });
    SweepReport::merge("twisted kloosterman factorization", parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_functions() {
        assert_eq!(euler_phi(12).unwrap(), 4);
        assert_eq!(mobius(30).unwrap(), -1);
        assert_eq!(mobius(12).unwrap(), 0);
        assert_eq!(tau(12).unwrap(), 6);
        assert_eq!(divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert!(factorize(0).is_err());
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
    }

    #[test]
    fn ramanujan_values() {
        for p in [2, 3, 5, 7, 11, 97] {
            assert_eq!(ramanujan(1, p).unwrap(), -1);
        }
        for q in 1..40 {
            assert_eq!(ramanujan(q as i64, q).unwrap(), euler_phi(q).unwrap() as i64);
        }
        assert_eq!(ramanujan(6, 4).unwrap(), ramanujan_exponential(6, 4).unwrap());
        assert_eq!(ramanujan(6, 4).unwrap(), -2);
    }

    #[test]
    fn character_counts() {
        assert_eq!(enumerate_characters(1).unwrap().len(), 1);
        assert_eq!(enumerate_characters(5).unwrap().len(), 4);
        let c8 = enumerate_characters(8).unwrap();
        assert_eq!(c8.len(), 4);
        assert!(c8.iter().all(DirichletCharacter::is_real));
        for q in [16, 45, 60, 98] {
            let cs = enumerate_characters(q).unwrap();
            assert_eq!(cs.len() as u64, euler_phi(q).unwrap());
            assert_eq!(cs.iter().filter(|c| c.is_principal).count(), 1);
        }
    }

    #[test]
    fn gauss_values() {
        for chi in enumerate_characters(5).unwrap().iter() {
            let g0 = gauss_sum(chi, 0).unwrap();
            let g1 = gauss_sum(chi, 1).unwrap();
            if chi.is_principal {
                assert!((g1.re + 1.0).abs() < 1e-12);
            } else {
                assert!(g0.complex().norm() < 1e-12);
                assert!((g1.complex().norm() - 5f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn imprimitive_gauss_exceeds_root_q() {
        let c8 = enumerate_characters(8).unwrap();
        let chi = c8.iter().find(|c| !c.is_principal && !c.is_primitive).unwrap();
        assert!((gauss_sum(chi, 2).unwrap().complex().norm() - 4.0).abs() < 1e-9);
        assert_eq!(enumerate_characters(5).unwrap().iter().filter(|c| c.is_primitive).count(), 3);
        assert_eq!(enumerate_characters(8).unwrap().iter().filter(|c| c.is_primitive).count(), 2);
    }

    #[test]
    fn kloosterman_values() {
        assert!((kloosterman(0, 0, 12).unwrap().re - 4.0).abs() < 1e-9);
        assert!((kloosterman(1, 1, 2).unwrap().re - 1.0).abs() < 1e-12);
        let a = kloosterman(3, 7, 31).unwrap().re;
        let b = kloosterman(7, 3, 31).unwrap().re;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn saturation() {
        assert_eq!(gcd_saturate(12, 2).unwrap(), 4);
        assert_eq!(gcd_saturate(12, 1).unwrap(), 1);
        assert_eq!(gcd_saturate(7, 7).unwrap(), 7);
        assert_eq!(gcd_saturate(360, 6).unwrap(), 72);
    }

    #[test]
    fn factorization_examples() {
        assert!(verify_kloosterman_factorization(3, 4, 5, 1).unwrap());
        assert!(verify_kloosterman_factorization(5, 6, 14, 2).unwrap());
        assert!(verify_kloosterman_factorization(3, 6, 5, 1).is_err());
        assert!(verify_kloosterman_factorization(4, 5, 7, 1).is_err());
    }
}
