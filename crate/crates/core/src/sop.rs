//! Systems of parameters `S = (m, λ_1..λ_m, ε_1..ε_n)` and the t-class
//! coefficient sums `Σ_S T(S, C) A(S)`, by brute-force enumeration.
//!
//! Subsets of `{1..n}` are bitmasks: bit `j-1` represents element `j`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exactpoly::{binomial, factorial, format_rational, int, neg_one_pow, to_f64, Rational};
use crate::par;
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Largest `n` enumerated unless the caller raises the cap.
pub const DEFAULT_ENUM_CAP: usize = 8;

/// All compositions of `n` into positive parts, ordered by number of parts,
/// then lexicographically.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    for mask in 0u32..(1 << (n - 1)) {
        let mut parts = Vec::new();
        let mut run = 1;
        for b in 0..(n - 1) {
            if mask >> b & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        out.push(parts);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemOfParameters {
    pub lambdas: Vec<usize>,
    /// Bit `j-1` set means `ε_j = −1`.
    pub neg_mask: u32,
}

impl SystemOfParameters {
    pub fn new(lambdas: Vec<usize>, epsilons: &[i8]) -> Result<Self> {
        if lambdas.is_empty() || lambdas.contains(&0) {
            return Err(Error::Domain("lambdas must be a composition into positive parts".into()));
        }
        let n: usize = lambdas.iter().sum();
        if epsilons.len() != n {
            return Err(Error::Domain(format!("need {n} signs, got {}", epsilons.len())));
        }
        let mut neg_mask = 0u32;
        for (j, &e) in epsilons.iter().enumerate() {
            match e {
                1 => {}
                -1 => neg_mask |= 1 << j,
                _ => return Err(Error::Domain(format!("epsilon must be ±1, got {e}"))),
            }
        }
        Ok(SystemOfParameters { lambdas, neg_mask })
    }

    pub fn n(&self) -> usize {
        self.lambdas.iter().sum()
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    /// `Λ_ℓ = λ_1 + … + λ_ℓ`, `ℓ = 0..=m`.
    pub fn prefix(&self) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.lambdas.len() + 1);
        p.push(0);
        for l in &self.lambdas {
            p.push(p.last().unwrap() + l);
        }
        p
    }

    pub fn epsilon(&self, j: usize) -> i8 {
        if self.neg_mask >> (j - 1) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Bitmask of `{j : η(ℓ, j) ε_j = +1}`.
    fn positive_set(&self, big_lambda: usize) -> u32 {
        let n = self.n();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let head = if big_lambda >= 32 { u32::MAX } else { (1u32 << big_lambda) - 1 };
        // η = +1 on the head, so ηε = +1 there iff ε = +1; on the tail iff ε = −1.
        ((!self.neg_mask & head) | (self.neg_mask & !head)) & full
    }
}

/// `η(ℓ, j) = +1` iff `j ≤ λ_1 + … + λ_ℓ`.
pub fn eta(s: &SystemOfParameters, ell: usize, j: usize) -> Result<i8> {
    if ell < 1 || ell > s.m() || j < 1 || j > s.n() {
        return Err(Error::Domain(format!(
            "eta needs 1 <= l <= {} and 1 <= j <= {}, got l={ell}, j={j}",
            s.m(),
            s.n()
        )));
    }
    Ok(if j <= s.prefix()[ell] { 1 } else { -1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JSet {
    pub ell: usize,
    pub set: u32,
    pub zeta: i8,
}

/// `J_ℓ` with its sign `ζ_ℓ`, for every `ℓ` where the count condition holds.
pub fn j_sets(s: &SystemOfParameters, a: usize) -> Vec<JSet> {
    let n = s.n();
    let prefix = s.prefix();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut out = Vec::new();
    for (ell, &big_lambda) in prefix.iter().enumerate().skip(1) {
        let pos = s.positive_set(big_lambda);
        let neg = !pos & full;
        if (pos.count_ones() as usize) < a {
            out.push(JSet { ell, set: pos, zeta: 1 });
        } else if (neg.count_ones() as usize) < a {
            out.push(JSet { ell, set: neg, zeta: -1 });
        }
    }
    out
}

/// Inclusion-minimal elements of `J(S)`.
pub fn i_min(s: &SystemOfParameters, a: usize) -> Vec<JSet> {
    let js = j_sets(s, a);
    js.iter()
        .filter(|x| !js.iter().any(|y| y.set != x.set && y.set & x.set == y.set))
        .copied()
        .collect()
}

/// Block characterization of minimality: `J_ℓ ∈ I(S)` iff neither the block
/// `[Λ_{ℓ−1}+1, Λ_ℓ]` nor `[Λ_ℓ+1, Λ_{ℓ+1}]` lies inside `J_ℓ`, blocks taken cyclically.
pub fn minimal_by_blocks(s: &SystemOfParameters, j: &JSet) -> bool {
    let p = s.prefix();
    let m = s.m();
    let block = |lo: usize, hi: usize| -> u32 { (lo..hi).fold(0u32, |acc, b| acc | 1 << b) };
    let before = block(p[j.ell - 1], p[j.ell]);
    let after = if j.ell < m { block(p[j.ell], p[j.ell + 1]) } else { block(0, p[1]) };
    j.set & before != before && j.set & after != after
}

/// Checks the definitional sign condition and pairwise distinctness of `J(S)`.
pub fn check_invariants(s: &SystemOfParameters, a: usize) -> Result<()> {
    // Above ⌈n/2⌉ both signs can pass the count test and the block rule fails.
    if a > s.n().div_ceil(2) {
        return Err(Error::Domain(format!("need a <= ceil(n/2) = {}, got a={a}", s.n().div_ceil(2))));
    }
    let js = j_sets(s, a);
    for j in &js {
        for idx in 1..=s.n() {
            let prod = eta(s, j.ell, idx)? * s.epsilon(idx);
            let inside = j.set >> (idx - 1) & 1 == 1;
            if (prod == j.zeta) != inside {
                return Err(Error::InvariantViolation(format!(
                    "J_{} sign condition fails at j={idx} for {s:?}",
                    j.ell
                )));
            }
        }
    }
    let distinct: HashSet<u32> = js.iter().map(|j| j.set).collect();
    if distinct.len() != js.len() {
        return Err(Error::InvariantViolation(format!("repeated J set in {s:?}")));
    }
    if s.m() >= 2 {
        let mins: HashSet<u32> = i_min(s, a).iter().map(|j| j.set).collect();
        for j in &js {
            if mins.contains(&j.set) != minimal_by_blocks(s, j) {
                return Err(Error::InvariantViolation(format!(
                    "block characterization disagrees with minimality for J_{} in {s:?}",
                    j.ell
                )));
            }
        }
    }
    Ok(())
}

/// `A(S) = ((−1)^{m+1}/m) · n!/(λ_1!⋯λ_m!)`.
pub fn a_weight(s: &SystemOfParameters) -> Rational {
    let m = s.m();
    let den = s
        .lambdas
        .iter()
        .fold(BigInt::one(), |acc, &l| acc * factorial(l as u64))
        * BigInt::from(m);
    neg_one_pow(m as i64 + 1) * Rational::new(factorial(s.n() as u64), den)
}

/// An unordered tuple of subsets in canonical form: the orbit representative
/// under relabelling of `{1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TClass {
    pub n: usize,
    pub subsets: Vec<u32>,
}

impl TClass {
    pub fn t(&self) -> usize {
        self.subsets.len()
    }

    /// The 1-class of an `f`-element subset.
    pub fn single(n: usize, f: usize) -> TClass {
        class_canonical(n, &[(1u32 << f) - 1])
    }
}

impl fmt::Display for TClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subsets
            .iter()
            .map(|s| {
                let e: Vec<String> = (0..self.n).filter(|b| s >> b & 1 == 1).map(|b| (b + 1).to_string()).collect();
                format!("{{{}}}", e.join(","))
            })
            .collect();
        write!(f, "({})", parts.join(" "))
    }
}

fn permutations(t: usize) -> Vec<Vec<usize>> {
    if t == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(t - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, t - 1);
            out.push(q);
        }
    }
    out
}

/// Canonical form. Two tuples lie in one orbit exactly when, for some
/// ordering of the subsets, every Venn region has the same size; the
/// canonical representative uses the ordering with the smallest region-count
/// vector and assigns labels region by region.
pub fn class_canonical(n: usize, subsets: &[u32]) -> TClass {
    let t = subsets.len();
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for perm in permutations(t) {
        let mut counts = vec![0usize; 1 << t];
        for j in 0..n {
            let pat = perm
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &k)| acc | ((subsets[k] >> j & 1) as usize) << i);
            counts[pat] += 1;
        }
        let key: Vec<usize> = counts[1..].to_vec();
        if best.as_ref().is_none_or(|(b, _)| key < *b) {
            best = Some((key, perm));
        }
    }
    let (key, _) = best.expect("at least one ordering");
    let mut rep = vec![0u32; t];
    let mut label = 0usize;
    for (idx, &c) in key.iter().enumerate() {
        let pat = idx + 1;
        for _ in 0..c {
            for (i, r) in rep.iter_mut().enumerate() {
                if pat >> i & 1 == 1 {
                    *r |= 1 << label;
                }
            }
            label += 1;
        }
    }
    TClass { n, subsets: rep }
}

/// Lexicographically minimal image over all `n!` relabellings, with the
/// subsets sorted. Exponential; for cross-checking [`class_canonical`].
pub fn class_canonical_bruteforce(n: usize, subsets: &[u32]) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for perm in permutations(n) {
        let mut img: Vec<u32> = subsets
            .iter()
            .map(|s| (0..n).filter(|b| s >> b & 1 == 1).fold(0u32, |acc, b| acc | 1 << perm[b]))
            .collect();
        img.sort();
        if best.as_ref().is_none_or(|b| img < *b) {
            best = Some(img);
        }
    }
    best.unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ineq {
    coef: Vec<Rational>,
    rhs: Rational,
    strict: bool,
}

impl Ineq {
    /// Scale so the first nonzero coefficient has absolute value 1.
    fn normalized(mut self) -> Ineq {
        if let Some(lead) = self.coef.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in self.coef.iter_mut() {
                *c /= &lead;
            }
            self.rhs /= lead;
        }
        self
    }
}

/// Exact feasibility of `coef·x (<|≤) rhs` by Fourier–Motzkin elimination.
fn fourier_motzkin(mut rows: Vec<Ineq>, nvars: usize) -> bool {
    for v in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.coef[v].is_positive() {
                pos.push(r);
            } else if r.coef[v].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        let mut seen: HashSet<Ineq> = rest.iter().cloned().collect();
        for p in &pos {
            for q in &neg {
                let wp = Rational::one() / &p.coef[v];
                let wq = Rational::one() / -q.coef[v].clone();
                let coef: Vec<Rational> = p.coef.iter().zip(&q.coef).map(|(a, b)| a * &wp + b * &wq).collect();
                let row = Ineq {
                    rhs: &p.rhs * &wp + &q.rhs * &wq,
                    coef,
                    strict: p.strict || q.strict,
                }
                .normalized();
                if seen.insert(row.clone()) {
                    rest.push(row);
                }
            }
        }
        // A row with all-zero coefficients decides itself immediately.
        for r in &rest {
            if r.coef.iter().all(Zero::is_zero) && !(if r.strict { r.rhs.is_positive() } else { !r.rhs.is_negative() }) {
                return false;
            }
        }
        rows = rest;
    }
    rows.iter().all(|r| if r.strict { r.rhs.is_positive() } else { !r.rhs.is_negative() })
}

/// Whether some `y ∈ [0, 1/(n−a)]^n` has `Σy > 1 + 2Σ_{i∈I} y_i` for every `I` in the tuple.
pub fn tuple_feasible(subsets: &[u32], n: usize, a: usize) -> Result<bool> {
    if a >= n {
        return Err(Error::Domain(format!("validity needs a < n, got a={a}, n={n}")));
    }
    let t = subsets.len();
    let bound = Rational::new(BigInt::one(), BigInt::from(n - a));
    // Aggregate coordinates by Venn region: Y_p = Σ_{j in region p} y_j ∈ [0, |p|·B].
    let mut counts = vec![0usize; 1 << t];
    for j in 0..n {
        let pat = (0..t).fold(0usize, |acc, i| acc | ((subsets[i] >> j & 1) as usize) << i);
        counts[pat] += 1;
    }
    let regions: Vec<usize> = (0..1 << t).filter(|&p| counts[p] > 0).collect();
    let nv = regions.len();
    let mut rows = Vec::new();
    for (v, &p) in regions.iter().enumerate() {
        let mut up = vec![Rational::zero(); nv];
        up[v] = Rational::one();
        rows.push(Ineq { coef: up, rhs: &bound * int(counts[p] as i64), strict: false });
        let mut lo = vec![Rational::zero(); nv];
        lo[v] = -Rational::one();
        rows.push(Ineq { coef: lo, rhs: Rational::zero(), strict: false });
    }
    for i in 0..t {
        // −Σ_p (1 − 2[i ∈ p]) Y_p < −1
        let coef = regions
            .iter()
            .map(|&p| if p >> i & 1 == 1 { int(1) } else { int(-1) })
            .collect();
        rows.push(Ineq { coef, rhs: int(-1), strict: true });
    }
    Ok(fourier_motzkin(rows, nv))
}

/// Search the `2^n` box vertices for a strict witness. One-sided: `true`
/// proves feasibility, `false` proves nothing.
pub fn vertex_witness(subsets: &[u32], n: usize, a: usize) -> bool {
    let b = Rational::new(BigInt::one(), BigInt::from(n - a));
    (0u32..1 << n).any(|v| {
        let total = &b * int(v.count_ones() as i64);
        subsets.iter().all(|s| {
            let inner = &b * int((v & s).count_ones() as i64);
            total > Rational::one() + inner * int(2)
        })
    })
}

/// Accumulated `Σ_S T(S, C) A(S)`, split into the `m = 1` and `m ≥ 2` parts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassSum {
    pub m1: Rational,
    pub m_ge2: Rational,
}

impl ClassSum {
    pub fn total(&self) -> Rational {
        &self.m1 + &self.m_ge2
    }
}

/// All t-class sums for `1 ≤ t ≤ t_max`, enumerating every system of
/// parameters. Shards split the ε range; the reduction is exact, so the
/// result is independent of the shard count.
pub fn class_sums(n: usize, a: usize, t_max: usize, shards: usize, cap: usize) -> Result<BTreeMap<TClass, ClassSum>> {
    if n > cap {
        return Err(Error::Resource(format!("n = {n} exceeds the enumeration cap {cap}")));
    }
    if n == 0 || n > 31 {
        return Err(Error::Domain(format!("n must be in 1..=31, got {n}")));
    }
    let comps: Vec<(Vec<usize>, Rational)> = compositions(n)
        .into_iter()
        .map(|l| {
            let w = a_weight(&SystemOfParameters { lambdas: l.clone(), neg_mask: 0 });
            (l, w)
        })
        .collect();
    let ranges = par::shards(1usize << n, shards.max(1));
    let partials = par::map_slice(&ranges, |r| {
        let mut map: BTreeMap<TClass, ClassSum> = BTreeMap::new();
        for eps in r.clone() {
            for (l, w) in &comps {
                let s = SystemOfParameters { lambdas: l.clone(), neg_mask: eps as u32 };
                let mins: Vec<u32> = i_min(&s, a).iter().map(|j| j.set).collect();
                for t in 1..=t_max.min(mins.len()) {
                    for combo in combinations(mins.len(), t) {
                        let tuple: Vec<u32> = combo.iter().map(|&i| mins[i]).collect();
                        let cls = class_canonical(n, &tuple);
                        let e = map.entry(cls).or_default();
                        if l.len() == 1 {
                            e.m1 += w;
                        } else {
                            e.m_ge2 += w;
                        }
                    }
                }
            }
        }
        map
    });
    let mut total: BTreeMap<TClass, ClassSum> = BTreeMap::new();
    for m in partials {
        for (k, v) in m {
            let e = total.entry(k).or_default();
            e.m1 += v.m1;
            e.m_ge2 += v.m_ge2;
        }
    }
    Ok(total)
}

/// `Σ_S T(S, C) A(S)` for one class.
pub fn sum_ta(n: usize, a: usize, class: &TClass, cap: usize) -> Result<Rational> {
    let sums = class_sums(n, a, class.t(), 1, cap)?;
    Ok(sums.get(class).map(ClassSum::total).unwrap_or_else(Rational::zero))
}

fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, t, &mut Vec::new(), &mut out);
    out
}

/// `Σ_m Σ_{λ ⊨ n} ((−1)^{m+1}/m) / (λ_1!⋯λ_m!)`, the `z^n` coefficient of `log(1 + (e^z − 1))`.
pub fn soshnikov_coeff(n: usize) -> Rational {
    compositions(n)
        .iter()
        .map(|l| {
            let den = l.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x as u64)) * BigInt::from(l.len());
            neg_one_pow(l.len() as i64 + 1) * Rational::new(BigInt::one(), den)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// `Σ_m Σ_{λ ⊨ n} (−1)^m / (λ_1!⋯λ_m!)`, the `z^n` coefficient of `1/(1 + (e^z − 1))`.
pub fn exp_neg_coeff(n: usize) -> Rational {
    compositions(n)
        .iter()
        .map(|l| {
            let den = l.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x as u64));
            neg_one_pow(l.len() as i64) * Rational::new(BigInt::one(), den)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

fn binom_r(n: i64, k: i64) -> Rational {
    Rational::from_integer(binomial(n, k))
}

/// `G(n,f,c,d) = C(n,f) − C(n−c,f−c) − C(n−d,f−d) + C(n−c−d,f−c−d)`.
pub fn g_combin(n: i64, f: i64, c: i64, d: i64) -> BigInt {
    binomial(n, f) - binomial(n - c, f - c) - binomial(n - d, f - d) + binomial(n - c - d, f - c - d)
}

/// `2n!(−1)^n Σ_{c,d ≥ 0, c+d ≤ n} (−1)^{c+d+1} G(n,f,c,d) / ((n−c−d)! c! d!)`.
pub fn single_simp_lhs(n: usize, f: usize) -> Rational {
    let mut acc = Rational::zero();
    for c in 0..=n {
        for d in 0..=(n - c) {
            let g = g_combin(n as i64, f as i64, c as i64, d as i64);
            let den = factorial((n - c - d) as u64) * factorial(c as u64) * factorial(d as u64);
            acc += neg_one_pow((c + d + 1) as i64) * Rational::new(g, den);
        }
    }
    Rational::from_integer(factorial(n as u64) * 2) * neg_one_pow(n as i64) * acc
}

/// `2 C(n,f) ((−1)^{n+f+1} − 1)`.
pub fn single_simp_rhs(n: usize, f: usize) -> Rational {
    binom_r(n as i64, f as i64) * int(2) * (neg_one_pow((n + f + 1) as i64) - Rational::one())
}

pub fn verify_single_simp(n: usize, f: usize) -> bool {
    single_simp_lhs(n, f) == single_simp_rhs(n, f)
}

/// `H(f,g,μ_1,μ_d) = C(f,g) − C(f−μ_1,g−μ_1) − C(f−μ_d,g) + C(f−μ_1−μ_d,g−μ_1)`.
pub fn h_combin(f: i64, g: i64, mu1: i64, mud: i64) -> BigInt {
    binomial(f, g) - binomial(f - mu1, g - mu1) - binomial(f - mud, g) + binomial(f - mu1 - mud, g - mu1)
}

/// The four partial sums `H_1..H_4` of [`verify_h_vanishes`], one per binomial term.
pub fn h_partial_sums(f: usize, g: usize) -> [Rational; 4] {
    let (fi, gi) = (f as i64, g as i64);
    let mut out: [Rational; 4] = Default::default();
    for mu in compositions(f) {
        let d = mu.len();
        let den = mu.iter().fold(BigInt::one(), |acc, &x| acc * factorial(x as u64));
        let w = neg_one_pow(d as i64) * Rational::new(BigInt::one(), den);
        let (m1, md) = (mu[0] as i64, mu[d - 1] as i64);
        let terms = [
            binomial(fi, gi),
            binomial(fi - m1, gi - m1),
            binomial(fi - md, gi),
            binomial(fi - m1 - md, gi - m1),
        ];
        for (o, h) in out.iter_mut().zip(terms) {
            *o += &w * Rational::from_integer(h);
        }
    }
    out
}

/// `Σ_d Σ_{μ ⊨ f} ((−1)^d / (μ_1!⋯μ_d!)) H(f,g,μ_1,μ_d) = 0`.
pub fn verify_h_vanishes(f: usize, g: usize) -> bool {
    if f == 0 {
        return false;
    }
    let [h1, h2, h3, h4] = h_partial_sums(f, g);
    (h1 - h2 - h3 + h4).is_zero()
}

/// With `f(t) = Π q^{t_i}`: `Σ_i (−1)^i C(n,i) (q²/(1−q))^i (q/(1−q))^{n−i} = q^n`.
pub fn symmetric_transform_check(n: usize, q: &Rational) -> Result<bool> {
    if q.is_zero() || q.abs() >= Rational::one() {
        return Err(Error::Domain(format!("need 0 < |q| < 1, got {}", format_rational(q))));
    }
    let one_m = Rational::one() - q;
    let x = q * q / &one_m;
    let y = q / &one_m;
    let mut acc = Rational::zero();
    for i in 0..=n {
        acc += neg_one_pow(i as i64)
            * binom_r(n as i64, i as i64)
            * num_traits::pow(x.clone(), i)
            * num_traits::pow(y.clone(), n - i);
    }
    Ok(acc == num_traits::pow(q.clone(), n))
}

/// Counts for the generating-function and binomial identities.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Composition-sum coefficients for `1 ≤ k ≤ kmax`, and the binomial
/// identities for `f ≤ fmax`:
///
/// * Soshnikov: `[z^k] log(e^z) = 1{k = 1}`; reciprocal: `[z^k] e^{−z} = (−1)^k/k!`;
/// * `single_simp` for `0 ≤ f < n ≤ fmax + 1`;
/// * the `H` sum vanishes for `1 ≤ f ≤ fmax`, `0 ≤ g ≤ f`;
/// * each partial sum `H_i` equals `(−1)^f/(g!(f−g)!)` for `1 ≤ g ≤ f−1`.
pub fn verify_identities(kmax: usize, fmax: usize) -> IdentityReport {
    let mut r = IdentityReport::default();
    for k in 1..=kmax {
        let want = if k == 1 { Rational::one() } else { Rational::zero() };
        r.check(soshnikov_coeff(k) == want, || format!("soshnikov coefficient k={k}"));
        let want = neg_one_pow(k as i64) / Rational::from_integer(factorial(k as u64));
        r.check(exp_neg_coeff(k) == want, || format!("exp(-z) coefficient k={k}"));
    }
    for n in 1..=fmax + 1 {
        for f in 0..n {
            r.check(verify_single_simp(n, f), || format!("single_simp n={n} f={f}"));
        }
    }
    for f in 1..=fmax {
        for g in 0..=f {
            r.check(verify_h_vanishes(f, g), || format!("H sum f={f} g={g}"));
            if g >= 1 && g < f {
                let want = neg_one_pow(f as i64)
                    / Rational::from_integer(factorial(g as u64) * factorial((f - g) as u64));
                for (i, h) in h_partial_sums(f, g).iter().enumerate() {
                    r.check(*h == want, || format!("H_{} f={f} g={g} = {}", i + 1, format_rational(h)));
                }
            }
        }
    }
    r
}

/// Outcome of the lemma suite for one `(n, a)`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub n: usize,
    pub a: usize,
    pub t_max: usize,
    /// `(f, brute force, closed form)` for `1 ≤ f ≤ a−1`.
    pub one_class: Vec<(usize, String, String)>,
    /// `(f, brute-force m ≥ 2 part, 2C(n,f)((−1)^{n+f+1} − 1), G-sum form)`.
    pub one_class_m_ge2: Vec<(usize, String, String, String)>,
    /// Brute-force `f = 0` coefficient, reported without a verdict.
    pub f0_value: String,
    pub valid_multi_classes: usize,
    pub invalid_multi_classes: usize,
    /// Valid classes with `t ≥ 2` whose sum is nonzero.
    pub counterexamples: Vec<(String, String)>,
    /// Classes where the vertex search found a witness that elimination rejected.
    pub feasibility_conflicts: Vec<String>,
    pub pass: bool,
}

/// Brute-force check of the 1-class coefficient and t ≥ 2 cancellation.
pub fn verify_lemmas(n: usize, a: usize, t_max: usize, shards: usize, cap: usize) -> Result<LemmaReport> {
    if a < 1 || a > n.div_ceil(2) || a >= n {
        return Err(Error::Domain(format!("need 1 <= a <= ceil(n/2) and a < n, got n={n}, a={a}")));
    }
    let sums = class_sums(n, a, t_max, shards, cap)?;
    let mut pass = true;
    let mut one_class = Vec::new();
    let mut one_class_m_ge2 = Vec::new();
    for f in 1..a {
        let c = TClass::single(n, f);
        let got = sums.get(&c).cloned().unwrap_or_default();
        let want = neg_one_pow((n + f + 1) as i64) * binom_r(n as i64, f as i64) * int(2);
        pass &= got.total() == want;
        one_class.push((f, format_rational(&got.total()), format_rational(&want)));
        let closed = single_simp_rhs(n, f);
        let gsum = single_simp_lhs(n, f);
        pass &= got.m_ge2 == closed && gsum == closed;
        one_class_m_ge2.push((f, format_rational(&got.m_ge2), format_rational(&closed), format_rational(&gsum)));
    }
    let f0 = sums.get(&TClass::single(n, 0)).map(ClassSum::total).unwrap_or_default();
    let mut valid = 0;
    let mut invalid = 0;
    let mut counterexamples = Vec::new();
    let mut conflicts = Vec::new();
    for (cls, v) in &sums {
        if cls.t() < 2 {
            continue;
        }
        let feasible = tuple_feasible(&cls.subsets, n, a)?;
        if !feasible && vertex_witness(&cls.subsets, n, a) {
            conflicts.push(cls.to_string());
            pass = false;
        }
        if feasible {
            valid += 1;
            if !v.total().is_zero() {
                counterexamples.push((cls.to_string(), format_rational(&v.total())));
                pass = false;
            }
        } else {
            invalid += 1;
        }
    }
    Ok(LemmaReport {
        n,
        a,
        t_max,
        one_class,
        one_class_m_ge2,
        f0_value: format_rational(&f0),
        valid_multi_classes: valid,
        invalid_multi_classes: invalid,
        counterexamples,
        feasibility_conflicts: conflicts,
        pass,
    })
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

const MC_BLOCK: usize = 4096;

/// `Q_n = 2^{n−2} ∫_{[0,∞)^n} Π φ̂(y_i) K(y) dy` with the kernel `K` summed
/// literally over every system of parameters:
/// `K = Σ_S ((−1)^{m+1}/m)(n!/Πλ!) Π_ℓ 1{|Σ_j η(ℓ,j) ε_j y_j| ≤ 1}`.
/// `y` is drawn uniformly from `[0, σ]^n`.
pub fn oracle_qn_mc(tf: &TestFunction, n: usize, a: usize, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(1..=4).contains(&n) {
        return Err(Error::Domain(format!("oracle_qn_mc supports 1 <= n <= 4, got {n}")));
    }
    crate::moments::check_window(tf.sigma(), n, a, true)?;
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    // Each term: coefficient and the sign patterns (bit j set = −1) of its m linear forms.
    let mut terms: Vec<(f64, Vec<u32>)> = Vec::new();
    for l in compositions(n) {
        let w = to_f64(&a_weight(&SystemOfParameters { lambdas: l.clone(), neg_mask: 0 }));
        for eps in 0u32..(1 << n) {
            let s = SystemOfParameters { lambdas: l.clone(), neg_mask: eps };
            let p = s.prefix();
            let full = (1u32 << n) - 1;
            let forms = (1..=s.m()).map(|ell| !s.positive_set(p[ell]) & full).collect();
            terms.push((w, forms));
        }
    }
    let sigma = to_f64(tf.sigma());
    let vol = sigma.powi(n as i32);
    let pre = 2f64.powi(n as i32 - 2);
    let blocks = samples.div_ceil(MC_BLOCK);
    let sums = par::map_range(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = MC_BLOCK.min(samples - b * MC_BLOCK);
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        let mut y = [0.0f64; 4];
        for _ in 0..count {
            let mut w = vol;
            for yj in y.iter_mut().take(n) {
                *yj = rng.gen::<f64>() * sigma;
                w *= tf.fhat().evaluate_f64(*yj);
            }
            // Which of the 2^n sign patterns give |Σ ± y_j| ≤ 1.
            let mut ok = 0u32;
            for pat in 0u32..(1 << n) {
                let v: f64 = (0..n).map(|j| if pat >> j & 1 == 1 { -y[j] } else { y[j] }).sum();
                if v.abs() <= 1.0 {
                    ok |= 1 << pat;
                }
            }
            let k: f64 = terms
                .iter()
                .filter(|(_, forms)| forms.iter().all(|&f| ok >> f & 1 == 1))
                .map(|(c, _)| *c)
                .sum();
            let x = pre * w * k;
            s1 += x;
            s2 += x * x;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(McEstimate { estimate: mean, stderr: (var / nf).sqrt(), samples })
}
