//! Haar-random special orthogonal matrices and the linear statistic
//! `Z_φ(U) = Σ_n F_M(θ_n)`.
//!
//! Sample `i` draws from ChaCha8 seeded with `seed` on stream `i`, so a run
//! is reproducible regardless of how samples are spread over threads.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize, Serializer};

use crate::exactpoly::{format_rational, to_f64, Rational};
use crate::moments::{mean_value, predicted_centered_moment, MomentSpec, Sign};
use crate::par;
use crate::testfn::TestFunction;
use crate::{Error, Result};

const EIG_EPS: f64 = 1e-13;
const EIG_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Parity {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// SO(even) models the root-number +1 family.
    pub fn sign(self) -> Sign {
        match self {
            Parity::Even => Sign::Plus,
            Parity::Odd => Sign::Minus,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::Parse(format!("parity must be even or odd, got '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub m: usize,
    pub parity: Parity,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(m: usize, samples: usize, seed: u64) -> Self {
        EnsembleSpec { m, parity: Parity::of(m), samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Domain(format!("matrix dimension must be >= 2, got {}", self.m)));
        }
        if Parity::of(self.m) != self.parity {
            return Err(Error::Domain(format!("M = {} does not have parity {:?}", self.m, self.parity)));
        }
        if self.samples == 0 {
            return Err(Error::Domain("samples must be positive".into()));
        }
        Ok(())
    }
}

/// RNG for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed element of SO(M): QR of a Gaussian matrix, columns
/// rescaled so `R` has a positive diagonal, last column negated if `det = −1`.
pub fn sample_haar_so<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if m < 2 {
        return Err(Error::Domain(format!("matrix dimension must be >= 2, got {m}")));
    }
    let g = DMatrix::<f64>::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(m - 1).neg_mut();
    }
    Ok(q)
}

/// Eigenangles in `(−π, π]`, both members of each conjugate pair included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenangleSample {
    pub angles: Vec<f64>,
}

fn wrap(theta: f64) -> f64 {
    use std::f64::consts::PI;
    if theta <= -PI {
        theta + 2.0 * PI
    } else {
        theta
    }
}

impl EigenangleSample {
    /// The multiset is closed under `θ ↦ −θ`, and odd `M` carries an angle at 0.
    pub fn check_symmetry(&self, tol: f64) -> Result<()> {
        use std::f64::consts::PI;
        let fixed = |t: f64| t.abs() < tol || PI - t.abs() < tol;
        let mut a: Vec<f64> = self.angles.iter().copied().filter(|&t| !fixed(t)).collect();
        let mut b: Vec<f64> = a.iter().map(|t| -t).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| (x - y).abs() > tol) {
            return Err(Error::InvariantViolation("eigenangles not closed under negation".into()));
        }
        if self.angles.len() % 2 == 1 && !self.angles.iter().any(|t| t.abs() < tol) {
            return Err(Error::InvariantViolation("odd dimension without eigenvalue +1".into()));
        }
        Ok(())
    }
}

/// All eigenangles via a real Schur decomposition.
pub fn eigenangles(u: &DMatrix<f64>) -> Result<EigenangleSample> {
    if !u.is_square() {
        return Err(Error::Domain("eigenangles needs a square matrix".into()));
    }
    let schur = Schur::try_new(u.clone(), EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let angles = schur.complex_eigenvalues().iter().map(|z| wrap(z.im.atan2(z.re))).collect();
    Ok(EigenangleSample { angles })
}

/// `|θ_n|` from the eigenvalues `cos θ_n` of the symmetric part `(U + Uᵀ)/2`.
/// Enough for `Z`, since `F_M` is even, and much cheaper than a general eigensolve.
pub fn abs_eigenangles(u: &DMatrix<f64>) -> Result<Vec<f64>> {
    let s = (u + u.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(s, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect())
}

/// `F_M(θ) = (1/M)[φ̂(0) + 2 Σ_{k=1}^{⌊σM⌋} φ̂(k/M) cos kθ]`, coefficients precomputed.
#[derive(Clone, Debug)]
pub struct FmKernel {
    m: usize,
    coef: Vec<f64>,
}

impl FmKernel {
    pub fn new(tf: &TestFunction, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("M must be >= 1".into()));
        }
        let k_max = (tf.sigma() * Rational::from_integer(m.into())).floor().to_integer();
        let k_max: usize = k_max
            .try_into()
            .map_err(|_| Error::Domain("sigma * M out of range".into()))?;
        let mut coef = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let y = Rational::new(k.into(), m.into());
            coef.push(to_f64(&tf.fhat().evaluate(&y)));
        }
        Ok(FmKernel { m, coef })
    }

    pub fn value(&self, theta: f64) -> f64 {
        let c = theta.cos();
        // cos kθ by the Chebyshev recurrence.
        let (mut prev, mut cur) = (1.0, c);
        let mut acc = self.coef[0];
        for &ck in &self.coef[1..] {
            acc += 2.0 * ck * cur;
            let next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
        }
        acc / self.m as f64
    }

    /// `Z = Σ_n F_M(θ_n)`.
    pub fn z(&self, angles: &[f64]) -> f64 {
        angles.iter().map(|&t| self.value(t)).sum()
    }
}

pub fn f_m_value(tf: &TestFunction, m: usize, theta: f64) -> Result<f64> {
    Ok(FmKernel::new(tf, m)?.value(theta))
}

pub fn z_value(tf: &TestFunction, m: usize, sample: &EigenangleSample) -> Result<f64> {
    Ok(FmKernel::new(tf, m)?.z(&sample.angles))
}

/// `Z` for every sample, in index order.
pub fn sample_z(tf: &TestFunction, spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let kernel = FmKernel::new(tf, spec.m)?;
    par::map_range(spec.samples, |i| {
        let mut rng = sample_rng(spec.seed, i as u64);
        let u = sample_haar_so(spec.m, &mut rng)?;
        Ok(kernel.z(&abs_eigenangles(&u)?))
    })
    .into_iter()
    .collect()
}

fn ser_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

/// Empirical centered moment against its prediction.
///
/// `empirical` centers at the sample mean; `empirical_mu_centered` centers at
/// the limiting mean `μ±`, which carries an `O(1/M)` bias at finite `M`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub empirical: f64,
    pub stderr: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub predicted: Option<Rational>,
    pub predicted_approx: Option<f64>,
    pub z_score: Option<f64>,
    pub samples: usize,
    pub empirical_mu_centered: f64,
    pub stderr_mu_centered: f64,
    /// `false` when σ lies outside the validity window for this `n`.
    pub supported: bool,
    /// Finite-size allowance `c/M` added to the `4·stderr` gate.
    pub allowance: f64,
}

impl MomentReport {
    /// `|empirical − predicted| ≤ max(k·stderr, floor)`.
    pub fn within(&self, k: f64, floor: f64) -> bool {
        match self.predicted_approx {
            Some(p) => (self.empirical - p).abs() <= (k * self.stderr).max(floor),
            None => false,
        }
    }

    /// The default gate `max(4·stderr, allowance)`.
    pub fn passes(&self) -> bool {
        self.within(4.0, self.allowance)
    }
}

const BATCHES: usize = 50;

/// Mean of `g(z)` and its batch-means standard error.
fn batch_mean<G: Fn(f64) -> f64>(zs: &[f64], g: G) -> (f64, f64) {
    let n = zs.len();
    let mean = zs.iter().map(|&z| g(z)).sum::<f64>() / n as f64;
    let b = BATCHES.min(n);
    if b < 2 {
        return (mean, f64::NAN);
    }
    let ranges = par::shards(n, b);
    let bm: Vec<f64> = ranges
        .iter()
        .map(|r| zs[r.clone()].iter().map(|&z| g(z)).sum::<f64>() / r.len() as f64)
        .collect();
    let bbar = bm.iter().sum::<f64>() / b as f64;
    let var = bm.iter().map(|x| (x - bbar).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

/// Default finite-size allowance constants: `c/M` for moments, `c/M` for the mean.
pub const MOMENT_ALLOWANCE_C: f64 = 2.0;
pub const MEAN_ALLOWANCE_C: f64 = 5.0;

/// Centered moments `2..=n_max` from precomputed samples.
pub fn moments_from_samples(tf: &TestFunction, spec: &EnsembleSpec, zs: &[f64], n_max: usize) -> Result<Vec<MomentReport>> {
    if zs.len() < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let mu = to_f64(&mean_value(tf)?);
    let zbar = zs.iter().sum::<f64>() / zs.len() as f64;
    let mut out = Vec::new();
    for n in 2..=n_max {
        let (emp, se) = batch_mean(zs, |z| (z - zbar).powi(n as i32));
        let (emp_mu, se_mu) = batch_mean(zs, |z| (z - mu).powi(n as i32));
        let predicted = MomentSpec::minimal(tf.clone(), n, spec.parity.sign())
            .and_then(|s| predicted_centered_moment(&s))
            .ok();
        let predicted_approx = predicted.as_ref().map(to_f64);
        out.push(MomentReport {
            n,
            empirical: emp,
            stderr: se,
            supported: predicted.is_some(),
            z_score: predicted_approx.map(|p| (emp - p) / se),
            predicted,
            predicted_approx,
            samples: zs.len(),
            empirical_mu_centered: emp_mu,
            stderr_mu_centered: se_mu,
            allowance: MOMENT_ALLOWANCE_C / spec.m as f64,
        });
    }
    Ok(out)
}

pub fn estimate_centered_moments(tf: &TestFunction, spec: &EnsembleSpec, n_max: usize) -> Result<Vec<MomentReport>> {
    let zs = sample_z(tf, spec)?;
    moments_from_samples(tf, spec, &zs, n_max)
}

/// Empirical `E[Z]` against `μ±`, reported as moment order 1.
pub fn mean_from_samples(tf: &TestFunction, spec: &EnsembleSpec, zs: &[f64]) -> Result<MomentReport> {
    if zs.len() < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let mu = mean_value(tf)?;
    let mu_f = to_f64(&mu);
    let (emp, se) = batch_mean(zs, |z| z);
    Ok(MomentReport {
        n: 1,
        empirical: emp,
        stderr: se,
        z_score: Some((emp - mu_f) / se),
        predicted: Some(mu),
        predicted_approx: Some(mu_f),
        samples: zs.len(),
        empirical_mu_centered: emp - mu_f,
        stderr_mu_centered: se,
        supported: true,
        allowance: MEAN_ALLOWANCE_C / spec.m as f64,
    })
}

pub fn empirical_mean_check(tf: &TestFunction, spec: &EnsembleSpec) -> Result<MomentReport> {
    mean_value(tf)?;
    let zs = sample_z(tf, spec)?;
    mean_from_samples(tf, spec, &zs)
}
