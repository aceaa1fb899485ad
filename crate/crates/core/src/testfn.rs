//! Even test functions whose Fourier transform is a compactly supported
//! piecewise polynomial.
//!
//! Convention: `φ̂(y) = ∫ φ(x) e^{-2πixy} dx`, so `φ(0) = ∫ φ̂`.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::exactpoly::{format_rational, parse_rational, to_f64, Cumulative, PiecewisePoly, Poly, Rational};
use crate::quad::{integrate, QuadOpts};
use crate::{Error, Result};

#[derive(Clone, Debug)]
enum PhiForm {
    /// `(sin πσx / πσx)²`
    Fejer(f64),
    /// Inverse Fourier transform of `fhat`, evaluated by quadrature.
    Numeric,
}

#[derive(Default, Debug)]
struct Caches {
    /// `psi[k-1]` = transform of `φ^k`.
    psi: Vec<PiecewisePoly>,
    psi_cum: Vec<Option<Cumulative>>,
    /// `half[k-1]` = k-fold convolution of `φ̂·1_[0,σ)`.
    half: Vec<PiecewisePoly>,
}

/// A test function `φ` with `supp φ̂ ⊆ [-σ, σ]`.
#[derive(Clone)]
pub struct TestFunction {
    sigma: Rational,
    fhat: PiecewisePoly,
    phi: PhiForm,
    label: String,
    cache: Arc<Mutex<Caches>>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("sigma", &format_rational(&self.sigma))
            .finish()
    }
}

impl TestFunction {
    /// Fejér kernel `φ(x) = (sin πσx / πσx)²`, `φ̂(y) = 1/σ − |y|/σ²` on `|y| < σ`.
    pub fn fejer(sigma: Rational) -> Result<Self> {
        if sigma <= Rational::zero() {
            return Err(Error::Domain(format!(
                "fejer needs sigma > 0, got {}",
                format_rational(&sigma)
            )));
        }
        let inv = Rational::one() / &sigma;
        let inv2 = &inv * &inv;
        let fhat = PiecewisePoly::from_parts(
            vec![-sigma.clone(), Rational::zero(), sigma.clone()],
            vec![
                Poly::new(vec![inv.clone(), inv2.clone()]),
                Poly::new(vec![inv, -inv2]),
            ],
        );
        let s = to_f64(&sigma);
        Ok(TestFunction {
            label: format!("fejer:{}", format_rational(&sigma)),
            sigma,
            fhat,
            phi: PhiForm::Fejer(s),
            cache: Arc::default(),
        })
    }

    /// Register an arbitrary even transform. `φ` is then evaluated by
    /// numerical inverse Fourier integration.
    pub fn custom(label: &str, fhat: PiecewisePoly) -> Result<Self> {
        let Some((lo, hi)) = fhat.support() else {
            return Err(Error::Domain("test function transform is identically zero".into()));
        };
        let sigma = hi.clone();
        if lo != &-sigma.clone() || fhat.reflect() != fhat {
            return Err(Error::Domain("test function transform must be even".into()));
        }
        Ok(TestFunction {
            label: label.to_string(),
            sigma,
            fhat,
            phi: PhiForm::Numeric,
            cache: Arc::default(),
        })
    }

    /// Parse `fejer:<p/q>`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.split_once(':') {
            Some(("fejer", s)) => Self::fejer(parse_rational(s)?),
            _ => Err(Error::Parse(format!(
                "unknown test function '{spec}', expected fejer:<p/q>"
            ))),
        }
    }

    pub fn sigma(&self) -> &Rational {
        &self.sigma
    }

    pub fn fhat(&self) -> &PiecewisePoly {
        &self.fhat
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `φ(0) = ∫ φ̂`.
    pub fn phi_at_zero(&self) -> Rational {
        self.fhat.total_integral()
    }

    /// Evenness, support and inversion-at-zero checks.
    pub fn check_invariants(&self) -> Result<()> {
        if self.fhat.reflect() != self.fhat {
            return Err(Error::InvariantViolation(format!("{} transform not even", self.label)));
        }
        if let Some((lo, hi)) = self.fhat.support() {
            if lo < &-self.sigma.clone() || hi > &self.sigma {
                return Err(Error::InvariantViolation(format!(
                    "{} transform leaves [-σ, σ]",
                    self.label
                )));
            }
        }
        let direct = self.phi_value_numeric(0.0);
        let exact = to_f64(&self.phi_at_zero());
        if (direct - exact).abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "{}: φ(0) = {direct} but ∫φ̂ = {exact}",
                self.label
            )));
        }
        Ok(())
    }

    /// `φ(x)` in floating point.
    pub fn phi_value_numeric(&self, x: f64) -> f64 {
        match self.phi {
            PhiForm::Fejer(s) => {
                let u = std::f64::consts::PI * s * x;
                if u.abs() < 1e-4 {
                    // Taylor expansion of (sin u / u)^2 avoids 0/0.
                    let u2 = u * u;
                    1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0
                } else {
                    let r = u.sin() / u;
                    r * r
                }
            }
            PhiForm::Numeric => {
                let s = to_f64(&self.sigma);
                let brks: Vec<f64> = self.fhat.breakpoints().iter().map(to_f64).collect();
                let fhat = &self.fhat;
                let tau = 2.0 * std::f64::consts::PI * x;
                integrate(
                    |y| fhat.evaluate_f64(y) * (tau * y).cos(),
                    -s,
                    s,
                    &brks,
                    QuadOpts { abs_tol: 1e-13, max_panels: 20_000 },
                )
                .unwrap_or(f64::NAN)
            }
        }
    }

    /// Transform of `φ^m`: the m-fold self-convolution of `φ̂`. Cached.
    pub fn phi_power_hat(&self, m: usize) -> Result<PiecewisePoly> {
        if m == 0 {
            return Err(Error::Domain("phi_power_hat needs m >= 1".into()));
        }
        let mut c = self.cache.lock().expect("cache poisoned");
        while c.psi.len() < m {
            let next = match c.psi.last() {
                None => self.fhat.clone(),
                Some(prev) => prev.convolve(&self.fhat),
            };
            c.psi.push(next);
            c.psi_cum.push(None);
        }
        Ok(c.psi[m - 1].clone())
    }

    /// Cumulative integral of `phi_power_hat(k)`. Cached.
    pub fn phi_power_cumulative(&self, k: usize) -> Result<Cumulative> {
        let psi = self.phi_power_hat(k)?;
        let mut c = self.cache.lock().expect("cache poisoned");
        if c.psi_cum[k - 1].is_none() {
            c.psi_cum[k - 1] = Some(psi.antiderivative());
        }
        Ok(c.psi_cum[k - 1].clone().expect("just filled"))
    }

    /// k-fold convolution of the right half `φ̂·1_[0,σ)`. Cached.
    pub fn half_power(&self, k: usize) -> Result<PiecewisePoly> {
        if k == 0 {
            return Err(Error::Domain("half_power needs k >= 1".into()));
        }
        let h = self.fhat.restrict(&Rational::zero(), &self.sigma);
        let mut c = self.cache.lock().expect("cache poisoned");
        while c.half.len() < k {
            let next = match c.half.last() {
                None => h.clone(),
                Some(prev) => prev.convolve(&h),
            };
            c.half.push(next);
        }
        Ok(c.half[k - 1].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{int, rat};

    #[test]
    fn fejer_values() {
        let tf = TestFunction::fejer(rat(1, 2)).unwrap();
        assert_eq!(tf.fhat().evaluate(&int(0)), int(2));
        assert_eq!(tf.fhat().evaluate(&rat(1, 2)), int(0));
        assert_eq!(tf.phi_value_numeric(0.0), 1.0);
        let pi = std::f64::consts::PI;
        assert!((tf.phi_value_numeric(1.0) - 4.0 / (pi * pi)).abs() < 1e-15);
        assert!(tf.phi_value_numeric(1e3) < 1e-5);
        tf.check_invariants().unwrap();
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(TestFunction::fejer(int(0)).is_err());
        assert!(TestFunction::fejer(rat(-1, 3)).is_err());
        assert!(TestFunction::parse("gauss:1/2").is_err());
        assert!(TestFunction::parse("fejer:0.5").is_err());
    }

    #[test]
    fn power_hat_mass_and_tail() {
        let tf = TestFunction::fejer(rat(3, 5)).unwrap();
        assert_eq!(tf.phi_power_hat(1).unwrap(), *tf.fhat());
        for m in 1..5 {
            assert_eq!(tf.phi_power_hat(m).unwrap().total_integral(), int(1));
        }
        let psi2 = tf.phi_power_hat(2).unwrap();
        assert_eq!(psi2.definite_integral(&rat(3, 5), &rat(6, 5)), rat(1, 24));
    }

    #[test]
    fn numeric_phi_matches_closed_form() {
        let f = TestFunction::fejer(rat(2, 3)).unwrap();
        let g = TestFunction::custom("tri", f.fhat().clone()).unwrap();
        for x in [0.0, 0.3, 1.7, 4.2] {
            assert!((f.phi_value_numeric(x) - g.phi_value_numeric(x)).abs() < 1e-10);
        }
        g.check_invariants().unwrap();
    }

    #[test]
    fn custom_rejects_odd() {
        let p = PiecewisePoly::indicator(int(0), int(1));
        assert!(TestFunction::custom("box", p).is_err());
    }
}
