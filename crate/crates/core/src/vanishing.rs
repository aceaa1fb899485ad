//! Markov-type bounds on the proportion of forms vanishing to order `≥ r`
//! at the central point, from the exact centered moments of the Fejér
//! test function.

use serde::Serialize;

use crate::exactpoly::{format_rational, int, to_f64, Rational};
use crate::moments::{predicted_centered_moment, MomentSpec, Sign};
use crate::par;
use crate::testfn::TestFunction;
use crate::{Error, Result};

/// Earlier bounds on the order-5 proportion, kept for comparison rows.
pub const PRIOR_BOUNDS: [(&str, i64, i64); 2] = [("earlier bound", 1, 32), ("sharper earlier bound", 1, 49)];

#[derive(Clone, Debug)]
pub struct VanishingQuery {
    pub r: u64,
    pub n: usize,
    pub sigma: Rational,
    pub sign: Sign,
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub exact: String,
    pub approx: f64,
    pub threshold: String,
    pub moment: String,
    pub a: usize,
    pub assumptions: Vec<String>,
    #[serde(skip)]
    pub exact_value: Rational,
}

fn check(q: &VanishingQuery) -> Result<(TestFunction, Rational)> {
    if q.r < 1 {
        return Err(Error::Domain("r must be >= 1".into()));
    }
    if q.n == 0 || q.n % 2 == 1 {
        return Err(Error::Domain(format!("the Markov argument needs an even moment, got n = {}", q.n)));
    }
    let tf = TestFunction::fejer(q.sigma.clone())?;
    // r·φ(0) − φ̂(0) − ½φ(0)
    let phi0 = tf.phi_at_zero();
    let threshold = int(q.r as i64) * &phi0 - tf.fhat().evaluate(&int(0)) - phi0 / int(2);
    if threshold <= int(0) {
        return Err(Error::Domain(format!(
            "threshold r - 1/sigma - 1/2 = {} is not positive",
            format_rational(&threshold)
        )));
    }
    Ok((tf, threshold))
}

/// `E[(D − μ)^n] / (r − 1/σ − 1/2)^n` for the Fejér test function.
pub fn vanishing_bound(q: &VanishingQuery) -> Result<Rational> {
    Ok(vanishing_report(q)?.exact_value)
}

pub fn vanishing_report(q: &VanishingQuery) -> Result<VanishingReport> {
    let (tf, threshold) = check(q)?;
    let spec = MomentSpec::minimal(tf, q.n, q.sign)?;
    let moment = predicted_centered_moment(&spec)?;
    let exact = &moment / num_traits::pow(threshold.clone(), q.n);
    let mut assumptions = vec!["test function: Fejer kernel with the given sigma".to_string()];
    if q.sigma == Rational::new(2.into(), (q.n as i64).into()) {
        assumptions.push("sigma sits on the closed boundary 2/n".into());
    }
    if q.sign == Sign::Plus {
        assumptions.push("positive-sign family: no published value to compare against".into());
    }
    if q.n == 4 && q.r < 5 {
        assumptions.push("r < 5 with n = 4 lies outside the regime of the published estimate".into());
    }
    Ok(VanishingReport {
        exact: format_rational(&exact),
        approx: to_f64(&exact),
        threshold: format_rational(&threshold),
        moment: format_rational(&moment),
        a: spec.a,
        assumptions,
        exact_value: exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub sigma: String,
    pub bound: Option<String>,
    pub approx: Option<f64>,
    pub skipped: Option<String>,
    pub best: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub r: u64,
    pub rows: Vec<SweepRow>,
    /// `(label, value)` of earlier published bounds.
    pub prior: Vec<(String, String)>,
}

impl SweepTable {
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.best)
    }
}

/// Bounds over an `(n, σ)` grid; inadmissible points are skipped with the reason.
pub fn bound_sweep(r: u64, ns: &[usize], sigmas: &[Rational], sign: Sign) -> SweepTable {
    let grid: Vec<(usize, Rational)> = ns
        .iter()
        .flat_map(|&n| sigmas.iter().map(move |s| (n, s.clone())))
        .collect();
    let results = par::map_slice(&grid, |(n, s)| {
        vanishing_bound(&VanishingQuery { r, n: *n, sigma: s.clone(), sign })
    });
    let best_idx = results
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.as_ref().ok().map(|b| (i, b)))
        .min_by(|x, y| x.1.cmp(y.1))
        .map(|(i, _)| i);
    let rows = grid
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(i, ((n, s), b))| SweepRow {
            n: *n,
            sigma: format_rational(s),
            bound: b.as_ref().ok().map(format_rational),
            approx: b.as_ref().ok().map(to_f64),
            skipped: b.as_ref().err().map(|e| e.to_string()),
            best: Some(i) == best_idx,
        })
        .collect();
    let prior = PRIOR_BOUNDS
        .iter()
        .map(|(l, p, q)| (l.to_string(), format!("{p}/{q}")))
        .collect();
    SweepTable { r, rows, prior }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rat;

    fn q(r: u64, n: usize, s: Rational) -> VanishingQuery {
        VanishingQuery { r, n, sigma: s, sign: Sign::Minus }
    }

    #[test]
    fn order_five() {
        let rep = vanishing_report(&q(5, 4, rat(1, 2))).unwrap();
        assert_eq!(rep.exact_value, rat(496, 65625));
        assert_eq!(rep.moment, "31/105");
        assert_eq!(rep.threshold, "5/2");
        assert!(rep.exact_value < rat(1, 49) && rat(1, 49) < rat(1, 32));
    }

    #[test]
    fn second_moment_is_weaker() {
        let b2 = vanishing_bound(&q(5, 2, rat(1, 2))).unwrap();
        let b4 = vanishing_bound(&q(5, 4, rat(1, 2))).unwrap();
        assert!(b2 > b4);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(vanishing_bound(&q(5, 3, rat(1, 2))).is_err());
        assert!(vanishing_bound(&q(2, 4, rat(1, 2))).is_err());
        assert!(vanishing_bound(&q(5, 4, rat(3, 5))).is_err());
    }

    #[test]
    fn sweep_minimum() {
        let t = bound_sweep(5, &[2, 4], &[rat(1, 4), rat(1, 3), rat(1, 2)], Sign::Minus);
        let best = t.best().unwrap();
        assert_eq!((best.n, best.sigma.as_str()), (4, "1/2"));
        assert_eq!(best.bound.as_deref(), Some("496/65625"));
        assert!(t.rows.iter().all(|r| r.approx.is_none_or(|v| v > 0.0)));
    }
}
