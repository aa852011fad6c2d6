use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;
pub const DEFAULT_RATIONAL_TOL: f64 = 1.0e-9;

/// Rational form of the spacing ratios of distinct real parts
/// `α₁ < … < α_n`.
///
/// `ratios[i] = (n_{i+1}, d_{i+1})` approximates
/// `(α_{i+2} − α_{i+1}) / (α_{i+3} − α_{i+2})`; `closing` is
/// `(α_n − α_{n−1}) / (α_n − α₁)` as implied by the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalSpacing {
    pub alphas: Vec<f64>,
    pub ratios: Vec<(u64, u64)>,
    pub closing: Option<(u64, u64)>,
    pub max_denominator: u64,
    pub approx_error: f64,
}

impl RationalSpacing {
    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    /// Minimal positive integer differences `m_{i+1} − m_i` consistent with
    /// the ratio chain.
    pub fn lattice_steps(&self) -> Vec<BigInt> {
        if self.alphas.len() == 2 {
            return vec![BigInt::one()];
        }
        let mut rel = vec![BigRational::one()];
        for &(n, d) in &self.ratios {
            let last = rel.last().cloned().unwrap();
            rel.push(last * BigRational::new(BigInt::from(d), BigInt::from(n)));
        }
        let lcm = rel.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let steps: Vec<BigInt> = rel.iter().map(|r| (r * &lcm).to_integer()).collect();
        let g = steps.iter().fold(BigInt::zero(), |acc, s| acc.gcd(s));
        steps.into_iter().map(|s| s / &g).collect()
    }
}

pub(crate) fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn relative_error(p: &BigInt, q: &BigInt, target: &BigRational) -> f64 {
    let approx = BigRational::new(p.clone(), q.clone());
    to_f64(&((approx - target).abs() / target.abs()))
}

/// Best rational approximation `p/q` of a positive rational with `q ≤
/// max_den`: the first continued-fraction convergent within `tol` relative
/// error, else the closest semiconvergent below the denominator bound.
pub fn best_rational(target: &BigRational, max_den: u64, tol: f64) -> Result<(u64, u64, f64)> {
    if !target.is_positive() {
        return Err(Error::InvalidArgument(format!("ratio must be positive, got {target}")));
    }
    let bound = BigInt::from(max_den);
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rest = target.clone();
    let accept = |p: &BigInt, q: &BigInt, err: f64| -> Result<(u64, u64, f64)> {
        match (p.to_u64(), q.to_u64()) {
            (Some(p), Some(q)) if p > 0 => Ok((p, q, err)),
            _ => Err(Error::ApproximationFailure(format!("{p}/{q} does not fit the integer range"))),
        }
    };
    loop {
        let a = rest.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > bound {
            let k = (&bound - &q0) / &q1;
            let mut best = (p1.clone(), q1.clone(), relative_error(&p1, &q1, target));
            if k.is_positive() {
                let ps = &k * &p1 + &p0;
                let qs = &k * &q1 + &q0;
                let es = relative_error(&ps, &qs, target);
                if es < best.2 {
                    best = (ps, qs, es);
                }
            }
            if best.0.is_positive() && best.2 <= tol {
                return accept(&best.0, &best.1, best.2);
            }
            return Err(Error::ApproximationFailure(format!(
                "no rational within {tol:e} of {} with denominator <= {max_den}",
                to_f64(target)
            )));
        }
        let err = relative_error(&p2, &q2, target);
        if p2.is_positive() && err <= tol {
            return accept(&p2, &q2, err);
        }
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return accept(&p2, &q2, err);
        }
        rest = frac.recip();
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
}

/// Rationalizes the spacing chain of sorted distinct `alphas`.
pub fn rationalize_spacings(alphas: &[f64], max_denominator: u64, tol: f64) -> Result<RationalSpacing> {
    if alphas.len() < 2 {
        return Err(Error::InvalidArgument("at least two distinct levels are required".into()));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("levels must be finite".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("levels must be strictly increasing".into()));
    }
    if max_denominator == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("max_denominator and tol must be positive".into()));
    }
    let n = alphas.len();
    let exact_alphas: Vec<BigRational> = alphas.iter().map(|&a| exact(a)).collect();
    let deltas: Vec<BigRational> = exact_alphas.windows(2).map(|w| &w[1] - &w[0]).collect();

    let mut ratios = Vec::with_capacity(n.saturating_sub(2));
    let mut approx_error: f64 = 0.0;
    for w in deltas.windows(2) {
        let (p, q, err) = best_rational(&(&w[0] / &w[1]), max_denominator, tol)?;
        ratios.push((p, q));
        approx_error = approx_error.max(err);
    }

    let mut spacing = RationalSpacing {
        alphas: alphas.to_vec(),
        ratios,
        closing: None,
        max_denominator,
        approx_error,
    };
    if n >= 3 {
        let steps = spacing.lattice_steps();
        let total: BigInt = steps.iter().sum();
        let implied = BigRational::new(steps[n - 2].clone(), total);
        let actual = &deltas[n - 2] / (&exact_alphas[n - 1] - &exact_alphas[0]);
        let err = to_f64(&((&implied - &actual).abs() / &actual));
        let allowed = n as f64 * (approx_error + tol);
        if !(err <= allowed) {
            return Err(Error::ApproximationFailure(format!(
                "closing ratio {implied} misses {} by {err:e}",
                to_f64(&actual)
            )));
        }
        let (Some(cn), Some(cd)) = (implied.numer().to_u64(), implied.denom().to_u64()) else {
            return Err(Error::ApproximationFailure("closing ratio out of integer range".into()));
        };
        spacing.closing = Some((cn, cd));
        spacing.approx_error = approx_error.max(err);
    }
    Ok(spacing)
}
