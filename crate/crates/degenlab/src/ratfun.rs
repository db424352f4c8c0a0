//! Rational functions and Laurent limits at t = 0.
//!
//! A `RatFun` is a quotient of polynomials normalized by common monomial
//! factors and a monic denominator. Full multivariate gcd is deliberately
//! avoided: equality is decided by cross-multiplication, which is exact.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::poly::{Poly, Var};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LimitError {
    /// The t-adic valuation of the numerator is smaller than the
    /// denominator's: the function blows up as t -> 0.
    #[error("pole at t = 0 (numerator valuation {num_val}, denominator valuation {den_val})")]
    PoleAtZero { num_val: u32, den_val: u32 },
    /// `limit_at_zero` was asked for a scalar limit but the residue still
    /// involves parameters.
    #[error("limit at t = 0 is not a scalar: {0}")]
    NotScalar(String),
}

/// Quotient of two polynomials, denominator nonzero.
#[derive(Clone)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    /// Builds `num/den`, panicking on a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator in rational function");
        let mut r = RatFun { num, den };
        r.normalize();
        r
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn zero() -> Self {
        RatFun::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(c: Scalar) -> Self {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn variable(v: Var) -> Self {
        RatFun::from_poly(Poly::variable(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial carried by a denominator-free function.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.den == Poly::one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        // Cancel the common monomial factor, then make the denominator monic.
        let g = {
            let cn = self.num.content_monomial();
            let cd = self.den.content_monomial();
            let mut out = smallvec::SmallVec::<[(u32, u32); 4]>::new();
            for v in cn.vars() {
                let e = cn.exponent(v).min(cd.exponent(v));
                if e > 0 {
                    out.push((v.0, e));
                }
            }
            out
        };
        for (v, e) in g {
            self.num = self.num.shift_down(Var(v), e);
            self.den = self.den.shift_down(Var(v), e);
        }
        let lead = self.den.leading().map(|(_, c)| c.clone()).unwrap();
        if !lead.is_one() {
            let inv = lead.inv();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn inv(&self) -> RatFun {
        assert!(!self.is_zero(), "inverting zero rational function");
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, n: i32) -> RatFun {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut acc = RatFun::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Substitutes rational functions for variables (in both numerator and
    /// denominator). Unbound variables are kept.
    pub fn substitute(&self, bindings: &HashMap<Var, RatFun>) -> RatFun {
        let n = substitute_poly(&self.num, bindings);
        let d = substitute_poly(&self.den, bindings);
        &n / &d
    }

    /// Generic limit as `t -> 0`. The result may still involve the remaining
    /// parameters; it is exact.
    pub fn limit_at_zero(&self, t: Var) -> Result<RatFun, LimitError> {
        if self.num.is_zero() {
            return Ok(RatFun::zero());
        }
        let a = self.num.valuation(t).unwrap();
        let b = self.den.valuation(t).unwrap();
        if a < b {
            return Err(LimitError::PoleAtZero {
                num_val: a,
                den_val: b,
            });
        }
        if a > b {
            return Ok(RatFun::zero());
        }
        let n0 = self.num.shift_down(t, a).at_zero(t);
        let d0 = self.den.shift_down(t, b).at_zero(t);
        debug_assert!(!d0.is_zero());
        if n0.is_zero() {
            return Ok(RatFun::zero());
        }
        Ok(&RatFun::from_poly(n0) / &RatFun::from_poly(d0))
    }

    /// Formal partial derivative (quotient rule).
    pub fn derivative(&self, v: Var) -> RatFun {
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        RatFun::new(n, &self.den * &self.den)
    }

    /// Scalar limit as `t -> 0`; errors if parameters survive.
    pub fn limit_at_zero_scalar(&self, t: Var) -> Result<Scalar, LimitError> {
        let l = self.limit_at_zero(t)?;
        match (l.num.as_constant(), l.den.as_constant()) {
            (Some(n), Some(d)) => Ok(&n / &d),
            _ => Err(LimitError::NotScalar(l.to_string())),
        }
    }
}

/// Evaluates a polynomial under a variable -> rational function map.
pub fn substitute_poly(p: &Poly, bindings: &HashMap<Var, RatFun>) -> RatFun {
    let mut out = RatFun::zero();
    for (m, c) in p.terms() {
        let mut term = RatFun::constant(c.clone());
        for v in m.vars() {
            let e = m.exponent(v);
            match bindings.get(&v) {
                Some(r) => term = &term * &r.pow(e as i32),
                None => {
                    term = &term * &RatFun::from_poly(Poly::variable(v).pow(e));
                }
            }
        }
        out = &out + &term;
    }
    out
}

impl PartialEq for RatFun {
    /// Cross-multiplication equality; exact without multivariate gcd.
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RatFun {}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        RatFun::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        RatFun::new(
            &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        RatFun::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RatFun {
    type Output = RatFun;
    fn div(self, rhs: &RatFun) -> RatFun {
        assert!(!rhs.is_zero(), "division by zero rational function");
        RatFun::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::var;

    fn tv() -> Var {
        var("t")
    }

    fn tp() -> Poly {
        Poly::named("t")
    }

    #[test]
    fn limit_of_t2_plus_t_over_t() {
        // (t^2 + t)/t simplifies to t + 1, limit 1.
        let r = RatFun::new(&tp().pow(2) + &tp(), tp());
        assert_eq!(r.limit_at_zero_scalar(tv()).unwrap(), Scalar::one());
    }

    #[test]
    fn limit_with_parameters_evaluated() {
        // t^2*(alpha - beta) at alpha=5, beta=3 has limit 0.
        let a = Poly::named("alpha");
        let b = Poly::named("beta");
        let q = &tp().pow(2) * &(&a - &b);
        let mut binds = HashMap::new();
        binds.insert(var("alpha"), RatFun::constant(Scalar::from_int(5)));
        binds.insert(var("beta"), RatFun::constant(Scalar::from_int(3)));
        let r = substitute_poly(&q, &binds);
        assert_eq!(r.limit_at_zero_scalar(tv()).unwrap(), Scalar::zero());
    }

    #[test]
    fn pole_detected() {
        let r = RatFun::new(Poly::one(), tp());
        assert!(matches!(
            r.limit_at_zero(tv()),
            Err(LimitError::PoleAtZero { .. })
        ));
    }

    #[test]
    fn limit_times_t_vanishes() {
        // Whenever lim r is finite, lim r*t = 0.
        let cases = vec![
            RatFun::new(&tp() + &Poly::one(), &tp().pow(2) + &Poly::one()),
            RatFun::new(Poly::named("alpha"), Poly::one()),
            RatFun::new(&tp().pow(3) + &tp(), tp()),
        ];
        for r in cases {
            assert!(r.limit_at_zero(tv()).is_ok());
            let rt = &r * &RatFun::from_poly(tp());
            assert_eq!(rt.limit_at_zero(tv()).unwrap(), RatFun::zero());
        }
    }

    #[test]
    fn substitute_commutes_with_limit_for_parameter_free_bindings() {
        // r(t, alpha) with alpha bound to a constant: limit of substitution
        // equals substitution into the generic limit.
        let alpha = var("alpha");
        let r = RatFun::new(
            &(&Poly::named("alpha") * &tp()) + &Poly::named("alpha"),
            &tp() + &Poly::one(),
        );
        let mut binds = HashMap::new();
        binds.insert(alpha, RatFun::constant(Scalar::from_int(7)));
        let lhs = r.substitute(&binds).limit_at_zero_scalar(tv()).unwrap();
        let generic = r.limit_at_zero(tv()).unwrap();
        let rhs = generic.substitute(&binds);
        assert_eq!(RatFun::constant(lhs), rhs);
    }

    #[test]
    fn cross_multiplication_equality() {
        let a = RatFun::new(&tp() * &Poly::named("alpha"), tp());
        let b = RatFun::from_poly(Poly::named("alpha"));
        assert_eq!(a, b);
    }
}
