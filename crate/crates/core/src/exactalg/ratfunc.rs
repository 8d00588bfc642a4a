use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::forward_owned_binop;
use super::{AlgebraError, Polynomial, Rational};

/// Reduced quotient of two polynomials.
///
/// Invariants: the denominator is nonzero, numerator and denominator are
/// coprime, and the denominator is scaled so that its constant term is one
/// (or, when the constant term vanishes, its leading coefficient is one).
/// With `den(0) = 1` the power-series coefficients at the origin fall out of
/// a plain long division.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZeroFunction);
        }
        Ok(Self::reduce(num, den))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    fn reduce(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = Polynomial::gcd(&num, &den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let c0 = den.coeff(0);
        let norm = if c0.is_zero() {
            den.leading().expect("nonzero denominator").clone()
        } else {
            c0
        };
        let inv = norm.recip();
        Self {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The numerator, if the denominator is the constant one.
    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn eval(&self, x0: &Rational) -> Result<Rational, AlgebraError> {
        let d = self.den.eval(x0);
        if d.is_zero() {
            return Err(AlgebraError::PoleAtPoint { at: x0.to_string() });
        }
        Ok(self.num.eval(x0) / d)
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        if rhs.is_zero() {
            return Err(AlgebraError::DivisionByZeroFunction);
        }
        Ok(Self::reduce(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    /// First derivative by the quotient rule.
    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative(1) * &self.den) - &(&self.num * &self.den.derivative(1));
        Self::reduce(n, &self.den * &self.den)
    }

    /// Power-series coefficients `[x^0], ..., [x^(n-1)]` at the origin.
    pub fn series(&self, n: usize) -> Result<Vec<Rational>, AlgebraError> {
        series_quotient(&self.num, &self.den, n)
            .ok_or_else(|| AlgebraError::PoleAtPoint { at: "0".into() })
    }

    /// Taylor coefficients of `y -> f(a + y)` up to `y^(n-1)`; coefficient
    /// `k` is `f^(k)(a) / k!`.
    pub fn taylor_at(&self, a: &Rational, n: usize) -> Result<Vec<Rational>, AlgebraError> {
        series_quotient(&self.num.taylor_shift(a), &self.den.taylor_shift(a), n)
            .ok_or_else(|| AlgebraError::PoleAtPoint { at: a.to_string() })
    }

    /// `f^(k)(a)` for `k = 0..=k_max`.
    pub fn derivatives_at(&self, a: &Rational, k_max: usize) -> Result<Vec<Rational>, AlgebraError> {
        let taylor = self.taylor_at(a, k_max + 1)?;
        let mut fact = BigInt::one();
        Ok(taylor
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k;
                }
                c * Rational::from_integer(fact.clone())
            })
            .collect())
    }

    pub fn scale_poly(&self, p: &Polynomial) -> Self {
        Self::reduce(&self.num * p, self.den.clone())
    }
}

fn series_quotient(num: &Polynomial, den: &Polynomial, n: usize) -> Option<Vec<Rational>> {
    let d0 = den.coeff(0);
    if d0.is_zero() {
        return None;
    }
    let d0_inv = d0.recip();
    let dc = den.coeffs();
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = num.coeff(k);
        for j in 1..dc.len().min(k + 1) {
            acc -= &dc[j] * &out[k - j];
        }
        out.push(acc * &d0_inv);
    }
    Some(out)
}

impl From<Polynomial> for RationalFunction {
    fn from(p: Polynomial) -> Self {
        Self::from_poly(p)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::reduce(&self.num + &rhs.num, self.den.clone());
        }
        RationalFunction::reduce(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RationalFunction {
    type Output = RationalFunction;
    /// Panics on division by zero; see [`RationalFunction::checked_div`].
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

forward_owned_binop!(RationalFunction, Add, add);
forward_owned_binop!(RationalFunction, Sub, sub);
forward_owned_binop!(RationalFunction, Mul, mul);
forward_owned_binop!(RationalFunction, Div, div);

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}
