//! Software extended precision and the truncation context.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float_num::{BigFloat, Consts, Radix, RoundingMode, Sign};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Binary floating-point number with an explicit mantissa width.
///
/// Binary operations round to the wider of the two operand precisions.
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero(bits: usize) -> Self {
        Real(BigFloat::from_word(0, bits))
    }

    pub fn one(bits: usize) -> Self {
        Real(BigFloat::from_word(1, bits))
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        Real(BigFloat::from_f64(x, bits))
    }

    pub fn from_i64(n: i64, bits: usize) -> Self {
        Real(BigFloat::from_i64(n, bits))
    }

    /// `num / den` rounded once.
    pub fn ratio(num: i64, den: i64, bits: usize) -> Self {
        Real::from_i64(num, bits) / Real::from_i64(den, bits)
    }

    /// `base^e` for a signed integer exponent.
    pub fn int_pow(base: i64, e: i32, bits: usize) -> Self {
        Real::from_i64(base, bits).powi(e)
    }

    pub fn parse(s: &str, bits: usize) -> Result<Self> {
        let v = CONSTS.with(|c| BigFloat::parse(s.trim(), Radix::Dec, bits, RM, &mut c.borrow_mut()));
        if v.is_nan() || v.is_inf() {
            return Err(Error::InvalidParameter(format!("not a finite decimal number: {s:?}")));
        }
        Ok(Real(v))
    }

    pub fn bits(&self) -> usize {
        self.0.mantissa_max_bit_len().unwrap_or(64)
    }

    fn bits2(&self, other: &Real) -> usize {
        self.bits().max(other.bits())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Real(self.0.reciprocal(self.bits(), RM))
    }

    pub fn powi(&self, e: i32) -> Self {
        let p = self.0.powi(e.unsigned_abs() as usize, self.bits(), RM);
        if e < 0 {
            Real(p.reciprocal(self.bits(), RM))
        } else {
            Real(p)
        }
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(self.bits(), RM))
    }

    pub fn exp(&self) -> Self {
        CONSTS.with(|c| Real(self.0.exp(self.bits(), RM, &mut c.borrow_mut())))
    }

    pub fn ln(&self) -> Self {
        CONSTS.with(|c| Real(self.0.ln(self.bits(), RM, &mut c.borrow_mut())))
    }

    pub fn sin(&self) -> Self {
        CONSTS.with(|c| Real(self.0.sin(self.bits(), RM, &mut c.borrow_mut())))
    }

    pub fn cos(&self) -> Self {
        CONSTS.with(|c| Real(self.0.cos(self.bits(), RM, &mut c.borrow_mut())))
    }

    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.0.clone();
        // Widening never fails; narrowing rounds.
        let _ = v.set_precision(bits, RM);
        Real(v)
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest double; saturates to ±inf or 0 outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let top = words.last().copied().unwrap_or(0) as f64;
        let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
        let mant = (top + next / 18_446_744_073_709_551_616.0) / 18_446_744_073_709_551_616.0;
        let e = exp as i64;
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            // split the scaling so subnormal results keep their bits
            let half = (e / 2) as i32;
            mant * 2f64.powi(half) * 2f64.powi(e as i32 - half)
        };
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Base-2 exponent `e` with `|x| ∈ [2^(e−1), 2^e)`; `None` for zero.
    pub fn exponent2(&self) -> Option<i64> {
        if self.0.is_zero() {
            return None;
        }
        self.0.exponent().map(|e| e as i64)
    }

    /// Full-precision decimal representation.
    pub fn to_decimal(&self) -> String {
        let digits = (self.bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.to_decimal_digits(digits)
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_decimal_digits(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let neg = self.is_negative();
        let x = self.abs();
        let e2 = x.exponent2().unwrap_or(0);
        let mut e10 = ((e2 - 1) as f64 * std::f64::consts::LOG10_2).floor() as i32;
        let wide = self.bits() + 64;
        let ten = Real::from_i64(10, wide);
        let x = x.with_bits(wide);
        let mut m = &x / &ten.powi(e10);
        if m >= ten {
            m = &m / &ten;
            e10 += 1;
        }
        let one = Real::one(wide);
        if m < one {
            m = &m * &ten;
            e10 -= 1;
        }
        // integer with `digits` digits
        let scaled = &m * &ten.powi(digits as i32 - 1);
        let half = Real::ratio(1, 2, wide);
        let rounded = Real((&scaled + &half).0.floor());
        let mut s = CONSTS.with(|c| rounded.0.format(Radix::Dec, RM, &mut c.borrow_mut())).unwrap_or_default();
        s = integer_digits(&s);
        if s.len() > digits {
            s.truncate(digits);
            e10 += 1;
        }
        while s.len() < digits {
            s.push('0');
        }
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        out.push_str(&format!("e{e10}"));
        out
    }
}

// astro-float prints integers as "1.234e+3"; recover the plain digit string.
fn integer_digits(s: &str) -> String {
    let s = s.trim_start_matches('-');
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (s, 0),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let mut digits: String = int.chars().chain(frac.chars()).collect();
    let point = int.len() as i64 + exp;
    if point <= 0 {
        return "0".to_string();
    }
    let point = point as usize;
    if digits.len() < point {
        digits.extend(std::iter::repeat_n('0', point - digits.len()));
    } else {
        digits.truncate(point);
    }
    let t = digits.trim_start_matches('0');
    if t.is_empty() {
        "0".to_string()
    } else {
        t.to_string()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_decimal_digits(d)),
            None => f.write_str(&self.to_decimal()),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(self.0.$m(&rhs.0, self.bits2(rhs), RM))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let Some(first) = iter.next() else {
            return Real::zero(64);
        };
        iter.fold(first, |acc, x| acc + x)
    }
}

/// Working precision and truncation parameters shared by every infinite sum
/// and product.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionContext {
    bits: usize,
    jmax: usize,
    product_terms: usize,
    tail_tol: f64,
}

impl PrecisionContext {
    /// Context with `product_terms = max(jmax, bits/2 + 32)`.
    pub fn new(bits: usize, jmax: usize, tail_tol: f64) -> Result<Self> {
        let product_terms = jmax.max(bits / 2 + 32);
        Self::with_product_terms(bits, jmax, product_terms, tail_tol)
    }

    pub fn with_product_terms(bits: usize, jmax: usize, product_terms: usize, tail_tol: f64) -> Result<Self> {
        if bits < 64 {
            return Err(Error::InvalidParameter(format!("bits must be >= 64, got {bits}")));
        }
        if jmax < 1 {
            return Err(Error::InvalidParameter("jmax must be >= 1".into()));
        }
        if product_terms < jmax {
            return Err(Error::InvalidParameter(format!(
                "product_terms ({product_terms}) must be >= jmax ({jmax})"
            )));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tail_tol must be positive, got {tail_tol}")));
        }
        Ok(PrecisionContext { bits, jmax, product_terms, tail_tol })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn jmax(&self) -> usize {
        self.jmax
    }

    pub fn product_terms(&self) -> usize {
        self.product_terms
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Bits needed to validate moments up to `|k| <= kmax`.
    ///
    /// The largest moment term is `|ã_j|·4^{j|k|}`; with `ã_j ≈ 4^{−j(j+1)/2}`
    /// it peaks near `4^{k²/2}`, so `2·kmax² + 64` bits keep the cancellation
    /// inside the mantissa.
    pub fn moment_bits(kmax: usize) -> usize {
        2 * kmax * kmax + 64
    }

    pub fn require_moment_bits(&self, kmax: usize) -> Result<()> {
        let needed = Self::moment_bits(kmax);
        if self.bits < needed {
            return Err(Error::InsufficientPrecision {
                bits: self.bits,
                needed,
                what: format!("moment validation up to |k| <= {kmax}"),
            });
        }
        Ok(())
    }

    /// Rejects a context whose unit roundoff exceeds the tail tolerance.
    pub fn require_tail_resolution(&self) -> Result<()> {
        let needed = (-self.tail_tol.log2()).ceil().max(0.0) as usize + 8;
        if self.bits < needed {
            return Err(Error::InsufficientPrecision {
                bits: self.bits,
                needed,
                what: format!("tail tolerance {:e}", self.tail_tol),
            });
        }
        Ok(())
    }

    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.bits)
    }

    pub fn int(&self, n: i64) -> Real {
        Real::from_i64(n, self.bits)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext::new(512, 20, 1e-30).expect("default context is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcendental_at_zero() {
        let z = Real::zero(256);
        assert_eq!(z.bits(), 256);
        assert_eq!(z.exp().to_f64(), 1.0);
        assert_eq!((-&z).exp().to_f64(), 1.0);
        assert_eq!(z.sin().to_f64(), 0.0);
        assert_eq!(z.cos().to_f64(), 1.0);
    }

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -0.75, std::f64::consts::PI, 1e-300, 2.5e300, 1e-307] {
            assert_eq!(Real::from_f64(x, 128).to_f64(), x, "{x}");
        }
    }

    #[test]
    fn decimal_round_trip() {
        let third = Real::ratio(1, 3, 256);
        let s = third.to_decimal();
        let back = Real::parse(&s, 256).unwrap();
        assert!((&back - &third).abs() < Real::from_f64(1e-75, 256));
        assert_eq!(Real::ratio(-5, 2, 128).to_decimal_digits(6), "-2.5e0");
        assert_eq!(Real::from_i64(1000, 128).to_decimal_digits(3), "1e3");
    }

    #[test]
    fn negative_powers() {
        let q = Real::int_pow(4, -3, 128);
        assert_eq!(q.to_f64(), 1.0 / 64.0);
    }

    #[test]
    fn context_invariants() {
        assert!(PrecisionContext::new(63, 20, 1e-30).is_err());
        assert!(PrecisionContext::new(512, 0, 1e-30).is_err());
        assert!(PrecisionContext::with_product_terms(512, 20, 10, 1e-30).is_err());
        assert!(PrecisionContext::new(512, 20, 0.0).is_err());
        let ctx = PrecisionContext::new(64, 20, 1e-30).unwrap();
        assert!(ctx.require_moment_bits(10).is_err());
        assert!(PrecisionContext::default().require_moment_bits(12).is_ok());
    }
}
