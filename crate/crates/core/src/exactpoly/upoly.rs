use std::fmt;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::ring;

/// Univariate polynomial with big-integer coefficients, little-endian.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    c: Vec<BigInt>,
}

impl UPoly {
    pub fn new(mut c: Vec<BigInt>) -> Self {
        ring::trim(&mut c);
        UPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        UPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn constant(v: BigInt) -> Self {
        UPoly::new(vec![v])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        UPoly::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        ring::degree(&self.c)
    }

    pub fn lc(&self) -> BigInt {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> UPoly {
        UPoly { c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> UPoly {
        UPoly::new(self.c.iter().map(|v| v * k).collect())
    }

    pub fn pow(&self, e: u32) -> UPoly {
        ring::ExactRing::pow(self, e as u64)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * BigInt::from(i))
                .collect(),
        )
    }

    /// Gcd of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.c.iter().fold(BigInt::zero(), |g, v| g.gcd(v))
    }

    /// Primitive part normalized to a positive leading coefficient.
    pub fn primitive_part(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        UPoly::new(self.c.iter().map(|v| v / &g).collect())
    }

    /// Quotient `self / d`, or `None` if `d` does not divide `self` in `Z[x]`.
    pub fn div_exact_checked(&self, d: &UPoly) -> Option<UPoly> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(UPoly::zero());
        }
        let ds = self.degree()?;
        if ds < dd {
            return None;
        }
        let mut r = self.c.clone();
        let mut q = vec![BigInt::zero(); ds - dd + 1];
        let ld = &d.c[dd];
        for k in (0..=ds - dd).rev() {
            let top = &r[k + dd];
            if top.is_zero() {
                continue;
            }
            let (qk, rem) = top.div_rem(ld);
            if !rem.is_zero() {
                return None;
            }
            for (i, dc) in d.c.iter().enumerate() {
                r[k + i] -= &qk * dc;
            }
            q[k] = qk;
        }
        if r.iter().any(|v| !v.is_zero()) {
            return None;
        }
        Some(UPoly::new(q))
    }

    pub fn prem(&self, d: &UPoly) -> UPoly {
        UPoly::new(ring::prem(&self.c, &d.c))
    }

    /// Primitive gcd with positive leading coefficient (ignores contents).
    pub fn gcd_primitive(&self, o: &UPoly) -> UPoly {
        let mut a = self.primitive_part();
        let mut b = o.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = r.primitive_part();
        }
        if a.is_zero() {
            UPoly::constant(BigInt::one())
        } else {
            a
        }
    }

    /// Yun square-free decomposition of the primitive part: returns
    /// `(f_i, i)` with `pp(self) = ± ∏ f_i^i`, each `f_i` primitive, square-free
    /// and of positive degree.
    pub fn square_free_decomposition(&self) -> Vec<(UPoly, usize)> {
        let a = self.primitive_part();
        if a.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let da = a.derivative();
        let b = a.gcd_primitive(&da);
        let mut c = a.div_exact_checked(&b).expect("gcd divides");
        let mut d = da
            .div_exact_checked(&b)
            .expect("gcd divides derivative")
            .sub(&c.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while c.degree().unwrap_or(0) > 0 {
            let ai = c.gcd_primitive(&d);
            c = c.div_exact_checked(&ai).expect("factor divides");
            d = d
                .div_exact_checked(&ai)
                .expect("factor divides")
                .sub(&c.derivative());
            if ai.degree().unwrap_or(0) > 0 {
                out.push((ai, i));
            }
            i += 1;
        }
        out
    }

    pub fn square_free_part(&self) -> UPoly {
        self.square_free_decomposition()
            .into_iter()
            .fold(UPoly::constant(BigInt::one()), |acc, (f, _)| acc.mul(&f))
    }

    /// `p(x + 1)`.
    pub fn taylor_shift_one(&self) -> UPoly {
        let mut a = self.c.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = a[j + 1].clone();
                a[j] += t;
            }
        }
        UPoly::new(a)
    }

    /// `x^deg · p(1/x)`.
    pub fn reverse(&self) -> UPoly {
        let mut c = self.c.clone();
        c.reverse();
        UPoly::new(c)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, v)| if i % 2 == 1 { -v } else { v.clone() })
                .collect(),
        )
    }

    /// `p(2^k x)`.
    pub fn scale_arg_pow2(&self, k: u64) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, v)| v << (k * i as u64))
                .collect(),
        )
    }

    /// `2^deg · p(x / 2)`.
    pub fn halve_arg(&self) -> UPoly {
        let Some(n) = self.degree() else {
            return UPoly::zero();
        };
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, v)| v << (n - i))
                .collect(),
        )
    }

    /// Number of sign changes in the coefficient sequence.
    pub fn sign_variations(&self) -> usize {
        let mut last = Sign::NoSign;
        let mut count = 0;
        for v in &self.c {
            let s = v.sign();
            if s == Sign::NoSign {
                continue;
            }
            if last != Sign::NoSign && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.c.iter().rev().fold(BigInt::zero(), |acc, v| acc * x + v)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.c
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, v| acc * x + BigRational::from_integer(v.clone()))
    }

    /// Sign of `p(num/den)` for `den > 0`, evaluated homogeneously in integers.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        let (num, den) = (x.numer(), x.denom());
        debug_assert!(den.is_positive());
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for v in self.c.iter().rev() {
            acc = acc * num + v * &dpow;
            dpow *= den;
        }
        match acc.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Coefficients as floats, all scaled by one common power of two so the
    /// largest has magnitude below 2^60. Root locations are unaffected.
    pub fn to_f64_scaled(&self) -> Vec<f64> {
        let bits = self.c.iter().map(|v| v.bits()).max().unwrap_or(0);
        let shift = bits.saturating_sub(60);
        self.c
            .iter()
            .map(|v| {
                let s: BigInt = if v.is_negative() { -((-v) >> shift) } else { v >> shift };
                s.to_f64().unwrap_or(0.0)
            })
            .collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.to_f64_scaled().iter().rev().fold(0.0, |acc, v| acc * x + v)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v.to_f64().unwrap_or(f64::NAN))
    }

    /// Resultant with `o` as univariate integer polynomials.
    pub fn resultant(&self, o: &UPoly) -> BigInt {
        ring::resultant(&self.c, &o.c)
    }

    pub fn to_text_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, v) in self.c.iter().enumerate().rev() {
            if v.is_zero() {
                continue;
            }
            let mag = v.abs();
            let neg = v.is_negative();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly({})", self.to_text_in("t"))
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text_in("t"))
    }
}

impl Serialize for UPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.c.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

impl ring::ExactRing for UPoly {
    fn zero() -> Self {
        UPoly::zero()
    }
    fn one() -> Self {
        UPoly::constant(<BigInt as One>::one())
    }
    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        UPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        UPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        UPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        UPoly::neg(self)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self.div_exact_checked(o).expect("inexact polynomial division")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = UPoly::from_i64(&[-1, 1]);
        let b = UPoly::from_i64(&[1, 1]);
        assert_eq!(a.mul(&b), UPoly::from_i64(&[-1, 0, 1]));
        assert_eq!(a.mul(&b).div_exact_checked(&a), Some(b.clone()));
        assert_eq!(UPoly::from_i64(&[1, 0, 1]).div_exact_checked(&a), None);
        assert_eq!(UPoly::from_i64(&[1, 2, 3]).derivative(), UPoly::from_i64(&[2, 6]));
    }

    #[test]
    fn taylor_shift() {
        // (x+1)^2 = x^2 + 2x + 1
        assert_eq!(UPoly::from_i64(&[0, 0, 1]).taylor_shift_one(), UPoly::from_i64(&[1, 2, 1]));
        let p = UPoly::from_i64(&[3, -1, 4, 1, -5]);
        let s = p.taylor_shift_one();
        for x in -3..4 {
            assert_eq!(s.eval_int(&BigInt::from(x)), p.eval_int(&BigInt::from(x + 1)));
        }
    }

    #[test]
    fn square_free() {
        // (x-1)^2 (x+3)
        let p = UPoly::from_i64(&[-1, 1]).pow(2).mul(&UPoly::from_i64(&[3, 1]));
        let d = p.square_free_decomposition();
        assert_eq!(d, vec![(UPoly::from_i64(&[3, 1]), 1), (UPoly::from_i64(&[-1, 1]), 2)]);
        assert_eq!(p.square_free_part(), UPoly::from_i64(&[-3, 2, 1]));
    }

    #[test]
    fn gcd_and_sign() {
        let a = UPoly::from_i64(&[-1, 1]).mul(&UPoly::from_i64(&[2, 0, 1]));
        let b = UPoly::from_i64(&[-1, 1]).mul(&UPoly::from_i64(&[5, 1]));
        assert_eq!(a.gcd_primitive(&b), UPoly::from_i64(&[-1, 1]));
        let q = UPoly::from_i64(&[-2, 0, 1]);
        assert_eq!(q.sign_at(&BigRational::new(3.into(), 2.into())), 1);
        assert_eq!(q.sign_at(&BigRational::new(1.into(), 1.into())), -1);
        assert_eq!(q.to_text_in("x"), "x^2 - 2");
    }
}
