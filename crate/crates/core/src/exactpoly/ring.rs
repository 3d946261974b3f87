//! Dense polynomials over an exact integral domain and the subresultant
//! resultant. Coefficient vectors are little-endian (`c[i]` multiplies `x^i`)
//! and kept trimmed (no trailing zeros).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// An integral domain with exact division.
pub trait ExactRing: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self / o`, which must be exact.
    fn div_exact(&self, o: &Self) -> Self;

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl ExactRing for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, o: &Self) -> Self {
        let (q, r) = self.div_rem(o);
        assert!(Zero::is_zero(&r), "inexact integer division");
        q
    }
}

pub(crate) fn trim<R: ExactRing>(v: &mut Vec<R>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Degree, with `None` for the zero polynomial.
pub(crate) fn degree<R: ExactRing>(v: &[R]) -> Option<usize> {
    v.len().checked_sub(1)
}

/// `lc(b)^(deg a - deg b + 1) · a mod b`.
pub(crate) fn prem<R: ExactRing>(a: &[R], b: &[R]) -> Vec<R> {
    let db = degree(b).expect("pseudo-division by zero");
    let lb = b[db].clone();
    let mut r: Vec<R> = a.to_vec();
    trim(&mut r);
    let Some(da) = degree(&r) else {
        return r;
    };
    if da < db {
        return r;
    }
    let mut e = (da - db + 1) as u64;
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(&lb);
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = r[i + shift].sub(&lr.mul(bc));
        }
        debug_assert!(r[dr].is_zero());
        trim(&mut r);
        e -= 1;
    }
    if e > 0 {
        let f = lb.pow(e);
        for c in r.iter_mut() {
            *c = c.mul(&f);
        }
    }
    r
}

/// Resultant `Res(a, b)` by the subresultant pseudo-remainder sequence.
pub(crate) fn resultant<R: ExactRing>(a: &[R], b: &[R]) -> R {
    let mut a: Vec<R> = a.to_vec();
    let mut b: Vec<R> = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    let (Some(da), Some(db)) = (degree(&a), degree(&b)) else {
        return R::zero();
    };
    let mut s = R::one();
    if da < db {
        std::mem::swap(&mut a, &mut b);
        if da % 2 == 1 && db % 2 == 1 {
            s = s.neg();
        }
    }
    let db = degree(&b).expect("nonzero");
    if db == 0 {
        return s.mul(&b[0].pow(degree(&a).expect("nonzero") as u64));
    }
    let mut g = R::one();
    let mut h = R::one();
    loop {
        let da = degree(&a).expect("nonzero");
        let db = degree(&b).expect("nonzero");
        let delta = (da - db) as u64;
        if da % 2 == 1 && db % 2 == 1 {
            s = s.neg();
        }
        let r = prem(&a, &b);
        a = b;
        let denom = g.mul(&h.pow(delta));
        b = r.iter().map(|c| c.div_exact(&denom)).collect();
        g = a[degree(&a).expect("nonzero")].clone();
        // h <- g^delta / h^(delta-1)
        h = if delta == 0 {
            h
        } else {
            g.pow(delta).div_exact(&h.pow(delta - 1))
        };
        match degree(&b) {
            None => return R::zero(),
            Some(0) => {
                let da = degree(&a).expect("nonzero") as u64;
                let t = b[0].pow(da).div_exact(&h.pow(da - 1));
                return s.mul(&t);
            }
            Some(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn integer_resultants() {
        // Res(x^2 - 2, x - 1) = -1
        assert_eq!(resultant(&bi(&[-2, 0, 1]), &bi(&[-1, 1])), BigInt::from(-1));
        // Res(x - 3, x - 5) = -2
        assert_eq!(resultant(&bi(&[-3, 1]), &bi(&[-5, 1])), BigInt::from(-2));
        // common root
        assert_eq!(resultant(&bi(&[2, -3, 1]), &bi(&[-1, 1])), BigInt::from(0));
        // constants
        assert_eq!(resultant(&bi(&[3]), &bi(&[1, 0, 1])), BigInt::from(9));
    }

    #[test]
    fn prem_matches_definition() {
        let a = bi(&[1, 2, 3, 4]);
        let b = bi(&[1, 0, 2]);
        let r = prem(&a, &b);
        assert!(r.len() < 3);
    }
}
