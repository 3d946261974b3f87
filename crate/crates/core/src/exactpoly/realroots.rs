//! Certified real-root isolation: Yun square-free decomposition, then
//! Descartes-rule bisection (Vincent–Collins–Akritas) per factor, then
//! exact rational bisection and a float polish kept inside the interval.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::upoly::UPoly;

/// A real root certified to lie in `[lo, hi]` (exactly one root of its
/// square-free factor there; `lo == hi` marks an exact rational root).
#[derive(Clone, Debug, PartialEq)]
pub struct IsolatedRealRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    pub value: f64,
    pub multiplicity: usize,
}

impl IsolatedRealRoot {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo = self.lo.to_f64().unwrap_or(f64::NEG_INFINITY);
        let hi = self.hi.to_f64().unwrap_or(f64::INFINITY);
        lo <= x && x <= hi
    }
}

impl Serialize for IsolatedRealRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            lo: String,
            hi: String,
            value: f64,
            multiplicity: usize,
        }
        Doc {
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
            value: self.value,
            multiplicity: self.multiplicity,
        }
        .serialize(s)
    }
}

/// Converts a positive float tolerance to an exact dyadic rational not
/// larger than it.
pub fn tolerance_from_f64(tol: f64) -> BigRational {
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
    let mut k = 0u32;
    while 2f64.powi(-(k as i32)) > tol && k < 1000 {
        k += 1;
    }
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Interval under the Möbius map `x = lo + width·t`, `t ∈ (0, 1)`, together
/// with the transformed polynomial in `t`.
struct Cell {
    q: UPoly,
    lo: BigRational,
    width: BigRational,
}

/// Sign variations of `(t+1)^n q(1/(t+1))`: an upper bound on the number of
/// roots of `q` in `(0, 1)` with the same parity.
fn descartes_01(q: &UPoly) -> usize {
    q.reverse().taylor_shift_one().sign_variations()
}

/// Divides out the root `t = 1`.
fn deflate_at_one(q: &UPoly) -> UPoly {
    q.div_exact_checked(&UPoly::from_i64(&[-1, 1]))
        .expect("t = 1 is a root")
}

/// Splits a cell at its midpoint. Returns the exact midpoint root (if any)
/// and the two halves.
fn split(cell: Cell) -> (Option<BigRational>, Cell, Cell) {
    let half = &cell.width / BigInt::from(2);
    let mut left = cell.q.halve_arg();
    let mid = &cell.lo + &half;
    let mut exact = None;
    if left.eval_int(&BigInt::one()).is_zero() {
        exact = Some(mid.clone());
        left = deflate_at_one(&left);
    }
    let right = left.taylor_shift_one();
    (
        exact,
        Cell { q: left, lo: cell.lo, width: half.clone() },
        Cell { q: right, lo: mid, width: half },
    )
}

/// Cells covering the positive roots of a square-free `p` with `p(0) != 0`:
/// each returned cell holds exactly one root, either in its open interior or,
/// for zero-width cells, at `lo` exactly.
fn isolate_positive(p: &UPoly) -> Vec<Cell> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    // Cauchy bound 1 + max|a_i / a_n| rounded up to a power of two.
    let lc = p.lc().abs();
    let max = p.coeffs()[..n].iter().map(|c| c.abs()).max().unwrap_or_default();
    let bound = BigInt::one() + (&max + &lc - BigInt::one()) / &lc;
    let k = bound.bits();
    let root = Cell {
        q: p.scale_arg_pow2(k),
        lo: BigRational::zero(),
        width: BigRational::from_integer(BigInt::one() << k),
    };
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(cell) = stack.pop() {
        match descartes_01(&cell.q) {
            0 => {}
            1 => out.push(cell),
            _ => {
                let (exact, l, r) = split(cell);
                if let Some(m) = exact {
                    out.push(Cell { q: UPoly::zero(), lo: m, width: BigRational::zero() });
                }
                stack.push(r);
                stack.push(l);
            }
        }
    }
    out
}

/// Shrinks a one-root cell of `p` to width <= `tol`, returning `[lo, hi]`.
///
/// Descartes halving is used while an endpoint is itself a root of `p` (this
/// happens next to exact midpoint roots); after that, sign bisection.
fn refine(p: &UPoly, mut cell: Cell, tol: &BigRational) -> (BigRational, BigRational) {
    let two = BigInt::from(2);
    loop {
        if cell.width.is_zero() {
            return (cell.lo.clone(), cell.lo);
        }
        let hi = &cell.lo + &cell.width;
        if cell.width <= *tol {
            return (cell.lo, hi);
        }
        let (s_lo, s_hi) = (p.sign_at(&cell.lo), p.sign_at(&hi));
        if s_lo != 0 && s_hi != 0 {
            debug_assert_ne!(s_lo, s_hi);
            let mut lo = cell.lo;
            let mut hi = hi;
            while &hi - &lo > *tol {
                let mid = (&lo + &hi) / &two;
                let s = p.sign_at(&mid);
                if s == 0 {
                    return (mid.clone(), mid);
                }
                if s == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return (lo, hi);
        }
        let (exact, l, r) = split(cell);
        if let Some(m) = exact {
            return (m.clone(), m);
        }
        cell = if descartes_01(&l.q) == 1 { l } else { r };
    }
}

/// Refined isolating intervals for the real roots of a square-free `p`.
fn isolate_square_free(p: &UPoly, tol: &BigRational) -> Vec<(BigRational, BigRational)> {
    let mut p = p.clone();
    let mut out = Vec::new();
    if p.coeff(0).is_zero() {
        out.push((BigRational::zero(), BigRational::zero()));
        p = p.div_exact_checked(&UPoly::x()).expect("x divides");
    }
    let reflected = p.reflect();
    for cell in isolate_positive(&reflected) {
        let (lo, hi) = refine(&reflected, cell, tol);
        out.push((-hi, -lo));
    }
    for cell in isolate_positive(&p) {
        out.push(refine(&p, cell, tol));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Newton iterations in floats, accepted only while they stay in `[lo, hi]`.
fn polish(p: &UPoly, lo: &BigRational, hi: &BigRational) -> f64 {
    let flo = lo.to_f64().unwrap_or(f64::NAN);
    let fhi = hi.to_f64().unwrap_or(f64::NAN);
    let mut x = ((lo + hi) / BigInt::from(2)).to_f64().unwrap_or(f64::NAN);
    if lo == hi {
        return x;
    }
    let c = p.to_f64_scaled();
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, v)| v * i as f64).collect();
    let horner = |v: &[f64], x: f64| v.iter().rev().fold(0.0, |acc, k| acc * x + k);
    for _ in 0..8 {
        let d = horner(&dc, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - horner(&c, x) / d;
        if !(flo..=fhi).contains(&next) || !next.is_finite() {
            break;
        }
        if next == x {
            break;
        }
        x = next;
    }
    x
}

/// All real roots of `p` in ascending order with multiplicities; each
/// interval has width <= `tol` and the intervals are pairwise disjoint.
pub fn isolate_real_roots(p: &UPoly, tol: &BigRational) -> Vec<IsolatedRealRoot> {
    assert!(!p.is_zero(), "cannot isolate roots of the zero polynomial");
    assert!(tol.is_positive(), "tolerance must be positive");
    let factors = p.square_free_decomposition();
    let mut t = tol.clone();
    loop {
        let mut roots: Vec<(IsolatedRealRoot, &UPoly)> = Vec::new();
        for (f, mult) in &factors {
            for (lo, hi) in isolate_square_free(f, &t) {
                roots.push((IsolatedRealRoot { lo, hi, value: 0.0, multiplicity: *mult }, f));
            }
        }
        roots.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        // factors are coprime, so a finer tolerance eventually separates them
        if roots.windows(2).any(|w| w[0].0.hi >= w[1].0.lo) {
            t = &t / BigInt::from(16);
            continue;
        }
        return roots
            .into_iter()
            .map(|(mut r, f)| {
                r.value = polish(f, &r.lo, &r.hi);
                r
            })
            .collect();
    }
}

/// Number of distinct real roots.
pub fn count_real_roots(p: &UPoly) -> usize {
    p.square_free_decomposition()
        .iter()
        .map(|(f, _)| {
            let g = if f.coeff(0).is_zero() { 1 } else { 0 };
            let h = if g == 1 { f.div_exact_checked(&UPoly::x()).expect("x divides") } else { f.clone() };
            g + isolate_positive(&h).len() + isolate_positive(&h.reflect()).len()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> BigRational {
        tolerance_from_f64(1e-12)
    }

    #[test]
    fn sqrt_two() {
        let r = isolate_real_roots(&UPoly::from_i64(&[-2, 0, 1]), &tol());
        assert_eq!(r.len(), 2);
        assert!((r[0].value + 2f64.sqrt()).abs() < 1e-12);
        assert!((r[1].value - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.iter().all(|x| x.width() <= tol()));
    }

    #[test]
    fn multiplicities() {
        let p = UPoly::from_i64(&[-1, 1]).pow(2).mul(&UPoly::from_i64(&[3, 1]));
        let r = isolate_real_roots(&p, &tol());
        assert_eq!(r.len(), 2);
        assert!((r[0].value + 3.0).abs() < 1e-12 && r[0].multiplicity == 1);
        assert!((r[1].value - 1.0).abs() < 1e-12 && r[1].multiplicity == 2);
    }

    #[test]
    fn dyadic_and_zero_roots() {
        // x (2x - 1)(x - 1/4)(x + 3)... with integer coefficients
        let p = UPoly::x()
            .mul(&UPoly::from_i64(&[-1, 2]))
            .mul(&UPoly::from_i64(&[-1, 4]))
            .mul(&UPoly::from_i64(&[3, 1]))
            .mul(&UPoly::from_i64(&[-2, 5]));
        let r = isolate_real_roots(&p, &tol());
        let v: Vec<f64> = r.iter().map(|x| x.value).collect();
        let want = [-3.0, 0.0, 0.25, 0.4, 0.5];
        assert_eq!(v.len(), 5);
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn no_real_roots() {
        assert!(isolate_real_roots(&UPoly::from_i64(&[1, 0, 1]), &tol()).is_empty());
        assert_eq!(count_real_roots(&UPoly::from_i64(&[5, 0, 0, 0, 1])), 0);
    }
}
