use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::multipoly::MultiPoly;
use super::ring;
use super::upoly::UPoly;
use crate::error::{Error, Result};

/// Polynomial in `(λ, x)`: entry `k` of `coeffs` is the coefficient of `x^k`
/// as a polynomial in λ.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct BivariatePoly {
    coeffs: Vec<UPoly>,
}

impl BivariatePoly {
    pub fn new(mut coeffs: Vec<UPoly>) -> Result<Self> {
        ring::trim(&mut coeffs);
        if coeffs.is_empty() {
            return Err(Error::Invalid("bivariate polynomial is identically zero".into()));
        }
        Ok(BivariatePoly { coeffs })
    }

    pub fn coeffs(&self) -> &[UPoly] {
        &self.coeffs
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Leading coefficient in x, as a polynomial in λ.
    pub fn leading_coeff(&self) -> &UPoly {
        self.coeffs.last().expect("nonzero")
    }

    pub fn mul(&self, o: &BivariatePoly) -> BivariatePoly {
        let mut out = vec![UPoly::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        BivariatePoly::new(out).expect("product of nonzero polynomials")
    }

    pub fn derivative_x(&self) -> Option<BivariatePoly> {
        let d: Vec<UPoly> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&BigInt::from(k)))
            .collect();
        BivariatePoly::new(d).ok()
    }

    /// `Res_x(self, o)` as a polynomial in λ, by subresultants over `Z[λ]`.
    pub fn resultant_x(&self, o: &BivariatePoly) -> UPoly {
        ring::resultant(&self.coeffs, &o.coeffs)
    }

    /// Specializes λ, returning the x-coefficients (little-endian).
    pub fn at_lambda(&self, lambda: Complex64) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.eval_complex(lambda)).collect()
    }

    /// Specializes λ at an integer (exact).
    pub fn at_lambda_int(&self, lambda: i64) -> UPoly {
        let l = BigInt::from(lambda);
        UPoly::new(self.coeffs.iter().map(|c| c.eval_int(&l)).collect())
    }

    pub fn eval(&self, lambda: Complex64, x: Complex64) -> Complex64 {
        self.at_lambda(lambda)
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coeff = c.to_text_in("l");
            parts.push(match k {
                0 => format!("({coeff})"),
                1 => format!("({coeff})*x"),
                _ => format!("({coeff})*x^{k}"),
            });
        }
        parts.join(" + ")
    }
}

/// Substitutes `y ↦ λ(x+1)` into a polynomial in variables `(x, y)`.
pub fn substitute_pencil(curve: &MultiPoly) -> Result<BivariatePoly> {
    if curve.vars().len() != 2 {
        return Err(Error::Invalid("pencil substitution expects variables (x, y)".into()));
    }
    if curve.is_zero() {
        return Err(Error::Invalid("curve polynomial is zero".into()));
    }
    let dx = curve.degree_in(0).unwrap_or(0) as usize;
    let dy = curve.degree_in(1).unwrap_or(0) as usize;
    let mut coeffs = vec![vec![BigInt::zero(); dy + 1]; dx + dy + 1];
    for (e, c) in curve.terms() {
        let (a, b) = (e[0] as usize, e[1] as usize);
        // c x^a λ^b (x+1)^b
        let mut binom = BigInt::from(1);
        for j in 0..=b {
            coeffs[a + j][b] += c * &binom;
            binom = binom * BigInt::from(b - j) / BigInt::from(j + 1);
        }
    }
    BivariatePoly::new(coeffs.into_iter().map(UPoly::new).collect())
}

impl BivariatePoly {
    /// Floating coefficients in x at a real λ, for diagnostics.
    pub fn at_lambda_f64(&self, lambda: f64) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| {
                c.coeffs()
                    .iter()
                    .rev()
                    .fold(0.0, |acc, v| acc * lambda + v.to_f64().unwrap_or(f64::NAN))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn linear_substitutions() {
        let x = MultiPoly::var(xy(), 0);
        let y = MultiPoly::var(xy(), 1);
        let l2 = substitute_pencil(&y.sub(&x)).unwrap();
        // (λ-1)x + λ
        assert_eq!(l2.coeffs(), &[UPoly::from_i64(&[0, 1]), UPoly::from_i64(&[-1, 1])]);
        let l0 = substitute_pencil(&x.sub(&MultiPoly::constant(xy(), 4.into()))).unwrap();
        assert_eq!(l0.coeffs(), &[UPoly::from_i64(&[-4]), UPoly::from_i64(&[1])]);
    }

    #[test]
    fn resultant_of_quadratic_and_derivative() {
        // x^2 + λx + 3 with derivative 2x + λ: |Res| = |λ^2 - 12|
        let p = BivariatePoly::new(vec![UPoly::from_i64(&[3]), UPoly::from_i64(&[0, 1]), UPoly::from_i64(&[1])])
            .unwrap();
        let r = p.resultant_x(&p.derivative_x().unwrap());
        assert!(r == UPoly::from_i64(&[-12, 0, 1]) || r == UPoly::from_i64(&[12, 0, -1]));
    }
}
