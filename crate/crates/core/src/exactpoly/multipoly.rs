use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Sparse multivariate polynomial with big-integer coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(vars: Vec<String>) -> Self {
        MultiPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: BigInt) -> Self {
        let mut p = MultiPoly::zero(vars);
        let arity = p.vars.len();
        p.add_term(vec![0; arity], c);
        p
    }

    pub fn var(vars: Vec<String>, k: usize) -> Self {
        assert!(k < vars.len(), "variable index out of range");
        let mut e = vec![0; vars.len()];
        e[k] = 1;
        let mut p = MultiPoly::zero(vars);
        p.add_term(e, BigInt::one());
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(vars: Vec<String>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut p = MultiPoly::zero(vars);
        for (e, c) in terms {
            if e.len() != p.vars.len() {
                return Err(Error::Invalid(format!(
                    "exponent tuple of arity {} for {} variables",
                    e.len(),
                    p.vars.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&vec![0; self.vars.len()])
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, k: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[k]).max()
    }

    fn check_vars(&self, o: &MultiPoly) {
        assert_eq!(self.vars, o.vars, "polynomials over different variable lists");
    }

    pub fn add(&self, o: &MultiPoly) -> MultiPoly {
        self.check_vars(o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> MultiPoly {
        let mut out = MultiPoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        self.check_vars(o);
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly { vars: self.vars.clone(), terms: acc }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.vars.clone(), BigInt::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes `v_k ↦ -v_k`.
    pub fn negate_var(&self, k: usize) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), if e[k] % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// Halves every exponent; `None` if some exponent is odd.
    pub fn halve_exponents(&self) -> Option<MultiPoly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e.iter().any(|v| v % 2 == 1) {
                return None;
            }
            terms.insert(e.iter().map(|v| v / 2).collect(), c.clone());
        }
        Some(MultiPoly { vars: self.vars.clone(), terms })
    }

    /// Renames variable positions: variable `k` of `self` becomes variable
    /// `perm[k]` of the result (same names list).
    pub fn permute_vars(&self, perm: &[usize]) -> MultiPoly {
        assert_eq!(perm.len(), self.vars.len());
        let mut out = MultiPoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            let mut f = vec![0; e.len()];
            for (k, &v) in e.iter().enumerate() {
                f[perm[k]] = v;
            }
            out.add_term(f, c.clone());
        }
        out
    }

    pub fn eval_i64(&self, point: &[i64]) -> BigInt {
        assert_eq!(point.len(), self.vars.len());
        let mut total = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&x, &k) in point.iter().zip(e) {
                t *= BigInt::from(x).pow(k);
            }
            total += t;
        }
        total
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (&x, &k) in point.iter().zip(e) {
                    t *= x.powi(k as i32);
                }
                t
            })
            .sum()
    }

    /// Terms in graded order, highest total degree first, ties broken by
    /// descending exponent tuple.
    fn display_order(&self) -> Vec<(&Vec<u32>, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        v
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in self.display_order() {
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{k}", self.vars[i])
                    }
                })
                .collect();
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{mag}*{}", mono.join("*")));
            }
        }
        out
    }

    pub fn from_json(value: &serde_json::Value) -> Result<MultiPoly> {
        #[derive(serde::Deserialize)]
        struct Term {
            exp: Vec<u32>,
            coef: String,
        }
        #[derive(serde::Deserialize)]
        struct Doc {
            vars: Vec<String>,
            terms: Vec<Term>,
        }
        let doc: Doc = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let c: BigInt = t
                .coef
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {:?}", t.coef)))?;
            terms.push((t.exp, c));
        }
        MultiPoly::from_terms(doc.vars, terms)
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            exp: &'a [u32],
            coef: String,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            vars: &'a [String],
            terms: Vec<Term<'a>>,
        }
        Doc {
            vars: &self.vars,
            terms: self
                .display_order()
                .into_iter()
                .map(|(e, c)| Term { exp: e, coef: c.to_string() })
                .collect(),
        }
        .serialize(s)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.vars.join(","), self.to_text())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn expand_square() {
        let x = MultiPoly::var(xy(), 0);
        let y = MultiPoly::var(xy(), 1);
        let s = x.add(&y).pow(2);
        assert_eq!(s.to_text(), "x^2 + 2*x*y + y^2");
        assert!(s.sub(&s).is_zero());
        assert_eq!(s.negate_var(1).to_text(), "x^2 - 2*x*y + y^2");
    }

    #[test]
    fn json_round_trip() {
        let x = MultiPoly::var(xy(), 0);
        let p = x.pow(3).sub(&MultiPoly::constant(xy(), 7.into()));
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["terms"][0]["coef"], "1");
        assert_eq!(MultiPoly::from_json(&v).unwrap(), p);
    }
}
