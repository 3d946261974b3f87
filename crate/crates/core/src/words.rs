//! Free-group words over named generator alphabets.
//!
//! Words are stored run-length encoded as syllables `g^k` and are always kept
//! freely reduced: adjacent syllables carry distinct generators and no
//! exponent is zero. Alphabets are compared by identity token, never by their
//! names, so two presentations that happen to share generator names cannot
//! be mixed by accident; use [`Word::transfer`] to move a word across
//! alphabets explicitly.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

static NEXT_ALPHABET_ID: AtomicU64 = AtomicU64::new(1);

/// An ordered list of distinct generator names.
///
/// The order is fixed at construction; it drives shortlex comparisons and the
/// column order of coset tables.
pub struct Alphabet {
    id: u64,
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Arc<Alphabet>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if !valid_name(name) {
                return Err(Error::InvalidName(name.clone()));
            }
            if lookup.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Arc::new(Alphabet {
            id: NEXT_ALPHABET_ID.fetch_add(1, Ordering::Relaxed),
            names,
            lookup,
        }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn same(&self, other: &Alphabet) -> bool {
        self.id == other.id
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet#{}{:?}", self.id, self.names)
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "1"
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '*' | '^' | '[' | ']' | '"' | ',' | '(' | ')'))
}

/// One run `g^k` of a word; `exp` is never zero inside a [`Word`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Syllable {
    pub gen: usize,
    pub exp: i64,
}

impl Syllable {
    pub fn new(gen: usize, exp: i64) -> Self {
        Syllable { gen, exp }
    }
}

/// Appends `s` to a freely reduced syllable stack, keeping it reduced.
pub(crate) fn push_reduced(stack: &mut Vec<Syllable>, s: Syllable) {
    if s.exp == 0 {
        return;
    }
    match stack.last_mut() {
        Some(top) if top.gen == s.gen => {
            top.exp += s.exp;
            if top.exp == 0 {
                stack.pop();
            }
        }
        _ => stack.push(s),
    }
}

pub(crate) fn reduce_syllables<I: IntoIterator<Item = Syllable>>(iter: I) -> Vec<Syllable> {
    let mut out = Vec::new();
    for s in iter {
        push_reduced(&mut out, s);
    }
    out
}

pub(crate) fn invert_syllables(syl: &[Syllable]) -> Vec<Syllable> {
    syl.iter().rev().map(|s| Syllable::new(s.gen, -s.exp)).collect()
}

/// A freely reduced element of the free group on an [`Alphabet`].
#[derive(Clone)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity(alphabet: &Arc<Alphabet>) -> Word {
        Word {
            alphabet: alphabet.clone(),
            syllables: Vec::new(),
        }
    }

    pub fn generator(alphabet: &Arc<Alphabet>, gen: usize) -> Word {
        assert!(gen < alphabet.len(), "generator index {gen} out of range");
        Word {
            alphabet: alphabet.clone(),
            syllables: vec![Syllable::new(gen, 1)],
        }
    }

    pub fn named(alphabet: &Arc<Alphabet>, name: &str) -> Result<Word> {
        let gen = alphabet
            .index_of(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(Word::generator(alphabet, gen))
    }

    /// Builds a word from arbitrary syllables, freely reducing them.
    pub fn from_syllables<I>(alphabet: &Arc<Alphabet>, syllables: I) -> Result<Word>
    where
        I: IntoIterator<Item = Syllable>,
    {
        let mut out = Vec::new();
        for s in syllables {
            if s.gen >= alphabet.len() {
                return Err(Error::OutOfRange(format!(
                    "generator index {} for alphabet of size {}",
                    s.gen,
                    alphabet.len()
                )));
            }
            push_reduced(&mut out, s);
        }
        Ok(Word {
            alphabet: alphabet.clone(),
            syllables: out,
        })
    }

    /// Builds a word from `(generator index, exponent)` pairs.
    pub fn from_pairs(alphabet: &Arc<Alphabet>, pairs: &[(usize, i64)]) -> Result<Word> {
        Word::from_syllables(alphabet, pairs.iter().map(|&(g, e)| Syllable::new(g, e)))
    }

    /// Builds a word from `(name, exponent)` pairs (the JSON form).
    pub fn from_named_pairs<S: AsRef<str>>(alphabet: &Arc<Alphabet>, pairs: &[(S, i64)]) -> Result<Word> {
        let mut syl = Vec::with_capacity(pairs.len());
        for (name, exp) in pairs {
            let gen = alphabet
                .index_of(name.as_ref())
                .ok_or_else(|| Error::UnknownGenerator(name.as_ref().to_string()))?;
            syl.push(Syllable::new(gen, *exp));
        }
        Word::from_syllables(alphabet, syl)
    }

    pub(crate) fn from_reduced_unchecked(alphabet: &Arc<Alphabet>, syllables: Vec<Syllable>) -> Word {
        debug_assert!(syllables.windows(2).all(|w| w[0].gen != w[1].gen));
        debug_assert!(syllables.iter().all(|s| s.exp != 0));
        Word {
            alphabet: alphabet.clone(),
            syllables,
        }
    }

    /// Parses the text form `g0*g1^-1`; the identity is spelled `1`.
    pub fn parse(alphabet: &Arc<Alphabet>, text: &str) -> Result<Word> {
        let text = text.trim();
        if text == "1" {
            return Ok(Word::identity(alphabet));
        }
        if text.is_empty() {
            return Err(Error::Parse("empty word (use `1` for the identity)".into()));
        }
        let mut syl = Vec::new();
        for token in text.split('*') {
            let token = token.trim();
            let (name, exp) = match token.split_once('^') {
                Some((name, exp)) => {
                    let exp: i64 = exp
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
                    if exp == 0 {
                        return Err(Error::Parse(format!("zero exponent in {token:?}")));
                    }
                    (name.trim(), exp)
                }
                None => (token, 1),
            };
            let gen = alphabet
                .index_of(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            syl.push(Syllable::new(gen, exp));
        }
        Word::from_syllables(alphabet, syl)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters, i.e. the sum of absolute exponents.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|s| s.exp.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Letters as `(generator, ±1)`, left to right.
    pub fn letters(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.syllables
            .iter()
            .flat_map(|s| std::iter::repeat_n((s.gen, s.exp.signum()), s.exp.unsigned_abs() as usize))
    }

    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut v = vec![0; self.alphabet.len()];
        for s in &self.syllables {
            v[s.gen] += s.exp;
        }
        v
    }

    pub fn generators_used(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.syllables.iter().map(|s| s.gen).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    fn check_same(&self, other: &Word) -> Result<()> {
        if self.alphabet.same(&other.alphabet) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch {
                left: format!("{:?}", self.alphabet),
                right: format!("{:?}", other.alphabet),
            })
        }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.check_same(other)?;
        let mut out = self.syllables.clone();
        for &s in &other.syllables {
            push_reduced(&mut out, s);
        }
        Ok(Word::from_reduced_unchecked(&self.alphabet, out))
    }

    pub fn inverse(&self) -> Word {
        Word::from_reduced_unchecked(&self.alphabet, invert_syllables(&self.syllables))
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Vec::new();
        for _ in 0..k.unsigned_abs() {
            for &s in &base.syllables {
                push_reduced(&mut out, s);
            }
        }
        Word::from_reduced_unchecked(&self.alphabet, out)
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Word, b: &Word) -> Result<Word> {
        a.check_same(b)?;
        let mut out = a.syllables.clone();
        for s in b
            .syllables
            .iter()
            .copied()
            .chain(invert_syllables(&a.syllables))
            .chain(invert_syllables(&b.syllables))
        {
            push_reduced(&mut out, s);
        }
        Ok(Word::from_reduced_unchecked(&a.alphabet, out))
    }

    /// `by · self · by⁻¹`.
    pub fn conjugate(&self, by: &Word) -> Result<Word> {
        self.check_same(by)?;
        let mut out = by.syllables.clone();
        for s in self
            .syllables
            .iter()
            .copied()
            .chain(invert_syllables(&by.syllables))
        {
            push_reduced(&mut out, s);
        }
        Ok(Word::from_reduced_unchecked(&self.alphabet, out))
    }

    /// Product of several words over one alphabet.
    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(alphabet: &Arc<Alphabet>, words: I) -> Result<Word> {
        let mut acc = Word::identity(alphabet);
        for w in words {
            acc = acc.concat(w)?;
        }
        Ok(acc)
    }

    /// Splits `self = c · core · c⁻¹` with `core` cyclically reduced (its
    /// first letter is not the inverse of its last).
    pub fn cyclic_decomposition(&self) -> (Word, Word) {
        let syl = &self.syllables;
        let (mut lo, mut hi) = (0usize, syl.len());
        let mut conj = Vec::new();
        while hi >= lo + 2 && syl[lo].gen == syl[hi - 1].gen && syl[lo].exp + syl[hi - 1].exp == 0 {
            conj.push(syl[lo]);
            lo += 1;
            hi -= 1;
        }
        let mut core: Vec<Syllable> = syl[lo..hi].to_vec();
        let m = core.len();
        if m >= 2 && core[0].gen == core[m - 1].gen && core[0].exp.signum() != core[m - 1].exp.signum() {
            // g^a u g^b with opposite signs: peel min(|a|, |b|) letters
            let (a, b) = (core[0].exp, core[m - 1].exp);
            let g = core[0].gen;
            if a.abs() >= b.abs() {
                conj.push(Syllable::new(g, -b));
                core[0].exp = a + b;
                core.pop();
            } else {
                conj.push(Syllable::new(g, a));
                core[m - 1].exp = a + b;
                core.remove(0);
            }
            core.retain(|s| s.exp != 0);
        }
        (
            Word::from_reduced_unchecked(&self.alphabet, reduce_syllables(conj)),
            Word::from_reduced_unchecked(&self.alphabet, reduce_syllables(core)),
        )
    }

    pub fn cyclically_reduced(&self) -> Word {
        self.cyclic_decomposition().1
    }

    /// All letter-level cyclic rotations of a cyclically reduced word.
    pub fn rotations(&self) -> Vec<Word> {
        let letters: Vec<(usize, i64)> = self.letters().collect();
        let n = letters.len();
        let mut out = Vec::with_capacity(n.max(1));
        if n == 0 {
            out.push(self.clone());
            return out;
        }
        for k in 0..n {
            let syl = reduce_syllables(
                letters[k..]
                    .iter()
                    .chain(letters[..k].iter())
                    .map(|&(g, e)| Syllable::new(g, e)),
            );
            out.push(Word::from_reduced_unchecked(&self.alphabet, syl));
        }
        out
    }

    /// Canonical representative of the class of `self` under cyclic rotation
    /// and inversion (used to deduplicate relators).
    pub fn cyclic_canonical(&self) -> Word {
        let core = self.cyclically_reduced();
        let inv = core.inverse();
        let mut best: Option<Word> = None;
        for cand in core.rotations().into_iter().chain(inv.rotations()) {
            let better = match &best {
                None => true,
                Some(b) => cand.shortlex_cmp(b) == std::cmp::Ordering::Less,
            };
            if better {
                best = Some(cand);
            }
        }
        best.expect("at least one rotation")
    }

    /// Shortlex order: shorter first, then letterwise with `g < g⁻¹` and
    /// generators in alphabet order.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                let key = |(g, e): (usize, i64)| (g, if e > 0 { 0u8 } else { 1u8 });
                self.letters().map(key).cmp(other.letters().map(key))
            })
    }

    /// Applies the homomorphism sending generator `i` to `images[i]`.
    pub fn substitute(&self, target: &Arc<Alphabet>, images: &[Word]) -> Result<Word> {
        if images.len() != self.alphabet.len() {
            return Err(Error::Invalid(format!(
                "substitution has {} images for {} generators",
                images.len(),
                self.alphabet.len()
            )));
        }
        let mut out = Vec::new();
        for s in &self.syllables {
            let img = &images[s.gen];
            if !img.alphabet.same(target) {
                return Err(Error::AlphabetMismatch {
                    left: format!("{:?}", img.alphabet),
                    right: format!("{target:?}"),
                });
            }
            let piece = if s.exp > 0 {
                img.syllables.clone()
            } else {
                invert_syllables(&img.syllables)
            };
            for _ in 0..s.exp.unsigned_abs() {
                for &p in &piece {
                    push_reduced(&mut out, p);
                }
            }
        }
        Ok(Word::from_reduced_unchecked(target, out))
    }

    /// Re-expresses the word over another alphabet by matching generator names.
    pub fn transfer(&self, target: &Arc<Alphabet>) -> Result<Word> {
        let mut syl = Vec::with_capacity(self.syllables.len());
        for s in &self.syllables {
            let name = self.alphabet.name(s.gen);
            let gen = target
                .index_of(name)
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            syl.push(Syllable::new(gen, s.exp));
        }
        Word::from_syllables(target, syl)
    }

    pub fn to_text(&self) -> String {
        if self.syllables.is_empty() {
            return "1".to_string();
        }
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| {
                let name = self.alphabet.name(s.gen);
                if s.exp == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{}", s.exp)
                }
            })
            .collect();
        parts.join("*")
    }

    /// JSON form: `[[name, exponent], ...]`.
    pub fn to_named_pairs(&self) -> Vec<(String, i64)> {
        self.syllables
            .iter()
            .map(|s| (self.alphabet.name(s.gen).to_string(), s.exp))
            .collect()
    }

    pub fn from_json(alphabet: &Arc<Alphabet>, value: &serde_json::Value) -> Result<Word> {
        let pairs: Vec<(String, i64)> =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Word::from_named_pairs(alphabet, &pairs)
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.same(&other.alphabet) && self.syllables == other.syllables
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alphabet.id.hash(state);
        self.syllables.hash(state);
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.to_text())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.syllables.len()))?;
        for s in &self.syllables {
            seq.serialize_element(&(self.alphabet.name(s.gen), s.exp))?;
        }
        seq.end()
    }
}

impl std::ops::Mul for &Word {
    type Output = Word;

    /// Panics on alphabet mismatch; use [`Word::concat`] for a checked product.
    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs).expect("product of words over different alphabets")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gam() -> Arc<Alphabet> {
        Alphabet::new(["g0", "g1", "g2", "g3"]).unwrap()
    }

    fn w(a: &Arc<Alphabet>, s: &str) -> Word {
        Word::parse(a, s).unwrap()
    }

    #[test]
    fn concat_cancels() {
        let a = gam();
        let g = w(&a, "g1");
        assert!((&g * &g.inverse()).is_identity());
        assert_eq!(&w(&a, "g0*g1") * &w(&a, "g1^-1*g0"), w(&a, "g0^2"));
        assert_eq!(&Word::identity(&a) * &w(&a, "g2*g3"), w(&a, "g2*g3"));
    }

    #[test]
    fn inverse_examples() {
        let a = gam();
        assert_eq!(w(&a, "g1*g2").inverse(), w(&a, "g2^-1*g1^-1"));
        assert!(Word::identity(&a).inverse().is_identity());
        assert_eq!(w(&a, "g1^2").inverse(), w(&a, "g1^-2"));
    }

    #[test]
    fn commutator_and_conjugate() {
        let a = gam();
        let (g1, g2) = (w(&a, "g1"), w(&a, "g2"));
        assert_eq!(
            Word::commutator(&g1, &g2).unwrap().to_text(),
            "g1*g2*g1^-1*g2^-1"
        );
        let x = w(&a, "g0*g2^3*g1");
        assert!(Word::commutator(&x, &x).unwrap().is_identity());
        assert!(Word::commutator(&x, &Word::identity(&a)).unwrap().is_identity());
        assert_eq!(
            w(&a, "g0").conjugate(&g1).unwrap().to_text(),
            "g1*g0*g1^-1"
        );
        assert_eq!(x.conjugate(&Word::identity(&a)).unwrap(), x);
        assert!(Word::identity(&a).conjugate(&x).unwrap().is_identity());
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let a = gam();
        let b = gam();
        let x = Word::named(&a, "g1").unwrap();
        let y = Word::named(&b, "g1").unwrap();
        assert!(matches!(x.concat(&y), Err(Error::AlphabetMismatch { .. })));
        assert!(Word::commutator(&x, &y).is_err());
        assert!(x.conjugate(&y).is_err());
        assert_eq!(y.transfer(&a).unwrap(), x);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let a = gam();
        for s in ["1", "g0*g1^-1", "g3^-4*g2^7*g0"] {
            assert_eq!(w(&a, s).to_text(), s);
        }
        assert!(Word::parse(&a, "g9").is_err());
        assert!(Word::parse(&a, "g1^0").is_err());
        assert!(Word::parse(&a, "").is_err());
        assert!(Alphabet::new(["x", "x"]).is_err());
        assert!(Alphabet::new(["x*y"]).is_err());
    }

    #[test]
    fn json_form() {
        let a = gam();
        let x = w(&a, "g0*g1^-1");
        let v = serde_json::to_value(&x).unwrap();
        assert_eq!(v, serde_json::json!([["g0", 1], ["g1", -1]]));
        assert_eq!(Word::from_json(&a, &v).unwrap(), x);
    }

    #[test]
    fn cyclic_reduction() {
        let a = gam();
        let x = w(&a, "g1*g2*g0*g2^-1*g1^-1");
        let (c, core) = x.cyclic_decomposition();
        assert_eq!(core, w(&a, "g0"));
        assert_eq!(core.conjugate(&c).unwrap(), x);
        let y = w(&a, "g1^2*g2*g1^-1");
        let (c, core) = y.cyclic_decomposition();
        assert_eq!(core.len(), 2);
        assert_eq!(core.conjugate(&c).unwrap(), y);
        let z = w(&a, "g1*g2*g1^3");
        let (c, core) = z.cyclic_decomposition();
        assert_eq!(core.conjugate(&c).unwrap(), z);
        assert!(c.is_identity());
        let u = w(&a, "g1^3*g2*g1^-1");
        let (c, core) = u.cyclic_decomposition();
        assert_eq!(core, w(&a, "g1^2*g2"));
        assert_eq!(core.conjugate(&c).unwrap(), u);
    }

    #[test]
    fn canonical_identifies_rotations_and_inverses() {
        let a = gam();
        let r = w(&a, "g1*g2*g1^-1*g2^-1");
        let rot = w(&a, "g2*g1^-1*g2^-1*g1");
        assert_eq!(r.cyclic_canonical(), rot.cyclic_canonical());
        assert_eq!(r.cyclic_canonical(), r.inverse().cyclic_canonical());
        assert_ne!(r.cyclic_canonical(), w(&a, "g1*g2").cyclic_canonical());
    }

    #[test]
    fn substitution_is_a_homomorphism() {
        let a = gam();
        let b = Alphabet::new(["x", "y"]).unwrap();
        let imgs = vec![
            Word::parse(&b, "x").unwrap(),
            Word::parse(&b, "y^2").unwrap(),
            Word::parse(&b, "x*y").unwrap(),
            Word::identity(&b),
        ];
        let u = w(&a, "g1*g2^-1*g3");
        let v = w(&a, "g2*g0");
        let lhs = (&u * &v).substitute(&b, &imgs).unwrap();
        let rhs = &u.substitute(&b, &imgs).unwrap() * &v.substitute(&b, &imgs).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.to_text(), "y^2*x");
    }
}
