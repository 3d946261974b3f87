//! Catalog of the finitely presented groups studied by this crate.
//!
//! Ambient generators are spelled `g0..gn` (γ₀..γₙ). Covering generators use
//! ASCII names `l1`, `l0`, `l0_12`, ... for λ₁, λ₀, λ₀⁽¹²⁾; [`pretty_name`]
//! renders the Greek form for reports.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::MultiPoly;
use crate::words::{Alphabet, Word};

/// A finite presentation `⟨alphabet | relators⟩`.
#[derive(Clone, Debug)]
pub struct Presentation {
    alphabet: Arc<Alphabet>,
    relators: Vec<Word>,
    label: String,
}

impl Presentation {
    /// Rejects relators over a foreign alphabet and identity relators.
    pub fn new(label: impl Into<String>, alphabet: Arc<Alphabet>, relators: Vec<Word>) -> Result<Self> {
        for (i, r) in relators.iter().enumerate() {
            if !r.alphabet().same(&alphabet) {
                return Err(Error::AlphabetMismatch {
                    left: format!("relator {i}"),
                    right: format!("{alphabet:?}"),
                });
            }
            if r.is_identity() {
                return Err(Error::Invalid(format!("relator {i} is the identity")));
            }
        }
        Ok(Presentation {
            alphabet,
            relators,
            label: label.into(),
        })
    }

    /// Like [`Presentation::new`] but silently drops identity relators.
    pub fn new_dropping_trivial(
        label: impl Into<String>,
        alphabet: Arc<Alphabet>,
        relators: Vec<Word>,
    ) -> Result<Self> {
        let relators = relators.into_iter().filter(|r| !r.is_identity()).collect();
        Presentation::new(label, alphabet, relators)
    }

    pub fn free(label: impl Into<String>, alphabet: Arc<Alphabet>) -> Self {
        Presentation {
            alphabet,
            relators: Vec::new(),
            label: label.into(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn relator_count(&self) -> usize {
        self.relators.len()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_relators(&self, relators: Vec<Word>) -> Result<Self> {
        Presentation::new(self.label.clone(), self.alphabet.clone(), relators)
    }

    /// Parses a word over this presentation's alphabet.
    pub fn word(&self, text: &str) -> Result<Word> {
        Word::parse(&self.alphabet, text)
    }

    pub fn generator(&self, name: &str) -> Result<Word> {
        Word::named(&self.alphabet, name)
    }

    /// Moves the presentation onto another alphabet by generator name.
    pub fn transfer(&self, target: &Arc<Alphabet>) -> Result<Self> {
        let relators = self
            .relators
            .iter()
            .map(|r| r.transfer(target))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(self.label.clone(), target.clone(), relators)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("presentation must be a JSON object".into()))?;
        let label = obj
            .get("label")
            .and_then(|v| v.as_str())
            .unwrap_or("")
            .to_string();
        let gens: Vec<String> = serde_json::from_value(
            obj.get("generators")
                .cloned()
                .ok_or_else(|| Error::Parse("missing `generators`".into()))?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        let alphabet = Alphabet::new(gens)?;
        let rels = obj
            .get("relators")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Parse("missing `relators`".into()))?;
        let relators = rels
            .iter()
            .map(|r| Word::from_json(&alphabet, r))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(label, alphabet, relators)
    }
}

impl Serialize for Presentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Presentation", 3)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("generators", self.alphabet.names())?;
        s.serialize_field("relators", &self.relators)?;
        s.end()
    }
}

/// An unordered pair of disjoint index sets, stored with the
/// lexicographically smaller set first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexPair {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl IndexPair {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>, n: usize) -> Result<Self> {
        a.sort_unstable();
        b.sort_unstable();
        let distinct = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if a.is_empty() || b.is_empty() {
            return Err(Error::Invalid("index sets must be nonempty".into()));
        }
        if !distinct(&a) || !distinct(&b) {
            return Err(Error::Invalid("index sets must not repeat indices".into()));
        }
        if a.iter().chain(&b).any(|&k| k == 0 || k > n) {
            return Err(Error::OutOfRange(format!("indices must lie in 1..={n}")));
        }
        if a.iter().any(|k| b.contains(k)) {
            return Err(Error::Invalid("index sets must be disjoint".into()));
        }
        if a.len() + b.len() > n.saturating_sub(1) {
            return Err(Error::Invalid(format!("|I|+|J| must be at most {}", n - 1)));
        }
        if b < a {
            std::mem::swap(&mut a, &mut b);
        }
        Ok(IndexPair { i: a, j: b })
    }
}

fn gamma_alphabet(n: usize) -> Arc<Alphabet> {
    Alphabet::new((0..=n).map(|k| format!("g{k}"))).expect("valid names")
}

fn gamma(alph: &Arc<Alphabet>, k: usize) -> Word {
    Word::generator(alph, k)
}

/// `γ_{i₁}⋯γ_{i_p}` for a sorted index set.
fn gamma_product(alph: &Arc<Alphabet>, set: &[usize]) -> Word {
    let pairs: Vec<(usize, i64)> = set.iter().map(|&k| (k, 1)).collect();
    Word::from_pairs(alph, &pairs).expect("indices in range")
}

/// `(γ_kγ₀)²(γ₀γ_k)⁻²`.
fn braid_relator(alph: &Arc<Alphabet>, k: usize) -> Word {
    let a = gamma(alph, k);
    let z = gamma(alph, 0);
    let left = (&a * &z).pow(2);
    let right = (&z * &a).pow(2);
    &left * &right.inverse()
}

fn rij_word(alph: &Arc<Alphabet>, pair: &IndexPair) -> Word {
    let z = gamma(alph, 0);
    let a = z.conjugate(&gamma_product(alph, &pair.i)).expect("same alphabet");
    let b = z.conjugate(&gamma_product(alph, &pair.j)).expect("same alphabet");
    Word::commutator(&a, &b).expect("same alphabet")
}

fn canonical_pairs(n: usize) -> Vec<IndexPair> {
    let mut out = BTreeSet::new();
    let full = 1usize << n;
    let members = |mask: usize| -> Vec<usize> { (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect() };
    for a in 1..full {
        for b in 1..full {
            if a & b != 0 {
                continue;
            }
            let (ia, ib) = (members(a), members(b));
            if ia.len() + ib.len() > n - 1 {
                continue;
            }
            out.insert(IndexPair::new(ia, ib, n).expect("valid by construction"));
        }
    }
    out.into_iter().collect()
}

/// The conjugate-commutator family `[γ_Iγ₀γ_I⁻¹, γ_Jγ₀γ_J⁻¹]`, one per
/// canonical index pair, sorted by pair.
pub fn generate_rij(n: usize) -> Result<Vec<(IndexPair, Word)>> {
    if n < 3 {
        return Err(Error::OutOfRange(format!("generate_rij needs n >= 3, got {n}")));
    }
    if n > 12 {
        return Err(Error::OutOfRange(format!("generate_rij capped at n = 12, got {n}")));
    }
    let alph = gamma_alphabet(n);
    Ok(canonical_pairs(n)
        .into_iter()
        .map(|p| {
            let w = rij_word(&alph, &p);
            (p, w)
        })
        .collect())
}

/// Presentation of π₁(X⁽ⁿ⁾) on `g0..gn`.
///
/// Relators come in catalog order: commutators `[γ_i, γ_j]` for `i < j`,
/// then the conjugate-commutator family, then `(γ_kγ₀)²(γ₀γ_k)⁻²`. For
/// `n ≥ 4` the family is only known to hold, not to be complete, and the
/// label carries a `-conjectural` suffix.
pub fn pi1_xn(n: usize) -> Result<Presentation> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("pi1_xn needs n >= 2, got {n}")));
    }
    if n > 12 {
        return Err(Error::OutOfRange(format!("pi1_xn capped at n = 12, got {n}")));
    }
    let alph = gamma_alphabet(n);
    let mut rels = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            rels.push(Word::commutator(&gamma(&alph, i), &gamma(&alph, j))?);
        }
    }
    if n >= 3 {
        for p in canonical_pairs(n) {
            rels.push(rij_word(&alph, &p));
        }
    }
    for k in 1..=n {
        rels.push(braid_relator(&alph, k));
    }
    let label = if n <= 3 {
        format!("pi1-x{n}")
    } else {
        format!("pi1-x{n}-conjectural")
    };
    Presentation::new(label, alph, rels)
}

/// `F_n(x) = ∏ (1 − Σ ±√x_k)` over all sign patterns, expanded exactly.
///
/// Works in square-root variables `s_k`, multiplies each partial product by
/// its `s_k ↦ −s_k` conjugate, then halves every exponent.
pub fn fc_polynomial(n: usize) -> Result<MultiPoly> {
    if !(1..=6).contains(&n) {
        return Err(Error::OutOfRange(format!("fc_polynomial supports 1 <= n <= 6, got {n}")));
    }
    let vars: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
    let mut p = MultiPoly::constant(vars.clone(), 1.into());
    for k in 0..n {
        p = p.sub(&MultiPoly::var(vars.clone(), k));
    }
    for k in 0..n {
        let q = p.negate_var(k);
        p = p.mul(&q);
    }
    p.halve_exponents()
        .ok_or_else(|| Error::Invalid("odd exponent survived conjugate pairing".into()))
}

fn cover_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (1..(1usize << n))
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect())
        .collect();
    subsets.sort_by(|a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

fn subset_suffix(set: &[usize]) -> String {
    set.iter().map(|k| k.to_string()).collect()
}

/// ASCII names of the covering generators, in the order
/// λ₁..λₙ, λ₀, then λ₀^{(I)} by |I| then lexicographically.
pub fn covering_generator_names(n: usize) -> Result<Vec<String>> {
    check_cover_n(n)?;
    let mut names: Vec<String> = (1..=n).map(|k| format!("l{k}")).collect();
    names.push("l0".into());
    for s in cover_subsets(n) {
        names.push(format!("l0_{}", subset_suffix(&s)));
    }
    Ok(names)
}

fn check_cover_n(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("covering presentations exist for n = 2, 3 only, got {n}")))
    }
}

/// Images of the covering generators in π₁(X⁽ⁿ⁾): λ₀ ↦ γ₀, λ_k ↦ γ_k²,
/// λ₀^{(I)} ↦ γ_Iγ₀γ_I⁻¹. Returned in covering-alphabet order.
pub fn covering_generator_images(n: usize) -> Result<Vec<(String, Word)>> {
    let names = covering_generator_names(n)?;
    let alph = gamma_alphabet(n);
    let mut out = Vec::with_capacity(names.len());
    for k in 1..=n {
        out.push((names[k - 1].clone(), gamma(&alph, k).pow(2)));
    }
    out.push(("l0".into(), gamma(&alph, 0)));
    for (s, name) in cover_subsets(n).iter().zip(&names[n + 1..]) {
        out.push((name.clone(), gamma(&alph, 0).conjugate(&gamma_product(&alph, s))?));
    }
    Ok(out)
}

/// Greek rendering of an ASCII generator name (`l0_12` → `λ₀⁽¹²⁾`).
pub fn pretty_name(name: &str) -> String {
    const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let digits = |s: &str, table: &[char; 10]| -> Option<String> {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| table[d as usize]))
            .collect()
    };
    let greek = |prefix: &str| match prefix {
        "g" => Some('γ'),
        "l" => Some('λ'),
        "a" => Some('α'),
        "b" => Some('β'),
        _ => None,
    };
    let (head, sup) = match name.split_once('_') {
        Some((h, s)) => (h, Some(s)),
        None => (name, None),
    };
    let Some(letter) = head.get(..1).and_then(greek) else {
        return name.to_string();
    };
    let Some(sub) = digits(&head[1..], &SUB) else {
        return name.to_string();
    };
    if head.len() == 1 {
        return name.to_string();
    }
    match sup {
        None => format!("{letter}{sub}"),
        Some(s) => match digits(s, &SUP) {
            Some(sup) if !s.is_empty() => format!("{letter}{sub}⁽{sup}⁾"),
            _ => name.to_string(),
        },
    }
}

struct CoverBuilder {
    alph: Arc<Alphabet>,
    rels: Vec<Word>,
}

impl CoverBuilder {
    fn w(&self, names: &[&str]) -> Word {
        let pairs: Vec<(&str, i64)> = names.iter().map(|&n| (n, 1)).collect();
        Word::from_named_pairs(&self.alph, &pairs).expect("catalog names")
    }

    fn g(&self, name: &str) -> Word {
        Word::named(&self.alph, name).expect("catalog name")
    }

    fn comm(&mut self, a: &Word, b: &Word) {
        self.rels.push(Word::commutator(a, b).expect("same alphabet"));
    }

    /// A chain `abc = cab = bca` contributes `(abc)(cab)⁻¹` and `(abc)(bca)⁻¹`.
    fn chain(&mut self, a: &str, b: &str, c: &str) {
        let first = self.w(&[a, b, c]);
        let second = self.w(&[c, a, b]);
        let third = self.w(&[b, c, a]);
        self.rels.push(&first * &second.inverse());
        self.rels.push(&first * &third.inverse());
    }
}

fn l0(set: &[usize]) -> String {
    format!("l0_{}", subset_suffix(set))
}

/// The covering presentation as displayed, with every chain `a = b = c`
/// expanded into two relators. n = 3 gives 11 generators and 39 relators;
/// n = 2 gives 6 generators and 9 relators.
pub fn covering_presentation_canonical(n: usize) -> Result<Presentation> {
    let names = covering_generator_names(n)?;
    let alph = Alphabet::new(names)?;
    let mut b = CoverBuilder { alph: alph.clone(), rels: Vec::new() };
    let lk = |k: usize| format!("l{k}");
    if n == 2 {
        let (l1, l2) = (b.g("l1"), b.g("l2"));
        b.comm(&l1, &l2);
        for i in 1..=2 {
            b.chain(&l0(&[i]), &lk(i), "l0");
        }
        // {i,j} = {1,2}
        for (i, j) in [(1, 2), (2, 1)] {
            b.chain(&lk(i), &l0(&[j]), "l0_12");
        }
        return Presentation::new("cover-x2-canonical", alph, b.rels);
    }

    let pairs = [(1, 2), (1, 3), (2, 3)];
    for &(i, j) in &pairs {
        let (a, c) = (b.g(&lk(i)), b.g(&lk(j)));
        b.comm(&a, &c);
    }
    for &(i, j) in &pairs {
        let (a, c) = (b.g(&l0(&[i])), b.g(&l0(&[j])));
        b.comm(&a, &c);
    }
    for (s, t) in [([1, 2], [1, 3]), ([1, 2], [2, 3]), ([1, 3], [2, 3])] {
        let (a, c) = (b.g(&l0(&s)), b.g(&l0(&t)));
        b.comm(&a, &c);
    }
    for &(i, j) in &pairs {
        let a = b.g(&l0(&[i, j]));
        let c = b.g("l0").conjugate(&b.g(&lk(i)))?;
        b.comm(&a, &c);
    }
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        let a = b.g("l0_123");
        let c = b.g(&l0(&[j])).conjugate(&b.g(&lk(i)))?;
        b.comm(&a, &c);
    }
    for i in 1..=3 {
        b.chain(&l0(&[i]), &lk(i), "l0");
    }
    for &(i, j) in &pairs {
        b.chain(&lk(i), &l0(&[j]), &l0(&[i, j]));
    }
    for &(i, j) in &pairs {
        b.chain(&lk(j), &l0(&[i]), &l0(&[i, j]));
    }
    for i in 1..=3 {
        let rest: Vec<usize> = (1..=3).filter(|&k| k != i).collect();
        b.chain(&lk(i), &l0(&rest), "l0_123");
    }
    Presentation::new("cover-x3-canonical", alph, b.rels)
}

/// Labels accepted by [`catalog`].
pub fn catalog_labels() -> Vec<String> {
    let mut v: Vec<String> = vec!["pi1-x2".into(), "pi1-x3".into()];
    for n in 4..=6 {
        v.push(format!("pi1-x{n}-conjectural"));
    }
    v.push("cover-x2-canonical".into());
    v.push("cover-x3-canonical".into());
    v
}

/// Looks up a presentation by label (`pi1-x3`, `cover-x3-canonical`, ...).
pub fn catalog(label: &str) -> Result<Presentation> {
    match label {
        "cover-x2-canonical" => return covering_presentation_canonical(2),
        "cover-x3-canonical" => return covering_presentation_canonical(3),
        _ => {}
    }
    if let Some(rest) = label.strip_prefix("pi1-x") {
        let digits = rest.strip_suffix("-conjectural").unwrap_or(rest);
        if let Ok(n) = digits.parse::<usize>() {
            let p = pi1_xn(n)?;
            if p.label() == label || (n >= 4 && digits == rest) {
                return Ok(p);
            }
        }
    }
    Err(Error::Invalid(format!(
        "unknown catalog label {label:?}; known: {}",
        catalog_labels().join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi1_x2_matches_display() {
        let p = pi1_xn(2).unwrap();
        assert_eq!(p.generator_count(), 3);
        let texts: Vec<String> = p.relators().iter().map(|r| r.to_text()).collect();
        assert_eq!(
            texts,
            [
                "g1*g2*g1^-1*g2^-1",
                "g1*g0*g1*g0*g1^-1*g0^-1*g1^-1*g0^-1",
                "g2*g0*g2*g0*g2^-1*g0^-1*g2^-1*g0^-1",
            ]
        );
    }

    #[test]
    fn pi1_x3_family_counts() {
        let p = pi1_xn(3).unwrap();
        assert_eq!((p.generator_count(), p.relator_count()), (4, 9));
        assert_eq!(p.label(), "pi1-x3");
        assert_eq!(
            p.relators()[3].to_text(),
            "g1*g0*g1^-1*g2*g0*g2^-1*g1*g0^-1*g1^-1*g2*g0^-1*g2^-1"
        );
        assert!(pi1_xn(4).unwrap().label().ends_with("conjectural"));
        assert!(pi1_xn(1).is_err());
    }

    #[test]
    fn rij_examples() {
        let r = generate_rij(3).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].0, IndexPair { i: vec![1], j: vec![2] });
        assert_eq!(generate_rij(4).unwrap().len(), 18);
        assert!(generate_rij(2).is_err());
    }

    #[test]
    fn index_pair_is_canonical() {
        let p = IndexPair::new(vec![3], vec![1, 2], 4).unwrap();
        assert_eq!(p.i, vec![1, 2]);
        assert!(IndexPair::new(vec![1], vec![1], 4).is_err());
        assert!(IndexPair::new(vec![1, 2], vec![3], 3).is_err());
    }

    #[test]
    fn covering_counts() {
        let c3 = covering_presentation_canonical(3).unwrap();
        assert_eq!((c3.generator_count(), c3.relator_count()), (11, 39));
        let c2 = covering_presentation_canonical(2).unwrap();
        assert_eq!((c2.generator_count(), c2.relator_count()), (6, 9));
        assert!(covering_presentation_canonical(4).is_err());
    }

    #[test]
    fn covering_chain_relators() {
        let c2 = covering_presentation_canonical(2).unwrap();
        let a = c2.word("l0_1*l1*l0*l0^-1*l1^-1*l0_1^-1").unwrap();
        assert!(a.is_identity());
        let first = c2.word("l0_1*l1*l0*l1^-1*l0_1^-1*l0^-1").unwrap();
        let second = c2.word("l0_1*l1*l0*l0_1^-1*l0^-1*l1^-1").unwrap();
        assert_eq!(c2.relators()[1], first);
        assert_eq!(c2.relators()[2], second);
    }

    #[test]
    fn covering_images() {
        let imgs = covering_generator_images(3).unwrap();
        let get = |n: &str| imgs.iter().find(|(k, _)| k == n).unwrap().1.to_text();
        assert_eq!(get("l0_12"), "g1*g2*g0*g2^-1*g1^-1");
        assert_eq!(get("l2"), "g2^2");
        assert_eq!(get("l0"), "g0");
        assert_eq!(imgs.len(), 11);
        assert_eq!(covering_generator_images(2).unwrap().len(), 6);
    }

    #[test]
    fn pretty_names() {
        assert_eq!(pretty_name("l0_123"), "λ₀⁽¹²³⁾");
        assert_eq!(pretty_name("g3"), "γ₃");
        assert_eq!(pretty_name("a8"), "α₈");
        assert_eq!(pretty_name("x1"), "x1");
    }

    #[test]
    fn catalog_and_json_round_trip() {
        for label in catalog_labels() {
            let p = catalog(&label).unwrap();
            let v = serde_json::to_value(&p).unwrap();
            let q = Presentation::from_json(&v).unwrap();
            assert_eq!(q.label(), p.label());
            let a: Vec<String> = p.relators().iter().map(|r| r.to_text()).collect();
            let b: Vec<String> = q.relators().iter().map(|r| r.to_text()).collect();
            assert_eq!(a, b);
        }
        assert!(catalog("nope").is_err());
        assert!(catalog("pi1-x3-conjectural").is_err());
    }

    #[test]
    fn fc_small_cases() {
        assert_eq!(fc_polynomial(1).unwrap().to_text(), "-x1 + 1");
        let f2 = fc_polynomial(2).unwrap();
        assert_eq!(f2.total_degree(), Some(2));
        assert_eq!(f2.to_text(), "x1^2 - 2*x1*x2 + x2^2 - 2*x1 - 2*x2 + 1");
        assert!(fc_polynomial(0).is_err());
        assert!(fc_polynomial(7).is_err());
    }
}
