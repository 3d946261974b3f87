//! Reidemeister–Schreier rewriting for finite-index subgroups.
//!
//! Subgroup generators are `(tb)(\overline{tb})⁻¹` for transversal elements
//! `t` and ambient generators `b`, enumerated with `t` in shortlex order and
//! `b` in the letter order. Nontrivial ones are named `x1, x2, …`; where the
//! defining word coincides with a covering-generator image the λ name is
//! recorded as an alias.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cosets::CosetTable;
use crate::error::{Error, Result};
use crate::presentations::{covering_generator_images, Presentation};
use crate::words::{Alphabet, Word};

/// One pair `(t, b)` and its Schreier word.
#[derive(Clone, Debug, Serialize)]
pub struct SchreierEntry {
    pub coset: usize,
    pub gen: usize,
    pub word: Word,
    /// Index of the named subgroup generator, `None` when the word is trivial.
    pub index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SchreierData {
    table: CosetTable,
    letter_order: Vec<usize>,
    transversal: Vec<Word>,
    coset_order: Vec<usize>,
    entries: Vec<SchreierEntry>,
    lookup: Vec<Vec<Option<usize>>>,
    alphabet: Arc<Alphabet>,
    definitions: Vec<Word>,
    aliases: Vec<Option<String>>,
}

/// Letter order used for shortlex: `g1 < g2 < … < gn < g0` on the γ
/// alphabet, alphabet order otherwise.
pub fn default_letter_order(alph: &Alphabet) -> Vec<usize> {
    let gamma = alph.len() >= 2 && alph.names().iter().enumerate().all(|(k, n)| *n == format!("g{k}"));
    if gamma {
        (1..alph.len()).chain(std::iter::once(0)).collect()
    } else {
        (0..alph.len()).collect()
    }
}

/// Shortlex-minimal Schreier transversal plus the named subgroup generators.
pub fn schreier_transversal(table: &CosetTable) -> SchreierData {
    let order = default_letter_order(table.alphabet());
    schreier_transversal_with_order(table, &order)
}

pub fn schreier_transversal_with_order(table: &CosetTable, letter_order: &[usize]) -> SchreierData {
    let alph = table.alphabet().clone();
    let n = table.coset_count();
    let letters: Vec<(usize, i64)> = letter_order
        .iter()
        .map(|&g| (g, 1))
        .chain(letter_order.iter().map(|&g| (g, -1)))
        .collect();
    let mut rep: Vec<Option<Word>> = vec![None; n];
    rep[0] = Some(Word::identity(&alph));
    let mut coset_order = vec![0];
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for &(g, e) in &letters {
            let d = table.act(c, g, e);
            if rep[d].is_none() {
                let w = rep[c].as_ref().expect("visited") * &Word::from_pairs(&alph, &[(g, e)]).expect("in range");
                rep[d] = Some(w);
                coset_order.push(d);
                queue.push_back(d);
            }
        }
    }
    let transversal: Vec<Word> = rep.into_iter().map(|w| w.expect("table is connected")).collect();

    let mut entries = Vec::new();
    let mut lookup = vec![vec![None; alph.len()]; n];
    let mut definitions = Vec::new();
    for &c in &coset_order {
        for &g in letter_order {
            let d = table.act(c, g, 1);
            let tb = &transversal[c] * &Word::generator(&alph, g);
            let w = &tb * &transversal[d].inverse();
            let index = if w.is_identity() {
                None
            } else {
                definitions.push(w.clone());
                Some(definitions.len() - 1)
            };
            lookup[c][g] = index;
            entries.push(SchreierEntry { coset: c, gen: g, word: w, index });
        }
    }
    let names: Vec<String> = (1..=definitions.len()).map(|i| format!("x{i}")).collect();
    let sub_alph = Alphabet::new(names).expect("valid names");
    let aliases = covering_aliases(&alph, &definitions);
    SchreierData {
        table: table.clone(),
        letter_order: letter_order.to_vec(),
        transversal,
        coset_order,
        entries,
        lookup,
        alphabet: sub_alph,
        definitions,
        aliases,
    }
}

fn covering_aliases(alph: &Arc<Alphabet>, defs: &[Word]) -> Vec<Option<String>> {
    let n = alph.len().saturating_sub(1);
    let images = match n {
        2 | 3 => covering_generator_images(n).ok(),
        _ => None,
    };
    defs.iter()
        .map(|d| {
            let images = images.as_ref()?;
            images
                .iter()
                .find(|(_, w)| w.transfer(alph).ok().as_ref() == Some(d))
                .map(|(name, _)| name.clone())
        })
        .collect()
}

impl SchreierData {
    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    pub fn letter_order(&self) -> &[usize] {
        &self.letter_order
    }

    /// Transversal words listed in shortlex order.
    pub fn transversal(&self) -> Vec<Word> {
        self.coset_order.iter().map(|&c| self.transversal[c].clone()).collect()
    }

    /// Representative of a coset.
    pub fn representative(&self, coset: usize) -> &Word {
        &self.transversal[coset]
    }

    /// Cosets in shortlex order of their representatives.
    pub fn coset_order(&self) -> &[usize] {
        &self.coset_order
    }

    /// All `(t, b)` pairs, trivial ones included.
    pub fn entries(&self) -> &[SchreierEntry] {
        &self.entries
    }

    pub fn subgroup_alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Defining ambient word of each named subgroup generator.
    pub fn definitions(&self) -> &[Word] {
        &self.definitions
    }

    pub fn aliases(&self) -> &[Option<String>] {
        &self.aliases
    }

    /// Alias if present, canonical name otherwise.
    pub fn display_name(&self, i: usize) -> String {
        self.aliases[i].clone().unwrap_or_else(|| self.alphabet.name(i).to_string())
    }

    /// Index of the subgroup generator whose defining word is `w`.
    pub fn generator_for(&self, w: &Word) -> Option<usize> {
        self.definitions.iter().position(|d| d == w)
    }

    /// Reidemeister rewriting of an ambient word lying in the subgroup.
    pub fn rewrite(&self, w: &Word) -> Result<Word> {
        self.rewrite_letters(w.letters())
    }

    fn rewrite_letters<I: Iterator<Item = (usize, i64)>>(&self, letters: I) -> Result<Word> {
        let mut c = 0usize;
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (g, e) in letters {
            if e > 0 {
                if let Some(i) = self.lookup[c][g] {
                    out.push((i, 1));
                }
                c = self.table.act(c, g, 1);
            } else {
                let d = self.table.act(c, g, -1);
                if let Some(i) = self.lookup[d][g] {
                    out.push((i, -1));
                }
                c = d;
            }
        }
        if c != 0 {
            return Err(Error::Invalid("word does not lie in the subgroup".into()));
        }
        Word::from_pairs(&self.alphabet, &out)
    }

    /// Rewrites `t r t⁻¹` letter by letter (before any free reduction).
    pub fn rewrite_conjugate(&self, t: &Word, r: &Word) -> Result<Word> {
        let ti = t.inverse();
        let letters = t.letters().chain(r.letters()).chain(ti.letters());
        self.rewrite_letters(letters)
    }

    /// Replaces each subgroup letter by its defining ambient word.
    pub fn expand(&self, w: &Word) -> Result<Word> {
        w.substitute(self.table.alphabet(), &self.definitions)
    }
}

/// `(t, b, word)` for every named subgroup generator, in naming order.
pub fn subgroup_generators(d: &SchreierData) -> Vec<(Word, usize, Word)> {
    d.entries
        .iter()
        .filter(|e| e.index.is_some())
        .map(|e| (d.transversal[e.coset].clone(), e.gen, e.word.clone()))
        .collect()
}

/// Rewrites `t r t⁻¹`; `t` must be a transversal element.
pub fn rewrite_relator(d: &SchreierData, t: &Word, r: &Word) -> Result<Word> {
    if !d.transversal.contains(t) {
        return Err(Error::Invalid(format!("{t} is not a transversal element")));
    }
    d.rewrite_conjugate(t, r)
}

/// One cell of the rewriting grid.
#[derive(Clone, Debug, Serialize)]
pub struct RsCell {
    pub transversal: Word,
    pub relator_index: usize,
    pub rewritten: Word,
    pub trivial: bool,
    /// Substituting the definitions back equals the reduced `t r t⁻¹`.
    pub sound: bool,
}

#[derive(Clone, Debug)]
pub struct RsResult {
    pub data: SchreierData,
    pub cells: Vec<RsCell>,
    pub presentation: Presentation,
}

impl RsResult {
    pub fn all_sound(&self) -> bool {
        self.cells.iter().all(|c| c.sound)
    }
}

/// Full Reidemeister–Schreier presentation of the subgroup described by `t`.
///
/// The grid is relator-major (for each relator, every transversal element in
/// shortlex order). Cells that rewrite to the identity are kept in `cells`
/// and left out of the presentation.
pub fn full_rs_presentation(p: &Presentation, t: &CosetTable) -> Result<RsResult> {
    if !p.alphabet().same(t.alphabet()) {
        return Err(Error::AlphabetMismatch {
            left: format!("{:?}", p.alphabet()),
            right: format!("{:?}", t.alphabet()),
        });
    }
    let data = schreier_transversal(t);
    let grid: Vec<(usize, usize)> = (0..p.relator_count())
        .flat_map(|r| data.coset_order.iter().map(move |&c| (r, c)))
        .collect();
    let cells: Vec<RsCell> = grid
        .par_iter()
        .map(|&(ri, c)| -> Result<RsCell> {
            let tw = &data.transversal[c];
            let r = &p.relators()[ri];
            let rewritten = data.rewrite_conjugate(tw, r)?;
            let target = &(tw * r) * &tw.inverse();
            let sound = data.expand(&rewritten)? == target;
            Ok(RsCell {
                transversal: tw.clone(),
                relator_index: ri,
                trivial: rewritten.is_identity(),
                rewritten,
                sound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let relators: Vec<Word> = cells.iter().filter(|c| !c.trivial).map(|c| c.rewritten.clone()).collect();
    let presentation = Presentation::new(format!("{}-rs", p.label()), data.alphabet.clone(), relators)?;
    Ok(RsResult { data, cells, presentation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::{table_from_parity, todd_coxeter};
    use crate::presentations::pi1_xn;

    #[test]
    fn transversal_n3() {
        let p = pi1_xn(3).unwrap();
        let d = schreier_transversal(&table_from_parity(&p).unwrap());
        let t: Vec<String> = d.transversal().iter().map(|w| w.to_text()).collect();
        assert_eq!(t, ["1", "g1", "g2", "g3", "g1*g2", "g1*g3", "g2*g3", "g1*g2*g3"]);
    }

    #[test]
    fn generators_n3() {
        let p = pi1_xn(3).unwrap();
        let d = schreier_transversal(&table_from_parity(&p).unwrap());
        let gens = subgroup_generators(&d);
        assert_eq!(gens.len(), 25);
        assert_eq!(gens[0].2.to_text(), "g0");
        assert_eq!(gens[24].2.to_text(), "g1*g2*g3*g0*g3^-1*g2^-1*g1^-1");
        assert_eq!(d.entries().iter().filter(|e| e.index.is_none()).count(), 7);
        let t12 = p.word("g1*g2").unwrap();
        let e = gens.iter().find(|(t, b, _)| *t == t12 && *b == 1).unwrap();
        assert_eq!(e.2.to_text(), "g1*g2*g1*g2^-1");
        assert_eq!(d.aliases().iter().filter(|a| a.is_some()).count(), 11);
    }

    #[test]
    fn generators_n2() {
        let p = pi1_xn(2).unwrap();
        let d = schreier_transversal(&table_from_parity(&p).unwrap());
        let gens = subgroup_generators(&d);
        assert_eq!(gens.len(), 9);
        assert!(gens.iter().any(|(_, _, w)| w.to_text() == "g2*g1*g2^-1*g1^-1"));
    }

    #[test]
    fn grid_is_sound() {
        for n in [2, 3] {
            let p = pi1_xn(n).unwrap();
            let rs = full_rs_presentation(&p, &table_from_parity(&p).unwrap()).unwrap();
            assert_eq!(rs.cells.len(), (1 << n) * p.relator_count());
            assert!(rs.all_sound());
        }
    }

    #[test]
    fn index_one() {
        let p = pi1_xn(2).unwrap();
        let t = todd_coxeter(&p, &[p.word("g0").unwrap(), p.word("g1").unwrap(), p.word("g2").unwrap()], 100).unwrap();
        assert_eq!(t.coset_count(), 1);
        let rs = full_rs_presentation(&p, &t).unwrap();
        assert_eq!(rs.data.transversal(), vec![Word::identity(p.alphabet())]);
        assert_eq!(rs.presentation.relator_count(), 3);
        let back = rs.presentation.relators()[0].substitute(p.alphabet(), rs.data.definitions()).unwrap();
        assert_eq!(back, p.relators()[0]);
    }
}
