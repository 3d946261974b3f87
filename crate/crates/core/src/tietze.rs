//! Tietze transformations and the scripted reduction of the
//! Reidemeister–Schreier presentation of the parity subgroup down to the
//! covering generators.
//!
//! A [`TietzeTrace`] is a list of steps whose words are stored in text form
//! over the alphabet current at that step, so a trace serialized to JSON can
//! be replayed against the input presentation and must reproduce the output
//! exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::equivalence::{self, quotient_panel, replay_witness, SearchBudget, WitnessFactor};
use crate::error::{Error, Result};
use crate::presentations::{covering_generator_names, Presentation};
use crate::subgroup::RsResult;
use crate::words::{Alphabet, Word};

/// Why a defining relation `g = expr` (or a relator removal) is admissible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Justification {
    /// The relator at `index` is a cyclic rotation of `g·expr⁻¹` or its inverse.
    Literal { index: usize },
    /// Found by the bounded consequence search; factors are `(conjugator, relator, exponent)`.
    BoundedSearch { depth: usize, witness: Vec<(String, usize, i64)> },
    /// Only the quotient-panel fingerprint was seen to be unchanged.
    QuotientEvidence,
    /// Relator removal: same cyclic class (up to inversion) as the relator at `of`.
    Duplicate { of: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TietzeStep {
    /// Renames every generator, keeping positions.
    Rename { names: Vec<String> },
    /// Removes `generator`, substituting `expression` everywhere. Relators
    /// that become trivial are dropped; their indices are recorded.
    Eliminate {
        generator: String,
        expression: String,
        justification: Justification,
        dropped: Vec<usize>,
    },
    AddRelator { word: String, justification: Justification },
    RemoveRelator { index: usize, justification: Justification },
    /// Cyclically reduces every relator and drops those that vanish.
    FreeReduceAll,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TietzeTrace {
    pub steps: Vec<TietzeStep>,
}

impl TietzeTrace {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Applies every step to `input`, re-verifying literal and search justifications.
    pub fn replay(&self, input: &Presentation) -> Result<Presentation> {
        let mut p = input.clone();
        for step in &self.steps {
            p = apply_step(&p, step)?;
        }
        Ok(p)
    }
}

fn word_text(w: &Word) -> String {
    w.to_text()
}

fn same_cyclic_class(a: &Word, b: &Word) -> bool {
    a.cyclic_canonical() == b.cyclic_canonical()
}

fn literal_index(p: &Presentation, target: &Word) -> Option<usize> {
    let canon = target.cyclic_canonical();
    p.relators().iter().position(|r| r.cyclic_canonical() == canon)
}

fn check_justification(p: &Presentation, target: &Word, j: &Justification) -> Result<()> {
    match j {
        Justification::Literal { index } => {
            let r = p
                .relators()
                .get(*index)
                .ok_or_else(|| Error::Tietze(format!("literal justification points at missing relator {index}")))?;
            if same_cyclic_class(r, target) {
                Ok(())
            } else {
                Err(Error::Tietze(format!("relator {index} ({r}) does not match {target}")))
            }
        }
        Justification::BoundedSearch { witness, .. } => {
            let factors = witness
                .iter()
                .map(|(u, r, e)| {
                    Ok(WitnessFactor { conjugator: p.word(u)?, relator: *r, exponent: *e })
                })
                .collect::<Result<Vec<_>>>()?;
            if replay_witness(target, p, &factors) {
                Ok(())
            } else {
                Err(Error::Tietze(format!("witness for {target} does not replay")))
            }
        }
        Justification::QuotientEvidence => Ok(()),
        Justification::Duplicate { .. } => Err(Error::Tietze("duplicate is not a justification for a relation".into())),
    }
}

/// Applies a single step.
pub fn apply_step(p: &Presentation, step: &TietzeStep) -> Result<Presentation> {
    match step {
        TietzeStep::Rename { names } => {
            if names.len() != p.generator_count() {
                return Err(Error::Tietze(format!("rename lists {} names for {} generators", names.len(), p.generator_count())));
            }
            let alph = Alphabet::new(names.iter().cloned())?;
            let images: Vec<Word> = (0..alph.len()).map(|i| Word::generator(&alph, i)).collect();
            let rels = p.relators().iter().map(|r| r.substitute(&alph, &images)).collect::<Result<Vec<_>>>()?;
            Presentation::new(p.label(), alph, rels)
        }
        TietzeStep::Eliminate { generator, expression, justification, dropped } => {
            let (q, actual) = eliminate_raw(p, generator, expression, justification)?;
            if &actual != dropped {
                return Err(Error::Tietze(format!(
                    "eliminating {generator} drops relators {actual:?}, trace says {dropped:?}"
                )));
            }
            Ok(q)
        }
        TietzeStep::AddRelator { word, justification } => {
            let w = p.word(word)?;
            check_justification(p, &w, justification)?;
            let mut rels = p.relators().to_vec();
            rels.push(w);
            p.with_relators(rels)
        }
        TietzeStep::RemoveRelator { index, justification } => {
            let r = p
                .relators()
                .get(*index)
                .ok_or_else(|| Error::Tietze(format!("no relator {index} to remove")))?
                .clone();
            let mut rest = p.relators().to_vec();
            rest.remove(*index);
            let reduced = p.with_relators(rest)?;
            match justification {
                Justification::Duplicate { of } => {
                    let other = p
                        .relators()
                        .get(*of)
                        .filter(|_| of != index)
                        .ok_or_else(|| Error::Tietze(format!("duplicate target {of} is invalid")))?;
                    if !same_cyclic_class(&r, other) {
                        return Err(Error::Tietze(format!("relators {index} and {of} are not cyclically equal")));
                    }
                }
                j => check_justification(&reduced, &r, j)?,
            }
            Ok(reduced)
        }
        TietzeStep::FreeReduceAll => Ok(Presentation::new_dropping_trivial(
            p.label(),
            p.alphabet().clone(),
            p.relators().iter().map(|r| r.cyclically_reduced()).collect(),
        )?),
    }
}

fn eliminate_raw(
    p: &Presentation,
    generator: &str,
    expression: &str,
    justification: &Justification,
) -> Result<(Presentation, Vec<usize>)> {
    let alph = p.alphabet();
    let g = alph
        .index_of(generator)
        .ok_or_else(|| Error::UnknownGenerator(generator.to_string()))?;
    let expr = p.word(expression)?;
    if expr.generators_used().contains(&g) {
        return Err(Error::Tietze(format!("{generator} occurs in its own expression {expr}")));
    }
    let target = &Word::generator(alph, g) * &expr.inverse();
    check_justification(p, &target, justification)?;
    let names: Vec<String> = alph.names().iter().filter(|n| *n != generator).cloned().collect();
    let new_alph = Alphabet::new(names)?;
    let expr_new = expr.transfer(&new_alph)?;
    let images: Vec<Word> = (0..alph.len())
        .map(|i| if i == g { Ok(expr_new.clone()) } else { Word::named(&new_alph, alph.name(i)) })
        .collect::<Result<Vec<_>>>()?;
    let mut rels = Vec::new();
    let mut dropped = Vec::new();
    for (k, r) in p.relators().iter().enumerate() {
        let s = r.substitute(&new_alph, &images)?;
        if s.is_identity() {
            dropped.push(k);
        } else {
            rels.push(s);
        }
    }
    Ok((Presentation::new(p.label(), new_alph, rels)?, dropped))
}

/// How a proposed relation `g = expr` can be justified in `p`, strongest first.
///
/// Returns `None` when neither a literal relator nor the bounded search
/// finds it and eliminating `g` changes the quotient-panel fingerprint.
pub fn justify(p: &Presentation, generator: &str, expression: &Word, budget: SearchBudget) -> Result<Option<Justification>> {
    let g = p.generator(generator)?;
    let target = &g * &expression.inverse();
    if let Some(index) = literal_index(p, &target) {
        return Ok(Some(Justification::Literal { index }));
    }
    let res = equivalence::is_consequence(&target, p, budget)?;
    if let (equivalence::ConsequenceStatus::Proved { depth }, Some(w)) = (&res.status, &res.witness) {
        let witness = w.iter().map(|f| (word_text(&f.conjugator), f.relator, f.exponent)).collect();
        return Ok(Some(Justification::BoundedSearch { depth: *depth, witness }));
    }
    let (after, _) = eliminate_raw(p, generator, &word_text(expression), &Justification::QuotientEvidence)?;
    if quotient_panel(p)? == quotient_panel(&after)? {
        Ok(Some(Justification::QuotientEvidence))
    } else {
        Ok(None)
    }
}

/// `⟨a,b | ab⁻¹⟩` with `b := a` gives `⟨a | ⟩`: the justified elimination step.
pub fn eliminate_generator(p: &Presentation, generator: &str, expression: &Word) -> Result<(Presentation, TietzeStep)> {
    if !expression.alphabet().same(p.alphabet()) {
        return Err(Error::AlphabetMismatch {
            left: format!("{:?}", expression.alphabet()),
            right: format!("{:?}", p.alphabet()),
        });
    }
    let justification = justify(p, generator, expression, SearchBudget::default())?
        .ok_or_else(|| Error::Tietze(format!("no justification for {generator} = {expression}")))?;
    let (q, dropped) = eliminate_raw(p, generator, &word_text(expression), &justification)?;
    let step = TietzeStep::Eliminate {
        generator: generator.to_string(),
        expression: word_text(expression),
        justification,
        dropped,
    };
    Ok((q, step))
}

/// Cyclically reduced, deduplicated up to rotation and inversion, sorted
/// shortlex; each survivor is its class's canonical representative.
pub fn normalize_relators(p: &Presentation) -> Presentation {
    let mut canon: Vec<Word> = p
        .relators()
        .iter()
        .map(|r| r.cyclic_canonical())
        .filter(|r| !r.is_identity())
        .collect();
    canon.sort_by(|a, b| a.shortlex_cmp(b));
    canon.dedup();
    Presentation::new(p.label(), p.alphabet().clone(), canon).expect("relators are nontrivial")
}

/// Removal steps for relators that repeat an earlier one, last index first.
fn dedupe_steps(p: &Presentation) -> Vec<TietzeStep> {
    let mut first: HashMap<Word, usize> = HashMap::new();
    let mut dup = Vec::new();
    for (k, r) in p.relators().iter().enumerate() {
        let c = r.cyclic_canonical();
        match first.get(&c) {
            Some(&of) => dup.push((k, of)),
            None => {
                first.insert(c, k);
            }
        }
    }
    dup.into_iter()
        .rev()
        .map(|(index, of)| TietzeStep::RemoveRelator { index, justification: Justification::Duplicate { of } })
        .collect()
}

/// One scripted elimination: the ambient word of the subgroup generator to
/// remove and the ambient word it equals.
#[derive(Clone, Debug, Serialize)]
pub struct ScriptEntry {
    pub group: usize,
    pub defining_word: String,
    pub equals: String,
}

/// The covering eliminations, in order, over `g0..gn`.
pub fn covering_script(n: usize) -> Result<Vec<ScriptEntry>> {
    if n != 2 && n != 3 {
        return Err(Error::OutOfRange(format!("scripted reduction exists for n = 2, 3, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    let e = |group: usize, w: String, t: String| ScriptEntry { group, defining_word: w, equals: t };
    let mut s = Vec::new();
    for &(i, j) in &pairs {
        s.push(e(1, format!("g{j}*g{i}*g{j}^-1*g{i}^-1"), "1".into()));
    }
    for &(i, j) in &pairs {
        s.push(e(2, format!("g{i}*g{j}*g{i}*g{j}^-1"), format!("g{i}^2")));
    }
    for &(i, j) in &pairs {
        s.push(e(3, format!("g{i}*g{j}^2*g{i}^-1"), format!("g{j}^2")));
    }
    if n == 3 {
        s.push(e(4, "g1*g3*g2*g3^-1*g2^-1*g1^-1".into(), "1".into()));
        s.push(e(4, "g2*g3*g1*g3^-1*g2^-1*g1^-1".into(), "1".into()));
        s.push(e(5, "g1*g2*g3*g1*g3^-1*g2^-1".into(), "g1^2".into()));
        s.push(e(5, "g1*g2*g3*g2*g3^-1*g1^-1".into(), "g2^2".into()));
        s.push(e(5, "g1*g2*g3^2*g2^-1*g1^-1".into(), "g3^2".into()));
    }
    Ok(s)
}

/// Provenance of one scripted elimination.
#[derive(Clone, Debug, Serialize)]
pub struct EliminationRecord {
    pub group: usize,
    pub generator: String,
    pub defining_word: String,
    pub equals: String,
    pub expression: String,
    pub justification: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub input: Presentation,
    pub output: Presentation,
    pub trace: TietzeTrace,
    pub ledger: Vec<EliminationRecord>,
}

/// Scripted reduction of the full RS presentation for n = 2 or 3.
///
/// The Schreier letters are first renamed to their covering names where one
/// exists; the scripted letters are then eliminated in order, each justified
/// against the presentation current at that point. Finally relators are
/// cyclically reduced and duplicates removed.
pub fn reduce_covering(rs: &RsResult) -> Result<Reduction> {
    let data = &rs.data;
    let ambient = data.table().alphabet().clone();
    let n = ambient.len() - 1;
    let script = covering_script(n)?;
    let input = rs.presentation.clone();
    let mut trace = TietzeTrace::default();

    let names: Vec<String> = (0..data.subgroup_alphabet().len())
        .map(|i| data.aliases()[i].clone().unwrap_or_else(|| data.subgroup_alphabet().name(i).to_string()))
        .collect();
    let rename = TietzeStep::Rename { names: names.clone() };
    let mut p = apply_step(&input, &rename)?;
    trace.steps.push(rename);
    // subgroup letters → renamed alphabet, by position
    let renamed = p.alphabet().clone();
    let by_position: Vec<Word> = (0..renamed.len()).map(|i| Word::generator(&renamed, i)).collect();

    let mut ledger = Vec::new();
    for entry in &script {
        let dw = Word::parse(&ambient, &entry.defining_word)?;
        let idx = data.generator_for(&dw).ok_or_else(|| {
            Error::Tietze(format!("{} is not a Schreier generator", entry.defining_word))
        })?;
        let generator = names[idx].clone();
        let target = Word::parse(&ambient, &entry.equals)?;
        let expr = data.rewrite(&target)?.substitute(&renamed, &by_position)?.transfer(p.alphabet())?;
        let (q, step) = eliminate_generator(&p, &generator, &expr).map_err(|e| {
            Error::Tietze(format!("scripted elimination of {} = {} failed: {e}", entry.defining_word, entry.equals))
        })?;
        let kind = match &step {
            TietzeStep::Eliminate { justification, .. } => match justification {
                Justification::Literal { .. } => "literal",
                Justification::BoundedSearch { .. } => "bounded-search",
                _ => "quotient-evidence",
            },
            _ => unreachable!("eliminate_generator returns an elimination"),
        };
        ledger.push(EliminationRecord {
            group: entry.group,
            generator: generator.clone(),
            defining_word: entry.defining_word.clone(),
            equals: entry.equals.clone(),
            expression: expr.to_text(),
            justification: kind.to_string(),
        });
        trace.steps.push(step);
        p = q;
    }
    trace.steps.push(TietzeStep::FreeReduceAll);
    p = apply_step(&p, &TietzeStep::FreeReduceAll)?;
    for step in dedupe_steps(&p) {
        p = apply_step(&p, &step)?;
        trace.steps.push(step);
    }

    let mut got: Vec<String> = p.alphabet().names().to_vec();
    let mut want = covering_generator_names(n)?;
    got.sort();
    want.sort();
    if got != want {
        return Err(Error::Tietze(format!("reduction ended with generators {got:?}")));
    }
    let output = p.with_label(format!("cover-x{n}-derived"));
    Ok(Reduction { input, output, trace, ledger })
}

/// The 25-generator, 72-relation presentation reduced to the 11 covering generators.
pub fn reduce_to_eleven(rs: &RsResult) -> Result<Reduction> {
    if rs.data.table().alphabet().len() != 4 {
        return Err(Error::OutOfRange("reduce_to_eleven expects the n = 3 RS presentation".into()));
    }
    reduce_covering(rs)
}

/// Greedy exploration aid: repeatedly removes a generator occurring exactly
/// once in some relator, choosing the shortest such relator. Not used by
/// the scripted reductions.
pub fn auto_simplify(p: &Presentation, max_steps: usize) -> Result<(Presentation, TietzeTrace)> {
    let mut cur = apply_step(p, &TietzeStep::FreeReduceAll)?;
    let mut trace = TietzeTrace { steps: vec![TietzeStep::FreeReduceAll] };
    for _ in 0..max_steps {
        let mut best: Option<(usize, usize, usize, i64)> = None; // (len, relator, position, sign)
        for (ri, r) in cur.relators().iter().enumerate() {
            let letters: Vec<(usize, i64)> = r.letters().collect();
            for (pos, &(g, e)) in letters.iter().enumerate() {
                if letters.iter().filter(|(h, _)| *h == g).count() == 1
                    && best.map_or(true, |(len, ..)| letters.len() < len)
                {
                    best = Some((letters.len(), ri, pos, e));
                }
            }
        }
        let Some((_, ri, pos, e)) = best else { break };
        let r = &cur.relators()[ri];
        let letters: Vec<(usize, i64)> = r.letters().collect();
        let g = letters[pos].0;
        // r = a g^e b  ⇒  g = (b a)^{-e}
        let alph = cur.alphabet().clone();
        let ba: Vec<(usize, i64)> = letters[pos + 1..].iter().chain(letters[..pos].iter()).copied().collect();
        let mut expr = Word::from_pairs(&alph, &ba)?;
        if e > 0 {
            expr = expr.inverse();
        }
        let name = alph.name(g).to_string();
        let target = &Word::generator(&alph, g) * &expr.inverse();
        let index = literal_index(&cur, &target).ok_or_else(|| Error::Tietze("isolated letter lost".into()))?;
        let justification = Justification::Literal { index };
        let (q, dropped) = eliminate_raw(&cur, &name, &word_text(&expr), &justification)?;
        trace.steps.push(TietzeStep::Eliminate { generator: name, expression: word_text(&expr), justification, dropped });
        cur = q;
    }
    Ok((cur, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::table_from_parity;
    use crate::equivalence::{abelianization, presentation_from_text};
    use crate::presentations::{covering_presentation_canonical, pi1_xn};
    use crate::subgroup::full_rs_presentation;

    fn texts(p: &Presentation) -> (Vec<String>, Vec<String>) {
        (p.alphabet().names().to_vec(), p.relators().iter().map(|r| r.to_text()).collect())
    }

    fn rs(n: usize) -> RsResult {
        let p = pi1_xn(n).unwrap();
        full_rs_presentation(&p, &table_from_parity(&p).unwrap()).unwrap()
    }

    #[test]
    fn trivial_elimination() {
        let p = presentation_from_text("t", &["a", "b"], &["a*b^-1"]).unwrap();
        let a = p.generator("a").unwrap();
        let (q, step) = eliminate_generator(&p, "b", &a).unwrap();
        assert_eq!(q.generator_count(), 1);
        assert_eq!(q.relator_count(), 0);
        assert!(matches!(step, TietzeStep::Eliminate { justification: Justification::Literal { index: 0 }, .. }));
    }

    #[test]
    fn self_reference_rejected() {
        let p = presentation_from_text("t", &["a", "b"], &["a*b^-1"]).unwrap();
        let b = p.generator("b").unwrap();
        assert!(eliminate_generator(&p, "b", &b).is_err());
    }

    #[test]
    fn unjustified_elimination_rejected() {
        let p = presentation_from_text("t", &["a", "b"], &["a^2"]).unwrap();
        let a = p.generator("a").unwrap();
        assert!(eliminate_generator(&p, "b", &a).is_err());
    }

    #[test]
    fn normalization_dedupes() {
        let p = presentation_from_text("t", &["a", "b"], &["a*b*a^-1*b^-1", "b*a^-1*b^-1*a", "b*a*b^-1*a^-1", "a^3"]).unwrap();
        let q = normalize_relators(&p);
        assert_eq!(q.relator_count(), 2);
        let q2 = normalize_relators(&q);
        assert_eq!(q.relators(), q2.relators());
    }

    #[test]
    fn eleven_generators() {
        let red = reduce_to_eleven(&rs(3)).unwrap();
        assert_eq!(red.output.generator_count(), 11);
        assert_eq!(red.ledger.len(), 14);
        assert!(red.ledger.iter().all(|r| r.justification == "literal"), "{:#?}", red.ledger);
        assert_eq!(abelianization(&red.output).free_rank, 11);
        let replayed = red.trace.replay(&red.input).unwrap();
        assert_eq!(texts(&replayed), texts(&red.output));
        let json = red.trace.to_json();
        assert_eq!(TietzeTrace::from_json(&json).unwrap(), red.trace);
    }

    #[test]
    fn target_relators_survive() {
        let out = normalize_relators(&reduce_to_eleven(&rs(3)).unwrap().output);
        let has = |a: &str, b: &str| {
            let w = Word::commutator(&out.generator(a).unwrap(), &out.generator(b).unwrap()).unwrap();
            out.relators().contains(&w.cyclic_canonical())
        };
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            assert!(has(&format!("l{i}"), &format!("l{j}")));
            assert!(has(&format!("l0_{i}"), &format!("l0_{j}")));
        }
    }

    #[test]
    fn six_generators() {
        let red = reduce_covering(&rs(2)).unwrap();
        assert_eq!(red.output.generator_count(), 6);
        assert_eq!(red.ledger.len(), 3);
        let canon = covering_presentation_canonical(2).unwrap();
        assert_eq!(abelianization(&red.output), abelianization(&canon));
    }

    #[test]
    fn auto_simplify_runs() {
        let p = presentation_from_text("t", &["a", "b", "c"], &["a*b^-1", "c*a*b"]).unwrap();
        let (q, trace) = auto_simplify(&p, 10).unwrap();
        assert_eq!(q.generator_count(), 1);
        assert_eq!(texts(&trace.replay(&p).unwrap()), texts(&q));
    }
}
