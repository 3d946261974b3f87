//! Coset tables: HLT Todd–Coxeter enumeration and the table of the mod-2
//! exponent-sum quotient.
//!
//! Cosets are 0-based internally (coset `0` is the subgroup itself) and
//! 1-based in JSON dumps. Column `2g` is generator `g`, column `2g + 1` its
//! inverse.

use std::collections::VecDeque;
use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::presentations::{covering_generator_images, Presentation};
use crate::words::{Alphabet, Word};

const NONE: usize = usize::MAX;

/// Default cap on live cosets during enumeration.
pub const DEFAULT_COSET_LIMIT: usize = 10_000;

#[derive(Clone, Debug)]
pub struct CosetTable {
    alphabet: Arc<Alphabet>,
    rows: Vec<Vec<usize>>,
    subgroup: Vec<Word>,
}

#[inline]
fn col(gen: usize, exp_sign: i64) -> usize {
    2 * gen + usize::from(exp_sign < 0)
}

#[inline]
fn inv_col(c: usize) -> usize {
    c ^ 1
}

fn word_columns(w: &Word) -> Vec<usize> {
    w.letters().map(|(g, e)| col(g, e)).collect()
}

impl CosetTable {
    /// Builds a table from permutation images of each generator.
    pub fn from_permutations(alphabet: Arc<Alphabet>, perms: &[Vec<usize>], subgroup: Vec<Word>) -> Result<Self> {
        if perms.len() != alphabet.len() {
            return Err(Error::Invalid(format!(
                "{} permutations for {} generators",
                perms.len(),
                alphabet.len()
            )));
        }
        let n = perms.first().map_or(1, |p| p.len());
        let mut rows = vec![vec![NONE; 2 * alphabet.len()]; n];
        for (g, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Invalid("permutations of different degrees".into()));
            }
            for (c, &d) in p.iter().enumerate() {
                if d >= n || rows[d][col(g, -1)] != NONE {
                    return Err(Error::Invalid(format!("image list for generator {g} is not a permutation")));
                }
                rows[c][col(g, 1)] = d;
                rows[d][col(g, -1)] = c;
            }
        }
        Ok(CosetTable { alphabet, rows, subgroup })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn coset_count(&self) -> usize {
        self.rows.len()
    }

    pub fn subgroup(&self) -> &[Word] {
        &self.subgroup
    }

    /// Image of `coset` under `gen^sign` (sign ±1).
    pub fn act(&self, coset: usize, gen: usize, sign: i64) -> usize {
        self.rows[coset][col(gen, sign)]
    }

    /// Right action of a word on a coset.
    pub fn act_word(&self, coset: usize, w: &Word) -> usize {
        assert!(w.alphabet().same(&self.alphabet), "word over a foreign alphabet");
        let mut c = coset;
        for s in w.syllables() {
            let k = col(s.gen, s.exp);
            for _ in 0..s.exp.unsigned_abs() {
                c = self.rows[c][k];
            }
        }
        c
    }

    /// The permutation induced by generator `gen`.
    pub fn permutation(&self, gen: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[col(gen, 1)]).collect()
    }

    /// Checks row completeness, inverse consistency, that every relator of
    /// `p` acts trivially and that every subgroup generator fixes coset 0.
    pub fn verify(&self, p: &Presentation) -> Result<()> {
        if !p.alphabet().same(&self.alphabet) {
            return Err(Error::AlphabetMismatch {
                left: format!("{:?}", self.alphabet),
                right: format!("{:?}", p.alphabet()),
            });
        }
        let n = self.rows.len();
        for (c, row) in self.rows.iter().enumerate() {
            for (k, &d) in row.iter().enumerate() {
                if d >= n {
                    return Err(Error::Invalid(format!("coset {} column {k} undefined", c + 1)));
                }
                if self.rows[d][inv_col(k)] != c {
                    return Err(Error::Invalid(format!("coset {} column {k} not inverse-consistent", c + 1)));
                }
            }
        }
        for (i, r) in p.relators().iter().enumerate() {
            for c in 0..n {
                if self.act_word(c, r) != c {
                    return Err(Error::Invalid(format!("relator {i} moves coset {}", c + 1)));
                }
            }
        }
        for (i, h) in self.subgroup.iter().enumerate() {
            if self.act_word(0, h) != 0 {
                return Err(Error::Invalid(format!("subgroup generator {i} does not fix coset 1")));
            }
        }
        Ok(())
    }

    /// JSON dump: `{generators, cosets, columns, rows}` with 1-based cosets.
    pub fn to_json(&self) -> serde_json::Value {
        let columns: Vec<String> = (0..2 * self.alphabet.len())
            .map(|k| {
                let name = self.alphabet.name(k / 2);
                if k % 2 == 0 {
                    name.to_string()
                } else {
                    format!("{name}^-1")
                }
            })
            .collect();
        let rows: Vec<Vec<usize>> = self.rows.iter().map(|r| r.iter().map(|&d| d + 1).collect()).collect();
        json!({
            "generators": self.alphabet.names(),
            "cosets": self.rows.len(),
            "columns": columns,
            "rows": rows,
            "subgroup": self.subgroup,
        })
    }
}

struct Enumerator {
    ncols: usize,
    rows: Vec<Vec<usize>>,
    parent: Vec<usize>,
    live: usize,
    limit: usize,
}

impl Enumerator {
    fn is_live(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn define(&mut self, c: usize, x: usize) -> Result<()> {
        if self.live >= self.limit {
            return Err(Error::CosetLimit { limit: self.limit });
        }
        let d = self.rows.len();
        self.rows.push(vec![NONE; self.ncols]);
        self.parent.push(d);
        self.live += 1;
        self.rows[c][x] = d;
        self.rows[d][inv_col(x)] = c;
        Ok(())
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut k = c;
        while self.parent[k] != r {
            let next = self.parent[k];
            self.parent[k] = r;
            k = next;
        }
        r
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let (pa, pb) = (self.rep(a), self.rep(b));
        if pa != pb {
            let (lo, hi) = (pa.min(pb), pa.max(pb));
            self.parent[hi] = lo;
            self.live -= 1;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let g = queue[i];
            i += 1;
            for x in 0..self.ncols {
                let d = self.rows[g][x];
                if d == NONE {
                    continue;
                }
                self.rows[d][inv_col(x)] = NONE;
                let mu = self.rep(g);
                let nu = self.rep(d);
                if self.rows[mu][x] != NONE {
                    let t = self.rows[mu][x];
                    self.merge(nu, t, &mut queue);
                } else if self.rows[nu][inv_col(x)] != NONE {
                    let t = self.rows[nu][inv_col(x)];
                    self.merge(mu, t, &mut queue);
                } else {
                    self.rows[mu][x] = nu;
                    self.rows[nu][inv_col(x)] = mu;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, start: usize, w: &[usize]) -> Result<()> {
        if w.is_empty() {
            return Ok(());
        }
        let mut f = start;
        let mut b = start;
        let mut i = 0usize;
        let mut j = w.len() - 1;
        loop {
            while i <= j && self.rows[f][w[i]] != NONE {
                f = self.rows[f][w[i]];
                i += 1;
                if i > j {
                    break;
                }
            }
            if i > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i && self.rows[b][inv_col(w[j])] != NONE {
                b = self.rows[b][inv_col(w[j])];
                if j == i {
                    // fully scanned backwards
                    self.coincidence(f, b);
                    return Ok(());
                }
                j -= 1;
            }
            if i == j {
                self.rows[f][w[i]] = b;
                self.rows[b][inv_col(w[i])] = f;
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }

    /// Drops dead cosets, keeping first-definition order.
    fn compact(self) -> Vec<Vec<usize>> {
        let mut index = vec![NONE; self.rows.len()];
        let mut next = 0;
        for c in 0..self.rows.len() {
            if self.parent[c] == c {
                index[c] = next;
                next += 1;
            }
        }
        self.rows
            .iter()
            .enumerate()
            .filter(|(c, _)| self.parent[*c] == *c)
            .map(|(_, r)| r.iter().map(|&d| index[d]).collect())
            .collect()
    }
}

/// HLT coset enumeration of the subgroup generated by `subgroup` in the group
/// presented by `p`. Deterministic: subgroup generators first, then relators
/// in catalog order at each live coset in definition order.
pub fn todd_coxeter(p: &Presentation, subgroup: &[Word], limit: usize) -> Result<CosetTable> {
    if limit == 0 {
        return Err(Error::OutOfRange("coset limit must be at least 1".into()));
    }
    for h in subgroup {
        if !h.alphabet().same(p.alphabet()) {
            return Err(Error::AlphabetMismatch {
                left: format!("{:?}", h.alphabet()),
                right: format!("{:?}", p.alphabet()),
            });
        }
    }
    let ncols = 2 * p.generator_count();
    let mut e = Enumerator {
        ncols,
        rows: vec![vec![NONE; ncols]],
        parent: vec![0],
        live: 1,
        limit,
    };
    let rels: Vec<Vec<usize>> = p.relators().iter().map(word_columns).collect();
    for h in subgroup {
        e.scan_and_fill(0, &word_columns(h))?;
    }
    let mut a = 0;
    while a < e.rows.len() {
        if e.is_live(a) {
            for r in &rels {
                e.scan_and_fill(a, r)?;
                if !e.is_live(a) {
                    break;
                }
            }
            if e.is_live(a) {
                for x in 0..ncols {
                    if e.rows[a][x] == NONE {
                        e.define(a, x)?;
                    }
                }
            }
        }
        a += 1;
    }
    let rows = e.compact();
    Ok(CosetTable {
        alphabet: p.alphabet().clone(),
        rows,
        subgroup: subgroup.to_vec(),
    })
}

/// Number of γ_k generators if the alphabet is exactly `g0, g1, ..., gn`.
fn gamma_rank(alph: &Alphabet) -> Option<usize> {
    let ok = alph
        .names()
        .iter()
        .enumerate()
        .all(|(k, name)| *name == format!("g{k}"));
    (ok && alph.len() >= 2).then(|| alph.len() - 1)
}

/// Table of the map to `(Z/2)^n` recording exponent parities of γ₁..γₙ.
///
/// Coset `c` is the parity vector whose bit `k-1` is the parity of γ_k; γ₀
/// acts trivially. For n = 2, 3 the subgroup list holds the covering
/// generator images.
pub fn table_from_parity(p: &Presentation) -> Result<CosetTable> {
    let n = gamma_rank(p.alphabet()).ok_or_else(|| Error::AlphabetMismatch {
        left: format!("{:?}", p.alphabet()),
        right: "g0..gn".into(),
    })?;
    if n > 16 {
        return Err(Error::OutOfRange(format!("parity table for n = {n} too large")));
    }
    let size = 1usize << n;
    let mut perms = vec![(0..size).collect::<Vec<_>>()];
    for k in 1..=n {
        perms.push((0..size).map(|c| c ^ (1 << (k - 1))).collect());
    }
    let subgroup = match n {
        2 | 3 => covering_generator_images(n)?
            .into_iter()
            .map(|(_, w)| w.transfer(p.alphabet()))
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    CosetTable::from_permutations(p.alphabet().clone(), &perms, subgroup)
}

/// Parity vector `(a_1, …, a_n)` of a parity-table coset.
pub fn parity_vector(coset: usize, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((coset >> k) & 1) as u8).collect()
}

/// A relabeling `σ` with `σ(0) = 0` and `σ(a·x) = σ(a)·x`, if one exists.
pub fn tables_isomorphic(a: &CosetTable, b: &CosetTable) -> Option<Vec<usize>> {
    if !a.alphabet.same(&b.alphabet) || a.coset_count() != b.coset_count() {
        return None;
    }
    let n = a.coset_count();
    let ncols = 2 * a.alphabet.len();
    let mut map = vec![NONE; n];
    let mut used = vec![false; n];
    map[0] = 0;
    used[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for x in 0..ncols {
            let (ca, cb) = (a.rows[c][x], b.rows[map[c]][x]);
            if map[ca] == NONE {
                if used[cb] {
                    return None;
                }
                map[ca] = cb;
                used[cb] = true;
                queue.push_back(ca);
            } else if map[ca] != cb {
                return None;
            }
        }
    }
    map.iter().all(|&v| v != NONE).then_some(map)
}
