//! Evidence that two presentations define the same group.
//!
//! Three sources are combined: abelian invariants from the Smith normal form
//! of the exponent-sum matrix, homomorphism counts into a fixed panel of
//! small groups, and a bounded search for derivations of one presentation's
//! relators from the other's.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentations::Presentation;
use crate::words::{Alphabet, Word};

// ---------------------------------------------------------------------------
// abelianization

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Nontrivial torsion coefficients, each dividing the next.
    pub torsion: Vec<u64>,
}

impl std::fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".into() } else { format!("Z^{}", self.free_rank) });
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Invariant factors of an integer matrix (nonzero diagonal of its Smith form).
pub fn smith_diagonal(mut m: Vec<Vec<i128>>) -> Vec<u64> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = m[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        m[i][j] -= q * m[t][j];
                    }
                }
                dirty |= m[i][t] != 0;
            }
            for j in t + 1..cols {
                let q = m[t][j] / p;
                if q != 0 {
                    for i in t..rows {
                        m[i][j] -= q * m[i][t];
                    }
                }
                dirty |= m[t][j] != 0;
            }
            if !dirty {
                // the pivot must divide the rest of the block
                let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| m[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            m[t][j] += m[i][j];
                        }
                        continue;
                    }
                }
            }
            // move the smallest remaining entry of row/column t into the pivot
            let mut best = (t, t);
            for i in t..rows {
                if m[i][t] != 0 && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if m[t][j] != 0 && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            for row in m.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(m[t][t].unsigned_abs() as u64);
        t += 1;
    }
    diag
}

pub fn abelianization(p: &Presentation) -> AbelianInvariants {
    let m: Vec<Vec<i128>> = p
        .relators()
        .iter()
        .map(|r| r.exponent_sums().into_iter().map(i128::from).collect())
        .collect();
    let diag = smith_diagonal(m);
    let mut torsion: Vec<u64> = diag.iter().copied().filter(|&d| d > 1).collect();
    torsion.sort_unstable();
    AbelianInvariants {
        free_rank: p.generator_count() - diag.len(),
        torsion,
    }
}

// ---------------------------------------------------------------------------
// finite group models

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteGroupModel {
    pub label: String,
    pub order: usize,
    table: Vec<Vec<u16>>,
    inverse: Vec<u16>,
    /// Cyclic decomposition when the group is abelian.
    #[serde(skip)]
    abelian: Option<Vec<u64>>,
}

impl FiniteGroupModel {
    /// Checks identity, inverses and (exhaustively) associativity.
    pub fn from_table(label: impl Into<String>, table: Vec<Vec<u16>>) -> Result<Self> {
        let label = label.into();
        let n = table.len();
        if n == 0 || n > u16::MAX as usize || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x as usize >= n)) {
            return Err(Error::InvalidModel(format!("{label}: malformed table")));
        }
        for a in 0..n {
            if table[0][a] as usize != a || table[a][0] as usize != a {
                return Err(Error::InvalidModel(format!("{label}: element 0 is not the identity")));
            }
        }
        let mut inverse = vec![0u16; n];
        for a in 0..n {
            let inv = (0..n).find(|&b| table[a][b] == 0 && table[b][a] == 0);
            inverse[a] = inv.ok_or_else(|| Error::InvalidModel(format!("{label}: element {a} has no inverse")))? as u16;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c] as usize] {
                        return Err(Error::InvalidModel(format!("{label}: not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let commutative = (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]));
        let mut model = FiniteGroupModel { label, order: n, table, inverse, abelian: None };
        if commutative {
            model.abelian = Some(model.cyclic_decomposition());
        }
        Ok(model)
    }

    /// Closure of a set of permutations of `0..degree` under composition
    /// (`(a·b)(x) = b(a(x))`, acting on the right).
    pub fn from_permutations(label: impl Into<String>, gens: &[Vec<u8>]) -> Result<Self> {
        let label = label.into();
        let degree = gens.first().map_or(0, |g| g.len());
        let id: Vec<u8> = (0..degree as u8).collect();
        let compose = |a: &[u8], b: &[u8]| -> Vec<u8> { a.iter().map(|&x| b[x as usize]).collect() };
        let mut elems = vec![id.clone()];
        let mut seen: HashSet<Vec<u8>> = HashSet::from([id]);
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let e = compose(&elems[i], g);
                if seen.insert(e.clone()) {
                    elems.push(e);
                }
            }
            i += 1;
            if elems.len() > 5040 {
                return Err(Error::InvalidModel(format!("{label}: group too large")));
            }
        }
        let index: std::collections::HashMap<Vec<u8>, u16> =
            elems.iter().enumerate().map(|(k, e)| (e.clone(), k as u16)).collect();
        let table = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&compose(a, b)]).collect())
            .collect();
        Self::from_table(label, table)
    }

    pub fn cyclic(m: usize) -> Self {
        let table = (0..m).map(|a| (0..m).map(|b| ((a + b) % m) as u16).collect()).collect();
        Self::from_table(format!("Z{m}"), table).expect("cyclic group")
    }

    pub fn direct_product(a: &Self, b: &Self) -> Self {
        let (na, nb) = (a.order, b.order);
        let table = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| a.table[x / nb][y / nb] * nb as u16 + b.table[x % nb][y % nb])
                    .collect()
            })
            .collect();
        Self::from_table(format!("{}x{}", a.label, b.label), table).expect("direct product")
    }

    pub fn symmetric3() -> Self {
        Self::from_permutations("S3", &[vec![1, 0, 2], vec![1, 2, 0]]).expect("S3")
    }

    pub fn dihedral4() -> Self {
        Self::from_permutations("D4", &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]]).expect("D4")
    }

    pub fn alternating4() -> Self {
        Self::from_permutations("A4", &[vec![1, 2, 0, 3], vec![1, 0, 3, 2]]).expect("A4")
    }

    /// Quaternion group: elements `±1, ±i, ±j, ±k` encoded as `2·unit + sign`.
    pub fn quaternion() -> Self {
        // unit product table: (sign flip, unit)
        const MUL: [[(bool, usize); 4]; 4] = [
            [(false, 0), (false, 1), (false, 2), (false, 3)],
            [(false, 1), (true, 0), (false, 3), (true, 2)],
            [(false, 2), (true, 3), (true, 0), (false, 1)],
            [(false, 3), (false, 2), (true, 1), (true, 0)],
        ];
        let table = (0..8)
            .map(|x: usize| {
                (0..8)
                    .map(|y: usize| {
                        let (flip, u) = MUL[x / 2][y / 2];
                        let sign = (x % 2) ^ (y % 2) ^ flip as usize;
                        (2 * u + sign) as u16
                    })
                    .collect()
            })
            .collect();
        Self::from_table("Q8", table).expect("Q8")
    }

    /// Orbits of the conjugation action of the subgroup `by` on the whole
    /// model: `(smallest element, orbit size)` per orbit.
    pub fn orbit_representatives(&self, by: &[usize]) -> Vec<(usize, usize)> {
        let mut seen = vec![false; self.order];
        let mut out = Vec::new();
        for a in 0..self.order {
            if seen[a] {
                continue;
            }
            let mut size = 0;
            for &c in by {
                let b = self.mul(self.mul(c, a), self.inv(c));
                if !seen[b] {
                    seen[b] = true;
                    size += 1;
                }
            }
            out.push((a, size));
        }
        out
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian.is_some()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Evaluates a relator given as `(generator, exponent)` letters.
    fn eval_letters(&self, letters: &[(usize, i64)], images: &[usize]) -> usize {
        let mut acc = 0usize;
        for &(g, e) in letters {
            let x = if e > 0 { images[g] } else { self.inv(images[g]) };
            for _ in 0..e.unsigned_abs() {
                acc = self.mul(acc, x);
            }
        }
        acc
    }

    pub fn eval(&self, w: &Word, images: &[usize]) -> usize {
        let letters: Vec<(usize, i64)> = w.syllables().iter().map(|s| (s.gen, s.exp)).collect();
        self.eval_letters(&letters, images)
    }

    /// Invariant factors of an abelian model, read off element orders.
    fn cyclic_decomposition(&self) -> Vec<u64> {
        // Z-module from the table: the group is abelian, so count elements
        // killed by each m and peel off invariant factors
        let n = self.order;
        let killed = |m: usize| -> usize {
            (0..n)
                .filter(|&a| {
                    let mut x = 0;
                    for _ in 0..m {
                        x = self.mul(x, a);
                    }
                    x == 0
                })
                .count()
        };
        // |{a : a^{p^k} = 1}| determines the p-primary part
        let mut factors: Vec<u64> = Vec::new();
        let mut rest = n;
        let mut p = 2;
        let mut primary: Vec<Vec<u64>> = Vec::new();
        while rest > 1 {
            if rest % p == 0 {
                let mut pk = 1;
                let mut counts = vec![1usize];
                while rest % p == 0 {
                    rest /= p;
                }
                loop {
                    pk *= p;
                    let c = killed(pk);
                    if c == *counts.last().expect("nonempty") {
                        break;
                    }
                    counts.push(c);
                }
                // number of cyclic factors of order ≥ p^k is log_p(c_k / c_{k-1})
                let logs: Vec<u32> = counts
                    .windows(2)
                    .map(|w| ((w[1] / w[0]) as f64).log(p as f64).round() as u32)
                    .collect();
                let mut parts = Vec::new();
                for (k, &at_least) in logs.iter().enumerate() {
                    let next = logs.get(k + 1).copied().unwrap_or(0);
                    for _ in 0..at_least - next {
                        parts.push((p as u64).pow(k as u32 + 1));
                    }
                }
                primary.push(parts);
            }
            p += 1;
        }
        // combine primary parts into a divisor chain
        let len = primary.iter().map(|v| v.len()).max().unwrap_or(0);
        for v in primary.iter_mut() {
            v.sort_unstable();
            while v.len() < len {
                v.insert(0, 1);
            }
        }
        for k in 0..len {
            factors.push(primary.iter().map(|v| v[k]).product());
        }
        factors
    }
}

/// The fixed evidence panel.
pub fn standard_panel() -> Vec<FiniteGroupModel> {
    let z2 = FiniteGroupModel::cyclic(2);
    let mut z2z2 = FiniteGroupModel::direct_product(&z2, &z2);
    z2z2.label = "Z2xZ2".into();
    vec![
        z2,
        FiniteGroupModel::cyclic(3),
        FiniteGroupModel::cyclic(4),
        z2z2,
        FiniteGroupModel::symmetric3(),
        FiniteGroupModel::dihedral4(),
        FiniteGroupModel::quaternion(),
        FiniteGroupModel::alternating4(),
    ]
}

// ---------------------------------------------------------------------------
// homomorphism counting

pub const DEFAULT_HOM_BUDGET: u64 = 1_000_000_000;

struct HomSearch<'a> {
    model: &'a FiniteGroupModel,
    /// Generators in assignment order.
    order: Vec<usize>,
    /// Relators (as letters) to test right after assigning `order[k]`.
    checks: Vec<Vec<Vec<(usize, i64)>>>,
    /// A word that must evaluate to a non-identity element, checked like a relator.
    avoid: Option<(usize, Vec<(usize, i64)>)>,
    /// Generators not occurring in any relator (or in `avoid`).
    free: usize,
    /// `frontier[k]`: already assigned generators that still occur in a
    /// check at depth ≥ k; completions from depth k depend only on these.
    frontier: Vec<Vec<usize>>,
    /// For levels whose generator is solved for by a check relator
    /// `a·g^e·b`: `(a, b, e)`, giving `g = (a⁻¹b⁻¹)^e`.
    forced: Vec<Option<(Letters, Letters, i64)>>,
    /// Memoize only where the frontier is small enough for repeats to be likely.
    memo_level: Vec<bool>,
    budget: u64,
    spent: &'a AtomicU64,
}

impl<'a> HomSearch<'a> {
    fn new(
        p: &Presentation,
        model: &'a FiniteGroupModel,
        avoid: Option<&Word>,
        budget: u64,
        spent: &'a AtomicU64,
    ) -> Self {
        let ngen = p.generator_count();
        let rels: Vec<Vec<(usize, i64)>> = p
            .relators()
            .iter()
            .map(|r| r.syllables().iter().map(|s| (s.gen, s.exp)).collect())
            .collect();
        let uses: Vec<Vec<usize>> = rels
            .iter()
            .map(|r| {
                let mut g: Vec<usize> = r.iter().map(|&(g, _)| g).collect();
                g.sort_unstable();
                g.dedup();
                g
            })
            .collect();
        let avoid_letters: Option<Vec<(usize, i64)>> =
            avoid.map(|w| w.syllables().iter().map(|s| (s.gen, s.exp)).collect());
        let mut involved = vec![false; ngen];
        for u in &uses {
            for &g in u {
                involved[g] = true;
            }
        }
        if let Some(a) = &avoid_letters {
            for &(g, _) in a {
                involved[g] = true;
            }
        }
        // greedy order: close as many relators as early as possible
        let mut assigned = vec![false; ngen];
        let mut order = Vec::new();
        let candidates: Vec<usize> = (0..ngen).filter(|&g| involved[g]).collect();
        while order.len() < candidates.len() {
            // a relator in which g occurs once and is the last unassigned
            // generator forces g's image, so such generators go first
            let score = |g: usize| -> (bool, usize, usize, Reverse<usize>) {
                let mut forced = false;
                let mut closes = 0;
                let mut touches = 0;
                for (u, r) in uses.iter().zip(&rels) {
                    if u.contains(&g) {
                        let missing = u.iter().filter(|&&h| !assigned[h] && h != g).count();
                        if missing == 0 {
                            closes += 1;
                            let occ: i64 = r.iter().filter(|&&(h, _)| h == g).map(|&(_, e)| e.abs()).sum();
                            forced |= occ == 1;
                        }
                        if u.iter().any(|&h| assigned[h]) {
                            touches += 1;
                        }
                    }
                }
                (forced, closes, touches, Reverse(g))
            };
            let g = candidates
                .iter()
                .copied()
                .filter(|&g| !assigned[g])
                .max_by_key(|&g| score(g))
                .expect("remaining candidate");
            assigned[g] = true;
            order.push(g);
        }
        let pos: Vec<usize> = {
            let mut pos = vec![usize::MAX; ngen];
            for (k, &g) in order.iter().enumerate() {
                pos[g] = k;
            }
            pos
        };
        let mut checks = vec![Vec::new(); order.len()];
        for (r, u) in rels.into_iter().zip(&uses) {
            if let Some(k) = u.iter().map(|&g| pos[g]).max() {
                checks[k].push(r);
            }
        }
        let avoid = avoid_letters.map(|a| {
            let k = a.iter().map(|&(g, _)| pos[g]).max().unwrap_or(0);
            (k, a)
        });
        let forced = order
            .iter()
            .zip(&checks)
            .map(|(&g, rels)| {
                rels.iter().find_map(|r: &Letters| {
                    let at: Vec<usize> = (0..r.len()).filter(|&i| r[i].0 == g).collect();
                    match at[..] {
                        [i] if r[i].1.abs() == 1 => Some((r[..i].to_vec(), r[i + 1..].to_vec(), r[i].1)),
                        _ => None,
                    }
                })
            })
            .collect();
        // last depth at which each generator is still needed
        let mut last_use = vec![0usize; ngen];
        for (k, rels) in checks.iter().enumerate() {
            for r in rels {
                for &(g, _) in r {
                    last_use[g] = last_use[g].max(k);
                }
            }
        }
        if let Some((k, a)) = &avoid {
            for &(g, _) in a {
                last_use[g] = last_use[g].max(*k);
            }
        }
        let frontier: Vec<Vec<usize>> = (0..=order.len())
            .map(|k| order[..k].iter().copied().filter(|&g| last_use[g] >= k).collect())
            .collect();
        let memo_level = frontier
            .iter()
            .map(|f| (model.order as f64).powi(f.len() as i32) <= (1u64 << 16) as f64)
            .collect();
        HomSearch {
            model,
            frontier,
            forced,
            memo_level,
            free: ngen - order.len(),
            order,
            checks,
            avoid,
            budget,
            spent,
        }
    }

    fn charge(&self, n: u64) -> Result<()> {
        let total = self.spent.fetch_add(n, Ordering::Relaxed) + n;
        if total > self.budget {
            Err(Error::Budget {
                budget: self.budget,
                what: format!("homomorphism search into {}", self.model.label),
            })
        } else {
            Ok(())
        }
    }

    /// Values to try for `order[k]`: the forced one, or every element.
    fn candidates(&self, k: usize, images: &[usize]) -> std::ops::Range<usize> {
        match &self.forced[k] {
            Some((a, b, e)) => {
                let m = self.model;
                let ab = m.inv(m.mul(m.eval_letters(b, images), m.eval_letters(a, images)));
                let x = if *e > 0 { ab } else { m.inv(ab) };
                x..x + 1
            }
            None => 0..self.model.order,
        }
    }

    /// Relator evaluations are tallied in `local` and flushed to the shared
    /// counter in batches.
    fn consistent(&self, k: usize, images: &[usize], local: &mut u64) -> Result<bool> {
        let rels = &self.checks[k];
        *local += rels.len() as u64 + 1;
        if *local >= 1 << 14 {
            self.charge(std::mem::take(local))?;
        }
        if !rels.iter().all(|r| self.model.eval_letters(r, images) == 0) {
            return Ok(false);
        }
        if let Some((ka, a)) = &self.avoid {
            if *ka == k && self.model.eval_letters(a, images) == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Number of consistent completions of `images` from depth `k` on,
    /// memoized on the frontier values.
    fn count_from(
        &self,
        k: usize,
        images: &mut [usize],
        memo: &mut [HashMap<Vec<u16>, u128>],
        local: &mut u64,
    ) -> Result<u128> {
        if k == self.order.len() {
            return Ok(1);
        }
        let key: Option<Vec<u16>> = self.memo_level[k].then(|| self.frontier[k].iter().map(|&g| images[g] as u16).collect());
        if let Some(c) = key.as_ref().and_then(|key| memo[k].get(key)) {
            return Ok(*c);
        }
        let g = self.order[k];
        let mut total = 0u128;
        for x in self.candidates(k, images) {
            images[g] = x;
            if self.consistent(k, images, local)? {
                total += self.count_from(k + 1, images, memo, local)?;
            }
        }
        if let Some(key) = key {
            memo[k].insert(key, total);
        }
        Ok(total)
    }

    /// Starting prefixes for the first one or two generators in `order`,
    /// one per orbit of the conjugation action, with orbit sizes as weights.
    fn seeds(&self) -> Vec<(Vec<usize>, u128)> {
        let g = self.model;
        let mut out = Vec::new();
        for (x, class) in g.orbit_representatives(&(0..g.order).collect::<Vec<_>>()) {
            if self.order.len() == 1 {
                out.push((vec![x], class as u128));
                continue;
            }
            let centralizer: Vec<usize> = (0..g.order).filter(|&c| g.mul(c, x) == g.mul(x, c)).collect();
            for (y, orbit) in g.orbit_representatives(&centralizer) {
                out.push((vec![x, y], (class * orbit) as u128));
            }
        }
        out
    }

    /// Completions of a seed prefix (0 if the prefix itself is inconsistent).
    fn count_seed(&self, prefix: &[usize], images: &mut [usize], local: &mut u64) -> Result<u128> {
        for (k, &x) in prefix.iter().enumerate() {
            images[self.order[k]] = x;
            if !self.consistent(k, images, local)? {
                return Ok(0);
            }
        }
        let mut memo = vec![HashMap::new(); self.order.len() + 1];
        self.count_from(prefix.len(), images, &mut memo, local)
    }

    /// Fills `images` with some consistent assignment, if one exists.
    fn find(&self, images: &mut [usize]) -> Result<bool> {
        if self.order.is_empty() {
            return Ok(true);
        }
        let mut local = 0;
        let seeds = self.seeds();
        let counts: Vec<u128> = seeds
            .par_iter()
            .map(|(prefix, _)| {
                let mut im = vec![0usize; images.len()];
                let mut local = 0;
                let c = self.count_seed(prefix, &mut im, &mut local)?;
                self.charge(local)?;
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        let Some(hit) = counts.iter().position(|&c| c > 0) else {
            return Ok(false);
        };
        let prefix = &seeds[hit].0;
        let mut memo = vec![HashMap::new(); self.order.len() + 1];
        for (k, &x) in prefix.iter().enumerate() {
            images[self.order[k]] = x;
        }
        for k in prefix.len()..self.order.len() {
            let g = self.order[k];
            let mut found = false;
            for x in self.candidates(k, images) {
                images[g] = x;
                if self.consistent(k, images, &mut local)?
                    && self.count_from(k + 1, images, &mut memo, &mut local)? > 0
                {
                    found = true;
                    break;
                }
            }
            debug_assert!(found, "positive count has a witness");
        }
        Ok(true)
    }
}

fn free_factor(order: usize, free: usize) -> Result<u128> {
    (order as u128)
        .checked_pow(free as u32)
        .ok_or_else(|| Error::OutOfRange("homomorphism count overflows u128".into()))
}

/// Number of homomorphisms `p → g` (generator-image tuples satisfying every relator).
///
/// `budget` caps the number of relator evaluations performed by the pruned
/// backtracking search.
pub fn count_homs(p: &Presentation, g: &FiniteGroupModel, budget: u64) -> Result<u128> {
    if let Some(factors) = &g.abelian {
        // Hom(Z^r ⊕ ⊕Z/d, Z/m) has m^r · Π gcd(d, m) elements
        let ab = abelianization(p);
        let mut total = 1u128;
        for &m in factors {
            total = total
                .checked_mul(free_factor(m as usize, ab.free_rank)?)
                .ok_or_else(|| Error::OutOfRange("homomorphism count overflows u128".into()))?;
            for &d in &ab.torsion {
                total *= num_integer::gcd(d, m) as u128;
            }
        }
        return Ok(total);
    }
    count_homs_search(p, g, budget)
}

/// Backtracking count without the abelian shortcut (used as an oracle in tests).
///
/// The model acts on homomorphisms by conjugation, so only conjugacy-class
/// representatives are tried for the first generator and only orbit
/// representatives of its centralizer for the second, weighted by orbit size.
pub fn count_homs_search(p: &Presentation, g: &FiniteGroupModel, budget: u64) -> Result<u128> {
    let spent = AtomicU64::new(0);
    let search = HomSearch::new(p, g, None, budget, &spent);
    let free = free_factor(g.order, search.free)?;
    if search.order.is_empty() {
        return Ok(free);
    }
    let ngen = p.generator_count();
    let parts: Vec<u128> = search
        .seeds()
        .par_iter()
        .map(|(prefix, weight)| -> Result<u128> {
            let mut images = vec![0usize; ngen];
            let mut local = 0u64;
            let c = search.count_seed(prefix, &mut images, &mut local)?;
            search.charge(local)?;
            Ok(c * weight)
        })
        .collect::<Result<Vec<_>>>()?;
    parts
        .into_iter()
        .sum::<u128>()
        .checked_mul(free)
        .ok_or_else(|| Error::OutOfRange("homomorphism count overflows u128".into()))
}

/// Ordered hom counts over [`standard_panel`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub entries: Vec<(String, u128)>,
}

pub fn quotient_panel(p: &Presentation) -> Result<Fingerprint> {
    quotient_panel_with_budget(p, DEFAULT_HOM_BUDGET)
}

pub fn quotient_panel_with_budget(p: &Presentation, budget: u64) -> Result<Fingerprint> {
    let entries = standard_panel()
        .iter()
        .map(|g| Ok((g.label.clone(), count_homs(p, g, budget)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Fingerprint { entries })
}

// ---------------------------------------------------------------------------
// falsification

/// A homomorphism to a panel group under which a word is not the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientCounterexample {
    pub model: String,
    /// Image of each generator (element indices of the model table).
    pub images: Vec<usize>,
    /// Image of the word.
    pub value: usize,
}

impl QuotientCounterexample {
    /// Re-checks the certificate: relators map to the identity, `w` does not.
    pub fn verify(&self, w: &Word, p: &Presentation) -> bool {
        let Some(g) = standard_panel().into_iter().find(|g| g.label == self.model) else {
            return false;
        };
        self.images.len() == p.generator_count()
            && self.images.iter().all(|&x| x < g.order)
            && p.relators().iter().all(|r| g.eval(r, &self.images) == 0)
            && g.eval(w, &self.images) == self.value
            && self.value != 0
    }
}

/// Searches the panel for a homomorphism killing `p`'s relators but not `w`.
pub fn falsify_by_quotient(w: &Word, p: &Presentation) -> Result<Option<QuotientCounterexample>> {
    falsify_by_quotient_with_budget(w, p, DEFAULT_HOM_BUDGET)
}

pub fn falsify_by_quotient_with_budget(w: &Word, p: &Presentation, hom_budget: u64) -> Result<Option<QuotientCounterexample>> {
    if !w.alphabet().same(p.alphabet()) {
        return Err(Error::AlphabetMismatch {
            left: format!("{:?}", w.alphabet()),
            right: format!("{:?}", p.alphabet()),
        });
    }
    if w.is_identity() {
        return Ok(None);
    }
    for g in standard_panel() {
        let spent = AtomicU64::new(0);
        let search = HomSearch::new(p, &g, Some(w), hom_budget, &spent);
        let mut images = vec![0usize; p.generator_count()];
        if search.find(&mut images)? {
            let value = g.eval(w, &images);
            return Ok(Some(QuotientCounterexample { model: g.label.clone(), images, value }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// consequence search

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    /// Longest conjugator allowed for a single relator insertion.
    pub max_conjugator: usize,
    /// Most relator insertions in a derivation.
    pub max_depth: usize,
    /// Cap on explored search states.
    pub max_nodes: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_conjugator: 6, max_depth: 6, max_nodes: 200_000 }
    }
}

/// One factor `u · r^e · u⁻¹` of a derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessFactor {
    pub conjugator: Word,
    pub relator: usize,
    pub exponent: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConsequenceStatus {
    Proved { depth: usize },
    Unknown { budget: SearchBudget },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsequenceResult {
    #[serde(flatten)]
    pub status: ConsequenceStatus,
    pub witness: Option<Vec<WitnessFactor>>,
}

impl ConsequenceResult {
    pub fn is_proved(&self) -> bool {
        matches!(self.status, ConsequenceStatus::Proved { .. })
    }
}

/// Product of the witness factors.
pub fn witness_product(witness: &[WitnessFactor], p: &Presentation) -> Result<Word> {
    let mut acc = Word::identity(p.alphabet());
    for f in witness {
        let r = p
            .relators()
            .get(f.relator)
            .ok_or_else(|| Error::OutOfRange(format!("relator index {}", f.relator)))?;
        let piece = r.pow(f.exponent).conjugate(&f.conjugator)?;
        acc = acc.concat(&piece)?;
    }
    Ok(acc)
}

/// True when the witness multiplies out to exactly `w`, i.e. `w⁻¹ · Π factors = 1`.
pub fn replay_witness(w: &Word, p: &Presentation, witness: &[WitnessFactor]) -> bool {
    match witness_product(witness, p) {
        Ok(prod) => w.inverse().concat(&prod).map(|x| x.is_identity()).unwrap_or(false),
        Err(_) => false,
    }
}

type Letters = Vec<(usize, i64)>;

fn unit_letters(w: &Word) -> Letters {
    w.letters().map(|(g, e)| (g, e.signum())).collect()
}

fn reduce_letters(v: &mut Letters) {
    let mut out: Letters = Vec::with_capacity(v.len());
    for &l in v.iter() {
        if let Some(&last) = out.last() {
            if last.0 == l.0 && last.1 == -l.1 {
                out.pop();
                continue;
            }
        }
        out.push(l);
    }
    *v = out;
}

fn inverse_letters(v: &[(usize, i64)]) -> Letters {
    v.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

#[derive(Clone)]
struct Node {
    /// Current word `c`; invariant `w = F · v c v⁻¹`.
    word: Letters,
    conj: Letters,
    factors: Vec<(Letters, usize, i64)>,
}

/// Bounded search for a derivation of `w` from the relators of `p`.
///
/// Each move inserts a cyclic rotation of a relator (or its inverse) next
/// to a letter it cancels against, after which the current word is freely
/// and cyclically reduced. States are explored shortest-word-first.
pub fn is_consequence(w: &Word, p: &Presentation, budget: SearchBudget) -> Result<ConsequenceResult> {
    if !w.alphabet().same(p.alphabet()) {
        return Err(Error::AlphabetMismatch {
            left: format!("{:?}", w.alphabet()),
            right: format!("{:?}", p.alphabet()),
        });
    }
    let alph = p.alphabet().clone();
    // every rotation of every relator and its inverse: (letters, relator, exponent, shift)
    let mut pieces: Vec<(Letters, usize, i64, Letters)> = Vec::new();
    for (ri, r) in p.relators().iter().enumerate() {
        let (outer, core) = r.cyclic_decomposition();
        let outer_l = unit_letters(&outer);
        for e in [1i64, -1] {
            let base = if e > 0 { unit_letters(&core) } else { inverse_letters(&unit_letters(&core)) };
            for k in 0..base.len() {
                let rot: Letters = base[k..].iter().chain(base[..k].iter()).copied().collect();
                // rot = s⁻¹ · core^e · s with s = base[..k]; core^e = outer⁻¹ r^e outer,
                // so rot = (outer · s)⁻¹ r^e (outer · s)
                let mut shift: Letters = outer_l.iter().chain(base[..k].iter()).copied().collect();
                reduce_letters(&mut shift);
                pieces.push((rot, ri, e, shift));
            }
        }
    }

    let finish = |node: &Node| -> Vec<WitnessFactor> {
        node.factors
            .iter()
            .map(|(u, r, e)| WitnessFactor {
                conjugator: Word::from_pairs(&alph, u).expect("letters in range"),
                relator: *r,
                exponent: *e,
            })
            .collect()
    };
    let mut start = Node { word: unit_letters(w), conj: Vec::new(), factors: Vec::new() };
    cyclic_reduce_node(&mut start);
    if start.word.is_empty() {
        return Ok(ConsequenceResult { status: ConsequenceStatus::Proved { depth: 0 }, witness: Some(vec![]) });
    }
    let max_piece = pieces.iter().map(|p| p.0.len()).max().unwrap_or(0);
    let len_cap = start.word.len() + 2 * max_piece;

    let mut arena: Vec<Node> = vec![start.clone()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((start.word.len(), 0usize, 0usize)));
    let mut seen: HashSet<Letters> = HashSet::from([start.word.clone()]);
    let stop = AtomicBool::new(false);
    while let Some(Reverse((_, depth, idx))) = heap.pop() {
        if arena.len() > budget.max_nodes || stop.load(Ordering::Relaxed) {
            break;
        }
        if depth >= budget.max_depth {
            continue;
        }
        let node = arena[idx].clone();
        let c = &node.word;
        for (rot, ri, e, shift) in &pieces {
            for pos in 0..=c.len() {
                let cancels_left = pos > 0 && c[pos - 1].0 == rot[0].0 && c[pos - 1].1 == -rot[0].1;
                let last = rot[rot.len() - 1];
                let cancels_right = pos < c.len() && c[pos].0 == last.0 && c[pos].1 == -last.1;
                if !cancels_left && !cancels_right {
                    continue;
                }
                let prefix = &c[..pos];
                if prefix.len() > budget.max_conjugator {
                    continue;
                }
                let mut next: Letters = prefix.iter().chain(rot.iter()).chain(c[pos..].iter()).copied().collect();
                reduce_letters(&mut next);
                if next.len() > len_cap {
                    continue;
                }
                // inserted factor: (prefix · shift⁻¹) r^e (prefix · shift⁻¹)⁻¹, and
                // c = (that)⁻¹ · next, so record exponent -e conjugated by conj · prefix · shift⁻¹
                let mut u: Letters = node
                    .conj
                    .iter()
                    .chain(prefix.iter())
                    .copied()
                    .chain(inverse_letters(shift))
                    .collect();
                reduce_letters(&mut u);
                let mut child = Node { word: next, conj: node.conj.clone(), factors: node.factors.clone() };
                child.factors.push((u, *ri, -e));
                cyclic_reduce_node(&mut child);
                if child.word.is_empty() {
                    let witness = finish(&child);
                    return Ok(ConsequenceResult {
                        status: ConsequenceStatus::Proved { depth: depth + 1 },
                        witness: Some(witness),
                    });
                }
                if seen.insert(child.word.clone()) {
                    heap.push(Reverse((child.word.len(), depth + 1, arena.len())));
                    arena.push(child);
                }
            }
        }
        if arena.len() > budget.max_nodes {
            stop.store(true, Ordering::Relaxed);
        }
    }
    Ok(ConsequenceResult { status: ConsequenceStatus::Unknown { budget }, witness: None })
}

/// `c = a x a⁻¹` becomes `x` with the conjugator absorbed into `conj`.
fn cyclic_reduce_node(node: &mut Node) {
    loop {
        let c = &node.word;
        if c.len() >= 2 {
            let (f, l) = (c[0], c[c.len() - 1]);
            if f.0 == l.0 && f.1 == -l.1 {
                node.word = c[1..c.len() - 1].to_vec();
                node.conj.push(f);
                reduce_letters(&mut node.conj);
                continue;
            }
        }
        break;
    }
}

// ---------------------------------------------------------------------------
// verdicts

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Refuted,
    Evidence,
    ProvedBothWays,
}

impl std::fmt::Display for Tier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tier::Refuted => "refuted",
            Tier::Evidence => "evidence",
            Tier::ProvedBothWays => "proved-both-ways",
        })
    }
}

/// Status of one relator of one side checked against the other side.
#[derive(Clone, Debug, Serialize)]
pub struct RelatorCheck {
    pub relator: Word,
    pub result: ConsequenceResult,
    pub counterexample: Option<QuotientCounterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub tier: Tier,
    pub abelianization: (AbelianInvariants, AbelianInvariants),
    pub fingerprints: (Fingerprint, Fingerprint),
    /// Relators of the left side checked against the right side.
    pub left_in_right: Vec<RelatorCheck>,
    pub right_in_left: Vec<RelatorCheck>,
}

impl Verdict {
    pub fn proved_counts(&self) -> (usize, usize) {
        let count = |v: &[RelatorCheck]| v.iter().filter(|c| c.result.is_proved()).count();
        (count(&self.left_in_right), count(&self.right_in_left))
    }
}

/// Generators are matched by name; both sides must use the same name set.
pub fn compare_presentations(a: &Presentation, b: &Presentation, budget: SearchBudget) -> Result<Verdict> {
    compare_presentations_with_hom_budget(a, b, budget, DEFAULT_HOM_BUDGET)
}

/// As [`compare_presentations`] with an explicit cap on each hom count.
pub fn compare_presentations_with_hom_budget(
    a: &Presentation,
    b: &Presentation,
    budget: SearchBudget,
    hom_budget: u64,
) -> Result<Verdict> {
    let mut na: Vec<&String> = a.alphabet().names().iter().collect();
    let mut nb: Vec<&String> = b.alphabet().names().iter().collect();
    na.sort();
    nb.sort();
    if na != nb {
        return Err(Error::AlphabetMismatch {
            left: format!("{:?}", a.alphabet()),
            right: format!("{:?}", b.alphabet()),
        });
    }
    let b_on_a = b.transfer(a.alphabet())?;
    let check = |rels: &[Word], target: &Presentation| -> Result<Vec<RelatorCheck>> {
        rels.par_iter()
            .map(|r| {
                let result = is_consequence(r, target, budget)?;
                let counterexample =
                    if result.is_proved() { None } else { falsify_by_quotient_with_budget(r, target, hom_budget)? };
                Ok(RelatorCheck { relator: r.clone(), result, counterexample })
            })
            .collect()
    };
    let left_in_right = check(a.relators(), &b_on_a)?;
    let right_in_left = check(b_on_a.relators(), a)?;
    let abelianization = (abelianization(a), abelianization(b));
    let fingerprints = (quotient_panel_with_budget(a, hom_budget)?, quotient_panel_with_budget(b, hom_budget)?);
    let refuted = abelianization.0 != abelianization.1
        || fingerprints.0 != fingerprints.1
        || left_in_right.iter().chain(&right_in_left).any(|c| c.counterexample.is_some());
    let all_proved = left_in_right.iter().chain(&right_in_left).all(|c| c.result.is_proved());
    let tier = if refuted {
        Tier::Refuted
    } else if all_proved {
        Tier::ProvedBothWays
    } else {
        Tier::Evidence
    };
    Ok(Verdict { tier, abelianization, fingerprints, left_in_right, right_in_left })
}

/// Free presentation on `names` with the given relator texts (test and CLI helper).
pub fn presentation_from_text(label: &str, names: &[&str], relators: &[&str]) -> Result<Presentation> {
    let alph = Alphabet::new(names.iter().copied())?;
    let rels = relators.iter().map(|t| Word::parse(&alph, t)).collect::<Result<Vec<_>>>()?;
    Presentation::new(label, alph, rels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::{covering_presentation_canonical, pi1_xn};

    fn pres(names: &[&str], rels: &[&str]) -> Presentation {
        presentation_from_text("t", names, rels).unwrap()
    }

    #[test]
    fn smith_examples() {
        assert_eq!(abelianization(&pres(&["a", "b"], &["a*b*a^-1*b^-1"])).free_rank, 2);
        let a3 = abelianization(&pres(&["a"], &["a^3"]));
        assert_eq!((a3.free_rank, a3.torsion.clone()), (0, vec![3]));
        let m = abelianization(&pres(&["a", "b"], &["a^4*b^6", "a^6*b^4"]));
        // det = 16 - 36 = -20, gcd of entries 2 → Z/2 + Z/10
        assert_eq!(m.torsion, vec![2, 10]);
        assert_eq!(abelianization(&pi1_xn(3).unwrap()).free_rank, 4);
    }

    #[test]
    fn models_are_groups() {
        let orders: Vec<usize> = standard_panel().iter().map(|g| g.order).collect();
        assert_eq!(orders, [2, 3, 4, 4, 6, 8, 8, 12]);
        let z2z2 = &standard_panel()[3];
        assert_eq!(z2z2.abelian, Some(vec![2, 2]));
        assert_eq!(standard_panel()[2].abelian, Some(vec![4]));
        let q8 = FiniteGroupModel::quaternion();
        assert_eq!((0..8).filter(|&a| q8.element_order(a) == 4).count(), 6);
        assert!(!q8.is_abelian());
    }

    #[test]
    fn hom_counts() {
        let s3 = FiniteGroupModel::symmetric3();
        let involutions = (0..6).filter(|&a| s3.element_order(a) <= 2).count();
        assert_eq!(count_homs(&pres(&["a"], &["a^2"]), &s3, DEFAULT_HOM_BUDGET).unwrap(), involutions as u128);
        let free = Presentation::free("f", Alphabet::new(["a", "b"]).unwrap());
        assert_eq!(count_homs(&free, &s3, DEFAULT_HOM_BUDGET).unwrap(), 36);
        let z2 = FiniteGroupModel::cyclic(2);
        let p2 = pi1_xn(2).unwrap();
        assert_eq!(count_homs(&p2, &z2, DEFAULT_HOM_BUDGET).unwrap(), 8);
        assert_eq!(count_homs_search(&p2, &z2, DEFAULT_HOM_BUDGET).unwrap(), 8);
    }

    #[test]
    fn abelian_shortcut_matches_search() {
        let p = pi1_xn(3).unwrap();
        for g in standard_panel().iter().filter(|g| g.is_abelian()) {
            assert_eq!(
                count_homs(&p, g, DEFAULT_HOM_BUDGET).unwrap(),
                count_homs_search(&p, g, DEFAULT_HOM_BUDGET).unwrap(),
                "{}",
                g.label
            );
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = pi1_xn(3).unwrap();
        let err = count_homs_search(&p, &FiniteGroupModel::alternating4(), 10).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn relator_is_consequence() {
        let p = pi1_xn(3).unwrap();
        let r = p.relators()[4].clone();
        let res = is_consequence(&r, &p, SearchBudget::default()).unwrap();
        assert_eq!(res.status, ConsequenceStatus::Proved { depth: 1 });
        assert!(replay_witness(&r, &p, res.witness.as_ref().unwrap()));
    }

    #[test]
    fn rotated_braid_relation_is_consequence() {
        let p = pi1_xn(3).unwrap();
        for k in 1..=3 {
            let w = p.word(&format!("g{k}^-1*g0*g{k}*g0*g{k}*g0^-1*g{k}^-1*g0^-1")).unwrap();
            let res = is_consequence(&w, &p, SearchBudget::default()).unwrap();
            assert!(res.is_proved(), "k = {k}");
            assert!(replay_witness(&w, &p, res.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn generator_is_falsified() {
        let p = pi1_xn(3).unwrap();
        let w = p.generator("g1").unwrap();
        let budget = SearchBudget { max_nodes: 2000, ..SearchBudget::default() };
        assert!(!is_consequence(&w, &p, budget).unwrap().is_proved());
        let cex = falsify_by_quotient(&w, &p).unwrap().expect("parity map");
        assert_eq!(cex.model, "Z2");
        assert!(cex.verify(&w, &p));
        assert!(falsify_by_quotient(&p.relators()[0], &p).unwrap().is_none());
    }

    #[test]
    fn cover_commutator_not_falsified() {
        let c = covering_presentation_canonical(3).unwrap();
        let w = Word::commutator(&c.generator("l1").unwrap(), &c.generator("l2").unwrap()).unwrap();
        assert!(falsify_by_quotient(&w, &c).unwrap().is_none());
    }

    #[test]
    fn fingerprints_separate_cyclic_groups() {
        let a = quotient_panel(&pres(&["a"], &["a^2"])).unwrap();
        let b = quotient_panel(&pres(&["a"], &["a^3"])).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn compare_with_itself_rotated() {
        let p = pi1_xn(2).unwrap();
        let rotated: Vec<Word> = p.relators().iter().map(|r| r.rotations()[1].clone()).collect();
        let q = p.with_relators(rotated).unwrap();
        let v = compare_presentations(&p, &q, SearchBudget::default()).unwrap();
        assert_eq!(v.tier, Tier::ProvedBothWays);
    }
}
