//! Numerical braid monodromy of the three-variable plane cut.
//!
//! The curve is `L₀L₁L₂L₃Q = 0` in the `(x, y)` plane, cut by the pencil
//! `y = λ(x+1)` through `(−1, 0)`. Each pencil line is parametrized by `x`,
//! so a fiber is the set of 8 roots of `P(λ, x)`. Roots are tracked along
//! paths in the λ-plane; exchanges in the order of the tilted key
//! `Re z − ε Im z` are recorded as half-twists, and the Artin action of the
//! resulting braids yields the van Kampen relations.

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::equivalence::{is_consequence, SearchBudget};
use crate::error::{Error, Result};
use crate::exactpoly::{
    complex_roots, complex_roots_from, isolate_real_roots, substitute_pencil, tolerance_from_f64,
    BivariatePoly, IsolatedRealRoot, MultiPoly, UPoly,
};
use crate::presentations::Presentation;
use crate::words::{Alphabet, Word};

/// Base parameter of the pencil.
pub const BASE_PARAMETER: f64 = 0.125;

/// Slope of the tilted ordering key.
pub const TILT: f64 = 1.0 / 64.0;

/// Guard radius around a critical value, as a fraction of its local gap.
pub const GUARD_FRACTION: f64 = 1e-3;

/// Radius of detours and loops, as a fraction of the local gap.
pub const DETOUR_FRACTION: f64 = 0.25;

/// Default isolation width of the critical values.
pub const ROOT_TOLERANCE: f64 = 1e-14;

/// Relative distance under which two fiber points count as coincident.
pub const COLLISION_THRESHOLD: f64 = 1e-6;

const ROOT_TOL: f64 = 1e-10;
const ARC_SEGMENTS: usize = 48;
const MIN_STEP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    L0,
    L1,
    L2,
    L3,
    Q,
}

impl Component {
    pub fn is_line(self) -> bool {
        self != Component::Q
    }
}

pub struct PlaneCutScene {
    components: Vec<(Component, MultiPoly)>,
    pencil: BivariatePoly,
    quartic: BivariatePoly,
    base: f64,
    root_tolerance: f64,
    criticals: OnceLock<Vec<IsolatedRealRoot>>,
}

fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn c(v: i64) -> MultiPoly {
    MultiPoly::constant(xy(), BigInt::from(v))
}

impl PlaneCutScene {
    pub fn new() -> Self {
        let x = MultiPoly::var(xy(), 0);
        let y = MultiPoly::var(xy(), 1);
        let l0 = x.sub(&c(4));
        let l1 = x.add(&y);
        let l2 = y.sub(&x);
        let l3 = x.sub(&c(1));
        let inner = x.mul(&x).scale(&4.into()).add(&y.mul(&y).scale(&4.into())).sub(&x.scale(&32.into())).add(&c(25));
        let q = inner.pow(2).sub(&y.mul(&y).sub(&x.mul(&x)).mul(&l3).mul(&l0).scale(&64.into()));
        let components = vec![
            (Component::L1, l1),
            (Component::L2, l2),
            (Component::L3, l3),
            (Component::Q, q.clone()),
            (Component::L0, l0),
        ];
        let pencil = components
            .iter()
            .map(|(_, f)| substitute_pencil(f).expect("nonzero curve"))
            .reduce(|a, b| a.mul(&b))
            .expect("five components");
        let quartic = substitute_pencil(&q).expect("nonzero quartic");
        PlaneCutScene {
            components,
            pencil,
            quartic,
            base: BASE_PARAMETER,
            root_tolerance: ROOT_TOLERANCE,
            criticals: OnceLock::new(),
        }
    }

    /// Width to which critical values are isolated. Must be positive.
    pub fn with_root_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Invalid(format!("root tolerance must be positive, got {tol}")));
        }
        self.root_tolerance = tol;
        self.criticals = OnceLock::new();
        Ok(self)
    }

    pub fn root_tolerance(&self) -> f64 {
        self.root_tolerance
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// `P(λ, x)`, the product of all components restricted to the pencil.
    pub fn polynomial(&self) -> &BivariatePoly {
        &self.pencil
    }

    pub fn quartic(&self) -> &BivariatePoly {
        &self.quartic
    }

    pub fn component(&self, which: Component) -> &MultiPoly {
        &self.components.iter().find(|(k, _)| *k == which).expect("all components present").1
    }

    pub fn components(&self) -> &[(Component, MultiPoly)] {
        &self.components
    }

    pub fn critical_values(&self) -> Result<&[IsolatedRealRoot]> {
        if let Some(v) = self.criticals.get() {
            return Ok(v);
        }
        let v = compute_critical_values(self)?;
        Ok(self.criticals.get_or_init(|| v))
    }

    fn critical_floats(&self) -> Result<Vec<f64>> {
        Ok(self.critical_values()?.iter().map(|r| r.value).collect())
    }
}

impl Default for PlaneCutScene {
    fn default() -> Self {
        Self::new()
    }
}

/// Square-free part of `Res_x(P, ∂P/∂x)` with the factors of the leading
/// coefficient removed.
pub fn discriminant_core(scene: &PlaneCutScene) -> UPoly {
    let p = scene.polynomial();
    let dp = p.derivative_x().expect("positive degree");
    let mut d = p.resultant_x(&dp).square_free_part();
    let lc = p.leading_coeff().square_free_part();
    loop {
        let g = d.gcd_primitive(&lc);
        if g.degree().unwrap_or(0) == 0 {
            break;
        }
        d = d.div_exact_checked(&g).expect("gcd divides").primitive_part();
    }
    d
}

fn compute_critical_values(scene: &PlaneCutScene) -> Result<Vec<IsolatedRealRoot>> {
    let d = discriminant_core(scene);
    if d.is_zero() {
        return Err(Error::Invalid("pencil discriminant vanishes identically".into()));
    }
    Ok(isolate_real_roots(&d, &tolerance_from_f64(scene.root_tolerance)))
}

fn local_gaps(crit: &[f64]) -> Vec<f64> {
    (0..crit.len())
        .map(|i| {
            crit.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| (v - crit[i]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// fibers

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberPoint {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub component: Component,
}

/// The 8 points of a pencil line on the curve. Index `k` holds label
/// `h_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fiber {
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    pub points: Vec<FiberPoint>,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Ordering key used for strand positions.
pub fn tilted_key(z: Complex64) -> f64 {
    z.re - TILT * z.im
}

fn tilted_height(z: Complex64) -> f64 {
    z.im + TILT * z.re
}

impl Fiber {
    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// `order[pos]` is the label index occupying position `pos`.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| tilted_key(self.points[a].value).total_cmp(&tilted_key(self.points[b].value)));
        idx
    }

    pub fn min_gap(&self) -> f64 {
        min_gap(&self.values())
    }

    /// Largest residual of a point on its own component, scaled by the
    /// coefficient magnitude.
    pub fn max_residual(&self, scene: &PlaneCutScene) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let f = substitute_pencil(scene.component(p.component)).expect("nonzero");
                let coeffs = f.at_lambda(self.lambda);
                let val = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * p.value + a);
                let scale = coeffs.iter().rev().fold(0.0, |acc, a| acc * p.value.norm() + a.norm());
                val.norm() / scale.max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

fn min_gap(v: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..v.len() {
        for j in 0..i {
            g = g.min((v[i] - v[j]).norm());
        }
    }
    g
}

fn line_points(lambda: Complex64) -> [(Component, Complex64); 4] {
    let one = Complex64::new(1.0, 0.0);
    [
        (Component::L1, -lambda / (one + lambda)),
        (Component::L2, lambda / (one - lambda)),
        (Component::L3, one),
        (Component::L0, Complex64::new(4.0, 0.0)),
    ]
}

fn sort_fiber(lambda: Complex64, mut pts: Vec<FiberPoint>) -> Fiber {
    pts.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(b.value.im.total_cmp(&a.value.im)));
    Fiber { lambda, points: pts }
}

/// Fiber over λ with labels assigned by `(Re, −Im)`, without the guard check.
pub fn fiber_unchecked(scene: &PlaneCutScene, lambda: Complex64) -> Result<Fiber> {
    let coeffs = scene.quartic.at_lambda(lambda);
    let roots = complex_roots(&coeffs, 1e-8)?;
    let mut pts: Vec<FiberPoint> =
        line_points(lambda).iter().map(|&(component, value)| FiberPoint { value, component }).collect();
    pts.extend(roots.into_iter().map(|value| FiberPoint { value, component: Component::Q }));
    Ok(sort_fiber(lambda, pts))
}

fn guard_check(crit: &[f64], gaps: &[f64], lambda: Complex64) -> Result<()> {
    for (c, g) in crit.iter().zip(gaps) {
        if (lambda - c).norm() < GUARD_FRACTION * g {
            return Err(Error::NearCritical { lambda: lambda.to_string(), critical: *c });
        }
    }
    Ok(())
}

/// Fiber over a λ at least the guard distance away from every critical value.
pub fn fiber(scene: &PlaneCutScene, lambda: Complex64) -> Result<Fiber> {
    let crit = scene.critical_floats()?;
    guard_check(&crit, &local_gaps(&crit), lambda)?;
    let f = fiber_unchecked(scene, lambda)?;
    let scale = 1.0 + f.points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    if f.min_gap() < COLLISION_THRESHOLD * scale {
        return Err(Error::Tracking { lambda: lambda.to_string(), reason: "fiber points coincide".into() });
    }
    Ok(f)
}

pub fn base_fiber(scene: &PlaneCutScene) -> Result<Fiber> {
    fiber(scene, Complex64::new(scene.base, 0.0))
}

// ---------------------------------------------------------------------------
// braids

/// One half-twist `σ_position^sign` exchanging the strands with base labels
/// `strands` (left one first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub position: usize,
    pub sign: i8,
    pub strands: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BraidWord {
    pub crossings: Vec<Crossing>,
}

impl BraidWord {
    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign as i64).sum()
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            crossings: self
                .crossings
                .iter()
                .rev()
                .map(|c| Crossing { position: c.position, sign: -c.sign, strands: (c.strands.1, c.strands.0) })
                .collect(),
        }
    }

    pub fn then(&self, o: &BraidWord) -> BraidWord {
        BraidWord { crossings: self.crossings.iter().chain(&o.crossings).copied().collect() }
    }

    /// Permutation of positions: strand at position `p` ends at `perm[p]`.
    pub fn permutation(&self, strands: usize) -> Vec<usize> {
        let mut at: Vec<usize> = (0..strands).collect(); // at[p] = original position now at p
        for c in &self.crossings {
            at.swap(c.position - 1, c.position);
        }
        let mut perm = vec![0; strands];
        for (p, &orig) in at.iter().enumerate() {
            perm[orig] = p;
        }
        perm
    }

    /// Signed crossing count between each unordered pair of labels.
    pub fn pair_exponents(&self) -> Vec<((usize, usize), i64)> {
        let mut acc: std::collections::BTreeMap<(usize, usize), i64> = Default::default();
        for c in &self.crossings {
            let (a, b) = c.strands;
            *acc.entry((a.min(b), a.max(b))).or_default() += c.sign as i64;
        }
        acc.into_iter().filter(|&(_, e)| e != 0).collect()
    }

    /// `σ_i^{±1}` text, positions 1-based.
    pub fn to_text(&self) -> String {
        if self.crossings.is_empty() {
            return "1".into();
        }
        self.crossings.iter().map(|c| format!("s{}^{}", c.position, c.sign)).collect::<Vec<_>>().join("*")
    }
}

/// Images of free generators `x_1..x_n` under a braid automorphism.
#[derive(Clone, Debug)]
pub struct ArtinGenerators {
    alphabet: Arc<Alphabet>,
    images: Vec<Word>,
}

pub fn alpha_alphabet(strands: usize) -> Arc<Alphabet> {
    Alphabet::new((1..=strands).map(|k| format!("a{k}"))).expect("valid names")
}

impl ArtinGenerators {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        let images = (0..alphabet.len()).map(|k| Word::generator(&alphabet, k)).collect();
        ArtinGenerators { alphabet, images }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    fn twist_images(&self, position: usize, sign: i8) -> Vec<Word> {
        let a = &self.alphabet;
        let (i, j) = (position - 1, position);
        let xi = Word::generator(a, i);
        let xj = Word::generator(a, j);
        let mut out: Vec<Word> = (0..a.len()).map(|k| Word::generator(a, k)).collect();
        if sign > 0 {
            out[i] = &(&xi * &xj) * &xi.inverse();
            out[j] = xi;
        } else {
            out[i] = xj.clone();
            out[j] = &(&xj.inverse() * &xi) * &xj;
        }
        out
    }

    /// Applies one half-twist after the ones already applied.
    pub fn apply(&mut self, position: usize, sign: i8) -> Result<()> {
        if position == 0 || position >= self.alphabet.len() || sign.abs() != 1 {
            return Err(Error::OutOfRange(format!("half-twist s{position}^{sign}")));
        }
        let t = self.twist_images(position, sign);
        for w in self.images.iter_mut() {
            *w = w.substitute(&self.alphabet, &t)?;
        }
        Ok(())
    }

    pub fn apply_word(&mut self, b: &BraidWord) -> Result<()> {
        for c in &b.crossings {
            self.apply(c.position, c.sign)?;
        }
        Ok(())
    }

    /// `x_1 ⋯ x_n` evaluated on the current images.
    pub fn product(&self) -> Word {
        Word::product(&self.alphabet, &self.images).expect("same alphabet")
    }

    /// Nontrivial relators `x_k⁻¹ Φ(x_k)`.
    pub fn relators(&self) -> Vec<Word> {
        self.images
            .iter()
            .enumerate()
            .map(|(k, w)| &Word::generator(&self.alphabet, k).inverse() * w)
            .filter(|w| !w.is_identity())
            .collect()
    }
}

pub fn artin_action(b: &BraidWord, strands: usize) -> Result<ArtinGenerators> {
    let mut g = ArtinGenerators::new(alpha_alphabet(strands));
    g.apply_word(b)?;
    Ok(g)
}

// ---------------------------------------------------------------------------
// tracking

#[derive(Clone, Debug, Serialize)]
pub struct Tracked {
    pub end: Fiber,
    /// `permutation[k]` is the end position of the strand starting at position `k`.
    pub permutation: Vec<usize>,
    pub braid: BraidWord,
    pub steps: usize,
    /// Smallest observed ratio of pairwise gap to per-step movement.
    pub worst_ratio: f64,
}

struct Tracker<'a> {
    scene: &'a PlaneCutScene,
    crit: Vec<f64>,
    gaps: Vec<f64>,
    labels: Vec<usize>,
    record: Option<&'a mut Vec<(Complex64, Vec<Complex64>)>>,
}

enum StepFailure {
    Refine,
    Fatal(Error),
}

impl<'a> Tracker<'a> {
    fn new(scene: &'a PlaneCutScene) -> Result<Self> {
        let crit = scene.critical_floats()?;
        let gaps = local_gaps(&crit);
        Ok(Tracker { scene, crit, gaps, labels: (0..8).collect(), record: None })
    }

    fn with_labels(mut self, labels: &[usize]) -> Self {
        self.labels = labels.to_vec();
        self
    }

    fn propose(&self, cur: &Fiber, lambda: Complex64) -> std::result::Result<Fiber, StepFailure> {
        if let Err(e) = guard_check(&self.crit, &self.gaps, lambda) {
            return Err(StepFailure::Fatal(e));
        }
        let q_idx: Vec<usize> =
            (0..cur.points.len()).filter(|&k| cur.points[k].component == Component::Q).collect();
        let init: Vec<Complex64> = q_idx.iter().map(|&k| cur.points[k].value).collect();
        let coeffs = self.scene.quartic.at_lambda(lambda);
        let roots = complex_roots_from(&coeffs, &init, ROOT_TOL).map_err(|_| StepFailure::Refine)?;
        let mut taken = vec![false; roots.len()];
        let mut pts = cur.points.clone();
        for (slot, &k) in q_idx.iter().enumerate() {
            let prev = init[slot];
            let best = (0..roots.len())
                .min_by(|&a, &b| (roots[a] - prev).norm().total_cmp(&(roots[b] - prev).norm()))
                .expect("four roots");
            if taken[best] {
                return Err(StepFailure::Refine);
            }
            taken[best] = true;
            pts[k].value = roots[best];
        }
        let lines = line_points(lambda);
        for p in pts.iter_mut().filter(|p| p.component.is_line()) {
            p.value = lines.iter().find(|(c, _)| *c == p.component).expect("line").1;
        }
        Ok(Fiber { lambda, points: pts })
    }

    /// Crossings between `a` and `b` in tilted-key order, in time order.
    fn crossings(&self, a: &Fiber, b: &Fiber, order: &mut Vec<usize>) -> Option<Vec<Crossing>> {
        let n = a.points.len();
        let ka: Vec<f64> = a.points.iter().map(|p| tilted_key(p.value)).collect();
        let kb: Vec<f64> = b.points.iter().map(|p| tilted_key(p.value)).collect();
        let mut events: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..n {
            for j in 0..i {
                let d0 = ka[i] - ka[j];
                let d1 = kb[i] - kb[j];
                if d0 * d1 < 0.0 {
                    events.push((d0 / (d0 - d1), i, j));
                }
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out = Vec::new();
        for (t, i, j) in events {
            let pi = order.iter().position(|&s| s == i)?;
            let pj = order.iter().position(|&s| s == j)?;
            if pi.abs_diff(pj) != 1 {
                return None;
            }
            let (l, r, pos) = if pi < pj { (i, j, pi) } else { (j, i, pj) };
            let h = |k: usize| {
                let z = a.points[k].value + (b.points[k].value - a.points[k].value) * t;
                tilted_height(z)
            };
            let sign = if h(l) < h(r) { 1 } else { -1 };
            out.push(Crossing { position: pos + 1, sign, strands: (self.labels[l], self.labels[r]) });
            order.swap(pos, pos + 1);
        }
        Some(out)
    }

    fn segment(
        &mut self,
        start: Fiber,
        to: Complex64,
        braid: &mut BraidWord,
        order: &mut Vec<usize>,
        stats: &mut (usize, f64),
    ) -> Result<Fiber> {
        let from = start.lambda;
        let mut cur = start;
        let mut t = 0.0f64;
        let mut h = 1.0f64;
        while t < 1.0 {
            let h_try = h.min(1.0 - t);
            let lam = if t + h_try >= 1.0 { to } else { from + (to - from) * (t + h_try) };
            let next = match self.propose(&cur, lam) {
                Ok(f) => f,
                Err(StepFailure::Fatal(e)) => return Err(e),
                Err(StepFailure::Refine) => {
                    h = h_try / 2.0;
                    if h < MIN_STEP {
                        return Err(Error::Tracking { lambda: lam.to_string(), reason: "root solver failed".into() });
                    }
                    continue;
                }
            };
            let moved = cur
                .points
                .iter()
                .zip(&next.points)
                .map(|(a, b)| (a.value - b.value).norm())
                .fold(0.0, f64::max);
            let gap = cur.min_gap().min(next.min_gap());
            let mut trial_order = order.clone();
            let crossings = if 3.0 * moved < gap { self.crossings(&cur, &next, &mut trial_order) } else { None };
            match crossings {
                Some(cs) => {
                    braid.crossings.extend(cs);
                    *order = trial_order;
                    stats.0 += 1;
                    if moved > 0.0 {
                        stats.1 = stats.1.min(gap / moved);
                    }
                    if let Some(rec) = self.record.as_deref_mut() {
                        rec.push((next.lambda, next.values()));
                    }
                    cur = next;
                    t += h_try;
                    h = (h_try * 2.0).min(1.0);
                }
                None => {
                    h = h_try / 2.0;
                    if h < MIN_STEP {
                        return Err(Error::Tracking {
                            lambda: lam.to_string(),
                            reason: format!("gap condition violated (moved {moved:e}, gap {gap:e})"),
                        });
                    }
                }
            }
        }
        Ok(cur)
    }

    fn run(&mut self, path: &[Complex64], start: &Fiber) -> Result<Tracked> {
        let mut order = start.order();
        let initial_order = order.clone();
        let mut braid = BraidWord::default();
        let mut stats = (0usize, f64::INFINITY);
        let mut cur = start.clone();
        if let Some(first) = path.first() {
            if (*first - start.lambda).norm() > 1e-12 {
                cur = self.segment(cur, *first, &mut braid, &mut order, &mut stats)?;
            }
        }
        for &p in path.iter().skip(1) {
            cur = self.segment(cur, p, &mut braid, &mut order, &mut stats)?;
        }
        // permutation in positions: strand starting at position p ends at position perm[p]
        let mut perm = vec![0; order.len()];
        for (p, &label) in initial_order.iter().enumerate() {
            perm[p] = order.iter().position(|&l| l == label).expect("same labels");
        }
        Ok(Tracked { end: cur, permutation: perm, braid, steps: stats.0, worst_ratio: stats.1 })
    }
}

/// Tracks the fiber along a polyline. Crossings carry the labels of `start`.
pub fn track(scene: &PlaneCutScene, path: &[Complex64], start: &Fiber) -> Result<Tracked> {
    Tracker::new(scene)?.run(path, start)
}

/// As [`track`], also returning every accepted sample `(λ, points)`.
pub fn track_recorded(
    scene: &PlaneCutScene,
    path: &[Complex64],
    start: &Fiber,
) -> Result<(Tracked, Vec<(Complex64, Vec<Complex64>)>)> {
    let mut rec = Vec::new();
    let t = {
        let mut tr = Tracker::new(scene)?;
        tr.record = Some(&mut rec);
        tr.run(path, start)?
    };
    Ok((t, rec))
}

fn track_labeled(scene: &PlaneCutScene, path: &[Complex64], start: &Fiber, labels: &[usize]) -> Result<Tracked> {
    Tracker::new(scene)?.with_labels(labels).run(path, start)
}

// ---------------------------------------------------------------------------
// paths

fn arc(center: f64, radius: f64, from: f64, to: f64, segments: usize) -> Vec<Complex64> {
    (1..=segments)
        .map(|k| {
            let th = from + (to - from) * k as f64 / segments as f64;
            Complex64::new(center, 0.0) + Complex64::from_polar(radius, th)
        })
        .collect()
}

/// Data for the standard loop around one critical value.
#[derive(Clone, Debug)]
pub struct LoopPlan {
    pub value: f64,
    pub radius: f64,
    /// Intermediate critical values passed on the way, as `(center, radius)`.
    pub detours: Vec<(f64, f64)>,
    /// Real point where the circle starts.
    pub start: f64,
    /// Polyline from the base parameter to the loop's starting point.
    pub approach: Vec<Complex64>,
    /// Counterclockwise circle, closed at the starting point.
    pub circle: Vec<Complex64>,
}

/// Approach paths run along the real axis from the base and pass every
/// intermediate critical value on an upper semicircle.
pub fn loop_plan(scene: &PlaneCutScene, index: usize) -> Result<LoopPlan> {
    let crit = scene.critical_floats()?;
    let gaps = local_gaps(&crit);
    let c = *crit.get(index).ok_or_else(|| Error::OutOfRange(format!("critical value index {index}")))?;
    let base = scene.base;
    let r = DETOUR_FRACTION * gaps[index];
    let mut path = vec![Complex64::new(base, 0.0)];
    let rightward = c > base;
    let mut between: Vec<usize> = (0..crit.len())
        .filter(|&k| k != index && if rightward { crit[k] > base && crit[k] < c } else { crit[k] < base && crit[k] > c })
        .collect();
    if !rightward {
        between.reverse();
    }
    let detours: Vec<(f64, f64)> = between.iter().map(|&k| (crit[k], DETOUR_FRACTION * gaps[k])).collect();
    for &(ck, rk) in &detours {
        path.push(Complex64::new(entry_point(ck, rk, rightward), 0.0));
        path.extend(half_turn(ck, rk, rightward));
    }
    let start = entry_point(c, r, rightward);
    path.push(Complex64::new(start, 0.0));
    Ok(LoopPlan { value: c, radius: r, detours, start, approach: path, circle: full_circle(c, r, rightward) })
}

fn entry_point(c: f64, r: f64, rightward: bool) -> f64 {
    if rightward {
        c - r
    } else {
        c + r
    }
}

/// Upper semicircle from the entry side to the far side.
fn half_turn(c: f64, r: f64, rightward: bool) -> Vec<Complex64> {
    use std::f64::consts::PI;
    if rightward {
        arc(c, r, PI, 0.0, ARC_SEGMENTS)
    } else {
        arc(c, r, 0.0, PI, ARC_SEGMENTS)
    }
}

/// Counterclockwise circle starting and ending at the entry point.
fn full_circle(c: f64, r: f64, rightward: bool) -> Vec<Complex64> {
    use std::f64::consts::PI;
    let start_angle = if rightward { PI } else { 0.0 };
    let start = Complex64::new(entry_point(c, r, rightward), 0.0);
    let mut circle = vec![start];
    circle.extend(arc(c, r, start_angle, start_angle + 2.0 * PI, 2 * ARC_SEGMENTS));
    *circle.last_mut().expect("nonempty") = start;
    circle
}

// ---------------------------------------------------------------------------
// events

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventClass {
    Branch,
    Node,
    LineCrossing,
    Tangency,
}

impl EventClass {
    pub fn exponent(self) -> i64 {
        match self {
            EventClass::Branch => 1,
            EventClass::Node | EventClass::LineCrossing => 2,
            EventClass::Tangency => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collision {
    /// Display labels, 1-based: base labels carried along the approach and
    /// re-sorted by the ordering rule after each branch half-turn.
    pub strands: (usize, usize),
    /// Base labels carried along the approach without re-sorting.
    pub tracked_strands: (usize, usize),
    pub components: (Component, Component),
    pub exponent: i64,
    pub class: EventClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct BraidEvent {
    pub value: f64,
    pub collisions: Vec<Collision>,
    /// Braid of the small loop, with labels transported from the base fiber.
    pub local_braid: BraidWord,
    /// Braid of the full based loop: approach, circle, approach reversed.
    pub loop_braid: BraidWord,
    pub permutation: Vec<usize>,
    /// Number of coincident point pairs in the fiber over the critical value.
    pub coincidences: usize,
}

impl BraidEvent {
    /// The common class of all collisions.
    pub fn class(&self) -> Option<EventClass> {
        let first = self.collisions.first()?.class;
        self.collisions.iter().all(|c| c.class == first).then_some(first)
    }

    pub fn strands(&self) -> Vec<(usize, usize)> {
        self.collisions.iter().map(|c| c.strands).collect()
    }
}

fn classify(exponent: i64, a: Component, b: Component) -> Option<EventClass> {
    match exponent.abs() {
        1 if a == Component::Q && b == Component::Q => Some(EventClass::Branch),
        2 if a == Component::Q && b == Component::Q => Some(EventClass::Node),
        2 if a.is_line() && b.is_line() => Some(EventClass::LineCrossing),
        4 if a.is_line() != b.is_line() => Some(EventClass::Tangency),
        _ => None,
    }
}

fn count_coincidences(scene: &PlaneCutScene, c: f64) -> Result<usize> {
    let f = fiber_unchecked(scene, Complex64::new(c, 0.0))?;
    let v = f.values();
    let mut n = 0;
    for i in 0..v.len() {
        for j in 0..i {
            let scale = 1.0 + v[i].norm().max(v[j].norm());
            // double roots are only accurate to about sqrt(eps)
            if (v[i] - v[j]).norm() < 1e2 * COLLISION_THRESHOLD * scale {
                n += 1;
            }
        }
    }
    Ok(n)
}

struct Transport {
    fiber: Fiber,
    braid: BraidWord,
    /// `display[label]`: label shown for a tracked base label.
    display: Vec<usize>,
}

/// Tracks from the base to the loop start. After each half-turn around a
/// branch value the two exchanged points have their labels re-sorted by the
/// ordering rule; all other labels follow their points.
fn approach(scene: &PlaneCutScene, plan: &LoopPlan) -> Result<Transport> {
    let rightward = plan.value > scene.base;
    let mut cur = base_fiber(scene)?;
    let mut braid = BraidWord::default();
    let mut display: Vec<usize> = (0..8).collect();
    for &(ck, rk) in &plan.detours {
        let t = track(scene, &[Complex64::new(entry_point(ck, rk, rightward), 0.0)], &cur)?;
        braid = braid.then(&t.braid);
        cur = t.end;
        let around = track(scene, &full_circle(ck, rk, rightward), &cur)?;
        let order = cur.order();
        let moved: Vec<usize> = (0..8).filter(|&p| around.permutation[p] != p).collect();
        let t = track(scene, &half_turn(ck, rk, rightward), &cur)?;
        braid = braid.then(&t.braid);
        cur = t.end;
        if let [p, q] = moved[..] {
            let (a, b) = (order[p], order[q]);
            let (za, zb) = (cur.points[a].value, cur.points[b].value);
            let a_first = za.re < zb.re || (za.re == zb.re && za.im > zb.im);
            let (lo, hi) = (display[a].min(display[b]), display[a].max(display[b]));
            (display[a], display[b]) = if a_first { (lo, hi) } else { (hi, lo) };
        } else if !moved.is_empty() {
            return Err(Error::Invalid(format!("loop around {ck} permutes {} strands", moved.len())));
        }
    }
    let t = track(scene, &[Complex64::new(plan.start, 0.0)], &cur)?;
    braid = braid.then(&t.braid);
    Ok(Transport { fiber: t.end, braid, display })
}

fn event_from(scene: &PlaneCutScene, plan: &LoopPlan, tr: &Transport) -> Result<BraidEvent> {
    let base = base_fiber(scene)?;
    let labels: Vec<usize> = (0..8).collect();
    let local = track_labeled(scene, &plan.circle, &tr.fiber, &labels)?;
    let full = tr.braid.then(&local.braid).then(&tr.braid.inverse());
    let mut collisions = Vec::new();
    for ((a, b), e) in local.braid.pair_exponents() {
        let (ca, cb) = (base.points[a].component, base.points[b].component);
        let class = classify(e, ca, cb).ok_or_else(|| {
            Error::Invalid(format!("unclassifiable local braid exponent {e} on strands h{} h{} at {}", a + 1, b + 1, plan.value))
        })?;
        let (da, db) = (tr.display[a] + 1, tr.display[b] + 1);
        collisions.push(Collision {
            strands: (da.min(db), da.max(db)),
            tracked_strands: (a + 1, b + 1),
            components: (ca, cb),
            exponent: e,
            class,
        });
    }
    if collisions.is_empty() {
        return Err(Error::Invalid(format!("trivial local braid at critical value {}", plan.value)));
    }
    Ok(BraidEvent {
        value: plan.value,
        collisions,
        permutation: full.permutation(8),
        local_braid: local.braid,
        loop_braid: full,
        coincidences: count_coincidences(scene, plan.value)?,
    })
}

pub fn classify_event(scene: &PlaneCutScene, index: usize) -> Result<BraidEvent> {
    let plan = loop_plan(scene, index)?;
    let tr = approach(scene, &plan)?;
    event_from(scene, &plan, &tr)
}

/// Events for every critical value, in ascending order of λ.
pub fn all_events(scene: &PlaneCutScene) -> Result<Vec<BraidEvent>> {
    let n = scene.critical_values()?.len();
    (0..n).into_par_iter().map(|k| classify_event(scene, k)).collect()
}

/// Order in which relations are assembled: ascending |c|, negative first.
pub fn assembly_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()).then(values[a].total_cmp(&values[b])));
    idx
}

/// Permutation of the loop around all finite critical values, tracked
/// directly on a circle of radius 2 entered vertically from the base.
pub fn permutation_at_large_circle(scene: &PlaneCutScene) -> Result<Vec<usize>> {
    let base = base_fiber(scene)?;
    let b = scene.base;
    let r = 2.0f64;
    let top = (r * r - b * b).sqrt();
    let start_angle = top.atan2(b);
    let mut path = vec![Complex64::new(b, 0.0), Complex64::new(b, top)];
    path.extend((1..=256).map(|k| Complex64::from_polar(r, start_angle + std::f64::consts::TAU * k as f64 / 256.0)));
    *path.last_mut().expect("nonempty") = Complex64::new(b, top);
    path.push(Complex64::new(b, 0.0));
    Ok(track(scene, &path, &base)?.permutation)
}

/// Composite permutation of the event loops taken left to right.
pub fn composite_permutation(events: &[BraidEvent]) -> Vec<usize> {
    let mut sorted: Vec<&BraidEvent> = events.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut perm: Vec<usize> = (0..8).collect();
    for e in sorted {
        perm = perm.iter().map(|&p| e.permutation[p]).collect();
    }
    perm
}

// ---------------------------------------------------------------------------
// relations

#[derive(Clone, Debug, Serialize)]
pub struct VkRelation {
    pub value: f64,
    pub relators: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct VkResult {
    pub events: Vec<BraidEvent>,
    pub relations: Vec<VkRelation>,
    pub presentation: Presentation,
}

/// Relations `x = Φ(x)` for every generator around every critical value,
/// followed by the product relator `α₁⋯α₈`.
pub fn vk_relations(scene: &PlaneCutScene) -> Result<VkResult> {
    let events = all_events(scene)?;
    let alph = alpha_alphabet(8);
    let values: Vec<f64> = events.iter().map(|e| e.value).collect();
    let per_event: Vec<VkRelation> = events
        .par_iter()
        .map(|e| {
            let g = artin_action(&e.loop_braid, 8)?;
            let rels = g.relators().iter().map(|w| w.cyclically_reduced().to_text()).collect();
            Ok(VkRelation { value: e.value, relators: rels })
        })
        .collect::<Result<_>>()?;
    let mut relations = Vec::new();
    let mut words: Vec<Word> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for k in assembly_order(&values) {
        for t in &per_event[k].relators {
            let w = Word::parse(&alph, t)?;
            if seen.insert(w.cyclic_canonical().to_text()) {
                words.push(w);
            }
        }
        relations.push(per_event[k].clone());
    }
    let product = Word::from_pairs(&alph, &(0..8).map(|k| (k, 1)).collect::<Vec<_>>())?;
    words.push(product);
    let presentation = Presentation::new("vk-plane-cut", alph, words)?;
    Ok(VkResult { events, relations, presentation })
}

// ---------------------------------------------------------------------------
// change of generators

/// `α` expressed in `β`: `α₃ = β₄⁻¹β₃β₄`, `α₄ = β₃β₄β₃⁻¹`, `α₅ = α₄`,
/// `α₆ = β₂β₄β₂⁻¹`, `α₇ = β₁β₄β₁⁻¹`, `α₈ = (α₁⋯α₇)⁻¹`.
pub fn alpha_in_beta(beta: &Arc<Alphabet>) -> Result<Vec<Word>> {
    let b = |k: usize| Word::generator(beta, k - 1);
    let a3 = b(3).conjugate(&b(4).inverse())?;
    let a4 = b(4).conjugate(&b(3))?;
    let a6 = b(4).conjugate(&b(2))?;
    let a7 = b(4).conjugate(&b(1))?;
    let mut out = vec![b(1), b(2), a3, a4.clone(), a4, a6, a7];
    let a8 = Word::product(beta, &out)?.inverse();
    out.push(a8);
    Ok(out)
}

/// `β` expressed in `α`.
pub fn beta_in_alpha(alpha: &Arc<Alphabet>) -> Result<Vec<Word>> {
    let a = |k: usize| Word::generator(alpha, k - 1);
    Ok(vec![a(1), a(2), a(3).conjugate(&a(4).inverse())?, a(4).conjugate(&a(3))?])
}

pub fn beta_alphabet() -> Arc<Alphabet> {
    Alphabet::new(["b1", "b2", "b3", "b4"]).expect("valid names")
}

/// Identities in `α` that the change of generators relies on, each as a
/// relator `α_k⁻¹ · expression`.
pub fn beta_preconditions(alpha: &Arc<Alphabet>) -> Result<Vec<(String, Word)>> {
    let beta = beta_alphabet();
    let back = beta_in_alpha(alpha)?;
    let mut out = Vec::new();
    for (k, w) in alpha_in_beta(&beta)?.iter().enumerate() {
        let expr = w.substitute(alpha, &back)?;
        let rel = &Word::generator(alpha, k).inverse() * &expr;
        if !rel.is_identity() {
            out.push((format!("a{}", k + 1), rel));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BetaChange {
    pub presentation: Presentation,
    /// Preconditions with their derivation status.
    pub checks: Vec<(String, String, bool)>,
}

/// Rewrites a presentation over `α₁..α₈` into `β₁..β₄`. Every relator is
/// substituted through [`alpha_in_beta`]; the round-trip relators
/// `β_k⁻¹ β_k(α(β))` are appended.
pub fn beta_change_of_generators(p: &Presentation, budget: SearchBudget) -> Result<BetaChange> {
    let alpha = p.alphabet().clone();
    if alpha.names() != alpha_alphabet(8).names() {
        return Err(Error::Invalid("beta change expects generators a1..a8".into()));
    }
    let a = |k: usize| Word::generator(&alpha, k - 1);
    let braid = &(&a(3) * &a(4)).pow(2) * &(&a(4) * &a(3)).pow(-2);
    if !is_consequence(&braid, p, budget)?.is_proved() {
        return Err(Error::Invalid("presentation does not yield (a3 a4)^2 = (a4 a3)^2".into()));
    }
    let mut checks = Vec::new();
    for (name, rel) in beta_preconditions(&alpha)? {
        let ok = is_consequence(&rel, p, budget)?.is_proved();
        checks.push((name, rel.to_text(), ok));
    }
    let beta = beta_alphabet();
    let images = alpha_in_beta(&beta)?;
    let mut rels: Vec<Word> =
        p.relators().iter().map(|w| w.substitute(&beta, &images)).collect::<Result<Vec<_>>>()?;
    let back = beta_in_alpha(&alpha)?;
    for (k, w) in back.iter().enumerate() {
        let round = w.substitute(&beta, &images)?;
        rels.push(&Word::generator(&beta, k).inverse() * &round);
    }
    let rels = rels.into_iter().map(|w| w.cyclically_reduced()).collect();
    let presentation = Presentation::new_dropping_trivial(format!("{}-beta", p.label()), beta, rels)?;
    Ok(BetaChange { presentation, checks })
}

/// Renames `β₁, β₂, β₃, β₄` to `γ₁, γ₂, γ₃, γ₀`.
pub fn rename_beta_to_gamma(p: &Presentation) -> Result<Presentation> {
    let gamma = Alphabet::new(["g0", "g1", "g2", "g3"]).expect("valid names");
    let images: Vec<Word> = [1, 2, 3, 0].iter().map(|&k| Word::generator(&gamma, k)).collect();
    let rels = p.relators().iter().map(|w| w.substitute(&gamma, &images)).collect::<Result<Vec<_>>>()?;
    Presentation::new(p.label().replace("-beta", "-gamma"), gamma, rels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artin_action_preserves_product() {
        let mut g = ArtinGenerators::new(alpha_alphabet(4));
        let before = g.product();
        for (pos, s) in [(1, 1), (2, -1), (3, 1), (1, -1), (2, 1)] {
            g.apply(pos, s).unwrap();
            assert_eq!(g.product().to_text(), before.to_text());
        }
    }

    #[test]
    fn twist_and_inverse_cancel() {
        let mut g = ArtinGenerators::new(alpha_alphabet(3));
        g.apply(1, 1).unwrap();
        g.apply(1, -1).unwrap();
        assert!(g.relators().is_empty());
        let mut g = ArtinGenerators::new(alpha_alphabet(3));
        g.apply(2, 1).unwrap();
        assert_eq!(g.images()[1].to_text(), "a2*a3*a2^-1");
        assert_eq!(g.images()[2].to_text(), "a2");
    }

    #[test]
    fn braid_permutation_and_inverse() {
        let b = BraidWord {
            crossings: vec![
                Crossing { position: 1, sign: 1, strands: (0, 1) },
                Crossing { position: 2, sign: 1, strands: (0, 2) },
            ],
        };
        assert_eq!(b.permutation(3), vec![2, 0, 1]);
        assert_eq!(b.then(&b.inverse()).permutation(3), vec![0, 1, 2]);
        assert_eq!(b.exponent_sum(), 2);
    }

    #[test]
    fn base_fiber_layout() {
        let s = PlaneCutScene::new();
        let f = fiber_unchecked(&s, Complex64::new(0.125, 0.0)).unwrap();
        let comps: Vec<Component> = f.points.iter().map(|p| p.component).collect();
        use Component::*;
        assert_eq!(comps, vec![L1, L2, L3, Q, Q, Q, Q, L0]);
        assert!(f.points[3].value.im > 0.0 && f.points[4].value.im < 0.0);
        assert!(f.points[5].value.im.abs() < 1e-9 && f.points[6].value.im.abs() < 1e-9);
        assert!(f.max_residual(&s) < 1e-9);
    }

    #[test]
    fn leading_coefficient() {
        let s = PlaneCutScene::new();
        assert_eq!(s.polynomial().degree_x(), 8);
        assert_eq!(s.quartic().leading_coeff(), &UPoly::from_i64(&[80, 0, -32, 0, 16]));
    }

    #[test]
    fn preconditions_list() {
        let alpha = alpha_alphabet(8);
        let names: Vec<String> = beta_preconditions(&alpha).unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["a3", "a4", "a5", "a6", "a7", "a8"]);
    }
}
