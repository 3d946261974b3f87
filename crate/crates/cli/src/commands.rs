use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fcpi_core::cosets::{table_from_parity, tables_isomorphic, todd_coxeter, DEFAULT_COSET_LIMIT};
use fcpi_core::equivalence::{abelianization, compare_presentations_with_hom_budget, Tier, Verdict};
use fcpi_core::exactpoly::MultiPoly;
use fcpi_core::monodromy::{
    all_events, base_fiber, beta_change_of_generators, composite_permutation, fiber, loop_plan,
    permutation_at_large_circle, rename_beta_to_gamma, track_recorded, vk_relations, BraidEvent, Component,
    EventClass, PlaneCutScene,
};
use fcpi_core::presentations::{
    catalog, covering_generator_images, covering_generator_names, covering_presentation_canonical, fc_polynomial,
    generate_rij, pi1_xn,
};
use fcpi_core::subgroup::{full_rs_presentation, subgroup_generators, RsResult};
use fcpi_core::tietze::{reduce_covering, TietzeTrace};
use fcpi_core::{Presentation, Word};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{write_artifact, write_json, Report};

/// Positive critical values `a1..a10` as printed to ten digits.
pub const REFERENCE_VALUES: [f64; 10] = [
    0.2607431304,
    0.4,
    0.4330127020,
    0.5,
    0.5156413111,
    0.5196653275,
    0.6244997998,
    0.7458971504,
    0.7574500843,
    0.8,
];

/// Expected collisions at `0, a1..a10`: components and local exponent.
fn reference_events() -> Vec<(f64, Vec<(Component, Component, i64)>)> {
    use Component::*;
    let mut v = vec![(0.0, vec![(L1, L2, 2), (Q, Q, 2)])];
    let rows: [(Component, Component, i64); 10] = [
        (Q, Q, 1),
        (Q, Q, 2),
        (L3, Q, 4),
        (L2, L3, 2),
        (L2, Q, 4),
        (Q, Q, 1),
        (Q, L0, 4),
        (L2, Q, 4),
        (Q, Q, 1),
        (L2, L0, 2),
    ];
    for (a, row) in REFERENCE_VALUES.iter().zip(rows) {
        v.push((*a, vec![row]));
    }
    v
}

fn rs_for(n: usize) -> Result<RsResult> {
    let p = pi1_xn(n)?;
    let t = table_from_parity(&p).context("parity table")?;
    Ok(full_rs_presentation(&p, &t).context("Reidemeister-Schreier")?)
}

fn texts(ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| w.to_text()).collect()
}

#[derive(Serialize)]
struct PresentationText {
    label: String,
    generators: Vec<String>,
    relators: Vec<String>,
}

fn as_text(p: &Presentation) -> PresentationText {
    PresentationText {
        label: p.label().into(),
        generators: p.alphabet().names().to_vec(),
        relators: texts(p.relators()),
    }
}

/// Loads a catalog label, or a presentation JSON file when `spec` names one.
pub fn load_presentation(spec: &str) -> Result<Presentation> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {spec}"))?;
        // a bare presentation, or a report carrying one under `data`
        let v = v.pointer("/data/presentation").or_else(|| v.get("presentation")).unwrap_or(&v);
        return Ok(Presentation::from_json(v)?);
    }
    Ok(catalog(spec)?)
}

fn verdict_summary(v: &Verdict) -> Value {
    let side = |checks: &[fcpi_core::equivalence::RelatorCheck]| -> Vec<Value> {
        checks
            .iter()
            .map(|c| {
                json!({
                    "relator": c.relator.to_text(),
                    "result": c.result.status,
                    "counterexample": c.counterexample,
                })
            })
            .collect()
    };
    let (l, r) = v.proved_counts();
    json!({
        "tier": v.tier,
        "abelianization": [v.abelianization.0.to_string(), v.abelianization.1.to_string()],
        "fingerprints": [v.fingerprints.0.entries, v.fingerprints.1.entries],
        "proved": [l, r],
        "left_in_right": side(&v.left_in_right),
        "right_in_left": side(&v.right_in_left),
    })
}

fn verdict_checks(report: &mut Report, v: &Verdict, min: Tier) {
    let falsified = v.left_in_right.iter().chain(&v.right_in_left).filter(|c| c.counterexample.is_some()).count();
    report.check(
        "abelianizations agree",
        v.abelianization.0 == v.abelianization.1,
        format!("{} vs {}", v.abelianization.0, v.abelianization.1),
    );
    report.check("fingerprints agree", v.fingerprints.0 == v.fingerprints.1, "standard quotient panel");
    report.check("no relator falsified", falsified == 0, format!("{falsified} falsified"));
    let (l, r) = v.proved_counts();
    report.check(
        "verdict tier",
        v.tier >= min,
        format!(
            "{} (proved {l}/{} and {r}/{})",
            v.tier,
            v.left_in_right.len(),
            v.right_in_left.len()
        ),
    );
}

// ---------------------------------------------------------------------------

pub fn present(cfg: &RunConfig) -> Result<Report> {
    let label = match (&cfg.label, cfg.n) {
        (Some(l), _) => l.clone(),
        (None, Some(n)) => format!("pi1-x{n}"),
        (None, None) => bail!("present needs --label or --n"),
    };
    let p = catalog(&label)?;
    let mut r = Report::new(cfg);
    r.check(
        "catalog entry",
        true,
        format!("{}: {} generators, {} relators", p.label(), p.generator_count(), p.relator_count()),
    );
    r.set("presentation", as_text(&p));
    r.set("abelianization", abelianization(&p).to_string());
    Ok(r)
}

/// `2(1 + Σx²) − (1 + Σx)²` squared minus `64 x1 x2 x3`.
fn fc3_closed_form(vars: &[String]) -> MultiPoly {
    let v = vars.to_vec();
    let x = |k: usize| MultiPoly::var(v.clone(), k);
    let one = MultiPoly::constant(v.clone(), 1.into());
    let sq = (0..3).fold(one.clone(), |acc, k| acc.add(&x(k).pow(2)));
    let sum = (0..3).fold(one, |acc, k| acc.add(&x(k)));
    sq.scale(&2.into())
        .sub(&sum.pow(2))
        .pow(2)
        .sub(&x(0).mul(&x(1)).mul(&x(2)).scale(&64.into()))
}

pub fn fc_poly(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.n.ok_or_else(|| anyhow!("fc-poly needs --n"))?;
    let f = fc_polynomial(n)?;
    let mut r = Report::new(cfg);
    let d = f.total_degree();
    r.check("total degree", d == Some(1 << (n - 1)), format!("{}, expected {}", d.map_or("none".into(), |d| d.to_string()), 1u64 << (n - 1)));
    if n == 3 {
        let zero = f.sub(&fc3_closed_form(f.vars())).is_zero();
        r.check("closed form", zero, if zero { "difference is zero" } else { "difference is nonzero" });
    }
    r.set("n", n);
    r.set("degree", d);
    r.set("terms", f.terms().count());
    r.set("polynomial", f.to_text());
    Ok(r)
}

/// Unordered pairs of disjoint nonempty subsets of `{1..n}` with at most
/// `n − 1` elements in total.
pub fn rij_count_formula(n: usize) -> u128 {
    let binom = |n: usize, k: usize| -> u128 { (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1)) };
    let mut ordered = 0;
    for a in 1..n {
        for b in 1..n - a {
            ordered += binom(n, a) * binom(n - a, b);
        }
    }
    ordered / 2
}

pub fn rij_count(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.n.ok_or_else(|| anyhow!("rij-count needs --n"))?;
    let family = generate_rij(n)?;
    let mut r = Report::new(cfg);
    let expected = rij_count_formula(n);
    r.check("count", family.len() as u128 == expected, format!("{}, subset count {expected}", family.len()));
    r.set("n", n);
    r.set("count", family.len());
    let words: Vec<Value> = family.iter().map(|(p, w)| json!({"i": p.i, "j": p.j, "word": w.to_text()})).collect();
    r.set("relators", words);
    Ok(r)
}

pub fn cover_derive(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.n.ok_or_else(|| anyhow!("cover-derive needs --n"))?;
    if n != 2 && n != 3 {
        bail!("cover-derive supports n = 2 and 3, got {n}");
    }
    let mut r = Report::new(cfg);
    let p = pi1_xn(n)?;
    let parity = table_from_parity(&p).context("stage parity-table")?;
    let images = covering_generator_images(n)?
        .into_iter()
        .map(|(_, w)| p.word(&w.to_text()))
        .collect::<fcpi_core::Result<Vec<_>>>()?;
    let tc = todd_coxeter(&p, &images, DEFAULT_COSET_LIMIT).context("stage todd-coxeter")?;
    r.check("todd-coxeter index", tc.coset_count() == 1 << n, format!("{} cosets", tc.coset_count()));
    r.check("todd-coxeter matches parity", tables_isomorphic(&tc, &parity).is_some(), "table isomorphism");

    let rs = full_rs_presentation(&p, &parity).context("stage reidemeister-schreier")?;
    let gens = subgroup_generators(&rs.data);
    let want_gens = (1 << n) * n + 1;
    r.check("subgroup generators", gens.len() == want_gens, format!("{} (Schreier rank {want_gens})", gens.len()));
    let want_cells = (1 << n) * p.relator_count();
    r.check("rewritten relations", rs.cells.len() == want_cells, format!("{} (index x relators {want_cells})", rs.cells.len()));
    r.check("substitution soundness", rs.all_sound(), format!("{} of {} sound", rs.cells.iter().filter(|c| c.sound).count(), rs.cells.len()));

    let red = reduce_covering(&rs).context("stage tietze")?;
    let mut got = red.output.alphabet().names().to_vec();
    let mut want = covering_generator_names(n)?;
    got.sort();
    want.sort();
    r.check("reduced generators", got == want, format!("{} generators", got.len()));

    let canonical = covering_presentation_canonical(n)?;
    let v = compare_presentations_with_hom_budget(&red.output, &canonical, cfg.budget(), cfg.hom_budget)
        .context("stage equivalence")?;
    verdict_checks(&mut r, &v, Tier::Evidence);

    r.set("n", n);
    r.set("transversal", texts(&rs.data.transversal()));
    let gen_rows: Vec<Value> = gens
        .iter()
        .enumerate()
        .map(|(i, (w, _, _))| json!({"name": rs.data.display_name(i), "word": w.to_text()}))
        .collect();
    r.set("subgroup_generators", gen_rows);
    let cells: Vec<Value> = rs
        .cells
        .iter()
        .map(|c| json!({"t": c.transversal.to_text(), "relator": c.relator_index, "rewritten": c.rewritten.to_text(), "sound": c.sound}))
        .collect();
    r.set("cells", cells);
    r.set("rs_presentation", &rs.presentation);
    r.set("reduced", as_text(&red.output));
    r.set("presentation", &red.output);
    r.set("eliminations", &red.ledger);
    r.set("trace", red.trace.to_json());
    r.set("verdict", verdict_summary(&v));
    Ok(r)
}

// ---------------------------------------------------------------------------
// monodromy

fn scene(cfg: &RunConfig) -> Result<PlaneCutScene> {
    Ok(PlaneCutScene::new().with_root_tolerance(cfg.root_tol)?)
}

fn criticals_into(cfg: &RunConfig, s: &PlaneCutScene, r: &mut Report) -> Result<Value> {
    let roots = s.critical_values()?;
    let values: Vec<f64> = roots.iter().map(|x| x.value).collect();
    r.check("critical value count", values.len() == 21, format!("{}", values.len()));
    let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let mut worst = 0.0f64;
    let mut matched = positive.len() == REFERENCE_VALUES.len();
    if matched {
        for (a, b) in positive.iter().zip(REFERENCE_VALUES) {
            worst = worst.max((a - b).abs());
        }
        matched = worst <= cfg.match_tol;
    }
    r.check("reference values", matched, format!("max deviation {worst:.3e}, tolerance {:e}", cfg.match_tol));
    let symmetric = values.iter().all(|v| values.iter().any(|u| (u + v).abs() <= cfg.match_tol));
    r.check("symmetry", symmetric, "values closed under negation");
    let rows: Vec<Value> = roots
        .iter()
        .map(|x| json!({"value": x.value, "lo": x.lo.to_string(), "hi": x.hi.to_string(), "exact": x.is_exact()}))
        .collect();
    Ok(json!({"root_tol": cfg.root_tol, "values": rows}))
}

pub fn monodromy_criticals(cfg: &RunConfig) -> Result<Report> {
    let s = scene(cfg)?;
    let mut r = Report::new(cfg);
    let data = criticals_into(cfg, &s, &mut r)?;
    if let Some(dir) = &cfg.out_dir {
        write_json(dir, "criticals.json", &data)?;
    }
    r.set("criticals", data);
    Ok(r)
}

fn event_json(e: &BraidEvent) -> Value {
    let collisions: Vec<Value> = e
        .collisions
        .iter()
        .map(|c| {
            json!({
                "strands": c.strands,
                "tracked_strands": c.tracked_strands,
                "components": [c.components.0, c.components.1],
                "exponent": c.exponent,
                "class": c.class,
            })
        })
        .collect();
    json!({
        "value": e.value,
        "collisions": collisions,
        "local_braid": e.local_braid.to_text(),
        "loop_braid": e.loop_braid.to_text(),
        "permutation": e.permutation,
    })
}

fn residual_checks(cfg: &RunConfig, s: &PlaneCutScene, r: &mut Report) -> Result<()> {
    let mut worst = base_fiber(s)?.max_residual(s);
    for k in 0..s.critical_values()?.len() {
        let plan = loop_plan(s, k)?;
        let f = fiber(s, Complex64::new(plan.start, 0.0))?;
        worst = worst.max(f.max_residual(s));
    }
    r.check("fiber residuals", worst <= cfg.residual_tol, format!("max {worst:.3e}, tolerance {:e}", cfg.residual_tol));
    Ok(())
}

fn classification_checks(events: &[BraidEvent], r: &mut Report) {
    for (v, want) in reference_events() {
        for sign in [1.0, -1.0] {
            if v == 0.0 && sign < 0.0 {
                continue;
            }
            let at = sign * v;
            let got = events.iter().find(|e| (e.value - at).abs() < 1e-6);
            // y -> -y exchanges L1 and L2 and maps the pencil at λ to -λ
            let mirror = |c: Component| match (sign < 0.0, c) {
                (true, Component::L1) => Component::L2,
                (true, Component::L2) => Component::L1,
                _ => c,
            };
            let ok = got.is_some_and(|e| {
                let g: Vec<(Component, Component, i64)> = e
                    .collisions
                    .iter()
                    .map(|c| (mirror(c.components.0), mirror(c.components.1), c.exponent))
                    .collect();
                g == want
            });
            let detail = match got {
                Some(e) => e
                    .collisions
                    .iter()
                    .map(|c| format!("{:?}-{:?} {}^{}", c.components.0, c.components.1, class_name(c.class), c.exponent))
                    .collect::<Vec<_>>()
                    .join(", "),
                None => "no event".into(),
            };
            r.check(format!("event at {at:+.10}"), ok, detail);
        }
    }
}

fn class_name(c: EventClass) -> &'static str {
    match c {
        EventClass::Branch => "branch sigma",
        EventClass::Node => "node sigma",
        EventClass::LineCrossing => "line-crossing sigma",
        EventClass::Tangency => "tangency sigma",
    }
}

fn trajectory_csv(s: &PlaneCutScene, index: usize) -> Result<String> {
    let plan = loop_plan(s, index)?;
    let mut path = vec![Complex64::new(s.base(), 0.0)];
    path.extend(&plan.approach);
    path.extend(&plan.circle);
    let (_, samples) = track_recorded(s, &path, &base_fiber(s)?)?;
    let mut out = String::from("step,lambda_re,lambda_im");
    for k in 1..=8 {
        write!(out, ",x{k}_re,x{k}_im").unwrap();
    }
    out.push('\n');
    for (i, (l, pts)) in samples.iter().enumerate() {
        write!(out, "{i},{:.15e},{:.15e}", l.re, l.im).unwrap();
        for z in pts {
            write!(out, ",{:.15e},{:.15e}", z.re, z.im).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn monodromy_relations(cfg: &RunConfig, trajectory: Option<usize>) -> Result<Report> {
    let s = scene(cfg)?;
    let mut r = Report::new(cfg);
    residual_checks(cfg, &s, &mut r)?;
    let vk = vk_relations(&s).context("stage van-kampen")?;
    let total = composite_permutation(&vk.events);
    let large = permutation_at_large_circle(&s)?;
    r.check("total monodromy", total == large, format!("{total:?}"));
    let ab = abelianization(&vk.presentation);
    r.check("abelianization", ab.free_rank == 4 && ab.torsion.is_empty(), ab.to_string());
    let events: Vec<Value> = vk.events.iter().map(event_json).collect();
    if let Some(dir) = &cfg.out_dir {
        write_json(dir, "events.json", &events)?;
        write_json(dir, "vk-presentation.json", &vk.presentation)?;
        if let Some(k) = trajectory {
            write_artifact(dir, &format!("trajectory-{k}.csv"), &trajectory_csv(&s, k)?)?;
        }
    }
    r.set("events", events);
    r.set("relations", &vk.relations);
    r.set("presentation", &vk.presentation);
    Ok(r)
}

pub fn monodromy_verify(cfg: &RunConfig) -> Result<Report> {
    let s = scene(cfg)?;
    let mut r = Report::new(cfg);
    let crit = criticals_into(cfg, &s, &mut r)?;
    residual_checks(cfg, &s, &mut r)?;
    let events = all_events(&s).context("stage events")?;
    classification_checks(&events, &mut r);
    let vk = vk_relations(&s).context("stage van-kampen")?;
    let beta = beta_change_of_generators(&vk.presentation, cfg.budget()).context("stage beta")?;
    let gamma = rename_beta_to_gamma(&beta.presentation)?;
    let target = pi1_xn(3)?;
    let v = compare_presentations_with_hom_budget(&gamma, &target, cfg.budget(), cfg.hom_budget)
        .context("stage equivalence")?;
    verdict_checks(&mut r, &v, Tier::Evidence);
    let pre: Vec<Value> =
        beta.checks.iter().map(|(n, w, ok)| json!({"name": n, "relator": w, "proved": ok})).collect();
    if let Some(dir) = &cfg.out_dir {
        write_json(dir, "criticals.json", &crit)?;
        write_json(dir, "events.json", &vk.events.iter().map(event_json).collect::<Vec<_>>())?;
        write_json(dir, "vk-presentation.json", &vk.presentation)?;
    }
    r.set("criticals", crit);
    r.set("beta_preconditions", pre);
    r.set("derived", as_text(&gamma));
    r.set("verdict", verdict_summary(&v));
    Ok(r)
}

pub fn equiv(cfg: &RunConfig, left: &str, right: &str) -> Result<Report> {
    let a = load_presentation(left)?;
    let b = load_presentation(right)?;
    let mut r = Report::new(cfg);
    let v = compare_presentations_with_hom_budget(&a, &b, cfg.budget(), cfg.hom_budget)?;
    verdict_checks(&mut r, &v, Tier::Evidence);
    r.set("left", as_text(&a));
    r.set("right", as_text(&b));
    r.set("verdict", verdict_summary(&v));
    Ok(r)
}

/// Replays the Tietze trace of a saved `cover-derive` report against a fresh
/// RS presentation and compares with the saved result.
pub fn replay(cfg: &RunConfig, path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let saved: Value = serde_json::from_str(&text)?;
    let data = saved.get("data").ok_or_else(|| anyhow!("not a report: missing `data`"))?;
    let n = data.get("n").and_then(Value::as_u64).ok_or_else(|| anyhow!("report has no `n`"))? as usize;
    let trace = TietzeTrace::from_json(data.get("trace").ok_or_else(|| anyhow!("report has no `trace`"))?)?;
    let expected = Presentation::from_json(data.get("presentation").ok_or_else(|| anyhow!("report has no `presentation`"))?)?;
    let rs = rs_for(n)?;
    let out = trace.replay(&rs.presentation)?;
    let mut r = Report::new(cfg);
    let same = texts(out.relators()) == texts(expected.relators())
        && out.alphabet().names() == expected.alphabet().names();
    r.check("replayed presentation", same, format!("{} steps", trace.steps.len()));
    r.set("n", n);
    r.set("presentation", as_text(&out));
    Ok(r)
}

pub fn verify_all(cfg: &RunConfig) -> Result<Report> {
    let sub = |command: &str, n: Option<usize>, label: Option<&str>| {
        let mut c = cfg.clone();
        c.command = command.into();
        c.n = n;
        c.label = label.map(String::from);
        c.out_dir = None;
        c
    };
    let runs: Vec<(RunConfig, fn(&RunConfig) -> Result<Report>)> = vec![
        (sub("present", None, Some("pi1-x3")), present),
        (sub("present", None, Some("cover-x3-canonical")), present),
        (sub("rij-count", Some(3), None), rij_count),
        (sub("rij-count", Some(4), None), rij_count),
        (sub("fc-poly", Some(1), None), fc_poly),
        (sub("fc-poly", Some(2), None), fc_poly),
        (sub("fc-poly", Some(3), None), fc_poly),
        (sub("fc-poly", Some(4), None), fc_poly),
        (sub("fc-poly", Some(5), None), fc_poly),
        (sub("cover-derive", Some(2), None), cover_derive),
        (sub("cover-derive", Some(3), None), cover_derive),
        (sub("monodromy-verify", None, None), monodromy_verify),
    ];
    use rayon::prelude::*;
    let reports: Vec<Result<Report>> = runs.par_iter().map(|(c, f)| f(c)).collect();
    let mut r = Report::new(cfg);
    for ((c, _), rep) in runs.iter().zip(reports) {
        let mut rep = rep.with_context(|| format!("{} failed", c.command))?;
        let suffix = match (&c.n, &c.label) {
            (_, Some(l)) => format!(" {l}"),
            (Some(n), None) => format!(" n={n}"),
            _ => String::new(),
        };
        rep.command = format!("{}{suffix}", rep.command);
        r.absorb(rep);
    }
    Ok(r)
}
