use fcpi_core::equivalence::{is_consequence, SearchBudget};
use fcpi_core::monodromy::*;
use fcpi_core::presentations::pi1_xn;
use fcpi_core::{Presentation, Word};
use num_complex::Complex64;

fn scene() -> PlaneCutScene {
    PlaneCutScene::new()
}

fn index_of(s: &PlaneCutScene, value: f64) -> usize {
    s.critical_values().unwrap().iter().position(|r| (r.value - value).abs() < 1e-6).expect("critical value present")
}

fn q_at(x: f64, y: f64) -> f64 {
    (4.0 * x * x + 4.0 * y * y - 32.0 * x + 25.0).powi(2) - 64.0 * (y * y - x * x) * (x - 1.0) * (x - 4.0)
}

/// Each line restricts the quartic to a perfect square; the double roots
/// are the tangency points, and the pencil parameter there is `y/(x+1)`.
fn tangent_line_oracle() -> Vec<f64> {
    for t in [-3.0, -1.0, 0.0, 0.5, 2.0, 7.0] {
        assert_eq!(q_at(1.0, t), (4.0 * t * t - 3.0).powi(2));
        assert_eq!(q_at(t, t), (8.0 * t * t - 32.0 * t + 25.0).powi(2));
        assert_eq!(q_at(t, -t), (8.0 * t * t - 32.0 * t + 25.0).powi(2));
        assert_eq!(q_at(4.0, t), (4.0 * t * t - 39.0).powi(2));
    }
    let mut out = Vec::new();
    // L3: x = 1, 4y² = 3
    let y = (3.0f64 / 4.0).sqrt();
    out.extend([y / 2.0, -y / 2.0]);
    // L2: y = x and L1: y = −x, 8x² − 32x + 25 = 0
    for x in [(32.0 - 224.0f64.sqrt()) / 16.0, (32.0 + 224.0f64.sqrt()) / 16.0] {
        out.extend([x / (x + 1.0), -x / (x + 1.0)]);
    }
    // L0: x = 4, 4y² = 39
    let y = (39.0f64 / 4.0).sqrt();
    out.extend([y / 5.0, -y / 5.0]);
    out
}

#[test]
fn twenty_one_symmetric_critical_values() {
    let s = scene();
    let c: Vec<f64> = s.critical_values().unwrap().iter().map(|r| r.value).collect();
    assert_eq!(c.len(), 21);
    assert!(c.windows(2).all(|w| w[0] < w[1]));
    for v in &c {
        assert!(c.iter().any(|u| (u + v).abs() < 1e-12));
    }
    assert!(c.iter().any(|v| v.abs() < 1e-14));
    for exact in [0.4, 0.5, 0.8] {
        assert!(c.iter().any(|v| (v - exact).abs() < 1e-12), "{exact}");
    }
    assert!(c.iter().any(|v| (v - 3f64.sqrt() / 4.0).abs() < 1e-8));
    // the discriminant has no non-real roots
    assert_eq!(discriminant_core(&s).degree(), Some(21));
}

#[test]
fn tangent_values_match_oracle() {
    let s = scene();
    let c: Vec<f64> = s.critical_values().unwrap().iter().map(|r| r.value).collect();
    for v in tangent_line_oracle() {
        assert!(c.iter().any(|u| (u - v).abs() < 1e-10), "tangent value {v} missing");
    }
    let s14 = 14f64.sqrt();
    let a5 = (8.0 - s14) / (12.0 - s14);
    let a8 = (8.0 + s14) / (12.0 + s14);
    assert!(c.iter().any(|u| (u - a5).abs() < 1e-10));
    assert!(c.iter().any(|u| (u - a8).abs() < 1e-10));
    assert!(c.iter().any(|u| (u - 39f64.sqrt() / 10.0).abs() < 1e-10));
}

#[test]
fn base_fiber_points() {
    let s = scene();
    let f = base_fiber(&s).unwrap();
    let expect = [(Component::L1, -1.0 / 9.0), (Component::L2, 1.0 / 7.0), (Component::L3, 1.0)];
    for (k, (comp, x)) in expect.iter().enumerate() {
        assert_eq!(f.points[k].component, *comp);
        assert!((f.points[k].value - Complex64::new(*x, 0.0)).norm() < 1e-15);
    }
    assert_eq!(f.points[7].component, Component::L0);
    assert_eq!(f.points[7].value, Complex64::new(4.0, 0.0));
    assert!(f.points[3].value.im > 0.0 && f.points[4].value.im < 0.0);
    assert!(f.points[5].value.re < f.points[6].value.re);
    assert!(f.points[2].value.re < f.points[3].value.re && f.points[6].value.re < 4.0);
    assert!(f.max_residual(&s) < 1e-10);
}

#[test]
fn quartic_points_near_zero() {
    let s = scene();
    let f = fiber_unchecked(&s, Complex64::new(1e-10, 0.0)).unwrap();
    let q: Vec<Complex64> = f.points.iter().filter(|p| p.component == Component::Q).map(|p| p.value).collect();
    let near = |z: Complex64| q.iter().filter(|w| (**w - z).norm() < 1e-4).count();
    assert_eq!(near(Complex64::new(2.5, 0.0)), 2);
    assert_eq!(near(Complex64::new(1.1, 0.2)), 1);
    assert_eq!(near(Complex64::new(1.1, -0.2)), 1);
}

#[test]
fn near_critical_fiber_rejected() {
    let s = scene();
    assert!(matches!(fiber(&s, Complex64::new(0.4 + 1e-7, 0.0)), Err(fcpi_core::Error::NearCritical { .. })));
}

#[test]
fn constant_path_is_trivial() {
    let s = scene();
    let f = base_fiber(&s).unwrap();
    let t = track(&s, &[f.lambda, f.lambda], &f).unwrap();
    assert!(t.braid.is_empty());
    assert_eq!(t.permutation, (0..8).collect::<Vec<_>>());
}

#[test]
fn branch_loops_exchange_strands() {
    let s = scene();
    let e1 = classify_event(&s, index_of(&s, 0.2607431304)).unwrap();
    assert_eq!(e1.class(), Some(EventClass::Branch));
    assert_eq!(e1.strands(), vec![(4, 5)]);
    assert_eq!(e1.local_braid.to_text(), "s4^1");
    let mut moved: Vec<usize> = (0..8).filter(|&k| e1.permutation[k] != k).collect();
    assert_eq!(moved, vec![3, 4]);
    let e6 = classify_event(&s, index_of(&s, 0.5196653275)).unwrap();
    assert_eq!(e6.class(), Some(EventClass::Branch));
    assert_eq!(e6.strands(), vec![(4, 6)]);
    moved = (0..8).filter(|&k| e6.permutation[k] != k).collect();
    assert_eq!(moved.len(), 2);
}

#[test]
fn node_and_tangency_events() {
    let s = scene();
    let e2 = classify_event(&s, index_of(&s, 0.4)).unwrap();
    assert_eq!((e2.class(), e2.strands()), (Some(EventClass::Node), vec![(5, 6)]));
    assert_eq!(e2.local_braid.exponent_sum(), 2);
    let e3 = classify_event(&s, index_of(&s, 0.4330127019)).unwrap();
    assert_eq!((e3.class(), e3.strands()), (Some(EventClass::Tangency), vec![(3, 4)]));
    assert_eq!(e3.collisions[0].components, (Component::L3, Component::Q));
    let e10 = classify_event(&s, index_of(&s, 0.8)).unwrap();
    assert_eq!(e10.class(), Some(EventClass::LineCrossing));
    assert_eq!(e10.collisions[0].components, (Component::L2, Component::L0));
}

#[test]
fn events_symmetric_and_total_monodromy_trivial() {
    let s = scene();
    let ev = all_events(&s).unwrap();
    assert_eq!(ev.len(), 21);
    for e in &ev {
        let mirror = ev.iter().find(|f| (f.value + e.value).abs() < 1e-9).unwrap();
        assert_eq!(e.class(), mirror.class());
        assert_eq!(e.local_braid.exponent_sum(), e.collisions.iter().map(|c| c.exponent).sum::<i64>());
        assert_eq!(e.coincidences, e.collisions.len());
    }
    let zero = ev.iter().find(|e| e.value.abs() < 1e-12).unwrap();
    assert_eq!(zero.strands(), vec![(1, 2), (6, 7)]);
    let identity: Vec<usize> = (0..8).collect();
    assert_eq!(composite_permutation(&ev), identity);
    assert_eq!(permutation_at_large_circle(&s).unwrap(), identity);
}

/// Relations up to `limit` on the positive side, with `a5` replaced by `a4`.
fn merged_relations(vk: &VkResult, limit: f64) -> (Presentation, Vec<Word>) {
    let alph = vk.presentation.alphabet().clone();
    let mut images: Vec<Word> = (0..8).map(|k| Word::generator(&alph, k)).collect();
    images[4] = Word::generator(&alph, 3);
    let mut all = Vec::new();
    let mut last = Vec::new();
    let mut rels: Vec<&VkRelation> = vk.relations.iter().filter(|r| r.value >= 0.0 && r.value <= limit).collect();
    rels.sort_by(|a, b| a.value.total_cmp(&b.value));
    for r in rels {
        last.clear();
        for t in &r.relators {
            let w = Word::parse(&alph, t).unwrap().substitute(&alph, &images).unwrap();
            if !w.is_identity() {
                all.push(w.clone());
                last.push(w);
            }
        }
    }
    (Presentation::new("partial", alph, all).unwrap(), last)
}

#[test]
fn local_relations_agree_with_hand_derivation() {
    let s = scene();
    let vk = vk_relations(&s).unwrap();
    let alph = vk.presentation.alphabet().clone();
    let budget = SearchBudget::default();
    let a1 = vk.relations.iter().find(|r| (r.value - 0.2607431304).abs() < 1e-8).unwrap();
    assert!(a1.relators.iter().any(|t| t == "a5*a4^-1" || t == "a4*a5^-1"));
    for (limit, text) in [(0.41, "a4*a6*a4^-1*a6^-1"), (0.44, "a3*a4*a3*a4*a3^-1*a4^-1*a3^-1*a4^-1")] {
        let (p, last) = merged_relations(&vk, limit);
        let w = Word::parse(&alph, text).unwrap();
        assert!(is_consequence(&w, &p, budget).unwrap().is_proved(), "{text}");
        let hand = Presentation::new("hand", alph.clone(), vec![w]).unwrap();
        for r in last {
            assert!(is_consequence(&r, &hand, budget).unwrap().is_proved(), "{} from {text}", r.to_text());
        }
    }
}

#[test]
fn product_relator_last() {
    let vk = vk_relations(&scene()).unwrap();
    let last = vk.presentation.relators().last().unwrap();
    assert_eq!(last.to_text(), "a1*a2*a3*a4*a5*a6*a7*a8");
    assert_eq!(vk.relations.len(), 21);
}

#[test]
fn beta_change_inverts_on_braid_pair() {
    let alpha = alpha_alphabet(8);
    let beta_words = beta_in_alpha(&alpha).unwrap();
    let a = |k: usize| Word::generator(&alpha, k - 1);
    let braid = &(&a(3) * &a(4)).pow(2) * &(&a(4) * &a(3)).pow(-2);
    let p = Presentation::new("braid", alpha.clone(), vec![braid]).unwrap();
    let b3b4 = &beta_words[2] * &beta_words[3];
    let diff = &b3b4 * &(&a(3) * &a(4)).inverse();
    assert!(is_consequence(&diff, &p, SearchBudget::default()).unwrap().is_proved());
}

fn canonical_either_way(w: &Word) -> String {
    let a = w.cyclic_canonical().to_text();
    let b = w.inverse().cyclic_canonical().to_text();
    a.min(b)
}

#[test]
fn target_relators_under_gamma_renaming() {
    let beta = beta_alphabet();
    let b = |k: usize| Word::generator(&beta, k - 1);
    let mut rels = Vec::new();
    for i in 1..=3 {
        for j in i + 1..=3 {
            rels.push(Word::commutator(&b(i), &b(j)).unwrap());
            rels.push(Word::commutator(&b(4).conjugate(&b(i)).unwrap(), &b(4).conjugate(&b(j)).unwrap()).unwrap());
        }
    }
    for k in 1..=3 {
        rels.push(&(&b(4) * &b(k)).pow(2) * &(&b(k) * &b(4)).pow(-2));
    }
    let p = Presentation::new("target-beta", beta, rels).unwrap();
    let g = rename_beta_to_gamma(&p).unwrap();
    let target = pi1_xn(3).unwrap().transfer(g.alphabet()).unwrap();
    let mut x: Vec<String> = g.relators().iter().map(canonical_either_way).collect();
    let mut y: Vec<String> = target.relators().iter().map(canonical_either_way).collect();
    x.sort();
    y.sort();
    assert_eq!(x, y);
}

#[test]
fn gamma_alphabet_names() {
    let p = Presentation::free("b", beta_alphabet());
    let g = rename_beta_to_gamma(&p).unwrap();
    let names: Vec<&str> = g.alphabet().names().iter().map(|s| s.as_str()).collect();
    assert_eq!(names, ["g0", "g1", "g2", "g3"]);
}
