#![allow(dead_code)]

use std::sync::Arc;

use fcpi_core::cosets::todd_coxeter;
use fcpi_core::monodromy::{alpha_alphabet, base_fiber, track, ArtinGenerators, PlaneCutScene};
use fcpi_core::{Alphabet, Presentation, Word};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn letters(gens: usize, max_len: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0..gens, prop_oneof![Just(-1i64), Just(1), -3i64..=3]), 0..=max_len)
}

fn word(alph: &Arc<Alphabet>, pairs: &[(usize, i64)]) -> Word {
    Word::from_pairs(alph, pairs).expect("indices in range")
}

/// Group laws in the free group on three letters.
pub fn word_laws(cases: u32) -> Result<(), String> {
    let alph = Alphabet::new(["a", "b", "c"]).unwrap();
    let e = Word::identity(&alph);
    runner(cases)
        .run(&(letters(3, 12), letters(3, 12), letters(3, 12)), |(x, y, z)| {
            let (a, b, c) = (word(&alph, &x), word(&alph, &y), word(&alph, &z));
            prop_assert_eq!((&(&a * &b) * &c).to_text(), (&a * &(&b * &c)).to_text());
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert_eq!((&a * &e).to_text(), a.to_text());
            prop_assert_eq!((&a * &b).inverse().to_text(), (&b.inverse() * &a.inverse()).to_text());
            prop_assert_eq!(Word::parse(&alph, &a.to_text()).unwrap().to_text(), a.to_text());
            let sums: Vec<i64> = a.exponent_sums().iter().zip(b.exponent_sums()).map(|(u, v)| u + v).collect();
            prop_assert_eq!((&a * &b).exponent_sums(), sums);
            let conj = a.conjugate(&b).unwrap();
            prop_assert_eq!(conj.cyclic_canonical().to_text(), a.cyclic_canonical().to_text());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `⟨a | aⁿ⟩` with trivial subgroup has exactly `n` cosets.
pub fn cyclic_coset_counts(max_n: i64) -> Result<(), String> {
    for n in 1..=max_n {
        let alph = Alphabet::new(["a"]).unwrap();
        let p = Presentation::new("cyclic", alph.clone(), vec![word(&alph, &[(0, n)])]).unwrap();
        let t = todd_coxeter(&p, &[], 1000).map_err(|e| e.to_string())?;
        if t.coset_count() != n as usize {
            return Err(format!("<a | a^{n}> gave {} cosets", t.coset_count()));
        }
    }
    Ok(())
}

/// The Artin action fixes `x₁⋯x₈`, and a braid followed by its inverse acts
/// trivially.
pub fn artin_invariance(cases: u32) -> Result<(), String> {
    let strand = prop::collection::vec((1usize..8, prop_oneof![Just(1i8), Just(-1i8)]), 0..=20);
    runner(cases)
        .run(&strand, |twists| {
            let mut g = ArtinGenerators::new(alpha_alphabet(8));
            let product = g.product().to_text();
            for &(pos, s) in &twists {
                g.apply(pos, s).unwrap();
                prop_assert_eq!(g.product().to_text(), product.clone());
            }
            for &(pos, s) in twists.iter().rev() {
                g.apply(pos, -s).unwrap();
            }
            prop_assert!(g.relators().is_empty());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Random polylines in the upper half-plane, entered vertically from the base
/// and retraced back. The continuity ratio stays above 3 and the retrace
/// undoes the braid.
pub fn tracking_continuity(cases: u32) -> Result<(), String> {
    let scene = PlaneCutScene::new();
    let base = base_fiber(&scene).map_err(|e| e.to_string())?;
    let point = (-0.9f64..0.9, 0.02f64..0.6);
    runner(cases)
        .run(&prop::collection::vec(point, 1..4), |pts| {
            let b = scene.base();
            let mut path = vec![Complex64::new(b, 0.0), Complex64::new(b, pts[0].1)];
            path.extend(pts.iter().map(|&(re, im)| Complex64::new(re, im)));
            let mut back = path.clone();
            back.reverse();
            path.extend(back.into_iter().skip(1));
            let t = track(&scene, &path, &base).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(t.worst_ratio > 3.0, "ratio {}", t.worst_ratio);
            prop_assert_eq!(t.permutation.clone(), (0..8).collect::<Vec<_>>());
            let mut g = ArtinGenerators::new(alpha_alphabet(8));
            g.apply_word(&t.braid).unwrap();
            prop_assert!(g.relators().is_empty());
            prop_assert!(t.end.max_residual(&scene) < 1e-8);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
