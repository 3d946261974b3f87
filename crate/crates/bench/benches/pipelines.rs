use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fcpi_core::cosets::{table_from_parity, todd_coxeter, DEFAULT_COSET_LIMIT};
use fcpi_core::equivalence::{abelianization, quotient_panel};
use fcpi_core::monodromy::{classify_event, vk_relations, PlaneCutScene};
use fcpi_core::presentations::{covering_generator_images, fc_polynomial, pi1_xn};
use fcpi_core::subgroup::full_rs_presentation;
use fcpi_core::tietze::reduce_covering;
use fcpi_core::{Alphabet, Word};

fn words(c: &mut Criterion) {
    let alph = Alphabet::new(["a", "b", "c"]).unwrap();
    let x = Word::parse(&alph, "a*b^2*c^-1*a^-1*b*c*a^3*b^-1").unwrap();
    let y = Word::parse(&alph, "b*a^-3*c^-1*b^-1*a*c*b^-2*a^-1").unwrap();
    c.bench_function("word/multiply-cancel", |b| b.iter(|| black_box(&x) * black_box(&y)));
    c.bench_function("word/cyclic-canonical", |b| b.iter(|| black_box(&x).cyclic_canonical()));
}

fn groups(c: &mut Criterion) {
    let p = pi1_xn(3).unwrap();
    let images: Vec<Word> = covering_generator_images(3)
        .unwrap()
        .into_iter()
        .map(|(_, w)| p.word(&w.to_text()).unwrap())
        .collect();
    c.bench_function("cosets/todd-coxeter-x3", |b| {
        b.iter(|| todd_coxeter(&p, black_box(&images), DEFAULT_COSET_LIMIT).unwrap())
    });
    let table = table_from_parity(&p).unwrap();
    c.bench_function("subgroup/rs-x3", |b| b.iter(|| full_rs_presentation(&p, black_box(&table)).unwrap()));
    let rs = full_rs_presentation(&p, &table).unwrap();
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("tietze/reduce-x3", |b| b.iter(|| reduce_covering(black_box(&rs)).unwrap()));
    let red = reduce_covering(&rs).unwrap();
    g.bench_function("equivalence/panel-cover-x3", |b| b.iter(|| quotient_panel(black_box(&red.output)).unwrap()));
    g.bench_function("exactpoly/fc-poly-5", |b| b.iter(|| fc_polynomial(black_box(5)).unwrap()));
    g.finish();
    c.bench_function("equivalence/abelianization-cover-x3", |b| b.iter(|| abelianization(black_box(&red.output))));
}

fn monodromy(c: &mut Criterion) {
    let mut g = c.benchmark_group("monodromy");
    g.sample_size(10);
    g.bench_function("critical-values", |b| {
        b.iter(|| PlaneCutScene::new().critical_values().map(|v| v.len()).unwrap())
    });
    let scene = PlaneCutScene::new();
    scene.critical_values().unwrap();
    g.bench_function("classify-one-event", |b| b.iter(|| classify_event(&scene, black_box(10)).unwrap()));
    g.bench_function("vk-relations", |b| b.iter(|| vk_relations(&scene).unwrap()));
    g.finish();
}

criterion_group!(benches, words, groups, monodromy);
criterion_main!(benches);
