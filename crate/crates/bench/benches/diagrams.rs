use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use xlearn_core::diagram::{abstract_learning_agent, build_xlearn, normalize, parse_term, PortDiagram};
use xlearn_core::translator::random_terms;

fn agent(c: &mut Criterion) {
    let p = build_xlearn();
    let term = abstract_learning_agent(&p).unwrap();
    let src = term.to_string();
    c.bench_function("agent/parse", |b| b.iter(|| parse_term(black_box(&src), &p).unwrap()));
    c.bench_function("agent/lower", |b| b.iter(|| PortDiagram::lower(black_box(&term)).unwrap()));
    let d = PortDiagram::lower(&term).unwrap();
    c.bench_function("agent/to_dot", |b| b.iter(|| black_box(&d).to_dot()));
}

fn normal_forms(c: &mut Criterion) {
    let p = build_xlearn();
    let mut g = c.benchmark_group("normalize");
    for depth in [1usize, 2, 3] {
        let terms: Vec<_> = random_terms(&p, 32, depth, 7).into_iter().filter(|t| !t.contains_feedback()).collect();
        g.bench_with_input(BenchmarkId::new("depth", depth), &terms, |b, terms| {
            b.iter(|| terms.iter().map(|t| normalize(t).unwrap().nodes.len()).sum::<usize>())
        });
    }
    g.finish();
}

criterion_group!(benches, agent, normal_forms);
criterion_main!(benches);
