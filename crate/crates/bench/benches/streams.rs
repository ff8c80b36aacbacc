use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use xlearn_core::agents::{build_mlp_agent, parse_dataset, run_training, Activation, MlpSpec, OptimizerSpec};
use xlearn_core::stream::{check_feedback_axioms, prefix_evaluate, stream_feedback, LawConfig};
use xlearn_core::{SpaceSeq, StreamMorphism, Value, ValueSpace};

const XOR: &str = "0,0,0\n0,1,1\n1,0,1\n1,1,0\n";

fn accumulator() -> StreamMorphism {
    let r = SpaceSeq::Constant(ValueSpace::RealVector(1));
    let body = StreamMorphism::pointwise(vec![r.clone(), r.clone().delayed()], vec![r.clone(), r.clone()], |_, x| {
        let prev = x[1].as_reals().map_or(0.0, |v| v[0]);
        let s = x[0].as_reals().unwrap()[0] + prev;
        vec![Value::reals(&[s]), Value::reals(&[s])]
    });
    stream_feedback(&body, vec![r]).unwrap()
}

fn feedback_prefix(c: &mut Criterion) {
    let f = accumulator();
    let mut g = c.benchmark_group("feedback_prefix");
    for n in [16usize, 256, 4096] {
        let inputs: Vec<Vec<Value>> = (0..n).map(|i| vec![Value::reals(&[i as f64])]).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &inputs, |b, inputs| {
            b.iter(|| prefix_evaluate(&f, black_box(inputs)).unwrap())
        });
    }
    g.finish();
}

fn axioms(c: &mut Criterion) {
    let spaces = [ValueSpace::naturals(2), ValueSpace::naturals(3)];
    let cfg = LawConfig { instances: 20, ..LawConfig::default() };
    c.bench_function("feedback_axioms/20", |b| b.iter(|| check_feedback_axioms(&spaces, cfg).unwrap()));
}

fn xor_training(c: &mut Criterion) {
    let spec = MlpSpec::new(&[2, 4, 1], Activation::Sigmoid).unwrap();
    let agent = build_mlp_agent(&spec, OptimizerSpec::sgd(0.5), 0).unwrap();
    let data = parse_dataset(XOR, 2).unwrap();
    let mut g = c.benchmark_group("xor_training");
    g.sample_size(10);
    for steps in [100usize, 1000] {
        g.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &steps| {
            b.iter(|| run_training(&agent, &data, steps).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, feedback_prefix, axioms, xor_training);
criterion_main!(benches);
