use proptest::prelude::*;

use xlearn_core::stream::{
    check_feedback_axioms, check_stream_laws, extensional_equal, prefix_evaluate, stream_compose, stream_copy,
    stream_feedback, stream_identity, stream_symmetry, stream_tensor, EqConfig, FeedbackVariant, LawConfig,
};
use xlearn_core::{SpaceSeq, StreamMorphism, Value, ValueSpace};

fn reals(n: usize) -> SpaceSeq {
    SpaceSeq::Constant(ValueSpace::RealVector(n))
}

fn nat(n: usize) -> SpaceSeq {
    SpaceSeq::Constant(ValueSpace::naturals(n))
}

/// Output at step n is `a * x_n + b * (output at n-1)`, with the previous
/// output taken as 0 at step 0.
fn linear_recurrence(a: f64, b: f64) -> StreamMorphism {
    let body = StreamMorphism::pointwise(vec![reals(1), reals(1).delayed()], vec![reals(1), reals(1)], move |_, x| {
        let prev = x[1].as_reals().map_or(0.0, |v| v[0]);
        let y = a * x[0].as_reals().unwrap()[0] + b * prev;
        vec![Value::reals(&[y]), Value::reals(&[y])]
    });
    stream_feedback(&body, vec![reals(1)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn feedback_runs_the_recurrence(xs in prop::collection::vec(-10.0f64..10.0, 0..12), a in -2.0f64..2.0, b in -1.0f64..1.0) {
        let f = linear_recurrence(a, b);
        let inputs: Vec<Vec<Value>> = xs.iter().map(|x| vec![Value::reals(&[*x])]).collect();
        let out = prefix_evaluate(&f, &inputs).unwrap();
        let mut prev = 0.0;
        for (x, y) in xs.iter().zip(&out) {
            prev = a * x + b * prev;
            prop_assert_eq!(y[0].as_reals().unwrap()[0], prev);
        }
        prop_assert_eq!(out.len(), xs.len());
    }

    #[test]
    fn axioms_hold_for_any_seed(seed in any::<u64>()) {
        let cfg = LawConfig { seed, instances: 10, ..LawConfig::default() };
        for r in check_feedback_axioms(&[ValueSpace::naturals(2), ValueSpace::naturals(3)], cfg).unwrap() {
            prop_assert!(r.ok(), "{}", r);
        }
    }

    #[test]
    fn stream_laws_hold_for_any_seed(seed in any::<u64>()) {
        let cfg = LawConfig { seed, instances: 5, ..LawConfig::default() };
        for r in check_stream_laws(&[ValueSpace::naturals(2), ValueSpace::naturals(3)], cfg).unwrap() {
            prop_assert!(r.ok(), "{}", r);
        }
    }
}

#[test]
fn history_sum_modulo_the_enumeration() {
    // Output at n is the sum of all inputs so far, mod 4.
    let f = StreamMorphism::from_step(vec![nat(4)], vec![nat(4)], || 0usize, |acc, _, x| {
        let Value::Atom(a) = &x[0] else { unreachable!() };
        *acc = (*acc + a.parse::<usize>().unwrap()) % 4;
        vec![Value::atom(acc.to_string())]
    });
    let inputs: Vec<Vec<Value>> = ["1", "2", "3"].iter().map(|a| vec![Value::atom(*a)]).collect();
    let out = prefix_evaluate(&f, &inputs).unwrap();
    let got: Vec<&Value> = out.iter().map(|y| &y[0]).collect();
    assert_eq!(got, vec![&Value::atom("1"), &Value::atom("3"), &Value::atom("2")]);
}

#[test]
fn structural_morphisms_act_pointwise() {
    let copy = stream_copy(vec![nat(3)]);
    let out = prefix_evaluate(&copy, &[vec![Value::atom("2")]]).unwrap();
    assert_eq!(out[0], vec![Value::atom("2"), Value::atom("2")]);
    let sym = stream_symmetry(vec![nat(2)], vec![nat(3)]);
    let out = prefix_evaluate(&sym, &[vec![Value::atom("1"), Value::atom("2")]]).unwrap();
    assert_eq!(out[0], vec![Value::atom("2"), Value::atom("1")]);
    let twice = stream_compose(&sym, &stream_symmetry(vec![nat(3)], vec![nat(2)])).unwrap();
    let id = stream_tensor(&stream_identity(vec![nat(2)]), &stream_identity(vec![nat(3)]));
    assert!(extensional_equal(&twice, &id, EqConfig::default()).unwrap());
}

#[test]
fn only_sliding_sees_the_corrupted_feedback() {
    let cfg = LawConfig {
        variant: FeedbackVariant::SeedFirstAtom,
        instances: 50,
        ..LawConfig::default()
    };
    let results = check_feedback_axioms(&[ValueSpace::naturals(2), ValueSpace::naturals(3)], cfg).unwrap();
    for r in &results {
        assert_eq!(r.ok(), r.name != "Sliding", "{r}");
    }
    let sliding = results.iter().find(|r| r.name == "Sliding").unwrap();
    assert!(sliding.counterexample.as_deref().unwrap().contains("history"));
}

#[test]
fn mismatched_composition_is_rejected() {
    assert!(stream_compose(&stream_identity(vec![nat(2)]), &stream_identity(vec![nat(3)])).is_err());
}
