//! Cartesian streams: causal families of functions on histories, with
//! sequential and parallel composition, copy/discard and a delayed feedback.

mod check;
mod morphism;
mod value;

use thiserror::Error;

pub use check::{
    check_feedback_axioms, check_stream_laws, extensional_check, extensional_equal, random_table_morphism,
    sample_history, Axiom, Counterexample, EqConfig, LawConfig, LawResult,
};
pub use morphism::{
    prefix_evaluate, prefix_evaluate_traced, stream_compose, stream_copy, stream_delay, stream_discard,
    stream_feedback, stream_feedback_with, stream_identity, stream_symmetry, stream_tensor, EvalTrace,
    FeedbackVariant, Runner, StreamMorphism,
};
pub use value::{ExplanationSpace, SpaceSeq, Value, ValueSpace};

use crate::diagram::StructuralKind;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("feedback over {state} needs a body of shape X x F(S) -> Y x S, got {dom} -> {cod}")]
    FeedbackShape { state: String, dom: String, cod: String },
    #[error("cannot sample from {0}")]
    Unsampleable(String),
    #[error("{kind} takes {expected} space list(s), got {found}")]
    Arity {
        kind: String,
        expected: usize,
        found: usize,
    },
}

/// Identity, symmetry, copy or discard on lists of wires. Symmetry takes two
/// lists, the others one.
pub fn stream_structural(kind: StructuralKind, spaces: &[Vec<SpaceSeq>]) -> Result<StreamMorphism, StreamError> {
    let expected = if kind == StructuralKind::Symmetry { 2 } else { 1 };
    if spaces.len() != expected {
        return Err(StreamError::Arity {
            kind: format!("{kind:?}"),
            expected,
            found: spaces.len(),
        });
    }
    let a = spaces[0].clone();
    Ok(match kind {
        StructuralKind::Identity => stream_identity(a),
        StructuralKind::Copy => stream_copy(a),
        StructuralKind::Discard => stream_discard(a),
        StructuralKind::Symmetry => stream_symmetry(a, spaces[1].clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(n: usize) -> SpaceSeq {
        SpaceSeq::Constant(ValueSpace::naturals(n))
    }

    fn atoms(xs: &[usize]) -> Vec<Vec<Value>> {
        xs.iter().map(|x| vec![Value::atom(x.to_string())]).collect()
    }

    fn num(v: &Value) -> usize {
        match v {
            Value::Atom(a) => a.parse().unwrap(),
            _ => panic!("not an atom"),
        }
    }

    #[test]
    fn identity_echoes_inputs() {
        let id = stream_identity(vec![nat(4)]);
        let xs = atoms(&[1, 2, 3]);
        assert_eq!(prefix_evaluate(&id, &xs).unwrap(), xs);
    }

    #[test]
    fn history_sum_mod_four() {
        let f = StreamMorphism::from_components(vec![nat(4)], vec![nat(4)], |h| {
            let s: usize = h.iter().map(|x| num(&x[0])).sum();
            vec![Value::atom((s % 4).to_string())]
        });
        let out = prefix_evaluate(&f, &atoms(&[1, 2, 3])).unwrap();
        assert_eq!(out, atoms(&[1, 3, 2]));
    }

    #[test]
    fn inputs_outside_the_space_are_rejected() {
        let id = stream_identity(vec![nat(2)]);
        let err = prefix_evaluate(&id, &atoms(&[0, 5])).unwrap_err();
        assert!(matches!(err, StreamError::SpaceMismatch(_)));
    }

    #[test]
    fn structural_pointwise() {
        let r = SpaceSeq::Constant(ValueSpace::RealVector(1));
        let seven = vec![Value::reals(&[7.0])];
        let c = stream_structural(StructuralKind::Copy, &[vec![r.clone()]]).unwrap();
        assert_eq!(prefix_evaluate(&c, std::slice::from_ref(&seven)).unwrap()[0], vec![seven[0].clone(); 2]);
        let d = stream_structural(StructuralKind::Discard, &[vec![r.clone()]]).unwrap();
        assert!(prefix_evaluate(&d, std::slice::from_ref(&seven)).unwrap()[0].is_empty());
        let s = stream_structural(StructuralKind::Symmetry, &[vec![nat(3)], vec![r]]).unwrap();
        let out = prefix_evaluate(&s, &[vec![Value::atom("1"), seven[0].clone()]]).unwrap();
        assert_eq!(out[0], vec![seven[0].clone(), Value::atom("1")]);
    }

    #[test]
    fn delayed_accumulator() {
        let r = SpaceSeq::Constant(ValueSpace::RealVector(1));
        let body = StreamMorphism::pointwise(vec![r.clone(), r.clone().delayed()], vec![r.clone(), r.clone()], |_, x| {
            let prev = x[1].as_reals().map_or(0.0, |v| v[0]);
            let s = x[0].as_reals().unwrap()[0] + prev;
            vec![Value::reals(&[s]), Value::reals(&[s])]
        });
        let acc = stream_feedback(&body, vec![r]).unwrap();
        let xs: Vec<Vec<Value>> = [1.0, 2.0, 3.0].iter().map(|x| vec![Value::reals(&[*x])]).collect();
        let tr = prefix_evaluate_traced(&acc, &xs).unwrap();
        let got: Vec<f64> = tr.outputs.iter().map(|y| y[0].as_reals().unwrap()[0]).collect();
        assert_eq!(got, vec![1.0, 3.0, 6.0]);
        assert_eq!(tr.feedback_states.as_ref().unwrap().len(), 3);
        let table = tr.to_table(None);
        assert!(table.starts_with("step|inputs|outputs|state\n0|"));
    }

    #[test]
    fn feedback_shape_is_checked() {
        let f = stream_identity(vec![nat(2)]);
        assert!(matches!(
            stream_feedback(&f, vec![nat(3)]),
            Err(StreamError::FeedbackShape { .. })
        ));
    }

    #[test]
    fn axioms_hold_and_mutant_fails_only_sliding() {
        let spaces = [ValueSpace::naturals(2), ValueSpace::naturals(3)];
        let cfg = LawConfig {
            instances: 30,
            ..LawConfig::default()
        };
        let good = check_feedback_axioms(&spaces, cfg).unwrap();
        assert!(good.iter().all(LawResult::ok), "{good:?}");
        let bad = check_feedback_axioms(
            &spaces,
            LawConfig {
                variant: FeedbackVariant::SeedFirstAtom,
                ..cfg
            },
        )
        .unwrap();
        for r in &bad {
            assert_eq!(r.ok(), r.name != "Sliding", "{r}");
        }
    }

    #[test]
    fn stream_laws_hold() {
        let spaces = [ValueSpace::naturals(2), ValueSpace::naturals(4)];
        let cfg = LawConfig {
            instances: 20,
            ..LawConfig::default()
        };
        for r in check_stream_laws(&spaces, cfg).unwrap() {
            assert!(r.ok(), "{r}");
        }
    }
}
