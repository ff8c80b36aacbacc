use proptest::prelude::*;

use xlearn_core::diagram::{
    abstract_learning_agent, build_xlearn, compose, diagrams_equal, normalize, parse_object, parse_term, tensor,
    DiagramError, MorphismTerm, NodeKind, ObjectExpr, PortDiagram,
};
use xlearn_core::translator::random_terms;

fn obj(s: &str) -> ObjectExpr {
    parse_object(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printed_terms_parse_back(seed in any::<u64>(), depth in 0usize..4) {
        let p = build_xlearn();
        for t in random_terms(&p, 4, depth, seed) {
            let src = t.to_string();
            // Objects print unparenthesized, so products may reassociate;
            // text and flat types are what survive.
            let back = parse_term(&src, &p).unwrap();
            prop_assert_eq!(back.to_string(), src);
            prop_assert_eq!(back.infer_type().unwrap(), t.infer_type().unwrap());
            if !t.contains_feedback() {
                prop_assert!(diagrams_equal(&normalize(&back).unwrap(), &normalize(&t).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn normal_forms_are_stable_and_reflexive(seed in any::<u64>()) {
        let p = build_xlearn();
        for t in random_terms(&p, 4, 3, seed) {
            let a = normalize(&t).unwrap();
            let b = normalize(&t).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(diagrams_equal(&a, &b).unwrap());
            prop_assert_eq!(a.to_dot(), b.to_dot());
        }
    }

    #[test]
    fn tensor_equals_its_interchange_forms(seed in any::<u64>()) {
        let p = build_xlearn();
        let ts = random_terms(&p, 2, 2, seed);
        let (f, g) = (ts[0].clone(), ts[1].clone());
        let (a, b) = (f.dom().unwrap().to_expr(), g.dom().unwrap().to_expr());
        let (c, d) = (f.cod().unwrap().to_expr(), g.cod().unwrap().to_expr());
        let par = tensor(f.clone(), g.clone()).unwrap();
        let left = compose(
            tensor(f.clone(), MorphismTerm::id(b)).unwrap(),
            tensor(MorphismTerm::id(c), g.clone()).unwrap(),
        )
        .unwrap();
        let right = compose(
            tensor(MorphismTerm::id(a), g).unwrap(),
            tensor(f, MorphismTerm::id(d)).unwrap(),
        )
        .unwrap();
        let n = normalize(&par).unwrap();
        prop_assert!(diagrams_equal(&n, &normalize(&left).unwrap()).unwrap());
        prop_assert!(diagrams_equal(&n, &normalize(&right).unwrap()).unwrap());
    }
}

#[test]
fn generators_can_be_copied() {
    let p = build_xlearn();
    let eta = p.generator("eta").unwrap();
    let lhs = compose(eta.clone(), MorphismTerm::copy(obj("Y x E"))).unwrap();
    let rhs = compose(MorphismTerm::copy(obj("X x P")), tensor(eta.clone(), eta).unwrap()).unwrap();
    assert!(diagrams_equal(&normalize(&lhs).unwrap(), &normalize(&rhs).unwrap()).unwrap());
}

#[test]
fn counitality_against_identity() {
    let x = obj("X");
    let lhs = compose(
        MorphismTerm::copy(x.clone()),
        tensor(MorphismTerm::discard(x.clone()), MorphismTerm::id(x.clone())).unwrap(),
    )
    .unwrap();
    let n = normalize(&lhs).unwrap();
    assert!(diagrams_equal(&n, &normalize(&MorphismTerm::id(x)).unwrap()).unwrap());
    assert!(n.nodes.is_empty());
}

#[test]
fn discarded_generators_vanish_and_copied_ones_duplicate() {
    let p = build_xlearn();
    let a = compose(p.generator("eta").unwrap(), MorphismTerm::discard(obj("Y x E"))).unwrap();
    let b = MorphismTerm::discard(obj("X x P"));
    assert!(diagrams_equal(&normalize(&a).unwrap(), &normalize(&b).unwrap()).unwrap());
    let c = compose(p.generator("eta").unwrap(), MorphismTerm::copy(obj("Y x E"))).unwrap();
    let d = compose(MorphismTerm::copy(obj("X x P")), tensor(p.generator("eta").unwrap(), p.generator("eta").unwrap()).unwrap()).unwrap();
    assert!(diagrams_equal(&normalize(&c).unwrap(), &normalize(&d).unwrap()).unwrap());
}

#[test]
fn agent_lowering_has_the_expected_structure() {
    let p = build_xlearn();
    let agent = abstract_learning_agent(&p).unwrap();
    let (dom, cod) = agent.infer_type().unwrap();
    assert_eq!(dom.to_string(), "Y* x X");
    assert_eq!(cod.to_string(), "Y x E");
    assert_eq!(agent.count(|t| matches!(t, MorphismTerm::Feedback(..))), 1);

    let d = PortDiagram::lower(&agent).unwrap();
    let named = |n: &str| d.count_nodes(|x| x.kind == NodeKind::Generator(n.into()));
    assert_eq!((named("eta"), named("nabla")), (1, 1));
    let on = |kind: NodeKind, ty: &str| d.count_nodes(|x| x.kind == kind && x.inputs[0].to_string() == ty);
    assert_eq!(on(NodeKind::Copy, "P"), 1);
    assert_eq!(on(NodeKind::Discard, "E"), 1);
    let fb: Vec<_> = d.feedback_wires().collect();
    assert_eq!(fb.len(), 1);
    assert_eq!(fb[0].ty.to_string(), "P");

    // The copy of P feeds both generators.
    let copy = d.nodes.iter().position(|n| n.kind == NodeKind::Copy && n.inputs[0].to_string() == "P").unwrap();
    let fed: Vec<&NodeKind> = d
        .wires
        .iter()
        .filter(|w| matches!(w.from, xlearn_core::diagram::Source::Node { node, .. } if node == copy))
        .filter_map(|w| match w.to {
            xlearn_core::diagram::Target::Node { node, .. } => Some(&d.nodes[node].kind),
            _ => None,
        })
        .collect();
    assert!(fed.contains(&&NodeKind::Generator("eta".into())));
    assert!(fed.contains(&&NodeKind::Generator("nabla".into())));
}

#[test]
fn equality_with_feedback_is_refused() {
    let p = build_xlearn();
    let agent = abstract_learning_agent(&p).unwrap();
    let d = PortDiagram::lower(&agent).unwrap();
    assert!(matches!(diagrams_equal(&d, &d), Err(DiagramError::UnsupportedFeedbackEquality)));
}
