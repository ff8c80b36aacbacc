use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xlearn_core::institution::{
    check_satisfaction_condition, expressive_equivalence, make_explanation, parse_model, parse_sentence,
    random_model, random_sentence, reduct_model, saliency_syntactic, satisfies, translate_sentence,
    ExplanationPayload, InstitutionError, Sentence, SignatureMorphism,
};
use xlearn_core::{SemanticModel, Signature};

fn flight() -> Signature {
    Signature::pl(&["x_flies", "x_animal", "x_plane"]).unwrap()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn rel(pred: &str, prefix: &str, n: usize) -> Signature {
    Signature::relevance(pred, &names(prefix, n)).unwrap()
}

#[test]
fn plane_rule_is_satisfied_by_a_flying_non_animal_plane() {
    let s = parse_sentence("x_flies & !x_animal -> x_plane").unwrap();
    let m = SemanticModel::truth(flight(), &[("x_flies", true), ("x_animal", false), ("x_plane", true)]).unwrap();
    assert!(satisfies(&m, &s).unwrap());
    let not_plane =
        SemanticModel::truth(flight(), &[("x_flies", true), ("x_animal", false), ("x_plane", false)]).unwrap();
    assert!(!satisfies(&not_plane, &s).unwrap());
}

#[test]
fn explanations_over_the_flight_signature() {
    let s = parse_sentence("x_flies & !x_animal -> x_plane").unwrap();
    let syn = make_explanation(ExplanationPayload::Sentences(vec![s]), &flight()).unwrap();
    assert_eq!(syn.sentences().len(), 1);
    let m = SemanticModel::truth(flight(), &[("x_flies", true), ("x_animal", false), ("x_plane", true)]).unwrap();
    let sem = make_explanation(ExplanationPayload::Model(m), &flight()).unwrap();
    assert!(sem.model().is_some());
    let stray = parse_sentence("x_flies -> x_bird").unwrap();
    assert!(make_explanation(ExplanationPayload::Sentences(vec![stray]), &flight()).is_err());
}

#[test]
fn relevance_threshold_arithmetic() {
    let sig = rel("S", "p", 4);
    let m = SemanticModel::degrees(sig, &[0.0, 0.0, 0.7, 0.2], 0.5).unwrap();
    assert!(satisfies(&m, &Sentence::pred("S", "p3")).unwrap());
    assert!(!satisfies(&m, &Sentence::pred("S", "p4")).unwrap());
}

#[test]
fn saliency_takes_constants_at_or_above_threshold_in_order() {
    let m = SemanticModel::degrees(rel("S", "p", 3), &[0.9, 0.1, 0.6], 0.5).unwrap();
    let e = saliency_syntactic(&m).unwrap();
    assert_eq!(e.sentences(), &[Sentence::and(Sentence::pred("S", "p1"), Sentence::pred("S", "p3"))]);
    let low = SemanticModel::degrees(rel("S", "p", 3), &[0.1, 0.2, 0.3], 0.5).unwrap();
    assert_eq!(saliency_syntactic(&low).unwrap().sentences(), &[Sentence::Top]);
}

#[test]
fn equal_sizes_give_the_positional_bijection() {
    let rho = expressive_equivalence(&rel("S", "p", 5), &rel("R", "f", 5)).unwrap();
    for i in 1..=5 {
        assert_eq!(rho.apply(&format!("p{i}")), Some(format!("f{i}").as_str()));
    }
    assert_eq!(rho.apply("S"), Some("R"));
    assert!(expressive_equivalence(&rel("S", "p", 5), &rel("R", "f", 4)).is_none());
    assert!(expressive_equivalence(&rel("S", "p", 2), &Signature::pl(&["a", "b"]).unwrap()).is_none());
}

#[test]
fn feature_model_pulls_back_to_saliency_degrees() {
    let rho = expressive_equivalence(&rel("S", "p", 3), &rel("R", "f", 3)).unwrap();
    let feat = parse_model("f1 = 0.73\nf2 = 0.1\nf3 = 0.5\ntau = 0.5\n", rho.target()).unwrap();
    let pix = reduct_model(&rho, &feat).unwrap();
    assert_eq!(pix.degree_vector(), vec![0.73, 0.1, 0.5]);
    assert_eq!(pix.tau(), Some(0.5));
}

#[test]
fn morphisms_must_be_injective_and_total() {
    let src = rel("S", "p", 2);
    let tgt = rel("R", "f", 3);
    let map = |pairs: &[(&str, &str)]| -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    };
    assert!(SignatureMorphism::new(src.clone(), tgt.clone(), map(&[("S", "R"), ("p1", "f1"), ("p2", "f3")])).is_ok());
    assert!(matches!(
        SignatureMorphism::new(src.clone(), tgt.clone(), map(&[("S", "R"), ("p1", "f1"), ("p2", "f1")])),
        Err(InstitutionError::InvalidMorphism(_))
    ));
    assert!(SignatureMorphism::new(src, tgt, map(&[("S", "R"), ("p1", "f1")])).is_err());
}

fn renaming(n: usize, m: usize, pl: bool, seed: u64) -> SignatureMorphism {
    use rand::seq::SliceRandom;
    let (src, tgt) = if pl {
        (Signature::pl(&names("a", n)).unwrap(), Signature::pl(&names("b", m)).unwrap())
    } else {
        (rel("S", "c", n), rel("T", "d", m))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = tgt.atoms().to_vec();
    images.shuffle(&mut rng);
    let mut map: BTreeMap<String, String> = src.atoms().iter().cloned().zip(images).collect();
    if !pl {
        map.insert("S".into(), "T".into());
    }
    SignatureMorphism::new(src, tgt, map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn satisfaction_condition(seed in any::<u64>(), n in 1usize..5, extra in 0usize..3, pl in any::<bool>()) {
        let rho = renaming(n, n + extra, pl, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let m = random_model(rho.target(), &mut rng);
        let s = random_sentence(rho.source(), 4, &mut rng);
        prop_assert!(check_satisfaction_condition(&rho, &m, &s).unwrap());
    }

    #[test]
    fn sentences_print_and_parse_back(seed in any::<u64>(), pl in any::<bool>()) {
        let sig = renaming(3, 3, pl, seed).source().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_sentence(&sig, 4, &mut rng);
        prop_assert_eq!(parse_sentence(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn renaming_preserves_structure(seed in any::<u64>()) {
        let rho = renaming(3, 5, false, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_sentence(rho.source(), 3, &mut rng);
        let t = translate_sentence(&rho, &s).unwrap();
        prop_assert_eq!(t.depth(), s.depth());
        prop_assert_eq!(t.to_string().matches('(').count(), s.to_string().matches('(').count());
        let bij = renaming(4, 4, true, seed);
        let inv = bij.inverse().unwrap();
        let s = random_sentence(bij.source(), 3, &mut rng);
        let there = translate_sentence(&bij, &s).unwrap();
        prop_assert_eq!(translate_sentence(&inv, &there).unwrap(), s);
    }

    #[test]
    fn saliency_is_satisfied_by_agreeing_models(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = rel("S", "p", 6);
        let m = random_model(&sig, &mut rng);
        let e = saliency_syntactic(&m).unwrap();
        let s = &e.sentences()[0];
        prop_assert!(satisfies(&m, s).unwrap());
        // Raising every degree keeps the salient constants salient.
        let raised: Vec<f64> = m.degree_vector().iter().map(|d| (d + 0.2).min(1.0)).collect();
        let up = SemanticModel::degrees(sig, &raised, m.tau().unwrap()).unwrap();
        prop_assert!(satisfies(&up, s).unwrap());
    }
}
