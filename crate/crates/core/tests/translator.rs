use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xlearn_core::agents::{build_explainer, build_mlp_agent, ExplainerConfig, Loss, MlpSpec, OptimizerSpec, WiringKind};
use xlearn_core::diagram::{abstract_learning_agent, build_xlearn, FlatType, MorphismTerm, ObjectExpr};
use xlearn_core::institution::{ExplanationMode, Signature};
use xlearn_core::stream::{stream_compose, extensional_equal, EqConfig, ExplanationSpace, SpaceSeq, StreamMorphism, ValueSpace};
use xlearn_core::translator::*;

fn mlp_agent() -> ConcreteAgent {
    build_mlp_agent(&MlpSpec::sigmoid(&[2, 4, 1]).unwrap(), OptimizerSpec::sgd(0.5).with_loss(Loss::Bce), 0).unwrap()
}

fn parts(t: &Translator) -> (BTreeMap<String, SpaceSeq>, BTreeMap<String, StreamMorphism>) {
    let objs = ["X", "Y", "Y*", "P", "E"]
        .iter()
        .map(|o| (o.to_string(), t.object(o).unwrap().clone()))
        .collect();
    let gens = ["eta", "nabla"]
        .iter()
        .map(|g| (g.to_string(), t.generator(g).unwrap().clone()))
        .collect();
    (objs, gens)
}

#[test]
fn mlp_translator_validates_as_la() {
    let a = mlp_agent();
    assert_eq!(classify_agent_kind(&a.translator), AgentKind::La);
    assert_eq!(a.translator.explanation(), &ExplanationDecl::None);
}

#[test]
fn declared_mode_with_trivial_e_is_rejected() {
    let a = mlp_agent();
    let (objs, gens) = parts(&a.translator);
    let sig = Signature::relevance("S", &["f1", "f2"]).unwrap();
    let err = make_translator(build_xlearn(), objs, gens, ExplanationDecl::Syntactic(sig), true).unwrap_err();
    assert!(matches!(err, TranslatorError::ExplanationModeMismatch(_)));
}

#[test]
fn wrong_generator_codomain_is_rejected() {
    let a = mlp_agent();
    let (objs, mut gens) = parts(&a.translator);
    let bad = StreamMorphism::pointwise(
        gens["eta"].dom().to_vec(),
        vec![SpaceSeq::Constant(ValueSpace::RealVector(3))],
        |_, _| vec![],
    );
    gens.insert("eta".into(), bad);
    let err = make_translator(build_xlearn(), objs, gens, ExplanationDecl::None, true).unwrap_err();
    assert!(matches!(err, TranslatorError::GeneratorTypeMismatch { ref name, .. } if name == "eta"), "{err}");
}

#[test]
fn unknown_generator_is_rejected() {
    let a = mlp_agent();
    let term = MorphismTerm::Gen(std::sync::Arc::new(xlearn_core::diagram::GeneratorDecl::new(
        "mu",
        ObjectExpr::base("X"),
        ObjectExpr::base("Y"),
    )));
    assert!(matches!(apply(&a.translator, &term), Err(TranslatorError::UnknownGenerator(_))));
}

fn random_dom(rng: &mut ChaCha8Rng) -> FlatType {
    let names = ["X", "Y", "Y*", "P", "E"];
    let n = rng.gen_range(1..=3);
    let picked: Vec<&str> = (0..n).map(|_| names[rng.gen_range(0..names.len())]).collect();
    if rng.gen_bool(0.3) {
        return ObjectExpr::product_of(&["X", "P"]).flatten();
    }
    ObjectExpr::product_of(&picked).flatten()
}

#[test]
fn functor_laws_hold_on_random_terms_and_the_agent() {
    let a = mlp_agent();
    let p = build_xlearn();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut terms: Vec<MorphismTerm> = (0..50)
        .map(|_| {
            let dom = random_dom(&mut rng);
            random_term(&p, &dom, 3, &mut rng)
        })
        .collect();
    assert!(terms.iter().all(|t| t.infer_type().is_ok() && !t.contains_feedback()));
    terms.push(abstract_learning_agent(&p).unwrap());
    let cfg = EqConfig { samples: 10, ..EqConfig::default() };
    let results = check_functor_laws(&a.translator, &terms, cfg).unwrap();
    for r in &results {
        assert!(r.ok(), "{r}");
        assert!(r.instances > 0, "{r}");
    }
}

#[test]
fn compiled_agent_matches_manual_wiring() {
    let a = mlp_agent();
    let t = &a.translator;
    // Manual wiring of the agent body: (y*, x, p) -> (y, p').
    let eta = t.generator("eta").unwrap().clone();
    let nabla = t.generator("nabla").unwrap().clone();
    let r = |n| SpaceSeq::Constant(ValueSpace::RealVector(n));
    let pre = StreamMorphism::pointwise(vec![r(1), r(2), r(17)], vec![r(1), r(2), r(17), r(17)], |_, v| {
        vec![v[0].clone(), v[1].clone(), v[2].clone(), v[2].clone()]
    });
    let run_eta = StreamMorphism::from_factory(
        vec![r(1), r(2), r(17), r(17)],
        vec![r(1), r(1), r(17)],
        {
            let eta = eta.clone();
            move || {
                let mut inner = eta.runner();
                Box::new(Wrap(Box::new(move |v: Vec<xlearn_core::Value>| {
                    let y = inner.step(vec![v[1].clone(), v[2].clone()]);
                    vec![v[0].clone(), y[0].clone(), v[3].clone()]
                })))
            }
        },
    );
    let post = StreamMorphism::from_factory(vec![r(1), r(1), r(17)], vec![r(1), r(17)], {
        let nabla = nabla.clone();
        move || {
            let mut inner = nabla.runner();
            Box::new(Wrap(Box::new(move |v: Vec<xlearn_core::Value>| {
                let p = inner.step(vec![v[0].clone(), v[1].clone(), v[2].clone()]);
                vec![v[1].clone(), p[0].clone()]
            })))
        }
    });
    let body = stream_compose(&stream_compose(&pre, &run_eta).unwrap(), &post).unwrap();
    let manual = xlearn_core::stream::stream_feedback(&body, vec![r(17)]).unwrap();
    assert!(extensional_equal(&a.compiled, &manual, EqConfig { samples: 20, ..EqConfig::default() }).unwrap());
}

struct Wrap(Box<dyn FnMut(Vec<xlearn_core::Value>) -> Vec<xlearn_core::Value> + Send>);

impl xlearn_core::stream::Runner for Wrap {
    fn step(&mut self, inputs: Vec<xlearn_core::Value>) -> Vec<xlearn_core::Value> {
        (self.0)(inputs)
    }
}

#[test]
fn explainer_kinds_follow_the_explanation_mode() {
    let base = mlp_agent();
    let sem = build_explainer(WiringKind::BackwardBased, &base, &ExplainerConfig::default()).unwrap();
    assert!(matches!(classify_agent_kind(&sem.translator), AgentKind::SemanticXla(_)));
    let cfg = ExplainerConfig { mode: ExplanationMode::Syntactic, ..Default::default() };
    let syn = build_explainer(WiringKind::PostHoc, &base, &cfg).unwrap();
    let sig = Signature::relevance("S", &["f1", "f2"]).unwrap();
    assert_eq!(classify_agent_kind(&syn.translator), AgentKind::SyntacticXla(sig.clone()));
    assert_eq!(
        syn.translator.object("E"),
        Some(&SpaceSeq::Constant(ValueSpace::Explanation(ExplanationSpace {
            signature: sig,
            mode: ExplanationMode::Syntactic
        })))
    );
}

#[test]
fn boundary_translation_erases_singletons() {
    let a = mlp_agent();
    let (d, c) = a.term.infer_type().unwrap();
    assert_eq!(a.translator.translate_type(&d).unwrap(), a.compiled.dom());
    assert_eq!(a.translator.translate_type(&c).unwrap(), a.compiled.cod());
    assert_eq!(a.compiled.cod().len(), 1);
}

#[test]
fn term_laws_hold_diagrammatically_and_extensionally() {
    use xlearn_core::laws::{check_term_laws, TermLawConfig};
    let a = mlp_agent();
    let cfg = TermLawConfig { instances: 100, eq: EqConfig { samples: 5, ..EqConfig::default() }, ..Default::default() };
    for r in check_term_laws(&a.translator, cfg).unwrap() {
        println!("{r}");
        assert!(r.ok(), "{r}");
    }
}

#[test]
fn term_law_checks_reject_a_false_equation() {
    use xlearn_core::diagram::{diagrams_equal, normalize};
    let a = mlp_agent();
    let (x, p) = (ObjectExpr::base("X"), ObjectExpr::base("P"));
    let lhs = MorphismTerm::symmetry(x.clone(), p.clone());
    let rhs = MorphismTerm::symmetry(p, x);
    assert!(lhs.infer_type().unwrap() != rhs.infer_type().unwrap());
    let sym_xp = MorphismTerm::symmetry(ObjectExpr::base("X"), ObjectExpr::base("X"));
    let id_xx = MorphismTerm::id(ObjectExpr::product_of(&["X", "X"]));
    assert!(!diagrams_equal(&normalize(&sym_xp).unwrap(), &normalize(&id_xx).unwrap()).unwrap());
    let (f, g) = (apply(&a.translator, &sym_xp).unwrap(), apply(&a.translator, &id_xx).unwrap());
    assert!(!extensional_equal(&f, &g, EqConfig::default()).unwrap());
}
