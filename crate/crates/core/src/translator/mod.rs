//! Translators: feedback Cartesian functors from a free category into
//! Cartesian streams, given on objects and generators.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::agents::AgentProfile;
use crate::diagram::{DiagramError, Factor, FlatType, MorphismTerm, ObjectExpr, Presentation};
use crate::institution::{ExplanationMode, Signature};
use crate::stream::{
    extensional_check, stream_compose, stream_copy, stream_discard, stream_feedback, stream_identity,
    stream_symmetry, stream_tensor, EqConfig, LawResult, SpaceSeq, StreamError, StreamMorphism, ValueSpace,
};

/// Name of the explanation object in XLearn.
pub const EXPLANATION_OBJECT: &str = "E";

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TranslatorError {
    #[error("object `{0}` has no assigned space")]
    MissingObject(String),
    #[error("generator `{0}` has no assigned stream morphism")]
    MissingGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{name}` must map {expected} but maps {found}")]
    GeneratorTypeMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("explanation mode mismatch: {0}")]
    ExplanationModeMismatch(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Which kind of explanation the `E` object carries.
#[derive(Clone, Debug, PartialEq)]
pub enum ExplanationDecl {
    None,
    Syntactic(Signature),
    Semantic(Signature),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentKind {
    La,
    SyntacticXla(Signature),
    SemanticXla(Signature),
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::La => write!(f, "LA"),
            AgentKind::SyntacticXla(s) => write!(f, "syntactic XLA over {s}"),
            AgentKind::SemanticXla(s) => write!(f, "semantic XLA over {s}"),
        }
    }
}

/// A feedback Cartesian functor into streams.
#[derive(Clone, Debug)]
pub struct Translator {
    presentation: Presentation,
    objects: BTreeMap<String, SpaceSeq>,
    generators: BTreeMap<String, StreamMorphism>,
    explanation: ExplanationDecl,
    constant_architecture: bool,
}

fn show(v: &[SpaceSeq]) -> String {
    if v.is_empty() {
        "unit".into()
    } else {
        v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x ")
    }
}

fn translate_flat(objects: &BTreeMap<String, SpaceSeq>, t: &FlatType) -> Result<Vec<SpaceSeq>, TranslatorError> {
    let mut out = Vec::new();
    for Factor { name, delay } in t.factors() {
        let mut s = objects
            .get(name)
            .cloned()
            .ok_or_else(|| TranslatorError::MissingObject(name.clone()))?;
        for _ in 0..*delay {
            s = s.delayed();
        }
        if !s.is_trivial() {
            out.push(s);
        }
    }
    Ok(out)
}

/// Validate a translator. `constant_architecture` asserts that every
/// generator image is the same function at every step.
pub fn make_translator(
    presentation: Presentation,
    objects: BTreeMap<String, SpaceSeq>,
    generators: BTreeMap<String, StreamMorphism>,
    explanation: ExplanationDecl,
    constant_architecture: bool,
) -> Result<Translator, TranslatorError> {
    for o in presentation.objects() {
        if !objects.contains_key(o) {
            return Err(TranslatorError::MissingObject(o.to_string()));
        }
    }
    for name in generators.keys() {
        if presentation.generator_decl(name).is_none() {
            return Err(TranslatorError::UnknownGenerator(name.clone()));
        }
    }
    for g in presentation.generators() {
        let img = generators
            .get(&g.name)
            .ok_or_else(|| TranslatorError::MissingGenerator(g.name.clone()))?;
        let dom = translate_flat(&objects, &g.dom.flatten())?;
        let cod = translate_flat(&objects, &g.cod.flatten())?;
        if img.dom() != dom.as_slice() || img.cod() != cod.as_slice() {
            return Err(TranslatorError::GeneratorTypeMismatch {
                name: g.name.clone(),
                expected: format!("{} -> {}", show(&dom), show(&cod)),
                found: format!("{} -> {}", show(img.dom()), show(img.cod())),
            });
        }
    }
    let e = objects.get(EXPLANATION_OBJECT);
    let trivial = e.is_none_or(SpaceSeq::is_trivial);
    match (&explanation, trivial) {
        (ExplanationDecl::None, true) => {}
        (ExplanationDecl::None, false) => {
            return Err(TranslatorError::ExplanationModeMismatch(
                "E is not the singleton stream but no explanation mode is declared".into(),
            ))
        }
        (_, true) => {
            return Err(TranslatorError::ExplanationModeMismatch(
                "an explanation mode is declared but E is the singleton stream".into(),
            ))
        }
        (ExplanationDecl::Syntactic(sig) | ExplanationDecl::Semantic(sig), false) => {
            let mode = if matches!(explanation, ExplanationDecl::Syntactic(_)) {
                ExplanationMode::Syntactic
            } else {
                ExplanationMode::Semantic
            };
            if let Some(SpaceSeq::Constant(ValueSpace::Explanation(sp))) = e {
                if sp.mode != mode || &sp.signature != sig {
                    return Err(TranslatorError::ExplanationModeMismatch(format!(
                        "E carries {} but the declared mode is {mode:?} over {sig}",
                        ValueSpace::Explanation(sp.clone())
                    )));
                }
            }
        }
    }
    Ok(Translator {
        presentation,
        objects,
        generators,
        explanation,
        constant_architecture,
    })
}

impl Translator {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn object(&self, name: &str) -> Option<&SpaceSeq> {
        self.objects.get(name)
    }

    pub fn generator(&self, name: &str) -> Option<&StreamMorphism> {
        self.generators.get(name)
    }

    pub fn explanation(&self) -> &ExplanationDecl {
        &self.explanation
    }

    pub fn constant_architecture(&self) -> bool {
        self.constant_architecture
    }

    /// The wires of an object after singleton erasure.
    pub fn translate_object(&self, o: &ObjectExpr) -> Result<Vec<SpaceSeq>, TranslatorError> {
        translate_flat(&self.objects, &o.flatten())
    }

    pub fn translate_type(&self, t: &FlatType) -> Result<Vec<SpaceSeq>, TranslatorError> {
        translate_flat(&self.objects, t)
    }
}

/// The functor on morphisms, by structural recursion.
pub fn apply(t: &Translator, term: &MorphismTerm) -> Result<StreamMorphism, TranslatorError> {
    Ok(match term {
        MorphismTerm::Gen(g) => t
            .generators
            .get(&g.name)
            .cloned()
            .ok_or_else(|| TranslatorError::UnknownGenerator(g.name.clone()))?,
        MorphismTerm::Id(o) => stream_identity(t.translate_object(o)?),
        MorphismTerm::Compose(f, g) => stream_compose(&apply(t, f)?, &apply(t, g)?)?,
        MorphismTerm::Tensor(f, g) => stream_tensor(&apply(t, f)?, &apply(t, g)?),
        MorphismTerm::Symmetry(x, y) => stream_symmetry(t.translate_object(x)?, t.translate_object(y)?),
        MorphismTerm::Copy(o) => stream_copy(t.translate_object(o)?),
        MorphismTerm::Discard(o) => stream_discard(t.translate_object(o)?),
        MorphismTerm::Feedback(s, body) => stream_feedback(&apply(t, body)?, t.translate_object(s)?)?,
    })
}

/// LA exactly when `E` is the singleton stream.
pub fn classify_agent_kind(t: &Translator) -> AgentKind {
    let trivial = t.objects.get(EXPLANATION_OBJECT).is_none_or(SpaceSeq::is_trivial);
    match (&t.explanation, trivial) {
        (_, true) | (ExplanationDecl::None, _) => AgentKind::La,
        (ExplanationDecl::Syntactic(s), false) => AgentKind::SyntacticXla(s.clone()),
        (ExplanationDecl::Semantic(s), false) => AgentKind::SemanticXla(s.clone()),
    }
}

/// A translator together with the term it compiles, plus the declared roles
/// and numeric model behind the generator images.
#[derive(Clone, Debug)]
pub struct ConcreteAgent {
    pub translator: Translator,
    pub term: MorphismTerm,
    pub compiled: StreamMorphism,
    pub profile: AgentProfile,
}

impl ConcreteAgent {
    pub fn compile(translator: Translator, term: MorphismTerm) -> Result<Self, TranslatorError> {
        ConcreteAgent::compile_with(translator, term, AgentProfile::default())
    }

    pub fn compile_with(
        translator: Translator,
        term: MorphismTerm,
        profile: AgentProfile,
    ) -> Result<Self, TranslatorError> {
        let compiled = apply(&translator, &term)?;
        Ok(ConcreteAgent {
            translator,
            term,
            compiled,
            profile,
        })
    }
}

/// A random well-typed, feedback-free term with the given domain.
///
/// Leaves are generators whose domain matches exactly, identities,
/// symmetries, copies and discards; inner nodes are compositions and
/// tensors. The codomain is kept to at most `max_width` factors.
pub fn random_term(p: &Presentation, dom: &FlatType, depth: usize, rng: &mut impl Rng) -> MorphismTerm {
    const MAX_WIDTH: usize = 4;
    let id = || MorphismTerm::id(dom.to_expr());
    let n = dom.len();
    if depth == 0 || n == 0 {
        return leaf(p, dom, rng).unwrap_or_else(id);
    }
    match rng.gen_range(0..3) {
        0 if n >= 2 => {
            let k = rng.gen_range(1..n);
            let (a, b) = dom.split_at(k);
            let l = random_term(p, &a, depth - 1, rng);
            let r = random_term(p, &b, depth - 1, rng);
            let t = crate::diagram::tensor(l, r).expect("well typed");
            shrink(t, MAX_WIDTH)
        }
        1 => {
            let f = random_term(p, dom, depth - 1, rng);
            let mid = f.cod().expect("well typed");
            let g = random_term(p, &mid, depth - 1, rng);
            shrink(crate::diagram::compose(f, g).expect("boundaries match"), MAX_WIDTH)
        }
        _ => leaf(p, dom, rng).unwrap_or_else(id),
    }
}

/// `count` random terms seeded by `seed`. Domains are products of up to
/// three objects, or a generator's domain with probability 0.3.
pub fn random_terms(p: &Presentation, count: usize, depth: usize, seed: u64) -> Vec<MorphismTerm> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let objects: Vec<&str> = p.objects().collect();
    let gen_doms: Vec<FlatType> = p.generators().map(|g| g.dom.flatten()).collect();
    (0..count)
        .map(|_| {
            let dom = if !gen_doms.is_empty() && rng.gen_bool(0.3) {
                gen_doms[rng.gen_range(0..gen_doms.len())].clone()
            } else {
                let n = rng.gen_range(1..=3);
                let picked: Vec<&str> = (0..n).map(|_| objects[rng.gen_range(0..objects.len())]).collect();
                ObjectExpr::product_of(&picked).flatten()
            };
            random_term(p, &dom, depth, &mut rng)
        })
        .collect()
}

fn shrink(t: MorphismTerm, max: usize) -> MorphismTerm {
    let cod = t.cod().expect("well typed");
    if cod.len() <= max {
        return t;
    }
    let (keep, drop) = cod.split_at(max);
    let tail = crate::diagram::tensor(MorphismTerm::id(keep.to_expr()), MorphismTerm::discard(drop.to_expr()))
        .expect("well typed");
    crate::diagram::compose(t, tail).expect("boundaries match")
}

fn leaf(p: &Presentation, dom: &FlatType, rng: &mut impl Rng) -> Option<MorphismTerm> {
    let gens: Vec<MorphismTerm> = p
        .generators()
        .filter(|g| g.dom.flatten() == *dom)
        .filter_map(|g| p.generator(&g.name).ok())
        .collect();
    let whole = dom.to_expr();
    let mut options: Vec<MorphismTerm> = gens;
    options.push(MorphismTerm::id(whole.clone()));
    if !dom.is_empty() {
        options.push(MorphismTerm::copy(whole.clone()));
        options.push(MorphismTerm::discard(whole));
    }
    if dom.len() >= 2 {
        let k = rng.gen_range(1..dom.len());
        let (a, b) = dom.split_at(k);
        options.push(MorphismTerm::symmetry(a.to_expr(), b.to_expr()));
    }
    let i = rng.gen_range(0..options.len());
    Some(options.swap_remove(i))
}

/// Check extensionally, at every node of every test term, that `apply`
/// commutes with the corresponding stream operation, and that boundaries
/// translate to the translated types.
pub fn check_functor_laws(
    t: &Translator,
    terms: &[MorphismTerm],
    cfg: EqConfig,
) -> Result<Vec<LawResult>, TranslatorError> {
    let names = ["identity", "composition", "tensor", "feedback", "boundary"];
    let mut results: Vec<LawResult> = names
        .iter()
        .map(|n| LawResult {
            name: n.to_string(),
            instances: 0,
            passed: 0,
            counterexample: None,
        })
        .collect();
    let mut record = |i: usize, ok: Result<Option<String>, TranslatorError>| -> Result<(), TranslatorError> {
        let r = &mut results[i];
        r.instances += 1;
        match ok? {
            None => r.passed += 1,
            Some(c) => {
                r.counterexample.get_or_insert(c);
            }
        }
        Ok(())
    };
    let eq = |a: &StreamMorphism, b: &StreamMorphism| -> Result<Option<String>, TranslatorError> {
        Ok(extensional_check(a, b, cfg)?.map(|c| c.to_string()))
    };
    for o in t.presentation.objects() {
        let obj = ObjectExpr::base(o);
        let lhs = apply(t, &MorphismTerm::id(obj.clone()))?;
        record(0, eq(&lhs, &stream_identity(t.translate_object(&obj)?)))?;
    }
    for term in terms {
        let mut nodes = Vec::new();
        term.walk(&mut |s| nodes.push(s.clone()));
        for node in nodes {
            let whole = apply(t, &node)?;
            let (dom, cod) = node.infer_type()?;
            let bdy_ok = whole.dom() == t.translate_type(&dom)?.as_slice()
                && whole.cod() == t.translate_type(&cod)?.as_slice();
            record(4, Ok((!bdy_ok).then(|| format!("boundary of {node}"))))?;
            match &node {
                MorphismTerm::Compose(f, g) => {
                    let rhs = stream_compose(&apply(t, f)?, &apply(t, g)?)?;
                    record(1, eq(&whole, &rhs))?;
                }
                MorphismTerm::Tensor(f, g) => {
                    let rhs = stream_tensor(&apply(t, f)?, &apply(t, g)?);
                    record(2, eq(&whole, &rhs))?;
                }
                MorphismTerm::Feedback(s, body) => {
                    let rhs = stream_feedback(&apply(t, body)?, t.translate_object(s)?)?;
                    record(3, eq(&whole, &rhs))?;
                }
                _ => {}
            }
        }
    }
    Ok(results)
}
