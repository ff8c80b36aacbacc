//! Institutions for explanations: propositional logic and a unary relevance
//! logic, with signature morphisms, sentence translation and model reducts.

mod model;
mod sentence;
mod signature;

use std::fmt;

use rand::Rng;
use thiserror::Error;

pub use model::{parse_model, reduct_model, Interpretation, SemanticModel, DEFAULT_TAU};
pub use sentence::{parse_sentence, translate_sentence, Sentence};
pub use signature::{expressive_equivalence, InstitutionKind, Signature, SignatureMorphism};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum InstitutionError {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("malformed sentence: {0}")]
    MalformedSentence(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid signature morphism: {0}")]
    InvalidMorphism(String),
    #[error("parse error at column {col}: {message}")]
    Parse { col: usize, message: String },
}

/// `m |= s`.
pub fn satisfies(m: &SemanticModel, s: &Sentence) -> Result<bool, InstitutionError> {
    s.check(m.signature())
        .map_err(|e| InstitutionError::SignatureMismatch(e.to_string()))?;
    Ok(eval(m, s))
}

fn eval(m: &SemanticModel, s: &Sentence) -> bool {
    match s {
        Sentence::Top => true,
        Sentence::Prop(a) | Sentence::PredApp(_, a) => m.holds(a).expect("checked"),
        Sentence::Not(a) => !eval(m, a),
        Sentence::And(a, b) => eval(m, a) && eval(m, b),
        Sentence::Or(a, b) => eval(m, a) || eval(m, b),
        Sentence::Implies(a, b) => !eval(m, a) || eval(m, b),
    }
}

/// Whether `m' |= rho(s)` agrees with `reduct(m') |= s`.
pub fn check_satisfaction_condition(
    rho: &SignatureMorphism,
    m: &SemanticModel,
    s: &Sentence,
) -> Result<bool, InstitutionError> {
    let lhs = satisfies(m, &translate_sentence(rho, s)?)?;
    let rhs = satisfies(&reduct_model(rho, m)?, s)?;
    Ok(lhs == rhs)
}

/// Outcome of a batch of satisfaction-condition checks.
#[derive(Clone, Debug, Default)]
pub struct SatisfactionReport {
    pub checked: usize,
    pub violations: Vec<(SemanticModel, Sentence)>,
}

impl SatisfactionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, rho: &SignatureMorphism, m: &SemanticModel, s: &Sentence) -> Result<(), InstitutionError> {
        self.checked += 1;
        if !check_satisfaction_condition(rho, m, s)? {
            self.violations.push((m.clone(), s.clone()));
        }
        Ok(())
    }
}

/// Check the satisfaction condition on `trials` random target models and
/// source sentences.
pub fn satisfaction_trials(
    rho: &SignatureMorphism,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<SatisfactionReport, InstitutionError> {
    let mut report = SatisfactionReport::default();
    for _ in 0..trials {
        let m = random_model(rho.target(), rng);
        let s = random_sentence(rho.source(), 4, rng);
        report.record(rho, &m, &s)?;
    }
    Ok(report)
}

/// Check the satisfaction condition on every model from [`enumerate_models`]
/// and every sentence from [`enumerate_sentences`] up to `depth`.
pub fn satisfaction_exhaustive(rho: &SignatureMorphism, depth: usize) -> Result<SatisfactionReport, InstitutionError> {
    let mut report = SatisfactionReport::default();
    let sentences = enumerate_sentences(rho.source(), depth);
    for m in enumerate_models(rho.target()) {
        for s in &sentences {
            report.record(rho, &m, s)?;
        }
    }
    Ok(report)
}

fn atom(sig: &Signature, name: &str) -> Sentence {
    match sig.predicate() {
        Some(p) => Sentence::pred(p, name),
        None => Sentence::prop(name),
    }
}

/// A random sentence of depth at most `depth`.
pub fn random_sentence(sig: &Signature, depth: usize, rng: &mut impl Rng) -> Sentence {
    let atoms = sig.atoms();
    let leaf = depth == 0 || atoms.is_empty() || rng.gen_bool(0.3);
    if leaf {
        if atoms.is_empty() || rng.gen_ratio(1, 10) {
            return Sentence::Top;
        }
        return atom(sig, &atoms[rng.gen_range(0..atoms.len())]);
    }
    let op = rng.gen_range(0..4);
    let a = random_sentence(sig, depth - 1, rng);
    if op == 0 {
        return Sentence::not(a);
    }
    let b = random_sentence(sig, depth - 1, rng);
    match op {
        1 => Sentence::and(a, b),
        2 => Sentence::or(a, b),
        _ => Sentence::implies(a, b),
    }
}

/// A random model; relevance thresholds are drawn from `(0.05, 0.95)`.
pub fn random_model(sig: &Signature, rng: &mut impl Rng) -> SemanticModel {
    match sig {
        Signature::Pl { props } => {
            let t: Vec<(String, bool)> = props.iter().map(|p| (p.clone(), rng.gen())).collect();
            SemanticModel::truth(sig.clone(), &t).expect("total")
        }
        Signature::Relevance { constants, .. } => {
            let d: Vec<f64> = constants.iter().map(|_| rng.gen_range(0.0..=1.0)).collect();
            let tau = rng.gen_range(0.05..0.95);
            SemanticModel::degrees(sig.clone(), &d, tau).expect("in range")
        }
    }
}

/// Every sentence of depth at most `depth` built from the signature's atoms,
/// `true` and the four connectives.
pub fn enumerate_sentences(sig: &Signature, depth: usize) -> Vec<Sentence> {
    let mut all: Vec<Sentence> = std::iter::once(Sentence::Top)
        .chain(sig.atoms().iter().map(|a| atom(sig, a)))
        .collect();
    for _ in 0..depth {
        let prev = all.clone();
        let mut next = prev.clone();
        next.extend(prev.iter().map(|a| Sentence::not(a.clone())));
        for a in &prev {
            for b in &prev {
                next.push(Sentence::and(a.clone(), b.clone()));
                next.push(Sentence::or(a.clone(), b.clone()));
                next.push(Sentence::implies(a.clone(), b.clone()));
            }
        }
        next.sort();
        next.dedup();
        all = next;
    }
    all
}

/// Every propositional model, or for relevance signatures every assignment of
/// degrees from `{0, 0.25, 0.5, 0.75, 1}` with thresholds `0.3` and `0.5`.
/// For satisfaction only the side of the threshold matters, so this covers
/// every distinguishable relevance model.
pub fn enumerate_models(sig: &Signature) -> Vec<SemanticModel> {
    let n = sig.atoms().len();
    match sig {
        Signature::Pl { props } => (0..1u32 << n)
            .map(|bits| {
                let t: Vec<(String, bool)> = props
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.clone(), bits >> i & 1 == 1))
                    .collect();
                SemanticModel::truth(sig.clone(), &t).expect("total")
            })
            .collect(),
        Signature::Relevance { .. } => {
            const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
            let mut out = Vec::new();
            for tau in [0.3, 0.5] {
                for code in 0..GRID.len().pow(n as u32) {
                    let mut c = code;
                    let d: Vec<f64> = (0..n)
                        .map(|_| {
                            let v = GRID[c % GRID.len()];
                            c /= GRID.len();
                            v
                        })
                        .collect();
                    out.push(SemanticModel::degrees(sig.clone(), &d, tau).expect("in range"));
                }
            }
            out
        }
    }
}

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum ExplanationMode {
    Syntactic,
    Semantic,
}

/// A set of sentences or a model, tagged with its signature.
#[derive(Clone, Debug, PartialEq)]
pub enum Explanation {
    Syntactic {
        signature: Signature,
        sentences: Vec<Sentence>,
    },
    Semantic {
        signature: Signature,
        model: SemanticModel,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExplanationPayload {
    Sentences(Vec<Sentence>),
    Model(SemanticModel),
}

impl Explanation {
    pub fn signature(&self) -> &Signature {
        match self {
            Explanation::Syntactic { signature, .. } | Explanation::Semantic { signature, .. } => signature,
        }
    }

    pub fn mode(&self) -> ExplanationMode {
        match self {
            Explanation::Syntactic { .. } => ExplanationMode::Syntactic,
            Explanation::Semantic { .. } => ExplanationMode::Semantic,
        }
    }

    pub fn model(&self) -> Option<&SemanticModel> {
        match self {
            Explanation::Semantic { model, .. } => Some(model),
            Explanation::Syntactic { .. } => None,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        match self {
            Explanation::Syntactic { sentences, .. } => sentences,
            Explanation::Semantic { .. } => &[],
        }
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Explanation::Syntactic { sentences, .. } => {
                let parts: Vec<String> = sentences.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", parts.join("; "))
            }
            Explanation::Semantic { model, .. } => {
                let sig = model.signature();
                let parts: Vec<String> = sig
                    .atoms()
                    .iter()
                    .zip(model.degree_vector())
                    .map(|(a, v)| format!("{a}={v:.4}"))
                    .collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

/// Validate a payload against `signature` and tag it.
pub fn make_explanation(payload: ExplanationPayload, signature: &Signature) -> Result<Explanation, InstitutionError> {
    match payload {
        ExplanationPayload::Sentences(sentences) => {
            for s in &sentences {
                s.check(signature)?;
            }
            Ok(Explanation::Syntactic {
                signature: signature.clone(),
                sentences,
            })
        }
        ExplanationPayload::Model(model) => {
            if model.signature() != signature {
                return Err(InstitutionError::MalformedModel(format!(
                    "model is over {}, expected {signature}",
                    model.signature()
                )));
            }
            Ok(Explanation::Semantic {
                signature: signature.clone(),
                model,
            })
        }
    }
}

/// The conjunction of `S(c)` over all constants at or above the threshold,
/// in signature order.
pub fn saliency_syntactic(m: &SemanticModel) -> Result<Explanation, InstitutionError> {
    let sig = m.signature();
    let Some(pred) = sig.predicate() else {
        return Err(InstitutionError::SignatureMismatch(
            "saliency needs a relevance model".into(),
        ));
    };
    let conj = Sentence::conjunction(
        sig.atoms()
            .iter()
            .filter(|c| m.holds(c) == Some(true))
            .map(|c| Sentence::pred(pred, c.as_str())),
    );
    make_explanation(ExplanationPayload::Sentences(vec![conj]), sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn planes() -> Signature {
        Signature::pl(&["x_flies", "x_animal", "x_plane"]).unwrap()
    }

    #[test]
    fn propositional_satisfaction() {
        let sig = planes();
        let s = parse_sentence("x_flies & !x_animal -> x_plane").unwrap();
        let m = SemanticModel::truth(
            sig.clone(),
            &[("x_flies", true), ("x_animal", false), ("x_plane", true)],
        )
        .unwrap();
        assert!(satisfies(&m, &s).unwrap());
        let m2 = SemanticModel::truth(sig, &[("x_flies", true), ("x_animal", false), ("x_plane", false)]).unwrap();
        assert!(!satisfies(&m2, &s).unwrap());
    }

    #[test]
    fn relevance_threshold() {
        let sig = Signature::relevance("S", &["p1", "p2", "p3", "p4"]).unwrap();
        let m = SemanticModel::degrees(sig, &[0.0, 0.0, 0.7, 0.2], 0.5).unwrap();
        assert!(satisfies(&m, &Sentence::pred("S", "p3")).unwrap());
        assert!(!satisfies(&m, &Sentence::pred("S", "p4")).unwrap());
        assert!(matches!(
            satisfies(&m, &Sentence::prop("p3")),
            Err(InstitutionError::SignatureMismatch(_))
        ));
    }

    #[test]
    fn saliency_collects_relevant_constants() {
        let sig = Signature::relevance("S", &["p1", "p2", "p3"]).unwrap();
        let m = SemanticModel::degrees(sig.clone(), &[0.9, 0.1, 0.6], 0.5).unwrap();
        let e = saliency_syntactic(&m).unwrap();
        assert_eq!(e.sentences()[0].to_string(), "S(p1) & S(p3)");
        assert!(satisfies(&m, &e.sentences()[0]).unwrap());
        let low = SemanticModel::degrees(sig, &[0.1, 0.1, 0.1], 0.5).unwrap();
        assert_eq!(saliency_syntactic(&low).unwrap().sentences(), &[Sentence::Top]);
    }

    #[test]
    fn explanation_validation() {
        let sig = planes();
        let ok = make_explanation(
            ExplanationPayload::Sentences(vec![parse_sentence("x_flies & !x_animal -> x_plane").unwrap()]),
            &sig,
        );
        assert!(ok.is_ok());
        let bad = make_explanation(ExplanationPayload::Sentences(vec![Sentence::prop("x_boat")]), &sig);
        assert!(matches!(bad, Err(InstitutionError::MalformedSentence(_))));
    }

    #[test]
    fn sentence_display_parses_back() {
        let sig = Signature::pl(&["a", "b", "c"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let s = random_sentence(&sig, 4, &mut rng);
            assert_eq!(parse_sentence(&s.to_string()).unwrap(), s, "{s}");
        }
    }

    #[test]
    fn morphisms_validate() {
        let a = Signature::relevance("S", &["p1", "p2"]).unwrap();
        let b = Signature::relevance("R", &["f1", "f2", "f3"]).unwrap();
        let rho = expressive_equivalence(&a, &b);
        assert!(rho.is_none());
        let map = [("S", "R"), ("p1", "f2"), ("p2", "f2")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        assert!(SignatureMorphism::new(a.clone(), b.clone(), map).is_err());
        let map = [("S", "R"), ("p1", "f3"), ("p2", "f1")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let rho = SignatureMorphism::new(a, b, map).unwrap();
        assert!(rho.inverse().is_none());
    }

    #[test]
    fn model_file_parses() {
        let sig = Signature::relevance("S", &["p1", "p2"]).unwrap();
        let m = parse_model("p1 = 0.73\np2 = 0.1 # low\ntau = 0.6\n", &sig).unwrap();
        assert_eq!(m.degree("p1"), Some(0.73));
        assert_eq!(m.tau(), Some(0.6));
        assert!(parse_model("p1 = 1.5\np2 = 0", &sig).is_err());
    }
}
