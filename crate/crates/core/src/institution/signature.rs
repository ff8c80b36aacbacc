use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::InstitutionError;

#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum InstitutionKind {
    /// Propositional logic.
    Pl,
    /// One unary predicate over a finite set of constants, interpreted by
    /// relevance degrees and a threshold.
    UnaryRelevance,
}

/// A vocabulary of symbols.
#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum Signature {
    Pl { props: Vec<String> },
    Relevance { predicate: String, constants: Vec<String> },
}

fn check_unique<'a>(names: impl IntoIterator<Item = &'a String>) -> Result<(), InstitutionError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(InstitutionError::InvalidSignature(format!("duplicate symbol `{n}`")));
        }
    }
    Ok(())
}

impl Signature {
    pub fn pl<S: AsRef<str>>(props: &[S]) -> Result<Self, InstitutionError> {
        let props: Vec<String> = props.iter().map(|s| s.as_ref().to_string()).collect();
        check_unique(&props)?;
        Ok(Signature::Pl { props })
    }

    pub fn relevance<S: AsRef<str>>(predicate: &str, constants: &[S]) -> Result<Self, InstitutionError> {
        let constants: Vec<String> = constants.iter().map(|s| s.as_ref().to_string()).collect();
        check_unique(constants.iter().chain(std::iter::once(&predicate.to_string())))?;
        Ok(Signature::Relevance {
            predicate: predicate.to_string(),
            constants,
        })
    }

    pub fn kind(&self) -> InstitutionKind {
        match self {
            Signature::Pl { .. } => InstitutionKind::Pl,
            Signature::Relevance { .. } => InstitutionKind::UnaryRelevance,
        }
    }

    /// Propositions, or the relevance constants.
    pub fn atoms(&self) -> &[String] {
        match self {
            Signature::Pl { props } => props,
            Signature::Relevance { constants, .. } => constants,
        }
    }

    pub fn predicate(&self) -> Option<&str> {
        match self {
            Signature::Pl { .. } => None,
            Signature::Relevance { predicate, .. } => Some(predicate),
        }
    }

    /// Every symbol, the predicate first.
    pub fn symbols(&self) -> Vec<String> {
        self.predicate()
            .map(str::to_string)
            .into_iter()
            .chain(self.atoms().iter().cloned())
            .collect()
    }

    pub fn has_atom(&self, name: &str) -> bool {
        self.atoms().iter().any(|a| a == name)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signature::Pl { props } => write!(f, "PL{{{}}}", props.join(", ")),
            Signature::Relevance {
                predicate,
                constants,
            } => write!(f, "{predicate}/1 over {{{}}}", constants.join(", ")),
        }
    }
}

/// An injective, arity-preserving renaming of symbols.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct SignatureMorphism {
    source: Signature,
    target: Signature,
    map: BTreeMap<String, String>,
}

impl SignatureMorphism {
    /// `map` must cover every source symbol, predicates included.
    pub fn new(
        source: Signature,
        target: Signature,
        map: BTreeMap<String, String>,
    ) -> Result<Self, InstitutionError> {
        let bad = |m: String| Err(InstitutionError::InvalidMorphism(m));
        if source.kind() != target.kind() {
            return bad("source and target belong to different institutions".into());
        }
        if let (Some(p), Some(q)) = (source.predicate(), target.predicate()) {
            if map.get(p).map(String::as_str) != Some(q) {
                return bad(format!("predicate `{p}` must map to `{q}`"));
            }
        }
        let mut images = BTreeSet::new();
        for a in source.atoms() {
            let Some(img) = map.get(a) else {
                return bad(format!("symbol `{a}` is not mapped"));
            };
            if !target.has_atom(img) {
                return bad(format!("`{a}` maps to `{img}`, which is not a target symbol of the same sort"));
            }
            if !images.insert(img) {
                return bad(format!("`{img}` is hit twice"));
            }
        }
        let expected = source.symbols().len();
        if map.len() != expected {
            return bad("map mentions symbols outside the source signature".into());
        }
        Ok(SignatureMorphism { source, target, map })
    }

    pub fn identity(sig: &Signature) -> Self {
        let map = sig.symbols().into_iter().map(|s| (s.clone(), s)).collect();
        SignatureMorphism {
            source: sig.clone(),
            target: sig.clone(),
            map,
        }
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn apply(&self, symbol: &str) -> Option<&str> {
        self.map.get(symbol).map(String::as_str)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SignatureMorphism) -> Result<Self, InstitutionError> {
        if self.target != next.source {
            return Err(InstitutionError::SignatureMismatch(format!(
                "cannot compose: {} is not {}",
                self.target, next.source
            )));
        }
        let map = self
            .map
            .iter()
            .map(|(k, v)| (k.clone(), next.map[v].clone()))
            .collect();
        Ok(SignatureMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            map,
        })
    }

    /// The inverse, when the morphism is bijective.
    pub fn inverse(&self) -> Option<Self> {
        if self.source.symbols().len() != self.target.symbols().len() {
            return None;
        }
        let map = self.map.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        SignatureMorphism::new(self.target.clone(), self.source.clone(), map).ok()
    }
}

/// The order-respecting bijection between two signatures of equal size.
pub fn expressive_equivalence(a: &Signature, b: &Signature) -> Option<SignatureMorphism> {
    if a.kind() != b.kind() || a.atoms().len() != b.atoms().len() {
        return None;
    }
    let map = a.symbols().into_iter().zip(b.symbols()).collect();
    SignatureMorphism::new(a.clone(), b.clone(), map).ok()
}
