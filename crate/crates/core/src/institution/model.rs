use std::collections::BTreeMap;
use std::fmt;

use super::signature::{Signature, SignatureMorphism};
use super::InstitutionError;

#[derive(Clone, Debug, PartialEq)]
pub enum Interpretation {
    Truth(BTreeMap<String, bool>),
    /// Degrees in `[0, 1]`; `S(c)` holds iff the degree of `c` is at least `tau`.
    Degrees { degrees: BTreeMap<String, f64>, tau: f64 },
}

/// A model of a signature.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticModel {
    signature: Signature,
    interp: Interpretation,
}

pub const DEFAULT_TAU: f64 = 0.5;

impl SemanticModel {
    pub fn new(signature: Signature, interp: Interpretation) -> Result<Self, InstitutionError> {
        let bad = |m: String| Err(InstitutionError::MalformedModel(m));
        let atoms = signature.atoms();
        match (&signature, &interp) {
            (Signature::Pl { .. }, Interpretation::Truth(t)) => {
                if t.len() != atoms.len() || atoms.iter().any(|a| !t.contains_key(a)) {
                    return bad(format!("truth assignment is not total over {signature}"));
                }
            }
            (Signature::Relevance { .. }, Interpretation::Degrees { degrees, tau }) => {
                if degrees.len() != atoms.len() || atoms.iter().any(|a| !degrees.contains_key(a)) {
                    return bad(format!("degrees are not total over {signature}"));
                }
                if let Some((c, d)) = degrees.iter().find(|(_, d)| !(0.0..=1.0).contains(*d)) {
                    return bad(format!("degree of `{c}` is {d}, outside [0, 1]"));
                }
                if !(*tau > 0.0 && *tau < 1.0) {
                    return bad(format!("threshold {tau} is outside (0, 1)"));
                }
            }
            _ => return bad("interpretation does not fit the institution".into()),
        }
        Ok(SemanticModel { signature, interp })
    }

    pub fn truth<S: AsRef<str>>(signature: Signature, assignment: &[(S, bool)]) -> Result<Self, InstitutionError> {
        let t = assignment.iter().map(|(k, v)| (k.as_ref().to_string(), *v)).collect();
        SemanticModel::new(signature, Interpretation::Truth(t))
    }

    /// Degrees given in the signature's constant order.
    pub fn degrees(signature: Signature, degrees: &[f64], tau: f64) -> Result<Self, InstitutionError> {
        if degrees.len() != signature.atoms().len() {
            return Err(InstitutionError::MalformedModel(format!(
                "{} degrees for {} constants",
                degrees.len(),
                signature.atoms().len()
            )));
        }
        let degrees = signature.atoms().iter().cloned().zip(degrees.iter().copied()).collect();
        SemanticModel::new(signature, Interpretation::Degrees { degrees, tau })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn interpretation(&self) -> &Interpretation {
        &self.interp
    }

    /// Truth value of a proposition, or whether a constant is relevant.
    pub fn holds(&self, atom: &str) -> Option<bool> {
        match &self.interp {
            Interpretation::Truth(t) => t.get(atom).copied(),
            Interpretation::Degrees { degrees, tau } => degrees.get(atom).map(|d| *d >= *tau),
        }
    }

    pub fn degree(&self, constant: &str) -> Option<f64> {
        match &self.interp {
            Interpretation::Degrees { degrees, .. } => degrees.get(constant).copied(),
            Interpretation::Truth(_) => None,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match &self.interp {
            Interpretation::Degrees { tau, .. } => Some(*tau),
            Interpretation::Truth(_) => None,
        }
    }

    /// Values in the signature's symbol order.
    pub fn degree_vector(&self) -> Vec<f64> {
        self.signature
            .atoms()
            .iter()
            .map(|a| match &self.interp {
                Interpretation::Truth(t) => f64::from(u8::from(t[a])),
                Interpretation::Degrees { degrees, .. } => degrees[a],
            })
            .collect()
    }
}

impl fmt::Display for SemanticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.signature.atoms() {
            match &self.interp {
                Interpretation::Truth(t) => writeln!(f, "{a} = {}", t[a])?,
                Interpretation::Degrees { degrees, .. } => writeln!(f, "{a} = {:.4}", degrees[a])?,
            }
        }
        if let Some(tau) = self.tau() {
            writeln!(f, "tau = {tau}")?;
        }
        Ok(())
    }
}

/// The model along `rho` of a model over `rho`'s target.
pub fn reduct_model(rho: &SignatureMorphism, m: &SemanticModel) -> Result<SemanticModel, InstitutionError> {
    if m.signature() != rho.target() {
        return Err(InstitutionError::SignatureMismatch(format!(
            "model is over {}, morphism targets {}",
            m.signature(),
            rho.target()
        )));
    }
    let image = |a: &String| rho.apply(a).expect("morphism is total").to_string();
    let atoms = rho.source().atoms();
    let interp = match &m.interp {
        Interpretation::Truth(t) => Interpretation::Truth(atoms.iter().map(|a| (a.clone(), t[&image(a)])).collect()),
        Interpretation::Degrees { degrees, tau } => Interpretation::Degrees {
            degrees: atoms.iter().map(|a| (a.clone(), degrees[&image(a)])).collect(),
            tau: *tau,
        },
    };
    Ok(SemanticModel {
        signature: rho.source().clone(),
        interp,
    })
}

/// Parse `name = value` lines (`true`/`false` for propositional models,
/// degrees plus an optional `tau = ...` line for relevance models). Blank lines
/// and `#` comments are skipped.
pub fn parse_model(src: &str, signature: &Signature) -> Result<SemanticModel, InstitutionError> {
    let mut values = BTreeMap::new();
    let mut tau = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: &str| InstitutionError::MalformedModel(format!("line {}: {m}", i + 1));
        let (k, v) = line.split_once('=').ok_or_else(|| bad("expected `name = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k == "tau" && signature.kind() == super::InstitutionKind::UnaryRelevance {
            tau = Some(v.parse::<f64>().map_err(|_| bad("tau is not a number"))?);
        } else {
            values.insert(k.to_string(), v.to_string());
        }
    }
    let interp = match signature {
        Signature::Pl { .. } => Interpretation::Truth(
            values
                .into_iter()
                .map(|(k, v)| match v.as_str() {
                    "true" | "1" => Ok((k, true)),
                    "false" | "0" => Ok((k, false)),
                    _ => Err(InstitutionError::MalformedModel(format!("`{k}` is not boolean"))),
                })
                .collect::<Result<_, _>>()?,
        ),
        Signature::Relevance { .. } => Interpretation::Degrees {
            degrees: values
                .into_iter()
                .map(|(k, v)| {
                    v.parse::<f64>()
                        .map(|d| (k.clone(), d))
                        .map_err(|_| InstitutionError::MalformedModel(format!("`{k}` is not a number")))
                })
                .collect::<Result<_, _>>()?,
            tau: tau.unwrap_or(DEFAULT_TAU),
        },
    };
    SemanticModel::new(signature.clone(), interp)
}
