//! Concrete agents: the numeric kernel, builders for learning agents and
//! explainers, training runs, and classification against the taxonomy.

mod build;
mod mlp;
mod predictor;
mod table;
mod train;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::diagram::DiagramError;
use crate::institution::InstitutionError;
use crate::stream::{SpaceSeq, StreamError, Value, ValueSpace};
use crate::translator::{classify_agent_kind, AgentKind, ConcreteAgent, TranslatorError};

pub use build::{
    build_autoencoder, build_explainer, build_mlp_agent, build_nas_agent, build_rnn_agent, ExplainerConfig,
};
pub use mlp::*;
pub use predictor::{BaseModel, Predictor};
pub use table::{witness_matches, TableRow};
pub use train::{parse_dataset, run_training, run_training_along, Sample, TrainingRun};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("no explainer of kind {0}")]
    UnsupportedKind(WiringKind),
    #[error("wiring matches several kinds: {0:?}")]
    AmbiguousWiring(Vec<WiringKind>),
    #[error("wiring matches no known kind: {0}")]
    Unclassified(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
    #[error(transparent)]
    Translator(#[from] TranslatorError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Institution(#[from] InstitutionError),
}

/// How an agent's input wires relate to the model it explains.
#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum WiringKind {
    PostHoc,
    Intrinsic,
    ModelAgnostic,
    ModelSpecific,
    ForwardBased,
    BackwardBased,
    Cbm,
    PlainLA,
}

impl WiringKind {
    pub const ALL: [WiringKind; 8] = [
        WiringKind::PostHoc,
        WiringKind::Intrinsic,
        WiringKind::ModelAgnostic,
        WiringKind::ModelSpecific,
        WiringKind::ForwardBased,
        WiringKind::BackwardBased,
        WiringKind::Cbm,
        WiringKind::PlainLA,
    ];

    /// The kinds [`build_explainer`] constructs.
    pub const BUILDABLE: [WiringKind; 7] = [
        WiringKind::PostHoc,
        WiringKind::Intrinsic,
        WiringKind::ModelAgnostic,
        WiringKind::ModelSpecific,
        WiringKind::ForwardBased,
        WiringKind::BackwardBased,
        WiringKind::Cbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WiringKind::PostHoc => "post-hoc",
            WiringKind::Intrinsic => "intrinsic",
            WiringKind::ModelAgnostic => "model-agnostic",
            WiringKind::ModelSpecific => "model-specific",
            WiringKind::ForwardBased => "forward-based",
            WiringKind::BackwardBased => "backward-based",
            WiringKind::Cbm => "cbm",
            WiringKind::PlainLA => "plain",
        }
    }
}

impl fmt::Display for WiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WiringKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        WiringKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| AgentError::InvalidSpec(format!("unknown explainer kind `{s}`")))
    }
}

/// What one factor of an agent's `X` carries.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum InputRole {
    /// Entries of the dataset.
    Data,
    /// The explained model's output.
    Prediction,
    /// The explained model's parameters; `frozen` when they are those of a
    /// trained model rather than the live ones.
    ModelParams { frozen: bool },
    /// The loss gradient with respect to the explained model's parameters.
    LossGradient,
    /// A recurrent state threaded through the data.
    RecurrentState,
}

/// Turns a dataset sample and the explained model's parameters into the
/// values of one step on the agent's input boundary.
pub type Encoder = Arc<dyn Fn(&Sample, &[f64]) -> Vec<Value> + Send + Sync>;

/// Declared structure of a concrete agent beyond its translator.
#[derive(Clone, Default)]
pub struct AgentProfile {
    /// Factors of `X`, with their spaces.
    pub roles: Vec<(InputRole, ValueSpace)>,
    pub predictor: Option<Predictor>,
    /// Flat parameters used at step 0.
    pub init_params: Vec<f64>,
    pub loss: Option<Loss>,
    /// The model an explainer explains.
    pub base: Option<BaseModel>,
    pub encoder: Option<Encoder>,
}

impl fmt::Debug for AgentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgentProfile")
            .field("roles", &self.roles)
            .field("predictor", &self.predictor)
            .field("loss", &self.loss)
            .field("base", &self.base)
            .finish_non_exhaustive()
    }
}

impl AgentProfile {
    pub fn role_kinds(&self) -> Vec<InputRole> {
        self.roles.iter().map(|(r, _)| *r).collect()
    }

    /// The space of `X` the roles describe: the single role space, or the
    /// product of all of them.
    pub fn input_space(&self) -> ValueSpace {
        match self.roles.as_slice() {
            [] => ValueSpace::Singleton,
            [(_, s)] => s.clone(),
            rs => ValueSpace::ProductSpace(rs.iter().map(|(_, s)| s.clone()).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaxonomyLabel {
    pub kind: WiringKind,
    pub agent_kind: AgentKind,
    pub supervised: bool,
    pub constant_architecture: bool,
}

impl fmt::Display for TaxonomyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let agent = match &self.agent_kind {
            AgentKind::La => "LA",
            AgentKind::SyntacticXla(_) => "syntactic_XLA",
            AgentKind::SemanticXla(_) => "semantic_XLA",
        };
        write!(
            f,
            "kind={} agent={agent} supervised={} constant_architecture={}",
            self.kind, self.supervised, self.constant_architecture
        )
    }
}

fn object_trivial(agent: &ConcreteAgent, name: &str) -> bool {
    agent.translator.object(name).is_none_or(SpaceSeq::is_trivial)
}

fn params_shape(agent: &ConcreteAgent) -> Option<usize> {
    match agent.translator.object("P")? {
        s if s.is_trivial() => None,
        SpaceSeq::Constant(ValueSpace::ProductSpace(fs)) => Some(fs.len()),
        _ => Some(1),
    }
}

fn pattern_matches(kind: WiringKind, agent: &ConcreteAgent) -> bool {
    use InputRole::*;
    let roles = agent.profile.role_kinds();
    let explains = !object_trivial(agent, "E");
    if kind == WiringKind::PlainLA {
        return !explains && roles.iter().all(|r| matches!(r, Data | RecurrentState));
    }
    if !explains {
        return false;
    }
    match kind {
        WiringKind::PostHoc => roles == [Prediction, Data, ModelParams { frozen: true }],
        WiringKind::ModelSpecific => roles == [Prediction, Data, ModelParams { frozen: false }],
        WiringKind::ModelAgnostic => roles == [Prediction, Data],
        WiringKind::ForwardBased => matches!(roles.as_slice(), [Data, ModelParams { .. }]),
        WiringKind::BackwardBased => roles == [Data, LossGradient],
        WiringKind::Intrinsic => roles == [Data] && matches!(params_shape(agent), Some(n) if n != 2),
        WiringKind::Cbm => roles == [Data] && params_shape(agent) == Some(2),
        WiringKind::PlainLA => unreachable!(),
    }
}

/// Match the declared input roles and boundary shapes against the taxonomy.
/// Numeric behaviour plays no part.
pub fn classify(agent: &ConcreteAgent) -> Result<TaxonomyLabel, AgentError> {
    let x = agent
        .translator
        .object("X")
        .ok_or_else(|| AgentError::Unclassified("no object X".into()))?;
    let declared = SpaceSeq::Constant(agent.profile.input_space());
    if !agent.profile.roles.is_empty() && *x != declared {
        return Err(AgentError::SpaceMismatch(format!(
            "X is {x} but the declared roles give {declared}"
        )));
    }
    let found: Vec<WiringKind> = WiringKind::ALL
        .into_iter()
        .filter(|k| pattern_matches(*k, agent))
        .collect();
    let kind = match found.as_slice() {
        [k] => *k,
        [] => {
            return Err(AgentError::Unclassified(format!(
                "roles {:?} with E {}",
                agent.profile.role_kinds(),
                if object_trivial(agent, "E") { "trivial" } else { "nontrivial" }
            )))
        }
        _ => return Err(AgentError::AmbiguousWiring(found)),
    };
    Ok(TaxonomyLabel {
        kind,
        agent_kind: classify_agent_kind(&agent.translator),
        supervised: !object_trivial(agent, "Y*"),
        constant_architecture: agent.translator.constant_architecture(),
    })
}
