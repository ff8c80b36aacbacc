//! Rows of the learning-scheme and learning-model tables, each with a
//! constructible witness and a check of its shape columns.

use std::fmt;

use crate::stream::{SpaceSeq, ValueSpace};
use crate::translator::ConcreteAgent;

use super::build::{build_autoencoder, build_explainer, build_mlp_agent, build_nas_agent, build_rnn_agent, ExplainerConfig};
use super::mlp::{Loss, MlpSpec, OptimizerSpec};
use super::predictor::Predictor;
use super::train::trivial;
use super::{AgentError, InputRole, WiringKind};

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum TableRow {
    GeneralUnsupervised,
    GeneralSupervised,
    GeneralContinual,
    GeneralExplaining,
    Mlp,
    Rnn,
    Nas,
    Cbm,
    PostHoc,
    Intrinsic,
    ModelAgnostic,
    ModelSpecific,
    BackwardBased,
    ForwardBased,
}

impl TableRow {
    pub const ALL: [TableRow; 14] = [
        TableRow::GeneralUnsupervised,
        TableRow::GeneralSupervised,
        TableRow::GeneralContinual,
        TableRow::GeneralExplaining,
        TableRow::Mlp,
        TableRow::Rnn,
        TableRow::Nas,
        TableRow::Cbm,
        TableRow::PostHoc,
        TableRow::Intrinsic,
        TableRow::ModelAgnostic,
        TableRow::ModelSpecific,
        TableRow::BackwardBased,
        TableRow::ForwardBased,
    ];

    /// 1 for learning schemes, 2 for learning models.
    pub fn table(self) -> u8 {
        match self {
            TableRow::GeneralUnsupervised
            | TableRow::GeneralSupervised
            | TableRow::GeneralContinual
            | TableRow::GeneralExplaining => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TableRow::GeneralUnsupervised => "general unsupervised",
            TableRow::GeneralSupervised => "general supervised",
            TableRow::GeneralContinual => "general continual",
            TableRow::GeneralExplaining => "general explaining",
            TableRow::Mlp => "mlp",
            TableRow::Rnn => "rnn",
            TableRow::Nas => "architecture search",
            TableRow::Cbm => "cbm",
            TableRow::PostHoc => "post-hoc explainer",
            TableRow::Intrinsic => "intrinsic explainer",
            TableRow::ModelAgnostic => "model-agnostic explainer",
            TableRow::ModelSpecific => "model-specific explainer",
            TableRow::BackwardBased => "backward-based explainer",
            TableRow::ForwardBased => "forward-based explainer",
        }
    }

    fn explainer_kind(self) -> Option<WiringKind> {
        Some(match self {
            TableRow::GeneralExplaining | TableRow::PostHoc => WiringKind::PostHoc,
            TableRow::Cbm => WiringKind::Cbm,
            TableRow::Intrinsic => WiringKind::Intrinsic,
            TableRow::ModelAgnostic => WiringKind::ModelAgnostic,
            TableRow::ModelSpecific => WiringKind::ModelSpecific,
            TableRow::BackwardBased => WiringKind::BackwardBased,
            TableRow::ForwardBased => WiringKind::ForwardBased,
            _ => return None,
        })
    }

    /// A concrete agent realising the row.
    pub fn witness(self) -> Result<ConcreteAgent, AgentError> {
        let opt = OptimizerSpec::sgd(0.5).with_loss(Loss::Bce);
        let mlp = MlpSpec::sigmoid(&[2, 4, 1])?;
        if let Some(kind) = self.explainer_kind() {
            let base = build_mlp_agent(&mlp, opt, 0)?;
            return build_explainer(kind, &base, &ExplainerConfig::default());
        }
        match self {
            TableRow::GeneralUnsupervised => build_autoencoder(&MlpSpec::sigmoid(&[2, 3, 2])?, OptimizerSpec::sgd(0.5), 0),
            TableRow::Rnn => build_rnn_agent(2, 3, 1, OptimizerSpec::sgd(0.5), 0),
            TableRow::Nas => build_nas_agent(&[MlpSpec::sigmoid(&[2, 2, 1])?, mlp], opt, 0),
            _ => build_mlp_agent(&mlp, opt, 0),
        }
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "table {} / {}", self.table(), self.name())
    }
}

fn space<'a>(agent: &'a ConcreteAgent, name: &str) -> Option<&'a SpaceSeq> {
    agent.translator.object(name)
}

fn constant(s: &SpaceSeq) -> Option<&ValueSpace> {
    match s {
        SpaceSeq::Constant(v) => Some(v),
        _ => None,
    }
}

/// `X` is exactly the product of the explained model's boundary spaces in
/// the listed roles.
fn explainer_x(agent: &ConcreteAgent, roles: &[InputRole]) -> bool {
    let Some(base) = &agent.profile.base else {
        return false;
    };
    let of = |r: &InputRole| match r {
        InputRole::Prediction => ValueSpace::RealVector(base.spec.outputs()),
        InputRole::Data => ValueSpace::RealVector(base.spec.inputs()),
        InputRole::ModelParams { .. } | InputRole::LossGradient => ValueSpace::RealVector(base.spec.param_count()),
        InputRole::RecurrentState => ValueSpace::Singleton,
    };
    let expected = ValueSpace::ProductSpace(roles.iter().map(of).collect());
    let kinds = agent.profile.role_kinds();
    let same_roles = kinds.len() == roles.len()
        && kinds.iter().zip(roles).all(|(a, b)| match (a, b) {
            (InputRole::ModelParams { .. }, InputRole::ModelParams { .. }) => true,
            _ => a == b,
        });
    same_roles && space(agent, "X").and_then(constant) == Some(&expected)
}

/// Whether `agent` has the shape columns of `row`: the spaces of `X`, `Y*`
/// and `E` and the constraint on `eta`.
pub fn witness_matches(row: TableRow, agent: &ConcreteAgent) -> bool {
    use InputRole::*;
    let nontrivial = |n: &str| !trivial(space(agent, n));
    let ys_is_y = space(agent, "Y*") == space(agent, "Y") && nontrivial("Y*");
    let constant_eta = agent.translator.constant_architecture();
    let explains = nontrivial("E");
    match row {
        TableRow::GeneralUnsupervised => nontrivial("X") && nontrivial("Y") && !nontrivial("Y*") && !explains,
        TableRow::GeneralSupervised | TableRow::GeneralContinual => {
            nontrivial("X") && nontrivial("Y") && nontrivial("Y*") && !explains
        }
        TableRow::GeneralExplaining => nontrivial("X") && nontrivial("Y") && nontrivial("Y*") && explains,
        TableRow::Mlp => nontrivial("X") && ys_is_y && !explains && constant_eta,
        TableRow::Rnn => {
            let (Some(ValueSpace::ProductSpace(xs)), Some(ValueSpace::ProductSpace(ys))) =
                (space(agent, "X").and_then(constant), space(agent, "Y").and_then(constant))
            else {
                return false;
            };
            xs.len() == 2
                && ys.len() == 2
                && xs[1] == ys[1]
                && space(agent, "Y*").and_then(constant) == Some(&ys[0])
                && agent.profile.role_kinds() == [Data, RecurrentState]
                && !explains
                && constant_eta
        }
        TableRow::Nas => nontrivial("X") && ys_is_y && !explains,
        TableRow::Cbm => {
            nontrivial("X")
                && ys_is_y
                && explains
                && matches!(agent.profile.predictor, Some(Predictor::Cbm { .. }))
        }
        TableRow::Intrinsic => {
            agent.profile.role_kinds() == [Data] && ys_is_y && explains && constant_eta && nontrivial("P")
        }
        TableRow::PostHoc | TableRow::ModelSpecific => {
            explainer_x(agent, &[Prediction, Data, ModelParams { frozen: true }]) && ys_is_y && explains && constant_eta
        }
        TableRow::ModelAgnostic => explainer_x(agent, &[Prediction, Data]) && ys_is_y && explains && constant_eta,
        TableRow::ForwardBased => {
            explainer_x(agent, &[Data, ModelParams { frozen: false }]) && ys_is_y && explains && constant_eta
        }
        TableRow::BackwardBased => explainer_x(agent, &[Data, LossGradient]) && ys_is_y && explains && constant_eta,
    }
}
