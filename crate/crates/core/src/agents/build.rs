//! Builders: each concrete agent is a translator of XLearn compiled along the
//! abstract learning agent.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::diagram::{abstract_learning_agent, build_xlearn, ETA, NABLA};
use crate::institution::{
    make_explanation, saliency_syntactic, ExplanationMode, ExplanationPayload, SemanticModel, Signature,
    DEFAULT_TAU,
};
use crate::stream::{ExplanationSpace, SpaceSeq, StreamMorphism, Value, ValueSpace};
use crate::translator::{make_translator, ConcreteAgent, ExplanationDecl};

use super::mlp::{
    init_params, input_relevance, mlp_forward, mlp_grad, normalize_max, optimizer_step, Loss, MlpSpec, OptState,
    OptimizerSpec,
};
use super::predictor::{flat_reals, recorded_input, BaseModel, Predictor};
use super::train::Sample;
use super::{AgentError, AgentProfile, Encoder, InputRole, WiringKind};

/// Settings of an explainer built over a base agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplainerConfig {
    pub mode: ExplanationMode,
    /// Relevance predicate of the explanation signature.
    pub predicate: String,
    /// Feature constants; `f1..fn` when absent.
    pub features: Option<Vec<String>>,
    pub tau: f64,
    /// Parameters of the explained model; the base agent's initial
    /// parameters when absent.
    pub params: Option<Vec<f64>>,
    /// Hidden widths of an intrinsic explainer's own network.
    pub hidden: Vec<usize>,
    /// Number of concepts of a bottleneck model.
    pub concepts: usize,
    /// Optimizer of learning explainers.
    pub optimizer: OptimizerSpec,
    pub seed: u64,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        ExplainerConfig {
            mode: ExplanationMode::Semantic,
            predicate: "S".into(),
            features: None,
            tau: DEFAULT_TAU,
            params: None,
            hidden: vec![4],
            concepts: 2,
            optimizer: OptimizerSpec::sgd(0.5).with_loss(Loss::Bce),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
struct ExplSpec {
    signature: Signature,
    mode: ExplanationMode,
    tau: f64,
}

impl ExplSpec {
    fn space(&self) -> ValueSpace {
        ValueSpace::Explanation(ExplanationSpace {
            signature: self.signature.clone(),
            mode: self.mode,
        })
    }

    fn decl(&self) -> ExplanationDecl {
        match self.mode {
            ExplanationMode::Syntactic => ExplanationDecl::Syntactic(self.signature.clone()),
            ExplanationMode::Semantic => ExplanationDecl::Semantic(self.signature.clone()),
        }
    }

    /// A relevance model with the given degrees, or its saliency sentence.
    fn value(&self, degrees: &[f64]) -> Value {
        let m = SemanticModel::degrees(self.signature.clone(), degrees, self.tau).expect("degrees lie in [0, 1]");
        let e = match self.mode {
            ExplanationMode::Semantic => make_explanation(ExplanationPayload::Model(m), &self.signature),
            ExplanationMode::Syntactic => saliency_syntactic(&m),
        };
        Value::Explanation(e.expect("model is over the explanation signature"))
    }
}

#[derive(Clone, Copy, Debug)]
enum ExplSource {
    InputRelevance,
    Concepts,
}

fn constant(s: ValueSpace) -> SpaceSeq {
    SpaceSeq::Constant(s)
}

fn reals(n: usize) -> SpaceSeq {
    constant(ValueSpace::RealVector(n))
}

fn unit() -> SpaceSeq {
    constant(ValueSpace::Singleton)
}

fn erase(v: Vec<SpaceSeq>) -> Vec<SpaceSeq> {
    v.into_iter().filter(|s| !s.is_trivial()).collect()
}

struct LearningSetup {
    predictor: Predictor,
    opt: OptimizerSpec,
    seed: u64,
    roles: Vec<(InputRole, ValueSpace)>,
    supervised: bool,
    explain: Option<(ExplSpec, ExplSource)>,
    constant_architecture: bool,
    encoder: Option<Encoder>,
}

fn objects(x: ValueSpace, y: ValueSpace, ys: SpaceSeq, p: ValueSpace, e: SpaceSeq) -> BTreeMap<String, SpaceSeq> {
    BTreeMap::from([
        ("X".to_string(), constant(x)),
        ("Y".to_string(), constant(y)),
        ("Y*".to_string(), ys),
        ("P".to_string(), constant(p)),
        ("E".to_string(), e),
    ])
}

/// Model `eta` and optimizer `nabla` for a trainable predictor. Both read
/// `*` on the parameter wire as the initial parameters.
fn learning_agent(s: LearningSetup) -> Result<ConcreteAgent, AgentError> {
    s.opt.validate()?;
    let pred = Arc::new(s.predictor);
    let init = Arc::new(init_params(pred.param_count(), s.seed));
    let profile = AgentProfile {
        roles: s.roles,
        predictor: Some((*pred).clone()),
        init_params: (*init).clone(),
        loss: Some(s.opt.loss),
        base: None,
        encoder: s.encoder,
    };
    let x = profile.input_space();
    let y = pred.output_space();
    let ys = if s.supervised { reals(pred.outputs()) } else { unit() };
    let p = pred.param_space();
    let e = s.explain.as_ref().map_or_else(unit, |(ex, _)| constant(ex.space()));
    let decl = s.explain.as_ref().map_or(ExplanationDecl::None, |(ex, _)| ex.decl());

    let eta = {
        let (pred, init, explain) = (Arc::clone(&pred), Arc::clone(&init), s.explain.clone());
        StreamMorphism::pointwise(
            vec![constant(x.clone()), constant(p.clone())],
            erase(vec![constant(y.clone()), e.clone()]),
            move |n, v| {
                let theta = pred.unpack(&v[1]).unwrap_or_else(|| init.to_vec());
                let x = flat_reals(&v[0]);
                let out = pred.forward(n, &theta, &x);
                let mut res = vec![pred.wrap_output(out, x.clone())];
                if let Some((ex, src)) = &explain {
                    let degrees = match (src, &*pred) {
                        (ExplSource::InputRelevance, Predictor::Mlp(spec)) => {
                            input_relevance(spec, &theta, &x).expect("network shapes")
                        }
                        (ExplSource::Concepts, _) => pred.concepts(&theta, &x).expect("bottleneck model"),
                        _ => unreachable!("relevance needs a plain network"),
                    };
                    res.push(ex.value(&degrees));
                }
                res
            },
        )
    };

    let nabla = {
        let (pred, init, opt, supervised) = (Arc::clone(&pred), Arc::clone(&init), s.opt, s.supervised);
        let dom = erase(vec![ys.clone(), constant(y.clone()), constant(p.clone())]);
        StreamMorphism::from_step(dom, vec![constant(p.clone())], OptState::default, move |st, n, v| {
            let (target, y, p) = if supervised {
                (Some(&v[0]), &v[1], &v[2])
            } else {
                (None, &v[0], &v[1])
            };
            let theta = pred.unpack(p).unwrap_or_else(|| init.to_vec());
            let x = recorded_input(y).unwrap_or_else(|| vec![0.0; pred.forward_inputs()]);
            let target = target.map_or_else(|| x.clone(), flat_reals);
            let g = pred.grad(n, &theta, &x, &target, opt.loss);
            let (next, st2) = optimizer_step(&opt, &theta, &g, n, st).expect("gradient matches parameters");
            *st = st2;
            vec![pred.pack(next)]
        })
    };

    let xlearn = build_xlearn();
    let term = abstract_learning_agent(&xlearn)?;
    let gens = BTreeMap::from([(ETA.to_string(), eta), (NABLA.to_string(), nabla)]);
    let t = make_translator(xlearn, objects(x, y, ys, p, e), gens, decl, s.constant_architecture)?;
    Ok(ConcreteAgent::compile_with(t, term, profile)?)
}

/// The MLP learning agent: `X = R^n`, `Y = Y* = [0,1]^m`, `P = R^p`,
/// `E` trivial.
pub fn build_mlp_agent(mlp: &MlpSpec, opt: OptimizerSpec, init_seed: u64) -> Result<ConcreteAgent, AgentError> {
    learning_agent(LearningSetup {
        predictor: Predictor::Mlp(mlp.clone()),
        opt,
        seed: init_seed,
        roles: vec![(InputRole::Data, ValueSpace::RealVector(mlp.inputs()))],
        supervised: true,
        explain: None,
        constant_architecture: true,
        encoder: None,
    })
}

/// An unsupervised agent reconstructing its input: `Y*` is trivial.
pub fn build_autoencoder(mlp: &MlpSpec, opt: OptimizerSpec, init_seed: u64) -> Result<ConcreteAgent, AgentError> {
    if mlp.inputs() != mlp.outputs() {
        return Err(AgentError::InvalidSpec(format!(
            "an autoencoder needs equal input and output widths, got {:?}",
            mlp.widths
        )));
    }
    learning_agent(LearningSetup {
        predictor: Predictor::Mlp(mlp.clone()),
        opt,
        seed: init_seed,
        roles: vec![(InputRole::Data, ValueSpace::RealVector(mlp.inputs()))],
        supervised: false,
        explain: None,
        constant_architecture: true,
        encoder: None,
    })
}

/// An agent whose architecture at step `i` is `schedule[min(i, last)]`.
pub fn build_nas_agent(schedule: &[MlpSpec], opt: OptimizerSpec, seed: u64) -> Result<ConcreteAgent, AgentError> {
    let first = schedule
        .first()
        .ok_or_else(|| AgentError::InvalidSpec("empty architecture schedule".into()))?;
    if let Some(s) = schedule
        .iter()
        .find(|s| s.inputs() != first.inputs() || s.outputs() != first.outputs())
    {
        return Err(AgentError::InvalidSpec(format!(
            "architecture {:?} changes the boundary of {:?}",
            s.widths, first.widths
        )));
    }
    learning_agent(LearningSetup {
        predictor: Predictor::Nas(schedule.to_vec()),
        opt,
        seed,
        roles: vec![(InputRole::Data, ValueSpace::RealVector(first.inputs()))],
        supervised: true,
        explain: None,
        constant_architecture: schedule.len() == 1,
        encoder: None,
    })
}

/// A recurrent agent with `X = R^n x R^h` and `Y = R^m x R^h`. The state
/// is an input factor; the encoder feeds zeros.
pub fn build_rnn_agent(
    inputs: usize,
    state: usize,
    outputs: usize,
    opt: OptimizerSpec,
    seed: u64,
) -> Result<ConcreteAgent, AgentError> {
    let cell = MlpSpec::sigmoid(&[inputs + state, 4, outputs + state])?;
    let encoder: Encoder = Arc::new(move |s: &Sample, _: &[f64]| {
        vec![
            Value::Reals(s.y.clone()),
            Value::Tuple(vec![Value::Reals(s.x.clone()), Value::Reals(vec![0.0; state])]),
        ]
    });
    learning_agent(LearningSetup {
        predictor: Predictor::Rnn { cell, outputs },
        opt,
        seed,
        roles: vec![
            (InputRole::Data, ValueSpace::RealVector(inputs)),
            (InputRole::RecurrentState, ValueSpace::RealVector(state)),
        ],
        supervised: true,
        explain: None,
        constant_architecture: true,
        encoder: Some(encoder),
    })
}

fn explainer_roles(kind: WiringKind, spec: &MlpSpec) -> Vec<(InputRole, ValueSpace)> {
    let x = (InputRole::Data, ValueSpace::RealVector(spec.inputs()));
    let y = (InputRole::Prediction, ValueSpace::RealVector(spec.outputs()));
    let p = |frozen| (InputRole::ModelParams { frozen }, ValueSpace::RealVector(spec.param_count()));
    match kind {
        WiringKind::PostHoc => vec![y, x, p(true)],
        WiringKind::ModelSpecific => vec![y, x, p(false)],
        WiringKind::ModelAgnostic => vec![y, x],
        WiringKind::ForwardBased => vec![x, p(false)],
        WiringKind::BackwardBased => vec![
            x,
            (InputRole::LossGradient, ValueSpace::RealVector(spec.param_count())),
        ],
        WiringKind::Intrinsic | WiringKind::Cbm => vec![x],
        WiringKind::PlainLA => Vec::new(),
    }
}

/// Values of the explainer's `X` for one sample, given the explained
/// model's parameters.
fn encode_roles(roles: &[InputRole], base: &BaseModel, theta: &[f64], s: &Sample) -> Value {
    let mut parts: Vec<Value> = roles
        .iter()
        .map(|r| match r {
            InputRole::Data => Value::Reals(s.x.clone()),
            InputRole::Prediction => Value::Prediction {
                output: mlp_forward(&base.spec, theta, &s.x).expect("base shapes"),
                input: s.x.clone(),
            },
            InputRole::ModelParams { .. } => Value::Reals(theta.to_vec()),
            InputRole::LossGradient => {
                Value::Reals(mlp_grad(&base.spec, theta, &s.x, &s.y, base.loss).expect("base shapes"))
            }
            InputRole::RecurrentState => Value::Reals(Vec::new()),
        })
        .collect();
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        Value::Tuple(parts)
    }
}

/// Output change when each input coordinate is set to zero.
fn zeroing_relevance(spec: &MlpSpec, theta: &[f64], x: &[f64]) -> Vec<f64> {
    let y0 = mlp_forward(spec, theta, x).expect("base shapes");
    let scores = (0..x.len())
        .map(|i| {
            let mut xi = x.to_vec();
            xi[i] = 0.0;
            let yi = mlp_forward(spec, theta, &xi).expect("base shapes");
            yi.iter().zip(&y0).map(|(a, b)| (a - b).abs()).sum()
        })
        .collect();
    normalize_max(scores)
}

/// Per input coordinate, the summed gradient magnitude of the first-layer
/// weights reading it.
fn first_layer_relevance(spec: &MlpSpec, grad: &[f64]) -> Vec<f64> {
    let (n, h) = (spec.widths[0], spec.widths[1]);
    normalize_max((0..n).map(|i| (0..h).map(|j| grad[j * n + i].abs()).sum()).collect())
}

type Relevance = Arc<dyn Fn(&[Value]) -> Vec<f64> + Send + Sync>;

fn relevance_of(kind: WiringKind, base: &BaseModel) -> Relevance {
    let spec = base.spec.clone();
    match kind {
        WiringKind::PostHoc | WiringKind::ModelSpecific => {
            Arc::new(move |v| input_relevance(&spec, &flat_reals(&v[2]), &flat_reals(&v[1])).expect("base shapes"))
        }
        WiringKind::ModelAgnostic => {
            let theta = base.params.clone();
            Arc::new(move |v| {
                let x = flat_reals(&v[1]);
                let y0 = flat_reals(&v[0]);
                let scores = (0..x.len())
                    .map(|i| {
                        let mut xi = x.clone();
                        xi[i] = 0.0;
                        let yi = mlp_forward(&spec, &theta, &xi).expect("base shapes");
                        yi.iter().zip(&y0).map(|(a, b)| (a - b).abs()).sum()
                    })
                    .collect();
                normalize_max(scores)
            })
        }
        WiringKind::ForwardBased => Arc::new(move |v| zeroing_relevance(&spec, &flat_reals(&v[1]), &flat_reals(&v[0]))),
        WiringKind::BackwardBased => Arc::new(move |v| first_layer_relevance(&spec, &flat_reals(&v[1]))),
        _ => unreachable!("learning explainers compute their own relevance"),
    }
}

fn feature_signature(cfg: &ExplainerConfig, n: usize) -> Result<Signature, AgentError> {
    let names = match &cfg.features {
        Some(f) if f.len() == n => f.clone(),
        Some(f) => {
            return Err(AgentError::DimensionMismatch {
                what: "feature names",
                expected: n,
                found: f.len(),
            })
        }
        None => (1..=n).map(|i| format!("f{i}")).collect(),
    };
    Ok(Signature::relevance(&cfg.predicate, &names)?)
}

/// An explainer without parameters of its own: `P'` is trivial, `Y'` is
/// the relevance vector and `Y* = Y'`.
fn static_explainer(kind: WiringKind, base: BaseModel, cfg: &ExplainerConfig) -> Result<ConcreteAgent, AgentError> {
    let n = base.spec.inputs();
    let ex = ExplSpec {
        signature: feature_signature(cfg, n)?,
        mode: cfg.mode,
        tau: cfg.tau,
    };
    let roles = explainer_roles(kind, &base.spec);
    let kinds: Vec<InputRole> = roles.iter().map(|(r, _)| *r).collect();
    let multi = roles.len() > 1;
    let relevance = relevance_of(kind, &base);
    let encoder: Encoder = {
        let (base, kinds) = (base.clone(), kinds.clone());
        Arc::new(move |s: &Sample, theta: &[f64]| {
            vec![Value::Reals(vec![0.0; n]), encode_roles(&kinds, &base, theta, s)]
        })
    };
    let profile = AgentProfile {
        roles,
        predictor: None,
        init_params: Vec::new(),
        loss: None,
        base: Some(base),
        encoder: Some(encoder),
    };
    let x = profile.input_space();
    let e = constant(ex.space());
    let eta = {
        let ex = ex.clone();
        StreamMorphism::pointwise(vec![constant(x.clone())], vec![reals(n), e.clone()], move |_, v| {
            let parts = match (&v[0], multi) {
                (Value::Tuple(ps), true) => ps.clone(),
                (v, _) => vec![v.clone()],
            };
            let r = relevance(&parts);
            let out = ex.value(&r);
            vec![Value::Reals(r), out]
        })
    };
    let nabla = StreamMorphism::pointwise(vec![reals(n), reals(n)], Vec::new(), |_, _| Vec::new());
    let xlearn = build_xlearn();
    let term = abstract_learning_agent(&xlearn)?;
    let gens = BTreeMap::from([(ETA.to_string(), eta), (NABLA.to_string(), nabla)]);
    let objs = objects(x, ValueSpace::RealVector(n), reals(n), ValueSpace::Singleton, e);
    let t = make_translator(xlearn, objs, gens, ex.decl(), true)?;
    Ok(ConcreteAgent::compile_with(t, term, profile)?)
}

/// An explainer of the given kind over `base`, which must be a plain MLP
/// agent.
pub fn build_explainer(
    kind: WiringKind,
    base: &ConcreteAgent,
    cfg: &ExplainerConfig,
) -> Result<ConcreteAgent, AgentError> {
    let Some(Predictor::Mlp(spec)) = &base.profile.predictor else {
        return Err(AgentError::InvalidSpec("the explained agent must be an MLP agent".into()));
    };
    let params = cfg.params.clone().unwrap_or_else(|| base.profile.init_params.clone());
    if params.len() != spec.param_count() {
        return Err(AgentError::DimensionMismatch {
            what: "explained parameters",
            expected: spec.param_count(),
            found: params.len(),
        });
    }
    let model = BaseModel {
        spec: spec.clone(),
        params,
        loss: base.profile.loss.unwrap_or(Loss::Mse),
    };
    let (n, m) = (spec.inputs(), spec.outputs());
    match kind {
        WiringKind::PlainLA => Err(AgentError::UnsupportedKind(kind)),
        WiringKind::Intrinsic => {
            let widths: Vec<usize> = std::iter::once(n).chain(cfg.hidden.iter().copied()).chain([m]).collect();
            let own = MlpSpec::sigmoid(&widths)?;
            learning_agent(LearningSetup {
                predictor: Predictor::Mlp(own),
                opt: cfg.optimizer,
                seed: cfg.seed,
                roles: explainer_roles(kind, spec),
                supervised: true,
                explain: Some((
                    ExplSpec {
                        signature: feature_signature(cfg, n)?,
                        mode: cfg.mode,
                        tau: cfg.tau,
                    },
                    ExplSource::InputRelevance,
                )),
                constant_architecture: true,
                encoder: None,
            })
        }
        WiringKind::Cbm => {
            let k = cfg.concepts;
            let concept = MlpSpec::sigmoid(&[n, k])?;
            let task = MlpSpec::sigmoid(&[k, m])?;
            let names: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
            learning_agent(LearningSetup {
                predictor: Predictor::Cbm { concept, task },
                opt: cfg.optimizer,
                seed: cfg.seed,
                roles: explainer_roles(kind, spec),
                supervised: true,
                explain: Some((
                    ExplSpec {
                        signature: Signature::relevance("C", &names)?,
                        mode: cfg.mode,
                        tau: cfg.tau,
                    },
                    ExplSource::Concepts,
                )),
                constant_architecture: true,
                encoder: None,
            })
        }
        _ => static_explainer(kind, model, cfg),
    }
}
