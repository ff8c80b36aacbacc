//! The numeric models behind generator images, over flat parameter vectors.

use crate::stream::{Value, ValueSpace};

use super::mlp::{mlp_backward, mlp_forward, mlp_grad, mlp_grad_full, Loss, MlpSpec};

/// A model family: how flat parameters map inputs to outputs at step `n`.
#[derive(Clone, Debug, PartialEq)]
pub enum Predictor {
    Mlp(MlpSpec),
    /// One architecture per step, the last repeating. Parameters live in a
    /// vector sized for the largest one; each step reads a prefix.
    Nas(Vec<MlpSpec>),
    /// A concept net followed by a task net; parameters are the pair.
    Cbm { concept: MlpSpec, task: MlpSpec },
    /// A cell mapping `x ++ h` to `y ++ h'`.
    Rnn { cell: MlpSpec, outputs: usize },
}

/// The trained model an explainer explains.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseModel {
    pub spec: MlpSpec,
    pub params: Vec<f64>,
    pub loss: Loss,
}

/// All reals in a value, in order; `*` and atoms contribute nothing.
pub fn flat_reals(v: &Value) -> Vec<f64> {
    match v {
        Value::Reals(xs) => xs.clone(),
        Value::Prediction { output, .. } => output.clone(),
        Value::Tuple(vs) => vs.iter().flat_map(flat_reals).collect(),
        _ => Vec::new(),
    }
}

impl Predictor {
    fn spec_at(&self, n: usize) -> &MlpSpec {
        match self {
            Predictor::Mlp(s) => s,
            Predictor::Nas(v) => &v[n.min(v.len() - 1)],
            Predictor::Cbm { concept, .. } => concept,
            Predictor::Rnn { cell, .. } => cell,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Predictor::Mlp(s) | Predictor::Rnn { cell: s, .. } => s.param_count(),
            Predictor::Nas(v) => v.iter().map(MlpSpec::param_count).max().unwrap_or(0),
            Predictor::Cbm { concept, task } => concept.param_count() + task.param_count(),
        }
    }

    /// Width of the data input.
    pub fn inputs(&self) -> usize {
        match self {
            Predictor::Rnn { cell, outputs } => cell.inputs() - (cell.outputs() - outputs),
            p => p.spec_at(0).inputs(),
        }
    }

    /// Width of the network input, including any recurrent state.
    pub fn forward_inputs(&self) -> usize {
        self.spec_at(0).inputs()
    }

    /// Width of the prediction, excluding any recurrent state.
    pub fn outputs(&self) -> usize {
        match self {
            Predictor::Mlp(s) => s.outputs(),
            Predictor::Nas(v) => v[0].outputs(),
            Predictor::Cbm { task, .. } => task.outputs(),
            Predictor::Rnn { outputs, .. } => *outputs,
        }
    }

    pub fn param_space(&self) -> ValueSpace {
        match self {
            Predictor::Cbm { concept, task } => ValueSpace::ProductSpace(vec![
                ValueSpace::RealVector(concept.param_count()),
                ValueSpace::RealVector(task.param_count()),
            ]),
            p => ValueSpace::RealVector(p.param_count()),
        }
    }

    pub fn pack(&self, flat: Vec<f64>) -> Value {
        match self {
            Predictor::Cbm { concept, .. } => {
                let mut a = flat;
                let b = a.split_off(concept.param_count());
                Value::Tuple(vec![Value::Reals(a), Value::Reals(b)])
            }
            _ => Value::Reals(flat),
        }
    }

    /// Flat parameters held by a value, or `None` for `*`.
    pub fn unpack(&self, v: &Value) -> Option<Vec<f64>> {
        match v {
            Value::Star => None,
            v => Some(flat_reals(v)),
        }
    }

    /// Full network output at step `n`; for a recurrent cell this includes
    /// the next state.
    pub fn forward(&self, n: usize, params: &[f64], x: &[f64]) -> Vec<f64> {
        match self {
            Predictor::Cbm { concept, task } => {
                let (a, b) = params.split_at(concept.param_count());
                let c = mlp_forward(concept, a, x).expect("concept net shapes");
                mlp_forward(task, b, &c).expect("task net shapes")
            }
            p => {
                let s = p.spec_at(n);
                mlp_forward(s, &params[..s.param_count()], x).expect("network shapes")
            }
        }
    }

    /// The prediction for data input `x` at step `n`; a recurrent cell
    /// starts from the zero state.
    pub fn predict(&self, n: usize, params: &[f64], x: &[f64]) -> Vec<f64> {
        let mut input = x.to_vec();
        input.resize(self.forward_inputs(), 0.0);
        let mut y = self.forward(n, params, &input);
        y.truncate(self.outputs());
        y
    }

    /// Concept activations of a bottleneck model.
    pub fn concepts(&self, params: &[f64], x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Predictor::Cbm { concept, .. } => {
                Some(mlp_forward(concept, &params[..concept.param_count()], x).expect("concept net shapes"))
            }
            _ => None,
        }
    }

    /// Loss gradient with respect to the flat parameters at step `n`.
    pub fn grad(&self, n: usize, params: &[f64], x: &[f64], target: &[f64], loss: Loss) -> Vec<f64> {
        match self {
            Predictor::Cbm { concept, task } => {
                let (a, b) = params.split_at(concept.param_count());
                let c = mlp_forward(concept, a, x).expect("concept net shapes");
                let (gb, gc) = mlp_grad_full(task, b, &c, target, loss).expect("task net shapes");
                let (mut ga, _) = mlp_backward(concept, a, x, &gc).expect("concept net shapes");
                ga.extend(gb);
                ga
            }
            Predictor::Rnn { cell, outputs } => {
                // The state outputs are their own targets, so only the
                // prediction part drives the update under mse.
                let out = mlp_forward(cell, params, x).expect("cell shapes");
                let mut t = target.to_vec();
                t.extend_from_slice(&out[*outputs..]);
                mlp_grad(cell, params, x, &t, loss).expect("cell shapes")
            }
            p => {
                let s = p.spec_at(n);
                let mut g = mlp_grad(s, &params[..s.param_count()], x, target, loss).expect("network shapes");
                g.resize(params.len(), 0.0);
                g
            }
        }
    }

    /// The value on the `Y` wire for output `y` computed from input `x`.
    pub fn wrap_output(&self, y: Vec<f64>, x: Vec<f64>) -> Value {
        match self {
            Predictor::Rnn { outputs, .. } => {
                let mut y = y;
                let h = y.split_off(*outputs);
                Value::Tuple(vec![Value::Prediction { output: y, input: x }, Value::Reals(h)])
            }
            _ => Value::Prediction { output: y, input: x },
        }
    }

    pub fn output_space(&self) -> ValueSpace {
        match self {
            Predictor::Rnn { cell, outputs } => ValueSpace::ProductSpace(vec![
                ValueSpace::RealVector(*outputs),
                ValueSpace::RealVector(cell.outputs() - outputs),
            ]),
            p => ValueSpace::RealVector(p.outputs()),
        }
    }
}

/// The prediction carried by a `Y` value.
pub fn prediction_output(v: &Value) -> Vec<f64> {
    match v {
        Value::Tuple(vs) => vs.first().map(prediction_output).unwrap_or_default(),
        v => flat_reals(v),
    }
}

/// The input a prediction was computed from, if it records one.
pub fn recorded_input(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Prediction { input, .. } => Some(input.clone()),
        Value::Tuple(vs) => vs.first().and_then(recorded_input),
        _ => None,
    }
}
