//! Datasets and training runs of compiled agents.

use crate::stream::{prefix_evaluate_traced, EvalTrace, SpaceSeq, Value};
use crate::translator::ConcreteAgent;

use super::mlp::loss_value;
use super::predictor::prediction_output;
use super::AgentError;

/// One dataset row: inputs and targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Comma-separated rows `x1,...,xn,y1,...`; the first `inputs` columns are
/// inputs. A non-numeric first line is a header. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_dataset(src: &str, inputs: usize) -> Result<Vec<Sample>, AgentError> {
    let mut rows = Vec::new();
    let mut width = None;
    let mut seen_line = false;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_line;
        seen_line = true;
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let vals = match parsed {
            Ok(v) => v,
            Err(_) if first => continue,
            Err(e) => {
                return Err(AgentError::Dataset {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        };
        if vals.len() < inputs {
            return Err(AgentError::Dataset {
                line: i + 1,
                message: format!("expected at least {inputs} columns, found {}", vals.len()),
            });
        }
        if *width.get_or_insert(vals.len()) != vals.len() {
            return Err(AgentError::Dataset {
                line: i + 1,
                message: format!("expected {} columns, found {}", width.unwrap_or(0), vals.len()),
            });
        }
        let (x, y) = vals.split_at(inputs);
        rows.push(Sample {
            x: x.to_vec(),
            y: y.to_vec(),
        });
    }
    Ok(rows)
}

/// The trace of a run with per-step losses and the learned parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingRun {
    pub trace: EvalTrace,
    /// Loss of the prediction at each step, for agents with a loss.
    pub losses: Option<Vec<f64>>,
    /// Parameters after the last step, for agents that learn.
    pub final_params: Option<Vec<f64>>,
    /// Mean squared error of the final parameters over the dataset.
    pub final_mse: Option<f64>,
}

impl TrainingRun {
    /// The trace table with a loss column when losses exist.
    pub fn to_table(&self) -> String {
        self.trace.to_table(self.losses.as_deref())
    }
}

/// Run `steps` steps cycling through the dataset in order.
pub fn run_training(agent: &ConcreteAgent, dataset: &[Sample], steps: usize) -> Result<TrainingRun, AgentError> {
    run_training_along(agent, dataset, steps, None)
}

/// As [`run_training`]; an explainer reads the explained model's parameters
/// at step `n` from `base_params[min(n, last)]` instead of the captured ones.
pub fn run_training_along(
    agent: &ConcreteAgent,
    dataset: &[Sample],
    steps: usize,
    base_params: Option<&[Vec<f64>]>,
) -> Result<TrainingRun, AgentError> {
    if steps > 0 && dataset.is_empty() {
        return Err(AgentError::InvalidSpec("empty dataset".into()));
    }
    let profile = &agent.profile;
    let supervised = agent.translator.object("Y*").is_some_and(|s| !s.is_trivial());
    let captured = profile.base.as_ref().map(|b| b.params.clone()).unwrap_or_default();
    let theta_at = |n: usize| -> &[f64] {
        match base_params {
            Some(ps) if !ps.is_empty() => &ps[n.min(ps.len() - 1)],
            _ => &captured,
        }
    };
    let inputs: Vec<Vec<Value>> = (0..steps)
        .map(|n| {
            let s = &dataset[n % dataset.len()];
            match &profile.encoder {
                Some(enc) => enc(s, theta_at(n)),
                None if supervised => vec![Value::Reals(s.y.clone()), Value::Reals(s.x.clone())],
                None => vec![Value::Reals(s.x.clone())],
            }
        })
        .collect();
    let trace = prefix_evaluate_traced(&agent.compiled, &inputs)?;

    let losses = match (&profile.predictor, profile.loss) {
        (Some(_), Some(loss)) => Some(
            trace
                .outputs
                .iter()
                .enumerate()
                .map(|(n, out)| {
                    let s = &dataset[n % dataset.len()];
                    let target = if supervised { &s.y } else { &s.x };
                    loss_value(loss, &prediction_output(&out[0]), target)
                })
                .collect(),
        ),
        _ => None,
    };
    let final_params = match (&profile.predictor, &trace.feedback_states) {
        (Some(pred), Some(states)) => states.last().and_then(|st| st.first()).and_then(|v| pred.unpack(v)),
        _ => None,
    };
    let final_mse = match (&profile.predictor, &final_params) {
        (Some(pred), Some(theta)) => {
            let total: f64 = dataset
                .iter()
                .map(|s| {
                    let y = pred.predict(steps, theta, &s.x);
                    let target = if supervised { &s.y } else { &s.x };
                    loss_value(super::Loss::Mse, &y, target)
                })
                .sum();
            Some(total / dataset.len() as f64)
        }
        _ => None,
    };
    Ok(TrainingRun {
        trace,
        losses,
        final_params,
        final_mse,
    })
}

/// Whether a space sequence is the singleton stream.
pub(super) fn trivial(s: Option<&SpaceSeq>) -> bool {
    s.is_none_or(SpaceSeq::is_trivial)
}
