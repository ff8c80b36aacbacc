//! Dense networks with sigmoid output, exact backpropagation and SGD/Adam.
//!
//! Parameters are one flat vector; layer by layer it holds the weights
//! row-major as `[out][in]`, then the biases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AgentError;

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum Activation {
    Sigmoid,
    Relu,
}

#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    /// Activation of the hidden layers; the output layer is always sigmoid.
    pub hidden: Activation,
}

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum Loss {
    /// Mean over outputs of `(y - y*)^2`.
    Mse,
    /// Mean over outputs of binary cross-entropy.
    Bce,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    Sgd { lr: f64 },
    Adam { lr: f64, b1: f64, b2: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub loss: Loss,
}

/// Adam moments; empty for SGD.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpSpec {
    pub fn new(widths: &[usize], hidden: Activation) -> Result<Self, AgentError> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(AgentError::InvalidSpec(format!(
                "layer widths {widths:?} need at least two positive entries"
            )));
        }
        Ok(MlpSpec {
            widths: widths.to_vec(),
            hidden,
        })
    }

    pub fn sigmoid(widths: &[usize]) -> Result<Self, AgentError> {
        MlpSpec::new(widths, Activation::Sigmoid)
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    pub fn inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn outputs(&self) -> usize {
        *self.widths.last().expect("nonempty")
    }

    /// Offset of the first weight of layer `l` (0-based) in the flat vector.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.widths.windows(2).take(l).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn check(&self, params: &[f64], x: &[f64]) -> Result<(), AgentError> {
        if params.len() != self.param_count() {
            return Err(AgentError::DimensionMismatch {
                what: "parameters",
                expected: self.param_count(),
                found: params.len(),
            });
        }
        if x.len() != self.inputs() {
            return Err(AgentError::DimensionMismatch {
                what: "input",
                expected: self.inputs(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn activations(&self, params: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let mut off = 0;
        let layers = self.widths.len() - 1;
        for l in 0..layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &params[off..off + n_in * n_out];
            let b = &params[off + n_in * n_out..off + (n_in + 1) * n_out];
            off += (n_in + 1) * n_out;
            let a = acts.last().expect("nonempty");
            let out: Vec<f64> = (0..n_out)
                .map(|j| {
                    let z = b[j] + (0..n_in).map(|i| w[j * n_in + i] * a[i]).sum::<f64>();
                    if l + 1 == layers || self.hidden == Activation::Sigmoid {
                        sigmoid(z)
                    } else {
                        z.max(0.0)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }
}

pub fn mlp_forward(spec: &MlpSpec, params: &[f64], x: &[f64]) -> Result<Vec<f64>, AgentError> {
    spec.check(params, x)?;
    Ok(spec.activations(params, x).pop().expect("nonempty"))
}

/// Gradients of a scalar with respect to parameters and input, given its
/// gradient `dy` with respect to the network output.
pub fn mlp_backward(
    spec: &MlpSpec,
    params: &[f64],
    x: &[f64],
    dy: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), AgentError> {
    spec.check(params, x)?;
    check_out(spec, dy.len(), "output gradient")?;
    let acts = spec.activations(params, x);
    let out = acts.last().expect("nonempty");
    let dz = dy.iter().zip(out).map(|(g, y)| g * y * (1.0 - y)).collect();
    Ok(backward_from_dz(spec, params, &acts, dz))
}

fn check_out(spec: &MlpSpec, found: usize, what: &'static str) -> Result<(), AgentError> {
    if found != spec.outputs() {
        return Err(AgentError::DimensionMismatch {
            what,
            expected: spec.outputs(),
            found,
        });
    }
    Ok(())
}

/// Backpropagate `dz`, the gradient at the output pre-activations.
fn backward_from_dz(spec: &MlpSpec, params: &[f64], acts: &[Vec<f64>], mut delta: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let layers = spec.widths.len() - 1;
    let mut grad = vec![0.0; params.len()];
    for l in (0..layers).rev() {
        let (n_in, n_out) = (spec.widths[l], spec.widths[l + 1]);
        let off = spec.layer_offset(l);
        let a = &acts[l];
        for j in 0..n_out {
            for i in 0..n_in {
                grad[off + j * n_in + i] = delta[j] * a[i];
            }
            grad[off + n_in * n_out + j] = delta[j];
        }
        let w = &params[off..off + n_in * n_out];
        let da: Vec<f64> = (0..n_in)
            .map(|i| (0..n_out).map(|j| w[j * n_in + i] * delta[j]).sum())
            .collect();
        if l == 0 {
            return (grad, da);
        }
        delta = da
            .iter()
            .zip(a)
            .map(|(g, &h)| match spec.hidden {
                Activation::Sigmoid => g * h * (1.0 - h),
                Activation::Relu => {
                    if h > 0.0 {
                        *g
                    } else {
                        0.0
                    }
                }
            })
            .collect();
    }
    unreachable!("at least one layer")
}

pub fn loss_value(loss: Loss, y: &[f64], y_star: &[f64]) -> f64 {
    let m = y.len() as f64;
    match loss {
        Loss::Mse => y.iter().zip(y_star).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m,
        Loss::Bce => {
            let eps = 1e-12;
            -y.iter()
                .zip(y_star)
                .map(|(p, t)| t * p.max(eps).ln() + (1.0 - t) * (1.0 - p).max(eps).ln())
                .sum::<f64>()
                / m
        }
    }
}

/// `dL/dz` at the sigmoid output layer.
fn loss_output_dz(loss: Loss, y: &[f64], y_star: &[f64]) -> Vec<f64> {
    let m = y.len() as f64;
    match loss {
        Loss::Mse => y
            .iter()
            .zip(y_star)
            .map(|(a, b)| 2.0 * (a - b) / m * a * (1.0 - a))
            .collect(),
        Loss::Bce => y.iter().zip(y_star).map(|(p, t)| (p - t) / m).collect(),
    }
}

/// Gradient of the loss with respect to the parameters.
pub fn mlp_grad(spec: &MlpSpec, params: &[f64], x: &[f64], y_star: &[f64], loss: Loss) -> Result<Vec<f64>, AgentError> {
    Ok(mlp_grad_full(spec, params, x, y_star, loss)?.0)
}

/// Gradients of the loss with respect to parameters and input.
pub fn mlp_grad_full(
    spec: &MlpSpec,
    params: &[f64],
    x: &[f64],
    y_star: &[f64],
    loss: Loss,
) -> Result<(Vec<f64>, Vec<f64>), AgentError> {
    spec.check(params, x)?;
    check_out(spec, y_star.len(), "target")?;
    let acts = spec.activations(params, x);
    let dz = loss_output_dz(loss, acts.last().expect("nonempty"), y_star);
    Ok(backward_from_dz(spec, params, &acts, dz))
}

/// `|d(sum of outputs)/dx_i|`, normalized so the largest entry is 1.
pub fn input_relevance(spec: &MlpSpec, params: &[f64], x: &[f64]) -> Result<Vec<f64>, AgentError> {
    let ones = vec![1.0; spec.outputs()];
    let (_, gx) = mlp_backward(spec, params, x, &ones)?;
    Ok(normalize_max(gx.iter().map(|g| g.abs()).collect()))
}

/// Scale nonnegative scores so that the largest is 1; all-zero stays zero.
pub fn normalize_max(v: Vec<f64>) -> Vec<f64> {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        v.into_iter().map(|s| (s / max).clamp(0.0, 1.0)).collect()
    } else {
        v
    }
}

/// Uniform in `[-0.5, 0.5]` from a ChaCha8 stream seeded by `seed`.
pub fn init_params(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-0.5..=0.5)).collect()
}

impl OptimizerSpec {
    pub fn sgd(lr: f64) -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Sgd { lr },
            loss: Loss::Mse,
        }
    }

    pub fn adam(lr: f64) -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adam {
                lr,
                b1: 0.9,
                b2: 0.999,
                eps: 1e-8,
            },
            loss: Loss::Mse,
        }
    }

    pub fn with_loss(mut self, loss: Loss) -> Self {
        self.loss = loss;
        self
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let ok = match self.kind {
            OptimizerKind::Sgd { lr } => lr > 0.0,
            OptimizerKind::Adam { lr, b1, b2, eps } => {
                lr > 0.0 && (0.0..1.0).contains(&b1) && (0.0..1.0).contains(&b2) && eps > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AgentError::InvalidSpec(format!("bad optimizer settings {:?}", self.kind)))
        }
    }
}

/// One optimizer update; `step` counts from 0.
pub fn optimizer_step(
    opt: &OptimizerSpec,
    params: &[f64],
    grad: &[f64],
    step: usize,
    state: &OptState,
) -> Result<(Vec<f64>, OptState), AgentError> {
    if grad.len() != params.len() {
        return Err(AgentError::DimensionMismatch {
            what: "gradient",
            expected: params.len(),
            found: grad.len(),
        });
    }
    match opt.kind {
        OptimizerKind::Sgd { lr } => {
            let p = params.iter().zip(grad).map(|(p, g)| p - lr * g).collect();
            Ok((p, state.clone()))
        }
        OptimizerKind::Adam { lr, b1, b2, eps } => {
            let n = params.len();
            let (m0, v0) = if state.m.len() == n {
                (&state.m[..], &state.v[..])
            } else {
                (&[][..], &[][..])
            };
            let t = (step + 1) as i32;
            let (c1, c2) = (1.0 - b1.powi(t), 1.0 - b2.powi(t));
            let mut next = OptState {
                m: Vec::with_capacity(n),
                v: Vec::with_capacity(n),
            };
            let mut p = Vec::with_capacity(n);
            for i in 0..n {
                let g = grad[i];
                let m = b1 * m0.get(i).copied().unwrap_or(0.0) + (1.0 - b1) * g;
                let v = b2 * v0.get(i).copied().unwrap_or(0.0) + (1.0 - b2) * g * g;
                p.push(params[i] - lr * (m / c1) / ((v / c2).sqrt() + eps));
                next.m.push(m);
                next.v.push(v);
            }
            Ok((p, next))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_half() {
        let spec = MlpSpec::sigmoid(&[3, 4, 2]).unwrap();
        let y = mlp_forward(&spec, &vec![0.0; spec.param_count()], &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.5, 0.5]);
        assert_eq!(spec.param_count(), 4 * 4 + 5 * 2);
    }

    #[test]
    fn single_unit_net() {
        let spec = MlpSpec::sigmoid(&[1, 1]).unwrap();
        assert_eq!(mlp_forward(&spec, &[1.0, 0.0], &[0.0]).unwrap(), vec![0.5]);
        let g = mlp_grad(&spec, &[0.0, 0.0], &[1.0], &[1.0], Loss::Bce).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let spec = MlpSpec::sigmoid(&[2, 1]).unwrap();
        assert!(matches!(
            mlp_forward(&spec, &[0.0; 2], &[0.0, 0.0]),
            Err(AgentError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sgd_arithmetic() {
        let (p, _) = optimizer_step(&OptimizerSpec::sgd(0.1), &[1.0], &[2.0], 0, &OptState::default()).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_about_lr() {
        let opt = OptimizerSpec::adam(0.01);
        let (p, _) = optimizer_step(&opt, &[1.0, 1.0], &[3.0, -0.2], 0, &OptState::default()).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-6);
        assert!((p[1] - 1.01).abs() < 1e-6);
        let (q, _) = optimizer_step(&opt, &[1.0], &[0.0], 0, &OptState::default()).unwrap();
        assert_eq!(q, vec![1.0]);
    }
}
