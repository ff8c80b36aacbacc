use proptest::prelude::*;

use xlearn_core::agents::{
    init_params, input_relevance, loss_value, mlp_forward, mlp_grad, mlp_grad_full, optimizer_step, Activation, Loss,
    MlpSpec, OptState, OptimizerSpec,
};

const H: f64 = 1e-5;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Central differences of `f` around `at`.
fn numeric_grad(f: impl Fn(&[f64]) -> f64, at: &[f64]) -> Vec<f64> {
    (0..at.len())
        .map(|i| {
            let mut up = at.to_vec();
            let mut down = at.to_vec();
            up[i] += H;
            down[i] -= H;
            (f(&up) - f(&down)) / (2.0 * H)
        })
        .collect()
}

fn net() -> impl Strategy<Value = (MlpSpec, Vec<f64>, Vec<f64>, Vec<f64>, Loss)> {
    (prop::collection::vec(1usize..5, 2..5), any::<u64>(), any::<bool>()).prop_flat_map(|(widths, seed, bce)| {
        let spec = MlpSpec::new(&widths, Activation::Sigmoid).unwrap();
        let params = init_params(spec.param_count(), seed).iter().map(|p| p * 3.0).collect::<Vec<_>>();
        let x = prop::collection::vec(-1.0f64..1.0, spec.inputs());
        let t = prop::collection::vec(0.05f64..0.95, spec.outputs());
        let loss = if bce { Loss::Bce } else { Loss::Mse };
        (Just(spec), Just(params), x, t, Just(loss))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parameter_gradient_matches_finite_differences((spec, params, x, t, loss) in net()) {
        let g = mlp_grad(&spec, &params, &x, &t, loss).unwrap();
        let fd = numeric_grad(|p| loss_value(loss, &mlp_forward(&spec, p, &x).unwrap(), &t), &params);
        for (a, b) in g.iter().zip(&fd) {
            prop_assert!(rel_err(*a, *b) < 1e-4, "backprop {a} vs fd {b}");
        }
    }

    #[test]
    fn input_gradient_matches_finite_differences((spec, params, x, t, loss) in net()) {
        let (_, gx) = mlp_grad_full(&spec, &params, &x, &t, loss).unwrap();
        let fd = numeric_grad(|xs| loss_value(loss, &mlp_forward(&spec, &params, xs).unwrap(), &t), &x);
        for (a, b) in gx.iter().zip(&fd) {
            prop_assert!(rel_err(*a, *b) < 1e-4, "backprop {a} vs fd {b}");
        }
    }

    #[test]
    fn input_relevance_is_normalized_output_sensitivity((spec, params, x, _t, _loss) in net()) {
        let r = input_relevance(&spec, &params, &x).unwrap();
        let fd: Vec<f64> = numeric_grad(|xs| mlp_forward(&spec, &params, xs).unwrap().iter().sum(), &x)
            .iter()
            .map(|g| g.abs())
            .collect();
        let max = fd.iter().copied().fold(0.0, f64::max);
        prop_assume!(max > 1e-6);
        for (a, b) in r.iter().zip(&fd) {
            prop_assert!((a - b / max).abs() < 1e-4, "relevance {a} vs {}", b / max);
        }
        prop_assert!(r.iter().any(|v| (*v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn adam_first_step_moves_each_coordinate_by_about_lr(g in prop::collection::vec(0.01f64..5.0, 1..8), neg in any::<bool>()) {
        let g: Vec<f64> = g.iter().map(|v| if neg { -v } else { *v }).collect();
        let p = vec![0.0; g.len()];
        let opt = OptimizerSpec::adam(0.01);
        let (q, st) = optimizer_step(&opt, &p, &g, 0, &OptState::default()).unwrap();
        for (dq, gi) in q.iter().zip(&g) {
            prop_assert!((dq.abs() - 0.01).abs() < 1e-6);
            prop_assert_eq!(dq.signum(), -gi.signum());
        }
        prop_assert_eq!(st.m.len(), g.len());
    }
}

#[test]
fn sgd_step_is_plain_gradient_descent() {
    let opt = OptimizerSpec::sgd(0.5);
    let (q, _) = optimizer_step(&opt, &[1.0, -2.0], &[0.2, -0.4], 0, &OptState::default()).unwrap();
    assert_eq!(q, vec![0.9, -1.8]);
}

#[test]
fn relu_gradient_away_from_kinks() {
    let spec = MlpSpec::new(&[3, 5, 2], Activation::Relu).unwrap();
    let params = init_params(spec.param_count(), 11);
    let x = [0.3, -0.7, 0.9];
    let t = [0.2, 0.8];
    let g = mlp_grad(&spec, &params, &x, &t, Loss::Mse).unwrap();
    let fd = numeric_grad(|p| loss_value(Loss::Mse, &mlp_forward(&spec, p, &x).unwrap(), &t), &params);
    for (a, b) in g.iter().zip(&fd) {
        assert!(rel_err(*a, *b) < 1e-4 || (a.abs() < 1e-12 && b.abs() < 1e-9), "{a} vs {b}");
    }
}
