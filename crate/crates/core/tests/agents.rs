use xlearn_core::agents::*;
use xlearn_core::stream::Value;
use xlearn_core::translator::{classify_agent_kind, AgentKind};

fn xor() -> Vec<Sample> {
    [([0.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([1.0, 0.0], 1.0), ([1.0, 1.0], 0.0)]
        .iter()
        .map(|(x, y)| Sample { x: x.to_vec(), y: vec![*y] })
        .collect()
}

fn xor_agent(opt: OptimizerSpec) -> ConcreteAgentAlias {
    build_mlp_agent(&MlpSpec::sigmoid(&[2, 4, 1]).unwrap(), opt, 0).unwrap()
}

type ConcreteAgentAlias = xlearn_core::translator::ConcreteAgent;

fn sgd() -> OptimizerSpec {
    OptimizerSpec::sgd(0.5).with_loss(Loss::Bce)
}

#[test]
fn mlp_agent_is_a_plain_supervised_la() {
    let a = xor_agent(sgd());
    assert_eq!(classify_agent_kind(&a.translator), AgentKind::La);
    let l = classify(&a).unwrap();
    assert_eq!(l.kind, WiringKind::PlainLA);
    assert!(l.supervised && l.constant_architecture);
}

#[test]
fn one_step_consumes_target_and_input() {
    let a = xor_agent(sgd());
    let run = run_training(&a, &xor()[1..2], 1).unwrap();
    assert_eq!(run.trace.inputs[0], vec![Value::reals(&[1.0]), Value::reals(&[0.0, 1.0])]);
    assert_eq!(run.trace.outputs[0].len(), 1);
    assert!(matches!(&run.trace.outputs[0][0], Value::Prediction { input, .. } if input == &[0.0, 1.0]));
}

#[test]
fn xor_trains_with_sgd_and_adam() {
    for opt in [sgd(), OptimizerSpec::adam(0.05).with_loss(Loss::Bce)] {
        let run = run_training(&xor_agent(opt), &xor(), 2000).unwrap();
        let mse = run.final_mse.unwrap();
        assert!(mse < 0.05, "{opt:?}: {mse}");
        let losses = run.losses.unwrap();
        let first: f64 = losses[..100].iter().sum();
        let last: f64 = losses[1900..].iter().sum();
        assert!(last < first);
    }
}

#[test]
fn zero_steps_give_an_empty_trace() {
    let run = run_training(&xor_agent(sgd()), &xor(), 0).unwrap();
    assert!(run.trace.is_empty());
    assert_eq!(run.final_params, None);
}

#[test]
fn compiled_trajectory_matches_hand_loop() {
    let spec = MlpSpec::sigmoid(&[2, 4, 1]).unwrap();
    let opt = OptimizerSpec::adam(0.05).with_loss(Loss::Bce);
    let a = build_mlp_agent(&spec, opt, 0).unwrap();
    let data = xor();
    let run = run_training(&a, &data, 50).unwrap();
    let states = run.trace.feedback_states.unwrap();
    let mut p = init_params(spec.param_count(), 0);
    let mut st = OptState::default();
    for n in 0..50 {
        let s = &data[n % 4];
        let g = mlp_grad(&spec, &p, &s.x, &s.y, opt.loss).unwrap();
        (p, st) = optimizer_step(&opt, &p, &g, n, &st).unwrap();
        assert_eq!(states[n][0], Value::Reals(p.clone()));
    }
}

#[test]
fn explainers_classify_as_built() {
    let base = xor_agent(sgd());
    for kind in WiringKind::BUILDABLE {
        let e = build_explainer(kind, &base, &ExplainerConfig::default()).unwrap();
        assert_eq!(classify(&e).unwrap().kind, kind);
        let run = run_training(&e, &xor(), 3).unwrap();
        assert_eq!(run.trace.len(), 3);
    }
    assert_eq!(
        build_explainer(WiringKind::PlainLA, &base, &ExplainerConfig::default()).unwrap_err(),
        AgentError::UnsupportedKind(WiringKind::PlainLA)
    );
}

#[test]
fn table_rows_have_witnesses() {
    for row in TableRow::ALL {
        let w = row.witness().unwrap();
        assert!(witness_matches(row, &w), "{row}");
    }
}

#[test]
fn posthoc_over_trained_xor() {
    let data = xor();
    let base = xor_agent(sgd());
    let run = run_training(&base, &data, 2000).unwrap();
    let cfg = ExplainerConfig { params: run.final_params.clone(), ..Default::default() };
    let e = build_explainer(WiringKind::PostHoc, &base, &cfg).unwrap();
    let out = run_training(&e, &data, 4).unwrap();
    let theta = run.final_params.unwrap();
    let spec = MlpSpec::sigmoid(&[2, 4, 1]).unwrap();
    for (o, s) in out.trace.outputs.iter().zip(&data) {
        let Value::Explanation(ex) = &o[1] else { panic!("explanation expected") };
        let degrees = ex.model().unwrap().degree_vector();
        assert!(degrees.iter().all(|d| *d > 0.3), "{degrees:?}");
        // Oracle: flipping either input moves the trained output a lot.
        let y0 = mlp_forward(&spec, &theta, &s.x).unwrap()[0];
        for i in 0..2 {
            let mut x = s.x.clone();
            x[i] = 1.0 - x[i];
            assert!((mlp_forward(&spec, &theta, &x).unwrap()[0] - y0).abs() > 0.3);
        }
    }
}

#[test]
fn nas_with_one_architecture_matches_mlp() {
    let spec = MlpSpec::sigmoid(&[2, 4, 1]).unwrap();
    let a = build_mlp_agent(&spec, sgd(), 3).unwrap();
    let b = build_nas_agent(&[spec], sgd(), 3).unwrap();
    let ra = run_training(&a, &xor(), 40).unwrap();
    let rb = run_training(&b, &xor(), 40).unwrap();
    assert_eq!(ra.trace, rb.trace);
    assert!(classify(&b).unwrap().constant_architecture);
}

#[test]
fn nas_switches_architecture() {
    let small = MlpSpec::sigmoid(&[2, 2, 1]).unwrap();
    let big = MlpSpec::sigmoid(&[2, 4, 1]).unwrap();
    let a = build_nas_agent(&[small.clone(), big.clone()], sgd(), 0).unwrap();
    let label = classify(&a).unwrap();
    assert_eq!((label.kind, label.constant_architecture), (WiringKind::PlainLA, false));
    let run = run_training(&a, &xor(), 2).unwrap();
    let init = init_params(big.param_count(), 0);
    let probe = |spec: &MlpSpec, p: &[f64], x: &[f64]| mlp_forward(spec, &p[..spec.param_count()], x).unwrap();
    assert_eq!(run.trace.outputs[0][0].as_reals().unwrap(), probe(&small, &init, &[0.0, 0.0]).as_slice());
    let p1 = match &run.trace.feedback_states.as_ref().unwrap()[0][0] {
        Value::Reals(p) => p.clone(),
        v => panic!("{v:?}"),
    };
    assert_eq!(run.trace.outputs[1][0].as_reals().unwrap(), probe(&big, &p1, &[0.0, 1.0]).as_slice());
    assert_ne!(probe(&small, &p1, &[0.0, 1.0]), probe(&big, &p1, &[0.0, 1.0]));
}

#[test]
fn cbm_task_reads_concepts() {
    let base = xor_agent(sgd());
    let e = build_explainer(WiringKind::Cbm, &base, &ExplainerConfig::default()).unwrap();
    let Some(Predictor::Cbm { concept, task }) = e.profile.predictor.clone() else { panic!() };
    let run = run_training(&e, &xor(), 30).unwrap();
    let mut theta = e.profile.init_params.clone();
    for (n, out) in run.trace.outputs.iter().enumerate() {
        let x = &xor()[n % 4].x;
        let (a, b) = theta.split_at(concept.param_count());
        let c = mlp_forward(&concept, a, x).unwrap();
        let Value::Explanation(ex) = &out[1] else { panic!() };
        assert_eq!(ex.model().unwrap().degree_vector(), c);
        assert_eq!(out[0].as_reals().unwrap(), mlp_forward(&task, b, &c).unwrap().as_slice());
        let Value::Tuple(ps) = &run.trace.feedback_states.as_ref().unwrap()[n][0] else { panic!() };
        theta = ps.iter().flat_map(|p| p.as_reals().unwrap().to_vec()).collect();
    }
}

#[test]
fn syntactic_explainer_lifts_saliency() {
    use xlearn_core::institution::ExplanationMode;
    let base = xor_agent(sgd());
    let cfg = ExplainerConfig { mode: ExplanationMode::Syntactic, ..Default::default() };
    let e = build_explainer(WiringKind::BackwardBased, &base, &cfg).unwrap();
    assert!(matches!(classify(&e).unwrap().agent_kind, AgentKind::SyntacticXla(_)));
    let run = run_training(&e, &xor(), 2).unwrap();
    let Value::Explanation(ex) = &run.trace.outputs[1][1] else { panic!() };
    assert_eq!(ex.sentences().len(), 1);
}

#[test]
fn dataset_parsing() {
    let d = parse_dataset("x1,x2,y\n0,1,1\n\n# note\n1,1,0\n", 2).unwrap();
    assert_eq!(d, vec![Sample { x: vec![0.0, 1.0], y: vec![1.0] }, Sample { x: vec![1.0, 1.0], y: vec![0.0] }]);
    assert!(matches!(parse_dataset("0,1,1\n1,a,0\n", 2), Err(AgentError::Dataset { line: 2, .. })));
    assert!(matches!(parse_dataset("0,1,1\n1,0\n", 2), Err(AgentError::Dataset { line: 2, .. })));
    assert!(run_training(&xor_agent(sgd()), &[], 3).is_err());
}

#[test]
fn mismatched_dataset_is_a_space_error() {
    let bad = vec![Sample { x: vec![1.0], y: vec![0.0] }];
    assert!(matches!(
        run_training(&xor_agent(sgd()), &bad, 2),
        Err(AgentError::Stream(_))
    ));
}
