use std::fmt;
use std::sync::Arc;

use super::value::{SpaceSeq, Value, ValueSpace};
use super::StreamError;

/// One running instance of a stream morphism: it receives the inputs of
/// successive steps and keeps whatever history it needs.
pub trait Runner: Send {
    fn step(&mut self, inputs: Vec<Value>) -> Vec<Value>;

    /// The state fed back after the latest step, for feedback runners.
    fn state(&self) -> Option<Vec<Value>> {
        None
    }
}

type Factory = Arc<dyn Fn() -> Box<dyn Runner> + Send + Sync>;

/// A causal family `f_n : X_0 x ... x X_n -> Y_n`.
///
/// Values at a step are vectors with one entry per wire. Component `n` is
/// realised by feeding inputs `0..=n` to a fresh [`Runner`], so causality
/// holds by construction.
#[derive(Clone)]
pub struct StreamMorphism {
    dom: Vec<SpaceSeq>,
    cod: Vec<SpaceSeq>,
    factory: Factory,
}

impl fmt::Debug for StreamMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StreamMorphism")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .finish_non_exhaustive()
    }
}

struct StepRunner<S, F> {
    state: S,
    n: usize,
    f: Arc<F>,
}

impl<S, F> Runner for StepRunner<S, F>
where
    S: Send,
    F: Fn(&mut S, usize, &[Value]) -> Vec<Value> + Send + Sync,
{
    fn step(&mut self, inputs: Vec<Value>) -> Vec<Value> {
        let out = (self.f)(&mut self.state, self.n, &inputs);
        self.n += 1;
        out
    }
}

struct HistoryRunner<F> {
    history: Vec<Vec<Value>>,
    f: Arc<F>,
}

impl<F> Runner for HistoryRunner<F>
where
    F: Fn(&[Vec<Value>]) -> Vec<Value> + Send + Sync,
{
    fn step(&mut self, inputs: Vec<Value>) -> Vec<Value> {
        self.history.push(inputs);
        (self.f)(&self.history)
    }
}

impl StreamMorphism {
    pub fn dom(&self) -> &[SpaceSeq] {
        &self.dom
    }

    pub fn cod(&self) -> &[SpaceSeq] {
        &self.cod
    }

    pub fn runner(&self) -> Box<dyn Runner> {
        (self.factory)()
    }

    pub fn from_factory(
        dom: Vec<SpaceSeq>,
        cod: Vec<SpaceSeq>,
        factory: impl Fn() -> Box<dyn Runner> + Send + Sync + 'static,
    ) -> Self {
        StreamMorphism {
            dom,
            cod,
            factory: Arc::new(factory),
        }
    }

    /// A state machine: `step(state, n, inputs_n)` returns the outputs of step
    /// `n`; `init` creates the state of a fresh run.
    pub fn from_step<S, I, F>(dom: Vec<SpaceSeq>, cod: Vec<SpaceSeq>, init: I, step: F) -> Self
    where
        S: Send + 'static,
        I: Fn() -> S + Send + Sync + 'static,
        F: Fn(&mut S, usize, &[Value]) -> Vec<Value> + Send + Sync + 'static,
    {
        let f = Arc::new(step);
        StreamMorphism::from_factory(dom, cod, move || {
            Box::new(StepRunner {
                state: init(),
                n: 0,
                f: Arc::clone(&f),
            })
        })
    }

    /// Pointwise: `y_n = f(n, x_n)`.
    pub fn pointwise<F>(dom: Vec<SpaceSeq>, cod: Vec<SpaceSeq>, f: F) -> Self
    where
        F: Fn(usize, &[Value]) -> Vec<Value> + Send + Sync + 'static,
    {
        StreamMorphism::from_step(dom, cod, || (), move |_, n, x| f(n, x))
    }

    /// Components given on whole histories, oldest entry first.
    pub fn from_components<F>(dom: Vec<SpaceSeq>, cod: Vec<SpaceSeq>, f: F) -> Self
    where
        F: Fn(&[Vec<Value>]) -> Vec<Value> + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        StreamMorphism::from_factory(dom, cod, move || {
            Box::new(HistoryRunner {
                history: Vec::new(),
                f: Arc::clone(&f),
            })
        })
    }
}

fn mismatch(what: &str, expected: &[SpaceSeq], found: &[SpaceSeq]) -> StreamError {
    let show = |v: &[SpaceSeq]| {
        if v.is_empty() {
            "unit".to_string()
        } else {
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x ")
        }
    };
    StreamError::SpaceMismatch(format!("{what}: expected {}, found {}", show(expected), show(found)))
}

pub fn stream_identity(spaces: Vec<SpaceSeq>) -> StreamMorphism {
    StreamMorphism::pointwise(spaces.clone(), spaces, |_, x| x.to_vec())
}

struct ComposeRunner(Box<dyn Runner>, Box<dyn Runner>);

impl Runner for ComposeRunner {
    fn step(&mut self, inputs: Vec<Value>) -> Vec<Value> {
        let mid = self.0.step(inputs);
        self.1.step(mid)
    }
}

/// `f ; g`: component `n` applies `g_n` to the outputs of `f` up to `n`.
pub fn stream_compose(f: &StreamMorphism, g: &StreamMorphism) -> Result<StreamMorphism, StreamError> {
    if f.cod != g.dom {
        return Err(mismatch("composition", &f.cod, &g.dom));
    }
    let (ff, gf) = (Arc::clone(&f.factory), Arc::clone(&g.factory));
    Ok(StreamMorphism::from_factory(f.dom.clone(), g.cod.clone(), move || {
        Box::new(ComposeRunner(ff(), gf()))
    }))
}

struct TensorRunner(Box<dyn Runner>, Box<dyn Runner>, usize);

impl Runner for TensorRunner {
    fn step(&mut self, mut inputs: Vec<Value>) -> Vec<Value> {
        let right = inputs.split_off(self.2);
        let mut out = self.0.step(inputs);
        out.extend(self.1.step(right));
        out
    }
}

/// `f x g`, running both on their own halves of each input.
pub fn stream_tensor(f: &StreamMorphism, g: &StreamMorphism) -> StreamMorphism {
    let (ff, gf) = (Arc::clone(&f.factory), Arc::clone(&g.factory));
    let split = f.dom.len();
    let dom = [f.dom.clone(), g.dom.clone()].concat();
    let cod = [f.cod.clone(), g.cod.clone()].concat();
    StreamMorphism::from_factory(dom, cod, move || Box::new(TensorRunner(ff(), gf(), split)))
}

pub fn stream_copy(spaces: Vec<SpaceSeq>) -> StreamMorphism {
    let cod = [spaces.clone(), spaces.clone()].concat();
    StreamMorphism::pointwise(spaces, cod, |_, x| [x, x].concat())
}

/// The unique map to the unit; its output is the empty value list, which is
/// how `*` is represented once unit wires are erased.
pub fn stream_discard(spaces: Vec<SpaceSeq>) -> StreamMorphism {
    StreamMorphism::pointwise(spaces, Vec::new(), |_, _| Vec::new())
}

pub fn stream_symmetry(xs: Vec<SpaceSeq>, ys: Vec<SpaceSeq>) -> StreamMorphism {
    let k = xs.len();
    let dom = [xs.clone(), ys.clone()].concat();
    let cod = [ys, xs].concat();
    StreamMorphism::pointwise(dom, cod, move |_, x| [&x[k..], &x[..k]].concat())
}

/// How the state slot is filled at step 0.
#[derive(Clone, Copy, Debug, Default, Eq, PartialEq)]
pub enum FeedbackVariant {
    /// `*`, the only value of the delayed state at step 0.
    #[default]
    Standard,
    /// A deliberately wrong variant used as a mutation fixture: the state is
    /// seeded with the first element of the state space.
    SeedFirstAtom,
}

struct FeedbackRunner {
    body: Box<dyn Runner>,
    prev: Vec<Value>,
    width: usize,
}

impl Runner for FeedbackRunner {
    fn step(&mut self, mut inputs: Vec<Value>) -> Vec<Value> {
        inputs.append(&mut self.prev);
        let mut out = self.body.step(inputs);
        self.prev = out.split_off(out.len() - self.width);
        out
    }

    fn state(&self) -> Option<Vec<Value>> {
        Some(self.prev.clone())
    }
}

/// `fbk_S(body)` with the body typed `X x F(S) -> Y x S`.
pub fn stream_feedback(body: &StreamMorphism, state: Vec<SpaceSeq>) -> Result<StreamMorphism, StreamError> {
    stream_feedback_with(body, state, FeedbackVariant::Standard)
}

/// As [`stream_feedback`]. The body's state inputs may be declared either as
/// `F(S)` or as `S`; at step 0 they receive `*` in both cases.
pub fn stream_feedback_with(
    body: &StreamMorphism,
    state: Vec<SpaceSeq>,
    variant: FeedbackVariant,
) -> Result<StreamMorphism, StreamError> {
    let k = state.len();
    let shape = || StreamError::FeedbackShape {
        state: state.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x "),
        dom: body.dom.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x "),
        cod: body.cod.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x "),
    };
    if body.dom.len() < k || body.cod.len() < k {
        return Err(shape());
    }
    let (x, ds) = body.dom.split_at(body.dom.len() - k);
    let (y, cs) = body.cod.split_at(body.cod.len() - k);
    let dom_ok = ds
        .iter()
        .zip(&state)
        .all(|(d, s)| d == s || *d == s.clone().delayed());
    if !dom_ok || cs != state.as_slice() {
        return Err(shape());
    }
    let init: Vec<Value> = match variant {
        FeedbackVariant::Standard => vec![Value::Star; k],
        FeedbackVariant::SeedFirstAtom => state
            .iter()
            .map(|s| s.at(0).nth(0).unwrap_or(Value::Star))
            .collect(),
    };
    let bf = Arc::clone(&body.factory);
    Ok(StreamMorphism::from_factory(x.to_vec(), y.to_vec(), move || {
        Box::new(FeedbackRunner {
            body: bf(),
            prev: init.clone(),
            width: k,
        })
    }))
}

struct DelayRunner {
    inner: Box<dyn Runner>,
    width: usize,
    started: bool,
}

impl Runner for DelayRunner {
    fn step(&mut self, inputs: Vec<Value>) -> Vec<Value> {
        if !self.started {
            self.started = true;
            return vec![Value::Star; self.width];
        }
        self.inner.step(inputs)
    }
}

/// The delay functor on morphisms: `*` at step 0, then `g` run on the inputs
/// from step 1 onward.
pub fn stream_delay(g: &StreamMorphism) -> StreamMorphism {
    let gf = Arc::clone(&g.factory);
    let width = g.cod.len();
    let dom = g.dom.iter().cloned().map(SpaceSeq::delayed).collect();
    let cod = g.cod.iter().cloned().map(SpaceSeq::delayed).collect();
    StreamMorphism::from_factory(dom, cod, move || {
        Box::new(DelayRunner {
            inner: gf(),
            width,
            started: false,
        })
    })
}

/// Inputs, outputs and (for feedback morphisms) the state after each step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalTrace {
    pub inputs: Vec<Vec<Value>>,
    pub outputs: Vec<Vec<Value>>,
    pub feedback_states: Option<Vec<Vec<Value>>>,
}

impl EvalTrace {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// `step|inputs|outputs|state` lines, plus a `loss` column when given.
    pub fn to_table(&self, losses: Option<&[f64]>) -> String {
        let row = |vs: &[Value]| {
            if vs.is_empty() {
                "*".to_string()
            } else {
                vs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            }
        };
        let mut s = String::from("step|inputs|outputs|state");
        if losses.is_some() {
            s.push_str("|loss");
        }
        s.push('\n');
        for n in 0..self.len() {
            let state = self
                .feedback_states
                .as_ref()
                .map_or("-".to_string(), |st| row(&st[n]));
            s.push_str(&format!("{n}|{}|{}|{state}", row(&self.inputs[n]), row(&self.outputs[n])));
            if let Some(l) = losses {
                s.push_str(&format!("|{:.9}", l[n]));
            }
            s.push('\n');
        }
        s
    }
}

fn check_inputs(f: &StreamMorphism, n: usize, x: &[Value]) -> Result<(), StreamError> {
    if x.len() != f.dom.len() {
        return Err(StreamError::SpaceMismatch(format!(
            "step {n}: {} input values for {} wires",
            x.len(),
            f.dom.len()
        )));
    }
    for (i, (v, s)) in x.iter().zip(&f.dom).enumerate() {
        let space: ValueSpace = s.at(n);
        if !space.contains(v) {
            return Err(StreamError::SpaceMismatch(format!(
                "step {n}, wire {i}: {v} is not in {space}"
            )));
        }
    }
    Ok(())
}

/// Outputs `y_0..y_n` for inputs `x_0..x_n`.
pub fn prefix_evaluate(f: &StreamMorphism, inputs: &[Vec<Value>]) -> Result<Vec<Vec<Value>>, StreamError> {
    Ok(prefix_evaluate_traced(f, inputs)?.outputs)
}

pub fn prefix_evaluate_traced(f: &StreamMorphism, inputs: &[Vec<Value>]) -> Result<EvalTrace, StreamError> {
    let mut r = f.runner();
    let mut trace = EvalTrace::default();
    let mut states = Vec::new();
    for (n, x) in inputs.iter().enumerate() {
        check_inputs(f, n, x)?;
        trace.outputs.push(r.step(x.clone()));
        trace.inputs.push(x.clone());
        if let Some(s) = r.state() {
            states.push(s);
        }
    }
    if !states.is_empty() {
        trace.feedback_states = Some(states);
    }
    Ok(trace)
}
