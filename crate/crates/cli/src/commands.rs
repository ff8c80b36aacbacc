//! Subcommands. Each writes its report to `out` and returns the exit code.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use xlearn_core::agents::{
    classify, parse_dataset, run_training, run_training_along, witness_matches, Sample, TableRow, TaxonomyLabel,
    WiringKind,
};
use xlearn_core::diagram::{abstract_learning_agent, normalize, PortDiagram};
use xlearn_core::institution::{saliency_syntactic, satisfies};
use xlearn_core::laws::{check_term_laws, TermLawConfig};
use xlearn_core::stream::{
    check_feedback_axioms, check_stream_laws, EqConfig, FeedbackVariant, LawConfig, LawResult,
};
use xlearn_core::translator::{check_functor_laws, random_terms, ConcreteAgent};
use xlearn_core::{Explanation, Value, ValueSpace};

use crate::specfile::SpecFile;

/// Success.
pub const EXIT_OK: u8 = 0;
/// A verification, typing or parse failure.
pub const EXIT_FAIL: u8 = 1;
/// Bad usage or an unreadable file.
pub const EXIT_USAGE: u8 = 2;

/// Settings shared by all subcommands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Globals {
    pub seed: u64,
    pub tol: f64,
    pub horizon: usize,
    /// Instances per law; each suite's default when absent.
    pub samples: Option<usize>,
}

impl Default for Globals {
    fn default() -> Self {
        Globals {
            seed: 0,
            tol: 1e-9,
            horizon: 5,
            samples: None,
        }
    }
}

/// An error that ends a command with `code`.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        usage(e.to_string())
    }
}

fn fail(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_FAIL,
        message: message.into(),
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

pub type CmdResult = Result<u8, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SpecFile, CliError> {
    let src = read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    SpecFile::parse(&src, dir).map_err(|e| fail(format!("{}:{e}", path.display())))
}

fn located(path: &Path, e: impl fmt::Display) -> CliError {
    fail(format!("{}:{e}", path.display()))
}

fn require_agent(spec: &SpecFile, path: &Path, g: Globals) -> Result<ConcreteAgent, CliError> {
    spec.build_agent(g.seed)
        .map_err(|e| located(path, e))?
        .ok_or_else(|| fail(format!("{}: no [translator] section", path.display())))
}

fn load_dataset(spec: &SpecFile, path: &Path, inputs: usize) -> Result<(Vec<Sample>, usize), CliError> {
    let ds = spec
        .dataset
        .as_ref()
        .ok_or_else(|| fail(format!("{}: no [dataset] section", path.display())))?;
    let src = read(&ds.path)?;
    let data = parse_dataset(&src, inputs).map_err(|e| fail(format!("{}: {e}", ds.path.display())))?;
    Ok((data, ds.steps))
}

fn data_inputs(agent: &ConcreteAgent) -> usize {
    agent.profile.predictor.as_ref().map_or(0, |p| p.inputs())
}

/// Typecheck every term and build the translator.
pub fn check(path: &Path, g: Globals, out: &mut dyn Write) -> CmdResult {
    let spec = load(path)?;
    let mut code = EXIT_OK;
    writeln!(
        out,
        "presentation: {} objects, {} generators",
        spec.presentation.objects().count(),
        spec.presentation.generators().count()
    )?;
    for def in &spec.terms {
        match &def.term {
            Ok(t) => {
                let (dom, cod) = t.infer_type().map_err(|e| located(path, format!("{}: {e}", def.span)))?;
                writeln!(out, "{} : {dom} -> {cod}", def.name)?;
            }
            Err(diags) => {
                for d in diags {
                    writeln!(out, "{}:{d}", path.display())?;
                }
                code = EXIT_FAIL;
            }
        }
    }
    if spec.translator.is_some() {
        match spec.build_agent(g.seed) {
            Ok(Some(agent)) => {
                let label = classify(&agent).map_err(|e| fail(e.to_string()))?;
                writeln!(out, "translator: {label}")?;
                if let Err(e) = spec.build_explainer(&agent, None, g.seed) {
                    writeln!(out, "{}:{e}", path.display())?;
                    code = EXIT_FAIL;
                }
            }
            Ok(None) => {}
            Err(e) => {
                writeln!(out, "{}:{e}", path.display())?;
                code = EXIT_FAIL;
            }
        }
    }
    if code == EXIT_OK {
        writeln!(out, "ok")?;
    }
    Ok(code)
}

/// Write the DOT rendering of a term.
pub fn render(path: &Path, term: &str, output: Option<&Path>, normalized: bool, out: &mut dyn Write) -> CmdResult {
    let spec = load(path)?;
    let def = spec
        .term(term)
        .ok_or_else(|| usage(format!("{}: no term named `{term}`", path.display())))?;
    let t = match &def.term {
        Ok(t) => t,
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", path.display())).collect();
            return Err(fail(lines.join("\n")));
        }
    };
    let diagram = if normalized { normalize(t) } else { PortDiagram::lower(t) }.map_err(|e| fail(e.to_string()))?;
    let dot = diagram.to_dot();
    match output {
        Some(p) => fs::write(p, dot).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => out.write_all(dot.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn report(title: &str, results: &[LawResult], out: &mut dyn Write) -> io::Result<bool> {
    writeln!(out, "== {title}")?;
    for r in results {
        writeln!(out, "{r}")?;
    }
    Ok(results.iter().all(LawResult::ok))
}

/// Finite spaces the stream-level laws are sampled over.
fn law_spaces() -> Vec<ValueSpace> {
    vec![
        ValueSpace::naturals(2),
        ValueSpace::naturals(3),
        ValueSpace::FiniteEnum(vec!["a".into(), "b".into()]),
    ]
}

/// Check the feedback axioms and stream laws on finite spaces, and the term
/// and functor laws through the translator of `spec` (the default MLP agent
/// when no spec is given). `mutant` swaps in a broken feedback operator.
pub fn axioms(spec: Option<&Path>, g: Globals, mutant: bool, out: &mut dyn Write) -> CmdResult {
    let agent = match spec {
        Some(p) => require_agent(&load(p)?, p, g)?,
        None => TableRow::Mlp.witness().map_err(|e| fail(e.to_string()))?,
    };
    let mut law_cfg = LawConfig {
        seed: g.seed,
        horizon: g.horizon,
        ..LawConfig::default()
    };
    if let Some(n) = g.samples {
        law_cfg.instances = n;
    }
    if mutant {
        law_cfg.variant = FeedbackVariant::SeedFirstAtom;
    }
    let spaces = law_spaces();
    let stream_err = |e: xlearn_core::StreamError| fail(e.to_string());
    let mut ok = report(
        "feedback axioms",
        &check_feedback_axioms(&spaces, law_cfg).map_err(stream_err)?,
        out,
    )?;
    ok &= report("stream laws", &check_stream_laws(&spaces, law_cfg).map_err(stream_err)?, out)?;

    let eq = EqConfig {
        horizon: g.horizon,
        samples: 10,
        seed: g.seed,
        tol: g.tol,
    };
    let mut term_cfg = TermLawConfig {
        seed: g.seed,
        eq,
        ..TermLawConfig::default()
    };
    if let Some(n) = g.samples {
        term_cfg.instances = n;
    }
    let t = &agent.translator;
    ok &= report(
        "term laws",
        &check_term_laws(t, term_cfg).map_err(|e| fail(e.to_string()))?,
        out,
    )?;
    let mut terms = random_terms(t.presentation(), g.samples.unwrap_or(50), 3, g.seed);
    if let Ok(a) = abstract_learning_agent(t.presentation()) {
        terms.push(a);
    }
    ok &= report(
        "functor laws",
        &check_functor_laws(t, &terms, eq).map_err(|e| fail(e.to_string()))?,
        out,
    )?;
    writeln!(out, "{}", if ok { "all laws hold" } else { "some laws FAIL" })?;
    Ok(if ok { EXIT_OK } else { EXIT_FAIL })
}

/// Train the spec's agent on its dataset.
pub fn train(path: &Path, g: Globals, steps: Option<usize>, trace: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let spec = load(path)?;
    let agent = require_agent(&spec, path, g)?;
    let (data, default_steps) = load_dataset(&spec, path, data_inputs(&agent))?;
    let steps = steps.unwrap_or(default_steps);
    let run = run_training(&agent, &data, steps).map_err(|e| fail(e.to_string()))?;
    let label = classify(&agent).map_err(|e| fail(e.to_string()))?;
    writeln!(out, "{label}")?;
    writeln!(out, "steps: {steps}")?;
    let last_loss = run.losses.as_ref().and_then(|l| l.last().copied());
    match last_loss {
        Some(l) => writeln!(out, "final loss: {l:.6}")?,
        None => writeln!(out, "final loss: n/a")?,
    }
    match run.final_mse {
        Some(m) if steps > 0 => writeln!(out, "final mse: {m:.6}")?,
        _ => writeln!(out, "final mse: n/a")?,
    }
    if let Some(p) = trace {
        fs::write(p, run.to_table()).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    Ok(EXIT_OK)
}

fn parse_row(row: &str) -> Result<Vec<f64>, CliError> {
    row.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number `{}` in --input", f.trim())))
        })
        .collect()
}

fn find_explanation(outputs: &[Value]) -> Option<&Explanation> {
    outputs.iter().find_map(|v| match v {
        Value::Explanation(e) => Some(e),
        _ => None,
    })
}

/// Train the base model, build the explainer over the trained parameters
/// and explain one input row `x1,..,xn[,y1,..]`.
pub fn explain(path: &Path, g: Globals, input: &str, out: &mut dyn Write) -> CmdResult {
    let spec = load(path)?;
    let base = require_agent(&spec, path, g)?;
    if spec.explainer.is_none() {
        return Err(fail(format!(
            "{}: not an explainer: the spec has no [explainer] section",
            path.display()
        )));
    }
    let n = data_inputs(&base);
    let m = base.profile.predictor.as_ref().map_or(0, |p| p.outputs());
    let row = parse_row(input)?;
    if row.len() != n && row.len() != n + m {
        return Err(usage(format!("--input needs {n} inputs, optionally followed by {m} targets")));
    }
    let sample = Sample {
        x: row[..n].to_vec(),
        y: if row.len() > n { row[n..].to_vec() } else { vec![0.0; m] },
    };
    let (data, steps) = load_dataset(&spec, path, n)?;
    let trained = run_training(&base, &data, steps).map_err(|e| fail(e.to_string()))?;
    let params = trained.final_params.or_else(|| Some(base.profile.init_params.clone()));
    let explainer = spec
        .build_explainer(&base, params, g.seed)
        .map_err(|e| located(path, e))?
        .expect("explainer section present");
    let label = classify(&explainer).map_err(|e| fail(e.to_string()))?;
    let learns = matches!(label.kind, WiringKind::Intrinsic | WiringKind::Cbm);
    let mut feed: Vec<Sample> = if learns {
        (0..steps).map(|i| data[i % data.len()].clone()).collect()
    } else {
        Vec::new()
    };
    feed.push(sample);
    let run = run_training_along(&explainer, &feed, feed.len(), None).map_err(|e| fail(e.to_string()))?;
    let last = run.trace.outputs.last().expect("at least one step");
    let e = find_explanation(last).ok_or_else(|| fail("the explainer produced no explanation"))?;
    writeln!(out, "{label}")?;
    writeln!(out, "signature: {}", e.signature())?;
    match e.model() {
        Some(model) => {
            writeln!(out, "degrees: {e}")?;
            let lifted = saliency_syntactic(model).map_err(|x| fail(x.to_string()))?;
            for s in lifted.sentences() {
                let holds = satisfies(model, s).map_err(|x| fail(x.to_string()))?;
                writeln!(out, "sentence: {s}")?;
                if !holds {
                    writeln!(out, "satisfied: false")?;
                    return Ok(EXIT_FAIL);
                }
            }
            writeln!(out, "satisfied: true")?;
        }
        None => {
            for s in e.sentences() {
                writeln!(out, "sentence: {s}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Classify the spec's agent, or its explainer when it declares one, and
/// list the table rows it witnesses.
pub fn classify_cmd(path: &Path, g: Globals, out: &mut dyn Write) -> CmdResult {
    let spec = load(path)?;
    let base = require_agent(&spec, path, g)?;
    let agent = match spec.build_explainer(&base, None, g.seed).map_err(|e| located(path, e))? {
        Some(e) => e,
        None => base,
    };
    let label: TaxonomyLabel = classify(&agent).map_err(|e| fail(e.to_string()))?;
    writeln!(out, "{label}")?;
    let rows: Vec<String> = TableRow::ALL
        .into_iter()
        .filter(|r| witness_matches(*r, &agent))
        .map(|r| r.to_string())
        .collect();
    writeln!(out, "rows: {}", if rows.is_empty() { "none".into() } else { rows.join(", ") })?;
    Ok(EXIT_OK)
}
