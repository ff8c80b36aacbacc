//! Spec files: a presentation, named terms, and optional translator,
//! explainer and dataset sections.
//!
//! ```text
//! [presentation]
//! objects = X, Y, Y*, P, E
//! eta : X x P -> Y x E
//!
//! [terms]
//! agent = fbk[P]((... ; ...))      # indented lines continue a term
//!
//! [translator]
//! X = R^2
//! eta = mlp(layers=[2,4,1])
//! nabla = sgd(lr=0.5, loss=bce)
//!
//! [explainer]
//! kind = post-hoc
//!
//! [dataset]
//! path = xor.csv
//! steps = 2000
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use xlearn_core::agents::{
    build_autoencoder, build_explainer, build_mlp_agent, build_nas_agent, build_rnn_agent, Activation,
    ExplainerConfig, Loss, MlpSpec, OptimizerKind, OptimizerSpec, WiringKind,
};
use xlearn_core::diagram::{
    build_xlearn, elaborate, make_presentation, parse_object_at, parse_term_ast, Diagnostic, DiagramError,
    GeneratorDecl, MorphismTerm, Presentation, Span,
};
use xlearn_core::institution::ExplanationMode;
use xlearn_core::translator::ConcreteAgent;
use xlearn_core::{SpaceSeq, ValueSpace};

/// A located error in a spec file.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for SpecError {}

fn err(line: usize, col: usize, message: impl Into<String>) -> SpecError {
    SpecError {
        line,
        col,
        message: message.into(),
    }
}

impl From<DiagramError> for SpecError {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::Parse { line, col, message } => err(line, col, format!("parse error: {message}")),
            other => err(0, 0, other.to_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TermDef {
    pub name: String,
    pub span: Span,
    pub term: Result<MorphismTerm, Vec<Diagnostic>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Mlp(MlpSpec),
    Nas(Vec<MlpSpec>),
    Rnn { inputs: usize, state: usize, outputs: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Declared<T> {
    pub value: T,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslatorSection {
    pub objects: BTreeMap<String, Declared<ValueSpace>>,
    pub eta: Declared<Kernel>,
    pub nabla: Declared<OptimizerSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplainerSection {
    pub kind: Declared<WiringKind>,
    pub config: ExplainerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSection {
    pub path: PathBuf,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct SpecFile {
    pub presentation: Presentation,
    pub terms: Vec<TermDef>,
    pub translator: Option<TranslatorSection>,
    pub explainer: Option<ExplainerSection>,
    pub dataset: Option<DatasetSection>,
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
enum Section {
    Presentation,
    Terms,
    Translator,
    Explainer,
    Dataset,
}

/// One logical entry: a key, its value text, and where the value starts.
#[derive(Clone, Debug)]
struct Entry {
    key: String,
    sep: char,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

fn strip_comment(line: &str) -> &str {
    line.find('#').map_or(line, |i| &line[..i])
}

fn leading_ws(s: &str) -> usize {
    s.chars().take_while(|c| c.is_whitespace()).count()
}

/// Split the file into sections of entries. Indented lines continue the
/// previous entry's value.
fn entries(src: &str) -> Result<Vec<(Section, usize, Vec<Entry>)>, SpecError> {
    let mut out: Vec<(Section, usize, Vec<Entry>)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let text = strip_comment(raw);
        if text.trim().is_empty() {
            continue;
        }
        let indent = leading_ws(text);
        let body = text.trim_end();
        if indent > 0 {
            if let Some(entry) = out.last_mut().and_then(|(_, _, es)| es.last_mut()) {
                entry.value.push('\n');
                entry.value.push_str(body);
                continue;
            }
        }
        let trimmed = body.trim_start();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, indent + 1, "unterminated section header"))?;
            let section = match name.trim() {
                "presentation" => Section::Presentation,
                "terms" => Section::Terms,
                "translator" => Section::Translator,
                "explainer" => Section::Explainer,
                "dataset" => Section::Dataset,
                other => return Err(err(line_no, indent + 2, format!("unknown section `{other}`"))),
            };
            if out.iter().any(|(s, _, _)| *s == section) {
                return Err(err(line_no, indent + 1, format!("duplicate section `{}`", name.trim())));
            }
            out.push((section, line_no, Vec::new()));
            continue;
        }
        let Some((_, _, es)) = out.last_mut() else {
            return Err(err(line_no, indent + 1, "entry outside of a section"));
        };
        let pos = trimmed
            .find(['=', ':'])
            .ok_or_else(|| err(line_no, indent + 1, "expected `key = value` or `name : type`"))?;
        let key = trimmed[..pos].trim().to_string();
        if key.is_empty() {
            return Err(err(line_no, indent + 1, "missing key"));
        }
        let after = &trimmed[pos + 1..];
        let value_col = indent + pos + 2 + leading_ws(after);
        es.push(Entry {
            key,
            sep: trimmed.as_bytes()[pos] as char,
            value: after.trim().to_string(),
            line: line_no,
            key_col: indent + 1,
            value_col,
        });
    }
    Ok(out)
}

impl Entry {
    fn at(&self, message: impl Into<String>) -> SpecError {
        err(self.line, self.value_col, message)
    }

    fn origin(&self) -> Span {
        Span {
            line: self.line,
            col: self.value_col,
        }
    }

    fn number<T: std::str::FromStr>(&self) -> Result<T, SpecError> {
        self.value
            .parse()
            .map_err(|_| self.at(format!("`{}` is not a valid number", self.value)))
    }
}

/// `R^n`, `unit`, `{a, b}` and products of these with `x`.
pub fn parse_space(src: &str) -> Result<ValueSpace, String> {
    let mut factors = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let bytes = src.as_bytes();
    for (i, c) in src.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            'x' if depth == 0
                && (i == 0 || bytes[i - 1].is_ascii_whitespace())
                && bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace()) =>
            {
                factors.push(&src[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    factors.push(&src[start..]);
    let parsed: Result<Vec<ValueSpace>, String> = factors.iter().map(|f| parse_factor(f.trim())).collect();
    let mut parsed = parsed?;
    Ok(if parsed.len() == 1 {
        parsed.pop().expect("one factor")
    } else {
        ValueSpace::ProductSpace(parsed)
    })
}

fn parse_factor(f: &str) -> Result<ValueSpace, String> {
    if f == "unit" || f == "I" {
        return Ok(ValueSpace::Singleton);
    }
    if let Some(n) = f.strip_prefix("R^") {
        return n
            .trim()
            .parse()
            .map(ValueSpace::RealVector)
            .map_err(|_| format!("bad dimension in `{f}`"));
    }
    if let Some(inner) = f.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        let items: Vec<String> = inner
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() {
            return Err("empty finite set".into());
        }
        return Ok(ValueSpace::FiniteEnum(items));
    }
    Err(format!("unknown space `{f}`; expected R^n, unit or {{a, b}}"))
}

#[derive(Clone, Debug, PartialEq)]
enum Arg {
    Num(f64),
    Ident(String),
    List(Vec<Arg>),
}

#[derive(Clone, Debug)]
struct Call {
    name: String,
    args: Vec<(String, Arg, usize)>,
}

struct CallParser<'a> {
    chars: Vec<char>,
    pos: usize,
    entry: &'a Entry,
}

impl CallParser<'_> {
    fn fail(&self, message: impl Into<String>) -> SpecError {
        err(self.entry.line, self.entry.value_col + self.pos, message)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<(), SpecError> {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(format!("expected `{c}`")))
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn word(&mut self) -> Result<String, SpecError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '+'))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.fail("expected a name or number"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn arg(&mut self) -> Result<Arg, SpecError> {
        if self.peek() == Some('[') {
            self.pos += 1;
            let mut items = Vec::new();
            if self.peek() == Some(']') {
                self.pos += 1;
                return Ok(Arg::List(items));
            }
            loop {
                items.push(self.arg()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(']') => {
                        self.pos += 1;
                        return Ok(Arg::List(items));
                    }
                    _ => return Err(self.fail("expected `,` or `]`")),
                }
            }
        }
        let w = self.word()?;
        Ok(match w.parse::<f64>() {
            Ok(x) => Arg::Num(x),
            Err(_) => Arg::Ident(w),
        })
    }

    fn call(mut self) -> Result<Call, SpecError> {
        let name = self.word()?;
        let mut args = Vec::new();
        if self.peek().is_some() {
            self.eat('(')?;
            if self.peek() == Some(')') {
                self.pos += 1;
            } else {
                loop {
                    self.skip_ws();
                    let col = self.pos;
                    let key = self.word()?;
                    self.eat('=')?;
                    args.push((key, self.arg()?, col));
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.fail("expected `,` or `)`")),
                    }
                }
            }
        }
        if self.peek().is_some() {
            return Err(self.fail("unexpected trailing input"));
        }
        Ok(Call { name, args })
    }
}

fn parse_call(entry: &Entry) -> Result<Call, SpecError> {
    CallParser {
        chars: entry.value.chars().collect(),
        pos: 0,
        entry,
    }
    .call()
}

struct Args<'a> {
    call: Call,
    entry: &'a Entry,
}

impl Args<'_> {
    fn take(&mut self, key: &str) -> Option<(Arg, usize)> {
        let i = self.call.args.iter().position(|(k, _, _)| k == key)?;
        let (_, a, col) = self.call.args.remove(i);
        Some((a, col))
    }

    fn at(&self, col: usize, message: impl Into<String>) -> SpecError {
        err(self.entry.line, self.entry.value_col + col, message)
    }

    fn num(&mut self, key: &str, default: Option<f64>) -> Result<f64, SpecError> {
        match self.take(key) {
            Some((Arg::Num(x), _)) => Ok(x),
            Some((_, col)) => Err(self.at(col, format!("`{key}` must be a number"))),
            None => default.ok_or_else(|| self.entry.at(format!("missing argument `{key}`"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<usize, SpecError> {
        let x = self.num(key, None)?;
        if x.fract() != 0.0 || x < 1.0 {
            return Err(self.entry.at(format!("`{key}` must be a positive integer")));
        }
        Ok(x as usize)
    }

    fn ident(&mut self, key: &str) -> Result<Option<String>, SpecError> {
        match self.take(key) {
            Some((Arg::Ident(s), _)) => Ok(Some(s)),
            Some((_, col)) => Err(self.at(col, format!("`{key}` must be a name"))),
            None => Ok(None),
        }
    }

    fn widths(&self, a: &Arg, col: usize) -> Result<Vec<usize>, SpecError> {
        match a {
            Arg::List(items) => items
                .iter()
                .map(|i| match i {
                    Arg::Num(x) if x.fract() == 0.0 && *x >= 1.0 => Ok(*x as usize),
                    _ => Err(self.at(col, "layer widths must be positive integers")),
                })
                .collect(),
            _ => Err(self.at(col, "expected a list of layer widths")),
        }
    }

    fn finish(self) -> Result<(), SpecError> {
        match self.call.args.first() {
            Some((k, _, col)) => Err(self.at(*col, format!("unknown argument `{k}`"))),
            None => Ok(()),
        }
    }
}

fn parse_kernel(entry: &Entry) -> Result<Kernel, SpecError> {
    let call = parse_call(entry)?;
    let name = call.name.clone();
    let mut args = Args { call, entry };
    let hidden = match args.ident("hidden")?.as_deref() {
        None | Some("sigmoid") => Activation::Sigmoid,
        Some("relu") => Activation::Relu,
        Some(other) => return Err(entry.at(format!("unknown activation `{other}`"))),
    };
    let spec = |w: Vec<usize>| MlpSpec::new(&w, hidden).map_err(|e| entry.at(e.to_string()));
    let kernel = match name.as_str() {
        "mlp" => {
            let (a, col) = args.take("layers").ok_or_else(|| entry.at("missing argument `layers`"))?;
            Kernel::Mlp(spec(args.widths(&a, col)?)?)
        }
        "nas" => {
            let (a, col) = args.take("layers").ok_or_else(|| entry.at("missing argument `layers`"))?;
            let Arg::List(archs) = a else {
                return Err(args.at(col, "expected a list of architectures"));
            };
            let specs: Result<Vec<MlpSpec>, SpecError> =
                archs.iter().map(|w| spec(args.widths(w, col)?)).collect();
            Kernel::Nas(specs?)
        }
        "rnn" => Kernel::Rnn {
            inputs: args.count("inputs")?,
            state: args.count("state")?,
            outputs: args.count("outputs")?,
        },
        other => return Err(entry.at(format!("unknown model kernel `{other}`; expected mlp, nas or rnn"))),
    };
    args.finish()?;
    Ok(kernel)
}

fn parse_optimizer(entry: &Entry) -> Result<OptimizerSpec, SpecError> {
    let call = parse_call(entry)?;
    let name = call.name.clone();
    let mut args = Args { call, entry };
    let lr = args.num("lr", None)?;
    let mut opt = match name.as_str() {
        "sgd" => OptimizerSpec::sgd(lr),
        "adam" => OptimizerSpec {
            kind: OptimizerKind::Adam {
                lr,
                b1: args.num("b1", Some(0.9))?,
                b2: args.num("b2", Some(0.999))?,
                eps: args.num("eps", Some(1e-8))?,
            },
            loss: Loss::Mse,
        },
        other => return Err(entry.at(format!("unknown optimizer `{other}`; expected sgd or adam"))),
    };
    opt.loss = match args.ident("loss")?.as_deref() {
        None | Some("mse") => Loss::Mse,
        Some("bce") => Loss::Bce,
        Some(other) => return Err(entry.at(format!("unknown loss `{other}`"))),
    };
    args.finish()?;
    opt.validate().map_err(|e| entry.at(e.to_string()))?;
    Ok(opt)
}

fn parse_presentation(es: &[Entry], header: usize) -> Result<Presentation, SpecError> {
    let mut objects: Option<Vec<String>> = None;
    let mut gens = Vec::new();
    for e in es {
        match (e.sep, e.key.as_str()) {
            ('=', "objects") => {
                let names: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(e.at("empty object name"));
                }
                objects = Some(names);
            }
            (':', name) => {
                let (dom, cod) = e
                    .value
                    .split_once("->")
                    .ok_or_else(|| e.at("expected `dom -> cod`"))?;
                let dom_e = parse_object_at(dom, e.origin())?;
                let cod_col = e.value_col + dom.chars().count() + 2;
                let cod_e = parse_object_at(
                    cod,
                    Span {
                        line: e.line,
                        col: cod_col,
                    },
                )?;
                gens.push((GeneratorDecl::new(name, dom_e, cod_e), e.line, e.key_col));
            }
            _ => return Err(err(e.line, e.key_col, format!("unexpected entry `{}`", e.key))),
        }
    }
    let objects = objects.ok_or_else(|| err(header, 1, "the presentation needs an `objects = ...` line"))?;
    let decls: Vec<GeneratorDecl> = gens.iter().map(|(g, _, _)| g.clone()).collect();
    make_presentation(&objects, decls).map_err(|e| {
        let (line, col) = match &e {
            DiagramError::DuplicateGenerator(n) | DiagramError::UnknownObject(n) => gens
                .iter()
                .find(|(g, _, _)| {
                    &g.name == n || g.dom.base_names().contains(n) || g.cod.base_names().contains(n)
                })
                .map_or((header, 1), |(_, l, c)| (*l, *c)),
            _ => (header, 1),
        };
        err(line, col, e.to_string())
    })
}

fn parse_terms(es: &[Entry], p: &Presentation) -> Result<Vec<TermDef>, SpecError> {
    let mut defs: BTreeMap<String, MorphismTerm> = BTreeMap::new();
    let mut out: Vec<TermDef> = Vec::new();
    for e in es {
        if e.sep != '=' {
            return Err(err(e.line, e.key_col, "expected `name = term`"));
        }
        if out.iter().any(|t| t.name == e.key) {
            return Err(err(e.line, e.key_col, format!("term `{}` is defined twice", e.key)));
        }
        let ast = parse_term_ast(&e.value, e.origin())?;
        let term = elaborate(&ast, p, &defs);
        if let Ok(t) = &term {
            defs.insert(e.key.clone(), t.clone());
        }
        out.push(TermDef {
            name: e.key.clone(),
            span: Span {
                line: e.line,
                col: e.key_col,
            },
            term,
        });
    }
    Ok(out)
}

fn parse_translator(es: &[Entry], header: usize) -> Result<TranslatorSection, SpecError> {
    let mut objects = BTreeMap::new();
    let (mut eta, mut nabla) = (None, None);
    for e in es {
        if e.sep != '=' {
            return Err(err(e.line, e.key_col, "expected `key = value`"));
        }
        match e.key.as_str() {
            "X" | "Y" | "Y*" | "P" | "E" => {
                let space = parse_space(&e.value).map_err(|m| e.at(m))?;
                objects.insert(
                    e.key.clone(),
                    Declared {
                        value: space,
                        line: e.line,
                        col: e.value_col,
                    },
                );
            }
            "eta" => {
                eta = Some(Declared {
                    value: parse_kernel(e)?,
                    line: e.line,
                    col: e.value_col,
                })
            }
            "nabla" => {
                nabla = Some(Declared {
                    value: parse_optimizer(e)?,
                    line: e.line,
                    col: e.value_col,
                })
            }
            other => return Err(err(e.line, e.key_col, format!("unknown translator key `{other}`"))),
        }
    }
    Ok(TranslatorSection {
        objects,
        eta: eta.ok_or_else(|| err(header, 1, "the translator needs `eta = ...`"))?,
        nabla: nabla.ok_or_else(|| err(header, 1, "the translator needs `nabla = ...`"))?,
    })
}

fn parse_explainer(es: &[Entry], header: usize) -> Result<ExplainerSection, SpecError> {
    let mut kind = None;
    let mut cfg = ExplainerConfig::default();
    for e in es {
        if e.sep != '=' {
            return Err(err(e.line, e.key_col, "expected `key = value`"));
        }
        match e.key.as_str() {
            "kind" => {
                kind = Some(Declared {
                    value: e.value.parse::<WiringKind>().map_err(|x| e.at(x.to_string()))?,
                    line: e.line,
                    col: e.value_col,
                })
            }
            "mode" => {
                cfg.mode = match e.value.as_str() {
                    "semantic" => ExplanationMode::Semantic,
                    "syntactic" => ExplanationMode::Syntactic,
                    other => return Err(e.at(format!("unknown mode `{other}`"))),
                }
            }
            "predicate" => cfg.predicate = e.value.clone(),
            "features" => cfg.features = Some(e.value.split(',').map(|s| s.trim().to_string()).collect()),
            "tau" => cfg.tau = e.number()?,
            "concepts" => cfg.concepts = e.number()?,
            "hidden" => {
                let inner = e
                    .value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| e.at("expected a list like [4]"))?;
                cfg.hidden = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse().map_err(|_| e.at("bad width")))
                    .collect::<Result<_, _>>()?;
            }
            "optimizer" => cfg.optimizer = parse_optimizer(e)?,
            other => return Err(err(e.line, e.key_col, format!("unknown explainer key `{other}`"))),
        }
    }
    Ok(ExplainerSection {
        kind: kind.ok_or_else(|| err(header, 1, "the explainer needs `kind = ...`"))?,
        config: cfg,
    })
}

fn parse_dataset(es: &[Entry], header: usize, dir: &Path) -> Result<DatasetSection, SpecError> {
    let (mut path, mut steps) = (None, 2000);
    for e in es {
        match e.key.as_str() {
            "path" => path = Some(dir.join(&e.value)),
            "steps" => steps = e.number()?,
            other => return Err(err(e.line, e.key_col, format!("unknown dataset key `{other}`"))),
        }
    }
    Ok(DatasetSection {
        path: path.ok_or_else(|| err(header, 1, "the dataset needs `path = ...`"))?,
        steps,
    })
}

impl SpecFile {
    /// Parse a spec file; relative dataset paths resolve against `dir`.
    /// Typing errors in terms are kept per term rather than failing.
    pub fn parse(src: &str, dir: &Path) -> Result<SpecFile, SpecError> {
        let sections = entries(src)?;
        let find = |s: Section| sections.iter().find(|(k, _, _)| *k == s);
        let presentation = match find(Section::Presentation) {
            Some((_, h, es)) => parse_presentation(es, *h)?,
            None => build_xlearn(),
        };
        let terms = match find(Section::Terms) {
            Some((_, _, es)) => parse_terms(es, &presentation)?,
            None => Vec::new(),
        };
        let translator = find(Section::Translator)
            .map(|(_, h, es)| parse_translator(es, *h))
            .transpose()?;
        let explainer = find(Section::Explainer)
            .map(|(_, h, es)| parse_explainer(es, *h))
            .transpose()?;
        if let (Some(e), None) = (&explainer, &translator) {
            return Err(err(e.kind.line, e.kind.col, "an explainer needs a [translator] section"));
        }
        let dataset = find(Section::Dataset)
            .map(|(_, h, es)| parse_dataset(es, *h, dir))
            .transpose()?;
        Ok(SpecFile {
            presentation,
            terms,
            translator,
            explainer,
            dataset,
        })
    }

    pub fn term(&self, name: &str) -> Option<&TermDef> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// The learning agent of the translator section, checked against the
    /// declared object spaces.
    pub fn build_agent(&self, seed: u64) -> Result<Option<ConcreteAgent>, SpecError> {
        let Some(t) = &self.translator else {
            return Ok(None);
        };
        let at_eta = |e: String| err(t.eta.line, t.eta.col, e);
        let opt = t.nabla.value;
        let unsupervised = t
            .objects
            .get("Y*")
            .is_some_and(|d| d.value.is_singleton());
        let agent = match &t.eta.value {
            Kernel::Mlp(spec) if unsupervised => build_autoencoder(spec, opt, seed),
            Kernel::Mlp(spec) => build_mlp_agent(spec, opt, seed),
            Kernel::Nas(specs) => build_nas_agent(specs, opt, seed),
            Kernel::Rnn { inputs, state, outputs } => build_rnn_agent(*inputs, *state, *outputs, opt, seed),
        }
        .map_err(|e| at_eta(e.to_string()))?;
        for (name, d) in &t.objects {
            let built = agent.translator.object(name).cloned();
            if built != Some(SpaceSeq::Constant(d.value.clone())) {
                let found = built.map_or("nothing".to_string(), |s| s.to_string());
                return Err(err(
                    d.line,
                    d.col,
                    format!("{name} is declared as {} but the kernels give {found}", d.value),
                ));
            }
        }
        Ok(Some(agent))
    }

    /// The explainer over `base`, explaining parameters `params`.
    pub fn build_explainer(
        &self,
        base: &ConcreteAgent,
        params: Option<Vec<f64>>,
        seed: u64,
    ) -> Result<Option<ConcreteAgent>, SpecError> {
        let Some(e) = &self.explainer else {
            return Ok(None);
        };
        let cfg = ExplainerConfig {
            params,
            seed,
            ..e.config.clone()
        };
        build_explainer(e.kind.value, base, &cfg)
            .map(Some)
            .map_err(|x| err(e.kind.line, e.kind.col, x.to_string()))
    }
}
