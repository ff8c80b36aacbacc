use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::morphism::{
    prefix_evaluate, stream_compose, stream_copy, stream_delay, stream_discard, stream_feedback_with,
    stream_identity, stream_symmetry, stream_tensor, FeedbackVariant, StreamMorphism,
};
use super::value::{SpaceSeq, Value, ValueSpace};
use super::StreamError;

/// Parameters of an extensional comparison.
#[derive(Clone, Copy, Debug)]
pub struct EqConfig {
    pub horizon: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for EqConfig {
    fn default() -> Self {
        EqConfig {
            horizon: 5,
            samples: 100,
            seed: 0,
            tol: 1e-9,
        }
    }
}

/// An input history on which two morphisms disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub history: Vec<Vec<Value>>,
    pub step: usize,
    pub lhs: Vec<Value>,
    pub rhs: Vec<Value>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vs: &[Value]| vs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let hist: Vec<String> = self.history.iter().map(|x| format!("({})", show(x))).collect();
        write!(
            f,
            "history [{}]: at step {} lhs=({}) rhs=({})",
            hist.join(" "),
            self.step,
            show(&self.lhs),
            show(&self.rhs)
        )
    }
}

/// A random history of length `horizon` over the given wires.
pub fn sample_history(dom: &[SpaceSeq], horizon: usize, rng: &mut impl Rng) -> Result<Vec<Vec<Value>>, StreamError> {
    (0..horizon)
        .map(|n| {
            dom.iter()
                .map(|s| {
                    let space = s.at(n);
                    space
                        .sample(rng)
                        .ok_or_else(|| StreamError::Unsampleable(space.to_string()))
                })
                .collect()
        })
        .collect()
}

/// The first sampled history on which `f` and `g` differ, if any.
pub fn extensional_check(
    f: &StreamMorphism,
    g: &StreamMorphism,
    cfg: EqConfig,
) -> Result<Option<Counterexample>, StreamError> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(StreamError::SpaceMismatch(format!(
            "cannot compare {:?} -> {:?} with {:?} -> {:?}",
            f.dom(),
            f.cod(),
            g.dom(),
            g.cod()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let history = sample_history(f.dom(), cfg.horizon, &mut rng)?;
        let a = prefix_evaluate(f, &history)?;
        let b = prefix_evaluate(g, &history)?;
        for (step, (ya, yb)) in a.iter().zip(&b).enumerate() {
            let same = ya.len() == yb.len() && ya.iter().zip(yb).all(|(u, v)| u.approx_eq(v, cfg.tol));
            if !same {
                return Ok(Some(Counterexample {
                    history: history[..=step].to_vec(),
                    step,
                    lhs: ya.clone(),
                    rhs: yb.clone(),
                }));
            }
        }
    }
    Ok(None)
}

pub fn extensional_equal(f: &StreamMorphism, g: &StreamMorphism, cfg: EqConfig) -> Result<bool, StreamError> {
    Ok(extensional_check(f, g, cfg)?.is_none())
}

/// A random causal morphism between finite wires.
///
/// Output `j` at step `n` is a hash of `(seed, j, last w inputs, min(n, w))`,
/// so the morphism depends on a sliding window of its history.
pub fn random_table_morphism(
    dom: Vec<SpaceSeq>,
    cod: Vec<SpaceSeq>,
    window: usize,
    seed: u64,
) -> Result<StreamMorphism, StreamError> {
    for s in &cod {
        for n in 0..=window {
            if s.at(n).cardinality().is_none() {
                return Err(StreamError::Unsampleable(s.to_string()));
            }
        }
    }
    let cod2 = cod.clone();
    Ok(StreamMorphism::from_components(dom, cod, move |hist| {
        let n = hist.len() - 1;
        let win = &hist[hist.len().saturating_sub(window)..];
        cod2.iter()
            .enumerate()
            .map(|(j, s)| {
                let space = s.at(n);
                let mut h = DefaultHasher::new();
                (seed, j, win, n.min(window)).hash(&mut h);
                let card = space.cardinality().expect("checked finite");
                space.nth((h.finish() % card as u64) as usize).expect("in range")
            })
            .collect()
    }))
}

#[derive(Clone, Copy, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum Axiom {
    Tightening,
    Joining,
    Vanishing,
    Strength,
    Sliding,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::Tightening,
        Axiom::Joining,
        Axiom::Vanishing,
        Axiom::Strength,
        Axiom::Sliding,
    ];
}

/// Settings of the randomized law checks.
#[derive(Clone, Copy, Debug)]
pub struct LawConfig {
    pub seed: u64,
    pub horizon: usize,
    /// Random instances per law.
    pub instances: usize,
    /// Sampled input histories per instance.
    pub histories: usize,
    /// History window of the random table morphisms.
    pub window: usize,
    pub variant: FeedbackVariant,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            seed: 0,
            horizon: 5,
            instances: 200,
            histories: 8,
            window: 3,
            variant: FeedbackVariant::Standard,
        }
    }
}

/// Result of one law over all its instances.
#[derive(Clone, Debug)]
pub struct LawResult {
    pub name: String,
    pub instances: usize,
    pub passed: usize,
    pub counterexample: Option<String>,
}

impl LawResult {
    pub fn ok(&self) -> bool {
        self.passed == self.instances
    }
}

impl fmt::Display for LawResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok() { "pass" } else { "FAIL" };
        write!(f, "{:<28} {verdict} {}/{}", self.name, self.passed, self.instances)?;
        if let Some(c) = &self.counterexample {
            write!(f, "\n    counterexample: {c}")?;
        }
        Ok(())
    }
}

type Pair = (StreamMorphism, StreamMorphism);

struct Gen<'a> {
    spaces: &'a [ValueSpace],
    rng: ChaCha8Rng,
    window: usize,
}

impl Gen<'_> {
    fn space(&mut self) -> SpaceSeq {
        SpaceSeq::Constant(self.spaces[self.rng.gen_range(0..self.spaces.len())].clone())
    }

    fn wires(&mut self, max: usize) -> Vec<SpaceSeq> {
        let n = self.rng.gen_range(1..=max);
        (0..n).map(|_| self.space()).collect()
    }

    fn table(&mut self, dom: &[SpaceSeq], cod: &[SpaceSeq]) -> StreamMorphism {
        let seed = self.rng.gen();
        random_table_morphism(dom.to_vec(), cod.to_vec(), self.window, seed).expect("finite spaces")
    }
}

fn delayed(v: &[SpaceSeq]) -> Vec<SpaceSeq> {
    v.iter().cloned().map(SpaceSeq::delayed).collect()
}

fn cat(a: &[SpaceSeq], b: &[SpaceSeq]) -> Vec<SpaceSeq> {
    [a, b].concat()
}

fn axiom_instance(ax: Axiom, g: &mut Gen<'_>, variant: FeedbackVariant) -> Result<Pair, StreamError> {
    let fbk = |body: &StreamMorphism, s: &[SpaceSeq]| stream_feedback_with(body, s.to_vec(), variant);
    let id = |v: &[SpaceSeq]| stream_identity(v.to_vec());
    match ax {
        Axiom::Tightening => {
            let (x0, x, y, y1, s) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let u = g.table(&x0, &x);
            let f = g.table(&cat(&x, &delayed(&s)), &cat(&y, &s));
            let v = g.table(&y, &y1);
            let body = stream_compose(
                &stream_compose(&stream_tensor(&u, &id(&delayed(&s))), &f)?,
                &stream_tensor(&v, &id(&s)),
            )?;
            let lhs = fbk(&body, &s)?;
            let rhs = stream_compose(&stream_compose(&u, &fbk(&f, &s)?)?, &v)?;
            Ok((lhs, rhs))
        }
        Axiom::Joining => {
            let (x, y, s, t) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let f = g.table(&cat(&cat(&x, &delayed(&s)), &delayed(&t)), &cat(&cat(&y, &s), &t));
            let lhs = fbk(&f, &cat(&s, &t))?;
            let rhs = fbk(&fbk(&f, &t)?, &s)?;
            Ok((lhs, rhs))
        }
        Axiom::Vanishing => {
            let (x, y) = (g.wires(2), g.wires(2));
            let f = g.table(&x, &y);
            Ok((fbk(&f, &[])?, f))
        }
        Axiom::Strength => {
            let (x0, y0, x, y, s) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let h = g.table(&x0, &y0);
            let f = g.table(&cat(&x, &delayed(&s)), &cat(&y, &s));
            let lhs = fbk(&stream_tensor(&h, &f), &s)?;
            let rhs = stream_tensor(&h, &fbk(&f, &s)?);
            Ok((lhs, rhs))
        }
        Axiom::Sliding => {
            let (x, y, s, t) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let f = g.table(&cat(&x, &delayed(&t)), &cat(&y, &s));
            let k = g.table(&s, &t);
            let lhs = fbk(&stream_compose(&f, &stream_tensor(&id(&y), &k))?, &t)?;
            let rhs = fbk(&stream_compose(&stream_tensor(&id(&x), &stream_delay(&k)), &f)?, &s)?;
            Ok((lhs, rhs))
        }
    }
}

fn run_law(
    name: String,
    salt: u64,
    spaces: &[ValueSpace],
    cfg: LawConfig,
    mut make: impl FnMut(&mut Gen<'_>) -> Result<Pair, StreamError>,
) -> Result<LawResult, StreamError> {
    let mut g = Gen {
        spaces,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        window: cfg.window,
    };
    let mut res = LawResult {
        name,
        instances: cfg.instances,
        passed: 0,
        counterexample: None,
    };
    for i in 0..cfg.instances {
        let (lhs, rhs) = make(&mut g)?;
        let eq = EqConfig {
            horizon: cfg.horizon,
            samples: cfg.histories,
            seed: cfg.seed.wrapping_add(i as u64),
            tol: 0.0,
        };
        match extensional_check(&lhs, &rhs, eq)? {
            None => res.passed += 1,
            Some(c) => {
                if res.counterexample.is_none() {
                    res.counterexample = Some(format!("instance {i}: {c}"));
                }
            }
        }
    }
    Ok(res)
}

/// Check the five feedback axioms on random window-table morphisms over the
/// given finite spaces. Every wire draws its space from `spaces`.
pub fn check_feedback_axioms(spaces: &[ValueSpace], cfg: LawConfig) -> Result<Vec<LawResult>, StreamError> {
    check_spaces(spaces)?;
    Axiom::ALL
        .iter()
        .enumerate()
        .map(|(i, &ax)| {
            run_law(format!("{ax:?}"), i as u64 + 1, spaces, cfg, |g| {
                axiom_instance(ax, g, cfg.variant)
            })
        })
        .collect()
}

fn check_spaces(spaces: &[ValueSpace]) -> Result<(), StreamError> {
    if spaces.is_empty() {
        return Err(StreamError::Unsampleable("no spaces given".into()));
    }
    for s in spaces {
        if !matches!(s.cardinality(), Some(1..)) {
            return Err(StreamError::Unsampleable(s.to_string()));
        }
    }
    Ok(())
}

/// The category, monoidal and comonoid laws, checked extensionally on random
/// window-table morphisms.
pub fn check_stream_laws(spaces: &[ValueSpace], cfg: LawConfig) -> Result<Vec<LawResult>, StreamError> {
    check_spaces(spaces)?;
    type Law = fn(&mut Gen<'_>) -> Result<Pair, StreamError>;
    let laws: Vec<(&str, Law)> = vec![
        ("left unitality", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let f = g.table(&a, &b);
            Ok((stream_compose(&stream_identity(a), &f)?, f))
        }),
        ("right unitality", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let f = g.table(&a, &b);
            Ok((stream_compose(&f, &stream_identity(b))?, f))
        }),
        ("associativity", |g| {
            let (a, b, c, d) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let (f, h, k) = (g.table(&a, &b), g.table(&b, &c), g.table(&c, &d));
            let lhs = stream_compose(&stream_compose(&f, &h)?, &k)?;
            let rhs = stream_compose(&f, &stream_compose(&h, &k)?)?;
            Ok((lhs, rhs))
        }),
        ("interchange", |g| {
            let (a, b, c, d) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let (f, h) = (g.table(&a, &b), g.table(&c, &d));
            let lhs = stream_compose(
                &stream_tensor(&f, &stream_identity(c)),
                &stream_tensor(&stream_identity(b), &h),
            )?;
            Ok((lhs, stream_tensor(&f, &h)))
        }),
        ("tensor functoriality", |g| {
            let (a, b, c) = (g.wires(2), g.wires(2), g.wires(2));
            let (a2, b2, c2) = (g.wires(2), g.wires(2), g.wires(2));
            let (f, h) = (g.table(&a, &b), g.table(&b, &c));
            let (f2, h2) = (g.table(&a2, &b2), g.table(&b2, &c2));
            let lhs = stream_tensor(&stream_compose(&f, &h)?, &stream_compose(&f2, &h2)?);
            let rhs = stream_compose(&stream_tensor(&f, &f2), &stream_tensor(&h, &h2))?;
            Ok((lhs, rhs))
        }),
        ("tensor unit", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let f = g.table(&a, &b);
            Ok((stream_tensor(&f, &stream_identity(Vec::new())), f))
        }),
        ("symmetry involution", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let lhs = stream_compose(&stream_symmetry(a.clone(), b.clone()), &stream_symmetry(b.clone(), a.clone()))?;
            Ok((lhs, stream_identity(cat(&a, &b))))
        }),
        ("symmetry naturality", |g| {
            let (a, b, c, d) = (g.wires(2), g.wires(2), g.wires(2), g.wires(2));
            let (f, h) = (g.table(&a, &b), g.table(&c, &d));
            let lhs = stream_compose(&stream_tensor(&f, &h), &stream_symmetry(b, d))?;
            let rhs = stream_compose(&stream_symmetry(a, c), &stream_tensor(&h, &f))?;
            Ok((lhs, rhs))
        }),
        ("coassociativity", |g| {
            let a = g.wires(2);
            let c = stream_copy(a.clone());
            let id = stream_identity(a);
            let lhs = stream_compose(&c, &stream_tensor(&c, &id))?;
            let rhs = stream_compose(&c, &stream_tensor(&id, &c))?;
            Ok((lhs, rhs))
        }),
        ("left counitality", |g| {
            let a = g.wires(2);
            let c = stream_copy(a.clone());
            let lhs = stream_compose(&c, &stream_tensor(&stream_discard(a.clone()), &stream_identity(a.clone())))?;
            Ok((lhs, stream_identity(a)))
        }),
        ("right counitality", |g| {
            let a = g.wires(2);
            let c = stream_copy(a.clone());
            let lhs = stream_compose(&c, &stream_tensor(&stream_identity(a.clone()), &stream_discard(a.clone())))?;
            Ok((lhs, stream_identity(a)))
        }),
        ("cocommutativity", |g| {
            let a = g.wires(2);
            let c = stream_copy(a.clone());
            Ok((stream_compose(&c, &stream_symmetry(a.clone(), a))?, c))
        }),
        ("copy naturality", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let f = g.table(&a, &b);
            let lhs = stream_compose(&stream_copy(a), &stream_tensor(&f, &f))?;
            Ok((lhs, stream_compose(&f, &stream_copy(b))?))
        }),
        ("discard naturality", |g| {
            let (a, b) = (g.wires(2), g.wires(2));
            let f = g.table(&a, &b);
            Ok((stream_compose(&f, &stream_discard(b))?, stream_discard(a)))
        }),
    ];
    laws.into_iter()
        .enumerate()
        .map(|(i, (name, law))| run_law(name.to_string(), 100 + i as u64, spaces, cfg, law))
        .collect()
}
