use std::fmt;
use std::hash::{Hash, Hasher};

use rand::Rng;

use crate::institution::{Explanation, ExplanationMode, Signature};

/// The set of values an object denotes at one time step.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueSpace {
    FiniteEnum(Vec<String>),
    RealVector(usize),
    Singleton,
    ProductSpace(Vec<ValueSpace>),
    /// Sentences or models over a signature.
    Explanation(ExplanationSpace),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplanationSpace {
    pub signature: Signature,
    pub mode: ExplanationMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Atom(String),
    Reals(Vec<f64>),
    Star,
    Tuple(Vec<Value>),
    /// A model output together with the input it was computed from. It
    /// inhabits `RealVector(output.len())`, like plain reals.
    Prediction { output: Vec<f64>, input: Vec<f64> },
    Explanation(Explanation),
}

impl ValueSpace {
    /// The finite enumeration `{0, 1, ..., n-1}`.
    pub fn naturals(n: usize) -> Self {
        ValueSpace::FiniteEnum((0..n).map(|i| i.to_string()).collect())
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            ValueSpace::Singleton => true,
            ValueSpace::ProductSpace(fs) => fs.iter().all(ValueSpace::is_singleton),
            _ => false,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (ValueSpace::FiniteEnum(es), Value::Atom(a)) => es.contains(a),
            (ValueSpace::RealVector(n), Value::Reals(xs)) => xs.len() == *n,
            (ValueSpace::RealVector(n), Value::Prediction { output, .. }) => output.len() == *n,
            (ValueSpace::Singleton, Value::Star) => true,
            (ValueSpace::ProductSpace(fs), Value::Tuple(vs)) => {
                fs.len() == vs.len() && fs.iter().zip(vs).all(|(f, v)| f.contains(v))
            }
            (ValueSpace::Explanation(sp), Value::Explanation(e)) => {
                e.signature() == &sp.signature && e.mode() == sp.mode
            }
            _ => false,
        }
    }

    /// A random inhabitant: uniform over finite sets, uniform on the unit cube
    /// for real vectors.
    pub fn sample(&self, rng: &mut impl Rng) -> Option<Value> {
        Some(match self {
            ValueSpace::FiniteEnum(es) if !es.is_empty() => Value::Atom(es[rng.gen_range(0..es.len())].clone()),
            ValueSpace::FiniteEnum(_) => return None,
            ValueSpace::RealVector(n) => Value::Reals((0..*n).map(|_| rng.gen::<f64>()).collect()),
            ValueSpace::Singleton => Value::Star,
            ValueSpace::ProductSpace(fs) => {
                Value::Tuple(fs.iter().map(|f| f.sample(rng)).collect::<Option<_>>()?)
            }
            ValueSpace::Explanation(_) => return None,
        })
    }

    /// Size of a finite space.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            ValueSpace::FiniteEnum(es) => Some(es.len()),
            ValueSpace::Singleton => Some(1),
            ValueSpace::ProductSpace(fs) => fs.iter().map(ValueSpace::cardinality).product(),
            _ => None,
        }
    }

    /// The `i`-th element of a finite space in a fixed enumeration order.
    pub fn nth(&self, mut i: usize) -> Option<Value> {
        match self {
            ValueSpace::FiniteEnum(es) => es.get(i).cloned().map(Value::Atom),
            ValueSpace::Singleton => (i == 0).then_some(Value::Star),
            ValueSpace::ProductSpace(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs {
                    let c = f.cardinality()?;
                    out.push(f.nth(i % c)?);
                    i /= c;
                }
                Some(Value::Tuple(out))
            }
            _ => None,
        }
    }
}

impl fmt::Display for ValueSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSpace::FiniteEnum(es) => write!(f, "{{{}}}", es.join(",")),
            ValueSpace::RealVector(n) => write!(f, "R^{n}"),
            ValueSpace::Singleton => write!(f, "unit"),
            ValueSpace::ProductSpace(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(" x "))
            }
            ValueSpace::Explanation(sp) => {
                let m = match sp.mode {
                    ExplanationMode::Syntactic => "Sen",
                    ExplanationMode::Semantic => "Mod",
                };
                write!(f, "{m}({})", sp.signature)
            }
        }
    }
}

impl Value {
    pub fn reals(xs: &[f64]) -> Self {
        Value::Reals(xs.to_vec())
    }

    pub fn atom(a: impl Into<String>) -> Self {
        Value::Atom(a.into())
    }

    /// The real coordinates of a real-vector value.
    pub fn as_reals(&self) -> Option<&[f64]> {
        match self {
            Value::Reals(xs) => Some(xs),
            Value::Prediction { output, .. } => Some(output),
            _ => None,
        }
    }

    /// Equality up to `tol` on real coordinates, exact elsewhere.
    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x - y).abs() <= tol)
        };
        match (self, other) {
            (Value::Reals(a), Value::Reals(b)) => close(a, b),
            (
                Value::Prediction { output: a, input: x },
                Value::Prediction { output: b, input: y },
            ) => close(a, b) && close(x, y),
            (Value::Tuple(a), Value::Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, tol))
            }
            (Value::Explanation(a), Value::Explanation(b)) => match (a.model(), b.model()) {
                (Some(ma), Some(mb)) => {
                    ma.signature() == mb.signature()
                        && ma.tau() == mb.tau()
                        && close(&ma.degree_vector(), &mb.degree_vector())
                }
                _ => a == b,
            },
            _ => self == other,
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Atom(a) => a.hash(state),
            Value::Reals(xs) => xs.iter().for_each(|x| x.to_bits().hash(state)),
            Value::Star => {}
            Value::Tuple(vs) => vs.hash(state),
            Value::Prediction { output, input } => {
                output.iter().chain(input).for_each(|x| x.to_bits().hash(state))
            }
            Value::Explanation(e) => e.to_string().hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reals = |f: &mut fmt::Formatter<'_>, xs: &[f64]| {
            let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
            write!(f, "[{}]", parts.join(","))
        };
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Reals(xs) => reals(f, xs),
            Value::Star => write!(f, "*"),
            Value::Tuple(vs) => {
                let parts: Vec<String> = vs.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            Value::Prediction { output, .. } => reals(f, output),
            Value::Explanation(e) => write!(f, "{e}"),
        }
    }
}

/// The space of one wire over time.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSeq {
    Constant(ValueSpace),
    /// Step `n` uses entry `min(n, len - 1)`.
    Schedule(Vec<ValueSpace>),
    /// The delay: singleton at step 0, then the inner sequence shifted by one.
    Delayed(Box<SpaceSeq>),
}

impl SpaceSeq {
    pub fn at(&self, n: usize) -> ValueSpace {
        match self {
            SpaceSeq::Constant(s) => s.clone(),
            SpaceSeq::Schedule(v) => v[n.min(v.len() - 1)].clone(),
            SpaceSeq::Delayed(_) if n == 0 => ValueSpace::Singleton,
            SpaceSeq::Delayed(inner) => inner.at(n - 1),
        }
    }

    pub fn delayed(self) -> Self {
        SpaceSeq::Delayed(Box::new(self))
    }

    /// Singleton at every step; such wires are erased by translation.
    pub fn is_trivial(&self) -> bool {
        match self {
            SpaceSeq::Constant(s) => s.is_singleton(),
            SpaceSeq::Schedule(v) => v.iter().all(ValueSpace::is_singleton),
            SpaceSeq::Delayed(inner) => inner.is_trivial(),
        }
    }

    /// Strip delays, giving the space sequence the delay was applied to.
    pub fn undelayed(&self) -> &SpaceSeq {
        match self {
            SpaceSeq::Delayed(inner) => inner.undelayed(),
            s => s,
        }
    }
}

impl fmt::Display for SpaceSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSeq::Constant(s) => write!(f, "{s}"),
            SpaceSeq::Schedule(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "<{}>", parts.join(", "))
            }
            SpaceSeq::Delayed(inner) => write!(f, "F({inner})"),
        }
    }
}

impl From<ValueSpace> for SpaceSeq {
    fn from(s: ValueSpace) -> Self {
        SpaceSeq::Constant(s)
    }
}
