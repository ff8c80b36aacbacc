use std::fmt;

use super::signature::{Signature, SignatureMorphism};
use super::InstitutionError;

/// A quantifier-free sentence.
#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum Sentence {
    /// The empty conjunction.
    Top,
    Prop(String),
    PredApp(String, String),
    Not(Box<Sentence>),
    And(Box<Sentence>, Box<Sentence>),
    Or(Box<Sentence>, Box<Sentence>),
    Implies(Box<Sentence>, Box<Sentence>),
}

impl Sentence {
    pub fn prop(name: impl Into<String>) -> Self {
        Sentence::Prop(name.into())
    }

    pub fn pred(predicate: impl Into<String>, constant: impl Into<String>) -> Self {
        Sentence::PredApp(predicate.into(), constant.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(s: Sentence) -> Self {
        Sentence::Not(Box::new(s))
    }

    pub fn and(a: Sentence, b: Sentence) -> Self {
        Sentence::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Sentence, b: Sentence) -> Self {
        Sentence::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Sentence, b: Sentence) -> Self {
        Sentence::Implies(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; [`Sentence::Top`] when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Sentence>) -> Self {
        parts
            .into_iter()
            .reduce(Sentence::and)
            .unwrap_or(Sentence::Top)
    }

    pub fn depth(&self) -> usize {
        match self {
            Sentence::Top | Sentence::Prop(_) | Sentence::PredApp(..) => 0,
            Sentence::Not(a) => 1 + a.depth(),
            Sentence::And(a, b) | Sentence::Or(a, b) | Sentence::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Whether every symbol belongs to `sig`, with the right sort.
    pub fn check(&self, sig: &Signature) -> Result<(), InstitutionError> {
        let bad = |m: String| Err(InstitutionError::MalformedSentence(m));
        match self {
            Sentence::Top => Ok(()),
            Sentence::Prop(p) => match sig {
                Signature::Pl { .. } if sig.has_atom(p) => Ok(()),
                Signature::Pl { .. } => bad(format!("unknown proposition `{p}`")),
                _ => bad(format!("proposition `{p}` in a relevance signature")),
            },
            Sentence::PredApp(q, c) => match sig.predicate() {
                Some(pred) if pred == q && sig.has_atom(c) => Ok(()),
                Some(_) => bad(format!("`{q}({c})` is not over {sig}")),
                None => bad(format!("predicate application `{q}({c})` in propositional logic")),
            },
            Sentence::Not(a) => a.check(sig),
            Sentence::And(a, b) | Sentence::Or(a, b) | Sentence::Implies(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
        }
    }

    fn rename(&self, rho: &SignatureMorphism) -> Sentence {
        let r = |s: &str| rho.apply(s).expect("checked against source").to_string();
        match self {
            Sentence::Top => Sentence::Top,
            Sentence::Prop(p) => Sentence::Prop(r(p)),
            Sentence::PredApp(q, c) => Sentence::PredApp(r(q), r(c)),
            Sentence::Not(a) => Sentence::not(a.rename(rho)),
            Sentence::And(a, b) => Sentence::and(a.rename(rho), b.rename(rho)),
            Sentence::Or(a, b) => Sentence::or(a.rename(rho), b.rename(rho)),
            Sentence::Implies(a, b) => Sentence::implies(a.rename(rho), b.rename(rho)),
        }
    }
}

/// Sentence translation along a signature morphism.
pub fn translate_sentence(rho: &SignatureMorphism, s: &Sentence) -> Result<Sentence, InstitutionError> {
    s.check(rho.source())
        .map_err(|e| InstitutionError::SignatureMismatch(e.to_string()))?;
    Ok(s.rename(rho))
}

fn prec(s: &Sentence) -> u8 {
    match s {
        Sentence::Implies(..) => 1,
        Sentence::Or(..) => 2,
        Sentence::And(..) => 3,
        Sentence::Not(_) => 4,
        _ => 5,
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, s: &Sentence, min: u8| {
            if prec(s) < min {
                write!(f, "({s})")
            } else {
                write!(f, "{s}")
            }
        };
        match self {
            Sentence::Top => write!(f, "true"),
            Sentence::Prop(p) => write!(f, "{p}"),
            Sentence::PredApp(q, c) => write!(f, "{q}({c})"),
            Sentence::Not(a) => {
                write!(f, "!")?;
                wrap(f, a, 4)
            }
            // `&` and `|` parse left-associatively, `->` right-associatively.
            Sentence::And(a, b) => {
                wrap(f, a, 3)?;
                write!(f, " & ")?;
                wrap(f, b, 4)
            }
            Sentence::Or(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " | ")?;
                wrap(f, b, 3)
            }
            Sentence::Implies(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " -> ")?;
                wrap(f, b, 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, InstitutionError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '\'')) {
                i += 1;
            }
            out.push((Tok::Name(chars[start..i].iter().collect()), col));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            other => {
                return Err(InstitutionError::Parse {
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn err<T>(&self, message: &str) -> Result<T, InstitutionError> {
        let col = self.toks.get(self.pos).map_or(self.end, |(_, c)| *c);
        Err(InstitutionError::Parse {
            col,
            message: message.to_string(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Sentence, InstitutionError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Sentence::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Sentence, InstitutionError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            acc = Sentence::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Sentence, InstitutionError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            acc = Sentence::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Sentence, InstitutionError> {
        if self.eat(&Tok::Not) {
            return Ok(Sentence::not(self.unary()?));
        }
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let s = self.implication()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(s)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                if self.eat(&Tok::LParen) {
                    let Some(Tok::Name(c)) = self.peek().cloned() else {
                        return self.err("expected a constant");
                    };
                    self.pos += 1;
                    if !self.eat(&Tok::RParen) {
                        return self.err("expected `)`");
                    }
                    Ok(Sentence::PredApp(n, c))
                } else if n == "true" {
                    Ok(Sentence::Top)
                } else {
                    Ok(Sentence::Prop(n))
                }
            }
            _ => self.err("expected a sentence"),
        }
    }
}

/// Parse the surface syntax: `!`, `&`, `|`, `->`, parentheses, bare atoms,
/// `S(p3)` predicate applications and `true`.
pub fn parse_sentence(src: &str) -> Result<Sentence, InstitutionError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.chars().count() + 1,
    };
    let s = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(s)
}
