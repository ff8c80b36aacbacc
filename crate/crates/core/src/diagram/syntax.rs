//! Textual syntax for objects and terms.
//!
//! ```text
//! term ::= NAME | "id" "(" obj ")" | "sym" "(" obj "," obj ")"
//!        | "copy" "(" obj ")" | "discard" "(" obj ")"
//!        | "(" term ";" term ")" | "(" term "*" term ")"
//!        | "fbk" "[" obj "]" "(" term ")"
//! obj  ::= NAME | "I" | obj "x" obj
//! ```
//!
//! NAME is `[A-Za-z_][A-Za-z0-9_*']*`, so `*` must be separated from a
//! preceding name by whitespace. Chains such as `(f ; g ; h)` are accepted and
//! associate to the left; parentheses may also group objects.

use std::collections::BTreeMap;
use std::fmt;

use super::object::ObjectExpr;
use super::presentation::Presentation;
use super::term::{self, MorphismTerm, StructuralKind};
use super::DiagramError;

#[derive(Clone, Copy, Debug, Default, Eq, PartialEq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Semi,
    Star,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

fn lex(src: &str, origin: Span) -> Result<Vec<(Tok, Span)>, DiagramError> {
    let mut toks = Vec::new();
    let (mut line, mut col) = (origin.line, origin.col);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let here = Span { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '*' | '\''))
            {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            col += i - start;
            toks.push((Tok::Name(name), here));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ';' => Tok::Semi,
            '*' => Tok::Star,
            ',' => Tok::Comma,
            other => {
                return Err(DiagramError::Parse {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        toks.push((tok, here));
        col += 1;
        i += 1;
    }
    Ok(toks)
}

/// Parsed term with source positions, before typechecking.
#[derive(Clone, Debug, PartialEq)]
pub struct TermAst {
    pub span: Span,
    pub node: AstNode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AstNode {
    Name(String),
    Id(ObjectExpr),
    Sym(ObjectExpr, ObjectExpr),
    Copy(ObjectExpr),
    Discard(ObjectExpr),
    Compose(Box<TermAst>, Box<TermAst>),
    Tensor(Box<TermAst>, Box<TermAst>),
    Fbk(ObjectExpr, Box<TermAst>),
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|(_, s)| *s).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DiagramError> {
        let s = self.span();
        Err(DiagramError::Parse {
            line: s.line,
            col: s.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), DiagramError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected {want}, found {t}");
                self.err(msg)
            }
            None => self.err(format!("expected {want}, found end of input")),
        }
    }

    fn obj(&mut self) -> Result<ObjectExpr, DiagramError> {
        let mut acc = self.obj_atom()?;
        while matches!(self.peek(), Some(Tok::Name(n)) if n == "x") {
            self.pos += 1;
            let rhs = self.obj_atom()?;
            acc = ObjectExpr::product(acc, rhs);
        }
        Ok(acc)
    }

    fn obj_atom(&mut self) -> Result<ObjectExpr, DiagramError> {
        match self.peek().cloned() {
            Some(Tok::Name(n)) if n == "x" => self.err("expected an object, found `x`"),
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(if n == "I" {
                    ObjectExpr::Unit
                } else {
                    ObjectExpr::Base(n)
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let o = self.obj()?;
                self.expect(Tok::RParen)?;
                Ok(o)
            }
            Some(t) => self.err(format!("expected an object, found {t}")),
            None => self.err("expected an object, found end of input"),
        }
    }

    fn term(&mut self) -> Result<TermAst, DiagramError> {
        let span = self.span();
        let node = match self.peek().cloned() {
            Some(Tok::Name(n)) => {
                self.pos += 1;
                match n.as_str() {
                    "id" | "copy" | "discard" if self.peek() == Some(&Tok::LParen) => {
                        self.expect(Tok::LParen)?;
                        let o = self.obj()?;
                        self.expect(Tok::RParen)?;
                        match n.as_str() {
                            "id" => AstNode::Id(o),
                            "copy" => AstNode::Copy(o),
                            _ => AstNode::Discard(o),
                        }
                    }
                    "sym" if self.peek() == Some(&Tok::LParen) => {
                        self.expect(Tok::LParen)?;
                        let a = self.obj()?;
                        self.expect(Tok::Comma)?;
                        let b = self.obj()?;
                        self.expect(Tok::RParen)?;
                        AstNode::Sym(a, b)
                    }
                    "fbk" if self.peek() == Some(&Tok::LBrack) => {
                        self.expect(Tok::LBrack)?;
                        let s = self.obj()?;
                        self.expect(Tok::RBrack)?;
                        self.expect(Tok::LParen)?;
                        let body = self.term()?;
                        self.expect(Tok::RParen)?;
                        AstNode::Fbk(s, Box::new(body))
                    }
                    _ => AstNode::Name(n),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let first = self.term()?;
                let op = match self.peek() {
                    Some(Tok::Semi) => Tok::Semi,
                    Some(Tok::Star) => Tok::Star,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        return Ok(first);
                    }
                    Some(t) => {
                        let msg = format!("expected `;`, `*` or `)`, found {t}");
                        return self.err(msg);
                    }
                    None => return self.err("unclosed `(`"),
                };
                let mut acc = first;
                while self.peek() == Some(&op) {
                    self.pos += 1;
                    let rhs = self.term()?;
                    let node = if op == Tok::Semi {
                        AstNode::Compose(Box::new(acc), Box::new(rhs))
                    } else {
                        AstNode::Tensor(Box::new(acc), Box::new(rhs))
                    };
                    acc = TermAst { span, node };
                }
                self.expect(Tok::RParen)?;
                return Ok(acc);
            }
            Some(t) => return self.err(format!("expected a term, found {t}")),
            None => return self.err("expected a term, found end of input"),
        };
        Ok(TermAst { span, node })
    }

    fn finish(&self) -> Result<(), DiagramError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected trailing {t}")),
        }
    }
}

fn parser(src: &str, origin: Span) -> Result<Parser, DiagramError> {
    let toks = lex(src, origin)?;
    let end = src.lines().enumerate().last().map_or(origin, |(i, l)| Span {
        line: origin.line + i,
        col: if i == 0 { origin.col } else { 1 } + l.chars().count(),
    });
    Ok(Parser { toks, pos: 0, end })
}

/// Parse an object expression starting at line 1, column 1.
pub fn parse_object(src: &str) -> Result<ObjectExpr, DiagramError> {
    parse_object_at(src, Span { line: 1, col: 1 })
}

pub fn parse_object_at(src: &str, origin: Span) -> Result<ObjectExpr, DiagramError> {
    let mut p = parser(src, origin)?;
    let o = p.obj()?;
    p.finish()?;
    Ok(o)
}

pub fn parse_term_ast(src: &str, origin: Span) -> Result<TermAst, DiagramError> {
    let mut p = parser(src, origin)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// A typing error located in the source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub span: Span,
    pub error: DiagramError,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.error)
    }
}

/// Typecheck an AST against a presentation.
///
/// `NAME` resolves to a previously defined term in `defs` first and to a
/// generator otherwise. Every ill-typed node whose children typecheck yields
/// one diagnostic.
pub fn elaborate(
    ast: &TermAst,
    p: &Presentation,
    defs: &BTreeMap<String, MorphismTerm>,
) -> Result<MorphismTerm, Vec<Diagnostic>> {
    let at = |error| vec![Diagnostic { span: ast.span, error }];
    let structural = |kind, objs: &[ObjectExpr]| term::structural(p, kind, objs).map_err(at);
    match &ast.node {
        AstNode::Name(n) => match defs.get(n) {
            Some(t) => Ok(t.clone()),
            None => p.generator(n).map_err(at),
        },
        AstNode::Id(o) => structural(StructuralKind::Identity, std::slice::from_ref(o)),
        AstNode::Copy(o) => structural(StructuralKind::Copy, std::slice::from_ref(o)),
        AstNode::Discard(o) => structural(StructuralKind::Discard, std::slice::from_ref(o)),
        AstNode::Sym(a, b) => structural(StructuralKind::Symmetry, &[a.clone(), b.clone()]),
        AstNode::Compose(f, g) | AstNode::Tensor(f, g) => {
            let (f, g) = (elaborate(f, p, defs), elaborate(g, p, defs));
            match (f, g) {
                (Ok(f), Ok(g)) => {
                    let r = if matches!(ast.node, AstNode::Compose(..)) {
                        term::compose(f, g)
                    } else {
                        term::tensor(f, g)
                    };
                    r.map_err(at)
                }
                (Err(mut a), Err(b)) => {
                    a.extend(b);
                    Err(a)
                }
                (Err(a), _) | (_, Err(a)) => Err(a),
            }
        }
        AstNode::Fbk(s, body) => {
            p.check_object(s).map_err(at)?;
            let body = elaborate(body, p, defs)?;
            term::feedback(s.clone(), body).map_err(at)
        }
    }
}

/// Parse and typecheck a standalone term.
pub fn parse_term(src: &str, p: &Presentation) -> Result<MorphismTerm, Vec<Diagnostic>> {
    let origin = Span { line: 1, col: 1 };
    let ast = parse_term_ast(src, origin).map_err(|e| {
        let span = match &e {
            DiagramError::Parse { line, col, .. } => Span {
                line: *line,
                col: *col,
            },
            _ => origin,
        };
        vec![Diagnostic { span, error: e }]
    })?;
    elaborate(&ast, p, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{build_xlearn, GeneratorDecl};

    #[test]
    fn objects_parse_with_products_and_unit() {
        let o = parse_object("Y* x X x I").unwrap();
        assert_eq!(o.flatten().to_string(), "Y* x X");
        assert!(matches!(parse_object("x"), Err(DiagramError::Parse { .. })));
    }

    #[test]
    fn term_round_trips_through_display() {
        let p = build_xlearn();
        let src = "fbk[P]((id(Y*) * eta))";
        let ast = parse_term_ast(src, Span { line: 1, col: 1 }).unwrap();
        assert!(matches!(ast.node, AstNode::Fbk(..)));
        // the body above has the wrong codomain for feedback over P
        let errs = parse_term(src, &p).unwrap_err();
        assert!(matches!(errs[0].error, DiagramError::FeedbackShape { .. }));

        let ok = parse_term("(eta * id(P))", &p).unwrap();
        let again = parse_term(&ok.to_string(), &p).unwrap();
        assert_eq!(ok.to_string(), again.to_string());
    }

    #[test]
    fn type_mismatch_is_located() {
        let p = build_xlearn();
        let errs = parse_term("(eta ; eta)", &p).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].span, Span { line: 1, col: 1 });
        match &errs[0].error {
            DiagramError::TypeMismatch { expected, found } => {
                assert_eq!(expected.to_string(), "Y x E");
                assert_eq!(found.to_string(), "X x P");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let p = build_xlearn();
        let errs = parse_term("(eta ;\n  $)", &p).unwrap_err();
        assert_eq!(errs[0].span, Span { line: 2, col: 3 });
        let errs = parse_term("(eta ; nabla", &p).unwrap_err();
        assert!(matches!(errs[0].error, DiagramError::Parse { .. }));
    }

    #[test]
    fn definitions_shadow_generators() {
        let p = crate::diagram::make_presentation(
            &["A"],
            vec![GeneratorDecl::new("f", ObjectExpr::base("A"), ObjectExpr::base("A"))],
        )
        .unwrap();
        let mut defs = BTreeMap::new();
        defs.insert("ff".to_string(), parse_term("(f ; f)", &p).unwrap());
        let ast = parse_term_ast("(ff ; f ; ff)", Span { line: 1, col: 1 }).unwrap();
        let t = elaborate(&ast, &p, &defs).unwrap();
        assert_eq!(t.count(|t| matches!(t, MorphismTerm::Gen(_))), 5);
    }
}
