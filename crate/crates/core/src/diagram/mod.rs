//! Free feedback Cartesian categories: objects, terms, port-graph IR and the
//! textual term grammar.

mod object;
mod port;
mod presentation;
pub mod syntax;
mod term;
mod xlearn;

use thiserror::Error;

pub use object::{Factor, FlatType, ObjectExpr};
pub use port::{
    boundary, canonical_form, diagrams_equal, normalize, Node, NodeKind, PortDiagram, Source,
    Target, Wire,
};
pub use presentation::{make_presentation, GeneratorDecl, Presentation};
pub use syntax::{elaborate, parse_object, parse_object_at, parse_term, parse_term_ast, Diagnostic, Span, TermAst};
pub use term::{compose, feedback, structural, tensor, MorphismTerm, StructuralKind};
pub use xlearn::{abstract_learning_agent, build_xlearn, ETA, NABLA};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DiagramError {
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("type mismatch: codomain {expected} does not match domain {found}")]
    TypeMismatch { expected: FlatType, found: FlatType },
    #[error("feedback over {state} needs a body of shape A x F(S) -> B x S, got {dom} -> {cod}")]
    FeedbackShape {
        state: FlatType,
        dom: FlatType,
        cod: FlatType,
    },
    #[error("{what} takes {expected} object(s), got {found}")]
    Arity {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("diagram equality is only decided for feedback-free diagrams")]
    UnsupportedFeedbackEquality,
    #[error("malformed diagram: {0}")]
    MalformedDiagram(String),
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
}
