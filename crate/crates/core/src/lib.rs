//! Free feedback Cartesian categories, their Cartesian stream semantics,
//! agent translators and explanation institutions.

pub mod agents;
pub mod diagram;
pub mod institution;
pub mod laws;
pub mod stream;
pub mod translator;

pub use diagram::{DiagramError, MorphismTerm, ObjectExpr, PortDiagram, Presentation};
pub use institution::{Explanation, InstitutionError, Sentence, SemanticModel, Signature};
pub use stream::{SpaceSeq, StreamError, StreamMorphism, Value, ValueSpace};
