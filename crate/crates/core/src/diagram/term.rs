//! Syntax of morphisms in a free feedback Cartesian category.

use std::fmt;
use std::sync::Arc;

use super::object::{FlatType, ObjectExpr};
use super::presentation::{GeneratorDecl, Presentation};
use super::DiagramError;

#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub enum MorphismTerm {
    Gen(Arc<GeneratorDecl>),
    Id(ObjectExpr),
    Compose(Arc<MorphismTerm>, Arc<MorphismTerm>),
    Tensor(Arc<MorphismTerm>, Arc<MorphismTerm>),
    Symmetry(ObjectExpr, ObjectExpr),
    Copy(ObjectExpr),
    Discard(ObjectExpr),
    Feedback(ObjectExpr, Arc<MorphismTerm>),
}

/// The structural (non-generator) morphisms every Cartesian category carries.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum StructuralKind {
    Identity,
    Symmetry,
    Copy,
    Discard,
}

/// Sequential composition `f ; g`.
pub fn compose(f: MorphismTerm, g: MorphismTerm) -> Result<MorphismTerm, DiagramError> {
    let (_, cod) = f.infer_type()?;
    let (dom, _) = g.infer_type()?;
    if cod != dom {
        return Err(DiagramError::TypeMismatch {
            expected: cod,
            found: dom,
        });
    }
    Ok(MorphismTerm::Compose(Arc::new(f), Arc::new(g)))
}

/// Parallel composition `f * g`.
pub fn tensor(f: MorphismTerm, g: MorphismTerm) -> Result<MorphismTerm, DiagramError> {
    f.infer_type()?;
    g.infer_type()?;
    Ok(MorphismTerm::Tensor(Arc::new(f), Arc::new(g)))
}

/// Build an identity, symmetry, copy or discard on objects of `p`.
///
/// Symmetry takes two objects, the others one.
pub fn structural(
    p: &Presentation,
    kind: StructuralKind,
    objs: &[ObjectExpr],
) -> Result<MorphismTerm, DiagramError> {
    for o in objs {
        p.check_object(o)?;
    }
    let arity = if kind == StructuralKind::Symmetry { 2 } else { 1 };
    if objs.len() != arity {
        return Err(DiagramError::Arity {
            what: format!("{kind:?}"),
            expected: arity,
            found: objs.len(),
        });
    }
    let o = objs[0].clone();
    Ok(match kind {
        StructuralKind::Identity => MorphismTerm::Id(o),
        StructuralKind::Symmetry => MorphismTerm::Symmetry(o, objs[1].clone()),
        StructuralKind::Copy => MorphismTerm::Copy(o),
        StructuralKind::Discard => MorphismTerm::Discard(o),
    })
}

/// `fbk[state](body)`; the body must have type `A x F(state) -> B x state`.
///
/// The trailing state factors of the body's domain may be written either as
/// `state` or as `F(state)`: the delay marker only records which wires the
/// feedback operator feeds back, so both spellings denote the same body.
pub fn feedback(state: ObjectExpr, body: MorphismTerm) -> Result<MorphismTerm, DiagramError> {
    feedback_type(&state, &body)?;
    Ok(MorphismTerm::Feedback(state, Arc::new(body)))
}

fn feedback_type(
    state: &ObjectExpr,
    body: &MorphismTerm,
) -> Result<(FlatType, FlatType), DiagramError> {
    let (dom, cod) = body.infer_type()?;
    let s = state.flatten();
    let k = s.len();
    let shape_err = || DiagramError::FeedbackShape {
        state: s.clone(),
        dom: dom.clone(),
        cod: cod.clone(),
    };
    if dom.len() < k || cod.len() < k {
        return Err(shape_err());
    }
    let (a, dom_state) = dom.split_at(dom.len() - k);
    let (b, cod_state) = cod.split_at(cod.len() - k);
    let state_ok = dom_state
        .factors()
        .iter()
        .zip(s.factors())
        .all(|(d, f)| d == f || *d == f.delayed());
    if !state_ok || cod_state != s {
        return Err(shape_err());
    }
    Ok((a, b))
}

impl MorphismTerm {
    pub fn id(obj: ObjectExpr) -> Self {
        MorphismTerm::Id(obj)
    }

    pub fn copy(obj: ObjectExpr) -> Self {
        MorphismTerm::Copy(obj)
    }

    pub fn discard(obj: ObjectExpr) -> Self {
        MorphismTerm::Discard(obj)
    }

    pub fn symmetry(x: ObjectExpr, y: ObjectExpr) -> Self {
        MorphismTerm::Symmetry(x, y)
    }

    /// `(dom, cod)` in flattened form.
    pub fn infer_type(&self) -> Result<(FlatType, FlatType), DiagramError> {
        match self {
            MorphismTerm::Gen(g) => Ok((g.dom.flatten(), g.cod.flatten())),
            MorphismTerm::Id(o) => {
                let t = o.flatten();
                Ok((t.clone(), t))
            }
            MorphismTerm::Compose(f, g) => {
                let (a, b) = f.infer_type()?;
                let (c, d) = g.infer_type()?;
                if b != c {
                    return Err(DiagramError::TypeMismatch {
                        expected: b,
                        found: c,
                    });
                }
                Ok((a, d))
            }
            MorphismTerm::Tensor(f, g) => {
                let (a, b) = f.infer_type()?;
                let (c, d) = g.infer_type()?;
                Ok((a.concat(&c), b.concat(&d)))
            }
            MorphismTerm::Symmetry(x, y) => {
                let (x, y) = (x.flatten(), y.flatten());
                Ok((x.concat(&y), y.concat(&x)))
            }
            MorphismTerm::Copy(o) => {
                let t = o.flatten();
                Ok((t.clone(), t.concat(&t)))
            }
            MorphismTerm::Discard(o) => Ok((o.flatten(), FlatType::unit())),
            MorphismTerm::Feedback(s, body) => feedback_type(s, body),
        }
    }

    pub fn dom(&self) -> Result<FlatType, DiagramError> {
        Ok(self.infer_type()?.0)
    }

    pub fn cod(&self) -> Result<FlatType, DiagramError> {
        Ok(self.infer_type()?.1)
    }

    /// Pre-order traversal over all subterms, including `self`.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a MorphismTerm)) {
        visit(self);
        match self {
            MorphismTerm::Compose(f, g) | MorphismTerm::Tensor(f, g) => {
                f.walk(visit);
                g.walk(visit);
            }
            MorphismTerm::Feedback(_, body) => body.walk(visit),
            _ => {}
        }
    }

    /// Number of subterms satisfying `pred`.
    pub fn count(&self, pred: impl Fn(&MorphismTerm) -> bool) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if pred(t) {
                n += 1;
            }
        });
        n
    }

    pub fn contains_feedback(&self) -> bool {
        self.count(|t| matches!(t, MorphismTerm::Feedback(..))) > 0
    }
}

impl fmt::Display for MorphismTerm {
    /// Prints in the textual term grammar accepted by [`super::syntax`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismTerm::Gen(g) => write!(f, "{}", g.name),
            MorphismTerm::Id(o) => write!(f, "id({o})"),
            MorphismTerm::Compose(a, b) => write!(f, "({a} ; {b})"),
            MorphismTerm::Tensor(a, b) => write!(f, "({a} * {b})"),
            MorphismTerm::Symmetry(x, y) => write!(f, "sym({x}, {y})"),
            MorphismTerm::Copy(o) => write!(f, "copy({o})"),
            MorphismTerm::Discard(o) => write!(f, "discard({o})"),
            MorphismTerm::Feedback(s, body) => write!(f, "fbk[{s}]({body})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::make_presentation;

    fn obj(n: &str) -> ObjectExpr {
        ObjectExpr::base(n)
    }

    fn pres() -> Presentation {
        make_presentation(
            &["X", "Y", "Z", "W"],
            vec![
                GeneratorDecl::new("f", obj("X"), obj("Y")),
                GeneratorDecl::new("g", obj("Z"), obj("W")),
                GeneratorDecl::new(
                    "h",
                    ObjectExpr::product(obj("X"), obj("Z")),
                    ObjectExpr::product(obj("Y"), obj("Z")),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn compose_checks_boundary() {
        let p = pres();
        let f = p.generator("f").unwrap();
        let g = p.generator("g").unwrap();
        let err = compose(f.clone(), g).unwrap_err();
        assert!(matches!(err, DiagramError::TypeMismatch { .. }));
        let t = compose(MorphismTerm::id(obj("X")), f).unwrap();
        assert_eq!(t.infer_type().unwrap().1.to_string(), "Y");
    }

    #[test]
    fn tensor_concatenates_types() {
        let p = pres();
        let t = tensor(p.generator("f").unwrap(), MorphismTerm::id(ObjectExpr::Unit)).unwrap();
        let (d, c) = t.infer_type().unwrap();
        assert_eq!((d.to_string(), c.to_string()), ("X".into(), "Y".into()));
    }

    #[test]
    fn structural_types() {
        let p = pres();
        let c = structural(&p, StructuralKind::Copy, &[obj("X")]).unwrap();
        assert_eq!(c.infer_type().unwrap().1.to_string(), "X x X");
        let d = structural(&p, StructuralKind::Discard, &[obj("X")]).unwrap();
        assert!(d.infer_type().unwrap().1.is_empty());
        let s = structural(&p, StructuralKind::Symmetry, &[obj("X"), obj("Y")]).unwrap();
        assert_eq!(s.infer_type().unwrap().1.to_string(), "Y x X");
        assert!(matches!(
            structural(&p, StructuralKind::Copy, &[obj("Q")]),
            Err(DiagramError::UnknownObject(_))
        ));
    }

    #[test]
    fn feedback_shapes() {
        let p = pres();
        let h = p.generator("h").unwrap();
        let fb = feedback(obj("Z"), h.clone()).unwrap();
        let (d, c) = fb.infer_type().unwrap();
        assert_eq!((d.to_string(), c.to_string()), ("X".into(), "Y".into()));

        // no trailing state factor
        let f = p.generator("f").unwrap();
        assert!(matches!(feedback(obj("Z"), f.clone()), Err(DiagramError::FeedbackShape { .. })));

        // vanishing: unit state leaves the type alone
        let v = feedback(ObjectExpr::Unit, f).unwrap();
        assert_eq!(v.infer_type().unwrap().0.to_string(), "X");

        // explicitly delayed state in the domain is accepted too
        let delayed_body = MorphismTerm::id(ObjectExpr::product(
            obj("X"),
            ObjectExpr::delayed(obj("X")),
        ));
        assert!(feedback(obj("X"), delayed_body).is_err()); // cod has F(X), not X
    }

    #[test]
    fn display_uses_term_grammar() {
        let p = pres();
        let t = compose(
            MorphismTerm::copy(obj("X")),
            tensor(p.generator("f").unwrap(), p.generator("f").unwrap()).unwrap(),
        )
        .unwrap();
        assert_eq!(t.to_string(), "(copy(X) ; (f * f))");
    }
}
