//! The XLearn presentation and the abstract learning agent.

use super::object::{FlatType, ObjectExpr};
use super::presentation::{make_presentation, GeneratorDecl, Presentation};
use super::term::{compose, feedback, tensor, MorphismTerm};
use super::DiagramError;

pub const ETA: &str = "eta";
pub const NABLA: &str = "nabla";

fn obj(n: &str) -> ObjectExpr {
    ObjectExpr::base(n)
}

/// Objects `X, Y, Y*, P, E` with `eta: X x P -> Y x E` and
/// `nabla: Y* x Y x P -> P`.
pub fn build_xlearn() -> Presentation {
    make_presentation(
        &["X", "Y", "Y*", "P", "E"],
        vec![
            GeneratorDecl::new(
                ETA,
                ObjectExpr::product_of(&["X", "P"]),
                ObjectExpr::product_of(&["Y", "E"]),
            ),
            GeneratorDecl::new(NABLA, ObjectExpr::product_of(&["Y*", "Y", "P"]), obj("P")),
        ],
    )
    .expect("XLearn presentation is well formed")
}

struct Shapes {
    eta: MorphismTerm,
    nabla: MorphismTerm,
    x: ObjectExpr,
    y: ObjectExpr,
    ys: ObjectExpr,
    p: ObjectExpr,
    e: ObjectExpr,
}

fn single(t: &FlatType) -> Option<ObjectExpr> {
    match t.factors() {
        [f] if f.delay == 0 => Some(ObjectExpr::base(f.name.clone())),
        _ => None,
    }
}

fn find_shapes(p: &Presentation) -> Option<Shapes> {
    let decls: Vec<&GeneratorDecl> = p.generators().collect();
    for m in &decls {
        let (md, mc) = (m.dom.flatten(), m.cod.flatten());
        if md.len() != 2 || mc.len() != 2 {
            continue;
        }
        let (x, pp) = md.split_at(1);
        let (y, e) = mc.split_at(1);
        for n in &decls {
            let (nd, nc) = (n.dom.flatten(), n.cod.flatten());
            if nd.len() != 3 || nc != pp {
                continue;
            }
            let (ys, rest) = nd.split_at(1);
            if rest != y.concat(&pp) {
                continue;
            }
            return Some(Shapes {
                eta: p.generator(&m.name).ok()?,
                nabla: p.generator(&n.name).ok()?,
                x: single(&x)?,
                y: single(&y)?,
                ys: single(&ys)?,
                p: single(&pp)?,
                e: single(&e)?,
            });
        }
    }
    None
}

/// The agent `fbk_P` of the model/optimizer loop, typed `Y* x X -> Y x E`.
///
/// Parameters are copied to feed both the model and the optimizer. The
/// prediction and the explanation are copied before one explanation copy is
/// discarded and the prediction is handed to the optimizer, so that both reach
/// the outer boundary.
pub fn abstract_learning_agent(p: &Presentation) -> Result<MorphismTerm, DiagramError> {
    let s = find_shapes(p).ok_or_else(|| {
        DiagramError::ShapeError(
            "need generators of shape X x P -> Y x E and Y* x Y x P -> P".into(),
        )
    })?;
    let id = |o: &ObjectExpr| MorphismTerm::id(o.clone());
    let prod = |os: &[&ObjectExpr]| {
        os.iter()
            .fold(ObjectExpr::Unit, |acc, o| ObjectExpr::product(acc, (*o).clone()))
    };
    let par = |ts: Vec<MorphismTerm>| -> Result<MorphismTerm, DiagramError> {
        let mut it = ts.into_iter();
        let first = it.next().expect("nonempty");
        it.try_fold(first, tensor)
    };
    let Shapes {
        eta,
        nabla,
        x,
        y,
        ys,
        p: pp,
        e,
    } = s;

    let stages = vec![
        par(vec![id(&prod(&[&ys, &x])), MorphismTerm::copy(pp.clone())])?,
        par(vec![id(&ys), eta, id(&pp)])?,
        par(vec![
            id(&ys),
            MorphismTerm::copy(y.clone()),
            MorphismTerm::copy(e.clone()),
            id(&pp),
        ])?,
        par(vec![
            id(&prod(&[&ys, &y, &y, &e])),
            MorphismTerm::discard(e.clone()),
            id(&pp),
        ])?,
        par(vec![
            MorphismTerm::symmetry(ys.clone(), prod(&[&y, &y, &e])),
            id(&pp),
        ])?,
        par(vec![
            id(&y),
            MorphismTerm::symmetry(y.clone(), e.clone()),
            id(&ys),
            id(&pp),
        ])?,
        par(vec![
            id(&prod(&[&y, &e])),
            MorphismTerm::symmetry(y.clone(), ys.clone()),
            id(&pp),
        ])?,
        par(vec![id(&prod(&[&y, &e])), nabla])?,
    ];
    let mut it = stages.into_iter();
    let first = it.next().expect("nonempty");
    let body = it.try_fold(first, compose)?;
    feedback(pp, body)
}
