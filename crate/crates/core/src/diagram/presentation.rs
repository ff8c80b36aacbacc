use std::collections::BTreeSet;
use std::sync::Arc;

use super::object::ObjectExpr;
use super::term::MorphismTerm;
use super::DiagramError;

/// A generating morphism `name : dom -> cod`.
#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub struct GeneratorDecl {
    pub name: String,
    pub dom: ObjectExpr,
    pub cod: ObjectExpr,
}

impl GeneratorDecl {
    pub fn new(name: impl Into<String>, dom: ObjectExpr, cod: ObjectExpr) -> Self {
        GeneratorDecl {
            name: name.into(),
            dom,
            cod,
        }
    }
}

/// Objects and generators of a free feedback Cartesian category.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct Presentation {
    objects: BTreeSet<String>,
    /// Declaration order is kept; it is part of the presentation's identity.
    generators: Vec<Arc<GeneratorDecl>>,
}

/// Validate and build a presentation.
pub fn make_presentation<S: AsRef<str>>(
    objects: &[S],
    generators: Vec<GeneratorDecl>,
) -> Result<Presentation, DiagramError> {
    let objects: BTreeSet<String> = objects.iter().map(|s| s.as_ref().to_string()).collect();
    let mut seen = BTreeSet::new();
    for g in &generators {
        if !seen.insert(g.name.clone()) {
            return Err(DiagramError::DuplicateGenerator(g.name.clone()));
        }
        for name in g.dom.base_names().into_iter().chain(g.cod.base_names()) {
            if !objects.contains(&name) {
                return Err(DiagramError::UnknownObject(name));
            }
        }
    }
    Ok(Presentation {
        objects,
        generators: generators.into_iter().map(Arc::new).collect(),
    })
}

impl Presentation {
    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(String::as_str)
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.contains(name)
    }

    pub fn generators(&self) -> impl Iterator<Item = &GeneratorDecl> {
        self.generators.iter().map(|g| g.as_ref())
    }

    pub fn generator_decl(&self, name: &str) -> Option<&GeneratorDecl> {
        self.generators().find(|g| g.name == name)
    }

    /// The term `Gen(name)`.
    pub fn generator(&self, name: &str) -> Result<MorphismTerm, DiagramError> {
        self.generators
            .iter()
            .find(|g| g.name == name)
            .map(|g| MorphismTerm::Gen(Arc::clone(g)))
            .ok_or_else(|| DiagramError::UnknownGenerator(name.to_string()))
    }

    /// Fails with `UnknownObject` if `obj` mentions an undeclared base object.
    pub fn check_object(&self, obj: &ObjectExpr) -> Result<(), DiagramError> {
        for name in obj.base_names() {
            if !self.objects.contains(&name) {
                return Err(DiagramError::UnknownObject(name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ObjectExpr {
        ObjectExpr::base("X")
    }

    #[test]
    fn accepts_well_formed_presentation() {
        let p = make_presentation(&["X"], vec![GeneratorDecl::new("f", x(), x())]).unwrap();
        assert!(p.has_object("X"));
        assert_eq!(p.generators().count(), 1);
    }

    #[test]
    fn rejects_unknown_object() {
        let err = make_presentation(&["X"], vec![GeneratorDecl::new("f", x(), ObjectExpr::base("Z"))])
            .unwrap_err();
        assert_eq!(err, DiagramError::UnknownObject("Z".into()));
    }

    #[test]
    fn rejects_duplicate_generator() {
        let g = GeneratorDecl::new("f", x(), x());
        let err = make_presentation(&["X"], vec![g.clone(), g]).unwrap_err();
        assert_eq!(err, DiagramError::DuplicateGenerator("f".into()));
    }

    #[test]
    fn unknown_generator_lookup() {
        let p = make_presentation::<&str>(&[], vec![]).unwrap();
        assert!(matches!(p.generator("g"), Err(DiagramError::UnknownGenerator(_))));
    }
}
