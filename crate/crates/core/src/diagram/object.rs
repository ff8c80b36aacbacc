//! Objects of the free category: formal products of base objects.

use std::fmt;

/// An object expression as written by the user.
///
/// Products are strictly associative with [`ObjectExpr::Unit`] as neutral
/// element, so two expressions are equal exactly when their [`flatten`]ed
/// factor lists agree.
///
/// [`flatten`]: ObjectExpr::flatten
#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub enum ObjectExpr {
    Base(String),
    Unit,
    Product(Box<ObjectExpr>, Box<ObjectExpr>),
    /// The delay endofunctor applied to a feedback state object.
    Delayed(Box<ObjectExpr>),
}

impl ObjectExpr {
    pub fn base(name: impl Into<String>) -> Self {
        ObjectExpr::Base(name.into())
    }

    pub fn product(left: ObjectExpr, right: ObjectExpr) -> Self {
        ObjectExpr::Product(Box::new(left), Box::new(right))
    }

    pub fn delayed(inner: ObjectExpr) -> Self {
        ObjectExpr::Delayed(Box::new(inner))
    }

    /// Right-nested product of the given base names; the empty list is `Unit`.
    pub fn product_of<S: AsRef<str>>(names: &[S]) -> Self {
        FlatType(names.iter().map(|n| Factor::base(n.as_ref())).collect()).to_expr()
    }

    pub fn flatten(&self) -> FlatType {
        let mut out = Vec::new();
        self.flatten_into(0, &mut out);
        FlatType(out)
    }

    fn flatten_into(&self, delay: u32, out: &mut Vec<Factor>) {
        match self {
            ObjectExpr::Base(name) => out.push(Factor {
                name: name.clone(),
                delay,
            }),
            ObjectExpr::Unit => {}
            ObjectExpr::Product(l, r) => {
                l.flatten_into(delay, out);
                r.flatten_into(delay, out);
            }
            // F is strict monoidal: F(S x T) = F(S) x F(T) and F(I) = I.
            ObjectExpr::Delayed(inner) => inner.flatten_into(delay + 1, out),
        }
    }

    /// Base object names mentioned anywhere in the expression.
    pub fn base_names(&self) -> Vec<String> {
        self.flatten().0.into_iter().map(|f| f.name).collect()
    }

    /// Equality modulo strict associativity and unit laws.
    pub fn same_as(&self, other: &ObjectExpr) -> bool {
        self.flatten() == other.flatten()
    }
}

impl fmt::Display for ObjectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.flatten())
    }
}

/// One factor of a flattened object: a base object under `delay` applications
/// of the delay endofunctor.
#[derive(Clone, Debug, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub struct Factor {
    pub name: String,
    pub delay: u32,
}

impl Factor {
    pub fn base(name: impl Into<String>) -> Self {
        Factor {
            name: name.into(),
            delay: 0,
        }
    }

    pub fn delayed(&self) -> Self {
        Factor {
            name: self.name.clone(),
            delay: self.delay + 1,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.delay {
            write!(f, "F(")?;
        }
        write!(f, "{}", self.name)?;
        for _ in 0..self.delay {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// The canonical flattened form of an object: an ordered list of factors.
#[derive(Clone, Debug, Default, Eq, Hash, Ord, PartialEq, PartialOrd)]
pub struct FlatType(pub Vec<Factor>);

impl FlatType {
    pub fn unit() -> Self {
        FlatType(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn concat(&self, other: &FlatType) -> FlatType {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        FlatType(v)
    }

    pub fn split_at(&self, mid: usize) -> (FlatType, FlatType) {
        let (a, b) = self.0.split_at(mid);
        (FlatType(a.to_vec()), FlatType(b.to_vec()))
    }

    /// Rebuild a right-nested expression with the same flattening.
    pub fn to_expr(&self) -> ObjectExpr {
        let mut iter = self.0.iter().rev().map(|f| {
            let mut e = ObjectExpr::Base(f.name.clone());
            for _ in 0..f.delay {
                e = ObjectExpr::delayed(e);
            }
            e
        });
        match iter.next() {
            None => ObjectExpr::Unit,
            Some(last) => iter.fold(last, |acc, e| ObjectExpr::product(e, acc)),
        }
    }
}

impl fmt::Display for FlatType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        for (i, factor) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}
