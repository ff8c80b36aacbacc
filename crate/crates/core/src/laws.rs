//! Equational laws of feedback-free terms, checked twice: by canonical
//! diagram equality and extensionally through a translator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{compose, diagrams_equal, normalize, tensor, FlatType, MorphismTerm, ObjectExpr};
use crate::stream::{extensional_check, EqConfig, LawResult};
use crate::translator::{apply, random_term, Translator, TranslatorError};

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum TermLaw {
    LeftUnitality,
    RightUnitality,
    Associativity,
    Interchange,
    SymmetryInvolution,
    SymmetryNaturality,
    Coassociativity,
    LeftCounitality,
    RightCounitality,
    Cocommutativity,
    CopyNaturality,
    DiscardNaturality,
}

impl TermLaw {
    pub const ALL: [TermLaw; 12] = [
        TermLaw::LeftUnitality,
        TermLaw::RightUnitality,
        TermLaw::Associativity,
        TermLaw::Interchange,
        TermLaw::SymmetryInvolution,
        TermLaw::SymmetryNaturality,
        TermLaw::Coassociativity,
        TermLaw::LeftCounitality,
        TermLaw::RightCounitality,
        TermLaw::Cocommutativity,
        TermLaw::CopyNaturality,
        TermLaw::DiscardNaturality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TermLaw::LeftUnitality => "left unitality",
            TermLaw::RightUnitality => "right unitality",
            TermLaw::Associativity => "associativity",
            TermLaw::Interchange => "interchange",
            TermLaw::SymmetryInvolution => "symmetry involution",
            TermLaw::SymmetryNaturality => "symmetry naturality",
            TermLaw::Coassociativity => "coassociativity",
            TermLaw::LeftCounitality => "left counitality",
            TermLaw::RightCounitality => "right counitality",
            TermLaw::Cocommutativity => "cocommutativity",
            TermLaw::CopyNaturality => "copy naturality",
            TermLaw::DiscardNaturality => "discard naturality",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TermLawConfig {
    pub instances: usize,
    pub seed: u64,
    /// Depth of the random terms plugged into the laws.
    pub depth: usize,
    pub eq: EqConfig,
}

impl Default for TermLawConfig {
    fn default() -> Self {
        TermLawConfig {
            instances: 100,
            seed: 0,
            depth: 2,
            eq: EqConfig::default(),
        }
    }
}

fn random_type(t: &Translator, rng: &mut ChaCha8Rng) -> FlatType {
    let objects: Vec<&str> = t.presentation().objects().collect();
    let n = rng.gen_range(1..=3);
    let names: Vec<&str> = (0..n).map(|_| objects[rng.gen_range(0..objects.len())]).collect();
    ObjectExpr::product_of(&names).flatten()
}

/// Both sides of one random instance of `law`.
pub fn law_instance(
    t: &Translator,
    law: TermLaw,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(MorphismTerm, MorphismTerm), TranslatorError> {
    let p = t.presentation();
    let a = random_type(t, rng);
    let ae = a.to_expr();
    let id = MorphismTerm::id;
    let chain = |rng: &mut ChaCha8Rng, dom: &FlatType| -> Result<(MorphismTerm, FlatType), TranslatorError> {
        let f = random_term(p, dom, depth, rng);
        let cod = f.cod()?;
        Ok((f, cod))
    };
    Ok(match law {
        TermLaw::LeftUnitality => {
            let (f, _) = chain(rng, &a)?;
            (compose(id(ae), f.clone())?, f)
        }
        TermLaw::RightUnitality => {
            let (f, b) = chain(rng, &a)?;
            (compose(f.clone(), id(b.to_expr()))?, f)
        }
        TermLaw::Associativity => {
            let (f, b) = chain(rng, &a)?;
            let (g, c) = chain(rng, &b)?;
            let (h, _) = chain(rng, &c)?;
            (
                compose(compose(f.clone(), g.clone())?, h.clone())?,
                compose(f, compose(g, h)?)?,
            )
        }
        TermLaw::Interchange => {
            let a2 = random_type(t, rng);
            let (f1, b1) = chain(rng, &a)?;
            let (g1, _) = chain(rng, &b1)?;
            let (f2, b2) = chain(rng, &a2)?;
            let (g2, _) = chain(rng, &b2)?;
            (
                tensor(compose(f1.clone(), g1.clone())?, compose(f2.clone(), g2.clone())?)?,
                compose(tensor(f1, f2)?, tensor(g1, g2)?)?,
            )
        }
        TermLaw::SymmetryInvolution => {
            let b = random_type(t, rng).to_expr();
            (
                compose(
                    MorphismTerm::symmetry(ae.clone(), b.clone()),
                    MorphismTerm::symmetry(b.clone(), ae.clone()),
                )?,
                id(ObjectExpr::product(ae, b)),
            )
        }
        TermLaw::SymmetryNaturality => {
            let c = random_type(t, rng);
            let (f, b) = chain(rng, &a)?;
            let (g, d) = chain(rng, &c)?;
            (
                compose(tensor(f.clone(), g.clone())?, MorphismTerm::symmetry(b.to_expr(), d.to_expr()))?,
                compose(MorphismTerm::symmetry(ae, c.to_expr()), tensor(g, f)?)?,
            )
        }
        TermLaw::Coassociativity => {
            let copy = MorphismTerm::copy(ae.clone());
            (
                compose(copy.clone(), tensor(copy.clone(), id(ae.clone()))?)?,
                compose(copy.clone(), tensor(id(ae), copy)?)?,
            )
        }
        TermLaw::LeftCounitality => (
            compose(
                MorphismTerm::copy(ae.clone()),
                tensor(MorphismTerm::discard(ae.clone()), id(ae.clone()))?,
            )?,
            id(ae),
        ),
        TermLaw::RightCounitality => (
            compose(
                MorphismTerm::copy(ae.clone()),
                tensor(id(ae.clone()), MorphismTerm::discard(ae.clone()))?,
            )?,
            id(ae),
        ),
        TermLaw::Cocommutativity => {
            let copy = MorphismTerm::copy(ae.clone());
            (compose(copy.clone(), MorphismTerm::symmetry(ae.clone(), ae))?, copy)
        }
        TermLaw::CopyNaturality => {
            let (f, b) = chain(rng, &a)?;
            (
                compose(f.clone(), MorphismTerm::copy(b.to_expr()))?,
                compose(MorphismTerm::copy(ae), tensor(f.clone(), f)?)?,
            )
        }
        TermLaw::DiscardNaturality => {
            let (f, b) = chain(rng, &a)?;
            (compose(f, MorphismTerm::discard(b.to_expr()))?, MorphismTerm::discard(ae))
        }
    })
}

/// Check every law on `cfg.instances` random instances. An instance passes
/// when the normalized diagrams are equal and the translated stream
/// morphisms agree on sampled histories.
pub fn check_term_laws(t: &Translator, cfg: TermLawConfig) -> Result<Vec<LawResult>, TranslatorError> {
    let mut out = Vec::new();
    for (k, law) in TermLaw::ALL.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        let mut res = LawResult {
            name: law.name().to_string(),
            instances: cfg.instances,
            passed: 0,
            counterexample: None,
        };
        for i in 0..cfg.instances {
            let (lhs, rhs) = law_instance(t, law, cfg.depth, &mut rng)?;
            let diagram_ok = diagrams_equal(&normalize(&lhs)?, &normalize(&rhs)?)?;
            let eq = EqConfig {
                seed: cfg.eq.seed.wrapping_add(i as u64),
                ..cfg.eq
            };
            let stream_cex = extensional_check(&apply(t, &lhs)?, &apply(t, &rhs)?, eq)?;
            match (diagram_ok, stream_cex) {
                (true, None) => res.passed += 1,
                (d, c) => {
                    res.counterexample.get_or_insert_with(|| {
                        let why = match c {
                            Some(c) => format!("streams differ: {c}"),
                            None if !d => "normalized diagrams differ".to_string(),
                            None => unreachable!(),
                        };
                        format!("{lhs}  vs  {rhs}: {why}")
                    });
                }
            }
        }
        out.push(res);
    }
    Ok(out)
}
