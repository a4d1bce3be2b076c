//! Built-in algebras and identity sets.
//!
//! The sets are constructed in code rather than parsed from strings, so the
//! degree and symmetry bookkeeping is explicit and cannot drift. Every
//! family carries a descriptive label plus labelled concrete instances; the
//! instances are what gets verified, the families are what gets reported.

use gradstar::abgroup::{AbelianGroup, GroupElement};
use gradstar::freealg::{commutator, Polynomial, Variable};
use gradstar::goodmono;
use gradstar::utalg::{finest_grading, ElementaryGrading, GradedStarAlgebra, InvKind, Involution};

use crate::{good_err, usage, CliError};

/// One identity family: a label plus its concrete multilinear instances.
#[derive(Debug, Clone)]
pub struct Family {
    pub label: String,
    pub instances: Vec<(String, Polynomial)>,
}

/// A named identity set together with the algebra it is claimed for.
#[derive(Debug, Clone)]
pub struct IdentitySet {
    pub name: &'static str,
    pub algebra: GradedStarAlgebra,
    pub families: Vec<Family>,
}

impl IdentitySet {
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.families
            .iter()
            .flat_map(|f| f.instances.iter().map(|(_, p)| p.clone()))
            .collect()
    }

    pub fn instance_count(&self) -> usize {
        self.families.iter().map(|f| f.instances.len()).sum()
    }
}

/// Looks up a built-in set by name. The finest-* sets need `m`; ut3-z2 is a
/// fixed algebra and ignores it.
pub fn builtin_set(name: &str, m: Option<usize>) -> Result<IdentitySet, CliError> {
    match name {
        "finest-reflection" => finest_reflection_set(need_m(name, m)?),
        "finest-symplectic" => finest_symplectic_set(need_m(name, m)?),
        "ut3-z2" => Ok(ut3_z2_set()),
        other => Err(usage(format!(
            "unknown identity set {other:?}; built-ins: finest-reflection, finest-symplectic, ut3-z2"
        ))),
    }
}

fn need_m(name: &str, m: Option<usize>) -> Result<usize, CliError> {
    m.ok_or_else(|| usage(format!("--m is required for the {name} set")))
}

/// UT_m with the finest grading compatible with the chosen involution.
pub fn finest_algebra(m: usize, kind: InvKind) -> Result<GradedStarAlgebra, CliError> {
    if m == 0 {
        return Err(usage("the matrix size m must be at least 1"));
    }
    let inv = Involution::new(kind, m).map_err(|e| usage(e.to_string()))?;
    GradedStarAlgebra::new(finest_grading(m), inv).map_err(|e| usage(e.to_string()))
}

/// UT_m graded by the trivial group, i.e. plain matrices with involution.
pub fn trivial_algebra(m: usize, kind: InvKind) -> Result<GradedStarAlgebra, CliError> {
    if m == 0 {
        return Err(usage("the matrix size m must be at least 1"));
    }
    let group = AbelianGroup::free(0);
    let zero = group.zero();
    let grading = ElementaryGrading::new(group, vec![zero; m]).map_err(|e| usage(e.to_string()))?;
    let inv = Involution::new(kind, m).map_err(|e| usage(e.to_string()))?;
    GradedStarAlgebra::new(grading, inv).map_err(|e| usage(e.to_string()))
}

/// UT_3 with the Z_2-grading induced by (0, 1, 0) and the reflection
/// involution: the middle row and column are odd, everything else is even.
pub fn ut3_z2_algebra() -> GradedStarAlgebra {
    let group = AbelianGroup::cyclic(2);
    let tuple: Vec<GroupElement> = [0, 1, 0]
        .iter()
        .map(|&c| group.element(vec![c]).expect("Z_2 element"))
        .collect();
    let grading = ElementaryGrading::new(group, tuple).expect("grading tuple");
    let inv = Involution::new(InvKind::Reflection, 3).expect("reflection involution");
    GradedStarAlgebra::new(grading, inv).expect("graded involution")
}

fn xf(i: u32, g: &GroupElement) -> Polynomial {
    Polynomial::var(Variable::free(i, g.clone()))
}

fn xs(i: u32, g: &GroupElement) -> Polynomial {
    Polynomial::starred_var(Variable::free(i, g.clone()))
}

fn one_dim_degrees(alg: &GradedStarAlgebra) -> Vec<GroupElement> {
    alg.grading()
        .support_nonneutral()
        .into_iter()
        .filter(|g| alg.grading().component_dim(g) == 1)
        .collect()
}

/// The reflection set for the finest grading: neutral letters commute,
/// letters of one-dimensional degree are star-fixed, and for odd m a star
/// on a neutral letter between two extreme-degree letters is invisible
/// while skew neutral letters annihilate around an extreme-degree letter.
pub fn finest_reflection_set(m: usize) -> Result<IdentitySet, CliError> {
    if m < 2 {
        return Err(usage("the finest-reflection set needs m >= 2"));
    }
    let algebra = finest_algebra(m, InvKind::Reflection)?;
    let group = algebra.grading().group().clone();
    let e = group.zero();
    let r = m / 2;

    let mut families = vec![Family {
        label: "neutral-commutator".into(),
        instances: vec![(
            "neutral-commutator".into(),
            commutator(&xf(1, &e), &xf(2, &e)),
        )],
    }];
    families.push(Family {
        label: "star-fixed".into(),
        instances: one_dim_degrees(&algebra)
            .iter()
            .map(|g| (format!("star-fixed[({g})]"), xs(1, g).sub(&xf(1, g))))
            .collect(),
    });
    if m % 2 == 1 {
        let basis = |i: usize| {
            let mut coords = vec![0i64; r];
            coords[i - 1] = 1;
            group.element(coords).expect("free coordinates")
        };
        let mut middle = Vec::new();
        for i in 1..=r {
            for j in 1..=r {
                let (g, h) = (basis(i), basis(j));
                let plain = xf(1, &g).mul(&xf(2, &e)).mul(&xf(3, &h));
                let starred = xf(1, &g).mul(&xs(2, &e)).mul(&xf(3, &h));
                middle.push((
                    format!("middle-star-drop[({g}),({h})]"),
                    plain.sub(&starred),
                ));
            }
        }
        families.push(Family {
            label: "middle-star-drop".into(),
            instances: middle,
        });
        let mut sandwich = Vec::new();
        for i in 1..=r {
            let g = basis(i);
            let skew1 = xf(1, &e).sub(&xs(1, &e));
            let skew3 = xf(3, &e).sub(&xs(3, &e));
            sandwich.push((
                format!("neutral-skew-sandwich[({g})]"),
                skew1.mul(&xf(2, &g)).mul(&skew3),
            ));
        }
        families.push(Family {
            label: "neutral-skew-sandwich".into(),
            instances: sandwich,
        });
    }
    Ok(IdentitySet {
        name: "finest-reflection",
        algebra,
        families,
    })
}

/// The symplectic analogue, defined for even m only: neutral letters
/// commute and letters of one-dimensional degree are star-skew (x* = -x).
pub fn finest_symplectic_set(m: usize) -> Result<IdentitySet, CliError> {
    if m < 2 || m % 2 == 1 {
        return Err(usage("the finest-symplectic set needs even m >= 2"));
    }
    let algebra = finest_algebra(m, InvKind::Symplectic)?;
    let e = algebra.grading().group().zero();
    let families = vec![
        Family {
            label: "neutral-commutator".into(),
            instances: vec![(
                "neutral-commutator".into(),
                commutator(&xf(1, &e), &xf(2, &e)),
            )],
        },
        Family {
            label: "star-skew".into(),
            instances: one_dim_degrees(&algebra)
                .iter()
                .map(|g| (format!("star-skew[({g})]"), xs(1, g).add(&xf(1, g))))
                .collect(),
        },
    ];
    Ok(IdentitySet {
        name: "finest-symplectic",
        algebra,
        families,
    })
}

/// Tagged-letter kind over Z_2: y letters are even, z letters odd; the
/// sign is the symmetry under the involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Kind {
    odd: bool,
    plus: bool,
}

impl Kind {
    fn label(self) -> &'static str {
        match (self.odd, self.plus) {
            (false, true) => "y+",
            (false, false) => "y-",
            (true, true) => "z+",
            (true, false) => "z-",
        }
    }
}

const YP: Kind = Kind {
    odd: false,
    plus: true,
};
const YM: Kind = Kind {
    odd: false,
    plus: false,
};
const ZP: Kind = Kind {
    odd: true,
    plus: true,
};
const ZM: Kind = Kind {
    odd: true,
    plus: false,
};
const ALL_KINDS: [Kind; 4] = [YP, YM, ZP, ZM];
// Kinds spanning a one-dimensional subspace of ut3-z2; y+ is the exception
// with its three-dimensional component.
const ONE_DIM_KINDS: [Kind; 3] = [YM, ZP, ZM];
const Z_KINDS: [Kind; 2] = [ZP, ZM];

/// The twelve identity families of the ut3-z2 algebra in the tagged
/// alphabet, 64 concrete multilinear instances in total.
pub fn ut3_z2_set() -> IdentitySet {
    let algebra = ut3_z2_algebra();
    let group = algebra.grading().group().clone();
    let even = group.zero();
    let odd = group.element(vec![1]).expect("Z_2 element");
    let var = |i: u32, k: Kind| {
        let degree = if k.odd { odd.clone() } else { even.clone() };
        Polynomial::var(Variable::tagged(i, degree, k.plus))
    };

    let mut families = Vec::new();

    // Products reverse when the outer letters share a one-dimensional kind.
    let mut reversal = Vec::new();
    for outer in ONE_DIM_KINDS {
        for mid in ALL_KINDS {
            let forward = var(1, outer).mul(&var(2, mid)).mul(&var(3, outer));
            let backward = var(3, outer).mul(&var(2, mid)).mul(&var(1, outer));
            reversal.push((
                format!("outer-one-dim-reversal[{};{}]", outer.label(), mid.label()),
                forward.sub(&backward),
            ));
        }
    }
    families.push(Family {
        label: "outer-one-dim-reversal".into(),
        instances: reversal,
    });

    // Any product of three odd letters vanishes.
    let mut triples = Vec::new();
    for a in Z_KINDS {
        for b in Z_KINDS {
            for c in Z_KINDS {
                triples.push((
                    format!("odd-triple[{},{},{}]", a.label(), b.label(), c.label()),
                    var(1, a).mul(&var(2, b)).mul(&var(3, c)),
                ));
            }
        }
    }
    families.push(Family {
        label: "odd-triple".into(),
        instances: triples,
    });

    // Letters of one common kind commute.
    families.push(Family {
        label: "same-kind-commutator".into(),
        instances: ALL_KINDS
            .iter()
            .map(|&k| {
                (
                    format!("same-kind-commutator[{}]", k.label()),
                    commutator(&var(1, k), &var(2, k)),
                )
            })
            .collect(),
    });

    // [y+, y-] multiplies every commutator to zero.
    let mut products = Vec::new();
    for a in ALL_KINDS {
        for b in ALL_KINDS {
            products.push((
                format!(
                    "even-commutator-times-commutator[{};{}]",
                    a.label(),
                    b.label()
                ),
                commutator(&var(1, YP), &var(2, YM)).mul(&commutator(&var(3, a), &var(4, b))),
            ));
        }
    }
    families.push(Family {
        label: "even-commutator-times-commutator".into(),
        instances: products,
    });

    // A symmetric even letter commutes with any product of two odd letters.
    let mut pairs = Vec::new();
    for a in Z_KINDS {
        for b in Z_KINDS {
            pairs.push((
                format!("symmetric-commutes-odd-pair[{},{}]", a.label(), b.label()),
                commutator(&var(1, YP), &var(2, a).mul(&var(3, b))),
            ));
        }
    }
    families.push(Family {
        label: "symmetric-commutes-odd-pair".into(),
        instances: pairs,
    });

    // [y+, y-] annihilates odd letters on either side.
    let mut sides = Vec::new();
    for a in Z_KINDS {
        let c = commutator(&var(1, YP), &var(2, YM));
        sides.push((
            format!("even-commutator-times-odd[left;{}]", a.label()),
            c.mul(&var(3, a)),
        ));
        sides.push((
            format!("even-commutator-times-odd[right;{}]", a.label()),
            var(3, a).mul(&commutator(&var(1, YP), &var(2, YM))),
        ));
    }
    families.push(Family {
        label: "even-commutator-times-odd".into(),
        instances: sides,
    });

    // [y+, y-] anticommutes with skew even letters.
    let c = commutator(&var(1, YP), &var(2, YM));
    families.push(Family {
        label: "even-commutator-anticommutes-skew".into(),
        instances: vec![(
            "even-commutator-anticommutes-skew".into(),
            c.mul(&var(3, YM)).add(&var(3, YM).mul(&c)),
        )],
    });

    // Skew-odd-skew products vanish.
    families.push(Family {
        label: "skew-odd-skew".into(),
        instances: Z_KINDS
            .iter()
            .map(|&a| {
                (
                    format!("skew-odd-skew[{}]", a.label()),
                    var(1, YM).mul(&var(2, a)).mul(&var(3, YM)),
                )
            })
            .collect(),
    });

    // Odd-skew-odd products vanish.
    let mut oso = Vec::new();
    for a in Z_KINDS {
        for b in Z_KINDS {
            oso.push((
                format!("odd-skew-odd[{},{}]", a.label(), b.label()),
                var(1, a).mul(&var(2, YM)).mul(&var(3, b)),
            ));
        }
    }
    families.push(Family {
        label: "odd-skew-odd".into(),
        instances: oso,
    });

    // Symmetric and skew odd letters anticommute.
    families.push(Family {
        label: "odd-mixed-anticommutator".into(),
        instances: vec![(
            "odd-mixed-anticommutator".into(),
            var(1, ZP)
                .mul(&var(2, ZM))
                .add(&var(2, ZM).mul(&var(1, ZP))),
        )],
    });

    // A product of two odd letters anticommutes with skew even letters.
    let mut anti = Vec::new();
    for a in Z_KINDS {
        for b in Z_KINDS {
            let zz = var(1, a).mul(&var(2, b));
            anti.push((
                format!("odd-pair-anticommutes-skew[{},{}]", a.label(), b.label()),
                zz.mul(&var(3, YM)).add(&var(3, YM).mul(&zz)),
            ));
        }
    }
    families.push(Family {
        label: "odd-pair-anticommutes-skew".into(),
        instances: anti,
    });

    // Commutators with a symmetric even letter shift across odd letters.
    let mut shift = Vec::new();
    for a in Z_KINDS {
        for b in Z_KINDS {
            shift.push((
                format!("odd-commutator-shift[{},{}]", a.label(), b.label()),
                commutator(&var(1, a), &var(2, YP))
                    .mul(&var(3, b))
                    .add(&var(1, a).mul(&commutator(&var(3, b), &var(2, YP)))),
            ));
        }
    }
    families.push(Family {
        label: "odd-commutator-shift".into(),
        instances: shift,
    });

    IdentitySet {
        name: "ut3-z2",
        algebra,
        families,
    }
}

/// Generators for a basis certificate: the named set's instances plus, for
/// the finest algebras, the vanishing monomials up to length m. The ut3-z2
/// set is complete on its own.
pub fn basis_generators(set: &IdentitySet) -> Result<Vec<Polynomial>, CliError> {
    let mut generators = set.polynomials();
    if set.name != "ut3-z2" {
        let m = set.algebra.m();
        let dead = goodmono::monomial_identities(m, m).map_err(good_err)?;
        generators.extend(dead.into_iter().map(Polynomial::from_monomial));
    }
    Ok(generators)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_counts_are_frozen() {
        assert_eq!(ut3_z2_set().instance_count(), 64);
        assert_eq!(finest_reflection_set(2).unwrap().instance_count(), 2);
        assert_eq!(finest_reflection_set(3).unwrap().instance_count(), 4);
        assert_eq!(finest_reflection_set(4).unwrap().instance_count(), 3);
        assert_eq!(finest_reflection_set(5).unwrap().instance_count(), 9);
        assert_eq!(finest_symplectic_set(2).unwrap().instance_count(), 2);
        assert_eq!(finest_symplectic_set(4).unwrap().instance_count(), 3);
    }

    #[test]
    fn ut3_z2_has_twelve_families() {
        let set = ut3_z2_set();
        assert_eq!(set.families.len(), 12);
        // Labels are unique and every instance is multilinear.
        let labels: std::collections::BTreeSet<&str> =
            set.families.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels.len(), 12);
        for family in &set.families {
            for (_, p) in &family.instances {
                assert!(p.is_multilinear().unwrap());
            }
        }
    }

    #[test]
    fn symplectic_set_rejects_odd_m() {
        assert!(matches!(finest_symplectic_set(3), Err(CliError::Usage(_))));
        assert!(matches!(finest_symplectic_set(5), Err(CliError::Usage(_))));
    }

    #[test]
    fn builtin_lookup_requires_m_only_where_needed() {
        assert!(builtin_set("ut3-z2", None).is_ok());
        assert!(matches!(
            builtin_set("finest-reflection", None),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            builtin_set("no-such-set", Some(3)),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn basis_generators_extend_finest_sets_with_dead_words() {
        let set = finest_reflection_set(3).unwrap();
        let gens = basis_generators(&set).unwrap();
        // 4 set instances plus the 11 vanishing monomials of UT_3.
        assert_eq!(gens.len(), 4 + 11);
        let u = ut3_z2_set();
        assert_eq!(basis_generators(&u).unwrap().len(), 64);
    }
}
