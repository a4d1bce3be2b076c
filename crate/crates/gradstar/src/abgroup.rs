//! Finitely generated abelian groups `Z^r x Z_{d_1} x ... x Z_{d_s}`.
//!
//! A group is a list of factor moduli (0 for a free factor, d >= 1 for a
//! cyclic factor of order d) and an element is a coordinate tuple held in
//! reduced form: torsion coordinates lie in `0..d`. Element equality is
//! structural, which is sound exactly because of that invariant.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("element has {got} coordinates, group has {expected} factors")]
    LengthMismatch { expected: usize, got: usize },
    #[error("homomorphism is not well defined: {order} * image of factor {factor} is nonzero")]
    NotWellDefined { factor: usize, order: u64 },
    #[error("cannot parse group description {0:?}")]
    ParseGroup(String),
    #[error("cannot parse group element {0:?}")]
    ParseElement(String),
}

/// `Z^r x Z_{d_1} x ...`, stored as one modulus per factor (0 = free).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
}

/// Reduced coordinate tuple of a group element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    coords: Vec<i64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Self {
        AbelianGroup { moduli }
    }

    /// Free abelian group of the given rank.
    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            moduli: vec![0; rank],
        }
    }

    /// Single cyclic factor `Z_d`.
    pub fn cyclic(d: u64) -> Self {
        AbelianGroup { moduli: vec![d] }
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn factor_count(&self) -> usize {
        self.moduli.len()
    }

    /// Parses descriptions like `"Z^2"`, `"Z2"`, `"Z_4"`, `"Z x Z_2"`,
    /// `"Z^0"` (trivial group). Factors are separated by `x`.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let err = || GroupError::ParseGroup(text.to_string());
        let mut moduli = Vec::new();
        for token in text.split(['x', 'X']) {
            let token = token.trim();
            if token.is_empty() {
                return Err(err());
            }
            let rest = token.strip_prefix(['Z', 'z']).ok_or_else(err)?;
            if rest.is_empty() {
                moduli.push(0);
            } else if let Some(pow) = rest.strip_prefix('^') {
                let r: usize = pow.parse().map_err(|_| err())?;
                moduli.extend(std::iter::repeat_n(0, r));
            } else {
                let rest = rest.strip_prefix('_').unwrap_or(rest);
                let d: u64 = rest.parse().map_err(|_| err())?;
                if d == 0 {
                    return Err(err());
                }
                moduli.push(d);
            }
        }
        Ok(AbelianGroup { moduli })
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    fn reduce(&self, mut coords: Vec<i64>) -> GroupElement {
        for (c, &d) in coords.iter_mut().zip(&self.moduli) {
            if d > 0 {
                *c = c.rem_euclid(d as i64);
            }
        }
        GroupElement { coords }
    }

    /// Builds a reduced element from raw coordinates.
    pub fn element(&self, coords: Vec<i64>) -> Result<GroupElement, GroupError> {
        if coords.len() != self.moduli.len() {
            return Err(GroupError::LengthMismatch {
                expected: self.moduli.len(),
                got: coords.len(),
            });
        }
        Ok(self.reduce(coords))
    }

    /// Parses a comma-separated coordinate tuple; `"()"` is the element of
    /// the trivial group.
    pub fn element_from_str(&self, text: &str) -> Result<GroupElement, GroupError> {
        let text = text.trim();
        if text == "()" || text.is_empty() {
            return self
                .element(Vec::new())
                .map_err(|_| GroupError::ParseElement(text.into()));
        }
        let coords: Result<Vec<i64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
        let coords = coords.map_err(|_| GroupError::ParseElement(text.to_string()))?;
        self.element(coords)
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        Ok(self.reduce(coords))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        Ok(self.reduce(a.coords.iter().map(|x| -x).collect()))
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Integer multiple `k * a`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        Ok(self.reduce(a.coords.iter().map(|x| k * x).collect()))
    }

    fn check(&self, a: &GroupElement) -> Result<(), GroupError> {
        if a.coords.len() != self.moduli.len() {
            return Err(GroupError::LengthMismatch {
                expected: self.moduli.len(),
                got: a.coords.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.moduli.is_empty() {
            return write!(f, "Z^0");
        }
        let free = self.moduli.iter().filter(|&&d| d == 0).count();
        let mut parts = Vec::new();
        if free == 1 {
            parts.push("Z".to_string());
        } else if free > 1 {
            parts.push(format!("Z^{free}"));
        }
        for &d in self.moduli.iter().filter(|&&d| d > 0) {
            parts.push(format!("Z_{d}"));
        }
        // Canonical form puts the free part first; factor order beyond that
        // is not observable through the degree maps we build.
        write!(f, "{}", parts.join(" x "))
    }
}

/// Homomorphism given by images of the standard generators of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: AbelianGroup,
    target: AbelianGroup,
    images: Vec<GroupElement>,
}

impl GroupHom {
    /// Checks well-definedness: a generator of order d must map to an
    /// element killed by d.
    pub fn new(
        source: AbelianGroup,
        target: AbelianGroup,
        images: Vec<GroupElement>,
    ) -> Result<Self, GroupError> {
        if images.len() != source.factor_count() {
            return Err(GroupError::LengthMismatch {
                expected: source.factor_count(),
                got: images.len(),
            });
        }
        for (i, img) in images.iter().enumerate() {
            let d = source.moduli()[i];
            if d > 0 && !target.scale(d as i64, img)?.is_zero() {
                return Err(GroupError::NotWellDefined {
                    factor: i,
                    order: d,
                });
            }
        }
        Ok(GroupHom {
            source,
            target,
            images,
        })
    }

    pub fn source(&self) -> &AbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &AbelianGroup {
        &self.target
    }

    pub fn apply(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.source.check(a)?;
        let mut out = self.target.zero();
        for (c, img) in a.coords().iter().zip(&self.images) {
            let term = self.target.scale(*c, img)?;
            out = self.target.add(&out, &term)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["Z^2", "Z", "Z_2", "Z x Z_2", "Z^0", "Z^3 x Z_4"] {
            let g = AbelianGroup::parse(text).unwrap();
            let again = AbelianGroup::parse(&g.to_string()).unwrap();
            assert_eq!(g, again, "{text}");
        }
        assert_eq!(AbelianGroup::parse("Z2").unwrap(), AbelianGroup::cyclic(2));
        assert_eq!(AbelianGroup::parse("Z_2").unwrap(), AbelianGroup::cyclic(2));
        assert_eq!(AbelianGroup::parse("Z^0").unwrap().factor_count(), 0);
        assert!(AbelianGroup::parse("Q").is_err());
        assert!(AbelianGroup::parse("Z_0").is_err());
        assert!(AbelianGroup::parse("").is_err());
    }

    #[test]
    fn torsion_reduction() {
        let g = AbelianGroup::parse("Z2").unwrap();
        let one = g.element(vec![1]).unwrap();
        assert!(g.add(&one, &one).unwrap().is_zero());
        assert_eq!(g.neg(&one).unwrap(), one);
        assert_eq!(g.element(vec![-3]).unwrap(), one);
    }

    #[test]
    fn free_arithmetic() {
        let g = AbelianGroup::free(2);
        let a = g.element(vec![1, -2]).unwrap();
        let b = g.element(vec![3, 5]).unwrap();
        assert_eq!(g.add(&a, &b).unwrap(), g.element(vec![4, 3]).unwrap());
        assert_eq!(g.sub(&a, &a).unwrap(), g.zero());
        assert_eq!(g.neg(&a).unwrap(), g.element(vec![-1, 2]).unwrap());
    }

    #[test]
    fn element_parsing() {
        let g = AbelianGroup::free(2);
        assert_eq!(
            g.element_from_str("1, -2").unwrap(),
            g.element(vec![1, -2]).unwrap()
        );
        let t = AbelianGroup::free(0);
        assert_eq!(t.element_from_str("()").unwrap(), t.zero());
        assert!(g.element_from_str("1").is_err());
        assert!(g.element_from_str("a,b").is_err());
    }

    #[test]
    fn mismatched_lengths_are_structural_errors() {
        let g = AbelianGroup::free(2);
        let h = AbelianGroup::free(1);
        let a = g.element(vec![1, 0]).unwrap();
        let b = h.element(vec![1]).unwrap();
        assert!(matches!(
            g.add(&a, &b),
            Err(GroupError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn hom_well_definedness() {
        // Z -> Z_2 sending 1 to 1: fine.
        let z = AbelianGroup::free(1);
        let z2 = AbelianGroup::cyclic(2);
        let img = z2.element(vec![1]).unwrap();
        let h = GroupHom::new(z.clone(), z2.clone(), vec![img]).unwrap();
        assert_eq!(
            h.apply(&z.element(vec![3]).unwrap()).unwrap(),
            z2.element(vec![1]).unwrap()
        );
        assert_eq!(h.apply(&z.element(vec![4]).unwrap()).unwrap(), z2.zero());

        // Z_2 -> Z sending 1 to 1 is not a homomorphism.
        let bad = GroupHom::new(z2.clone(), z.clone(), vec![z.element(vec![1]).unwrap()]);
        assert!(matches!(
            bad,
            Err(GroupError::NotWellDefined {
                factor: 0,
                order: 2
            })
        ));
        // ... but sending 1 to 0 is.
        assert!(GroupHom::new(z2, z.clone(), vec![z.zero()]).is_ok());
    }

    #[test]
    fn hom_additivity_spot_check() {
        let src = AbelianGroup::parse("Z^2").unwrap();
        let tgt = AbelianGroup::parse("Z_4").unwrap();
        let h = GroupHom::new(
            src.clone(),
            tgt.clone(),
            vec![tgt.element(vec![1]).unwrap(), tgt.element(vec![3]).unwrap()],
        )
        .unwrap();
        let a = src.element(vec![2, 1]).unwrap();
        let b = src.element(vec![-1, 2]).unwrap();
        let lhs = h.apply(&src.add(&a, &b).unwrap()).unwrap();
        let rhs = tgt
            .add(&h.apply(&a).unwrap(), &h.apply(&b).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
