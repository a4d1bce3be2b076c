//! Upper triangular matrices over the rationals with elementary gradings
//! and graded involutions.
//!
//! An elementary grading is induced by a tuple (g_1, ..., g_m) of group
//! elements: the matrix unit e_ij is homogeneous of degree g_i - g_j. Two
//! gradings are considered equal when their degree maps agree, so tuples
//! differing by a global shift give equal gradings.
//!
//! Two involutions are supported: the reflection across the secondary
//! diagonal (e_ij |-> e_{m+1-j, m+1-i}) and, for even m = 2r, the symplectic
//! involution D A^* D^{-1} with D = diag(I_r, -I_r).

use crate::abgroup::{AbelianGroup, GroupElement, GroupError, GroupHom};
use crate::{rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UtError {
    #[error("matrix sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("entry ({i},{j}) lies below the diagonal")]
    BelowDiagonal { i: usize, j: usize },
    #[error("the symplectic involution needs even matrix size, got {0}")]
    OddSymplectic(usize),
    #[error("involution size {inv} does not match matrix size {m}")]
    InvolutionSize { inv: usize, m: usize },
    #[error("involution does not preserve the degree of position ({i},{j})")]
    NotGraded { i: usize, j: usize },
    #[error("grading tuple must not be empty")]
    EmptyTuple,
    #[error("homomorphism source group does not match the grading group")]
    CoarsenSource,
    #[error("cannot parse involution kind {0:?}")]
    ParseInvolution(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Dense upper triangular m x m matrix. Entries below the diagonal are
/// identically zero and cannot be set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UTMatrix {
    m: usize,
    entries: Vec<Rat>, // row-major, lower part stays zero
}

impl UTMatrix {
    pub fn zero(m: usize) -> Self {
        UTMatrix {
            m,
            entries: vec![Rat::zero(); m * m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Self::zero(m);
        for i in 1..=m {
            a.entries[(i - 1) * m + (i - 1)] = rat(1);
        }
        a
    }

    /// Matrix unit e_ij (1-based, i <= j).
    pub fn elementary(m: usize, i: usize, j: usize) -> Self {
        let mut a = Self::zero(m);
        a.set(i, j, rat(1)).expect("elementary position");
        a
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// 1-based access.
    pub fn get(&self, i: usize, j: usize) -> &Rat {
        assert!(1 <= i && i <= self.m && 1 <= j && j <= self.m);
        &self.entries[(i - 1) * self.m + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) -> Result<(), UtError> {
        assert!(1 <= i && i <= self.m && 1 <= j && j <= self.m);
        if i > j && !v.is_zero() {
            return Err(UtError::BelowDiagonal { i, j });
        }
        self.entries[(i - 1) * self.m + (j - 1)] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self, UtError> {
        self.same_size(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(UTMatrix { m: self.m, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, UtError> {
        self.same_size(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(UTMatrix { m: self.m, entries })
    }

    pub fn neg(&self) -> Self {
        UTMatrix {
            m: self.m,
            entries: self.entries.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        UTMatrix {
            m: self.m,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, UtError> {
        self.same_size(other)?;
        let m = self.m;
        let mut out = Self::zero(m);
        // (AB)_ij needs only i <= k <= j for triangular factors.
        for i in 1..=m {
            for j in i..=m {
                let mut acc = Rat::zero();
                for k in i..=j {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc += a * b;
                }
                out.set(i, j, acc)?;
            }
        }
        Ok(out)
    }

    fn same_size(&self, other: &Self) -> Result<(), UtError> {
        if self.m != other.m {
            return Err(UtError::SizeMismatch(self.m, other.m));
        }
        Ok(())
    }

    /// Nonzero entries as (row, col, value), row-major.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, Rat)> {
        let mut out = Vec::new();
        for i in 1..=self.m {
            for j in i..=self.m {
                let v = self.get(i, j);
                if !v.is_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }
}

impl fmt::Display for UTMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.m {
            let row: Vec<String> = (1..=self.m).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvKind {
    Reflection,
    Symplectic,
}

impl fmt::Display for InvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvKind::Reflection => write!(f, "reflection"),
            InvKind::Symplectic => write!(f, "symplectic"),
        }
    }
}

impl std::str::FromStr for InvKind {
    type Err = UtError;
    fn from_str(s: &str) -> Result<Self, UtError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reflection" => Ok(InvKind::Reflection),
            "symplectic" => Ok(InvKind::Symplectic),
            other => Err(UtError::ParseInvolution(other.to_string())),
        }
    }
}

/// Involution on UT_m. The symplectic kind exists only for even m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Involution {
    kind: InvKind,
    m: usize,
}

impl Involution {
    pub fn new(kind: InvKind, m: usize) -> Result<Self, UtError> {
        if kind == InvKind::Symplectic && !m.is_multiple_of(2) {
            return Err(UtError::OddSymplectic(m));
        }
        Ok(Involution { kind, m })
    }

    pub fn kind(&self) -> InvKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Image of the matrix unit e_ij: a signed matrix unit (i', j', sign).
    pub fn star_position(&self, i: usize, j: usize) -> (usize, usize, i64) {
        debug_assert!(1 <= i && i <= j && j <= self.m);
        let (si, sj) = (self.m + 1 - j, self.m + 1 - i);
        let sign = match self.kind {
            InvKind::Reflection => 1,
            InvKind::Symplectic => {
                let r = self.m / 2;
                let s = |k: usize| if k <= r { 1i64 } else { -1 };
                s(si) * s(sj)
            }
        };
        (si, sj, sign)
    }

    pub fn apply(&self, a: &UTMatrix) -> Result<UTMatrix, UtError> {
        if a.m() != self.m {
            return Err(UtError::SizeMismatch(a.m(), self.m));
        }
        let mut out = UTMatrix::zero(self.m);
        for (i, j, v) in a.nonzero_entries() {
            let (si, sj, sign) = self.star_position(i, j);
            out.set(si, sj, v * rat(sign))?;
        }
        Ok(out)
    }
}

/// Elementary grading of UT_m by the tuple (g_1, ..., g_m).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementaryGrading {
    group: AbelianGroup,
    tuple: Vec<GroupElement>,
}

impl ElementaryGrading {
    pub fn new(group: AbelianGroup, tuple: Vec<GroupElement>) -> Result<Self, UtError> {
        if tuple.is_empty() {
            return Err(UtError::EmptyTuple);
        }
        // Re-reduce so stored coordinates honor the group's moduli.
        let tuple = tuple
            .into_iter()
            .map(|e| group.element(e.coords().to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ElementaryGrading { group, tuple })
    }

    pub fn m(&self) -> usize {
        self.tuple.len()
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn tuple(&self) -> &[GroupElement] {
        &self.tuple
    }

    /// Degree of the matrix unit e_ij (1-based, i <= j).
    pub fn degree(&self, i: usize, j: usize) -> GroupElement {
        assert!(1 <= i && i <= j && j <= self.m());
        self.group
            .sub(&self.tuple[i - 1], &self.tuple[j - 1])
            .expect("tuple elements")
    }

    /// All degrees of matrix units, neutral included, sorted.
    pub fn support(&self) -> Vec<GroupElement> {
        let mut set = BTreeSet::new();
        for i in 1..=self.m() {
            for j in i..=self.m() {
                set.insert(self.degree(i, j));
            }
        }
        set.into_iter().collect()
    }

    /// Sorted non-neutral degrees.
    pub fn support_nonneutral(&self) -> Vec<GroupElement> {
        self.support()
            .into_iter()
            .filter(|g| !g.is_zero())
            .collect()
    }

    /// Positions (i, j) of the matrix units spanning the g-component.
    pub fn component_positions(&self, g: &GroupElement) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.m() {
            for j in i..=self.m() {
                if &self.degree(i, j) == g {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn component_dim(&self, g: &GroupElement) -> usize {
        self.component_positions(g).len()
    }

    /// Matrix-unit basis of the g-component.
    pub fn homogeneous_basis(&self, g: &GroupElement) -> Vec<UTMatrix> {
        self.component_positions(g)
            .into_iter()
            .map(|(i, j)| UTMatrix::elementary(self.m(), i, j))
            .collect()
    }

    /// Does g_i + g_{m+1-i} not depend on i? This is exactly the condition
    /// for the reflection involution to be a graded map.
    pub fn admits_mirror_condition(&self) -> bool {
        let m = self.m();
        let first = self
            .group
            .add(&self.tuple[0], &self.tuple[m - 1])
            .expect("tuple");
        (2..=m).all(|i| {
            self.group
                .add(&self.tuple[i - 1], &self.tuple[m - i])
                .expect("tuple")
                == first
        })
    }

    /// Shift so that the tuple entry at position floor(m/2)+1 becomes
    /// neutral. The degree map is unchanged.
    pub fn shift_normalized(&self) -> ElementaryGrading {
        let pivot = self.tuple[self.m() / 2].clone();
        let tuple = self
            .tuple
            .iter()
            .map(|g| self.group.sub(g, &pivot).expect("tuple"))
            .collect();
        ElementaryGrading {
            group: self.group.clone(),
            tuple,
        }
    }

    /// Pushes the grading forward along a homomorphism out of its group.
    pub fn coarsen(&self, hom: &GroupHom) -> Result<ElementaryGrading, UtError> {
        if hom.source() != &self.group {
            return Err(UtError::CoarsenSource);
        }
        let tuple = self
            .tuple
            .iter()
            .map(|g| hom.apply(g))
            .collect::<Result<Vec<_>, _>>()?;
        ElementaryGrading::new(hom.target().clone(), tuple)
    }
}

/// Gradings are equal when their degree maps are equal; a global shift of
/// the tuple is invisible.
impl PartialEq for ElementaryGrading {
    fn eq(&self, other: &Self) -> bool {
        if self.m() != other.m() || self.group != other.group {
            return false;
        }
        for i in 1..=self.m() {
            for j in i..=self.m() {
                if self.degree(i, j) != other.degree(i, j) {
                    return false;
                }
            }
        }
        true
    }
}
impl Eq for ElementaryGrading {}

/// The finest elementary grading compatible with a graded involution:
/// the group is Z^floor(m/2) and the tuple is
/// (e_1, ..., e_r, 0, -e_r, ..., -e_1)           for m = 2r+1,
/// (e_1, ..., e_r, 0, e_r - e_{r-1}, ..., e_r - e_1) for m = 2r.
pub fn finest_grading(m: usize) -> ElementaryGrading {
    assert!(m >= 1);
    let r = m / 2;
    let group = AbelianGroup::free(r);
    let gen = |i: usize| {
        let mut c = vec![0i64; r];
        c[i - 1] = 1;
        group.element(c).expect("generator")
    };
    let mut tuple = Vec::with_capacity(m);
    for i in 1..=r {
        tuple.push(gen(i));
    }
    tuple.push(group.zero());
    if m % 2 == 1 {
        for i in (1..=r).rev() {
            tuple.push(group.neg(&gen(i)).expect("generator"));
        }
    } else {
        for i in (1..r).rev() {
            tuple.push(group.sub(&gen(r), &gen(i)).expect("generator"));
        }
    }
    ElementaryGrading::new(group, tuple).expect("finest tuple")
}

/// Is the involution a graded map for this grading?
pub fn is_graded_involution(grading: &ElementaryGrading, inv: &Involution) -> bool {
    if grading.m() != inv.m() {
        return false;
    }
    for i in 1..=grading.m() {
        for j in i..=grading.m() {
            let (si, sj, _) = inv.star_position(i, j);
            if grading.degree(i, j) != grading.degree(si, sj) {
                return false;
            }
        }
    }
    true
}

/// UT_m with an elementary grading and a graded involution; the pairing is
/// validated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedStarAlgebra {
    grading: ElementaryGrading,
    involution: Involution,
}

impl GradedStarAlgebra {
    pub fn new(grading: ElementaryGrading, involution: Involution) -> Result<Self, UtError> {
        if grading.m() != involution.m() {
            return Err(UtError::InvolutionSize {
                inv: involution.m(),
                m: grading.m(),
            });
        }
        for i in 1..=grading.m() {
            for j in i..=grading.m() {
                let (si, sj, _) = involution.star_position(i, j);
                if grading.degree(i, j) != grading.degree(si, sj) {
                    return Err(UtError::NotGraded { i, j });
                }
            }
        }
        Ok(GradedStarAlgebra {
            grading,
            involution,
        })
    }

    pub fn m(&self) -> usize {
        self.grading.m()
    }

    pub fn grading(&self) -> &ElementaryGrading {
        &self.grading
    }

    pub fn involution(&self) -> &Involution {
        &self.involution
    }

    pub fn star(&self, a: &UTMatrix) -> Result<UTMatrix, UtError> {
        self.involution.apply(a)
    }

    /// Basis of the symmetric (plus) or skew (minus) part of the
    /// g-component. Star orbits {e_ij, e_ij^*} of size two contribute
    /// e_ij + e_ij^* and e_ij - e_ij^*; fixed positions contribute e_ij to
    /// the side matching the sign of e_ij^* = ±e_ij.
    pub fn sym_skew_basis(&self, g: &GroupElement, plus: bool) -> Vec<UTMatrix> {
        self.sym_skew_sparse(g, plus)
            .into_iter()
            .map(|terms| {
                let mut a = UTMatrix::zero(self.m());
                for (i, j, c) in terms {
                    a.set(i, j, rat(c)).expect("upper position");
                }
                a
            })
            .collect()
    }

    /// Same basis in sparse form (lists of signed matrix units).
    pub fn sym_skew_sparse(&self, g: &GroupElement, plus: bool) -> Vec<Vec<(usize, usize, i64)>> {
        let mut out = Vec::new();
        for (i, j) in self.grading.component_positions(g) {
            let (si, sj, sign) = self.involution.star_position(i, j);
            if (si, sj) == (i, j) {
                // e_ij^* = sign * e_ij: symmetric when sign = 1, skew otherwise.
                if (sign == 1) == plus {
                    out.push(vec![(i, j, 1)]);
                }
            } else if (i, j) < (si, sj) {
                let s = if plus { sign } else { -sign };
                out.push(vec![(i, j, 1), (si, sj, s)]);
            }
        }
        out
    }

    /// Sparse matrix-unit basis of the g-component.
    pub fn component_sparse(&self, g: &GroupElement) -> Vec<Vec<(usize, usize, i64)>> {
        self.grading
            .component_positions(g)
            .into_iter()
            .map(|(i, j)| vec![(i, j, 1)])
            .collect()
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        AlgebraDescriptor {
            m: self.m(),
            group: self.grading.group().to_string(),
            tuple: self
                .grading
                .tuple()
                .iter()
                .map(|g| g.coords().to_vec())
                .collect(),
            involution: self.involution.kind().to_string(),
        }
    }

    pub fn from_descriptor(d: &AlgebraDescriptor) -> Result<Self, UtError> {
        let group = AbelianGroup::parse(&d.group)?;
        let tuple = d
            .tuple
            .iter()
            .map(|coords| group.element(coords.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let grading = ElementaryGrading::new(group, tuple)?;
        if grading.m() != d.m {
            return Err(UtError::SizeMismatch(grading.m(), d.m));
        }
        let kind: InvKind = d.involution.parse()?;
        let involution = Involution::new(kind, d.m)?;
        GradedStarAlgebra::new(grading, involution)
    }
}

/// Serializable description of a graded star algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub m: usize,
    pub group: String,
    pub tuple: Vec<Vec<i64>>,
    pub involution: String,
}

/// For the finest grading on UT_m: the one-dimensional components are
/// exactly the non-neutral antidiagonal positions (i + j = m + 1), and two
/// matrix units of equal nonzero degree are always a star pair
/// {e_ij, e_ij^*} under reflection. For odd m the center of the
/// antidiagonal is diagonal, hence neutral, and is skipped.
pub fn degree_uniqueness_check(m: usize) -> bool {
    let grading = finest_grading(m);
    let inv = Involution::new(InvKind::Reflection, m).expect("reflection");
    for i in 1..=m {
        for j in i..=m {
            let g = grading.degree(i, j);
            if g.is_zero() {
                continue;
            }
            let dim = grading.component_dim(&g);
            if (dim == 1) != (i + j == m + 1) {
                return false;
            }
            let (si, sj, _) = inv.star_position(i, j);
            for (k, l) in grading.component_positions(&g) {
                if (k, l) != (i, j) && (k, l) != (si, sj) {
                    return false;
                }
            }
        }
    }
    true
}

/// Constructive search for a homomorphism exhibiting a grading as a
/// coarsening of the finest one: shift-normalize, read candidate generator
/// images off the tuple, verify. Returns None when the verification fails.
pub fn find_finest_coarsening(grading: &ElementaryGrading) -> Option<GroupHom> {
    let m = grading.m();
    let fine = finest_grading(m);
    let shifted = grading.shift_normalized();
    let r = m / 2;
    let images: Vec<GroupElement> = (1..=r).map(|i| shifted.tuple()[i - 1].clone()).collect();
    let hom = GroupHom::new(fine.group().clone(), grading.group().clone(), images).ok()?;
    let coarse = fine.coarsen(&hom).ok()?;
    if &coarse == grading {
        Some(hom)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refl(m: usize) -> Involution {
        Involution::new(InvKind::Reflection, m).unwrap()
    }

    #[test]
    fn elementary_products() {
        let e12 = UTMatrix::elementary(3, 1, 2);
        let e23 = UTMatrix::elementary(3, 2, 3);
        let e13 = UTMatrix::elementary(3, 1, 3);
        assert_eq!(e12.mul(&e23).unwrap(), e13);
        assert!(e23.mul(&e12).unwrap().is_zero());
        assert!(e12.mul(&e12).unwrap().is_zero());
        let id = UTMatrix::identity(3);
        assert_eq!(id.mul(&e13).unwrap(), e13);
        assert_eq!(e13.mul(&id).unwrap(), e13);
    }

    #[test]
    fn below_diagonal_rejected() {
        let mut a = UTMatrix::zero(3);
        assert!(matches!(
            a.set(2, 1, rat(1)),
            Err(UtError::BelowDiagonal { .. })
        ));
        assert!(a.set(2, 1, rat(0)).is_ok());
    }

    #[test]
    fn reflection_on_matrix_units() {
        let inv = refl(3);
        assert_eq!(inv.star_position(1, 2), (2, 3, 1));
        assert_eq!(inv.star_position(1, 3), (1, 3, 1));
        assert_eq!(inv.star_position(2, 2), (2, 2, 1));
        assert_eq!(inv.star_position(1, 1), (3, 3, 1));
    }

    #[test]
    fn reflection_is_an_anti_automorphism() {
        let inv = refl(3);
        let a = {
            let mut a = UTMatrix::zero(3);
            a.set(1, 2, rat(2)).unwrap();
            a.set(2, 3, rat(-1)).unwrap();
            a.set(1, 1, rat(5)).unwrap();
            a
        };
        let b = {
            let mut b = UTMatrix::zero(3);
            b.set(2, 3, rat(7)).unwrap();
            b.set(1, 3, rat(1)).unwrap();
            b
        };
        let lhs = inv.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = inv.apply(&b).unwrap().mul(&inv.apply(&a).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(inv.apply(&inv.apply(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn symplectic_signs() {
        let inv = Involution::new(InvKind::Symplectic, 2).unwrap();
        assert_eq!(inv.star_position(1, 2), (1, 2, -1));
        assert_eq!(inv.star_position(1, 1), (2, 2, 1));

        let inv4 = Involution::new(InvKind::Symplectic, 4).unwrap();
        assert_eq!(inv4.star_position(1, 2), (3, 4, 1));
        assert_eq!(inv4.star_position(1, 4), (1, 4, -1));
        assert_eq!(inv4.star_position(2, 3), (2, 3, -1));
        assert_eq!(inv4.star_position(1, 3), (2, 4, -1));

        assert!(matches!(
            Involution::new(InvKind::Symplectic, 3),
            Err(UtError::OddSymplectic(3))
        ));
    }

    #[test]
    fn symplectic_is_an_anti_automorphism() {
        let inv = Involution::new(InvKind::Symplectic, 4).unwrap();
        let mut a = UTMatrix::zero(4);
        a.set(1, 2, rat(3)).unwrap();
        a.set(2, 4, rat(1)).unwrap();
        a.set(3, 3, rat(-2)).unwrap();
        let mut b = UTMatrix::zero(4);
        b.set(2, 3, rat(1)).unwrap();
        b.set(1, 4, rat(5)).unwrap();
        b.set(4, 4, rat(1)).unwrap();
        let lhs = inv.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = inv.apply(&b).unwrap().mul(&inv.apply(&a).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(inv.apply(&inv.apply(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn finest_tuples() {
        let g3 = finest_grading(3);
        let z1 = AbelianGroup::free(1);
        assert_eq!(g3.group(), &z1);
        let coords: Vec<_> = g3.tuple().iter().map(|e| e.coords().to_vec()).collect();
        assert_eq!(coords, vec![vec![1], vec![0], vec![-1]]);

        let g4 = finest_grading(4);
        let coords: Vec<_> = g4.tuple().iter().map(|e| e.coords().to_vec()).collect();
        assert_eq!(
            coords,
            vec![vec![1, 0], vec![0, 1], vec![0, 0], vec![-1, 1]]
        );

        let g1 = finest_grading(1);
        assert_eq!(g1.group().factor_count(), 0);
        assert_eq!(g1.m(), 1);

        let g2 = finest_grading(2);
        let coords: Vec<_> = g2.tuple().iter().map(|e| e.coords().to_vec()).collect();
        assert_eq!(coords, vec![vec![1], vec![0]]);
    }

    #[test]
    fn finest_support_m4() {
        let g4 = finest_grading(4);
        let group = g4.group().clone();
        let mk = |c: Vec<i64>| group.element(c).unwrap();
        let support = g4.support_nonneutral();
        let expected: Vec<_> = {
            let mut v = vec![
                mk(vec![1, -1]),
                mk(vec![1, 0]),
                mk(vec![0, 1]),
                mk(vec![2, -1]),
            ];
            v.sort();
            v
        };
        assert_eq!(support, expected);
        // Antidiagonal components are one-dimensional.
        assert_eq!(g4.component_dim(&g4.degree(1, 4)), 1);
        assert_eq!(g4.component_dim(&g4.degree(2, 3)), 1);
        // The others are two-dimensional.
        assert_eq!(g4.component_dim(&g4.degree(1, 2)), 2);
        assert_eq!(g4.component_dim(&g4.degree(1, 3)), 2);
    }

    #[test]
    fn mirror_condition_examples() {
        let z2 = AbelianGroup::cyclic(2);
        let mk = |cs: Vec<i64>| z2.element(vec![cs[0]]).unwrap();
        let g010 = ElementaryGrading::new(z2.clone(), vec![mk(vec![0]), mk(vec![1]), mk(vec![0])])
            .unwrap();
        assert!(g010.admits_mirror_condition());
        let g011 = ElementaryGrading::new(z2.clone(), vec![mk(vec![0]), mk(vec![1]), mk(vec![1])])
            .unwrap();
        assert!(!g011.admits_mirror_condition());

        for m in 1..=8 {
            assert!(finest_grading(m).admits_mirror_condition(), "m={m}");
        }
    }

    #[test]
    fn mirror_iff_reflection_graded() {
        // Spot checks; the property suite covers random tuples.
        let z = AbelianGroup::free(1);
        for tuple in [
            vec![0, 1, 0],
            vec![0, 1, 1],
            vec![2, 5, 2],
            vec![1, 2, 3],
            vec![4, 4, 4],
        ] {
            let grading = ElementaryGrading::new(
                z.clone(),
                tuple.iter().map(|&c| z.element(vec![c]).unwrap()).collect(),
            )
            .unwrap();
            let inv = refl(3);
            assert_eq!(
                grading.admits_mirror_condition(),
                is_graded_involution(&grading, &inv),
                "{tuple:?}"
            );
        }
    }

    #[test]
    fn symplectic_graded_on_finest_even() {
        for r in 1..=4 {
            let m = 2 * r;
            let inv = Involution::new(InvKind::Symplectic, m).unwrap();
            assert!(is_graded_involution(&finest_grading(m), &inv), "m={m}");
        }
    }

    #[test]
    fn graded_star_algebra_rejects_bad_pairs() {
        let z2 = AbelianGroup::cyclic(2);
        let g011 = ElementaryGrading::new(
            z2.clone(),
            vec![
                z2.element(vec![0]).unwrap(),
                z2.element(vec![1]).unwrap(),
                z2.element(vec![1]).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(
            GradedStarAlgebra::new(g011, refl(3)),
            Err(UtError::NotGraded { .. })
        ));
    }

    fn ut3_z2() -> GradedStarAlgebra {
        let z2 = AbelianGroup::cyclic(2);
        let grading = ElementaryGrading::new(
            z2.clone(),
            vec![
                z2.element(vec![0]).unwrap(),
                z2.element(vec![1]).unwrap(),
                z2.element(vec![0]).unwrap(),
            ],
        )
        .unwrap();
        GradedStarAlgebra::new(grading, refl(3)).unwrap()
    }

    #[test]
    fn sym_skew_bases_ut3_z2() {
        let alg = ut3_z2();
        let z2 = alg.grading().group().clone();
        let zero = z2.zero();
        let one = z2.element(vec![1]).unwrap();

        let plus0 = alg.sym_skew_sparse(&zero, true);
        assert_eq!(
            plus0,
            vec![vec![(1, 1, 1), (3, 3, 1)], vec![(1, 3, 1)], vec![(2, 2, 1)]]
        );
        let minus0 = alg.sym_skew_sparse(&zero, false);
        assert_eq!(minus0, vec![vec![(1, 1, 1), (3, 3, -1)]]);
        let plus1 = alg.sym_skew_sparse(&one, true);
        assert_eq!(plus1, vec![vec![(1, 2, 1), (2, 3, 1)]]);
        let minus1 = alg.sym_skew_sparse(&one, false);
        assert_eq!(minus1, vec![vec![(1, 2, 1), (2, 3, -1)]]);

        // Dimensions add up to the component dimensions.
        for g in [zero, one] {
            let dim = alg.grading().component_dim(&g);
            assert_eq!(
                alg.sym_skew_sparse(&g, true).len() + alg.sym_skew_sparse(&g, false).len(),
                dim
            );
        }
    }

    #[test]
    fn sym_skew_bases_finest3() {
        let alg = GradedStarAlgebra::new(finest_grading(3), refl(3)).unwrap();
        let z = alg.grading().group().clone();
        let e1 = z.element(vec![1]).unwrap();
        let e2 = z.element(vec![2]).unwrap();
        assert_eq!(
            alg.sym_skew_sparse(&e1, true),
            vec![vec![(1, 2, 1), (2, 3, 1)]]
        );
        assert_eq!(
            alg.sym_skew_sparse(&e1, false),
            vec![vec![(1, 2, 1), (2, 3, -1)]]
        );
        assert_eq!(alg.sym_skew_sparse(&e2, true), vec![vec![(1, 3, 1)]]);
        assert!(alg.sym_skew_sparse(&e2, false).is_empty());
    }

    #[test]
    fn symplectic_skew_on_antidiagonal() {
        let alg = GradedStarAlgebra::new(
            finest_grading(2),
            Involution::new(InvKind::Symplectic, 2).unwrap(),
        )
        .unwrap();
        let z = alg.grading().group().clone();
        let e1 = z.element(vec![1]).unwrap();
        // e_12 is skew for the symplectic involution on UT_2.
        assert!(alg.sym_skew_sparse(&e1, true).is_empty());
        assert_eq!(alg.sym_skew_sparse(&e1, false), vec![vec![(1, 2, 1)]]);
    }

    #[test]
    fn coarsening_and_equality_up_to_shift() {
        let fine = finest_grading(3);
        let z2 = AbelianGroup::cyclic(2);
        let hom = GroupHom::new(
            fine.group().clone(),
            z2.clone(),
            vec![z2.element(vec![1]).unwrap()],
        )
        .unwrap();
        let coarse = fine.coarsen(&hom).unwrap();
        let target = ElementaryGrading::new(
            z2.clone(),
            vec![
                z2.element(vec![0]).unwrap(),
                z2.element(vec![1]).unwrap(),
                z2.element(vec![0]).unwrap(),
            ],
        )
        .unwrap();
        // (1,0,1) and (0,1,0) induce the same degree map.
        assert_eq!(coarse, target);
        assert_eq!(coarse.shift_normalized().tuple()[1], z2.zero());

        // Mismatched source group is a structural error.
        let z2_grading = target.clone();
        let bad =
            GroupHom::new(z2.clone(), z2.clone(), vec![z2.element(vec![1]).unwrap()]).unwrap();
        assert!(z2_grading.coarsen(&bad).is_ok());
        assert!(matches!(fine.coarsen(&bad), Err(UtError::CoarsenSource)));
    }

    #[test]
    fn finest_coarsening_search() {
        let z2 = AbelianGroup::cyclic(2);
        let target = ElementaryGrading::new(
            z2.clone(),
            vec![
                z2.element(vec![0]).unwrap(),
                z2.element(vec![1]).unwrap(),
                z2.element(vec![0]).unwrap(),
            ],
        )
        .unwrap();
        let hom = find_finest_coarsening(&target).expect("coarsening exists");
        assert_eq!(finest_grading(3).coarsen(&hom).unwrap(), target);

        // A grading that is not a coarsening of the finest one: constant
        // tuple has only the neutral degree, which IS a coarsening (trivial
        // hom), so use a non-mirror tuple instead.
        let bad = ElementaryGrading::new(
            z2.clone(),
            vec![
                z2.element(vec![0]).unwrap(),
                z2.element(vec![1]).unwrap(),
                z2.element(vec![1]).unwrap(),
            ],
        )
        .unwrap();
        assert!(find_finest_coarsening(&bad).is_none());
    }

    #[test]
    fn degree_uniqueness_small_sizes() {
        for m in 1..=8 {
            assert!(degree_uniqueness_check(m), "m={m}");
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let alg = ut3_z2();
        let d = alg.descriptor();
        assert_eq!(d.group, "Z_2");
        assert_eq!(d.involution, "reflection");
        let back = GradedStarAlgebra::from_descriptor(&d).unwrap();
        assert_eq!(back, alg);
        let json = serde_json::to_string(&d).unwrap();
        let d2: AlgebraDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(d, d2);
    }
}
