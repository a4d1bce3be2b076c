//! Evaluation of free *-polynomials in graded upper-triangular algebras,
//! and the rank computations built on top of it: identity checking,
//! codimension and proper-codimension sequences, identity-basis
//! certificates, and codimension root tables.
//!
//! Everything here is exact. Ranks are computed over the rationals via
//! fraction-free integer elimination, with a big-integer fallback, and the
//! n-th roots in the exponent reports are decimal strings correct to six
//! places under round-half-even.
//!
//! All result listings are deterministic: blocks are ordered by their
//! degree words, monomials by the canonical monomial order, and columns by
//! (substitution tuple, matrix position).

use crate::abgroup::GroupElement;
use crate::freealg::{
    multilinear_consequences, multilinear_space, multilinearize, proper_basis, FreeError, Letter,
    Monomial, Polynomial, Symmetry, Variable,
};
use crate::linalg;
use crate::utalg::{AlgebraDescriptor, GradedStarAlgebra, UTMatrix, UtError};
use crate::{rat, Rat};
use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Cap on the size of any single evaluation matrix, measured in cells
/// (rows x columns, counting every substitution tuple and upper-triangular
/// position as a column). Blocks above the cap are refused, never silently
/// truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_cells: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_cells: 50_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("polynomial is not multilinear; basis-driven checking needs multilinearity")]
    NonMultilinear,
    #[error("no image provided for variable {0}")]
    MissingImage(u32),
    #[error("image of variable {index} has entries outside its degree-{degree} component")]
    DegreeViolation { index: u32, degree: String },
    #[error("image of variable {index} is not {expected} under the involution")]
    SymmetryViolation { index: u32, expected: String },
    #[error(
        "evaluation block of {rows} x {cols} cells exceeds the budget of {max_cells}; \
         raise the budget to run it"
    )]
    BudgetExceeded {
        rows: u64,
        cols: u64,
        max_cells: u64,
    },
    #[error("monomial {witness} admits {found} nonzero basis substitutions, expected at most one")]
    UniquenessViolation { found: usize, witness: String },
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Ut(#[from] UtError),
    #[error(transparent)]
    Group(#[from] crate::abgroup::GroupError),
}

// ---------------------------------------------------------------------------
// Substitutions and dense evaluation
// ---------------------------------------------------------------------------

/// Explicit images for variables, validated against the algebra: images
/// must be homogeneous of the variable's degree, and tagged variables must
/// map to symmetric resp. skew matrices.
pub struct Substitution<'a> {
    alg: &'a GradedStarAlgebra,
    images: BTreeMap<u32, UTMatrix>,
}

impl<'a> Substitution<'a> {
    pub fn new(alg: &'a GradedStarAlgebra) -> Self {
        Substitution {
            alg,
            images: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, var: &Variable, image: UTMatrix) -> Result<(), EvalError> {
        for (i, j, _) in image.nonzero_entries() {
            if self.alg.grading().degree(i, j) != var.degree {
                return Err(EvalError::DegreeViolation {
                    index: var.index,
                    degree: var.degree.to_string(),
                });
            }
        }
        match var.symmetry {
            Symmetry::Free => {}
            Symmetry::Symmetric => {
                if self.alg.star(&image)? != image {
                    return Err(EvalError::SymmetryViolation {
                        index: var.index,
                        expected: "symmetric".into(),
                    });
                }
            }
            Symmetry::Skew => {
                if self.alg.star(&image)? != image.neg() {
                    return Err(EvalError::SymmetryViolation {
                        index: var.index,
                        expected: "skew".into(),
                    });
                }
            }
        }
        self.images.insert(var.index, image);
        Ok(())
    }

    pub fn image(&self, index: u32) -> Option<&UTMatrix> {
        self.images.get(&index)
    }
}

/// Evaluate a polynomial under a substitution. The empty monomial
/// evaluates to the identity matrix; a starred letter evaluates to the
/// involution of its image.
pub fn evaluate(
    alg: &GradedStarAlgebra,
    p: &Polynomial,
    subst: &Substitution,
) -> Result<UTMatrix, EvalError> {
    let m = alg.m();
    let mut acc = UTMatrix::zero(m);
    for (mono, c) in p.terms() {
        let mut prod = UTMatrix::identity(m);
        for l in &mono.letters {
            let img = subst
                .image(l.var.index)
                .ok_or(EvalError::MissingImage(l.var.index))?;
            let factor = if l.starred {
                alg.star(img)?
            } else {
                img.clone()
            };
            prod = prod.mul(&factor)?;
        }
        acc = acc.add(&prod.scale(c))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Sparse evaluation over basis substitutions
// ---------------------------------------------------------------------------

/// Sparse integer matrix: 1-based (row, col, coefficient) triples.
type Sparse = Vec<(usize, usize, i64)>;

fn sparse_identity(m: usize) -> Sparse {
    (1..=m).map(|i| (i, i, 1)).collect()
}

fn sparse_mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut acc: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for &(i, j, c) in a {
        for &(k, l, d) in b {
            if j == k {
                *acc.entry((i, l)).or_insert(0) += c * d;
            }
        }
    }
    acc.into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|((i, j), c)| (i, j, c))
        .collect()
}

fn sparse_star(alg: &GradedStarAlgebra, a: &Sparse) -> Sparse {
    a.iter()
        .map(|&(i, j, c)| {
            let (si, sj, sign) = alg.involution().star_position(i, j);
            (si, sj, sign * c)
        })
        .collect()
}

fn eval_monomial(
    alg: &GradedStarAlgebra,
    mono: &Monomial,
    image_of: &dyn Fn(&Letter) -> Sparse,
) -> Sparse {
    let mut acc = sparse_identity(alg.m());
    for l in &mono.letters {
        let f = image_of(l);
        let f = if l.starred { sparse_star(alg, &f) } else { f };
        acc = sparse_mul(&acc, &f);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Basis of the admissible images for one variable: the homogeneous
/// component for a free variable, its symmetric or skew part for a tagged
/// one.
fn universe(alg: &GradedStarAlgebra, degree: &GroupElement, sym: Symmetry) -> Vec<Sparse> {
    match sym {
        Symmetry::Free => alg.component_sparse(degree),
        Symmetry::Symmetric => alg.sym_skew_sparse(degree, true),
        Symmetry::Skew => alg.sym_skew_sparse(degree, false),
    }
}

/// Decide whether a multilinear polynomial vanishes under every graded
/// substitution. By multilinearity it is enough to substitute the basis of
/// each variable's admissible component, so the check is exact and finite.
/// An empty admissible component makes the polynomial vacuously an
/// identity.
pub fn is_identity(alg: &GradedStarAlgebra, p: &Polynomial) -> Result<bool, EvalError> {
    if p.is_zero() {
        return Ok(true);
    }
    if !p.is_multilinear()? {
        return Err(EvalError::NonMultilinear);
    }
    let vars: Vec<Variable> = p.variables()?.into_values().collect();
    if vars.is_empty() {
        // Nonzero constant: evaluates to a multiple of the unit.
        return Ok(false);
    }
    let universes: Vec<Vec<Sparse>> = vars
        .iter()
        .map(|v| universe(alg, &v.degree, v.symmetry))
        .collect();
    if universes.iter().any(|u| u.is_empty()) {
        return Ok(true);
    }
    for tuple in universes.iter().map(|u| u.iter()).multi_cartesian_product() {
        let images: BTreeMap<u32, &Sparse> = vars
            .iter()
            .map(|v| v.index)
            .zip(tuple.iter().copied())
            .collect();
        let mut acc: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for (mono, c) in p.terms() {
            for (i, j, v) in eval_monomial(alg, mono, &|l: &Letter| images[&l.var.index].clone()) {
                let e = acc.entry((i, j)).or_insert_with(Rat::zero);
                *e += c * rat(v);
            }
        }
        if acc.values().any(|v| !v.is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Identity check for arbitrary polynomials over the rationals: split into
/// multihomogeneous components and test the full linearization of each.
/// Over a field of characteristic zero a multihomogeneous polynomial is an
/// identity exactly when its full linearization is.
pub fn is_identity_general(alg: &GradedStarAlgebra, p: &Polynomial) -> Result<bool, EvalError> {
    for comp in multidegree_components(p) {
        let lin = multilinearize(&comp)?;
        if !is_identity(alg, &lin)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn multidegree_components(p: &Polynomial) -> Vec<Polynomial> {
    let mut comps: BTreeMap<Vec<(u32, usize)>, Polynomial> = BTreeMap::new();
    for (mono, c) in p.terms() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for l in &mono.letters {
            *counts.entry(l.var.index).or_insert(0) += 1;
        }
        let key: Vec<(u32, usize)> = counts.into_iter().collect();
        comps
            .entry(key)
            .or_insert_with(Polynomial::zero)
            .add_term(mono.clone(), c.clone());
    }
    comps.into_values().collect()
}

/// Substitution-uniqueness for a multilinear monomial: evaluate it on all
/// tuples of basis elements of the variables' components.
///
/// - `Ok(None)`: every tuple evaluates to zero;
/// - `Ok(Some(images))`: exactly one tuple is nonzero, returned densely in
///   variable-index order;
/// - `Err(UniquenessViolation)`: more than one nonzero tuple. Callers that
///   rely on uniqueness must treat this as a hard failure.
pub fn unique_substitution(
    alg: &GradedStarAlgebra,
    mono: &Monomial,
) -> Result<Option<Vec<UTMatrix>>, EvalError> {
    let p = Polynomial::from_monomial(mono.clone());
    if !p.is_multilinear()? {
        return Err(EvalError::NonMultilinear);
    }
    let vars: Vec<Variable> = p.variables()?.into_values().collect();
    let universes: Vec<Vec<Sparse>> = vars
        .iter()
        .map(|v| universe(alg, &v.degree, v.symmetry))
        .collect();
    if vars.is_empty() || universes.iter().any(|u| u.is_empty()) {
        return Ok(None);
    }
    let mut witness: Option<Vec<Vec<(usize, usize, i64)>>> = None;
    let mut found = 0usize;
    for tuple in universes.iter().map(|u| u.iter()).multi_cartesian_product() {
        let images: BTreeMap<u32, &Sparse> = vars
            .iter()
            .map(|v| v.index)
            .zip(tuple.iter().copied())
            .collect();
        let value = eval_monomial(alg, mono, &|l: &Letter| images[&l.var.index].clone());
        if !value.is_empty() {
            found += 1;
            if witness.is_none() {
                witness = Some(tuple.iter().map(|s| (*s).clone()).collect());
            }
        }
    }
    match found {
        0 => Ok(None),
        1 => {
            let m = alg.m();
            let dense = witness
                .unwrap()
                .into_iter()
                .map(|sp| {
                    let mut mat = UTMatrix::zero(m);
                    for (i, j, c) in sp {
                        mat.set(i, j, rat(c)).expect("upper-triangular basis entry");
                    }
                    mat
                })
                .collect();
            Ok(Some(dense))
        }
        k => Err(EvalError::UniquenessViolation {
            found: k,
            witness: mono.to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Block rank engine
// ---------------------------------------------------------------------------

/// One degree-word block of an evaluation-rank computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    pub degrees: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

/// Codimension-style report: per-block ranks and their sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodimReport {
    pub algebra: AlgebraDescriptor,
    pub n: usize,
    #[serde(rename = "assignment-blocks")]
    pub blocks: Vec<BlockReport>,
    pub total: u64,
    pub method: String,
}

fn kind_label(g: &GroupElement, sym: Symmetry) -> String {
    match sym {
        Symmetry::Free => g.to_string(),
        Symmetry::Symmetric => format!("{g}+"),
        Symmetry::Skew => format!("{g}-"),
    }
}

/// Evaluation rows of the given polynomials over all basis substitution
/// tuples for the assignment, as sparse (column key -> coefficient) maps.
/// Column key = tuple index * m^2 + dense matrix position.
fn sparse_rows(
    alg: &GradedStarAlgebra,
    assignment: &[(GroupElement, Symmetry)],
    row_polys: &[Polynomial],
    tuples: &[Vec<&Sparse>],
) -> Vec<BTreeMap<u64, Rat>> {
    let m = alg.m();
    let index_of = |l: &Letter| l.var.index as usize - 1;
    let _ = assignment;
    row_polys
        .iter()
        .map(|p| {
            let mut row: BTreeMap<u64, Rat> = BTreeMap::new();
            for (t, tuple) in tuples.iter().enumerate() {
                for (mono, c) in p.terms() {
                    let value = eval_monomial(alg, mono, &|l: &Letter| tuple[index_of(l)].clone());
                    for (i, j, v) in value {
                        let key = (t * m * m + (i - 1) * m + (j - 1)) as u64;
                        let e = row.entry(key).or_insert_with(Rat::zero);
                        *e += c * rat(v);
                    }
                }
            }
            row.retain(|_, v| !v.is_zero());
            row
        })
        .collect()
}

/// Densify sparse rows over their touched columns and compute the exact
/// rank, preferring the integer fast path.
fn densify_rank(rows: &[BTreeMap<u64, Rat>]) -> (usize, usize) {
    let touched: BTreeSet<u64> = rows.iter().flat_map(|r| r.keys().copied()).collect();
    let col_of: BTreeMap<u64, usize> = touched
        .iter()
        .enumerate()
        .map(|(idx, &k)| (k, idx))
        .collect();
    let cols = touched.len();
    if cols == 0 {
        return (0, 0);
    }
    let all_int = rows
        .iter()
        .flat_map(|r| r.values())
        .all(|v| v.is_integer() && v.to_integer().to_i64().is_some());
    let rank = if all_int {
        let dense: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| {
                let mut d = vec![0i64; cols];
                for (k, v) in r {
                    d[col_of[k]] = v.to_integer().to_i64().unwrap();
                }
                d
            })
            .collect();
        linalg::rank_i64_rows(&dense)
    } else {
        let dense: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| {
                let mut d = vec![Rat::zero(); cols];
                for (k, v) in r {
                    d[col_of[k]] = v.clone();
                }
                d
            })
            .collect();
        linalg::rank_rat_rows(&dense)
    };
    (cols, rank)
}

fn budget_check(m: usize, rows: usize, tuple_count: u64, budget: &Budget) -> Result<(), EvalError> {
    let positions = (m * (m + 1) / 2) as u64;
    let cols = tuple_count.saturating_mul(positions);
    let cells = (rows as u64).saturating_mul(cols);
    if cells > budget.max_cells {
        return Err(EvalError::BudgetExceeded {
            rows: rows as u64,
            cols,
            max_cells: budget.max_cells,
        });
    }
    Ok(())
}

fn substitution_tuples(universes: &[Vec<Sparse>]) -> Vec<Vec<&Sparse>> {
    if universes.is_empty() {
        return vec![Vec::new()];
    }
    if universes.iter().any(|u| u.is_empty()) {
        return Vec::new();
    }
    universes
        .iter()
        .map(|u| u.iter())
        .multi_cartesian_product()
        .collect()
}

pub(crate) fn block_rank(
    alg: &GradedStarAlgebra,
    assignment: &[(GroupElement, Symmetry)],
    row_polys: &[Polynomial],
    budget: &Budget,
) -> Result<(usize, usize, usize), EvalError> {
    let universes: Vec<Vec<Sparse>> = assignment
        .iter()
        .map(|(g, s)| universe(alg, g, *s))
        .collect();
    let tuples = substitution_tuples(&universes);
    if tuples.is_empty() || row_polys.is_empty() {
        return Ok((row_polys.len(), 0, 0));
    }
    budget_check(alg.m(), row_polys.len(), tuples.len() as u64, budget)?;
    let rows = sparse_rows(alg, assignment, row_polys, &tuples);
    let (cols, rank) = densify_rank(&rows);
    Ok((row_polys.len(), cols, rank))
}

fn degree_words(support: &[GroupElement], n: usize) -> Vec<Vec<GroupElement>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .map(|_| support.iter().cloned())
        .multi_cartesian_product()
        .collect()
}

fn kind_words(support: &[GroupElement], n: usize) -> Vec<Vec<(GroupElement, Symmetry)>> {
    let kinds: Vec<(GroupElement, Symmetry)> = support
        .iter()
        .flat_map(|g| {
            [
                (g.clone(), Symmetry::Symmetric),
                (g.clone(), Symmetry::Skew),
            ]
            .into_iter()
        })
        .collect();
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .map(|_| kinds.iter().cloned())
        .multi_cartesian_product()
        .collect()
}

/// n-th multilinear codimension of the algebra: the sum, over all degree
/// words in the grading support, of the rank of the evaluation matrix of
/// the free multilinear monomials (with stars) in that component.
pub fn codimension(
    alg: &GradedStarAlgebra,
    n: usize,
    budget: &Budget,
) -> Result<CodimReport, EvalError> {
    let support = alg.grading().support();
    let words = degree_words(&support, n);
    let blocks: Result<Vec<BlockReport>, EvalError> = words
        .par_iter()
        .map(|word| {
            let assignment: Vec<(GroupElement, Symmetry)> =
                word.iter().map(|g| (g.clone(), Symmetry::Free)).collect();
            let row_polys: Vec<Polynomial> = multilinear_space(&assignment)
                .into_iter()
                .map(Polynomial::from_monomial)
                .collect();
            let (rows, cols, rank) = block_rank(alg, &assignment, &row_polys, budget)?;
            Ok(BlockReport {
                degrees: word.iter().map(|g| g.to_string()).collect(),
                rows,
                cols,
                rank,
            })
        })
        .collect();
    let blocks = blocks?;
    let total = blocks.iter().map(|b| b.rank as u64).sum();
    Ok(CodimReport {
        algebra: alg.descriptor(),
        n,
        blocks,
        total,
        method: "multilinear-evaluation-rank".into(),
    })
}

/// Same codimension computed in the tagged (symmetric/skew) alphabet; the
/// total agrees with `codimension` because each free variable splits as
/// the sum of its symmetric and skew parts.
pub fn codimension_tagged(
    alg: &GradedStarAlgebra,
    n: usize,
    budget: &Budget,
) -> Result<CodimReport, EvalError> {
    let support = alg.grading().support();
    let words = kind_words(&support, n);
    let blocks: Result<Vec<BlockReport>, EvalError> = words
        .par_iter()
        .map(|word| {
            let row_polys: Vec<Polynomial> = multilinear_space(word)
                .into_iter()
                .map(Polynomial::from_monomial)
                .collect();
            let (rows, cols, rank) = block_rank(alg, word, &row_polys, budget)?;
            Ok(BlockReport {
                degrees: word.iter().map(|(g, s)| kind_label(g, *s)).collect(),
                rows,
                cols,
                rank,
            })
        })
        .collect();
    let blocks = blocks?;
    let total = blocks.iter().map(|b| b.rank as u64).sum();
    Ok(CodimReport {
        algebra: alg.descriptor(),
        n,
        blocks,
        total,
        method: "multilinear-evaluation-rank/tagged".into(),
    })
}

/// n-th proper codimension: per tagged kind word, the rank of the
/// evaluations of the proper spanning set (words in eligible letters times
/// products of left-normed commutators).
pub fn proper_codimension(
    alg: &GradedStarAlgebra,
    n: usize,
    budget: &Budget,
) -> Result<CodimReport, EvalError> {
    let support = alg.grading().support();
    let words = kind_words(&support, n);
    let blocks: Result<Vec<BlockReport>, EvalError> = words
        .par_iter()
        .map(|word| {
            let row_polys = proper_basis(word)?;
            let (rows, cols, rank) = block_rank(alg, word, &row_polys, budget)?;
            Ok(BlockReport {
                degrees: word.iter().map(|(g, s)| kind_label(g, *s)).collect(),
                rows,
                cols,
                rank,
            })
        })
        .collect();
    let blocks = blocks?;
    let total = blocks.iter().map(|b| b.rank as u64).sum();
    Ok(CodimReport {
        algebra: alg.descriptor(),
        n,
        blocks,
        total,
        method: "proper-spanning-rank".into(),
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// For a unital algebra the codimensions decompose over the proper ones:
/// c_n = sum_k C(n, k) gamma_k. Checks the relation for every n covered by
/// both lists.
pub fn codim_gamma_relation(c: &[u64], gamma: &[u64]) -> bool {
    for (n, &cn) in c.iter().enumerate() {
        if n >= gamma.len() {
            return false;
        }
        let sum: u64 = (0..=n).map(|k| binomial(n, k) * gamma[k]).sum();
        if sum != cn {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Identity-basis certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisBlockReport {
    pub degrees: Vec<String>,
    pub space_dim: usize,
    pub evaluation_rank: usize,
    pub identity_dim: usize,
    pub consequence_rank: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub degrees: Vec<String>,
    pub polynomial: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisReport {
    pub algebra: AlgebraDescriptor,
    pub n: usize,
    pub verified: bool,
    #[serde(rename = "assignment-blocks")]
    pub blocks: Vec<BasisBlockReport>,
    pub counterexample: Option<Counterexample>,
}

/// Certify that the generators span all multilinear identities of the
/// algebra in degree n.
///
/// Per degree word: the identities are the left kernel of the evaluation
/// matrix of the full multilinear space, and the generated consequences
/// are coordinatized in the same monomial basis. The block verifies when
/// the consequence rank equals the kernel dimension. On a deficit the
/// report carries an explicit identity outside the generated span; if a
/// generator fails to be an identity at all, that is reported instead.
pub fn basis_certificate(
    alg: &GradedStarAlgebra,
    generators: &[Polynomial],
    n: usize,
    budget: &Budget,
) -> Result<BasisReport, EvalError> {
    for g in generators {
        if !is_identity_general(alg, g)? {
            return Ok(BasisReport {
                algebra: alg.descriptor(),
                n,
                verified: false,
                blocks: Vec::new(),
                counterexample: Some(Counterexample {
                    degrees: Vec::new(),
                    polynomial: g.to_string(),
                    reason: "not-an-identity".into(),
                }),
            });
        }
    }
    let group = alg.grading().group().clone();
    let support = alg.grading().support();
    let words = degree_words(&support, n);

    struct BlockOutcome {
        report: BasisBlockReport,
        counterexample: Option<Counterexample>,
    }

    let outcomes: Result<Vec<BlockOutcome>, EvalError> = words
        .par_iter()
        .map(|word| {
            let assignment: Vec<(GroupElement, Symmetry)> =
                word.iter().map(|g| (g.clone(), Symmetry::Free)).collect();
            let degrees: Vec<String> = word.iter().map(|g| g.to_string()).collect();
            let space = multilinear_space(&assignment);
            let space_polys: Vec<Polynomial> = space
                .iter()
                .cloned()
                .map(Polynomial::from_monomial)
                .collect();
            let universes: Vec<Vec<Sparse>> = assignment
                .iter()
                .map(|(g, s)| universe(alg, g, *s))
                .collect();
            let tuples = substitution_tuples(&universes);

            let consequences = multilinear_consequences(generators, &assignment, &group)?;
            budget_check(
                alg.m(),
                space.len() + consequences.len(),
                tuples.len() as u64,
                budget,
            )?;

            let eval_rows = sparse_rows(alg, &assignment, &space_polys, &tuples);
            let (_, evaluation_rank) = densify_rank(&eval_rows);
            let identity_dim = space.len() - evaluation_rank;

            // Coordinates of the consequences in the monomial basis.
            let pos: BTreeMap<&Monomial, usize> =
                space.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let coords: Vec<Vec<Rat>> = consequences
                .iter()
                .map(|p| {
                    let mut v = vec![Rat::zero(); space.len()];
                    for (mono, c) in p.terms() {
                        v[*pos.get(mono).expect("consequence stays in its component")] = c.clone();
                    }
                    v
                })
                .collect();

            // Soundness: every consequence evaluates to zero. This is
            // implied by the generators being identities; checking it again
            // exercises the substitution engine.
            for (ci, cv) in coords.iter().enumerate() {
                let mut acc: BTreeMap<u64, Rat> = BTreeMap::new();
                for (mi, coeff) in cv.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    for (k, v) in &eval_rows[mi] {
                        let e = acc.entry(*k).or_insert_with(Rat::zero);
                        *e += coeff * v;
                    }
                }
                if acc.values().any(|v| !v.is_zero()) {
                    return Ok(BlockOutcome {
                        report: BasisBlockReport {
                            degrees: degrees.clone(),
                            space_dim: space.len(),
                            evaluation_rank,
                            identity_dim,
                            consequence_rank: 0,
                        },
                        counterexample: Some(Counterexample {
                            degrees,
                            polynomial: consequences[ci].to_string(),
                            reason: "consequence-evaluates-nonzero".into(),
                        }),
                    });
                }
            }

            let consequence_rank = linalg::rank_rat_rows(&coords);
            let mut counterexample = None;
            if consequence_rank < identity_dim {
                // Identities are the left kernel of the evaluation matrix:
                // transpose and take the nullspace, then find a kernel
                // vector outside the consequence span.
                let touched: BTreeSet<u64> =
                    eval_rows.iter().flat_map(|r| r.keys().copied()).collect();
                let transposed: Vec<Vec<Rat>> = touched
                    .iter()
                    .map(|k| {
                        eval_rows
                            .iter()
                            .map(|r| r.get(k).cloned().unwrap_or_else(Rat::zero))
                            .collect()
                    })
                    .collect();
                let kernel = linalg::nullspace_rat(&transposed, space.len());
                for v in &kernel {
                    if !linalg::in_row_span(&coords, v) {
                        let mut poly = Polynomial::zero();
                        for (mi, coeff) in v.iter().enumerate() {
                            poly.add_term(space[mi].clone(), coeff.clone());
                        }
                        counterexample = Some(Counterexample {
                            degrees: degrees.clone(),
                            polynomial: poly.to_string(),
                            reason: "not-generated".into(),
                        });
                        break;
                    }
                }
            }
            Ok(BlockOutcome {
                report: BasisBlockReport {
                    degrees,
                    space_dim: space.len(),
                    evaluation_rank,
                    identity_dim,
                    consequence_rank,
                },
                counterexample,
            })
        })
        .collect();

    let outcomes = outcomes?;
    let mut counterexample = None;
    let mut blocks = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if counterexample.is_none() {
            counterexample = o.counterexample;
        }
        blocks.push(o.report);
    }
    let verified =
        counterexample.is_none() && blocks.iter().all(|b| b.consequence_rank == b.identity_dim);
    Ok(BasisReport {
        algebra: alg.descriptor(),
        n,
        verified,
        blocks,
        counterexample,
    })
}

// ---------------------------------------------------------------------------
// Codimension roots
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub codimension: u64,
    pub root: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentReport {
    pub algebra: AlgebraDescriptor,
    pub points: Vec<ExponentPoint>,
    pub predicted_exponent: u64,
    pub method: String,
}

/// Codimension roots c_n^(1/n) for n = 1..=max_n, exact to six decimal
/// places, plus the predicted growth limit: m + 1 for odd m with the
/// finest compatible grading, m otherwise (and trivially 1 when m = 1).
pub fn exponent_estimate(
    alg: &GradedStarAlgebra,
    max_n: usize,
    budget: &Budget,
) -> Result<ExponentReport, EvalError> {
    let mut points = Vec::new();
    for n in 1..=max_n {
        let total = codimension(alg, n, budget)?.total;
        points.push(ExponentPoint {
            n,
            codimension: total,
            root: nth_root_6dp(total, n as u32),
        });
    }
    let m = alg.m();
    let predicted_exponent = if m == 1 {
        1
    } else if m % 2 == 1 && *alg.grading() == crate::utalg::finest_grading(m) {
        (m + 1) as u64
    } else {
        m as u64
    };
    Ok(ExponentReport {
        algebra: alg.descriptor(),
        points,
        predicted_exponent,
        method: "codimension-root-table".into(),
    })
}

fn integer_nth_root(x: &BigUint, n: u32) -> BigUint {
    if x.is_zero() || n == 1 {
        return x.clone();
    }
    let bits = x.bits();
    let mut hi = BigUint::from(1u8) << (bits / n as u64 + 1);
    let mut lo = BigUint::zero();
    // Largest k with k^n <= x.
    while lo < hi {
        let mid: BigUint = (&lo + &hi + 1u8) >> 1;
        if mid.pow(n) <= *x {
            lo = mid;
        } else {
            hi = mid - 1u8;
        }
    }
    lo
}

/// Decimal string of c^(1/n) rounded to six places, round half to even.
/// Exact: works on c * 10^(6n) in big integers, so no floating point is
/// involved.
pub fn nth_root_6dp(c: u64, n: u32) -> String {
    assert!(n >= 1);
    let scaled = BigUint::from(c) * BigUint::from(10u8).pow(6 * n);
    let k = integer_nth_root(&scaled, n);
    // Compare the scaled value against (k + 1/2)^n to decide the rounding
    // direction: 2^n * scaled vs (2k + 1)^n.
    let lhs = &scaled << n;
    let mid = (&k * 2u8 + 1u8).pow(n);
    let two = BigUint::from(2u8);
    let rounded = match lhs.cmp(&mid) {
        std::cmp::Ordering::Greater => k + 1u8,
        std::cmp::Ordering::Less => k,
        std::cmp::Ordering::Equal => {
            if (&k % &two).is_zero() {
                k
            } else {
                k + 1u8
            }
        }
    };
    let million = BigUint::from(1_000_000u32);
    let int_part = &rounded / &million;
    let frac = (&rounded % &million).to_u64().unwrap();
    format!("{int_part}.{frac:06}")
}

// ---------------------------------------------------------------------------
