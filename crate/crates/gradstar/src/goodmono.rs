//! Good monomials for the finest grading on UT_m: the combinatorial normal
//! forms whose images are a basis of the multilinear part modulo the
//! graded *-identities. The module enumerates them with per-k counting
//! records, decides goodness of a single monomial, lists the monomial
//! identities in non-neutral letters, and evaluates the closed-form count
//! for the top layer k = m-1.
//!
//! A multilinear monomial factors as
//! M_1 x_{u_1,g_1}^{d_1} M_2 x_{u_2,g_2}^{d_2} ... M_k x_{u_k,g_k}^{d_k} M_{k+1}
//! with g_i nonzero and each M_i a word in neutral letters. It is good
//! when it is not an identity of the algebra and
//!
//!   I    indices increase strictly inside every neutral block;
//!   II   a letter whose component is one-dimensional carries no star and
//!        its preceding block is empty;
//!   III  a one-dimensional product component over letters i..j forces
//!        M_i empty and u_i < u_j;
//!   IV   odd m: two adjacent letters of basis-vector degree force the
//!        block between them starless;
//!   V    odd m, k = 1, basis-vector degree: at least one of the two
//!        blocks is starless.
//!
//! For the symplectic involution (even m only) the one-dimensional
//! components are skew instead of symmetric; I-III apply unchanged, IV and
//! V are vacuous, and the method label on every record says that the
//! symplectic adaptation produced it.
//!
//! Identity detection rides on a structural fact of the finest grading:
//! the neutral component is the diagonal, so a monomial vanishes under
//! every substitution exactly when its non-neutral skeleton does. The
//! enumerator therefore tests the skeleton once per degree word through
//! the exhaustive evaluator, and `is_good` re-checks the full monomial the
//! expensive way so the two paths can be cross-validated.

use crate::abgroup::{GroupElement, GroupError};
use crate::eval::{self, Budget, EvalError};
use crate::freealg::{Letter, Monomial, Polynomial, Symmetry, Variable};
use crate::utalg::{finest_grading, GradedStarAlgebra, InvKind, Involution, UtError};
use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GoodError {
    #[error("good monomials are defined for m >= 2, got m = {0}")]
    SizeTooSmall(usize),
    #[error("monomial is not multilinear in x_1..x_n")]
    NotMultilinear,
    #[error("letter {0} is tagged; good monomials are words in free letters")]
    TaggedLetter(u32),
    #[error("enumeration budget exceeded: {letters} letter slots over cap {max_cells}")]
    BudgetExceeded { letters: u64, max_cells: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ut(#[from] UtError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One row of the per-k counting table: the number of good monomials of
/// total degree n with exactly k non-neutral letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub count: u64,
    pub method: String,
}

/// Enumeration result: monomials grouped by ascending k, in canonical
/// order within each group, plus one CountRecord per k in 0..=m-1.
#[derive(Debug, Clone)]
pub struct GoodEnumeration {
    pub monomials: Vec<Monomial>,
    pub records: Vec<CountRecord>,
}

impl GoodEnumeration {
    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }
}

fn method_label(kind: InvKind) -> &'static str {
    match kind {
        InvKind::Reflection => "good-monomial-enumerator",
        InvKind::Symplectic => "good-monomial-enumerator/symplectic-adaptation",
    }
}

fn finest_algebra(m: usize, kind: InvKind) -> Result<GradedStarAlgebra, GoodError> {
    if m < 2 {
        return Err(GoodError::SizeTooSmall(m));
    }
    Ok(GradedStarAlgebra::new(
        finest_grading(m),
        Involution::new(kind, m)?,
    )?)
}

/// Standard basis vector of the grading group: one coordinate 1, rest 0.
fn is_basis_vector(g: &GroupElement) -> bool {
    g.coords().iter().filter(|&&c| c != 0).count() == 1 && g.coords().contains(&1)
}

/// Constraints imposed by conditions II-V on all monomials sharing one
/// non-neutral degree word. Blocks and letters are 0-based: block b is the
/// neutral block before letter b, so blocks run 0..=k.
struct WordConstraints {
    closed_blocks: BTreeSet<usize>,
    starless_blocks: BTreeSet<usize>,
    unstarred_letters: BTreeSet<usize>,
    /// (i, j) pairs with u_i < u_j required.
    order_pairs: Vec<(usize, usize)>,
    /// Condition V: block 0 or block 1 must be starless.
    either_starless: bool,
}

// The window scans need both endpoints as positions, so index loops stay.
#[allow(clippy::needless_range_loop)]
fn word_constraints(
    alg: &GradedStarAlgebra,
    word: &[GroupElement],
) -> Result<WordConstraints, GoodError> {
    let grading = alg.grading();
    let group = grading.group();
    let k = word.len();
    let odd = alg.m() % 2 == 1;
    let mut cons = WordConstraints {
        closed_blocks: BTreeSet::new(),
        starless_blocks: BTreeSet::new(),
        unstarred_letters: BTreeSet::new(),
        order_pairs: Vec::new(),
        either_starless: false,
    };
    for (i, g) in word.iter().enumerate() {
        // II
        if grading.component_dim(g) == 1 {
            cons.unstarred_letters.insert(i);
            cons.closed_blocks.insert(i);
        }
    }
    for i in 0..k {
        // III: product degree of the window i..=j
        let mut g = word[i].clone();
        for j in i + 1..k {
            g = group.add(&g, &word[j])?;
            if grading.component_dim(&g) == 1 {
                cons.closed_blocks.insert(i);
                cons.order_pairs.push((i, j));
            }
        }
    }
    if odd {
        // IV
        for i in 0..k.saturating_sub(1) {
            if is_basis_vector(&word[i]) && is_basis_vector(&word[i + 1]) {
                cons.starless_blocks.insert(i + 1);
            }
        }
        // V
        if k == 1 && is_basis_vector(&word[0]) {
            cons.either_starless = true;
        }
    }
    Ok(cons)
}

/// A monomial split into its neutral blocks and non-neutral letters;
/// blocks[b] precedes letters[b].
struct Factorization {
    blocks: Vec<Vec<Letter>>,
    letters: Vec<Letter>,
}

fn factorize(mono: &Monomial) -> Result<Factorization, GoodError> {
    let mut blocks = vec![Vec::new()];
    let mut letters = Vec::new();
    for l in &mono.letters {
        if l.var.symmetry != Symmetry::Free {
            return Err(GoodError::TaggedLetter(l.var.index));
        }
        if l.var.degree.is_zero() {
            blocks.last_mut().expect("nonempty").push(l.clone());
        } else {
            letters.push(l.clone());
            blocks.push(Vec::new());
        }
    }
    Ok(Factorization { blocks, letters })
}

fn starless(block: &[Letter]) -> bool {
    block.iter().all(|l| !l.starred)
}

fn satisfies(fact: &Factorization, cons: &WordConstraints) -> bool {
    // I
    for b in &fact.blocks {
        if !b.windows(2).all(|w| w[0].var.index < w[1].var.index) {
            return false;
        }
    }
    for &i in &cons.unstarred_letters {
        if fact.letters[i].starred {
            return false;
        }
    }
    for &b in &cons.closed_blocks {
        if !fact.blocks[b].is_empty() {
            return false;
        }
    }
    for &(i, j) in &cons.order_pairs {
        if fact.letters[i].var.index >= fact.letters[j].var.index {
            return false;
        }
    }
    for &b in &cons.starless_blocks {
        if !starless(&fact.blocks[b]) {
            return false;
        }
    }
    if cons.either_starless && !starless(&fact.blocks[0]) && !starless(&fact.blocks[1]) {
        return false;
    }
    true
}

/// Is the monomial good for the finest grading on UT_m with the given
/// involution? Requires a monomial that is multilinear in x_1..x_n for
/// some n. Identity-ness is decided by exhaustive evaluation, not by the
/// skeleton shortcut, so this is the independent side of the
/// enumerator/checker cross-validation.
pub fn is_good(alg: &GradedStarAlgebra, mono: &Monomial) -> Result<bool, GoodError> {
    let n = mono.len();
    let indices: BTreeSet<u32> = mono.letters.iter().map(|l| l.var.index).collect();
    if indices.len() != n || indices.iter().next_back().is_some_and(|&i| i as usize != n) {
        return Err(GoodError::NotMultilinear);
    }
    let fact = factorize(mono)?;
    let word: Vec<GroupElement> = fact.letters.iter().map(|l| l.var.degree.clone()).collect();
    let cons = word_constraints(alg, &word)?;
    if !satisfies(&fact, &cons) {
        return Ok(false);
    }
    Ok(!eval::is_identity(
        alg,
        &Polynomial::from_monomial(mono.clone()),
    )?)
}

/// Cartesian product of per-slot option lists; one empty selection when
/// there are no slots.
fn selections<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    if options.is_empty() {
        return vec![Vec::new()];
    }
    if options.iter().any(|o| o.is_empty()) {
        return Vec::new();
    }
    options
        .iter()
        .map(|o| o.iter().cloned())
        .multi_cartesian_product()
        .collect()
}

/// All good monomials over one non-neutral degree word.
fn enumerate_word(
    alg: &GradedStarAlgebra,
    n: usize,
    word: &[GroupElement],
    budget: &Budget,
    cells: &AtomicU64,
) -> Result<Vec<Monomial>, GoodError> {
    let k = word.len();
    // A degree word whose skeleton vanishes under every substitution only
    // produces identities. For k >= 2 the evaluator also certifies that a
    // surviving skeleton has a unique nonzero substitution; a violation
    // would break the independence argument and is a hard error.
    if k >= 2 {
        let letters: Vec<Letter> = word
            .iter()
            .enumerate()
            .map(|(i, g)| {
                Letter::new(Variable::free(i as u32 + 1, g.clone()), false).expect("free letter")
            })
            .collect();
        if eval::unique_substitution(alg, &Monomial::new(letters))?.is_none() {
            return Ok(Vec::new());
        }
    }
    let cons = word_constraints(alg, word)?;
    let open_blocks: Vec<usize> = (0..=k)
        .filter(|b| !cons.closed_blocks.contains(b))
        .collect();
    let mut out = Vec::new();
    for sel in (1..=n as u32).permutations(k) {
        if cons.order_pairs.iter().any(|&(i, j)| sel[i] > sel[j]) {
            continue;
        }
        let rest: Vec<u32> = (1..=n as u32).filter(|i| !sel.contains(i)).collect();
        let placements = selections(&vec![open_blocks.clone(); rest.len()]);
        for placement in placements {
            let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); k + 1];
            for (&index, &b) in rest.iter().zip(&placement) {
                blocks[b].push(index);
            }
            // Slot layout: block 0, letter 0, block 1, ..., letter k-1,
            // block k. Ascending order inside each block realizes I.
            let mut slots: Vec<(u32, Option<usize>, usize)> = Vec::with_capacity(n);
            for b in 0..=k {
                for &index in &blocks[b] {
                    slots.push((index, None, b));
                }
                if b < k {
                    slots.push((sel[b], Some(b), b));
                }
            }
            let star_options: Vec<Vec<bool>> = slots
                .iter()
                .map(|&(_, letter, block)| {
                    let forced = match letter {
                        Some(i) => cons.unstarred_letters.contains(&i),
                        None => cons.starless_blocks.contains(&block),
                    };
                    if forced {
                        vec![false]
                    } else {
                        vec![false, true]
                    }
                })
                .collect();
            for stars in selections(&star_options) {
                if cons.either_starless {
                    let starred_in = |b: usize| {
                        slots
                            .iter()
                            .zip(&stars)
                            .any(|(&(_, letter, block), &s)| letter.is_none() && block == b && s)
                    };
                    if starred_in(0) && starred_in(1) {
                        continue;
                    }
                }
                let used = cells.fetch_add(n as u64, Ordering::Relaxed) + n as u64;
                if used > budget.max_cells {
                    return Err(GoodError::BudgetExceeded {
                        letters: used,
                        max_cells: budget.max_cells,
                    });
                }
                let letters: Vec<Letter> = slots
                    .iter()
                    .zip(&stars)
                    .map(|(&(index, letter, _), &s)| {
                        let degree = match letter {
                            Some(i) => word[i].clone(),
                            None => alg.grading().group().zero(),
                        };
                        Letter::new(Variable::free(index, degree), s).expect("free letter")
                    })
                    .collect();
                out.push(Monomial::new(letters));
            }
        }
    }
    Ok(out)
}

/// Enumerate every good monomial of total degree n for the finest grading
/// on UT_m, m >= 2, with one CountRecord per k in 0..=m-1. The k > n
/// layers are recorded with count zero. The budget caps the total number
/// of materialized letter slots.
pub fn enumerate_good(
    m: usize,
    n: usize,
    kind: InvKind,
    budget: &Budget,
) -> Result<GoodEnumeration, GoodError> {
    let alg = finest_algebra(m, kind)?;
    let support = alg.grading().support_nonneutral();
    let method = method_label(kind);
    let cells = AtomicU64::new(0);
    let mut monomials = Vec::new();
    let mut records = Vec::new();
    for k in 0..m {
        if k > n {
            records.push(CountRecord {
                m,
                n,
                k,
                count: 0,
                method: method.to_string(),
            });
            continue;
        }
        let words: Vec<Vec<GroupElement>> = if k == 0 {
            vec![Vec::new()]
        } else {
            (0..k)
                .map(|_| support.iter().cloned())
                .multi_cartesian_product()
                .collect()
        };
        let per_word: Vec<Result<Vec<Monomial>, GoodError>> = words
            .par_iter()
            .map(|w| enumerate_word(&alg, n, w, budget, &cells))
            .collect();
        let mut layer = Vec::new();
        for r in per_word {
            layer.extend(r?);
        }
        layer.sort();
        records.push(CountRecord {
            m,
            n,
            k,
            count: layer.len() as u64,
            method: method.to_string(),
        });
        monomials.extend(layer);
    }
    Ok(GoodEnumeration { monomials, records })
}

/// Closed form for the count of good monomials with k = m-1 non-neutral
/// letters, m >= 2; zero when n < m-1.
///
/// odd m = 2r+1:  (m-1)! C(n,m-1) 2^(m-1) (r+1)^(n-m+1) (2^(n-m+2) - 1)
/// even m = 2r:   (m-1)! C(n,m-1) 2^(m-2) r^(n-m+1) 2^(n-m+1)
///
/// For m >= 3 this table and the enumerator disagree; both sides are kept
/// as written and the acceptance gate reports the comparison.
pub fn closed_count_top(m: usize, n: usize) -> u64 {
    assert!(m >= 2, "closed top count is defined for m >= 2");
    if n < m - 1 {
        return 0;
    }
    let r = (m / 2) as u128;
    let e = (n + 1 - m) as u32;
    let factorial: u128 = (1..=(m as u128 - 1)).product();
    let choose = eval::binomial(n, m - 1) as u128;
    let value = if m % 2 == 1 {
        factorial * choose * (1u128 << (m - 1)) * (r + 1).pow(e) * ((1u128 << (e + 1)) - 1)
    } else {
        factorial * choose * (1u128 << (m - 2)) * r.pow(e) * (1u128 << e)
    };
    u64::try_from(value).expect("top count fits in u64")
}

/// All monomials x_{1,g_1} ... x_{k,g_k} in non-neutral letters, k <=
/// up_to_k, that are identities of the finest-graded algebra. Starless
/// words evaluate identically under both involutions, so no kind is
/// taken. Words with k = m letters are always identities (a product of m
/// strictly upper triangular matrices vanishes) and all appear.
pub fn monomial_identities(m: usize, up_to_k: usize) -> Result<Vec<Monomial>, GoodError> {
    assert!(
        up_to_k <= m,
        "words longer than m are redundant as identities"
    );
    let alg = finest_algebra(m, InvKind::Reflection)?;
    let support = alg.grading().support_nonneutral();
    let mut out = Vec::new();
    for k in 1..=up_to_k {
        let mut layer = Vec::new();
        for word in (0..k).map(|_| support.iter()).multi_cartesian_product() {
            let letters: Vec<Letter> = word
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    Letter::new(Variable::free(i as u32 + 1, (*g).clone()), false)
                        .expect("free letter")
                })
                .collect();
            let mono = Monomial::new(letters);
            if eval::is_identity(&alg, &Polynomial::from_monomial(mono.clone()))? {
                layer.push(mono);
            }
        }
        layer.sort();
        out.extend(layer);
    }
    Ok(out)
}

/// Brute-force check that the ordered partitions of {1..n} into t labeled,
/// possibly empty blocks number exactly t^n: materialize one block tuple
/// per assignment map and count the distinct tuples.
pub fn tuple_count_check(n: usize, t: usize) -> bool {
    let assignments: Vec<Vec<usize>> = if n == 0 {
        vec![Vec::new()]
    } else if t == 0 {
        Vec::new()
    } else {
        (0..n).map(|_| 0..t).multi_cartesian_product().collect()
    };
    let tuples: BTreeSet<Vec<Vec<usize>>> = assignments
        .iter()
        .map(|f| {
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); t];
            for (x, &b) in f.iter().enumerate() {
                blocks[b].push(x + 1);
            }
            blocks
        })
        .collect();
    tuples.len() as u64 == (t as u64).pow(n as u32)
}

/// Linear-independence certificate for the good monomials of degree n:
/// within every degree assignment their evaluation matrix must have full
/// row rank. Together with the count agreeing with the codimension this
/// makes them a basis.
pub fn independence_certificate(
    m: usize,
    n: usize,
    kind: InvKind,
    budget: &Budget,
) -> Result<bool, GoodError> {
    let alg = finest_algebra(m, kind)?;
    let enumeration = enumerate_good(m, n, kind, budget)?;
    let zero = alg.grading().group().zero();
    let mut by_assignment: BTreeMap<Vec<GroupElement>, Vec<Polynomial>> = BTreeMap::new();
    for mono in &enumeration.monomials {
        let mut degrees = vec![zero.clone(); n];
        for l in &mono.letters {
            degrees[l.var.index as usize - 1] = l.var.degree.clone();
        }
        by_assignment
            .entry(degrees)
            .or_default()
            .push(Polynomial::from_monomial(mono.clone()));
    }
    let blocks: Vec<(Vec<GroupElement>, Vec<Polynomial>)> = by_assignment.into_iter().collect();
    let verdicts: Vec<Result<bool, GoodError>> = blocks
        .par_iter()
        .map(|(degrees, polys)| {
            let assignment: Vec<(GroupElement, Symmetry)> = degrees
                .iter()
                .map(|g| (g.clone(), Symmetry::Free))
                .collect();
            let (rows, _cols, rank) = eval::block_rank(&alg, &assignment, polys, budget)?;
            Ok(rank == rows)
        })
        .collect();
    for v in verdicts {
        if !v? {
            return Ok(false);
        }
    }
    Ok(true)
}
