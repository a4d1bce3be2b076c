//! Free associative algebra with involution over graded variables.
//!
//! Two alphabets coexist. Untagged (free) variables x_i carry a group degree
//! and an explicit star flag on each occurrence. Tagged variables are
//! symmetric or skew under the involution, so a star never appears on them:
//! building a starred tagged letter normalizes to a sign instead
//! (x* = x for symmetric, x* = -x for skew).
//!
//! Monomials are ordered lexicographically on their letter sequences, with
//! letters compared by (index, star flag, degree, symmetry); polynomial term
//! maps iterate in that canonical order, which makes every listing in the
//! crate deterministic.

use crate::abgroup::{AbelianGroup, GroupElement};
use crate::linalg;
use crate::{rat, Rat};
use itertools::Itertools;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FreeError {
    #[error("a tagged (symmetric or skew) variable cannot carry a star flag")]
    StarredTagged,
    #[error("polynomial is not multilinear in its variables")]
    NotMultilinear,
    #[error("index {0} is used with two different variable declarations")]
    InconsistentIndex(u32),
    #[error("variable indices must be exactly 1..=n, found {0:?}")]
    IndicesNotContiguous(Vec<u32>),
    #[error("proper-polynomial machinery needs tagged variables only")]
    ProperNeedsTagged,
    #[error("generator is not multihomogeneous: index {0} has varying multiplicity")]
    NotMultihomogeneous(u32),
    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },
    #[error("tagged shorthand y/z requires the group Z_2")]
    TaggedNeedsZ2,
    #[error(transparent)]
    Group(#[from] crate::abgroup::GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symmetry {
    Free,
    Symmetric,
    Skew,
}

/// A variable: index plus homogeneous degree plus involution behavior.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub index: u32,
    pub degree: GroupElement,
    pub symmetry: Symmetry,
}

impl Variable {
    pub fn free(index: u32, degree: GroupElement) -> Self {
        Variable {
            index,
            degree,
            symmetry: Symmetry::Free,
        }
    }

    pub fn tagged(index: u32, degree: GroupElement, symmetric: bool) -> Self {
        let symmetry = if symmetric {
            Symmetry::Symmetric
        } else {
            Symmetry::Skew
        };
        Variable {
            index,
            degree,
            symmetry,
        }
    }
}

/// One occurrence of a variable; the star flag is only ever set on free
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub var: Variable,
    pub starred: bool,
}

impl Letter {
    pub fn new(var: Variable, starred: bool) -> Result<Self, FreeError> {
        if starred && var.symmetry != Symmetry::Free {
            return Err(FreeError::StarredTagged);
        }
        Ok(Letter { var, starred })
    }
}

/// Product of letters; the empty product is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub letters: Vec<Letter>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            letters: Vec::new(),
        }
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Monomial { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn degree(&self, group: &AbelianGroup) -> GroupElement {
        let mut acc = group.zero();
        for l in &self.letters {
            // Star does not change the degree for the gradings we support
            // (graded involutions by definition preserve components).
            acc = group.add(&acc, &l.var.degree).expect("letter degree");
        }
        acc
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Monomial { letters }
    }

    /// Each variable index occurs exactly once?
    pub fn is_multilinear(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.letters.iter().all(|l| seen.insert(l.var.index))
    }
}

/// Polynomial with exact rational coefficients; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rat>,
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.terms.iter().cmp(other.terms.iter())
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::from_monomial(Monomial::one())
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, rat(1));
        Polynomial { terms }
    }

    /// Single unstarred occurrence of a variable.
    pub fn var(v: Variable) -> Self {
        Polynomial::from_monomial(Monomial::new(vec![Letter {
            var: v,
            starred: false,
        }]))
    }

    /// Starred occurrence: a star flag for free variables, a sign for
    /// tagged ones.
    pub fn starred_var(v: Variable) -> Self {
        match v.symmetry {
            Symmetry::Free => Polynomial::from_monomial(Monomial::new(vec![Letter {
                var: v,
                starred: true,
            }])),
            Symmetry::Symmetric => Polynomial::var(v),
            Symmetry::Skew => Polynomial::var(v).neg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get() + &c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Image under the involution: reverse each monomial; stars toggle on
    /// free letters, skew letters contribute a sign.
    pub fn star(&self) -> Self {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut sign = 1i64;
            let letters: Vec<Letter> = m
                .letters
                .iter()
                .rev()
                .map(|l| match l.var.symmetry {
                    Symmetry::Free => Letter {
                        var: l.var.clone(),
                        starred: !l.starred,
                    },
                    Symmetry::Symmetric => l.clone(),
                    Symmetry::Skew => {
                        sign = -sign;
                        l.clone()
                    }
                })
                .collect();
            out.add_term(Monomial::new(letters), c * rat(sign));
        }
        out
    }

    /// Map of index -> variable, failing on inconsistent declarations.
    pub fn variables(&self) -> Result<BTreeMap<u32, Variable>, FreeError> {
        let mut map: BTreeMap<u32, Variable> = BTreeMap::new();
        for m in self.terms.keys() {
            for l in &m.letters {
                match map.get(&l.var.index) {
                    None => {
                        map.insert(l.var.index, l.var.clone());
                    }
                    Some(v) if *v == l.var => {}
                    Some(_) => return Err(FreeError::InconsistentIndex(l.var.index)),
                }
            }
        }
        Ok(map)
    }

    /// Every term contains every variable index exactly once, with the same
    /// index set across terms.
    pub fn is_multilinear(&self) -> Result<bool, FreeError> {
        let vars = self.variables()?;
        let full: BTreeSet<u32> = vars.keys().copied().collect();
        for m in self.terms.keys() {
            if !m.is_multilinear() {
                return Ok(false);
            }
            let indices: BTreeSet<u32> = m.letters.iter().map(|l| l.var.index).collect();
            if indices != full {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn commutator(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a.mul(b).sub(&b.mul(a))
}

/// Left-normed commutator [[..[p_1, p_2], ..], p_k]; a single entry is
/// returned as is.
pub fn left_normed(items: &[Polynomial]) -> Polynomial {
    assert!(!items.is_empty());
    let mut acc = items[0].clone();
    for p in &items[1..] {
        acc = commutator(&acc, p);
    }
    acc
}

/// Kind of the variable at each position (1-based index i gets
/// assignment[i-1]).
pub type Assignment = Vec<(GroupElement, Symmetry)>;

/// All multilinear monomials for the assignment: every permutation of the
/// variables, with independent star flags on the free positions. Sorted.
pub fn multilinear_space(assignment: &[(GroupElement, Symmetry)]) -> Vec<Monomial> {
    let n = assignment.len();
    let vars: Vec<Variable> = assignment
        .iter()
        .enumerate()
        .map(|(i, (g, s))| Variable {
            index: (i + 1) as u32,
            degree: g.clone(),
            symmetry: *s,
        })
        .collect();
    let free_positions: Vec<usize> = (0..n)
        .filter(|&i| assignment[i].1 == Symmetry::Free)
        .collect();
    let mut out = Vec::new();
    // permutations(0) yields a single empty permutation, covering n = 0.
    for perm in (0..n).permutations(n) {
        for mask in 0..(1u32 << free_positions.len()) {
            let star_on: BTreeSet<usize> = free_positions
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &pos)| pos)
                .collect();
            let letters: Vec<Letter> = perm
                .iter()
                .map(|&pos| Letter {
                    var: vars[pos].clone(),
                    starred: star_on.contains(&pos),
                })
                .collect();
            out.push(Monomial::new(letters));
        }
    }
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// Proper polynomials
// ---------------------------------------------------------------------------

/// Word-eligible kinds: neutral skew, non-neutral symmetric, non-neutral
/// skew. Neutral symmetric variables may only live inside commutators.
fn word_class(degree: &GroupElement, sym: Symmetry) -> Option<u8> {
    match (degree.is_zero(), sym) {
        (true, Symmetry::Skew) => Some(0),
        (false, Symmetry::Symmetric) => Some(1),
        (false, Symmetry::Skew) => Some(2),
        (true, Symmetry::Symmetric) => None,
        (_, Symmetry::Free) => None,
    }
}

fn partitions_min2(items: &[u32]) -> Vec<Vec<Vec<u32>>> {
    // Set partitions with every block of size >= 2, blocks ordered by their
    // minimum element (the first item always opens the first block).
    fn go(rest: &[u32], current: Vec<Vec<u32>>) -> Vec<Vec<Vec<u32>>> {
        match rest.split_first() {
            None => {
                if current.iter().all(|b| b.len() >= 2) {
                    vec![current]
                } else {
                    Vec::new()
                }
            }
            Some((&x, tail)) => {
                let mut out = Vec::new();
                for i in 0..current.len() {
                    let mut next = current.clone();
                    next[i].push(x);
                    out.extend(go(tail, next));
                }
                let mut next = current;
                next.push(vec![x]);
                out.extend(go(tail, next));
                out
            }
        }
    }
    if items.is_empty() {
        return vec![Vec::new()];
    }
    go(&items[1..], vec![vec![items[0]]])
}

/// Spanning set of the proper multilinear polynomials for a tagged
/// assignment: sorted words in the word-eligible letters times products of
/// left-normed commutators over all >=2 set partitions of the rest, with
/// all within-block orders.
///
/// The list spans (it is deliberately redundant): any word order
/// straightens to the sorted one modulo higher commutator terms, and
/// products of commutators in any block order reduce the same way.
pub fn proper_basis(assignment: &[(GroupElement, Symmetry)]) -> Result<Vec<Polynomial>, FreeError> {
    let n = assignment.len();
    let vars: Vec<Variable> = assignment
        .iter()
        .enumerate()
        .map(|(i, (g, s))| Variable {
            index: (i + 1) as u32,
            degree: g.clone(),
            symmetry: *s,
        })
        .collect();
    if assignment.iter().any(|(_, s)| *s == Symmetry::Free) {
        return Err(FreeError::ProperNeedsTagged);
    }
    let word_eligible: Vec<u32> = (1..=n as u32)
        .filter(|&i| {
            word_class(&assignment[i as usize - 1].0, assignment[i as usize - 1].1).is_some()
        })
        .collect();
    let forced: Vec<u32> = (1..=n as u32)
        .filter(|&i| {
            word_class(&assignment[i as usize - 1].0, assignment[i as usize - 1].1).is_none()
        })
        .collect();

    let var = |i: u32| Polynomial::var(vars[i as usize - 1].clone());
    let mut out = Vec::new();
    for mask in 0..(1u64 << word_eligible.len()) {
        let word_set: Vec<u32> = word_eligible
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &i)| i)
            .collect();
        let mut rest: Vec<u32> = word_eligible
            .iter()
            .copied()
            .filter(|i| !word_set.contains(i))
            .chain(forced.iter().copied())
            .collect();
        rest.sort();
        if rest.len() == 1 {
            continue;
        }
        // Sorted word: class blocks in order, indices ascending inside.
        let mut word_sorted = word_set.clone();
        word_sorted.sort_by_key(|&i| {
            let (g, s) = &assignment[i as usize - 1];
            (word_class(g, *s).unwrap(), i)
        });
        let word_poly = word_sorted
            .iter()
            .fold(Polynomial::one(), |acc, &i| acc.mul(&var(i)));

        if rest.is_empty() {
            out.push(word_poly);
            continue;
        }
        for partition in partitions_min2(&rest) {
            // All within-block orders, one left-normed commutator per block.
            let per_block: Vec<Vec<Polynomial>> = partition
                .iter()
                .map(|block| {
                    block
                        .iter()
                        .copied()
                        .permutations(block.len())
                        .map(|order| {
                            let polys: Vec<Polynomial> = order.iter().map(|&i| var(i)).collect();
                            left_normed(&polys)
                        })
                        .collect()
                })
                .collect();
            for combo in per_block.iter().multi_cartesian_product() {
                let mut p = word_poly.clone();
                for c in combo {
                    p = p.mul(c);
                }
                if !p.is_zero() {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Is the multilinear polynomial in the span of the proper spanning set for
/// its own assignment?
pub fn is_proper(p: &Polynomial) -> Result<bool, FreeError> {
    if p.is_zero() {
        return Ok(true);
    }
    if !p.is_multilinear()? {
        return Err(FreeError::NotMultilinear);
    }
    let vars = p.variables()?;
    let indices: Vec<u32> = vars.keys().copied().collect();
    let n = indices.len() as u32;
    if indices != (1..=n).collect::<Vec<u32>>() {
        return Err(FreeError::IndicesNotContiguous(indices));
    }
    let assignment: Assignment = vars
        .values()
        .map(|v| (v.degree.clone(), v.symmetry))
        .collect();
    let space = multilinear_space(&assignment);
    let coord = |q: &Polynomial| -> Vec<Rat> {
        let pos: BTreeMap<&Monomial, usize> =
            space.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut v = vec![Rat::zero(); space.len()];
        for (m, c) in q.terms() {
            v[*pos.get(m).expect("monomial in space")] = c.clone();
        }
        v
    };
    let basis: Vec<Vec<Rat>> = proper_basis(&assignment)?.iter().map(&coord).collect();
    Ok(linalg::in_row_span(&basis, &coord(p)))
}

// ---------------------------------------------------------------------------
// T-ideal consequences
// ---------------------------------------------------------------------------

/// Full linearization of a multihomogeneous polynomial: substitute a sum of
/// fresh variables for every variable of multiplicity >= 2 and keep the
/// multilinear component. Fresh variables are renumbered 1..N in order of
/// (original index, copy number). A multilinear input passes through with
/// its own variables.
pub fn multilinearize(f: &Polynomial) -> Result<Polynomial, FreeError> {
    if f.is_zero() {
        return Ok(Polynomial::zero());
    }
    let vars = f.variables()?;
    // Multiplicity of each index, which must match across terms.
    let mut mult: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, (m, _)) in f.terms().enumerate() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for l in &m.letters {
            *counts.entry(l.var.index).or_insert(0) += 1;
        }
        if i == 0 {
            mult = counts;
        } else if counts != mult {
            let bad = counts
                .keys()
                .chain(mult.keys())
                .find(|k| counts.get(k) != mult.get(k))
                .copied()
                .unwrap_or(0);
            return Err(FreeError::NotMultihomogeneous(bad));
        }
    }
    if mult.values().all(|&d| d == 1) {
        return Ok(f.clone());
    }
    // Allocate fresh indices.
    let mut replacements: BTreeMap<u32, Vec<Variable>> = BTreeMap::new();
    let mut next = 1u32;
    for (&idx, &d) in &mult {
        let v = &vars[&idx];
        let copies: Vec<Variable> = (0..d)
            .map(|_| {
                let nv = Variable {
                    index: next,
                    degree: v.degree.clone(),
                    symmetry: v.symmetry,
                };
                next += 1;
                nv
            })
            .collect();
        replacements.insert(idx, copies);
    }
    let total = next - 1;
    // Expand and keep the terms where every fresh index appears once.
    let mut out = Polynomial::zero();
    for (m, c) in f.terms() {
        let mut partial: Vec<(Vec<Letter>, Rat)> = vec![(Vec::new(), c.clone())];
        for l in &m.letters {
            let copies = &replacements[&l.var.index];
            let mut nextp = Vec::with_capacity(partial.len() * copies.len());
            for (letters, coeff) in &partial {
                for nv in copies {
                    let mut ls = letters.clone();
                    ls.push(Letter {
                        var: nv.clone(),
                        starred: l.starred,
                    });
                    nextp.push((ls, coeff.clone()));
                }
            }
            partial = nextp;
        }
        for (letters, coeff) in partial {
            let mono = Monomial::new(letters);
            if mono.is_multilinear() && mono.letters.len() == total as usize {
                out.add_term(mono, coeff);
            }
        }
    }
    Ok(out)
}

/// Multilinear consequences of the generators in the component of the given
/// assignment: for f in S and S*, substitute monomial images (with stars on
/// free target letters, w ± w* for tagged generator variables) and border
/// with monomials on both sides, using every target letter exactly once.
/// Deduplicated and sorted.
pub fn multilinear_consequences(
    generators: &[Polynomial],
    assignment: &[(GroupElement, Symmetry)],
    group: &AbelianGroup,
) -> Result<Vec<Polynomial>, FreeError> {
    let n = assignment.len();
    let target_vars: Vec<Variable> = assignment
        .iter()
        .enumerate()
        .map(|(i, (g, s))| Variable {
            index: (i + 1) as u32,
            degree: g.clone(),
            symmetry: *s,
        })
        .collect();

    let mut out: BTreeSet<Polynomial> = BTreeSet::new();
    let mut gens_star: Vec<Polynomial> = Vec::new();
    for g in generators {
        let lin = multilinearize(g)?;
        if lin.is_zero() {
            continue;
        }
        gens_star.push(lin.clone());
        gens_star.push(lin.star());
    }

    for f in &gens_star {
        let fvars: Vec<Variable> = f.variables()?.into_values().collect();
        let t = f_degree_ok(f, n);
        if !t {
            continue;
        }
        let slots = fvars.len();
        // phi: each target letter goes to a generator slot, the left border,
        // or the right border.
        let options = slots + 2;
        let mut phi = vec![0usize; n];
        loop {
            consequences_for_phi(f, &fvars, &phi, &target_vars, group, &mut out)?;
            // odometer increment over base (slots + 2)
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                phi[k] += 1;
                if phi[k] < options {
                    break;
                }
                phi[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn f_degree_ok(f: &Polynomial, n: usize) -> bool {
    // Total degree of the generator cannot exceed the target length.
    f.terms().next().map(|(m, _)| m.len() <= n).unwrap_or(false)
}

fn consequences_for_phi(
    f: &Polynomial,
    fvars: &[Variable],
    phi: &[usize],
    target_vars: &[Variable],
    group: &AbelianGroup,
    out: &mut BTreeSet<Polynomial>,
) -> Result<(), FreeError> {
    let slots = fvars.len();
    let mut slot_sets: Vec<Vec<usize>> = vec![Vec::new(); slots];
    let mut left: Vec<usize> = Vec::new();
    let mut right: Vec<usize> = Vec::new();
    for (pos, &choice) in phi.iter().enumerate() {
        if choice < slots {
            slot_sets[choice].push(pos);
        } else if choice == slots {
            left.push(pos);
        } else {
            right.push(pos);
        }
    }
    if slot_sets.iter().any(|s| s.is_empty()) {
        return Ok(());
    }
    // Degree precheck per slot (order-independent).
    for (i, set) in slot_sets.iter().enumerate() {
        let mut d = group.zero();
        for &pos in set {
            d = group.add(&d, &target_vars[pos].degree)?;
        }
        if d != fvars[i].degree {
            return Ok(());
        }
    }

    // All ordered, star-decorated monomials over a set of target positions;
    // permutations(0) covers the empty set with the unit monomial.
    let arrangements = |set: &[usize]| -> Vec<Monomial> {
        let mut res = Vec::new();
        let free_count = |order: &[usize]| {
            order
                .iter()
                .filter(|&&p| target_vars[p].symmetry == Symmetry::Free)
                .count()
        };
        for order in set.iter().copied().permutations(set.len()) {
            let fc = free_count(&order);
            for mask in 0..(1u32 << fc) {
                let mut bit = 0;
                let letters: Vec<Letter> = order
                    .iter()
                    .map(|&p| {
                        let v = target_vars[p].clone();
                        let starred = if v.symmetry == Symmetry::Free {
                            let s = mask & (1 << bit) != 0;
                            bit += 1;
                            s
                        } else {
                            false
                        };
                        Letter { var: v, starred }
                    })
                    .collect();
                res.push(Monomial::new(letters));
            }
        }
        res
    };

    // Candidate images per slot.
    let mut slot_images: Vec<Vec<Polynomial>> = Vec::with_capacity(slots);
    for (i, set) in slot_sets.iter().enumerate() {
        let mut images = Vec::new();
        for w in arrangements(set) {
            let wp = Polynomial::from_monomial(w);
            let ws = wp.star();
            // Already (anti-)fixed monomials stay as they are rather than
            // doubling; that keeps the generated coefficients primitive.
            let img = match fvars[i].symmetry {
                Symmetry::Free => wp,
                Symmetry::Symmetric => {
                    if ws == wp {
                        wp
                    } else {
                        wp.add(&ws)
                    }
                }
                Symmetry::Skew => {
                    if ws == wp.neg() {
                        wp
                    } else {
                        wp.sub(&ws)
                    }
                }
            };
            if !img.is_zero() {
                images.push(img);
            }
        }
        if images.is_empty() {
            return Ok(());
        }
        images.sort();
        images.dedup();
        slot_images.push(images);
    }

    let lefts = arrangements(&left);
    let rights = arrangements(&right);

    for combo in slot_images.iter().multi_cartesian_product() {
        // Substitute into f term by term.
        let mut substituted = Polynomial::zero();
        for (m, c) in f.terms() {
            let mut acc = Polynomial::one().scale(c);
            for l in &m.letters {
                let slot = fvars
                    .iter()
                    .position(|v| v.index == l.var.index)
                    .expect("slot");
                let img = combo[slot];
                let factor = if l.starred {
                    img.star()
                } else {
                    (*img).clone()
                };
                acc = acc.mul(&factor);
            }
            substituted = substituted.add(&acc);
        }
        if substituted.is_zero() {
            continue;
        }
        for lm in &lefts {
            for rm in &rights {
                let p = Polynomial::from_monomial(lm.clone())
                    .mul(&substituted)
                    .mul(&Polynomial::from_monomial(rm.clone()));
                if !p.is_zero() {
                    out.insert(p);
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Text syntax
// ---------------------------------------------------------------------------

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match (self.var.symmetry, self.starred) {
            (Symmetry::Free, false) => "x",
            (Symmetry::Free, true) => "x*",
            (Symmetry::Symmetric, _) => "s",
            (Symmetry::Skew, _) => "k",
        };
        write!(f, "{head}[{}", self.var.index)?;
        for c in self.var.degree.coords() {
            write!(f, ",{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (sign, mag) = if c < &Rat::zero() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let one = mag == rat(1);
            if !one || m.is_empty() {
                write!(f, "{mag}")?;
                if !m.is_empty() {
                    write!(f, " ")?;
                }
            }
            if !m.is_empty() {
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

/// Recursive-descent parser for the polynomial syntax:
///
/// ```text
/// poly   := ['-'] term (('+'|'-') term)*
/// term   := [coef] factor+            coef like 3, -1, 2/3
/// factor := head '[' idx(,int)* ']'   head in x, x*, s, k, y+, y-, z+, z-
///         | '[' poly (',' poly)+ ']'  left-normed commutator
///         | '(' poly ')'
/// ```
///
/// Degrees after the index are coordinates in the given group; the y/z
/// shorthands mean (degree 0 / 1, symmetric / skew) and require Z_2.
pub fn parse_polynomial(text: &str, group: &AbelianGroup) -> Result<Polynomial, FreeError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        group,
    };
    let poly = p.parse_poly()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    group: &'a AbelianGroup,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> FreeError {
        FreeError::Parse {
            at: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_poly(&mut self) -> Result<Polynomial, FreeError> {
        self.skip_ws();
        let mut acc = Polynomial::zero();
        let mut sign = if self.eat(b'-') { -1i64 } else { 1 };
        loop {
            let term = self.parse_term()?;
            acc = acc.add(&term.scale(&rat(sign)));
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => break,
            }
            self.skip_ws();
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Polynomial, FreeError> {
        self.skip_ws();
        let coef = if self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
            let c = self.parse_rat()?;
            self.skip_ws();
            Some(c)
        } else {
            None
        };
        let mut acc = match &coef {
            Some(c) => Polynomial::one().scale(c),
            None => Polynomial::one(),
        };
        let mut any = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'x') | Some(b's') | Some(b'k') | Some(b'y') | Some(b'z') => {
                    let f = self.parse_variable()?;
                    acc = acc.mul(&f);
                    any = true;
                }
                Some(b'[') => {
                    let f = self.parse_commutator()?;
                    acc = acc.mul(&f);
                    any = true;
                }
                Some(b'(') => {
                    self.pos += 1;
                    let inner = self.parse_poly()?;
                    self.skip_ws();
                    if !self.eat(b')') {
                        return Err(self.err("expected ')'"));
                    }
                    acc = acc.mul(&inner);
                    any = true;
                }
                _ => break,
            }
        }
        if !any && coef.is_none() {
            return Err(self.err("expected a term"));
        }
        Ok(acc)
    }

    fn parse_rat(&mut self) -> Result<Rat, FreeError> {
        let start = self.pos;
        while self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let numer: i64 = std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))?;
        if self.eat(b'/') {
            let dstart = self.pos;
            while self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
            if dstart == self.pos {
                return Err(self.err("expected a denominator"));
            }
            let denom: i64 = std::str::from_utf8(&self.text[dstart..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("number too large"))?;
            if denom == 0 {
                return Err(self.err("zero denominator"));
            }
            Ok(Rat::new(numer.into(), denom.into()))
        } else {
            Ok(rat(numer))
        }
    }

    fn parse_int(&mut self) -> Result<i64, FreeError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().map(|b| b.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected an integer"))
    }

    fn parse_variable(&mut self) -> Result<Polynomial, FreeError> {
        let head = self.peek().unwrap();
        self.pos += 1;
        let (symmetry, starred, fixed_degree) = match head {
            b'x' => {
                let starred = self.eat(b'*');
                (Symmetry::Free, starred, None)
            }
            b's' => (Symmetry::Symmetric, false, None),
            b'k' => (Symmetry::Skew, false, None),
            b'y' | b'z' => {
                let sym = if self.eat(b'+') {
                    Symmetry::Symmetric
                } else if self.eat(b'-') {
                    Symmetry::Skew
                } else {
                    return Err(self.err("expected + or - after y/z"));
                };
                if self.group != &AbelianGroup::cyclic(2) {
                    return Err(FreeError::TaggedNeedsZ2);
                }
                let deg = if head == b'y' { 0 } else { 1 };
                (sym, false, Some(self.group.element(vec![deg]).expect("z2")))
            }
            _ => unreachable!(),
        };
        self.skip_ws();
        if !self.eat(b'[') {
            return Err(self.err("expected '['"));
        }
        let index = self.parse_int()?;
        if index < 1 {
            return Err(self.err("variable index must be >= 1"));
        }
        let degree = match fixed_degree {
            Some(d) => d,
            None => {
                let mut coords = Vec::new();
                self.skip_ws();
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    coords.push(self.parse_int()?);
                    self.skip_ws();
                }
                self.group.element(coords)?
            }
        };
        self.skip_ws();
        if !self.eat(b']') {
            return Err(self.err("expected ']'"));
        }
        let var = Variable {
            index: index as u32,
            degree,
            symmetry,
        };
        Ok(if starred {
            Polynomial::starred_var(var)
        } else {
            Polynomial::var(var)
        })
    }

    fn parse_commutator(&mut self) -> Result<Polynomial, FreeError> {
        assert!(self.eat(b'['));
        let mut parts = vec![self.parse_poly()?];
        self.skip_ws();
        while self.eat(b',') {
            parts.push(self.parse_poly()?);
            self.skip_ws();
        }
        if !self.eat(b']') {
            return Err(self.err("expected ']'"));
        }
        if parts.len() < 2 {
            return Err(self.err("commutator needs at least two entries"));
        }
        Ok(left_normed(&parts))
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> AbelianGroup {
        AbelianGroup::cyclic(2)
    }

    fn yplus(i: u32) -> Variable {
        Variable::tagged(i, z2().zero(), true)
    }

    fn yminus(i: u32) -> Variable {
        Variable::tagged(i, z2().zero(), false)
    }

    fn zplus(i: u32) -> Variable {
        Variable::tagged(i, z2().element(vec![1]).unwrap(), true)
    }

    #[test]
    fn star_reverses_and_signs() {
        // (y1+ y2-)* = -(y2- y1+)
        let p = Polynomial::var(yplus(1)).mul(&Polynomial::var(yminus(2)));
        let expected = Polynomial::var(yminus(2))
            .mul(&Polynomial::var(yplus(1)))
            .neg();
        assert_eq!(p.star(), expected);
        assert_eq!(p.star().star(), p);
    }

    #[test]
    fn star_is_an_anti_automorphism() {
        let g = AbelianGroup::free(1);
        let x1 = Variable::free(1, g.element(vec![1]).unwrap());
        let x2 = Variable::free(2, g.element(vec![2]).unwrap());
        let p =
            Polynomial::var(x1.clone()).add(&Polynomial::starred_var(x2.clone()).scale(&rat(3)));
        let q = commutator(&Polynomial::var(x2), &Polynomial::starred_var(x1));
        assert_eq!(p.mul(&q).star(), q.star().mul(&p.star()));
        assert_eq!(p.star().star(), p);
    }

    #[test]
    fn starred_tagged_is_a_sign() {
        assert_eq!(Polynomial::starred_var(yplus(1)), Polynomial::var(yplus(1)));
        assert_eq!(
            Polynomial::starred_var(yminus(1)),
            Polynomial::var(yminus(1)).neg()
        );
    }

    #[test]
    fn commutator_expands() {
        let a = Polynomial::var(yplus(1));
        let b = Polynomial::var(yminus(2));
        let c = commutator(&a, &b);
        assert_eq!(c.term_count(), 2);
        assert_eq!(c, a.mul(&b).sub(&b.mul(&a)));
        // [a, b, c] = [[a, b], c]
        let d = Polynomial::var(zplus(3));
        assert_eq!(
            left_normed(&[a.clone(), b.clone(), d.clone()]),
            commutator(&commutator(&a, &b), &d)
        );
    }

    #[test]
    fn multilinear_space_counts() {
        let g = AbelianGroup::free(1);
        let e1 = g.element(vec![1]).unwrap();
        // Two free variables: 2! orders x 2^2 star patterns.
        let space =
            multilinear_space(&[(e1.clone(), Symmetry::Free), (e1.clone(), Symmetry::Free)]);
        assert_eq!(space.len(), 8);
        // Three tagged variables: 3! orders, no stars.
        let z2g = z2();
        let zero = z2g.zero();
        let space = multilinear_space(&[
            (zero.clone(), Symmetry::Symmetric),
            (zero.clone(), Symmetry::Skew),
            (zero.clone(), Symmetry::Symmetric),
        ]);
        assert_eq!(space.len(), 6);
        // Mixed: one free, one tagged: 2! x 2.
        let space = multilinear_space(&[(e1, Symmetry::Free), (zero, Symmetry::Skew)]);
        assert_eq!(space.len(), 4);
        // Empty assignment: just the unit.
        assert_eq!(multilinear_space(&[]), vec![Monomial::one()]);
    }

    #[test]
    fn multilinearity_checks() {
        let p = Polynomial::var(yplus(1)).mul(&Polynomial::var(yminus(2)));
        assert!(p.is_multilinear().unwrap());
        let q = Polynomial::var(yplus(1)).mul(&Polynomial::var(yplus(1)));
        assert!(!q.is_multilinear().unwrap());
        // Same index with two declarations is rejected.
        let r = Polynomial::var(yplus(1)).mul(&Polynomial::var(yminus(1)));
        assert!(matches!(
            r.is_multilinear(),
            Err(FreeError::InconsistentIndex(1))
        ));
    }

    #[test]
    fn proper_basis_small() {
        let z2g = z2();
        let zero = z2g.zero();
        let one = z2g.element(vec![1]).unwrap();
        // A single symmetric even variable has no proper polynomials.
        let b = proper_basis(&[(zero.clone(), Symmetry::Symmetric)]).unwrap();
        assert!(b.is_empty());
        // A single skew even variable: just the word.
        let b = proper_basis(&[(zero.clone(), Symmetry::Skew)]).unwrap();
        assert_eq!(b, vec![Polynomial::var(yminus(1))]);
        // (y-, z+): word + two commutator orders.
        let b = proper_basis(&[
            (zero.clone(), Symmetry::Skew),
            (one.clone(), Symmetry::Symmetric),
        ])
        .unwrap();
        assert_eq!(b.len(), 3);
        // Empty assignment: the unit spans the degree-0 propers.
        let b = proper_basis(&[]).unwrap();
        assert_eq!(b, vec![Polynomial::one()]);
    }

    #[test]
    fn proper_membership() {
        assert!(!is_proper(&Polynomial::var(yplus(1))).unwrap());
        assert!(is_proper(&Polynomial::var(yminus(1))).unwrap());
        let c = commutator(&Polynomial::var(yplus(1)), &Polynomial::var(yminus(2)));
        assert!(is_proper(&c).unwrap());
        // y1+ y2- is not proper: its word part contains a symmetric even letter.
        let w = Polynomial::var(yplus(1)).mul(&Polynomial::var(yminus(2)));
        assert!(!is_proper(&w).unwrap());
        // ... but y1- z2+ is.
        let w = Polynomial::var(yminus(1)).mul(&Polynomial::var(zplus(2)));
        assert!(is_proper(&w).unwrap());
    }

    #[test]
    fn multilinearize_passthrough_and_square() {
        let p = Polynomial::var(yplus(1)).mul(&Polynomial::var(yminus(2)));
        assert_eq!(multilinearize(&p).unwrap(), p);

        // x1^2 linearizes to x1 x2 + x2 x1.
        let g = AbelianGroup::free(1);
        let x = Variable::free(1, g.element(vec![1]).unwrap());
        let sq = Polynomial::var(x.clone()).mul(&Polynomial::var(x.clone()));
        let lin = multilinearize(&sq).unwrap();
        let x1 = Variable::free(1, g.element(vec![1]).unwrap());
        let x2 = Variable::free(2, g.element(vec![1]).unwrap());
        let expected = Polynomial::var(x1.clone())
            .mul(&Polynomial::var(x2.clone()))
            .add(&Polynomial::var(x2).mul(&Polynomial::var(x1)));
        assert_eq!(lin, expected);
    }

    #[test]
    fn consequences_contain_renamings_and_borders() {
        let z2g = z2();
        let zero = z2g.zero();
        // Generator [s1, s2] (commuting symmetric evens), target (y+, y+, y+).
        let gen = commutator(&Polynomial::var(yplus(1)), &Polynomial::var(yplus(2)));
        let assignment = vec![
            (zero.clone(), Symmetry::Symmetric),
            (zero.clone(), Symmetry::Symmetric),
            (zero.clone(), Symmetry::Symmetric),
        ];
        let cons = multilinear_consequences(std::slice::from_ref(&gen), &assignment, &z2g).unwrap();
        assert!(!cons.is_empty());
        // Every consequence is multilinear in 1..3.
        for c in &cons {
            assert!(c.is_multilinear().unwrap());
            assert_eq!(c.variables().unwrap().len(), 3);
        }
        // The bordered renaming y3+ [y1+, y2+] must be present.
        let bordered = Polynomial::var(yplus(3)).mul(&commutator(
            &Polynomial::var(yplus(1)),
            &Polynomial::var(yplus(2)),
        ));
        assert!(cons.contains(&bordered));
        // The blocked substitution [y1+ y2+ + (y1+ y2+)^*, y3+] must be present
        // (two letters feeding one generator slot).
        let w = Polynomial::var(yplus(1)).mul(&Polynomial::var(yplus(2)));
        let img = w.add(&w.star());
        let blocked = commutator(&img, &Polynomial::var(yplus(3)));
        assert!(cons.contains(&blocked));
    }

    #[test]
    fn parse_round_trips() {
        let g = AbelianGroup::free(1);
        for text in [
            "x[1,1] x[2,1]",
            "x*[1,2]",
            "x[1,1] x[2,1] - x[2,1] x[1,1]",
            "1/2 x[1,0] - 3 x*[2,1]",
        ] {
            let p = parse_polynomial(text, &g).unwrap();
            let back = parse_polynomial(&p.to_string(), &g).unwrap();
            assert_eq!(p, back, "{text}");
        }
        let z2g = z2();
        for text in [
            "y+[1] y-[2]",
            "[z+[1], y-[2]]",
            "[y+[1], y-[2], z-[3]]",
            "s[1,0] k[2,1]",
        ] {
            let p = parse_polynomial(text, &z2g).unwrap();
            let back = parse_polynomial(&p.to_string(), &z2g).unwrap();
            assert_eq!(p, back, "{text}");
        }
    }

    #[test]
    fn parse_commutators_and_signs() {
        let z2g = z2();
        let p = parse_polynomial("[y+[1], y-[2]]", &z2g).unwrap();
        let expected = commutator(&Polynomial::var(yplus(1)), &Polynomial::var(yminus(2)));
        assert_eq!(p, expected);
        // y/z shorthand maps to s/k with degrees 0/1.
        let q = parse_polynomial("z-[1]", &z2g).unwrap();
        let k1 = Variable::tagged(1, z2g.element(vec![1]).unwrap(), false);
        assert_eq!(q, Polynomial::var(k1));
        // Stars on tagged shorthand are signs, spelled via the skew rule.
        let r = parse_polynomial("y-[1] - y-[1]", &z2g).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn parse_errors() {
        let g = AbelianGroup::free(1);
        assert!(parse_polynomial("x[0,1]", &g).is_err());
        assert!(parse_polynomial("x[1,1] +", &g).is_err());
        assert!(parse_polynomial("[x[1,1]]", &g).is_err());
        assert!(parse_polynomial("w[1]", &g).is_err());
        assert!(parse_polynomial("y+[1]", &g).is_err()); // needs Z_2
        assert!(parse_polynomial("x[1,1,1]", &g).is_err()); // wrong coord count
    }
}
