//! Acceptance gate. Every test prints one `criterion N: PASS/FAIL` line
//! (run with `-- --nocapture` to see the lines of passing tests too).
//!
//! Criteria 5, 8 and 9 are split: the parts that hold are asserted in their
//! own tests, and the parts where the implemented mathematics demonstrably
//! diverges from the advertised closed forms are asserted faithfully, so
//! those tests fail by design rather than paper over the divergence. The
//! divergences themselves are frozen in `criterion 5/8/9` FAIL lines and in
//! the README.

use gradstar::abgroup::AbelianGroup;
use gradstar::eval::{
    self, basis_certificate, binomial, codim_gamma_relation, codimension, exponent_estimate,
    proper_codimension, unique_substitution, Budget,
};
use gradstar::freealg::{multilinear_space, Polynomial, Symmetry};
use gradstar::goodmono::{closed_count_top, enumerate_good};
use gradstar::utalg::{degree_uniqueness_check, find_finest_coarsening, InvKind};
use gradstar_cli::sets::{basis_generators, builtin_set, trivial_algebra, ut3_z2_algebra};
use std::process::Command;

fn report(criterion: &str, pass: bool, details: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} ({details})");
    pass
}

fn codim_table(alg: &gradstar::utalg::GradedStarAlgebra, up_to: usize) -> Vec<u64> {
    let budget = Budget::default();
    (0..=up_to)
        .map(|n| codimension(alg, n, &budget).unwrap().total)
        .collect()
}

#[test]
fn criterion_01_identity_suite() {
    let mut checked = 0usize;
    let mut failures: Vec<String> = Vec::new();
    let mut run_set = |name: &str, m: Option<usize>| {
        let set = builtin_set(name, m).unwrap();
        for family in &set.families {
            for (label, p) in &family.instances {
                checked += 1;
                if !eval::is_identity_general(&set.algebra, p).unwrap() {
                    failures.push(format!("{name} m={m:?}: {label}"));
                }
            }
        }
    };
    for m in [2, 3, 4, 5] {
        run_set("finest-reflection", Some(m));
    }
    for m in [2, 4] {
        run_set("finest-symplectic", Some(m));
    }
    run_set("ut3-z2", None);
    let pass = failures.is_empty();
    assert!(
        report(
            "1",
            pass,
            &format!("{checked} identity instances verified; failures: {failures:?}")
        ),
        "{failures:?}"
    );
}

#[test]
fn criterion_02_degree_uniqueness() {
    let bad: Vec<usize> = (1..=8).filter(|&m| !degree_uniqueness_check(m)).collect();
    let pass = bad.is_empty();
    assert!(report(
        "2",
        pass,
        &format!("degree words determine cells for m = 1..=8; bad: {bad:?}")
    ));
}

#[test]
fn criterion_03_unique_substitution() {
    // Every non-identity multilinear monomial in non-neutral letters of
    // length 2..=m-1 must evaluate to nonzero on exactly one tuple of
    // matrix units (m = 2 has no such lengths).
    let mut checked = 0usize;
    let mut violations: Vec<String> = Vec::new();
    for m in [2usize, 3, 4] {
        let set = builtin_set("finest-reflection", Some(m)).unwrap();
        let alg = &set.algebra;
        let degrees = alg.grading().support_nonneutral();
        for k in 2..m {
            let mut stack = vec![Vec::new()];
            while let Some(prefix) = stack.pop() {
                if prefix.len() == k {
                    let assignment: Vec<_> = prefix
                        .iter()
                        .map(|g: &gradstar::abgroup::GroupElement| (g.clone(), Symmetry::Free))
                        .collect();
                    for mono in multilinear_space(&assignment) {
                        checked += 1;
                        let p = Polynomial::from_monomial(mono.clone());
                        let vanishes = eval::is_identity(alg, &p).unwrap();
                        match unique_substitution(alg, &mono) {
                            Ok(None) => {
                                if !vanishes {
                                    violations.push(format!("m={m} {mono}: zero but not identity"));
                                }
                            }
                            Ok(Some(_)) => {
                                if vanishes {
                                    violations.push(format!("m={m} {mono}: identity yet nonzero"));
                                }
                            }
                            Err(e) => violations.push(format!("m={m} {mono}: {e}")),
                        }
                    }
                    continue;
                }
                for g in &degrees {
                    let mut next = prefix.clone();
                    next.push(g.clone());
                    stack.push(next);
                }
            }
        }
    }
    let pass = violations.is_empty();
    assert!(
        report(
            "3",
            pass,
            &format!(
                "{checked} monomials, one elementary substitution each; violations: {violations:?}"
            )
        ),
        "{violations:?}"
    );
}

#[test]
fn criterion_04_codimension_agreement() {
    let budget = Budget::default();
    let mut failures: Vec<String> = Vec::new();
    let mut points = 0usize;
    for (m, up_to) in [(2usize, 5usize), (3, 4)] {
        let set = builtin_set("finest-reflection", Some(m)).unwrap();
        for n in 0..=up_to {
            points += 1;
            let c = codimension(&set.algebra, n, &budget).unwrap().total;
            let good = enumerate_good(m, n, InvKind::Reflection, &budget)
                .unwrap()
                .total();
            if c != good {
                failures.push(format!("m={m} n={n}: rank {c} vs enumeration {good}"));
            }
            if m == 2 && n == 2 && c != 8 {
                failures.push(format!("c_2(UT_2) = {c}, expected 8"));
            }
        }
    }
    let pass = failures.is_empty();
    assert!(
        report(
            "4",
            pass,
            &format!("{points} (m,n) points, rank oracle = enumerator; {failures:?}")
        ),
        "{failures:?}"
    );
}

#[test]
fn criterion_05a_closed_form_top_count_m2() {
    let budget = Budget::default();
    let mut failures: Vec<String> = Vec::new();
    for n in 1..=6 {
        let formula = closed_count_top(2, n);
        let enumerated = enumerate_good(2, n, InvKind::Reflection, &budget)
            .unwrap()
            .records
            .iter()
            .find(|r| r.k == 1)
            .map_or(0, |r| r.count);
        if formula != enumerated {
            failures.push(format!(
                "n={n}: formula {formula} vs enumeration {enumerated}"
            ));
        }
    }
    let pass = failures.is_empty();
    assert!(
        report(
            "5",
            pass,
            &format!("m=2 top-layer closed form matches for n = 1..=6; {failures:?}")
        ),
        "{failures:?}"
    );
}

#[test]
fn criterion_05b_closed_form_top_count_m3_m4() {
    // The closed-form top-layer count disagrees with the faithful
    // enumeration for m >= 3 (it overcounts by a factor of 2 at the first
    // admissible length already), so this half of the criterion fails.
    let budget = Budget::default();
    let mut divergences: Vec<String> = Vec::new();
    for m in [3usize, 4] {
        for n in (m - 1)..=6 {
            let formula = closed_count_top(m, n);
            let enumerated = enumerate_good(m, n, InvKind::Reflection, &budget)
                .unwrap()
                .records
                .iter()
                .find(|r| r.k == m - 1)
                .map_or(0, |r| r.count);
            if formula != enumerated {
                divergences.push(format!(
                    "m={m} n={n}: formula {formula} vs enumeration {enumerated}"
                ));
                break; // first divergence per m settles it
            }
        }
    }
    let pass = divergences.is_empty();
    assert!(
        report(
            "5",
            pass,
            &format!("m=3,4 top-layer closed form: {divergences:?}")
        ),
        "{divergences:?}"
    );
}

#[test]
fn criterion_06_basis_certificates() {
    let budget = Budget::default();
    let mut failures: Vec<String> = Vec::new();
    for (name, m) in [("finest-reflection", Some(3)), ("ut3-z2", None)] {
        let set = builtin_set(name, m).unwrap();
        let gens = basis_generators(&set).unwrap();
        for n in 1..=3 {
            let cert = basis_certificate(&set.algebra, &gens, n, &budget).unwrap();
            if !cert.verified {
                failures.push(format!("{name} n={n}: {:?}", cert.counterexample));
            }
        }
    }
    let pass = failures.is_empty();
    assert!(
        report(
            "6",
            pass,
            &format!("generating sets span every identity up to n = 3; {failures:?}")
        ),
        "{failures:?}"
    );
}

#[test]
#[ignore = "stretch: n = 4 certificate needs a raised budget (about 15 s)"]
fn criterion_06_stretch_basis_certificate_n4() {
    let budget = Budget {
        max_cells: 500_000_000,
    };
    let set = builtin_set("ut3-z2", None).unwrap();
    let gens = basis_generators(&set).unwrap();
    let cert = basis_certificate(&set.algebra, &gens, 4, &budget).unwrap();
    assert!(
        report(
            "6 (stretch)",
            cert.verified,
            &format!("n = 4: {:?}", cert.counterexample)
        ),
        "{:?}",
        cert.counterexample
    );
}

#[test]
fn criterion_07_gamma_relation() {
    let alg = ut3_z2_algebra();
    let budget = Budget::default();
    let c = codim_table(&alg, 3);
    let gamma: Vec<u64> = (0..=3)
        .map(|n| proper_codimension(&alg, n, &budget).unwrap().total)
        .collect();
    let mut ok = codim_gamma_relation(&c, &gamma);
    for (n, &cn) in c.iter().enumerate() {
        let sum: u64 = (0..=n).map(|i| binomial(n, i) * gamma[i]).sum();
        ok &= sum == cn;
    }
    assert!(report(
        "7",
        ok,
        &format!("c = {c:?} equals the binomial transform of gamma = {gamma:?} up to n = 3")
    ));
}

#[test]
fn criterion_08a_gamma_formula_known_deviation_at_n1() {
    // gamma_1: oracle 3 vs formula 4. The discrepancy exit is suppressed
    // only by the explicit opt-in flag.
    let alg = ut3_z2_algebra();
    let budget = Budget::default();
    let oracle = proper_codimension(&alg, 1, &budget).unwrap().total;
    let formula = 1 + 1 + 2u64.pow(1); // 1 + n + n 2^n at n = 1
    let values_ok = oracle == 3 && formula == 4;

    let strict = Command::new(env!("CARGO_BIN_EXE_gradstar"))
        .args(["gamma", "--n", "1"])
        .output()
        .unwrap();
    let excused = Command::new(env!("CARGO_BIN_EXE_gradstar"))
        .args(["gamma", "--n", "1", "--expect-known-deviation"])
        .output()
        .unwrap();
    let exits_ok = strict.status.code() == Some(2) && excused.status.code() == Some(0);

    assert!(report(
        "8",
        values_ok && exits_ok,
        &format!(
            "n=1 deviation documented: oracle {oracle} vs formula {formula}; strict exit {:?}, excused exit {:?}",
            strict.status.code(),
            excused.status.code()
        )
    ));
}

#[test]
fn criterion_08b_gamma_formula_agreement_for_larger_n() {
    // The advertised closed form 1 + n + n 2^n + C(n,2) 2^(n-2) does not
    // reproduce the proper-codimension oracle at n = 2 or n = 3, so the
    // "agreement for n >= 2" half of the criterion fails faithfully.
    let alg = ut3_z2_algebra();
    let budget = Budget::default();
    let mut divergences: Vec<String> = Vec::new();
    for n in 2..=3usize {
        let oracle = proper_codimension(&alg, n, &budget).unwrap().total;
        let formula =
            1 + n as u64 + n as u64 * 2u64.pow(n as u32) + binomial(n, 2) * 2u64.pow(n as u32 - 2);
        if oracle != formula {
            divergences.push(format!("n={n}: oracle {oracle} vs formula {formula}"));
        }
    }
    let pass = divergences.is_empty();
    assert!(
        report(
            "8",
            pass,
            &format!("gamma formula for n = 2, 3: {divergences:?}")
        ),
        "{divergences:?}"
    );
}

#[test]
fn criterion_09a_exponent_lower_bound_and_roots() {
    let alg = ut3_z2_algebra();
    let c = codim_table(&alg, 4);
    let mut failures: Vec<String> = Vec::new();
    for (n, &cn) in c.iter().enumerate() {
        if cn < 3u64.pow(n as u32) {
            failures.push(format!("n={n}: c_n = {cn} < 3^{n}"));
        }
    }
    // Roots are reported, not asserted: they approach the predicted
    // exponent from above rather than increasing toward it.
    let budget = Budget::default();
    let rep = exponent_estimate(&alg, 4, &budget).unwrap();
    let roots: Vec<String> = rep
        .points
        .iter()
        .map(|p| format!("c_{}^(1/{}) = {}", p.n, p.n, p.root))
        .collect();
    let fine2 = builtin_set("finest-reflection", Some(2)).unwrap().algebra;
    let fine3 = builtin_set("finest-reflection", Some(3)).unwrap().algebra;
    let predictions = (
        rep.predicted_exponent,
        exponent_estimate(&fine2, 2, &budget)
            .unwrap()
            .predicted_exponent,
        exponent_estimate(&fine3, 2, &budget)
            .unwrap()
            .predicted_exponent,
    );
    let pass = failures.is_empty() && predictions == (3, 2, 4);
    assert!(
        report(
            "9",
            pass,
            &format!("3^n lower bound holds for n <= 4; roots reported: {roots:?}; predicted exponents (ut3-z2, finest UT_2, finest UT_3) = {predictions:?}")
        ),
        "{failures:?} {predictions:?}"
    );
}

#[test]
fn criterion_09b_exponent_upper_bound() {
    // The advertised bound c_n <= (n + 1 + C(n,2)/4) 3^n fails from n = 3
    // on; asserted faithfully in exact integer arithmetic (both sides
    // scaled by 4).
    let alg = ut3_z2_algebra();
    let c = codim_table(&alg, 4);
    let mut failures: Vec<String> = Vec::new();
    for (n, &cn) in c.iter().enumerate() {
        let bound4 = (4 * (n as u64 + 1) + binomial(n, 2)) * 3u64.pow(n as u32);
        if 4 * cn > bound4 {
            failures.push(format!("n={n}: 4 c_n = {} > {bound4}", 4 * cn));
        }
    }
    let pass = failures.is_empty();
    assert!(
        report(
            "9",
            pass,
            &format!("(n + 1 + C(n,2)/4) 3^n upper bound: {failures:?}")
        ),
        "{failures:?}"
    );
}

#[test]
fn criterion_10_coarsening_monotonicity() {
    let coarse = ut3_z2_algebra();
    let hom = find_finest_coarsening(coarse.grading()).expect("Z surjects onto Z_2");
    let hom_ok = hom.source() == &AbelianGroup::free(1) && hom.target() == &AbelianGroup::cyclic(2);

    let trivial = trivial_algebra(3, InvKind::Reflection).unwrap();
    let finest = builtin_set("finest-reflection", Some(3)).unwrap().algebra;
    let t = codim_table(&trivial, 3);
    let c = codim_table(&coarse, 3);
    let f = codim_table(&finest, 3);
    let sandwich = (0..=3).all(|n| t[n] <= c[n] && c[n] <= f[n]);
    assert!(report(
        "10",
        hom_ok && sandwich,
        &format!("trivial {t:?} <= coarsened {c:?} <= finest {f:?} for n <= 3, surjection found: {hom_ok}")
    ));
}
