//! Command implementations. Every command produces one typed report
//! document plus human summary lines. Mathematical disagreements are never
//! errors: they land in the document's `discrepancies` array and drive exit
//! code 2, while the document itself is still emitted in full.

use serde::{Deserialize, Serialize};

use gradstar::abgroup::GroupElement;
use gradstar::eval::{self, BasisBlockReport, BlockReport, Counterexample, ExponentPoint};
use gradstar::goodmono::{self, CountRecord};
use gradstar::utalg::{find_finest_coarsening, finest_grading, AlgebraDescriptor};

use crate::config::{self, Format, Settings};
use crate::{good_err, sets, usage, CliError};

/// What a command hands back to the binary: the report, human summary
/// lines for stderr, and the exit code (0, or 2 on a discrepancy).
#[derive(Debug)]
pub struct Outcome {
    pub document: Document,
    pub summary: Vec<String>,
    pub exit: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRow {
    pub label: String,
    pub instances: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub set: String,
    pub identities: Vec<VerifyRow>,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodimRow {
    pub n: usize,
    #[serde(rename = "assignment-blocks")]
    pub blocks: Vec<BlockReport>,
    pub total: u64,
    pub method: String,
    #[serde(rename = "cross-method")]
    pub cross_method: String,
    #[serde(rename = "cross-total")]
    pub cross_total: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodimDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub rows: Vec<CodimRow>,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaRow {
    pub n: usize,
    pub oracle: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub rows: Vec<GammaRow>,
    pub method: String,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodcountDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub records: Vec<CountRecord>,
    pub total: u64,
    #[serde(rename = "closed-top")]
    pub closed_top: u64,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisRow {
    pub n: usize,
    pub verified: bool,
    #[serde(rename = "assignment-blocks")]
    pub blocks: Vec<BasisBlockReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub set: String,
    pub generators: usize,
    pub verified: bool,
    pub rows: Vec<BasisRow>,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    pub points: Vec<ExponentPoint>,
    #[serde(rename = "predicted-exponent")]
    pub predicted_exponent: u64,
    pub method: String,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarsenRow {
    pub n: usize,
    pub trivial: u64,
    pub coarsened: u64,
    pub finest: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarsenDoc {
    pub algebra: AlgebraDescriptor,
    pub command: String,
    #[serde(rename = "coarsening-images")]
    pub coarsening_images: Option<Vec<Vec<i64>>>,
    pub rows: Vec<CoarsenRow>,
    pub discrepancies: Vec<String>,
}

#[derive(Debug)]
pub enum Document {
    Verify(VerifyDoc),
    Codim(CodimDoc),
    Gamma(GammaDoc),
    Goodcount(GoodcountDoc),
    Basis(BasisDoc),
    Exponent(ExponentDoc),
    Coarsen(CoarsenDoc),
}

impl Document {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Pretty JSON with a trailing newline; field order is fixed by the
    /// struct declarations, so identical runs are byte-identical.
    pub fn to_json(&self) -> String {
        let text = match self {
            Document::Verify(d) => serde_json::to_string_pretty(d),
            Document::Codim(d) => serde_json::to_string_pretty(d),
            Document::Gamma(d) => serde_json::to_string_pretty(d),
            Document::Goodcount(d) => serde_json::to_string_pretty(d),
            Document::Basis(d) => serde_json::to_string_pretty(d),
            Document::Exponent(d) => serde_json::to_string_pretty(d),
            Document::Coarsen(d) => serde_json::to_string_pretty(d),
        };
        let mut text = text.expect("report serialization");
        text.push('\n');
        text
    }

    /// Flat table view. Lists inside a row (assignment blocks) are folded
    /// away or joined with `|`, so no field ever needs CSV quoting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Document::Verify(d) => {
                out.push_str("label,instances,holds\n");
                for r in &d.identities {
                    out.push_str(&format!("{},{},{}\n", r.label, r.instances, r.holds));
                }
            }
            Document::Codim(d) => {
                out.push_str("n,total,method,cross-method,cross-total\n");
                for r in &d.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.n, r.total, r.method, r.cross_method, r.cross_total
                    ));
                }
            }
            Document::Gamma(d) => {
                out.push_str("n,oracle,formula,agree\n");
                for r in &d.rows {
                    let formula = r.formula.map(|v| v.to_string()).unwrap_or_default();
                    let agree = r.agree.map(|v| v.to_string()).unwrap_or_default();
                    out.push_str(&format!("{},{},{},{}\n", r.n, r.oracle, formula, agree));
                }
            }
            Document::Goodcount(d) => {
                out.push_str("m,n,k,N_k,method\n");
                for r in &d.records {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.m, r.n, r.k, r.count, r.method
                    ));
                }
            }
            Document::Basis(d) => {
                out.push_str("n,degrees,space-dim,evaluation-rank,identity-dim,consequence-rank\n");
                for row in &d.rows {
                    for b in &row.blocks {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            row.n,
                            b.degrees.join("|"),
                            b.space_dim,
                            b.evaluation_rank,
                            b.identity_dim,
                            b.consequence_rank
                        ));
                    }
                }
            }
            Document::Exponent(d) => {
                out.push_str("n,codimension,root\n");
                for p in &d.points {
                    out.push_str(&format!("{},{},{}\n", p.n, p.codimension, p.root));
                }
            }
            Document::Coarsen(d) => {
                out.push_str("n,trivial,coarsened,finest\n");
                for r in &d.rows {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        r.n, r.trivial, r.coarsened, r.finest
                    ));
                }
            }
        }
        out
    }
}

fn need_n(settings: &Settings) -> Result<usize, CliError> {
    settings
        .cfg
        .n
        .ok_or_else(|| usage("--n is required for this command"))
}

fn exit_for(discrepancies: &[String], blocking: usize) -> i32 {
    debug_assert!(blocking <= discrepancies.len());
    if blocking == 0 {
        0
    } else {
        2
    }
}

fn describe(d: &AlgebraDescriptor) -> String {
    format!(
        "UT_{} over {} with the {} involution",
        d.m, d.group, d.involution
    )
}

/// The ut3-z2 algebra is the default subject for the commands that compare
/// against its closed formulas.
fn algebra_or_ut3(settings: &Settings) -> Result<gradstar::utalg::GradedStarAlgebra, CliError> {
    let cfg = &settings.cfg;
    if cfg.algebra.is_none() && cfg.group.is_none() && cfg.tuple.is_none() {
        Ok(sets::ut3_z2_algebra())
    } else {
        config::resolve_algebra(cfg)
    }
}

pub fn verify_identities(settings: &Settings) -> Result<Outcome, CliError> {
    let cfg = &settings.cfg;
    let name = cfg.set.as_deref().ok_or_else(|| {
        usage("--set is required; built-ins: finest-reflection, finest-symplectic, ut3-z2")
    })?;
    let set = sets::builtin_set(name, cfg.m)?;
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut summary = vec![format!(
        "verify-identities {name} on {}",
        describe(&set.algebra.descriptor())
    )];
    for family in &set.families {
        let mut holds = true;
        for (label, poly) in &family.instances {
            if !eval::is_identity_general(&set.algebra, poly)? {
                holds = false;
                discrepancies.push(format!("{label} is not an identity"));
            }
        }
        summary.push(format!(
            "  {} [{} instance{}]: {}",
            family.label,
            family.instances.len(),
            if family.instances.len() == 1 { "" } else { "s" },
            if holds { "pass" } else { "FAIL" }
        ));
        rows.push(VerifyRow {
            label: family.label.clone(),
            instances: family.instances.len(),
            holds,
        });
    }
    let exit = exit_for(&discrepancies, discrepancies.len());
    Ok(Outcome {
        document: Document::Verify(VerifyDoc {
            algebra: set.algebra.descriptor(),
            command: "verify-identities".into(),
            set: name.into(),
            identities: rows,
            discrepancies,
        }),
        summary,
        exit,
    })
}

pub fn codim(settings: &Settings) -> Result<Outcome, CliError> {
    let alg = config::resolve_algebra(&settings.cfg)?;
    let max_n = need_n(settings)?;
    let budget = &settings.budget;
    // Cross-check against the one genuinely independent method available:
    // the good-monomial enumerator where it applies, the tagged-alphabet
    // rank oracle everywhere else.
    let use_enumerator = alg.m() >= 2 && *alg.grading() == finest_grading(alg.m());
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut summary = vec![format!("codim on {}", describe(&alg.descriptor()))];
    for n in 0..=max_n {
        let report = eval::codimension(&alg, n, budget)?;
        let (cross_method, cross_total) = if use_enumerator {
            let enumeration = goodmono::enumerate_good(alg.m(), n, alg.involution().kind(), budget)
                .map_err(good_err)?;
            let method = enumeration
                .records
                .first()
                .map(|r| r.method.clone())
                .expect("records per k");
            (method, enumeration.total())
        } else {
            let tagged = eval::codimension_tagged(&alg, n, budget)?;
            (tagged.method, tagged.total)
        };
        if cross_total != report.total {
            discrepancies.push(format!(
                "n={n}: the rank oracle gives {} but {cross_method} gives {cross_total}",
                report.total
            ));
        }
        summary.push(format!("  c_{n} = {}", report.total));
        rows.push(CodimRow {
            n,
            blocks: report.blocks,
            total: report.total,
            method: report.method,
            cross_method,
            cross_total,
        });
    }
    let exit = exit_for(&discrepancies, discrepancies.len());
    Ok(Outcome {
        document: Document::Codim(CodimDoc {
            algebra: alg.descriptor(),
            command: "codim".into(),
            rows,
            discrepancies,
        }),
        summary,
        exit,
    })
}

/// Closed count the proper-codimension table is checked against on the
/// ut3-z2 algebra: 1 + n + n 2^n + C(n,2) 2^(n-2).
pub fn gamma_formula(n: usize) -> u64 {
    let quadratic = if n >= 2 {
        eval::binomial(n, 2) * (1u64 << (n - 2))
    } else {
        0
    };
    1 + n as u64 + (n as u64) * (1u64 << n) + quadratic
}

pub fn gamma(settings: &Settings) -> Result<Outcome, CliError> {
    let alg = algebra_or_ut3(settings)?;
    let max_n = need_n(settings)?;
    let expect_deviation = settings.cfg.expect_known_deviation.unwrap_or(false);
    let compare = alg.descriptor() == sets::ut3_z2_algebra().descriptor();
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut blocking = 0;
    let mut summary = vec![format!("gamma on {}", describe(&alg.descriptor()))];
    let mut method = String::new();
    for n in 0..=max_n {
        let report = eval::proper_codimension(&alg, n, &settings.budget)?;
        method = report.method.clone();
        let oracle = report.total;
        let (formula, agree) = if compare {
            let value = gamma_formula(n);
            (Some(value), Some(value == oracle))
        } else {
            (None, None)
        };
        match (formula, agree) {
            (Some(value), Some(false)) => {
                // The single documented deviation can be excused by flag;
                // everything else blocks.
                let excused = expect_deviation && n == 1 && oracle == 3 && value == 4;
                let note = if excused { " (expected deviation)" } else { "" };
                discrepancies.push(format!(
                    "n={n}: proper codimension {oracle} but the closed formula gives {value}{note}"
                ));
                if !excused {
                    blocking += 1;
                }
                summary.push(format!(
                    "  gamma_{n} = {oracle}, formula {value}: MISMATCH{note}"
                ));
            }
            (Some(value), _) => {
                summary.push(format!("  gamma_{n} = {oracle}, formula {value}: agree"));
            }
            _ => summary.push(format!("  gamma_{n} = {oracle}")),
        }
        rows.push(GammaRow {
            n,
            oracle,
            formula,
            agree,
        });
    }
    let exit = exit_for(&discrepancies, blocking);
    Ok(Outcome {
        document: Document::Gamma(GammaDoc {
            algebra: alg.descriptor(),
            command: "gamma".into(),
            rows,
            method,
            discrepancies,
        }),
        summary,
        exit,
    })
}

pub fn goodcount(settings: &Settings) -> Result<Outcome, CliError> {
    let cfg = &settings.cfg;
    let m = cfg
        .m
        .ok_or_else(|| usage("--m is required for goodcount"))?;
    let kind = config::inv_kind(cfg)?;
    let n = need_n(settings)?;
    let algebra = sets::finest_algebra(m, kind)?;
    let enumeration = goodmono::enumerate_good(m, n, kind, &settings.budget).map_err(good_err)?;
    let closed_top = goodmono::closed_count_top(m, n);
    let top = enumeration
        .records
        .iter()
        .find(|r| r.k == m - 1)
        .map(|r| r.count)
        .unwrap_or(0);
    let total = enumeration.total();
    let mut discrepancies = Vec::new();
    if closed_top != top {
        discrepancies.push(format!(
            "the closed-form count for the top layer k={} gives {closed_top}, the enumerator gives {top}",
            m - 1
        ));
    }
    let mut summary = vec![format!("goodcount on {}", describe(&algebra.descriptor()))];
    for r in &enumeration.records {
        summary.push(format!("  k={}: {}", r.k, r.count));
    }
    summary.push(format!(
        "  total {total}, closed-form top layer {closed_top}"
    ));
    let exit = exit_for(&discrepancies, discrepancies.len());
    Ok(Outcome {
        document: Document::Goodcount(GoodcountDoc {
            algebra: algebra.descriptor(),
            command: "goodcount".into(),
            records: enumeration.records,
            total,
            closed_top,
            discrepancies,
        }),
        summary,
        exit,
    })
}

pub fn basis_check(settings: &Settings) -> Result<Outcome, CliError> {
    let cfg = &settings.cfg;
    let name = cfg.set.as_deref().ok_or_else(|| {
        usage("--set is required; built-ins: finest-reflection, finest-symplectic, ut3-z2")
    })?;
    let set = sets::builtin_set(name, cfg.m)?;
    let generators = sets::basis_generators(&set)?;
    let max_n = need_n(settings)?;
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut summary = vec![format!(
        "basis-check {name} ({} generators) on {}",
        generators.len(),
        describe(&set.algebra.descriptor())
    )];
    for n in 1..=max_n {
        let report = eval::basis_certificate(&set.algebra, &generators, n, &settings.budget)?;
        if let Some(ce) = &report.counterexample {
            discrepancies.push(format!("n={n}: {} ({})", ce.reason, ce.polynomial));
        } else if !report.verified {
            discrepancies.push(format!("n={n}: not verified"));
        }
        summary.push(format!(
            "  n={n}: {}",
            if report.verified {
                "verified"
            } else {
                "NOT VERIFIED"
            }
        ));
        rows.push(BasisRow {
            n,
            verified: report.verified,
            blocks: report.blocks,
            counterexample: report.counterexample,
        });
    }
    let verified = rows.iter().all(|r| r.verified);
    let exit = exit_for(&discrepancies, discrepancies.len());
    Ok(Outcome {
        document: Document::Basis(BasisDoc {
            algebra: set.algebra.descriptor(),
            command: "basis-check".into(),
            set: name.into(),
            generators: generators.len(),
            verified,
            rows,
            discrepancies,
        }),
        summary,
        exit,
    })
}

pub fn exponent(settings: &Settings) -> Result<Outcome, CliError> {
    let alg = config::resolve_algebra(&settings.cfg)?;
    let max_n = need_n(settings)?;
    let report = eval::exponent_estimate(&alg, max_n, &settings.budget)?;
    let mut summary = vec![format!("exponent on {}", describe(&report.algebra))];
    for p in &report.points {
        summary.push(format!("  c_{} = {}, root {}", p.n, p.codimension, p.root));
    }
    summary.push(format!(
        "  predicted exponent {}",
        report.predicted_exponent
    ));
    Ok(Outcome {
        document: Document::Exponent(ExponentDoc {
            algebra: report.algebra,
            command: "exponent".into(),
            points: report.points,
            predicted_exponent: report.predicted_exponent,
            method: report.method,
            discrepancies: Vec::new(),
        }),
        summary,
        exit: 0,
    })
}

pub fn coarsen_check(settings: &Settings) -> Result<Outcome, CliError> {
    let alg = algebra_or_ut3(settings)?;
    let max_n = need_n(settings)?;
    let budget = &settings.budget;
    let m = alg.m();
    let kind = alg.involution().kind();
    let mut discrepancies = Vec::new();

    // Witness that the grading is a coarsening of the finest one, reported
    // as the images of the finest grading group's generators.
    let hom = find_finest_coarsening(alg.grading());
    let coarsening_images = match &hom {
        Some(hom) => {
            let fine_group = finest_grading(m).group().clone();
            let images: Result<Vec<Vec<i64>>, _> = (0..fine_group.factor_count())
                .map(|i| {
                    let mut coords = vec![0i64; fine_group.factor_count()];
                    coords[i] = 1;
                    let generator = fine_group.element(coords).expect("generator");
                    hom.apply(&generator)
                        .map(|g: GroupElement| g.coords().to_vec())
                })
                .collect();
            Some(images.map_err(|e| usage(e.to_string()))?)
        }
        None => {
            discrepancies.push("no homomorphism maps the finest grading onto this one".to_string());
            None
        }
    };

    let finest = sets::finest_algebra(m, kind)?;
    let trivial = sets::trivial_algebra(m, kind)?;
    let mut rows = Vec::new();
    let mut summary = vec![format!("coarsen-check on {}", describe(&alg.descriptor()))];
    for n in 0..=max_n {
        let t = eval::codimension(&trivial, n, budget)?.total;
        let c = eval::codimension(&alg, n, budget)?.total;
        let f = eval::codimension(&finest, n, budget)?.total;
        if !(t <= c && c <= f) {
            discrepancies.push(format!(
                "n={n}: codimension sandwich violated: trivial {t}, coarsened {c}, finest {f}"
            ));
        }
        summary.push(format!(
            "  n={n}: trivial {t} <= coarsened {c} <= finest {f}"
        ));
        rows.push(CoarsenRow {
            n,
            trivial: t,
            coarsened: c,
            finest: f,
        });
    }
    let exit = exit_for(&discrepancies, discrepancies.len());
    Ok(Outcome {
        document: Document::Coarsen(CoarsenDoc {
            algebra: alg.descriptor(),
            command: "coarsen-check".into(),
            coarsening_images,
            rows,
            discrepancies,
        }),
        summary,
        exit,
    })
}
