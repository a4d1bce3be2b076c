//! Campaign configuration: one JSON document whose keys mirror the command
//! line flags. Explicit flags override file values, and the GRADSTAR_BUDGET
//! environment variable supplies the evaluation budget when neither does.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gradstar::abgroup::AbelianGroup;
use gradstar::eval::Budget;
use gradstar::utalg::{ElementaryGrading, GradedStarAlgebra, InvKind, Involution};

use crate::{sets, usage, CliError};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CampaignConfig {
    /// Command to run when none is given on the command line.
    pub command: Option<String>,
    /// Built-in algebra name: finest | trivial | ut3-z2.
    pub algebra: Option<String>,
    /// Built-in identity set name.
    pub set: Option<String>,
    /// Matrix size.
    pub m: Option<usize>,
    /// Involution kind: reflection | symplectic.
    pub inv: Option<String>,
    /// Grading group of a custom algebra, e.g. "Z^2" or "Z_2".
    pub group: Option<String>,
    /// Grading tuple of a custom algebra, one coordinate row per position.
    pub tuple: Option<Vec<Vec<i64>>>,
    /// Largest degree to compute.
    pub n: Option<usize>,
    /// Largest rows x cols evaluation block the run may build.
    pub budget: Option<u64>,
    /// Worker pool size; 0 picks one worker per core.
    pub threads: Option<usize>,
    /// Report format: json | csv.
    pub format: Option<String>,
    /// Report destination; stdout when absent.
    pub out: Option<PathBuf>,
    /// Keep exit code 0 when the only gamma disagreement is the documented
    /// n=1 row.
    pub expect_known_deviation: Option<bool>,
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("cannot parse config {}: {e}", path.display())))
    }

    /// Field-wise merge in which values set in `flags` win.
    pub fn overridden_by(self, flags: CampaignConfig) -> CampaignConfig {
        CampaignConfig {
            command: flags.command.or(self.command),
            algebra: flags.algebra.or(self.algebra),
            set: flags.set.or(self.set),
            m: flags.m.or(self.m),
            inv: flags.inv.or(self.inv),
            group: flags.group.or(self.group),
            tuple: flags.tuple.or(self.tuple),
            n: flags.n.or(self.n),
            budget: flags.budget.or(self.budget),
            threads: flags.threads.or(self.threads),
            format: flags.format.or(self.format),
            out: flags.out.or(self.out),
            expect_known_deviation: flags.expect_known_deviation.or(self.expect_known_deviation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn parse(text: &str) -> Result<Format, CliError> {
        match text {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(usage(format!("unknown format {other:?}; use json or csv"))),
        }
    }
}

/// Configuration after merging the file, the flags and the environment.
#[derive(Debug, Clone)]
pub struct Settings {
    pub cfg: CampaignConfig,
    pub budget: Budget,
    pub format: Format,
}

pub fn resolve(cfg: CampaignConfig, env_budget: Option<&str>) -> Result<Settings, CliError> {
    let budget = match (cfg.budget, env_budget) {
        (Some(cells), _) => Budget { max_cells: cells },
        (None, Some(text)) => Budget {
            max_cells: text.trim().parse().map_err(|_| {
                usage(format!(
                    "GRADSTAR_BUDGET must be an integer cell count, got {text:?}"
                ))
            })?,
        },
        (None, None) => Budget::default(),
    };
    let format = match cfg.format.as_deref() {
        None => Format::Json,
        Some(text) => Format::parse(text)?,
    };
    Ok(Settings {
        cfg,
        budget,
        format,
    })
}

pub fn inv_kind(cfg: &CampaignConfig) -> Result<InvKind, CliError> {
    match cfg.inv.as_deref() {
        None => Ok(InvKind::Reflection),
        Some(text) => text
            .parse()
            .map_err(|e: gradstar::utalg::UtError| usage(e.to_string())),
    }
}

/// Builds the algebra a command operates on. --group/--tuple describe a
/// custom elementary grading; otherwise --algebra names a built-in.
pub fn resolve_algebra(cfg: &CampaignConfig) -> Result<GradedStarAlgebra, CliError> {
    let kind = inv_kind(cfg)?;
    if cfg.group.is_some() || cfg.tuple.is_some() {
        let (Some(group_text), Some(tuple)) = (&cfg.group, &cfg.tuple) else {
            return Err(usage("--group and --tuple must be given together"));
        };
        let group = AbelianGroup::parse(group_text).map_err(|e| usage(e.to_string()))?;
        let elements = tuple
            .iter()
            .map(|coords| group.element(coords.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?;
        let grading = ElementaryGrading::new(group, elements).map_err(|e| usage(e.to_string()))?;
        if let Some(m) = cfg.m {
            if m != grading.m() {
                return Err(usage(format!(
                    "--m {m} contradicts the tuple length {}",
                    grading.m()
                )));
            }
        }
        let inv = Involution::new(kind, grading.m()).map_err(|e| usage(e.to_string()))?;
        return GradedStarAlgebra::new(grading, inv).map_err(|e| usage(e.to_string()));
    }
    match cfg.algebra.as_deref() {
        Some("finest") => sets::finest_algebra(need_m(cfg)?, kind),
        Some("trivial") => sets::trivial_algebra(need_m(cfg)?, kind),
        Some("ut3-z2") => {
            if kind != InvKind::Reflection {
                return Err(usage(
                    "the ut3-z2 algebra carries the reflection involution",
                ));
            }
            if let Some(m) = cfg.m {
                if m != 3 {
                    return Err(usage(format!(
                        "--m {m} contradicts the ut3-z2 algebra, which lives on UT_3"
                    )));
                }
            }
            Ok(sets::ut3_z2_algebra())
        }
        Some(other) => Err(usage(format!(
            "unknown algebra {other:?}; built-ins: finest, trivial, ut3-z2 (or --group/--tuple)"
        ))),
        None => Err(usage("no algebra given; use --algebra or --group/--tuple")),
    }
}

fn need_m(cfg: &CampaignConfig) -> Result<usize, CliError> {
    cfg.m
        .ok_or_else(|| usage("--m is required for this algebra"))
}
