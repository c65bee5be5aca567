//! End-to-end verification of an instance record, and parameter sweeps.

use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::family::{
    is_irreducible, legal_pairs, DivisorInstance, FamilyError, FamilyParams, InstanceRecord, InstanceSampler,
    SampleMode, ValidationReport,
};
use crate::field::Field;
use crate::oracle::{self, PointSupportReport, ResolutionReport};
use crate::poly::Poly;
use crate::saito::{self, RouteChoice, SaitoReport};

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub route: RouteChoice,
    /// Overrides the default oracle bounds (3v + 3 and 3v + 2).
    pub degree_bound: Option<u32>,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteAgreement {
    pub oracle_pass: bool,
    pub columns_in_oracle_span: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub saito_ms: u128,
    pub oracle_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub instance: InstanceRecord,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub validation: ValidationReport,
    pub irreducible: Option<bool>,
    pub saito: Option<SaitoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route_agreement: Option<RouteAgreement>,
    pub resolution: ResolutionReport,
    pub point_support: PointSupportReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

fn unchecked_instance(params: FamilyParams, f: Poly) -> DivisorInstance {
    let jacobian = f.gradient();
    DivisorInstance { params, f, jacobian }
}

/// Runs every check on a recorded instance. The recorded F is the polynomial
/// under test; the Saito matrix comes from the recorded F1, F2.
pub fn verify_record(rec: &InstanceRecord, opts: VerifyOptions) -> Result<VerificationReport, FamilyError> {
    let params = rec.params()?;
    let f = rec.polynomial()?;
    let v = params.v();
    let mut checks = Vec::new();

    let validation = params.validate();
    checks.push(Check {
        name: "validation",
        pass: validation.pass,
        detail: validation.failures().join(", "),
    });
    let formula = params.assemble();
    checks.push(Check {
        name: "family_formula",
        pass: formula == f,
        detail: String::new(),
    });
    let irreducible = is_irreducible(&f).ok();
    checks.push(Check {
        name: "irreducible",
        pass: irreducible == Some(true),
        detail: match irreducible {
            None => "undecided".into(),
            _ => String::new(),
        },
    });

    let t0 = Instant::now();
    let from_formula = unchecked_instance(params.clone(), formula);
    let given = unchecked_instance(params.clone(), f.clone());
    let built = match opts.route {
        RouteChoice::Oracle => saito::build_saito_matrix(&given, RouteChoice::Oracle),
        r => saito::build_saito_matrix(&from_formula, r),
    };
    let (saito_report, construction_error, agreement) = match &built {
        Ok(sm) => {
            let rep = saito::saito_report(&from_formula, sm, &f);
            let agreement = (params.is_odd() && sm.route != saito::Route::Oracle).then(|| {
                let oracle_pass = saito::build_saito_matrix(&given, RouteChoice::Oracle)
                    .map(|om| saito::saito_report(&given, &om, &f).pass)
                    .unwrap_or(false);
                RouteAgreement {
                    oracle_pass,
                    columns_in_oracle_span: saito::oracle_agreement(&given, sm),
                }
            });
            (Some(rep), None, agreement)
        }
        Err(e) => (None, Some(e.to_string()), None),
    };
    checks.push(Check {
        name: "saito",
        pass: saito_report.as_ref().is_some_and(|r| r.pass),
        detail: construction_error.clone().unwrap_or_default(),
    });
    if let Some(a) = &agreement {
        checks.push(Check {
            name: "route_agreement",
            pass: a.oracle_pass && a.columns_in_oracle_span,
            detail: String::new(),
        });
    }
    let saito_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let resolution = oracle::resolution_check(&f, params.d, opts.degree_bound.unwrap_or(3 * v + 3));
    checks.push(Check {
        name: "resolution",
        pass: resolution.pass,
        detail: resolution
            .first_mismatch
            .map(|t| format!("first mismatch at t = {t}"))
            .unwrap_or_default(),
    });
    let point_support = oracle::point_support_check(&f, opts.degree_bound.unwrap_or(3 * v + 2));
    checks.push(Check {
        name: "point_support",
        pass: point_support.certified(),
        detail: String::new(),
    });
    let oracle_ms = t1.elapsed().as_millis();

    Ok(VerificationReport {
        instance: rec.clone(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        validation,
        irreducible,
        saito: saito_report,
        construction_error,
        route_agreement: agreement,
        resolution,
        point_support,
        timings: opts.timings.then_some(Timings { saito_ms, oracle_ms }),
    })
}

/// Normalized Saito matrix (det = F) built from the recorded F1, F2, if the
/// construction succeeds.
pub fn record_saito_rows(rec: &InstanceRecord, route: RouteChoice) -> Result<Option<[[Poly; 3]; 3]>, FamilyError> {
    let params = rec.params()?;
    let inst = match route {
        RouteChoice::Oracle => unchecked_instance(params, rec.polynomial()?),
        _ => {
            let f = params.assemble();
            unchecked_instance(params, f)
        }
    };
    Ok(saito::build_saito_matrix(&inst, route).ok().map(|sm| sm.normalized_rows()))
}

/// Per-instance seed derived from the run seed and the instance coordinates.
pub fn instance_seed(seed: u64, d: u32, alpha: u32, beta: u32, trial: u32) -> u64 {
    let mut h = seed;
    for x in [d as u64, alpha as u64, beta as u64, trial as u64] {
        h = splitmix64(h ^ x.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub d: RangeInclusive<u32>,
    pub alpha: Option<RangeInclusive<u32>>,
    pub beta: Option<RangeInclusive<u32>>,
    pub trials: u32,
    pub seed: u64,
    pub field: Field,
    pub drop_squarefree: bool,
    pub verify: VerifyOptions,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepTask {
    pub d: u32,
    pub alpha: u32,
    pub beta: u32,
    pub trial: u32,
    pub seed: u64,
}

impl SweepConfig {
    /// Legal (d, α, β, trial) tuples in deterministic order.
    pub fn tasks(&self) -> Vec<SweepTask> {
        let mut out = Vec::new();
        for d in self.d.clone() {
            for (alpha, beta) in legal_pairs(d) {
                if self.alpha.as_ref().is_some_and(|r| !r.contains(&alpha))
                    || self.beta.as_ref().is_some_and(|r| !r.contains(&beta))
                {
                    continue;
                }
                for trial in 0..self.trials {
                    out.push(SweepTask {
                        d,
                        alpha,
                        beta,
                        trial,
                        seed: instance_seed(self.seed, d, alpha, beta, trial),
                    });
                }
            }
        }
        out
    }
}

/// Result of the exploratory probe on an instance without the square-free
/// hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub instance: InstanceRecord,
    pub f1_squarefree: bool,
    pub irreducible: Option<bool>,
    pub probe: oracle::ProbeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepItem {
    Verified(Box<VerificationReport>),
    Explored(Box<Finding>),
    Error { task: SweepTask, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: u32,
    pub alpha: u32,
    pub beta: u32,
    pub trial: u32,
    pub seed: u64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub field: Field,
    pub exploratory: bool,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub rows: Vec<SweepRow>,
    pub reports: Vec<SweepItem>,
}

impl SweepSummary {
    /// Exploratory sweeps never fail.
    pub fn exit_ok(&self) -> bool {
        self.exploratory || self.failed == 0
    }
}

fn run_task(cfg: &SweepConfig, task: SweepTask) -> (SweepRow, SweepItem) {
    let mode = if cfg.drop_squarefree {
        SampleMode::RepeatedFactor
    } else {
        SampleMode::General
    };
    let mut row = SweepRow {
        d: task.d,
        alpha: task.alpha,
        beta: task.beta,
        trial: task.trial,
        seed: task.seed,
        pass: false,
        detail: String::new(),
    };
    let params = match InstanceSampler::new(task.seed, cfg.field).params(task.d, task.alpha, task.beta, mode) {
        Ok(p) => p,
        Err(e) => {
            row.detail = e.to_string();
            return (
                row,
                SweepItem::Error {
                    task,
                    error: e.to_string(),
                },
            );
        }
    };
    let rec = InstanceRecord::new(&params, Some(task.seed));
    if cfg.drop_squarefree {
        let f = params.assemble();
        let v = params.v();
        let probe = oracle::freeness_probe(&f, cfg.verify.degree_bound.unwrap_or(3 * v + 3));
        let f1_squarefree = params.f1.is_squarefree_bivariate().unwrap_or(false);
        row.pass = probe.found;
        row.detail = match probe.column_degrees {
            Some(c) => format!("degrees {:?}{}", c, if f1_squarefree { " (F1 square-free)" } else { "" }),
            None => "no assembly found".into(),
        };
        let finding = Finding {
            instance: rec,
            f1_squarefree,
            irreducible: is_irreducible(&f).ok(),
            probe,
        };
        return (row, SweepItem::Explored(Box::new(finding)));
    }
    match verify_record(&rec, cfg.verify) {
        Ok(rep) => {
            row.pass = rep.pass;
            row.detail = rep.failed_checks().join(",");
            (row, SweepItem::Verified(Box::new(rep)))
        }
        Err(e) => {
            row.detail = e.to_string();
            (
                row,
                SweepItem::Error {
                    task,
                    error: e.to_string(),
                },
            )
        }
    }
}

/// Runs all tasks in parallel and merges results in task order.
pub fn run_sweep(cfg: &SweepConfig) -> SweepSummary {
    let tasks = cfg.tasks();
    let work = || -> Vec<(SweepRow, SweepItem)> { tasks.par_iter().map(|t| run_task(cfg, *t)).collect() };
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| work()),
        None => work(),
    };
    let (rows, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let passed = rows.iter().filter(|r| r.pass).count();
    SweepSummary {
        seed: cfg.seed,
        field: cfg.field,
        exploratory: cfg.drop_squarefree,
        total: rows.len(),
        passed,
        failed: rows.len() - passed,
        rows,
        reports,
    }
}
