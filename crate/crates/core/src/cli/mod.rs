//! Command-line front end: the example catalog, document runs, theorem
//! suites and report emission. The `subreg` binary is a thin wrapper over
//! this module.

pub mod catalog;
pub mod report;
mod run;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{catalog_suite, random_suite, BoundReport, Holds, Theorem};
use crate::convexity::{sms_convex_scalarization, MaxAffineFn, MaxAffineMap, OrderCone};
use crate::error::{Error, Result};
use crate::geneq::{geneq_bound, geneq_catalog, geneq_random_suite};
use crate::moduli::DEFAULT_TAU;
use crate::rates::SamplingSchedule;
use crate::rng;

pub use report::{Report, TaskReport, TaskResult, Timings};
pub use run::{reproduce, run_document, RunOptions, EXIT_EVALUATION, EXIT_EXPECTATION, EXIT_OK, EXIT_PARSE};

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "SUBREG_THREADS";

/// Sizes the global thread pool from `SUBREG_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::invalid(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::invalid(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Catalog,
    Random,
}

/// Output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub schema: u32,
    pub version: String,
    pub theorem: Theorem,
    pub suite: Suite,
    pub seed: u64,
    pub reports: Vec<BoundReport>,
    pub holds: usize,
    pub violated: usize,
    pub not_applicable: usize,
    /// Catalogs may contain instances whose hypotheses fail on purpose;
    /// random instances satisfy them by construction, so there every bound
    /// must hold.
    pub passed: bool,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_EXPECTATION
        }
    }
}

fn scalarization_catalog(s: &SamplingSchedule) -> Result<Vec<BoundReport>> {
    let cases: [(&str, &[&str]); 3] = [
        ("sum of absolute values", &["(1,1,0);(1,-1,0);(-1,1,0);(-1,-1,0)", "(0,0,0)"]),
        ("absolute value", &["(1,0);(-1,0)", "(0,0)"]),
        ("injective linear map", &["(1,0,0)", "(0,1,0)"]),
    ];
    cases
        .iter()
        .map(|(name, comps)| {
            let f = MaxAffineMap::new(comps.iter().map(|c| MaxAffineFn::parse(c)).collect::<Result<_>>()?)?;
            let n = f.components[0].dim();
            let mut r = sms_convex_scalarization(&f, &vec![0.0; n], &OrderCone::nonneg(2), s, DEFAULT_TAU)?;
            r.instance = name.to_string();
            Ok(r)
        })
        .collect()
}

/// `(φ(x), 0)` with `φ(x) = max(a₁x₁, −a₂x₁) + max(b₁x₂, −b₂x₂)`: the
/// subdifferential is a box whose inradius is the least slope.
fn scalarization_random(n: usize, seed: u64, s: &SamplingSchedule) -> Result<Vec<BoundReport>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let mut slope = || r.random_range(0.3..2.0);
            let (a1, a2, b1, b2) = (slope(), slope(), slope(), slope());
            let phi = MaxAffineFn::new(
                vec![
                    (vec![a1, b1], 0.0),
                    (vec![a1, -b2], 0.0),
                    (vec![-a2, b1], 0.0),
                    (vec![-a2, -b2], 0.0),
                ],
                None,
            )?;
            let zero = MaxAffineFn::new(vec![(vec![0.0, 0.0], 0.0)], None)?;
            let f = MaxAffineMap::new(vec![phi, zero])?;
            let mut rep = sms_convex_scalarization(&f, &[0.0, 0.0], &OrderCone::nonneg(2), s, DEFAULT_TAU)?;
            rep.instance = format!("random #{i}: slopes ({a1:.3}, {a2:.3}, {b1:.3}, {b2:.3})");
            Ok(rep)
        })
        .collect()
}

/// Runs a theorem's catalog or `n` seeded random instances.
pub fn verify(theorem: Theorem, suite: Suite, n: usize, seed: u64, s: &SamplingSchedule) -> Result<VerifyReport> {
    let reports = match (theorem, suite) {
        (Theorem::ConvexScalarization, Suite::Catalog) => scalarization_catalog(s)?,
        (Theorem::ConvexScalarization, Suite::Random) => scalarization_random(n, seed, s)?,
        (Theorem::IsolatedCalmness | Theorem::SingleValuedField | Theorem::ScalarizedGenEq, Suite::Catalog) => {
            let probs = geneq_catalog(theorem)?;
            probs
                .par_iter()
                .map(|p| geneq_bound(theorem, p, s, DEFAULT_TAU, None))
                .collect::<Result<Vec<_>>>()?
        }
        (Theorem::IsolatedCalmness | Theorem::SingleValuedField | Theorem::ScalarizedGenEq, Suite::Random) => {
            geneq_random_suite(theorem, n, seed, s)?
        }
        (_, Suite::Catalog) => catalog_suite(theorem, s, None)?,
        (_, Suite::Random) => random_suite(theorem, n, seed, s)?,
    };
    let tally = |h: Holds| reports.iter().filter(|r| r.holds == h).count();
    let (holds, violated, not_applicable) = (tally(Holds::Holds), tally(Holds::Violated), tally(Holds::NotApplicable));
    let passed = match suite {
        Suite::Catalog => violated == 0,
        Suite::Random => holds == reports.len(),
    };
    Ok(VerifyReport {
        schema: report::SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        theorem,
        suite,
        seed,
        reports,
        holds,
        violated,
        not_applicable,
        passed,
    })
}

/// Exit code for an error raised before any task ran.
pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_evaluation() {
        EXIT_EVALUATION
    } else {
        EXIT_PARSE
    }
}
