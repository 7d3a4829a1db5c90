//! Structured (JSON) documents for reports, comparisons, recovery studies and
//! oracle runs.
//!
//! Numbers are written at full double precision; nothing is rounded here.

use serde::{Deserialize, Serialize};

use runoff_core::oracle::OracleCheck;
use runoff_core::simulator::RecoverySummary;
use runoff_core::{Comparison, ElicitationMode, PriorSpec, ReserveReport, Triangle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDocument {
    /// `"explicit"` or `"auto_beta"`.
    pub mode: String,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PriorDocument {
    pub fn from_spec(prior: &PriorSpec) -> Self {
        PriorDocument {
            mode: match prior.mode() {
                ElicitationMode::Explicit => "explicit",
                ElicitationMode::AutoBeta => "auto_beta",
            }
            .into(),
            alpha: prior.columns().iter().map(|c| c.alpha()).collect(),
            beta: prior.columns().iter().map(|c| c.beta()).collect(),
        }
    }
}

/// Closed-form factor against its quadrature recomputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCheck {
    pub dev_year: usize,
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub method: String,
    /// `f_j` for development years `1..n-1`.
    pub factors: Vec<f64>,
    /// Accident-year labels for the rows below, oldest open year first.
    pub accident_years: Vec<i64>,
    pub latest: Vec<f64>,
    pub ultimates: Vec<f64>,
    pub outstanding: Vec<f64>,
    pub total_reserve: f64,
    pub input_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<FactorCheck>>,
}

impl ReportDocument {
    pub fn new(report: &ReserveReport, triangle: &Triangle, unit: Option<&str>) -> Self {
        ReportDocument {
            method: report.method.as_str().into(),
            factors: report.factors.as_slice().to_vec(),
            accident_years: report
                .accident_years()
                .map(|i| triangle.accident_year_label(i))
                .collect(),
            latest: report.latest.clone(),
            ultimates: report.ultimates.clone(),
            outstanding: report.outstanding.clone(),
            total_reserve: report.total_reserve,
            input_fingerprint: report.input_fingerprint.clone(),
            unit: unit.map(Into::into),
            prior: None,
            oracle: None,
        }
    }

    pub fn with_prior(mut self, prior: &PriorSpec) -> Self {
        self.prior = Some(PriorDocument::from_spec(prior));
        self
    }

    pub fn with_oracle(mut self, checks: Vec<FactorCheck>) -> Self {
        self.oracle = Some(checks);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDocument {
    pub mack: ReportDocument,
    pub bayes: ReportDocument,
    /// Bayesian minus Mack factor, per development year.
    pub factor_deltas: Vec<f64>,
    /// Bayesian minus Mack total reserve.
    pub total_difference: f64,
}

impl ComparisonDocument {
    pub fn new(mack: ReportDocument, bayes: ReportDocument, comparison: &Comparison) -> Self {
        ComparisonDocument {
            total_difference: comparison.bayes.total_reserve - comparison.mack.total_reserve,
            factor_deltas: comparison.factor_deltas.clone(),
            mack,
            bayes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureDocument {
    pub replicate: usize,
    pub error: String,
}

/// Recovery summary with one array entry per development year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryDocument {
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub level: f64,
    pub dev_years: Vec<usize>,
    pub samples: Vec<usize>,
    pub mean_factor: Vec<f64>,
    pub sd_factor: Vec<f64>,
    pub standard_error: Vec<f64>,
    pub mean_true_sqrt_theta: Vec<f64>,
    pub coverage: Vec<f64>,
    pub failures: Vec<FailureDocument>,
}

impl RecoveryDocument {
    pub fn new(summary: &RecoverySummary, seed: u64) -> Self {
        let col = |f: fn(&runoff_core::simulator::ColumnRecovery) -> f64| {
            summary.columns.iter().map(f).collect::<Vec<f64>>()
        };
        RecoveryDocument {
            n: summary.n,
            replications: summary.replications,
            seed,
            level: summary.level,
            dev_years: summary.columns.iter().map(|c| c.dev_year).collect(),
            samples: summary.columns.iter().map(|c| c.samples).collect(),
            mean_factor: col(|c| c.mean_factor),
            sd_factor: col(|c| c.sd_factor),
            standard_error: col(|c| c.standard_error),
            mean_true_sqrt_theta: col(|c| c.mean_true_sqrt_theta),
            coverage: col(|c| c.coverage),
            failures: summary
                .failures
                .iter()
                .map(|f| FailureDocument {
                    replicate: f.replicate,
                    error: f.error.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDocument {
    pub identity: String,
    pub achieved: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub passed: bool,
    pub checks: Vec<CheckDocument>,
}

impl VerifyDocument {
    pub fn new(checks: &[OracleCheck]) -> Self {
        VerifyDocument {
            passed: checks.iter().all(|c| c.passed),
            checks: checks
                .iter()
                .map(|c| CheckDocument {
                    identity: c.identity.clone(),
                    achieved: c.achieved,
                    tolerance: c.tolerance,
                    cases: c.cases,
                    passed: c.passed,
                })
                .collect(),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents always serialize");
    text.push('\n');
    text
}
