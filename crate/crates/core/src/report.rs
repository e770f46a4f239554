//! Machine-readable command reports.

use serde::{Deserialize, Serialize};

use crate::decision::{CxPolicy, GofConfig, GofOutcome};
use crate::poisson_mc::{A1Config, A1Estimate, Integration};
use crate::sims::ExperimentReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Command line that produced the report.
    pub command: Vec<String>,
    #[serde(flatten)]
    pub payload: Payload,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Test(TestSummary),
    CalibrateA1(A1Summary),
    Experiment(ExperimentSummary),
}

/// Flat view of a test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub data: String,
    pub rows_used: usize,
    pub rows_skipped: usize,
    pub h: f64,
    pub h1: f64,
    pub k: usize,
    pub level: f64,
    pub a1: f64,
    pub gamma_known: Option<f64>,
    pub cx_fixed: Option<f64>,
    pub t: f64,
    pub t1: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub gamma_used: f64,
    pub gamma_hat: Option<f64>,
    pub correction_count: usize,
    pub m: usize,
    pub n_stat: usize,
    pub n_eligible: usize,
    pub cx: f64,
    pub crit1: f64,
    pub reject1: bool,
    pub p1: f64,
    pub crit2: f64,
    pub reject2: bool,
    pub p2: f64,
    pub merged_ties: usize,
    pub dropped_last: bool,
}

impl TestSummary {
    pub fn new(data: String, rows_used: usize, rows_skipped: usize, config: &GofConfig, o: &GofOutcome) -> Self {
        TestSummary {
            data,
            rows_used,
            rows_skipped,
            h: config.h,
            h1: config.h1,
            k: config.k,
            level: config.level,
            a1: config.a1,
            gamma_known: config.gamma,
            cx_fixed: match config.cx_policy {
                CxPolicy::Auto => None,
                CxPolicy::Fixed(c) => Some(c),
            },
            t: o.breakdown.t,
            t1: o.breakdown.t1,
            s1: o.breakdown.s1,
            s2: o.breakdown.s2,
            s3: o.breakdown.s3,
            gamma_used: o.breakdown.gamma_used,
            gamma_hat: o.tail.map(|t| t.gamma_hat),
            correction_count: o.breakdown.correction_count,
            m: o.breakdown.m,
            n_stat: o.n_stat,
            n_eligible: o.n_eligible,
            cx: o.cx,
            crit1: o.phi1.crit,
            reject1: o.phi1.reject,
            p1: o.phi1.p,
            crit2: o.phi2.crit,
            reject2: o.phi2.reject,
            p2: o.phi2.p,
            merged_ties: o.merged_ties,
            dropped_last: o.dropped_last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Summary {
    pub value: f64,
    pub std_error: f64,
    pub reps: usize,
    pub gamma: f64,
    pub depth: f64,
    pub seed: u64,
    pub degenerate_draws: usize,
    pub integration: Integration,
}

impl A1Summary {
    pub fn new(config: &A1Config, e: &A1Estimate) -> Self {
        A1Summary {
            value: e.value,
            std_error: e.std_error,
            reps: e.reps,
            gamma: e.gamma,
            depth: e.depth,
            seed: e.seed,
            degenerate_draws: e.degenerate_draws,
            integration: config.integration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub results: Vec<ExperimentReport>,
}

impl Report {
    pub fn new(command: Vec<String>, payload: Payload) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            payload,
            warnings: Vec::new(),
            wall_time_secs: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Human-readable `key  value` listing.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let v = serde_json::to_value(self).expect("report serializes");
        let obj = v.as_object().expect("report is an object");
        let width = obj.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in obj {
            if k == "warnings" || k == "results" {
                continue;
            }
            out.push_str(&format!("{k:<width$}  {}\n", compact(v)));
        }
        if let Payload::Experiment(ex) = &self.payload {
            out.push_str("experiments:\n");
            for r in &ex.results {
                out.push_str(&format!(
                    "  n={} truth={} gamma={} level={}  phi1={:.3} (±{:.3})  phi2={:.3} (±{:.3})  done={} failed={}\n",
                    r.spec.n,
                    compact(&serde_json::to_value(r.spec.truth).expect("serializes")),
                    compact(&serde_json::to_value(r.spec.gamma_mode).expect("serializes")),
                    r.spec.level,
                    r.rejection_rate_phi1,
                    r.ci_halfwidth_phi1,
                    r.rejection_rate_phi2,
                    r.ci_halfwidth_phi2,
                    r.reps_done,
                    r.reps_failed,
                ));
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

fn compact(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(a) => a.iter().map(compact).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}
