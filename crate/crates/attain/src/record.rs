//! Rendering of run results: the trace CSV, the human-readable certificate
//! summary, and the aggregate sweep CSV. Column orders are fixed and
//! versioned in the leading header comment.

use crate::batch::{SweepRow, SweepStatus};
use crate::iteration::{IterationTrace, RunOutput, TraceReport};

pub const TRACE_COLUMNS: &str = "n,eps_n,norm_nu,case,perturbation,bound,defect_at_one,min_slack";
pub const SWEEP_COLUMNS: &str = "seed,k_size,s_size,rho,r,steps,distance,defect,eps_final,status";

/// Renders a trace as CSV with a versioned header comment carrying the run
/// parameters needed for offline verification.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# attain-trace-v1 rho={} r={} eps0={} defect_tol={} mode={} nu0_norm={}\n",
        trace.rho, trace.r, trace.delta, trace.defect_tol, trace.mode, trace.nu0_norm
    ));
    out.push_str(TRACE_COLUMNS);
    out.push('\n');
    for row in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.n,
            row.eps,
            row.norm,
            row.case,
            row.perturbation,
            row.bound,
            row.defect_at_one,
            row.min_slack
        ));
    }
    out
}

/// A finished run together with the seed it came from, ready for rendering.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: Option<u64>,
    pub output: RunOutput,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.output.certificate.passed()
    }

    /// Structured text summary of the certificate.
    pub fn summary(&self) -> String {
        let cert = &self.output.certificate;
        let mut out = String::new();
        out.push_str("attain run certificate\n");
        if let Some(seed) = self.seed {
            out.push_str(&format!("  seed: {seed}\n"));
        }
        out.push_str(&format!(
            "  instance: s_size={} k_size={}\n",
            cert.field.s_size(),
            cert.field.k_size()
        ));
        out.push_str(&format!("  mode: {}\n", self.output.trace.mode));
        out.push_str(&format!("  rho: {}\n", cert.rho));
        out.push_str(&format!("  r: {}\n", cert.r));
        out.push_str(&format!("  epsilon0: {}\n", cert.epsilon0));
        out.push_str(&format!("  steps: {}\n", cert.steps));
        out.push_str(&format!("  norm: {}\n", cert.nu0_norm));
        out.push_str(&format!(
            "  distance: {} (target rho {})\n",
            cert.distance, cert.rho
        ));
        out.push_str(&format!(
            "  final_defect: {} (certified level eps_N = {})\n",
            cert.defect, cert.eps_final
        ));
        if let Some(od) = cert.oracle_defect {
            out.push_str(&format!("  oracle_defect: {od}\n"));
        }
        for check in &cert.checks {
            out.push_str(&format!("  check {check}\n"));
        }
        out.push_str(&format!(
            "  status: {}\n",
            if cert.passed() { "PASS" } else { "PARTIAL" }
        ));
        out
    }

    pub fn trace_csv(&self) -> String {
        trace_csv(&self.output.trace)
    }
}

/// Renders an offline verification report, one line per inequality.
pub fn report_text(report: &TraceReport) -> String {
    let mut out = String::new();
    for check in &report.checks {
        out.push_str(&format!(
            "  {}: lhs={} rhs={} slack={:e} {}\n",
            check.label,
            check.lhs,
            check.rhs,
            check.slack,
            if check.pass { "PASS" } else { "FAIL" }
        ));
    }
    out.push_str(&format!(
        "  verification: {}\n",
        if report.pass { "PASS" } else { "FAIL" }
    ));
    out
}

/// Renders sweep results as CSV, one row per run.
pub fn sweep_csv(rows: &[SweepRow], norm_scale: f64, mode: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# attain-sweep-v1 norm_scale={norm_scale} mode={mode}\n"
    ));
    out.push_str(SWEEP_COLUMNS);
    out.push('\n');
    for row in rows {
        let status = match &row.status {
            SweepStatus::Pass => "pass".to_string(),
            SweepStatus::Partial => "partial".to_string(),
            // error text may contain commas; keep the row parseable
            SweepStatus::Failed(name) => format!("fail:{}", name.replace(',', ";")),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.point.seed,
            row.point.k_size,
            row.point.s_size,
            row.point.rho,
            row.point.r,
            row.steps,
            row.distance,
            row.defect,
            row.eps_final,
            status
        ));
    }
    out
}
