//! The full pipeline: pick a starting tolerance from the target distance,
//! lift the field by a unimodular witness, run the geometric schedule of
//! defect-reduction steps, transform back, and certify that the result is a
//! nearby field whose operator nearly attains its norm at the witness.
//!
//! Every run returns both a certificate (the final claims, each checked)
//! and a trace (one row per visited state) that can be re-verified offline
//! with [`verify_trace`].

use num_complex::Complex64;

use crate::certificate::{certify_at_most, certify_close, certify_strict, Certificate};
use crate::error::{Error, Result};
use crate::field::{MeasureField, UnimodularFunction, Witness};
use crate::lift::{lift, PhaseMode};
use crate::reduction::{reduce, Case, ReductionParams};
use crate::tol;

/// Parameters of a pipeline run.
///
/// `epsilon0` is derived from `rho`, `r`, and the field norm unless
/// overridden. `arcs` sizes the lift partition in faithful mode; the
/// per-step correctors always size their own partitions to match their
/// shrinking tolerances.
#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub rho: f64,
    pub r: f64,
    pub epsilon0: Option<f64>,
    pub max_iter: usize,
    pub defect_tol: f64,
    pub mode: PhaseMode,
    pub arcs: Option<usize>,
}

impl IterationConfig {
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            r: 0.81,
            epsilon0: None,
            max_iter: 10_000,
            defect_tol: 1e-8,
            mode: PhaseMode::Exact,
            arcs: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("rho must be positive, got {}", self.rho),
            });
        }
        if !(self.r > 0.5 && self.r < 1.0) {
            return Err(Error::InvalidRatio(self.r));
        }
        if !self.defect_tol.is_finite() || self.defect_tol <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("defect tolerance must be positive, got {}", self.defect_tol),
            });
        }
        // claims at the tolerance level must clear the certificate slack
        // floor, so the tolerance itself has to sit well above it
        if self.defect_tol < 10.0 * tol::SLACK_FLOOR {
            return Err(Error::InvalidParams {
                reason: format!(
                    "defect tolerance {} is too close to the certificate slack floor {:e}",
                    self.defect_tol,
                    tol::SLACK_FLOOR
                ),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams {
                reason: "max_iter must be positive".to_string(),
            });
        }
        Ok(())
    }
}

/// Closed form of the telescoped perturbation budget:
/// `sqrt(2*m*eps0)/(1 - sqrt(r)) + 2*eps0/(1 - r)`.
pub fn perturbation_budget(m: f64, eps0: f64, r: f64) -> f64 {
    (2.0 * m * eps0).sqrt() / (1.0 - r.sqrt()) + 2.0 * eps0 / (1.0 - r)
}

/// Picks the starting tolerance by bisection: the largest `eps0` whose
/// telescoped budget stays within 90% of `rho`, leaving the remaining 10%
/// as roundoff headroom. Zero fields need no budget and get `rho / 4`.
pub fn choose_epsilon0(m: f64, rho: f64, r: f64) -> Result<f64> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("rho must be positive, got {rho}"),
        });
    }
    if !(r > 0.5 && r < 1.0) {
        return Err(Error::InvalidRatio(r));
    }
    if m == 0.0 {
        return Ok(rho / 4.0);
    }
    let target = 0.9 * rho;
    let mut lo = 0.0f64;
    let mut hi = rho.max(1.0);
    let mut doublings = 0;
    while perturbation_budget(m, hi, r) < target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if perturbation_budget(m, mid, r) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// One visited state of the iteration. Row `n` describes the field before
/// step `n`; the step columns (case, perturbation, bound, min_slack)
/// describe the transition out of it. The last row is the truncation state
/// and carries no transition.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub n: usize,
    pub eps: f64,
    pub norm: f64,
    pub case: Case,
    pub perturbation: f64,
    pub bound: f64,
    pub defect_at_one: f64,
    pub min_slack: f64,
}

/// Complete record of a run: the lift, every visited state, and the
/// parameters needed to re-verify the telescoping offline.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub witness: UnimodularFunction,
    pub delta: f64,
    pub r: f64,
    pub rho: f64,
    pub defect_tol: f64,
    pub mode: PhaseMode,
    pub peak: usize,
    pub initial_set: Vec<usize>,
    pub nu0_norm: f64,
}

/// Final claims of a run, each backed by a checked certificate.
#[derive(Debug, Clone)]
pub struct AttainmentCertificate {
    /// The unimodular attainment witness.
    pub witness: UnimodularFunction,
    /// The perturbed field whose operator nearly attains its norm.
    pub field: MeasureField,
    /// Field distance from the input.
    pub distance: f64,
    /// Attainment defect of the witness at the final field.
    pub defect: f64,
    /// Defect level certified at truncation.
    pub eps_final: f64,
    /// Number of reduction steps taken.
    pub steps: usize,
    /// Whether the certified level reached the defect tolerance.
    pub complete: bool,
    pub rho: f64,
    pub r: f64,
    pub epsilon0: f64,
    pub nu0_norm: f64,
    /// Defect of the exact finite-dimensional witness, for cross-checking
    /// (absent for zero fields).
    pub oracle_defect: Option<f64>,
    pub checks: Vec<Certificate>,
}

impl AttainmentCertificate {
    pub fn passed(&self) -> bool {
        self.complete
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub certificate: AttainmentCertificate,
    pub trace: IterationTrace,
}

fn hypothesis_defect(field: &MeasureField, rows: &[usize]) -> f64 {
    let best = rows
        .iter()
        .map(|&s| field.row(s).total_mass().re)
        .fold(f64::NEG_INFINITY, f64::max);
    field.field_norm() - best
}

/// Runs the pipeline on `mu`.
pub fn run(mu: &MeasureField, config: &IterationConfig) -> Result<RunOutput> {
    config.validate()?;
    let m = mu.field_norm();
    let eps0 = match config.epsilon0 {
        Some(eps0) => {
            if !eps0.is_finite() || eps0 <= 0.0 {
                return Err(Error::InvalidEpsilon(eps0));
            }
            // a zero field perturbs nothing, so any tolerance fits
            if m > 0.0 {
                let budget = perturbation_budget(m, eps0, config.r);
                if budget.is_nan() || budget >= config.rho {
                    return Err(Error::BudgetExceeded {
                        budget,
                        rho: config.rho,
                    });
                }
            }
            eps0
        }
        None => choose_epsilon0(m, config.rho, config.r)?,
    };
    // the certificate chain operates at scales proportional to eps_0, so
    // configurations that push it toward the slack floor are rejected up
    // front instead of failing mid-run on an unprovable inequality
    if eps0 < 100.0 * tol::SLACK_FLOOR {
        return Err(Error::InvalidParams {
            reason: format!(
                "starting tolerance {eps0:e} sits below the certifiable scale \
                 {:e}; increase rho or lower r",
                100.0 * tol::SLACK_FLOOR
            ),
        });
    }

    let lifted = lift(mu, eps0, config.mode, config.arcs)?;
    let h = lifted.h.clone();
    let mut nu = mu.scale_rows(h.values())?;
    let nu0 = nu.clone();
    let nu0_norm = nu0.field_norm();

    // membership is recomputed on the scaled field so every later
    // hypothesis check compares the exact same floats
    let initial_threshold = nu0_norm - eps0;
    let mut witness_rows: Vec<usize> = (0..nu.s_size())
        .filter(|&s| nu.row(s).total_mass().re - initial_threshold >= tol::SLACK_FLOOR)
        .collect();
    if witness_rows.is_empty() {
        return Err(Error::CertificateFailed {
            name: "lift_membership".to_string(),
            lhs: hypothesis_defect(&nu, &[lifted.peak]),
            rhs: eps0,
            slack: 0.0,
        });
    }

    let mut rows = Vec::new();
    let mut eps = eps0;
    let mut steps = 0usize;
    let mut sum_perturbation = 0.0f64;
    let mut complete = true;
    let eps_final;
    loop {
        let norm_n = nu.field_norm();
        let defect_u = hypothesis_defect(&nu, &witness_rows);
        if eps < config.defect_tol {
            eps_final = eps;
            break;
        }
        // exit early only with clear margin so the truncation certificate
        // never sits at the strictness floor
        if defect_u < config.defect_tol / 2.0 {
            eps_final = config.defect_tol;
            break;
        }
        if steps >= config.max_iter {
            complete = false;
            eps_final = eps;
            break;
        }
        let params = ReductionParams::new(config.r, eps)
            .map_err(|e| Error::StepFailed {
                step: steps,
                source: Box::new(e),
            })?
            .with_mode(config.mode);
        let outcome = reduce(&nu, &witness_rows, &params).map_err(|e| Error::StepFailed {
            step: steps,
            source: Box::new(e),
        })?;
        rows.push(TraceRow {
            n: steps,
            eps,
            norm: norm_n,
            case: outcome.case,
            perturbation: outcome.perturbation,
            bound: (2.0 * nu0_norm * eps).sqrt() + 2.0 * eps,
            defect_at_one: defect_u,
            min_slack: outcome.min_slack(),
        });
        sum_perturbation += outcome.perturbation;
        nu = outcome.field;
        witness_rows = outcome.surviving;
        eps *= config.r;
        steps += 1;
    }

    let final_norm = nu.field_norm();
    let final_defect_u = hypothesis_defect(&nu, &witness_rows);
    rows.push(TraceRow {
        n: steps,
        eps: eps_final,
        norm: final_norm,
        case: Case::Trivial,
        perturbation: 0.0,
        bound: (2.0 * nu0_norm * eps_final).sqrt() + 2.0 * eps_final,
        defect_at_one: final_defect_u,
        min_slack: eps_final - final_defect_u,
    });

    // back-transform by the conjugate witness
    let h_conj: Vec<Complex64> = h.values().iter().map(|v| v.conj()).collect();
    let final_field = nu.scale_rows(&h_conj)?;

    let mut checks = Vec::new();
    let distance = mu.distance(&final_field)?;
    let nu_distance = nu0.distance(&nu)?;
    checks.push(certify_close(
        "distance_identity",
        distance,
        nu_distance,
        tol::ARITHMETIC_REL,
    )?);
    checks.push(certify_strict("distance_budget", config.rho, distance)?);
    let closed_form = perturbation_budget(nu0_norm, eps0, config.r);
    checks.push(certify_at_most(
        "perturbation_telescoping",
        sum_perturbation,
        closed_form,
    )?);
    if config.epsilon0.is_none() && nu0_norm > 0.0 {
        checks.push(certify_at_most(
            "epsilon0_margin",
            closed_form,
            0.9 * config.rho,
        )?);
    }

    let witness = Witness::from(&h);
    let image = final_field.apply(&witness)?;
    let reached = image.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let defect = final_field.field_norm() - reached;
    checks.push(certify_strict("final_defect", eps_final, defect)?);
    let consistency_dev = image
        .iter()
        .zip(nu.rows())
        .map(|(z, row)| (z - row.total_mass()).norm())
        .fold(0.0, f64::max);
    checks.push(certify_at_most(
        "witness_consistency",
        consistency_dev,
        tol::ARITHMETIC_REL * final_norm.max(1.0),
    )?);

    let oracle_defect = if final_field.field_norm() > 0.0 {
        let oracle = final_field.exact_witness()?;
        let od = final_field.attainment_defect(&Witness::from(&oracle))?;
        checks.push(certify_at_most(
            "oracle_defect",
            od,
            tol::ARITHMETIC_REL * final_field.field_norm(),
        )?);
        checks.push(certify_at_most("oracle_not_worse", od, defect)?);
        Some(od)
    } else {
        None
    };

    let certificate = AttainmentCertificate {
        witness: h.clone(),
        field: final_field,
        distance,
        defect,
        eps_final,
        steps,
        complete,
        rho: config.rho,
        r: config.r,
        epsilon0: eps0,
        nu0_norm,
        oracle_defect,
        checks,
    };
    let trace = IterationTrace {
        rows,
        witness: h,
        delta: eps0,
        r: config.r,
        rho: config.rho,
        defect_tol: config.defect_tol,
        mode: config.mode,
        peak: lifted.peak,
        initial_set: (0..nu0.s_size())
            .filter(|&s| nu0.row(s).total_mass().re - initial_threshold >= tol::SLACK_FLOOR)
            .collect(),
        nu0_norm,
    };
    Ok(RunOutput { certificate, trace })
}

/// One re-checked inequality of an offline trace verification.
#[derive(Debug, Clone)]
pub struct TraceCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Offline verification report; `pass` is the conjunction of all checks.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub checks: Vec<TraceCheck>,
    pub pass: bool,
}

fn push_check(checks: &mut Vec<TraceCheck>, label: String, lhs: f64, rhs: f64, pass: bool) {
    checks.push(TraceCheck {
        label,
        lhs,
        rhs,
        slack: rhs - lhs,
        pass,
    });
}

/// Re-checks every invariant of a recorded trace: per-row perturbation
/// bounds, norm monotonicity, geometric defect decay, the epsilon schedule,
/// and the telescoped budget against `rho`.
pub fn verify_trace(trace: &IterationTrace, nu0_norm: f64, rho: f64) -> TraceReport {
    let mut checks = Vec::new();
    let mut sum_perturbation = 0.0;
    for (i, row) in trace.rows.iter().enumerate() {
        push_check(
            &mut checks,
            format!("row {}: perturbation within bound", row.n),
            row.perturbation,
            row.bound,
            row.perturbation <= row.bound + tol::COMPARISON_ABS,
        );
        push_check(
            &mut checks,
            format!("row {}: defect below eps", row.n),
            row.defect_at_one,
            row.eps,
            row.defect_at_one < row.eps,
        );
        let schedule = trace.delta * trace.r.powi(row.n as i32);
        push_check(
            &mut checks,
            format!("row {}: eps within schedule", row.n),
            row.eps,
            schedule,
            row.eps <= schedule * (1.0 + 1e-9),
        );
        if i + 1 < trace.rows.len() {
            let next = &trace.rows[i + 1];
            push_check(
                &mut checks,
                format!("row {}: norm monotone", row.n),
                next.norm,
                row.norm,
                next.norm <= row.norm + tol::COMPARISON_ABS,
            );
        }
        sum_perturbation += row.perturbation;
    }
    let closed_form = perturbation_budget(nu0_norm, trace.delta, trace.r);
    push_check(
        &mut checks,
        "budget: perturbations within closed form".to_string(),
        sum_perturbation,
        closed_form,
        sum_perturbation <= closed_form + tol::COMPARISON_ABS,
    );
    // zero fields take delta = rho/4 without consuming any budget, so the
    // margin inequality is only meaningful for nonzero fields
    if nu0_norm > 0.0 {
        push_check(
            &mut checks,
            "budget: closed form within 0.9 rho".to_string(),
            closed_form,
            0.9 * rho,
            closed_form <= 0.9 * rho + tol::COMPARISON_ABS,
        );
    }
    push_check(
        &mut checks,
        "budget: perturbations below rho".to_string(),
        sum_perturbation,
        rho,
        sum_perturbation < rho,
    );
    let pass = checks.iter().all(|c| c.pass);
    TraceReport { checks, pass }
}
