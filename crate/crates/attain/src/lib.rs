//! Certified construction of norm-attaining approximants for operators
//! between spaces of continuous functions on finite point sets.
//!
//! An operator is represented by a field of complex atomic measures, one
//! row per output point, with operator norm equal to the largest row total
//! variation. Given a target distance `rho`, the pipeline multiplies the
//! field by a unimodular phase witness, runs a geometric schedule of
//! defect-reduction steps (a Dirac bump or a phase blend per step, each
//! with a certified perturbation bound), and transforms back. The result is
//! a field within `rho` of the input whose operator attains its norm at the
//! witness up to a quantified defect, and every inequality used along the
//! way is checked at runtime and recorded.

pub mod batch;
pub mod certificate;
pub mod error;
pub mod field;
pub mod instance;
pub mod iteration;
pub mod lift;
pub mod measure;
pub mod record;
pub mod reduction;

/// Numeric tolerances shared across the crate.
pub mod tol {
    /// Relative tolerance for derived identity checks.
    pub const IDENTITY_REL: f64 = 1e-9;
    /// Relative tolerance for pure arithmetic identities.
    pub const ARITHMETIC_REL: f64 = 1e-12;
    /// Minimum admissible slack of a strict-inequality certificate.
    pub const SLACK_FLOOR: f64 = 1e-12;
    /// Absolute roundoff allowance on nonstrict comparisons.
    pub const COMPARISON_ABS: f64 = 1e-12;
}

pub use batch::{
    expand_grid, sweep, sweep_serial, SweepOptions, SweepPoint, SweepRow, SweepStatus,
};
pub use certificate::{Certificate, Relation};
pub use error::{Error, Result};
pub use field::{MeasureField, UnimodularFunction, Witness};
pub use instance::{gen_instance, InstanceFile, InstanceMeta};
pub use iteration::{
    choose_epsilon0, perturbation_budget, run, verify_trace, AttainmentCertificate,
    IterationConfig, IterationTrace, RunOutput, TraceReport, TraceRow,
};
pub use lift::{lift, quantize_phases, select_peak_point, CirclePartition, LiftResult, PhaseMode};
pub use measure::{
    closed_form_attainment, dual_sup_bruteforce, scale_by_function, variation_identity_check,
    weighted_variation, ComplexMeasure, PolarDecomposition, WeightFunction,
};
pub use record::{report_text, sweep_csv, trace_csv, RunRecord};
pub use reduction::{
    build_q, case1_dirac_bump, case2_phase_blend, classify_case, radial_projection, reduce, Case,
    Corrector, ReductionOutcome, ReductionParams,
};
