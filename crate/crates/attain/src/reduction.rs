//! One certified defect-reduction step.
//!
//! Given a field `mu`, a set `u` of row indices on which the real total
//! mass clears `m - epsilon`, and a contraction ratio `r`, the step
//! produces a perturbed field whose surviving rows clear the tightened
//! threshold `norm' - r*epsilon`, at a perturbation cost of at most
//! `sqrt(2*m*epsilon) + 2*epsilon`. Every inequality used along the way is
//! checked at runtime and returned as a certificate.
//!
//! Two regimes are distinguished. When every row of `u` sits well below the
//! norm level, a small real point mass is added to the best row (Dirac
//! bump). Otherwise the best row is multiplied by a corrector function that
//! aligns its phases with the positive real axis (phase blend).

use num_complex::Complex64;

use crate::certificate::{certify_at_most, certify_close, certify_strict, Certificate};
use crate::error::{Error, Result};
use crate::field::MeasureField;
use crate::lift::{quantize_phases, CirclePartition, PhaseMode};
use crate::measure::{ComplexMeasure, WeightFunction};
use crate::tol;

/// Which branch a reduction step took. `Trivial` marks the zero-field
/// short circuit, which perturbs nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Trivial,
    DiracBump,
    PhaseBlend,
}

impl Case {
    pub fn as_u8(&self) -> u8 {
        match self {
            Case::Trivial => 0,
            Case::DiracBump => 1,
            Case::PhaseBlend => 2,
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Tolerances of one reduction step.
///
/// `gamma` bounds the L1 error of the corrector, `eta` the slack used when
/// collecting rows whose aligned mass is comparable to the anchor's. The
/// defaults split both chain inequalities with equal headroom.
#[derive(Debug, Clone)]
pub struct ReductionParams {
    pub r: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub eta: f64,
    pub mode: PhaseMode,
    pub arcs: Option<usize>,
}

impl ReductionParams {
    pub fn new(r: f64, epsilon: f64) -> Result<Self> {
        if !(r > 0.5 && r < 1.0) {
            return Err(Error::InvalidRatio(r));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let a = 1.0 - r;
        let gamma = (2.0 * r - 1.0) * epsilon / 2.0;
        let eta = (2.0 * epsilon - 2.0 * a * epsilon - gamma) / 4.0;
        let params = Self {
            r,
            epsilon,
            gamma,
            eta,
            mode: PhaseMode::Exact,
            arcs: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn a(&self) -> f64 {
        1.0 - self.r
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: PhaseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_arcs(mut self, arcs: Option<usize>) -> Self {
        self.arcs = arcs;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.5 && self.r < 1.0) {
            return Err(Error::InvalidRatio(self.r));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("gamma must be positive, got {}", self.gamma),
            });
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("eta must be positive, got {}", self.eta),
            });
        }
        let strict_cap = (2.0 * self.r - 1.0) * self.epsilon;
        if self.gamma.is_nan() || self.gamma >= strict_cap {
            return Err(Error::InvalidParams {
                reason: format!(
                    "gamma {} must stay below (2r-1)*epsilon = {}",
                    self.gamma, strict_cap
                ),
            });
        }
        let chain = 2.0 * self.a() * self.epsilon + self.gamma + 2.0 * self.eta;
        if chain.is_nan() || chain >= 2.0 * self.epsilon {
            return Err(Error::InvalidParams {
                reason: format!(
                    "2a*epsilon + gamma + 2*eta = {} must stay below 2*epsilon = {}",
                    chain,
                    2.0 * self.epsilon
                ),
            });
        }
        Ok(())
    }

    /// Perturbation bound of one step at norm level `m`.
    pub fn perturbation_bound(&self, m: f64) -> f64 {
        (2.0 * m * self.epsilon).sqrt() + 2.0 * self.epsilon
    }
}

/// Outcome of one reduction step.
#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    /// The perturbed field.
    pub field: MeasureField,
    /// Surviving row indices: members of the input set that clear the
    /// tightened threshold after the perturbation.
    pub surviving: Vec<usize>,
    /// Real-mass slack of each surviving row above `norm' - r*epsilon`.
    pub surviving_slack: Vec<f64>,
    pub case: Case,
    /// Measured field distance between input and output.
    pub perturbation: f64,
    /// Certified bound `sqrt(2*m*epsilon) + 2*epsilon`.
    pub bound: f64,
    /// Row the step acted on (absent for the trivial branch).
    pub anchor: Option<usize>,
    /// Bump location `(row, point)` for the Dirac branch.
    pub bump_site: Option<(usize, usize)>,
    /// Corrector function for the blend branch.
    pub corrector: Option<Vec<Complex64>>,
    /// Blend weight `|q - 1| / 2` for the blend branch.
    pub blend_weight: Option<WeightFunction>,
    /// Every inequality checked during the step.
    pub certificates: Vec<Certificate>,
}

impl ReductionOutcome {
    /// Smallest certified margin of the step.
    pub fn min_slack(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
            .min(
                self.surviving_slack
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
            )
    }
}

fn validate_index_set(mu: &MeasureField, u: &[usize]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut prev = None;
    for &s in u {
        if s >= mu.s_size() {
            return Err(Error::RowOutOfRange {
                index: s,
                size: mu.s_size(),
            });
        }
        if let Some(p) = prev {
            if s <= p {
                return Err(Error::InvalidParams {
                    reason: "index set must be strictly increasing".to_string(),
                });
            }
        }
        prev = Some(s);
    }
    Ok(())
}

fn validate_norm_level(mu: &MeasureField, m: f64) -> Result<()> {
    let field_norm = mu.field_norm();
    if m + tol::COMPARISON_ABS < field_norm {
        return Err(Error::NormLevelTooLow {
            level: m,
            field_norm,
        });
    }
    Ok(())
}

fn argmax_tv(mu: &MeasureField, u: &[usize]) -> usize {
    let mut best = u[0];
    let mut best_tv = mu.row(best).total_variation();
    for &s in &u[1..] {
        let tv = mu.row(s).total_variation();
        if tv > best_tv {
            best = s;
            best_tv = tv;
        }
    }
    best
}

/// Splits a valid instance into the bump and blend regimes.
///
/// Verifies the standing hypothesis `Re mu(s)(K) > m - epsilon` on every
/// row of `u` first; `m` is the operating norm level, normally
/// `mu.field_norm()`.
pub fn classify_case(
    mu: &MeasureField,
    u: &[usize],
    m: f64,
    params: &ReductionParams,
) -> Result<Case> {
    validate_index_set(mu, u)?;
    validate_norm_level(mu, m)?;
    let threshold = m - params.epsilon;
    for &s in u {
        let slack = mu.row(s).total_mass().re - threshold;
        if slack.is_nan() || slack <= 0.0 {
            return Err(Error::HypothesisViolated { row: s, slack });
        }
    }
    let sup_tv = u
        .iter()
        .map(|&s| mu.row(s).total_variation())
        .fold(0.0, f64::max);
    if sup_tv <= m - params.a() * params.epsilon {
        Ok(Case::DiracBump)
    } else {
        Ok(Case::PhaseBlend)
    }
}

/// Radial projection onto the closed unit disc: the identity inside,
/// `z / |z|` outside. 1-Lipschitz.
pub fn radial_projection(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= 1.0 {
        z
    } else {
        z / r
    }
}

/// A corrector function in the closed unit ball together with its measured
/// L1 distance to the conjugate phases of the measure it was built for.
#[derive(Debug, Clone)]
pub struct Corrector {
    pub values: Vec<Complex64>,
    pub l1_error: f64,
}

/// Builds the corrector `q` for `nu`: a unit-ball function whose L1
/// distance to the conjugate phases stays below `gamma`.
///
/// Exact mode takes the conjugate phases themselves. Faithful mode snaps
/// them to arc midpoints first and then applies the radial projection,
/// which never worsens the approximation.
pub fn build_q(
    nu: &ComplexMeasure,
    gamma: f64,
    mode: PhaseMode,
    arcs: Option<usize>,
) -> Result<Corrector> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("gamma must be positive, got {gamma}"),
        });
    }
    let conj_phases = nu.polar_decompose().conjugate_phases();
    let raw: Vec<Complex64> = match mode {
        PhaseMode::Exact => conj_phases.clone(),
        PhaseMode::Faithful => {
            let tv = nu.total_variation();
            let partition = match arcs {
                Some(n) => CirclePartition::with_arcs(n)?,
                None if tv == 0.0 => CirclePartition::with_arcs(4)?,
                None => CirclePartition::for_diameter(gamma / (2.0 * tv))?,
            };
            quantize_phases(nu, &partition).values().to_vec()
        }
    };
    let values: Vec<Complex64> = raw.into_iter().map(radial_projection).collect();
    let l1_error: f64 = values
        .iter()
        .zip(&conj_phases)
        .zip(nu.atoms())
        .map(|((q, phi), a)| (q - phi).norm() * a.norm())
        .sum();
    if l1_error.is_nan() || l1_error >= gamma {
        let tv = nu.total_variation();
        let required = (std::f64::consts::TAU * tv / (2.0 * gamma)).ceil() as usize + 1;
        return Err(Error::ArcsTooCoarse {
            arcs: arcs.unwrap_or(0),
            required,
        });
    }
    Ok(Corrector { values, l1_error })
}

/// Dirac-bump branch: adds the real point mass `a*epsilon` at the heaviest
/// atom of the best row of `u`. Applies when every row of `u` sits at or
/// below `m - a*epsilon`, so the bump cannot push the field norm past `m`.
pub fn case1_dirac_bump(
    mu: &MeasureField,
    u: &[usize],
    m: f64,
    params: &ReductionParams,
) -> Result<ReductionOutcome> {
    validate_index_set(mu, u)?;
    validate_norm_level(mu, m)?;
    let a_eps = params.a() * params.epsilon;
    let sup_tv = u
        .iter()
        .map(|&s| mu.row(s).total_variation())
        .fold(0.0, f64::max);
    if sup_tv.is_nan() || sup_tv > m - a_eps {
        return Err(Error::CasePrecondition {
            case: 1,
            reason: format!(
                "sup row variation over u is {sup_tv}, above m - a*eps = {}",
                m - a_eps
            ),
        });
    }

    let anchor = argmax_tv(mu, u);
    let row = mu.row(anchor);
    let mut site = 0;
    let mut site_mod = row.atoms()[0].norm();
    for (t, atom) in row.atoms().iter().enumerate().skip(1) {
        let modulus = atom.norm();
        if modulus > site_mod {
            site = t;
            site_mod = modulus;
        }
    }

    let mut atoms = row.atoms().to_vec();
    atoms[site] += Complex64::new(a_eps, 0.0);
    let perturbed = mu.with_row(anchor, ComplexMeasure::new(atoms)?)?;

    let mut certificates = Vec::new();
    let new_norm = perturbed.field_norm();
    certificates.push(certify_at_most("bump_norm_monotone", new_norm, m)?);
    certificates.push(certify_strict(
        "bump_anchor_survives",
        perturbed.row(anchor).total_mass().re,
        new_norm - params.r * params.epsilon,
    )?);
    let perturbation = mu.distance(&perturbed)?;
    certificates.push(certify_close(
        "bump_perturbation_is_mass",
        perturbation,
        a_eps,
        tol::ARITHMETIC_REL,
    )?);
    let bound = params.perturbation_bound(m);
    certificates.push(certify_at_most(
        "bump_perturbation_bound",
        perturbation,
        bound,
    )?);

    let threshold = new_norm - params.r * params.epsilon;
    let mut surviving = Vec::new();
    let mut surviving_slack = Vec::new();
    for &s in u {
        let slack = perturbed.row(s).total_mass().re - threshold;
        if slack >= tol::SLACK_FLOOR {
            surviving.push(s);
            surviving_slack.push(slack);
        }
    }

    Ok(ReductionOutcome {
        field: perturbed,
        surviving,
        surviving_slack,
        case: Case::DiracBump,
        perturbation,
        bound,
        anchor: Some(anchor),
        bump_site: Some((anchor, site)),
        corrector: None,
        blend_weight: None,
        certificates,
    })
}

/// Phase-blend branch: multiplies the best row of `u` by the corrector `q`,
/// aligning its mass with the positive real axis. Applies when some row of
/// `u` rises above `m - a*epsilon`.
pub fn case2_phase_blend(
    mu: &MeasureField,
    u: &[usize],
    m: f64,
    params: &ReductionParams,
) -> Result<ReductionOutcome> {
    validate_index_set(mu, u)?;
    validate_norm_level(mu, m)?;
    let a_eps = params.a() * params.epsilon;
    let anchor = argmax_tv(mu, u);
    let anchor_row = mu.row(anchor);
    let anchor_tv = anchor_row.total_variation();
    if anchor_tv.is_nan() || anchor_tv <= m - a_eps {
        return Err(Error::CasePrecondition {
            case: 2,
            reason: format!(
                "best row variation over u is {anchor_tv}, at or below m - a*eps = {}",
                m - a_eps
            ),
        });
    }

    let mut certificates = Vec::new();
    let corrector = build_q(anchor_row, params.gamma, params.mode, params.arcs)?;
    let q = &corrector.values;
    certificates.push(certify_strict(
        "corrector_l1_error",
        params.gamma,
        corrector.l1_error,
    )?);

    // aligned real gain at the anchor clears m - r*epsilon
    let re_q_anchor: f64 = q
        .iter()
        .zip(anchor_row.atoms())
        .map(|(qt, a)| (qt * a).re)
        .sum();
    certificates.push(certify_strict(
        "anchor_gain",
        re_q_anchor,
        m - params.r * params.epsilon,
    )?);

    // phase defect controls the distance of the conjugate phases to 1
    let conj_phases = anchor_row.polar_decompose().conjugate_phases();
    let theta_l1: f64 = conj_phases
        .iter()
        .zip(anchor_row.atoms())
        .map(|(phi, a)| (phi - Complex64::new(1.0, 0.0)).norm() * a.norm())
        .sum();
    let anchor_defect = anchor_row.alignment_defect();
    let cauchy_mid = (2.0 * anchor_tv * anchor_defect).sqrt();
    certificates.push(certify_at_most(
        "phase_defect_cauchy",
        theta_l1,
        cauchy_mid,
    )?);
    let budget_root = (2.0 * m * params.epsilon).sqrt();
    certificates.push(certify_strict(
        "phase_defect_budget",
        budget_root,
        cauchy_mid,
    )?);

    let q_one = |row: &ComplexMeasure| -> f64 {
        q.iter()
            .zip(row.atoms())
            .map(|(qt, a)| (qt - Complex64::new(1.0, 0.0)).norm() * a.norm())
            .sum()
    };
    let q_one_anchor = q_one(anchor_row);
    certificates.push(certify_strict(
        "corrector_distance_anchor",
        params.gamma + budget_root,
        q_one_anchor,
    )?);

    // rows whose mass aligned away from the corrector defect is comparable
    // to the anchor's; each kept member must clear the distance conclusion
    // with the strictness floor, members in the roundoff gray zone are
    // dropped, and a genuine violation aborts
    let blend_weight = WeightFunction::new(
        q.iter()
            .map(|qt| (qt - Complex64::new(1.0, 0.0)).norm() / 2.0)
            .collect(),
    )?;
    let aligned_mass = |row: &ComplexMeasure| -> f64 {
        blend_weight
            .values()
            .iter()
            .zip(row.atoms())
            .map(|(phi, a)| (1.0 - phi) * a.norm())
            .sum()
    };
    let anchor_aligned = aligned_mass(anchor_row);
    let distance_cap = budget_root + 2.0 * params.epsilon;
    let mut comparable = Vec::new();
    for &s in u {
        let membership = aligned_mass(mu.row(s)) - (anchor_aligned - params.eta);
        if membership.is_nan() || membership < tol::SLACK_FLOOR {
            continue;
        }
        let distance_slack = distance_cap - q_one(mu.row(s));
        if distance_slack >= tol::SLACK_FLOOR {
            certificates.push(certify_strict(
                &format!("corrector_distance_row_{s}"),
                distance_cap,
                q_one(mu.row(s)),
            )?);
            comparable.push(s);
        } else if distance_slack <= -tol::COMPARISON_ABS {
            return Err(Error::CertificateFailed {
                name: format!("corrector_distance_row_{s}"),
                lhs: q_one(mu.row(s)),
                rhs: distance_cap,
                slack: distance_slack,
            });
        } else if s == anchor {
            return Err(Error::CertificateFailed {
                name: "corrector_distance_anchor_floor".to_string(),
                lhs: q_one(mu.row(s)),
                rhs: distance_cap,
                slack: distance_slack,
            });
        }
    }
    if !comparable.contains(&anchor) {
        return Err(Error::CertificateFailed {
            name: "anchor_membership".to_string(),
            lhs: anchor_aligned,
            rhs: anchor_aligned - params.eta,
            slack: params.eta,
        });
    }

    // blend: only the anchor row is multiplied by q
    let perturbed = mu.with_row(anchor, anchor_row.scaled_by(q)?)?;
    certificates.push(certify_at_most(
        "blend_row_contraction",
        perturbed.row(anchor).total_variation(),
        anchor_tv,
    )?);
    let new_norm = perturbed.field_norm();
    certificates.push(certify_at_most("norm_monotone", new_norm, m)?);

    let threshold = new_norm - params.r * params.epsilon;
    certificates.push(certify_strict(
        "anchor_survives",
        perturbed.row(anchor).total_mass().re,
        threshold,
    )?);
    let mut surviving = Vec::new();
    let mut surviving_slack = Vec::new();
    for &s in &comparable {
        let slack = perturbed.row(s).total_mass().re - threshold;
        if slack >= tol::SLACK_FLOOR {
            surviving.push(s);
            surviving_slack.push(slack);
        }
    }

    let perturbation = mu.distance(&perturbed)?;
    certificates.push(certify_close(
        "perturbation_identity",
        perturbation,
        q_one_anchor,
        tol::ARITHMETIC_REL,
    )?);
    let bound = params.perturbation_bound(m);
    certificates.push(certify_at_most("perturbation_bound", perturbation, bound)?);

    Ok(ReductionOutcome {
        field: perturbed,
        surviving,
        surviving_slack,
        case: Case::PhaseBlend,
        perturbation,
        bound,
        anchor: Some(anchor),
        bump_site: None,
        corrector: Some(corrector.values),
        blend_weight: Some(blend_weight),
        certificates,
    })
}

/// Full reduction step: verifies the hypothesis, dispatches on the regime,
/// and returns the certified outcome. A zero field is returned unchanged.
pub fn reduce(
    mu: &MeasureField,
    u: &[usize],
    params: &ReductionParams,
) -> Result<ReductionOutcome> {
    let m = mu.field_norm();
    if m == 0.0 {
        validate_index_set(mu, u)?;
        let threshold = -params.r * params.epsilon;
        let surviving_slack = u
            .iter()
            .map(|&s| mu.row(s).total_mass().re - threshold)
            .collect();
        return Ok(ReductionOutcome {
            field: mu.clone(),
            surviving: u.to_vec(),
            surviving_slack,
            case: Case::Trivial,
            perturbation: 0.0,
            bound: params.perturbation_bound(0.0),
            anchor: None,
            bump_site: None,
            corrector: None,
            blend_weight: None,
            certificates: Vec::new(),
        });
    }
    match classify_case(mu, u, m, params)? {
        Case::DiracBump => case1_dirac_bump(mu, u, m, params),
        Case::PhaseBlend => case2_phase_blend(mu, u, m, params),
        Case::Trivial => unreachable!("classification never returns the trivial tag"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(grid: &[&[Complex64]]) -> MeasureField {
        MeasureField::from_atoms(grid.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn radial_projection_examples() {
        assert!((radial_projection(c(2.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(radial_projection(c(0.0, 0.5)), c(0.0, 0.5));
        assert!((radial_projection(c(3.0, 4.0)) - c(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn params_defaults_satisfy_the_chain() {
        let p = ReductionParams::new(0.81, 0.2).unwrap();
        assert!(p.gamma < (2.0 * p.r - 1.0) * p.epsilon);
        assert!(2.0 * p.a() * p.epsilon + p.gamma + 2.0 * p.eta < 2.0 * p.epsilon);
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(matches!(
            ReductionParams::new(0.5, 0.1),
            Err(Error::InvalidRatio(_))
        ));
        assert!(matches!(
            ReductionParams::new(1.0, 0.1),
            Err(Error::InvalidRatio(_))
        ));
        assert!(matches!(
            ReductionParams::new(0.81, 0.0),
            Err(Error::InvalidEpsilon(_))
        ));
        let base = ReductionParams::new(0.75, 0.2).unwrap();
        // gamma at the cap (2r-1)*eps = 0.1 is rejected
        assert!(base.clone().with_gamma(0.1).is_err());
        // eta breaking 2a*eps + gamma + 2*eta < 2*eps is rejected
        let tight = ReductionParams::new(0.75, 0.2).unwrap();
        let cap = (2.0 * 0.2 - 2.0 * 0.25 * 0.2 - tight.gamma) / 2.0;
        assert!(tight.with_eta(cap).is_err());
    }

    #[test]
    fn classify_bump_case() {
        // norm level 1 with a hidden peak row outside u
        let mu = field(&[&[c(0.9, 0.0)], &[c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        // m - a*eps = 0.95, row 0 sits at 0.9
        assert_eq!(
            classify_case(&mu, &[0], 1.0, &params).unwrap(),
            Case::DiracBump
        );
    }

    #[test]
    fn classify_blend_case() {
        let mu = field(&[&[c(0.99, 0.0)], &[c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        assert_eq!(
            classify_case(&mu, &[0], 1.0, &params).unwrap(),
            Case::PhaseBlend
        );
    }

    #[test]
    fn classify_rejects_hypothesis_violations() {
        let mu = field(&[&[c(0.5, 0.0)], &[c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        match classify_case(&mu, &[0], 1.0, &params) {
            Err(Error::HypothesisViolated { row: 0, slack }) => assert!(slack <= 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bump_at_external_norm_level() {
        // single row at 0.5 with the norm level regarded as 1
        let mu = field(&[&[c(0.5, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        let out = case1_dirac_bump(&mu, &[0], 1.0, &params).unwrap();
        assert_eq!(out.case, Case::DiracBump);
        assert_eq!(out.bump_site, Some((0, 0)));
        assert!((out.perturbation - 0.05).abs() < 1e-15);
        assert!(out.perturbation <= (0.4f64).sqrt() + 0.4);
        assert!((out.field.row(0).atoms()[0] - c(0.55, 0.0)).norm() < 1e-15);
        assert_eq!(out.surviving, vec![0]);
    }

    #[test]
    fn bump_site_tie_breaks_to_lowest_point() {
        let mu = field(&[&[c(0.3, 0.0), c(0.3, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        let out = case1_dirac_bump(&mu, &[0], 1.0, &params).unwrap();
        assert_eq!(out.bump_site, Some((0, 0)));
    }

    #[test]
    fn bump_mass_vanishes_with_epsilon() {
        let mu = field(&[&[c(0.5, 0.0)]]);
        let params = ReductionParams::new(0.75, 1e-9).unwrap();
        let out = case1_dirac_bump(&mu, &[0], 1.0, &params).unwrap();
        // measured as a difference of moduli around 0.5, hence the ulp-level
        // allowance on top of the bump mass
        assert!(out.perturbation <= 0.25 * 1e-9 + 1e-15);
    }

    #[test]
    fn bump_leaves_other_rows_bit_identical() {
        let mu = field(&[&[c(0.9, 0.0)], &[c(0.81, 0.05)], &[c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        let out = reduce(&mu, &[0, 1], &params).unwrap();
        assert_eq!(out.case, Case::DiracBump);
        let anchor = out.anchor.unwrap();
        for s in 0..mu.s_size() {
            if s != anchor {
                assert_eq!(mu.row(s), out.field.row(s));
            }
        }
    }

    #[test]
    fn build_q_exact_conjugates_phases() {
        let nu = ComplexMeasure::new(vec![c(3.0, 4.0)]).unwrap();
        let q = build_q(&nu, 0.1, PhaseMode::Exact, None).unwrap();
        assert!((q.values[0] - c(0.6, -0.8)).norm() < 1e-15);
        assert!(q.l1_error < 1e-15);
    }

    #[test]
    fn build_q_zero_atom_convention() {
        let nu = ComplexMeasure::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let q = build_q(&nu, 0.1, PhaseMode::Exact, None).unwrap();
        assert_eq!(q.values[0], c(1.0, 0.0));
        assert_eq!(q.values[1], c(1.0, 0.0));
    }

    #[test]
    fn build_q_faithful_meets_gamma() {
        let nu = ComplexMeasure::new(vec![Complex64::from_polar(1.0, std::f64::consts::PI / 5.0)])
            .unwrap();
        let q = build_q(&nu, 0.1, PhaseMode::Faithful, Some(360)).unwrap();
        assert!(q.l1_error < std::f64::consts::TAU / 360.0);
        assert!(q.l1_error < 0.1);
        assert!(q.values[0].norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn build_q_faithful_rejects_coarse_grids() {
        let nu = ComplexMeasure::new(vec![Complex64::from_polar(1.0, 0.4)]).unwrap();
        assert!(matches!(
            build_q(&nu, 1e-4, PhaseMode::Faithful, Some(8)),
            Err(Error::ArcsTooCoarse { .. })
        ));
    }

    #[test]
    fn blend_aligns_the_anchor_row() {
        // blend with exact corrector turns [1, i] into [1, 1]
        let mu = field(&[&[c(1.0, 0.0), c(0.0, 1.0)]]);
        let params = ReductionParams::new(0.75, 1.2).unwrap();
        let out = case2_phase_blend(&mu, &[0], 2.0, &params).unwrap();
        assert_eq!(out.case, Case::PhaseBlend);
        assert!((out.field.row(0).atoms()[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((out.field.row(0).atoms()[1] - c(1.0, 0.0)).norm() < 1e-14);
        let re_mass = out.field.row(0).total_mass().re;
        assert!((re_mass - 2.0).abs() < 1e-14);
        assert!((out.field.field_norm() - 2.0).abs() < 1e-14);
        assert_eq!(out.surviving, vec![0]);
        assert!((out.perturbation - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(out.perturbation <= out.bound);
    }

    #[test]
    fn blend_is_identity_when_phases_align() {
        let mu = field(&[&[c(0.5, 0.0), c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.81, 0.5).unwrap();
        let out = case2_phase_blend(&mu, &[0], 1.5, &params).unwrap();
        assert_eq!(mu.row(0), out.field.row(0));
        assert_eq!(out.perturbation, 0.0);
    }

    #[test]
    fn reduce_zero_field_is_trivial() {
        let mu = MeasureField::zero(2, 3).unwrap();
        let params = ReductionParams::new(0.81, 0.1).unwrap();
        let out = reduce(&mu, &[0, 1], &params).unwrap();
        assert_eq!(out.case, Case::Trivial);
        assert_eq!(out.perturbation, 0.0);
        assert_eq!(out.surviving, vec![0, 1]);
        assert_eq!(out.field, mu);
    }

    #[test]
    fn reduce_dispatches_to_bump() {
        let mu = field(&[&[c(0.9, 0.0)], &[c(1.0, 0.0)]]);
        let params = ReductionParams::new(0.75, 0.2).unwrap();
        let out = reduce(&mu, &[0], &params).unwrap();
        assert_eq!(out.case, Case::DiracBump);
        assert!(out.perturbation <= params.perturbation_bound(1.0) + 1e-12);
        // the bumped row clears the tightened threshold
        let new_norm = out.field.field_norm();
        assert!(out.field.row(0).total_mass().re > new_norm - 0.75 * 0.2);
    }

    #[test]
    fn reduce_dispatches_to_blend() {
        let mu = field(&[&[c(0.7, 0.7)], &[c(0.2, 0.0)]]);
        let m = mu.field_norm();
        let params = ReductionParams::new(0.81, 0.4).unwrap();
        // row 0 is the peak, u = {0} satisfies the hypothesis: Re = 0.7 >
        // m - 0.4
        let out = reduce(&mu, &[0], &params).unwrap();
        assert_eq!(out.case, Case::PhaseBlend);
        assert!(out.field.field_norm() <= m + 1e-12);
        for (&s, &slack) in out.surviving.iter().zip(&out.surviving_slack) {
            assert!(slack > 0.0);
            let re = out.field.row(s).total_mass().re;
            assert!(re > out.field.field_norm() - 0.81 * 0.4);
        }
    }

    fn random_unit_field(rng: &mut ChaCha8Rng, s: usize, k: usize, scale: f64) -> MeasureField {
        let grid: Vec<Vec<Complex64>> = (0..s)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        Complex64::from_polar(
                            rng.gen::<f64>(),
                            rng.gen::<f64>() * std::f64::consts::TAU,
                        )
                    })
                    .collect()
            })
            .collect();
        let raw = MeasureField::from_atoms(grid).unwrap();
        let norm = raw.field_norm();
        let factor = vec![Complex64::new(scale / norm, 0.0); k];
        raw.scale_rows(&factor).unwrap()
    }

    #[test]
    fn randomized_blend_certificates_hold() {
        use crate::lift::{lift, PhaseMode as Mode};
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut blends = 0;
        for i in 0..100 {
            let s = rng.gen_range(1..=6);
            let k = rng.gen_range(1..=6);
            let scale = 0.2 + 1.8 * rng.gen::<f64>();
            let mu = random_unit_field(&mut rng, s, k, scale);
            let eps = 0.05 + 0.4 * rng.gen::<f64>();
            // lift to obtain a valid hypothesis set; the peak row is then
            // at the norm, which forces the blend branch
            let lifted = lift(&mu, eps, Mode::Exact, None).unwrap();
            let nu = mu.scale_rows(lifted.h.values()).unwrap();
            let norm = nu.field_norm();
            let u: Vec<usize> = (0..nu.s_size())
                .filter(|&srow| nu.row(srow).total_mass().re > norm - eps)
                .collect();
            let params = ReductionParams::new(0.6 + 0.35 * rng.gen::<f64>(), eps).unwrap();
            let out = reduce(&nu, &u, &params).unwrap_or_else(|e| panic!("instance {i}: {e}"));
            assert_eq!(out.case, Case::PhaseBlend);
            blends += 1;
            assert!(out.field.field_norm() <= norm + 1e-12);
            assert!(out.perturbation <= out.bound + 1e-12);
            assert!(!out.surviving.is_empty());
            // nonstrict certificates may carry roundoff-negative slack
            assert!(out.min_slack() >= -1e-12);
        }
        assert_eq!(blends, 100);
    }

    #[test]
    fn projection_is_pointwise_no_worse() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..500 {
            let u = c(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
            let target = Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
            assert!((radial_projection(u) - target).norm() <= (u - target).norm() + 1e-15);
        }
    }
}
