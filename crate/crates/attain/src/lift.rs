//! Phase lift: construct a unimodular function `h` and a nonempty set of
//! row indices on which the field, tested against `h`, comes within `delta`
//! of its norm. After the lift the attainment question for the original
//! field becomes a defect question at the constant function 1.
//!
//! Two modes are provided. Exact mode conjugates the phases of the peak row
//! directly. Faithful mode quantizes those phases to the midpoints of a
//! partition of the unit circle into small arcs, exercising the certified
//! quantization bound `arc_diameter * row_variation < delta / 8`.

use num_complex::Complex64;

use crate::certificate::{certify_close, certify_strict, Certificate};
use crate::error::{Error, Result};
use crate::field::{MeasureField, UnimodularFunction};
use crate::measure::ComplexMeasure;
use crate::tol;

/// How the lift builds its unimodular witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// Conjugate phases of the peak row, the tightest choice.
    #[default]
    Exact,
    /// Phases quantized to arc midpoints of a circle partition.
    Faithful,
}

impl std::fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseMode::Exact => write!(f, "exact"),
            PhaseMode::Faithful => write!(f, "faithful"),
        }
    }
}

/// Partition of the unit circle into `arc_count` arcs of equal angular
/// width, represented by their midpoints. Arc `j` is centered at angle
/// `j * 2*pi / arc_count`; representatives are computed on demand so the
/// partition stays cheap even for billions of arcs.
#[derive(Debug, Clone)]
pub struct CirclePartition {
    arc_count: usize,
    arc_width: f64,
    arc_diameter: f64,
}

impl CirclePartition {
    /// Partition whose arcs have chord diameter strictly below `diameter`.
    pub fn for_diameter(diameter: f64) -> Result<Self> {
        if !diameter.is_finite() || diameter <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("arc diameter must be positive, got {diameter}"),
            });
        }
        let arc_count = ((std::f64::consts::TAU / diameter).ceil() as usize).max(1);
        Ok(Self {
            arc_count,
            arc_width: std::f64::consts::TAU / arc_count as f64,
            arc_diameter: diameter,
        })
    }

    /// Partition with a fixed number of arcs; the certified diameter is the
    /// arc length `2*pi / arc_count`, an upper bound for the chord.
    pub fn with_arcs(arc_count: usize) -> Result<Self> {
        if arc_count == 0 {
            return Err(Error::InvalidParams {
                reason: "arc count must be positive".to_string(),
            });
        }
        let arc_width = std::f64::consts::TAU / arc_count as f64;
        Ok(Self {
            arc_count,
            arc_width,
            arc_diameter: arc_width,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn arc_diameter(&self) -> f64 {
        self.arc_diameter
    }

    /// Midpoint of arc `j`.
    pub fn representative(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.arc_width * j as f64)
    }

    /// Index of the arc containing the unimodular number `z`.
    pub fn arc_index(&self, z: Complex64) -> usize {
        let j = (z.arg() / self.arc_width).round() as i64;
        j.rem_euclid(self.arc_count as i64) as usize
    }
}

/// Record of a faithful-mode quantization.
///
/// `residual_mass` is the variation mass left outside the sets where the
/// witness equals an arc representative; on a finite point set the witness
/// is piecewise constant everywhere, so it is identically zero and recorded
/// only to make that degeneracy explicit.
#[derive(Debug, Clone)]
pub struct QuantizationRecord {
    pub arc_count: usize,
    pub arc_diameter: f64,
    pub l1_error: f64,
    pub l1_bound: f64,
    pub residual_mass: f64,
}

/// Output of [`lift`]: the unimodular witness, the surviving row indices,
/// and the per-row slack of the strict inequality that admitted them.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub h: UnimodularFunction,
    pub witness_set: Vec<usize>,
    pub slack: Vec<f64>,
    pub peak: usize,
    pub delta: f64,
    pub mode: PhaseMode,
    pub quantization: Option<QuantizationRecord>,
    pub certificates: Vec<Certificate>,
}

/// Row of largest total variation; on a finite set the maximum is attained,
/// so the peak satisfies the margin bound for every positive `delta`.
pub fn select_peak_point(mu: &MeasureField, delta: f64) -> Result<usize> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidDelta(delta));
    }
    if mu.field_norm() == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(mu.peak_row())
}

/// Snaps the conjugate phases of `nu` to arc midpoints. At every atom of
/// nonzero weight the snapped value stays within the arc diameter of the
/// conjugate phase.
pub fn quantize_phases(nu: &ComplexMeasure, partition: &CirclePartition) -> UnimodularFunction {
    let values = nu
        .atoms()
        .iter()
        .map(|a| {
            let r = a.norm();
            let phi = if r == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                (a / r).conj()
            };
            partition.representative(partition.arc_index(phi))
        })
        .collect();
    UnimodularFunction::new(values).expect("arc midpoints are unimodular")
}

fn real_pairing(h: &UnimodularFunction, row: &ComplexMeasure) -> f64 {
    h.values()
        .iter()
        .zip(row.atoms())
        .map(|(v, a)| (v * a).re)
        .sum()
}

/// Builds the unimodular witness for `mu` at tolerance `delta`.
///
/// Zero fields return the constant witness 1 together with every row. For
/// nonzero fields the witness set collects every row whose real pairing
/// against `h` exceeds `field_norm - delta`; the peak row is always a
/// member. In faithful mode `arcs` overrides the default partition size,
/// and an error is returned when the requested partition is too coarse for
/// `delta`.
pub fn lift(
    mu: &MeasureField,
    delta: f64,
    mode: PhaseMode,
    arcs: Option<usize>,
) -> Result<LiftResult> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidDelta(delta));
    }
    let norm = mu.field_norm();
    if norm == 0.0 {
        let h = UnimodularFunction::constant_one(mu.k_size())?;
        let witness_set: Vec<usize> = (0..mu.s_size()).collect();
        let slack = vec![delta; mu.s_size()];
        return Ok(LiftResult {
            h,
            witness_set,
            slack,
            peak: 0,
            delta,
            mode,
            quantization: None,
            certificates: Vec::new(),
        });
    }

    let peak = select_peak_point(mu, delta)?;
    let peak_row = mu.row(peak);
    let peak_tv = peak_row.total_variation();
    let mut certificates = Vec::new();

    let (h, quantization) = match mode {
        PhaseMode::Exact => {
            let h = UnimodularFunction::new(peak_row.polar_decompose().conjugate_phases())?;
            certificates.push(certify_close(
                "peak_pairing_exact",
                real_pairing(&h, peak_row),
                peak_tv,
                tol::ARITHMETIC_REL,
            )?);
            (h, None)
        }
        PhaseMode::Faithful => {
            let partition = match arcs {
                Some(n) => CirclePartition::with_arcs(n)?,
                // default eta keeps eta * peak_tv at delta/16, half the
                // admissible budget
                None => CirclePartition::for_diameter(delta / (16.0 * peak_tv))?,
            };
            let eta = partition.arc_diameter();
            let arc_budget = eta * peak_tv;
            if arc_budget.is_nan() || arc_budget >= delta / 8.0 {
                let required = (std::f64::consts::TAU * peak_tv * 8.0 / delta).ceil() as usize + 1;
                return Err(Error::ArcsTooCoarse {
                    arcs: partition.arc_count(),
                    required,
                });
            }
            let h = quantize_phases(peak_row, &partition);
            let conj_phases = peak_row.polar_decompose().conjugate_phases();
            let l1_error: f64 = h
                .values()
                .iter()
                .zip(&conj_phases)
                .zip(peak_row.atoms())
                .map(|((hv, phi), a)| (hv - phi).norm() * a.norm())
                .sum();
            let l1_bound = eta * peak_tv;
            certificates.push(certify_strict("quantization_l1", l1_bound, l1_error)?);
            certificates.push(certify_strict(
                "quantization_budget",
                delta / 8.0,
                l1_bound,
            )?);
            // intermediate bound: the peak pairing clears norm - delta/2
            certificates.push(certify_strict(
                "peak_pairing_intermediate",
                real_pairing(&h, peak_row),
                norm - delta / 2.0,
            )?);
            (
                h,
                Some(QuantizationRecord {
                    arc_count: partition.arc_count(),
                    arc_diameter: eta,
                    l1_error,
                    l1_bound,
                    residual_mass: 0.0,
                }),
            )
        }
    };

    let threshold = norm - delta;
    let mut witness_set = Vec::new();
    let mut slack = Vec::new();
    for s in 0..mu.s_size() {
        let margin = real_pairing(&h, mu.row(s)) - threshold;
        // membership in the witness set is a strict inequality; admit only
        // rows that clear the certified slack floor
        if margin >= tol::SLACK_FLOOR {
            witness_set.push(s);
            slack.push(margin);
        }
    }
    certificates.push(certify_strict(
        "peak_membership",
        real_pairing(&h, peak_row),
        threshold,
    )?);

    Ok(LiftResult {
        h,
        witness_set,
        slack,
        peak,
        delta,
        mode,
        quantization,
        certificates,
    })
}
