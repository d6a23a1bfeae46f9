//! Measure fields: one complex measure per row index, representing an
//! operator between spaces of continuous functions on finite sets. The
//! operator norm is the largest row total variation, and a witness attains
//! the norm when applying the field to it reaches that value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::ComplexMeasure;

/// A field of complex measures, `rows[s]` over a common point set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureField {
    rows: Vec<ComplexMeasure>,
    k_size: usize,
}

impl MeasureField {
    pub fn new(rows: Vec<ComplexMeasure>) -> Result<Self> {
        let k_size = match rows.first() {
            Some(row) => row.k_size(),
            None => return Err(Error::EmptyField),
        };
        for row in &rows {
            if row.k_size() != k_size {
                return Err(Error::DimensionMismatch {
                    left: k_size,
                    right: row.k_size(),
                });
            }
        }
        Ok(Self { rows, k_size })
    }

    pub fn from_atoms(grid: Vec<Vec<Complex64>>) -> Result<Self> {
        let rows = grid
            .into_iter()
            .map(ComplexMeasure::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn zero(s_size: usize, k_size: usize) -> Result<Self> {
        let rows = (0..s_size)
            .map(|_| ComplexMeasure::zero(k_size))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn s_size(&self) -> usize {
        self.rows.len()
    }

    pub fn k_size(&self) -> usize {
        self.k_size
    }

    pub fn row(&self, s: usize) -> &ComplexMeasure {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[ComplexMeasure] {
        &self.rows
    }

    /// Operator norm: the largest row total variation.
    pub fn field_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.total_variation())
            .fold(0.0, f64::max)
    }

    /// Index of the row of largest total variation, lowest index on ties.
    pub fn peak_row(&self) -> usize {
        let mut best = 0;
        let mut best_tv = self.rows[0].total_variation();
        for (s, row) in self.rows.iter().enumerate().skip(1) {
            let tv = row.total_variation();
            if tv > best_tv {
                best = s;
                best_tv = tv;
            }
        }
        best
    }

    /// Evaluates the represented operator at `f`:
    /// `out[s] = sum_t f[t] * rows[s][t]`.
    pub fn apply(&self, f: &Witness) -> Result<Vec<Complex64>> {
        if f.len() != self.k_size {
            return Err(Error::DimensionMismatch {
                left: f.len(),
                right: self.k_size,
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.atoms().iter().zip(f.values()).map(|(a, v)| v * a).sum())
            .collect())
    }

    /// Gap between the operator norm and the value reached at `f`. Zero
    /// means `f` is a norm-attainment witness.
    pub fn attainment_defect(&self, f: &Witness) -> Result<f64> {
        let image = self.apply(f)?;
        let reached = image.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(self.field_norm() - reached)
    }

    /// Exact finite-dimensional attainment witness: the conjugate phases of
    /// the peak row. Every nonzero field has one.
    pub fn exact_witness(&self) -> Result<UnimodularFunction> {
        if self.field_norm() == 0.0 {
            return Err(Error::ZeroField);
        }
        let peak = self.peak_row();
        UnimodularFunction::new(self.rows[peak].polar_decompose().conjugate_phases())
    }

    /// Field distance `sup_s TV(self(s) - other(s))`.
    pub fn distance(&self, other: &MeasureField) -> Result<f64> {
        if other.s_size() != self.s_size() || other.k_size() != self.k_size() {
            return Err(Error::DimensionMismatch {
                left: self.s_size() * self.k_size(),
                right: other.s_size() * other.k_size(),
            });
        }
        let mut worst = 0.0f64;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            worst = worst.max(a.difference(b)?.total_variation());
        }
        Ok(worst)
    }

    /// Scales every row by the same density `g` (row-wise `g * mu(s)`).
    pub fn scale_rows(&self, g: &[Complex64]) -> Result<MeasureField> {
        let rows = self
            .rows
            .iter()
            .map(|row| row.scaled_by(g))
            .collect::<Result<Vec<_>>>()?;
        MeasureField::new(rows)
    }

    /// Returns a copy with row `s` replaced; all other rows are untouched.
    pub fn with_row(&self, s: usize, row: ComplexMeasure) -> Result<MeasureField> {
        if s >= self.rows.len() {
            return Err(Error::RowOutOfRange {
                index: s,
                size: self.rows.len(),
            });
        }
        if row.k_size() != self.k_size {
            return Err(Error::DimensionMismatch {
                left: self.k_size,
                right: row.k_size(),
            });
        }
        let mut rows = self.rows.clone();
        rows[s] = row;
        MeasureField::new(rows)
    }
}

/// A candidate attainment witness: a complex vector in the closed unit ball
/// of the sup norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    values: Vec<Complex64>,
}

impl Witness {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup > 1.0 + 1e-12 {
            return Err(Error::WitnessExceedsBall(sup));
        }
        Ok(Self { values })
    }

    pub fn constant_one(k_size: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0, 0.0); k_size])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A function of unit modulus everywhere, the witness class in which norm
/// attainment is realized. Entries are re-normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularFunction {
    values: Vec<Complex64>,
}

impl UnimodularFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let mut normalized = Vec::with_capacity(values.len());
        for (index, v) in values.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            let r = v.norm();
            if r == 0.0 {
                return Err(Error::ZeroEntry { index });
            }
            normalized.push(v / r);
        }
        Ok(Self { values: normalized })
    }

    pub fn constant_one(k_size: usize) -> Result<Self> {
        if k_size == 0 {
            return Err(Error::EmptyPointSet);
        }
        Ok(Self {
            values: vec![Complex64::new(1.0, 0.0); k_size],
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conjugated(&self) -> UnimodularFunction {
        UnimodularFunction {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }
}

impl From<&UnimodularFunction> for Witness {
    fn from(h: &UnimodularFunction) -> Self {
        // normalized entries sit within roundoff of the unit circle
        Witness {
            values: h.values.clone(),
        }
    }
}
