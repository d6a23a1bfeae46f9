use crate::error::{Error, Result};
use crate::tol;

/// Relation asserted by a [`Certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs > rhs`, certified with slack at least the strictness floor.
    StrictlyAbove,
    /// `lhs <= rhs`, up to an absolute roundoff allowance.
    AtMost,
    /// `lhs == rhs`, up to a relative tolerance.
    CloseTo,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::StrictlyAbove => ">",
            Relation::AtMost => "<=",
            Relation::CloseTo => "==",
        }
    }
}

/// One checked inequality: both sides and the margin by which it held.
///
/// `slack` is the distance to violation, so it is nonnegative for every
/// certificate that was issued (`certify_*` return an error instead of a
/// certificate when the margin is missing).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} {} {} (slack {:e})",
            self.name,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            self.slack
        )
    }
}

fn fail(name: &str, relation: Relation, lhs: f64, rhs: f64, slack: f64) -> Error {
    let _ = relation;
    Error::CertificateFailed {
        name: name.to_string(),
        lhs,
        rhs,
        slack,
    }
}

/// Certify the strict inequality `lhs > rhs`.
///
/// A strict inequality whose slack falls below the floor is reported as a
/// failure rather than rounded up.
pub fn certify_strict(name: &str, lhs: f64, rhs: f64) -> Result<Certificate> {
    let slack = lhs - rhs;
    if slack.is_nan() || slack < tol::SLACK_FLOOR {
        return Err(fail(name, Relation::StrictlyAbove, lhs, rhs, slack));
    }
    Ok(Certificate {
        name: name.to_string(),
        relation: Relation::StrictlyAbove,
        lhs,
        rhs,
        slack,
    })
}

/// Certify `lhs <= rhs` with an absolute roundoff allowance.
pub fn certify_at_most(name: &str, lhs: f64, rhs: f64) -> Result<Certificate> {
    let slack = rhs - lhs;
    if slack.is_nan() || slack < -tol::COMPARISON_ABS {
        return Err(fail(name, Relation::AtMost, lhs, rhs, slack));
    }
    Ok(Certificate {
        name: name.to_string(),
        relation: Relation::AtMost,
        lhs,
        rhs,
        slack,
    })
}

/// Certify `lhs == rhs` to a relative tolerance (absolute below scale 1).
pub fn certify_close(name: &str, lhs: f64, rhs: f64, rel: f64) -> Result<Certificate> {
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    let gap = (lhs - rhs).abs();
    let slack = rel * scale - gap;
    if slack.is_nan() || slack < 0.0 {
        return Err(fail(name, Relation::CloseTo, lhs, rhs, slack));
    }
    Ok(Certificate {
        name: name.to_string(),
        relation: Relation::CloseTo,
        lhs,
        rhs,
        slack,
    })
}
