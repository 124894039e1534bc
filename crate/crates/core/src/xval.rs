//! Extended measure values.
//!
//! Gain-matrix measures stay exact, Shannon quantities are floating point,
//! and loss-based measures may be infinite. `XVal` carries all three.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{QifError, Result};
use crate::rat::Rat;

/// Absolute tolerance for comparisons involving floating-point values.
pub const SHANNON_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum XVal {
    Exact(Rat),
    Approx(f64),
    PosInf,
    /// Only produced by differences, e.g. a multi-step loss leakage whose
    /// belief assigns zero mass to the baseline's secret.
    NegInf,
}

impl XVal {
    pub fn zero() -> Self {
        XVal::Exact(Rat::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, XVal::Exact(_) | XVal::Approx(_))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, XVal::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            XVal::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            XVal::Exact(r) => r.to_f64(),
            XVal::Approx(v) => *v,
            XVal::PosInf => f64::INFINITY,
            XVal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn add(&self, other: &XVal) -> Result<XVal> {
        use XVal::*;
        Ok(match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => return Err(QifError::IndeterminateDifference),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Exact(a), Exact(b)) => Exact(a + b),
            (a, b) => Approx(a.to_f64() + b.to_f64()),
        })
    }

    pub fn neg(&self) -> XVal {
        match self {
            XVal::Exact(r) => XVal::Exact(-r),
            XVal::Approx(v) => XVal::Approx(-v),
            XVal::PosInf => XVal::NegInf,
            XVal::NegInf => XVal::PosInf,
        }
    }

    pub fn sub(&self, other: &XVal) -> Result<XVal> {
        self.add(&other.neg())
    }

    /// Scales by a non-negative weight with the convention `0 * inf = 0`.
    pub fn scale(&self, w: &Rat) -> XVal {
        debug_assert!(!w.is_negative());
        if w.is_zero() {
            return XVal::zero();
        }
        match self {
            XVal::Exact(r) => XVal::Exact(r * w),
            XVal::Approx(v) => XVal::Approx(v * w.to_f64()),
            inf => inf.clone(),
        }
    }

    /// Sum of `weight * value` terms under the `0 * inf = 0` convention.
    pub fn weighted_sum<'a, I>(terms: I) -> Result<XVal>
    where
        I: IntoIterator<Item = (&'a Rat, XVal)>,
    {
        terms
            .into_iter()
            .try_fold(XVal::zero(), |acc, (w, v)| acc.add(&v.scale(w)))
    }

    /// Equality up to [`SHANNON_TOLERANCE`] when either side is approximate.
    pub fn approx_eq(&self, other: &XVal, tol: f64) -> bool {
        match (self, other) {
            (XVal::Exact(a), XVal::Exact(b)) => a == b,
            (XVal::PosInf, XVal::PosInf) | (XVal::NegInf, XVal::NegInf) => true,
            (a, b) if a.is_finite() && b.is_finite() => (a.to_f64() - b.to_f64()).abs() <= tol,
            _ => false,
        }
    }

    pub fn max(self, other: XVal) -> XVal {
        if other.partial_cmp(&self) == Some(Ordering::Greater) { other } else { self }
    }

    pub fn min(self, other: XVal) -> XVal {
        if other.partial_cmp(&self) == Some(Ordering::Less) { other } else { self }
    }

    /// Renders exact values as rationals, or as `digits`-place decimals when
    /// `digits` is given.
    pub fn render(&self, digits: Option<usize>) -> String {
        match (self, digits) {
            (XVal::Exact(r), None) => r.to_string(),
            (XVal::Exact(r), Some(d)) => r.to_decimal_string(d),
            (XVal::Approx(v), None) => format!("{v}"),
            (XVal::Approx(v), Some(d)) => format!("{v:.d$}"),
            (XVal::PosInf, _) => "inf".to_string(),
            (XVal::NegInf, _) => "-inf".to_string(),
        }
    }
}

impl From<Rat> for XVal {
    fn from(r: Rat) -> Self {
        XVal::Exact(r)
    }
}

impl PartialOrd for XVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use XVal::*;
        match (self, other) {
            (PosInf, PosInf) | (NegInf, NegInf) => Some(Ordering::Equal),
            (PosInf, _) | (_, NegInf) => Some(Ordering::Greater),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (Exact(a), Exact(b)) => Some(a.cmp(b)),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }
}

impl fmt::Display for XVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

/// Exact values serialize as rational strings, approximate ones as JSON
/// numbers, infinities as `"inf"` / `"-inf"`.
impl Serialize for XVal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            XVal::Exact(r) => r.serialize(serializer),
            XVal::Approx(v) => serializer.serialize_f64(*v),
            XVal::PosInf => serializer.serialize_str("inf"),
            XVal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}
