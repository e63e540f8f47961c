//! Numeric comparisons produced by the checks.

use serde::{Deserialize, Serialize};

/// Default relative tolerance for comparisons involving floating point.
pub const REL_TOL: f64 = 1e-9;

/// An exact integer or a double.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Exact(i128),
    Real(f64),
}

impl Quantity {
    pub fn as_f64(self) -> f64 {
        match self {
            Quantity::Exact(v) => v as f64,
            Quantity::Real(v) => v,
        }
    }

    /// Integers outside the `i64` range are written as decimal strings.
    pub fn to_json(self) -> serde_json::Value {
        match self {
            Quantity::Exact(v) => match i64::try_from(v) {
                Ok(x) => x.into(),
                Err(_) => v.to_string().into(),
            },
            Quantity::Real(v) => serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, Into::into),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::Number(n) if n.is_i64() => n.as_i64().map(|x| Quantity::Exact(x as i128)),
            serde_json::Value::Number(n) => n.as_f64().map(Quantity::Real),
            serde_json::Value::String(s) => s.parse::<i128>().ok().map(Quantity::Exact),
            serde_json::Value::Null => Some(Quantity::Real(f64::NAN)),
            _ => None,
        }
    }
}

impl From<i128> for Quantity {
    fn from(v: i128) -> Self {
        Quantity::Exact(v)
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Real(v)
    }
}

impl From<usize> for Quantity {
    fn from(v: usize) -> Self {
        Quantity::Exact(v as i128)
    }
}

/// How the two sides of a [`Relation`] are compared.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Comparison {
    /// `lhs = rhs`.
    Equal,
    /// `lhs ≤ rhs`.
    AtMost,
    /// No verdict; only the ratio is reported.
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub label: String,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub cmp: Comparison,
    /// Relative tolerance for floating point sides.
    pub tol: f64,
    /// Magnitude the tolerance is measured against, besides the two sides.
    pub scale: f64,
}

impl Relation {
    pub fn new(label: impl Into<String>, lhs: impl Into<Quantity>, rhs: impl Into<Quantity>, cmp: Comparison) -> Self {
        Relation { label: label.into(), lhs: lhs.into(), rhs: rhs.into(), cmp, tol: REL_TOL, scale: 0.0 }
    }

    pub fn equal(label: impl Into<String>, lhs: impl Into<Quantity>, rhs: impl Into<Quantity>) -> Self {
        Self::new(label, lhs, rhs, Comparison::Equal)
    }

    pub fn at_most(label: impl Into<String>, lhs: impl Into<Quantity>, rhs: impl Into<Quantity>) -> Self {
        Self::new(label, lhs, rhs, Comparison::AtMost)
    }

    pub fn report(label: impl Into<String>, lhs: impl Into<Quantity>, rhs: impl Into<Quantity>) -> Self {
        Self::new(label, lhs, rhs, Comparison::Report)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn ratio(&self) -> Option<f64> {
        let r = self.rhs.as_f64();
        if r == 0.0 {
            if self.lhs.as_f64() == 0.0 {
                Some(1.0)
            } else {
                None
            }
        } else {
            let q = self.lhs.as_f64() / r;
            q.is_finite().then_some(q)
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "ratio": self.ratio(),
            "pass": self.passes(),
        })
    }

    /// Verdict, or `None` for reported relations.
    pub fn passes(&self) -> Option<bool> {
        let slack = |l: f64, r: f64| self.tol * l.abs().max(r.abs()).max(self.scale);
        match (self.cmp, self.lhs, self.rhs) {
            (Comparison::Report, _, _) => None,
            (Comparison::Equal, Quantity::Exact(l), Quantity::Exact(r)) => Some(l == r),
            (Comparison::AtMost, Quantity::Exact(l), Quantity::Exact(r)) => Some(l <= r),
            (Comparison::Equal, l, r) => {
                let (l, r) = (l.as_f64(), r.as_f64());
                Some(l.is_finite() && r.is_finite() && (l - r).abs() <= slack(l, r))
            }
            (Comparison::AtMost, l, r) => {
                let (l, r) = (l.as_f64(), r.as_f64());
                Some(!l.is_nan() && !r.is_nan() && l <= r + slack(l, r))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_real_verdicts() {
        assert_eq!(Relation::equal("e", 3i128, 3i128).passes(), Some(true));
        assert_eq!(Relation::at_most("l", 4i128, 3i128).passes(), Some(false));
        assert_eq!(Relation::equal("r", 1.0, 1.0 + 1e-12).passes(), Some(true));
        assert_eq!(Relation::at_most("r", 1.0 + 1e-6, 1.0).passes(), Some(false));
        assert_eq!(Relation::report("a", 1.0, 2.0).passes(), None);
        assert_eq!(Relation::report("a", 1.0, 2.0).ratio(), Some(0.5));
    }
}
