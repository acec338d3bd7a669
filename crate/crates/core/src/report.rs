//! Check rows shared by the acceptance battery and the command-line reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}

/// How the value of a row is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value - expected| <= tolerance`.
    Equal,
    /// `value <= tolerance`.
    AtMost,
    /// `value >= tolerance`.
    AtLeast,
    /// `value` is 1 for pass and 0 for fail.
    Flag,
}

/// One verified quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub check_id: String,
    pub anchor: String,
    pub value: f64,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub status: Status,
}

impl ReportRow {
    pub fn equal(id: &str, anchor: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        let ok = (value - expected).abs() <= tolerance;
        Self::build(id, anchor, value, Some(expected), tolerance, Comparison::Equal, ok)
    }

    pub fn at_most(id: &str, anchor: &str, value: f64, limit: f64) -> Self {
        Self::build(id, anchor, value, None, limit, Comparison::AtMost, value <= limit)
    }

    pub fn at_least(id: &str, anchor: &str, value: f64, limit: f64) -> Self {
        Self::build(id, anchor, value, None, limit, Comparison::AtLeast, value >= limit)
    }

    pub fn flag(id: &str, anchor: &str, ok: bool) -> Self {
        Self::build(id, anchor, if ok { 1.0 } else { 0.0 }, None, 0.0, Comparison::Flag, ok)
    }

    fn build(
        id: &str,
        anchor: &str,
        value: f64,
        expected: Option<f64>,
        tolerance: f64,
        comparison: Comparison,
        ok: bool,
    ) -> Self {
        Self {
            check_id: id.to_string(),
            anchor: anchor.to_string(),
            value,
            expected,
            tolerance,
            comparison,
            // NaN never passes
            status: Status::from_bool(ok && !value.is_nan()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert!(ReportRow::equal("a", "x", 1.0, 1.0 + 1e-13, 1e-12).passed());
        assert!(!ReportRow::equal("a", "x", 1.0, 1.1, 1e-12).passed());
        assert!(ReportRow::at_most("b", "x", 0.5, 1.0).passed());
        assert!(!ReportRow::at_least("c", "x", 0.5, 1.0).passed());
        assert!(!ReportRow::at_most("d", "x", f64::NAN, 1.0).passed());
        assert!(!ReportRow::flag("e", "x", false).passed());
    }
}
