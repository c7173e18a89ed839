//! Report-number rendering: every quantity carries its exact rational form
//! (when one exists) next to a rounded decimal, so reports stay both
//! machine-checkable and readable. Rationals serialize as `"num/den"`
//! strings because the integers routinely exceed native ranges.

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::arith::{rational_to_f64, BigRational};

/// A number in a report: exact rational plus rounded decimal, or Monte
/// Carlo estimate with no exact form.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportNumber {
    Exact(BigRational),
    Approx(f64),
}

impl ReportNumber {
    pub fn exact(value: BigRational) -> Self {
        Self::Exact(value)
    }

    pub fn approx(value: f64) -> Self {
        Self::Approx(value)
    }

    /// The exact rational, when this number has one.
    pub fn exact_value(&self) -> Option<&BigRational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Approx(_) => None,
        }
    }

    /// Exact form rendered as `"num/den"`, or empty for estimates.
    pub fn exact_string(&self) -> String {
        match self {
            Self::Exact(r) => r.to_string(),
            Self::Approx(_) => String::new(),
        }
    }

    /// Rounded decimal value.
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact(r) => rational_to_f64(r),
            Self::Approx(v) => *v,
        }
    }
}

impl Serialize for ReportNumber {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ReportNumber", 2)?;
        match self {
            Self::Exact(r) => s.serialize_field("exact", &r.to_string())?,
            Self::Approx(_) => s.serialize_field("exact", &Option::<String>::None)?,
        }
        s.serialize_field("value", &self.value())?;
        s.end()
    }
}

/// Two-column plot data `x<TAB>y`, one row per point.
pub fn tsv_table(header: (&str, &str), rows: &[(String, f64)]) -> String {
    let mut out = format!("{}\t{}\n", header.0, header.1);
    for (x, y) in rows {
        out.push_str(&format!("{x}\t{y}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use num::BigInt;

    #[test]
    fn exact_numbers_render_both_forms() {
        let n = ReportNumber::exact(ratio(25, 4));
        assert_eq!(n.exact_string(), "25/4");
        assert_eq!(n.value(), 6.25);
        let json = serde_json::to_string(&n).unwrap();
        assert_eq!(json, r#"{"exact":"25/4","value":6.25}"#);
    }

    #[test]
    fn estimates_have_no_exact_form() {
        let n = ReportNumber::approx(0.5);
        assert_eq!(n.exact_string(), "");
        let json = serde_json::to_string(&n).unwrap();
        assert_eq!(json, r#"{"exact":null,"value":0.5}"#);
    }

    #[test]
    fn huge_rationals_round_sanely() {
        // (2^2000 + 1) / 2^2001 is about one half.
        let num = BigInt::from(2).pow(2000) + BigInt::from(1);
        let den = BigInt::from(2).pow(2001);
        let n = ReportNumber::exact(BigRational::new(num, den));
        assert!((n.value() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tsv_rows() {
        let t = tsv_table(("lag", "bound"), &[("1".into(), 1.0), ("10".into(), 0.26)]);
        assert_eq!(t, "lag\tbound\n1\t1\n10\t0.26\n");
    }
}
