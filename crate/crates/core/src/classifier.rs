//! Decision tree mapping the exact invariants of a pair to one of ten classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::invariants::{invariant_report, Branch, InvariantReport, MetricPair};
use crate::scalar::{Field, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
}

impl ClassId {
    pub const ALL: [ClassId; 10] = [
        ClassId::T1,
        ClassId::T2,
        ClassId::T3,
        ClassId::T4,
        ClassId::T5,
        ClassId::T6,
        ClassId::T7,
        ClassId::T8,
        ClassId::T9,
        ClassId::T10,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::T1 => "T1_THREE_REAL_DISTINCT",
            ClassId::T2 => "T2_TIMELIKE_DOUBLE",
            ClassId::T3 => "T3_COMPLEX_PAIR",
            ClassId::T4 => "T4_SPACELIKE_DOUBLE_S0",
            ClassId::T5 => "T5_SPACELIKE_DOUBLE_SPLUS",
            ClassId::T6 => "T6_SPACELIKE_DOUBLE_SMINUS",
            ClassId::T7 => "T7_TRIPLE_SCALAR",
            ClassId::T8 => "T8_TRIPLE_R1_SPLUS",
            ClassId::T9 => "T9_TRIPLE_R1_SMINUS",
            ClassId::T10 => "T10_TRIPLE_R2",
        }
    }

    /// Names of the continuous parameters of the canonical form, in order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ClassId::T1 | ClassId::T3 => &["a", "b", "c"],
            ClassId::T2 => &["a", "b"],
            ClassId::T4 | ClassId::T5 | ClassId::T6 => &["a", "c"],
            ClassId::T7 | ClassId::T8 | ClassId::T9 | ClassId::T10 => &["a"],
        }
    }

    /// Whether the canonical `g` is the hyperbolic form rather than `diag(1,−1,−1)`.
    pub fn uses_hyperbolic_g(self) -> bool {
        matches!(
            self,
            ClassId::T5 | ClassId::T6 | ClassId::T8 | ClassId::T9 | ClassId::T10
        )
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    /// Accepts the full name, the short prefix (`T4`) or the number (`4`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t
            .strip_prefix('T')
            .or_else(|| t.strip_prefix('t'))
            .unwrap_or(t);
        let digits = digits.split('_').next().unwrap_or("");
        if let Ok(n) = digits.parse::<u8>() {
            if let Some(c) = ClassId::from_number(n) {
                if t == digits || t.eq_ignore_ascii_case(&format!("T{n}")) || t == c.name() {
                    return Ok(c);
                }
            }
        }
        Err(Error::Parse(format!("unknown class '{s}'")))
    }
}

impl Serialize for ClassId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ClassId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(u8),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(n) => ClassId::from_number(n)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown class {n}"))),
        }
    }
}

/// Human-readable conditions on `D3`, `D2` and the σ invariants that define a class.
pub fn class_conditions(class: ClassId) -> &'static str {
    match class {
        ClassId::T1 => "D3>0",
        ClassId::T2 => "D3=0, D2>0, sigma0=+1",
        ClassId::T3 => "D3<0",
        ClassId::T4 => "D3=0, D2>0, sigma0=-1, sigma1=0",
        ClassId::T5 => "D3=0, D2>0, sigma0=-1, sigma1=+1",
        ClassId::T6 => "D3=0, D2>0, sigma0=-1, sigma1=-1",
        ClassId::T7 => "D3=0, D2=0, sigma2=0",
        ClassId::T8 => "D3=0, D2=0, sigma2=1, sigma3=+1",
        ClassId::T9 => "D3=0, D2=0, sigma2=1, sigma3=-1",
        ClassId::T10 => "D3=0, D2=0, sigma2=2",
    }
}

/// Applies the decision tree to a report whose sign decisions are already made.
pub fn class_from_report<T: Field>(report: &InvariantReport<T>) -> Result<ClassId> {
    let missing = |what: &str| Error::invariant(format!("{what} missing from invariant report"));
    Ok(match &report.branch {
        Branch::ThreeDistinct => ClassId::T1,
        Branch::ComplexPair => ClassId::T3,
        Branch::SimpleDouble { .. } => match report.sigma0.ok_or_else(|| missing("sigma0"))? {
            1 => ClassId::T2,
            _ => match report.sigma1.ok_or_else(|| missing("sigma1"))? {
                0 => ClassId::T4,
                1 => ClassId::T5,
                _ => ClassId::T6,
            },
        },
        Branch::Triple { .. } => match report.sigma2.ok_or_else(|| missing("sigma2"))? {
            0 => ClassId::T7,
            1 => match report.sigma3.ok_or_else(|| missing("sigma3"))? {
                1 => ClassId::T8,
                _ => ClassId::T9,
            },
            _ => ClassId::T10,
        },
    })
}

/// Exact classification together with the report it was derived from.
pub fn classify_with_report(pair: &MetricPair<Q>) -> Result<(ClassId, InvariantReport<Q>)> {
    let report = invariant_report(pair)?;
    let class = class_from_report(&report)?;
    Ok((class, report))
}

pub fn classify(pair: &MetricPair<Q>) -> Result<ClassId> {
    classify_with_report(pair).map(|(c, _)| c)
}

/// `true` when the report satisfies the defining conditions of `class`.
pub fn report_matches<T: Field>(report: &InvariantReport<T>, class: ClassId) -> bool {
    class_from_report(report).is_ok_and(|c| c == class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix3;
    use crate::scalar::qi;

    fn sq(rows: [[i64; 3]; 3]) -> SymMatrix3<Q> {
        SymMatrix3::from_rows(rows.map(|r| r.map(qi))).unwrap()
    }

    fn pair(g: [[i64; 3]; 3], gc: [[i64; 3]; 3]) -> MetricPair<Q> {
        MetricPair::new(sq(g), sq(gc)).unwrap()
    }

    const MINK: [[i64; 3]; 3] = [[1, 0, 0], [0, -1, 0], [0, 0, -1]];
    const HYP: [[i64; 3]; 3] = [[0, 1, 0], [1, 0, 0], [0, 0, -1]];

    #[test]
    fn names_and_aliases() {
        for c in ClassId::ALL {
            assert_eq!(c.name().parse::<ClassId>().unwrap(), c);
            assert_eq!(c.number().to_string().parse::<ClassId>().unwrap(), c);
            assert_eq!(format!("T{}", c.number()).parse::<ClassId>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<ClassId>(&json).unwrap(), c);
            let n = serde_json::to_string(&c.number()).unwrap();
            assert_eq!(serde_json::from_str::<ClassId>(&n).unwrap(), c);
        }
        assert!("11".parse::<ClassId>().is_err());
        assert!("T1_COMPLEX_PAIR".parse::<ClassId>().is_err());
        assert!("0".parse::<ClassId>().is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&pair(MINK, [[2, 0, 0], [0, 1, 0], [0, 0, 3]])).unwrap(),
            ClassId::T1
        );
        assert_eq!(
            classify(&pair(MINK, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])).unwrap(),
            ClassId::T3
        );
        assert_eq!(classify(&pair(MINK, MINK)).unwrap(), ClassId::T7);
        assert_eq!(
            classify(&pair(MINK, [[2, 0, 0], [0, 1, 0], [0, 0, 1]])).unwrap(),
            ClassId::T2
        );
        assert_eq!(
            classify(&pair(MINK, [[1, 0, 0], [0, -1, 0], [0, 0, 2]])).unwrap(),
            ClassId::T4
        );
        assert_eq!(
            classify(&pair(HYP, [[1, 1, 0], [1, 0, 0], [0, 0, -2]])).unwrap(),
            ClassId::T5
        );
        assert_eq!(
            classify(&pair(HYP, [[0, 1, 0], [1, -1, 0], [0, 0, -2]])).unwrap(),
            ClassId::T6
        );
        assert_eq!(
            classify(&pair(HYP, [[1, 0, 0], [0, 0, 0], [0, 0, 0]])).unwrap(),
            ClassId::T8
        );
        assert_eq!(
            classify(&pair(HYP, [[0, 0, 0], [0, -1, 0], [0, 0, 0]])).unwrap(),
            ClassId::T9
        );
        assert_eq!(
            classify(&pair(HYP, [[0, 0, 0], [0, 0, 1], [0, 1, 0]])).unwrap(),
            ClassId::T10
        );
    }

    #[test]
    fn conditions_are_distinct() {
        let set: std::collections::HashSet<_> =
            ClassId::ALL.iter().map(|c| class_conditions(*c)).collect();
        assert_eq!(set.len(), 10);
    }
}
