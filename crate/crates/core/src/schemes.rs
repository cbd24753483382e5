//! Catalog of splitting-method coefficients in kick-leading (BAB) layout.

use std::fmt::Write;

use crate::error::{Error, Result};

/// `b₂` candidates for NI₄(8,2). The printed coefficient table carries `49/18`; the value that
/// gives positive weights and the (8,2) behaviour is `49/180` (selected in the acceptance suite).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ni4Weight {
    Printed,
    Lobatto,
}

impl Ni4Weight {
    pub fn b2(self) -> f64 {
        match self {
            Ni4Weight::Printed => 49.0 / 18.0,
            Ni4Weight::Lobatto => 49.0 / 180.0,
        }
    }
}

/// Frozen choice for the builtin `ni4_82`.
pub const NI4_SELECTED: Ni4Weight = Ni4Weight::Lobatto;

pub const BUILTIN_NAMES: [&str; 7] = [
    "lie_trotter",
    "lie_trotter_adjoint",
    "strang_aba",
    "strang_bab",
    "srkn6_4",
    "ni4_82",
    "ni5_84",
];

/// One step is `K(b₁h) D(a₁h) K(b₂h) … D(a_m h) K(b_{m+1}h)`, applied left to right in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme {
    name: String,
    kicks: Vec<f64>,
    drifts: Vec<f64>,
    order: u32,
    effective_order: Option<(u32, u32)>,
}

impl SplittingScheme {
    /// `kicks` must have exactly one more entry than `drifts`.
    pub fn new(
        name: impl Into<String>,
        kicks: Vec<f64>,
        drifts: Vec<f64>,
        order: u32,
        effective_order: Option<(u32, u32)>,
    ) -> Result<Self> {
        if drifts.is_empty() || kicks.len() != drifts.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "need m drifts and m+1 kicks, got {} and {}",
                drifts.len(),
                kicks.len()
            )));
        }
        if kicks.iter().chain(&drifts).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("scheme coefficients".into()));
        }
        Ok(Self {
            name: name.into(),
            kicks,
            drifts,
            order,
            effective_order,
        })
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let scheme = match name {
            "lie_trotter" => Self::new(name, vec![1.0, 0.0], vec![1.0], 1, None),
            "lie_trotter_adjoint" => Self::new(name, vec![0.0, 1.0], vec![1.0], 1, None),
            "strang_bab" => Self::new(name, vec![0.5, 0.5], vec![1.0], 2, None),
            "strang_aba" => Self::new(name, vec![0.0, 1.0, 0.0], vec![0.5, 0.5], 2, None),
            "srkn6_4" => Ok(Self::srkn6_4()),
            "ni4_82" => Ok(Self::ni4_82(NI4_SELECTED)),
            "ni5_84" => Ok(Self::ni5_84()),
            _ => return Err(Error::UnknownScheme(name.to_string())),
        }?;
        Ok(scheme)
    }

    fn srkn6_4() -> Self {
        let b1 = 0.0829844064174052;
        let b2 = 0.396309801498368;
        let b3 = -0.0390563049223486;
        let b4 = 1.0 - 2.0 * (b1 + b2 + b3);
        let a1 = 0.245298957184271;
        let a2 = 0.604872665711080;
        let a3 = 0.5 - (a1 + a2);
        Self {
            name: "srkn6_4".into(),
            kicks: vec![b1, b2, b3, b4, b3, b2, b1],
            drifts: vec![a1, a2, a3, a3, a2, a1],
            order: 4,
            effective_order: None,
        }
    }

    /// NI₄(8,2) with the given `b₂` candidate.
    pub fn ni4_82(weight: Ni4Weight) -> Self {
        let b1 = 1.0 / 20.0;
        let b2 = weight.b2();
        let b3 = 1.0 - 2.0 * (b1 + b2);
        let a1 = 0.5 - (3.0f64 / 28.0).sqrt();
        let a2 = 0.5 - a1;
        Self {
            name: "ni4_82".into(),
            kicks: vec![b1, b2, b3, b2, b1],
            drifts: vec![a1, a2, a2, a1],
            order: 2,
            effective_order: Some((8, 2)),
        }
    }

    fn ni5_84() -> Self {
        let b1 = 0.811862738544516;
        let b2 = -0.677480399532169;
        let b3 = 0.5 - (b1 + b2);
        let a1 = -0.00758691311877447;
        let a2 = 0.317218277973169;
        let a3 = 1.0 - 2.0 * (a1 + a2);
        Self {
            name: "ni5_84".into(),
            kicks: vec![b1, b2, b3, b3, b2, b1],
            drifts: vec![a1, a2, a3, a2, a1],
            order: 4,
            effective_order: Some((8, 4)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Kick weights `b₁ … b_{m+1}`.
    pub fn kicks(&self) -> &[f64] {
        &self.kicks
    }

    /// Drift weights `a₁ … a_m`.
    pub fn drifts(&self) -> &[f64] {
        &self.drifts
    }

    pub fn stages(&self) -> usize {
        self.drifts.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn effective_order(&self) -> Option<(u32, u32)> {
        self.effective_order
    }

    pub fn is_palindromic(&self) -> bool {
        self.kicks.iter().eq(self.kicks.iter().rev()) && self.drifts.iter().eq(self.drifts.iter().rev())
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.drifts.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Copy with one kick weight replaced, for consistency checks.
    pub fn with_kick(&self, index: usize, value: f64) -> Self {
        let mut s = self.clone();
        s.kicks[index] = value;
        s
    }

    /// Plain-text catalog entry with coefficients at full precision.
    pub fn catalog_entry(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:.17e}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", self.name);
        let _ = writeln!(out, "order = {}", self.order);
        if let Some((r, p)) = self.effective_order {
            let _ = writeln!(out, "effective_order = [{r}, {p}]");
        }
        let _ = writeln!(out, "kicks = [{}]", list(&self.kicks));
        let _ = writeln!(out, "drifts = [{}]", list(&self.drifts));
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let sum_kicks: f64 = self.kicks.iter().sum();
        let sum_drifts: f64 = self.drifts.iter().sum();
        let mut findings = Vec::new();
        if (sum_kicks - 1.0).abs() > CONSISTENCY_TOLERANCE {
            findings.push(format!("kick weights sum to {sum_kicks:.17} instead of 1"));
        }
        if (sum_drifts - 1.0).abs() > CONSISTENCY_TOLERANCE {
            findings.push(format!("drift weights sum to {sum_drifts:.17} instead of 1"));
        }
        let leading_zero_kick = self.kicks[0] == 0.0;
        let trailing_zero_kick = *self.kicks.last().unwrap() == 0.0;
        ValidationReport {
            name: self.name.clone(),
            sum_kicks,
            sum_drifts,
            palindromic: self.is_palindromic(),
            max_abs_drift: self.max_abs_drift(),
            // the trailing kick of one step and the leading kick of the next always merge
            fsal_eligible: true,
            leading_zero_kick,
            trailing_zero_kick,
            all_positive: self.kicks.iter().chain(&self.drifts).all(|&c| c >= 0.0),
            drifts_positive: self.drifts.iter().all(|&a| a > 0.0),
            findings,
        }
    }
}

const CONSISTENCY_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub name: String,
    pub sum_kicks: f64,
    pub sum_drifts: f64,
    pub palindromic: bool,
    pub max_abs_drift: f64,
    pub fsal_eligible: bool,
    pub leading_zero_kick: bool,
    pub trailing_zero_kick: bool,
    pub all_positive: bool,
    pub drifts_positive: bool,
    /// Consistency violations; empty for a valid scheme.
    pub findings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_builtins_validate() {
        for name in BUILTIN_NAMES {
            let s = SplittingScheme::builtin(name).unwrap();
            let report = s.validate();
            assert!(report.is_ok(), "{name}: {:?}", report.findings);
            assert_eq!(s.kicks().len(), s.stages() + 1);
        }
        assert_eq!(
            SplittingScheme::builtin("yoshida"),
            Err(Error::UnknownScheme("yoshida".into()))
        );
    }

    #[test]
    fn strang() {
        let s = SplittingScheme::builtin("strang_bab").unwrap();
        assert!(s.is_palindromic());
        assert_eq!(s.order(), 2);
        let aba = SplittingScheme::builtin("strang_aba").unwrap().validate();
        assert!(aba.leading_zero_kick && aba.fsal_eligible);
        assert!(!SplittingScheme::builtin("lie_trotter").unwrap().is_palindromic());
    }

    #[test]
    fn srkn_metadata() {
        let s = SplittingScheme::builtin("srkn6_4").unwrap();
        assert_eq!(s.kicks().len(), 7);
        assert_eq!(s.max_abs_drift(), 0.604872665711080);
        assert!(s.is_palindromic());
    }

    #[test]
    fn ni5_middle_drift() {
        let s = SplittingScheme::builtin("ni5_84").unwrap();
        assert_abs_diff_eq!(s.drifts()[2], 0.380_737_270_291_211_1, epsilon = 1e-15);
        assert_eq!(s.effective_order(), Some((8, 4)));
    }

    #[test]
    fn ni4_candidates() {
        let printed = SplittingScheme::ni4_82(Ni4Weight::Printed);
        let lobatto = SplittingScheme::ni4_82(Ni4Weight::Lobatto);
        assert!(printed.kicks()[2] < 0.0);
        assert!(!printed.validate().all_positive);
        assert!(lobatto.validate().all_positive);
        assert_abs_diff_eq!(lobatto.kicks()[2], 16.0 / 45.0, epsilon = 1e-15);
        assert!(lobatto.validate().drifts_positive);
    }

    #[test]
    fn tampered_scheme_is_flagged() {
        let s = SplittingScheme::builtin("srkn6_4").unwrap();
        let tampered = s.with_kick(0, s.kicks()[0] + 1e-3);
        let report = tampered.validate();
        assert_eq!(report.findings.len(), 1);
        assert!(!report.palindromic);
    }

    #[test]
    fn catalog_text() {
        let entry = SplittingScheme::builtin("ni5_84").unwrap().catalog_entry();
        assert!(entry.starts_with("[ni5_84]\norder = 4\neffective_order = [8, 4]\n"));
        assert!(entry.contains("8.118627385445"));
    }

    #[test]
    fn shape_is_checked() {
        assert!(SplittingScheme::new("bad", vec![0.5, 0.5], vec![0.5, 0.5], 2, None).is_err());
    }
}
