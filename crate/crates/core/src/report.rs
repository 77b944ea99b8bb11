use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Suffix for quantities computed by a finite stand-in for a non-constructive
/// limit.
pub const SURROGATE_TAG: &str = ":finite_surrogate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub param: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub monotone: bool,
    pub cross_route_gap: Option<f64>,
}

/// Non-fatal findings attached to a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// α-sweep estimates moved against the expected direction by `excess`.
    Monotonicity { alpha: f64, excess: f64 },
    /// Two routes to the same extremal value disagree by `gap`.
    CrossRouteMismatch { gap: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Monotonicity { alpha, excess } => write!(
                f,
                "monotonicity violated at alpha={alpha} by {excess:.3e}"
            ),
            Warning::CrossRouteMismatch { gap } => {
                write!(f, "cross-route mismatch: routes differ by {gap:.3e}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub quantity: String,
    pub input: String,
    pub estimates: Vec<Estimate>,
    pub extrapolated: f64,
    pub error_indicator: f64,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
    /// Named route values behind a combined estimate.
    #[serde(skip)]
    pub routes: Vec<(String, f64)>,
}

impl DensityReport {
    pub fn new(quantity: impl Into<String>, input: impl Into<String>) -> Self {
        DensityReport {
            quantity: quantity.into(),
            input: input.into(),
            estimates: Vec::new(),
            extrapolated: 0.0,
            error_indicator: 0.0,
            diagnostics: Diagnostics {
                monotone: true,
                cross_route_gap: None,
            },
            warnings: Vec::new(),
            routes: Vec::new(),
        }
    }

    pub fn route(&self, name: &str) -> Option<f64> {
        self.routes.iter().find(|(n, _)| n == name).map(|r| r.1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn reports_to_json(reports: &[DensityReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn reports_to_csv(reports: &[DensityReport]) -> String {
    let mut out = String::from("quantity,param,value\n");
    for r in reports {
        for e in &r.estimates {
            let _ = writeln!(out, "{},{},{}", r.quantity, e.param, e.value);
        }
        let _ = writeln!(out, "{},extrapolated,{}", r.quantity, r.extrapolated);
    }
    out
}

pub fn reports_to_plot(reports: &[DensityReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {} {}", r.quantity, r.input);
        for e in &r.estimates {
            let _ = writeln!(out, "{} {}", e.param, e.value);
        }
    }
    out
}
