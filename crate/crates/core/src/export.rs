//! Column tables written as CSV or JSON with fixed formatting.

use serde_json::{Map, Value};

use crate::frequency::FrequencyCurve;
use crate::pde::SpectralState;
use crate::spectrum::CharacteristicRoot;
use crate::volterra::{EnergyLedger, VolterraTrajectory};

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<(String, Vec<f64>)>,
}

/// 17 significant digits, `.` separator, shortest exponent.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.columns.push((name.to_string(), values));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.0.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for i in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format_number(c.1[i])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"columns": {...}, "summary": ...}`; non-finite numbers become `null`.
    pub fn to_json(&self, summary: Value) -> Value {
        let mut cols = Map::new();
        for (name, values) in &self.columns {
            let v = values.iter().map(|&x| json_number(x)).collect();
            cols.insert(name.clone(), Value::Array(v));
        }
        let mut root = Map::new();
        root.insert("columns".into(), Value::Object(cols));
        root.insert("summary".into(), summary);
        Value::Object(root)
    }
}

pub fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// `omega,re,im`
pub fn curve_table(curve: &FrequencyCurve) -> Table {
    Table::new()
        .with("omega", curve.omegas.clone())
        .with("re", curve.points.iter().map(|p| p.re).collect())
        .with("im", curve.points.iter().map(|p| p.im).collect())
}

/// `t,y,W1,W2,W3,V,R,residual`
pub fn trajectory_table(traj: &VolterraTrajectory, ledger: &EnergyLedger) -> Table {
    Table::new()
        .with("t", traj.times.clone())
        .with("y", traj.y.clone())
        .with("W1", ledger.w1.clone())
        .with("W2", ledger.w2.clone())
        .with("W3", ledger.w3.clone())
        .with("V", ledger.v.clone())
        .with("R", ledger.r.clone())
        .with("residual", ledger.residual.clone())
}

/// `t,trace0,tracePi,l2,h1,mean`
pub fn snapshot_table(snapshots: &[SpectralState]) -> Table {
    let col = |f: fn(&SpectralState) -> f64| snapshots.iter().map(f).collect::<Vec<_>>();
    Table::new()
        .with("t", col(|s| s.t))
        .with("trace0", col(|s| s.trace_zero()))
        .with("tracePi", col(|s| s.trace_pi()))
        .with("l2", col(|s| s.l2_norm()))
        .with("h1", col(|s| s.h1_norm()))
        .with("mean", col(|s| s.mean()))
}

/// `re,im,residual`
pub fn roots_table(roots: &[CharacteristicRoot]) -> Table {
    Table::new()
        .with("re", roots.iter().map(|r| r.lambda.re).collect())
        .with("im", roots.iter().map(|r| r.lambda.im).collect())
        .with("residual", roots.iter().map(|r| r.residual).collect())
}
