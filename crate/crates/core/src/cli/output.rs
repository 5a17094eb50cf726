//! CSV/JSON rendering with fixed precision.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::sweep::Row;

pub const CSV_HEADER: &str =
    "mode,rho,snr_db,gamma_bar_linear,method,capacity_bpshz,error_bound,diagnostics";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format '{s}', expected csv or json")),
        }
    }
}

/// Nine significant digits; plain notation for moderate magnitudes.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let ax = x.abs();
    if (1e-4..1e9).contains(&ax) {
        let exp = ax.log10().floor() as i32;
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding may carry into a new leading digit
        let carried = s
            .trim_start_matches('-')
            .parse::<f64>()
            .is_ok_and(|v| v >= 10f64.powi(exp + 1));
        if carried && decimals > 0 {
            let d = decimals - 1;
            return format!("{x:.d$}");
        }
        s
    } else {
        format!("{x:.8e}")
    }
}

fn sig_value(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_sig(x).parse::<f64>().unwrap_or(x))
    } else {
        Value::Null
    }
}

pub fn render(rows: &[Row], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows),
    }
}

fn render_csv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.mode.as_str(),
            fmt_sig(r.rho),
            fmt_sig(r.snr_db),
            fmt_sig(r.gamma_bar_linear),
            r.method,
            fmt_sig(r.capacity_bpshz),
            fmt_sig(r.error_bound),
            r.diagnostics
        ));
    }
    out
}

fn render_json(rows: &[Row]) -> String {
    let list: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "mode": r.mode.as_str(),
                "rho": sig_value(r.rho),
                "snr_db": sig_value(r.snr_db),
                "gamma_bar_linear": sig_value(r.gamma_bar_linear),
                "method": r.method,
                "capacity_bpshz": sig_value(r.capacity_bpshz),
                "error_bound": sig_value(r.error_bound),
                "diagnostics": r.diagnostics,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(list)).expect("rows serialize");
    s.push('\n');
    s
}
