use std::fs;
use std::io;
use std::path::Path;

use super::SummaryRow;

pub const SUMMARY_CSV_HEADER: &str =
    "series,sweep_value,mean_time,std_err,cure_fraction,replications,censored";

/// Six significant digits, plain decimal notation when the magnitude
/// allows, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

pub fn rows_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.series,
            format_sig(r.sweep_value),
            format_sig(r.mean_time),
            format_sig(r.std_err),
            format_sig(r.cure_fraction),
            r.replications,
            r.censored
        ));
    }
    out
}

pub fn emit_csv(rows: &[SummaryRow], path: &Path) -> io::Result<()> {
    fs::write(path, rows_to_csv(rows))
}
