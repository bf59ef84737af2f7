//! Plain-text exports: comma-separated, LF line endings, 12 significant digits.

use std::fmt::Write as _;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits in fixed decimal notation.
///
/// Magnitudes outside `[1e-6, 1e15)` fall back to scientific notation so a
/// value such as `3e-40` does not print as forty zeros.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-6..15).contains(&exp) {
        return sci;
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Renders columns under a header row. All columns must share a length.
pub fn csv_table(header: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(header.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = String::with_capacity(rows * 20 * columns.len() + 32);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        for (c, col) in columns.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_sig(col[r]));
        }
        out.push('\n');
    }
    out
}
