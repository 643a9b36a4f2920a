//! Text and CSV report rendering.
//!
//! Numeric CSV cells carry 6 significant digits; the text tables follow
//! the row ordering of the published tables (OLS, HH, NW, Andrews, KV,
//! EWC, DynReg, RDynReg) so side-by-side comparison is mechanical.

/// Format with 6 significant digits, fixed notation.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 15) as usize;
    format!("{v:.decimals$}")
}

/// Optional cell: the shared-estimate table slots print as empty CSV
/// cells and as "--" in text.
pub fn opt_sig6(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_default()
}

pub fn opt_dash(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| "--".to_string())
}

/// Render an aligned text table: each row padded to its column width.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for i in 0..cols {
            let cell = cells.get(i).map(|s| s.as_str()).unwrap_or("");
            if i == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                line.push_str(&format!("  {cell:>width$}", width = widths[i]));
            }
        }
        line.trim_end().to_string()
    };
    let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    out.push_str(&render_row(&header_cells));
    out.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

/// Render CSV with proper quoting for text cells.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| {
                if c.contains(',') || c.contains('"') {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c.clone()
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0123456789), "0.0123457");
        assert_eq!(sig6(-1234.56789), "-1234.57");
        assert_eq!(sig6(2852.4), "2852.40");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn tables_align_and_quote() {
        let rows = vec![
            vec!["OLS".to_string(), "0.139300".to_string()],
            vec!["OLS-HH".to_string(), "--".to_string()],
        ];
        let text = text_table(&["method", "beta"], &rows);
        assert!(text.contains("OLS-HH"));
        let csv = csv_table(&["method", "beta"], &rows);
        assert!(csv.starts_with("method,beta\n"));
    }
}
