//! Plain-text report tables.
//!
//! Layout: a title, the factor row labelled by development year, one row per
//! open accident year (latest, ultimate, outstanding), and the total line.

use std::fmt::Write as _;

use crate::document::{
    ComparisonDocument, FactorCheck, RecoveryDocument, ReportDocument, VerifyDocument,
};

const BOLD: &str = "\x1b[1m";
const RESET: &str = "\x1b[0m";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableStyle {
    /// Decimal places.
    pub precision: usize,
    /// Emit ANSI bold for titles and totals.
    pub color: bool,
}

impl Default for TableStyle {
    fn default() -> Self {
        TableStyle {
            precision: 4,
            color: false,
        }
    }
}

impl TableStyle {
    fn bold(&self, text: &str) -> String {
        if self.color {
            format!("{BOLD}{text}{RESET}")
        } else {
            text.to_string()
        }
    }
}

/// `v` with `precision` decimals and `,` between thousands: `4359.2` → `4,359.20`.
pub fn format_number(v: f64, precision: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = format!("{:.precision$}", v.abs());
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits.as_str(), None),
    };
    let mut out = String::with_capacity(digits.len() + int.len() / 3 + 1);
    let all_zero = digits.bytes().all(|b| b == b'0' || b == b'.');
    if v < 0.0 && !all_zero {
        out.push('-');
    }
    for (k, ch) in int.chars().enumerate() {
        if k > 0 && (int.len() - k) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    out
}

fn title(method: &str) -> &'static str {
    match method {
        "mack" => "Mack Chain Ladder Results",
        "bayes_half_normal" => "Half-Normal Bayesian Chain Ladder Results",
        _ => "Chain Ladder Results",
    }
}

fn push_row(out: &mut String, label: &str, cells: &[String], width: usize) {
    let _ = write!(out, "{label:<16}");
    for c in cells {
        let _ = write!(out, " {c:>width$}");
    }
    out.push('\n');
}

/// Renders one report.
pub fn render_report(doc: &ReportDocument, style: &TableStyle) -> String {
    let p = style.precision;
    let mut out = String::new();
    let mut heading = title(&doc.method).to_string();
    if let Some(unit) = &doc.unit {
        let _ = write!(heading, " ({unit})");
    }
    out.push_str(&style.bold(&heading));
    out.push('\n');

    if !doc.factors.is_empty() {
        let factors: Vec<String> = doc.factors.iter().map(|f| format_number(*f, p)).collect();
        let years: Vec<String> = (1..=doc.factors.len()).map(|j| j.to_string()).collect();
        let width = factors.iter().map(String::len).max().unwrap_or(0).max(4);
        push_row(&mut out, "Development year", &years, width);
        push_row(&mut out, "Factor", &factors, width);
        out.push('\n');
    }

    let rows: Vec<[String; 3]> = (0..doc.ultimates.len())
        .map(|k| {
            [
                format_number(doc.latest[k], p),
                format_number(doc.ultimates[k], p),
                format_number(doc.outstanding[k], p),
            ]
        })
        .collect();
    let total = format_number(doc.total_reserve, p);
    let width = rows
        .iter()
        .flatten()
        .chain(std::iter::once(&total))
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("Outstanding".len());
    let header = ["Latest", "Ultimate", "Outstanding"].map(String::from);
    push_row(&mut out, "Accident year", &header, width);
    for (year, row) in doc.accident_years.iter().zip(&rows) {
        push_row(&mut out, &year.to_string(), row, width);
    }
    let mut total_line = String::new();
    push_row(
        &mut total_line,
        "Total",
        &[String::new(), String::new(), total],
        width,
    );
    out.push_str(&style.bold(total_line.trim_end()));
    out.push('\n');
    out
}

/// Renders the quadrature cross-check of the Bayesian factors.
pub fn render_factor_checks(checks: &[FactorCheck]) -> String {
    let mut out = String::from("Quadrature check of posterior factors\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{} dev {}: closed form {:.15} quadrature {:.15} relative error {:.2e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.dev_year,
            c.closed_form,
            c.quadrature,
            c.relative_error
        );
    }
    out
}

/// Renders both reports followed by the per-column factor deltas and the
/// difference in totals.
pub fn render_comparison(doc: &ComparisonDocument, style: &TableStyle) -> String {
    let p = style.precision;
    let mut out = render_report(&doc.mack, style);
    out.push('\n');
    out.push_str(&render_report(&doc.bayes, style));
    out.push('\n');
    out.push_str(&style.bold("Bayesian minus Mack"));
    out.push('\n');
    if !doc.factor_deltas.is_empty() {
        let deltas: Vec<String> = doc
            .factor_deltas
            .iter()
            .map(|d| format_number(*d, p.max(6)))
            .collect();
        let years: Vec<String> = (1..=deltas.len()).map(|j| j.to_string()).collect();
        let width = deltas.iter().map(String::len).max().unwrap_or(0);
        push_row(&mut out, "Development year", &years, width);
        push_row(&mut out, "Factor delta", &deltas, width);
    }
    let _ = writeln!(
        out,
        "{:<16} {}",
        "Mack total",
        format_number(doc.mack.total_reserve, p)
    );
    let _ = writeln!(
        out,
        "{:<16} {}",
        "Bayesian total",
        format_number(doc.bayes.total_reserve, p)
    );
    let _ = writeln!(
        out,
        "{:<16} {}",
        "Difference",
        format_number(doc.total_difference, p)
    );
    out
}

pub fn render_recovery(doc: &RecoveryDocument, style: &TableStyle) -> String {
    let p = style.precision;
    let mut out = String::new();
    out.push_str(&style.bold(&format!(
        "Recovery study: n = {}, {} replicates, seed {}, {}% intervals",
        doc.n,
        doc.replications,
        doc.seed,
        format_number(doc.level * 100.0, 1)
    )));
    out.push('\n');
    let header = [
        "Dev",
        "Samples",
        "Mean factor",
        "SD",
        "Std error",
        "Mean true",
        "Coverage",
    ];
    let rows: Vec<Vec<String>> = (0..doc.dev_years.len())
        .map(|k| {
            vec![
                doc.dev_years[k].to_string(),
                doc.samples[k].to_string(),
                format_number(doc.mean_factor[k], p),
                format_number(doc.sd_factor[k], p),
                format_number(doc.standard_error[k], p),
                format_number(doc.mean_true_sqrt_theta[k], p),
                format_number(doc.coverage[k], p),
            ]
        })
        .collect();
    let width = rows
        .iter()
        .flatten()
        .map(String::len)
        .chain(header.iter().map(|h| h.len()))
        .max()
        .unwrap_or(0);
    for (k, h) in header.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{h:>width$}");
    }
    out.push('\n');
    for row in &rows {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    let _ = writeln!(out, "Failed replicates: {}", doc.failures.len());
    out
}

pub fn render_verify(doc: &VerifyDocument) -> String {
    let mut out = String::new();
    for c in &doc.checks {
        let _ = writeln!(
            out,
            "{} {} (worst error {:.3e}, tolerance {:.1e}, {} cases)",
            if c.passed { "PASS" } else { "FAIL" },
            c.identity,
            c.achieved,
            c.tolerance,
            c.cases
        );
    }
    let failed = doc.checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(
        out,
        "{} of {} identities passed",
        doc.checks.len() - failed,
        doc.checks.len()
    );
    out
}
