use std::fmt::Write;

use super::commands::{BoundMargin, BoundOutput, CompareOutput, EstimateOutput};
use crate::bounds::{BoundReport, BoundValue};
use crate::measures::Quantity;
use crate::montecarlo::EstimateResult;
use crate::processes::Volatility;

pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if !x.is_finite() {
        if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if (1e-4..1e6).contains(&x.abs()) {
        format!("{x:.6}")
    } else {
        format!("{x:.6e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "-".into())
}

fn quantity(q: Option<Quantity>) -> String {
    match q {
        Some(Quantity::Finite(x)) => num(x),
        Some(Quantity::Infinite) => "infinite".into(),
        None => "-".into(),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

/// Rows padded so that every column lines up.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, s) in row.iter().enumerate() {
            if c + 1 < row.len() {
                let _ = write!(line, "{s:<w$}  ", w = widths[c]);
            } else {
                line.push_str(s);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn row<const N: usize>(cells: [&str; N]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

fn report_rows(r: &BoundReport) -> Vec<Vec<String>> {
    let mut rows = vec![row(["horizon", &num(r.horizon)])];
    if let Some(e) = &r.error {
        rows.push(row(["error", e]));
    }
    let vol = match r.volatility {
        Some(Volatility::Positive) => "positive",
        Some(Volatility::Zero) => "zero",
        None => "-",
    };
    rows.extend([
        row(["volatility", vol]),
        row(["sigma mismatch", yes_no(r.sigma_mismatch)]),
        row(["nu1 << nu2", yes_no(r.abs_continuous)]),
        row(["L1(nu1, nu2)", &quantity(r.l1_nu)]),
        row(["H2(nu1, nu2)", &quantity(r.hellinger_sq_nu)]),
        row(["xi^2", &quantity(r.xi_sq)]),
        row(["gamma1", &quantity(r.gamma1)]),
        row(["gamma2", &quantity(r.gamma2)]),
        row(["eta", &opt(r.eta)]),
    ]);
    if let Some(m) = r.drift_match {
        rows.push(row(["drift match", &format!("{} (sup {})", yes_no(m.ok), num(m.sup))]));
    }
    rows
}

fn bound_rows(r: &BoundReport) -> Vec<Vec<String>> {
    let mut rows = vec![row(["bound", "raw", "clamped", "status"])];
    for (name, b) in r.bounds() {
        rows.push(match b {
            BoundValue::Applicable { raw, clamped } => row([name, &num(*raw), &num(*clamped), "applicable"]),
            BoundValue::NotApplicable { reason } => row([name, "-", "-", reason]),
        });
    }
    rows.push(row(["best", "", &num(r.best), ""]));
    rows
}

fn estimate_rows(e: &EstimateResult) -> Vec<Vec<String>> {
    vec![
        row(["estimate", &num(e.mean)]),
        row(["half width (95%)", &num(e.half_width_95)]),
        row(["paths", &e.n_paths.to_string()]),
        row(["seed", &e.seed.to_string()]),
        row(["target", &e.target]),
    ]
}

fn margin_rows(m: &[BoundMargin]) -> Vec<Vec<String>> {
    let mut rows = vec![row(["bound", "value", "margin", "ratio"])];
    rows.extend(m.iter().map(|b| row([b.name, &opt(b.bound), &opt(b.margin), &opt(b.ratio)])));
    rows
}

pub fn bound_table(out: &BoundOutput) -> String {
    format!("{}\n{}", table(&report_rows(&out.report)), table(&bound_rows(&out.report)))
}

pub fn estimate_table(out: &EstimateOutput) -> String {
    let mut rows = vec![row(["check", &format!("{:?}", out.check).to_lowercase()])];
    rows.extend(estimate_rows(&out.estimate));
    rows.push(row(["expected", &opt(out.expected)]));
    let mut s = table(&rows);
    if let Some(m) = &out.margins {
        s.push('\n');
        s.push_str(&table(&margin_rows(m)));
    }
    s
}

pub fn compare_table(out: &CompareOutput) -> String {
    let mut rows = report_rows(&out.report);
    rows.extend(estimate_rows(&out.estimate));
    rows.push(row(["tightest", out.tightest.unwrap_or("-")]));
    format!("{}\n{}", table(&rows), table(&margin_rows(&out.bounds)))
}
