//! CSV and JSON emission with fixed row order and 6-significant-digit
//! numbers.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub env: String,
    pub algorithm: String,
    pub repetition: usize,
    pub seed: u64,
    /// `None` when the cell failed; see `error`.
    pub value: Option<f64>,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub env: String,
    pub algorithm: String,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 when `n < 2`.
    pub std: f64,
    /// Successful repetitions.
    pub n: usize,
}

/// `%g` with 6 significant digits.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round6(v: f64) -> f64 {
    fmt_g(v).parse().unwrap_or(v)
}

pub fn summarize(rows: &[ResultRow], order: &[(String, String)]) -> Vec<SummaryRow> {
    order
        .iter()
        .map(|(env, alg)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| &r.env == env && &r.algorithm == alg)
                .filter_map(|r| r.value)
                .collect();
            let n = values.len();
            let (mean, std) = if n == 0 {
                (f64::NAN, f64::NAN)
            } else {
                crate::multilinear::mean_std(&values)
            };
            SummaryRow {
                env: env.clone(),
                algorithm: alg.clone(),
                mean,
                std,
                n,
            }
        })
        .collect()
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("env,algorithm,repetition,seed,value,wall_ms\n");
    for r in rows {
        let value = r.value.map(fmt_g).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.env,
            r.algorithm,
            r.repetition,
            r.seed,
            value,
            fmt_g(r.wall_ms)
        );
    }
    out
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from("env,algorithm,mean,std,n\n");
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.env,
            s.algorithm,
            fmt_g(s.mean),
            fmt_g(s.std),
            s.n
        );
    }
    out
}

pub fn results_json(rows: &[ResultRow], summary: &[SummaryRow]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        rows: Vec<ResultRow>,
        summary: &'a [SummaryRow],
    }
    let rows = rows
        .iter()
        .map(|r| ResultRow {
            value: r.value.map(round6),
            wall_ms: round6(r.wall_ms),
            ..r.clone()
        })
        .collect();
    let summary: Vec<SummaryRow> = summary
        .iter()
        .map(|s| SummaryRow {
            mean: round6(s.mean),
            std: round6(s.std),
            ..s.clone()
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&Doc {
        rows,
        summary: &summary,
    })
    .expect("serializable");
    text.push('\n');
    text
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, rep: usize, value: f64) -> ResultRow {
        ResultRow {
            env: "e".into(),
            algorithm: alg.into(),
            repetition: rep,
            seed: rep as u64,
            value: Some(value),
            wall_ms: 0.0,
            error: None,
        }
    }

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-34.7123456), "-34.7123");
        assert_eq!(fmt_g(123456789.0), "1.23457e+08");
        assert_eq!(fmt_g(0.000012345678), "1.23457e-05");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(999999.7), "1e+06");
        assert_eq!(fmt_g(100000.0), "100000");
    }

    #[test]
    fn counts_and_std() {
        let rows: Vec<_> = ["a", "b"]
            .iter()
            .flat_map(|a| (0..3).map(move |r| row(a, r, r as f64 + 1.0)))
            .collect();
        let order = vec![
            ("e".to_string(), "a".to_string()),
            ("e".to_string(), "b".to_string()),
        ];
        let summary = summarize(&rows, &order);
        assert_eq!(results_csv(&rows).lines().count(), 7);
        assert_eq!(summary_csv(&summary).lines().count(), 3);
        assert_eq!(summary[0].mean, 2.0);
        assert_eq!(summary[0].std, 1.0);
        assert_eq!(summary[0].n, 3);
        assert_eq!(results_csv(&rows), results_csv(&rows.clone()));
    }

    #[test]
    fn error_rows_have_empty_values() {
        let mut r = row("a", 0, 0.0);
        r.value = None;
        r.error = Some("boom".into());
        let csv = results_csv(&[r.clone()]);
        assert!(csv.lines().nth(1).unwrap().starts_with("e,a,0,0,,"));
        let summary = summarize(&[r], &[("e".into(), "a".into())]);
        assert_eq!(summary[0].n, 0);
    }

    #[test]
    fn json_mirrors_rounded_numbers() {
        let rows = vec![row("a", 0, 1.23456789)];
        let summary = summarize(&rows, &[("e".into(), "a".into())]);
        let text = results_json(&rows, &summary);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"][0]["value"], 1.23457);
        assert_eq!(v["summary"][0]["n"], 1);
    }
}
