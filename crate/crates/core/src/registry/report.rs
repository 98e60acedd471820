//! Leaderboard rendering.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use super::LeaderboardRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format `{other}` (md, json or csv)")),
        }
    }
}

fn cell_keys(rows: &[LeaderboardRow]) -> Vec<String> {
    rows.iter()
        .flat_map(|r| r.cells.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn rank_text(rank: f64) -> String {
    if rank.fract() == 0.0 {
        format!("{rank:.0}")
    } else {
        format!("{rank}")
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}"))
        .unwrap_or_else(|| "-".into())
}

/// `acc ± se`, one decimal each.
pub fn acc_se(accuracy_pct: f64, se_pct: f64) -> String {
    format!("{accuracy_pct:.1} ± {se_pct:.1}")
}

pub fn emit_report(rows: &[LeaderboardRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(rows),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        ReportFormat::Csv => csv_text(rows),
    }
}

fn markdown(rows: &[LeaderboardRow]) -> String {
    let keys = cell_keys(rows);
    let mut out = String::new();
    let mut header = vec!["Rank".to_string(), "Model".to_string()];
    header.extend(keys.iter().cloned());
    header.extend(["Mean", "RS_I", "RS_I rank shift", "RS_II", "RS_II^N"].map(String::from));
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let align: Vec<&str> = header
        .iter()
        .map(|h| if h == "Model" { "---" } else { "---:" })
        .collect();
    let _ = writeln!(out, "| {} |", align.join(" | "));
    for row in rows {
        let mut cols = vec![rank_text(row.rank), row.model_id.clone()];
        for k in &keys {
            cols.push(
                row.cells
                    .get(k)
                    .map(|c| acc_se(c.accuracy_pct, c.se_pct))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        cols.push(format!("{:.1}", row.mean_accuracy));
        cols.push(opt(row.rs1_absolute, 3));
        cols.push(opt(row.rs1_relative, 2));
        cols.push(opt(row.rs2, 3));
        cols.push(opt(row.rs2_normalized, 3));
        let _ = writeln!(out, "| {} |", cols.join(" | "));
    }
    out
}

fn csv_text(rows: &[LeaderboardRow]) -> String {
    let keys = cell_keys(rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string(), "model_id".to_string()];
    for k in &keys {
        header.push(format!("{k}/accuracy_pct"));
        header.push(format!("{k}/se_pct"));
    }
    header.extend(
        [
            "mean_accuracy",
            "rs1_absolute",
            "rs1_relative",
            "rs2",
            "rs2_normalized",
        ]
        .map(String::from),
    );
    w.write_record(&header).expect("in-memory write");
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        let mut rec = vec![row.rank.to_string(), row.model_id.clone()];
        for k in &keys {
            let c = row.cells.get(k);
            rec.push(num(c.map(|c| c.accuracy_pct)));
            rec.push(num(c.map(|c| c.se_pct)));
        }
        rec.push(row.mean_accuracy.to_string());
        for v in [
            row.rs1_absolute,
            row.rs1_relative,
            row.rs2,
            row.rs2_normalized,
        ] {
            rec.push(num(v));
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
