//! Table rendering and pareto fronts.

use serde::{Deserialize, Serialize};

use crate::hints::HintStrategy;
use crate::metrics::{CorpusMetricTable, CorpusRow};

pub const METRIC_COLUMNS: [&str; 8] = [
    "InfoGain_mean",
    "InfoGain_comb",
    "Redundancy",
    "Consistency",
    "Readability_DC",
    "Leakage_EM",
    "Leakage_LLM",
    "Aggregate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown table format {other:?} (text, csv)")),
        }
    }
}

/// Column value by header name; `None` for a column with no data.
pub fn metric_value(row: &CorpusRow, column: &str) -> Option<f64> {
    match column {
        "InfoGain_mean" => Some(row.info_gain_mean),
        "InfoGain_comb" => Some(row.info_gain_comb),
        "Redundancy" => Some(row.redundancy),
        "Consistency" => Some(row.consistency),
        "Readability_DC" => row.readability_dc,
        "Leakage_EM" => Some(row.leakage_em),
        "Leakage_LLM" => row.leakage_llm,
        "Aggregate" => Some(row.aggregate),
        _ => None,
    }
}

fn cells(row: &CorpusRow, precision: usize) -> Vec<String> {
    let mut out = vec![row.model_id.clone(), row.strategy.to_string(), row.questions.to_string()];
    out.extend(METRIC_COLUMNS.iter().map(|c| match metric_value(row, c) {
        Some(v) => format!("{v:.precision$}"),
        None => "-".to_string(),
    }));
    out
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["Model", "Strategy", "N"];
    h.extend(METRIC_COLUMNS);
    h
}

/// Text tables use three decimals, CSV six.
pub fn render_table(table: &CorpusMetricTable, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header()).expect("in-memory write");
            for row in &table.rows {
                w.write_record(cells(row, 6)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
        }
        TableFormat::Text => {
            let rows: Vec<Vec<String>> = std::iter::once(header().iter().map(|s| s.to_string()).collect())
                .chain(table.rows.iter().map(|r| cells(r, 3)))
                .collect();
            let widths: Vec<usize> = (0..rows[0].len())
                .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            for r in &rows {
                let line: Vec<String> = r
                    .iter()
                    .enumerate()
                    .map(|(i, c)| if i < 2 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
                    .collect();
                out.push_str(line.join("  ").trim_end());
                out.push('\n');
            }
            out
        }
    }
}

/// Reads a CSV produced by [`render_table`].
pub fn parse_table_csv(text: &str) -> Result<CorpusMetricTable, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != header() {
        return Err("unexpected table header".into());
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<Option<f64>, String> {
            match &record[i] {
                "-" => Ok(None),
                s => s.parse().map(Some).map_err(|_| format!("bad number {s:?}")),
            }
        };
        let req = |i: usize| num(i)?.ok_or_else(|| format!("missing {}", &headers[i]));
        let strategy = match &record[1] {
            "static" => HintStrategy::Static,
            "dynamic" => HintStrategy::Dynamic,
            s => return Err(format!("bad strategy {s:?}")),
        };
        rows.push(CorpusRow {
            model_id: record[0].to_string(),
            strategy,
            questions: record[2].parse().map_err(|_| "bad N".to_string())?,
            info_gain_mean: req(3)?,
            info_gain_comb: req(4)?,
            redundancy: req(5)?,
            consistency: req(6)?,
            readability_dc: num(7)?,
            leakage_em: req(8)?,
            leakage_em_hint_rate: 0.0,
            leakage_llm: num(9)?,
            aggregate: req(10)?,
        });
    }
    Ok(CorpusMetricTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

impl ParetoPoint {
    pub fn new(x: f64, y: f64, label: impl Into<String>) -> Self {
        Self { x, y, label: label.into() }
    }
}

/// `a` dominates `b`: no worse on both axes and strictly better on one.
pub fn dominates(a: &ParetoPoint, b: &ParetoPoint, maximize_x: bool, maximize_y: bool) -> bool {
    let orient = |v: f64, max: bool| if max { v } else { -v };
    let (ax, ay) = (orient(a.x, maximize_x), orient(a.y, maximize_y));
    let (bx, by) = (orient(b.x, maximize_x), orient(b.y, maximize_y));
    ax >= bx && ay >= by && (ax > bx || ay > by)
}

/// Labels of the non-dominated points, in ascending x (ties keep input
/// order).
pub fn pareto_front(points: &[ParetoPoint], maximize_x: bool, maximize_y: bool) -> Vec<String> {
    let mut front: Vec<&ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p, maximize_x, maximize_y)))
        .collect();
    front.sort_by(|a, b| a.x.total_cmp(&b.x));
    front.into_iter().map(|p| p.label.clone()).collect()
}

/// One point per table row, labelled `model/strategy`. Rows lacking
/// either column are skipped.
pub fn pareto_points(table: &CorpusMetricTable, x: &str, y: &str) -> Vec<ParetoPoint> {
    table
        .rows
        .iter()
        .filter_map(|r| {
            Some(ParetoPoint::new(
                metric_value(r, x)?,
                metric_value(r, y)?,
                format!("{}/{}", r.model_id, r.strategy),
            ))
        })
        .collect()
}

/// Columns where larger is better.
pub fn higher_is_better(column: &str) -> bool {
    !matches!(column, "Redundancy" | "Leakage_EM" | "Leakage_LLM" | "Readability_DC")
}
