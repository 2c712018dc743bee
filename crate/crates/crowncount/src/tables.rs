//! CSV formats for detections, removals, ground truth and benchmark reports,
//! plus the aligned plain-text report table.

use std::path::Path;

use crowncount_core::bench::{format_signed, round_seconds, BenchReport, BenchRow, Score};
use crowncount_core::domainfilter::Removal;
use crowncount_core::particles::Detection;
use crowncount_core::synth::GroundTruth;

use crate::{Error, Result};

pub const DETECTION_HEADER: [&str; 8] =
    ["id", "x", "y", "area", "major", "minor", "angle", "score"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e))
}

fn detection_fields(d: &Detection) -> Vec<String> {
    vec![
        d.id.to_string(),
        format!("{:.3}", d.centroid_x),
        format!("{:.3}", d.centroid_y),
        format!("{:.3}", d.area),
        format!("{:.3}", d.major),
        format!("{:.3}", d.minor),
        format!("{:.3}", d.angle),
        format!("{:.3}", d.score),
    ]
}

pub fn write_detections(path: &Path, detections: &[Detection]) -> Result<()> {
    let mut w = writer(path)?;
    let fail = |e: csv::Error| Error::format(path, e);
    w.write_record(DETECTION_HEADER).map_err(fail)?;
    for d in detections {
        w.write_record(detection_fields(d)).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_removals(path: &Path, removed: &[Removal]) -> Result<()> {
    let mut w = writer(path)?;
    let fail = |e: csv::Error| Error::format(path, e);
    let mut header = DETECTION_HEADER.to_vec();
    header.push("reason");
    w.write_record(&header).map_err(fail)?;
    for r in removed {
        let mut fields = detection_fields(&r.detection);
        fields.push(r.reason.to_string());
        w.write_record(fields).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::format(path, format!("missing column `{name}`")))
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    let line = rec.position().map_or(0, |p| p.line());
    raw.parse()
        .map_err(|_| Error::format(path, format!("line {line}: cannot parse `{raw}`")))
}

/// Reads the detections format; extra columns such as `reason` are ignored.
pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let mut r = reader(path)?;
    let headers = r.headers().map_err(|e| Error::format(path, e))?.clone();
    let cols: Vec<usize> = DETECTION_HEADER
        .iter()
        .map(|name| column(&headers, name, path))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e))?;
        let d = Detection {
            id: parse(&rec, cols[0], path)?,
            centroid_x: parse(&rec, cols[1], path)?,
            centroid_y: parse(&rec, cols[2], path)?,
            area: parse(&rec, cols[3], path)?,
            major: parse(&rec, cols[4], path)?,
            minor: parse(&rec, cols[5], path)?,
            angle: parse(&rec, cols[6], path)?,
            score: parse(&rec, cols[7], path)?,
        };
        let finite = [
            d.centroid_x,
            d.centroid_y,
            d.area,
            d.major,
            d.minor,
            d.angle,
            d.score,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || d.area <= 0.0 || !(0.0..=1.0).contains(&d.score) {
            return Err(Error::format(
                path,
                format!("detection {} has invalid values", d.id),
            ));
        }
        out.push(d);
    }
    Ok(out)
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut w = writer(path)?;
    let fail = |e: csv::Error| Error::format(path, e);
    w.write_record(["x", "y"]).map_err(fail)?;
    for &(x, y) in &truth.centers {
        w.write_record([format!("{x:.3}"), format!("{y:.3}")])
            .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let mut r = reader(path)?;
    let headers = r.headers().map_err(|e| Error::format(path, e))?.clone();
    let (cx, cy) = (column(&headers, "x", path)?, column(&headers, "y", path)?);
    let mut centers = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e))?;
        centers.push((parse(&rec, cx, path)?, parse(&rec, cy, path)?));
    }
    Ok(GroundTruth::new(centers))
}

fn seconds(v: Option<f64>) -> String {
    v.map_or_else(String::new, |s| format!("{:.1}", round_seconds(s)))
}

fn score_fields(s: Option<Score>, blank_count: &str) -> [String; 3] {
    match s {
        Some(s) => [
            s.count.to_string(),
            format_signed(s.signed_error),
            format!("{:.1}", s.error_pct),
        ],
        None => [blank_count.to_string(), String::new(), String::new()],
    }
}

fn has_filtered(report: &BenchReport) -> bool {
    report.rows.iter().any(|r| r.filtered.is_some())
}

fn row_fields(row: &BenchRow, filtered: bool) -> Vec<String> {
    let t = row.timing.as_ref();
    let mut f = vec![
        row.classifier.clone(),
        seconds(t.map(|t| t.train_s)),
        seconds(t.map(|t| t.segment_s)),
        seconds(t.map(|t| t.total_s)),
    ];
    f.extend(score_fields(row.raw, "-1"));
    if filtered {
        f.extend(score_fields(
            row.filtered,
            if row.is_failed() { "-1" } else { "" },
        ));
    }
    f
}

pub fn write_report_csv(path: &Path, report: &BenchReport) -> Result<()> {
    let mut w = writer(path)?;
    let fail = |e: csv::Error| Error::format(path, e);
    let filtered = has_filtered(report);
    let mut header = vec![
        "classifier",
        "train_s",
        "segment_s",
        "total_s",
        "count",
        "error",
        "error_pct",
    ];
    if filtered {
        header.extend(["filtered_count", "filtered_error", "filtered_error_pct"]);
    }
    header.push("failure");
    w.write_record(&header).map_err(fail)?;
    for row in &report.rows {
        let mut f = row_fields(row, filtered);
        f.push(row.failure.clone().unwrap_or_default());
        w.write_record(f).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Aligned table; numbers right-aligned, failures listed below it.
pub fn format_report_table(report: &BenchReport) -> String {
    let filtered = has_filtered(report);
    let mut header: Vec<String> = [
        "Classifier",
        "Train(s)",
        "Segment(s)",
        "Total(s)",
        "Count",
        "Error",
        "Error(%)",
    ]
    .map(String::from)
    .to_vec();
    if filtered {
        header.extend(["Filtered", "F.Error", "F.Error(%)"].map(String::from));
    }
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| row_fields(r, filtered))
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(&header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out.push_str(&format!(
        "truth {}  config {}\n",
        report.truth, report.fingerprint
    ));
    for r in report.rows.iter().filter(|r| r.is_failed()) {
        out.push_str(&format!(
            "failed {}: {}\n",
            r.classifier,
            r.failure.as_deref().unwrap_or("")
        ));
    }
    out
}
