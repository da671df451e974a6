//! On-disk formats: JSONL trace corpora, CSV feature tables, JSON reports and
//! significance tables. Every writer goes through a temp file and rename.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ContactMode, Dataset, FeatureVector, StrainTrace, Task};
use crate::eval::CvReport;
use crate::stats::SignificanceProfile;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

/// Writes `contents` to `path` via a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| FormatError::io(path, e))?;
    tmp.write_all(contents)
        .map_err(|e| FormatError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| FormatError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| FormatError::io(path, e.error))?;
    Ok(())
}

/// One line of a trace corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub id: String,
    pub kind: Task,
    pub mode: ContactMode,
    pub label: String,
    pub fs_hz: f64,
    pub samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl From<&StrainTrace> for TraceRecord {
    fn from(t: &StrainTrace) -> Self {
        Self {
            id: t.trial_id.clone(),
            kind: t.kind,
            mode: t.mode,
            label: t.label.name().to_string(),
            fs_hz: t.sample_rate_hz(),
            samples: t.samples().to_vec(),
            seed: t.seed,
        }
    }
}

impl TraceRecord {
    pub fn into_trace(self) -> crate::Result<StrainTrace> {
        let label = self.kind.label(&self.label)?;
        StrainTrace::new(
            self.samples,
            self.fs_hz,
            self.kind,
            self.mode,
            label,
            self.id,
            self.seed,
        )
    }
}

pub fn corpus_to_jsonl(traces: &[StrainTrace]) -> String {
    let mut out = String::new();
    for t in traces {
        let line = serde_json::to_string(&TraceRecord::from(t)).expect("records serialise");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: &Path, traces: &[StrainTrace]) -> Result<(), FormatError> {
    write_atomic(path, corpus_to_jsonl(traces).as_bytes())
}

pub fn read_corpus(path: &Path) -> Result<Vec<StrainTrace>, FormatError> {
    let file = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut traces = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line)
            .map_err(|e| FormatError::parse(path, i + 1, e.to_string()))?;
        let id = rec.id.clone();
        let trace = rec
            .into_trace()
            .map_err(|e| FormatError::parse(path, i + 1, format!("record `{id}`: {e}")))?;
        traces.push(trace);
    }
    Ok(traces)
}

/// Feature table with a trailing `label` column. Floats use the shortest
/// representation that reads back to the same value.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    for name in ds.feature_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("label\n");
    for row in ds.rows() {
        for v in &row.values {
            let _ = write!(out, "{v},");
        }
        out.push_str(row.label.name());
        out.push('\n');
    }
    out
}

pub fn write_features(path: &Path, ds: &Dataset) -> Result<(), FormatError> {
    write_atomic(path, dataset_to_csv(ds).as_bytes())
}

/// Parses a feature table. The task is the one whose label set contains every
/// label; the contact mode is not stored in the file and must be supplied.
pub fn parse_features(
    text: &str,
    mode: ContactMode,
    origin: &Path,
) -> Result<Dataset, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| FormatError::parse(origin, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.last().map(String::as_str) != Some("label") || header.len() < 2 {
        return Err(FormatError::parse(origin, 1, "last column must be `label`"));
    }
    let names: Vec<String> = header[..header.len() - 1].to_vec();
    let mut raw: Vec<(Vec<f64>, String, usize)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| FormatError::parse(origin, line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(FormatError::parse(
                origin,
                line,
                format!("expected {} columns, found {}", header.len(), rec.len()),
            ));
        }
        let values = rec
            .iter()
            .take(names.len())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| FormatError::parse(origin, line, format!("`{f}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        raw.push((values, rec[names.len()].to_string(), line));
    }
    if raw.is_empty() {
        return Err(FormatError::parse(origin, 2, "no data rows"));
    }
    let task = [Task::Texture, Task::Stiffness]
        .into_iter()
        .find(|t| raw.iter().all(|(_, l, _)| t.label(l).is_ok()))
        .ok_or_else(|| {
            FormatError::Invalid(format!(
                "{}: labels do not belong to a single task",
                origin.display()
            ))
        })?;
    let rows = raw
        .into_iter()
        .map(|(values, label, line)| {
            let fv = FeatureVector::new(names.clone(), values)
                .map_err(|e| FormatError::parse(origin, line, e.to_string()))?;
            Ok((fv, task.label(&label).expect("checked above")))
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Dataset::build(rows, task, mode).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn read_features(path: &Path, mode: ContactMode) -> Result<Dataset, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_features(&text, mode, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    pub mean_accuracy: f64,
    pub run_accuracies: Vec<f64>,
    pub fold_accuracies: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub seed: u64,
}

impl From<&CvReport> for ModelEntry {
    fn from(r: &CvReport) -> Self {
        Self {
            name: r.model.clone(),
            mean_accuracy: r.mean_accuracy,
            run_accuracies: r.run_accuracies.clone(),
            fold_accuracies: r.fold_accuracies.clone(),
            labels: r.labels.clone(),
            confusion: r.confusion.clone(),
            seed: r.seeds.first().copied().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
    pub models: Vec<String>,
    pub features: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub task: Task,
    pub mode: ContactMode,
    pub models: Vec<ModelEntry>,
    pub config: ReportConfig,
    pub tool_version: String,
}

impl ReportFile {
    /// Checks the internal consistency a reader may rely on.
    pub fn validate(&self) -> Result<(), FormatError> {
        for m in &self.models {
            if m.run_accuracies.is_empty() {
                return Err(FormatError::Invalid(format!(
                    "model `{}` has no runs",
                    m.name
                )));
            }
            let mean = m.run_accuracies.iter().sum::<f64>() / m.run_accuracies.len() as f64;
            if (mean - m.mean_accuracy).abs() > 1e-12 {
                return Err(FormatError::Invalid(format!(
                    "model `{}`: mean {} does not match runs ({mean})",
                    m.name, m.mean_accuracy
                )));
            }
            let k = m.labels.len();
            if m.confusion.len() != k || m.confusion.iter().any(|r| r.len() != k) {
                return Err(FormatError::Invalid(format!(
                    "model `{}`: confusion is not {k}x{k}",
                    m.name
                )));
            }
            if m.run_accuracies.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return Err(FormatError::Invalid(format!(
                    "model `{}`: accuracy outside [0, 1]",
                    m.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

pub fn write_report(path: &Path, report: &ReportFile) -> Result<(), FormatError> {
    write_atomic(path, report.to_json().as_bytes())
}

pub fn read_report(path: &Path) -> Result<ReportFile, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let report: ReportFile = serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: format!("column {}: {e}", e.column()),
    })?;
    report.validate()?;
    Ok(report)
}

/// `feature_name,avg_p,p_A|B,...` with one column per class pair.
pub fn significance_to_csv(profile: &SignificanceProfile) -> String {
    let mut out = String::from("feature_name,avg_p");
    let Some(first) = profile.matrices.first() else {
        out.push('\n');
        return out;
    };
    let k = first.labels.len();
    for i in 0..k {
        for j in i + 1..k {
            let _ = write!(out, ",p_{}|{}", first.labels[i], first.labels[j]);
        }
    }
    out.push('\n');
    for ((name, avg), m) in profile
        .feature_names
        .iter()
        .zip(&profile.average_p)
        .zip(&profile.matrices)
    {
        let _ = write!(out, "{name},{avg}");
        for i in 0..k {
            for j in i + 1..k {
                let _ = write!(out, ",{}", m.p[i][j]);
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_significance(path: &Path, profile: &SignificanceProfile) -> Result<(), FormatError> {
    write_atomic(path, significance_to_csv(profile).as_bytes())
}

/// `(feature_name, avg_p)` pairs from a significance table.
pub fn read_significance(path: &Path) -> Result<Vec<(String, f64)>, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| FormatError::parse(path, 1, e.to_string()))?;
    if header.get(0) != Some("feature_name") || header.get(1) != Some("avg_p") {
        return Err(FormatError::parse(
            path,
            1,
            "expected `feature_name,avg_p,...` header",
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| FormatError::parse(path, i + 2, e.to_string()))?;
        let p: f64 = rec[1]
            .parse()
            .map_err(|e| FormatError::parse(path, i + 2, format!("avg_p: {e}")))?;
        out.push((rec[0].to_string(), p));
    }
    Ok(out)
}

/// Converts a two-column `(time_s, strain_n)` log into a trace. The sample
/// rate is inferred from the time column, which must be uniform to within 1%.
pub fn trace_from_time_series(
    text: &str,
    kind: Task,
    mode: ContactMode,
    label: &str,
    id: &str,
    origin: &Path,
) -> Result<StrainTrace, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| FormatError::parse(origin, i + 1, e.to_string()))?;
        if rec.len() < 2 {
            return Err(FormatError::parse(origin, i + 1, "expected time,strain"));
        }
        let (Ok(t), Ok(v)) = (rec[0].parse::<f64>(), rec[1].parse::<f64>()) else {
            if i == 0 {
                continue; // header line
            }
            return Err(FormatError::parse(origin, i + 1, "non-numeric value"));
        };
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(FormatError::Invalid(format!(
            "{}: need at least two samples",
            origin.display()
        )));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if dt.is_nan()
        || dt <= 0.0
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 0.01 * dt)
    {
        return Err(FormatError::Invalid(format!(
            "{}: time column is not uniformly increasing",
            origin.display()
        )));
    }
    let label = kind
        .label(label)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    StrainTrace::new(values, 1.0 / dt, kind, mode, label, id, None)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_dataset;
    use crate::simulator::{generate_corpus, SimConfig};

    #[test]
    fn corpus_round_trip() {
        let corpus = generate_corpus(
            Task::Stiffness,
            ContactMode::Abduction,
            2,
            &SimConfig::default(),
            3,
        )
        .unwrap();
        let text = corpus_to_jsonl(&corpus);
        assert_eq!(text.lines().count(), 10);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        write_corpus(&p, &corpus).unwrap();
        assert_eq!(read_corpus(&p).unwrap(), corpus);
    }

    #[test]
    fn record_without_seed() {
        let line = r#"{"id":"x","kind":"texture","mode":"AC","label":"T2","fs_hz":60.0,"samples":[1.0,2.5]}"#;
        let rec: TraceRecord = serde_json::from_str(line).unwrap();
        let t = rec.clone().into_trace().unwrap();
        assert_eq!(t.seed, None);
        assert_eq!(serde_json::to_string(&TraceRecord::from(&t)).unwrap(), line);
    }

    #[test]
    fn bad_records_are_reported_by_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        fs::write(&p, "{\"id\":\"a\",\"kind\":\"texture\",\"mode\":\"FC\",\"label\":\"Q\",\"fs_hz\":60,\"samples\":[1]}\n").unwrap();
        match read_corpus(&p) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn features_round_trip() {
        let corpus = generate_corpus(
            Task::Texture,
            ContactMode::Flexion,
            2,
            &SimConfig::default(),
            3,
        )
        .unwrap();
        let ds = extract_dataset(&corpus).unwrap();
        let csv = dataset_to_csv(&ds);
        assert_eq!(csv.lines().count(), 17);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 92);
        let back = parse_features(&csv, ContactMode::Flexion, Path::new("f.csv")).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn malformed_feature_tables() {
        let p = Path::new("x.csv");
        assert!(parse_features("a,b\n1,F\n", ContactMode::Flexion, p).is_err());
        assert!(parse_features("a,label\n1,F\n2\n", ContactMode::Flexion, p).is_err());
        assert!(parse_features("a,label\nzz,F\n", ContactMode::Flexion, p).is_err());
        assert!(parse_features("a,label\n1,F\n2,PLA\n", ContactMode::Flexion, p).is_err());
        let ok = parse_features("slope,label\n-0.5,PLA\n", ContactMode::Abduction, p).unwrap();
        assert_eq!(ok.task, Task::Stiffness);
    }

    #[test]
    fn raw_time_series() {
        let text = "time,strain\n0.0,1.0\n0.5,2.0\n1.0,3.0\n";
        let t = trace_from_time_series(
            text,
            Task::Stiffness,
            ContactMode::Flexion,
            "PLA",
            "r1",
            Path::new("r.csv"),
        )
        .unwrap();
        assert_eq!(t.sample_rate_hz(), 2.0);
        assert_eq!(t.samples(), &[1.0, 2.0, 3.0]);
        let uneven = "0,1\n1,2\n3,3\n";
        assert!(trace_from_time_series(
            uneven,
            Task::Stiffness,
            ContactMode::Flexion,
            "PLA",
            "r",
            Path::new("r.csv")
        )
        .is_err());
    }
}
