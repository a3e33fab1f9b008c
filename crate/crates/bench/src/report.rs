//! Plot data and a text summary from a results CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use art_core::lrt::{t1_hop_bound, Fanout};
use thiserror::Error;

use crate::table::{sig6, COLUMNS};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub n_total: u64,
    pub n_clusters: u64,
    pub hops_mean: f64,
    pub skeleton_hops_mean: f64,
}

/// Rows sharing everything but the network size.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub experiment: String,
    pub op_class: String,
    pub distribution: String,
    pub b: u64,
    pub c: u32,
    pub inner: String,
    pub points: Vec<Point>,
}

impl Series {
    pub fn name(&self) -> String {
        let raw = format!(
            "{}-{}-{}-b{}-c{}-{}",
            self.experiment, self.op_class, self.distribution, self.b, self.c, self.inner
        );
        raw.chars()
            .map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' || ch == '.' { ch } else { '_' })
            .collect()
    }

    /// `Some(true)` when mean hops grow more slowly than `log2 N'` between
    /// the smallest and largest network; `None` without two sizes.
    pub fn sub_logarithmic(&self) -> Option<bool> {
        let first = self.points.first()?;
        let last = self.points.last()?;
        if last.n_clusters <= first.n_clusters || first.n_clusters < 2 || first.hops_mean <= 0.0 {
            return None;
        }
        let growth = last.hops_mean / first.hops_mean;
        let log_growth = (last.n_clusters as f64).log2() / (first.n_clusters as f64).log2();
        Some(growth < log_growth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutput {
    pub series: Vec<Series>,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Experiment, op class, distribution, fanout, c and inner overlay.
type SeriesKey = (String, String, String, u64, u32, String);

fn field<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, line: u64) -> Result<T, ReportError> {
    row.get(idx)
        .unwrap_or("")
        .parse()
        .map_err(|_| ReportError::SchemaMismatch(format!("row {line}: bad {} value", COLUMNS[idx])))
}

/// Groups result rows into series. Error rows are skipped.
pub fn read_series(csv_text: &str) -> Result<Vec<Series>, ReportError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(csv_text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(ReportError::SchemaMismatch(format!(
            "expected header {:?}, found {:?}",
            COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut groups: BTreeMap<SeriesKey, Vec<Point>> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        if row.len() != COLUMNS.len() {
            return Err(ReportError::SchemaMismatch(format!("row {line}: {} fields", row.len())));
        }
        if row[7].starts_with("error") {
            continue;
        }
        let key = (
            row[0].to_string(),
            row[7].to_string(),
            row[6].to_string(),
            field(&row, 3, line)?,
            field(&row, 4, line)?,
            row[5].to_string(),
        );
        let point = Point {
            n_total: field(&row, 1, line)?,
            n_clusters: field(&row, 2, line)?,
            hops_mean: field(&row, 8, line)?,
            skeleton_hops_mean: field(&row, 12, line)?,
        };
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(point);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let mut points = groups.remove(&key).unwrap_or_default();
            points.sort_by_key(|p| p.n_clusters);
            let (experiment, op_class, distribution, b, c, inner) = key;
            Series {
                experiment,
                op_class,
                distribution,
                b,
                c,
                inner,
                points,
            }
        })
        .collect())
}

fn bound(n_clusters: u64, b: u64) -> f64 {
    match Fanout::new(b) {
        Ok(f) if n_clusters >= 4 => t1_hop_bound(n_clusters, f),
        _ => 0.0,
    }
}

pub fn plot_data(series: &Series) -> String {
    let mut out = String::from("N_total N_clusters hops_mean skeleton_hops_mean t1_hop_bound log2_N\n");
    for p in &series.points {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            p.n_total,
            p.n_clusters,
            sig6(p.hops_mean),
            sig6(p.skeleton_hops_mean),
            sig6(bound(p.n_clusters, series.b)),
            sig6((p.n_clusters as f64).log2()),
        )
        .unwrap();
    }
    out
}

pub fn summary(series: &[Series]) -> String {
    let mut out = String::new();
    for s in series {
        writeln!(out, "{}", s.name()).unwrap();
        for p in &s.points {
            writeln!(
                out,
                "  N'={} N_total={} hops_mean={} skeleton_hops_mean={} t1_hop_bound={} log2(N')={}",
                p.n_clusters,
                p.n_total,
                sig6(p.hops_mean),
                sig6(p.skeleton_hops_mean),
                sig6(bound(p.n_clusters, s.b)),
                sig6((p.n_clusters as f64).log2()),
            )
            .unwrap();
        }
        let verdict = match s.sub_logarithmic() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        writeln!(out, "  sub-logarithmic: {verdict}").unwrap();
    }
    out
}

/// Reads `csv_path` and writes one `.dat` file per series plus
/// `summary.txt` into `out_dir`.
pub fn report(csv_path: &Path, out_dir: &Path) -> Result<ReportOutput, ReportError> {
    let series = read_series(&fs::read_to_string(csv_path)?)?;
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for s in &series {
        let path = out_dir.join(format!("{}.dat", s.name()));
        fs::write(&path, plot_data(s))?;
        files.push(path);
    }
    let text = summary(&series);
    let path = out_dir.join("summary.txt");
    fs::write(&path, &text)?;
    files.push(path);
    Ok(ReportOutput {
        series,
        summary: text,
        files,
    })
}
