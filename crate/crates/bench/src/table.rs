//! The CSV row schema and its fixed number formatting.

use std::io::Write;

use art_core::sim::{ExperimentConfig, MetricsReport};

pub const COLUMNS: [&str; 19] = [
    "experiment",
    "N_total",
    "N_clusters",
    "b",
    "c",
    "inner",
    "distribution",
    "op_class",
    "hops_mean",
    "hops_p50",
    "hops_p99",
    "hops_max",
    "skeleton_hops_mean",
    "success_rate",
    "max_routing_entries",
    "cluster_size_max",
    "violations",
    "seed",
    "config_hash",
];

/// Six significant digits, without trailing zeros.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("round trip");
    let s = rounded.to_string();
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// One CSV record per operation class of a report.
pub fn report_records(experiment: &str, cfg: &ExperimentConfig, report: &MetricsReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|row| {
            let s = &row.stats;
            vec![
                experiment.to_string(),
                report.n_total.to_string(),
                report.n_clusters.to_string(),
                cfg.b.to_string(),
                cfg.c.to_string(),
                cfg.inner.name().to_string(),
                cfg.distribution.name().to_string(),
                row.op_class.clone(),
                sig6(s.mean),
                sig6(s.p50),
                sig6(s.p99),
                sig6(s.max),
                sig6(s.skeleton_mean),
                sig6(s.success_rate()),
                sig6(report.max_routing_entries),
                report.cluster_size_max.to_string(),
                report.violations.to_string(),
                cfg.seed.to_string(),
                report.config_hash.clone(),
            ]
        })
        .collect()
}

/// Record for a cell that could not run. Only the identifying columns and
/// the error text (in `op_class`) are filled.
pub fn error_record(experiment: &str, cfg: &ExperimentConfig, error: &str) -> Vec<String> {
    let mut rec = vec![String::new(); COLUMNS.len()];
    rec[0] = experiment.to_string();
    rec[2] = cfg.n_clusters.to_string();
    rec[3] = cfg.b.to_string();
    rec[4] = cfg.c.to_string();
    rec[5] = cfg.inner.name().to_string();
    rec[6] = cfg.distribution.name().to_string();
    rec[7] = format!("error: {error}");
    rec[17] = cfg.seed.to_string();
    rec[18] = cfg.config_hash();
    rec
}

pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvOut<W> {
    /// Starts a table, writing the header.
    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(COLUMNS)?;
        Ok(CsvOut { inner })
    }

    pub fn write(&mut self, record: &[String]) -> csv::Result<()> {
        self.inner.write_record(record)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().unwrap_or_else(|e| panic!("flushed writer failed: {}", e.error()))
    }
}
