//! Parameter grids: one experiment cell per combination, rows in grid order.

use std::io::Write;
use std::thread;

use art_core::keyspace::DistributionKind;
use art_core::sim::{run_cell, Experiment, ExperimentConfig, MetricsReport, SimError};

use crate::table::{error_record, report_records, CsvOut};

/// Values to sweep. An empty list keeps the base configuration's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    pub n_clusters: Vec<u64>,
    pub fanouts: Vec<u64>,
    pub distributions: Vec<DistributionKind>,
}

impl GridSpec {
    pub fn single() -> Self {
        GridSpec::default()
    }

    pub fn clusters(values: &[u64]) -> Self {
        GridSpec {
            n_clusters: values.to_vec(),
            ..GridSpec::default()
        }
    }

    /// Cell configurations, cluster counts outermost.
    pub fn cells(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let or_base = |v: &[u64], d: u64| if v.is_empty() { vec![d] } else { v.to_vec() };
        let dists = if self.distributions.is_empty() {
            vec![base.distribution]
        } else {
            self.distributions.clone()
        };
        let mut out = Vec::new();
        for n in or_base(&self.n_clusters, base.n_clusters) {
            for b in or_base(&self.fanouts, base.b) {
                for &distribution in &dists {
                    out.push(ExperimentConfig {
                        n_clusters: n,
                        b,
                        distribution,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct CellResult {
    pub config: ExperimentConfig,
    pub outcome: Result<MetricsReport, SimError>,
}

#[derive(Debug, Default)]
pub struct GridOutcome {
    pub cells: Vec<CellResult>,
}

impl GridOutcome {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }
}

/// Runs every cell (in parallel) and writes their rows in grid order,
/// followed by one error row per failed cell.
pub fn run_grid<W: Write>(
    base: &ExperimentConfig,
    grid: &GridSpec,
    experiment: Experiment,
    out: &mut CsvOut<W>,
) -> csv::Result<GridOutcome> {
    let configs = grid.cells(base);
    let results: Vec<Result<MetricsReport, SimError>> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || run_cell(cfg, experiment)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment cell panicked"))
            .collect()
    });
    let cells: Vec<CellResult> = configs
        .into_iter()
        .zip(results)
        .map(|(config, outcome)| CellResult { config, outcome })
        .collect();
    for cell in &cells {
        if let Ok(report) = &cell.outcome {
            for rec in report_records(experiment.name(), &cell.config, report) {
                out.write(&rec)?;
            }
        }
    }
    for cell in &cells {
        if let Err(e) = &cell.outcome {
            out.write(&error_record(experiment.name(), &cell.config, &e.to_string()))?;
        }
    }
    Ok(GridOutcome { cells })
}
