//! Full-factorial sweep over synthetic datasets and methods.

use std::time::Instant;

use kindap::evaluation::accuracy;
use kindap::kindap::KindapParams;
use kindap::rng::mix_seed;
use kindap::synth::{generate, SynthSpec};
use kindap::SolverTrace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::methods::{run_method, Method, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub k_list: Vec<usize>,
    pub rho_list: Vec<f64>,
    pub methods: Vec<Method>,
    pub replications: usize,
    /// Seed indices; each one yields an independent dataset per `(k, rho)`.
    pub seeds: Vec<u64>,
    pub base_seed: u64,
    pub per_cluster: usize,
    pub ambient_dim: usize,
    pub kindap: KindapParams,
}

impl BenchConfig {
    pub fn new(
        k_list: Vec<usize>,
        rho_list: Vec<f64>,
        methods: Vec<Method>,
        replications: usize,
        seeds: Vec<u64>,
    ) -> Self {
        Self {
            k_list,
            rho_list,
            methods,
            replications,
            seeds,
            base_seed: 0,
            per_cluster: 40,
            ambient_dim: 300,
            kindap: KindapParams::default(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let empty = [
            ("k list", self.k_list.is_empty()),
            ("rho list", self.rho_list.is_empty()),
            ("method list", self.methods.is_empty()),
            ("seed list", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(CliError::Usage(format!("the {name} is empty")));
        }
        if self.replications == 0 {
            return Err(CliError::Usage("replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.k_list.len() * self.rho_list.len() * self.methods.len() * self.seeds.len()
    }

    /// Seed of the synthetic dataset for one `(k, rho, seed)` triple.
    pub fn dataset_seed(&self, k: usize, rho: f64, seed: u64) -> u64 {
        mix_seed(&[self.base_seed, k as u64, rho.to_bits(), seed])
    }

    /// Solver seed of one cell.
    pub fn method_seed(&self, k: usize, rho: f64, method: Method, seed: u64) -> u64 {
        mix_seed(&[self.base_seed, k as u64, rho.to_bits(), method.id(), seed])
    }
}

/// One row of the long-format report. Metric fields are empty when the
/// cell failed, in which case `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub k: usize,
    pub rho: f64,
    pub replications: usize,
    pub accuracy: Option<f64>,
    pub kind_objective: Option<f64>,
    pub kmeans_objective: Option<f64>,
    pub wall_time_seconds: Option<f64>,
    pub outer_iters: Option<usize>,
    pub inner_iters_total: Option<usize>,
    pub seed: u64,
    pub error: Option<String>,
}

/// A row plus every solver trace behind it, each paired with whether its
/// main history is expected to be monotone.
#[derive(Debug, Clone)]
pub struct BenchCell {
    pub row: BenchRow,
    pub traces: Vec<(SolverTrace, bool)>,
}

impl BenchCell {
    pub fn monotonicity_violations(&self, slack: f64) -> usize {
        self.traces.iter().map(|(t, history)| t.monotonicity_violations(slack, *history)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub config: BenchConfig,
    pub cells: Vec<BenchCell>,
    pub total_seconds: f64,
}

impl BenchOutcome {
    pub fn rows(&self) -> Vec<BenchRow> {
        self.cells.iter().map(|c| c.row.clone()).collect()
    }

    /// Mean accuracy over the successful cells matching `method`, `k`, `rho`.
    pub fn mean_accuracy(&self, method: Method, k: usize, rho: f64) -> Option<f64> {
        let acc: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.row.method == method && c.row.k == k && c.row.rho == rho)
            .filter_map(|c| c.row.accuracy)
            .collect();
        (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for cell in &self.cells {
            w.serialize(&cell.row).map_err(|e| CliError::Data(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Data(e.to_string()))
    }

    pub fn to_json(&self) -> CliResult<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: u32,
            config: &'a BenchConfig,
            total_seconds: f64,
            rows: Vec<BenchRow>,
        }
        let doc = Doc {
            schema: crate::report::SCHEMA,
            config: &self.config,
            total_seconds: self.total_seconds,
            rows: self.rows(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Data(e.to_string()))
    }
}

fn failed_row(config: &BenchConfig, method: Method, k: usize, rho: f64, seed: u64, error: String) -> BenchCell {
    BenchCell {
        row: BenchRow {
            method,
            k,
            rho,
            replications: config.replications,
            accuracy: None,
            kind_objective: None,
            kmeans_objective: None,
            wall_time_seconds: None,
            outer_iters: None,
            inner_iters_total: None,
            seed,
            error: Some(error),
        },
        traces: Vec::new(),
    }
}

fn run_dataset(config: &BenchConfig, k: usize, rho: f64, seed: u64) -> Vec<BenchCell> {
    let spec = SynthSpec {
        k,
        per_cluster: config.per_cluster,
        rho,
        ambient_dim: config.ambient_dim,
        seed: config.dataset_seed(k, rho, seed),
    };
    let data = match generate(&spec) {
        Ok(d) => d,
        Err(e) => {
            return config.methods.iter().map(|&m| failed_row(config, m, k, rho, seed, e.to_string())).collect();
        }
    };
    config
        .methods
        .iter()
        .map(|&method| {
            let options = SolveOptions {
                kindap: config.kindap.clone(),
                replications: config.replications,
                max_iters: None,
                tol: None,
                seed: config.method_seed(k, rho, method, seed),
            };
            let run = match run_method(&data.embedded, method, &options) {
                Ok(r) => r,
                Err(e) => return failed_row(config, method, k, rho, seed, e.to_string()),
            };
            let acc = match accuracy(&run.result.labels, &data.truth) {
                Ok(a) => a,
                Err(e) => return failed_row(config, method, k, rho, seed, e.to_string()),
            };
            let (outer, inner) = run.iteration_counts();
            let traces = run.traces().into_iter().map(|(t, h)| (t.clone(), h)).collect();
            BenchCell {
                row: BenchRow {
                    method,
                    k,
                    rho,
                    replications: config.replications,
                    accuracy: Some(acc),
                    kind_objective: run.result.kind_objective,
                    kmeans_objective: Some(run.result.kmeans_objective),
                    wall_time_seconds: Some(run.wall_time_seconds),
                    outer_iters: Some(outer),
                    inner_iters_total: Some(inner),
                    seed,
                    error: None,
                },
                traces,
            }
        })
        .collect()
}

/// Run every `(k, rho, method, seed)` cell. Datasets run concurrently; rows
/// come back sorted by `(k, rho, method, seed)`. Cell failures become rows
/// with an error message.
pub fn run_bench(config: &BenchConfig) -> CliResult<BenchOutcome> {
    config.validate()?;
    let start = Instant::now();
    let mut datasets = Vec::new();
    for &k in &config.k_list {
        for &rho in &config.rho_list {
            for &seed in &config.seeds {
                datasets.push((k, rho, seed));
            }
        }
    }
    let mut cells: Vec<BenchCell> =
        datasets.par_iter().flat_map_iter(|&(k, rho, seed)| run_dataset(config, k, rho, seed)).collect();
    cells.sort_by(|a, b| {
        let (a, b) = (&a.row, &b.row);
        a.k.cmp(&b.k).then(a.rho.total_cmp(&b.rho)).then(a.method.cmp(&b.method)).then(a.seed.cmp(&b.seed))
    });
    Ok(BenchOutcome { config: config.clone(), cells, total_seconds: start.elapsed().as_secs_f64() })
}
