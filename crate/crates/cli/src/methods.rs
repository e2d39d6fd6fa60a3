//! The four clustering methods behind one entry point.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use kindap::baselines::{kmeans_solve, lloyd_solve, sr_solve, KmeansParams, SrParams};
use kindap::kindap::{kindap_solve, warm_start_centers, KindapParams};
use kindap::{ClusterResult, EmbeddedData, SolverTrace};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "kindap")]
    Kindap,
    #[serde(rename = "kmeans")]
    Kmeans,
    #[serde(rename = "sr")]
    Sr,
    /// KindAP, then one Lloyd run started from its cluster means.
    #[serde(rename = "kindap+l")]
    KindapL,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Kindap, Method::Kmeans, Method::Sr, Method::KindapL];

    pub fn name(self) -> &'static str {
        match self {
            Method::Kindap => "kindap",
            Method::Kmeans => "kmeans",
            Method::Sr => "sr",
            Method::KindapL => "kindap+l",
        }
    }

    /// Stable id mixed into per-cell seeds.
    pub fn id(self) -> u64 {
        self as u64
    }

    /// Whether the `replications` setting affects this method.
    pub fn uses_replications(self) -> bool {
        matches!(self, Method::Kmeans | Method::Sr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown method {s:?} (expected kindap, kmeans, sr or kindap+l)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub kindap: KindapParams,
    pub replications: usize,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { kindap: KindapParams::default(), replications: 1, max_iters: None, tol: None, seed: 0 }
    }
}

impl SolveOptions {
    fn kmeans(&self, replications: usize) -> KmeansParams {
        let d = KmeansParams::default();
        KmeansParams {
            replications,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed,
        }
    }

    fn sr(&self) -> SrParams {
        let d = SrParams::default();
        SrParams {
            replications: self.replications,
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub result: ClusterResult,
    /// The KindAP stage of `kindap+l`.
    pub warm_start: Option<ClusterResult>,
    /// Solver time only.
    pub wall_time_seconds: f64,
}

impl MethodRun {
    /// Every trace produced, with whether its main history must be monotone.
    pub fn traces(&self) -> Vec<(&SolverTrace, bool)> {
        let own = (&self.result.trace, self.method != Method::Kindap);
        let mut out: Vec<_> = self.warm_start.iter().map(|w| (&w.trace, false)).collect();
        out.push(own);
        out
    }

    /// Outer and total inner iterations of the KindAP stage, or the main
    /// iteration count for the baselines.
    pub fn iteration_counts(&self) -> (usize, usize) {
        let trace = self.warm_start.as_ref().map_or(&self.result.trace, |w| &w.trace);
        (trace.outer_iters, trace.inner_iters_total())
    }
}

pub fn run_method(basis: &EmbeddedData, method: Method, options: &SolveOptions) -> kindap::Result<MethodRun> {
    let k = basis.k();
    let start = Instant::now();
    let (result, warm_start) = match method {
        Method::Kindap => (kindap_solve(basis, &options.kindap)?, None),
        Method::Kmeans => (kmeans_solve(basis.matrix(), k, &options.kmeans(options.replications))?, None),
        Method::Sr => (sr_solve(basis, &options.sr())?, None),
        Method::KindapL => {
            let first = kindap_solve(basis, &options.kindap)?;
            let centers = warm_start_centers(basis, &first)?;
            let lloyd = lloyd_solve(basis.matrix(), k, &centers, &options.kmeans(1))?;
            (lloyd, Some(first))
        }
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(MethodRun { method, result, warm_start, wall_time_seconds })
}
