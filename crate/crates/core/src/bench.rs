//! Repeated seeded trials and their summary statistics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bias::{plan_biased, BiasParams};
use crate::buchi::Nba;
use crate::geometry::{Point, Workspace};
use crate::rng::derive_seed;
use crate::rrt::{plan_unbiased, Observer, PlanError, PlanReport, RrtParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Unbiased,
    Biased,
}

/// Runs the planner selected by `mode`.
#[allow(clippy::too_many_arguments)]
pub fn plan_with(
    mode: Mode,
    ws: &Workspace,
    nba: &Nba,
    x0: &[Point],
    params: &RrtParams,
    bias: &BiasParams,
    seed: u64,
    observer: Option<Observer<'_>>,
) -> Result<PlanReport, PlanError> {
    match mode {
        Mode::Unbiased => plan_unbiased(ws, nba, x0, params, seed, observer),
        Mode::Biased => plan_biased(ws, nba, x0, params, bias, seed, observer),
    }
}

/// One trial. Runtime is kept out of the CSV so that reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub cost: Option<f64>,
    pub prefix_goals: usize,
    pub first_goal_iteration: Option<usize>,
    pub prefix_iterations: usize,
    pub suffix_iterations: usize,
    #[serde(skip)]
    pub runtime_ms: f64,
}

/// Mean and sample standard deviation; `n = 1` gives a zero deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
}

impl Stats {
    pub fn of(xs: &[f64]) -> Stats {
        let n = xs.len();
        if n == 0 {
            return Stats {
                n,
                mean: f64::NAN,
                stddev: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stats { n, mean, stddev }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<TrialRow>,
}

impl BenchmarkReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.success).count()
    }

    /// Cost over successful trials.
    pub fn cost(&self) -> Stats {
        Stats::of(&self.rows.iter().filter_map(|r| r.cost).collect::<Vec<_>>())
    }

    pub fn prefix_goals(&self) -> Stats {
        Stats::of(&self.rows.iter().map(|r| r.prefix_goals as f64).collect::<Vec<_>>())
    }

    pub fn runtime_ms(&self) -> Stats {
        Stats::of(&self.rows.iter().map(|r| r.runtime_ms).collect::<Vec<_>>())
    }

    /// Per-trial CSV with a header row; empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// `trial,seed,runtime_ms` rows.
    pub fn timing_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "runtime_ms"]).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.trial.to_string(), r.seed.to_string(), format!("{:.3}", r.runtime_ms)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Human-readable aggregates.
    pub fn summary(&self) -> String {
        let (c, p, t) = (self.cost(), self.prefix_goals(), self.runtime_ms());
        format!(
            "trials: {}\nfailures: {}\ncost: {:.4} +- {:.4}\nprefix goals: {:.2} +- {:.2}\nruntime ms: {:.1} +- {:.1}\n",
            self.rows.len(),
            self.failures(),
            c.mean,
            c.stddev,
            p.mean,
            p.stddev,
            t.mean,
            t.stddev
        )
    }
}

/// `trials` runs with seeds derived from `seed`; translation is not timed.
#[allow(clippy::too_many_arguments)]
pub fn run_benchmark(
    mode: Mode,
    ws: &Workspace,
    nba: &Nba,
    x0: &[Point],
    params: &RrtParams,
    bias: &BiasParams,
    seed: u64,
    trials: usize,
) -> Result<BenchmarkReport, PlanError> {
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let s = derive_seed(seed, trial as u64);
        let t = Instant::now();
        let r = plan_with(mode, ws, nba, x0, params, bias, s, None)?;
        let runtime_ms = t.elapsed().as_secs_f64() * 1e3;
        rows.push(TrialRow {
            trial,
            seed: s,
            success: r.plan.is_some(),
            cost: r.plan.as_ref().map(|p| p.cost),
            prefix_goals: r.prefix_goals,
            first_goal_iteration: r.first_goal_iteration,
            prefix_iterations: r.prefix_iterations,
            suffix_iterations: r.suffix_iterations,
            runtime_ms,
        });
    }
    Ok(BenchmarkReport { rows })
}
