//! Replicated subsampling experiments: simulated grids, the one-predictor
//! toy model, and empirical MSE on real data.

use std::sync::Arc;
use std::time::Instant;

use lowcon_core::datagen::{self, MisspecTerm, ToyModel};
use lowcon_core::estimate::fit_sls;
use lowcon_core::huber::{fit_huber_m, HuberOptions};
use lowcon_core::linalg::{least_squares, singular_values};
use lowcon_core::sampler::{select, Method, SamplerParams};
use lowcon_core::seed::stream;
use lowcon_core::{Error as CoreError, Matrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Mode};
use crate::dataset::Dataset;
use crate::error::{HarnessError, Result};
use crate::response::ResponseOracle;

/// Re-draws allowed after a rank-deficient subsample before a cell fails.
pub const MAX_RETRIES: usize = 5;

/// Top-level labels of the seed derivation tree.
pub(crate) const DATA_STREAM: u64 = 1;
pub(crate) const SAMPLE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub dist: String,
    pub misspec: String,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub theta: f64,
    pub replicate_count: usize,
    pub mse: f64,
    pub log_mse: f64,
    pub median_kappa: f64,
    /// Empty unless timing was requested.
    pub mean_runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmseRow {
    pub method: String,
    pub dataset: String,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub theta: f64,
    pub replicate_count: usize,
    pub emse_ols: f64,
    pub emse_huber: f64,
    pub median_kappa: f64,
    pub mean_runtime_ms: Option<f64>,
}

/// Responses revealed for one (method, r, replicate) fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadRecord {
    pub method: Method,
    pub r: usize,
    pub replicate: usize,
    pub reads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailedCell {
    pub method: Method,
    pub r: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome<R> {
    pub rows: Vec<R>,
    pub failed: Vec<FailedCell>,
    pub reads: Vec<ReadRecord>,
}

impl<R> RunOutcome<R> {
    /// Turns failed cells into an error, keeping successful rows otherwise.
    pub fn into_result(self) -> Result<Self> {
        if self.failed.is_empty() {
            Ok(self)
        } else {
            Err(HarnessError::CellsFailed {
                failed: self.failed.len(),
            })
        }
    }
}

/// Execution knobs that must not change results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Permute the order in which replicates are scheduled.
    pub shuffle_seed: Option<u64>,
}

/// One data set handed to the samplers.
struct Draw {
    /// Rows the samplers see.
    x: Matrix,
    /// Rows the estimator fits, when they differ from `x`.
    model: Option<Matrix>,
    y: Vec<f64>,
}

impl Draw {
    fn model(&self) -> &Matrix {
        self.model.as_ref().unwrap_or(&self.x)
    }
}

trait Scenario: Sync {
    /// Data for `replicate` on its `attempt`-th draw.
    fn draw(&self, replicate: usize, attempt: usize) -> Result<Arc<Draw>>;
    /// Coefficient vectors each fit is compared against.
    fn targets(&self) -> &[Vec<f64>];
}

struct Simulated {
    cfg: ExperimentConfig,
    targets: Vec<Vec<f64>>,
}

impl Simulated {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            targets: vec![datagen::beta0(cfg.p)],
            cfg: cfg.clone(),
        }
    }
}

impl Scenario for Simulated {
    fn draw(&self, replicate: usize, attempt: usize) -> Result<Arc<Draw>> {
        let cfg = &self.cfg;
        let mut rng = stream(cfg.seed, &[DATA_STREAM, replicate as u64, attempt as u64]);
        let x = datagen::gen_predictors(cfg.dist, cfg.n, cfg.p, &mut rng)?;
        let term = MisspecTerm::calibrated(cfg.misspec, &x)?;
        let y = datagen::gen_response(&x, &self.targets[0], &term, cfg.sigma2, &mut rng)?;
        Ok(Arc::new(Draw { x, model: None, y }))
    }

    fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

struct Toy {
    model: ToyModel,
    seed: u64,
    targets: Vec<Vec<f64>>,
}

impl Scenario for Toy {
    fn draw(&self, replicate: usize, attempt: usize) -> Result<Arc<Draw>> {
        let mut rng = stream(self.seed, &[DATA_STREAM, replicate as u64, attempt as u64]);
        let (x, y) = self.model.generate(&mut rng)?;
        Ok(Arc::new(Draw {
            x: Matrix::column_vector(&x)?,
            model: None,
            y,
        }))
    }

    fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

/// A fixed data set; only the sampler randomness changes between replicates.
struct Fixed {
    draw: Arc<Draw>,
    targets: Vec<Vec<f64>>,
}

impl Scenario for Fixed {
    fn draw(&self, _replicate: usize, _attempt: usize) -> Result<Arc<Draw>> {
        Ok(Arc::clone(&self.draw))
    }

    fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    r: usize,
}

#[derive(Debug, Clone)]
struct Observation {
    sq_err: Vec<f64>,
    kappa: f64,
    runtime_ms: f64,
    reads: usize,
}

struct Summary {
    cell: Cell,
    replicates: usize,
    mean_sq_err: Vec<f64>,
    median_kappa: f64,
    mean_runtime_ms: f64,
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells: Vec<Cell> = cfg
        .methods
        .iter()
        .flat_map(|&method| cfg.r_list.iter().map(move |&r| Cell { method, r }))
        .collect();
    cells.sort_by_key(|c| (c.method, c.r));
    cells.dedup_by_key(|c| (c.method, c.r));
    cells
}

fn schedule(replicates: usize, options: &RunOptions) -> Vec<usize> {
    let mut order: Vec<usize> = (0..replicates).collect();
    if let Some(s) = options.shuffle_seed {
        use rand::seq::SliceRandom;
        order.shuffle(&mut stream(s, &[]));
    }
    order
}

fn observe(
    scenario: &dyn Scenario,
    base: &Arc<Draw>,
    cell: Cell,
    replicate: usize,
    seed: u64,
    params: &SamplerParams,
    leverage_on_model: bool,
) -> Result<Option<Observation>> {
    for attempt in 0..=MAX_RETRIES {
        let draw = if attempt == 0 {
            Arc::clone(base)
        } else {
            scenario.draw(replicate, attempt)?
        };
        let path = [
            SAMPLE_STREAM,
            replicate as u64,
            attempt as u64,
            cell.method.id(),
            cell.r as u64,
        ];
        let mut rng = stream(seed, &path);
        let started = Instant::now();
        let model = draw.model();
        let score_rows = leverage_on_model.then_some(model);
        let selection = match select(cell.method, &draw.x, score_rows, cell.r, params, &mut rng) {
            Err(CoreError::RankDeficient { .. }) => continue,
            other => other?,
        };
        let x_sub = model.select_rows(&selection.indices);
        // Rank is a property of the selected rows alone, so a bad draw is
        // rejected before any response is revealed.
        let spectrum = singular_values(&x_sub);
        if spectrum.is_rank_deficient() {
            continue;
        }
        let oracle = ResponseOracle::new(&draw.y);
        let y_sub = oracle.reveal(&selection.indices);
        let fit = match fit_sls(&x_sub, &y_sub, selection.weights.as_deref()) {
            Err(CoreError::RankDeficient { .. }) => continue,
            other => other?,
        };
        let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        let sq_err = scenario
            .targets()
            .iter()
            .map(|t| fit.beta.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        return Ok(Some(Observation {
            sq_err,
            kappa: spectrum.condition_number(),
            runtime_ms,
            reads: oracle.reads(),
        }));
    }
    Ok(None)
}

/// Runs every cell on every replicate. Replicates run in parallel; results
/// land in fixed slots so scheduling never changes the output.
fn run_grid(
    scenario: &dyn Scenario,
    cfg: &ExperimentConfig,
    leverage_on_model: bool,
    options: &RunOptions,
) -> Result<(Vec<Summary>, Vec<FailedCell>, Vec<ReadRecord>)> {
    let cells = cells(cfg);
    let params = cfg.sampler_params();
    let order = schedule(cfg.replicates, options);
    let per_replicate: Vec<(usize, Vec<Option<Observation>>)> = order
        .par_iter()
        .map(|&rep| {
            let base = scenario.draw(rep, 0)?;
            let obs = cells
                .iter()
                .map(|&cell| observe(scenario, &base, cell, rep, cfg.seed, &params, leverage_on_model))
                .collect::<Result<Vec<_>>>()?;
            Ok((rep, obs))
        })
        .collect::<Result<_>>()?;

    let mut table: Vec<Vec<Option<Observation>>> = vec![Vec::new(); cfg.replicates];
    for (rep, obs) in per_replicate {
        table[rep] = obs;
    }

    let mut summaries = Vec::new();
    let mut failed = Vec::new();
    let mut reads = Vec::new();
    for (c, &cell) in cells.iter().enumerate() {
        let column: Vec<&Observation> = table.iter().filter_map(|row| row[c].as_ref()).collect();
        for (rep, row) in table.iter().enumerate() {
            reads.push(ReadRecord {
                method: cell.method,
                r: cell.r,
                replicate: rep,
                reads: row[c].as_ref().map_or(0, |o| o.reads),
            });
        }
        if column.len() < cfg.replicates {
            failed.push(FailedCell {
                method: cell.method,
                r: cell.r,
            });
            continue;
        }
        let k = column.len() as f64;
        let targets = scenario.targets().len();
        let mean_sq_err = (0..targets)
            .map(|t| column.iter().map(|o| o.sq_err[t]).sum::<f64>() / k)
            .collect();
        let mut kappas: Vec<f64> = column.iter().map(|o| o.kappa).collect();
        summaries.push(Summary {
            cell,
            replicates: column.len(),
            mean_sq_err,
            median_kappa: median(&mut kappas),
            mean_runtime_ms: column.iter().map(|o| o.runtime_ms).sum::<f64>() / k,
        });
    }
    Ok((summaries, failed, reads))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Simulated grid (or the toy model when `mode` is `toy`). Rows are sorted by
/// (method, r); cells that ran out of retries are listed in `failed`.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<RunOutcome<ResultRow>> {
    run_simulation_with(cfg, &RunOptions::default())
}

pub fn run_simulation_with(cfg: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome<ResultRow>> {
    cfg.validate()?;
    let (summaries, failed, reads, labels) = match cfg.mode {
        Mode::Toy => {
            let toy = Toy {
                model: ToyModel {
                    n: cfg.n,
                    noise_sd: cfg.sigma2.sqrt(),
                    ..ToyModel::default()
                },
                seed: cfg.seed,
                targets: vec![vec![ToyModel::BETA0]],
            };
            let (s, f, r) = run_grid(&toy, cfg, false, options)?;
            (s, f, r, ("TOY".to_string(), "TOY".to_string()))
        }
        Mode::Simulate => {
            let sim = Simulated::new(cfg);
            let (s, f, r) = run_grid(&sim, cfg, false, options)?;
            (s, f, r, (cfg.dist.to_string(), cfg.misspec.to_string()))
        }
        other => {
            return Err(HarnessError::config(format!(
                "mode {other:?} is not a simulation mode"
            )))
        }
    };
    let rows = summaries
        .into_iter()
        .map(|s| ResultRow {
            method: s.cell.method.to_string(),
            dist: labels.0.clone(),
            misspec: labels.1.clone(),
            n: cfg.n,
            p: cfg.dim(),
            r: s.cell.r,
            theta: cfg.theta,
            replicate_count: s.replicates,
            mse: s.mean_sq_err[0],
            log_mse: s.mean_sq_err[0].ln(),
            median_kappa: s.median_kappa,
            mean_runtime_ms: cfg.record_timing.then_some(s.mean_runtime_ms),
        })
        .collect();
    Ok(RunOutcome { rows, failed, reads })
}

/// Full-sample OLS and Huber-M fits used as surrogates for the unknown
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogates {
    pub ols: Vec<f64>,
    pub huber: Vec<f64>,
    pub huber_converged: bool,
}

pub fn surrogates(dataset: &Dataset) -> Result<Surrogates> {
    let y = dataset
        .y
        .as_ref()
        .ok_or_else(|| HarnessError::Data("dataset has no response column".into()))?;
    let model = dataset.model_matrix();
    let ols = least_squares(&model, y, None)?;
    let huber = fit_huber_m(&model, y, &HuberOptions::default())?;
    Ok(Surrogates {
        ols,
        huber: huber.beta,
        huber_converged: huber.converged,
    })
}

/// Empirical MSE of subsample fits against the full-data surrogates. The
/// intercept column is appended after subsampling, so LowCon's design space
/// covers only the predictors; leverage samplers score the full model rows.
/// `r = n` is accepted as a degenerate whole-sample check.
pub fn run_emse(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<RunOutcome<EmseRow>> {
    run_emse_with(dataset, cfg, &RunOptions::default())
}

pub fn run_emse_with(dataset: &Dataset, cfg: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome<EmseRow>> {
    cfg.check_r_list(dataset.p(), None)?;
    if let Some(&r) = cfg.r_list.iter().find(|&&r| r > dataset.n()) {
        return Err(HarnessError::config(format!("r = {r} exceeds n = {}", dataset.n())));
    }
    let s = surrogates(dataset)?;
    let model = dataset.has_intercept.then(|| dataset.model_matrix());
    let fixed = Fixed {
        draw: Arc::new(Draw {
            x: dataset.x_raw.clone(),
            model,
            y: dataset.y.clone().unwrap_or_default(),
        }),
        targets: vec![s.ols, s.huber],
    };
    let (summaries, failed, reads) = run_grid(&fixed, cfg, true, options)?;
    let rows = summaries
        .into_iter()
        .map(|s| EmseRow {
            method: s.cell.method.to_string(),
            dataset: dataset.name.clone(),
            n: dataset.n(),
            p: dataset.p(),
            r: s.cell.r,
            theta: cfg.theta,
            replicate_count: s.replicates,
            emse_ols: s.mean_sq_err[0],
            emse_huber: s.mean_sq_err[1],
            median_kappa: s.median_kappa,
            mean_runtime_ms: cfg.record_timing.then_some(s.mean_runtime_ms),
        })
        .collect();
    Ok(RunOutcome { rows, failed, reads })
}
