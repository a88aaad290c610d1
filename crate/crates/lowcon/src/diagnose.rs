//! Per-selection theory diagnostics: conditioning, worst-case MSE, and for
//! LowCon the design/perturbation singular values behind the Weyl bounds.

use lowcon_core::datagen;
use lowcon_core::estimate::{trace_inv_bound, weyl_kappa_bound, worst_case_mse};
use lowcon_core::linalg::singular_values;
use lowcon_core::sampler::{lowcon_detailed, select, Method};
use lowcon_core::seed::stream;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::harness::{DATA_STREAM, SAMPLE_STREAM};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseRow {
    pub method: String,
    pub r: usize,
    pub replicate: usize,
    /// `κ(X*ᵀX*)` of the selected raw rows.
    pub kappa: f64,
    pub worst_case_mse: f64,
    /// The remaining fields are LowCon-only; all in scaled coordinates.
    pub s1_perturbation: Option<f64>,
    pub sp_design: Option<f64>,
    pub assumption_holds: Option<bool>,
    /// Weyl bound minus the achieved κ; empty when the assumption fails.
    pub kappa_bound_slack: Option<f64>,
    /// Trace bound minus the achieved `tr[(X*ᵀX*)⁻¹]`.
    pub trace_bound_slack: Option<f64>,
}

/// Same data and sampler streams as the simulation, so the selections
/// inspected here are the ones a simulation with this config fits.
pub fn diagnose(cfg: &ExperimentConfig, sigma2: f64, alpha: f64) -> Result<Vec<DiagnoseRow>> {
    cfg.validate()?;
    let params = cfg.sampler_params();
    let per_replicate: Vec<Vec<DiagnoseRow>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(cfg.seed, &[DATA_STREAM, rep as u64, 0]);
            let x = datagen::gen_predictors(cfg.dist, cfg.n, cfg.p, &mut rng)?;
            let mut rows = Vec::new();
            for &method in &cfg.methods {
                for &r in &cfg.r_list {
                    let path = [SAMPLE_STREAM, rep as u64, 0, method.id(), r as u64];
                    let mut rng = stream(cfg.seed, &path);
                    let mut row = DiagnoseRow {
                        method: method.to_string(),
                        r,
                        replicate: rep,
                        kappa: f64::NAN,
                        worst_case_mse: f64::NAN,
                        s1_perturbation: None,
                        sp_design: None,
                        assumption_holds: None,
                        kappa_bound_slack: None,
                        trace_bound_slack: None,
                    };
                    let indices = if method == Method::Lowcon {
                        let out = lowcon_detailed(&x, r, &params.lowcon, &mut rng)?;
                        let l = &out.design.points;
                        let d = out.perturbation();
                        let sp_l = singular_values(l).smallest();
                        let s1_d = singular_values(&d).largest();
                        row.sp_design = Some(sp_l);
                        row.s1_perturbation = Some(s1_d);
                        row.assumption_holds = Some(sp_l > s1_d);
                        if sp_l > s1_d {
                            let achieved = singular_values(&out.selected_scaled());
                            row.kappa_bound_slack = Some(weyl_kappa_bound(l, &d)? - achieved.condition_number());
                            row.trace_bound_slack = Some(trace_inv_bound(l, &d)? - achieved.trace_inverse_gram());
                        }
                        out.selection.indices
                    } else {
                        select(method, &x, None, r, &params, &mut rng)?.indices
                    };
                    let x_sub = x.select_rows(&indices);
                    row.kappa = singular_values(&x_sub).condition_number();
                    row.worst_case_mse = match worst_case_mse(&x_sub, sigma2, alpha) {
                        Ok(w) => w.bound,
                        Err(lowcon_core::Error::RankDeficient { .. }) => f64::INFINITY,
                        Err(e) => return Err(e.into()),
                    };
                    rows.push(row);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<DiagnoseRow> = per_replicate.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        let key = |row: &DiagnoseRow| (row.method.parse::<Method>().ok(), row.r, row.replicate);
        key(a).cmp(&key(b))
    });
    Ok(rows)
}
