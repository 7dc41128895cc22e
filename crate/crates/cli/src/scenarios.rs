//! One function per scenario, each returning its panels.

use std::f64::consts::PI;

use cqed_metrology::fisher::{
    fi_analytic, fi_from_fringes, fi_mid_fringe, fi_mid_fringe_with_detection,
    fi_with_imperfections, optimal_t2, precision_report, qfi_analytic, qfi_numeric, FringeDataset,
    F_SQL,
};
use cqed_metrology::montecarlo::{
    cramer_rao_trial_with, replica_rng, sample_outcomes, TrialConfig,
};
use cqed_metrology::protocol::{
    apply_detection_error, fringe_phase, imperfect_fringe, numeric_fringe, pg_analytic,
    resource_size, resource_state, run_protocol_numeric, unwrapped_fringe_phase,
};
use cqed_metrology::{Execution, ProtocolParams};

use crate::config::{Scenario, ScenarioConfig};
use crate::output::Table;
use crate::CliError;

const PHASE_SCAN_POINTS: usize = 201;

pub fn run(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    match cfg.scenario {
        Scenario::Collapse => collapse(cfg, exec),
        Scenario::Revival => revival(cfg, exec),
        Scenario::Fringes => fringes(cfg, exec),
        Scenario::FisherScan => Ok(fisher_scan(cfg)),
        Scenario::PrecisionCurve => precision_curve(cfg),
        Scenario::Table1 => table1(cfg, exec),
        Scenario::Estimate => estimate(cfg, exec),
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn collapse(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    let params = ProtocolParams {
        flip_enabled: false,
        ..cfg.params_for(0.0)
    };
    let t1 = cfg.t1_grid.values();
    let pg = exec.try_map(&t1, |&t| {
        run_protocol_numeric(&params.with_times(t, 0.0)).map(|r| r.ground_probability)
    })?;
    let eps = cfg.imperfections.detection_error;
    let mut table = Table::new(
        "collapse",
        &["t1 (µs)", "p_g (probability)", "p_g_detected (probability)"],
    );
    for (t, p) in t1.iter().zip(&pg) {
        table.push(&[*t, *p, apply_detection_error(*p, eps)?]);
    }
    Ok(vec![table])
}

/// Fringe phase accumulated between `β = 0` and `beta` at `T2 = T1`,
/// from a numeric scan.
fn numeric_phase_offset(
    params: &ProtocolParams,
    beta: f64,
    exec: Execution,
) -> Result<f64, CliError> {
    if beta == 0.0 {
        return Ok(0.0);
    }
    let scan: Vec<f64> = (0..PHASE_SCAN_POINTS)
        .map(|i| beta * i as f64 / (PHASE_SCAN_POINTS - 1) as f64)
        .collect();
    let pg = numeric_fringe(params, &scan, exec)?;
    let phase = unwrapped_fringe_phase(&pg);
    Ok(beta.signum() * phase[phase.len() - 1])
}

fn revival(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    let betas = &cfg.revival_betas;
    let params = cfg.params_for(max_abs(betas));
    let t1 = params.t1;
    let t2 = cfg.t2_grid.values();
    let mut headers = vec!["t2 (µs)".to_string()];
    headers.extend(betas.iter().map(|b| format!("p_g_beta_{b} (probability)")));
    let mut columns = Vec::with_capacity(betas.len());
    for &b in betas {
        let p = params.with_beta(b);
        columns.push(exec.try_map(&t2, |&t| {
            run_protocol_numeric(&p.with_times(t1, t)).map(|r| r.ground_probability)
        })?);
    }
    let mut curve = Table::new("revival", &[]);
    curve.headers = headers;
    for (i, t) in t2.iter().enumerate() {
        let mut row = vec![*t];
        row.extend(columns.iter().map(|c| c[i]));
        curve.push(&row);
    }

    let mut phase = Table::new(
        "revival_phase",
        &[
            "beta (dimensionless)",
            "resource_size_d (dimensionless)",
            "phase_offset_numeric (pi rad)",
            "phase_offset_analytic (pi rad)",
        ],
    );
    let at_revival = params.with_times(t1, t1);
    for &b in betas {
        let numeric = numeric_phase_offset(&at_revival, b, exec)?;
        let analytic = fringe_phase(&at_revival.with_beta(b));
        phase.push(&[b, at_revival.resource_size(), numeric / PI, analytic / PI]);
    }
    phase.note("t1_us", t1);
    phase.note("t2_us", t1);
    Ok(vec![curve, phase])
}

fn fringes(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    let betas = cfg.beta_grid.values();
    let params = cfg.params_for(max_abs(&betas));
    let ideal = numeric_fringe(&params, &betas, exec)?;
    let noisy = imperfect_fringe(&params, &cfg.imperfections, &betas, exec)?;
    let fit_ideal = fi_from_fringes(
        &FringeDataset::noiseless(betas.clone(), ideal.clone())?,
        cfg.fit_degree,
    )?;
    let fit_noisy = fi_from_fringes(
        &FringeDataset::noiseless(betas.clone(), noisy.clone())?,
        cfg.fit_degree,
    )?;
    let mut table = Table::new(
        "fringes",
        &[
            "beta (dimensionless)",
            "p_g_numeric (probability)",
            "p_g_imperfect (probability)",
            "p_g_imperfect_fit (probability)",
            "p_g_analytic (probability)",
            "fisher_fit_ideal (dimensionless)",
            "fisher_fit_imperfect (dimensionless)",
            "fisher_analytic (dimensionless)",
            "fisher_analytic_imperfect (dimensionless)",
        ],
    );
    for (i, &b) in betas.iter().enumerate() {
        let p = params.with_beta(b);
        table.push(&[
            b,
            ideal[i],
            noisy[i],
            fit_noisy.fit.value(b),
            pg_analytic(&p),
            fit_ideal.f_curve[i],
            fit_noisy.f_curve[i],
            fi_analytic(b, &params),
            fi_with_imperfections(&p, &cfg.imperfections)?,
        ]);
    }
    table.note("fisher_at_zero_ideal", fit_ideal.f_at_zero);
    table.note("fisher_at_zero_imperfect", fit_noisy.f_at_zero);
    table.note("clipped_points_ideal", fit_ideal.clipped);
    table.note("clipped_points_imperfect", fit_noisy.clipped);
    table.note("fit_condition", fit_noisy.fit.condition);
    Ok(vec![table])
}

fn file_tag(t: f64) -> String {
    format!("{t}").replace('.', "p").replace('-', "m")
}

fn fisher_scan(cfg: &ScenarioConfig) -> Vec<Table> {
    let w = cfg.params.omega0();
    let eps = cfg.imperfections.detection_error;
    let t2 = cfg.t2_grid.values();
    let mut out = Vec::new();
    for &t1 in &cfg.fisher_t1_values {
        let mut table = Table::new(
            format!("fisher_scan_t1_{}us", file_tag(t1)),
            &[
                "t2 (µs)",
                "sqrt_fisher (dimensionless)",
                "sqrt_fisher_detection (dimensionless)",
                "sqrt_f_sql (dimensionless)",
                "sqrt_qfi (dimensionless)",
            ],
        );
        let q = qfi_analytic(&cfg.params.with_times(t1, 0.0)).sqrt();
        for &t in &t2 {
            let f = fi_mid_fringe(t1, t, w);
            table.push(&[
                t,
                f.sqrt(),
                (1.0 - 2.0 * eps).abs() * f.sqrt(),
                F_SQL.sqrt(),
                q,
            ]);
        }
        if let Ok((t2_star, f_star)) = optimal_t2(t1, w) {
            table.note("optimal_t2_us", t2_star);
            table.note("optimal_fisher", f_star);
        }
        table.note("t1_us", t1);
        out.push(table);
    }
    out
}

fn precision_curve(cfg: &ScenarioConfig) -> Result<Vec<Table>, CliError> {
    let w = cfg.params.omega0();
    let mut table = Table::new(
        "precision_curve",
        &[
            "t1 (µs)",
            "resource_size_d (dimensionless)",
            "optimal_t2 (µs)",
            "fisher_optimal (dimensionless)",
            "delta_beta_optimal (dimensionless)",
            "delta_beta_qfi (dimensionless)",
            "delta_beta_sql (dimensionless)",
            "gain_optimal (dB)",
        ],
    );
    for t1 in cfg.precision_t1_grid.values() {
        let (t2, f) = optimal_t2(t1, w)?;
        let d = resource_size(cfg.params.alpha, t1, w);
        let q = qfi_analytic(&cfg.params.with_times(t1, 0.0));
        let r = precision_report(f)?;
        table.push(&[
            t1,
            d,
            t2,
            f,
            r.delta_beta,
            1.0 / q.sqrt(),
            1.0 / F_SQL.sqrt(),
            r.db_gain,
        ]);
    }
    Ok(vec![table])
}

fn table1(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    let params = cfg.params;
    let w = params.omega0();
    let eps = cfg.imperfections.detection_error;
    let t1 = params.t1;
    let mut table = Table::new(
        "table1",
        &[
            "quantity (label)",
            "t1 (µs)",
            "t2 (µs)",
            "fisher (dimensionless)",
            "delta_beta (dimensionless)",
            "gain (dB)",
        ],
    );
    let mut row = |name: &str, t2: Option<f64>, f: f64| -> Result<(), CliError> {
        let r = precision_report(f)?;
        table.push_cells(vec![
            name.to_string(),
            t1.to_string(),
            t2.map(|t| t.to_string()).unwrap_or_default(),
            f.to_string(),
            r.delta_beta.to_string(),
            r.db_gain.to_string(),
        ]);
        Ok(())
    };
    row("qfi_analytic", None, qfi_analytic(&params))?;
    row("qfi_numeric", None, qfi_numeric(&resource_state(&params)?)?)?;
    for &t2 in &cfg.table1_t2_values {
        row("fisher_closed_form", Some(t2), fi_mid_fringe(t1, t2, w))?;
    }
    for &t2 in &cfg.table1_t2_values {
        row(
            "fisher_with_detection_error",
            Some(t2),
            fi_mid_fringe_with_detection(t1, t2, w, eps)?,
        )?;
    }
    if cfg.simulated_row {
        let betas = cfg.beta_grid.values();
        let base = cfg.params_for(max_abs(&betas));
        for (k, &t2) in cfg.table1_t2_values.iter().enumerate() {
            let p = base.with_times(t1, t2);
            let exact = imperfect_fringe(&p, &cfg.imperfections, &betas, exec)?;
            let mut p_hat = Vec::with_capacity(betas.len());
            for (i, &pe) in exact.iter().enumerate() {
                let mut rng = replica_rng(cfg.seed, (k * betas.len() + i) as u64);
                p_hat.push(sample_outcomes(pe, cfg.nu, &mut rng)? as f64 / cfg.nu as f64);
            }
            let data = FringeDataset::new(betas.clone(), p_hat, vec![cfg.nu; betas.len()])?;
            let f = fi_from_fringes(&data, cfg.fit_degree)?.f_at_zero;
            if f > 0.0 {
                row("fisher_simulated_fringe", Some(t2), f)?;
            }
        }
    }
    row("f_sql", None, F_SQL)?;
    Ok(vec![table])
}

fn estimate(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<Table>, CliError> {
    let trial = TrialConfig {
        params: cfg.params,
        imperfections: cfg.imperfections,
        beta_true: cfg.beta_true,
        nu: cfg.nu,
        replicas: cfg.replicas,
        seed: cfg.seed,
    };
    let r = cramer_rao_trial_with(&trial, exec)?;
    let mut summary = Table::new(
        "estimate",
        &[
            "beta_true (dimensionless)",
            "nu (count)",
            "replicas (count)",
            "mean_estimate (dimensionless)",
            "empirical_std (dimensionless)",
            "predicted_std (dimensionless)",
            "ratio (dimensionless)",
            "clamped (count)",
        ],
    );
    summary.push(&[
        cfg.beta_true,
        cfg.nu as f64,
        cfg.replicas as f64,
        r.mean_estimate,
        r.empirical_std,
        r.predicted_std,
        r.ratio,
        r.clamped as f64,
    ]);
    let mut replicas = Table::new(
        "estimate_replicas",
        &["replica (index)", "beta_estimate (dimensionless)"],
    );
    for (i, b) in r.estimates.iter().enumerate() {
        replicas.push(&[i as f64, *b]);
    }
    Ok(vec![summary, replicas])
}
