//! One runner per subcommand: build the inputs from the parsed config,
//! call the corresponding verifier, write the report files, and map the
//! verdict to an exit code (0 pass, 1 failed/diverging verdict).

use crate::config::*;
use crate::report::{input, num, ReportWriter};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use wedge_core::convolution::TestField;
use wedge_core::kernel::{eval, eval_images};
use wedge_core::lemmas::{
    check_green_bound, check_lemma_a2s, check_lemma_at, check_lemma_b1a1s, check_lemma_b1b2s,
    check_lemma_combined, stratified_grid, SupremumReport, Verdict,
};
use wedge_core::theorems::{
    regularity_probe, sharpness_probe, verify_apriori_p2, verify_deterministic_estimate,
    verify_stochastic_estimate, RatioTable,
};
use wedge_core::{Result, WedgeError};

pub const PASS: i32 = 0;
pub const FAIL: i32 = 1;

fn io_err(e: std::io::Error) -> WedgeError {
    WedgeError::Contract(format!("report write failed: {e}"))
}

fn verdict_exit(v: Verdict) -> i32 {
    if v == Verdict::Bounded {
        PASS
    } else {
        FAIL
    }
}

fn write_supremum(
    w: &ReportWriter,
    name: &str,
    cfg: &impl Serialize,
    report: &SupremumReport,
) -> std::io::Result<i32> {
    w.json(name, cfg, report)?;
    let rows: Vec<String> = report
        .history
        .iter()
        .enumerate()
        .map(|(level, v)| format!("{level},{},{}", num(*v), report.verdict))
        .collect();
    w.csv(name, cfg, "level,grid_max,verdict", &rows)?;
    w.plot(
        name,
        &report
            .history
            .iter()
            .enumerate()
            .map(|(l, v)| (l as f64, *v))
            .collect::<Vec<_>>(),
    )?;
    println!("{name}: verdict {} (grid max {})", report.verdict, num(report.grid_max));
    Ok(verdict_exit(report.verdict))
}

pub fn run_kernel(cfg: &KernelCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, cfg.tol, cfg.max_terms)?;
    let wedge = kernel.wedge();
    let x = wedge.point(cfg.x[0], cfg.x[1])?;
    let y = wedge.point(cfg.y[0], cfg.y[1])?;
    let g = eval(cfg.t, &x, &y, &kernel)?;
    let oracle = eval_images(cfg.t, &x, &y, cfg.kappa0).ok();
    let result = json!({
        "G": g,
        "oracle": oracle,
        "t": cfg.t,
        "kappa0": cfg.kappa0,
    });
    w.json("kernel", cfg, &result).map_err(io_err)?;
    println!("kernel: G = {}", num(g));
    Ok(PASS)
}

pub fn study_green_bound(cfg: &GreenBoundCmd) -> Result<SupremumReport> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    check_green_bound(
        cfg.kappa0,
        cfg.lambda1,
        cfg.lambda2,
        cfg.sigma_start,
        &kernel,
        &cfg.plan.to_plan(),
    )
}

pub fn run_green_bound(cfg: &GreenBoundCmd, w: &ReportWriter) -> Result<i32> {
    let report = study_green_bound(cfg)?;
    write_supremum(w, "green-bound", cfg, &report).map_err(io_err)
}

pub fn study_b1b2s(cfg: &LemmaB1B2SCmd) -> Result<SupremumReport> {
    let wedge = validated_wedge(cfg.kappa0)?;
    let xs = stratified_grid(&wedge)?;
    check_lemma_b1b2s(cfg.sigma, cfg.beta1, cfg.beta2, cfg.kappa0, &xs, &cfg.plan.to_plan())
}

pub fn run_b1b2s(cfg: &LemmaB1B2SCmd, w: &ReportWriter) -> Result<i32> {
    let report = study_b1b2s(cfg)?;
    write_supremum(w, "lemma-b1b2s", cfg, &report).map_err(io_err)
}

pub fn study_b1a1s(cfg: &LemmaB1A1SCmd) -> Result<SupremumReport> {
    check_lemma_b1a1s(cfg.d, cfg.sigma, cfg.alpha, cfg.beta, &cfg.x_radii, &cfg.plan.to_plan())
}

pub fn run_b1a1s(cfg: &LemmaB1A1SCmd, w: &ReportWriter) -> Result<i32> {
    let report = study_b1a1s(cfg)?;
    write_supremum(w, "lemma-b1a1s", cfg, &report).map_err(io_err)
}

pub fn study_a2s(cfg: &LemmaA2SCmd) -> Result<SupremumReport> {
    let wedge = validated_wedge(cfg.kappa0)?;
    let xs = stratified_grid(&wedge)?;
    check_lemma_a2s(cfg.sigma, cfg.alpha, cfg.kappa0, &xs, &cfg.plan.to_plan())
}

pub fn run_a2s(cfg: &LemmaA2SCmd, w: &ReportWriter) -> Result<i32> {
    let report = study_a2s(cfg)?;
    write_supremum(w, "lemma-a2s", cfg, &report).map_err(io_err)
}

pub fn study_combined(cfg: &LemmaCombinedCmd) -> Result<SupremumReport> {
    let wedge = validated_wedge(cfg.kappa0)?;
    let xs = stratified_grid(&wedge)?;
    check_lemma_combined(
        cfg.sigma,
        cfg.beta1,
        cfg.beta2,
        cfg.alpha1,
        cfg.alpha2,
        cfg.kappa0,
        &xs,
        &cfg.dt_values,
        &cfg.plan.to_plan(),
    )
}

pub fn run_combined(cfg: &LemmaCombinedCmd, w: &ReportWriter) -> Result<i32> {
    let report = study_combined(cfg)?;
    write_supremum(w, "lemma-combined", cfg, &report).map_err(io_err)
}

pub fn run_lemma_at(cfg: &LemmaAtCmd, w: &ReportWriter) -> Result<i32> {
    let report = check_lemma_at(cfg.alpha, &cfg.a_grid)?;
    w.json("lemma-at", cfg, &report).map_err(io_err)?;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|&(a, v)| {
            format!("{},{},{},{}", input(cfg.alpha), input(a), num(v), num(report.stated_bound))
        })
        .collect();
    w.csv("lemma-at", cfg, "alpha,A,value,bound", &rows).map_err(io_err)?;
    w.plot("lemma-at", &report.rows).map_err(io_err)?;
    let ok = report.spread <= 1e-9
        && report.rows.iter().all(|&(_, v)| {
            v <= report.stated_bound && (v - report.closed_form).abs() <= 1e-6
        });
    println!(
        "lemma-at: value {} vs closed form {} (spread {:e})",
        num(report.rows[0].1),
        num(report.closed_form),
        report.spread
    );
    Ok(if ok { PASS } else { FAIL })
}

fn write_ratio_table(
    w: &ReportWriter,
    name: &str,
    cfg: &impl Serialize,
    table: &RatioTable,
) -> std::io::Result<i32> {
    w.json(name, cfg, table)?;
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                input(r.t_end),
                r.field,
                num(r.numerator),
                num(r.denominator),
                num(r.ratio)
            )
        })
        .collect();
    w.csv(name, cfg, "T,field,numerator,denominator,ratio", &rows)?;
    w.plot(name, &table.rows.iter().map(|r| (r.t_end, r.ratio)).collect::<Vec<_>>())?;
    println!(
        "{name}: max ratio {} (T variation {:.1}%) -> {}",
        num(table.max_ratio),
        100.0 * table.t_variation,
        if table.pass { "pass" } else { "fail" }
    );
    Ok(if table.pass { PASS } else { FAIL })
}

fn build_fields(specs: &[FieldSpec], kernel: &wedge_core::KernelConfig) -> Result<Vec<TestField>> {
    specs.iter().map(|s| s.build(kernel)).collect()
}

pub fn run_lp_stoch(cfg: &LpCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    let params = weight_params(cfg.p, cfg.big_theta, cfg.theta)?;
    let fields = build_fields(&cfg.fields, &kernel)?;
    let table = verify_stochastic_estimate(
        &params,
        cfg.kappa0,
        &fields,
        &cfg.t_grid,
        &kernel,
        &cfg.rules.to_rules(),
    )?;
    write_ratio_table(w, "lp-stoch", cfg, &table).map_err(io_err)
}

pub fn run_lp_det(cfg: &LpCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    let params = weight_params(cfg.p, cfg.big_theta, cfg.theta)?;
    let fields = build_fields(&cfg.fields, &kernel)?;
    let table = verify_deterministic_estimate(
        &params,
        cfg.kappa0,
        &fields,
        &cfg.t_grid,
        &kernel,
        &cfg.rules.to_rules(),
    )?;
    write_ratio_table(w, "lp-det", cfg, &table).map_err(io_err)
}

pub fn run_sharpness(cfg: &SharpnessCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    let params = weight_params(cfg.p, cfg.big_theta, cfg.theta)?;
    let report = sharpness_probe(
        &params,
        cfg.kappa0,
        cfg.delta,
        &cfg.epsilons,
        cfg.t_end,
        &kernel,
        &cfg.rules.to_rules(),
    )?;
    w.json("sharpness", cfg, &report).map_err(io_err)?;
    let rows: Vec<String> =
        report.rows.iter().map(|&(e, r)| format!("{},{}", input(e), num(r))).collect();
    w.csv("sharpness", cfg, "epsilon,ratio", &rows).map_err(io_err)?;
    w.plot("sharpness", &report.rows).map_err(io_err)?;
    println!("sharpness: growth factor {}", num(report.growth_factor));
    // exploratory: reported, never asserted
    Ok(PASS)
}

pub fn run_regularity(cfg: &RegularityCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    let field = cfg.field.build(&kernel)?;
    let fit =
        regularity_probe(&field, cfg.t, cfg.ray_angle, &cfg.r_grid, &kernel, &cfg.rules.to_rules())?;
    w.json("regularity", cfg, &fit).map_err(io_err)?;
    let rows: Vec<String> =
        fit.points.iter().map(|&(r, s)| format!("{},{}", input(r), num(s))).collect();
    w.csv("regularity", cfg, "r,sigma", &rows).map_err(io_err)?;
    w.plot("regularity", &fit.points.iter().map(|&(r, s)| (r.ln(), s.ln())).collect::<Vec<_>>()).map_err(io_err)?;
    println!("regularity: slope {} (expected {})", num(fit.slope), num(fit.expected));
    Ok(PASS)
}

pub fn run_apriori(cfg: &AprioriCmd, w: &ReportWriter) -> Result<i32> {
    let kernel = validated_kernel(cfg.kappa0, 1e-12, 1024)?;
    let params = weight_params(2.0, cfg.big_theta, cfg.theta)?;
    let forcing = cfg.forcing.as_ref().map(|s| s.build(&kernel)).transpose()?;
    let noise = cfg.noise.as_ref().map(|s| s.build(&kernel)).transpose()?;
    let record = verify_apriori_p2(
        cfg.kappa0,
        forcing.as_ref(),
        noise.as_ref(),
        cfg.t_end,
        &params,
        &kernel,
        &cfg.rules.to_rules(),
    )?;
    w.json("apriori", cfg, &record).map_err(io_err)?;
    println!("apriori: ratio {}", num(record.ratio));
    Ok(if record.ratio.is_finite() { PASS } else { FAIL })
}

/// Cartesian product sweep over scalar parameters of a supremum-study
/// subcommand; combos run in parallel, the table is assembled in combo
/// order so output bytes do not depend on the worker count.
pub fn run_sweep(cfg: &SweepCmd, w: &ReportWriter) -> Result<i32> {
    let mut keys: Vec<String> = cfg.vary.keys().cloned().collect();
    keys.sort();
    if keys.is_empty() {
        return Err(WedgeError::Contract("sweep needs at least one varied parameter".into()));
    }
    let mut lists: Vec<Vec<toml::Value>> = Vec::with_capacity(keys.len());
    for k in &keys {
        match &cfg.vary[k] {
            toml::Value::Array(a) if !a.is_empty() => lists.push(a.clone()),
            _ => {
                return Err(WedgeError::Contract(format!(
                    "sweep parameter '{k}' must be a non-empty array"
                )))
            }
        }
    }
    let mut combos: Vec<Vec<toml::Value>> = vec![vec![]];
    for list in &lists {
        combos = combos
            .iter()
            .flat_map(|c| {
                list.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let results: Vec<Result<SupremumReport>> = combos
        .par_iter()
        .map(|combo| {
            let mut table = cfg.base.clone();
            for (k, v) in keys.iter().zip(combo.iter()) {
                table.insert(k.clone(), v.clone());
            }
            let doc = toml::Value::Table(table);
            let parse_err = |e: toml::de::Error| {
                WedgeError::Contract(format!("sweep combo config: {e}"))
            };
            match cfg.subcommand.as_str() {
                "lemma-b1b2s" => study_b1b2s(&doc.try_into().map_err(parse_err)?),
                "lemma-b1a1s" => study_b1a1s(&doc.try_into().map_err(parse_err)?),
                "lemma-a2s" => study_a2s(&doc.try_into().map_err(parse_err)?),
                "lemma-combined" => study_combined(&doc.try_into().map_err(parse_err)?),
                "green-bound" => study_green_bound(&doc.try_into().map_err(parse_err)?),
                other => Err(WedgeError::Contract(format!(
                    "sweep supports the supremum-study subcommands, not '{other}'"
                ))),
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(combos.len());
    let mut reports = Vec::with_capacity(combos.len());
    let mut all_bounded = true;
    for (combo, res) in combos.iter().zip(results) {
        let report = res?;
        let mut cells: Vec<String> = combo
            .iter()
            .map(|v| match v {
                toml::Value::Float(f) => input(*f),
                toml::Value::Integer(i) => i.to_string(),
                other => other.to_string(),
            })
            .collect();
        cells.push(num(report.grid_max));
        cells.push(report.verdict.to_string());
        rows.push(cells.join(","));
        all_bounded &= report.verdict == Verdict::Bounded;
        reports.push(report);
    }
    let header = format!("{},grid_max,verdict", keys.join(","));
    w.csv("sweep", cfg, &header, &rows).map_err(io_err)?;
    w.json("sweep", cfg, &reports).map_err(io_err)?;
    println!(
        "sweep: {} combos, {}",
        rows.len(),
        if all_bounded { "all bounded" } else { "non-bounded verdicts present" }
    );
    Ok(if all_bounded { PASS } else { FAIL })
}
