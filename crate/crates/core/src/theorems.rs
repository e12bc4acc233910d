//! End-to-end checks of the weighted space-time estimates: the stochastic
//! and deterministic convolution bounds (operator-norm ratios and their
//! T-stability), an exploratory sharpness probe at the edge of the
//! admissible parameter range, the vertex regularity exponent, and the
//! p = 2 a-priori estimate at first derivative order.

use crate::convolution::{
    det_convolution, det_convolution_gradient, det_lp_space_time_norm, field_lp_space_time_norm,
    stoch_gradient_variances, stoch_lp_space_time_norm, stoch_variance, ConvRules, TestField,
};
use crate::error::{Result, WedgeError};
use crate::geometry::{WedgePoint, WeightParams};
use crate::kernel::KernelConfig;
use crate::lemmas::range_gate;
use crate::quad::{composite_1d, graded_breaks, integrate_wedge_once, WedgeQuadRule};
use serde::Serialize;

/// Maximal admissible variation of the per-horizon table maxima around
/// their median for a "pass" verdict (the checkable face of a constant
/// independent of T).
pub const T_STABILITY: f64 = 0.10;

/// One ratio of a solution norm to a data norm.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub t_end: f64,
    pub field: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Ratios over a (horizon × test field) grid with the weight metadata
/// and the T-stability verdict.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTable {
    pub p: f64,
    pub big_theta: f64,
    pub theta: f64,
    pub kappa0: f64,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Max relative deviation of the per-T maxima from their median.
    pub t_variation: f64,
    pub pass: bool,
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn assemble_table(
    params: &WeightParams,
    kappa0: f64,
    mut rows: Vec<RatioRow>,
) -> Result<RatioTable> {
    for row in &rows {
        if !(row.denominator > 0.0) {
            return Err(WedgeError::Contract(format!(
                "data norm of '{}' at T={} is not positive; zero fields are excluded",
                row.field, row.t_end
            )));
        }
    }
    rows.sort_by(|a, b| {
        a.t_end.partial_cmp(&b.t_end).unwrap().then_with(|| a.field.cmp(&b.field))
    });
    let mut t_values: Vec<f64> = rows.iter().map(|r| r.t_end).collect();
    t_values.dedup();
    let mut per_t_max: Vec<f64> = t_values
        .iter()
        .map(|&t| {
            rows.iter().filter(|r| r.t_end == t).map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let max_ratio = per_t_max.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let med = median(&mut per_t_max);
    let t_variation = per_t_max
        .iter()
        .map(|m| (m - med).abs() / med.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let pass = max_ratio.is_finite() && t_variation <= T_STABILITY;
    Ok(RatioTable {
        p: params.p,
        big_theta: params.big_theta,
        theta: params.theta,
        kappa0,
        rows,
        max_ratio,
        t_variation,
        pass,
    })
}

fn gate(params: &WeightParams, kappa0: f64) -> Result<()> {
    if !range_gate(params, kappa0) {
        return Err(WedgeError::Contract(format!(
            "weight parameters (p={}, Theta={}, theta={}) are outside the admissible range for \
             opening {kappa0}; use the sharpness probe for out-of-range exploration",
            params.p, params.big_theta, params.theta
        )));
    }
    Ok(())
}

/// Ratios ‖u_S‖ (with the internal Θ−p, θ−p shift) over ‖g‖ for each
/// horizon and driving field; pass iff the per-T maxima sit within 10%
/// of their median.
pub fn verify_stochastic_estimate(
    params: &WeightParams,
    kappa0: f64,
    fields: &[TestField],
    t_grid: &[f64],
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<RatioTable> {
    gate(params, kappa0)?;
    if params.p < 2.0 {
        return Err(WedgeError::Contract(format!(
            "stochastic estimate needs p >= 2, got {}",
            params.p
        )));
    }
    if fields.is_empty() || t_grid.is_empty() {
        return Err(WedgeError::Contract("need at least one field and one horizon".into()));
    }
    let mut rows = Vec::with_capacity(fields.len() * t_grid.len());
    for &t_end in t_grid {
        for g in fields {
            let num = stoch_lp_space_time_norm(g, params, t_end, cfg, rules)?;
            let den = field_lp_space_time_norm(g, params, t_end, cfg, rules)?;
            rows.push(RatioRow {
                t_end,
                field: g.id().to_string(),
                numerator: num,
                denominator: den,
                ratio: num / den,
            });
        }
    }
    assemble_table(params, kappa0, rows)
}

/// Deterministic analogue: ‖u_D‖ with the Θ−p, θ−p shift over the
/// forcing norm with the opposite Θ+p, θ+p shift.
pub fn verify_deterministic_estimate(
    params: &WeightParams,
    kappa0: f64,
    forcings: &[TestField],
    t_grid: &[f64],
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<RatioTable> {
    gate(params, kappa0)?;
    if params.p <= 1.0 {
        return Err(WedgeError::Contract(format!(
            "deterministic estimate needs p > 1, got {}",
            params.p
        )));
    }
    if forcings.is_empty() || t_grid.is_empty() {
        return Err(WedgeError::Contract("need at least one forcing and one horizon".into()));
    }
    let up = params.shifted(params.p);
    let mut rows = Vec::with_capacity(forcings.len() * t_grid.len());
    for &t_end in t_grid {
        for f in forcings {
            let num = det_lp_space_time_norm(f, params, t_end, cfg, rules)?;
            let den = field_lp_space_time_norm(f, &up, t_end, cfg, rules)?;
            rows.push(RatioRow {
                t_end,
                field: f.id().to_string(),
                numerator: num,
                denominator: den,
                ratio: num / den,
            });
        }
    }
    assemble_table(params, kappa0, rows)
}

/// Ratio trend for the vertex-concentrating family g_ε = |y|^{-δ}1_{ε≤|y|≤1}
/// as ε shrinks. Exploratory: in-range parameters should give a flat
/// trend, parameters beyond the admissible box a growing one; no verdict
/// is attached.
#[derive(Debug, Clone, Serialize)]
pub struct SharpnessReport {
    pub delta: f64,
    /// (ε, ratio) ordered by decreasing ε.
    pub rows: Vec<(f64, f64)>,
    /// Ratio at the smallest ε over the ratio at the largest.
    pub growth_factor: f64,
}

pub fn sharpness_probe(
    params: &WeightParams,
    kappa0: f64,
    delta: f64,
    epsilons: &[f64],
    t_end: f64,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<SharpnessReport> {
    if epsilons.len() < 2 {
        return Err(WedgeError::Contract("need at least two inner radii for a trend".into()));
    }
    if kappa0 != cfg.kappa0 {
        return Err(WedgeError::Contract(format!(
            "opening {kappa0} disagrees with the kernel configuration's {}",
            cfg.kappa0
        )));
    }
    let wedge = cfg.wedge();
    let mut eps_sorted = epsilons.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut rows = Vec::with_capacity(eps_sorted.len());
    for &eps in &eps_sorted {
        let g = TestField::annulus_power(delta, eps, &wedge)?;
        let num = stoch_lp_space_time_norm(&g, params, t_end, cfg, rules)?;
        let den = field_lp_space_time_norm(&g, params, t_end, cfg, rules)?;
        rows.push((eps, num / den));
    }
    let growth_factor = rows.last().unwrap().1 / rows.first().unwrap().1;
    Ok(SharpnessReport { delta, rows, growth_factor })
}

/// Log-log least-squares fit of the standard deviation of the stochastic
/// convolution along a ray toward the vertex.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityFit {
    pub slope: f64,
    pub intercept: f64,
    /// (r, sigma) pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
    /// Reference exponent π/κ₀.
    pub expected: f64,
}

/// Fits log σ(t, (r, ray_angle)) against log r over `r_grid`; the slope
/// estimates the vertex decay exponent, expected to be π/κ₀.
pub fn regularity_probe(
    g: &TestField,
    t: f64,
    ray_angle: f64,
    r_grid: &[f64],
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<RegularityFit> {
    let wedge = cfg.wedge();
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let x = wedge.point(r, ray_angle)?;
        let var = stoch_variance(g, t, &x, cfg, rules)?;
        if var.is_finite() && var > 0.0 {
            points.push((r, var.sqrt()));
        }
    }
    if points.len() < 4 {
        return Err(WedgeError::Contract(format!(
            "regularity fit needs at least 4 usable points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, s) in &points {
        let lx = r.ln();
        let ly = s.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok(RegularityFit { slope, intercept, points, expected: std::f64::consts::PI / cfg.kappa0 })
}

/// The p = 2 a-priori ratio at first derivative order: the left side is
/// the expected weighted H¹ space-time norm of u = u_D + u_S (second
/// moments split as u_D² + variance since the stochastic part is
/// centered Gaussian), the right side the forcing and noise data norms.
#[derive(Debug, Clone, Serialize)]
pub struct AprioriRecord {
    pub t_end: f64,
    pub lhs: f64,
    pub rhs_f: f64,
    pub rhs_g: f64,
    pub ratio: f64,
}

pub fn verify_apriori_p2(
    kappa0: f64,
    f: Option<&TestField>,
    g: Option<&TestField>,
    t_end: f64,
    params: &WeightParams,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<AprioriRecord> {
    if params.p != 2.0 {
        return Err(WedgeError::Contract(format!(
            "the a-priori check is exact only at p = 2, got {}",
            params.p
        )));
    }
    gate(params, kappa0)?;
    if f.is_none() && g.is_none() {
        return Err(WedgeError::Contract("need a forcing or a noise field".into()));
    }
    let wedge = cfg.wedge();
    let shifted = params.shifted(-2.0);
    let r_max = f
        .iter()
        .chain(g.iter())
        .flat_map(|tf| tf.modes().iter().map(|m| m.space().support_radius().unwrap_or(1.0)))
        .fold(0.0_f64, f64::max)
        + (148.0 * t_end).sqrt();
    let rule = WedgeQuadRule::graded(kappa0, r_max, rules.n_space, rules.n_space)?;
    let breaks = graded_breaks(0.0, t_end, rules.n_time, 3.0, true, false);
    let density = |t: f64, x: &WedgePoint| -> Result<f64> {
        let mut second_moment = 0.0;
        let mut grad_moment = 0.0;
        if let Some(f) = f {
            let ud = det_convolution(f, t, x, cfg, rules)?;
            let (d1, d2) = det_convolution_gradient(f, t, x, cfg, rules)?;
            second_moment += ud * ud;
            grad_moment += d1 * d1 + d2 * d2;
        }
        if let Some(g) = g {
            second_moment += stoch_variance(g, t, x, cfg, rules)?;
            let (v1, v2) = stoch_gradient_variances(g, t, x, cfg, rules)?;
            grad_moment += v1 + v2;
        }
        let rho = wedge.dist_to_vertex(x);
        Ok((second_moment + rho * rho * grad_moment) * wedge.mixed_weight(x, &shifted))
    };
    let lhs_sq = composite_1d(
        |t| {
            integrate_wedge_once(|x| density(t, x).unwrap_or(f64::NAN), &wedge, &rule)
                .unwrap_or(f64::NAN)
        },
        &breaks,
    )?;
    let lhs = lhs_sq.max(0.0).sqrt();
    let rhs_f = match f {
        Some(f) => field_lp_space_time_norm(f, &params.shifted(2.0), t_end, cfg, rules)?,
        None => 0.0,
    };
    let rhs_g = match g {
        Some(g) => field_lp_space_time_norm(g, params, t_end, cfg, rules)?,
        None => 0.0,
    };
    let rhs = rhs_f + rhs_g;
    if !(rhs > 0.0) {
        return Err(WedgeError::Contract("data norms vanish; zero fields are excluded".into()));
    }
    Ok(AprioriRecord { t_end, lhs, rhs_f, rhs_g, ratio: lhs / rhs })
}
