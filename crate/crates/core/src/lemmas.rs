//! Grid-supremum studies of the Gaussian-weighted integral bounds that
//! drive the operator estimates: each checker evaluates a parametric
//! integral over a stratified point grid, refines the quadrature, and
//! classifies the refinement history as bounded, diverging, or
//! inconclusive. A supremum over a continuum is operationalized as a grid
//! maximum plus a mandatory refinement study with explicit thresholds.

use crate::error::{Result, WedgeError};
use crate::geometry::{Wedge, WedgePoint, WeightParams};
use crate::kernel::{bound_ratio, KernelConfig};
use crate::quad::{
    composite_1d, graded_breaks, integrate_wedge_once, merge_window, WedgeQuadRule,
    GRADING_EXPONENT,
};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// A refinement level counts as converged when the grid-max moves by at
/// most this relative amount.
pub const BOUNDED_CHANGE: f64 = 0.02;
/// Growth per level that, sustained over three levels, counts as
/// divergence.
pub const DIVERGING_GROWTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Bounded => write!(f, "bounded"),
            Verdict::Diverging => write!(f, "diverging"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Outcome of one supremum study: the parameter tuple, a grid
/// description, the final grid maximum, the maximum per refinement
/// level, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SupremumReport {
    pub params: Vec<(String, f64)>,
    pub grid: String,
    pub grid_max: f64,
    pub history: Vec<f64>,
    pub verdict: Verdict,
}

/// Quadrature refinement schedule: panel counts per direction are
/// `base_n`, 2·`base_n`, … over `levels` levels.
#[derive(Debug, Clone, Copy)]
pub struct RefinementPlan {
    pub base_n: usize,
    pub levels: usize,
}

impl Default for RefinementPlan {
    fn default() -> Self {
        RefinementPlan { base_n: 4, levels: 4 }
    }
}

/// Bounded: last level moved ≤ 2%. Diverging: any non-finite level, or
/// ≥ 25% growth over each of the last three levels. Anything else is
/// inconclusive (reported, never silently passed).
fn classify(history: &[f64]) -> Verdict {
    if history.iter().any(|v| !v.is_finite()) {
        return Verdict::Diverging;
    }
    let n = history.len();
    if n >= 4 {
        let growing = (n - 3..n).all(|i| history[i] >= (1.0 + DIVERGING_GROWTH) * history[i - 1]);
        if growing {
            return Verdict::Diverging;
        }
    }
    if n >= 2 {
        let prev = history[n - 2];
        let last = history[n - 1];
        let scale = prev.abs().max(last.abs()).max(f64::MIN_POSITIVE);
        if (last - prev).abs() <= BOUNDED_CHANGE * scale {
            return Verdict::Bounded;
        }
    }
    Verdict::Inconclusive
}

/// Evaluation points stratified the way the proofs case-split: near-vertex
/// radii 1e-3…1e-1, unit scale, far field up to 1e2, crossed with
/// near-edge, quarter, and bisector angles (for reflex openings the
/// middle angles lie in the sector where the boundary distance equals the
/// vertex distance).
pub fn stratified_grid(wedge: &Wedge) -> Result<Vec<WedgePoint>> {
    let radii = [1e-3, 1e-2, 1e-1, 0.5, 1.0, 3.0, 10.0, 100.0];
    let fracs = [0.02, 0.25, 0.5, 0.75, 0.98];
    let mut grid = Vec::with_capacity(radii.len() * fracs.len());
    for &r in &radii {
        for &f in &fracs {
            grid.push(wedge.point(r, f * wedge.kappa0())?);
        }
    }
    Ok(grid)
}

/// Shared driver: grid-max of `x ↦ ∫_D integrand(x, y) dy` per
/// refinement level, where the integrand carries a Gaussian factor
/// `e^{-sigma|x-y|²}` that sets the integration window. A quadrature
/// failure (overflow of a singular integrand) is recorded as an infinite
/// level, which classifies as diverging evidence rather than an error.
fn wedge_sup_study<F>(
    integrand: F,
    wedge: &Wedge,
    sigma: f64,
    xs: &[WedgePoint],
    plan: &RefinementPlan,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&WedgePoint, &WedgePoint) -> f64 + Sync,
{
    let cut = (37.0 / sigma).sqrt();
    let mut history = Vec::with_capacity(plan.levels);
    for level in 0..plan.levels {
        let n = plan.base_n << level;
        let values: Vec<f64> = xs
            .par_iter()
            .map(|x| {
                let rule = WedgeQuadRule::with_window(
                    wedge.kappa0(),
                    x.r() + cut,
                    n,
                    n,
                    Some((x.r(), x.angle(), cut)),
                )?;
                integrate_wedge_once(|y| integrand(x, y), wedge, &rule)
            })
            .map(|res| res.unwrap_or(f64::INFINITY))
            .collect();
        history.push(values.into_iter().fold(0.0_f64, f64::max));
    }
    Ok((*history.last().unwrap(), history))
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(WedgeError::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// sup over A of ∫₀^∞ A^α / (A + √s)^{α+2} ds, which collapses to the
/// A-independent closed form 2/(α(α+1)) under the substitution √s = Av.
#[derive(Debug, Clone, Serialize)]
pub struct AtReport {
    pub alpha: f64,
    /// (A, computed integral) per grid value.
    pub rows: Vec<(f64, f64)>,
    pub closed_form: f64,
    pub stated_bound: f64,
    /// Max minus min of the computed values over the A grid.
    pub spread: f64,
}

fn at_integral(alpha: f64, a: f64) -> Result<f64> {
    // Mesh proportional to A² (the natural scale), graded toward 0 for
    // the √s kink, then geometric panels until the tail is negligible.
    let head: Vec<f64> =
        graded_breaks(0.0, 1.0, 48, GRADING_EXPONENT, true, false).iter().map(|s| a * a * s).collect();
    let f = |s: f64| a.powf(alpha) / (a + s.sqrt()).powf(alpha + 2.0);
    let mut total = composite_1d(f, &head)?;
    let mut lo = a * a;
    for _ in 0..4000 {
        let hi = 2.0 * lo;
        let piece = composite_1d(f, &[lo, 0.5 * (lo + hi), hi])?;
        total += piece;
        lo = hi;
        if piece < 1e-17 * total {
            break;
        }
    }
    Ok(total)
}

/// Verifies the time-tail integral bound: computes the integral for each
/// A, its exact closed form 2/(α(α+1)), and the coarser stated bound 2/α.
pub fn check_lemma_at(alpha: f64, a_grid: &[f64]) -> Result<AtReport> {
    require_positive("alpha", alpha)?;
    if a_grid.is_empty() {
        return Err(WedgeError::Contract("A grid must be non-empty".into()));
    }
    let mut rows = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        require_positive("A", a)?;
        rows.push((a, at_integral(alpha, a)?));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    Ok(AtReport {
        alpha,
        rows,
        closed_form: 2.0 / (alpha * (alpha + 1.0)),
        stated_bound: 2.0 / alpha,
        spread,
    })
}

/// Gaussian integral over the wedge with pure vertex/edge weights:
/// sup_x ∫_D (|y|/(1+|y|))^{β₁} (ρ(y)/(1+ρ(y)))^{β₂} e^{-σ|x-y|²} dy.
/// Finite iff β₂ > -1 and β₁+β₂ > -2.
pub fn check_lemma_b1b2s(
    sigma: f64,
    beta1: f64,
    beta2: f64,
    kappa0: f64,
    xs: &[WedgePoint],
    plan: &RefinementPlan,
) -> Result<SupremumReport> {
    require_positive("sigma", sigma)?;
    let wedge = Wedge::new(kappa0)?;
    let integrand = |x: &WedgePoint, y: &WedgePoint| {
        let ry = y.r();
        let rho = wedge.dist_to_boundary(y);
        (ry / (1.0 + ry)).powf(beta1)
            * (rho / (1.0 + rho)).powf(beta2)
            * (-sigma * x.dist(y).powi(2)).exp()
    };
    let (grid_max, history) = wedge_sup_study(integrand, &wedge, sigma, xs, plan)?;
    let verdict = classify(&history);
    Ok(SupremumReport {
        params: vec![
            ("sigma".into(), sigma),
            ("beta1".into(), beta1),
            ("beta2".into(), beta2),
            ("kappa0".into(), kappa0),
        ],
        grid: format!("{} stratified wedge points", xs.len()),
        grid_max,
        history,
        verdict,
    })
}

/// Whole-space variant with a growth transfer factor:
/// sup_x ∫_{R^d} (|y|/(1+|y|))^β ((1+|y|)/(1+|x|))^α e^{-σ|x-y|²} dy for
/// d ∈ {1, 2}. Finite iff β > -d.
pub fn check_lemma_b1a1s(
    d: usize,
    sigma: f64,
    alpha: f64,
    beta: f64,
    x_radii: &[f64],
    plan: &RefinementPlan,
) -> Result<SupremumReport> {
    require_positive("sigma", sigma)?;
    if d != 1 && d != 2 {
        return Err(WedgeError::Domain(format!("dimension must be 1 or 2, got {d}")));
    }
    let cut = (37.0 / sigma).sqrt();
    let weight = |ay: f64| (ay / (1.0 + ay)).powf(beta);
    let mut history = Vec::with_capacity(plan.levels);
    for level in 0..plan.levels {
        let n = plan.base_n << level;
        let values: Vec<f64> = x_radii
            .par_iter()
            .map(|&xr| -> Result<f64> {
                let transfer = 1.0 / (1.0 + xr).powf(alpha);
                if d == 1 {
                    // the line: graded toward the origin on both sides,
                    // extra panels under the Gaussian around x
                    let mut breaks = graded_breaks(-cut, 0.0, n, GRADING_EXPONENT, false, true);
                    breaks.extend(
                        graded_breaks(0.0, xr + cut, n, GRADING_EXPONENT, true, false)
                            .into_iter()
                            .skip(1),
                    );
                    let lo = (xr - cut).max(breaks[0]);
                    if lo > 0.0 {
                        merge_window(&mut breaks, lo, xr + cut, 2 * n);
                        let zero_guard = graded_breaks(0.0, lo.min(1.0), n, GRADING_EXPONENT, true, false);
                        breaks.extend(zero_guard);
                        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        breaks.dedup();
                    }
                    let v = composite_1d(
                        |y| {
                            weight(y.abs())
                                * (1.0 + y.abs()).powf(alpha)
                                * (-sigma * (xr - y) * (xr - y)).exp()
                        },
                        &breaks,
                    )?;
                    Ok(transfer * v)
                } else {
                    // the plane as a full-opening wedge; x on the seam
                    // bisector so the artificial edges carry no weight
                    let plane = Wedge::new(2.0 * PI)?;
                    let x = plane.point(xr.max(1e-300), PI)?;
                    let rule = WedgeQuadRule::with_window(
                        2.0 * PI,
                        xr + cut,
                        n,
                        n,
                        Some((x.r(), x.angle(), cut)),
                    )?;
                    let v = integrate_wedge_once(
                        |y| {
                            weight(y.r())
                                * (1.0 + y.r()).powf(alpha)
                                * (-sigma * x.dist(y).powi(2)).exp()
                        },
                        &plane,
                        &rule,
                    )?;
                    Ok(transfer * v)
                }
            })
            .map(|res| res.unwrap_or(f64::INFINITY))
            .collect();
        history.push(values.into_iter().fold(0.0_f64, f64::max));
    }
    let verdict = classify(&history);
    Ok(SupremumReport {
        params: vec![
            ("d".into(), d as f64),
            ("sigma".into(), sigma),
            ("alpha".into(), alpha),
            ("beta".into(), beta),
        ],
        grid: format!("|x| in {x_radii:?}"),
        grid_max: *history.last().unwrap(),
        history,
        verdict,
    })
}

/// Edge-distance transfer over the wedge:
/// sup_x ∫_D ((1+ρ(y))/(1+ρ(x)))^α e^{-σ|x-y|²} dy, finite for every
/// real α and opening below 2π. The stratified grid covers the three
/// proof regimes: near each edge (boundary distance set by that edge)
/// and, for reflex openings, the middle sector where ρ(x) = |x|.
pub fn check_lemma_a2s(
    sigma: f64,
    alpha: f64,
    kappa0: f64,
    xs: &[WedgePoint],
    plan: &RefinementPlan,
) -> Result<SupremumReport> {
    require_positive("sigma", sigma)?;
    if !(kappa0 > 0.0 && kappa0 < 2.0 * PI) {
        return Err(WedgeError::Domain(format!(
            "opening must lie in (0, 2*pi) for the edge-distance study, got {kappa0}"
        )));
    }
    let wedge = Wedge::new(kappa0)?;
    let integrand = |x: &WedgePoint, y: &WedgePoint| {
        let t = (1.0 + wedge.dist_to_boundary(y)) / (1.0 + wedge.dist_to_boundary(x));
        t.powf(alpha) * (-sigma * x.dist(y).powi(2)).exp()
    };
    let (grid_max, history) = wedge_sup_study(integrand, &wedge, sigma, xs, plan)?;
    let verdict = classify(&history);
    Ok(SupremumReport {
        params: vec![("sigma".into(), sigma), ("alpha".into(), alpha), ("kappa0".into(), kappa0)],
        grid: format!("{} points across near-edge and middle sectors", xs.len()),
        grid_max,
        history,
        verdict,
    })
}

/// The combined four-exponent bound plus its parabolically scaled form.
/// The unscaled integral gets the usual refinement study; the scaled form
/// is evaluated at `t-s` spanning four decades with the grid and mesh
/// dilated accordingly, and the per-scale maxima are appended to the
/// parameter list along with their relative spread.
#[allow(clippy::too_many_arguments)]
pub fn check_lemma_combined(
    sigma: f64,
    beta1: f64,
    beta2: f64,
    alpha1: f64,
    alpha2: f64,
    kappa0: f64,
    xs: &[WedgePoint],
    dt_values: &[f64],
    plan: &RefinementPlan,
) -> Result<SupremumReport> {
    require_positive("sigma", sigma)?;
    let wedge = Wedge::new(kappa0)?;
    let integrand = |x: &WedgePoint, y: &WedgePoint| {
        let ry = y.r();
        let rho_y = wedge.dist_to_boundary(y);
        let rho_x = wedge.dist_to_boundary(x);
        (ry / (1.0 + ry)).powf(beta1)
            * (rho_y / (1.0 + rho_y)).powf(beta2)
            * ((1.0 + ry) / (1.0 + x.r())).powf(alpha1)
            * ((1.0 + rho_y) / (1.0 + rho_x)).powf(alpha2)
            * (-sigma * x.dist(y).powi(2)).exp()
    };
    let (grid_max, history) = wedge_sup_study(integrand, &wedge, sigma, xs, plan)?;
    let verdict = classify(&history);
    let mut params = vec![
        ("sigma".into(), sigma),
        ("beta1".into(), beta1),
        ("beta2".into(), beta2),
        ("alpha1".into(), alpha1),
        ("alpha2".into(), alpha2),
        ("kappa0".into(), kappa0),
    ];
    // Scaled form: R/J factors at scale t-s, the scaled Gaussian, and
    // normalization by (√(t-s)+|x|)^{α₁}(√(t-s)+ρ(x))^{α₂}.
    let n = plan.base_n << (plan.levels.saturating_sub(1));
    let mut scaled_maxima = Vec::with_capacity(dt_values.len());
    for &dt in dt_values {
        require_positive("t-s", dt)?;
        let sq = dt.sqrt();
        let cut = (37.0 * dt / sigma).sqrt();
        let values: Vec<f64> = xs
            .par_iter()
            .map(|x0| -> Result<f64> {
                let x = wedge.point(x0.r() * sq, x0.angle())?;
                let rho_x = wedge.dist_to_boundary(&x);
                let den = (sq + x.r()).powf(alpha1) * (sq + rho_x).powf(alpha2);
                let rule = WedgeQuadRule::with_window(
                    kappa0,
                    x.r() + cut,
                    n,
                    n,
                    Some((x.r(), x.angle(), cut)),
                )?;
                let num = integrate_wedge_once(
                    |y| {
                        let rho_y = wedge.dist_to_boundary(y);
                        (y.r() / (sq + y.r())).powf(beta1)
                            * (rho_y / (sq + rho_y)).powf(beta2)
                            * (sq + y.r()).powf(alpha1)
                            * (sq + rho_y).powf(alpha2)
                            * (-sigma * x.dist(y).powi(2) / dt).exp()
                            / dt
                    },
                    &wedge,
                    &rule,
                )?;
                Ok(num / den)
            })
            .map(|res| res.unwrap_or(f64::INFINITY))
            .collect();
        let m = values.into_iter().fold(0.0_f64, f64::max);
        params.push((format!("scaled_max_dt_{dt:e}"), m));
        scaled_maxima.push(m);
    }
    if !scaled_maxima.is_empty() {
        let hi = scaled_maxima.iter().cloned().fold(f64::MIN, f64::max);
        let lo = scaled_maxima.iter().cloned().fold(f64::MAX, f64::min);
        params.push(("scaled_spread".into(), (hi - lo) / lo.max(f64::MIN_POSITIVE)));
    }
    Ok(SupremumReport {
        params,
        grid: format!("{} stratified wedge points; scaled grid dilated by sqrt(t-s)", xs.len()),
        grid_max,
        history,
        verdict,
    })
}

/// Empirical constant of the kernel envelope bound: maximizes
/// `bound_ratio` over (c, x, y) samples whose radial extent doubles per
/// refinement level, then sweeps σ downward (halving) until the study
/// returns a bounded verdict. The report carries the first working σ;
/// too-aggressive σ shows up as overflow at far pairs, i.e. diverging.
pub fn check_green_bound(
    kappa0: f64,
    lambda1: f64,
    lambda2: f64,
    sigma_start: f64,
    cfg: &KernelConfig,
    plan: &RefinementPlan,
) -> Result<SupremumReport> {
    let lam_max = PI / kappa0;
    for lam in [lambda1, lambda2] {
        if !(lam > 0.0 && lam < lam_max) {
            return Err(WedgeError::Domain(format!(
                "lambda must lie in (0, {lam_max}), got {lam}"
            )));
        }
    }
    require_positive("sigma", sigma_start)?;
    let wedge = cfg.wedge();
    let times: [f64; 3] = [0.25, 1.0, 4.0];
    let mut sigma = sigma_start;
    let mut last: Option<SupremumReport> = None;
    for _ in 0..12 {
        let mut history = Vec::with_capacity(plan.levels);
        for level in 0..plan.levels {
            // sample density and radial extent both grow with the level
            let n_r = 4 + 2 * level;
            let n_a = 4 + 2 * level;
            let r_top: f64 = 4.0 * (1 << level) as f64;
            let radii: Vec<f64> = (0..n_r)
                .map(|i| 0.1 * (r_top / 0.1).powf(i as f64 / (n_r - 1) as f64))
                .collect();
            let angles: Vec<f64> =
                (0..n_a).map(|i| kappa0 * (0.05 + 0.9 * i as f64 / (n_a - 1) as f64)).collect();
            let pts: Vec<(f64, f64)> = radii
                .iter()
                .flat_map(|&r| angles.iter().map(move |&a| (r, a)))
                .collect();
            let maxima: Vec<f64> = times
                .par_iter()
                .map(|&c| -> Result<f64> {
                    let sq = c.sqrt();
                    let mut m = 0.0_f64;
                    for &(rx, ax) in &pts {
                        let x = wedge.point(rx * sq, ax)?;
                        for &(ry, ay) in &pts {
                            let y = wedge.point(ry * sq, ay)?;
                            match bound_ratio(c, &x, &y, lambda1, lambda2, sigma, cfg) {
                                Ok(v) => m = m.max(v),
                                Err(_) => return Ok(f64::INFINITY),
                            }
                        }
                    }
                    Ok(m)
                })
                .map(|res| res.unwrap_or(f64::INFINITY))
                .collect();
            // running max: the sample sets are not nested across levels,
            // so the per-level sup estimate is only monotone cumulatively
            let prev = history.last().copied().unwrap_or(0.0);
            history.push(maxima.into_iter().fold(prev, f64::max));
            if !history.last().unwrap().is_finite() {
                break; // this sigma is hopeless; no need to refine further
            }
        }
        let verdict = classify(&history);
        let report = SupremumReport {
            params: vec![
                ("kappa0".into(), kappa0),
                ("lambda1".into(), lambda1),
                ("lambda2".into(), lambda2),
                ("sigma".into(), sigma),
            ],
            grid: "c in {0.25,1,4}; (x,y) pairs on log-radial grids of doubling extent".into(),
            grid_max: *history.last().unwrap(),
            history,
            verdict,
        };
        if verdict == Verdict::Bounded {
            return Ok(report);
        }
        last = Some(report);
        sigma *= 0.5;
    }
    Ok(last.expect("at least one sweep iteration"))
}

/// True iff the weight parameters lie in the admissible open box
/// p(1-π/κ₀) < θ < p(1+π/κ₀), 1 < Θ < p+1.
pub fn range_gate(params: &WeightParams, kappa0: f64) -> bool {
    params.in_admissible_range(kappa0)
}
