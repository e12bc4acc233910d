//! Heat convolutions on the wedge: the deterministic space-time
//! convolution, the variance field of the stochastic convolution (via the
//! Itô isometry), mixed-weight space-time norms of both, and a Monte Carlo
//! path sampler used as an independent validation oracle.
//!
//! Separable test fields `g(s,y) = Σ_k a_k(s) b_k(y)` reduce everything to
//! smoothing integrals `h_k(τ,x) = ∫ G(τ,x,y) b_k(y) dy`. Three evaluation
//! routes keep these affordable: an exact closed form where the field is
//! itself a kernel slice (semigroup property), a short-time expansion
//! `h ≈ b + τ∆b + τ²∆²b/2` where the field is smooth on the diffusion
//! scale, and windowed quadrature over the field's carrier otherwise.

use crate::error::{Result, WedgeError};
use crate::geometry::{Wedge, WedgePoint, WeightParams};
use crate::kernel::{eval, eval_with_gradient, KernelConfig};
use crate::norms::ScalarField;
use crate::quad::{
    bisect_breaks, composite_1d, gaussian_cutoff, graded_breaks, integrate_time,
    integrate_wedge_once, pairwise_sum, partial_panel_integral, TimeGrading, WedgeQuadRule,
};
use crate::special::gauss_abs_moment;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Panel counts for the convolution quadratures: `n_time` for every time
/// integral, `n_space` per polar direction for space(-time) norms,
/// `n_inner` per direction for smoothing integrals.
#[derive(Debug, Clone, Copy)]
pub struct ConvRules {
    pub n_time: usize,
    pub n_space: usize,
    pub n_inner: usize,
}

impl Default for ConvRules {
    fn default() -> Self {
        ConvRules { n_time: 8, n_space: 6, n_inner: 4 }
    }
}

type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SmoothedFn = Arc<dyn Fn(f64, &WedgePoint) -> Result<f64> + Send + Sync>;
type SmoothedGradFn = Arc<dyn Fn(f64, &WedgePoint) -> Result<(f64, f64)> + Send + Sync>;
type ShortTimeFn = Arc<dyn Fn(f64, &WedgePoint) -> Option<f64> + Send + Sync>;

/// Deterministic time profile a(s) of a separable mode.
#[derive(Clone)]
pub enum TimeProfile {
    Constant(f64),
    Custom(ProfileFn),
}

impl TimeProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            TimeProfile::Constant(c) => *c,
            TimeProfile::Custom(f) => f(s),
        }
    }

    fn scaled(&self, factor: f64) -> TimeProfile {
        match self {
            TimeProfile::Constant(c) => TimeProfile::Constant(c * factor),
            TimeProfile::Custom(f) => {
                let f = f.clone();
                TimeProfile::Custom(Arc::new(move |s| factor * f(s)))
            }
        }
    }
}

/// Polar box carrying a mode's spatial factor, used to build the smoothing
/// quadrature; `grade_r_lo` clusters radial panels toward `r_lo`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingRegion {
    pub r_lo: f64,
    pub r_hi: f64,
    pub ang_lo: f64,
    pub ang_hi: f64,
    pub grade_r_lo: bool,
}

/// One separable mode a(s)·b(y) with optional fast evaluation routes for
/// its heat smoothing h(τ,x) = ∫ G(τ,x,y) b(y) dy.
#[derive(Clone)]
pub struct Mode {
    profile: TimeProfile,
    space: ScalarField,
    region: SmoothingRegion,
    smoothed: Option<SmoothedFn>,
    smoothed_grad: Option<SmoothedGradFn>,
    short_time: Option<ShortTimeFn>,
}

impl Mode {
    pub fn new(profile: TimeProfile, space: ScalarField, region: SmoothingRegion) -> Mode {
        Mode { profile, space, region, smoothed: None, smoothed_grad: None, short_time: None }
    }

    pub fn profile(&self) -> &TimeProfile {
        &self.profile
    }

    pub fn space(&self) -> &ScalarField {
        &self.space
    }

    /// Copy of the mode with every analytic shortcut removed, so that
    /// smoothing falls back to quadrature; the shortcut and the fallback
    /// are then independent computations of the same integral.
    pub fn without_shortcuts(&self) -> Mode {
        Mode { smoothed: None, smoothed_grad: None, short_time: None, ..self.clone() }
    }

    /// h(τ,x): exact closed form, then short-time expansion, then windowed
    /// quadrature over the mode's region.
    pub fn smoothed_value(
        &self,
        tau: f64,
        x: &WedgePoint,
        cfg: &KernelConfig,
        rules: &ConvRules,
    ) -> Result<f64> {
        if let Some(exact) = &self.smoothed {
            return exact(tau, x);
        }
        if let Some(short) = &self.short_time {
            if let Some(v) = short(tau, x) {
                return Ok(v);
            }
        }
        let rule = self.smoothing_rule(tau, x, rules)?;
        let wedge = cfg.wedge();
        integrate_wedge_once(
            |y| {
                let b = self.space.eval(y);
                if b == 0.0 {
                    0.0
                } else {
                    b * eval(tau, x, y, cfg).unwrap_or(f64::NAN)
                }
            },
            &wedge,
            &rule,
        )
    }

    /// Spatial gradient of h in x; closed form if available, otherwise
    /// quadrature of the kernel gradient (no short-time route).
    pub fn smoothed_gradient(
        &self,
        tau: f64,
        x: &WedgePoint,
        cfg: &KernelConfig,
        rules: &ConvRules,
    ) -> Result<(f64, f64)> {
        if let Some(exact) = &self.smoothed_grad {
            return exact(tau, x);
        }
        let rule = self.smoothing_rule(tau, x, rules)?;
        let wedge = cfg.wedge();
        let nodes = rule.node_list();
        let mut g1 = Vec::with_capacity(nodes.len());
        let mut g2 = Vec::with_capacity(nodes.len());
        for (r, ang, w) in nodes {
            let y = wedge.point(r, ang)?;
            let b = self.space.eval(&y);
            if b == 0.0 {
                g1.push(0.0);
                g2.push(0.0);
            } else {
                let (_, d1, d2) = eval_with_gradient(tau, x, &y, cfg)?;
                g1.push(w * b * d1);
                g2.push(w * b * d2);
            }
        }
        Ok((pairwise_sum(&g1), pairwise_sum(&g2)))
    }

    fn smoothing_rule(&self, tau: f64, x: &WedgePoint, rules: &ConvRules) -> Result<WedgeQuadRule> {
        let r = &self.region;
        // extra resolution where the kernel concentrates as tau -> 0
        let window = Some((x.r(), x.angle(), 16.0 * tau.sqrt()));
        WedgeQuadRule::patch(
            r.r_lo,
            r.r_hi,
            r.ang_lo,
            r.ang_hi,
            rules.n_inner,
            rules.n_inner,
            r.grade_r_lo,
            window,
        )
    }
}

/// A finite family of separable deterministic modes, one per driving
/// Wiener process (stochastic use) or summed as a forcing (deterministic
/// use).
#[derive(Clone)]
pub struct TestField {
    id: String,
    modes: Vec<Mode>,
}

impl TestField {
    pub fn from_modes(id: impl Into<String>, modes: Vec<Mode>) -> Self {
        TestField { id: id.into(), modes }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Field with every time profile multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> TestField {
        TestField {
            id: format!("{}*{}", self.id, factor),
            modes: self
                .modes
                .iter()
                .map(|m| Mode { profile: m.profile.scaled(factor), ..m.clone() })
                .collect(),
        }
    }

    /// Single mode b(y) = G(a, x0, y): its heat smoothing is the kernel
    /// slice h(τ,x) = G(τ+a, x, x0) by the semigroup property, giving an
    /// exact closed form for every derived quantity.
    pub fn semigroup(a: f64, x0: WedgePoint, cfg: &KernelConfig) -> Result<TestField> {
        if !(a.is_finite() && a > 0.0) {
            return Err(WedgeError::Domain(format!("semigroup offset must be positive, got {a}")));
        }
        let cfg_v = *cfg;
        let cfg_g = *cfg;
        let cfg_b = *cfg;
        let support = gaussian_cutoff(x0.r(), 1.0 / (4.0 * a));
        let space = ScalarField::from_fn(move |y: &WedgePoint| {
            eval(a, &x0, y, &cfg_b).unwrap_or(f64::NAN)
        })
        .with_support_radius(support);
        let region = SmoothingRegion {
            r_lo: 0.0,
            r_hi: support,
            ang_lo: 0.0,
            ang_hi: cfg.kappa0,
            grade_r_lo: false,
        };
        let mut mode = Mode::new(TimeProfile::Constant(1.0), space, region);
        mode.smoothed = Some(Arc::new(move |tau, x: &WedgePoint| eval(tau + a, x, &x0, &cfg_v)));
        mode.smoothed_grad = Some(Arc::new(move |tau, x: &WedgePoint| {
            let (_, g1, g2) = eval_with_gradient(tau + a, x, &x0, &cfg_g)?;
            Ok((g1, g2))
        }));
        Ok(TestField {
            id: format!("semigroup(a={a},r={:.3},ang={:.3})", x0.r(), x0.angle()),
            modes: vec![mode],
        })
    }

    /// Single mode b(y) = (1 - |y-c|²/R²)₊³, a C² cap of radius R around
    /// `center`. Its Laplacian iterates are closed-form, enabling the
    /// short-time route wherever the boundary is further than the
    /// diffusion scale.
    pub fn bump(center: WedgePoint, radius: f64, wedge: &Wedge) -> Result<TestField> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(WedgeError::Domain(format!("bump radius must be positive, got {radius}")));
        }
        let c = center;
        let rr = radius;
        let space = ScalarField::from_fn(move |y: &WedgePoint| {
            let u = (y.dist(&c) / rr).powi(2);
            if u < 1.0 {
                (1.0 - u).powi(3)
            } else {
                0.0
            }
        })
        .with_gradient(move |y: &WedgePoint| {
            let u = (y.dist(&c) / rr).powi(2);
            if u < 1.0 {
                let s = -6.0 * (1.0 - u).powi(2) / (rr * rr);
                (s * (y.x1() - c.x1()), s * (y.x2() - c.x2()))
            } else {
                (0.0, 0.0)
            }
        })
        .with_support_radius(center.r() + radius);
        let ang_hw = if center.r() > radius {
            1.5 * (radius / center.r()).asin()
        } else {
            wedge.kappa0()
        };
        let region = SmoothingRegion {
            r_lo: (center.r() - radius).max(0.0),
            r_hi: center.r() + radius,
            ang_lo: (center.angle() - ang_hw).max(0.0),
            ang_hi: (center.angle() + ang_hw).min(wedge.kappa0()),
            grade_r_lo: false,
        };
        let w = *wedge;
        let mut mode = Mode::new(TimeProfile::Constant(1.0), space, region);
        mode.short_time = Some(Arc::new(move |tau, x: &WedgePoint| {
            let dc = x.dist(&c);
            let d = w.dist_to_boundary(x).min((dc - rr).abs());
            if 128.0 * tau > d * d {
                return None;
            }
            let u = (dc / rr).powi(2);
            if u >= 1.0 {
                return Some(0.0);
            }
            let lap = 12.0 / (rr * rr) * (1.0 - u) * (3.0 * u - 1.0);
            let lap2 = 192.0 / rr.powi(4) * (1.0 - 3.0 * u);
            Some((1.0 - u).powi(3) + tau * lap + 0.5 * tau * tau * lap2)
        }));
        Ok(TestField {
            id: format!("bump(r={:.3},ang={:.3},R={radius})", center.r(), center.angle()),
            modes: vec![mode],
        })
    }

    /// Single mode b(y) = |y|^gamma · 1_{|y| <= r_cut}, concentrating at
    /// the vertex for negative gamma (gamma > -1 keeps it locally
    /// integrable in the plane).
    pub fn vertex_power(gamma: f64, r_cut: f64, wedge: &Wedge) -> Result<TestField> {
        if !(gamma.is_finite() && gamma > -1.0) {
            return Err(WedgeError::Domain(format!(
                "vertex power exponent must exceed -1, got {gamma}"
            )));
        }
        if !(r_cut.is_finite() && r_cut > 0.0) {
            return Err(WedgeError::Domain(format!("cutoff radius must be positive, got {r_cut}")));
        }
        let space = ScalarField::from_fn(move |y: &WedgePoint| {
            if y.r() <= r_cut {
                y.r().powf(gamma)
            } else {
                0.0
            }
        })
        .with_gradient(move |y: &WedgePoint| {
            if y.r() <= r_cut {
                let s = gamma * y.r().powf(gamma - 2.0);
                (s * y.x1(), s * y.x2())
            } else {
                (0.0, 0.0)
            }
        })
        .with_support_radius(r_cut);
        let region = SmoothingRegion {
            r_lo: 0.0,
            r_hi: r_cut,
            ang_lo: 0.0,
            ang_hi: wedge.kappa0(),
            grade_r_lo: true,
        };
        let w = *wedge;
        let mut mode = Mode::new(TimeProfile::Constant(1.0), space, region);
        mode.short_time = Some(Arc::new(move |tau, x: &WedgePoint| {
            let r = x.r();
            let d = w.dist_to_boundary(x).min((r - r_cut).abs());
            if 128.0 * tau > d * d {
                return None;
            }
            if r >= r_cut {
                return Some(0.0);
            }
            let lap = gamma * gamma * r.powf(gamma - 2.0);
            let lap2 = gamma * gamma * (gamma - 2.0) * (gamma - 2.0) * r.powf(gamma - 4.0);
            Some(r.powf(gamma) + tau * lap + 0.5 * tau * tau * lap2)
        }));
        Ok(TestField { id: format!("power(gamma={gamma},cut={r_cut})"), modes: vec![mode] })
    }

    /// Single mode b(y) = |y|^{-delta} · 1_{eps <= |y| <= 1}, the
    /// vertex-concentrating family of the sharpness probe: as eps shrinks
    /// the field piles mass onto the vertex at rate delta.
    pub fn annulus_power(delta: f64, eps: f64, wedge: &Wedge) -> Result<TestField> {
        if !(delta.is_finite() && delta < 1.0) {
            return Err(WedgeError::Domain(format!(
                "concentration exponent must be below 1, got {delta}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(WedgeError::Domain(format!("inner radius must be in (0,1), got {eps}")));
        }
        let space = ScalarField::from_fn(move |y: &WedgePoint| {
            if y.r() >= eps && y.r() <= 1.0 {
                y.r().powf(-delta)
            } else {
                0.0
            }
        })
        .with_support_radius(1.0);
        let region = SmoothingRegion {
            r_lo: eps,
            r_hi: 1.0,
            ang_lo: 0.0,
            ang_hi: wedge.kappa0(),
            grade_r_lo: true,
        };
        let w = *wedge;
        let mut mode = Mode::new(TimeProfile::Constant(1.0), space, region);
        mode.short_time = Some(Arc::new(move |tau, x: &WedgePoint| {
            let r = x.r();
            let d = w.dist_to_boundary(x).min((r - eps).abs()).min((r - 1.0).abs());
            if 128.0 * tau > d * d {
                return None;
            }
            if r <= eps || r >= 1.0 {
                return Some(0.0);
            }
            let g = -delta;
            let lap = g * g * r.powf(g - 2.0);
            let lap2 = g * g * (g - 2.0) * (g - 2.0) * r.powf(g - 4.0);
            Some(r.powf(g) + tau * lap + 0.5 * tau * tau * lap2)
        }));
        Ok(TestField { id: format!("annulus(delta={delta},eps={eps})"), modes: vec![mode] })
    }

    /// Radius beyond which every mode's spatial factor vanishes.
    fn support_radius(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.space.support_radius().unwrap_or(m.region.r_hi))
            .fold(0.0, f64::max)
    }

    fn all_profiles_constant(&self) -> bool {
        self.modes.iter().all(|m| matches!(m.profile, TimeProfile::Constant(_)))
    }
}

/// Deterministic convolution u_D(t,x) = Σ_k ∫₀^t a_k(s) h_k(t-s, x) ds
/// (the modes are summed as a single forcing).
pub fn det_convolution(
    f: &TestField,
    t: f64,
    x: &WedgePoint,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let mut total = 0.0;
    for mode in &f.modes {
        let res = integrate_time(
            |s| {
                mode.profile.eval(s)
                    * mode.smoothed_value(t - s, x, cfg, rules).unwrap_or(f64::NAN)
            },
            t,
            TimeGrading::Both,
            rules.n_time,
        )?;
        total += res.value;
    }
    Ok(total)
}

/// Spatial gradient of the deterministic convolution.
pub fn det_convolution_gradient(
    f: &TestField,
    t: f64,
    x: &WedgePoint,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let mut total = (0.0, 0.0);
    for mode in &f.modes {
        for component in 0..2 {
            let res = integrate_time(
                |s| {
                    let g = mode.smoothed_gradient(t - s, x, cfg, rules);
                    let g = match (g, component) {
                        (Ok((g1, _)), 0) => g1,
                        (Ok((_, g2)), _) => g2,
                        (Err(_), _) => f64::NAN,
                    };
                    mode.profile.eval(s) * g
                },
                t,
                TimeGrading::Both,
                rules.n_time,
            )?;
            if component == 0 {
                total.0 += res.value;
            } else {
                total.1 += res.value;
            }
        }
    }
    Ok(total)
}

/// Variance σ²(t,x) = Σ_k ∫₀^t (a_k(s) h_k(t-s,x))² ds of the Gaussian
/// value of the stochastic convolution (Itô isometry).
pub fn stoch_variance(
    g: &TestField,
    t: f64,
    x: &WedgePoint,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let mut total = 0.0;
    for mode in &g.modes {
        let res = integrate_time(
            |s| {
                let h = mode.smoothed_value(t - s, x, cfg, rules).unwrap_or(f64::NAN);
                (mode.profile.eval(s) * h).powi(2)
            },
            t,
            TimeGrading::Both,
            rules.n_time,
        )?;
        total += res.value.max(0.0);
    }
    Ok(total)
}

/// Componentwise variances of the spatial gradient of the stochastic
/// convolution, (var ∂₁u, var ∂₂u).
pub fn stoch_gradient_variances(
    g: &TestField,
    t: f64,
    x: &WedgePoint,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let mut total = (0.0, 0.0);
    for mode in &g.modes {
        for component in 0..2 {
            let res = integrate_time(
                |s| {
                    let grad = mode.smoothed_gradient(t - s, x, cfg, rules);
                    let v = match (grad, component) {
                        (Ok((g1, _)), 0) => g1,
                        (Ok((_, g2)), _) => g2,
                        (Err(_), _) => f64::NAN,
                    };
                    (mode.profile.eval(s) * v).powi(2)
                },
                t,
                TimeGrading::Both,
                rules.n_time,
            )?;
            if component == 0 {
                total.0 += res.value.max(0.0);
            } else {
                total.1 += res.value.max(0.0);
            }
        }
    }
    Ok(total)
}

/// Spatial cutoff for solution fields: support of the data plus the
/// diffusive spreading over the horizon.
fn solution_extent(g: &TestField, t_end: f64) -> f64 {
    g.support_radius() + (148.0 * t_end).sqrt()
}

/// Space-time norm of the stochastic convolution by Gaussian reduction:
/// `(∫₀^T ∫_D m_p σ(t,x)^p · weight(Θ-p, θ-p) dx dt)^{1/p}`. The weight
/// shift is applied internally; pass the unshifted parameters of the
/// driving field's norm.
pub fn stoch_lp_space_time_norm(
    g: &TestField,
    params: &WeightParams,
    t_end: f64,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<f64> {
    let p = params.p;
    if p < 2.0 {
        return Err(WedgeError::Contract(format!(
            "Gaussian reduction of the stochastic norm needs p >= 2, got {p}"
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(WedgeError::Domain(format!("horizon must be positive, got {t_end}")));
    }
    if g.modes.is_empty() {
        return Ok(0.0);
    }
    let shifted = params.shifted(-p);
    let m_p = gauss_abs_moment(p)?;
    let wedge = cfg.wedge();
    let rule =
        WedgeQuadRule::graded(cfg.kappa0, solution_extent(g, t_end), rules.n_space, rules.n_space)?;
    let norm_p = if p == 2.0 && g.all_profiles_constant() {
        // Itô + Fubini: ∫₀^T ∫ σ² w = Σ_k c_k² ∫₀^T (T-τ) ∫ h_k(τ,x)² w dx dτ
        let breaks = graded_breaks(0.0, t_end, rules.n_time, 3.0, true, false);
        let mut total = 0.0;
        for mode in &g.modes {
            let c = mode.profile.eval(0.0);
            if c == 0.0 {
                continue;
            }
            let v = composite_1d(
                |tau| {
                    let f = integrate_wedge_once(
                        |x| {
                            let h = mode.smoothed_value(tau, x, cfg, rules).unwrap_or(f64::NAN);
                            h * h * wedge.mixed_weight(x, &shifted)
                        },
                        &wedge,
                        &rule,
                    );
                    (t_end - tau) * f.unwrap_or(f64::NAN)
                },
                &breaks,
            )?;
            total += c * c * v.max(0.0);
        }
        total
    } else {
        let breaks = graded_breaks(0.0, t_end, rules.n_time, 3.0, true, false);
        composite_1d(
            |t| {
                integrate_wedge_once(
                    |x| {
                        let var = stoch_variance(g, t, x, cfg, rules).unwrap_or(f64::NAN);
                        m_p * var.powf(p / 2.0) * wedge.mixed_weight(x, &shifted)
                    },
                    &wedge,
                    &rule,
                )
                .unwrap_or(f64::NAN)
            },
            &breaks,
        )?
        .max(0.0)
    };
    Ok(norm_p.powf(1.0 / p))
}

/// Space-time norm `‖u_D‖` of the deterministic convolution under the
/// internally shifted weight (Θ-p, θ-p).
pub fn det_lp_space_time_norm(
    f: &TestField,
    params: &WeightParams,
    t_end: f64,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<f64> {
    let p = params.p;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(WedgeError::Domain(format!("horizon must be positive, got {t_end}")));
    }
    if f.modes.is_empty() {
        return Ok(0.0);
    }
    let shifted = params.shifted(-p);
    let wedge = cfg.wedge();
    let rule =
        WedgeQuadRule::graded(cfg.kappa0, solution_extent(f, t_end), rules.n_space, rules.n_space)?;
    if !f.all_profiles_constant() {
        // direct nesting; affordable only at exploratory resolutions
        let breaks = graded_breaks(0.0, t_end, rules.n_time, 3.0, true, false);
        let norm_p = composite_1d(
            |t| {
                integrate_wedge_once(
                    |x| {
                        let v = det_convolution(f, t, x, cfg, rules).unwrap_or(f64::NAN);
                        v.abs().powf(p) * wedge.mixed_weight(x, &shifted)
                    },
                    &wedge,
                    &rule,
                )
                .unwrap_or(f64::NAN)
            },
            &breaks,
        )?;
        return Ok(norm_p.max(0.0).powf(1.0 / p));
    }
    // Constant profiles: u_D(t,x) = Σ_k c_k ∫₀^t h_k(τ,x) dτ. Per spatial
    // node the cumulative integral is assembled once from smoothing values
    // on a single graded time grid, and read off at every outer time node
    // through panel interpolation.
    let breaks = bisect_breaks(&graded_breaks(0.0, t_end, rules.n_time, 3.0, true, false));
    let panels: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let gl = crate::quad::gl8();
    let contributions: Vec<f64> = rule
        .node_list()
        .iter()
        .map(|&(r, ang, wq)| -> Result<f64> {
            let x = wedge.point(r, ang)?;
            // combined smoothing Σ_k c_k h_k at every grid node
            let mut hvals: Vec<[f64; 8]> = Vec::with_capacity(panels.len());
            for &(lo, hi) in &panels {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let mut row = [0.0_f64; 8];
                for (i, &(xi, _)) in gl.iter().enumerate() {
                    let tau = mid + half * xi;
                    let mut acc = 0.0;
                    for mode in &f.modes {
                        let c = mode.profile.eval(0.0);
                        if c != 0.0 {
                            acc += c * mode.smoothed_value(tau, &x, cfg, rules)?;
                        }
                    }
                    row[i] = acc;
                }
                hvals.push(row);
            }
            // prefix integrals over whole panels
            let mut prefix = Vec::with_capacity(panels.len());
            let mut acc = 0.0;
            for (m, &(lo, hi)) in panels.iter().enumerate() {
                prefix.push(acc);
                let half = 0.5 * (hi - lo);
                let mut s = 0.0;
                for (i, &(_, wt)) in gl.iter().enumerate() {
                    s += wt * hvals[m][i];
                }
                acc += s * half;
            }
            // outer time integral of |u_D|^p on the same panels
            let weight = wedge.mixed_weight(&x, &shifted);
            let mut time_integral = 0.0;
            for (m, &(lo, hi)) in panels.iter().enumerate() {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for &(xi, wt) in gl.iter() {
                    let t = mid + half * xi;
                    let v = prefix[m] + partial_panel_integral(lo, hi, &hvals[m], t);
                    time_integral += wt * half * v.abs().powf(p);
                }
            }
            if !time_integral.is_finite() {
                return Err(WedgeError::Evaluation { location: format!("r={r}, angle={ang}") });
            }
            Ok(wq * weight * time_integral)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&contributions).max(0.0).powf(1.0 / p))
}

/// Space-time data norm `‖g‖_{L_p(weight; l_2)}` of the field itself over
/// (0,T], with the unshifted weight.
pub fn field_lp_space_time_norm(
    g: &TestField,
    params: &WeightParams,
    t_end: f64,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<f64> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(WedgeError::Domain(format!("horizon must be positive, got {t_end}")));
    }
    if g.modes.is_empty() {
        return Ok(0.0);
    }
    let p = params.p;
    let wedge = cfg.wedge();
    let rule = WedgeQuadRule::graded(cfg.kappa0, g.support_radius(), rules.n_space, rules.n_space)?;
    let spatial = |s: f64| -> Result<f64> {
        integrate_wedge_once(
            |y| {
                let mag2: f64 = g
                    .modes
                    .iter()
                    .map(|m| (m.profile.eval(s) * m.space.eval(y)).powi(2))
                    .sum();
                mag2.powf(p / 2.0) * wedge.mixed_weight(y, params)
            },
            &wedge,
            &rule,
        )
    };
    let norm_p = if g.all_profiles_constant() {
        t_end * spatial(0.0)?
    } else {
        let breaks = graded_breaks(0.0, t_end, rules.n_time, 1.0, false, false);
        composite_1d(|s| spatial(s).unwrap_or(f64::NAN), &breaks)?
    };
    Ok(norm_p.max(0.0).powf(1.0 / p))
}

/// Monte Carlo estimate of E|u_S(t,x)|^p by left-point discretization of
/// the stochastic integral with `n_steps` uniform steps and independent
/// per-path ChaCha streams; returns (mean, standard error). Independent
/// oracle for the Gaussian reduction.
#[allow(clippy::too_many_arguments)]
pub fn mc_sample(
    g: &TestField,
    t: f64,
    x: &WedgePoint,
    p: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    cfg: &KernelConfig,
    rules: &ConvRules,
) -> Result<(f64, f64)> {
    if n_steps < 8 {
        return Err(WedgeError::Contract(format!(
            "Monte Carlo needs at least 8 time steps, got {n_steps}"
        )));
    }
    if n_paths < 2 {
        return Err(WedgeError::Contract(format!("need at least 2 paths, got {n_paths}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let dt = t / n_steps as f64;
    // deterministic coefficients a_k(s_j) h_k(t - s_j, x) sqrt(dt)
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(g.modes.len());
    for mode in &g.modes {
        let mut row = Vec::with_capacity(n_steps);
        for j in 0..n_steps {
            let s = j as f64 * dt;
            let h = mode.smoothed_value(t - s, x, cfg, rules)?;
            row.push(mode.profile.eval(s) * h * dt.sqrt());
        }
        coeffs.push(row);
    }
    let normal = StandardNormal;
    let mut estimates = Vec::with_capacity(n_paths);
    for path in 0..n_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64 + 1);
        let mut u = 0.0;
        for row in &coeffs {
            for &c in row {
                let z: f64 = normal.sample(&mut rng);
                u += c * z;
            }
        }
        estimates.push(u.abs().powf(p));
    }
    let mean = pairwise_sum(&estimates) / n_paths as f64;
    let sq: Vec<f64> = estimates.iter().map(|e| (e - mean) * (e - mean)).collect();
    let var = pairwise_sum(&sq) / (n_paths as f64 - 1.0);
    Ok((mean, (var / n_paths as f64).sqrt()))
}
