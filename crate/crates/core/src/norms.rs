//! Mixed-weight `L_p` and weighted Sobolev norms over the wedge, scalar
//! and `l_2`-valued fields, and the dyadic annulus localization of the
//! vertex weight.

use crate::error::{Result, WedgeError};
use crate::geometry::{Wedge, WedgePoint, WeightParams};
use crate::quad::{integrate_wedge, WedgeQuadRule};
use std::sync::Arc;

type ValueFn = Arc<dyn Fn(&WedgePoint) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&WedgePoint) -> (f64, f64) + Send + Sync>;
type HessFn = Arc<dyn Fn(&WedgePoint) -> (f64, f64, f64) + Send + Sync>;

/// A scalar field on the wedge with optional analytic derivatives and an
/// optional compact-support radius (`u(x) = 0` for `|x| > support_radius`).
#[derive(Clone)]
pub struct ScalarField {
    value: ValueFn,
    grad: Option<GradFn>,
    /// Hessian as (u_{11}, u_{12}, u_{22}).
    hess: Option<HessFn>,
    support_radius: Option<f64>,
}

impl ScalarField {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&WedgePoint) -> f64 + Send + Sync + 'static,
    {
        ScalarField { value: Arc::new(f), grad: None, hess: None, support_radius: None }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&WedgePoint) -> (f64, f64) + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_hessian<H>(mut self, h: H) -> Self
    where
        H: Fn(&WedgePoint) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        self.hess = Some(Arc::new(h));
        self
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn eval(&self, x: &WedgePoint) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &WedgePoint) -> Option<(f64, f64)> {
        self.grad.as_ref().map(|g| g(x))
    }

    pub fn hessian(&self, x: &WedgePoint) -> Option<(f64, f64, f64)> {
        self.hess.as_ref().map(|h| h(x))
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// The dilated field x |-> u(a x); derivatives pick up the chain-rule
    /// factors and the support radius shrinks by a.
    pub fn dilated(&self, a: f64) -> ScalarField {
        let value = self.value.clone();
        let grad = self.grad.clone().map(|g| -> GradFn {
            Arc::new(move |x: &WedgePoint| {
                let (g1, g2) = g(&x.scaled(a));
                (a * g1, a * g2)
            })
        });
        let hess = self.hess.clone().map(|h| -> HessFn {
            Arc::new(move |x: &WedgePoint| {
                let (h11, h12, h22) = h(&x.scaled(a));
                (a * a * h11, a * a * h12, a * a * h22)
            })
        });
        ScalarField {
            value: Arc::new(move |x: &WedgePoint| value(&x.scaled(a))),
            grad,
            hess,
            support_radius: self.support_radius.map(|r| r / a),
        }
    }
}

/// An `l_2`-valued field, stored componentwise.
#[derive(Clone)]
pub struct SequenceField {
    components: Vec<ScalarField>,
}

impl SequenceField {
    pub fn new(components: Vec<ScalarField>) -> Self {
        SequenceField { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    /// Pointwise `l_2` magnitude.
    pub fn magnitude(&self, x: &WedgePoint) -> f64 {
        self.components.iter().map(|c| c.eval(x).powi(2)).sum::<f64>().sqrt()
    }
}

/// Mixed-weight norm `(int |u|^p rho_o^{theta-2} (rho/rho_o)^{Theta-2})^{1/p}`.
pub fn lp_norm(
    u: &ScalarField,
    wedge: &Wedge,
    params: &WeightParams,
    rule: &WedgeQuadRule,
) -> Result<f64> {
    let p = params.p;
    let res = integrate_wedge(
        |x| u.eval(x).abs().powf(p) * wedge.mixed_weight(x, params),
        wedge,
        rule,
    )?;
    Ok(res.value.max(0.0).powf(1.0 / p))
}

/// Mixed-weight norm of an `l_2`-valued field (pointwise `l_2` magnitude
/// under the same weight).
pub fn lp_norm_seq(
    g: &SequenceField,
    wedge: &Wedge,
    params: &WeightParams,
    rule: &WedgeQuadRule,
) -> Result<f64> {
    let p = params.p;
    let res = integrate_wedge(
        |x| g.magnitude(x).powf(p) * wedge.mixed_weight(x, params),
        wedge,
        rule,
    )?;
    Ok(res.value.max(0.0).powf(1.0 / p))
}

/// Weighted Sobolev norm of order `n` in {0, 1, 2}:
/// `(sum_{|alpha| <= n} int |rho^{|alpha|} D^alpha u|^p weight)^{1/p}`,
/// with the boundary distance rho compensating each derivative. Orders
/// whose derivatives the field does not carry yield a contract error.
pub fn sobolev_norm(
    u: &ScalarField,
    order: usize,
    wedge: &Wedge,
    params: &WeightParams,
    rule: &WedgeQuadRule,
) -> Result<f64> {
    if order > 2 {
        return Err(WedgeError::Contract(format!(
            "sobolev_norm supports orders 0..=2, got {order}"
        )));
    }
    if order >= 1 && u.grad.is_none() {
        return Err(WedgeError::Contract("order >= 1 requires a gradient".into()));
    }
    if order >= 2 && u.hess.is_none() {
        return Err(WedgeError::Contract("order 2 requires a Hessian".into()));
    }
    let p = params.p;
    let res = integrate_wedge(
        |x| {
            let rho = wedge.dist_to_boundary(x);
            let mut acc = u.eval(x).abs().powf(p);
            if order >= 1 {
                let (g1, g2) = u.gradient(x).unwrap();
                acc += (rho * g1.abs()).powf(p) + (rho * g2.abs()).powf(p);
            }
            if order >= 2 {
                let (h11, h12, h22) = u.hessian(x).unwrap();
                let r2 = rho * rho;
                acc += (r2 * h11.abs()).powf(p)
                    + (r2 * h12.abs()).powf(p)
                    + (r2 * h22.abs()).powf(p);
            }
            acc * wedge.mixed_weight(x, params)
        },
        wedge,
        rule,
    )?;
    Ok(res.value.max(0.0).powf(1.0 / p))
}

/// Smooth radial bump supported on the annulus `e^{-1} < s < e`, peak 1
/// at s = 1, used to localize a field onto dyadic annuli.
#[derive(Clone)]
pub struct DyadicBump {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    s_lo: f64,
    s_hi: f64,
}

impl DyadicBump {
    /// The log-radial mollifier `exp(1 - 1/(1 - (ln s)^2))`.
    pub fn standard() -> Self {
        DyadicBump {
            func: Arc::new(|s: f64| {
                let v = s.ln();
                if v.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - v * v)).exp()
                }
            }),
            s_lo: (-1.0_f64).exp(),
            s_hi: 1.0_f64.exp(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.func)(s)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.s_lo, self.s_hi)
    }

    /// Lower bound on `inf_t sum_n xi(e^{n+t})`: the translated copies must
    /// cover the radial axis with a uniform margin for the localization to
    /// be an equivalence.
    pub fn covering_constant(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..400 {
            let t = i as f64 / 400.0;
            let mut sum = 0.0;
            for n in -3i32..=3 {
                sum += self.eval((n as f64 + t).exp());
            }
            min = min.min(sum);
        }
        min
    }
}

/// Outcome of [`dyadic_equivalence_check`]: the full mixed-weight integral
/// of |u|^p against the dyadic-annulus sum, with both comparison ratios.
#[derive(Debug, Clone)]
pub struct DyadicReport {
    /// `int |u|^p rho_o^{theta-2} (rho/rho_o)^{Theta-2} dx`.
    pub lhs: f64,
    /// `sum_n e^{n theta} int |xi(|x|) u(e^n x)|^p (rho/rho_o)^{Theta-2} dx`.
    pub rhs: f64,
    pub ratio_lhs_over_rhs: f64,
    pub ratio_rhs_over_lhs: f64,
    pub n_min: i64,
    pub n_max: i64,
    /// Both sides vanished; the ratios are meaningless.
    pub degenerate: bool,
}

/// Compare the mixed-weight integral of |u|^p with its dyadic-annulus
/// localization. The vertex weight appears only through the geometric
/// factors `e^{n theta}` on the right-hand side; the per-annulus integrals
/// carry the boundary factor alone. Requires a support radius on `u` to
/// bound the sum from above; the sum is truncated below once terms fall
/// under 1e-14 of the running total.
pub fn dyadic_equivalence_check(
    u: &ScalarField,
    wedge: &Wedge,
    params: &WeightParams,
    bump: &DyadicBump,
    resolution: usize,
) -> Result<DyadicReport> {
    let support = u.support_radius().ok_or_else(|| {
        WedgeError::Contract("dyadic localization requires a support radius".into())
    })?;
    let c = bump.covering_constant();
    if !(c > 1e-6) {
        return Err(WedgeError::Contract(format!(
            "dyadic bump fails the covering condition (constant {c:e})"
        )));
    }
    let (s_lo, s_hi) = bump.support();
    let annulus = WedgeQuadRule::annulus(wedge.kappa0(), s_lo, s_hi, resolution, resolution)?;
    let angular_only = WeightParams::new(params.p, params.big_theta, 2.0)?;

    let term = |n: i64| -> Result<f64> {
        let scaled = u.dilated((n as f64).exp());
        let res = integrate_wedge(
            |x| {
                let xi = bump.eval(x.r());
                if xi == 0.0 {
                    return 0.0;
                }
                (xi * scaled.eval(x)).abs().powf(params.p)
                    * wedge.mixed_weight(x, &angular_only)
            },
            wedge,
            &annulus,
        )?;
        Ok((n as f64 * params.theta).exp() * res.value)
    };

    // Upward the support radius caps the range exactly; downward the terms
    // of any convergent localization decay geometrically.
    let n_max = (support / s_lo).ln().ceil() as i64;
    let mut rhs = 0.0;
    let mut n_min = n_max;
    let mut small_streak = 0;
    let mut n = n_max;
    while n >= -120 {
        let t = term(n)?;
        rhs += t;
        n_min = n;
        if t <= 1e-14 * rhs && rhs > 0.0 {
            small_streak += 1;
            if small_streak >= 4 {
                break;
            }
        } else {
            small_streak = 0;
        }
        n -= 1;
    }

    let lhs_rule = WedgeQuadRule::graded(
        wedge.kappa0(),
        support,
        (2 * resolution).max(8),
        resolution.max(8),
    )?;
    let lhs = integrate_wedge(
        |x| u.eval(x).abs().powf(params.p) * wedge.mixed_weight(x, params),
        wedge,
        &lhs_rule,
    )?
    .value;

    let degenerate = lhs <= 0.0 && rhs <= 0.0;
    Ok(DyadicReport {
        lhs,
        rhs,
        ratio_lhs_over_rhs: if degenerate { f64::NAN } else { lhs / rhs },
        ratio_rhs_over_lhs: if degenerate { f64::NAN } else { rhs / lhs },
        n_min,
        n_max,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn indicator_annulus() -> ScalarField {
        ScalarField::from_fn(|x| if (1.0..=2.0).contains(&x.r()) { 1.0 } else { 0.0 })
            .with_support_radius(2.0)
    }

    /// C^2 radial cap (1 - (r/4)^2)_+^3 with support radius 4.
    fn smooth_cap() -> ScalarField {
        ScalarField::from_fn(|x| {
            let s = 1.0 - (x.r() / 4.0).powi(2);
            if s > 0.0 {
                s.powi(3)
            } else {
                0.0
            }
        })
        .with_support_radius(4.0)
    }

    #[test]
    fn unweighted_annulus_norm() {
        let wedge = Wedge::new(PI).unwrap();
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let rule = WedgeQuadRule::annulus(PI, 1.0, 2.0, 8, 8).unwrap();
        let n = lp_norm(&indicator_annulus(), &wedge, &params, &rule).unwrap();
        // area of the upper half annulus: 3*pi/2
        assert_relative_eq!(n, 2.170_803_763_674_803, max_relative = 1e-10);
    }

    #[test]
    fn vertex_weighted_half_disc() {
        let wedge = Wedge::new(PI).unwrap();
        let disc = ScalarField::from_fn(|x| if x.r() <= 1.0 { 1.0 } else { 0.0 })
            .with_support_radius(1.0);
        let rule = WedgeQuadRule::graded(PI, 1.0, 10, 10).unwrap();
        // theta = 3: weight rho_o, integral pi/3
        let params = WeightParams::new(2.0, 2.0, 3.0).unwrap();
        let n = lp_norm(&disc, &wedge, &params, &rule).unwrap();
        assert_relative_eq!(n, 1.023_326_707_946_488_5, max_relative = 1e-9);
        // Theta = 3: weight rho/rho_o = sin(angle), integral 1
        let params = WeightParams::new(2.0, 3.0, 2.0).unwrap();
        let n = lp_norm(&disc, &wedge, &params, &rule).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn sobolev_linear_field() {
        let wedge = Wedge::new(PI).unwrap();
        // u = x2 on the half disc: grad (0,1), rho = x2 on the half-plane,
        // so both contributions equal int x2^2 = pi/8
        let u = ScalarField::from_fn(|x| if x.r() <= 1.0 { x.x2() } else { 0.0 })
            .with_gradient(|x| if x.r() <= 1.0 { (0.0, 1.0) } else { (0.0, 0.0) })
            .with_support_radius(1.0);
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let rule = WedgeQuadRule::graded(PI, 1.0, 10, 10).unwrap();
        let n = sobolev_norm(&u, 1, &wedge, &params, &rule).unwrap();
        assert_relative_eq!(n, 0.886_226_925_452_758, max_relative = 1e-9);
        // order 0 coincides with the plain norm and bounds it from below
        let n0 = sobolev_norm(&u, 0, &wedge, &params, &rule).unwrap();
        let plain = lp_norm(&u, &wedge, &params, &rule).unwrap();
        assert_relative_eq!(n0, plain, max_relative = 1e-13);
        assert!(n >= n0);
    }

    #[test]
    fn sobolev_contract_errors() {
        let wedge = Wedge::new(PI).unwrap();
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let rule = WedgeQuadRule::graded(PI, 1.0, 4, 4).unwrap();
        let bare = ScalarField::from_fn(|x| x.x2());
        assert!(matches!(
            sobolev_norm(&bare, 1, &wedge, &params, &rule),
            Err(WedgeError::Contract(_))
        ));
        let with_grad = bare.clone().with_gradient(|_| (0.0, 1.0));
        assert!(matches!(
            sobolev_norm(&with_grad, 2, &wedge, &params, &rule),
            Err(WedgeError::Contract(_))
        ));
        assert!(matches!(
            sobolev_norm(&with_grad, 3, &wedge, &params, &rule),
            Err(WedgeError::Contract(_))
        ));
        // full data at order 2 goes through
        let full = with_grad.with_hessian(|_| (0.0, 0.0, 0.0)).with_support_radius(1.0);
        assert!(sobolev_norm(&full, 2, &wedge, &params, &rule).is_ok());
    }

    #[test]
    fn sequence_field_magnitude() {
        let wedge = Wedge::new(PI).unwrap();
        let g = SequenceField::new(vec![
            ScalarField::from_fn(|_| 3.0),
            ScalarField::from_fn(|_| 4.0),
        ]);
        let x = wedge.point(1.0, 1.0).unwrap();
        assert_relative_eq!(g.magnitude(&x), 5.0, max_relative = 1e-14);
        // the norm of the pair equals the norm of the constant magnitude
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let rule = WedgeQuadRule::graded(PI, 1.0, 6, 6).unwrap();
        let n_seq = lp_norm_seq(&g, &wedge, &params, &rule).unwrap();
        let n_mag =
            lp_norm(&ScalarField::from_fn(|_| 5.0), &wedge, &params, &rule).unwrap();
        assert_relative_eq!(n_seq, n_mag, max_relative = 1e-12);
    }

    #[test]
    fn monotone_in_boundary_exponent() {
        // rho/rho_o <= 1, so raising Theta can only shrink the norm
        let wedge = Wedge::new(1.2).unwrap();
        let u = smooth_cap();
        let rule = WedgeQuadRule::graded(1.2, 4.0, 10, 10).unwrap();
        let mut prev = f64::INFINITY;
        for big_theta in [1.5, 2.0, 2.5, 3.0] {
            let params = WeightParams::new(2.0, big_theta, 2.0).unwrap();
            let n = lp_norm(&u, &wedge, &params, &rule).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn dilation_homogeneity(
            a in 0.6_f64..1.8,
            theta in 1.2_f64..3.0,
            big_theta in 1.3_f64..2.8,
        ) {
            // ||u(a .)||^p = a^{-theta} ||u||^p for every (p, Theta, theta)
            let wedge = Wedge::new(PI / 2.0).unwrap();
            let params = WeightParams::new(2.0, big_theta, theta).unwrap();
            let u = smooth_cap();
            let rule = WedgeQuadRule::graded(PI / 2.0, 4.0, 10, 10).unwrap();
            let base = lp_norm(&u, &wedge, &params, &rule).unwrap().powf(params.p);
            let scaled_rule =
                WedgeQuadRule::graded(PI / 2.0, 4.0 / a, 10, 10).unwrap();
            let scaled =
                lp_norm(&u.dilated(a), &wedge, &params, &scaled_rule).unwrap().powf(params.p);
            prop_assert!(
                (scaled - a.powf(-theta) * base).abs() <= 1e-6 * base,
                "a={a} theta={theta}: {scaled} vs {}", a.powf(-theta) * base
            );
        }
    }

    #[test]
    fn dyadic_bump_covering() {
        let bump = DyadicBump::standard();
        assert_eq!(bump.eval(1.0), 1.0);
        assert_eq!(bump.eval(0.3), 0.0);
        assert_eq!(bump.eval(3.0), 0.0);
        assert!(bump.covering_constant() >= 0.9);
    }

    #[test]
    fn dyadic_equivalence_smooth_field() {
        let wedge = Wedge::new(PI).unwrap();
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let bump = DyadicBump::standard();
        let u = smooth_cap();
        let coarse = dyadic_equivalence_check(&u, &wedge, &params, &bump, 8).unwrap();
        assert!(!coarse.degenerate);
        assert!(coarse.lhs > 0.0 && coarse.rhs > 0.0);
        assert!(coarse.ratio_lhs_over_rhs.is_finite());
        assert!((0.05..20.0).contains(&coarse.ratio_lhs_over_rhs));
        // the ratio is a genuine equivalence constant: refining the
        // per-annulus rule barely moves it
        let fine = dyadic_equivalence_check(&u, &wedge, &params, &bump, 16).unwrap();
        assert_relative_eq!(
            coarse.ratio_lhs_over_rhs,
            fine.ratio_lhs_over_rhs,
            max_relative = 1e-3
        );
    }

    #[test]
    fn dyadic_rescaling_shift() {
        // u(e x) shifts the annulus index by one, so both sides scale by
        // exactly e^{-theta}
        let wedge = Wedge::new(PI).unwrap();
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let bump = DyadicBump::standard();
        let u = smooth_cap();
        let base = dyadic_equivalence_check(&u, &wedge, &params, &bump, 10).unwrap();
        let shifted =
            dyadic_equivalence_check(&u.dilated(1.0_f64.exp()), &wedge, &params, &bump, 10)
                .unwrap();
        let factor = (-params.theta).exp();
        assert_relative_eq!(shifted.rhs, factor * base.rhs, max_relative = 1e-8);
        assert_relative_eq!(shifted.lhs, factor * base.lhs, max_relative = 1e-6);
    }

    #[test]
    fn dyadic_zero_field_degenerate() {
        let wedge = Wedge::new(PI).unwrap();
        let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
        let bump = DyadicBump::standard();
        let zero = ScalarField::from_fn(|_| 0.0).with_support_radius(1.0);
        let report = dyadic_equivalence_check(&zero, &wedge, &params, &bump, 6).unwrap();
        assert!(report.degenerate);
        // missing support radius is a contract violation
        let free = ScalarField::from_fn(|_| 0.0);
        assert!(matches!(
            dyadic_equivalence_check(&free, &wedge, &params, &bump, 6),
            Err(WedgeError::Contract(_))
        ));
    }
}
