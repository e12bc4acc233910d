//! Dirichlet heat Green function on the wedge.
//!
//! The kernel is evaluated through the angular eigenfunction series
//!
//! ```text
//! G(t,(r,a),(p,b)) = e^{-(r-p)^2/(4t)} / (kappa0 t)
//!                    · sum_k [e^{-z} I_{k pi/kappa0}(z)] sin(k pi a/kappa0) sin(k pi b/kappa0),
//! z = r p / (2t),
//! ```
//!
//! with the Bessel factor kept in scaled form so that every factor stays
//! of moderate magnitude: the only exponential left is `e^{-(r-p)^2/(4t)} <= 1`.
//! Reflection (method-of-images) evaluation for the half- and quarter-plane
//! provides an independent oracle.

use crate::error::{Result, WedgeError};
use crate::geometry::{Wedge, WedgePoint};
use crate::quad::{gaussian_cutoff, integrate_wedge, WedgeQuadRule};
use crate::special::{bessel_i, bessel_i_scaled_ladder};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelConfig {
    pub kappa0: f64,
    /// Target absolute accuracy of the series evaluation.
    pub tol: f64,
    /// Series cap; exceeding it is an accuracy error, not a silent truncation.
    pub max_terms: usize,
}

impl KernelConfig {
    pub fn new(kappa0: f64) -> Result<Self> {
        Self::with_accuracy(kappa0, 1e-12, 1024)
    }

    pub fn with_accuracy(kappa0: f64, tol: f64, max_terms: usize) -> Result<Self> {
        Wedge::new(kappa0)?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(WedgeError::Domain(format!("tol must be positive, got {tol}")));
        }
        if max_terms < 16 {
            return Err(WedgeError::Domain(format!("max_terms must be >= 16, got {max_terms}")));
        }
        Ok(KernelConfig { kappa0, tol, max_terms })
    }

    pub fn wedge(&self) -> Wedge {
        Wedge::new(self.kappa0).expect("validated at construction")
    }
}

/// G(t, x, y) with absolute error at most `cfg.tol`.
///
/// Strictly positive for interior arguments; values that underflow are
/// clamped to the smallest positive double, which is still within `tol`.
pub fn eval(t: f64, x: &WedgePoint, y: &WedgePoint, cfg: &KernelConfig) -> Result<f64> {
    let (sum, pref) = series_sum(t, x, y, cfg, None)?;
    Ok((pref * sum).max(f64::MIN_POSITIVE))
}

/// Shared series core. With `derivative_data` the three sums needed for
/// the spatial gradient at x are accumulated as well.
fn series_sum(
    t: f64,
    x: &WedgePoint,
    y: &WedgePoint,
    cfg: &KernelConfig,
    mut derivative_data: Option<&mut GradSums>,
) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let k0 = cfg.kappa0;
    let (r, a) = (x.r(), x.angle());
    let (p, b) = (y.r(), y.angle());
    let z = r * p / (2.0 * t);
    let pref = (-(r - p) * (r - p) / (4.0 * t)).exp() / (k0 * t);
    // The eigenfunction sum has ~sqrt(z) significant terms of size
    // ~1/sqrt(z), so it stays below this generous constant; far-field
    // evaluations (Gaussian prefactor already negligible) exit without
    // any Bessel work.
    if pref * (1.0 + 10.0 * k0 / PI) < cfg.tol / 2.0 {
        return Ok((0.0, pref));
    }
    let mut sum = 0.0_f64;
    let mut tail_ok = false;
    let mut prev_i = f64::INFINITY;
    // The number of significant terms scales like sqrt(z) (Gaussian decay
    // of the scaled Bessel factor in the order); `max_terms` is a floor on
    // the cap so that small-time near-diagonal evaluations stay reachable.
    let cap = cfg.max_terms.max(((12.0 * z.sqrt() + 64.0) * k0 / PI) as usize);
    let ladder = bessel_i_scaled_ladder(PI / k0, cap, z, derivative_data.is_some())?;
    // sin(k nu1 a), sin(k nu1 b), cos(k nu1 a) by angle addition; the
    // recurrence error grows only linearly in k
    let nu1 = PI / k0;
    let (two_ca, two_cb) = (2.0 * (nu1 * a).cos(), 2.0 * (nu1 * b).cos());
    let (mut sa_prev, mut sa_cur) = (0.0_f64, (nu1 * a).sin());
    let (mut sb_prev, mut sb_cur) = (0.0_f64, (nu1 * b).sin());
    let (mut ca_prev, mut ca_cur) = (1.0_f64, (nu1 * a).cos());
    for k in 1..=cap {
        let nu = k as f64 * nu1;
        let (i, i_next) = match &ladder {
            Some((l, l_next)) => (l[k - 1], l_next.as_ref().map(|v| v[k - 1])),
            None => (
                bessel_i(nu, z, true)?,
                if derivative_data.is_some() {
                    Some(bessel_i(nu + 1.0, z, true)?)
                } else {
                    None
                },
            ),
        };
        // the ladder reports orders past the double-precision shoulder as
        // exact zeros; everything beyond contributes nothing
        if i == 0.0 && k >= 2 {
            tail_ok = true;
            break;
        }
        let sa = sa_cur;
        let sb = sb_cur;
        sum += i * sa * sb;
        if let Some(grad) = derivative_data.as_deref_mut() {
            // d/dz of the scaled Bessel factor
            let di = i_next.expect("requested with the derivative")
                + (nu / z.max(f64::MIN_POSITIVE) - 1.0) * i;
            grad.d_z += di * sa * sb;
            grad.d_a += i * nu * ca_cur * sb;
        }
        (sa_prev, sa_cur) = (sa_cur, two_ca * sa_cur - sa_prev);
        (sb_prev, sb_cur) = (sb_cur, two_cb * sb_cur - sb_prev);
        (ca_prev, ca_cur) = (ca_cur, two_ca * ca_cur - ca_prev);
        // The scaled Bessel factor is strictly decreasing in the order, and
        // past the Gaussian shoulder (nu ~ sqrt(z)) successive ratios keep
        // shrinking, so the tail is bounded by a geometric series at the
        // current ratio.
        let ratio = i / prev_i;
        if k >= 2 && ratio < 1.0 {
            let tail = i * ratio / (1.0 - ratio);
            if pref * (i + tail) * (1.0 + nu) < cfg.tol / 2.0 {
                tail_ok = true;
                break;
            }
        }
        prev_i = i;
    }
    if !tail_ok {
        let nu = cap as f64 * PI / k0;
        let achieved = pref * bessel_i(nu, z, true)? * 2.0;
        return Err(WedgeError::Accuracy { achieved, requested: cfg.tol });
    }
    Ok((sum, pref))
}

#[derive(Default)]
struct GradSums {
    d_z: f64,
    d_a: f64,
}

/// G together with its Cartesian gradient in x, by term-wise series
/// differentiation under the same truncation policy.
pub fn eval_with_gradient(
    t: f64,
    x: &WedgePoint,
    y: &WedgePoint,
    cfg: &KernelConfig,
) -> Result<(f64, f64, f64)> {
    let mut grads = GradSums::default();
    let (sum, pref) = series_sum(t, x, y, cfg, Some(&mut grads))?;
    let (r, a) = (x.r(), x.angle());
    let p = y.r();
    let g = pref * sum;
    // radial derivative: product rule on the prefactor and on z = r p/(2t)
    let dpref_dr = pref * (-(r - p) / (2.0 * t));
    let dg_dr = dpref_dr * sum + pref * grads.d_z * (p / (2.0 * t));
    let dg_da = pref * grads.d_a;
    let (ca, sa) = (a.cos(), a.sin());
    let gx1 = ca * dg_dr - sa / r * dg_da;
    let gx2 = sa * dg_dr + ca / r * dg_da;
    Ok((g.max(f64::MIN_POSITIVE), gx1, gx2))
}

/// Free-plane heat kernel at squared distance d2.
fn free_kernel(t: f64, d2: f64) -> f64 {
    (-d2 / (4.0 * t)).exp() / (4.0 * PI * t)
}

/// Method-of-images kernel for the half-plane (kappa0 = pi) and the
/// quarter-plane (kappa0 = pi/2): signed sum of free-plane kernels over
/// the dihedral image group.
pub fn eval_images(t: f64, x: &WedgePoint, y: &WedgePoint, kappa0: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let (x1, x2) = x.cartesian();
    let (y1, y2) = y.cartesian();
    let d2 = |a: f64, b: f64| (x1 - a) * (x1 - a) + (x2 - b) * (x2 - b);
    if (kappa0 - PI).abs() < 1e-12 {
        Ok(free_kernel(t, d2(y1, y2)) - free_kernel(t, d2(y1, -y2)))
    } else if (kappa0 - PI / 2.0).abs() < 1e-12 {
        Ok(free_kernel(t, d2(y1, y2)) - free_kernel(t, d2(y1, -y2))
            - free_kernel(t, d2(-y1, y2))
            + free_kernel(t, d2(-y1, -y2)))
    } else {
        Err(WedgeError::Domain(format!(
            "image method supports kappa0 in {{pi, pi/2}}, got {kappa0}"
        )))
    }
}

/// Survival mass int_D G(t,x,y) dy, in (0, 1] (sub-Markov property).
pub fn survival_mass(t: f64, x: &WedgePoint, cfg: &KernelConfig) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(WedgeError::Domain(format!("time must be positive, got {t}")));
    }
    let wedge = cfg.wedge();
    let r_max = gaussian_cutoff(x.r(), 1.0 / (4.0 * t));
    let halfwidth = 8.0 * (4.0 * t).sqrt();
    let rule = WedgeQuadRule::with_window(
        cfg.kappa0,
        r_max,
        12,
        10,
        Some((x.r(), x.angle(), halfwidth)),
    )?;
    let res = integrate_wedge(|y| eval(t, x, y, cfg).unwrap_or(f64::NAN), &wedge, &rule)?;
    Ok(res.value)
}

/// Ratio of G(c, x, y) to the kernel-bound envelope
/// `R_x^{l1-1} R_y^{l2-1} J_x J_y e^{-sigma |x-y|^2/c} / c`.
/// Its grid supremum is the empirical constant of the bound.
pub fn bound_ratio(
    c: f64,
    x: &WedgePoint,
    y: &WedgePoint,
    lambda1: f64,
    lambda2: f64,
    sigma: f64,
    cfg: &KernelConfig,
) -> Result<f64> {
    let lam_max = PI / cfg.kappa0;
    for lam in [lambda1, lambda2] {
        if !(lam > 0.0 && lam < lam_max) {
            return Err(WedgeError::Domain(format!(
                "lambda must lie in (0, {lam_max}), got {lam}"
            )));
        }
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(WedgeError::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let wedge = cfg.wedge();
    let g = eval(c, x, y, cfg)?;
    let log_den = (lambda1 - 1.0) * wedge.r_factor(x, c)?.ln()
        + (lambda2 - 1.0) * wedge.r_factor(y, c)?.ln()
        + wedge.j_factor(x, c)?.ln()
        + wedge.j_factor(y, c)?.ln()
        - sigma * x.dist(y).powi(2) / c
        - c.ln();
    let ratio = (g.ln() - log_den).exp();
    if !ratio.is_finite() {
        return Err(WedgeError::Accuracy { achieved: ratio, requested: f64::MAX });
    }
    Ok(ratio)
}
