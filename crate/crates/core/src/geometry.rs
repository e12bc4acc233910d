//! The angular domain, its two distance functions, the mixed weight, and
//! the dimensionless vertex/boundary attenuation factors.

use crate::error::{Result, WedgeError};
use serde::Serialize;

/// Interior point of the wedge, stored polar-first with a cached
/// Cartesian form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgePoint {
    r: f64,
    angle: f64,
    x1: f64,
    x2: f64,
}

impl WedgePoint {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn cartesian(&self) -> (f64, f64) {
        (self.x1, self.x2)
    }

    /// Dilated point a·x, same angle.
    pub fn scaled(&self, a: f64) -> WedgePoint {
        WedgePoint { r: self.r * a, angle: self.angle, x1: self.x1 * a, x2: self.x2 * a }
    }

    /// Euclidean distance |x - y|.
    pub fn dist(&self, other: &WedgePoint) -> f64 {
        ((self.x1 - other.x1).powi(2) + (self.x2 - other.x2).powi(2)).sqrt()
    }
}

/// The open planar wedge of opening angle `kappa0` with vertex at the
/// origin. `kappa0 = pi` (half-plane) and `kappa0 = 2*pi` (slit plane,
/// the two edge rays counted as distinct) are admissible.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Wedge {
    kappa0: f64,
}

impl Wedge {
    pub fn new(kappa0: f64) -> Result<Self> {
        if !kappa0.is_finite() || kappa0 <= 0.0 || kappa0 > 2.0 * std::f64::consts::PI {
            return Err(WedgeError::Domain(format!(
                "opening angle must lie in (0, 2*pi], got {kappa0}"
            )));
        }
        Ok(Wedge { kappa0 })
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// Interior point from polar coordinates; rejects the vertex and the
    /// edge rays (the weights are singular there).
    pub fn point(&self, r: f64, angle: f64) -> Result<WedgePoint> {
        if !(r.is_finite() && r > 0.0) {
            return Err(WedgeError::Domain(format!("radius must be positive, got {r}")));
        }
        if !(angle.is_finite() && angle > 0.0 && angle < self.kappa0) {
            return Err(WedgeError::Domain(format!(
                "angle must lie in (0, {}), got {angle}",
                self.kappa0
            )));
        }
        Ok(WedgePoint { r, angle, x1: r * angle.cos(), x2: r * angle.sin() })
    }

    /// Distance to the vertex: |x| = r.
    pub fn dist_to_vertex(&self, x: &WedgePoint) -> f64 {
        x.r
    }

    /// Distance to the boundary: minimum over the two edge rays of the
    /// point-to-ray distance. For a ray at angular offset phi the distance
    /// is r·sin(phi) when phi <= pi/2 and r beyond that (the nearest point
    /// of the ray is then the vertex).
    pub fn dist_to_boundary(&self, x: &WedgePoint) -> f64 {
        let ray = |phi: f64| if phi <= std::f64::consts::FRAC_PI_2 { x.r * phi.sin() } else { x.r };
        ray(x.angle).min(ray(self.kappa0 - x.angle))
    }

    /// R_{x,c} = |x| / (sqrt(c) + |x|), in (0,1).
    pub fn r_factor(&self, x: &WedgePoint, c: f64) -> Result<f64> {
        if !(c.is_finite() && c > 0.0) {
            return Err(WedgeError::Domain(format!("r_factor requires c > 0, got {c}")));
        }
        Ok(x.r / (c.sqrt() + x.r))
    }

    /// J_{x,c} = rho(x) / (sqrt(c) + rho(x)), in (0,1).
    pub fn j_factor(&self, x: &WedgePoint, c: f64) -> Result<f64> {
        if !(c.is_finite() && c > 0.0) {
            return Err(WedgeError::Domain(format!("j_factor requires c > 0, got {c}")));
        }
        let rho = self.dist_to_boundary(x);
        Ok(rho / (c.sqrt() + rho))
    }

    /// Mixed weight rho_o(x)^{theta-2} (rho(x)/rho_o(x))^{Theta-2}.
    pub fn mixed_weight(&self, x: &WedgePoint, params: &WeightParams) -> f64 {
        let rho_o = self.dist_to_vertex(x);
        let ratio = self.dist_to_boundary(x) / rho_o;
        rho_o.powf(params.theta - 2.0) * ratio.powf(params.big_theta - 2.0)
    }
}

/// The weight triple (p, Theta, theta) of the mixed-weight `L_p` spaces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightParams {
    pub p: f64,
    /// Boundary exponent Theta.
    pub big_theta: f64,
    /// Vertex exponent theta.
    pub theta: f64,
}

impl WeightParams {
    pub fn new(p: f64, big_theta: f64, theta: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(WedgeError::Domain(format!("p must exceed 1, got {p}")));
        }
        if !big_theta.is_finite() || !theta.is_finite() {
            return Err(WedgeError::Domain("weight exponents must be finite".into()));
        }
        Ok(WeightParams { p, big_theta, theta })
    }

    /// Dual exponent p' = p/(p-1).
    pub fn dual(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Same p with both weight exponents shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> WeightParams {
        WeightParams { p: self.p, big_theta: self.big_theta + delta, theta: self.theta + delta }
    }

    /// True iff (p, Theta, theta) lies in the admissible open range
    /// p(1 - pi/kappa0) < theta < p(1 + pi/kappa0) and 1 < Theta < p+1.
    pub fn in_admissible_range(&self, kappa0: f64) -> bool {
        let lam = std::f64::consts::PI / kappa0;
        self.theta > self.p * (1.0 - lam)
            && self.theta < self.p * (1.0 + lam)
            && self.big_theta > 1.0
            && self.big_theta < self.p + 1.0
    }
}
