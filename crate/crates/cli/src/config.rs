//! TOML run configurations, one struct per subcommand. Unknown keys are
//! rejected so a typo fails loudly, and every optional knob has an
//! explicit default so the resolved config embedded in each report is
//! complete.

use serde::{Deserialize, Serialize};
use wedge_core::convolution::TestField;
use wedge_core::lemmas::RefinementPlan;
use wedge_core::{ConvRules, KernelConfig, Result, Wedge, WedgeError};

fn default_tol() -> f64 {
    1e-12
}

fn default_max_terms() -> usize {
    1024
}

fn default_output_dir() -> String {
    ".".into()
}

fn default_base_n() -> usize {
    4
}

fn default_levels() -> usize {
    4
}

fn default_n_time() -> usize {
    6
}

fn default_n_space() -> usize {
    5
}

fn default_n_inner() -> usize {
    3
}

fn default_a_grid() -> Vec<f64> {
    vec![1e-3, 1.0, 1e3]
}

fn default_x_radii() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0, 100.0]
}

fn default_dt_values() -> Vec<f64> {
    vec![1e-2, 1.0, 1e2]
}

fn default_scale() -> f64 {
    1.0
}

/// Quadrature/refinement knobs shared by the kernel-driven subcommands.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RulesBlock {
    pub n_time: usize,
    pub n_space: usize,
    pub n_inner: usize,
}

impl Default for RulesBlock {
    fn default() -> Self {
        RulesBlock {
            n_time: default_n_time(),
            n_space: default_n_space(),
            n_inner: default_n_inner(),
        }
    }
}

impl RulesBlock {
    pub fn to_rules(self) -> ConvRules {
        ConvRules { n_time: self.n_time, n_space: self.n_space, n_inner: self.n_inner }
    }
}

/// Refinement study schedule for the supremum checkers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanBlock {
    pub base_n: usize,
    pub levels: usize,
}

impl Default for PlanBlock {
    fn default() -> Self {
        PlanBlock { base_n: default_base_n(), levels: default_levels() }
    }
}

impl PlanBlock {
    pub fn to_plan(self) -> RefinementPlan {
        RefinementPlan { base_n: self.base_n, levels: self.levels }
    }
}

/// A driving field / forcing, by family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    /// b(y) = G(a, x0, y): kernel slice, exact smoothing closed form.
    Semigroup {
        a: f64,
        /// (radius, angle) of the source point.
        x0: [f64; 2],
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Compactly supported C² cap of the given radius around `center`.
    Bump {
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// b(y) = |y|^gamma for |y| <= r_cut, concentrating at the vertex.
    VertexPower {
        gamma: f64,
        r_cut: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

impl FieldSpec {
    pub fn build(&self, kernel: &KernelConfig) -> Result<TestField> {
        let wedge = kernel.wedge();
        let (field, scale) = match self {
            FieldSpec::Semigroup { a, x0, scale } => {
                (TestField::semigroup(*a, wedge.point(x0[0], x0[1])?, kernel)?, *scale)
            }
            FieldSpec::Bump { center, radius, scale } => {
                (TestField::bump(wedge.point(center[0], center[1])?, *radius, &wedge)?, *scale)
            }
            FieldSpec::VertexPower { gamma, r_cut, scale } => {
                (TestField::vertex_power(*gamma, *r_cut, &wedge)?, *scale)
            }
        };
        Ok(if scale == 1.0 { field } else { field.scaled(scale) })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCmd {
    pub kappa0: f64,
    pub t: f64,
    /// (radius, angle) evaluation points.
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenBoundCmd {
    pub kappa0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// First σ of the downward sweep.
    pub sigma_start: f64,
    #[serde(default)]
    pub plan: PlanBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaB1B2SCmd {
    pub kappa0: f64,
    pub sigma: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(default)]
    pub plan: PlanBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaB1A1SCmd {
    pub d: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_x_radii")]
    pub x_radii: Vec<f64>,
    #[serde(default)]
    pub plan: PlanBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaA2SCmd {
    pub kappa0: f64,
    pub sigma: f64,
    pub alpha: f64,
    #[serde(default)]
    pub plan: PlanBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaCombinedCmd {
    pub kappa0: f64,
    pub sigma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(default = "default_dt_values")]
    pub dt_values: Vec<f64>,
    #[serde(default)]
    pub plan: PlanBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaAtCmd {
    pub alpha: f64,
    #[serde(default = "default_a_grid")]
    pub a_grid: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpCmd {
    pub kappa0: f64,
    pub p: f64,
    pub big_theta: f64,
    pub theta: f64,
    pub t_grid: Vec<f64>,
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub rules: RulesBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessCmd {
    pub kappa0: f64,
    pub p: f64,
    pub big_theta: f64,
    pub theta: f64,
    pub delta: f64,
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub rules: RulesBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityCmd {
    pub kappa0: f64,
    pub field: FieldSpec,
    pub t: f64,
    pub ray_angle: f64,
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub rules: RulesBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AprioriCmd {
    pub kappa0: f64,
    pub big_theta: f64,
    pub theta: f64,
    pub t_end: f64,
    #[serde(default)]
    pub forcing: Option<FieldSpec>,
    #[serde(default)]
    pub noise: Option<FieldSpec>,
    #[serde(default)]
    pub rules: RulesBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

/// Cartesian sweep over scalar parameters of a supremum-study
/// subcommand: `base` holds the full inner config, `vary` maps parameter
/// names to value lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCmd {
    /// One of: lemma-b1b2s, lemma-b1a1s, lemma-a2s, lemma-combined,
    /// green-bound.
    pub subcommand: String,
    pub base: toml::Table,
    pub vary: toml::Table,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

pub fn validated_kernel(kappa0: f64, tol: f64, max_terms: usize) -> Result<KernelConfig> {
    KernelConfig::with_accuracy(kappa0, tol, max_terms)
}

pub fn validated_wedge(kappa0: f64) -> Result<Wedge> {
    Wedge::new(kappa0)
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> std::result::Result<T, String> {
    // toml reports line/column spans in its message
    toml::from_str(text).map_err(|e| e.to_string())
}

pub fn weight_params(p: f64, big_theta: f64, theta: f64) -> Result<wedge_core::WeightParams> {
    wedge_core::WeightParams::new(p, big_theta, theta).map_err(|e| match e {
        WedgeError::Domain(msg) => WedgeError::Domain(format!("weight block: {msg}")),
        other => other,
    })
}
