//! End-to-end acceptance suite: one test per verified claim, each
//! emitting a single pass/fail line. Tolerances and runtime budgets are
//! asserted, so a regression in accuracy or speed fails loudly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};
use wedge_core::convolution::{mc_sample, stoch_variance};
use wedge_core::kernel::{eval, eval_images, survival_mass};
use wedge_core::lemmas::{
    check_green_bound, check_lemma_a2s, check_lemma_at, check_lemma_b1a1s, check_lemma_b1b2s,
    check_lemma_combined, stratified_grid,
};
use wedge_core::norms::{dyadic_equivalence_check, DyadicBump};
use wedge_core::quad::integrate_wedge;
use wedge_core::theorems::{
    regularity_probe, verify_deterministic_estimate, verify_stochastic_estimate,
};
use wedge_core::{
    ConvRules, KernelConfig, RefinementPlan, ScalarField, TestField, Verdict, WedgeQuadRule,
    WeightParams,
};

fn report(name: &str, ok: bool, detail: &str) {
    println!("acceptance {name}: {} ({detail})", if ok { "pass" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn within(elapsed: Duration, budget_s: u64, name: &str) {
    assert!(
        elapsed <= Duration::from_secs(budget_s),
        "{name} exceeded its {budget_s}s budget: {elapsed:?}"
    );
}

#[test]
fn a01_kernel_matches_reflection_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0_f64;
    for &k0 in &[PI, PI / 2.0] {
        let cfg = KernelConfig::new(k0).unwrap();
        let w = cfg.wedge();
        for _ in 0..100 {
            let t = rng.gen_range(0.05..4.0);
            let x = w.point(rng.gen_range(0.1..2.5), k0 * rng.gen_range(0.2..0.8)).unwrap();
            let y = w.point(rng.gen_range(0.1..2.5), k0 * rng.gen_range(0.2..0.8)).unwrap();
            let series = eval(t, &x, &y, &cfg).unwrap();
            let oracle = eval_images(t, &x, &y, k0).unwrap();
            worst = worst.max((series - oracle).abs() / oracle.abs().max(1e-300));
        }
    }
    within(start.elapsed(), 10, "kernel-oracle");
    report("kernel-oracle", worst <= 1e-8, &format!("max rel err {worst:.2e} over 200 samples"));
}

#[test]
fn a02_semigroup_identity() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut n = 0;
    for &k0 in &[PI / 2.0, PI, 1.5 * PI, 2.0 * PI] {
        let cfg = KernelConfig::new(k0).unwrap();
        let w = cfg.wedge();
        let configs: [(f64, f64, (f64, f64), (f64, f64)); 5] = [
            (0.1, 0.2, (0.8, 0.3), (1.4, 0.7)),
            (0.5, 0.5, (1.0, 0.5), (1.0, 0.25)),
            (1.0, 0.3, (0.6, 0.6), (2.0, 0.4)),
            (0.25, 0.75, (1.5, 0.2), (0.5, 0.8)),
            (2.0, 0.4, (1.2, 0.45), (0.9, 0.55)),
        ];
        for &(t1, t2, (rx, fx), (ry, fy)) in &configs {
            let x = w.point(rx, fx * k0).unwrap();
            let y = w.point(ry, fy * k0).unwrap();
            let direct = eval(t1 + t2, &x, &y, &cfg).unwrap();
            let r_top = x.r().max(y.r()) + (37.0_f64 * 4.0 * t1.max(t2)).sqrt();
            let mid = (0.5 * (x.r() + y.r()), 0.5 * (x.angle() + y.angle()));
            let hw = 6.0 * (4.0 * t1.min(t2)).sqrt();
            let rule =
                WedgeQuadRule::with_window(k0, r_top, 12, 10, Some((mid.0, mid.1, hw))).unwrap();
            let conv = integrate_wedge(
                |z| eval(t1, &x, z, &cfg).unwrap() * eval(t2, z, &y, &cfg).unwrap(),
                &w,
                &rule,
            )
            .unwrap();
            worst = worst.max((conv.value - direct).abs());
            n += 1;
        }
    }
    within(start.elapsed(), 120, "semigroup-identity");
    report(
        "semigroup-identity",
        worst <= 1e-6,
        &format!("max abs defect {worst:.2e} over {n} configs"),
    );
}

#[test]
fn a03_survival_mass_half_plane() {
    let cfg = KernelConfig::new(PI).unwrap();
    let x = cfg.wedge().point(1.0, PI / 2.0).unwrap();
    let mass = survival_mass(1.0, &x, &cfg).unwrap();
    let expected = 0.520_499_877_813_046_5; // erf(1/2)
    report(
        "survival-mass",
        (mass - expected).abs() <= 1e-6,
        &format!("mass {mass:.10} vs erf(1/2) {expected:.10}"),
    );
}

#[test]
fn a04_scaling_integral_closed_form() {
    let start = Instant::now();
    let a_grid = [1e-3, 1.0, 1e3];
    let mut ok = true;
    let mut detail = String::new();
    for alpha in [0.5, 1.0, 2.0] {
        let rep = check_lemma_at(alpha, &a_grid).unwrap();
        let closed = 2.0 / (alpha * (alpha + 1.0));
        let err = rep.rows.iter().map(|&(_, v)| (v - closed).abs()).fold(0.0, f64::max);
        ok &= err <= 1e-6
            && rep.spread <= 1e-9
            && rep.rows.iter().all(|&(_, v)| v <= 2.0 / alpha);
        detail.push_str(&format!("alpha={alpha}: err {err:.1e} spread {:.1e}; ", rep.spread));
    }
    within(start.elapsed(), 1, "scaling-integral");
    report("scaling-integral", ok, detail.trim_end_matches("; "));
}

#[test]
fn a05_weighted_gaussian_integral_verdicts() {
    let start = Instant::now();
    let plan = RefinementPlan::default();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut run = |name: &str, verdict: Verdict, expect: Verdict| {
        lines.push(format!("{name}={verdict}"));
        ok &= verdict == expect;
    };

    let half = stratified_grid(&KernelConfig::new(PI).unwrap().wedge()).unwrap();
    let v = check_lemma_b1b2s(1.0, 0.0, 0.0, PI, &half, &plan).unwrap().verdict;
    run("b1b2s(0,0)", v, Verdict::Bounded);
    let v = check_lemma_b1b2s(1.0, -1.0, -0.5, PI, &half, &plan).unwrap().verdict;
    run("b1b2s(-1,-0.5)", v, Verdict::Bounded);
    let v = check_lemma_b1b2s(1.0, 0.0, -1.2, PI, &half, &plan).unwrap().verdict;
    run("b1b2s(0,-1.2)", v, Verdict::Diverging);

    let radii = [0.01, 1.0, 100.0];
    let v = check_lemma_b1a1s(2, 1.0, 0.0, 0.0, &radii, &plan).unwrap().verdict;
    run("b1a1s(0,0)", v, Verdict::Bounded);
    let v = check_lemma_b1a1s(2, 1.0, -2.0, 0.0, &radii, &plan).unwrap().verdict;
    run("b1a1s(-2,0)", v, Verdict::Bounded);
    let v = check_lemma_b1a1s(2, 1.0, 0.0, -2.5, &radii, &plan).unwrap().verdict;
    run("b1a1s(0,-2.5)", v, Verdict::Diverging);

    let wide = stratified_grid(&KernelConfig::new(1.5 * PI).unwrap().wedge()).unwrap();
    let narrow = stratified_grid(&KernelConfig::new(PI / 2.0).unwrap().wedge()).unwrap();
    let v = check_lemma_a2s(1.0, 0.0, PI, &half, &plan).unwrap().verdict;
    run("a2s(0)", v, Verdict::Bounded);
    let v = check_lemma_a2s(1.0, 3.0, 1.5 * PI, &wide, &plan).unwrap().verdict;
    run("a2s(3)", v, Verdict::Bounded);
    let v = check_lemma_a2s(1.0, -3.0, PI / 2.0, &narrow, &plan).unwrap().verdict;
    run("a2s(-3)", v, Verdict::Bounded);

    let dts = [1e-2, 1.0, 1e2];
    let v = check_lemma_combined(1.0, 0.0, 0.0, 0.0, 0.0, PI, &half, &dts, &plan)
        .unwrap()
        .verdict;
    run("combined(0)", v, Verdict::Bounded);
    let v = check_lemma_combined(1.0, -1.0, -0.5, 1.0, -1.0, PI, &half, &dts, &plan)
        .unwrap()
        .verdict;
    run("combined(-1,-0.5)", v, Verdict::Bounded);
    let v = check_lemma_combined(1.0, -1.0, -1.2, 0.0, 0.0, PI, &half, &dts, &plan)
        .unwrap()
        .verdict;
    run("combined(-1,-1.2)", v, Verdict::Diverging);

    within(start.elapsed(), 600, "weighted-integral-verdicts");
    report("weighted-integral-verdicts", ok, &lines.join(" "));
}

#[test]
fn a06_combined_study_scale_invariance() {
    let xs = stratified_grid(&KernelConfig::new(PI).unwrap().wedge()).unwrap();
    let rep = check_lemma_combined(
        1.0,
        -1.0,
        -0.5,
        1.0,
        -1.0,
        PI,
        &xs,
        &[1e-2, 1.0, 1e2],
        &RefinementPlan::default(),
    )
    .unwrap();
    let spread = rep
        .params
        .iter()
        .find(|(k, _)| k == "scaled_spread")
        .map(|&(_, v)| v)
        .expect("scaled_spread recorded");
    report(
        "combined-scale-invariance",
        rep.verdict == Verdict::Bounded && spread <= 0.05,
        &format!("scaled grid-max spread {:.2}% across three decades of t-s", 100.0 * spread),
    );
}

#[test]
fn a07_kernel_bound_empirical_constant() {
    let start = Instant::now();
    let plan = RefinementPlan { base_n: 4, levels: 5 };
    let mut ok = true;
    let mut lines = Vec::new();
    for &k0 in &[PI / 2.0, PI, 1.5 * PI] {
        let cfg = KernelConfig::new(k0).unwrap();
        let lam = 0.9 * PI / k0;
        let rep = check_green_bound(k0, lam, lam, 0.25, &cfg, &plan).unwrap();
        let sigma = rep.params.iter().find(|(k, _)| k == "sigma").unwrap().1;
        ok &= rep.verdict == Verdict::Bounded;
        lines.push(format!(
            "kappa0={k0:.3}: {} C={:.3} at sigma={sigma:.4e}",
            rep.verdict, rep.grid_max
        ));
    }
    within(start.elapsed(), 300, "kernel-bound-constant");
    report("kernel-bound-constant", ok, &lines.join("; "));
}

/// Driving fields concentrated well inside the first space-time cell so
/// the solution statistics equilibrate before the shortest horizon.
fn small_scale_fields(cfg: &KernelConfig) -> Vec<TestField> {
    let w = cfg.wedge();
    vec![
        TestField::semigroup(0.1, w.point(0.15, PI / 2.0).unwrap(), cfg).unwrap(),
        TestField::bump(w.point(0.15, PI / 2.0).unwrap(), 0.08, &w).unwrap(),
        TestField::vertex_power(0.2, 0.2, &w).unwrap(),
    ]
}

#[test]
fn a08a_stochastic_estimate_t_stable() {
    let start = Instant::now();
    let cfg = KernelConfig::new(PI).unwrap();
    let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
    let rules = ConvRules { n_time: 6, n_space: 5, n_inner: 3 };
    let table = verify_stochastic_estimate(
        &params,
        PI,
        &small_scale_fields(&cfg),
        &[0.25, 1.0, 4.0],
        &cfg,
        &rules,
    )
    .unwrap();
    within(start.elapsed(), 600, "stochastic-estimate");
    report(
        "stochastic-estimate",
        table.pass,
        &format!(
            "max ratio {:.4}, per-T maxima within {:.1}% of median",
            table.max_ratio,
            100.0 * table.t_variation
        ),
    );
}

#[test]
fn a08b_deterministic_estimate_t_stable() {
    let start = Instant::now();
    let cfg = KernelConfig::new(PI).unwrap();
    let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
    let rules = ConvRules { n_time: 5, n_space: 4, n_inner: 3 };
    let table = verify_deterministic_estimate(
        &params,
        PI,
        &small_scale_fields(&cfg),
        &[0.25, 1.0, 4.0],
        &cfg,
        &rules,
    )
    .unwrap();
    within(start.elapsed(), 600, "deterministic-estimate");
    report(
        "deterministic-estimate",
        table.pass,
        &format!(
            "max ratio {:.4}, per-T maxima within {:.1}% of median",
            table.max_ratio,
            100.0 * table.t_variation
        ),
    );
}

#[test]
fn a09_gaussian_moment_reduction() {
    let start = Instant::now();
    let cfg = KernelConfig::new(PI).unwrap();
    let w = cfg.wedge();
    let field = TestField::semigroup(0.3, w.point(1.0, PI / 2.0).unwrap(), &cfg).unwrap();
    let rules = ConvRules::default();
    let t = 0.8;
    let mut ok = true;
    let mut worst = 0.0_f64;
    for (r, a) in [(0.5, 1.0), (1.1, 1.2), (1.0, 2.5), (2.0, 0.8), (0.3, 1.8)] {
        let x = w.point(r, a).unwrap();
        let var = stoch_variance(&field, t, &x, &cfg, &rules).unwrap();
        let (m2, se2) = mc_sample(&field, t, &x, 2.0, 10_000, 128, 11, &cfg, &rules).unwrap();
        let (m4, se4) = mc_sample(&field, t, &x, 4.0, 10_000, 128, 11, &cfg, &rules).unwrap();
        let d2 = (m2 - var).abs() / se2;
        let d4 = (m4 - 3.0 * var * var).abs() / se4;
        worst = worst.max(d2).max(d4);
        ok &= d2 <= 3.0 && d4 <= 3.0;
    }
    within(start.elapsed(), 300, "gaussian-reduction");
    report(
        "gaussian-reduction",
        ok,
        &format!("worst moment deviation {worst:.2} standard errors at 1e4 paths"),
    );
}

#[test]
fn a10_vertex_exponent_slopes() {
    let start = Instant::now();
    let rules = ConvRules { n_time: 5, n_space: 4, n_inner: 3 };
    let mut ok = true;
    let mut lines = Vec::new();
    for &k0 in &[PI / 2.0, PI, 2.0 * PI] {
        let cfg = KernelConfig::new(k0).unwrap();
        let w = cfg.wedge();
        let g = TestField::semigroup(0.2, w.point(2.0, k0 / 2.0).unwrap(), &cfg).unwrap();
        let fit =
            regularity_probe(&g, 0.5, k0 / 2.0, &[0.01, 0.02, 0.05, 0.1, 0.2], &cfg, &rules)
                .unwrap();
        ok &= (fit.slope - fit.expected).abs() <= 0.1;
        lines.push(format!("kappa0={k0:.3}: slope {:.3} vs {:.3}", fit.slope, fit.expected));
    }
    within(start.elapsed(), 300, "vertex-exponent");
    report("vertex-exponent", ok, &lines.join("; "));
}

#[test]
fn a11_dyadic_localization() {
    let wedge = KernelConfig::new(PI).unwrap().wedge();
    let params = WeightParams::new(2.0, 2.0, 2.0).unwrap();
    let bump = DyadicBump::standard();
    let u = ScalarField::from_fn(|x| if (1.0..=2.0).contains(&x.r()) { 1.0 } else { 0.0 })
        .with_support_radius(2.0);
    let coarse = dyadic_equivalence_check(&u, &wedge, &params, &bump, 8).unwrap();
    let fine = dyadic_equivalence_check(&u, &wedge, &params, &bump, 16).unwrap();
    let stable = (coarse.ratio_lhs_over_rhs - fine.ratio_lhs_over_rhs).abs()
        / fine.ratio_lhs_over_rhs
        <= 0.05;
    let finite = !coarse.degenerate
        && coarse.ratio_lhs_over_rhs.is_finite()
        && coarse.ratio_rhs_over_lhs.is_finite();
    // dilating by e shifts every annulus index by one, so the localized
    // sum rescales by exactly e^{-theta}
    let shifted =
        dyadic_equivalence_check(&u.dilated(1.0_f64.exp()), &wedge, &params, &bump, 16).unwrap();
    let factor = (-params.theta).exp();
    let shift_err = (shifted.rhs - factor * fine.rhs).abs() / (factor * fine.rhs);
    report(
        "dyadic-localization",
        finite && stable && shift_err <= 1e-8,
        &format!(
            "two-sided ratios {:.4}/{:.4}, refinement drift {:.2e}, rescale defect {:.2e}",
            coarse.ratio_lhs_over_rhs,
            coarse.ratio_rhs_over_lhs,
            (coarse.ratio_lhs_over_rhs - fine.ratio_lhs_over_rhs).abs(),
            shift_err
        ),
    );
}
