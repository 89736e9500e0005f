//! Acceptance gate: eight criteria, one printed pass/fail line each.
//!
//! Every tolerance is pinned here, in code. A criterion that cannot be met
//! is asserted anyway and allowed to fail loudly rather than weakened; the
//! one known case is documented at criterion 6.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bilap::energy::{
    energy, gradient, NonlinearitySpec, PotentialSpec, SignConvention,
};
use bilap::exponents::{
    origin_window, power_law_report, region_contains, ExponentWindow, GrowthParams, RegionSpec,
};
use bilap::grid::{build_grid, DimensionContext, RadialField, RadialGrid, SpacingMode};
use bilap::solve::{minimize, mountain_pass, Classification, SolverConfig};
use bilap::verify::{
    check_decay_inner, check_decay_outer, check_pointwise, estimate_s, per_trial_rng,
    random_bump_field, BoundKind, Side,
};

fn ctx5() -> DimensionContext {
    DimensionContext::new(5).unwrap()
}

fn report(criterion: u32, pass: bool, detail: &str, started: Instant, budget_s: f64) -> bool {
    let elapsed = started.elapsed().as_secs_f64();
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} - {detail} ({elapsed:.2}s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2}s >= {budget_s}s"
    );
    pass
}

/// Exact window endpoints for the two reference power laws; zero tolerance.
#[test]
fn criterion_1_exponent_reproduction() {
    let t0 = Instant::now();
    let w2 = power_law_report(5, 2.0).unwrap();
    let ok2 = w2 == ExponentWindow::Interval { lo: 3.0, hi: 8.0 };
    let w4 = power_law_report(5, 4.0).unwrap();
    let ok4 = matches!(
        w4,
        ExponentWindow::SplitPair { q1_hi, q2_min, .. } if q1_hi == 4.0 && q2_min == 4.0
    );
    let pass = report(
        1,
        ok2 && ok4,
        &format!("a=2 window {w2:?}; a=4 split {w4:?}"),
        t0,
        1.0,
    );
    assert!(pass);
}

/// The floor-based origin region at gamma = 4 coincides with the plain
/// ratio-bound window test on random inputs, across dimensions.
#[test]
fn criterion_2_region_consistency() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut agree = 0usize;
    let total = 10_000usize;
    for _ in 0..total {
        let n = rng.gen_range(5..=9u32);
        let beta: f64 = rng.gen_range(0.0..=1.0);
        let alpha: f64 = rng.gen_range(-12.0..12.0);
        let q: f64 = rng.gen_range(0.5..20.0);
        let region = RegionSpec::new(n, beta, 4.0).unwrap();
        let by_region = region_contains(&region, alpha, q).unwrap();
        let params = GrowthParams::new(alpha, beta).unwrap();
        let by_window = origin_window(n, &params).unwrap().contains(q);
        if by_region == by_window {
            agree += 1;
        }
    }
    let pass = report(
        2,
        agree == total,
        &format!("{agree}/{total} agreements at gamma=4"),
        t0,
        10.0,
    );
    assert!(pass);
}

/// Discrete bilaplacian on u = r^4, uniform grid: second order or better.
/// The flux stencil is exact for quartics there, so the residual is pure
/// roundoff and refinement makes it grow like h^-4; the criterion therefore
/// accepts either an observed order >= 1.9 or errors below an explicit
/// second-order envelope, and the envelope is what fires.
#[test]
fn criterion_3_operator_order() {
    let t0 = Instant::now();
    let ms = [256usize, 512, 1024];
    let mut errs = Vec::new();
    let mut envelope_ok = true;
    for &m in &ms {
        let grid = build_grid(ctx5(), 1e-3, 40.0, m, SpacingMode::Uniform).unwrap();
        let u = RadialField::new(grid.nodes().iter().map(|&r| r.powi(4)).collect());
        let lap = u.laplacian(&grid);
        let bilap = grid.laplacian_values(lap);
        let err = bilap[2..grid.len() - 2]
            .iter()
            .map(|&x| (x - 280.0).abs())
            .fold(0.0f64, f64::max);
        let h = grid.nodes()[1] - grid.nodes()[0];
        envelope_ok &= err <= 18.0 * h.powf(1.9);
        errs.push(err);
    }
    let order01 = (errs[0] / errs[1]).log2();
    let order12 = (errs[1] / errs[2]).log2();
    let order_ok = order01 >= 1.9 && order12 >= 1.9;
    let pass = report(
        3,
        order_ok || envelope_ok,
        &format!(
            "errors {:.2e}/{:.2e}/{:.2e}, orders {order01:.2}/{order12:.2}, envelope_ok={envelope_ok}",
            errs[0], errs[1], errs[2]
        ),
        t0,
        10.0,
    );
    assert!(pass);
}

fn bump_field(grid: &RadialGrid, rng: &mut ChaCha8Rng) -> RadialField {
    let mut vals = vec![0.0; grid.len()];
    for _ in 0..3 {
        let c: f64 = rng.gen_range(-6.0..2.5);
        let w: f64 = rng.gen_range(0.3..1.2);
        let a: f64 = rng.gen_range(-1.0..1.0);
        for (i, &r) in grid.nodes().iter().enumerate() {
            let t = (r.ln() - c) / w;
            vals[i] += a * (-t * t).exp();
        }
    }
    RadialField::new(vals)
}

/// Central differences of the energy match the discrete gradient pairing
/// to 1e-6 relative: 10 random (u, h) pairs, three nonlinearity kinds.
#[test]
fn criterion_4_gradient_check() {
    let t0 = Instant::now();
    let grid = build_grid(ctx5(), 1e-4, 30.0, 256, SpacingMode::Logarithmic).unwrap();
    let pot = PotentialSpec::power_law(2.0).sample(&grid).unwrap();
    let kinds = [
        NonlinearitySpec::pure_power(3.0, SignConvention::ZeroOnNegatives).unwrap(),
        NonlinearitySpec::capped_pair(1.5, 2.5, 4.0, SignConvention::Odd).unwrap(),
        NonlinearitySpec::custom(
            std::sync::Arc::new(|t: f64| t / (1.0 + t * t).sqrt()),
            std::sync::Arc::new(|t: f64| (1.0 + t * t).sqrt() - 1.0),
            SignConvention::Odd,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut worst_info = (0usize, 0.0f64, 0.0f64);
    let mut checked = 0usize;
    for (kind_idx, nl) in kinds.iter().enumerate() {
        for _ in 0..10 {
            let u = bump_field(&grid, &mut rng);
            let h = bump_field(&grid, &mut rng);
            let rep = gradient(&grid, &pot, nl, &u).unwrap();
            let pair: Vec<f64> = rep
                .field
                .values()
                .iter()
                .zip(h.values())
                .map(|(a, b)| a * b)
                .collect();
            let analytic = grid.integrate(&pair);
            // Fourth-order central stencil: a plain two-point difference
            // cannot reach 1e-6 relative here, the energy sums carry about
            // 1e-11 of roundoff and the step that hides it reintroduces
            // truncation. A wider step with fourth-order cancellation beats
            // both at once.
            let eps = 1e-4;
            let shift = |s: f64| {
                RadialField::new(
                    u.values()
                        .iter()
                        .zip(h.values())
                        .map(|(a, b)| a + s * b)
                        .collect(),
                )
            };
            let e_at = |s: f64| energy(&grid, &pot, nl, &shift(s)).total;
            let fd = (8.0 * (e_at(eps) - e_at(-eps)) - (e_at(2.0 * eps) - e_at(-2.0 * eps)))
                / (12.0 * eps);
            let rel = (analytic - fd).abs() / fd.abs().max(analytic.abs());
            if rel > worst {
                worst = rel;
                worst_info = (kind_idx, analytic, fd);
            }
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let pass = report(
        4,
        worst <= 1e-6,
        &format!(
            "worst relative gap {worst:.2e} over {checked} pairs (kind {}, analytic {:.6e}, fd {:.6e})",
            worst_info.0, worst_info.1, worst_info.2
        ),
        t0,
        30.0,
    );
    assert!(pass);
}

/// Pointwise and floor-decay ratio tests on 50 random smooth fields for
/// power laws a in {0, 2, 4}; every ratio at most 1 + 1e-3.
#[test]
fn criterion_5_theorem_backed_bounds() {
    let t0 = Instant::now();
    let grid = build_grid(ctx5(), 1e-4, 50.0, 1024, SpacingMode::Logarithmic).unwrap();
    let slack = 1e-3;
    let mut worst = 0.0f64;
    let mut all_pass = true;
    let mut rows = 0usize;
    for field_idx in 0..50u64 {
        let mut rng = per_trial_rng(5, field_idx);
        let u = random_bump_field(&grid, &mut rng);
        let mut reports = vec![
            check_pointwise(&grid, &u, BoundKind::ValueByDeltaNorm, slack).unwrap(),
            check_pointwise(&grid, &u, BoundKind::GradientByDeltaNorm, slack).unwrap(),
        ];
        for a in [0.0, 2.0, 4.0] {
            let v: Vec<f64> = grid.nodes().iter().map(|&r| r.powf(-a)).collect();
            reports.push(check_decay_outer(&grid, &v, a, 1.0, &u, slack).unwrap());
            if a >= 4.0 {
                reports.push(check_decay_inner(&grid, &v, a, 1.0, &u, slack).unwrap());
            }
        }
        for rep in reports {
            worst = worst.max(rep.max_ratio);
            all_pass &= rep.pass;
            rows += 1;
        }
    }
    let pass = report(
        5,
        all_pass,
        &format!("{rows} ratio checks, worst ratio {worst:.4}"),
        t0,
        60.0,
    );
    assert!(pass);
}

/// Sublinear minimization for the power law a = 2 with f(t) = t_+^{1/2}:
/// negative minimum energy, residual at most 1e-6, and a nonnegativity
/// tolerance of 1e-8 relative to the peak.
///
/// This criterion is expected to fail on two of its three legs, and the
/// failure is a property of the requested configuration, not of the
/// solver. For V = r^{-2}, K = r^{-1} the certified exponent window is
/// (3, 8), and q = 1.5 lies far below it: bumps of width R translated to
/// radius R have K-integral-to-norm ratio growing like R^{7/4}, so the
/// continuum functional is unbounded below and the discrete minimum
/// saturates the domain truncation (I about -1.05e11, peak about 1.0e3
/// on this grid). Two consequences, both measured stable from 2e3 to 3e4
/// iterations:
///   residual floors at 3.6e-3 absolute, because at |I| ~ 1e11 the energy
///   evaluation itself carries ~1e-4 of roundoff (3.6e-6 relative to the
///   solution scale, but the tolerance is absolute);
///   the minimizer dips 2.5e-2 of its peak below zero, since nothing
///   enforces a sign on a diverging profile.
/// The assertions are kept at the stated tolerances and fail honestly
/// rather than being weakened to what this configuration can deliver.
/// Moving q inside the window (or the nonlinearity used by the sublinear
/// example shipped with the crate) makes all three legs pass.
#[test]
fn criterion_6_sublinear_existence() {
    let t0 = Instant::now();
    let grid = build_grid(ctx5(), 1e-4, 50.0, 2048, SpacingMode::Logarithmic).unwrap();
    let pot = PotentialSpec::power_law(2.0).sample(&grid).unwrap();
    let nl = NonlinearitySpec::pure_power(1.5, SignConvention::ZeroOnNegatives).unwrap();
    let cfg = SolverConfig::default();
    let res = minimize(&grid, &pot, &nl, &cfg).unwrap();
    let peak = res.u.max_abs();
    let energy_ok = res.energy.total < 0.0;
    let residual_ok = res.residual <= 1e-6;
    let nonneg_ok = res.nonneg_violation <= 1e-8 * peak;
    let pass = report(
        6,
        energy_ok && residual_ok && nonneg_ok,
        &format!(
            "I={:.4e} ({}), residual={:.2e} ({}), dip/peak={:.2e} ({})",
            res.energy.total,
            if energy_ok { "ok" } else { "bad" },
            res.residual,
            if residual_ok { "ok" } else { "bad" },
            res.nonneg_violation / peak,
            if nonneg_ok { "ok" } else { "bad" }
        ),
        t0,
        300.0,
    );
    assert!(pass);
}

/// Superlinear existence for V = K = 1 with f(t) = t_+^3: the saddle search
/// lands on a positive critical level satisfying the Nehari identity.
#[test]
fn criterion_7_superlinear_existence() {
    let t0 = Instant::now();
    let grid = build_grid(ctx5(), 1e-3, 30.0, 1024, SpacingMode::Logarithmic).unwrap();
    let pot = PotentialSpec::power_law(0.0).sample(&grid).unwrap();
    let nl = NonlinearitySpec::pure_power(4.0, SignConvention::ZeroOnNegatives).unwrap();
    let cfg = SolverConfig {
        grad_tol: 1e-5,
        max_iters: 400,
        ..SolverConfig::default()
    };
    let res = mountain_pass(&grid, &pot, &nl, &cfg).unwrap();
    let classified = res.classification == Classification::MountainPass;
    let energy_ok = res.energy.total > 0.0;
    let residual_ok = res.residual <= 1e-5;
    // ||u||^2 = int K u^4 reads 2 half_norm_sq = 4 k_term for F = t^4/4
    let nehari_rel =
        (2.0 * res.energy.half_norm_sq - 4.0 * res.energy.k_term).abs()
            / (2.0 * res.energy.half_norm_sq);
    let nehari_ok = nehari_rel <= 1e-4;
    let pass = report(
        7,
        classified && energy_ok && residual_ok && nehari_ok,
        &format!(
            "{}, I={:.4e}, residual={:.2e}, Nehari rel={:.2e}",
            res.classification, res.energy.total, res.residual, nehari_rel
        ),
        t0,
        600.0,
    );
    assert!(pass);
}

/// Embedding trends for a = 2: the origin functional at q = 5 (inside the
/// window) vanishes with positive log-log slope as R -> 0, while at
/// q = 2.5 (below the window) the translated witness family keeps the
/// infinity functional above a fixed floor.
#[test]
fn criterion_8_embedding_trend() {
    let t0 = Instant::now();
    let grid = build_grid(ctx5(), 1e-4, 640.0, 4096, SpacingMode::Logarithmic).unwrap();
    let pot = PotentialSpec::power_law(2.0).sample(&grid).unwrap();
    let trials = 150;
    let seed = 8;

    let radii0: Vec<f64> = (-6..0).map(|k| 2f64.powi(k)).collect();
    let s0 = estimate_s(&grid, &pot, 5.0, &radii0, trials, Side::Origin, seed).unwrap();
    let monotone = s0
        .estimates
        .windows(2)
        .all(|w| w[0] <= w[1] + 1e-12);
    let slope_ok = s0.trend_slope > 0.0;

    let radii_inf: Vec<f64> = (1..7).map(|k| 2f64.powi(k)).collect();
    let sinf = estimate_s(&grid, &pot, 2.5, &radii_inf, trials, Side::Infinity, seed).unwrap();
    let floor = 0.5;
    let floor_ok = sinf.estimates.iter().all(|&e| e >= floor);

    let pass = report(
        8,
        monotone && slope_ok && floor_ok,
        &format!(
            "S0 monotone={monotone} slope={:+.2}; Sinf(q=2.5) min={:.3} vs floor {floor}",
            s0.trend_slope,
            sinf.estimates.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
        t0,
        300.0,
    );
    assert!(pass);
}
