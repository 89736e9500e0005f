//! Critical-point solvers: coercive minimization for sublinear growth and a
//! discretized-path saddle search for superlinear growth.
//!
//! Both solvers measure progress with the dual residual of the gradient
//! against the problem's own inner product, so `grad_tol` means the same
//! thing independent of grid spacing or potential stiffness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{energy, euclidean_gradient, EnergyBreakdown, EnergyError, HvOperator, NonlinearitySpec, SampledPotentials};
use crate::grid::{RadialField, RadialGrid};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver config: {0}")]
    BadConfig(String),
    #[error("energy diverges toward -inf (energy {energy:.3e}); growth hypotheses likely violated")]
    Divergence { energy: f64 },
    #[error("non-finite arithmetic at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("no negative-energy endpoint up to lambda_max={lambda_max}; saddle geometry absent")]
    Geometry { lambda_max: f64 },
    #[error("path collapsed to the zero basin; decrease path step sizes")]
    PathCollapse,
    #[error("saddle search requires Q = 0")]
    ForcingNotZero,
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Knobs shared by both solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Termination threshold on the dual residual.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub sufficient_decrease: f64,
    /// Number of path points in the saddle search.
    pub path_points: usize,
    /// Descent sub-steps applied to the located path maximum per sweep.
    pub deformation_steps: usize,
    /// Exact Riesz preconditioning (one banded factorization per solve).
    /// The diagonal fallback 1/(1+V) is kept for comparison runs; on stiff
    /// grids it needs vastly more iterations.
    pub riesz_preconditioner: bool,
    /// Cap for the doubling search for a negative-energy endpoint.
    pub lambda_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-6,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            sufficient_decrease: 1e-4,
            path_points: 33,
            deformation_steps: 3,
            riesz_preconditioner: true,
            lambda_max: 1e9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let pos = [
            ("grad_tol", self.grad_tol),
            ("initial_step", self.initial_step),
            ("lambda_max", self.lambda_max),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolveError::BadConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("backtrack_factor", self.backtrack_factor),
            ("sufficient_decrease", self.sufficient_decrease),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(SolveError::BadConfig(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        if self.path_points < 8 {
            return Err(SolveError::BadConfig(format!(
                "path_points must be at least 8, got {}",
                self.path_points
            )));
        }
        if self.max_iters == 0 || self.deformation_steps == 0 {
            return Err(SolveError::BadConfig("iteration counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Minimizer,
    MountainPass,
    Failed,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Minimizer => "minimizer",
            Classification::MountainPass => "mountain_pass",
            Classification::Failed => "failed",
        })
    }
}

#[derive(Debug)]
pub struct SolveResult {
    pub u: RadialField,
    pub energy: EnergyBreakdown,
    /// Dual residual of the gradient at `u`.
    pub residual: f64,
    pub iterations: usize,
    pub classification: Classification,
    /// `max(-u)` clamped at zero: how far the solution dips negative.
    pub nonneg_violation: f64,
}

fn nonneg_violation(u: &RadialField) -> f64 {
    u.values().iter().fold(0.0f64, |m, &x| m.max(-x))
}

/// Floating-point slack for descent comparisons: at large |I| the true
/// decrease of a short step sits below the rounding error of the energy
/// evaluation itself, and an exact Armijo test would stall.
fn fp_slack(e0: f64, e1: f64) -> f64 {
    8.0 * f64::EPSILON * (e0.abs() + e1.abs())
}

fn axpy(u: &[f64], s: f64, d: &[f64]) -> RadialField {
    RadialField::new(u.iter().zip(d).map(|(a, b)| a + s * b).collect())
}

/// Global minimization by preconditioned descent with backtracking.
///
/// The default direction is the exact Riesz representative of the gradient,
/// which for these functionals is a majorize-minimize step: with a convex
/// primitive the full step is guaranteed to decrease the energy by about
/// half the squared residual, so backtracking almost never triggers.
pub fn minimize(
    grid: &RadialGrid,
    pot: &SampledPotentials,
    nl: &NonlinearitySpec,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    let op = HvOperator::new(grid, pot.v())?;
    let sig = grid.ctx().sigma_n();
    let w = grid.weights();

    // small nonnegative seed bump
    let mut u = {
        let raw: Vec<f64> = grid.nodes().iter().map(|&r| (-r * r).exp()).collect();
        let nrm = op.norm_sq(&raw).sqrt();
        let scale = 1e-2 / nrm;
        RadialField::new(raw.into_iter().map(|x| scale * x).collect())
    };
    let project = pot.q().iter().all(|&q| q >= 0.0) && nl.big_f_is_even();

    let mut e = energy(grid, pot, nl, &u);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        if !e.total.is_finite() {
            return Err(SolveError::NonFinite { iteration: it });
        }
        if e.total < -1e200 {
            return Err(SolveError::Divergence { energy: e.total });
        }
        let g = euclidean_gradient(grid, pot, nl, &u);
        residual = op.dual_residual(&g);
        if !residual.is_finite() {
            return Err(SolveError::NonFinite { iteration: it });
        }
        if residual <= cfg.grad_tol {
            break;
        }
        let (dir, slope) = if cfg.riesz_preconditioner {
            let d: Vec<f64> = op.solve(&g).into_iter().map(|x| -x).collect();
            // directional derivative g.d = -g A^{-1} g = -residual^2
            (d, residual * residual)
        } else {
            let mut slope = 0.0;
            let mut d = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                let di = -g[i] / (sig * w[i] * (1.0 + pot.v()[i]));
                slope -= g[i] * di;
                d.push(di);
            }
            (d, slope)
        };

        let mut step = cfg.initial_step;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = axpy(u.values(), step, &dir);
            let ec = energy(grid, pot, nl, &cand);
            if ec.total.is_finite()
                && ec.total <= e.total - cfg.sufficient_decrease * step * slope + fp_slack(e.total, ec.total)
            {
                debug_assert!(ec.total <= e.total + fp_slack(e.total, ec.total), "descent must be monotone");
                u = cand;
                e = ec;
                accepted = true;
                break;
            }
            step *= cfg.backtrack_factor;
        }
        if !accepted {
            break;
        }
        if project {
            // mirrors the proof device I(|u|) <= I(u); discretely the kink
            // can cost norm, so the swap is guarded by the energy
            let abs = RadialField::new(u.values().iter().map(|x| x.abs()).collect());
            let ea = energy(grid, pot, nl, &abs);
            if ea.total <= e.total + fp_slack(e.total, ea.total) {
                u = abs;
                e = ea;
            }
        }
    }

    let classification = if residual <= cfg.grad_tol {
        Classification::Minimizer
    } else {
        Classification::Failed
    };
    Ok(SolveResult {
        nonneg_violation: nonneg_violation(&u),
        energy: e,
        residual,
        iterations,
        classification,
        u,
    })
}

/// Doubling search for a ray endpoint with negative energy: the smallest
/// `lambda` in 1, 2, 4, ... with `I(lambda u0) < 0`.
pub fn ray_scale_endpoint(
    grid: &RadialGrid,
    pot: &SampledPotentials,
    nl: &NonlinearitySpec,
    u0: &RadialField,
    lambda_max: f64,
) -> Result<(f64, RadialField), SolveError> {
    let mut lambda = 1.0f64;
    while lambda <= lambda_max {
        let cand = RadialField::new(u0.values().iter().map(|&x| lambda * x).collect());
        let e = energy(grid, pot, nl, &cand);
        if !e.total.is_finite() {
            return Err(SolveError::NonFinite { iteration: 0 });
        }
        if e.total < 0.0 {
            return Ok((lambda, cand));
        }
        lambda *= 2.0;
    }
    Err(SolveError::Geometry { lambda_max })
}

struct PathPoint {
    field: RadialField,
    energy: f64,
}

impl PathPoint {
    fn new(grid: &RadialGrid, pot: &SampledPotentials, nl: &NonlinearitySpec, field: RadialField) -> Self {
        let energy = energy(grid, pot, nl, &field).total;
        Self { field, energy }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> RadialField {
    RadialField::new(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
}

/// Saddle-point search along a deforming path from 0 to a negative-energy
/// endpoint: locate the path maximum (continuously, along the polyline),
/// push it downhill a few capped steps, splice the result back in, and
/// re-equispace the path in the energy-space norm. The located maximum's
/// dual residual is the convergence measure.
pub fn mountain_pass(
    grid: &RadialGrid,
    pot: &SampledPotentials,
    nl: &NonlinearitySpec,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    if !pot.q_is_zero() {
        return Err(SolveError::ForcingNotZero);
    }
    let op = HvOperator::new(grid, pot.v())?;

    let u0 = RadialField::new(grid.nodes().iter().map(|&r| (-r * r).exp()).collect());
    let (_, bar_u) = ray_scale_endpoint(grid, pot, nl, &u0, cfg.lambda_max)?;

    let p = cfg.path_points;
    let mut path: Vec<PathPoint> = (0..p)
        .map(|j| {
            let t = j as f64 / (p - 1) as f64;
            PathPoint::new(grid, pot, nl, lerp(&vec![0.0; grid.len()], bar_u.values(), t))
        })
        .collect();

    let dist = |a: &[f64], b: &[f64]| -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        op.norm_sq(&d).sqrt()
    };

    let mut best: Option<(RadialField, f64, f64)> = None; // (field, energy, residual)
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;

        // vertex maximum; ties break to the lowest index for determinism
        let mut k = 0;
        for (j, pt) in path.iter().enumerate() {
            if pt.energy > path[k].energy {
                k = j;
            }
            if !pt.energy.is_finite() {
                return Err(SolveError::NonFinite { iteration: it });
            }
        }

        // continuous maximum over the two polyline segments adjacent to the
        // vertex: golden-section on each, then the better of the three
        let golden = |a: &PathPoint, b: &PathPoint| -> (f64, f64) {
            let phi = 0.5 * (5.0f64.sqrt() - 1.0);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let eval = |t: f64| -> f64 {
                energy(grid, pot, nl, &lerp(a.field.values(), b.field.values(), t)).total
            };
            let mut t1 = hi - phi * (hi - lo);
            let mut t2 = lo + phi * (hi - lo);
            let mut f1 = eval(t1);
            let mut f2 = eval(t2);
            for _ in 0..60 {
                if f1 < f2 {
                    lo = t1;
                    t1 = t2;
                    f1 = f2;
                    t2 = lo + phi * (hi - lo);
                    f2 = eval(t2);
                } else {
                    hi = t2;
                    t2 = t1;
                    f2 = f1;
                    t1 = hi - phi * (hi - lo);
                    f1 = eval(t1);
                }
            }
            if f1 >= f2 {
                (t1, f1)
            } else {
                (t2, f2)
            }
        };
        let mut located = path[k].field.clone();
        let mut located_energy = path[k].energy;
        let mut insert_after = k;
        let mut insert_t = 0.0;
        if k > 0 {
            let (t, f) = golden(&path[k - 1], &path[k]);
            if f > located_energy {
                located = lerp(path[k - 1].field.values(), path[k].field.values(), t);
                located_energy = f;
                insert_after = k - 1;
                insert_t = t;
            }
        }
        if k + 1 < path.len() {
            let (t, f) = golden(&path[k], &path[k + 1]);
            if f > located_energy {
                located = lerp(path[k].field.values(), path[k + 1].field.values(), t);
                located_energy = f;
                insert_after = k;
                insert_t = t;
            }
        }

        if located_energy <= 0.0 {
            // the path maximum must stay strictly above I(0) = 0
            return Err(SolveError::PathCollapse);
        }

        let g = euclidean_gradient(grid, pot, nl, &located);
        let residual = op.dual_residual(&g);
        if !residual.is_finite() {
            return Err(SolveError::NonFinite { iteration: it });
        }
        match &best {
            Some((_, _, r)) if *r <= residual => {}
            _ => best = Some((located.clone(), located_energy, residual)),
        }
        if residual <= cfg.grad_tol {
            let e = energy(grid, pot, nl, &located);
            return Ok(SolveResult {
                nonneg_violation: nonneg_violation(&located),
                energy: e,
                residual,
                iterations,
                classification: Classification::MountainPass,
                u: located,
            });
        }

        // typical inter-point spacing caps the descent step: the Riesz step
        // has norm equal to the dual residual, so si = spacing/res keeps the
        // deformation local to the path's resolution
        let total_len: f64 = path.windows(2).map(|w| dist(w[0].field.values(), w[1].field.values())).sum();
        let spacing = total_len / (p - 1) as f64;

        let mut point = located;
        let mut point_energy = located_energy;
        for _ in 0..cfg.deformation_steps {
            let g = euclidean_gradient(grid, pot, nl, &point);
            let res = op.dual_residual(&g);
            if res <= cfg.grad_tol {
                break;
            }
            let dir: Vec<f64> = op.solve(&g).into_iter().map(|x| -x).collect();
            let cap = (spacing / res).min(cfg.initial_step);
            let mut step = cap;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = axpy(point.values(), step, &dir);
                let ec = energy(grid, pot, nl, &cand).total;
                if ec.is_finite()
                    && ec <= point_energy - cfg.sufficient_decrease * step * res * res
                        + fp_slack(point_energy, ec)
                {
                    point = cand;
                    point_energy = ec;
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack_factor;
            }
            if !accepted {
                break;
            }
        }

        // splice the deformed point in as a vertex, then re-equispace both
        // sides of it in arc length, keeping it as an anchor
        let mut verts: Vec<RadialField> = Vec::with_capacity(path.len() + 1);
        for (j, pt) in path.iter().enumerate() {
            verts.push(pt.field.clone());
            if j == insert_after && insert_t > 0.0 {
                verts.push(point.clone());
            }
        }
        let anchor = if insert_t > 0.0 {
            insert_after + 1
        } else {
            verts[insert_after] = point.clone();
            insert_after
        };

        let seg_len: Vec<f64> = verts
            .windows(2)
            .map(|w| dist(w[0].values(), w[1].values()))
            .collect();
        let left_len: f64 = seg_len[..anchor].iter().sum();
        let total: f64 = seg_len.iter().sum();
        if total <= 0.0 {
            return Err(SolveError::PathCollapse);
        }
        let frac = left_len / total;
        let p_left = ((frac * (p - 1) as f64).round() as usize).clamp(1, p - 2);

        let resample = |verts: &[RadialField], count: usize| -> Vec<RadialField> {
            // count points spanning the polyline, endpoints included
            let lens: Vec<f64> = verts.windows(2).map(|w| dist(w[0].values(), w[1].values())).collect();
            let total: f64 = lens.iter().sum();
            let mut out = Vec::with_capacity(count);
            out.push(verts[0].clone());
            let mut seg = 0;
            let mut seg_start = 0.0;
            for j in 1..count - 1 {
                let target = total * j as f64 / (count - 1) as f64;
                while seg + 1 < lens.len() && seg_start + lens[seg] < target {
                    seg_start += lens[seg];
                    seg += 1;
                }
                let t = if lens[seg] > 0.0 { (target - seg_start) / lens[seg] } else { 0.0 };
                out.push(lerp(verts[seg].values(), verts[seg + 1].values(), t.clamp(0.0, 1.0)));
            }
            out.push(verts[verts.len() - 1].clone());
            out
        };

        let left = resample(&verts[..=anchor], p_left + 1);
        let right = resample(&verts[anchor..], p - p_left);
        let mut new_path = Vec::with_capacity(p);
        for f in left {
            new_path.push(PathPoint::new(grid, pot, nl, f));
        }
        for f in right.into_iter().skip(1) {
            new_path.push(PathPoint::new(grid, pot, nl, f));
        }
        path = new_path;
    }

    // out of iterations: report the best located saddle candidate honestly
    let (u, _, residual) = best.ok_or(SolveError::PathCollapse)?;
    let e = energy(grid, pot, nl, &u);
    Ok(SolveResult {
        nonneg_violation: nonneg_violation(&u),
        energy: e,
        residual,
        iterations,
        classification: Classification::Failed,
        u,
    })
}
