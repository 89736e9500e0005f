//! Radial discretization of `R^N` for `N >= 5`.
//!
//! Everything downstream reduces integrals over `R^N` to one-dimensional
//! weighted integrals, `int f(|x|) dx = sigma_N int f(r) r^{N-1} dr`, and
//! replaces the radial Laplacian `u'' + (N-1) u'/r` by a tridiagonal stencil.
//! This module owns the mesh, the quadrature weights, the Laplacian operator
//! with its boundary conventions, and the norms built from them.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension must be at least 5, got {0}")]
    DimensionTooSmall(u32),
    #[error("grid needs at least 16 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid radii: r_min={r_min}, r_max={r_max} (need 0 < r_min < r_max, both finite)")]
    InvalidRadii { r_min: f64, r_max: f64 },
    #[error("field length {field} does not match grid length {grid}")]
    LengthMismatch { field: usize, grid: usize },
    #[error("{name} must be nonnegative and finite at every node (node {index}: {value})")]
    BadNodeValue {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("sum-norm exponents must satisfy 1 < q1 <= q2, got q1={q1}, q2={q2}")]
    BadExponentPair { q1: f64, q2: f64 },
    #[error("field file {path}: {reason}")]
    FieldIo { path: String, reason: String },
}

/// Dimension-dependent constants shared by every grid of a given `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionContext {
    n: u32,
    sigma_n: f64,
    two_star_star: f64,
}

impl DimensionContext {
    /// `sigma_N = 2 pi^{N/2} / Gamma(N/2)` is evaluated by the half-integer
    /// recurrence so no libm gamma is involved: for odd `N` the `sqrt(pi)`
    /// of `Gamma(1/2)` cancels against `pi^{N/2}` and
    /// `sigma_N = 2 pi^{(N-1)/2} / ((1/2)(3/2)...((N-2)/2))`.
    pub fn new(n: u32) -> Result<Self, GridError> {
        if n < 5 {
            return Err(GridError::DimensionTooSmall(n));
        }
        use std::f64::consts::PI;
        let sigma_n = if n.is_multiple_of(2) {
            let mut fact = 1.0;
            for k in 1..(n / 2) {
                fact *= k as f64;
            }
            2.0 * PI.powi(n as i32 / 2) / fact
        } else {
            let mut half_fact = 1.0;
            let mut j = 1;
            while j <= n - 2 {
                half_fact *= j as f64 / 2.0;
                j += 2;
            }
            2.0 * PI.powi((n as i32 - 1) / 2) / half_fact
        };
        Ok(Self {
            n,
            sigma_n,
            two_star_star: 2.0 * n as f64 / (n as f64 - 4.0),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// (N-1)-dimensional measure of the unit sphere.
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// Critical exponent `2N/(N-4)` for second-order derivatives.
    pub fn two_star_star(&self) -> f64 {
        self.two_star_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingMode {
    Uniform,
    Logarithmic,
}

impl fmt::Display for SpacingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpacingMode::Uniform => write!(f, "uniform"),
            SpacingMode::Logarithmic => write!(f, "log"),
        }
    }
}

/// Tridiagonal operator in row form. Row `i` applies
/// `sub[i]*u[i-1] + dia[i]*u[i] + sup[i]*u[i+1]` (first/last rows ignore the
/// out-of-range coefficient, which is folded or dropped at construction).
#[derive(Debug, Clone)]
pub struct TridiagOp {
    sub: Vec<f64>,
    dia: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagOp {
    pub fn len(&self) -> usize {
        self.dia.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dia.is_empty()
    }

    pub fn bands(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.sub, &self.dia, &self.sup)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.dia.len();
        debug_assert_eq!(u.len(), m);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut v = self.dia[i] * u[i];
            if i > 0 {
                v += self.sub[i] * u[i - 1];
            }
            if i + 1 < m {
                v += self.sup[i] * u[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// `L^T x`: column `i` of `L` gathered from rows `i-1, i, i+1`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dia.len();
        debug_assert_eq!(x.len(), m);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut v = self.dia[i] * x[i];
            if i + 1 < m {
                v += self.sub[i + 1] * x[i + 1];
            }
            if i > 0 {
                v += self.sup[i - 1] * x[i - 1];
            }
            out[i] = v;
        }
        out
    }
}

/// One-dimensional radial mesh with quadrature weights and the discrete
/// radial Laplacian.
///
/// Weights realize `int_{r_min}^{r_max} f(r) r^{N-1} dr` by the composite
/// trapezoid rule in the chosen coordinate (`r` or `log r`), Jacobian
/// included; `integrate` multiplies by `sigma_N`. Grids are immutable after
/// construction and all operations are pure.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    ctx: DimensionContext,
    mode: SpacingMode,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lap: TridiagOp,
}

pub fn build_grid(
    ctx: DimensionContext,
    r_min: f64,
    r_max: f64,
    m: usize,
    mode: SpacingMode,
) -> Result<RadialGrid, GridError> {
    if m < 16 {
        return Err(GridError::TooFewNodes(m));
    }
    if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(GridError::InvalidRadii { r_min, r_max });
    }
    let n = ctx.n() as i32;
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    match mode {
        SpacingMode::Uniform => {
            let h = (r_max - r_min) / (m as f64 - 1.0);
            for i in 0..m {
                let r = if i == m - 1 {
                    r_max
                } else {
                    r_min + h * i as f64
                };
                let trap = if i == 0 || i == m - 1 { 0.5 * h } else { h };
                nodes.push(r);
                weights.push(trap * r.powi(n - 1));
            }
        }
        SpacingMode::Logarithmic => {
            let t0 = r_min.ln();
            let dt = (r_max.ln() - t0) / (m as f64 - 1.0);
            for i in 0..m {
                let r = if i == 0 {
                    r_min
                } else if i == m - 1 {
                    r_max
                } else {
                    (t0 + dt * i as f64).exp()
                };
                // d r = r d t, so the Jacobian picks up one extra power of r.
                let trap = if i == 0 || i == m - 1 { 0.5 * dt } else { dt };
                nodes.push(r);
                weights.push(trap * r.powi(n));
            }
        }
    }
    let lap = laplacian_op(&nodes, ctx.n(), mode);
    Ok(RadialGrid {
        ctx,
        mode,
        nodes,
        weights,
        lap,
    })
}

/// Second-order stencil for `u'' + (N-1) u'/r` on the (possibly nonuniform)
/// node set. Boundary conventions:
/// - first row: ghost node mirrored through the origin (`u(-r_1) = u(r_1)`,
///   the discrete form of `u'(0) = 0`), which folds the left coefficient
///   into the diagonal;
/// - last row: clamped beyond the domain (`u = 0` past `r_M`), so the right
///   coefficient is dropped; the ghost gap extends the local spacing law.
fn laplacian_op(nodes: &[f64], n: u32, mode: SpacingMode) -> TridiagOp {
    let m = nodes.len();
    let nm1 = (n - 1) as f64;
    let mut sub = vec![0.0; m];
    let mut dia = vec![0.0; m];
    let mut sup = vec![0.0; m];
    for i in 0..m {
        let r = nodes[i];
        let hl;
        let hr;
        if i == 0 {
            hl = 2.0 * r;
            hr = nodes[1] - r;
        } else if i == m - 1 {
            hl = r - nodes[i - 1];
            hr = match mode {
                SpacingMode::Uniform => hl,
                SpacingMode::Logarithmic => r * (r / nodes[i - 1] - 1.0),
            };
        } else {
            hl = r - nodes[i - 1];
            hr = nodes[i + 1] - r;
        }
        let s = hl + hr;
        let cl = 2.0 / (hl * s) - nm1 / r * hr / (hl * s);
        let cc = -2.0 / (hl * hr) + nm1 / r * (hr - hl) / (hl * hr);
        let cr = 2.0 / (hr * s) + nm1 / r * hl / (hr * s);
        if i == 0 {
            dia[i] = cl + cc;
            sup[i] = cr;
        } else if i == m - 1 {
            sub[i] = cl;
            dia[i] = cc;
        } else {
            sub[i] = cl;
            dia[i] = cc;
            sup[i] = cr;
        }
    }
    TridiagOp { sub, dia, sup }
}

impl RadialGrid {
    pub fn ctx(&self) -> &DimensionContext {
        &self.ctx
    }

    pub fn mode(&self) -> SpacingMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights without the `sigma_N` factor.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lap_op(&self) -> &TridiagOp {
        &self.lap
    }

    fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.nodes.len() {
            return Err(GridError::LengthMismatch {
                field: len,
                grid: self.nodes.len(),
            });
        }
        Ok(())
    }

    /// `sigma_N sum_i w_i f_i`, realizing `int_{R^N} f(|x|) dx`.
    ///
    /// The sum is a plain sequential fold so results are bit-reproducible.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.weights.len());
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(f) {
            acc += w * v;
        }
        self.ctx.sigma_n * acc
    }

    pub fn laplacian_values(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.nodes.len());
        self.lap.apply(u)
    }

    /// First derivative `u'` by the matching nonuniform central stencil,
    /// with the same ghost conventions as the Laplacian.
    pub fn radial_derivative(&self, u: &[f64]) -> Vec<f64> {
        let m = self.nodes.len();
        debug_assert_eq!(u.len(), m);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let r = self.nodes[i];
            let (hl, hr, ul, ur) = if i == 0 {
                let hr = self.nodes[1] - r;
                (2.0 * r, hr, u[0], u[1])
            } else if i == m - 1 {
                let hl = r - self.nodes[i - 1];
                let hr = match self.mode {
                    SpacingMode::Uniform => hl,
                    SpacingMode::Logarithmic => r * (r / self.nodes[i - 1] - 1.0),
                };
                (hl, hr, u[i - 1], 0.0)
            } else {
                (r - self.nodes[i - 1], self.nodes[i + 1] - r, u[i - 1], u[i + 1])
            };
            let s = hl + hr;
            out[i] = (-hr * hr * ul + (hr * hr - hl * hl) * u[i] + hl * hl * ur) / (hl * hr * s);
        }
        out
    }
}

/// Node values of a radial function, with a lazily computed Laplacian cache.
/// The cache is never stale: replacing the values creates a fresh cell.
#[derive(Debug)]
pub struct RadialField {
    values: Vec<f64>,
    lap: OnceLock<Vec<f64>>,
}

impl Clone for RadialField {
    fn clone(&self) -> Self {
        let lap = OnceLock::new();
        if let Some(l) = self.lap.get() {
            let _ = lap.set(l.clone());
        }
        Self {
            values: self.values.clone(),
            lap,
        }
    }
}

impl RadialField {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            lap: OnceLock::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn set_values(&mut self, values: Vec<f64>) {
        self.values = values;
        self.lap = OnceLock::new();
    }

    /// Laplacian node values, computed once per value set.
    pub fn laplacian<'a>(&'a self, grid: &RadialGrid) -> &'a [f64] {
        self.lap.get_or_init(|| grid.laplacian_values(&self.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

pub fn laplacian(grid: &RadialGrid, u: &RadialField) -> RadialField {
    RadialField::new(u.laplacian(grid).to_vec())
}

pub fn bilaplacian(grid: &RadialGrid, u: &RadialField) -> RadialField {
    RadialField::new(grid.laplacian_values(u.laplacian(grid)))
}

/// The two addends of the squared `H^2_V` norm,
/// `int |Delta u|^2 dx` and `int V u^2 dx`.
#[derive(Debug, Clone, Copy)]
pub struct HvNorm {
    pub delta_sq: f64,
    pub v_sq: f64,
}

impl HvNorm {
    pub fn total_sq(&self) -> f64 {
        self.delta_sq + self.v_sq
    }

    pub fn norm(&self) -> f64 {
        self.total_sq().sqrt()
    }
}

pub fn norm_hv(grid: &RadialGrid, v: &[f64], u: &RadialField) -> Result<HvNorm, GridError> {
    grid.check_len(v.len())?;
    grid.check_len(u.len())?;
    for (i, &vi) in v.iter().enumerate() {
        if !(vi >= 0.0) || !vi.is_finite() {
            return Err(GridError::BadNodeValue {
                name: "V",
                index: i,
                value: vi,
            });
        }
    }
    let lap = u.laplacian(grid);
    let vals = u.values();
    let mut dsq = Vec::with_capacity(lap.len());
    let mut vsq = Vec::with_capacity(lap.len());
    for i in 0..lap.len() {
        dsq.push(lap[i] * lap[i]);
        vsq.push(v[i] * vals[i] * vals[i]);
    }
    Ok(HvNorm {
        delta_sq: grid.integrate(&dsq),
        v_sq: grid.integrate(&vsq),
    })
}

/// Plain weighted Lebesgue norm `(int K |u|^q dx)^{1/q}`.
pub fn norm_lq_k(grid: &RadialGrid, k: &[f64], u: &[f64], q: f64) -> f64 {
    debug_assert_eq!(k.len(), u.len());
    let mut f = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        f.push(k[i] * u[i].abs().powf(q));
    }
    grid.integrate(&f).powf(1.0 / q)
}

/// Sum-space norm approximated over ball/complement splittings:
/// `min_R max{ ||u||_{L^{q1}_K(B_R)}, ||u||_{L^{q2}_K(B_R^c)} }` with `R`
/// ranging over the node radii plus the two degenerate cuts (all-tail,
/// all-ball). An upper bound on the true infimum over measurable splittings.
///
/// For `q1 == q2` the split is irrelevant (the space is plain `L^q_K`) and
/// the plain norm is returned; the balanced cut would report the strictly
/// smaller `2^{-1/q}` multiple, which is not the norm of the single space.
pub fn sum_norm(grid: &RadialGrid, k: &[f64], u: &[f64], q1: f64, q2: f64) -> Result<f64, GridError> {
    grid.check_len(k.len())?;
    grid.check_len(u.len())?;
    if !(q1 > 1.0) || !(q2 >= q1) || !q1.is_finite() || !q2.is_finite() {
        return Err(GridError::BadExponentPair { q1, q2 });
    }
    if q1 == q2 {
        return Ok(norm_lq_k(grid, k, u, q1));
    }
    let m = grid.len();
    let w = grid.weights();
    let sig = grid.ctx.sigma_n();
    // prefix[j] = int_{B_{r_j}} K|u|^{q1}, suffix[j] = tail integral with q2;
    // cut index j means nodes 0..=j are in the ball.
    let mut prefix = vec![0.0; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] + w[i] * k[i] * u[i].abs().powf(q1);
    }
    let mut suffix = vec![0.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] + w[i] * k[i] * u[i].abs().powf(q2);
    }
    let mut best = f64::INFINITY;
    for cut in 0..=m {
        let ball = (sig * prefix[cut]).powf(1.0 / q1);
        let tail = (sig * suffix[cut]).powf(1.0 / q2);
        let v = ball.max(tail);
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// Writes `(r, value)` pairs, one per line, at full round-trip precision.
pub fn export_field(path: &Path, grid: &RadialGrid, u: &RadialField) -> Result<(), GridError> {
    grid.check_len(u.len())?;
    let io_err = |e: std::io::Error| GridError::FieldIo {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    for (r, v) in grid.nodes().iter().zip(u.values()) {
        writeln!(out, "{:.16e} {:.16e}", r, v).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads a two-column field file back as `(radii, values)`.
/// Blank lines and `#` comments are skipped.
pub fn import_field(path: &Path) -> Result<(Vec<f64>, Vec<f64>), GridError> {
    let fail = |reason: String| GridError::FieldIo {
        path: path.display().to_string(),
        reason,
    };
    let file = std::fs::File::open(path).map_err(|e| fail(e.to_string()))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| fail(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64, GridError> {
            tok.ok_or_else(|| fail(format!("line {}: expected two columns", lineno + 1)))?
                .parse::<f64>()
                .map_err(|e| fail(format!("line {}: {}", lineno + 1, e)))
        };
        radii.push(parse(parts.next())?);
        values.push(parse(parts.next())?);
    }
    Ok((radii, values))
}
