//! Admissible-exponent calculus for weighted fourth-order radial embeddings.
//!
//! The energy space `H²_{V,r}` (radial functions with `∫|Δu|² + V u² dx < ∞`)
//! embeds compactly into the sum space `L^{q1}_K + L^{q2}_K` provided the pair
//! `(q1, q2)` lies in an open window determined by growth parameters of the
//! ratio `K(r) / (r^alpha V(r)^beta)` near the origin and near infinity, and
//! optionally by a potential floor `essinf r^gamma V(r) > 0`. This module
//! evaluates those windows in closed form.
//!
//! Conventions, used verbatim by every function here:
//!
//! * `n` is the space dimension, `n ≥ 5`;
//! * `alpha` is the power in the ratio bound, any real;
//! * `beta ∈ [0, 1]` is the potential exponent in the ratio bound;
//! * `gamma` is the floor exponent, required `≥ 4` at the origin and `≤ 4`
//!   at infinity;
//! * every window is an *open* set: membership is by strict inequality, and
//!   no epsilon slack is applied anywhere.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("dimension must be at least 5, got {0}")]
    DimensionTooSmall(u32),
    #[error("beta must lie in [0, 1], got {0}")]
    BetaOutOfRange(f64),
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("formula is singular at gamma = {0}: denominator vanishes")]
    SingularGamma(f64),
    #[error("a potential-floor exponent gamma is required here but was not supplied")]
    MissingGamma,
    #[error("origin floor exponent gamma must be >= 4, got {0}")]
    GammaBelowFour(f64),
    #[error("infinity floor exponent gamma must be <= 4, got {0}")]
    GammaAboveFour(f64),
    #[error("power-law exponent a must satisfy a <= 4, got {0}")]
    PowerLawOutOfRange(f64),
}

type Result<T> = std::result::Result<T, ExponentError>;

fn check_dim(n: u32) -> Result<f64> {
    if n < 5 {
        return Err(ExponentError::DimensionTooSmall(n));
    }
    Ok(f64::from(n))
}

fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(ExponentError::NotFinite { name, value });
    }
    Ok(value)
}

fn check_beta(beta: f64) -> Result<f64> {
    check_finite("beta", beta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(ExponentError::BetaOutOfRange(beta));
    }
    Ok(beta)
}

/// Growth parameters of the ratio bound `K(r) <= Λ r^alpha V(r)^beta` on one
/// end of the half-line (origin or infinity), with an optional floor exponent
/// `gamma` for which `essinf r^gamma V(r) > 0` holds on that end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
}

impl GrowthParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_finite("alpha", alpha)?;
        check_beta(beta)?;
        Ok(Self { alpha, beta, gamma: None })
    }

    /// Same ratio bound plus a potential floor `essinf r^gamma V > 0`.
    pub fn with_floor(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_finite("gamma", gamma)?;
        let mut p = Self::new(alpha, beta)?;
        p.gamma = Some(gamma);
        Ok(p)
    }
}

/// Critical ratio exponent: for `alpha` strictly above `alpha_star(n, beta)`
/// the origin window is nonempty, at or below it is empty.
///
/// `alpha_star = max{ 4 beta − 2 − n/2, −(1 − beta) n }`; the two branches
/// coincide at `beta = 1/2`.
pub fn alpha_star(n: u32, beta: f64) -> Result<f64> {
    let nf = check_dim(n)?;
    let beta = check_beta(beta)?;
    Ok((4.0 * beta - 2.0 - nf / 2.0).max(-(1.0 - beta) * nf))
}

/// Upper endpoint of the origin window from the ratio bound alone:
/// `q_star = 2 (alpha − 4 beta + n) / (n − 4)`.
pub fn q_star(n: u32, alpha: f64, beta: f64) -> Result<f64> {
    let nf = check_dim(n)?;
    check_finite("alpha", alpha)?;
    let beta = check_beta(beta)?;
    Ok(2.0 * (alpha - 4.0 * beta + nf) / (nf - 4.0))
}

/// First floor-assisted exponent: `2 (alpha − gamma beta + n) / (n − gamma)`.
/// Singular at `gamma = n`.
pub fn q_lower_star(n: u32, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let nf = check_dim(n)?;
    check_finite("alpha", alpha)?;
    let beta = check_beta(beta)?;
    check_finite("gamma", gamma)?;
    if gamma == nf {
        return Err(ExponentError::SingularGamma(gamma));
    }
    Ok(2.0 * (alpha - gamma * beta + nf) / (nf - gamma))
}

/// Second floor-assisted exponent:
/// `2 (2 alpha + (1 − 2 beta) gamma + 2 (n − 2)) / (2 (n − 2) − gamma)`.
/// Singular at `gamma = 2 (n − 2)`.
pub fn q_double_star(n: u32, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let nf = check_dim(n)?;
    check_finite("alpha", alpha)?;
    let beta = check_beta(beta)?;
    check_finite("gamma", gamma)?;
    let denom = 2.0 * (nf - 2.0) - gamma;
    if denom == 0.0 {
        return Err(ExponentError::SingularGamma(gamma));
    }
    Ok(2.0 * (2.0 * alpha + (1.0 - 2.0 * beta) * gamma + 2.0 * (nf - 2.0)) / denom)
}

/// Why a window came out empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyReason {
    /// `alpha <= alpha_star(beta)`: the ratio bound is too weak at this end.
    AlphaNotAboveCritical,
    /// Formula endpoints crossed; no q satisfies all strict inequalities.
    DegenerateBounds,
}

/// An admissible set of Lebesgue exponents. All bounds are open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentWindow {
    /// A single exponent q works for all of `(lo, hi)`.
    Interval { lo: f64, hi: f64 },
    /// Any `q > lo` works.
    HalfLine { lo: f64 },
    /// No single exponent works; a pair `q1 ∈ (q1_lo, q1_hi)`, `q2 > q2_min`
    /// is needed (sum-space splitting).
    SplitPair { q1_lo: f64, q1_hi: f64, q2_min: f64 },
    Empty { reason: EmptyReason },
}

impl ExponentWindow {
    fn interval(lo: f64, hi: f64) -> Self {
        if lo < hi {
            ExponentWindow::Interval { lo, hi }
        } else {
            ExponentWindow::Empty { reason: EmptyReason::DegenerateBounds }
        }
    }

    /// Strict membership of a single exponent. A `SplitPair` admits no single
    /// exponent; use [`ExponentWindow::contains_pair`] for it.
    pub fn contains(&self, q: f64) -> bool {
        match *self {
            ExponentWindow::Interval { lo, hi } => lo < q && q < hi,
            ExponentWindow::HalfLine { lo } => lo < q,
            ExponentWindow::SplitPair { .. } | ExponentWindow::Empty { .. } => false,
        }
    }

    /// Strict membership of a pair `(q1, q2)`; for single-exponent windows
    /// both components must lie in the window (q1 = q2 is allowed).
    pub fn contains_pair(&self, q1: f64, q2: f64) -> bool {
        match *self {
            ExponentWindow::SplitPair { q1_lo, q1_hi, q2_min } => {
                q1_lo < q1 && q1 < q1_hi && q2_min < q2
            }
            _ => self.contains(q1) && self.contains(q2),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ExponentWindow::Empty { .. })
    }

    /// Stable tag used in CSV reports.
    pub fn kind_str(&self) -> &'static str {
        match self {
            ExponentWindow::Interval { .. } => "interval",
            ExponentWindow::HalfLine { .. } => "half_line",
            ExponentWindow::SplitPair { .. } => "split_pair",
            ExponentWindow::Empty { .. } => "empty",
        }
    }
}

/// Origin-side window from the ratio bound alone: `(max{1, 2 beta}, q_star)`,
/// nonempty exactly when `alpha > alpha_star(beta)`.
pub fn origin_window(n: u32, p: &GrowthParams) -> Result<ExponentWindow> {
    let a_star = alpha_star(n, p.beta)?;
    if p.alpha <= a_star {
        return Ok(ExponentWindow::Empty { reason: EmptyReason::AlphaNotAboveCritical });
    }
    let lo = 1f64.max(2.0 * p.beta);
    let hi = q_star(n, p.alpha, p.beta)?;
    Ok(ExponentWindow::interval(lo, hi))
}

/// Which term of a `max{...}` threshold attains it. Ties report the earliest
/// term in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdTerm {
    One,
    TwoBeta,
    QStar,
    QLowerStar,
    QDoubleStar,
}

/// A strict lower threshold for the infinity-side exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub attained_by: ThresholdTerm,
}

fn max_threshold(terms: &[(f64, ThresholdTerm)]) -> Threshold {
    let mut best = terms[0];
    for &(v, t) in &terms[1..] {
        if v > best.0 {
            best = (v, t);
        }
    }
    Threshold { value: best.0, attained_by: best.1 }
}

/// Infinity-side threshold from the ratio bound alone: any
/// `q2 > max{1, 2 beta, q_star}` is admissible at infinity.
pub fn infinity_threshold(n: u32, p: &GrowthParams) -> Result<Threshold> {
    let qs = q_star(n, p.alpha, p.beta)?;
    Ok(max_threshold(&[
        (1.0, ThresholdTerm::One),
        (2.0 * p.beta, ThresholdTerm::TwoBeta),
        (qs, ThresholdTerm::QStar),
    ]))
}

/// Infinity-side threshold when a potential floor `essinf r^gamma V > 0`
/// holds at infinity with `gamma <= 4`: any
/// `q2 > max{1, 2 beta, q_lower_star, q_double_star}` is admissible.
///
/// Never hits the singular gammas: `gamma <= 4 < n <= 2 (n − 2)`.
pub fn infinity_threshold_with_floor(n: u32, p: &GrowthParams) -> Result<Threshold> {
    let gamma = p.gamma.ok_or(ExponentError::MissingGamma)?;
    if gamma > 4.0 {
        return Err(ExponentError::GammaAboveFour(gamma));
    }
    let ql = q_lower_star(n, p.alpha, p.beta, gamma)?;
    let qd = q_double_star(n, p.alpha, p.beta, gamma)?;
    Ok(max_threshold(&[
        (1.0, ThresholdTerm::One),
        (2.0 * p.beta, ThresholdTerm::TwoBeta),
        (ql, ThresholdTerm::QLowerStar),
        (qd, ThresholdTerm::QDoubleStar),
    ]))
}

/// Position of the origin floor exponent `gamma >= 4` relative to the two
/// structural breakpoints `n` and `2 (n − 2)`. Decides which inequalities
/// cut the admissible `(alpha, q)` region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaCase {
    /// `4 <= gamma < n`
    BelowN,
    /// `gamma = n` (first formula singular here)
    AtN,
    /// `n < gamma < 2 (n − 2)`
    Between,
    /// `gamma = 2 (n − 2)` (second formula singular here)
    AtCritical,
    /// `gamma > 2 (n − 2)`
    AboveCritical,
}

/// Admissible `(alpha, q)` region at the origin when a potential floor
/// `essinf r^gamma V > 0` holds there with `gamma >= 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    n: u32,
    pub beta: f64,
    pub gamma: f64,
    pub case: GammaCase,
}

impl RegionSpec {
    pub fn new(n: u32, beta: f64, gamma: f64) -> Result<Self> {
        let nf = check_dim(n)?;
        let beta = check_beta(beta)?;
        check_finite("gamma", gamma)?;
        if gamma < 4.0 {
            return Err(ExponentError::GammaBelowFour(gamma));
        }
        let critical = 2.0 * (nf - 2.0);
        let case = if gamma < nf {
            GammaCase::BelowN
        } else if gamma == nf {
            GammaCase::AtN
        } else if gamma < critical {
            GammaCase::Between
        } else if gamma == critical {
            GammaCase::AtCritical
        } else {
            GammaCase::AboveCritical
        };
        Ok(Self { n, beta, gamma, case })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }
}

/// Strict membership test of `(alpha, q)` in the origin floor region.
///
/// At `gamma = 4` both floor-assisted exponents collapse to `q_star`, so the
/// region coincides with the plain ratio-bound window.
pub fn region_contains(region: &RegionSpec, alpha: f64, q: f64) -> Result<bool> {
    check_finite("alpha", alpha)?;
    check_finite("q", q)?;
    let n = region.n;
    let nf = f64::from(n);
    let (beta, gamma) = (region.beta, region.gamma);
    let lo = 1f64.max(2.0 * beta);
    Ok(match region.case {
        GammaCase::BelowN => {
            let ql = q_lower_star(n, alpha, beta, gamma)?;
            let qd = q_double_star(n, alpha, beta, gamma)?;
            lo < q && q < ql.min(qd)
        }
        GammaCase::AtN => {
            let qd = q_double_star(n, alpha, beta, gamma)?;
            lo < q && q < qd && alpha > -(1.0 - beta) * nf
        }
        GammaCase::Between => {
            let ql = q_lower_star(n, alpha, beta, gamma)?;
            let qd = q_double_star(n, alpha, beta, gamma)?;
            lo.max(ql) < q && q < qd
        }
        GammaCase::AtCritical => {
            let ql = q_lower_star(n, alpha, beta, gamma)?;
            lo.max(ql) < q && alpha > -(1.0 - beta) * gamma
        }
        GammaCase::AboveCritical => {
            let ql = q_lower_star(n, alpha, beta, gamma)?;
            let qd = q_double_star(n, alpha, beta, gamma)?;
            lo.max(ql).max(qd) < q
        }
    })
}

/// Admissible window for the model pair `V = r^{-a}`, `K = r^{-(a-1)}`,
/// `a <= 4`, using the optimal growth parameters `alpha = 1 − a`, `beta = 0`,
/// floor exponent `gamma = a` at infinity.
///
/// For `a < 4` a single exponent suffices and the window is the open interval
/// `(2 (2n − a − 2) / (2n − a − 4), 2 (n − a + 1) / (n − 4))`; the endpoints
/// close up as `a → 4⁻`. At `a = 4` they coincide at `2 (n − 3) / (n − 4)`
/// and only split pairs around that threshold remain admissible.
pub fn power_law_report(n: u32, a: f64) -> Result<ExponentWindow> {
    let nf = check_dim(n)?;
    check_finite("a", a)?;
    if a > 4.0 {
        return Err(ExponentError::PowerLawOutOfRange(a));
    }
    let hi = 2.0 * (nf - a + 1.0) / (nf - 4.0);
    let lo = 2.0 * (2.0 * nf - a - 2.0) / (2.0 * nf - a - 4.0);
    if a == 4.0 {
        // hi == lo == 2 (n − 3) / (n − 4): single-space window closes.
        Ok(ExponentWindow::SplitPair { q1_lo: 1.0, q1_hi: hi, q2_min: hi })
    } else {
        Ok(ExponentWindow::interval(lo, hi))
    }
}

/// Which hypothesis certified one side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Ratio bound `K <= Λ r^alpha V^beta` alone.
    RatioBound,
    /// Ratio bound plus potential floor `essinf r^gamma V > 0`.
    RatioWithFloor,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::RatioBound => "ratio_bound",
            Rule::RatioWithFloor => "ratio_with_floor",
        }
    }
}

/// Outcome for one end of the half-line.
#[derive(Debug, Clone, PartialEq)]
pub struct SideReport {
    pub ok: bool,
    /// Certifying rule when `ok`; the floor rule is reported when both apply.
    pub rule: Option<Rule>,
    /// Human-readable strict inequality that failed, when `!ok`.
    pub failing: Option<String>,
}

/// Joint certificate for a pair `(q1, q2)`: `q1` governs the origin, `q2`
/// governs infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub certified: bool,
    pub origin: SideReport,
    pub infinity: SideReport,
}

/// Certify a pair of exponents against growth data at both ends.
///
/// Each side is checked against every applicable hypothesis and the strongest
/// certifying rule is reported: the floor rule strictly enlarges the ratio
/// window, so it wins when both certify. Supplying a floor never revokes a
/// certificate obtained without one.
pub fn certify_pair(
    n: u32,
    origin: &GrowthParams,
    infinity: &GrowthParams,
    q1: f64,
    q2: f64,
) -> Result<Certificate> {
    check_dim(n)?;
    check_finite("q1", q1)?;
    check_finite("q2", q2)?;

    let origin_report = certify_origin(n, origin, q1)?;
    let infinity_report = certify_infinity(n, infinity, q2)?;
    Ok(Certificate {
        certified: origin_report.ok && infinity_report.ok,
        origin: origin_report,
        infinity: infinity_report,
    })
}

fn certify_origin(n: u32, p: &GrowthParams, q1: f64) -> Result<SideReport> {
    let window = origin_window(n, p)?;
    let ratio_ok = window.contains(q1);

    // A floor with gamma > 4 enlarges the window; gamma = 4 reproduces it.
    let floor_ok = match p.gamma {
        Some(g) if g > 4.0 => {
            let region = RegionSpec::new(n, p.beta, g)?;
            region_contains(&region, p.alpha, q1)?
        }
        _ => false,
    };

    if floor_ok {
        return Ok(SideReport { ok: true, rule: Some(Rule::RatioWithFloor), failing: None });
    }
    if ratio_ok {
        return Ok(SideReport { ok: true, rule: Some(Rule::RatioBound), failing: None });
    }

    let failing = match window {
        ExponentWindow::Empty { .. } => format!(
            "origin ratio bound too weak: alpha = {} <= alpha_star = {}",
            p.alpha,
            alpha_star(n, p.beta)?
        ),
        ExponentWindow::Interval { lo, hi } => {
            if q1 <= lo {
                format!("q1 = {q1} not above max{{1, 2 beta}} = {lo}")
            } else {
                format!("q1 = {q1} not below q_star = {hi}")
            }
        }
        _ => unreachable!("origin_window yields Interval or Empty"),
    };
    Ok(SideReport { ok: false, rule: None, failing: Some(failing) })
}

fn certify_infinity(n: u32, p: &GrowthParams, q2: f64) -> Result<SideReport> {
    let ratio = infinity_threshold(n, p)?;
    let floor = match p.gamma {
        Some(g) if g <= 4.0 => Some(infinity_threshold_with_floor(n, p)?),
        _ => None,
    };

    if let Some(thr) = floor {
        if q2 > thr.value {
            return Ok(SideReport { ok: true, rule: Some(Rule::RatioWithFloor), failing: None });
        }
    }
    if q2 > ratio.value {
        return Ok(SideReport { ok: true, rule: Some(Rule::RatioBound), failing: None });
    }

    // Report against the weakest threshold available (floor if present).
    let binding = floor.unwrap_or(ratio);
    let failing = format!(
        "q2 = {q2} not above infinity threshold {} (attained by {:?})",
        binding.value, binding.attained_by
    );
    Ok(SideReport { ok: false, rule: None, failing: Some(failing) })
}
