//! Moduli of continuity: builders, the Dini test, the geometric-sum
//! modulus, the weaker-than ordering, and empirical modulus fitting.
//!
//! A modulus ϖ is a strictly increasing continuous function on `(0, δ]` with
//! ϖ(0+) = 0; it gauges the uniform continuity of second derivatives in the
//! rest of the crate. Values above δ are clamped to ϖ(δ): only the order at
//! `0+` matters.

use serde::{Deserialize, Serialize};

use crate::fit::{linear_fit, loglog_slope};
use crate::quad::{improper_integral, improper_series, QuadError, TailPolicy, Verdict};

#[derive(Clone, Debug, PartialEq)]
pub enum MocError {
    InvalidParams(String),
    /// Power-series input failing the summability test at the right
    /// endpoint.
    SeriesDiverges,
    /// Geometric-sum modulus requested for a non-Dini base modulus.
    DiniViolated,
    /// A verdict could not be reached within the level budget.
    Inconclusive,
    /// Not enough samples, or too narrow a separation range, for empirical
    /// fitting.
    InsufficientRange(String),
}

impl std::fmt::Display for MocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MocError::InvalidParams(m) => write!(f, "invalid modulus parameters: {m}"),
            MocError::SeriesDiverges => write!(f, "power series fails the summability test"),
            MocError::DiniViolated => write!(f, "base modulus does not satisfy the Dini condition"),
            MocError::Inconclusive => write!(f, "verdict inconclusive within budget"),
            MocError::InsufficientRange(m) => write!(f, "insufficient sample range: {m}"),
        }
    }
}

impl std::error::Error for MocError {}

/// The builder families.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum MocKind {
    /// Identically zero gauge, the degenerate tag of affine maps. Not a
    /// modulus in the strict sense; every consumer treats it as "no
    /// second-derivative variation at all".
    Zero,
    /// ϖ(x) = x.
    Lipschitz,
    /// ϖ(x) = x^α with 0 < α < 1.
    Holder { alpha: f64 },
    /// ϖ(x) = (log x⁻¹)^{-α} with α > 0.
    LogHolder { alpha: f64 },
    /// ϖ(x) = [ (log x⁻¹)(log log x⁻¹) ⋯ (log⋯log x⁻¹)^{1+σ} ]^{-1}
    /// with ℓ iterated logarithms, the last raised to 1+σ.
    IteratedLog { ell: u32, sigma: f64 },
    /// ϖ(x) = Σ_j a_j x^{γ_j} over the given (a_j, γ_j) terms.
    PowerSeries { terms: Vec<(f64, f64)> },
    /// ϖ̃(x) = Σ_{n≥1} ϖ(θⁿ x) over a Dini base modulus.
    GeometricSum { inner: Box<Moc>, theta: f64 },
    /// Table modulus (h, ω(h)), interpolated linearly, 0 at 0.
    Empirical { table: Vec<(f64, f64)> },
}

/// An evaluatable modulus of continuity on `(0, δ]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Moc {
    kind: MocKind,
    delta: f64,
}

impl Moc {
    /// Validating constructor; `delta` overrides the kind's natural domain
    /// endpoint when given (it is always capped by the natural endpoint).
    pub fn new(kind: MocKind, delta: Option<f64>) -> Result<Moc, MocError> {
        let natural = match &kind {
            MocKind::Zero | MocKind::Lipschitz => 1.0,
            MocKind::Holder { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(MocError::InvalidParams(format!(
                        "Hölder exponent must lie in (0,1), got {alpha}"
                    )));
                }
                1.0
            }
            MocKind::LogHolder { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(MocError::InvalidParams(format!(
                        "log-Hölder index must be positive, got {alpha}"
                    )));
                }
                // Right endpoint inside the concavity region, so that
                // subadditivity holds on the whole domain.
                (-(1.0 + alpha)).exp()
            }
            MocKind::IteratedLog { ell, sigma } => {
                if !(*ell >= 1 && *ell <= 3) {
                    return Err(MocError::InvalidParams(format!(
                        "iterated-log depth must be 1..=3, got {ell}"
                    )));
                }
                if !(*sigma > 0.0) {
                    return Err(MocError::InvalidParams(format!(
                        "iterated-log weight must be positive, got {sigma}"
                    )));
                }
                match ell {
                    1 => (-(2.0 + sigma)).exp(),
                    2 => (-(std::f64::consts::E + 0.7).max(3.0 + sigma)).exp(),
                    _ => (-(std::f64::consts::E.exp() + 0.7).max(3.0 + sigma)).exp(),
                }
            }
            MocKind::PowerSeries { terms } => {
                if terms.is_empty() {
                    return Err(MocError::InvalidParams("empty power series".into()));
                }
                if terms.iter().any(|&(a, g)| a <= 0.0 || g <= 0.0) {
                    return Err(MocError::InvalidParams(
                        "power-series coefficients and exponents must be positive".into(),
                    ));
                }
                1.0
            }
            MocKind::GeometricSum { theta, inner } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(MocError::InvalidParams(format!(
                        "geometric ratio must lie in (0,1), got {theta}"
                    )));
                }
                inner.delta
            }
            MocKind::Empirical { table } => {
                if table.is_empty()
                    || table
                        .windows(2)
                        .any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1)
                    || table.iter().any(|&(h, w)| h <= 0.0 || w < 0.0)
                {
                    return Err(MocError::InvalidParams(
                        "empirical table must be sorted with nondecreasing values".into(),
                    ));
                }
                table.last().unwrap().0
            }
        };
        let delta = delta.unwrap_or(natural);
        if !(delta > 0.0) {
            return Err(MocError::InvalidParams(format!(
                "domain endpoint must be positive, got {delta}"
            )));
        }
        let delta = delta.min(natural);
        let moc = Moc { kind, delta };
        if let MocKind::PowerSeries { .. } = &moc.kind {
            moc.check_power_series_summability()?;
        }
        Ok(moc)
    }

    /// The degenerate zero gauge carried by affine families.
    pub fn zero() -> Moc {
        Moc {
            kind: MocKind::Zero,
            delta: 1.0,
        }
    }

    pub fn lipschitz() -> Moc {
        Moc {
            kind: MocKind::Lipschitz,
            delta: 1.0,
        }
    }

    pub fn holder(alpha: f64) -> Result<Moc, MocError> {
        Moc::new(MocKind::Holder { alpha }, None)
    }

    pub fn log_holder(alpha: f64) -> Result<Moc, MocError> {
        Moc::new(MocKind::LogHolder { alpha }, None)
    }

    pub fn iterated_log(ell: u32, sigma: f64) -> Result<Moc, MocError> {
        Moc::new(MocKind::IteratedLog { ell, sigma }, None)
    }

    pub fn power_series(terms: Vec<(f64, f64)>, x_star: f64) -> Result<Moc, MocError> {
        Moc::new(MocKind::PowerSeries { terms }, Some(x_star))
    }

    pub fn empirical_table(table: Vec<(f64, f64)>) -> Result<Moc, MocError> {
        Moc::new(MocKind::Empirical { table }, None)
    }

    pub fn kind(&self) -> &MocKind {
        &self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, MocKind::Zero)
    }

    /// Evaluate ϖ(x). Arguments above δ are clamped to ϖ(δ); nonpositive
    /// arguments return 0.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let x = x.min(self.delta);
        match &self.kind {
            MocKind::Zero => 0.0,
            MocKind::Lipschitz => x,
            MocKind::Holder { alpha } => x.powf(*alpha),
            MocKind::LogHolder { alpha } => (1.0 / x).ln().powf(-alpha),
            MocKind::IteratedLog { ell, sigma } => {
                let mut u = (1.0 / x).ln();
                let mut denom = 1.0;
                for level in 1..=*ell {
                    if level == *ell {
                        denom *= u.powf(1.0 + sigma);
                    } else {
                        denom *= u;
                        u = u.ln();
                    }
                }
                1.0 / denom
            }
            MocKind::PowerSeries { terms } => terms.iter().map(|&(a, g)| a * x.powf(g)).sum(),
            MocKind::GeometricSum { inner, theta } => {
                let mut acc = 0.0;
                let mut scale = *theta;
                for _ in 0..100_000 {
                    let term = inner.eval(scale * x);
                    acc += term;
                    if term < 1e-16 * acc + f64::MIN_POSITIVE {
                        break;
                    }
                    scale *= theta;
                }
                acc
            }
            MocKind::Empirical { table } => {
                let last = table[table.len() - 1];
                if x >= last.0 {
                    return last.1;
                }
                // Interpolate linearly, anchored at (0, 0).
                let i = table.partition_point(|&(h, _)| h <= x);
                let (h1, w1) = table[i];
                let (h0, w0) = if i == 0 { (0.0, 0.0) } else { table[i - 1] };
                w0 + (w1 - w0) * (x - h0) / (h1 - h0)
            }
        }
    }

    /// ϖ(e^{-u}) evaluated stably in the log domain; `u` below
    /// `ln(1/δ)` is clamped to the domain endpoint.
    ///
    /// Logarithmic scales stay representable out to astronomically small
    /// `x = e^{-u}` this way, which is what the Dini and integrability
    /// classifiers probe.
    pub fn eval_log(&self, u: f64) -> f64 {
        let u0 = (1.0 / self.delta).ln();
        let u = u.max(u0);
        match &self.kind {
            MocKind::Zero => 0.0,
            MocKind::Lipschitz => (-u).exp(),
            MocKind::Holder { alpha } => (-alpha * u).exp(),
            MocKind::LogHolder { alpha } => u.powf(-alpha),
            MocKind::IteratedLog { ell, sigma } => {
                let mut v = u;
                let mut denom = 1.0;
                for level in 1..=*ell {
                    if level == *ell {
                        denom *= v.powf(1.0 + sigma);
                    } else {
                        denom *= v;
                        v = v.ln();
                    }
                }
                1.0 / denom
            }
            MocKind::PowerSeries { terms } => {
                terms.iter().map(|&(a, g)| a * (-g * u).exp()).sum()
            }
            MocKind::GeometricSum { inner, theta } => {
                let step = (1.0 / theta).ln();
                let mut acc = 0.0;
                for n in 1..=100_000 {
                    let term = inner.eval_log(u + n as f64 * step);
                    acc += term;
                    if term < 1e-16 * acc + f64::MIN_POSITIVE {
                        break;
                    }
                }
                acc
            }
            MocKind::Empirical { .. } => self.eval((-u).exp()),
        }
    }

    /// ζ(x) = x / ϖ(x), the scale-to-modulus ratio used in the contraction
    /// arguments.
    pub fn zeta(&self, x: f64) -> f64 {
        let w = self.eval(x);
        if w == 0.0 {
            f64::INFINITY
        } else {
            x / w
        }
    }

    /// Right endpoint up to which ζ is guaranteed monotone nondecreasing,
    /// when this kind promises it.
    pub fn zeta_monotone_up_to(&self) -> Option<f64> {
        match &self.kind {
            MocKind::Lipschitz => Some(self.delta),
            MocKind::Holder { .. } => Some(self.delta),
            MocKind::LogHolder { alpha } => Some(self.delta.min((-alpha).exp())),
            _ => None,
        }
    }

    fn check_power_series_summability(&self) -> Result<(), MocError> {
        if let MocKind::PowerSeries { terms } = &self.kind {
            let x_star = self.delta;
            let tau = 0.5 * x_star;
            let s1: f64 = terms.iter().map(|&(a, g)| a * x_star.powf(g)).sum();
            let s2: f64 = terms.iter().map(|&(a, g)| a * tau.powf(g) / g).sum();
            if !s1.is_finite() || !s2.is_finite() || s1 > 1e12 || s2 > 1e12 {
                return Err(MocError::SeriesDiverges);
            }
        }
        Ok(())
    }

    /// Grid check of the modulus axioms: strict increase, decay to 0 along a
    /// shrinking geometric sequence, and spot-checked subadditivity.
    pub fn check_invariants(&self) -> Result<(), MocError> {
        if self.is_zero() {
            return Ok(());
        }
        let flat_ok = matches!(self.kind, MocKind::Empirical { .. });
        let grid = geometric_grid(self.delta * 1e-9, self.delta, 1000);
        for w in grid.windows(2) {
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            if !(b > a || (flat_ok && b >= a)) {
                return Err(MocError::InvalidParams(format!(
                    "not increasing between {} and {}",
                    w[0], w[1]
                )));
            }
        }
        // ϖ(0+) = 0: strictly decreasing along x = δ·10^{-3k}.
        let mut prev = self.eval(self.delta);
        for k in 1..=8 {
            let v = self.eval(self.delta * 10f64.powi(-3 * k));
            if !(v < prev || (flat_ok && v <= prev)) {
                return Err(MocError::InvalidParams("no decay toward 0".into()));
            }
            prev = v;
        }
        // Subadditivity ϖ(x+y) ≤ ϖ(x) + ϖ(y) on a dyadic grid.
        for i in 1..=8u32 {
            for j in i..=8u32 {
                let x = self.delta * 0.5f64.powi(i as i32);
                let y = self.delta * 0.5f64.powi(j as i32);
                if self.eval(x + y) > self.eval(x) + self.eval(y) + 1e-12 {
                    return Err(MocError::InvalidParams(format!(
                        "subadditivity fails at x={x}, y={y}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of the Dini test: the improper integral ∫₀^δ ϖ(x)/x dx and the
/// geometric series Σ ϖ(θⁿδ), each classified finite or divergent.
#[derive(Clone, Copy, Debug)]
pub struct DiniReport {
    pub integral: Verdict,
    pub series: Verdict,
}

impl DiniReport {
    pub fn agrees(&self) -> bool {
        self.integral.is_finite() == self.series.is_finite()
    }
}

/// Evaluate the Dini condition: the integral route uses the substitution
/// `x = e^{-u}`, under which ∫₀^δ ϖ(x)/x dx = ∫_{ln 1/δ}^∞ ϖ(e^{-u}) du;
/// the series route sums ϖ(θⁿδ) along the geometric sequence directly.
pub fn dini_check(m: &Moc, theta: f64) -> Result<DiniReport, MocError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(MocError::InvalidParams(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    let policy = TailPolicy::default();
    let u0 = (1.0 / m.delta()).ln();
    let integral =
        improper_integral(|u| m.eval_log(u), u0, 1.0, policy).map_err(quad_to_moc)?;
    let step = (1.0 / theta).ln();
    let series = improper_series(|n| m.eval_log(u0 + n * step), 1, policy).map_err(quad_to_moc)?;
    Ok(DiniReport { integral, series })
}

fn quad_to_moc(e: QuadError) -> MocError {
    match e {
        QuadError::Inconclusive { .. } | QuadError::NotConverged => MocError::Inconclusive,
    }
}

/// The geometric-sum modulus ϖ̃(x) = Σ_{n≥1} ϖ(θⁿ x); requires the base
/// modulus to satisfy the Dini condition.
pub fn geometric_sum_moc(m: &Moc, theta: f64) -> Result<Moc, MocError> {
    let report = dini_check(m, theta)?;
    if !report.series.is_finite() {
        return Err(MocError::DiniViolated);
    }
    Moc::new(
        MocKind::GeometricSum {
            inner: Box::new(m.clone()),
            theta,
        },
        Some(m.delta()),
    )
}

/// Verdict of the weaker-than comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeakerVerdict {
    /// limsup ϖ₂/ϖ₁ bounded: m1 is weaker than m2.
    Weaker,
    /// ϖ₂/ϖ₁ → 0: m1 is strictly weaker.
    StrictlyWeaker,
    /// ϖ₂/ϖ₁ → ∞.
    NotWeaker,
    Inconclusive,
}

/// Decide whether `m1` is weaker than `m2` by the trend of ϖ₂(x)/ϖ₁(x) on a
/// geometric grid spanning 12 decades below the common domain endpoint.
pub fn weaker_than(m1: &Moc, m2: &Moc) -> WeakerVerdict {
    match (m1.is_zero(), m2.is_zero()) {
        (true, true) => return WeakerVerdict::Weaker,
        (true, false) => return WeakerVerdict::NotWeaker,
        (false, true) => return WeakerVerdict::StrictlyWeaker,
        _ => {}
    }
    let delta = m1.delta().min(m2.delta());
    let decades = 12;
    let mut js = Vec::with_capacity(decades + 1);
    let mut logr = Vec::with_capacity(decades + 1);
    for j in 0..=decades {
        let x = delta * 10f64.powi(-(j as i32));
        let (w1, w2) = (m1.eval(x), m2.eval(x));
        if w1 <= 0.0 || w2 <= 0.0 || !w1.is_finite() || !w2.is_finite() {
            return WeakerVerdict::Inconclusive;
        }
        js.push(j as f64);
        logr.push((w2 / w1).log10());
    }
    let (slope, _) = match linear_fit(&js, &logr) {
        Some(v) => v,
        None => return WeakerVerdict::Inconclusive,
    };
    // slope = decades of ratio change per decade of x (x shrinking).
    if slope < -0.02 {
        return WeakerVerdict::StrictlyWeaker;
    }
    if slope > 0.02 {
        return WeakerVerdict::NotWeaker;
    }
    let spread = logr.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - logr.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 2.0 {
        WeakerVerdict::Weaker
    } else {
        WeakerVerdict::Inconclusive
    }
}

/// Fitted regularity class of an empirical modulus.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalFit {
    /// The table modulus ω(h) = max{|f(x)−f(y)| : |x−y| ≤ h}.
    pub moc: Moc,
    /// Log–log least-squares slope of ω against h (the Hölder exponent).
    pub holder_exponent: f64,
    /// Fitted log-Hölder index, populated when the log–log slope is < 0.05.
    pub log_index: Option<f64>,
    /// True when ω vanishes identically (constant data).
    pub degenerate: bool,
}

/// Build the empirical modulus of a sampled function and fit its class.
///
/// Requires at least 64 samples whose pair separations span three decades.
pub fn empirical_moc(samples: &[(f64, f64)]) -> Result<EmpiricalFit, MocError> {
    if samples.len() < 64 {
        return Err(MocError::InsufficientRange(format!(
            "{} samples, need at least 64",
            samples.len()
        )));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_gap = pts
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let span = pts[pts.len() - 1].0 - pts[0].0;
    if !(min_gap.is_finite() && span > 0.0) || span / min_gap < 1e3 {
        return Err(MocError::InsufficientRange(format!(
            "separations span {:.2} decades, need 3",
            (span / min_gap).log10()
        )));
    }

    // ω on a geometric separation grid, one pass over all pairs.
    let bins = 48usize;
    let lo = min_gap;
    let ratio = (span / lo).powf(1.0 / (bins as f64 - 1.0));
    let hs: Vec<f64> = (0..bins).map(|b| lo * ratio.powi(b as i32)).collect();
    let mut wmax = vec![0.0f64; bins];
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let sep = pts[j].0 - pts[i].0;
            let df = (pts[j].1 - pts[i].1).abs();
            let b = hs.partition_point(|&h| h < sep).min(bins - 1);
            if df > wmax[b] {
                wmax[b] = df;
            }
        }
    }
    for b in 1..bins {
        if wmax[b] < wmax[b - 1] {
            wmax[b] = wmax[b - 1];
        }
    }

    if wmax[bins - 1] == 0.0 {
        let table = vec![(span, 0.0)];
        return Ok(EmpiricalFit {
            moc: Moc {
                kind: MocKind::Empirical { table },
                delta: span,
            },
            holder_exponent: 0.0,
            log_index: None,
            degenerate: true,
        });
    }

    let table: Vec<(f64, f64)> = hs.iter().cloned().zip(wmax.iter().cloned()).collect();
    // Bins below a few grid spacings only see resolution artifacts; keep
    // them out of the fit.
    let (fit_h, fit_w): (Vec<f64>, Vec<f64>) = table
        .iter()
        .filter(|&&(h, w)| w > 0.0 && h >= 3.0 * lo)
        .cloned()
        .unzip();
    let holder_exponent = loglog_slope(&fit_h, &fit_w).unwrap_or(0.0);
    let log_index = if holder_exponent < 0.05 {
        // log ω against log log(1/h) on the sub-unit part of the grid.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(h, w) in &table {
            if h < 0.99 && w > 0.0 {
                xs.push((1.0 / h).ln().ln());
                ys.push(w.ln());
            }
        }
        linear_fit(&xs, &ys).map(|(s, _)| -s)
    } else {
        None
    };

    Ok(EmpiricalFit {
        moc: Moc {
            kind: MocKind::Empirical { table },
            delta: span,
        },
        holder_exponent,
        log_index,
        degenerate: false,
    })
}

/// `n`-point geometric grid from `a` to `b` (inclusive), increasing.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let r = (b / a).powf(1.0 / (n as f64 - 1.0));
    let mut out: Vec<f64> = (0..n).map(|i| a * r.powi(i as i32)).collect();
    out[n - 1] = b;
    out
}
