//! Circle diffeomorphisms as degree-one lifts with derivatives: families,
//! orbit iteration at two precisions, rotation numbers by closest-return
//! detection, parameter tuning, and the explicit contraction constant λ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::contfrac::{convergents, value_of_quotients, Convergents};
use crate::dd::{Dd, TWO_PI};
use crate::modulus::Moc;
use crate::quad::{adaptive_simpson, QuadError};

#[derive(Clone, Debug)]
pub enum MapError {
    /// The construction does not yield an orientation-preserving
    /// diffeomorphism (derivative vanishing or negative somewhere).
    NotADiffeo(String),
    /// Degree-one or derivative-consistency validation failed.
    InvalidMap(String),
    /// An exact return was observed: the rotation number is rational.
    PeriodicOrbitDetected { period: u64 },
    /// The iteration budget ran out before the requested depth.
    DepthExhausted { reached: usize, demanded: usize },
    /// Parameter tuning did not converge within its bisection budget.
    NoConvergence(String),
    /// Adaptive quadrature failed to stabilize.
    QuadratureFailure,
    /// Derivative lost positivity along an orbit.
    NonPositiveDerivative { at: f64 },
}

impl std::fmt::Display for MapError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapError::NotADiffeo(m) => write!(f, "not a diffeomorphism: {m}"),
            MapError::InvalidMap(m) => write!(f, "invalid map: {m}"),
            MapError::PeriodicOrbitDetected { period } => {
                write!(f, "periodic orbit detected at iterate {period}")
            }
            MapError::DepthExhausted { reached, demanded } => {
                write!(f, "depth exhausted: reached {reached} of {demanded} quotients")
            }
            MapError::NoConvergence(m) => write!(f, "tuning did not converge: {m}"),
            MapError::QuadratureFailure => write!(f, "quadrature failed to stabilize"),
            MapError::NonPositiveDerivative { at } => {
                write!(f, "nonpositive derivative at x = {at}")
            }
        }
    }
}

impl std::error::Error for MapError {}

/// Numeric backend for orbit computations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Plain f64 (≈16 significant digits).
    #[default]
    Standard,
    /// Double-double (≈31 significant digits) for depths with q_n beyond
    /// ~10⁵. Custom lifts fall back to f64 evaluation.
    Extended,
}

type LiftFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    /// x ↦ x + ρ.
    Rigid { rho: f64 },
    /// x ↦ x + Ω + (K/2π) sin(2πx); a diffeomorphism iff K < 1.
    Sine { omega: f64, k: f64 },
    /// User-supplied lift with first and second derivatives.
    Custom { lift: LiftFn, d1: LiftFn, d2: LiftFn },
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Rigid { rho } => write!(f, "Rigid {{ rho: {rho} }}"),
            Family::Sine { omega, k } => write!(f, "Sine {{ omega: {omega}, k: {k} }}"),
            Family::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

/// Serializable map description for configs and artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MapSpec {
    Rigid { rho: f64 },
    Sine { omega: f64, k: f64 },
}

/// An orientation-preserving circle diffeomorphism given by a degree-one
/// lift. Immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct CircleMap {
    family: Family,
    smoothness: Moc,
    precision: Precision,
}

impl CircleMap {
    pub fn rigid(rho: f64) -> Result<CircleMap, MapError> {
        let map = CircleMap {
            family: Family::Rigid { rho },
            smoothness: Moc::zero(),
            precision: Precision::Standard,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn sine(omega: f64, k: f64) -> Result<CircleMap, MapError> {
        if !(0.0..1.0).contains(&k) {
            return Err(MapError::NotADiffeo(format!(
                "sine family needs 0 <= K < 1, got K = {k} (min T' = 1 - K)"
            )));
        }
        // Analytic family: the second derivative is Lipschitz.
        let map = CircleMap {
            family: Family::Sine { omega, k },
            smoothness: Moc::lipschitz(),
            precision: Precision::Standard,
        };
        map.validate()?;
        Ok(map)
    }

    /// Custom lift; `smoothness` is the modulus admitted by the second
    /// derivative (defaults to Lipschitz).
    pub fn custom(
        lift: LiftFn,
        d1: LiftFn,
        d2: LiftFn,
        smoothness: Option<Moc>,
    ) -> Result<CircleMap, MapError> {
        let map = CircleMap {
            family: Family::Custom { lift, d1, d2 },
            smoothness: smoothness.unwrap_or_else(Moc::lipschitz),
            precision: Precision::Standard,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn from_spec(spec: &MapSpec) -> Result<CircleMap, MapError> {
        match spec {
            MapSpec::Rigid { rho } => CircleMap::rigid(*rho),
            MapSpec::Sine { omega, k } => CircleMap::sine(*omega, *k),
        }
    }

    pub fn with_precision(mut self, precision: Precision) -> CircleMap {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn spec(&self) -> Option<MapSpec> {
        match &self.family {
            Family::Rigid { rho } => Some(MapSpec::Rigid { rho: *rho }),
            Family::Sine { omega, k } => Some(MapSpec::Sine { omega: *omega, k: *k }),
            Family::Custom { .. } => None,
        }
    }

    /// Modulus of continuity admitted by the second derivative of the lift.
    pub fn smoothness(&self) -> &Moc {
        &self.smoothness
    }

    pub fn is_rigid(&self) -> bool {
        matches!(self.family, Family::Rigid { .. })
    }

    /// The lift L(x), with L(x+1) = L(x) + 1.
    pub fn lift(&self, x: f64) -> f64 {
        match &self.family {
            Family::Rigid { rho } => x + rho,
            Family::Sine { omega, k } => {
                let w = 2.0 * std::f64::consts::PI;
                x + omega + k / w * (w * x).sin()
            }
            Family::Custom { lift, .. } => lift(x),
        }
    }

    fn lift_dd(&self, x: Dd) -> Dd {
        match &self.family {
            Family::Rigid { rho } => x.add(Dd::from_f64(*rho)),
            Family::Sine { omega, k } => {
                let amp = Dd::from_f64(*k).div(TWO_PI);
                x.add(Dd::from_f64(*omega))
                    .add(amp.mul(TWO_PI.mul(x).sin()))
            }
            Family::Custom { lift, .. } => Dd::from_f64(lift(x.to_f64())),
        }
    }

    /// L'(x) > 0.
    pub fn d1(&self, x: f64) -> f64 {
        match &self.family {
            Family::Rigid { .. } => 1.0,
            Family::Sine { k, .. } => 1.0 + k * (2.0 * std::f64::consts::PI * x).cos(),
            Family::Custom { d1, .. } => d1(x),
        }
    }

    /// L''(x).
    pub fn d2(&self, x: f64) -> f64 {
        match &self.family {
            Family::Rigid { .. } => 0.0,
            Family::Sine { k, .. } => {
                let w = 2.0 * std::f64::consts::PI;
                -k * w * (w * x).sin()
            }
            Family::Custom { d2, .. } => d2(x),
        }
    }

    /// T(x) = {L(x)}.
    pub fn map(&self, x: f64) -> f64 {
        frac(self.lift(x))
    }

    /// T^n(x), evaluated at the configured precision.
    pub fn iterate(&self, x: f64, n: u64) -> f64 {
        match self.precision {
            Precision::Standard => {
                let mut y = frac(x);
                for _ in 0..n {
                    y = frac(self.lift(y));
                }
                y
            }
            Precision::Extended => {
                let mut y = Dd::from_f64(x).fract();
                for _ in 0..n {
                    y = self.lift_dd(y).fract();
                }
                y.to_f64()
            }
        }
    }

    /// L^n(x). Positions are iterated on the circle and the winding is
    /// accumulated separately, so the value stays accurate for large n.
    pub fn lift_iterate(&self, x: f64, n: u64) -> f64 {
        match self.precision {
            Precision::Standard => {
                let mut y = x;
                let mut winding = 0.0f64;
                for _ in 0..n {
                    let z = self.lift(y);
                    let w = z.floor();
                    winding += w;
                    y = z - w;
                }
                y + winding
            }
            Precision::Extended => {
                let mut y = Dd::from_f64(x);
                let mut winding = Dd::from_f64(0.0);
                for _ in 0..n {
                    let z = self.lift_dd(y);
                    let w = z.floor();
                    winding = winding.add(w);
                    y = z.sub(w);
                }
                y.add(winding).to_f64()
            }
        }
    }

    /// First `m` orbit points T^i(x0), i = 0..m-1.
    pub fn orbit(&self, x0: f64, m: usize) -> Result<OrbitData, MapError> {
        let mut points = Vec::with_capacity(m);
        match self.precision {
            Precision::Standard => {
                let mut y = frac(x0);
                for _ in 0..m {
                    points.push(y);
                    y = frac(self.lift(y));
                }
            }
            Precision::Extended => {
                let mut y = Dd::from_f64(x0).fract();
                for _ in 0..m {
                    points.push(y.to_f64());
                    y = self.lift_dd(y).fract();
                }
            }
        }
        let mut sorted_idx: Vec<usize> = (0..m).collect();
        sorted_idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        for w in sorted_idx.windows(2) {
            let gap = points[w[1]] - points[w[0]];
            if gap.abs() < 1e-14 {
                return Err(MapError::PeriodicOrbitDetected {
                    period: (w[1] as i64 - w[0] as i64).unsigned_abs(),
                });
            }
        }
        Ok(OrbitData {
            x0: frac(x0),
            points,
            sorted_idx,
        })
    }

    fn validate(&self) -> Result<(), MapError> {
        // Degree one.
        for i in 0..64 {
            let x = i as f64 / 64.0 - 0.31;
            let r = self.lift(x + 1.0) - self.lift(x) - 1.0;
            if r.abs() > 1e-12 {
                return Err(MapError::InvalidMap(format!(
                    "lift is not degree one: residual {r:.3e} at x = {x}"
                )));
            }
        }
        // Orientation preserving.
        for i in 0..512 {
            let x = i as f64 / 512.0;
            let d = self.d1(x);
            if !(d > 0.0) {
                return Err(MapError::NotADiffeo(format!("T'({x}) = {d}")));
            }
        }
        // Second derivative consistent with the first.
        let h = 1e-4;
        for i in 0..32 {
            let x = i as f64 / 32.0 + 0.013;
            let fd = (self.d1(x + h) - self.d1(x - h)) / (2.0 * h);
            let err = (fd - self.d2(x)).abs() / self.d2(x).abs().max(1.0);
            if err > 1e-5 {
                return Err(MapError::InvalidMap(format!(
                    "second derivative inconsistent with first at x = {x}: fd {fd}, d2 {}",
                    self.d2(x)
                )));
            }
        }
        Ok(())
    }
}

/// Fractional part mapped into [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Circular displacement of `b` relative to `a`, in [0, 1).
pub fn circ_displacement(a: f64, b: f64) -> f64 {
    frac(b - a)
}

/// Circle distance min(d, 1-d).
pub fn circ_distance(a: f64, b: f64) -> f64 {
    let d = circ_displacement(a, b);
    d.min(1.0 - d)
}

/// A finite orbit with its circular ordering.
#[derive(Clone, Debug)]
pub struct OrbitData {
    pub x0: f64,
    /// ξ_i = T^i(ξ_0).
    pub points: Vec<f64>,
    /// Permutation sorting the points on [0,1).
    pub sorted_idx: Vec<usize>,
}

impl OrbitData {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Closest-return analysis of an orbit: detected return times, recovered
/// quotients and convergents, and the rotation-number estimate p_N/q_N.
#[derive(Clone, Debug)]
pub struct RotationAnalysis {
    pub ks: Vec<u64>,
    /// q_0..q_N (detected return times; q_0 = 1).
    pub q_returns: Vec<u64>,
    /// Orbit distance to the base point at each return time q_n
    /// (the fundamental-segment length |Δ^{(n)}(ξ₀)|), n = 0..N.
    pub return_gaps: Vec<f64>,
    /// Convergents of the recovered quotients.
    pub convergents: Convergents,
    /// p_N / q_N.
    pub rho_est: f64,
    /// Rotation gaps Δ_n = |q_n ρ − p_n| for n = -1..N (shifted by one),
    /// from a midpoint estimate of ρ inside the depth-N enclosure
    /// (approximate at the last level or two).
    pub deltas: Vec<f64>,
}

impl RotationAnalysis {
    pub fn depth(&self) -> usize {
        self.ks.len()
    }

    /// q_n for n = 0..=N.
    pub fn q(&self, n: usize) -> u64 {
        self.q_returns[n]
    }

    /// Δ_n for n >= -1.
    pub fn delta(&self, n: i32) -> f64 {
        self.deltas[(n + 1) as usize]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RotationOptions {
    pub max_iter: u64,
    /// When positive, stop as soon as the estimate resolution 1/q_N² drops
    /// below this value (but never before `min_depth` quotients).
    pub resolve: f64,
    pub min_depth: usize,
    /// Stop as soon as the convergent enclosure proves the rotation number
    /// differs from this value; the sign of `rho_est - target` is then
    /// already correct. Used by parameter tuning.
    pub exclude_target: Option<f64>,
}

impl Default for RotationOptions {
    fn default() -> Self {
        RotationOptions {
            max_iter: 2_000_000,
            resolve: 0.0,
            min_depth: 0,
            exclude_target: None,
        }
    }
}

/// Rotation number and partial quotients of `map` by closest-return
/// detection from `x0`, to `depth` quotients.
pub fn rotation_number(
    map: &CircleMap,
    x0: f64,
    depth: usize,
) -> Result<RotationAnalysis, MapError> {
    rotation_number_opts(map, x0, depth, RotationOptions::default())
}

pub fn rotation_number_opts(
    map: &CircleMap,
    x0: f64,
    depth: usize,
    opts: RotationOptions,
) -> Result<RotationAnalysis, MapError> {
    match rotation_core(map, x0, depth, opts)? {
        DetectOutcome::Done(an) => Ok(an),
        DetectOutcome::Periodic { period } => Err(MapError::PeriodicOrbitDetected { period }),
        DetectOutcome::Stall { reached, .. } => Err(MapError::DepthExhausted {
            reached,
            demanded: depth,
        }),
    }
}

/// Detection outcome with stall diagnostics (internal).
enum DetectOutcome {
    Done(RotationAnalysis),
    /// Exact return through the base point: rational rotation number.
    Periodic { period: u64 },
    /// Records dried up or broke the return combinatorics. When the tail of
    /// the record times settles into an arithmetic progression the orbit is
    /// locking onto a cycle of that period.
    Stall { reached: usize, cycle: Option<u64> },
}

fn rotation_core(
    map: &CircleMap,
    x0: f64,
    depth: usize,
    opts: RotationOptions,
) -> Result<DetectOutcome, MapError> {
    if depth == 0 {
        return Err(MapError::InvalidMap("depth must be >= 1".into()));
    }
    match map.precision {
        Precision::Standard => {
            let x0 = frac(x0);
            let mut y = x0;
            let stepper = std::iter::from_fn(move || {
                y = frac(map.lift(y));
                Some(circ_displacement(x0, y))
            });
            Ok(detect_returns(stepper, depth, opts))
        }
        Precision::Extended => {
            let x0dd = Dd::from_f64(x0).fract();
            let mut y = x0dd;
            let stepper = std::iter::from_fn(move || {
                y = map.lift_dd(y).fract();
                Some(y.sub(x0dd).fract().to_f64())
            });
            Ok(detect_returns(stepper, depth, opts))
        }
    }
}

/// Core record detector. `displacements` yields D_i = (T^i ξ₀ − ξ₀) mod 1
/// for i = 1, 2, …
///
/// One-sided records (a point landing strictly inside the current gap on
/// its side of ξ₀) occur exactly at the semiconvergent times; they come in
/// alternating same-side runs, and the n-th run has k_n entries whose last
/// time is q_n. This uses only order comparisons on a fixed side, which the
/// combinatorial equivalence with the rotation preserves exactly, so it is
/// robust for distorted (nonrigid) maps where cross-side distance
/// comparisons can wobble.
fn detect_returns(
    displacements: impl Iterator<Item = f64>,
    depth: usize,
    opts: RotationOptions,
) -> DetectOutcome {
    // Closed runs: (k_n, q_n, |Δ^{(n)}(ξ₀)|).
    let mut groups: Vec<(u64, u64, f64)> = Vec::new();
    // Open run: count, last time, last distance, side (true = above).
    let mut open: Option<(u64, u64, f64, bool)> = None;
    let mut best_above = f64::INFINITY;
    let mut best_below = f64::INFINITY;
    let mut gap0 = f64::NAN; // |Δ^{(0)}(ξ₀)| = displacement of ξ_1
    // Tails of record times per side, for cycle diagnosis on stalls.
    let mut tail_above: Vec<u64> = Vec::new();
    let mut tail_below: Vec<u64> = Vec::new();
    // Running convergents of the closed groups, for the exclusion stop.
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p_cur, mut q_cur) = (0u64, 1u64);
    let mut excluded = false;

    let mut i: u64 = 0;
    for d in displacements {
        i += 1;
        if i > opts.max_iter {
            break;
        }
        if d.min(1.0 - d) < 1e-13 {
            return DetectOutcome::Periodic { period: i };
        }
        if i == 1 {
            // ξ_1 seeds both sides: it is q_0 from above and opens the k_1
            // run from below.
            gap0 = d;
            best_above = d;
            best_below = 1.0 - d;
            open = Some((1, 1, 1.0 - d, false));
            tail_above.push(1);
            tail_below.push(1);
            continue;
        }
        let (dist, above) = if d < best_above {
            (d, true)
        } else if 1.0 - d < best_below {
            (1.0 - d, false)
        } else {
            continue;
        };
        if above {
            best_above = dist;
            push_tail(&mut tail_above, i);
        } else {
            best_below = dist;
            push_tail(&mut tail_below, i);
        }
        let (count, last_t, last_d, side) = open.expect("seeded at i = 1");
        if side == above {
            open = Some((count + 1, i, dist, side));
            continue;
        }
        // Side flip: the previous run closed at its last record.
        groups.push((count, last_t, last_d));
        open = Some((1, i, dist, above));
        let k_closed = count;
        let p_next = k_closed * p_cur + p_prev;
        let q_next = k_closed * q_cur + q_prev;
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);

        // Run-boundary bookkeeping: enough depth, resolved finely enough,
        // or the enclosure already excludes the comparison target.
        let have = groups.len();
        if have >= depth {
            break;
        }
        if opts.resolve > 0.0 && have >= opts.min_depth.max(1) {
            let q = last_t as f64;
            if 1.0 / (q * q) < opts.resolve {
                break;
            }
        }
        if let Some(target) = opts.exclude_target {
            let a = p_cur as f64 / q_cur as f64;
            let b = (p_cur + p_prev) as f64 / (q_cur + q_prev) as f64;
            if target < a.min(b) || target > a.max(b) {
                excluded = true;
                break;
            }
        }
    }

    // A mid-run truncation also leaves one side in arithmetic progression
    // (the semiconvergent steps), so a lock is only diagnosed when both
    // sides march with the same period and stay interleaved.
    let cycle = || match (cycle_hint(&tail_above), cycle_hint(&tail_below)) {
        (Some(a), Some(b)) if a == b => {
            let (&la, &lb) = (tail_above.last().unwrap(), tail_below.last().unwrap());
            (la.abs_diff(lb) <= 2 * a).then_some(a)
        }
        _ => None,
    };

    let available = groups.len();
    if available == 0 {
        return DetectOutcome::Stall {
            reached: 0,
            cycle: cycle(),
        };
    }
    let take = available.min(depth);
    if take < depth && !excluded {
        let q_last = groups[available - 1].1 as f64;
        let resolved = opts.resolve > 0.0
            && available >= opts.min_depth
            && 1.0 / (q_last * q_last) < opts.resolve;
        if !resolved {
            return DetectOutcome::Stall {
                reached: available,
                cycle: cycle(),
            };
        }
    }

    // Assemble q_0..q_N, gaps, and quotients; validate the recurrence.
    let mut qs: Vec<u64> = Vec::with_capacity(take + 1);
    let mut gaps: Vec<f64> = Vec::with_capacity(take + 1);
    let mut ks: Vec<u64> = Vec::with_capacity(take);
    qs.push(1);
    gaps.push(gap0);
    for (n, &(k, q, g)) in groups[..take].iter().enumerate() {
        let q_prev = qs[n];
        let q_prev2 = if n == 0 { 0 } else { qs[n - 1] };
        if q != k * q_prev + q_prev2 {
            // Return combinatorics violated: locking contaminated the runs.
            return DetectOutcome::Stall {
                reached: n,
                cycle: cycle(),
            };
        }
        ks.push(k);
        qs.push(q);
        gaps.push(g);
    }

    let conv = convergents(&ks);
    let nn = conv.ps.len() - 1;
    let (p_last, q_last) = (conv.ps[nn] as f64, conv.qs[nn] as f64);
    let (p_prev, q_prev) = (conv.ps[nn - 1] as f64, conv.qs[nn - 1] as f64);
    let rho_est = p_last / q_last;
    // Midpoint of the depth-N enclosure keeps every Δ_n nonzero.
    let rho_mid = (p_last + 0.5 * p_prev) / (q_last + 0.5 * q_prev);
    let deltas: Vec<f64> = conv
        .ps
        .iter()
        .zip(&conv.qs)
        .map(|(&p, &q)| (q as f64 * rho_mid - p as f64).abs())
        .collect();

    DetectOutcome::Done(RotationAnalysis {
        ks,
        q_returns: qs.to_vec(),
        return_gaps: gaps,
        convergents: conv,
        rho_est,
        deltas,
    })
}

fn push_tail(tail: &mut Vec<u64>, t: u64) {
    if tail.len() == 6 {
        tail.remove(0);
    }
    tail.push(t);
}

/// An arithmetic progression in the last record times betrays convergence
/// toward a periodic cycle; the common difference is the cycle period.
fn cycle_hint(tail: &[u64]) -> Option<u64> {
    if tail.len() < 4 {
        return None;
    }
    let d = tail[tail.len() - 1] - tail[tail.len() - 2];
    for w in tail[tail.len() - 4..].windows(2) {
        if w[1] - w[0] != d {
            return None;
        }
    }
    (d > 0).then_some(d)
}

/// Birkhoff-average rotation number (L^n(x0) − x0)/n; a slow O(1/n)
/// cross-check of the closest-return estimate.
pub fn birkhoff_rotation_number(map: &CircleMap, x0: f64, n: u64) -> f64 {
    (map.lift_iterate(x0, n) - x0) / n as f64
}

/// Tune Ω so that sine(Ω, K) carries the target quotient prefix.
///
/// Bisection on Ω over the displacement bracket; mode-locking plateaus are
/// escaped because the probe compares quotient-resolved estimates (or exact
/// plateau rationals) against the target value, not a fixed-depth estimate.
/// The result is verified by re-running closest-return detection at a depth
/// fine enough to resolve `tol`.
pub fn tune_parameter(
    k: f64,
    target_ks: &[u64],
    rho_star: Option<f64>,
    tol: f64,
) -> Result<f64, MapError> {
    if !(0.0..1.0).contains(&k) {
        return Err(MapError::NotADiffeo(format!("K = {k} outside [0,1)")));
    }
    if target_ks.is_empty() || tol <= 0.0 {
        return Err(MapError::NoConvergence(
            "need a nonempty target prefix and a positive tolerance".into(),
        ));
    }
    let rho_star = rho_star.unwrap_or_else(|| {
        // Default target value: the prefix extended periodically once.
        let doubled: Vec<u64> = target_ks.iter().chain(target_ks.iter()).cloned().collect();
        value_of_quotients(&doubled)
    });
    if k == 0.0 {
        return Ok(rho_star);
    }

    let depth = target_ks.len();
    let halfwidth = k / (2.0 * std::f64::consts::PI) + 1e-9;
    let mut lo = rho_star - halfwidth;
    let mut hi = rho_star + halfwidth;
    let x0 = 0.0;

    // ρ(Ω) − ρ*, resolved to tol, or to the exact rational of a locking
    // cycle. Budgets escalate when neither resolution nor a cycle shows up
    // within the orbit length (the next closest return can sit at k·q_n with
    // a large quotient k).
    let probe = |omega: f64, precision: Precision| -> Result<f64, MapError> {
        let map = CircleMap::sine(omega, k)?.with_precision(precision);
        let mut budget: u64 = 1_000_000;
        loop {
            match rotation_core(
                &map,
                x0,
                depth + 40,
                RotationOptions {
                    max_iter: budget,
                    resolve: tol * 0.25,
                    min_depth: 1,
                    exclude_target: Some(rho_star),
                },
            )? {
                DetectOutcome::Done(an) => return Ok(an.rho_est - rho_star),
                DetectOutcome::Periodic { period } => {
                    let r = (map.lift_iterate(x0, period) - x0) / period as f64;
                    return Ok((r * period as f64).round() / period as f64 - rho_star);
                }
                DetectOutcome::Stall { cycle, .. } => {
                    if let Some(q) = cycle.filter(|&q| q <= 20_000) {
                        // Locked on a cycle of period q: round a long average
                        // to the exact rational p/q.
                        let b = birkhoff_rotation_number(&map, x0, 200_000);
                        return Ok((b * q as f64).round() / q as f64 - rho_star);
                    }
                    if budget >= 10_000_000 {
                        // Last resort; only reachable for extreme quotients.
                        return Ok(birkhoff_rotation_number(&map, x0, 200_000) - rho_star);
                    }
                    budget *= 10;
                }
            }
        }
    };

    for _ in 0..250 {
        if hi - lo < (tol * 0.1).max(5e-16) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // Fine brackets need the extended backend: at double precision, long
        // orbits of the contracting map can lock onto spurious cycles.
        let precision = if hi - lo < 1e-5 {
            Precision::Extended
        } else {
            Precision::Standard
        };
        if probe(mid, precision)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = 0.5 * (lo + hi);

    // Verification on the tuned map, at extended precision.
    let map = CircleMap::sine(omega, k)?.with_precision(Precision::Extended);
    let an = rotation_number_opts(
        &map,
        x0,
        depth + 40,
        RotationOptions {
            max_iter: 2_000_000,
            resolve: tol * 0.25,
            min_depth: depth,
            exclude_target: None,
        },
    )
    .map_err(|e| MapError::NoConvergence(format!("verification failed: {e}")))?;
    if an.ks.len() < depth || an.ks[..depth] != target_ks[..depth] {
        return Err(MapError::NoConvergence(format!(
            "tuned map quotients {:?} do not reproduce the target {:?}",
            an.ks, target_ks
        )));
    }
    if (an.rho_est - rho_star).abs() >= tol {
        return Err(MapError::NoConvergence(format!(
            "estimate {} vs target {}: |diff| = {:.3e} >= tol {tol:.3e}",
            an.rho_est,
            rho_star,
            (an.rho_est - rho_star).abs()
        )));
    }
    Ok(omega)
}

/// The explicit contraction constant of the classical theory:
/// C = ∫₀¹ |T''/T'| dx and λ = 1/√(1 + e^{-C}) ∈ (1/2, 1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DenjoyLambda {
    pub c: f64,
    pub lambda: f64,
}

pub fn denjoy_lambda(map: &CircleMap) -> Result<DenjoyLambda, MapError> {
    let integrand = |x: f64| (map.d2(x) / map.d1(x)).abs();
    // Split the unit interval to keep the |·| kinks at panel boundaries.
    let mut c = 0.0;
    for j in 0..8 {
        let a = j as f64 / 8.0;
        let b = (j + 1) as f64 / 8.0;
        c += adaptive_simpson(&integrand, a, b, 1.25e-9).map_err(|e| match e {
            QuadError::NotConverged | QuadError::Inconclusive { .. } => {
                MapError::QuadratureFailure
            }
        })?;
    }
    let lambda = 1.0 / (1.0 + (-c).exp()).sqrt();
    Ok(DenjoyLambda { c, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.6180339887498949;
    const SQRT2M1: f64 = 0.41421356237309515;

    #[test]
    fn rigid_map_values() {
        let map = CircleMap::rigid(GOLDEN).unwrap();
        assert!((map.map(0.25) - 0.8680339887498949).abs() < 1e-15);
    }

    #[test]
    fn sine_with_zero_coupling_is_rigid() {
        let s = CircleMap::sine(0.5, 0.0).unwrap();
        let r = CircleMap::rigid(0.5).unwrap();
        for i in 0..50 {
            let x = i as f64 / 50.0;
            assert!((s.lift(x) - r.lift(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn overcritical_sine_rejected() {
        assert!(matches!(
            CircleMap::sine(0.5, 1.05),
            Err(MapError::NotADiffeo(_))
        ));
    }

    #[test]
    fn iterate_identity_and_arithmetic() {
        let map = CircleMap::rigid(GOLDEN).unwrap();
        assert_eq!(map.iterate(0.37, 0), 0.37);
        let v = map.iterate(0.0, 3);
        assert!((v - frac(3.0 * GOLDEN)).abs() < 1e-12);
        assert!((v - 0.8541019662496847).abs() < 1e-12);
    }

    #[test]
    fn lift_iterate_composition_law() {
        let map = CircleMap::sine(0.61, 0.5).unwrap();
        let x = 0.123;
        let whole = map.lift_iterate(x, 10_000);
        let part = map.lift_iterate(x, 7_300);
        let composed = map.lift_iterate(frac(part), 2_700) + part.floor();
        assert!((whole - composed).abs() < 1e-9, "{whole} vs {composed}");
    }

    #[test]
    fn rotation_number_of_golden_rotation() {
        let map = CircleMap::rigid(GOLDEN).unwrap();
        let an = rotation_number(&map, 0.2, 8).unwrap();
        assert_eq!(an.ks, vec![1; 8]);
        assert_eq!(an.q_returns, vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
        assert!((an.rho_est - GOLDEN).abs() < 1.0 / (34.0 * 34.0));
    }

    #[test]
    fn rotation_number_of_sqrt2_rotation() {
        let map = CircleMap::rigid(SQRT2M1).unwrap();
        let an = rotation_number(&map, 0.0, 5).unwrap();
        assert_eq!(an.ks, vec![2; 5]);
        assert_eq!(an.q_returns, vec![1, 2, 5, 12, 29, 70]);
    }

    #[test]
    fn rational_rotation_detected() {
        let map = CircleMap::rigid(1.0 / 3.0).unwrap();
        match rotation_number(&map, 0.1, 4) {
            Err(MapError::PeriodicOrbitDetected { period }) => assert_eq!(period, 3),
            other => panic!("expected periodic detection, got {other:?}"),
        }
    }

    #[test]
    fn rigid_estimates_within_quadratic_resolution() {
        // Depths adapted to each number's quotient growth.
        for &(rho, depth) in &[
            (0.123456789, 3),
            (0.7234567, 7),
            (GOLDEN, 12),
            (SQRT2M1, 9),
            (1f64.tanh(), 6),
        ] {
            let map = CircleMap::rigid(rho).unwrap();
            let an = rotation_number(&map, 0.0, depth).unwrap();
            let qn = *an.convergents.qs.last().unwrap() as f64;
            assert!(
                (an.rho_est - rho).abs() < 1.0 / (qn * qn),
                "rho={rho}: est {} q={qn}",
                an.rho_est
            );
        }
    }

    #[test]
    fn return_gaps_match_rotation_gaps_for_rigid() {
        let map = CircleMap::rigid(GOLDEN).unwrap();
        let an = rotation_number(&map, 0.0, 10).unwrap();
        for n in 0..=10usize {
            let expect = GOLDEN.powi(n as i32 + 1);
            assert!(
                (an.return_gaps[n] - expect).abs() < 1e-9,
                "n={n}: {} vs {expect}",
                an.return_gaps[n]
            );
        }
    }

    #[test]
    fn rotation_number_monotone_in_omega() {
        let mut prev = -1.0;
        for i in 0..24 {
            let omega = 0.35 + 0.3 * i as f64 / 24.0;
            let map = CircleMap::sine(omega, 0.9).unwrap();
            let r = birkhoff_rotation_number(&map, 0.0, 30_000);
            assert!(r >= prev - 1e-4, "omega={omega}: {r} < {prev}");
            prev = r;
        }
    }

    #[test]
    fn extended_precision_agrees_with_standard() {
        let map = CircleMap::sine(0.61, 0.5).unwrap();
        let ext = map.clone().with_precision(Precision::Extended);
        let a = map.iterate(0.1, 2_000);
        let b = ext.iterate(0.1, 2_000);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        let an_s = rotation_number(&map, 0.0, 10).unwrap();
        let an_e = rotation_number(&ext, 0.0, 10).unwrap();
        assert_eq!(an_s.ks, an_e.ks);
    }

    #[test]
    fn tune_zero_coupling_returns_target() {
        let omega = tune_parameter(0.0, &[1; 10], Some(GOLDEN), 1e-12).unwrap();
        assert_eq!(omega, GOLDEN);
    }

    #[test]
    fn tune_golden_at_half_coupling() {
        let omega = tune_parameter(0.5, &[1; 10], Some(GOLDEN), 1e-10).unwrap();
        let map = CircleMap::sine(omega, 0.5).unwrap();
        let an = rotation_number(&map, 0.0, 10).unwrap();
        assert_eq!(an.ks, vec![1; 10]);
    }

    #[test]
    fn tune_twos_at_high_coupling() {
        let omega = tune_parameter(0.9, &[2; 8], Some(SQRT2M1), 1e-8).unwrap();
        let map = CircleMap::sine(omega, 0.9).unwrap();
        let an = rotation_number(&map, 0.0, 8).unwrap();
        assert_eq!(an.ks, vec![2; 8]);
    }

    #[test]
    fn lambda_of_rigid_map() {
        let l = denjoy_lambda(&CircleMap::rigid(GOLDEN).unwrap()).unwrap();
        assert_eq!(l.c, 0.0);
        assert!((l.lambda - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lambda_of_sine_family() {
        // Closed form: C = 2 ln((1+K)/(1-K)).
        let map = CircleMap::sine(0.61, 0.5).unwrap();
        let l = denjoy_lambda(&map).unwrap();
        let c_exact = 2.0 * (1.5f64 / 0.5).ln();
        assert!((l.c - c_exact).abs() < 1e-7, "{} vs {c_exact}", l.c);

        // Brute-force Riemann oracle.
        let n = 1_000_000;
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            acc += (map.d2(x) / map.d1(x)).abs();
        }
        acc /= n as f64;
        assert!((l.c - acc).abs() < 1e-6, "{} vs oracle {acc}", l.c);
        assert!(l.lambda > 0.5 && l.lambda < 1.0);
    }

    #[test]
    fn lambda_in_range_for_every_family() {
        for map in [
            CircleMap::rigid(0.3).unwrap(),
            CircleMap::sine(0.3, 0.2).unwrap(),
            CircleMap::sine(0.77, 0.9).unwrap(),
        ] {
            let l = denjoy_lambda(&map).unwrap();
            assert!(l.lambda > 0.5 && l.lambda < 1.0);
        }
    }

    #[test]
    fn orbit_sorted_and_distinct() {
        let map = CircleMap::rigid(GOLDEN).unwrap();
        let orb = map.orbit(0.0, 144).unwrap();
        for w in orb.sorted_idx.windows(2) {
            assert!(orb.points[w[1]] > orb.points[w[0]]);
        }
    }
}
