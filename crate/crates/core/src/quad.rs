//! Quadrature for the improper integrals that drive the regularity
//! criteria.
//!
//! Everything here works on geometric grids: an integral over `(0, δ]` with
//! an integrable (or not) singularity at `0` is first substituted with
//! `x = θ^t`, which turns it into `∫_{t0}^∞ g(t) dt` for a slowly varying
//! `g ≥ 0`. The half-line integral is accumulated over dyadic blocks
//! `[w·2^i, w·2^{i+1}]` and classified by the behavior of the block sums:
//!
//! - block ratios stable below 1 ⇒ (super)geometric tail, summed in closed
//!   form;
//! - block ratios drifting to 1 ⇒ power scale `B_i ~ i^s`: summable iff
//!   `s < -1`, with a dead band around the critical exponent resolved by
//!   folding the blocks dyadically once more (this is where logarithmic and
//!   iterated-logarithmic scales land);
//! - growing blocks, or partial sums exceeding `blowup_factor` times the
//!   first block ⇒ divergent.
//!
//! The same classifier serves positive series evaluated along geometric
//! index blocks; large blocks are summed by an Euler–Maclaurin corrected
//! integral so the cost stays logarithmic in the index range.

use crate::fit::linear_fit;

/// Outcome of an improper integral or series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    /// Converged; the payload is the computed value (partial sum plus a tail
    /// estimate). For subgeometric tails the tail estimate, and hence the
    /// value, is first-order accurate only; the verdict itself is reliable.
    Finite(f64),
    /// Diverges under the configured policy.
    Divergent,
}

impl Verdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, Verdict::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Verdict::Finite(v) => Some(*v),
            Verdict::Divergent => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum QuadError {
    /// Neither stabilization nor divergence within the block budget.
    Inconclusive { blocks: usize },
    /// An adaptive rule failed to reach its tolerance.
    NotConverged,
}

impl std::fmt::Display for QuadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadError::Inconclusive { blocks } => {
                write!(f, "verdict inconclusive after {blocks} blocks")
            }
            QuadError::NotConverged => write!(f, "adaptive quadrature did not stabilize"),
        }
    }
}

impl std::error::Error for QuadError {}

/// Divergence/stabilization policy for tail classification.
#[derive(Clone, Copy, Debug)]
pub struct TailPolicy {
    /// Geometric-regime tails below `rel_tol * total` finish the evaluation.
    pub rel_tol: f64,
    /// Partial sums exceeding `blowup_factor` times the first nonzero block
    /// are declared divergent.
    pub blowup_factor: f64,
    /// Maximum number of dyadic blocks before giving up.
    pub max_blocks: usize,
    /// Dead band around the critical power `i^{-1}` of block sums.
    pub slope_margin: f64,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            rel_tol: 1e-9,
            blowup_factor: 1e6,
            max_blocks: 140,
            slope_margin: 0.15,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Decision {
    Continue,
    Finite(f64),
    Divergent,
}

/// Classify the partial block sums collected so far.
fn analyze_blocks(blocks: &[f64], policy: &TailPolicy) -> Decision {
    let total: f64 = blocks.iter().sum();
    let first_nonzero = blocks.iter().cloned().find(|&b| b > 0.0);
    let i = blocks.len();
    let first = match first_nonzero {
        Some(v) => v,
        None => {
            return if i >= 10 {
                Decision::Finite(0.0)
            } else {
                Decision::Continue
            }
        }
    };
    if total > policy.blowup_factor * first {
        return Decision::Divergent;
    }
    if i < 10 {
        return Decision::Continue;
    }

    let win = &blocks[i - 9..];
    let wmax = win.iter().cloned().fold(0.0, f64::max);
    if wmax <= policy.rel_tol * total.max(f64::MIN_POSITIVE) {
        return Decision::Finite(total);
    }
    if win.iter().any(|&b| b <= 0.0) {
        return Decision::Continue;
    }
    let ratios: Vec<f64> = win.windows(2).map(|w| w[1] / w[0]).collect();
    let rmax = ratios.iter().cloned().fold(0.0, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let head = (ratios[0] + ratios[1] + ratios[2]) / 3.0;
    let tail3 = (ratios[5] + ratios[6] + ratios[7]) / 3.0;
    let drift = tail3 - head;

    if rmax < 0.98 && drift <= 0.01 {
        // Stable (or accelerating) geometric decay.
        let tail = blocks[i - 1] * rmax / (1.0 - rmax);
        if tail <= policy.rel_tol * total {
            return Decision::Finite(total + tail);
        }
        return Decision::Continue;
    }
    if rmin > 1.02 && drift >= -0.01 {
        // Sustained growth.
        return Decision::Divergent;
    }

    // Ratios near 1 or drifting toward 1: power scale in the block index.
    if i < 16 {
        return Decision::Continue;
    }
    let lo = i - 12;
    let xs: Vec<f64> = (lo..i).map(|j| ((j + 1) as f64).ln()).collect();
    let ys: Vec<f64> = blocks[lo..i].iter().map(|b| b.ln()).collect();
    let slope = match linear_fit(&xs, &ys) {
        Some((s, _)) => s,
        None => return Decision::Continue,
    };
    if slope < -1.0 - policy.slope_margin {
        // Integral-test tail for block sums ~ j^slope.
        let tail = blocks[i - 1] * (i as f64) / (-slope - 1.0);
        if tail <= 0.25 * total {
            return Decision::Finite(total + tail);
        }
        return Decision::Continue;
    }
    if slope > -1.0 + policy.slope_margin {
        return Decision::Divergent;
    }

    // Dead band around B_j ~ 1/j: fold the blocks dyadically once more and
    // read the verdict off the folded ratios.
    let mut folded = Vec::new();
    let mut m = 0usize;
    loop {
        let (a, b) = (1usize << m, 1usize << (m + 1));
        if b > i {
            break;
        }
        folded.push(blocks[a..b].iter().sum::<f64>());
        m += 1;
    }
    if folded.len() >= 6 {
        let fr: Vec<f64> = folded
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect();
        let last3 = &fr[fr.len() - 3..];
        if last3.iter().all(|&r| r < 0.95) {
            let r = last3.iter().cloned().fold(0.0, f64::max);
            let tail = folded[folded.len() - 1] * r / (1.0 - r);
            return Decision::Finite(total + tail);
        }
        if last3.iter().all(|&r| r >= 0.95) {
            return Decision::Divergent;
        }
    }
    Decision::Continue
}

/// Integral of a nonnegative function over `[t0, ∞)` by dyadic blocks.
///
/// Each block is integrated with a self-refining composite Simpson rule; the
/// tail is classified under `policy`.
pub fn improper_integral<F: Fn(f64) -> f64>(
    g: F,
    t0: f64,
    width: f64,
    policy: TailPolicy,
) -> Result<Verdict, QuadError> {
    let mut blocks = Vec::new();
    blocks.push(simpson_refined(&g, t0, t0 + width, 1e-10)?);
    for i in 0..policy.max_blocks {
        match analyze_blocks(&blocks, &policy) {
            Decision::Finite(v) => return Ok(Verdict::Finite(v)),
            Decision::Divergent => return Ok(Verdict::Divergent),
            Decision::Continue => {}
        }
        let a = t0 + width * 2f64.powi(i as i32);
        let b = t0 + width * 2f64.powi(i as i32 + 1);
        blocks.push(simpson_refined(&g, a, b, 1e-10)?);
    }
    Err(QuadError::Inconclusive {
        blocks: blocks.len(),
    })
}

/// Sum of a nonnegative series `Σ_{n ≥ n0} a(n)` by dyadic index blocks.
///
/// `a` must be evaluable at real arguments (smooth in its index): blocks up
/// to 4096 terms are summed exactly, larger blocks via an Euler–Maclaurin
/// corrected integral, which keeps the cost logarithmic in the index range.
pub fn improper_series<F: Fn(f64) -> f64>(
    a: F,
    n0: u64,
    policy: TailPolicy,
) -> Result<Verdict, QuadError> {
    let mut blocks = Vec::new();
    let mut lo = n0 as f64;
    let mut len = 1f64;
    for _ in 0..=policy.max_blocks {
        let block = if len <= 4096.0 {
            let mut s = 0.0;
            let mut n = lo;
            while n < lo + len {
                s += a(n);
                n += 1.0;
            }
            s
        } else {
            // Σ_{n=lo}^{hi-1} a(n) ≈ ∫_lo^hi a + (a(lo) − a(hi))/2.
            let hi = lo + len;
            simpson_refined(&a, lo, hi, 1e-10)? + 0.5 * (a(lo) - a(hi))
        };
        blocks.push(block.max(0.0));
        match analyze_blocks(&blocks, &policy) {
            Decision::Finite(v) => return Ok(Verdict::Finite(v)),
            Decision::Divergent => return Ok(Verdict::Divergent),
            Decision::Continue => {}
        }
        lo += len;
        len *= 2.0;
    }
    Err(QuadError::Inconclusive {
        blocks: blocks.len(),
    })
}

/// Composite Simpson on `[a, b]`, doubling the panel count until the value
/// stabilizes to `tol` (relative) or the panel budget runs out.
pub fn simpson_refined<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    let mut n = 8usize;
    let mut prev = composite_simpson(&f, a, b, n);
    while n < 1 << 13 {
        n *= 2;
        let cur = composite_simpson(&f, a, b, n);
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) + 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    let cur = composite_simpson(&f, a, b, n * 2);
    if (cur - prev).abs() <= 1e-6 * cur.abs().max(1e-300) {
        Ok(cur)
    } else {
        Err(QuadError::NotConverged)
    }
}

fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for j in 1..panels {
        let x = a + h * j as f64;
        acc += if j % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Recursive adaptive Simpson for proper integrals. `tol` is absolute.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, QuadError> {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(QuadError::NotConverged);
        }
        let lv = rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)?;
        let rv = rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)?;
        Ok(lv + rv)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    rec(&f, a, fa, b, fb, whole, m, fm, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomial() {
        // ∫_0^1 (3x^2 + 1) dx = 2, exact for Simpson.
        let v = adaptive_simpson(|x| 3.0 * x * x + 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn improper_integral_exponential_tail() {
        // ∫_0^∞ e^{-t} dt = 1.
        let v = improper_integral(|t| (-t).exp(), 0.0, 1.0, TailPolicy::default()).unwrap();
        match v {
            Verdict::Finite(x) => assert!((x - 1.0).abs() < 1e-6, "{x}"),
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn improper_integral_power_tail() {
        // ∫_1^∞ t^{-2} dt = 1: block sums decay geometrically (ratio 1/2).
        let v = improper_integral(|t| t.powi(-2), 1.0, 1.0, TailPolicy::default()).unwrap();
        match v {
            Verdict::Finite(x) => assert!((x - 1.0).abs() < 1e-6, "{x}"),
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn improper_integral_log_critical_divergent() {
        // ∫_2^∞ dt/(t ln t) diverges; the dyadic block sums sit in the
        // critical 1/j band and the folded ratios expose the divergence.
        let v = improper_integral(|t| 1.0 / (t * t.ln()), 2.0, 1.0, TailPolicy::default()).unwrap();
        assert_eq!(v, Verdict::Divergent);
    }

    #[test]
    fn improper_integral_log_squared_finite() {
        // ∫_2^∞ dt/(t ln²t) = 1/ln 2 ≈ 1.4427: block sums ~ j^{-2}.
        let v = improper_integral(
            |t| 1.0 / (t * t.ln() * t.ln()),
            2.0,
            1.0,
            TailPolicy::default(),
        )
        .unwrap();
        match v {
            Verdict::Finite(x) => {
                assert!((x - 1.0 / 2f64.ln()).abs() < 0.15, "{x}");
            }
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn improper_integral_growing_divergent() {
        let v = improper_integral(|t| t.sqrt(), 0.0, 1.0, TailPolicy::default()).unwrap();
        assert_eq!(v, Verdict::Divergent);
    }

    #[test]
    fn improper_series_basel() {
        let v = improper_series(
            |n| 1.0 / (n * n),
            1,
            TailPolicy {
                rel_tol: 1e-6,
                ..TailPolicy::default()
            },
        )
        .unwrap();
        match v {
            Verdict::Finite(x) => {
                let basel = std::f64::consts::PI * std::f64::consts::PI / 6.0;
                assert!((x - basel).abs() < 0.05, "{x} vs {basel}");
            }
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn improper_series_harmonic_divergent() {
        let v = improper_series(|n| 1.0 / n, 1, TailPolicy::default()).unwrap();
        assert_eq!(v, Verdict::Divergent);
    }

    #[test]
    fn improper_series_log_critical_divergent() {
        // Σ 1/(n ln n) needs the folded analysis.
        let v = improper_series(|n| 1.0 / (n * n.ln()), 2, TailPolicy::default()).unwrap();
        assert_eq!(v, Verdict::Divergent);
    }

    #[test]
    fn improper_series_log_squared_finite() {
        let v = improper_series(|n| 1.0 / (n * n.ln() * n.ln()), 2, TailPolicy::default()).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn zero_series_is_finite_zero() {
        let v = improper_series(|_| 0.0, 1, TailPolicy::default()).unwrap();
        assert_eq!(v, Verdict::Finite(0.0));
    }
}
