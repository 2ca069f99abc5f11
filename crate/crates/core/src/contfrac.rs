//! Continued fractions: partial quotients, convergents, the gap sequence
//! Δ_n = |q_n ρ − p_n| with its interpolated inverse, partial-quotient
//! generators, and the Gauss–Kuzmin sampler.
//!
//! Index conventions follow the recurrence seeds
//! `p_{-1} = 1, p_0 = 0, q_{-1} = 0, q_0 = 1`,
//! `p_{n+1} = k_{n+1} p_n + p_{n-1}`, `q_{n+1} = k_{n+1} q_n + q_{n-1}`.
//! Stored vectors are shifted by one so that slot `0` holds the index `-1`
//! entry; use [`ContinuedFraction::p`], [`ContinuedFraction::q`] and
//! [`ContinuedFraction::delta`] for natural indexing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const F64_EPS: f64 = 2.220446049250313e-16;

/// Errors of the continued-fraction layer.
#[derive(Clone, Debug, PartialEq)]
pub enum CfError {
    /// Input outside the supported domain.
    InvalidInput(String),
    /// Argument below the resolvable range of the gap sequence.
    OutOfRange { x: f64, min: f64, max: f64 },
    /// Invalid probability table for the distribution generator.
    BadDistribution(String),
}

impl std::fmt::Display for CfError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CfError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            CfError::OutOfRange { x, min, max } => {
                write!(f, "argument {x} outside [{min}, {max}]")
            }
            CfError::BadDistribution(msg) => write!(f, "bad distribution: {msg}"),
        }
    }
}

impl std::error::Error for CfError {}

/// How an expansion ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpandStatus {
    /// All requested quotients were produced.
    Complete,
    /// The residual dropped below the trust threshold; the stored prefix is
    /// the trustworthy part.
    PrecisionExhausted,
    /// The input was rational at working precision and the expansion
    /// terminated exactly.
    Terminated,
    /// Integer overflow in the convergent recurrence; prefix kept.
    Overflow,
}

/// A continued-fraction expansion `ρ = [k_1, k_2, …]` with convergents and
/// gaps.
#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    pub rho: f64,
    pub ks: Vec<u64>,
    /// p_{-1}..p_N, shifted by one.
    pub ps: Vec<i128>,
    /// q_{-1}..q_N, shifted by one.
    pub qs: Vec<i128>,
    /// Δ_{-1}..Δ_N, shifted by one; Δ_{-1} = 1.
    pub deltas: Vec<f64>,
    pub status: ExpandStatus,
}

impl ContinuedFraction {
    /// Build from known quotients; `rho` defaults to the value of the finite
    /// fraction.
    pub fn from_quotients(ks: &[u64], rho: Option<f64>) -> Result<Self, CfError> {
        if ks.iter().any(|&k| k == 0) {
            return Err(CfError::InvalidInput("all quotients must be >= 1".into()));
        }
        let conv = convergents(ks);
        let kept = conv.len_quotients();
        let ks = ks[..kept].to_vec();
        let rho = rho.unwrap_or_else(|| value_of_quotients(&ks));
        let deltas = delta_seq_from(rho, &conv.ps, &conv.qs);
        let status = if conv.overflow_at.is_some() {
            ExpandStatus::Overflow
        } else {
            ExpandStatus::Complete
        };
        Ok(ContinuedFraction {
            rho,
            ks,
            ps: conv.ps,
            qs: conv.qs,
            deltas,
            status,
        })
    }

    /// Number of quotients N.
    pub fn depth(&self) -> usize {
        self.ks.len()
    }

    /// p_n for n >= -1.
    pub fn p(&self, n: i32) -> i128 {
        self.ps[(n + 1) as usize]
    }

    /// q_n for n >= -1.
    pub fn q(&self, n: i32) -> i128 {
        self.qs[(n + 1) as usize]
    }

    /// Δ_n = |q_n ρ − p_n| for n >= -1.
    pub fn delta(&self, n: i32) -> f64 {
        self.deltas[(n + 1) as usize]
    }

    /// Exact determinant values `p_n q_{n-1} − p_{n-1} q_n` for n >= 0.
    /// With the seeds above these equal (−1)^{n+1}.
    pub fn determinants(&self) -> Vec<i128> {
        (1..self.ps.len())
            .map(|i| self.ps[i] * self.qs[i - 1] - self.ps[i - 1] * self.qs[i])
            .collect()
    }

    /// Residuals of the gap recurrence Δ_n = k_{n+2} Δ_{n+1} + Δ_{n+2},
    /// for every n >= -1 where all three terms exist.
    pub fn delta_recurrence_residuals(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.deltas.len().saturating_sub(2) {
            // slot i holds Δ_{i-1}; the recurrence coefficient is k_{i+1} = ks[i]
            let k = self.ks[i] as f64;
            out.push(self.deltas[i] - k * self.deltas[i + 1] - self.deltas[i + 2]);
        }
        out
    }
}

/// Convergent sequences produced by the recurrence, with overflow detection.
#[derive(Clone, Debug)]
pub struct Convergents {
    /// p_{-1}..p_N, shifted by one.
    pub ps: Vec<i128>,
    /// q_{-1}..q_N, shifted by one.
    pub qs: Vec<i128>,
    /// Index n at which the recurrence overflowed, if it did.
    pub overflow_at: Option<usize>,
}

impl Convergents {
    /// Number of quotients actually consumed.
    pub fn len_quotients(&self) -> usize {
        self.ps.len() - 2
    }
}

/// Run the convergent recurrence over the quotients, stopping at i128
/// overflow and keeping the valid prefix.
pub fn convergents(ks: &[u64]) -> Convergents {
    let mut ps: Vec<i128> = vec![1, 0];
    let mut qs: Vec<i128> = vec![0, 1];
    let mut overflow_at = None;
    for (i, &k) in ks.iter().enumerate() {
        let n = ps.len();
        let step = |prev: i128, prev2: i128| -> Option<i128> {
            (k as i128).checked_mul(prev).and_then(|v| v.checked_add(prev2))
        };
        match (step(ps[n - 1], ps[n - 2]), step(qs[n - 1], qs[n - 2])) {
            (Some(p), Some(q)) => {
                ps.push(p);
                qs.push(q);
            }
            _ => {
                overflow_at = Some(i + 1);
                break;
            }
        }
    }
    Convergents { ps, qs, overflow_at }
}

/// Value of the finite continued fraction `[k_1, …, k_N]` by backward
/// evaluation.
pub fn value_of_quotients(ks: &[u64]) -> f64 {
    let mut v = 0.0;
    for &k in ks.iter().rev() {
        v = 1.0 / (k as f64 + v);
    }
    v
}

fn delta_seq_from(rho: f64, ps: &[i128], qs: &[i128]) -> Vec<f64> {
    ps.iter()
        .zip(qs)
        .map(|(&p, &q)| (q as f64 * rho - p as f64).abs())
        .collect()
}

/// Expand `x ∈ (0,1)` into at most `n_terms` partial quotients.
///
/// The Gauss-map iteration is carried out exactly on the dyadic rational
/// represented by the `f64` input (numerator/denominator Euclid in `i128`),
/// so the emitted quotients, convergents and gaps are exact integers for the
/// given input. Emission stops early, with status
/// [`ExpandStatus::PrecisionExhausted`], once the residual falls below
/// `10³ · ε · q_n`: beyond that point quotients would reflect the rounding
/// of the input rather than the underlying number.
pub fn cf_expand(x: f64, n_terms: usize) -> Result<ContinuedFraction, CfError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(CfError::InvalidInput(format!("x = {x} not in (0,1)")));
    }
    if n_terms == 0 {
        return Err(CfError::InvalidInput("n_terms must be >= 1".into()));
    }
    if x < 2f64.powi(-60) {
        return Err(CfError::InvalidInput(
            "x below 2^-60: leading quotient exceeds the integer width".into(),
        ));
    }

    // Exact dyadic decomposition: x = num / 2^shift.
    let (mut num, den) = dyadic_parts(x);
    let mut rem_prev: i128 = den; // r_{-1} = den  (Δ_{-1} = 1)
    let den_f = den as f64;

    let mut ks: Vec<u64> = Vec::with_capacity(n_terms);
    let mut ps: Vec<i128> = vec![1, 0];
    let mut qs: Vec<i128> = vec![0, 1];
    let mut deltas: Vec<f64> = vec![1.0, num as f64 / den_f];
    let mut status = ExpandStatus::Complete;

    // Invariant: rem_prev = Δ_{n-1}·den, num = Δ_n·den after n quotients.
    while ks.len() < n_terms {
        if num == 0 {
            status = ExpandStatus::Terminated;
            break;
        }
        let q_n = *qs.last().unwrap() as f64;
        let delta_n = *deltas.last().unwrap();
        if delta_n < 1e3 * F64_EPS * q_n {
            status = ExpandStatus::PrecisionExhausted;
            break;
        }
        let k = (rem_prev / num) as u64;
        let rem_next = rem_prev % num;
        ks.push(k);
        let n = ps.len();
        ps.push(k as i128 * ps[n - 1] + ps[n - 2]);
        qs.push(k as i128 * qs[n - 1] + qs[n - 2]);
        deltas.push(rem_next as f64 / den_f);
        rem_prev = num;
        num = rem_next;
    }

    Ok(ContinuedFraction {
        rho: x,
        ks,
        ps,
        qs,
        deltas,
        status,
    })
}

/// Exact numerator/denominator of a positive `f64` below 1, with the
/// denominator a power of two that fits `i128`.
fn dyadic_parts(x: f64) -> (i128, i128) {
    let mut mantissa = x;
    let mut shift = 0u32;
    while mantissa.fract() != 0.0 {
        mantissa *= 2.0;
        shift += 1;
        debug_assert!(shift < 120);
    }
    (mantissa as i128, 1i128 << shift)
}

/// Continuous, strictly decreasing interpolant through `(n, Δ_n)`: returns
/// the `t` with `Δ(t) = x`. `log Δ` is interpolated linearly in `n`, which is
/// exact at grid points and first-order between them (the gaps decay
/// geometrically).
pub fn delta_inverse(cf: &ContinuedFraction, x: f64) -> Result<f64, CfError> {
    log_linear_inverse(&cf.deltas, x)
}

/// Shared inverse for decreasing positive sequences where slot `i` holds the
/// value at index `n = i − 1`.
pub fn log_linear_inverse(vals: &[f64], x: f64) -> Result<f64, CfError> {
    let min = *vals.last().expect("nonempty sequence");
    let max = vals[0];
    if !(x >= min && x <= max) {
        return Err(CfError::OutOfRange { x, min, max });
    }
    // Find i with vals[i+1] <= x <= vals[i].
    let mut lo = 0usize;
    let mut hi = vals.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if vals[mid] >= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = lo as f64 - 1.0;
    if x == vals[lo] {
        return Ok(n);
    }
    let frac = (vals[lo].ln() - x.ln()) / (vals[lo].ln() - vals[hi].ln());
    Ok(n + frac)
}

/// The alternative gap lower bound Δ̃(n) = Π_{j=-1}^{n+1} (k_{j+2}+1)^{-1},
/// returned for n = -1..=N-3 in the same shifted-by-one layout as `deltas`.
pub fn delta_tilde_seq(ks: &[u64]) -> Vec<f64> {
    // Δ̃(n) consumes quotients k_1..k_{n+3}.
    if ks.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(ks.len() - 2);
    let mut prod = 1.0;
    for (idx, &k) in ks.iter().enumerate() {
        prod /= (k + 1) as f64;
        if idx >= 1 {
            // finished n = idx - 2 (j runs -1..=n+1 ⇔ factors k_1..k_{n+3})
            out.push(prod);
        }
    }
    out
}

/// Geometric-mean quotient weight ϑ = Π K_j^{−p_j} of a finite quotient
/// distribution.
pub fn theta_from_distribution(values: &[u64], probs: &[f64]) -> f64 {
    values
        .iter()
        .zip(probs)
        .map(|(&k, &p)| -(p * (k as f64).ln()))
        .sum::<f64>()
        .exp()
}

/// The (k+1)-product variant ϑ̃ = Π (K_j + 1)^{−p_j}, matching the Δ̃ bound.
pub fn theta_tilde_from_distribution(values: &[u64], probs: &[f64]) -> f64 {
    values
        .iter()
        .zip(probs)
        .map(|(&k, &p)| -(p * ((k + 1) as f64).ln()))
        .sum::<f64>()
        .exp()
}

/// Growth gauge φ for partial quotients: `k_{n+1} = O(φ(n))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum PhiType {
    Constant(f64),
    /// φ(t) = t^ν.
    Power { nu: f64 },
    /// φ(t) = base^t.
    Exponential { base: f64 },
    /// Piecewise-linear table of (t, φ(t)), nondecreasing.
    Table(Vec<(f64, f64)>),
}

impl PhiType {
    pub fn validate(&self) -> Result<(), CfError> {
        match self {
            PhiType::Constant(c) if *c > 0.0 => Ok(()),
            PhiType::Constant(c) => Err(CfError::InvalidInput(format!(
                "constant gauge must be positive, got {c}"
            ))),
            PhiType::Power { nu } if *nu > 0.0 => Ok(()),
            PhiType::Power { nu } => Err(CfError::InvalidInput(format!(
                "power gauge needs nu > 0, got {nu}"
            ))),
            PhiType::Exponential { base } if *base >= 1.0 => Ok(()),
            PhiType::Exponential { base } => Err(CfError::InvalidInput(format!(
                "exponential gauge needs base >= 1, got {base}"
            ))),
            PhiType::Table(t) => {
                let ok = !t.is_empty()
                    && t.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1)
                    && t.iter().all(|&(_, v)| v >= 0.0);
                if ok {
                    Ok(())
                } else {
                    Err(CfError::InvalidInput(
                        "table gauge must be sorted and nondecreasing".into(),
                    ))
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PhiType::Constant(c) => *c,
            PhiType::Power { nu } => t.max(0.0).powf(*nu),
            PhiType::Exponential { base } => base.powf(t),
            PhiType::Table(tab) => {
                if t <= tab[0].0 {
                    return tab[0].1;
                }
                if t >= tab[tab.len() - 1].0 {
                    return tab[tab.len() - 1].1;
                }
                let i = tab.partition_point(|&(u, _)| u <= t) - 1;
                let (x0, y0) = tab[i];
                let (x1, y1) = tab[i + 1];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }
}

/// Specification for the partial-quotient generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum QuotientGen {
    /// Quotient `k_{m+1}` drawn uniformly from `[1, max(1, ⌈φ(m)⌉)]`.
    Phi(PhiType),
    /// I.i.d. draws from a finite distribution `{K_j, p_j}`.
    Distribution { values: Vec<u64>, probs: Vec<f64> },
}

/// Deterministic, seeded generation of `n` partial quotients.
pub fn gen_partial_quotients(spec: &QuotientGen, n: usize, seed: u64) -> Result<Vec<u64>, CfError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        QuotientGen::Phi(phi) => {
            phi.validate()?;
            Ok((0..n)
                .map(|m| {
                    let hi = phi.eval(m as f64).ceil().max(1.0) as u64;
                    rng.gen_range(1..=hi)
                })
                .collect())
        }
        QuotientGen::Distribution { values, probs } => {
            if values.len() != probs.len() || values.is_empty() {
                return Err(CfError::BadDistribution(
                    "values and probabilities must be nonempty and equal length".into(),
                ));
            }
            if values.iter().any(|&v| v == 0) {
                return Err(CfError::BadDistribution("quotients must be >= 1".into()));
            }
            if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(CfError::BadDistribution("probabilities outside [0,1]".into()));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(CfError::BadDistribution(format!(
                    "probabilities sum to {total}, expected 1"
                )));
            }
            let mut cdf = Vec::with_capacity(probs.len());
            let mut acc = 0.0;
            for &p in probs {
                acc += p;
                cdf.push(acc);
            }
            *cdf.last_mut().unwrap() = 1.0;
            Ok((0..n)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let j = cdf.partition_point(|&c| c < u).min(values.len() - 1);
                    values[j]
                })
                .collect())
        }
    }
}

/// Gauss–Kuzmin mass function P(k) = log₂(1 + 1/(k(k+2))).
pub fn gauss_kuzmin_pmf(k: u64) -> f64 {
    let kf = k as f64;
    (1.0 + 1.0 / (kf * (kf + 2.0))).log2()
}

/// Gauss–Kuzmin cumulative F(K) = 1 + log₂((K+1)/(K+2)).
pub fn gauss_kuzmin_cdf(k: u64) -> f64 {
    1.0 + ((k as f64 + 1.0) / (k as f64 + 2.0)).log2()
}

/// `n` i.i.d. Gauss–Kuzmin draws by inverse-transform sampling,
/// deterministic for a given seed.
pub fn gauss_kuzmin_sample(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gauss_kuzmin_inverse(rng.gen())).collect()
}

fn gauss_kuzmin_inverse(u: f64) -> u64 {
    // Solve F(k) >= u in closed form, then fix up rounding locally.
    let t = 2f64.powf(u - 1.0);
    let raw = (2.0 * t - 1.0) / (1.0 - t);
    let mut k = if raw.is_finite() && raw > 0.0 {
        raw.ceil() as u64
    } else if raw.is_finite() {
        1
    } else {
        return u64::MAX >> 1;
    };
    k = k.max(1);
    while k > 1 && gauss_kuzmin_cdf(k - 1) >= u {
        k -= 1;
    }
    while gauss_kuzmin_cdf(k) < u {
        k += 1;
    }
    k
}

/// Partial sums of Σ k_n K_n with a dyadic-checkpoint record and a
/// last-quarter tail criterion.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesCheck {
    /// Cumulative sums S_1..S_N.
    pub partial_sums: Vec<f64>,
    /// Tail S_N − S_{⌊3N/4⌋} accumulated by the last quarter of terms.
    pub tail_estimate: f64,
    /// True when the tail estimate is below the configured tolerance.
    pub converged: bool,
}

/// Evaluate Σ k_n K_n over the common prefix of the two sequences.
pub fn check_kn_series(ks: &[u64], weights: &[f64], tail_tol: f64) -> SeriesCheck {
    let n = ks.len().min(weights.len());
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        debug_assert!(weights[i] >= 0.0);
        acc += ks[i] as f64 * weights[i];
        partial_sums.push(acc);
    }
    let cut = 3 * n / 4;
    let tail_estimate = if n == 0 {
        0.0
    } else if cut == 0 {
        partial_sums[n - 1]
    } else {
        partial_sums[n - 1] - partial_sums[cut - 1]
    };
    SeriesCheck {
        partial_sums,
        tail_estimate,
        converged: tail_estimate < tail_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.6180339887498949; // (√5 − 1)/2
    const SQRT2M1: f64 = 0.41421356237309515; // √2 − 1

    #[test]
    fn golden_expands_to_ones() {
        let cf = cf_expand(GOLDEN, 20).unwrap();
        assert_eq!(cf.status, ExpandStatus::Complete);
        assert_eq!(cf.ks, vec![1; 20]);
    }

    #[test]
    fn sqrt2_minus_one_expands_to_twos() {
        let cf = cf_expand(SQRT2M1, 15).unwrap();
        assert_eq!(cf.ks, vec![2; 15]);
    }

    #[test]
    fn tanh1_expands_to_odd_numbers() {
        let x = 1f64.tanh();
        let cf = cf_expand(x, 8).unwrap();
        assert_eq!(cf.ks, vec![1, 3, 5, 7, 9, 11, 13, 15]);
    }

    #[test]
    fn precision_exhaustion_reports_prefix() {
        let cf = cf_expand(GOLDEN, 60).unwrap();
        assert_eq!(cf.status, ExpandStatus::PrecisionExhausted);
        // Everything kept must still be golden quotients.
        assert!(cf.ks.iter().all(|&k| k == 1));
        assert!(cf.depth() >= 25, "kept only {} quotients", cf.depth());
    }

    #[test]
    fn rational_terminates() {
        let cf = cf_expand(0.25, 10).unwrap();
        assert_eq!(cf.status, ExpandStatus::Terminated);
        assert_eq!(cf.ks, vec![4]);
    }

    #[test]
    fn convergents_of_ones_are_fibonacci() {
        let conv = convergents(&[1, 1, 1, 1, 1]);
        // q_{-1}..q_5 with the recurrence seeds.
        assert_eq!(conv.qs, vec![0, 1, 1, 2, 3, 5, 8]);
        assert_eq!(conv.ps, vec![1, 0, 1, 1, 2, 3, 5]);
    }

    #[test]
    fn convergents_of_twos() {
        let conv = convergents(&[2, 2, 2]);
        assert_eq!(*conv.ps.last().unwrap(), 5);
        assert_eq!(*conv.qs.last().unwrap(), 12);
    }

    #[test]
    fn convergents_of_tanh1_prefix() {
        let conv = convergents(&[1, 3, 5]);
        assert_eq!(*conv.ps.last().unwrap(), 16);
        assert_eq!(*conv.qs.last().unwrap(), 21);
        assert!((16.0 / 21.0 - 1f64.tanh()).abs() < 2e-3);
    }

    #[test]
    fn convergent_overflow_keeps_prefix() {
        let ks = vec![u64::MAX / 2; 8];
        let conv = convergents(&ks);
        assert!(conv.overflow_at.is_some());
        assert!(conv.len_quotients() >= 1);
    }

    #[test]
    fn determinant_identity_exact() {
        let cf = cf_expand(1f64.tanh(), 10).unwrap();
        for (n0, det) in cf.determinants().iter().enumerate() {
            // index n = n0 with p_n q_{n-1} − p_{n-1} q_n = (−1)^{n+1}
            let expect = if n0 % 2 == 0 { -1 } else { 1 };
            assert_eq!(*det, expect);
        }
    }

    #[test]
    fn golden_deltas_are_powers() {
        let cf = cf_expand(GOLDEN, 12).unwrap();
        assert_eq!(cf.delta(-1), 1.0);
        assert!((cf.delta(0) - GOLDEN).abs() < 1e-15);
        assert!((cf.delta(1) - GOLDEN * GOLDEN).abs() < 1e-15);
        assert!((cf.delta(2) - GOLDEN.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn sqrt2_delta1() {
        let cf = cf_expand(SQRT2M1, 8).unwrap();
        assert!((cf.delta(1) - (2.0 * SQRT2M1 - 1.0).abs()).abs() < 1e-15);
    }

    #[test]
    fn delta_recurrence_residuals_tiny() {
        for x in [GOLDEN, SQRT2M1, 1f64.tanh(), 0.123456789] {
            let cf = cf_expand(x, 14).unwrap();
            for r in cf.delta_recurrence_residuals() {
                assert!(r.abs() < 1e-12);
            }
            for w in cf.deltas.windows(2) {
                assert!(w[1] < w[0], "gaps must strictly decrease");
            }
        }
    }

    #[test]
    fn delta_inverse_hits_grid_and_midpoints() {
        let cf = cf_expand(GOLDEN, 12).unwrap();
        assert_eq!(delta_inverse(&cf, cf.delta(3)).unwrap(), 3.0);
        assert_eq!(delta_inverse(&cf, cf.delta(0)).unwrap(), 0.0);
        let x = (cf.delta(2) * cf.delta(3)).sqrt();
        assert!((delta_inverse(&cf, x).unwrap() - 2.5).abs() < 1e-12);
        let too_small = cf.deltas.last().unwrap() * 0.5;
        assert!(matches!(
            delta_inverse(&cf, too_small),
            Err(CfError::OutOfRange { .. })
        ));
    }

    #[test]
    fn delta_tilde_bounds_delta_below() {
        let cf = cf_expand(GOLDEN, 16).unwrap();
        let tilde = delta_tilde_seq(&cf.ks);
        for (i, &t) in tilde.iter().enumerate() {
            assert!(t <= cf.deltas[i] + 1e-15, "tilde must sit below the gaps");
        }
        // All quotients 1: Δ̃(n) = 2^{-(n+3)}.
        assert!((tilde[0] - 0.25).abs() < 1e-15); // n = -1
        assert!((tilde[3] - 2f64.powi(-5)).abs() < 1e-15); // n = 2
    }

    #[test]
    fn phi_constant_one_generates_ones() {
        let ks =
            gen_partial_quotients(&QuotientGen::Phi(PhiType::Constant(1.0)), 32, 7).unwrap();
        assert!(ks.iter().all(|&k| k == 1));
    }

    #[test]
    fn phi_power_respects_bound() {
        let ks = gen_partial_quotients(
            &QuotientGen::Phi(PhiType::Power { nu: 1.0 }),
            5,
            123,
        )
        .unwrap();
        for (m, &k) in ks.iter().enumerate() {
            let bound = (m as f64).ceil().max(1.0) as u64;
            assert!(k >= 1 && k <= bound);
        }
    }

    #[test]
    fn generator_is_reproducible() {
        let spec = QuotientGen::Distribution {
            values: vec![1, 2, 5],
            probs: vec![0.5, 0.3, 0.2],
        };
        let a = gen_partial_quotients(&spec, 200, 42).unwrap();
        let b = gen_partial_quotients(&spec, 200, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_partial_quotients(&spec, 200, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn distribution_frequencies_converge() {
        let spec = QuotientGen::Distribution {
            values: vec![1, 2],
            probs: vec![0.5, 0.5],
        };
        let ks = gen_partial_quotients(&spec, 10_000, 9).unwrap();
        // Independent counting oracle.
        let ones = ks.iter().filter(|&&k| k == 1).count() as f64 / 10_000.0;
        assert!((ones - 0.5).abs() < 0.02, "frequency {ones}");
    }

    #[test]
    fn bad_distributions_rejected() {
        let bad = QuotientGen::Distribution {
            values: vec![1, 2],
            probs: vec![0.7, 0.7],
        };
        assert!(matches!(
            gen_partial_quotients(&bad, 10, 1),
            Err(CfError::BadDistribution(_))
        ));
        let zero = QuotientGen::Distribution {
            values: vec![0],
            probs: vec![1.0],
        };
        assert!(gen_partial_quotients(&zero, 10, 1).is_err());
    }

    #[test]
    fn gauss_kuzmin_pmf_values() {
        assert!((gauss_kuzmin_pmf(1) - 0.4150374992788438).abs() < 1e-14);
        assert!((gauss_kuzmin_pmf(2) - 0.16992500144231237).abs() < 1e-14);
        // Telescoping normalization.
        let head: f64 = (1..=1_000_000).map(gauss_kuzmin_pmf).sum();
        assert!((1.0 - head) < 2e-6);
    }

    #[test]
    fn gauss_kuzmin_sampler_matches_law() {
        let sample = gauss_kuzmin_sample(200_000, 2024);
        let ones = sample.iter().filter(|&&k| k == 1).count() as f64 / 200_000.0;
        let twos = sample.iter().filter(|&&k| k == 2).count() as f64 / 200_000.0;
        assert!((ones - gauss_kuzmin_pmf(1)).abs() < 5e-3);
        assert!((twos - gauss_kuzmin_pmf(2)).abs() < 5e-3);
        assert_eq!(sample, gauss_kuzmin_sample(200_000, 2024));
    }

    #[test]
    fn kn_series_basel() {
        let ks = vec![1u64; 10_000];
        let weights: Vec<f64> = (1..=10_000).map(|n| 1.0 / (n as f64 * n as f64)).collect();
        let check = check_kn_series(&ks, &weights, 1e-3);
        assert!(check.converged);
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        assert!((check.partial_sums.last().unwrap() - basel).abs() < 1e-3);
    }

    #[test]
    fn kn_series_zero_weights() {
        let ks = vec![3u64; 100];
        let check = check_kn_series(&ks, &vec![0.0; 100], 1e-12);
        assert!(check.converged);
        assert_eq!(*check.partial_sums.last().unwrap(), 0.0);
    }

    #[test]
    fn theta_of_golden_digits_degenerates() {
        let theta = theta_from_distribution(&[1], &[1.0]);
        assert_eq!(theta, 1.0);
        let tilde = theta_tilde_from_distribution(&[1], &[1.0]);
        assert!((tilde - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theta_of_one_two_mix() {
        // K = (1,2), p = (1/2,1/2): ϑ = 2^{-1/2}.
        let theta = theta_from_distribution(&[1, 2], &[0.5, 0.5]);
        assert!((theta - 2f64.powf(-0.5)).abs() < 1e-15);
    }
}
