//! Numerical toolkit for circle diffeomorphisms and their conjugacy to rigid
//! rotations.
//!
//! The crate is organized around the objects that drive the analysis:
//!
//! - [`contfrac`] — continued fractions: partial quotients, convergents, the
//!   gap sequence Δ_n and its interpolated inverse, quotient generators and
//!   the Gauss–Kuzmin sampler.
//! - [`modulus`] — moduli of continuity: builders (Hölder, logarithmic
//!   Hölder, iterated-log, power-series, empirical), the Dini test, the
//!   geometric-sum modulus and the weaker-than ordering.
//! - [`maps`] — degree-one circle maps with derivatives, orbit iteration,
//!   rotation numbers by closest-return detection, parameter tuning, and the
//!   explicit contraction constant λ.
//! - [`crossratio`] — ratios, cross-ratios, their distortions under a
//!   monotone map, and residual scans of the distortion estimates.
//! - [`denjoy`] — dynamical partitions, the mesh sequence l_n, the τ_n sums,
//!   and the Denjoy-type inequality report.
//! - [`conjugacy`] — the discrete cocycle γ along an orbit, the invariant
//!   density h, the conjugation φ, and regularity estimation of h.
//! - [`integrability`] — the irrationality–regularity integrability
//!   condition, its series form, closed-form case reductions, and the
//!   higher-regularity functionals R(n) and ϖ̃.
//!
//! All types are immutable after construction and all operations are pure
//! given their inputs and seeds, so everything here is safe to drive from
//! multiple threads.

pub mod conjugacy;
pub mod contfrac;
pub mod crossratio;
pub mod dd;
pub mod denjoy;
pub mod fit;
pub mod integrability;
pub mod io;
pub mod maps;
pub mod modulus;
pub mod quad;

pub use contfrac::{cf_expand, ContinuedFraction};
pub use maps::{rotation_number, CircleMap, Precision};
pub use modulus::Moc;
