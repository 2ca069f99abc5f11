//! Double-double arithmetic: an unevaluated sum of two `f64`s giving about
//! 31 significant decimal digits. This is the extended-precision backend for
//! orbit computations at depths where closest-return gaps approach the
//! double-precision noise floor.
//!
//! Only the operations the circle-map kernels need are implemented:
//! field arithmetic, floor, and sine/cosine with full-precision argument
//! reduction.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

// Veltkamp splitting constant, 2^27 + 1.
const SPLITTER: f64 = 134_217_729.0;

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

// Dekker product: exact a*b = p + e without relying on a hardware FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    (p, e)
}

pub const PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};

pub const TWO_PI: Dd = Dd {
    hi: 6.283185307179586,
    lo: 2.4492935982947064e-16,
};

pub const FRAC_PI_2: Dd = Dd {
    hi: 1.5707963267948966,
    lo: 6.123233995736766e-17,
};

impl Dd {
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s2, e2) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s2, e2 + f);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, c: f64) -> Dd {
        let (p, e) = two_prod(self.hi, c);
        let e = e + self.lo * c;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (s, e) = two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            let (hi, lo) = quick_two_sum(f, self.lo.floor());
            Dd { hi, lo }
        } else {
            Dd { hi: f, lo: 0.0 }
        }
    }

    /// Fractional part in [0, 1).
    pub fn fract(self) -> Dd {
        self.sub(self.floor())
    }

    pub fn round(self) -> Dd {
        self.add(Dd::from_f64(0.5)).floor()
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    /// sin(x) with argument reduction modulo π/2 carried out in
    /// double-double precision.
    pub fn sin(self) -> Dd {
        let (t, quadrant) = reduce_pi_2(self);
        match quadrant {
            0 => sin_taylor(t),
            1 => cos_taylor(t),
            2 => sin_taylor(t).neg(),
            _ => cos_taylor(t).neg(),
        }
    }

    /// cos(x) via the same reduction.
    pub fn cos(self) -> Dd {
        let (t, quadrant) = reduce_pi_2(self);
        match quadrant {
            0 => cos_taylor(t),
            1 => sin_taylor(t).neg(),
            2 => cos_taylor(t).neg(),
            _ => sin_taylor(t),
        }
    }
}

/// Reduce to t ∈ [-π/4, π/4] with x = t + k·(π/2), returning (t, k mod 4).
fn reduce_pi_2(x: Dd) -> (Dd, i32) {
    let k = x.div(FRAC_PI_2).round();
    let t = x.sub(FRAC_PI_2.mul(k));
    let kf = k.to_f64();
    let q = (kf % 4.0 + 4.0) % 4.0;
    (t, q as i32)
}

fn sin_taylor(t: Dd) -> Dd {
    let t2 = t.mul(t);
    let mut term = t;
    let mut sum = t;
    let mut k = 1.0f64;
    loop {
        // The factorial step divides by an exactly representable integer, so
        // it must be a dd division to keep full precision.
        let denom = (2.0 * k) * (2.0 * k + 1.0);
        term = term.mul(t2).div(Dd::from_f64(denom)).neg();
        sum = sum.add(term);
        if term.hi.abs() < 1e-35 {
            break;
        }
        k += 1.0;
        debug_assert!(k < 40.0);
    }
    sum
}

fn cos_taylor(t: Dd) -> Dd {
    let t2 = t.mul(t);
    let mut term = Dd::from_f64(1.0);
    let mut sum = term;
    let mut k = 1.0f64;
    loop {
        let denom = (2.0 * k - 1.0) * (2.0 * k);
        term = term.mul(t2).div(Dd::from_f64(denom)).neg();
        sum = sum.add(term);
        if term.hi.abs() < 1e-35 {
            break;
        }
        k += 1.0;
        debug_assert!(k < 40.0);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> Dd {
        Dd::from_f64(x)
    }

    #[test]
    fn arithmetic_keeps_extra_bits() {
        // (1 + 1e-20) - 1 recovers 1e-20 exactly at dd precision.
        let a = dd(1.0).add(dd(1e-20));
        let b = a.sub(dd(1.0));
        assert!((b.to_f64() - 1e-20).abs() < 1e-33);
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = dd(std::f64::consts::LN_2).mul(dd(3.7));
        let b = a.div(dd(3.7));
        assert!((b.sub(dd(std::f64::consts::LN_2))).to_f64().abs() < 1e-30);
    }

    #[test]
    fn floor_and_fract() {
        let x = dd(2.0).add(dd(1e-22));
        assert_eq!(x.floor().to_f64(), 2.0);
        assert!((x.fract().to_f64() - 1e-22).abs() < 1e-35);
        let y = dd(-0.25);
        assert_eq!(y.floor().to_f64(), -1.0);
        assert!((y.fract().to_f64() - 0.75).abs() < 1e-30);
    }

    #[test]
    fn sin_matches_known_values() {
        // sin(π/6) = 1/2 to full dd precision.
        let x = PI.div(dd(6.0));
        assert!(x.sin().sub(dd(0.5)).to_f64().abs() < 1e-30);
        // sin(π) = 0.
        assert!(PI.sin().to_f64().abs() < 1e-30);
        // cos(π/3) = 1/2.
        let y = PI.div(dd(3.0));
        assert!(y.cos().sub(dd(0.5)).to_f64().abs() < 1e-30);
    }

    #[test]
    fn sin_agrees_with_f64() {
        for i in 0..200 {
            let x = -7.0 + 0.07 * i as f64;
            let fine = dd(x).sin().to_f64();
            assert!(
                (fine - x.sin()).abs() < 4e-16,
                "x={x}: {fine} vs {}",
                x.sin()
            );
        }
    }

    #[test]
    fn two_pi_constant_consistent() {
        let twice = PI.mul_f64(2.0);
        assert_eq!(twice.hi, TWO_PI.hi);
        assert!((twice.lo - TWO_PI.lo).abs() < 1e-31);
    }

    #[test]
    fn large_argument_reduction() {
        // Reduction in dd keeps sin accurate for arguments of size ~10³.
        let x = dd(1000.0);
        assert!((x.sin().to_f64() - 1000f64.sin()).abs() < 1e-13);
    }
}
