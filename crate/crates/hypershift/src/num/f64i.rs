//! Fast `f64` interval arithmetic for mass scans.
//!
//! Hardware floats have no accessible directed rounding here, so every
//! arithmetic result is widened by one ulp on each side — IEEE basic
//! operations are correctly rounded, so the true value is within half an
//! ulp of the computed one and one `next_up`/`next_down` step encloses it.
//! Library transcendentals (`ln`, `exp`) are only faithfully rounded, so
//! those are widened by two ulps per side.
//!
//! This type is used where billions of cheap certified operations are
//! wanted (long schedule scans) and the final decision either has large
//! slack or is re-certified with [`super::real::RReal`].

/// Closed interval `[lo, hi]` of finite `f64` values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64I {
    pub lo: f64,
    pub hi: f64,
}

impl F64I {
    /// Exact point interval.
    pub fn point(x: f64) -> Self {
        debug_assert!(x.is_finite());
        F64I { lo: x, hi: x }
    }

    /// Interval from explicit endpoints.
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        F64I { lo, hi }
    }

    /// Enclosure of `1/n` for a positive integer expressed as `f64`.
    pub fn recip_of(n: f64) -> Self {
        debug_assert!(n > 0.0);
        let q = 1.0 / n;
        F64I { lo: q.next_down(), hi: q.next_up() }
    }

    pub fn add(self, o: F64I) -> Self {
        F64I { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    pub fn sub(self, o: F64I) -> Self {
        F64I { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }

    pub fn neg(self) -> Self {
        F64I { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(self, o: F64I) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = c[0];
        let mut hi = c[0];
        for &v in &c[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        F64I { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Division; divisor must not contain zero.
    pub fn div(self, o: F64I) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by interval containing zero");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let mut lo = c[0];
        let mut hi = c[0];
        for &v in &c[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        F64I { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Natural logarithm; requires a strictly positive interval.
    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "ln of interval reaching 0");
        F64I {
            lo: self.lo.ln().next_down().next_down(),
            hi: self.hi.ln().next_up().next_up(),
        }
    }

    /// Exponential, widened for faithful (not correct) rounding.
    pub fn exp(self) -> Self {
        F64I {
            lo: self.lo.exp().next_down().next_down(),
            hi: self.hi.exp().next_up().next_up(),
        }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    /// Certified strict `self < o`.
    pub fn lt(self, o: F64I) -> bool {
        self.hi < o.lo
    }

    /// Certified strict `self > o`.
    pub fn gt(self, o: F64I) -> bool {
        self.lo > o.hi
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_ops_enclose_reals() {
        let third = F64I::recip_of(3.0);
        assert!(third.lo < third.hi);
        assert!(third.contains(1.0 / 3.0));
        let one = third.mul(F64I::point(3.0));
        assert!(one.contains(1.0));
        assert!(one.width() < 1e-15);
    }

    #[test]
    fn ln_exp_roundtrip_encloses() {
        let x = F64I::point(17.25);
        let y = x.ln().exp();
        assert!(y.contains(17.25));
        assert!(y.width() < 1e-13);
    }

    #[test]
    fn ordering_is_strict() {
        let a = F64I::new(1.0, 2.0);
        let b = F64I::new(2.5, 3.0);
        assert!(a.lt(b));
        assert!(b.gt(a));
        let c = F64I::new(1.5, 2.6);
        assert!(!a.lt(c) || c.lo > a.hi);
        assert!(!c.lt(a));
    }

    #[test]
    fn harmonic_accumulation_stays_tight() {
        // sum of 1/n for n = 1..=100_000: interval must stay narrow enough
        // for mass scans and still contain the high-precision value.
        let mut s = F64I::point(0.0);
        for n in 1..=100_000u32 {
            s = s.add(F64I::recip_of(n as f64));
        }
        // H_100000, 30 digits: 12.0901461298634279452088093264
        assert!(s.contains(12.090_146_129_863_428));
        assert!(s.width() < 1e-9);
    }
}
