//! Arbitrary-precision interval arithmetic with directed rounding.
//!
//! [`RReal`] is a closed interval `[lo, hi]` of MPFR floats.  Every
//! operation rounds the lower endpoint down and the upper endpoint up, so
//! an `RReal` produced from exact inputs always encloses the exact real
//! result.  Comparisons are *certified*: they return an answer only when
//! the intervals are disjoint, never by guessing.
//!
//! Operations panic on domain violations that indicate internal logic
//! errors (dividing by an interval containing zero, `ln` of an interval
//! reaching zero); recoverable precision problems are reported as
//! [`Error::PrecisionUndecidable`] by the certified queries.

use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, NegAssign, SubAssignRound};
use rug::{Assign, Float, Integer, Rational};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Exact floor of a finite float, at whatever precision its magnitude needs.
pub fn float_floor(x: &Float) -> Integer {
    let p = (x.get_exp().unwrap_or(0).max(2) as u32) + 8;
    let f = Float::with_val(p, x.floor_ref());
    f.to_integer().expect("finite floor")
}

/// Exact ceiling of a finite float.
pub fn float_ceil(x: &Float) -> Integer {
    let p = (x.get_exp().unwrap_or(0).max(2) as u32) + 8;
    let f = Float::with_val(p, x.ceil_ref());
    f.to_integer().expect("finite ceil")
}

/// Closed interval of MPFR floats with outward rounding.
#[derive(Clone, Debug)]
pub struct RReal {
    lo: Float,
    hi: Float,
}

fn bin<F>(prec: u32, f: F, round: Round) -> Float
where
    F: FnOnce(&mut Float, Round),
{
    let mut out = Float::new(prec);
    f(&mut out, round);
    out
}

impl RReal {
    fn from_parts(lo: Float, hi: Float) -> Self {
        debug_assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "invalid interval [{lo}, {hi}]"
        );
        RReal { lo, hi }
    }

    /// Package a pair of directed-rounding accumulators as an interval.
    pub(crate) fn from_bounds(lo: Float, hi: Float) -> Self {
        Self::from_parts(lo, hi)
    }

    /// Point interval holding one exact float.
    pub fn point(x: Float) -> Self {
        RReal { lo: x.clone(), hi: x }
    }

    /// Exact small-integer point at the given precision.
    pub fn from_i64(x: i64, prec: u32) -> Self {
        RReal::point(Float::with_val(prec.max(64), x))
    }

    /// Enclosure of an arbitrary-precision integer.
    pub fn from_integer(x: &Integer, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, x, Round::Down).0;
        let hi = Float::with_val_round(prec, x, Round::Up).0;
        RReal::from_parts(lo, hi)
    }

    /// Enclosure of an exact rational.
    pub fn from_rational(x: &Rational, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, x, Round::Down).0;
        let hi = Float::with_val_round(prec, x, Round::Up).0;
        RReal::from_parts(lo, hi)
    }

    /// Exact `f64` point (every finite `f64` is representable).
    pub fn from_f64(x: f64, prec: u32) -> Self {
        debug_assert!(x.is_finite());
        RReal::point(Float::with_val(prec.max(53), x))
    }

    /// Enclosure of pi.
    pub fn pi(prec: u32) -> Self {
        use rug::float::Constant;
        let lo = Float::with_val_round(prec, Constant::Pi, Round::Down).0;
        let hi = Float::with_val_round(prec, Constant::Pi, Round::Up).0;
        RReal::from_parts(lo, hi)
    }

    pub fn zero(prec: u32) -> Self {
        RReal::point(Float::new(prec))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    /// Working precision (max of the endpoint precisions).
    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// Re-round both endpoints outward to precision `prec`.
    pub fn with_prec(&self, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, &self.lo, Round::Down).0;
        let hi = Float::with_val_round(prec, &self.hi, Round::Up).0;
        RReal::from_parts(lo, hi)
    }

    pub fn add(&self, o: &RReal) -> Self {
        let p = self.prec().max(o.prec());
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.add_assign_round(&o.lo, r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.add_assign_round(&o.hi, r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    pub fn sub(&self, o: &RReal) -> Self {
        let p = self.prec().max(o.prec());
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.sub_assign_round(&o.hi, r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.sub_assign_round(&o.lo, r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    pub fn neg(&self) -> Self {
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.hi); out.neg_assign(); let _ = r; }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.lo); out.neg_assign(); let _ = r; }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    fn mul_dir(a: &Float, b: &Float, prec: u32, round: Round) -> Float {
        bin(prec, |out, r| { out.assign(a); out.mul_assign_round(b, r); }, round)
    }

    fn div_dir(a: &Float, b: &Float, prec: u32, round: Round) -> Float {
        bin(prec, |out, r| { out.assign(a); out.div_assign_round(b, r); }, round)
    }

    /// Interval product with sign-case analysis.
    pub fn mul(&self, o: &RReal) -> Self {
        let p = self.prec().max(o.prec());
        let (al, ah, bl, bh) = (&self.lo, &self.hi, &o.lo, &o.hi);
        let a_pos = al.cmp0() != Some(Ordering::Less);
        let a_neg = ah.cmp0() != Some(Ordering::Greater);
        let b_pos = bl.cmp0() != Some(Ordering::Less);
        let b_neg = bh.cmp0() != Some(Ordering::Greater);
        let d = Round::Down;
        let u = Round::Up;
        let (lo, hi) = match ((a_pos, a_neg), (b_pos, b_neg)) {
            ((true, _), (true, _)) => (Self::mul_dir(al, bl, p, d), Self::mul_dir(ah, bh, p, u)),
            ((true, _), (_, true)) => (Self::mul_dir(ah, bl, p, d), Self::mul_dir(al, bh, p, u)),
            ((true, _), _) => (Self::mul_dir(ah, bl, p, d), Self::mul_dir(ah, bh, p, u)),
            ((_, true), (true, _)) => (Self::mul_dir(al, bh, p, d), Self::mul_dir(ah, bl, p, u)),
            ((_, true), (_, true)) => (Self::mul_dir(ah, bh, p, d), Self::mul_dir(al, bl, p, u)),
            ((_, true), _) => (Self::mul_dir(al, bh, p, d), Self::mul_dir(al, bl, p, u)),
            (_, (true, _)) => (Self::mul_dir(al, bh, p, d), Self::mul_dir(ah, bh, p, u)),
            (_, (_, true)) => (Self::mul_dir(ah, bl, p, d), Self::mul_dir(al, bl, p, u)),
            _ => {
                let lo = Self::mul_dir(al, bh, p, d).min(&Self::mul_dir(ah, bl, p, d));
                let hi = Self::mul_dir(al, bl, p, u).max(&Self::mul_dir(ah, bh, p, u));
                (lo, hi)
            }
        };
        RReal::from_parts(lo, hi)
    }

    /// Interval quotient; the divisor must have certified sign.
    pub fn div(&self, o: &RReal) -> Self {
        let p = self.prec().max(o.prec());
        let (al, ah, bl, bh) = (&self.lo, &self.hi, &o.lo, &o.hi);
        let d = Round::Down;
        let u = Round::Up;
        let (lo, hi) = if bl.cmp0() == Some(Ordering::Greater) {
            if al.cmp0() != Some(Ordering::Less) {
                (Self::div_dir(al, bh, p, d), Self::div_dir(ah, bl, p, u))
            } else if ah.cmp0() != Some(Ordering::Greater) {
                (Self::div_dir(al, bl, p, d), Self::div_dir(ah, bh, p, u))
            } else {
                (Self::div_dir(al, bl, p, d), Self::div_dir(ah, bl, p, u))
            }
        } else if bh.cmp0() == Some(Ordering::Less) {
            if al.cmp0() != Some(Ordering::Less) {
                (Self::div_dir(ah, bh, p, d), Self::div_dir(al, bl, p, u))
            } else if ah.cmp0() != Some(Ordering::Greater) {
                (Self::div_dir(ah, bl, p, d), Self::div_dir(al, bh, p, u))
            } else {
                (Self::div_dir(ah, bh, p, d), Self::div_dir(al, bh, p, u))
            }
        } else {
            panic!("division by interval containing zero");
        };
        RReal::from_parts(lo, hi)
    }

    /// Product with an exact integer.
    pub fn mul_int(&self, n: &Integer) -> Self {
        let p = self.prec();
        let nf = |a: &Float, r: Round| {
            bin(p, |out, rr| { out.assign(a); out.mul_assign_round(n, rr); }, r)
        };
        if n.cmp0() != Ordering::Less {
            RReal::from_parts(nf(&self.lo, Round::Down), nf(&self.hi, Round::Up))
        } else {
            RReal::from_parts(nf(&self.hi, Round::Down), nf(&self.lo, Round::Up))
        }
    }

    /// Product with an exact rational.
    pub fn mul_rational(&self, q: &Rational) -> Self {
        let p = self.prec();
        let nf = |a: &Float, r: Round| {
            bin(p, |out, rr| { out.assign(a); out.mul_assign_round(q, rr); }, r)
        };
        if q.cmp0() != Ordering::Less {
            RReal::from_parts(nf(&self.lo, Round::Down), nf(&self.hi, Round::Up))
        } else {
            RReal::from_parts(nf(&self.hi, Round::Down), nf(&self.lo, Round::Up))
        }
    }

    pub fn abs(&self) -> Self {
        if self.lo.cmp0() != Some(Ordering::Less) {
            self.clone()
        } else if self.hi.cmp0() != Some(Ordering::Greater) {
            self.neg()
        } else {
            let p = self.prec();
            let nl = bin(p, |out, r| { out.assign(&self.lo); out.neg_assign(); let _ = r; }, Round::Up);
            let hi = nl.max(&self.hi);
            RReal::from_parts(Float::new(p), hi)
        }
    }

    /// Square root; a slightly negative lower endpoint (rounding slack on a
    /// mathematically nonnegative quantity) is clamped to zero.
    pub fn sqrt(&self) -> Self {
        assert!(
            self.hi.cmp0() != Some(Ordering::Less),
            "sqrt of certified-negative interval"
        );
        let p = self.prec();
        let lo = if self.lo.cmp0() == Some(Ordering::Less) {
            Float::new(p)
        } else {
            bin(p, |out, r| { out.assign(&self.lo); out.sqrt_round(r); }, Round::Down)
        };
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.sqrt_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    pub fn ln(&self) -> Self {
        assert!(
            self.lo.cmp0() == Some(Ordering::Greater),
            "ln of interval reaching zero"
        );
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.ln_round(r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.ln_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.exp_round(r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.exp_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    /// `e^x - 1` with full relative accuracy near zero.
    pub fn exp_m1(&self) -> Self {
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.exp_m1_round(r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.exp_m1_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    /// `ln(1 + x)` with full relative accuracy near zero.
    pub fn ln_1p(&self) -> Self {
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.ln_1p_round(r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.ln_1p_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    /// Digamma function (MPFR, correctly rounded at both endpoints);
    /// requires a certified-positive argument (our only use case).
    pub fn digamma(&self) -> Self {
        assert!(self.lo.cmp0() == Some(Ordering::Greater));
        let p = self.prec();
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.digamma_round(r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.digamma_round(r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    /// Cosine with extremum containment (no argument reduction beyond one
    /// turn is attempted; callers pass phases already reduced mod 1 turn).
    pub fn cos(&self) -> Self {
        let p = self.prec();
        let full = || {
            RReal::from_parts(
                Float::with_val(p, -1),
                Float::with_val(p, 1),
            )
        };
        // give up on very wide inputs
        let w = self.width_f64();
        if !(w < std::f64::consts::TAU) {
            return full();
        }
        // multiples k*pi possibly inside [lo, hi]: k ranges over
        // [ceil(lo/pi lower bound), floor(hi/pi upper bound)] — conservative,
        // no certification needed, only possible over-inclusion of extrema.
        let pi = RReal::pi(p + 32);
        let q_lo = RReal::point(self.lo.clone()).with_prec(p + 32).div(&pi);
        let q_hi = RReal::point(self.hi.clone()).with_prec(p + 32).div(&pi);
        let k_min = float_ceil(q_lo.lo());
        let k_max = float_floor(q_hi.hi());
        let c_lo_d = bin(p, |out, r| { out.assign(&self.lo); out.cos_round(r); }, Round::Down);
        let c_lo_u = bin(p, |out, r| { out.assign(&self.lo); out.cos_round(r); }, Round::Up);
        let c_hi_d = bin(p, |out, r| { out.assign(&self.hi); out.cos_round(r); }, Round::Down);
        let c_hi_u = bin(p, |out, r| { out.assign(&self.hi); out.cos_round(r); }, Round::Up);
        let mut lo = c_lo_d.min(&c_hi_d);
        let mut hi = c_lo_u.max(&c_hi_u);
        // an extremum cos = -1 occurs at odd multiples of pi, cos = +1 at even
        if Integer::from(&k_max - &k_min) > 4 {
            return full();
        }
        let mut k = k_min;
        while k <= k_max {
            if k.is_odd() {
                lo.assign(-1);
            } else {
                hi.assign(1);
            }
            k += 1;
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        RReal::from_parts(lo, hi)
    }

    /// Endpoint-wise maximum (encloses `max(a, b)`).
    pub fn max(&self, o: &RReal) -> Self {
        RReal::from_parts(self.lo.clone().max(&o.lo), self.hi.clone().max(&o.hi))
    }

    /// Endpoint-wise minimum (encloses `min(a, b)`).
    pub fn min(&self, o: &RReal) -> Self {
        RReal::from_parts(self.lo.clone().min(&o.lo), self.hi.clone().min(&o.hi))
    }

    /// Widen the interval symmetrically by a nonnegative padding.
    pub fn widen_by(&self, pad: &Float) -> Self {
        debug_assert!(pad.cmp0() != Some(Ordering::Less));
        let p = self.prec().max(pad.prec());
        let lo = bin(p, |out, r| { out.assign(&self.lo); out.sub_assign_round(pad, r); }, Round::Down);
        let hi = bin(p, |out, r| { out.assign(&self.hi); out.add_assign_round(pad, r); }, Round::Up);
        RReal::from_parts(lo, hi)
    }

    /// Interval width `hi - lo`, rounded up.
    pub fn width(&self) -> Float {
        bin(self.prec(), |out, r| { out.assign(&self.hi); out.sub_assign_round(&self.lo, r); }, Round::Up)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    /// Certified `f64` enclosure (directed conversions of both endpoints).
    pub fn to_f64i(&self) -> super::f64i::F64I {
        let lo = self.lo.to_f64_round(Round::Down);
        let hi = self.hi.to_f64_round(Round::Up);
        super::f64i::F64I::new(lo, hi)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    /// Midpoint as `f64` (estimate only, not certified).
    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    /// Certified strict `self < o`.
    pub fn lt(&self, o: &RReal) -> bool {
        self.hi < o.lo
    }

    /// Certified strict `self > o`.
    pub fn gt(&self, o: &RReal) -> bool {
        self.lo > o.hi
    }

    /// Certified sign versus zero; `None` when the interval straddles zero.
    pub fn sign_certified(&self) -> Option<Ordering> {
        if self.lo.cmp0() == Some(Ordering::Greater) {
            Some(Ordering::Greater)
        } else if self.hi.cmp0() == Some(Ordering::Less) {
            Some(Ordering::Less)
        } else if self.lo.cmp0() == Some(Ordering::Equal) && self.hi.cmp0() == Some(Ordering::Equal) {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.cmp0() != Some(Ordering::Greater) && self.hi.cmp0() != Some(Ordering::Less)
    }

    /// Whether `x` (exact) lies inside the interval.
    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Certified ceiling: both endpoints must round up to the same integer.
    pub fn ceil_certified(&self) -> Result<Integer> {
        let neg = self.neg().floor_certified()?;
        Ok(-neg)
    }

    /// Certified floor: both endpoints must floor to the same integer.
    pub fn floor_certified(&self) -> Result<Integer> {
        let exp = self
            .lo
            .get_exp()
            .unwrap_or(0)
            .max(self.hi.get_exp().unwrap_or(0))
            .max(2) as u32;
        let p = exp + 64;
        let f_lo = Float::with_val_round(p, self.lo.floor_ref(), Round::Down).0;
        let f_hi = Float::with_val_round(p, self.hi.floor_ref(), Round::Up).0;
        let i_lo = f_lo.to_integer().expect("finite floor");
        let i_hi = f_hi.to_integer().expect("finite floor");
        if i_lo == i_hi {
            Ok(i_lo)
        } else {
            Err(Error::PrecisionUndecidable {
                bits: self.prec(),
                what: format!("floor straddles integers {i_lo}..{i_hi}"),
            })
        }
    }
}

/// Run `attempt` at geometrically increasing precision until it produces a
/// certified answer, giving up at `max_bits`.
pub fn certify_with_ladder<T>(
    start_bits: u32,
    max_bits: u32,
    what: &str,
    mut attempt: impl FnMut(u32) -> Option<T>,
) -> Result<T> {
    let mut bits = start_bits.max(32);
    loop {
        if let Some(v) = attempt(bits) {
            return Ok(v);
        }
        if bits >= max_bits {
            return Err(Error::PrecisionUndecidable {
                bits,
                what: what.to_string(),
            });
        }
        bits = (bits.saturating_mul(2)).min(max_bits);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let x = RReal::from_rational(&rat(1, 3), 128);
        assert!(x.contains_rational(&rat(1, 3)));
        assert!(x.width_f64() < 1e-37);
        assert!(x.lo() < x.hi());
    }

    #[test]
    fn mul_sign_cases() {
        let mk = |a: i64, b: i64| {
            RReal::from_parts(Float::with_val(64, a), Float::with_val(64, b))
        };
        let p = mk(-2, 3).mul(&mk(-5, 7));
        assert_eq!(p.lo_f64(), -15.0);
        assert_eq!(p.hi_f64(), 21.0);
        let q = mk(2, 3).mul(&mk(-5, 7));
        assert_eq!(q.lo_f64(), -15.0);
        assert_eq!(q.hi_f64(), 21.0);
        let r = mk(-3, -2).mul(&mk(-7, -5));
        assert_eq!(r.lo_f64(), 10.0);
        assert_eq!(r.hi_f64(), 21.0);
    }

    #[test]
    fn ln_two_matches_reference() {
        // ln 2 = 0.693147180559945309417232121458176568... (frozen, truncated)
        let two = RReal::from_i64(2, 256);
        let l = two.ln();
        let reference = Float::with_val(
            200,
            Float::parse("0.693147180559945309417232121458176568").unwrap(),
        );
        let diff = Float::with_val(200, l.lo() - &reference).abs();
        assert!(diff < 1e-35);
        assert!(l.width_f64() < 1e-70);
    }

    #[test]
    fn exp_ln_roundtrip_contains_input() {
        let x = RReal::from_rational(&rat(355, 113), 192);
        let y = x.exp().ln();
        assert!(y.contains_rational(&rat(355, 113)));
    }

    #[test]
    fn cos_handles_extrema() {
        let p = 128;
        // interval around pi: cosine must reach -1 exactly on the lower side
        let pi = RReal::pi(p);
        let around_pi = pi.add(&RReal::from_parts(
            Float::with_val(p, -0.25),
            Float::with_val(p, 0.25),
        ));
        let c = around_pi.cos();
        assert_eq!(c.lo_f64(), -1.0);
        assert!(c.hi_f64() < -0.9);
        // monotone stretch [1, 2]: endpoints bound it
        let seg = RReal::from_parts(Float::with_val(p, 1), Float::with_val(p, 2));
        let c2 = seg.cos();
        assert!((c2.lo_f64() - (2.0f64).cos()).abs() < 1e-15);
        assert!((c2.hi_f64() - (1.0f64).cos()).abs() < 1e-15);
        // interval around 0: maximum +1
        let near0 = RReal::from_parts(Float::with_val(p, -0.1), Float::with_val(p, 0.1));
        let c3 = near0.cos();
        assert_eq!(c3.hi_f64(), 1.0);
    }

    #[test]
    fn floor_certification() {
        let x = RReal::from_rational(&rat(7, 2), 128);
        assert_eq!(x.floor_certified().unwrap(), Integer::from(3));
        let exact = RReal::from_i64(5, 64);
        assert_eq!(exact.floor_certified().unwrap(), Integer::from(5));
        // interval straddling an integer must refuse
        let bad = RReal::from_parts(Float::with_val(64, 2.9999), Float::with_val(64, 3.0001));
        assert!(bad.floor_certified().is_err());
        let neg = RReal::from_rational(&rat(-7, 2), 128);
        assert_eq!(neg.floor_certified().unwrap(), Integer::from(-4));
    }

    #[test]
    fn huge_scale_floor_is_exact() {
        // floor of an integer near 2^400 must not be truncated by precision
        let big = (Integer::from(1) << 400u32) + 7u32;
        let x = RReal::from_integer(&big, 512).add(&RReal::from_rational(&rat(1, 3), 512));
        assert_eq!(x.floor_certified().unwrap(), big);
    }

    #[test]
    fn ladder_escalates_until_decidable() {
        // ln(1 + 2^-200) > 0 is undecidable at 64 bits, decidable at 512
        let out = certify_with_ladder(64, 2048, "tiny sign", |bits| {
            let one = RReal::from_i64(1, bits);
            let tiny = RReal::from_rational(
                &Rational::from((Integer::from(1), Integer::from(1) << 200u32)),
                bits,
            );
            let v = one.add(&tiny).ln();
            v.sign_certified()
        });
        assert_eq!(out.unwrap(), Ordering::Greater);
    }

    #[test]
    fn division_respects_signs() {
        let a = RReal::from_parts(Float::with_val(64, 1), Float::with_val(64, 2));
        let b = RReal::from_parts(Float::with_val(64, -4), Float::with_val(64, -2));
        let q = a.div(&b);
        assert!(q.lo_f64() <= -1.0 && q.hi_f64() >= -0.25);
        assert!(q.hi_f64() < 0.0);
    }

    #[test]
    #[should_panic(expected = "division by interval containing zero")]
    fn division_by_zero_interval_panics() {
        let a = RReal::from_i64(1, 64);
        let b = RReal::from_parts(Float::with_val(64, -1), Float::with_val(64, 1));
        let _ = a.div(&b);
    }
}
