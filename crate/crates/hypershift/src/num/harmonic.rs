//! Certified partial sums of harmonic progressions.
//!
//! Schedule phases accumulate increments `1/(a), 1/(a+d), 1/(a+2d), ...`
//! whose counts reach `10^300000` and beyond, far past term-by-term
//! summation.  The closed form
//!
//! ```text
//! sum_{j=0}^{n-1} 1/(a + j d)  =  (psi(a/d + n) - psi(a/d)) / d
//! ```
//!
//! reduces any such sum to two digamma evaluations.  For large arguments
//! digamma is evaluated by the asymptotic expansion with an explicit
//! enclosure of the truncation error (the first omitted term bounds the
//! remainder); small arguments fall back to MPFR's correctly rounded
//! digamma at both rounding directions.  Tiny counts are summed directly.

use rug::{Integer, Rational};

use super::real::RReal;

/// Numerators and denominators of the Bernoulli numbers `B_2 .. B_32`
/// (even indices only), exact.
const BERNOULLI_EVEN: [(i128, i128); 16] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
    (-7709321041217, 510),
];

fn bernoulli_over_index(n: usize) -> Rational {
    // B_{2n} / (2n), n = 1..=16
    let (num, den) = BERNOULLI_EVEN[n - 1];
    Rational::from((Integer::from(num), Integer::from(den) * Integer::from(2 * n as i64)))
}

/// Cheap lower estimate of `ln x` for a positive rational, from bit sizes.
fn ln_estimate(x: &Rational) -> f64 {
    let nb = x.numer().significant_bits() as f64;
    let db = x.denom().significant_bits() as f64;
    (nb - db - 1.0) * std::f64::consts::LN_2
}

/// Digamma via the asymptotic expansion; sound only when the remainder
/// bound (first omitted term) is computed, which this does.  Intended for
/// `ln z` well above `0.0217 * prec`; for smaller arguments the returned
/// enclosure is honest but uselessly wide.
pub(crate) fn psi_asymptotic(arg: &Rational, prec: u32) -> RReal {
    let p = prec + 64;
    let z = RReal::from_rational(arg, p);
    let ln_z = ln_estimate(arg).max(0.7);
    let terms = ((0.35 * p as f64 / ln_z).ceil() as usize + 2).clamp(3, 15);
    // psi(z) = ln z - 1/(2z) - sum B_{2n} / (2n z^{2n}) - theta * next term
    let mut acc = z.ln();
    let one = RReal::from_i64(1, p);
    acc = acc.sub(&one.div(&z.mul_rational(&Rational::from(2))));
    let w = one.div(&z.mul(&z)); // z^-2
    let mut pw = w.clone();
    for n in 1..=terms {
        acc = acc.sub(&pw.mul_rational(&bernoulli_over_index(n)));
        pw = pw.mul(&w);
    }
    // |remainder| <= |B_{2(terms+1)} / (2(terms+1))| * z^{-2(terms+1)}
    let tail = pw.mul_rational(&bernoulli_over_index(terms + 1)).abs();
    acc.widen_by(tail.hi())
}

/// Digamma enclosure of a positive rational argument.
pub(crate) fn psi(arg: &Rational, prec: u32) -> RReal {
    assert!(arg.cmp0() == std::cmp::Ordering::Greater);
    let ln_arg = ln_estimate(arg);
    if ln_arg >= 0.0217 * (prec as f64 + 64.0) + 3.0 {
        psi_asymptotic(arg, prec)
    } else {
        RReal::from_rational(arg, prec + 32).digamma()
    }
}

/// The arithmetic progression `first, first + stride, first + 2 stride, ...`
/// of denominators, with exact rational parameters.
#[derive(Clone, Debug)]
pub struct HarmonicProgression {
    pub first: Rational,
    pub stride: Rational,
}

impl HarmonicProgression {
    pub fn new(first: Rational, stride: Rational) -> Self {
        assert!(first.cmp0() == std::cmp::Ordering::Greater);
        assert!(stride.cmp0() == std::cmp::Ordering::Greater);
        HarmonicProgression { first, stride }
    }

    /// Certified enclosure of `sum_{j=0}^{count-1} 1/(first + j stride)`.
    pub fn sum(&self, count: &Integer, prec: u32) -> RReal {
        if count.cmp0() != std::cmp::Ordering::Greater {
            return RReal::zero(prec);
        }
        if *count <= 3000 && prec <= 16_384 {
            return self.sum_direct(count.to_u32().expect("small count"), prec);
        }
        let x = Rational::from(&self.first / &self.stride);
        let x_n = Rational::from(&x + count);
        let diff = psi(&x_n, prec).sub(&psi(&x, prec));
        let inv_stride = Rational::from(self.stride.recip_ref());
        diff.mul_rational(&inv_stride)
    }

    fn sum_direct(&self, count: u32, prec: u32) -> RReal {
        let mut acc = RReal::zero(prec);
        let mut den = self.first.clone();
        for _ in 0..count {
            let term = Rational::from(den.recip_ref());
            acc = acc.add(&RReal::from_rational(&term, prec));
            den += &self.stride;
        }
        acc
    }
}
