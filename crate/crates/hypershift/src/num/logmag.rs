//! Log-scale magnitudes for quantities far outside `f64` (or any float)
//! dynamic range.
//!
//! Tail norms and orbit coefficients in this crate have natural logarithms
//! on the order of `-10^6` and beyond, so magnitudes are carried as
//! certified enclosures of their logarithm.  [`LogMag`] is either an exact
//! zero or `Log(x)` representing `e^x` for an interval `x`.

use rug::Integer;

use super::real::RReal;
use crate::error::{Error, Result};

/// A nonnegative magnitude `m`, stored as `ln m` (or exactly zero).
#[derive(Clone, Debug)]
pub enum LogMag {
    /// Exactly zero.
    Zero,
    /// `e^x` for the enclosed exponent `x`.
    Log(RReal),
}

impl LogMag {
    /// Magnitude `e^x`.
    pub fn from_log(x: RReal) -> Self {
        LogMag::Log(x)
    }

    /// Magnitude `1`.
    pub fn one(prec: u32) -> Self {
        LogMag::Log(RReal::zero(prec))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogMag::Zero)
    }

    pub fn log(&self) -> Option<&RReal> {
        match self {
            LogMag::Zero => None,
            LogMag::Log(x) => Some(x),
        }
    }

    /// Product of magnitudes (sum of logs).
    pub fn mul(&self, o: &LogMag) -> LogMag {
        match (self, o) {
            (LogMag::Zero, _) | (_, LogMag::Zero) => LogMag::Zero,
            (LogMag::Log(a), LogMag::Log(b)) => LogMag::Log(a.add(b)),
        }
    }

    /// Quotient of magnitudes; divisor must be nonzero.
    pub fn div(&self, o: &LogMag) -> LogMag {
        match (self, o) {
            (_, LogMag::Zero) => panic!("division by zero magnitude"),
            (LogMag::Zero, _) => LogMag::Zero,
            (LogMag::Log(a), LogMag::Log(b)) => LogMag::Log(a.sub(b)),
        }
    }

    /// Square root (halves the log).
    pub fn sqrt(&self) -> LogMag {
        match self {
            LogMag::Zero => LogMag::Zero,
            LogMag::Log(a) => {
                let half = rug::Rational::from((1, 2));
                LogMag::Log(a.mul_rational(&half))
            }
        }
    }

    /// Square (doubles the log).
    pub fn square(&self) -> LogMag {
        match self {
            LogMag::Zero => LogMag::Zero,
            LogMag::Log(a) => LogMag::Log(a.mul_rational(&rug::Rational::from(2))),
        }
    }

    /// Integer power `m^n` for huge `n` (exact integer times the log).
    pub fn pow_big(&self, n: &Integer) -> LogMag {
        match self {
            LogMag::Zero => {
                assert!(n.cmp0() == std::cmp::Ordering::Greater, "0^n, n <= 0");
                LogMag::Zero
            }
            LogMag::Log(a) => LogMag::Log(a.mul_int(n)),
        }
    }

    /// Certified strict order between magnitudes.
    pub fn lt(&self, o: &LogMag) -> bool {
        match (self, o) {
            (LogMag::Zero, LogMag::Zero) => false,
            (LogMag::Zero, LogMag::Log(_)) => true,
            (LogMag::Log(_), LogMag::Zero) => false,
            (LogMag::Log(a), LogMag::Log(b)) => a.lt(b),
        }
    }

    /// The magnitude as `f64` (0 on underflow), or an error when the
    /// log-magnitude exceeds `f64` range upward.
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            LogMag::Zero => Ok(0.0),
            LogMag::Log(x) => {
                let m = x.mid_f64();
                if m > 709.0 {
                    Err(Error::FloatRangeExceeded { log_magnitude: m })
                } else {
                    Ok(m.exp())
                }
            }
        }
    }
}

/// `ln(1 - e^x)` for certified `x < 0`; decreasing in `x`.
pub fn l1me(x: &RReal) -> Result<RReal> {
    if x.hi().cmp0() != Some(std::cmp::Ordering::Less) {
        return Err(Error::DegenerateGap { index: Integer::from(-1) });
    }
    // 1 - e^x = -(expm1(x)), strictly positive here
    let t = x.exp_m1().neg();
    Ok(t.ln())
}

/// Log of a sum of two magnitudes: `ln(e^a + e^b)`.
pub fn lse2(a: &LogMag, b: &LogMag) -> LogMag {
    match (a, b) {
        (LogMag::Zero, x) | (x, LogMag::Zero) => x.clone(),
        (LogMag::Log(a), LogMag::Log(b)) => {
            // order by midpoint so the exponent passed to exp is <= ~0
            let (big, small) = if a.mid_f64() >= b.mid_f64() { (a, b) } else { (b, a) };
            let delta = small.sub(big); // mostly <= 0; enclosure may poke above
            let corr = delta.exp().ln_1p();
            LogMag::Log(big.add(&corr))
        }
    }
}

/// Log of a difference of magnitudes `ln(e^a - e^b)`; requires certified
/// `b < a`, otherwise the difference could be nonpositive.
pub fn log_diff(a: &RReal, b: &RReal) -> Result<RReal> {
    if !(b.lt(a)) {
        return Err(Error::DegenerateGap { index: Integer::from(-1) });
    }
    let delta = b.sub(a);
    let corr = l1me(&delta)?;
    Ok(a.add(&corr))
}

/// Log of a sum of squares: `ln sqrt(sum e^(2 x_i))`, i.e. the log of the
/// Euclidean norm of magnitudes given by their logs.
pub fn log_norm(logs: &[LogMag]) -> LogMag {
    let mut acc = LogMag::Zero;
    for x in logs {
        acc = lse2(&acc, &x.square());
    }
    acc.sqrt()
}
