//! Recurrence densities and the cycle map from indices to target slots.
//!
//! A density `g` controls how many distinct targets the schedule cycles
//! through as the index grows.  Cycle `n` starts at the breakpoint
//! `bp(n) = floor(n * g(n))` and the slot number of index `k` inside its
//! cycle is `j(k) = k + 1 - bp(n)` where `bp(n) <= k < bp(n+1)`.  Slow
//! densities (`ln ln n`) revisit every fixed slot with positive lower
//! density, which is the combinatorial heart of the construction; constant
//! densities trade that faithfulness for tractable closed forms.
//!
//! Breakpoints of non-constant densities are certified: a floor is only
//! reported when the enclosure of `n * g(n)` pins it down, escalating
//! precision as needed.

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::num::{certify_with_ladder, F64I, RReal};

/// Which density drives the schedule.
#[derive(Clone, Debug)]
pub enum DensityKind {
    /// `g(n) = ln ln n` — the faithful slow density.
    LnLn,
    /// `g(n) = ln ln ln n` — slower still; usable only from astronomically
    /// large indices (where it first exceeds 1).
    LnLnLn,
    /// `g(n) = c` — constant density with exact breakpoints.
    Const(u32),
    /// `g(n) = ln n` — too fast: slot revisits become sparse; kept so the
    /// failure mode is demonstrable.
    Ln,
    /// Test hook: arbitrary certified evaluation.
    Custom {
        name: &'static str,
        n_min: u64,
        eval: fn(u64, u32) -> RReal,
    },
}

impl PartialEq for DensityKind {
    fn eq(&self, other: &Self) -> bool {
        // Custom densities are identified by name; function pointers have no
        // meaningful equality.
        match (self, other) {
            (DensityKind::LnLn, DensityKind::LnLn) => true,
            (DensityKind::LnLnLn, DensityKind::LnLnLn) => true,
            (DensityKind::Const(a), DensityKind::Const(b)) => a == b,
            (DensityKind::Ln, DensityKind::Ln) => true,
            (DensityKind::Custom { name: a, .. }, DensityKind::Custom { name: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl Eq for DensityKind {}

impl std::fmt::Display for DensityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityKind::LnLn => write!(f, "lnln"),
            DensityKind::LnLnLn => write!(f, "lnlnln"),
            DensityKind::Const(c) => write!(f, "const:{c}"),
            DensityKind::Ln => write!(f, "ln"),
            DensityKind::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

/// Result of evaluating a density at one point.
#[derive(Clone, Debug)]
pub enum DensityValue {
    /// Exact rational value (constant densities): floors need no
    /// certification.
    Exact(Rational),
    /// Certified enclosure.
    Enclosure(RReal),
}

/// A density together with its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityFunction {
    pub kind: DensityKind,
}

impl DensityFunction {
    pub fn new(kind: DensityKind) -> Result<Self> {
        if let DensityKind::Const(c) = kind {
            if c == 0 {
                return Err(Error::InvalidInput("constant density must be >= 1".into()));
            }
        }
        Ok(DensityFunction { kind })
    }

    /// Smallest index where the density is defined and `>= 1`.
    pub fn n_min(&self) -> u64 {
        match self.kind {
            DensityKind::LnLn => 16,          // ln ln 16 = 1.0197 > 1
            DensityKind::LnLnLn => 3_814_280, // ln ln ln of it = 1.0000000057 > 1
            DensityKind::Const(_) => 1,
            DensityKind::Ln => 3, // ln 3 = 1.0986 > 1
            DensityKind::Custom { n_min, .. } => n_min,
        }
    }

    /// Evaluate `g(n)`.
    pub fn eval(&self, n: u64, prec: u32) -> DensityValue {
        assert!(n >= self.n_min(), "density evaluated below its domain");
        match &self.kind {
            DensityKind::Const(c) => DensityValue::Exact(Rational::from(*c)),
            DensityKind::LnLn => {
                DensityValue::Enclosure(RReal::from_integer(&Integer::from(n), prec).ln().ln())
            }
            DensityKind::LnLnLn => DensityValue::Enclosure(
                RReal::from_integer(&Integer::from(n), prec).ln().ln().ln(),
            ),
            DensityKind::Ln => {
                DensityValue::Enclosure(RReal::from_integer(&Integer::from(n), prec).ln())
            }
            DensityKind::Custom { eval, .. } => DensityValue::Enclosure(eval(n, prec)),
        }
    }

    /// Fast uncertified estimate for search seeding.
    fn eval_f64(&self, n: u64) -> f64 {
        match &self.kind {
            DensityKind::Const(c) => *c as f64,
            DensityKind::LnLn => (n as f64).ln().ln(),
            DensityKind::LnLnLn => (n as f64).ln().ln().ln(),
            DensityKind::Ln => (n as f64).ln(),
            DensityKind::Custom { eval, .. } => eval(n, 64).mid_f64(),
        }
    }

    /// Evaluate `g(n)` at an arbitrary-size argument.  Custom densities are
    /// a test hook limited to `u64` arguments.
    pub fn eval_big(&self, n: &Integer, prec: u32) -> Result<DensityValue> {
        if let Some(small) = n.to_u64() {
            return Ok(self.eval(small, prec));
        }
        match &self.kind {
            DensityKind::Const(c) => Ok(DensityValue::Exact(Rational::from(*c))),
            DensityKind::LnLn => Ok(DensityValue::Enclosure(RReal::from_integer(n, prec).ln().ln())),
            DensityKind::LnLnLn => {
                Ok(DensityValue::Enclosure(RReal::from_integer(n, prec).ln().ln().ln()))
            }
            DensityKind::Ln => Ok(DensityValue::Enclosure(RReal::from_integer(n, prec).ln())),
            DensityKind::Custom { .. } => Err(Error::OutOfReach {
                index: n.clone(),
                reason: "custom densities only evaluate at u64 arguments".into(),
            }),
        }
    }

    /// Certified floor of `g(n)` at an arbitrary-size argument.
    pub fn floor_at_big(&self, n: &Integer, max_bits: u32) -> Result<Integer> {
        match self.eval_big(n, 96)? {
            DensityValue::Exact(q) => Ok(Integer::from(q.numer() / q.denom())),
            DensityValue::Enclosure(_) => certify_with_ladder(96, max_bits, "floor of density", |bits| {
                match self.eval_big(n, bits) {
                    Ok(DensityValue::Enclosure(x)) => x.floor_certified().ok(),
                    _ => None,
                }
            }),
        }
    }

    /// Smallest argument where `floor(g)` reaches `p + 1`, i.e. the right
    /// boundary of the plateau `floor(g) = p`.  `None` means the boundary is
    /// so large that even its digit count is impractical (the plateau is
    /// unbounded for every purpose of this crate), which is also the answer
    /// for constant densities.
    pub fn plateau_ceiling(&self, p: u32, max_bits: u32) -> Result<Option<Integer>> {
        let threshold = i64::from(p) + 1;
        // Estimate the bit size of the boundary; g(n) >= p+1 first holds at
        // exp(p+1), exp(exp(p+1)), exp(exp(exp(p+1))) for ln, lnln, lnlnln.
        let ln2 = std::f64::consts::LN_2;
        let est_bits = match self.kind {
            DensityKind::Const(_) | DensityKind::Custom { .. } => return Ok(None),
            DensityKind::Ln => threshold as f64 / ln2,
            DensityKind::LnLn => (threshold as f64).exp() / ln2,
            DensityKind::LnLnLn => {
                let inner = (threshold as f64).exp();
                if inner > 1e8 {
                    return Ok(None);
                }
                inner.exp() / ln2
            }
        };
        if !est_bits.is_finite() || est_bits > f64::from(max_bits) {
            return Ok(None);
        }
        let start = (est_bits as u32).saturating_add(96).max(128);
        let boundary = certify_with_ladder(start, max_bits, "plateau boundary", |bits| {
            let x = RReal::from_i64(threshold, bits);
            let grown = match self.kind {
                DensityKind::Ln => x.exp(),
                DensityKind::LnLn => x.exp().exp(),
                DensityKind::LnLnLn => x.exp().exp().exp(),
                _ => unreachable!(),
            };
            grown.ceil_certified().ok()
        })?;
        Ok(Some(boundary))
    }

    /// Certified floor of `g(n)` itself (the per-index growth weight).
    pub fn floor_at(&self, n: u64, max_bits: u32) -> Result<u64> {
        match self.eval(n, 96) {
            DensityValue::Exact(q) => Ok(q.numer().to_u64().expect("small") / q.denom().to_u64().expect("small")),
            DensityValue::Enclosure(_) => {
                let v = certify_with_ladder(96, max_bits, "floor of density", |bits| {
                    match self.eval(n, bits) {
                        DensityValue::Exact(_) => unreachable!(),
                        DensityValue::Enclosure(x) => x.floor_certified().ok(),
                    }
                })?;
                Ok(v.to_u64().expect("density floor fits u64"))
            }
        }
    }
}

/// Certified `floor(ln ln k)` (plateau weight of the faithful density).
pub fn floor_lnln(k: u64) -> Result<u64> {
    DensityFunction::new(DensityKind::LnLn)?.floor_at(k, 16_384)
}

/// The cycle map: breakpoints, slot numbers and cycle starts for one
/// density, anchored at the schedule's starting index.
#[derive(Clone, Debug)]
pub struct CycleMap {
    pub g: DensityFunction,
    /// First scheduled index (a cycle start, `>= 20`).
    pub k_start: u64,
    /// Cycle number whose breakpoint is `k_start`.
    pub start_n: u64,
}

impl CycleMap {
    /// Anchor the map: the schedule starts at the first breakpoint `>= 20`.
    pub fn new(g: DensityFunction) -> Result<Self> {
        let mut n = g.n_min();
        loop {
            let bp = Self::breakpoint_of(&g, n)?;
            if bp >= 20 {
                return Ok(CycleMap { g, k_start: bp, start_n: n });
            }
            n += 1;
            if n > g.n_min() + 1000 {
                return Err(Error::SearchBudgetExceeded(
                    "no breakpoint >= 20 near the density's domain start".into(),
                ));
            }
        }
    }

    fn breakpoint_of(g: &DensityFunction, n: u64) -> Result<u64> {
        // Hardware interval attempt first: it settles almost every call and
        // keeps the streaming scan's hop cost in the nanosecond range.
        if let Some(v) = Self::breakpoint_f64(g, n) {
            return Ok(v);
        }
        match g.eval(n, 96) {
            DensityValue::Exact(q) => {
                let v = Rational::from((Integer::from(n) * q.numer(), q.denom().clone()));
                let fl = Integer::from(v.numer() / v.denom());
                fl.to_u64().ok_or_else(|| Error::InvalidInput("breakpoint overflows u64".into()))
            }
            DensityValue::Enclosure(_) => {
                let nn = Integer::from(n);
                let v = certify_with_ladder(128, 16_384, "breakpoint floor", |bits| {
                    match g.eval(n, bits) {
                        DensityValue::Exact(_) => unreachable!(),
                        DensityValue::Enclosure(x) => x.mul_int(&nn).floor_certified().ok(),
                    }
                })?;
                v.to_u64().ok_or_else(|| Error::InvalidInput("breakpoint overflows u64".into()))
            }
        }
    }

    /// Hardware-float attempt at `floor(n g(n))`; `None` when the interval
    /// straddles an integer.
    fn breakpoint_f64(g: &DensityFunction, n: u64) -> Option<u64> {
        if n > (1u64 << 52) {
            return None;
        }
        let gi = match &g.kind {
            DensityKind::LnLn => F64I::point(n as f64).ln().ln(),
            DensityKind::LnLnLn => F64I::point(n as f64).ln().ln().ln(),
            DensityKind::Ln => F64I::point(n as f64).ln(),
            _ => return None,
        };
        let prod = gi.mul(F64I::point(n as f64));
        let (fl, fh) = (prod.lo.floor(), prod.hi.floor());
        if fl == fh && fl >= 0.0 && fl < (1u64 << 52) as f64 {
            Some(fl as u64)
        } else {
            None
        }
    }

    /// `bp(n) = floor(n g(n))`, certified.
    pub fn breakpoint(&self, n: u64) -> Result<u64> {
        if n < self.g.n_min() {
            return Err(Error::OutOfReach {
                index: Integer::from(n),
                reason: "below the density's domain".into(),
            });
        }
        Self::breakpoint_of(&self.g, n)
    }

    /// Cycle number `n` with `bp(n) <= k < bp(n+1)`.
    pub fn cycle_index(&self, k: u64) -> Result<u64> {
        if k < self.k_start {
            return Err(Error::OutOfReach {
                index: Integer::from(k),
                reason: "before the schedule start".into(),
            });
        }
        // fixpoint iteration on n = k / g(n), then certified adjustment
        let mut guess = (k as f64 / self.g.eval_f64(k).max(1.0)).max(self.g.n_min() as f64);
        for _ in 0..8 {
            let gg = self.g.eval_f64(guess as u64).max(1.0);
            guess = (k as f64 / gg).max(self.g.n_min() as f64);
        }
        let mut n = (guess as u64).max(self.start_n);
        while self.breakpoint(n)? > k {
            if n == self.start_n {
                break;
            }
            n -= 1;
        }
        while self.breakpoint(n + 1)? <= k {
            n += 1;
        }
        debug_assert!(self.breakpoint(n)? <= k && k < self.breakpoint(n + 1)?);
        Ok(n)
    }

    /// `bp(n)` for arbitrary-size cycle numbers (bracket machinery).
    pub fn breakpoint_big(&self, n: &Integer) -> Result<Integer> {
        if let Some(small) = n.to_u64() {
            match self.breakpoint(small) {
                Ok(v) => return Ok(Integer::from(v)),
                // The product may overflow u64 while n itself fits; retry big.
                Err(Error::InvalidInput(_)) => {}
                Err(e) => return Err(e),
            }
        }
        match self.g.eval_big(n, 96)? {
            DensityValue::Exact(q) => {
                let num = Integer::from(n * q.numer());
                Ok(num / q.denom())
            }
            DensityValue::Enclosure(_) => {
                let start = n.significant_bits() + 96;
                certify_with_ladder(start, 1 << 22, "breakpoint floor", |bits| {
                    match self.g.eval_big(n, bits) {
                        Ok(DensityValue::Enclosure(x)) => x.mul_int(n).floor_certified().ok(),
                        _ => None,
                    }
                })
            }
        }
    }

    /// Cycle number `n` with `bp(n) <= k < bp(n+1)`, for arbitrary-size `k`.
    ///
    /// A plain-float Newton solve of `n g(n) = k` seeds the answer (the seed
    /// is uncertified; only the final walk is trusted), with bisection over
    /// `[start_n, k+1]` as the fallback: `bp` is strictly increasing and
    /// `bp(n) >= n` (the density is `>= 1` on its domain), so that range
    /// brackets the answer and every probe is a certified breakpoint.
    pub fn cycle_index_big(&self, k: &Integer) -> Result<Integer> {
        if let Some(small) = k.to_u64() {
            match self.cycle_index(small) {
                Ok(v) => return Ok(Integer::from(v)),
                Err(Error::InvalidInput(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if let DensityKind::Const(c) = self.g.kind {
            return Ok(Integer::from(k / c));
        }
        if let Some(n) = self.cycle_index_newton(k)? {
            return Ok(n);
        }
        let mut lo = Integer::from(self.start_n);
        let mut hi = Integer::from(k + 1u32);
        while Integer::from(&hi - &lo) > 1 {
            let mid = Integer::from(&lo + &hi) >> 1;
            if self.breakpoint_big(&mid)? <= *k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Newton seed for `cycle_index_big` on the logarithm-tower densities,
    /// finished by a certified walk.  `None` when the seed lands too far off
    /// (caller bisects instead).
    fn cycle_index_newton(&self, k: &Integer) -> Result<Option<Integer>> {
        let bits = k.significant_bits() + 64;
        let kf = Float::with_val(bits, k);
        // x0 = k / g(k); then Newton on f(x) = x g(x) - k
        let g_at = |x: &Float| -> Option<(Float, Float)> {
            // returns (g(x), f'(x) = g(x) + x g'(x))
            let lnx = x.clone().ln();
            match self.g.kind {
                DensityKind::Ln => {
                    let fp = lnx.clone() + 1u32;
                    Some((lnx, fp))
                }
                DensityKind::LnLn => {
                    let g = lnx.clone().ln();
                    let fp = g.clone() + lnx.recip();
                    Some((g, fp))
                }
                DensityKind::LnLnLn => {
                    let l2 = lnx.clone().ln();
                    let g = l2.clone().ln();
                    let fp = g.clone() + (lnx * l2).recip();
                    Some((g, fp))
                }
                _ => None,
            }
        };
        let Some((g0, _)) = g_at(&kf) else {
            return Ok(None);
        };
        let mut x = kf.clone() / g0;
        for _ in 0..64 {
            let Some((g, fp)) = g_at(&x) else {
                return Ok(None);
            };
            let step = (x.clone() * g - &kf) / fp;
            x -= &step;
            if step.clone().abs() < 0.25 {
                break;
            }
        }
        let Some(mut n) = x.to_integer() else {
            return Ok(None);
        };
        let floor_n = Integer::from(self.start_n);
        if n < floor_n {
            n = floor_n.clone();
        }
        // Certify: bring n to bp(n) <= k < bp(n+1) in a few monotone steps.
        let mut tries = 64;
        while n > floor_n && self.breakpoint_big(&n)? > *k {
            n -= 1u32;
            tries -= 1;
            if tries == 0 {
                return Ok(None);
            }
        }
        while self.breakpoint_big(&Integer::from(&n + 1u32))? <= *k {
            n += 1u32;
            tries -= 1;
            if tries == 0 {
                return Ok(None);
            }
        }
        if self.breakpoint_big(&n)? <= *k {
            Ok(Some(n))
        } else {
            Ok(None)
        }
    }

    /// Slot number of index `k` inside its cycle (1-based).
    pub fn j(&self, k: u64) -> Result<u64> {
        let n = self.cycle_index(k)?;
        Ok(k + 1 - self.breakpoint(n)?)
    }

    /// Slot number for arbitrary-size indices.
    pub fn j_big(&self, k: &Integer) -> Result<Integer> {
        if let Some(small) = k.to_u64() {
            return Ok(Integer::from(self.j(small)?));
        }
        if let DensityKind::Const(c) = self.g.kind {
            return Ok(Integer::from(k % c) + 1u32);
        }
        let n = self.cycle_index_big(k)?;
        Ok(Integer::from(k + 1u32) - self.breakpoint_big(&n)?)
    }

    /// Smallest cycle start strictly greater than `k`.
    pub fn next_cycle_start(&self, k: u64) -> Result<u64> {
        if k < self.k_start {
            return Ok(self.k_start);
        }
        let n = self.cycle_index(k)?;
        self.breakpoint(n + 1)
    }

    /// Number of slots in cycle `n`.
    pub fn cycle_length(&self, n: u64) -> Result<u64> {
        Ok(self.breakpoint(n + 1)? - self.breakpoint(n)?)
    }

    /// Verify the slot-number law `j(k) < floor(ln ln k) + 3`, which the
    /// tail and covering estimates rely on.
    pub fn check_j_bound(&self, k: u64) -> Result<bool> {
        let j = self.j(k)?;
        let bound = floor_lnln(k)? + 3;
        Ok(j < bound)
    }
}
