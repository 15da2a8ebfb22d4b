//! The common vector `f` as a lazy block structure.
//!
//! `f` is a sum of widely separated finite blocks: block `k` occupies
//! coordinates `[M_k, M_{k+1})` and carries the pattern of the target
//! `v_{j(k)}`, scaled so the block's mass is exactly `d_k = sqrt(r_k^2 -
//! r_{k+1}^2)` and (in complex modes) rotated by the block phase.  All
//! orbit algebra stays in the log domain end to end — block positions
//! reach `exp(q^4)` within a few steps, so `|z|^{M_k}`, `d_k` and `r_k`
//! overflow or underflow every fixed-range float — and every derived
//! figure is a certified enclosure.  Only the materialization helpers
//! leave the log domain, and they refuse (`FloatRangeExceeded`) rather
//! than silently saturate.

use std::cmp::Ordering;
use std::collections::HashMap;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::num::{log_diff, log_norm, LogMag, RReal};
use crate::schedule::{Mode, Schedule};
use crate::targets::{self, TargetVector};

/// Default working precision (bits) for block data and orbit distances.
pub const DEFAULT_PREC: u32 = 192;

/// Conservative cut for `|ln amplitude|` beyond which materialized
/// coordinates are not trusted to `f64` (range ends near `±745`).
const F64_LOG_RANGE: f64 = 700.0;

/// A scaling multiplier `z` with `|z| > 1`, written `|z| e^{2 pi i turn}`.
///
/// Orbit certifications multiply `ln |z|` and the turn by block positions
/// with thousands of digits, so both are kept in forms whose products
/// stay meaningful at any depth: the modulus as an exact rational (or a
/// log enclosure for moduli like `e` whose log is exactly representable),
/// re-derived at whatever precision a use site needs, and the turn as an
/// exact rational reduced modulo one by integer arithmetic.
#[derive(Clone, Debug)]
pub struct Multiplier {
    source: ModulusSource,
    turn: Option<Rational>,
}

#[derive(Clone, Debug)]
enum ModulusSource {
    /// `|z|` itself; `ln` is derived per use.
    Modulus(Rational),
    /// `ln |z|` directly, at its construction width.
    Log(RReal),
}

impl Multiplier {
    /// Build from a certified-positive `ln |z|` and an optional turn in
    /// `[0, 1)`.  Prefer `exact` when the modulus is rational: a log
    /// enclosure of fixed width cannot serve certifications deep in the
    /// schedule, where the needed precision grows with the block position.
    pub fn from_log(log_modulus: RReal, turn: Option<Rational>) -> Result<Self> {
        if log_modulus.lo().cmp0() != Some(Ordering::Greater) {
            return Err(Error::InvalidInput(
                "orbit scaling needs a certified modulus above 1 (log modulus > 0)".into(),
            ));
        }
        Multiplier::with_turn(ModulusSource::Log(log_modulus), turn)
    }

    /// Build from an exact rational modulus `> 1` and an optional turn.
    pub fn exact(modulus: Rational, turn: Option<Rational>) -> Result<Self> {
        if modulus <= 1u32 {
            return Err(Error::InvalidInput(format!("modulus {modulus} must exceed 1")));
        }
        Multiplier::with_turn(ModulusSource::Modulus(modulus), turn)
    }

    fn with_turn(source: ModulusSource, turn: Option<Rational>) -> Result<Self> {
        if let Some(t) = &turn {
            if t.cmp0() == Ordering::Less || *t >= 1u32 {
                return Err(Error::InvalidInput("turn must lie in [0, 1)".into()));
            }
        }
        Ok(Multiplier { source, turn })
    }

    /// Real multiplier `z = modulus` with `modulus > 1`, taking the f64
    /// value exactly.
    pub fn real_f64(modulus: f64) -> Result<Self> {
        let Some(m) = Rational::from_f64(modulus) else {
            return Err(Error::InvalidInput(format!("modulus {modulus} must be finite")));
        };
        Multiplier::exact(m, None)
    }

    /// Complex multiplier `z = modulus * e^{2 pi i turn}`, taking both
    /// f64 values exactly.
    pub fn complex_f64(modulus: f64, turn: f64) -> Result<Self> {
        let (Some(m), Some(t)) = (Rational::from_f64(modulus), Rational::from_f64(turn)) else {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus} and turn {turn} must be finite"
            )));
        };
        Multiplier::exact(m, Some(t))
    }

    /// `ln |z|` as an enclosure at (roughly) the requested precision.
    pub fn log_modulus(&self, prec: u32) -> RReal {
        match &self.source {
            ModulusSource::Modulus(m) => RReal::from_rational(m, prec).ln(),
            ModulusSource::Log(x) => x.with_prec(prec),
        }
    }

    pub fn turn(&self) -> Option<&Rational> {
        self.turn.as_ref()
    }
}

/// One block of `f`: the coordinates `[start, start + width)` hold
/// `e^{log_amp} * e^{2 pi i phase} * w_k`, where `w_k` is
/// `e^{pattern_scale}` times the rational `pattern` (zero-padded to the
/// block width).  The block's mass is exactly `d_k`.
#[derive(Clone, Debug)]
pub struct Block {
    /// Index `k`.
    pub k: Integer,
    /// Block position `M_k`.
    pub start: Integer,
    /// Block width `M_{k+1} - M_k`.
    pub width: Integer,
    /// Rational coordinate pairs of `w_k` (a prefix of the slot target).
    pub pattern: Vec<(Rational, Rational)>,
    /// Integer `e`-power scale of the pattern.
    pub pattern_scale: i64,
    /// `ln(d_k / ||w_k||)`.
    pub log_amp: RReal,
    /// Block phase `theta_k` in turns (exactly zero in real modes).
    pub phase: RReal,
    /// Target slot `j(k)`.
    pub j: u64,
    /// Whether the slot target was cut to fit the block width.
    pub truncated: bool,
    /// Whether an all-zero cut was replaced by the first basis vector.
    pub substituted: bool,
}

/// Log-norm of a rational pattern scaled by `e^scale`; refuses patterns
/// with no mass, since they cannot absorb a block amplitude.
pub fn pattern_log_norm(pattern: &[(Rational, Rational)], scale: i64, prec: u32) -> Result<RReal> {
    let mut n2 = Rational::new();
    for (re, im) in pattern {
        n2 += Rational::from(re * re);
        n2 += Rational::from(im * im);
    }
    if n2.cmp0() != Ordering::Greater {
        return Err(Error::EmptyPattern);
    }
    let half = Rational::from((1, 2));
    Ok(RReal::from_rational(&n2, prec)
        .ln()
        .mul_rational(&half)
        .add(&RReal::from_i64(scale, prec)))
}

/// `ln sqrt(e^{2a} - e^{2b})` for certified `b < a`: the mass left in a
/// leading slice when both ends are known by their logs.
fn log_gap_coeff(a: &RReal, b: &RReal) -> Result<RReal> {
    let two = Rational::from(2);
    let half = Rational::from((1, 2));
    let d = log_diff(&a.mul_rational(&two), &b.mul_rational(&two))?;
    Ok(d.mul_rational(&half))
}

/// The common vector: a schedule plus lazily computed blocks.
pub struct HVector {
    sched: Schedule,
    prec: u32,
    blocks: HashMap<Integer, Block>,
    targets: HashMap<u64, TargetVector>,
}

impl HVector {
    pub fn new(sched: Schedule) -> Self {
        HVector { sched, prec: DEFAULT_PREC, blocks: HashMap::new(), targets: HashMap::new() }
    }

    /// Replace the working precision (bits) for newly computed data.
    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec.max(64);
        self
    }

    pub fn schedule(&self) -> &Schedule {
        &self.sched
    }

    pub fn schedule_mut(&mut self) -> &mut Schedule {
        &mut self.sched
    }

    pub fn mode(&self) -> Mode {
        self.sched.mode()
    }

    /// First block index.
    pub fn first_index(&self) -> u64 {
        self.sched.k_start()
    }

    fn target(&mut self, l: u64) -> Result<TargetVector> {
        if !self.targets.contains_key(&l) {
            let v = targets::enumerate(&Integer::from(l))?;
            self.targets.insert(l, v);
        }
        Ok(self.targets[&l].clone())
    }

    /// `ln ||` tail from block `k` on `|| = ln r_k`, exact from the
    /// schedule (the block masses telescope by construction, so no
    /// summation is involved).
    pub fn tail_log_norm(&mut self, k: &Integer) -> Result<RReal> {
        Ok(self.sched.entry(k)?.log_r)
    }

    /// `ln d_k`, the mass of block `k`, via the stable two-ends form.
    pub fn log_d(&mut self, k: &Integer) -> Result<RReal> {
        let a = self.tail_log_norm(k)?;
        let b = self.tail_log_norm(&Integer::from(k + 1u32))?;
        log_gap_coeff(&a, &b).map_err(|e| match e {
            Error::DegenerateGap { .. } => Error::DegenerateGap { index: k.clone() },
            other => other,
        })
    }

    /// The `k`-th block (cached).
    pub fn block(&mut self, k: &Integer) -> Result<Block> {
        if let Some(b) = self.blocks.get(k) {
            return Ok(b.clone());
        }
        let e = self.sched.entry(k)?;
        let e1 = self.sched.entry(&Integer::from(k + 1u32))?;
        let width = Integer::from(&e1.m - &e.m);
        let v = self.target(e.j)?;
        let truncated = width < v.support() as u64;
        let retain = if truncated { width.to_u64().unwrap_or(0) as usize } else { v.support() };
        let mut pattern = v.coords[..retain].to_vec();
        let mut scale = v.scale_exp;
        let mut substituted = false;
        if pattern
            .iter()
            .all(|(a, b)| a.cmp0() == Ordering::Equal && b.cmp0() == Ordering::Equal)
        {
            // a cut that loses every nonzero coordinate: park the block's
            // mass on the first basis vector so tail norms keep
            // telescoping exactly
            pattern = vec![(Rational::from(1), Rational::from(0))];
            scale = 0;
            substituted = true;
        }
        let log_norm_w = pattern_log_norm(&pattern, scale, self.prec)?;
        let log_amp = self.log_d(k)?.sub(&log_norm_w);
        let phase = match &e.theta {
            Some(t) => t.clone(),
            None => RReal::zero(self.prec),
        };
        let b = Block {
            k: k.clone(),
            start: e.m.clone(),
            width,
            pattern,
            pattern_scale: scale,
            log_amp,
            phase,
            j: e.j,
            truncated,
            substituted,
        };
        self.blocks.insert(k.clone(), b.clone());
        Ok(b)
    }

    /// Certified `ln || (zB)^{M_k} f - v_l ||` for the slot target of
    /// block `k` (so `j(k) = l` and the block must carry `v_l` whole).
    ///
    /// The orbit point splits orthogonally: on the target's support it is
    /// `c * v_l` with `c = z^{M_k} e^{2 pi i theta_k} d_k / ||v_l||`, the
    /// rest of the block window is zero on both sides, and past the block
    /// it has mass exactly `|z|^{M_k} r_{k+1}`.  The returned enclosure is
    /// therefore the exact distance, not just an upper bound, up to the
    /// precision of the inputs:
    /// `D^2 = |c - 1|^2 ||v_l||^2 + |z|^{2 M_k} r_{k+1}^2`.
    pub fn scaled_orbit_log_distance(
        &mut self,
        z: &Multiplier,
        k: &Integer,
        l: u64,
    ) -> Result<LogMag> {
        let b = self.block(k)?;
        if b.j != l || b.truncated || b.substituted {
            return Err(Error::PatternMismatch(format!(
                "block {k} carries slot {} (truncated: {}, substituted: {}), not target {l} whole",
                b.j, b.truncated, b.substituted
            )));
        }
        let e = self.sched.entry(k)?;
        let v = self.target(l)?;
        // the products M_k * ln|z| and M_k * y_k cancel to an O(1)
        // coefficient offset, so the working precision must grow with the
        // digits of M_k or the enclosure is pure rounding noise
        let wp = self.prec.max(e.m.significant_bits() + 64) + 32;
        let alpha = v.log_norm(wp);
        let m_log_mod = z.log_modulus(wp).mul_int(&e.m);
        let u = m_log_mod.add(&self.log_d(k)?.with_prec(wp)).sub(&alpha);
        // combined coefficient phase: M_k * turn (reduced exactly) plus
        // the block's own phase; real-on-real orbits skip phase work
        let phi = if z.turn.is_some() || self.sched.mode().is_complex() {
            let spin = match &z.turn {
                Some(t) => RReal::from_rational(&turn_times_int(&e.m, t), wp),
                None => RReal::zero(wp),
            };
            Some(spin.add(&b.phase.with_prec(wp)))
        } else {
            None
        };
        let (mis_floor, mis_cap) = log_abs_c_minus_one(&u, phi.as_ref());
        let scale = LogMag::from_log(alpha);
        let tail_next = self.tail_log_norm(&Integer::from(k + 1u32))?.with_prec(wp);
        let tail = LogMag::from_log(m_log_mod.add(&tail_next));
        // the tail mass is strictly positive, so both one-sided compositions
        // stay finite even when the coefficient mismatch may vanish
        let d_floor = log_norm(&[scale.mul(&mis_floor), tail.clone()]);
        let d_cap = log_norm(&[scale.mul(&mis_cap), tail]);
        Ok(match (d_floor.log(), d_cap.log()) {
            (Some(a), Some(b)) => {
                LogMag::from_log(RReal::from_bounds(a.lo().clone(), b.hi().clone()))
            }
            _ => LogMag::Zero,
        })
    }

    /// Literal leading coordinates of `f`: the first `prefix_blocks`
    /// blocks written into a window of `out_len` coordinates.
    pub fn materialize(&mut self, prefix_blocks: u64, out_len: usize) -> Result<Vec<(f64, f64)>> {
        let mut out = vec![(0.0, 0.0); out_len];
        let first = Integer::from(self.first_index());
        let base = Integer::new();
        for i in 0..prefix_blocks {
            let k = Integer::from(&first + i);
            let b = self.block(&k)?;
            write_block(&b, &base, &mut out)?;
        }
        Ok(out)
    }

    /// Literal leading coordinates of the shifted orbit `B^{M_k} f`
    /// (`count` blocks from `k` on), plus a certified upper bound on the
    /// mass left out past those blocks.
    pub fn orbit_materialized(
        &mut self,
        k: &Integer,
        count: u64,
        out_len: usize,
    ) -> Result<(Vec<(f64, f64)>, f64)> {
        let mut out = vec![(0.0, 0.0); out_len];
        let base = self.sched.entry(k)?.m.clone();
        for i in 0..count {
            let ki = Integer::from(k + i);
            let b = self.block(&ki)?;
            write_block(&b, &base, &mut out)?;
        }
        let tail = self.tail_log_norm(&Integer::from(k + count))?;
        Ok((out, tail.exp().to_f64i().hi))
    }

    /// Literal leading coordinates of the scaled orbit `(zB)^{M_k} f`
    /// (`count` blocks from `k` on), plus a certified upper bound on the
    /// scaled mass past those blocks.  The uniform factor `z^{M_k}` folds
    /// into each block's amplitude in the log domain before anything
    /// leaves it, so windows around deep witnesses materialize even when
    /// `|z|^{M_k}` and the raw amplitudes separately dwarf f64 range.
    pub fn scaled_orbit_materialized(
        &mut self,
        z: &Multiplier,
        k: &Integer,
        count: u64,
        out_len: usize,
    ) -> Result<(Vec<(f64, f64)>, f64)> {
        let mut out = vec![(0.0, 0.0); out_len];
        let base = self.sched.entry(k)?.m.clone();
        let wp = self.prec.max(base.significant_bits() + 64) + 32;
        let scale_log = z.log_modulus(wp).mul_int(&base);
        let spin = match z.turn() {
            Some(t) => RReal::from_rational(&turn_times_int(&base, t), wp),
            None => RReal::zero(wp),
        };
        for i in 0..count {
            let ki = Integer::from(k + i);
            let b = self.block(&ki)?;
            let amp_log = scale_log.add(&b.log_amp.with_prec(wp));
            let rot = spin.add(&b.phase.with_prec(wp));
            write_block_parts(&b, &base, &amp_log, &rot, &mut out)?;
        }
        let tail = self.tail_log_norm(&Integer::from(k + count))?.with_prec(wp).add(&scale_log);
        Ok((out, tail.exp().to_f64i().hi))
    }
}

/// Write one block into a float window starting at coordinate `base`.
/// Range problems are reported even for blocks outside the window, since
/// a window norm that silently lost mass would be worse than an error.
fn write_block(b: &Block, base: &Integer, out: &mut [(f64, f64)]) -> Result<()> {
    write_block_parts(b, base, &b.log_amp, &b.phase, out)
}

/// `write_block` with the amplitude log and rotation supplied explicitly,
/// so scaled windows can rebase both without touching the block itself.
fn write_block_parts(
    b: &Block,
    base: &Integer,
    log_amp: &RReal,
    rot: &RReal,
    out: &mut [(f64, f64)],
) -> Result<()> {
    let mut max_c = Rational::new();
    for (re, im) in &b.pattern {
        let a = re.clone().abs();
        if a > max_c {
            max_c = a;
        }
        let a = im.clone().abs();
        if a > max_c {
            max_c = a;
        }
    }
    let amp_log_peak = log_amp.mid_f64() + b.pattern_scale as f64 + max_c.to_f64().ln();
    if !amp_log_peak.is_finite() || amp_log_peak.abs() > F64_LOG_RANGE {
        return Err(Error::FloatRangeExceeded { log_magnitude: amp_log_peak });
    }
    let offset = Integer::from(&b.start - base);
    if offset.cmp0() == Ordering::Less {
        return Ok(());
    }
    let Some(off) = offset.to_usize() else { return Ok(()) };
    if off >= out.len() {
        return Ok(());
    }
    let amp = (log_amp.mid_f64() + b.pattern_scale as f64).exp();
    let (sin_t, cos_t) = (std::f64::consts::TAU * rot.mid_f64()).sin_cos();
    for (i, (re, im)) in b.pattern.iter().enumerate() {
        let pos = off + i;
        if pos >= out.len() {
            break;
        }
        let x = re.to_f64() * amp;
        let y = im.to_f64() * amp;
        let cell = &mut out[pos];
        debug_assert!(cell.0 == 0.0 && cell.1 == 0.0, "blocks must tile disjointly");
        *cell = (x * cos_t - y * sin_t, x * sin_t + y * cos_t);
    }
    Ok(())
}

/// Certified bounds on `|c - 1|` for the orbit coefficient
/// `c = e^{u + 2 pi i phi}` (`phi = None` means `c` is real and
/// positive), returned as a `(floor, cap)` pair of magnitudes.  The two
/// sides coincide except when the mismatch may vanish — an exact hit, or
/// a phase enclosure too wide to place the turn — where the floor drops
/// to zero honestly instead of failing.
///
/// Three ranges keep the evaluation stable: for `u >= 1` the modulus
/// `|c|` is factored out, for `u <= -1` the mismatch is `1 - e^u` up to
/// phase, and in between `expm1` carries full relative accuracy through
/// the cancellation at `c = 1`.
fn log_abs_c_minus_one(u: &RReal, phi: Option<&RReal>) -> (LogMag, LogMag) {
    let p = u.prec();
    let one = RReal::from_i64(1, p);
    let half = Rational::from((1, 2));
    // 2 (1 - cos(2 pi phi)), the phase part of |e^{u + 2 pi i phi} - 1|^2
    let verse = phi.map(|t| {
        let tau = RReal::pi(p).mul_rational(&Rational::from(2));
        let c = t.mul(&tau).cos();
        one.sub(&c).max(&RReal::zero(p)).mul_rational(&Rational::from(2))
    });
    if *u.lo() >= 1u32 {
        // |c - 1| = |c| * |1 - 1/c| with |1/c| <= 1/e
        let em = u.neg().exp();
        let base = one.sub(&em);
        let inner = match &verse {
            None => base.ln(),
            Some(v) => base.mul(&base).add(&em.mul(v)).ln().mul_rational(&half),
        };
        let m = LogMag::from_log(u.add(&inner));
        return (m.clone(), m);
    }
    if *u.hi() <= -1i32 {
        // |c| <= 1/e keeps 1 - |c| away from cancellation
        let em = u.exp();
        let base = one.sub(&em);
        let inner = match &verse {
            None => base.ln(),
            Some(v) => base.mul(&base).add(&em.mul(v)).ln().mul_rational(&half),
        };
        let m = LogMag::from_log(inner);
        return (m.clone(), m);
    }
    // |c - 1|^2 = (e^u - 1)^2 + e^u * 2 (1 - cos(2 pi phi))
    let t = u.exp_m1();
    let mut sq = t.mul(&t);
    if let Some(v) = &verse {
        sq = sq.add(&u.exp().mul(v));
    }
    half_log_nonneg(&sq)
}

/// Magnitude bounds `sqrt` of a quantity that is a sum of squares:
/// certified zero when the enclosure tops out at zero, and a zero floor
/// with a finite cap when it merely touches zero (an interval square
/// cannot see its own sign).
fn half_log_nonneg(x: &RReal) -> (LogMag, LogMag) {
    if x.hi().cmp0() != Some(Ordering::Greater) {
        return (LogMag::Zero, LogMag::Zero);
    }
    let half = Rational::from((1, 2));
    if x.lo().cmp0() == Some(Ordering::Greater) {
        let m = LogMag::from_log(x.ln().mul_rational(&half));
        return (m.clone(), m);
    }
    let cap = RReal::point(x.hi().clone()).ln().mul_rational(&half);
    (LogMag::Zero, LogMag::from_log(cap))
}

/// Fractional part of `m * t` for a nonnegative integer `m` and an exact
/// rational turn `t` in `[0, 1)`: plain modular arithmetic, exact no
/// matter how many digits `m` has.
pub(crate) fn turn_times_int(m: &Integer, t: &Rational) -> Rational {
    debug_assert!(m.cmp0() != Ordering::Less);
    let rem = Integer::from(m * t.numer()) % t.denom();
    Rational::from((rem, t.denom().clone()))
}
