//! Closed-form schedule engine for accelerated steps over constant
//! densities.
//!
//! With density `g = C` and the accelerated deviation `d = q^2`, every
//! index of step `q` adds the same `m = q^2 + qC` to `M`, the advancing
//! cycle starts form the arithmetic progression `A_t = A_1 + (t-1)C`, and
//! the level at the `t`-th advance is a partial sum of a harmonic
//! progression — so both the row at any index and the first crossing of
//! `y > q` reduce to digamma evaluations.  Ends land near
//! `exp((q^2-2)(q^2+qC)C)`: exact indices with thousands of digits, which
//! is precisely what makes deep steps (and the small-modulus witnesses
//! that live in them) reachable.

use std::cmp::Ordering;

use rug::{Float, Integer, Rational};

use super::{Schedule, ScheduleEntry, StepEnd, StepState, LEVEL_PREC, PHASE_STEPS};
use crate::density::DensityKind;
use crate::error::{Error, Result};
use crate::num::harmonic::psi;
use crate::num::{certify_with_ladder, HarmonicProgression, RReal};

/// Exact in-step geometry of one accelerated constant-density step.
struct Geometry {
    q: u32,
    c: u32,
    /// Jump index `N + 1`.
    jump: Integer,
    /// `M` at the jump index.
    m_jump: Integer,
    /// Per-index increment `q^2 + qC`.
    per_index: Integer,
    /// First advancing cycle start, `N + max(C, 2)`.
    a1: Integer,
    /// `M` at that index.
    m_a1: Integer,
    /// Per-advance increment of `M`, `C (q^2 + qC)`.
    stride: Integer,
    /// The step ends once the advance sum exceeds `G = q^2 - 2`.
    gap: Integer,
}

impl Geometry {
    fn of(st: &StepState, c: u32) -> Geometry {
        let q = st.q;
        debug_assert_eq!(st.d, Integer::from(q).square(), "closed form needs d = q^2");
        let per_index = Integer::from(&st.d + Integer::from(q) * c);
        let jump = st.jump_index();
        let a1 = Integer::from(&st.n_prev + c.max(2));
        let m_a1 = Integer::from(&a1 - &jump) * &per_index + &st.m_jump;
        let stride = Integer::from(&per_index * c);
        let gap = Integer::from(q).square() - 2u32;
        Geometry { q, c, jump, m_jump: st.m_jump.clone(), per_index, a1, m_a1, stride, gap }
    }

    /// `M_k`, affine across the whole step.
    fn m_at(&self, k: &Integer) -> Integer {
        Integer::from(k - &self.jump) * &self.per_index + &self.m_jump
    }

    /// Number of advancing cycle starts at or before `k`.
    fn advances_by(&self, k: &Integer) -> Integer {
        if *k < self.a1 {
            return Integer::new();
        }
        Integer::from(k - &self.a1) / self.c + 1u32
    }

    /// Denominator progression of the real-mode advance increments.
    fn real_terms(&self) -> HarmonicProgression {
        HarmonicProgression::new(Rational::from(&self.m_a1), Rational::from(&self.stride))
    }

    /// Denominator progression of the level advances in grid-phase mode:
    /// one per completed sweep of `PHASE_STEPS` bumps.
    fn complex_terms(&self) -> HarmonicProgression {
        let first = Integer::from(&self.stride * (PHASE_STEPS - 1)) + &self.m_a1;
        let stride = Integer::from(&self.stride * PHASE_STEPS);
        HarmonicProgression::new(Rational::from(first), Rational::from(stride))
    }

    /// `y = 2/q + sum/q`.
    fn level(&self, sum: &RReal) -> RReal {
        let base = Rational::from((2u32, self.q));
        let inv_q = Rational::from((1u32, self.q));
        RReal::from_rational(&base, sum.prec()).add(&sum.mul_rational(&inv_q))
    }
}

fn constant(sched: &Schedule) -> Result<u32> {
    match sched.cycles.g.kind {
        DensityKind::Const(c) => Ok(c),
        _ => Err(Error::InvalidInput(
            "closed-form engine needs a constant density".into(),
        )),
    }
}

/// Index of the step containing `k`, resolving ends (and opening new steps)
/// along the way.  Closed-form ends are always exact, so containment is
/// always decidable.
fn locate(sched: &mut Schedule, k: &Integer) -> Result<usize> {
    let mut i = 0;
    loop {
        if i == sched.steps.len() {
            let (q, idx, m) = {
                let last = sched.steps.last().expect("seeded");
                match last.end.as_ref() {
                    Some(StepEnd::Exact { index, m_end, .. }) => {
                        (last.q, index.clone(), m_end.clone())
                    }
                    _ => unreachable!("closed-form step ends are exact"),
                }
            };
            let st = sched.make_step(q + 1, idx, m);
            sched.steps.push(st);
        }
        if sched.steps[i].end.is_none() {
            let end = resolve_end(sched, i)?;
            sched.steps[i].end = Some(end);
        }
        if let Some(StepEnd::Exact { index, .. }) = sched.steps[i].end.as_ref() {
            if k <= index {
                return Ok(i);
            }
        }
        i += 1;
    }
}

/// The schedule row at `k` (any index past the seed).
pub(super) fn entry(sched: &mut Schedule, k: &Integer) -> Result<ScheduleEntry> {
    let i = locate(sched, k)?;
    let c = constant(sched)?;
    let geo = Geometry::of(&sched.steps[i], c);
    let m = geo.m_at(k);
    let prec = LEVEL_PREC.max(m.significant_bits() + 64);
    let t = geo.advances_by(k);
    let (y, theta) = if sched.mode.is_complex() {
        let (sweeps, rem) = t.div_rem(Integer::from(PHASE_STEPS));
        let y = geo.level(&geo.complex_terms().sum(&sweeps, prec));
        let rem = rem.to_u32().expect("remainder below the grid size");
        let theta = RReal::from_rational(&Rational::from((rem, PHASE_STEPS)), LEVEL_PREC);
        (y, Some(theta))
    } else {
        (geo.level(&geo.real_terms().sum(&t, prec)), None)
    };
    let q = geo.q;
    sched.finish_entry(k.clone(), m, y, theta, q)
}

/// Exact end of step `i`: the first advancing cycle start whose level
/// exceeds `q`.
pub(super) fn resolve_end(sched: &mut Schedule, i: usize) -> Result<StepEnd> {
    let c = constant(sched)?;
    let geo = Geometry::of(&sched.steps[i], c);
    let complex = sched.mode.is_complex();
    let terms = if complex { geo.complex_terms() } else { geo.real_terms() };
    // y > q  <=>  sum of advance increments > q - 2/q  <=>  the harmonic
    // partial sum exceeds G = q^2 - 2, i.e. psi(a + t) - psi(a) > stride*G.
    let a = Rational::from(&terms.first / &terms.stride);
    let stride_int = terms.stride.numer().clone();
    let target = Integer::from(&stride_int * &geo.gap);
    let t = solve_exceed(&a, &target)?;
    let last_bump = if complex {
        Integer::from(&t * PHASE_STEPS)
    } else {
        t.clone()
    };
    let index = Integer::from(&last_bump - 1u32) * geo.c + &geo.a1;
    let m_end = Integer::from(&last_bump - 1u32) * &geo.stride + &geo.m_a1;
    // Re-express the certified crossing as a level enclosure callers can
    // hand to the next step or compare against the sandwich q < y < 2q.
    let mut prec = LEVEL_PREC.max(m_end.significant_bits() + 64);
    loop {
        let y_end = geo.level(&terms.sum(&t, prec));
        if *y_end.lo() > geo.q {
            return Ok(StepEnd::Exact { index, m_end, y_end, advances: t });
        }
        if prec > (1 << 23) {
            return Err(Error::PrecisionUndecidable {
                bits: prec,
                what: "step-end level".into(),
            });
        }
        prec *= 2;
    }
}

/// Smallest integer `t >= 1` with `psi(a + t) - psi(a) > target`.
///
/// `psi` grows like `ln`, so the root sits near `a e^target`; the seed
/// `x_0 = exp(psi(a) + target)` already has relative error `~1/(2 x_0)`
/// and multiplicative Newton corrections `x <- x exp(R - psi(x))` square
/// it, pinning the crossing far below integer spacing.  Both neighbours
/// are then certified by enclosure.  (If the exact partial sum ever
/// *equalled* the integer threshold, the strict comparison would be
/// undecidable at any precision and the ladder reports that instead of
/// guessing.)
fn solve_exceed(a: &Rational, target: &Integer) -> Result<Integer> {
    debug_assert!(target.cmp0() == Ordering::Greater);
    let ln_a = (a.numer().significant_bits() as f64 - a.denom().significant_bits() as f64)
        * std::f64::consts::LN_2;
    let est_bits = (ln_a.max(0.0) + target.to_f64()) / std::f64::consts::LN_2 + 48.0;
    if est_bits > (1u32 << 23) as f64 {
        return Err(Error::BudgetExceeded {
            budget: 1 << 23,
            detail: format!(
                "level crossing near e^{target} needs ~{est_bits:.0}-bit integers"
            ),
        });
    }
    let start = est_bits as u32 + 96;
    certify_with_ladder(start, 1 << 24, "step-end level crossing", |prec| {
        attempt(a, target, prec)
    })
}

fn midpoint(x: &RReal) -> Option<Rational> {
    let p = x.prec();
    let mid = Float::with_val(p, x.lo() + x.hi()) / 2u32;
    if mid.cmp0() != Some(Ordering::Greater) {
        return None;
    }
    mid.to_rational()
}

fn attempt(a: &Rational, target: &Integer, prec: u32) -> Option<Integer> {
    let pa = psi(a, prec);
    let r = pa.add(&RReal::from_integer(target, prec));
    let mut x = r.exp();
    for _ in 0..3 {
        let mid = midpoint(&x)?;
        let corr = r.sub(&psi(&mid, prec)).exp();
        x = RReal::from_rational(&mid, prec).mul(&corr);
    }
    let t_real = x.sub(&RReal::from_rational(a, prec));
    let mut t = t_real.floor_certified().ok()? + 1u32;
    if t.cmp0() != Ordering::Greater {
        t = Integer::from(1);
    }
    let diff = |t: &Integer| -> RReal {
        let arg = Rational::from(a + t);
        psi(&arg, prec).sub(&pa)
    };
    // The Newton landing is occasionally off by one; walk, certifying both
    // sides of the crossing.
    for _ in 0..6 {
        let above = diff(&t);
        if *above.lo() > *target {
            let prev = Integer::from(&t - 1u32);
            if prev.cmp0() != Ordering::Greater {
                return Some(t); // an empty sum never exceeds a positive target
            }
            let below = diff(&prev);
            if *below.hi() <= *target {
                return Some(t);
            }
            if *below.lo() > *target {
                t = prev; // overshot: the crossing is earlier
                continue;
            }
            return None; // the neighbour straddles: escalate precision
        }
        if *above.hi() <= *target {
            t += 1u32; // not crossed yet
            continue;
        }
        return None; // the candidate itself straddles
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::Mode;
    use super::*;
    use crate::density::DensityFunction;

    fn accel(c: u32, complex: bool) -> Schedule {
        let mode = if complex {
            Mode::AcceleratedComplex
        } else {
            Mode::AcceleratedReal
        };
        Schedule::new(mode, DensityFunction::new(DensityKind::Const(c)).unwrap()).unwrap()
    }

    fn dec(s: &str) -> Rational {
        let (int, frac) = s.split_once('.').unwrap();
        let digits = format!("{int}{frac}");
        let num = Integer::from_str_radix(&digits, 10).unwrap();
        let den = Integer::from(10).pow(frac.len() as u32);
        Rational::from((num, den))
    }

    fn assert_matches(v: &RReal, literal: &str) {
        let frac_digits = literal.split_once('.').unwrap().1.len() as i32;
        let reference = dec(literal);
        let mid = Float::with_val(256, v.lo() + v.hi()) / 2u32;
        let diff = (mid - Float::with_val(256, &reference)).abs();
        let tol = 2u32 * Float::with_val(256, Float::parse(format!("1e-{frac_digits}")).unwrap());
        assert!(diff < tol, "enclosure mid differs from {literal} by {diff}");
    }

    use rug::ops::Pow;

    fn exact_end(end: StepEnd) -> (Integer, Integer, RReal, Integer) {
        match end {
            StepEnd::Exact { index, m_end, y_end, advances } => (index, m_end, y_end, advances),
            other => panic!("expected an exact end, got {other:?}"),
        }
    }

    #[test]
    fn unit_density_first_step_frozen() {
        // Step 2 over g = 1: per-index increment 6, advances at 22, 23, ...
        // with M = 14, 20, 26, ...; the level crosses 2 after exactly
        // 301933 advances, at index 301954 with M = 1811606.  Frozen from
        // an independent digamma solve:
        // y_end = 2.000000022452430523839226717838608195769.
        let mut s = accel(1, false);
        let (index, m_end, y_end, advances) = exact_end(s.step_end(2, 1).unwrap());
        assert_eq!(index, 301_954);
        assert_eq!(m_end, 1_811_606);
        assert_eq!(advances, 301_933);
        assert!(*y_end.lo() > 2u32);
        assert_matches(&y_end, "2.000000022452430523839226717838608195769");
    }

    #[test]
    fn unit_density_second_step_frozen() {
        // Step 3 ends after t = 4110189951869387519919655257383545819579697
        // advances (frozen from an independent digamma solve); the index and
        // M follow affinely.
        let mut s = accel(1, false);
        let (index, m_end, y_end, advances) = exact_end(s.step_end(3, 1).unwrap());
        let t = Integer::from_str_radix("4110189951869387519919655257383545819579697", 10)
            .unwrap();
        assert_eq!(advances, t);
        assert_eq!(
            index,
            Integer::from_str_radix("4110189951869387519919655257383545819881652", 10).unwrap()
        );
        assert_eq!(
            m_end,
            Integer::from_str_radix("49322279422432650239035863088602549851260827", 10).unwrap()
        );
        assert!(*y_end.lo() > 3u32);
        assert!(*y_end.hi() < 4u32);
    }

    #[test]
    fn deep_chain_stays_sandwiched() {
        // Steps 2..6 chained: every end level must satisfy q < y <= q + ulp
        // (we check the spec'd sandwich q < y < 2q), and the end indices
        // grow like exp((q^2-2)(q^2+q)) — 43, 166, 467 and 1088 digits.
        // Digit counts and low 64 bits frozen from an independent solve.
        let mut s = accel(1, false);
        let frozen: [(u32, usize, u64, &str); 4] = [
            (3, 43, 9364102831434096820, "4110189951869387"),
            (4, 166, 9238631009080478677, "1579748890976024"),
            (5, 467, 4494489788204099269, "1212353643556171"),
            (6, 1088, 10529937124224688521, "4637927387565789"),
        ];
        for q in 2..=6u32 {
            let (index, _, y_end, _) = exact_end(s.step_end(q, 1).unwrap());
            assert!(*y_end.lo() > q);
            assert!(*y_end.hi() < 2 * q);
            if let Some(&(fq, digits, low, head)) = frozen.iter().find(|f| f.0 == q) {
                assert_eq!(fq, q);
                let text = index.to_string();
                assert_eq!(text.len(), digits, "index digit count for step {q}");
                assert!(text.starts_with(head), "index head digits for step {q}");
                let low_bits = index.keep_bits(64);
                assert_eq!(low_bits.to_u64().unwrap(), low, "index low bits for step {q}");
            }
        }
    }

    #[test]
    fn const4_rows_and_end_frozen() {
        // g = 4: jump at 21 with M = 8, per-index increment 12, advances
        // every 4 indices starting at 24.  Levels are exact rationals early
        // on; the end is frozen from an independent solve.
        let mut s = accel(4, false);
        for k in 21..=49u64 {
            let e = s.entry_at(k).unwrap();
            assert_eq!(e.m, 8 + 12 * (k - 21));
            assert_eq!(e.j, (k % 4) + 1);
            assert_eq!(e.q, 2);
        }
        let y24 = Rational::from(1) + Rational::from((1u32, 88u32));
        assert!(s.entry_at(24).unwrap().y.contains_rational(&y24));
        assert!(s.entry_at(27).unwrap().y.contains_rational(&y24));
        // seven advances by 49: M = 44, 92, ..., 332
        let mut y49 = Rational::from(1);
        for i in 0..7u32 {
            y49 += Rational::from((1u32, 2 * (44 + 48 * i)));
        }
        assert!(s.entry_at(49).unwrap().y.contains_rational(&y49));
        // log r = alpha_j - M y: at 21 the slot-2 target is a unit basis
        // vector, so log r_21 = -8 exactly; at 22 the slot-3 target has
        // norm sqrt(2), giving ln(2)/2 - 20; at 49 (slot 2 again) the value
        // is the exact rational -344 y_49.
        let e21 = s.entry_at(21).unwrap();
        assert!(e21.log_r.contains_rational(&Rational::from(-8)));
        assert_matches(
            &s.entry_at(22).unwrap().log_r,
            "-19.653426409720027345291383939271",
        );
        let lr49 = Rational::from(-344) * &y49;
        assert!(s.entry_at(49).unwrap().log_r.contains_rational(&lr49));

        let (index, m_end, y_end, advances) = exact_end(s.step_end(2, 1).unwrap());
        assert_eq!(
            advances,
            Integer::from_str_radix("238855661970768005306001955097744608645183", 10).unwrap()
        );
        assert_eq!(
            index,
            Integer::from_str_radix("955422647883072021224007820390978434580752", 10).unwrap()
        );
        assert_eq!(
            m_end,
            Integer::from_str_radix("11465071774596864254688093844691741214968780", 10).unwrap()
        );
        assert!(*y_end.lo() > 2u32);
    }

    #[test]
    fn grid_phase_step_end_frozen() {
        // Complex grid phases: the level only moves once per 64 bumps, so
        // the crossing runs over a 64-fold sparser progression —
        // u = 2005123...231303 sweeps (334 digits), frozen from an
        // independent solve, with the end index 21 + 64u.
        let mut s = accel(1, true);
        let (index, m_end, y_end, advances) = exact_end(s.step_end(2, 1).unwrap());
        let u = Integer::from_str_radix(
            "2005123584329140763707907332488118437350168507160787083970745440146763395719\
             6924658423017969870142119284821386802415985661152990989616252810703919383082\
             8876723771382081054761661646467690974660856162089696130807820997878304376162\
             0182214618513093627628993625711236477429032309708303698905968921067578459636\
             027119853723788755645982231303",
            10,
        )
        .unwrap();
        assert_eq!(advances, u);
        assert_eq!(index, Integer::from(64u32) * &u + 21u32);
        assert_eq!(m_end, Integer::from(384u32) * &u + 8u32);
        assert!(*y_end.lo() > 2u32);
        assert!(*y_end.hi() < 3u32);
    }

    #[test]
    fn grid_phase_rows() {
        // Within a sweep theta walks the grid while y holds; the sweep
        // completion at the 64th bump (index 85) lifts y by 1/784.
        let mut s = accel(1, true);
        let e22 = s.entry_at(22).unwrap();
        assert!(e22.theta.as_ref().unwrap().contains_rational(&Rational::from((1, 64))));
        assert!(e22.y.contains_rational(&Rational::from(1)));
        let e84 = s.entry_at(84).unwrap();
        assert!(e84.theta.as_ref().unwrap().contains_rational(&Rational::from((63, 64))));
        let e85 = s.entry_at(85).unwrap();
        assert!(e85.theta.as_ref().unwrap().contains_rational(&Rational::from(0)));
        let y85 = Rational::from(1) + Rational::from((1, 784));
        assert!(e85.y.contains_rational(&y85));
    }

    #[test]
    fn jump_rows_between_steps() {
        // The row after a step end is the next jump: M = q^2 (M_prev + 1),
        // level 2/q, and the step parameter increments.
        let mut s = accel(1, false);
        let (index, m_end, ..) = exact_end(s.step_end(2, 1).unwrap());
        let jump = s.entry(&Integer::from(&index + 1u32)).unwrap();
        assert_eq!(jump.m, Integer::from(9u32) * (m_end + 1u32));
        assert_eq!(jump.q, 3);
        assert!(jump.y.contains_rational(&Rational::from((2, 3))));
        assert_eq!(jump.m, 16_304_463);
    }

    #[test]
    fn crossing_solver_small_cases() {
        // H_t > 2 first at t = 4 (H_4 = 25/12); and the step-2 solve seen
        // through the raw solver.
        let t = solve_exceed(&Rational::from(1), &Integer::from(2)).unwrap();
        assert_eq!(t, 4);
        let t2 = solve_exceed(&Rational::from((7, 3)), &Integer::from(12)).unwrap();
        assert_eq!(t2, 301_933);
    }
}
