//! Lazy schedule construction: exact block positions `M_k`, certified level
//! sequence `y_k` (plus phases `theta_k` in complex modes), and
//! step-termination analysis.
//!
//! A step with parameter `q >= 2` opens with the jump
//! `M_{N+1} = q^2 (M_N + 1)`, `y_{N+1} = 2/q`, where `N` is the last index
//! of the previous step.  Inside the step, `M` grows by
//! `d + q * floor(g(k))` per index, and `y` climbs by `1/(q M)` at every
//! cycle start strictly after the jump, until the first cycle start whose
//! level exceeds `q`.  The derived quantities are
//! `x_k = y_k - alpha_{j(k)} / M_k` (where `alpha_l` is the log-norm of the
//! `l`-th target) and `log r_k = -M_k x_k`.
//!
//! Two deliberate regimes coexist:
//!
//! * **faithful** modes run the literal recurrence with
//!   `d = M_{N+1} - M_N`.  That deviation is enormous, so step ends sit
//!   astronomically far out; beyond the scan budget they are reported as
//!   certified two-sided brackets, never as numbers pretending to be exact.
//! * **accelerated** modes deviate to `d = q^2` — the smallest deviation the
//!   growth law `d >= q^2` permits — so that with a constant density every
//!   step end has a closed form through the digamma function and the
//!   schedule stays materializable for arbitrarily many steps.
//!
//! Complex modes additionally carry a phase: before `y` may advance, the
//! phase component sweeps `[0, 1)` and resets.  The literal sweep increment
//! `1/(q M)` makes the level series geometrically convergent — the step
//! provably never ends — which faithful-complex mode diagnoses with a
//! [`StallCertificate`].  Accelerated-complex mode instead advances the
//! phase on the fixed grid `i / PHASE_STEPS`, which keeps the level series
//! divergent while still covering every phase at resolution
//! `1 / PHASE_STEPS`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};

use crate::density::{CycleMap, DensityFunction, DensityKind};
use crate::error::{Error, Result, StallCertificate};
use crate::num::RReal;
use crate::targets::{self, TargetVector};

mod accel;
mod scan;

/// Working precision (bits) for the level/phase accumulators.  Streaming
/// sums add one rounding of `2^-LEVEL_PREC` relative per term, so even
/// billion-term scans keep far more accuracy than any comparison needs.
pub(crate) const LEVEL_PREC: u32 = 192;

/// Phase-grid resolution of accelerated-complex mode: phases advance by
/// `1/PHASE_STEPS` at cycle starts and the level advances once per
/// completed sweep.
pub const PHASE_STEPS: u32 = 64;

/// Default per-step scan budget, counted in cycle starts.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Which recurrence family and phase handling drive the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Literal recurrence, real multiples only.
    FaithfulReal,
    /// Literal recurrence with literal phase sweeps (provably stalls;
    /// kept as a diagnosable mode, not a usable construction).
    FaithfulComplex,
    /// `d = q^2` deviation, real multiples.
    AcceleratedReal,
    /// `d = q^2` deviation plus fixed-grid phase sweeps.
    AcceleratedComplex,
}

impl Mode {
    pub fn is_complex(self) -> bool {
        matches!(self, Mode::FaithfulComplex | Mode::AcceleratedComplex)
    }

    pub fn is_accelerated(self) -> bool {
        matches!(self, Mode::AcceleratedReal | Mode::AcceleratedComplex)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::FaithfulReal => "faithful-real",
            Mode::FaithfulComplex => "faithful-complex",
            Mode::AcceleratedReal => "accelerated-real",
            Mode::AcceleratedComplex => "accelerated-complex",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" | "faithful-real" => Ok(Mode::FaithfulReal),
            "complex" | "faithful-complex" => Ok(Mode::FaithfulComplex),
            "accelerated" | "accelerated-real" => Ok(Mode::AcceleratedReal),
            "accelerated-complex" => Ok(Mode::AcceleratedComplex),
            other => Err(Error::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

/// One fully resolved schedule row.
#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    /// Index (arbitrary size: accelerated step ends grow like `exp(q^4)`).
    pub k: Integer,
    /// Exact block position `M_k`.
    pub m: Integer,
    /// Certified level `y_k`.
    pub y: RReal,
    /// Phase `theta_k` in `[0, 1)`; complex modes only.
    pub theta: Option<RReal>,
    /// `x_k = y_k - alpha_{j(k)} / M_k`.
    pub x: RReal,
    /// `log r_k = -M_k x_k`.
    pub log_r: RReal,
    /// Target slot `j(k)`.
    pub j: u64,
    /// Step the entry belongs to (the seed row reports 1).
    pub q: u32,
}

/// Resolution of one step's termination search.
#[derive(Clone, Debug)]
pub enum StepEnd {
    /// First advancing cycle start whose level exceeds `q`.
    Exact {
        index: Integer,
        m_end: Integer,
        y_end: RReal,
        /// Number of level advances it took.
        advances: Integer,
    },
    /// Certified two-sided bracket: the end lies in `(lo, hi]`.
    Bracket {
        lo: Integer,
        hi: Integer,
        /// Level reached when the scan budget ran out.
        y_at_budget: RReal,
        /// Cycle starts scanned before switching to bounds.
        scanned: u64,
        /// Index the scan reached.
        scan_reached: Integer,
    },
    /// The step provably cannot terminate (literal complex sweeps).
    Stalled(StallCertificate),
}

impl StepEnd {
    /// Exact end index, if this end is exact.
    pub fn exact_index(&self) -> Option<&Integer> {
        match self {
            StepEnd::Exact { index, .. } => Some(index),
            _ => None,
        }
    }
}

/// One step of the inductive construction.
#[derive(Clone, Debug)]
pub struct StepState {
    /// Step parameter `q >= 2`.
    pub q: u32,
    /// Last index `N` of the previous step (`j(N) = 1`).
    pub n_prev: Integer,
    /// `M_N`.
    pub m_prev: Integer,
    /// `M_{N+1} = q^2 (M_N + 1)`.
    pub m_jump: Integer,
    /// In-step deviation added to every per-index increment.  Faithful
    /// modes use the literal `M_{N+1} - M_N`; accelerated modes deviate to
    /// `q^2` (both satisfy the growth law `d >= q^2`).
    pub d: Integer,
    /// Step termination, once resolved.
    pub end: Option<StepEnd>,
}

impl StepState {
    /// First index of this step (the jump index `N + 1`).
    pub fn jump_index(&self) -> Integer {
        Integer::from(&self.n_prev + 1u32)
    }

    /// Whether `k` provably belongs to this step.
    fn contains(&self, k: &Integer) -> bool {
        if *k <= self.n_prev {
            return false;
        }
        match &self.end {
            Some(StepEnd::Exact { index, .. }) => k <= index,
            // Unresolved, bracketed or stalled steps own the whole tail as
            // far as anyone can reach.
            _ => true,
        }
    }
}

/// A lazily built schedule for one `(mode, density)` configuration.
pub struct Schedule {
    mode: Mode,
    cycles: CycleMap,
    steps: Vec<StepState>,
    budget: u64,
    scan: Option<scan::Scan>,
    target_cache: HashMap<u64, TargetVector>,
}

impl Schedule {
    pub fn new(mode: Mode, density: DensityFunction) -> Result<Self> {
        let cycles = CycleMap::new(density)?;
        let mut sched = Schedule {
            mode,
            cycles,
            steps: Vec::new(),
            budget: DEFAULT_BUDGET,
            scan: None,
            target_cache: HashMap::new(),
        };
        let first = sched.make_step(2, Integer::from(sched.cycles.k_start), Integer::from(1));
        sched.steps.push(first);
        Ok(sched)
    }

    /// Replace the per-step scan budget (cycle starts).
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn density(&self) -> &DensityFunction {
        &self.cycles.g
    }

    pub fn cycles(&self) -> &CycleMap {
        &self.cycles
    }

    /// First scheduled index.
    pub fn k_start(&self) -> u64 {
        self.cycles.k_start
    }

    /// Per-step scan budget (cycle starts).
    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Whether the closed-form engine drives this schedule.
    fn closed_form(&self) -> bool {
        self.mode.is_accelerated() && matches!(self.cycles.g.kind, DensityKind::Const(_))
    }

    fn make_step(&self, q: u32, n_prev: Integer, m_prev: Integer) -> StepState {
        let m_jump = Integer::from(&m_prev + 1u32) * Integer::from(q).square();
        let d = if self.mode.is_accelerated() {
            Integer::from(q).square()
        } else {
            Integer::from(&m_jump - &m_prev)
        };
        StepState { q, n_prev, m_prev, m_jump, d, end: None }
    }

    /// Target slot of an index.
    pub fn slot(&self, k: &Integer) -> Result<u64> {
        let j = self.cycles.j_big(k)?;
        j.to_u64()
            .ok_or_else(|| Error::InvalidInput("slot number exceeds u64".into()))
    }

    /// `alpha_l = ln ||v_l||`, the log-norm of the `l`-th target.
    pub fn alpha(&mut self, l: u64, prec: u32) -> Result<RReal> {
        if !self.target_cache.contains_key(&l) {
            let v = targets::enumerate(&Integer::from(l))?;
            self.target_cache.insert(l, v);
        }
        Ok(self.target_cache[&l].log_norm(prec))
    }

    /// The seed row: the anchor `M = 1, y = 1` at the first scheduled index.
    pub fn seed_entry(&mut self) -> Result<ScheduleEntry> {
        let k = Integer::from(self.cycles.k_start);
        let one = RReal::from_i64(1, LEVEL_PREC);
        let theta = self.mode.is_complex().then(|| RReal::zero(LEVEL_PREC));
        self.finish_entry(k, Integer::from(1), one, theta, 1)
    }

    /// Assemble a full row from its primitive fields.
    fn finish_entry(
        &mut self,
        k: Integer,
        m: Integer,
        y: RReal,
        theta: Option<RReal>,
        q: u32,
    ) -> Result<ScheduleEntry> {
        let j = self.slot(&k)?;
        let prec = y.prec();
        let alpha = self.alpha(j, prec)?;
        let recip_m = Rational::from((Integer::from(1), m.clone()));
        let x = y.sub(&alpha.mul_rational(&recip_m));
        // log r = alpha_j - M y  (same as -M x, without the division error)
        let log_r = alpha.sub(&y.mul_int(&m));
        Ok(ScheduleEntry { k, m, y, theta, x, log_r, j, q })
    }

    /// The jump row opening step `q`: `M = q^2 (M_prev + 1)`, `y = 2/q`.
    pub fn step_jump(&mut self, prev: &ScheduleEntry, q: u32) -> Result<ScheduleEntry> {
        if q < 2 {
            return Err(Error::InvalidInput("step parameter must be >= 2".into()));
        }
        if prev.j != 1 {
            return Err(Error::InvalidInput(
                "a step may only open after a slot-1 row".into(),
            ));
        }
        let k = Integer::from(&prev.k + 1u32);
        let m = Integer::from(&prev.m + 1u32) * Integer::from(q).square();
        let y = RReal::from_rational(&Rational::from((2u32, q)), LEVEL_PREC);
        let theta = self.mode.is_complex().then(|| RReal::zero(LEVEL_PREC));
        self.finish_entry(k, m, y, theta, q)
    }

    /// The row after `entry` inside step `st`: `M` grows by
    /// `d + q*floor(g(k))`; at advancing cycle starts the level (or phase)
    /// moves per the mode's rules.
    pub fn step_advance(&mut self, st: &StepState, entry: &ScheduleEntry) -> Result<ScheduleEntry> {
        let k_next = Integer::from(&entry.k + 1u32);
        let growth = self.cycles.g.floor_at_big(&entry.k, 1 << 20)?;
        let m_next = Integer::from(&entry.m + &st.d) + growth * st.q;
        let advancing = k_next > st.jump_index() && self.slot(&k_next)? == 1;
        let inc = Rational::from((Integer::from(1), Integer::from(&m_next * st.q)));
        let (y, theta) = if !advancing {
            (entry.y.clone(), entry.theta.clone())
        } else if let Some(th) = &entry.theta {
            // Complex: the phase must complete a sweep before the level moves.
            let phase_inc = if self.mode.is_accelerated() {
                Rational::from((1u32, PHASE_STEPS))
            } else {
                inc.clone()
            };
            let bumped = th.add(&RReal::from_rational(&phase_inc, th.prec()));
            if *bumped.lo() >= 1u32 {
                // Sweep certified complete: level advances, phase resets.
                // (An undecided comparison extends the sweep instead, the
                // conservative direction; enclosures here are ~2^-180 wide.)
                let y = entry.y.add(&RReal::from_rational(&inc, entry.y.prec()));
                (y, Some(RReal::zero(th.prec())))
            } else {
                (entry.y.clone(), Some(bumped))
            }
        } else {
            let y = entry.y.add(&RReal::from_rational(&inc, entry.y.prec()));
            (y, None)
        };
        self.finish_entry(k_next, m_next, y, theta, st.q)
    }

    /// The schedule row at index `k`, by whichever engine serves this mode.
    pub fn entry(&mut self, k: &Integer) -> Result<ScheduleEntry> {
        let ks = Integer::from(self.cycles.k_start);
        if *k < ks {
            return Err(Error::OutOfReach {
                index: k.clone(),
                reason: "before the schedule start".into(),
            });
        }
        if *k == ks {
            return self.seed_entry();
        }
        if self.closed_form() {
            accel::entry(self, k)
        } else {
            scan::entry(self, k)
        }
    }

    /// Convenience for indices that fit machine words.
    pub fn entry_at(&mut self, k: u64) -> Result<ScheduleEntry> {
        self.entry(&Integer::from(k))
    }

    /// Resolve the end of step `q` (driving every earlier step to an exact
    /// end first), searching at most `budget` cycle starts before falling
    /// back to certified brackets or stall analysis.
    pub fn step_end(&mut self, q: u32, budget: u64) -> Result<StepEnd> {
        if q < 2 {
            return Err(Error::InvalidInput("step parameter must be >= 2".into()));
        }
        loop {
            let idx = self.steps.iter().position(|s| s.q == q);
            if let Some(i) = idx {
                if let Some(end) = &self.steps[i].end {
                    return Ok(end.clone());
                }
                let end = if self.closed_form() {
                    accel::resolve_end(self, i)?
                } else {
                    scan::resolve_end(self, i, budget)?
                };
                self.steps[i].end = Some(end.clone());
                return Ok(end);
            }
            // Extend the table: the previous step must end exactly.
            let last_q = self.steps.last().expect("seeded").q;
            let prev_end = self.step_end(last_q, budget)?;
            match prev_end {
                StepEnd::Exact { index, m_end, .. } => {
                    // The scan may already have opened the next step while
                    // crossing the boundary; don't open it twice.
                    if self.steps.iter().all(|s| s.q != last_q + 1) {
                        let st = self.make_step(last_q + 1, index, m_end);
                        self.steps.push(st);
                    }
                }
                StepEnd::Bracket { lo, hi, .. } => {
                    return Err(Error::BudgetExceeded {
                        budget,
                        detail: format!(
                            "step {last_q} ends inside ({lo}, {hi}]; later steps are out of reach"
                        ),
                    });
                }
                StepEnd::Stalled(cert) => {
                    return Err(Error::Stalled(Box::new(cert)));
                }
            }
        }
    }

    /// The state of step `q`, resolving its end with the default budget.
    pub fn step(&mut self, q: u32) -> Result<StepState> {
        let budget = self.budget;
        self.step_end(q, budget)?;
        Ok(self
            .steps
            .iter()
            .find(|s| s.q == q)
            .expect("resolved above")
            .clone())
    }

    /// The resolved step containing index `k`, if any.
    pub(crate) fn step_of(&self, k: &Integer) -> Option<&StepState> {
        self.steps.iter().find(|s| s.contains(k))
    }

    /// Cycle starts of step `st` strictly after the jump (the ones where
    /// levels or phases may move), beginning with the first.
    pub fn cycle_starts(&self, st: &StepState, count: u64) -> Result<Vec<Integer>> {
        let mut out = Vec::new();
        let mut k = st.jump_index();
        while out.len() < count as usize {
            let next = if let Some(small) = k.to_u64() {
                Integer::from(self.cycles.next_cycle_start(small)?)
            } else {
                let n = self.cycles.cycle_index_big(&k)?;
                self.cycles.breakpoint_big(&Integer::from(n + 1u32))?
            };
            out.push(next.clone());
            k = next;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityKind;

    fn sched(mode: Mode, kind: DensityKind) -> Schedule {
        Schedule::new(mode, DensityFunction::new(kind).unwrap()).unwrap()
    }

    #[test]
    fn mode_names_round_trip() {
        let all = [
            Mode::FaithfulReal,
            Mode::FaithfulComplex,
            Mode::AcceleratedReal,
            Mode::AcceleratedComplex,
        ];
        for m in all {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("faithful".parse::<Mode>().unwrap(), Mode::FaithfulReal);
        assert_eq!("complex".parse::<Mode>().unwrap(), Mode::FaithfulComplex);
        assert_eq!("accelerated".parse::<Mode>().unwrap(), Mode::AcceleratedReal);
        assert!("turbo".parse::<Mode>().is_err());
        assert!(Mode::AcceleratedComplex.is_complex());
        assert!(Mode::AcceleratedComplex.is_accelerated());
        assert!(!Mode::FaithfulReal.is_complex());
    }

    #[test]
    fn jump_rule_examples() {
        // q^2 (M + 1) with the level reset to 2/q: from M = 1 a step-2 jump
        // reaches 8 at level 1; from M = 8 a step-3 jump reaches 81 at 2/3;
        // the raw formula sends M = 0 to 25 under q = 5.
        let mut s = sched(Mode::FaithfulReal, DensityKind::Const(1));
        let seed = s.seed_entry().unwrap();
        assert_eq!(seed.m, 1);
        let j2 = s.step_jump(&seed, 2).unwrap();
        assert_eq!(j2.m, 8);
        assert!(j2.y.contains_rational(&Rational::from(1)));

        let prev = s
            .finish_entry(
                Integer::from(100),
                Integer::from(8),
                RReal::from_i64(2, LEVEL_PREC),
                None,
                2,
            )
            .unwrap();
        let j3 = s.step_jump(&prev, 3).unwrap();
        assert_eq!(j3.m, 81);
        assert!(j3.y.contains_rational(&Rational::from((2, 3))));

        let st = s.make_step(5, Integer::from(37), Integer::from(0));
        assert_eq!(st.m_jump, 25);
        assert!(s.step_jump(&prev, 1).is_err());
    }

    #[test]
    fn faithful_prefix_anchors() {
        // Frozen prefix under the slow density: M_20..23 = 1, 8, 17, 26.
        // The first cycle start past the jump is 23, so the level first
        // moves there: y_23 = 1 + 1/52.  At the seed and jump rows the
        // target is the first basis vector (unit norm), so
        // log r_20 = -1 and log r_21 = -8 exactly.
        let mut s = sched(Mode::FaithfulReal, DensityKind::LnLn);
        let st = s.steps[0].clone();
        let seed = s.seed_entry().unwrap();
        let jump = s.step_jump(&seed, 2).unwrap();
        let mut rows = vec![seed, jump];
        for _ in 0..30 {
            let next = s.step_advance(&st, rows.last().unwrap()).unwrap();
            rows.push(next);
        }
        let m: Vec<u64> = rows.iter().take(4).map(|e| e.m.to_u64().unwrap()).collect();
        assert_eq!(m, [1, 8, 17, 26]);
        assert!(rows[2].y.contains_rational(&Rational::from(1)));
        let y23 = Rational::from(1) + Rational::from((1, 52));
        assert!(rows[3].y.contains_rational(&y23));
        assert!(rows[0].log_r.contains_rational(&Rational::from(-1)));
        assert!(rows[1].log_r.contains_rational(&Rational::from(-8)));
        // in-step growth law: every index adds at least q^2
        for w in rows.windows(2).skip(1) {
            assert!(Integer::from(&w[1].m - &w[0].m) >= 4);
        }
        // slot numbers restart at 1 exactly at cycle starts
        for e in &rows {
            let k = e.k.to_u64().unwrap();
            assert_eq!(e.j, s.cycles.j(k).unwrap());
        }
    }

    #[test]
    fn complex_sweep_gates_level() {
        // Faithful-complex: the phase must fill [0,1) before the level may
        // move, and with literal increments 1/(qM) a short prefix leaves
        // y pinned at 2/q while theta climbs.
        let mut s = sched(Mode::FaithfulComplex, DensityKind::Const(1));
        let st = s.steps[0].clone();
        let seed = s.seed_entry().unwrap();
        let mut e = s.step_jump(&seed, 2).unwrap();
        assert!(e.theta.as_ref().unwrap().contains_rational(&Rational::from(0)));
        for _ in 0..50 {
            e = s.step_advance(&st, &e).unwrap();
            assert!(e.y.contains_rational(&Rational::from(1)));
        }
        let th = e.theta.as_ref().unwrap();
        assert!(th.lo_f64() > 0.0);
        assert!(th.hi_f64() < 1.0);
    }

    #[test]
    fn grid_phase_wraps_into_level() {
        // Accelerated-complex: the phase walks the 1/64 grid, so the 64th
        // advancing cycle start (index 85 under the unit constant density)
        // completes the sweep: theta resets and y picks up 1/(2 M_85)
        // = 1/784.  The streamed recurrence must agree with the closed-form
        // row exactly.
        let mut s = sched(Mode::AcceleratedComplex, DensityKind::Const(1));
        let st = s.steps[0].clone();
        let seed = s.seed_entry().unwrap();
        let mut e = s.step_jump(&seed, 2).unwrap();
        for _ in 0..64 {
            e = s.step_advance(&st, &e).unwrap();
        }
        assert_eq!(e.k, 85);
        assert_eq!(e.m, 392);
        let y85 = Rational::from(1) + Rational::from((1, 784));
        assert!(e.y.contains_rational(&y85));
        assert!(e.theta.as_ref().unwrap().contains_rational(&Rational::from(0)));

        let closed = s.entry_at(85).unwrap();
        assert_eq!(closed.m, 392);
        assert!(closed.y.contains_rational(&y85));
        assert!(closed.theta.as_ref().unwrap().contains_rational(&Rational::from(0)));
        // one bump earlier the phase sits at 63/64 with y still at the base
        let prev = s.entry_at(84).unwrap();
        assert!(prev.y.contains_rational(&Rational::from(1)));
        assert!(prev.theta.as_ref().unwrap().contains_rational(&Rational::from((63, 64))));
    }

    #[test]
    fn entries_reject_prehistory() {
        let mut s = sched(Mode::AcceleratedReal, DensityKind::Const(1));
        assert!(matches!(s.entry_at(19), Err(Error::OutOfReach { .. })));
        let seed = s.entry_at(20).unwrap();
        assert_eq!(seed.m, 1);
        assert_eq!(seed.q, 1);
        assert_eq!(seed.j, 1);
        assert!(seed.x.contains_rational(&Rational::from(1)));
    }
}
