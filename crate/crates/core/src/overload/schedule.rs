use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};

/// Membership of a time instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    InA,
    InB,
    Breakpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseKind {
    A,
    B,
}

/// One open interval of the partition together with its phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub kind: PhaseKind,
    /// Index i of Aᵢ or Bᵢ.
    pub index: usize,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScheduleRepr {
    breakpoints: Vec<f64>,
    horizon: f64,
}

/// Breakpoints `0 < t₀ < t₁ < … < T`. Intervals alternate starting with
/// `A₀ = (0, t₀)`, then `B₀ = (t₀, t₁)`, `A₁ = (t₁, t₂)`, …; the tail
/// `(t_last, T)` belongs to A when the breakpoint count is even and to B
/// when it is odd. No breakpoints means the whole horizon is A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    breakpoints: Vec<f64>,
    horizon: f64,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = CalError;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        Schedule::new(r.breakpoints, r.horizon)
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr {
            breakpoints: s.breakpoints,
            horizon: s.horizon,
        }
    }
}

impl Schedule {
    pub fn new(breakpoints: Vec<f64>, horizon: f64) -> Result<Self> {
        let s = Self {
            breakpoints,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    /// Everything in A.
    pub fn all_a(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    /// `count` cycles of an A-interval of length `period_a` followed by a
    /// B-interval of length `period_b`. Breakpoints at or beyond the horizon
    /// are dropped, so a horizon of exactly `count·(period_a + period_b)`
    /// ends on a B-phase.
    pub fn periodic(period_a: f64, period_b: f64, count: usize, horizon: f64) -> Result<Self> {
        if !(period_a > 0.0 && period_b > 0.0) {
            return Err(CalError::InvalidSchedule(
                "periods must be strictly positive".into(),
            ));
        }
        let cycle = period_a + period_b;
        let tol = 1e-12 * horizon.abs().max(1.0);
        let mut bps = Vec::with_capacity(2 * count);
        for i in 0..count {
            let base = i as f64 * cycle;
            for t in [base + period_a, base + cycle] {
                if t < horizon - tol {
                    bps.push(t);
                }
            }
        }
        Self::new(bps, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CalError::InvalidSchedule(format!(
                "horizon must be positive and finite, got {}",
                self.horizon
            )));
        }
        if let Some(&t) = self
            .breakpoints
            .iter()
            .find(|&&t| !(t > 0.0 && t < self.horizon))
        {
            return Err(CalError::InvalidSchedule(format!(
                "breakpoint {t} not inside (0, {})",
                self.horizon
            )));
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CalError::InvalidSchedule(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Phase owning the final interval `(t_last, T)`.
    pub fn tail_phase(&self) -> PhaseKind {
        kind_of(self.breakpoints.len())
    }

    /// Membership of `t`; exact comparison against the breakpoints.
    pub fn phase_of(&self, t: f64) -> Result<Phase> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(CalError::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.phase_at(t))
    }

    /// Like [`phase_of`](Self::phase_of) but without the range check;
    /// times outside `[0, T]` take the phase of the nearest interval.
    pub fn phase_at(&self, t: f64) -> Phase {
        if self.breakpoints.binary_search_by(|b| b.total_cmp(&t)).is_ok() {
            return Phase::Breakpoint;
        }
        let idx = self.breakpoints.partition_point(|&b| b < t);
        match kind_of(idx) {
            PhaseKind::A => Phase::InA,
            PhaseKind::B => Phase::InB,
        }
    }

    pub fn intervals(&self) -> Vec<Interval> {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(&self.breakpoints);
        edges.push(self.horizon);
        edges
            .windows(2)
            .enumerate()
            .map(|(j, w)| Interval {
                start: w[0],
                end: w[1],
                kind: kind_of(j),
                index: j / 2,
            })
            .collect()
    }
}

fn kind_of(interval_index: usize) -> PhaseKind {
    if interval_index.is_multiple_of(2) {
        PhaseKind::A
    } else {
        PhaseKind::B
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        let s = Schedule::new(vec![1.0, 2.0], 3.0).unwrap();
        assert_eq!(s.phase_of(0.5).unwrap(), Phase::InA);
        assert_eq!(s.phase_of(1.5).unwrap(), Phase::InB);
        assert_eq!(s.phase_of(2.5).unwrap(), Phase::InA);
        assert_eq!(s.phase_of(1.0).unwrap(), Phase::Breakpoint);
        assert_eq!(s.tail_phase(), PhaseKind::A);
        assert!(matches!(s.phase_of(3.5), Err(CalError::OutOfRange { .. })));
        assert!(matches!(s.phase_of(-0.1), Err(CalError::OutOfRange { .. })));
    }

    #[test]
    fn odd_breakpoint_count_ends_in_b() {
        let s = Schedule::new(vec![1.0, 2.0, 3.0], 4.0).unwrap();
        assert_eq!(s.tail_phase(), PhaseKind::B);
        assert_eq!(s.phase_of(3.5).unwrap(), Phase::InB);
        let kinds: Vec<_> = s.intervals().iter().map(|i| (i.kind, i.index)).collect();
        assert_eq!(
            kinds,
            vec![(PhaseKind::A, 0), (PhaseKind::B, 0), (PhaseKind::A, 1), (PhaseKind::B, 1)]
        );
    }

    #[test]
    fn empty_schedule_is_all_a() {
        let s = Schedule::all_a(2.0).unwrap();
        assert_eq!(s.phase_of(0.0).unwrap(), Phase::InA);
        assert_eq!(s.phase_of(2.0).unwrap(), Phase::InA);
        assert_eq!(s.intervals().len(), 1);
    }

    #[test]
    fn periodic_generator() {
        let s = Schedule::periodic(2.0, 1.0, 2, 6.0).unwrap();
        assert_eq!(s.breakpoints(), &[2.0, 3.0, 5.0]);
        assert_eq!(s.tail_phase(), PhaseKind::B);
        let s = Schedule::periodic(2.0, 1.0, 2, 7.0).unwrap();
        assert_eq!(s.breakpoints(), &[2.0, 3.0, 5.0, 6.0]);
        assert_eq!(s.tail_phase(), PhaseKind::A);
    }

    #[test]
    fn invalid_schedules() {
        assert!(Schedule::new(vec![2.0, 1.0], 3.0).is_err());
        assert!(Schedule::new(vec![0.0, 1.0], 3.0).is_err());
        assert!(Schedule::new(vec![1.0, 3.0], 3.0).is_err());
        assert!(Schedule::new(vec![], 0.0).is_err());
        // deserialization goes through the same check
        let repr = ScheduleRepr {
            breakpoints: vec![2.0, 1.0],
            horizon: 3.0,
        };
        assert!(Schedule::try_from(repr).is_err());
    }
}
