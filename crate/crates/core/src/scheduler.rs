//! Per-cell MAC scheduling of the resource-block grid: round robin at RB
//! granularity, proportional fair on reported per-RB rates, and the
//! exponentially weighted average-throughput state both rely on.

use crate::config::{ScenarioConfig, SchedulerKind};
use crate::error::{Result, SimError};
use crate::num::Real;

/// The schedulable frequency grid. Every RB is one sub-band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbGrid<T> {
    pub n_rb: usize,
    pub rb_bandwidth: T,
}

impl<T: Real> RbGrid<T> {
    /// A grid of `n_rb` blocks that must fit inside `bandwidth`.
    pub fn new(n_rb: usize, rb_bandwidth: T, bandwidth: T) -> Result<Self> {
        if n_rb == 0 {
            return Err(SimError::InvalidArgument(
                "grid needs at least one RB".into(),
            ));
        }
        if !(rb_bandwidth > T::zero()) || T::from_count(n_rb) * rb_bandwidth > bandwidth {
            return Err(SimError::InvalidArgument(format!(
                "{n_rb} RBs of {rb_bandwidth} Hz do not fit in {bandwidth} Hz"
            )));
        }
        Ok(RbGrid { n_rb, rb_bandwidth })
    }

    /// Number of sub-bands.
    pub fn sub_bands(&self) -> usize {
        self.n_rb
    }
}

impl RbGrid<f64> {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        Self::new(cfg.n_rb(), cfg.rb_bandwidth, cfg.bandwidth)
    }
}

/// Scheduler state of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState<T> {
    /// Attached UE ids, ascending.
    ue_ids: Vec<usize>,
    /// Average throughput per attached UE, bits/TTI, aligned with `ue_ids`.
    avg_throughput: Vec<T>,
    /// Position in `ue_ids` the next round-robin grant starts from.
    rr_cursor: usize,
    /// Priority exponents of the generic `T^α / R^β` family.
    pub alpha: T,
    pub beta: T,
    /// Averaging window, TTIs.
    pub t_c: T,
}

impl<T: Real> SchedulerState<T> {
    /// State for the attached `ue_ids`, every average starting at `initial`.
    pub fn new(mut ue_ids: Vec<usize>, initial: T, kind: SchedulerKind, t_c: T) -> Result<Self> {
        if !(initial > T::zero()) {
            return Err(SimError::InvalidArgument(format!(
                "initial throughput must be > 0, got {initial}"
            )));
        }
        if !(t_c >= T::one()) {
            return Err(SimError::InvalidArgument(format!(
                "t_c must be >= 1, got {t_c}"
            )));
        }
        ue_ids.sort_unstable();
        if ue_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidArgument("duplicate UE id".into()));
        }
        let (alpha, beta) = match kind {
            SchedulerKind::Rr => (T::zero(), T::one()),
            SchedulerKind::Pf => (T::one(), T::one()),
        };
        let n = ue_ids.len();
        Ok(SchedulerState {
            ue_ids,
            avg_throughput: vec![initial; n],
            rr_cursor: 0,
            alpha,
            beta,
            t_c,
        })
    }

    pub fn ue_ids(&self) -> &[usize] {
        &self.ue_ids
    }

    pub fn avg_throughput(&self) -> &[T] {
        &self.avg_throughput
    }

    /// Average throughput of `ue_id`.
    pub fn average_of(&self, ue_id: usize) -> Option<T> {
        self.position(ue_id).map(|i| self.avg_throughput[i])
    }

    pub fn rr_cursor(&self) -> usize {
        self.rr_cursor
    }

    fn position(&self, ue_id: usize) -> Option<usize> {
        self.ue_ids.binary_search(&ue_id).ok()
    }
}

/// One RB's grant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grant<T> {
    pub ue_id: usize,
    pub bits: T,
}

/// The owner of every RB in one TTI of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    pub grants: Vec<Grant<T>>,
}

impl<T: Real> Allocation<T> {
    pub fn n_rb(&self) -> usize {
        self.grants.len()
    }

    /// Number of RBs granted to each of `ue_ids`.
    pub fn rb_counts(&self, ue_ids: &[usize]) -> Vec<usize> {
        ue_ids
            .iter()
            .map(|id| self.grants.iter().filter(|g| g.ue_id == *id).count())
            .collect()
    }

    /// Bits granted to each of `ue_ids`, summed over RBs.
    pub fn bits_per_ue(&self, ue_ids: &[usize]) -> Vec<T> {
        ue_ids
            .iter()
            .map(|id| {
                self.grants
                    .iter()
                    .filter(|g| g.ue_id == *id)
                    .fold(T::zero(), |a, g| a + g.bits)
            })
            .collect()
    }

    pub fn total_bits(&self) -> T {
        self.grants.iter().fold(T::zero(), |a, g| a + g.bits)
    }

    /// Replace the bits of every grant with `bits(rb, ue_id)`, e.g. with the
    /// rate actually achieved rather than the one reported.
    pub fn regrant(&mut self, mut bits: impl FnMut(usize, usize) -> T) {
        for (rb, g) in self.grants.iter_mut().enumerate() {
            let b = bits(rb, g.ue_id);
            g.bits = if b > T::zero() { b } else { T::zero() };
        }
    }
}

/// Generic priority `T^α / R^β` with `T` the throughput and `R` the user
/// data. `R = 0` earns no priority when `β > 0`.
pub fn priority<T: Real>(throughput: T, data: T, alpha: T, beta: T) -> Result<T> {
    if !(throughput > T::zero()) {
        return Err(SimError::InvalidArgument(format!(
            "throughput must be > 0, got {throughput}"
        )));
    }
    if data < T::zero() {
        return Err(SimError::InvalidArgument(format!(
            "data must be >= 0, got {data}"
        )));
    }
    if data == T::zero() && beta > T::zero() {
        return Ok(T::zero());
    }
    Ok(throughput.powf(alpha) / data.powf(beta))
}

fn check_ues(ues: &[usize]) -> Result<()> {
    if ues.is_empty() {
        return Err(SimError::NoUsers("scheduler has no attached UEs"));
    }
    Ok(())
}

/// Cyclic RB-granular round robin starting at the state's cursor. Channel
/// quality is never consulted; granted bits are zero until
/// [`Allocation::regrant`] fills them.
pub fn schedule_rr<T: Real>(
    ues: &[usize],
    grid: &RbGrid<T>,
    state: &mut SchedulerState<T>,
) -> Result<Allocation<T>> {
    check_ues(ues)?;
    let n = ues.len();
    let start = state.rr_cursor % n;
    let grants = (0..grid.n_rb)
        .map(|rb| Grant {
            ue_id: ues[(start + rb) % n],
            bits: T::zero(),
        })
        .collect();
    state.rr_cursor = (start + grid.n_rb) % n;
    Ok(Allocation { grants })
}

/// Proportional fair: each RB goes to the UE maximizing
/// `rate[k][rb] / T_k`; ties to the lowest ue_id. `rates[k]` is aligned with
/// `ues[k]`. Granted bits are the reported rates.
pub fn schedule_pf<T: Real>(
    ues: &[usize],
    grid: &RbGrid<T>,
    rates: &[Vec<T>],
    state: &SchedulerState<T>,
) -> Result<Allocation<T>> {
    check_ues(ues)?;
    if rates.len() != ues.len() {
        return Err(SimError::InvalidArgument(format!(
            "{} rate rows for {} UEs",
            rates.len(),
            ues.len()
        )));
    }
    let mut order: Vec<usize> = (0..ues.len()).collect();
    order.sort_by_key(|&k| ues[k]);
    let mut avg = Vec::with_capacity(ues.len());
    for (k, &id) in ues.iter().enumerate() {
        if rates[k].len() < grid.n_rb {
            return Err(SimError::InvalidArgument(format!(
                "UE {id} has rates for {} of {} RBs",
                rates[k].len(),
                grid.n_rb
            )));
        }
        let t = state
            .average_of(id)
            .ok_or_else(|| SimError::InvalidArgument(format!("UE {id} has no scheduler state")))?;
        if !(t > T::zero()) {
            return Err(SimError::InvalidArgument(format!(
                "UE {id} average throughput {t} not positive"
            )));
        }
        avg.push(t);
    }
    let grants = (0..grid.n_rb)
        .map(|rb| {
            let mut best = order[0];
            let mut best_metric = rates[best][rb] / avg[best];
            for &k in &order[1..] {
                let m = rates[k][rb] / avg[k];
                if m > best_metric {
                    best = k;
                    best_metric = m;
                }
            }
            Grant {
                ue_id: ues[best],
                bits: rates[best][rb],
            }
        })
        .collect();
    Ok(Allocation { grants })
}

/// Dispatch on the scheduler kind.
pub fn schedule<T: Real>(
    kind: SchedulerKind,
    ues: &[usize],
    grid: &RbGrid<T>,
    rates: &[Vec<T>],
    state: &mut SchedulerState<T>,
) -> Result<Allocation<T>> {
    match kind {
        SchedulerKind::Rr => {
            let mut alloc = schedule_rr(ues, grid, state)?;
            let pos: Vec<(usize, usize)> = ues.iter().enumerate().map(|(k, id)| (*id, k)).collect();
            alloc.regrant(|rb, id| {
                pos.iter()
                    .find(|(u, _)| *u == id)
                    .and_then(|(_, k)| rates.get(*k))
                    .and_then(|r| r.get(rb).copied())
                    .unwrap_or(T::zero())
            });
            Ok(alloc)
        }
        SchedulerKind::Pf => schedule_pf(ues, grid, rates, state),
    }
}

/// Exponential averaging of every attached UE's throughput:
/// `T_k ← (1 − 1/t_c)·T_k + (1/t_c)·granted_k`, where `granted` is aligned
/// with [`SchedulerState::ue_ids`] and is zero for unscheduled UEs.
pub fn update_average_throughput<T: Real>(
    state: &mut SchedulerState<T>,
    granted: &[T],
    t_c: T,
) -> Result<()> {
    if !(t_c >= T::one()) {
        return Err(SimError::InvalidArgument(format!(
            "t_c must be >= 1, got {t_c}"
        )));
    }
    if granted.len() != state.avg_throughput.len() {
        return Err(SimError::Dimension(format!(
            "{} grants for {} attached UEs",
            granted.len(),
            state.avg_throughput.len()
        )));
    }
    let w = T::one() / t_c;
    for (t, g) in state.avg_throughput.iter_mut().zip(granted) {
        *t = if t_c == T::one() {
            *g
        } else {
            *t + (*g - *t) * w
        };
    }
    Ok(())
}
