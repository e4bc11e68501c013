//! Run-level performance indicators: average UE throughput, spectral
//! efficiency and Jain's fairness index.

use std::fmt;

use crate::config::{Polarization, SchedulerKind};
use crate::error::{Result, SimError};
use crate::num::Real;

/// Bits delivered to each counted UE over one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputLedger<T> {
    bits: Vec<T>,
    duration: T,
    bandwidth: T,
}

impl<T: Real> ThroughputLedger<T> {
    /// An empty ledger for `n_ues` UEs over a run of `duration` seconds on a
    /// `bandwidth` Hz carrier.
    pub fn new(n_ues: usize, duration: T, bandwidth: T) -> Result<Self> {
        if !(duration > T::zero()) {
            return Err(SimError::InvalidArgument(format!(
                "duration must be > 0, got {duration}"
            )));
        }
        if !(bandwidth > T::zero()) {
            return Err(SimError::InvalidArgument(format!(
                "bandwidth must be > 0, got {bandwidth}"
            )));
        }
        Ok(ThroughputLedger {
            bits: vec![T::zero(); n_ues],
            duration,
            bandwidth,
        })
    }

    /// A ledger from per-UE throughputs in bit/s, over one second.
    pub fn from_rates(rates_bps: &[T], bandwidth: T) -> Result<Self> {
        let mut ledger = Self::new(rates_bps.len(), T::one(), bandwidth)?;
        for (k, r) in rates_bps.iter().enumerate() {
            ledger.credit(k, *r)?;
        }
        Ok(ledger)
    }

    /// Add delivered bits to UE slot `k`.
    pub fn credit(&mut self, k: usize, bits: T) -> Result<()> {
        if !(bits >= T::zero()) || !bits.is_finite() {
            return Err(SimError::InvalidArgument(format!(
                "credited bits must be finite and >= 0, got {bits}"
            )));
        }
        let n = self.bits.len();
        let slot = self.bits.get_mut(k).ok_or_else(|| {
            SimError::InvalidArgument(format!("UE slot {k} out of range for {n} UEs"))
        })?;
        *slot = *slot + bits;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[T] {
        &self.bits
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn total_bits(&self) -> T {
        self.bits.iter().fold(T::zero(), |a, b| a + *b)
    }

    /// Per-UE throughput, bit/s.
    pub fn throughputs(&self) -> Vec<T> {
        self.bits.iter().map(|b| *b / self.duration).collect()
    }
}

fn require_users<T: Real>(ledger: &ThroughputLedger<T>) -> Result<()> {
    if ledger.n() == 0 {
        return Err(SimError::NoUsers("KPI over an empty UE population"));
    }
    Ok(())
}

/// Mean per-UE throughput, bit/s.
pub fn average_ue_throughput<T: Real>(ledger: &ThroughputLedger<T>) -> Result<T> {
    require_users(ledger)?;
    Ok(ledger.total_bits() / ledger.duration / T::from_count(ledger.n()))
}

/// Aggregate throughput per hertz, bit/s/Hz.
pub fn spectral_efficiency<T: Real>(ledger: &ThroughputLedger<T>) -> Result<T> {
    if !(ledger.bandwidth > T::zero()) {
        return Err(SimError::InvalidArgument("bandwidth must be > 0".into()));
    }
    Ok(ledger.total_bits() / ledger.duration / ledger.bandwidth)
}

/// Jain's index `(Σx)² / (n·Σx²)`, in `[1/n, 1]`.
pub fn jain_fairness<T: Real>(ledger: &ThroughputLedger<T>) -> Result<T> {
    require_users(ledger)?;
    jain_index(&ledger.bits)
}

/// Jain's index of any non-negative vector. Values are normalized by the
/// maximum first, which keeps equal vectors at exactly 1 and a single
/// winner at exactly `1/n`.
pub fn jain_index<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return Err(SimError::NoUsers("fairness of an empty vector"));
    }
    let max = x.iter().fold(T::zero(), |m, v| m.max(*v));
    if !(max > T::zero()) {
        return Err(SimError::AllZeroThroughput);
    }
    let (s, q) = x.iter().fold((T::zero(), T::zero()), |(s, q), v| {
        let y = *v / max;
        (s + y, q + y * y)
    });
    Ok((s * s / q / T::from_count(x.len())).min(T::one()))
}

/// KPIs of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiRecord<T> {
    pub scheduler: SchedulerKind,
    pub rx_polarization: Polarization,
    pub velocity_kmph: T,
    pub seed: u64,
    /// bit/s.
    pub avg_ue_throughput: T,
    /// bit/s/Hz.
    pub spectral_efficiency: T,
    pub fairness_index: T,
    /// UEs counted in the KPIs.
    pub n_ues: usize,
    /// Carrier bandwidth the spectral efficiency refers to, Hz.
    pub bandwidth: T,
}

impl<T: Real> KpiRecord<T> {
    /// Evaluate all KPIs of `ledger`.
    pub fn from_ledger(
        ledger: &ThroughputLedger<T>,
        scheduler: SchedulerKind,
        rx_polarization: Polarization,
        velocity_kmph: T,
        seed: u64,
    ) -> Result<Self> {
        Ok(KpiRecord {
            scheduler,
            rx_polarization,
            velocity_kmph,
            seed,
            avg_ue_throughput: average_ue_throughput(ledger)?,
            spectral_efficiency: spectral_efficiency(ledger)?,
            fairness_index: jain_fairness(ledger)?,
            n_ues: ledger.n(),
            bandwidth: ledger.bandwidth(),
        })
    }

    /// Relative mismatch between `SE·B` and `n·avg`.
    pub fn consistency_error(&self) -> T {
        let lhs = self.spectral_efficiency * self.bandwidth;
        let rhs = T::from_count(self.n_ues) * self.avg_ue_throughput;
        let scale = lhs.abs().max(rhs.abs());
        if scale == T::zero() {
            T::zero()
        } else {
            (lhs - rhs).abs() / scale
        }
    }
}

impl<T: Real> fmt::Display for KpiRecord<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} km/h seed {}: {:.3} Mbit/s, {:.3} bit/s/Hz, FI {:.4}",
            self.scheduler,
            self.rx_polarization,
            self.velocity_kmph,
            self.seed,
            self.avg_ue_throughput.to_f64_lossy() / 1e6,
            self.spectral_efficiency.to_f64_lossy(),
            self.fairness_index.to_f64_lossy()
        )
    }
}
