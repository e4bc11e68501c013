//! Propagation and fading: urban-macro pathloss and LOS probability,
//! lognormal shadowing, and Doppler-correlated Rayleigh/Rician MIMO fading.
//!
//! Fading coefficients come from Gaussian-weighted sums of sinusoids whose
//! Doppler shifts are `f_d·cos(α)` for uniformly random arrival angles α, so
//! the ensemble autocorrelation is `J0(2π f_d τ)`. Frequency selectivity comes
//! from independent processes at anchor RBs spaced one coherence bandwidth
//! apart, mixed with power-preserving linear weights in between.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::antenna::{CouplingMatrix, PolarizationSpec};
use crate::error::{Result, SimError};
use crate::linalg::CMat;
use crate::num::{db_to_lin, Real};

/// Speed of light used for Doppler shifts, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Sinusoids per fading process.
pub const N_SINUSOIDS: usize = 16;

/// Effective environment height of the UMa breakpoint distance, m.
const UMA_ENV_HEIGHT: f64 = 1.0;

/// Urban-macro pathloss in dB for a link of horizontal length `d2d`.
///
/// Errors below the 10 m validity limit.
pub fn pathloss_uma<T: Real>(d2d: T, fc_hz: T, h_bs: T, h_ut: T, los: bool) -> Result<T> {
    if !(d2d >= T::lit(10.0)) {
        return Err(SimError::InvalidArgument(format!(
            "pathloss needs d2d >= 10 m, got {d2d}"
        )));
    }
    let dh = h_bs - h_ut;
    let d3d = (d2d * d2d + dh * dh).sqrt();
    let fc_ghz = fc_hz / T::lit(1e9);
    let log_f = T::lit(20.0) * fc_ghz.log10();
    let d_bp =
        T::lit(4.0) * (h_bs - T::lit(UMA_ENV_HEIGHT)) * (h_ut - T::lit(UMA_ENV_HEIGHT)) * fc_hz
            / T::lit(3e8);
    let pl_los = if d_bp <= T::zero() || d2d <= d_bp {
        T::lit(28.0) + T::lit(22.0) * d3d.log10() + log_f
    } else {
        T::lit(28.0) + T::lit(40.0) * d3d.log10() + log_f
            - T::lit(9.0) * (d_bp * d_bp + dh * dh).log10()
    };
    if los {
        return Ok(pl_los);
    }
    let pl_nlos =
        T::lit(13.54) + T::lit(39.08) * d3d.log10() + log_f - T::lit(0.6) * (h_ut - T::lit(1.5));
    Ok(pl_los.max(pl_nlos))
}

/// Urban-macro outdoor LOS probability for UE heights up to 13 m.
pub fn los_probability<T: Real>(d2d: T) -> T {
    let d18 = T::lit(18.0);
    if d2d <= d18 {
        return T::one();
    }
    d18 / d2d + (-d2d / T::lit(63.0)).exp() * (T::one() - d18 / d2d)
}

/// Maximum Doppler shift for a speed in km/h.
pub fn doppler_frequency<T: Real>(velocity_kmph: T, fc_hz: T) -> T {
    velocity_kmph / T::lit(3.6) * fc_hz / T::lit(SPEED_OF_LIGHT)
}

/// Bessel function of the first kind, order zero, from its integral
/// representation `(1/π) ∫_0^π cos(x sin θ) dθ`. The integrand is periodic
/// and smooth, so the trapezoid rule converges geometrically.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let n = 64 + 2 * x.abs().to_f64_lossy().min(1e6).ceil() as usize;
    let h = T::PI() / T::from_count(n);
    let mut sum = T::zero();
    for k in 0..n {
        let theta = h * T::from_count(k);
        sum = sum + (x * theta.sin()).cos();
    }
    // Both end values are 1, so the left-endpoint sum is the trapezoid sum.
    sum * h / T::PI()
}

/// Mean-square correlation of a Jakes process with itself across an interval:
/// `2 ∫_0^1 (1 − u) J0(2π f_d T u) du`. Equals 1 for `f_d = 0`.
pub fn doppler_coherence<T: Real>(f_d: T, interval: T) -> T {
    if f_d <= T::zero() {
        return T::one();
    }
    let x = T::TAU() * f_d * interval;
    // Simpson's rule; the integrand oscillates ~x/π times.
    let n = 2 * (64 + x.to_f64_lossy().ceil() as usize * 8);
    let h = T::one() / T::from_count(n);
    let f = |u: T| (T::one() - u) * bessel_j0(x * u);
    let mut acc = f(T::zero()) + f(T::one());
    for k in 1..n {
        let w = if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc = acc + w * f(h * T::from_count(k));
    }
    (T::lit(2.0) * acc * h / T::lit(3.0))
        .min(T::one())
        .max(T::zero())
}

/// Fraction of subcarrier power spread into neighbouring subcarriers by
/// Doppler within one OFDM symbol.
pub fn ici_fraction<T: Real>(f_d: T, subcarrier_spacing: T) -> T {
    T::one() - doppler_coherence(f_d, T::one() / subcarrier_spacing)
}

/// Lognormal shadowing deviation of a link, dB.
pub fn shadowing_std<T: Real>(los: bool, std_los: T, std_nlos: T) -> T {
    if los {
        std_los
    } else {
        std_nlos
    }
}

/// Slow-varying state of one (cell, UE) link, fixed for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleState<T> {
    pub pathloss_db: T,
    pub los: bool,
    pub shadowing_db: T,
    pub antenna_gain_db: T,
}

impl<T: Real> LargeScaleState<T> {
    /// Net power gain of the link, dB.
    pub fn gain_db(&self) -> T {
        self.antenna_gain_db - self.pathloss_db - self.shadowing_db
    }

    /// Linear amplitude: the square root of the net power gain.
    pub fn amplitude(&self) -> T {
        db_to_lin(self.gain_db()).sqrt()
    }
}

/// Draw LOS state and shadowing for a link and evaluate its pathloss.
#[allow(clippy::too_many_arguments)]
pub fn draw_large_scale<T: Real, R: Rng + ?Sized>(
    d2d: T,
    fc_hz: T,
    h_bs: T,
    h_ut: T,
    antenna_gain_db: T,
    shadow_std_los: T,
    shadow_std_nlos: T,
    rng: &mut R,
) -> Result<LargeScaleState<T>> {
    let u: f64 = rng.gen();
    let los = T::lit(u) < los_probability(d2d);
    let z: f64 = rng.sample(StandardNormal);
    let shadowing_db = T::lit(z) * shadowing_std(los, shadow_std_los, shadow_std_nlos);
    Ok(LargeScaleState {
        pathloss_db: pathloss_uma(d2d, fc_hz, h_bs, h_ut, los)?,
        los,
        shadowing_db,
        antenna_gain_db,
    })
}

/// One unit-power complex Gaussian process with a Jakes Doppler spectrum,
/// stepped one sample at a time.
#[derive(Debug, Clone)]
pub struct JakesProcess<T> {
    amps: [Complex<T>; N_SINUSOIDS],
    phasors: [Complex<T>; N_SINUSOIDS],
    steps: [Complex<T>; N_SINUSOIDS],
}

impl<T: Real> JakesProcess<T> {
    /// A process with maximum Doppler `f_d` sampled every `dt` seconds. The
    /// number of random draws does not depend on `f_d`.
    pub fn new<R: Rng + ?Sized>(f_d: T, dt: T, rng: &mut R) -> Self {
        let zero = Complex::zero();
        let mut p = JakesProcess {
            amps: [zero; N_SINUSOIDS],
            phasors: [zero; N_SINUSOIDS],
            steps: [zero; N_SINUSOIDS],
        };
        let norm = T::lit(0.5 / N_SINUSOIDS as f64).sqrt();
        for m in 0..N_SINUSOIDS {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            p.amps[m] = Complex::new(T::lit(a), T::lit(b)).scale(norm);
            let alpha = T::lit(rng.gen::<f64>()) * T::TAU();
            let phi = T::lit(rng.gen::<f64>()) * T::TAU();
            p.phasors[m] = Complex::from_polar(T::one(), phi);
            p.steps[m] = Complex::from_polar(T::one(), T::TAU() * f_d * alpha.cos() * dt);
        }
        p
    }

    /// Current sample.
    pub fn value(&self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&self.phasors)
            .fold(Complex::zero(), |acc, (a, z)| acc + a * z)
    }

    /// Move to the next sample.
    pub fn advance(&mut self) {
        for (z, s) in self.phasors.iter_mut().zip(&self.steps) {
            *z = *z * s;
        }
    }
}

/// Deterministic line-of-sight component: a unit phasor rotating at one
/// Doppler shift.
#[derive(Debug, Clone, Copy)]
struct LosRay<T> {
    phasor: Complex<T>,
    step: Complex<T>,
}

/// Shape of a fading realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingDims {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_rb: usize,
    /// RB spacing between independent frequency anchors.
    pub coherence_rbs: usize,
}

impl FadingDims {
    fn n_anchors(&self) -> usize {
        (self.n_rb.max(1) - 1) / self.coherence_rbs.max(1) + 2
    }
}

/// Stateful generator of one link's MIMO fading across RBs and TTIs.
///
/// Every process is a sum of `N_SINUSOIDS` complex-Gaussian weighted
/// sinusoids. The Doppler angles are drawn once per link and shared by its
/// processes, whose weights and phases are independent, so processes stay
/// mutually uncorrelated while the per-sample step factors are stored once.
#[derive(Debug, Clone)]
pub struct FadingGenerator<T> {
    dims: FadingDims,
    steps: [Complex<T>; N_SINUSOIDS],
    /// Current phasor of each shared Doppler tone.
    tones: [Complex<T>; N_SINUSOIDS],
    /// Complex Gaussian tone weights, `[rx][tx][anchor][sinusoid]` flattened.
    weights: Vec<Complex<T>>,
    /// Current value of every process, `[rx][tx][anchor]` flattened.
    values: Vec<Complex<T>>,
    los: Vec<LosRay<T>>,
    los_amp: T,
    scatter_amp: T,
    doppler_hz: T,
}

impl<T: Real> FadingGenerator<T> {
    /// `rician_k_db = None` gives Rayleigh fading.
    pub fn new<R: Rng + ?Sized>(
        dims: FadingDims,
        f_d: T,
        tti: T,
        rician_k_db: Option<T>,
        rng: &mut R,
    ) -> Self {
        let n_anchor = dims.n_anchors();
        let n_proc = dims.n_rx * dims.n_tx * n_anchor;
        let mut steps = [Complex::zero(); N_SINUSOIDS];
        for s in steps.iter_mut() {
            let alpha = T::lit(rng.gen::<f64>()) * T::TAU();
            *s = Complex::from_polar(T::one(), T::TAU() * f_d * alpha.cos() * tti);
        }
        let norm = T::lit(0.5 / N_SINUSOIDS as f64).sqrt();
        let mut weights = Vec::with_capacity(n_proc * N_SINUSOIDS);
        let mut los = Vec::with_capacity(dims.n_rx * dims.n_tx);
        for _ in 0..dims.n_rx * dims.n_tx {
            for _ in 0..n_anchor * N_SINUSOIDS {
                // A circular Gaussian weight already carries a uniform phase.
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                weights.push(Complex::new(T::lit(a), T::lit(b)).scale(norm));
            }
            let alpha = T::lit(rng.gen::<f64>()) * T::TAU();
            let phi = T::lit(rng.gen::<f64>()) * T::TAU();
            los.push(LosRay {
                phasor: Complex::from_polar(T::one(), phi),
                step: Complex::from_polar(T::one(), T::TAU() * f_d * alpha.cos() * tti),
            });
        }
        let values = weights
            .chunks_exact(N_SINUSOIDS)
            .map(|c| c.iter().fold(Complex::zero(), |a, z| a + z))
            .collect();
        let tones = [Complex::new(T::one(), T::zero()); N_SINUSOIDS];
        let (los_amp, scatter_amp) = match rician_k_db {
            Some(k_db) => {
                let k = db_to_lin(k_db);
                (
                    (k / (k + T::one())).sqrt(),
                    (T::one() / (k + T::one())).sqrt(),
                )
            }
            None => (T::zero(), T::one()),
        };
        FadingGenerator {
            dims,
            steps,
            tones,
            weights,
            values,
            los,
            los_amp,
            scatter_amp,
            doppler_hz: f_d,
        }
    }

    pub fn dims(&self) -> FadingDims {
        self.dims
    }

    pub fn doppler_hz(&self) -> T {
        self.doppler_hz
    }

    /// Per-RB `n_rx × n_tx` coefficients at the current TTI.
    pub fn snapshot(&self) -> Vec<CMat<T>> {
        let mut out = Vec::new();
        self.snapshot_into(&mut out);
        out
    }

    /// [`snapshot`](Self::snapshot) into `out`, reusing its matrices when
    /// they already have the right shape.
    pub fn snapshot_into(&self, out: &mut Vec<CMat<T>>) {
        let d = self.dims;
        if out.len() != d.n_rb
            || out
                .first()
                .is_some_and(|m| m.rows() != d.n_rx || m.cols() != d.n_tx)
        {
            *out = vec![CMat::zeros(d.n_rx, d.n_tx); d.n_rb];
        }
        let n_anchor = d.n_anchors();
        let coh = d.coherence_rbs.max(1);
        for (rb, m) in out.iter_mut().enumerate() {
            let j = rb / coh;
            let w = T::from_count(rb % coh) / T::from_count(coh);
            let (w0, w1) = (T::one() - w, w);
            let norm = self.scatter_amp / (w0 * w0 + w1 * w1).sqrt();
            let (w0, w1) = (w0 * norm, w1 * norm);
            // Row-major entry index is the `[rx][tx]` process index.
            for (link, (z, los)) in m.as_mut_slice().iter_mut().zip(&self.los).enumerate() {
                let a = &self.values[link * n_anchor + j..link * n_anchor + j + 2];
                *z = los.phasor.scale(self.los_amp) + a[0].scale(w0) + a[1].scale(w1);
            }
        }
    }

    pub fn advance(&mut self) {
        if self.doppler_hz == T::zero() {
            return;
        }
        for (z, s) in self.tones.iter_mut().zip(&self.steps) {
            *z = *z * s;
        }
        let tones = self.tones;
        for (chunk, v) in self
            .weights
            .chunks_exact(N_SINUSOIDS)
            .zip(self.values.iter_mut())
        {
            *v = chunk
                .iter()
                .zip(&tones)
                .fold(Complex::zero(), |acc, (w, z)| acc + w * z);
        }
        for ray in &mut self.los {
            ray.phasor = ray.phasor * ray.step;
        }
    }
}

/// A complete fading realization: `snapshots[tti][rb]` is `n_rx × n_tx`.
#[derive(Debug, Clone)]
pub struct FadingProcess<T> {
    pub doppler_hz: T,
    pub rician_k_db: Option<T>,
    pub snapshots: Vec<Vec<CMat<T>>>,
}

/// Generate `n_tti` TTIs of fading for one link.
pub fn generate_fading<T: Real, R: Rng + ?Sized>(
    f_d: T,
    n_tti: usize,
    tti: T,
    dims: FadingDims,
    rician_k_db: Option<T>,
    rng: &mut R,
) -> Result<FadingProcess<T>> {
    if !(f_d >= T::zero()) {
        return Err(SimError::InvalidArgument(format!(
            "Doppler must be >= 0, got {f_d}"
        )));
    }
    let mut gen = FadingGenerator::new(dims, f_d, tti, rician_k_db, rng);
    let mut snapshots = Vec::with_capacity(n_tti);
    for _ in 0..n_tti {
        snapshots.push(gen.snapshot());
        gen.advance();
    }
    Ok(FadingProcess {
        doppler_hz: f_d,
        rician_k_db,
        snapshots,
    })
}

/// Scale one fading matrix into a channel: `H[rx][tx] = a · c[tx mod 2] · h[rx][tx]`
/// with `a` the large-scale amplitude and `c` the UE-side coupling row.
pub fn expand_channel<T: Real>(
    amplitude: T,
    fading: &CMat<T>,
    coupling_row: &[Complex<T>; 2],
) -> CMat<T> {
    CMat::from_fn(fading.rows(), fading.cols(), |rx, tx| {
        (coupling_row[tx % 2] * fading[(rx, tx)]).scale(amplitude)
    })
}

/// Channel matrix of one (cell, UE) link at one TTI and RB.
pub fn assemble_channel<T: Real>(
    ls: &LargeScaleState<T>,
    fading: &FadingProcess<T>,
    coupling: &CouplingMatrix<T>,
    tti: usize,
    rb: usize,
    dims: (usize, usize),
) -> Result<CMat<T>> {
    let h = fading
        .snapshots
        .get(tti)
        .and_then(|s| s.get(rb))
        .ok_or_else(|| SimError::Dimension(format!("no fading sample for tti {tti}, rb {rb}")))?;
    if (h.rows(), h.cols()) != dims {
        return Err(SimError::Dimension(format!(
            "fading is {}x{}, expected {}x{}",
            h.rows(),
            h.cols(),
            dims.0,
            dims.1
        )));
    }
    Ok(expand_channel(ls.amplitude(), h, &coupling.rx_row()))
}

/// Channel of one link at the current TTI, split into the part the receiver
/// can track and the depolarized part that decorrelates within the TTI.
#[derive(Debug, Clone)]
pub struct LinkSnapshot<T> {
    /// Per-RB trackable channel.
    pub h: Vec<CMat<T>>,
    /// Per-RB incoherent leakage channel, absent when it carries no power.
    pub h_incoherent: Option<Vec<CMat<T>>>,
}

/// Share of the depolarized power that stays coherent across one TTI for a
/// receiver with polarization `pol` moving at Doppler `f_d`.
pub fn depolarization_coherence<T: Real>(f_d: T, tti: T, pol: &PolarizationSpec<T>) -> T {
    doppler_coherence(f_d * pol.depolarization_rate(), tti)
}

/// Time-varying channel of one (cell, UE) link: large-scale gain, fading,
/// and the depolarization process of the UE's polarization plane.
#[derive(Debug, Clone)]
pub struct LinkChannel<T> {
    pub large_scale: LargeScaleState<T>,
    fading: FadingGenerator<T>,
    depol: [JakesProcess<T>; 2],
    co_row: [T; 2],
    leak_row: [T; 2],
    /// Share of leakage power that stays coherent over one TTI.
    coherence: T,
}

impl<T: Real> LinkChannel<T> {
    /// Build a link. `rician_k_db` applies only when the link is LOS.
    pub fn new<R: Rng + ?Sized>(
        large_scale: LargeScaleState<T>,
        dims: FadingDims,
        f_d: T,
        tti: T,
        rician_k_db: T,
        pol: &PolarizationSpec<T>,
        rng: &mut R,
    ) -> Self {
        let coherence = depolarization_coherence(f_d, tti, pol);
        Self::with_coherence(
            large_scale,
            dims,
            f_d,
            tti,
            rician_k_db,
            pol,
            coherence,
            rng,
        )
    }

    /// [`LinkChannel::new`] with the value of [`depolarization_coherence`]
    /// supplied by the caller, who may share it between links.
    #[allow(clippy::too_many_arguments)]
    pub fn with_coherence<R: Rng + ?Sized>(
        large_scale: LargeScaleState<T>,
        dims: FadingDims,
        f_d: T,
        tti: T,
        rician_k_db: T,
        pol: &PolarizationSpec<T>,
        coherence: T,
        rng: &mut R,
    ) -> Self {
        let k = if large_scale.los {
            Some(rician_k_db)
        } else {
            None
        };
        let fading = FadingGenerator::new(dims, f_d, tti, k, rng);
        let f_dep = f_d * pol.depolarization_rate();
        let depol = [
            JakesProcess::new(f_dep, tti, rng),
            JakesProcess::new(f_dep, tti, rng),
        ];
        let lambda = pol.leakage_fraction();
        let mut co_row = [T::zero(); 2];
        let mut leak_row = [T::zero(); 2];
        for p in 0..2 {
            let delta = (pol.tx_slants_deg[p] - pol.rx_slant_deg).to_radians();
            co_row[p] = (T::one() - lambda).sqrt() * delta.cos();
            leak_row[p] = lambda.sqrt() * delta.sin();
        }
        LinkChannel {
            large_scale,
            fading,
            depol,
            co_row,
            leak_row,
            coherence,
        }
    }

    /// Coupling row at the current TTI: coherent part and incoherent amplitudes.
    pub fn coupling_row(&self) -> ([Complex<T>; 2], [T; 2]) {
        let mut coh = [Complex::zero(); 2];
        let mut inc = [T::zero(); 2];
        let keep = self.coherence.sqrt();
        let lose = (T::one() - self.coherence).sqrt();
        for p in 0..2 {
            let v = self.depol[p].value();
            let phase = if v.is_zero() { T::zero() } else { v.arg() };
            coh[p] = Complex::new(self.co_row[p], T::zero())
                - Complex::from_polar(self.leak_row[p] * keep, phase);
            inc[p] = self.leak_row[p] * lose;
        }
        (coh, inc)
    }

    pub fn snapshot(&self) -> LinkSnapshot<T> {
        let mut out = LinkSnapshot {
            h: Vec::new(),
            h_incoherent: None,
        };
        self.snapshot_into(&mut out);
        out
    }

    /// [`snapshot`](Self::snapshot) into `out`, reusing its storage.
    pub fn snapshot_into(&self, out: &mut LinkSnapshot<T>) {
        let amp = self.large_scale.amplitude();
        let (coh, inc) = self.coupling_row();
        let coh = [coh[0].scale(amp), coh[1].scale(amp)];
        let inc = [
            Complex::new(inc[0] * amp, T::zero()),
            Complex::new(inc[1] * amp, T::zero()),
        ];
        self.fading.snapshot_into(&mut out.h);
        let n_tx = self.fading.dims().n_tx;
        if inc.iter().any(|a| !a.is_zero()) {
            let leak = out.h_incoherent.get_or_insert_with(Vec::new);
            if leak.len() != out.h.len()
                || leak
                    .first()
                    .is_some_and(|g| g.as_slice().len() != out.h[0].as_slice().len())
            {
                leak.clone_from(&out.h);
            }
            for (h, g) in out.h.iter_mut().zip(leak.iter_mut()) {
                for (hr, gr) in h
                    .as_mut_slice()
                    .chunks_exact_mut(n_tx)
                    .zip(g.as_mut_slice().chunks_exact_mut(n_tx))
                {
                    for (c, (a, b)) in hr.iter_mut().zip(gr.iter_mut()).enumerate() {
                        *b = *a * inc[c % 2];
                        *a = *a * coh[c % 2];
                    }
                }
            }
        } else {
            out.h_incoherent = None;
            for h in out.h.iter_mut() {
                for row in h.as_mut_slice().chunks_exact_mut(n_tx) {
                    for (c, a) in row.iter_mut().enumerate() {
                        *a = *a * coh[c % 2];
                    }
                }
            }
        }
    }

    pub fn advance(&mut self) {
        self.fading.advance();
        for p in &mut self.depol {
            p.advance();
        }
    }

    pub fn doppler_hz(&self) -> T {
        self.fading.doppler_hz()
    }
}
