//! Closed-loop spatial multiplexing link abstraction: DFT codebook, rank and
//! precoder selection, linear MMSE post-equalization SINR, and the truncated
//! Shannon SINR-to-rate mapping.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::linalg::CMat;
use crate::num::Real;

/// Thermal noise density, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Receiver noise power over `bandwidth` Hz, dBm.
pub fn noise_power_dbm<T: Real>(bandwidth: T, noise_figure_db: T) -> T {
    T::lit(THERMAL_NOISE_DBM_HZ) + T::lit(10.0) * bandwidth.log10() + noise_figure_db
}

/// Precoders grouped by rank: `per_rank[r - 1]` holds the rank-`r` entries.
#[derive(Debug, Clone)]
pub struct Codebook<T> {
    n_tx: usize,
    /// Square bases; the rank-`r` entry `k` is the first `r` columns of `bases[k]`.
    bases: Vec<CMat<T>>,
    per_rank: Vec<Vec<CMat<T>>>,
}

impl<T: Real> Codebook<T> {
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn max_rank(&self) -> usize {
        self.per_rank.len()
    }

    /// Rank-`rank` entries.
    pub fn rank(&self, rank: usize) -> &[CMat<T>] {
        &self.per_rank[rank - 1]
    }

    pub fn precoder(&self, rank: usize, index: usize) -> &CMat<T> {
        &self.per_rank[rank - 1][index]
    }
}

/// DFT-based codebook. Entry `k` of rank `r` is the first `r` columns of
/// `diag(w_k^i) · F`, with `F` the unitary `n_tx`-point DFT and
/// `w_k = exp(j2πk / 4n_tx)`.
pub fn build_codebook<T: Real>(n_tx: usize) -> Result<Codebook<T>> {
    let one = Complex::new(T::one(), T::zero());
    match n_tx {
        1 => {
            let base = CMat::from_fn(1, 1, |_, _| one);
            Ok(Codebook {
                n_tx,
                per_rank: vec![vec![base.clone()]],
                bases: vec![base],
            })
        }
        2 | 4 => {
            let n_entries = 4 * n_tx;
            let scale = T::one() / T::from_count(n_tx).sqrt();
            let bases: Vec<CMat<T>> = (0..n_entries)
                .map(|k| {
                    let rot = T::TAU() * T::from_count(k) / T::from_count(n_entries);
                    CMat::from_fn(n_tx, n_tx, |i, j| {
                        let dft = T::TAU() * T::from_count(i * j) / T::from_count(n_tx);
                        Complex::from_polar(scale, rot * T::from_count(i) + dft)
                    })
                })
                .collect();
            let per_rank = (1..=n_tx)
                .map(|r| bases.iter().map(|u| u.leading_columns(r)).collect())
                .collect();
            Ok(Codebook {
                n_tx,
                bases,
                per_rank,
            })
        }
        _ => Err(SimError::InvalidArgument(format!(
            "unsupported n_tx {n_tx}; expected 1, 2 or 4"
        ))),
    }
}

/// Truncated Shannon mapping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMapping<T> {
    /// Attenuation η applied to log2(1 + SINR).
    pub efficiency: T,
    /// Spectral efficiency ceiling, bit/s/Hz.
    pub se_cap: T,
}

impl<T: Real> Default for RateMapping<T> {
    fn default() -> Self {
        RateMapping {
            efficiency: T::lit(0.6),
            se_cap: T::lit(7.4),
        }
    }
}

/// Bits carried by one RB for one TTI at linear `sinr`.
pub fn sinr_to_rate<T: Real>(sinr: T, rb_bandwidth: T, tti: T, mapping: &RateMapping<T>) -> T {
    let sinr = if sinr > T::zero() { sinr } else { T::zero() };
    let se = (mapping.efficiency * (T::one() + sinr).log2()).min(mapping.se_cap);
    tti * rb_bandwidth * se
}

/// An interfering transmission seen by the receiver.
#[derive(Debug, Clone, Copy)]
pub struct Interferer<'a, T> {
    pub h: &'a CMat<T>,
    pub precoder: &'a CMat<T>,
    /// Total power on the RB, split equally across the precoder's layers.
    pub power: T,
}

/// `Σ_l log2(1 + SINR_l)`.
pub fn layer_capacity<T: Real>(sinrs: &[T]) -> T {
    sinrs
        .iter()
        .fold(T::zero(), |acc, s| acc + (T::one() + *s).log2())
}

/// Largest layer count handled on the stack.
const MAX_LAYERS: usize = 4;

/// `SINR_l = 1/[M⁻¹]_ll − 1` for `M = I + p·A_r`, with `A_r` the leading
/// `r × r` block of `a` (`r ≤ 4`). A singular `M` yields zeros.
fn mmse_leading<T: Real>(
    a: impl Fn(usize, usize) -> Complex<T>,
    r: usize,
    per_layer_power: T,
) -> [T; MAX_LAYERS] {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = [T::zero(); MAX_LAYERS];
    // I + pA is Hermitian positive definite, so an unpivoted LDLᴴ is stable
    // and diag(M⁻¹)_l = Σ_{k≥l} |(L⁻¹)_kl|² / d_k.
    let mut l = [[zero; MAX_LAYERS]; MAX_LAYERS];
    let mut d = [T::zero(); MAX_LAYERS];
    for j in 0..r {
        let mut dj = T::one() + a(j, j).re * per_layer_power;
        for k in 0..j {
            dj = dj - l[j][k].norm_sqr() * d[k];
        }
        if !(dj.is_finite() && dj > T::min_positive_value()) {
            return out;
        }
        d[j] = dj;
        for i in j + 1..r {
            let mut acc = a(i, j).scale(per_layer_power);
            for k in 0..j {
                acc = acc - l[i][k] * l[j][k].conj().scale(d[k]);
            }
            l[i][j] = acc.unscale(dj);
        }
    }
    let mut inv_diag = [T::zero(); MAX_LAYERS];
    for col in 0..r {
        // Column `col` of the unit lower-triangular L⁻¹.
        let mut x = [zero; MAX_LAYERS];
        x[col] = Complex::new(T::one(), T::zero());
        let mut acc = T::one() / d[col];
        for i in col + 1..r {
            let mut v = zero;
            for k in col..i {
                v = v - l[i][k] * x[k];
            }
            x[i] = v;
            acc = acc + v.norm_sqr() / d[i];
        }
        inv_diag[col] = acc;
    }
    for (o, inv) in out.iter_mut().zip(&inv_diag).take(r) {
        let s = T::one() / *inv - T::one();
        *o = if s.is_finite() && s > T::zero() {
            s
        } else if s.is_infinite() && s > T::zero() {
            T::max_value()
        } else {
            T::zero()
        };
    }
    out
}

/// Per-layer SINR from `M = I + (p/r)·A`, `SINR_l = 1/[M⁻¹]_ll − 1`.
fn mmse_from_gram<T: Real>(a: &CMat<T>, per_layer_power: T) -> Vec<T> {
    let r = a.rows();
    if r <= MAX_LAYERS {
        return mmse_leading(|i, j| a[(i, j)], r, per_layer_power)[..r].to_vec();
    }
    let mut m = a.scale(per_layer_power);
    m.add_diag(T::one());
    match m.inverse() {
        Some(inv) => (0..r)
            .map(|l| {
                let s = T::one() / inv[(l, l)].re - T::one();
                if s.is_finite() && s > T::zero() {
                    s
                } else {
                    T::zero()
                }
            })
            .collect(),
        None => vec![T::zero(); r],
    }
}

/// Post-MMSE SINR of each layer of `precoder` over `h_serv`, against the
/// interference covariance of `interferers` plus white `noise_power`.
/// Singular covariances are regularized, never reported as errors.
pub fn compute_sinr<T: Real>(
    h_serv: &CMat<T>,
    precoder: &CMat<T>,
    tx_power: T,
    interferers: &[Interferer<'_, T>],
    noise_power: T,
) -> Result<Vec<T>> {
    let n_rx = h_serv.rows();
    let g = h_serv.mul(precoder)?;
    let rank = precoder.cols();
    let mut cov = CMat::zeros(n_rx, n_rx);
    for i in interferers {
        if i.h.rows() != n_rx {
            return Err(SimError::Dimension(format!(
                "interferer has {} receive rows, serving channel {}",
                i.h.rows(),
                n_rx
            )));
        }
        let gi = i.h.mul(i.precoder)?;
        let layers = T::from_count(gi.cols().max(1));
        cov.add_scaled(&gi.gram_outer(), i.power / layers)?;
    }
    cov.add_diag(noise_power);
    let inv = match cov.inverse() {
        Some(inv) => inv,
        None => {
            let floor = (cov.trace_re() + g.frobenius_sqr() * tx_power) * T::epsilon()
                + T::min_positive_value();
            let mut reg = cov.clone();
            reg.add_diag(floor.max(noise_power));
            reg.inverse()
                .ok_or_else(|| SimError::InvalidArgument("covariance not invertible".into()))?
        }
    };
    let a = g.adjoint().mul(&inv)?.mul(&g)?;
    let per_layer = tx_power / T::from_count(rank);
    Ok(mmse_from_gram(&a, per_layer))
}

/// Whitened Gram matrix `Hᴴ · diag(1/n) · H`.
fn whitened_gram<T: Real>(h: &CMat<T>, npi: &[T]) -> CMat<T> {
    let n_tx = h.cols();
    let mut q = CMat::zeros(n_tx, n_tx);
    for i in 0..n_tx {
        for j in i..n_tx {
            let mut acc = Complex::new(T::zero(), T::zero());
            for rx in 0..h.rows() {
                acc = acc + (h[(rx, i)].conj() * h[(rx, j)]).unscale(npi[rx]);
            }
            q[(i, j)] = acc;
            q[(j, i)] = acc.conj();
        }
    }
    q
}

/// Per-layer MMSE SINR when interference is white per receive antenna.
pub fn sinr_diagonal_interference<T: Real>(
    h: &CMat<T>,
    precoder: &CMat<T>,
    tx_power: T,
    noise_plus_interference: &[T],
) -> Result<Vec<T>> {
    if noise_plus_interference.len() != h.rows() {
        return Err(SimError::Dimension(
            "one noise value per receive antenna required".into(),
        ));
    }
    let rank = precoder.cols();
    if h.cols() != precoder.rows() {
        return Err(SimError::Dimension(format!(
            "channel {}x{} with precoder {}x{}",
            h.rows(),
            h.cols(),
            precoder.rows(),
            rank
        )));
    }
    let per_layer = tx_power / T::from_count(rank);
    if rank > MAX_LAYERS {
        let q = whitened_gram(h, noise_plus_interference);
        let a = precoder.adjoint().mul(&q)?.mul(precoder)?;
        return Ok(mmse_from_gram(&a, per_layer));
    }
    // Pᴴ Q P = Σ_rx gᴴ g / σ²_rx with g the rx-th row of H P.
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = [[zero; MAX_LAYERS]; MAX_LAYERS];
    for (rx, npi) in noise_plus_interference.iter().enumerate() {
        let mut g = [zero; MAX_LAYERS];
        for (l, gl) in g.iter_mut().enumerate().take(rank) {
            for tx in 0..h.cols() {
                *gl = *gl + h[(rx, tx)] * precoder[(tx, l)];
            }
        }
        for i in 0..rank {
            for j in i..rank {
                a[i][j] = a[i][j] + (g[i].conj() * g[j]).unscale(*npi);
            }
        }
    }
    let sinr = mmse_leading(
        |i, j| if i <= j { a[i][j] } else { a[j][i].conj() },
        rank,
        per_layer,
    );
    Ok(sinr[..rank].to_vec())
}

/// `Uᴴ Q U` for square `U`, `Q` of at most `MAX_LAYERS` rows, on the stack.
fn sandwich<T: Real>(u: &CMat<T>, q: &CMat<T>) -> [[Complex<T>; MAX_LAYERS]; MAX_LAYERS] {
    let n = u.rows();
    debug_assert!(n <= MAX_LAYERS && q.rows() == n);
    let zero = Complex::new(T::zero(), T::zero());
    let mut qu = [[zero; MAX_LAYERS]; MAX_LAYERS];
    for i in 0..n {
        for j in 0..n {
            let mut acc = zero;
            for k in 0..n {
                acc = acc + q[(i, k)] * u[(k, j)];
            }
            qu[i][j] = acc;
        }
    }
    let mut b = [[zero; MAX_LAYERS]; MAX_LAYERS];
    for i in 0..n {
        for j in i..n {
            let mut acc = zero;
            for k in 0..n {
                acc = acc + u[(k, i)].conj() * qu[k][j];
            }
            b[i][j] = acc;
            b[j][i] = acc.conj();
        }
    }
    b
}

/// Rank and codebook index picked by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecoderChoice {
    pub rank: usize,
    pub index: usize,
}

/// Choose the (rank, precoder) maximizing the mean over `channels` of the
/// summed layer capacity, with white per-antenna noise plus interference.
/// Ties go to the lower rank, then the lower index.
pub fn select_precoder_wideband<T: Real>(
    channels: &[&CMat<T>],
    codebook: &Codebook<T>,
    noise_plus_interference: &[&[T]],
    tx_power: T,
) -> Result<PrecoderChoice> {
    if channels.len() != noise_plus_interference.len() {
        return Err(SimError::Dimension(
            "one noise vector per channel required".into(),
        ));
    }
    let mut grams = Vec::with_capacity(channels.len());
    for (h, npi) in channels.iter().zip(noise_plus_interference) {
        if h.cols() != codebook.n_tx() || npi.len() != h.rows() {
            return Err(SimError::Dimension(format!(
                "channel {}x{} with {} noise values, codebook for {} ports",
                h.rows(),
                h.cols(),
                npi.len(),
                codebook.n_tx()
            )));
        }
        if !h.is_finite() {
            return Err(SimError::InvalidArgument(
                "channel has non-finite entries".into(),
            ));
        }
        grams.push(whitened_gram(h, npi));
    }
    let max_rank = codebook
        .max_rank()
        .min(channels.first().map_or(1, |h| h.rows()))
        .min(MAX_LAYERS);
    // Rank-r precoders are leading columns of a square base, so
    // Pᴴ Q P is the leading r × r block of Uᴴ Q U.
    let n_bases = codebook.bases.len();
    let mut caps = vec![T::zero(); max_rank * n_bases];
    for (index, u) in codebook.bases.iter().enumerate() {
        for q in &grams {
            let b = sandwich(u, q);
            for rank in 1..=max_rank {
                let s = mmse_leading(|i, j| b[i][j], rank, tx_power / T::from_count(rank));
                caps[(rank - 1) * n_bases + index] =
                    caps[(rank - 1) * n_bases + index] + layer_capacity(&s[..rank]);
            }
        }
    }
    let mut best = PrecoderChoice { rank: 1, index: 0 };
    let mut best_cap = -T::one();
    for rank in 1..=max_rank {
        for index in 0..n_bases {
            let cap = caps[(rank - 1) * n_bases + index];
            if cap > best_cap {
                best_cap = cap;
                best = PrecoderChoice { rank, index };
            }
        }
    }
    Ok(best)
}

/// Single-RB precoder selection.
pub fn select_precoder<T: Real>(
    h: &CMat<T>,
    codebook: &Codebook<T>,
    noise_plus_interference: &[T],
    tx_power: T,
) -> Result<PrecoderChoice> {
    select_precoder_wideband(&[h], codebook, &[noise_plus_interference], tx_power)
}

/// Link report of one UE for one TTI.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport<T> {
    pub choice: PrecoderChoice,
    /// Per-RB, per-layer SINR (linear).
    pub sinr: Vec<Vec<T>>,
    /// Per-RB achievable bits per TTI.
    pub rate_bits: Vec<T>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn unitary_err(p: &CMat<f64>) -> f64 {
        let mut g = p.adjoint().mul(p).unwrap();
        g.add_scaled(&CMat::identity(p.cols()), -1.0).unwrap();
        g.frobenius_sqr().sqrt()
    }

    #[test]
    fn noise_floor_for_ten_mhz() {
        assert!((noise_power_dbm(10e6f64, 9.0) + 95.0).abs() < 1e-9);
        assert!((noise_power_dbm(180e3f64, 9.0) + 112.447).abs() < 1e-3);
    }

    #[test]
    fn codebook_shapes_and_orthonormality() {
        let one = build_codebook::<f64>(1).unwrap();
        assert_eq!(one.max_rank(), 1);
        assert_eq!(one.rank(1).len(), 1);
        assert_eq!(one.precoder(1, 0)[(0, 0)], c(1.0));

        for n in [2, 4] {
            let cb = build_codebook::<f64>(n).unwrap();
            assert_eq!(cb.max_rank(), n);
            for r in 1..=n {
                assert!(cb.rank(r).len() >= 8 || n == 2);
                for p in cb.rank(r) {
                    assert_eq!((p.rows(), p.cols()), (n, r));
                    assert!(unitary_err(p) < 1e-12);
                }
            }
        }
        let cb4 = build_codebook::<f64>(4).unwrap();
        assert!(cb4.rank(1).len() >= 8);
        for p in cb4.rank(4) {
            assert!((p.determinant().unwrap().norm() - 1.0).abs() < 1e-12);
        }
        assert!(build_codebook::<f64>(3).is_err());
        assert!(build_codebook::<f64>(8).is_err());
    }

    #[test]
    fn codebook_closed_under_alternating_port_sign() {
        let cb = build_codebook::<f64>(4).unwrap();
        let d = CMat::diag(&[1.0, -1.0, 1.0, -1.0]);
        for r in 1..=4 {
            let entries = cb.rank(r);
            for p in entries {
                let flipped = d.mul(p).unwrap();
                let found = entries.iter().any(|q| {
                    let mut e = q.clone();
                    e.add_scaled(&flipped, -1.0).unwrap();
                    e.frobenius_sqr() < 1e-20
                });
                assert!(found, "rank {r}");
            }
        }
    }

    #[test]
    fn rate_mapping_points() {
        let m = RateMapping::<f64>::default();
        assert_eq!(sinr_to_rate(0.0, 180e3, 1e-3, &m), 0.0);
        assert!((sinr_to_rate(1.0f64, 180e3, 1e-3, &m) - 108.0).abs() < 1e-9);
        assert!((sinr_to_rate(1e30f64, 180e3, 1e-3, &m) - 1e-3 * 180e3 * 7.4).abs() < 1e-9);
        assert!((sinr_to_rate(f64::MAX, 180e3, 1e-3, &m) - 1332.0).abs() < 1e-9);
        assert_eq!(sinr_to_rate(-1.0, 180e3, 1e-3, &m), 0.0);
        assert!((sinr_to_rate(1.0f32, 180e3, 1e-3, &RateMapping::default()) - 108.0).abs() < 1e-3);
    }

    #[test]
    fn scalar_sinr_closed_forms() {
        let h = CMat::from_fn(1, 1, |_, _| Complex::new(0.6, 0.8));
        let p = CMat::identity(1);
        let s = compute_sinr(&h, &p, 2.0, &[], 0.5).unwrap();
        assert!((s[0] - 4.0f64).abs() < 1e-12);

        let hi = CMat::from_fn(1, 1, |_, _| c(1.0));
        let s = compute_sinr(
            &CMat::identity(1),
            &p,
            1.0,
            &[Interferer {
                h: &hi,
                precoder: &p,
                power: 0.5,
            }],
            0.5,
        )
        .unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_interferer_leaves_layer_one_alone() {
        // Analytic 2×2 MMSE: with diagonal H, identity precoder and interference
        // confined to antenna 2, layer 1 sees only noise: SINR = (p/2)|h1|²/n.
        let h = CMat::diag(&[1.5, 0.7]);
        let p = CMat::identity(2);
        let hi = CMat::from_fn(2, 1, |r, _| if r == 1 { c(2.0) } else { c(0.0) });
        let pi = CMat::identity(1);
        let n = 0.1;
        let clean = compute_sinr(&h, &p, 2.0, &[], n).unwrap();
        let dirty = compute_sinr(
            &h,
            &p,
            2.0,
            &[Interferer {
                h: &hi,
                precoder: &pi,
                power: 3.0,
            }],
            n,
        )
        .unwrap();
        let oracle = 1.0 * 1.5f64.powi(2) / n;
        assert!((clean[0] - oracle).abs() < 1e-9);
        assert!((dirty[0] - oracle).abs() < 1e-9);
        assert!(dirty[1] < clean[1]);
        let oracle2 = 1.0 * 0.49 / (n + 3.0 * 4.0);
        assert!((dirty[1] - oracle2).abs() < 1e-9);
    }

    #[test]
    fn zero_noise_without_interference_is_regularized() {
        let s = compute_sinr(&CMat::identity(2), &CMat::identity(2), 1.0, &[], 0.0).unwrap();
        assert!(s.iter().all(|v| *v > 1e6));
        let z = compute_sinr(&CMat::zeros(2, 2), &CMat::identity(2), 1.0, &[], 0.0).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn sinr_dimension_errors() {
        let h = CMat::<f64>::identity(2);
        assert!(compute_sinr(&h, &CMat::identity(3), 1.0, &[], 1.0).is_err());
        let hi = CMat::identity(3);
        let pi = CMat::identity(3);
        assert!(compute_sinr(
            &h,
            &CMat::identity(2),
            1.0,
            &[Interferer {
                h: &hi,
                precoder: &pi,
                power: 1.0
            }],
            1.0
        )
        .is_err());
    }

    #[test]
    fn diagonal_route_agrees_with_full_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = CMat::from_fn(4, 4, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let cb = build_codebook::<f64>(4).unwrap();
        let p = cb.precoder(2, 3);
        let n = 0.3;
        let a = compute_sinr(&h, p, 1.7, &[], n).unwrap();
        let b = sinr_diagonal_interference(&h, p, 1.7, &[n; 4]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn zero_channel_picks_rank_one_index_zero() {
        let cb = build_codebook::<f64>(4).unwrap();
        let ch = select_precoder(&CMat::zeros(4, 4), &cb, &[1.0; 4], 1.0).unwrap();
        assert_eq!(ch, PrecoderChoice { rank: 1, index: 0 });
    }

    /// Brute-force capacity of a given choice, via the full-covariance route.
    fn capacity(h: &CMat<f64>, cb: &Codebook<f64>, ch: PrecoderChoice, n: f64, p: f64) -> f64 {
        layer_capacity(&compute_sinr(h, cb.precoder(ch.rank, ch.index), p, &[], n).unwrap())
    }

    #[test]
    fn high_snr_identity_picks_full_rank() {
        let cb = build_codebook::<f64>(4).unwrap();
        let h = CMat::identity(4);
        let ch = select_precoder(&h, &cb, &[1e-6; 4], 1.0).unwrap();
        assert_eq!(ch.rank, 4);
        let best_lower = (1..4)
            .flat_map(|r| (0..cb.rank(r).len()).map(move |i| PrecoderChoice { rank: r, index: i }))
            .map(|c| capacity(&h, &cb, c, 1e-6, 1.0))
            .fold(0.0, f64::max);
        assert!(capacity(&h, &cb, ch, 1e-6, 1.0) > best_lower);
    }

    #[test]
    fn dominant_mode_at_low_snr_picks_rank_one() {
        let cb = build_codebook::<f64>(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Rank-one channel plus a faint perturbation.
        let u: Vec<Complex<f64>> = (0..4).map(|_| Complex::new(rng.gen(), rng.gen())).collect();
        let v: Vec<Complex<f64>> = (0..4).map(|_| Complex::new(rng.gen(), rng.gen())).collect();
        let h = CMat::from_fn(4, 4, |r, c| {
            u[r] * v[c].conj() + Complex::new(1e-3 * rng.gen::<f64>(), 0.0)
        });
        let n = 10.0;
        let ch = select_precoder(&h, &cb, &[n; 4], 1.0).unwrap();
        assert_eq!(ch.rank, 1);
        let brute = (1..=4)
            .flat_map(|r| (0..cb.rank(r).len()).map(move |i| PrecoderChoice { rank: r, index: i }))
            .max_by(|a, b| {
                capacity(&h, &cb, *a, n, 1.0)
                    .partial_cmp(&capacity(&h, &cb, *b, n, 1.0))
                    .unwrap()
            })
            .unwrap();
        assert!((capacity(&h, &cb, ch, n, 1.0) - capacity(&h, &cb, brute, n, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn selection_dimension_errors() {
        let cb = build_codebook::<f64>(4).unwrap();
        assert!(select_precoder(&CMat::zeros(4, 2), &cb, &[1.0; 4], 1.0).is_err());
        assert!(select_precoder(&CMat::zeros(4, 4), &cb, &[1.0; 3], 1.0).is_err());
    }
}
