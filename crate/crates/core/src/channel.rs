//! Multipath taps, the CP-removing convolution matrix, DFT and the composed
//! frequency-domain effective channel `F * H_time * K`.
//!
//! The DFT is unitary. `K` carries unit-modulus entries, so for a synchronous
//! single-numerology link the diagonal of the effective channel equals
//! `sqrt(n_fft)` times the channel frequency response.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::matrices::{assemble_k_ap_ue, ColumnGroup, SamplingMatrix};
use crate::params::OfdmNumerology;
use crate::timing::synchronous_layout;

pub const DEFAULT_N_TAP: usize = 16;
pub const DEFAULT_DECAY: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    /// Impulse response, first tap first.
    pub taps: Vec<Complex64>,
    pub power_profile: Vec<f64>,
}

impl MultipathChannel {
    /// Single unit tap: the effective channel reduces to CP removal.
    pub fn identity() -> Self {
        MultipathChannel {
            taps: vec![Complex64::new(1.0, 0.0)],
            power_profile: vec![1.0],
        }
    }

    /// Fixed taps; the profile is their normalized power (uniform if all zero).
    pub fn from_taps(taps: Vec<Complex64>) -> Self {
        let total: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        let power_profile = if total > 0.0 {
            taps.iter().map(|t| t.norm_sqr() / total).collect()
        } else {
            vec![1.0 / taps.len() as f64; taps.len()]
        };
        MultipathChannel {
            taps,
            power_profile,
        }
    }

    pub fn n_tap(&self) -> usize {
        self.taps.len()
    }

    /// Frequency response at DFT bin `k` of an `n`-point transform.
    pub fn frequency_response(&self, k: usize, n: usize) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(l, v)| {
                v * Complex64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * (k * l % n) as f64 / n as f64,
                )
            })
            .sum()
    }
}

/// Exponentially decaying power-delay profile normalized to unit sum.
pub fn exp_power_profile(n_tap: usize, decay: f64) -> Result<Vec<f64>> {
    if n_tap == 0 {
        return Err(Error::Domain("n_tap must be at least 1".into()));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::Domain(format!("decay {decay} outside (0, 1]")));
    }
    let raw: Vec<f64> = (0..n_tap).map(|k| decay.powi(k as i32)).collect();
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / sum).collect())
}

/// Independent circularly-symmetric complex Gaussian taps with variances
/// given by `profile`.
pub fn draw_channel_with<R: Rng + ?Sized>(profile: &[f64], rng: &mut R) -> MultipathChannel {
    let taps = profile
        .iter()
        .map(|&p| {
            let s = (p / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect();
    MultipathChannel {
        taps,
        power_profile: profile.to_vec(),
    }
}

pub fn draw_channel(profile: &[f64], rng_seed: u64) -> MultipathChannel {
    draw_channel_with(profile, &mut ChaCha8Rng::seed_from_u64(rng_seed))
}

fn check_memory(ch: &MultipathChannel, victim: &OfdmNumerology) -> Result<()> {
    if ch.n_tap() == 0 {
        return Err(Error::InvalidModel("channel has no taps".into()));
    }
    if ch.n_tap() > victim.n_cp + 1 {
        return Err(Error::InvalidModel(format!(
            "{} taps exceed CP of {} samples + 1 for '{}'",
            ch.n_tap(),
            victim.n_cp,
            victim.label
        )));
    }
    Ok(())
}

/// Banded `n_fft x n_total` matrix: linear convolution followed by CP removal.
/// Row `r` holds `taps[N-1], ..., taps[0]` ending at column `n_cp + r`.
pub fn build_time_channel(
    ch: &MultipathChannel,
    victim: &OfdmNumerology,
) -> Result<DMatrix<Complex64>> {
    check_memory(ch, victim)?;
    let mut h = DMatrix::zeros(victim.n_fft, victim.n_total());
    for r in 0..victim.n_fft {
        for (l, v) in ch.taps.iter().enumerate() {
            h[(r, victim.n_cp + r - l)] = *v;
        }
    }
    Ok(h)
}

/// Unitary DFT matrix, entry `(r, c) = exp(-j 2 pi r c / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |r, c| {
        Complex64::from_polar(
            scale,
            -std::f64::consts::TAU * ((r * c) % n) as f64 / n as f64,
        )
    })
}

/// Applies the unitary DFT to every column of `m` in place.
pub fn fft_columns(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return;
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    // column-major storage: each column is one contiguous FFT frame
    fft.process(m.as_mut_slice());
    let scale = 1.0 / (n as f64).sqrt();
    m.as_mut_slice().iter_mut().for_each(|z| *z *= scale);
}

/// Frequency-domain channel seen by `victim` for the aggressor symbols in `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: DMatrix<Complex64>,
    pub victim: OfdmNumerology,
    pub aggressor: OfdmNumerology,
    pub block_map: Vec<ColumnGroup>,
}

impl EffectiveChannel {
    /// Victim observation `H * a` for stacked aggressor symbols.
    pub fn observe(&self, stacked: &[Complex64]) -> Result<Vec<Complex64>> {
        if stacked.len() != self.matrix.ncols() {
            return Err(Error::Dimension(format!(
                "{} stacked messages for {} columns",
                stacked.len(),
                self.matrix.ncols()
            )));
        }
        let a = nalgebra::DVector::from_column_slice(stacked);
        Ok((&self.matrix * a).as_slice().to_vec())
    }
}

/// `H_time * K` using the band structure and the row blocks of `K`.
pub fn time_domain_product(
    ch: &MultipathChannel,
    k: &SamplingMatrix,
    victim: &OfdmNumerology,
) -> Result<DMatrix<Complex64>> {
    check_memory(ch, victim)?;
    if k.rows() != victim.n_total() {
        return Err(Error::Dimension(format!(
            "K has {} rows, victim '{}' expects {}",
            k.rows(),
            victim.label,
            victim.n_total()
        )));
    }
    let n_cp = victim.n_cp;
    let n_fft = victim.n_fft;
    let mut y = DMatrix::zeros(n_fft, k.cols());
    for block in &k.row_blocks {
        let cols = k.block_map[block.group].cols.clone();
        for c in cols {
            let src = k.data.column(c);
            let mut dst = y.column_mut(c);
            for i in block.rows.clone() {
                let x = src[i];
                for (l, v) in ch.taps.iter().enumerate() {
                    // output row r reads input i = n_cp + r - l
                    let r = i + l;
                    if r >= n_cp && r - n_cp < n_fft {
                        dst[r - n_cp] += v * x;
                    }
                }
            }
        }
    }
    Ok(y)
}

fn compose(
    ch: &MultipathChannel,
    k: &SamplingMatrix,
    victim: &OfdmNumerology,
    aggressor: &OfdmNumerology,
) -> Result<EffectiveChannel> {
    let mut m = time_domain_product(ch, k, victim)?;
    fft_columns(&mut m);
    Ok(EffectiveChannel {
        matrix: m,
        victim: victim.clone(),
        aggressor: aggressor.clone(),
        block_map: k.block_map.clone(),
    })
}

/// Reference composition with dense `F`, dense `H_time` and dense `K`.
pub fn compose_dense(
    ch: &MultipathChannel,
    k: &SamplingMatrix,
    victim: &OfdmNumerology,
) -> Result<DMatrix<Complex64>> {
    let h = build_time_channel(ch, victim)?;
    if k.rows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "K has {} rows, channel matrix has {} columns",
            k.rows(),
            h.ncols()
        )));
    }
    Ok(dft_matrix(victim.n_fft) * (h * &k.data))
}

/// Effective channel from a Wi-Fi AP to an LAA UE.
pub fn effective_channel_ap_ue(
    ch: &MultipathChannel,
    k: &SamplingMatrix,
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
) -> Result<EffectiveChannel> {
    if k.block_map.iter().any(|g| g.cols.len() != wifi.n_fft) {
        return Err(Error::Dimension(
            "K column groups do not match the aggressor FFT size".into(),
        ));
    }
    compose(ch, k, laa, wifi)
}

/// Effective channel from an LAA eNB to a Wi-Fi AP.
pub fn effective_channel_enb_ap(
    ch: &MultipathChannel,
    k: &SamplingMatrix,
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
) -> Result<EffectiveChannel> {
    if k.block_map.iter().any(|g| g.cols.len() != laa.n_fft) {
        return Err(Error::Dimension(
            "K column groups do not match the aggressor FFT size".into(),
        ));
    }
    compose(ch, k, wifi, laa)
}

/// Effective channel between two synchronized nodes sharing `num`.
pub fn homogeneous_effective_channel(
    ch: &MultipathChannel,
    num: &OfdmNumerology,
) -> Result<EffectiveChannel> {
    let k = assemble_k_ap_ue(&synchronous_layout(num), num, num)?;
    compose(ch, &k, num, num)
}

/// Fraction of squared Frobenius norm lying off the main diagonal.
pub fn off_diagonal_fraction(m: &DMatrix<Complex64>) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let e = m[(r, c)].norm_sqr();
            if r == c {
                diag += e;
            } else {
                off += e;
            }
        }
    }
    if diag + off == 0.0 {
        0.0
    } else {
        off / (diag + off)
    }
}
