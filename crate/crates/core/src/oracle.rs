//! Direct waveform simulation used to cross-check the matrix pipeline.
//!
//! Nothing here touches the timing layouts or sampling matrices: the aggressor
//! stream is evaluated in continuous time at each victim sampling instant
//! (the owning symbol is found by flooring the absolute time), the result is
//! convolved with the taps, the victim CP is dropped and an O(n^2) unitary DFT
//! is applied.

use num_complex::Complex64;

use crate::basis::tx_symbol_eval;
use crate::error::{Error, Result};
use crate::matrices::StackedSymbolVector;
use crate::params::OfdmNumerology;

/// Aggressor stream whose symbol `offset` starts at `origin + offset * t_total`.
fn stream_sample(
    aggressor: &OfdmNumerology,
    symbols: &StackedSymbolVector,
    origin: f64,
    t: f64,
) -> Result<Complex64> {
    let rel = t - origin;
    let offset = (rel / aggressor.t_total).floor() as i64;
    let mut local = rel - offset as f64 * aggressor.t_total;
    let mut offset = offset;
    if local >= aggressor.t_total {
        local -= aggressor.t_total;
        offset += 1;
    }
    let local = local.max(0.0);
    let sym = symbols.get(offset).ok_or(Error::MissingSymbol(offset))?;
    tx_symbol_eval(aggressor, sym, local)
}

/// Unitary DFT by direct summation.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -std::f64::consts::TAU * m as f64 / n as f64))
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|r| {
            x.iter()
                .enumerate()
                .map(|(c, v)| v * twiddle[(r * c) % n])
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Linear convolution with `taps`, keeping the `n_fft` outputs after the CP.
pub fn convolve_drop_cp(
    samples: &[Complex64],
    taps: &[Complex64],
    n_cp: usize,
    n_fft: usize,
) -> Vec<Complex64> {
    (0..n_fft)
        .map(|r| {
            taps.iter()
                .enumerate()
                .filter_map(|(l, v)| (n_cp + r).checked_sub(l).map(|i| v * samples[i]))
                .sum()
        })
        .collect()
}

/// Aggressor (Wi-Fi) samples at the victim (LAA) instants. Aggressor symbol
/// `p+1` has its CP start `tau1` after the victim data part begins.
pub fn ue_samples(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau1: f64,
    symbols: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    // symbol offset 0 (= p) starts T_W before p+1
    let origin = laa.t_cp + tau1 - wifi.t_total;
    let cp = (0..laa.n_cp).map(|n| n as f64 * laa.t_cp / laa.n_cp as f64);
    let data = (0..laa.n_fft).map(|n| laa.t_cp + n as f64 * laa.t_data / laa.n_fft as f64);
    cp.chain(data)
        .map(|t| stream_sample(wifi, symbols, origin, t))
        .collect()
}

/// Aggressor (LAA) samples at the victim (Wi-Fi) instants. The victim symbol
/// starts `tau` after aggressor symbol `m` (offset 0).
pub fn ap_samples(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau: f64,
    symbols: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    let n_total = wifi.n_total();
    (0..n_total)
        .map(|n| {
            stream_sample(
                laa,
                symbols,
                0.0,
                tau + n as f64 * wifi.t_total / n_total as f64,
            )
        })
        .collect()
}

/// Frequency-domain LAA observation of the Wi-Fi stream.
pub fn ue_observation(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau1: f64,
    taps: &[Complex64],
    symbols: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    let s = ue_samples(laa, wifi, tau1, symbols)?;
    Ok(naive_dft(&convolve_drop_cp(&s, taps, laa.n_cp, laa.n_fft)))
}

/// Frequency-domain Wi-Fi observation of the LAA stream.
pub fn ap_observation(
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
    tau: f64,
    taps: &[Complex64],
    symbols: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    let s = ap_samples(laa, wifi, tau, symbols)?;
    Ok(naive_dft(&convolve_drop_cp(
        &s, taps, wifi.n_cp, wifi.n_fft,
    )))
}

/// Frequency-domain observation of an aligned single-numerology link.
pub fn homogeneous_observation(
    num: &OfdmNumerology,
    taps: &[Complex64],
    symbols: &StackedSymbolVector,
) -> Result<Vec<Complex64>> {
    let cp = (0..num.n_cp).map(|n| n as f64 * num.cp_period());
    let data = (0..num.n_fft).map(|n| num.t_cp + n as f64 * num.data_period());
    let s: Vec<Complex64> = cp
        .chain(data)
        .map(|t| stream_sample(num, symbols, 0.0, t))
        .collect::<Result<_>>()?;
    Ok(naive_dft(&convolve_drop_cp(&s, taps, num.n_cp, num.n_fft)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SymbolVector;

    #[test]
    fn naive_dft_of_impulse_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 8];
        x[0] = Complex64::new(1.0, 0.0);
        let y = naive_dft(&x);
        assert!(y
            .iter()
            .all(|z| (z - Complex64::new(8f64.sqrt().recip(), 0.0)).norm() < 1e-15));
    }

    #[test]
    fn convolution_reads_cp_tail() {
        let s: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let taps = [Complex64::new(1.0, 0.0), Complex64::new(10.0, 0.0)];
        let y = convolve_drop_cp(&s, &taps, 2, 4);
        assert_eq!(y[0], Complex64::new(2.0 + 10.0, 0.0));
        assert_eq!(y[3], Complex64::new(5.0 + 40.0, 0.0));
    }

    #[test]
    fn stream_walks_symbols() {
        let wifi = OfdmNumerology::wifi_default();
        let syms = StackedSymbolVector::new(vec![
            (0, SymbolVector::one_hot(0, 64, 0)),
            (1, SymbolVector::zeros(1, 64)),
        ])
        .unwrap();
        assert_eq!(
            stream_sample(&wifi, &syms, 0.0, 1e-6).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            stream_sample(&wifi, &syms, 0.0, 5e-6).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(matches!(
            stream_sample(&wifi, &syms, 0.0, 9e-6),
            Err(Error::MissingSymbol(2))
        ));
    }
}
