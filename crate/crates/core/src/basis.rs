//! CP-aware subcarrier basis and transmit OFDM symbols in continuous time.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::OfdmNumerology;

/// One OFDM symbol's message vector (one complex symbol per subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    pub symbol_index: i64,
    pub messages: Vec<Complex64>,
}

impl SymbolVector {
    pub fn new(symbol_index: i64, messages: Vec<Complex64>) -> Self {
        SymbolVector {
            symbol_index,
            messages,
        }
    }

    pub fn zeros(symbol_index: i64, n_fft: usize) -> Self {
        Self::new(symbol_index, vec![Complex64::new(0.0, 0.0); n_fft])
    }

    /// Unit message on subcarrier `k`, zero elsewhere.
    pub fn one_hot(symbol_index: i64, n_fft: usize, k: usize) -> Self {
        let mut s = Self::zeros(symbol_index, n_fft);
        s.messages[k] = Complex64::new(1.0, 0.0);
        s
    }
}

/// Subcarrier basis with cyclic prefix: a tone of frequency `f` whose first
/// `t1` seconds repeat the last `t1` seconds of the `t2`-long data part.
///
/// Defined on `[0, t1 + t2)`; the upper bound is excluded.
pub fn b_eval(t: f64, f: f64, t1: f64, t2: f64) -> Result<Complex64> {
    if !(t1 >= 0.0 && t2 > 0.0) {
        return Err(Error::Domain(format!(
            "basis needs t1 >= 0 and t2 > 0, got t1={t1:e}, t2={t2:e}"
        )));
    }
    if !(t >= 0.0 && t < t1 + t2) {
        return Err(Error::Domain(format!("t={t:e} outside [0, {:e})", t1 + t2)));
    }
    Ok(b_unchecked(t, f, t1, t2))
}

#[inline]
pub(crate) fn b_unchecked(t: f64, f: f64, t1: f64, t2: f64) -> Complex64 {
    let arg = if t < t1 { t + t2 - t1 } else { t - t1 };
    Complex64::from_polar(1.0, TAU * f * arg)
}

/// Continuous-time transmit symbol (CP included) evaluated at `t`.
pub fn tx_symbol_eval(num: &OfdmNumerology, sym: &SymbolVector, t: f64) -> Result<Complex64> {
    if sym.messages.len() != num.n_fft {
        return Err(Error::Dimension(format!(
            "symbol has {} messages, numerology '{}' has {} subcarriers",
            sym.messages.len(),
            num.label,
            num.n_fft
        )));
    }
    if !(t >= 0.0 && t < num.t_total) {
        return Err(Error::Domain(format!(
            "t={t:e} outside symbol [0, {:e})",
            num.t_total
        )));
    }
    Ok(sym
        .messages
        .iter()
        .enumerate()
        .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
        .map(|(k, a)| a * b_unchecked(t, num.frequency_unchecked(k), num.t_cp, num.t_data))
        .sum())
}
