use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::params::SchemeParams;
use crate::fock::state::ln_pow;
use crate::scalar::{from_usize, to_f64, Real};
use crate::special::ln_factorials;

/// Signal ⊗ idler amplitudes `c[m][k] = ⟨m, k|ψ⟩`, both indices `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState<T> {
    n_max: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> TwoModeState<T> {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Amplitude for `m` signal and `k` idler photons.
    pub fn get(&self, m: usize, k: usize) -> Complex<T> {
        self.amps[m * self.dim() + k]
    }

    /// Row of idler amplitudes for fixed signal photon number `m`.
    pub fn row(&self, m: usize) -> &[Complex<T>] {
        &self.amps[m * self.dim()..(m + 1) * self.dim()]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Photon-number distribution of the idler before any detection.
    pub fn idler_marginal(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for m in 0..self.dim() {
            for (k, a) in self.row(m).iter().enumerate() {
                out[k] = out[k] + a.norm_sqr();
            }
        }
        out
    }
}

/// `ln |⟨m, k| exp(t a†b†)|α', 0⟩|` including the normalization prefactor
/// `e^{−|α|² t²/2} / cosh r`, for `m ≥ k`.
///
/// `exp(t a†b†)|α',0⟩ = Σ_k t^k/√k! · a†^k|α'⟩ ⊗ |k⟩` and
/// `⟨m|a†^k|α'⟩ = e^{−|α'|²/2} √m! α'^{m−k} / (m−k)!`.
pub(crate) struct OpaLogAmplitude<T> {
    ln_prefactor: T,
    ln_t: T,
    ln_alpha_prime: T,
    lf: Vec<T>,
}

impl<T: Real> OpaLogAmplitude<T> {
    pub(crate) fn new(alpha: T, r: T, n_max: usize) -> Self {
        let two = T::one() + T::one();
        let t = r.tanh();
        let alpha_prime = alpha / r.cosh();
        let ln_prefactor =
            -alpha * alpha * t * t / two - r.cosh().ln() - alpha_prime * alpha_prime / two;
        Self {
            ln_prefactor,
            ln_t: t.ln(),
            ln_alpha_prime: alpha_prime.ln(),
            lf: ln_factorials(n_max),
        }
    }

    #[inline]
    pub(crate) fn ln_abs(&self, m: usize, k: usize) -> T {
        debug_assert!(k <= m);
        let two = T::one() + T::one();
        self.ln_prefactor + ln_pow(self.ln_t, k) - self.lf[k] / two + self.lf[m] / two
            - self.lf[m - k]
            + ln_pow(self.ln_alpha_prime, m - k)
    }
}

/// Output of the amplifier for signal `|α⟩`, idler vacuum, truncated at `params.n_max`.
///
/// Built from the disentangled form `exp(tanh r a†b†)|α/cosh r, 0⟩` with the
/// exact prefactor, so `1 − Σ|c|²` is the probability lost to truncation; that
/// loss must not exceed `tail_tol` beyond rounding. The retained amplitudes are renormalized.
pub fn opa_two_mode_state<T: Real>(params: &SchemeParams<T>) -> Result<TwoModeState<T>> {
    opa_two_mode_state_rotated(params, T::zero())
}

/// As [`opa_two_mode_state`] with signal input `|α e^{iφ}⟩`; used to check that
/// results depend on the input phase only through rotation.
pub fn opa_two_mode_state_rotated<T: Real>(params: &SchemeParams<T>, phase: T) -> Result<TwoModeState<T>> {
    params.validate()?;
    let n_max = params.n_max;
    let dim = n_max + 1;
    let log_amp = OpaLogAmplitude::new(params.alpha, params.r, n_max);
    let mut amps = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    for m in 0..dim {
        for k in 0..=m {
            let ln_abs = log_amp.ln_abs(m, k);
            if ln_abs > T::neg_infinity() {
                amps[m * dim + k] = Complex::from_polar(ln_abs.exp(), from_usize::<T>(m - k) * phase);
            }
        }
    }
    let mut state = TwoModeState { n_max, amps };
    let kept = state.norm_sqr();
    let tail = T::one() - kept;
    // `kept` is a sum of dim² terms, resolved only to about dim·ε.
    let slack = from_usize::<T>(dim) * T::epsilon();
    if tail > params.tail_tol + slack {
        return Err(Error::TruncationInsufficient {
            tail: to_f64(tail),
            tol: to_f64(params.tail_tol),
            n_max,
        });
    }
    let scale = kept.sqrt().recip();
    state.amps.iter_mut().for_each(|a| *a = *a * scale);
    Ok(state)
}
