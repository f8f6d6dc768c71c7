use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, log_sum_exp, to_f64, Real};
use crate::special::ln_factorials;

/// Single-mode state vector in the truncated Fock basis, `amps[k] = ⟨k|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    pub amps: Vec<Complex<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn vacuum(n_max: usize) -> Self {
        Self::number(0, n_max)
    }

    /// Fock state `|n⟩` in a basis of size `max(n, n_max) + 1`.
    pub fn number(n: usize, n_max: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); n_max.max(n) + 1];
        amps[n] = Complex::new(T::one(), T::zero());
        Self { amps }
    }

    /// Largest photon number represented.
    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability mass at photon numbers above `n`.
    pub fn mass_above(&self, n: usize) -> T {
        self.amps.iter().skip(n + 1).map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a = *a / norm);
        self
    }
}

/// `ln |z|^k` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn ln_pow<T: Real>(ln_base: T, k: usize) -> T {
    if k == 0 {
        T::zero()
    } else {
        from_usize::<T>(k) * ln_base
    }
}

/// Coherent state `|α⟩` for real `alpha` truncated at `n_max`.
///
/// Amplitudes `e^{−α²/2} α^k / √k!` are formed in the log domain. Fails if the
/// Poisson mass above `n_max` exceeds `tail_tol`; otherwise the result is
/// renormalized over the retained entries.
pub fn coherent_state<T: Real>(alpha: T, n_max: usize, tail_tol: T) -> Result<FockVector<T>> {
    coherent_state_complex(Complex::new(alpha, T::zero()), n_max, tail_tol)
}

/// Complex-amplitude variant of [`coherent_state`].
pub fn coherent_state_complex<T: Real>(
    alpha: Complex<T>,
    n_max: usize,
    tail_tol: T,
) -> Result<FockVector<T>> {
    let (modulus, phase) = alpha.to_polar();
    let ln_mod = modulus.ln();
    let lf = ln_factorials::<T>(n_max);
    let two = T::one() + T::one();
    let amps: Vec<Complex<T>> = (0..=n_max)
        .map(|k| {
            let ln_amp = -modulus * modulus / two + ln_pow(ln_mod, k) - lf[k] / two;
            Complex::from_polar(ln_amp.exp(), from_usize::<T>(k) * phase)
        })
        .collect();
    let state = FockVector { amps };
    let tail = T::one() - state.norm_sqr();
    if tail > tail_tol {
        return Err(Error::TruncationInsufficient {
            tail: to_f64(tail),
            tol: to_f64(tail_tol),
            n_max,
        });
    }
    Ok(state.normalized())
}

/// Normalized `a†^m |base⟩` together with `ln ‖a†^m |base⟩‖²`.
///
/// The output basis is `m` entries longer than the input so nothing is lost to
/// truncation; amplitudes `√((j+m)!/j!) base[j]` are built in the log domain.
pub fn photon_added_with_norm<T: Real>(base: &FockVector<T>, m: usize) -> Result<(FockVector<T>, T)> {
    if m == 0 {
        let norm = base.norm_sqr();
        return Ok((base.clone().normalized(), norm.ln()));
    }
    let len = base.amps.len() + m;
    let lf = ln_factorials::<T>(len);
    let two = T::one() + T::one();
    let ln_mag: Vec<T> = base
        .amps
        .iter()
        .enumerate()
        .map(|(j, a)| a.norm().ln() + (lf[j + m] - lf[j]) / two)
        .collect();
    let ln_norm_sq = log_sum_exp(ln_mag.iter().map(|&l| l + l));
    if !ln_norm_sq.is_finite() {
        return Err(Error::NormUnderflow { m });
    }
    let half = ln_norm_sq / two;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); len];
    for (j, (a, l)) in base.amps.iter().zip(&ln_mag).enumerate() {
        if *l > T::neg_infinity() {
            amps[j + m] = Complex::from_polar((*l - half).exp(), a.arg());
        }
    }
    Ok((FockVector { amps }, ln_norm_sq))
}

/// Normalized photon-added state `a†^m |base⟩ / ‖a†^m |base⟩‖`.
pub fn photon_added_coherent<T: Real>(base: &FockVector<T>, m: usize) -> Result<FockVector<T>> {
    photon_added_with_norm(base, m).map(|(s, _)| s)
}

/// Photon-added coherent state `a†^m|α⟩` (normalized) and `ln ‖a†^m|α⟩‖²`,
/// with the underlying coherent cutoff sized so the shifted state's own tail
/// is below `tail_tol` and its basis reaches at least `min_n_max`.
///
/// Coherences scale with amplitudes rather than probabilities, so a member
/// that is cut where its probability tail is `1e-14` still misplaces `1e-7` in
/// off-diagonal elements; callers assembling density matrices should pass
/// their own cutoff as `min_n_max`.
///
/// The relative weight of `|α⟩`'s component `j` in the photon-added state has
/// successive ratio `α²(j+m+1)/(j+1)²`, strictly decreasing in `j`; once that
/// ratio `ρ` drops below 1 the remaining mass is bounded by `p_j ρ/(1−ρ)`.
pub fn sized_photon_added_coherent<T: Real>(
    alpha: T,
    m: usize,
    tail_tol: T,
    min_n_max: usize,
) -> Result<(FockVector<T>, T)> {
    let a2 = alpha * alpha;
    let one = T::one();
    let budget = tail_tol / from_usize::<T>(100);
    let mut ln_p = T::zero();
    let mut ln_total = T::zero();
    let mut j = 0usize;
    loop {
        let jf = from_usize::<T>(j);
        let ratio = a2 * (jf + from_usize::<T>(m) + one) / ((jf + one) * (jf + one));
        if ratio < one {
            let ln_bound = ln_p + ratio.ln() - (one - ratio).ln();
            if ln_bound - ln_total < budget.ln() {
                break;
            }
        }
        ln_p = ln_p + ratio.ln();
        ln_total = log_sum_exp([ln_total, ln_p]);
        j += 1;
    }
    let base = coherent_state(alpha, j.max(1).max(min_n_max.saturating_sub(m)), tail_tol)?;
    photon_added_with_norm(&base, m)
}
