//! Conditioning the signal on the idler detector's count.
//!
//! A detector of efficiency `η` registers `n` of `m` incident photons with
//! binomial probability `C(m,n) η^n (1−η)^{m−n}`. Applied to the amplifier
//! output this leaves the signal in the mixture
//!
//! ```text
//! ρ_n ∝ Σ_{m≥n} C(m,n) η^n (1−η)^{m−n} tanh^{2m} r / m! · a†^m|α'⟩⟨α'|a^m
//! ```
//!
//! Two independent constructions are provided: [`condition_on_idler`] builds
//! the mixture term by term from photon-added coherent states, while
//! [`condition_via_oracle`] builds the full two-mode state and applies the
//! detection weights to the idler index directly.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{
    opa_two_mode_state_rotated, sized_photon_added_coherent, two_mode_truncation, DensityMatrix,
    FockVector, SchemeParams,
};
use crate::scalar::{from_usize, log_sum_exp, to_f64, Real};
use crate::special::efficiency_weight;

/// Conditional signal state as a weighted mixture of normalized photon-added
/// coherent states `a†^m|α'⟩`, `m = n_det ..= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalEnsemble<T> {
    pub weights: Vec<T>,
    pub states: Vec<FockVector<T>>,
    pub m_indices: Vec<usize>,
    /// Upper bound on the normalized weight of the discarded terms `m > M`.
    pub tail_weight: T,
}

impl<T: Real> SignalEnsemble<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest photon number represented by any member.
    pub fn support(&self) -> usize {
        self.states.iter().map(FockVector::n_max).max().unwrap_or(0)
    }
}

/// Builds the conditional signal state of the idler detector reporting
/// `params.n_det` counts.
///
/// Unnormalized weights are `C(m,n)η^n(1−η)^{m−n} · tanh^{2m} r / m! · ‖a†^m|α'⟩‖²`
/// with the norm obtained by summation. Terms are added until the geometric
/// bound on the remaining weight falls below `tail_tol`; the successive weight
/// ratio decreases monotonically towards `ε`, which makes that bound valid once
/// the ratio is below one.
pub fn condition_on_idler<T: Real>(params: &SchemeParams<T>) -> Result<SignalEnsemble<T>> {
    params.validate()?;
    let one = T::one();
    let alpha_prime = params.alpha_prime();
    let ln_t = params.tanh_r().ln();
    let n_det = params.n_det;
    let ln_tol = params.tail_tol.ln();

    let mut ln_u: Vec<T> = Vec::new();
    let mut states = Vec::new();
    let mut ln_m_fact = (1..=n_det).map(|k| from_usize::<T>(k).ln()).sum::<T>();
    let mut prev_ratio = T::infinity();
    let mut tail = T::zero();
    let mut m = n_det;
    loop {
        if m > n_det {
            ln_m_fact = ln_m_fact + from_usize::<T>(m).ln();
        }
        let w = efficiency_weight(m, n_det, params.eta)?;
        let ln_pow_t = if m == 0 { T::zero() } else { from_usize::<T>(2 * m) * ln_t };
        if w == T::zero() || ln_pow_t == T::neg_infinity() {
            break;
        }
        let (state, ln_norm_sq) = sized_photon_added_coherent(alpha_prime, m, params.tail_tol, params.n_max)?;
        let term = w.ln() + ln_pow_t - ln_m_fact + ln_norm_sq;
        ln_u.push(term);
        states.push(state);

        if let [.., a, b] = ln_u[..] {
            let ratio = (b - a).exp();
            let monotone = ratio <= prev_ratio * (one + T::epsilon().sqrt());
            prev_ratio = ratio;
            if ratio < one && monotone {
                let ln_sum = log_sum_exp(ln_u.iter().copied());
                let ln_bound = b + ratio.ln() - (one - ratio).ln() - ln_sum;
                if ln_bound < ln_tol {
                    tail = ln_bound.exp();
                    break;
                }
            }
        }
        if m - n_det >= params.hard_cap {
            return Err(Error::NonConvergence {
                tol: to_f64(params.tail_tol),
                cap: params.hard_cap,
            });
        }
        m += 1;
    }

    let ln_sum = log_sum_exp(ln_u.iter().copied());
    let weights: Vec<T> = ln_u.iter().map(|&l| (l - ln_sum).exp()).collect();
    let m_indices = (n_det..n_det + weights.len()).collect();
    Ok(SignalEnsemble {
        weights,
        states,
        m_indices,
        tail_weight: tail,
    })
}

/// `ρ = Σ_j w_j |ψ_j⟩⟨ψ_j|` on Fock indices `0..=n_max`, renormalized to unit trace.
///
/// Fails if the weighted probability of the members above `n_max` exceeds
/// `tail_tol`.
pub fn ensemble_to_density<T: Real>(ens: &SignalEnsemble<T>, n_max: usize, tail_tol: T) -> Result<DensityMatrix<T>> {
    let dim = n_max + 1;
    let lost: T = ens
        .weights
        .iter()
        .zip(&ens.states)
        .map(|(&w, s)| w * s.mass_above(n_max))
        .sum();
    if lost > tail_tol {
        return Err(Error::TruncationInsufficient {
            tail: to_f64(lost),
            tol: to_f64(tail_tol),
            n_max,
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let amp = |s: &FockVector<T>, i: usize| s.amps.get(i).copied().unwrap_or(zero);
    let mut data = vec![zero; dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        for (&w, s) in ens.weights.iter().zip(&ens.states) {
            let ai = amp(s, i) * w;
            if ai == zero {
                continue;
            }
            for (j, out) in row.iter_mut().enumerate().skip(i) {
                *out = *out + ai * amp(s, j).conj();
            }
        }
    });
    for i in 0..dim {
        for j in 0..i {
            data[i * dim + j] = data[j * dim + i].conj();
        }
    }
    Ok(DensityMatrix::from_row_major(n_max, data).normalized())
}

/// Conditional signal state computed from the full two-mode amplifier output:
/// `ρ[m][m'] = Σ_k P(n_det|k) c[m][k] c*[m'][k]`, normalized by its trace.
///
/// The two-mode state is built with the cutoff of the unconditioned signal
/// marginal so no conditional mass is lost to its truncation; the result is
/// then restricted to `params.n_max`.
pub fn condition_via_oracle<T: Real>(params: &SchemeParams<T>) -> Result<DensityMatrix<T>> {
    condition_via_oracle_rotated(params, T::zero())
}

/// [`condition_via_oracle`] with complex input amplitude `α e^{iφ}`.
pub fn condition_via_oracle_rotated<T: Real>(params: &SchemeParams<T>, phase: T) -> Result<DensityMatrix<T>> {
    params.validate()?;
    let n_two = two_mode_truncation(params)?;
    let full = SchemeParams { n_max: n_two, ..*params };
    let psi = opa_two_mode_state_rotated(&full, phase)?;
    let n_det = params.n_det;
    let weights: Vec<T> = (0..=n_two)
        .map(|k| {
            if k < n_det {
                Ok(T::zero())
            } else {
                efficiency_weight(k, n_det, params.eta)
            }
        })
        .collect::<Result<_>>()?;

    let row_mass = |m: usize| -> T {
        psi.row(m)
            .iter()
            .zip(&weights)
            .map(|(c, &w)| w * c.norm_sqr())
            .sum()
    };
    let full_trace: T = (0..=n_two).map(row_mass).sum();
    if full_trace <= T::zero() {
        return Err(Error::InvalidParams(format!(
            "detection of {n_det} idler photons has zero probability"
        )));
    }

    let dim = params.n_max + 1;
    let zero = Complex::new(T::zero(), T::zero());
    let mut data = vec![zero; dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(m, row)| {
        let row_m = psi.row(m);
        for (mp, out) in row.iter_mut().enumerate().skip(m) {
            let row_mp = psi.row(mp);
            let mut acc = zero;
            for k in n_det..=m.min(mp) {
                acc = acc + row_m[k] * row_mp[k].conj() * weights[k];
            }
            *out = acc;
        }
    });
    for i in 0..dim {
        for j in 0..i {
            data[i * dim + j] = data[j * dim + i].conj();
        }
    }
    let rho = DensityMatrix::from_row_major(params.n_max, data);
    // Summed directly rather than as 1 − kept, which cannot resolve small tails.
    let lost = (params.n_max + 1..=n_two).map(row_mass).sum::<T>() / full_trace;
    if lost > params.tail_tol {
        return Err(Error::TruncationInsufficient {
            tail: to_f64(lost),
            tol: to_f64(params.tail_tol),
            n_max: params.n_max,
        });
    }
    Ok(rho.normalized())
}

/// Conditional signal density matrix via the ensemble path at `params.n_max`.
pub fn conditional_state<T: Real>(params: &SchemeParams<T>) -> Result<DensityMatrix<T>> {
    let ens = condition_on_idler(params)?;
    ensemble_to_density(&ens, params.n_max, params.tail_tol)
}
