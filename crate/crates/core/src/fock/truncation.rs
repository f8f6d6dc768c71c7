use crate::error::{Error, Result};
use crate::fock::params::SchemeParams;
use crate::fock::two_mode::OpaLogAmplitude;
use crate::scalar::{from_usize, log_sum_exp, Real};
use crate::special::{efficiency_weight, ln_laguerre};

/// Smallest Fock cutoff for which the conditional signal state (idler detected
/// with `n_det` counts) loses at most `tail_tol` probability.
///
/// The closed-form mean `(ε−ε²+α'²)/(1−ε)²` is only used to reject hopeless
/// requests early. The cutoff itself comes from the conditional signal photon
/// distribution, built directly from the two-mode amplitudes and normalized by
/// the exact detection probability
/// `Σ_k P(n_det|k) e^{−α²t²} t^{2k} L_k(−α'²) / cosh² r`. The distribution is
/// summed until its terms fall off geometrically, and the neglected mass above
/// each candidate cutoff is summed from the top, so tolerances far below
/// machine epsilon are resolved.
///
/// The result ignores `params.n_max`.
pub fn choose_truncation<T: Real>(params: &SchemeParams<T>) -> Result<usize> {
    scan_cutoff(params.alpha, params.r, params.eta, params.n_det, params.tail_tol, params.hard_cap)
}

/// Cutoff for pointwise densities (quadrature distribution, Wigner function).
///
/// Those depend on amplitudes, so truncating a mass `δ` perturbs them by
/// roughly `√δ`. This cutoff neglects at most `tail_tol²`, keeping the pointwise
/// error near `tail_tol`. Never below `params.n_max`.
pub fn amplitude_truncation<T: Real>(params: &SchemeParams<T>) -> Result<usize> {
    let tol = params.tail_tol * params.tail_tol;
    let n = scan_cutoff(params.alpha, params.r, params.eta, params.n_det, tol, params.hard_cap)?;
    Ok(n.max(params.n_max))
}

/// Cutoff for the unconditioned signal marginal (equivalently the full
/// two-mode state truncated in the signal index), never below `params.n_max`.
pub fn two_mode_truncation<T: Real>(params: &SchemeParams<T>) -> Result<usize> {
    let n = scan_cutoff(params.alpha, params.r, T::zero(), 0, params.tail_tol, params.hard_cap)?;
    Ok(n.max(params.n_max))
}

fn scan_cutoff<T: Real>(alpha: T, r: T, eta: T, n_det: usize, tail_tol: T, cap: usize) -> Result<usize> {
    let one = T::one();
    let t = r.tanh();
    let eps = (one - eta) * t * t;
    if eps >= one {
        return Err(Error::InvalidParams("epsilon must be < 1".into()));
    }
    let alpha_prime = alpha / r.cosh();
    let ap2 = alpha_prime * alpha_prime;
    let mean = (eps - eps * eps + ap2) / ((one - eps) * (one - eps));
    if mean > from_usize::<T>(2 * cap) {
        return Err(Error::TruncationCapExceeded { cap });
    }

    let ln_total = ln_detection_probability(alpha, r, eta, n_det, tail_tol, cap)?;
    if !ln_total.is_finite() {
        return Err(Error::InvalidParams(format!(
            "detection of {n_det} idler photons has zero probability"
        )));
    }

    // The scan may run past `cap` to confirm that the tail above a cutoff
    // below `cap` is small.
    let limit = 2 * cap + 64;
    let log_amp = OpaLogAmplitude::new(alpha, r, limit);
    let two = one + one;
    let stop = tail_tol / from_usize::<T>(1000);
    let mut ln_w: Vec<T> = Vec::new();
    let mut s: Vec<T> = Vec::new();
    let mut last_ratio = T::infinity();
    let mut beyond = None;
    for n in 0..=limit {
        ln_w.push(efficiency_weight(n, n_det.min(n), eta)?.ln());
        let s_n: T = if n < n_det {
            T::zero()
        } else {
            // ln_w[k] is only meaningful for k >= n_det
            (n_det..=n)
                .map(|k| (ln_w[k] + two * log_amp.ln_abs(n, k) - ln_total).exp())
                .sum()
        };
        s.push(s_n);
        if n <= n_det {
            continue;
        }
        let prev = s[n - 1];
        if s_n == T::zero() && prev > T::zero() {
            beyond = Some(T::zero());
            break;
        }
        let ratio = s_n / prev;
        if ratio < one && ratio <= last_ratio {
            let bound = s_n * ratio / (one - ratio);
            if bound <= stop {
                beyond = Some(bound);
                break;
            }
        }
        last_ratio = ratio;
    }
    let Some(mut tail) = beyond else {
        return Err(Error::TruncationCapExceeded { cap });
    };
    let mut tails = vec![T::zero(); s.len()];
    for n in (0..s.len()).rev() {
        tails[n] = tail;
        tail = tail + s[n];
    }
    match (1..tails.len()).find(|&n| tails[n] <= tail_tol) {
        Some(n) if n <= cap => Ok(n),
        _ => Err(Error::TruncationCapExceeded { cap }),
    }
}

/// `ln P(n_det)`: probability that the idler detector reports `n_det` counts.
///
/// Terms `P(n_det|k) p_idler(k)` have a successive ratio that decreases
/// monotonically towards `(1−η)t²`, so once it is below one the remainder is
/// bounded geometrically.
fn ln_detection_probability<T: Real>(
    alpha: T,
    r: T,
    eta: T,
    n_det: usize,
    tail_tol: T,
    cap: usize,
) -> Result<T> {
    let one = T::one();
    let t = r.tanh();
    let alpha_prime = alpha / r.cosh();
    let ln_pref = -(alpha * t) * (alpha * t) - (r.cosh() * r.cosh()).ln();
    let budget = (tail_tol / from_usize::<T>(1000)).ln();
    let mut terms: Vec<T> = Vec::new();
    for k in n_det..=(n_det + 4 * cap) {
        let ln_t_pow = if k == 0 { T::zero() } else { from_usize::<T>(2 * k) * t.ln() };
        let term = efficiency_weight(k, n_det, eta)?.ln()
            + ln_pref
            + ln_t_pow
            + ln_laguerre(k, -alpha_prime * alpha_prime)?;
        terms.push(term);
        if term == T::neg_infinity() && k > n_det {
            break;
        }
        if let [.., a, b] = terms[..] {
            let ratio = (b - a).exp();
            if ratio < one {
                let sum = log_sum_exp(terms.iter().copied());
                if b + ratio.ln() - (one - ratio).ln() - sum < budget {
                    return Ok(sum);
                }
            }
        }
    }
    Ok(log_sum_exp(terms.iter().copied()))
}
