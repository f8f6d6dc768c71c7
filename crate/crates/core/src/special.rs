//! Hermite functions, Laguerre polynomials and binomial detection weights.
//!
//! Everything here is evaluated by recursions that stay finite for orders in
//! the thousands: the Hermite and Laguerre recursions carry a running log-scale
//! and rescale whenever the working values grow large.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

const RESCALE_AT: f64 = 1e150;

/// `ln k!` for `k = 0..=n_max`, built by accumulating `ln k`.
pub fn ln_factorials<T: Real>(n_max: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 1..=n_max {
        acc = acc + from_usize::<T>(k).ln();
        out.push(acc);
    }
    out
}

/// Harmonic-oscillator eigenfunctions `ψ_0(x) … ψ_{n_max}(x)` at one point.
///
/// Convention: quadrature `x = (a + a†)/√2`, so `ψ_0(x) = π^{-1/4} e^{-x²/2}` and a
/// real coherent amplitude `α` has `⟨x⟩ = √2 α`, variance `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasisRow<T> {
    pub x: T,
    pub values: Vec<T>,
}

/// Normalized three-term recursion
/// `ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}`,
/// run on rescaled values so `e^{-x²/2}` underflow does not zero the higher orders.
pub fn hermite_functions<T: Real>(x: T, n_max: usize) -> HermiteBasisRow<T> {
    let two = lit::<T>(2.0);
    let mut log_scale = -x * x / two - T::PI().ln() / lit(4.0);
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(T::one());
    if n_max >= 1 {
        values.push(two.sqrt() * x);
    }
    let big = lit::<T>(RESCALE_AT);
    for n in 1..n_max {
        let nf = from_usize::<T>(n);
        let next = (two / (nf + T::one())).sqrt() * x * values[n]
            - (nf / (nf + T::one())).sqrt() * values[n - 1];
        values.push(next);
        if next.abs() > big {
            let inv = big.recip();
            values.iter_mut().for_each(|v| *v = *v * inv);
            log_scale = log_scale + big.ln();
        }
    }
    let scale = log_scale.exp();
    if scale.is_finite() && scale > T::zero() {
        values.iter_mut().for_each(|v| *v = *v * scale);
    } else {
        values.iter_mut().for_each(|v| {
            *v = if *v == T::zero() {
                T::zero()
            } else {
                v.signum() * (v.abs().ln() + log_scale).exp()
            }
        });
    }
    HermiteBasisRow { x, values }
}

/// `ln L_n(q)` for `q ≤ 0`, where every term of the series is non-negative.
pub fn ln_laguerre<T: Real>(n: usize, q: T) -> Result<T> {
    if q > T::zero() {
        return Err(Error::Domain(format!(
            "laguerre evaluated only for q <= 0, got q={}",
            q
        )));
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let big = lit::<T>(RESCALE_AT);
    let mut log_scale = T::zero();
    let mut prev = T::one();
    let mut cur = T::one() - q;
    for k in 1..n {
        let kf = from_usize::<T>(k);
        let next = ((kf + kf + T::one() - q) * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
        if cur > big {
            prev = prev / big;
            cur = cur / big;
            log_scale = log_scale + big.ln();
        }
    }
    Ok(cur.ln() + log_scale)
}

/// Laguerre polynomial `L_n(q)` for `q ≤ 0` by forward recursion.
///
/// Overflows to `+inf` only when the value itself is unrepresentable; use
/// [`ln_laguerre`] for large orders.
pub fn laguerre<T: Real>(n: usize, q: T) -> Result<T> {
    ln_laguerre(n, q).map(T::exp)
}

/// Probability that a detector of efficiency `eta` registers `n` counts from `m`
/// incident photons: `C(m,n) η^n (1−η)^{m−n}`.
///
/// The loss probability `1−η` is formed first and the detection probability is
/// recovered as `1 − (1−η)`; the two are then exactly complementary in floating
/// point, which keeps `Σ_n weight(m, n)` at 1 to within a few ulps.
pub fn efficiency_weight<T: Real>(m: usize, n: usize, eta: T) -> Result<T> {
    if m < n {
        return Err(Error::Domain(format!(
            "efficiency weight needs m >= n, got m={m}, n={n}"
        )));
    }
    if !(T::zero()..=T::one()).contains(&eta) {
        return Err(Error::Domain(format!("efficiency {} outside [0,1]", eta)));
    }
    let loss = T::one() - eta;
    let detect = T::one() - loss;
    if detect == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    if loss == T::zero() {
        return Ok(if n == m { T::one() } else { T::zero() });
    }
    let k = n.min(m - n);
    let ln_binom: T = (1..=k)
        .map(|j| (from_usize::<T>(m - k + j) / from_usize::<T>(j)).ln())
        .sum();
    let ln_detect = from_usize::<T>(n) * detect.ln();
    let ln_loss = from_usize::<T>(m - n) * loss.ln();
    let ln_weight = ln_binom + ln_detect + ln_loss;

    // Direct product when every factor is comfortably representable; it is an
    // order of magnitude more accurate than exponentiating the log sum.
    let limit = lit::<T>(600.0);
    if ln_binom < limit && ln_detect > -limit && ln_loss > -limit && ln_weight > -limit {
        let mut binom = T::one();
        for j in 1..=k {
            binom = binom * from_usize::<T>(m - k + j) / from_usize::<T>(j);
        }
        let pow = |b: T, e: usize| -> T {
            i32::try_from(e).map_or_else(|_| b.powf(from_usize(e)), |e| b.powi(e))
        };
        return Ok(binom * pow(detect, n) * pow(loss, m - n));
    }
    Ok(ln_weight.exp())
}
