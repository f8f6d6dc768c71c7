//! Closed forms for the signal state conditioned on an idler vacuum count.
//!
//! For `n_det = 0` the conditional state is a displaced thermal state with
//! mean thermal occupation `ε/(1−ε)` and displacement `α'/(1−ε)`, so every
//! observable below is a Gaussian or a Laguerre-weighted geometric law.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::ln_pow;
use crate::fock::SchemeParams;
use crate::scalar::{from_usize, lit, Real};
use crate::special::{ln_factorials, ln_laguerre};

/// `ε = (1−η) tanh² r` and `α' = α / cosh r` together with their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormContext<T> {
    pub alpha: T,
    pub r: T,
    pub eta: T,
    pub epsilon: T,
    pub alpha_prime: T,
}

impl<T: Real> ClosedFormContext<T> {
    pub fn new(alpha: T, r: T, eta: T) -> Result<Self> {
        if !(alpha.is_finite() && r.is_finite() && eta.is_finite()) {
            return Err(Error::InvalidParams("alpha, r and eta must be finite".into()));
        }
        if alpha < T::zero() || r < T::zero() || !(T::zero()..=T::one()).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "need alpha >= 0, r >= 0, 0 <= eta <= 1; got alpha={alpha}, r={r}, eta={eta}"
            )));
        }
        let t = r.tanh();
        let epsilon = (T::one() - eta) * t * t;
        if epsilon >= T::one() {
            return Err(Error::InvalidParams(format!("epsilon={epsilon} must be < 1")));
        }
        Ok(Self {
            alpha,
            r,
            eta,
            epsilon,
            alpha_prime: alpha / r.cosh(),
        })
    }

    pub fn from_params(params: &SchemeParams<T>) -> Result<Self> {
        Self::new(params.alpha, params.r, params.eta)
    }

    /// `(1+ε)/(1−ε)`: twice the quadrature variance, and `2n̄+1` of the thermal part.
    fn spread(&self) -> T {
        (T::one() + self.epsilon) / (T::one() - self.epsilon)
    }

    /// Quadrature mean and peak position `√2 α'/(1−ε)`.
    pub fn quad_mean(&self) -> T {
        T::SQRT_2() * self.wigner_center().re
    }

    /// `2(δx)² = (1+ε)/(1−ε)`.
    pub fn quad_width_sq(&self) -> T {
        self.spread()
    }

    /// `P(x) = √((1−ε)/(π(1+ε))) exp[−(1−ε)/(1+ε) · (x − √2α'/(1−ε))²]`.
    pub fn quad_pdf(&self, x: T) -> T {
        let k = self.spread().recip();
        let d = x - self.quad_mean();
        (k / T::PI()).sqrt() * (-k * d * d).exp()
    }

    /// `ln P(n)` with `P(n) = (1−ε) e^{−α'²/(1−ε)} εⁿ L_n(−α'²/ε)`.
    ///
    /// `ε = 0` is the Poisson limit `e^{−α'²} α'^{2n}/n!`, evaluated directly.
    pub fn ln_photon_pmf(&self, n: usize) -> Result<T> {
        let eps = self.epsilon;
        let ap2 = self.alpha_prime * self.alpha_prime;
        if eps == T::zero() {
            let lf = ln_factorials::<T>(n);
            return Ok(-ap2 + ln_pow(ap2.ln(), n) - lf[n]);
        }
        let lag = if ap2 == T::zero() { T::zero() } else { ln_laguerre(n, -ap2 / eps)? };
        Ok((T::one() - eps).ln() - ap2 / (T::one() - eps) + from_usize::<T>(n) * eps.ln() + lag)
    }

    pub fn photon_pmf(&self, n: usize) -> Result<T> {
        Ok(self.ln_photon_pmf(n)?.exp())
    }

    /// Unnormalized `ln[εⁿ Σ_{m=0}^{n} n!/(m!(n−m)!²) (α'²/ε)^{n−m}]`, summed
    /// term by term without the Laguerre recursion. Requires `ε > 0`.
    pub fn ln_photon_series(&self, n: usize) -> Result<T> {
        if self.epsilon <= T::zero() {
            return Err(Error::Domain("the finite photon series needs epsilon > 0".into()));
        }
        let lf = ln_factorials::<T>(n);
        let ln_q = (self.alpha_prime * self.alpha_prime / self.epsilon).ln();
        let terms = (0..=n).map(|m| lf[n] - lf[m] - lit::<T>(2.0) * lf[n - m] + ln_pow(ln_q, n - m));
        Ok(from_usize::<T>(n) * self.epsilon.ln() + crate::scalar::log_sum_exp(terms.collect::<Vec<_>>()))
    }

    /// `⟨n⟩ = (ε − ε² + α'²)/(1−ε)²`.
    pub fn mean_photons(&self) -> T {
        let e = self.epsilon;
        let ap2 = self.alpha_prime * self.alpha_prime;
        (e - e * e + ap2) / ((T::one() - e) * (T::one() - e))
    }

    /// `Q = [(ε−ε²+α'²)(1−ε+α'²) − α'⁴] / [(1−ε)²(ε−ε²+α'²)] − 1`.
    pub fn mandel_q(&self) -> Result<T> {
        let e = self.epsilon;
        let ap2 = self.alpha_prime * self.alpha_prime;
        let s = e - e * e + ap2;
        if s <= T::zero() {
            return Err(Error::UndefinedQ);
        }
        let one = T::one();
        Ok((s * (one - e + ap2) - ap2 * ap2) / ((one - e) * (one - e) * s) - one)
    }

    /// Phase-space center `α'/(1−ε)` (real for real `α`).
    pub fn wigner_center(&self) -> Complex<T> {
        Complex::new(self.alpha_prime / (T::one() - self.epsilon), T::zero())
    }

    /// `2(1−ε)/(π(1+ε))`.
    pub fn wigner_peak(&self) -> T {
        lit::<T>(2.0) / (T::PI() * self.spread())
    }

    /// `W(γ) = 2(1−ε)/(π(1+ε)) exp[−2(1−ε)/(1+ε) |γ − α'/(1−ε)|²]`.
    pub fn wigner_gaussian(&self, gamma: Complex<T>) -> T {
        let d = (gamma - self.wigner_center()).norm_sqr();
        self.wigner_peak() * (-lit::<T>(2.0) * d / self.spread()).exp()
    }
}
