use crate::error::{Error, Result};
use crate::fock::truncation::choose_truncation;
use crate::scalar::{lit, Real};

/// Default upper bound on any Fock cutoff the crate will choose on its own.
pub const DEFAULT_HARD_CAP: usize = 5000;

/// Default neglected-probability budget for truncations.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Physical inputs of the scheme plus the numerical controls that go with them.
///
/// `alpha` is the real, non-negative coherent amplitude of the signal input;
/// `r` the amplifier gain; `eta` the idler detector efficiency; `n_det` the
/// number of idler counts the signal is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<T> {
    pub alpha: T,
    pub r: T,
    pub eta: T,
    pub n_det: usize,
    /// Fock cutoff for the conditional signal state (indices `0..=n_max`).
    pub n_max: usize,
    pub tail_tol: T,
    pub hard_cap: usize,
}

impl<T: Real> SchemeParams<T> {
    pub fn builder(alpha: T, r: T, eta: T) -> ParamsBuilder<T> {
        ParamsBuilder {
            alpha,
            r,
            eta,
            n_det: 0,
            n_max: None,
            tail_tol: lit(DEFAULT_TAIL_TOL),
            hard_cap: DEFAULT_HARD_CAP,
        }
    }

    /// Shorthand for the common case: vacuum detection, automatic cutoff.
    pub fn new(alpha: T, r: T, eta: T) -> Result<Self> {
        Self::builder(alpha, r, eta).build()
    }

    pub fn tanh_r(&self) -> T {
        self.r.tanh()
    }

    /// `ε = (1−η) tanh² r`.
    pub fn epsilon(&self) -> T {
        let t = self.tanh_r();
        (T::one() - self.eta) * t * t
    }

    /// `α' = α / cosh r`, the coherent amplitude left in the signal by the
    /// disentangled amplifier.
    pub fn alpha_prime(&self) -> T {
        self.alpha / self.r.cosh()
    }

    /// Checks every invariant except the adequacy of `n_max`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, v) in [("alpha", self.alpha), ("r", self.r), ("eta", self.eta), ("tail_tol", self.tail_tol)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.alpha < T::zero() {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if self.r < T::zero() {
            return bad(format!("r must be >= 0, got {}", self.r));
        }
        if self.eta < T::zero() || self.eta > T::one() {
            return bad(format!("eta must lie in [0,1], got {}", self.eta));
        }
        if self.n_max < 1 {
            return bad("n_max must be >= 1".into());
        }
        if self.tail_tol <= T::zero() || self.tail_tol >= T::one() {
            return bad(format!("tail_tol must lie in (0,1), got {}", self.tail_tol));
        }
        if self.epsilon() >= T::one() {
            return bad(format!("epsilon=(1-eta)tanh^2(r) must be < 1, got {}", self.epsilon()));
        }
        if self.n_det > 0 && (self.r == T::zero() || self.eta == T::zero()) {
            return bad(format!(
                "detecting {} idler photons has zero probability at r={}, eta={}",
                self.n_det, self.r, self.eta
            ));
        }
        Ok(())
    }
}

/// Builder for [`SchemeParams`]; `build` validates and picks `n_max` when unset.
#[derive(Debug, Clone, Copy)]
pub struct ParamsBuilder<T> {
    alpha: T,
    r: T,
    eta: T,
    n_det: usize,
    n_max: Option<usize>,
    tail_tol: T,
    hard_cap: usize,
}

impl<T: Real> ParamsBuilder<T> {
    pub fn n_det(mut self, n: usize) -> Self {
        self.n_det = n;
        self
    }

    pub fn n_max(mut self, n: usize) -> Self {
        self.n_max = Some(n);
        self
    }

    pub fn n_max_opt(mut self, n: Option<usize>) -> Self {
        self.n_max = n;
        self
    }

    pub fn tail_tol(mut self, tol: T) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn hard_cap(mut self, cap: usize) -> Self {
        self.hard_cap = cap;
        self
    }

    pub fn build(self) -> Result<SchemeParams<T>> {
        let mut params = SchemeParams {
            alpha: self.alpha,
            r: self.r,
            eta: self.eta,
            n_det: self.n_det,
            n_max: self.n_max.unwrap_or(1),
            tail_tol: self.tail_tol,
            hard_cap: self.hard_cap,
        };
        params.validate()?;
        if self.n_max.is_none() {
            params.n_max = choose_truncation(&params)?;
        }
        Ok(params)
    }
}
