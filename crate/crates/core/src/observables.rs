//! Quadrature and photon-number distributions, photon-number moments and the
//! Wigner function, evaluated directly from a density matrix.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::fock::ln_pow;
use crate::special::{hermite_functions, ln_factorials};

/// Values below zero but above this are roundoff and clipped to zero.
pub const NEGATIVE_CLIP: f64 = -1e-12;
/// Values below this indicate a genuinely broken state or truncation.
pub const NEGATIVE_HARD: f64 = -1e-9;
/// Largest density allowed on a grid boundary.
pub const BOUNDARY_LIMIT: f64 = 1e-12;

/// Evenly spaced grid `min, min+step, …` up to and including `max` (to within half a step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub min: T,
    pub max: T,
    pub step: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(min: T, max: T, step: T) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= T::zero() || max < min {
            return Err(Error::InvalidParams(format!(
                "grid needs finite min <= max and step > 0, got {min}:{max}:{step}"
            )));
        }
        Ok(Self { min, max, step })
    }

    pub fn len(&self) -> usize {
        let n = ((self.max - self.min) / self.step + lit(0.5)).floor();
        n.to_usize().unwrap_or(0) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> T {
        self.min + from_usize::<T>(i) * self.step
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Quadrature,
    PhotonNumber,
}

/// Sampled density (quadrature) or mass function (photon number).
///
/// Never renormalized: `norm_residual = |1 − total|` is the truncation diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution1D<T> {
    pub axis: Axis,
    pub points: Vec<(T, T)>,
    pub norm_residual: T,
}

impl<T: Real> Distribution1D<T> {
    /// Point of largest probability; first one wins ties.
    pub fn argmax(&self) -> (T, T) {
        self.points
            .iter()
            .copied()
            .fold((T::nan(), T::neg_infinity()), |best, p| if p.1 > best.1 { p } else { best })
    }

    fn weights(&self) -> Vec<T> {
        match self.axis {
            Axis::PhotonNumber => self.points.iter().map(|p| p.1).collect(),
            Axis::Quadrature => {
                let n = self.points.len();
                self.points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let left = if i > 0 { p.0 - self.points[i - 1].0 } else { T::zero() };
                        let right = if i + 1 < n { self.points[i + 1].0 - p.0 } else { T::zero() };
                        p.1 * (left + right) / lit(2.0)
                    })
                    .collect()
            }
        }
    }

    /// Total probability (trapezoid rule for quadrature grids).
    pub fn total(&self) -> T {
        self.weights().into_iter().sum()
    }

    pub fn mean(&self) -> T {
        self.points.iter().zip(self.weights()).map(|(p, w)| p.0 * w).sum()
    }

    pub fn variance(&self) -> T {
        let mean = self.mean();
        self.points
            .iter()
            .zip(self.weights())
            .map(|(p, w)| (p.0 - mean) * (p.0 - mean) * w)
            .sum()
    }
}

fn clip<T: Real>(index: usize, v: T) -> Result<T> {
    if v < lit(NEGATIVE_HARD) {
        return Err(Error::NegativeProbability { index, value: to_f64(v) });
    }
    Ok(if v < T::zero() { T::zero() } else { v })
}

/// Quadrature distribution `P(x) = ⟨x|ρ|x⟩ = Σ_{mn} ψ_m(x) ρ_mn ψ_n(x)` for
/// `x = (a + a†)/√2`.
///
/// The Hermite functions are real and `ρ` is Hermitian, so imaginary parts of
/// `ρ_mn` cancel pairwise and only `Re ρ` enters.
pub fn quadrature_distribution<T: Real>(rho: &DensityMatrix<T>, grid: &GridSpec<T>) -> Result<Distribution1D<T>> {
    let dim = rho.dim();
    let re: Vec<T> = rho.as_slice().iter().map(|z| z.re).collect();
    let xs = grid.points();
    let raw: Vec<T> = xs
        .par_iter()
        .map(|&x| {
            let psi = hermite_functions(x, rho.n_max()).values;
            (0..dim)
                .map(|m| {
                    let row = &re[m * dim..(m + 1) * dim];
                    psi[m] * row.iter().zip(&psi).map(|(&r, &p)| r * p).sum::<T>()
                })
                .sum()
        })
        .collect();
    let boundary = raw[0].abs().max(raw[raw.len() - 1].abs());
    if boundary > lit(BOUNDARY_LIMIT) {
        return Err(Error::GridTooNarrow {
            boundary: to_f64(boundary),
            limit: BOUNDARY_LIMIT,
        });
    }
    let points = xs
        .into_iter()
        .zip(raw)
        .enumerate()
        .map(|(i, (x, p))| Ok((x, clip(i, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut dist = Distribution1D {
        axis: Axis::Quadrature,
        points,
        norm_residual: T::zero(),
    };
    dist.norm_residual = (T::one() - dist.total()).abs();
    Ok(dist)
}

/// Photon-number distribution `P(n) = ρ_nn`.
pub fn photon_distribution<T: Real>(rho: &DensityMatrix<T>) -> Result<Distribution1D<T>> {
    let points = rho
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(n, p)| Ok((from_usize::<T>(n), clip(n, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut dist = Distribution1D {
        axis: Axis::PhotonNumber,
        points,
        norm_residual: T::zero(),
    };
    dist.norm_residual = (T::one() - dist.total()).abs();
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport<T> {
    pub mean_n: T,
    pub var_n: T,
    /// `var/mean − 1`; `None` when the mean photon number is zero.
    pub mandel_q: Option<T>,
}

impl<T: Real> MomentReport<T> {
    pub fn q(&self) -> Result<T> {
        self.mandel_q.ok_or(Error::UndefinedQ)
    }
}

/// Mean, variance and Mandel `Q = (⟨n²⟩ − ⟨n⟩²)/⟨n⟩ − 1` from the diagonal of `ρ`.
pub fn moments<T: Real>(rho: &DensityMatrix<T>) -> Result<MomentReport<T>> {
    let dist = photon_distribution(rho)?;
    let mean_n = dist.mean();
    let var_n = dist.variance();
    let mandel_q = (mean_n > T::zero()).then(|| var_n / mean_n - T::one());
    Ok(MomentReport { mean_n, var_n, mandel_q })
}

/// Wigner function sampled on a rectangle of phase-space points `γ`.
///
/// `values[j][i]` holds `W(re[i] + i·im[j])`. Normalized so `∫∫ W d²γ = 1`
/// (vacuum: `(2/π) e^{−2|γ|²}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid<T> {
    pub re: GridSpec<T>,
    pub im: GridSpec<T>,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> WignerGrid<T> {
    /// 2-D trapezoid integral.
    pub fn integral(&self) -> T {
        let wr = trapezoid_weights(&self.re);
        let wi = trapezoid_weights(&self.im);
        self.values
            .iter()
            .zip(&wi)
            .map(|(row, &w_im)| row.iter().zip(&wr).map(|(&v, &w_re)| v * w_re).sum::<T>() * w_im)
            .sum()
    }

    /// `∫ W d(Im γ)` at every `Re γ` grid point.
    pub fn marginal_re(&self) -> Vec<T> {
        let wi = trapezoid_weights(&self.im);
        (0..self.re.len())
            .map(|i| self.values.iter().zip(&wi).map(|(row, &w)| row[i] * w).sum())
            .collect()
    }

    /// Grid point with the largest value, as `(Re γ, Im γ, W)`.
    pub fn peak(&self) -> (T, T, T) {
        let mut best = (T::nan(), T::nan(), T::neg_infinity());
        for (j, row) in self.values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (self.re.point(i), self.im.point(j), v);
                }
            }
        }
        best
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .flatten()
            .fold(T::infinity(), |a, &b| a.min(b))
    }
}

fn trapezoid_weights<T: Real>(g: &GridSpec<T>) -> Vec<T> {
    let n = g.len();
    (0..n)
        .map(|i| if n == 1 { T::one() } else if i == 0 || i + 1 == n { g.step / lit(2.0) } else { g.step })
        .collect()
}

const WIGNER_RESCALE: f64 = 1e150;

/// `W(γ) = Σ_{m,n} ρ_mn W_mn(γ)` with the Fock-basis kernel
///
/// `W_{m,m+k}(γ) = (2/π) (−1)^m (2γ)^k e^{−2|γ|²} √(m!/(m+k)!) L_m^{(k)}(4|γ|²)`.
///
/// Each diagonal `k` is summed with the degree recursion for
/// `f_m = √(m!/(m+k)!) L_m^{(k)}(x)`, which stays stable on both sides of the
/// turning point `x ≈ 4m + 2k`. A recursion along `k` at fixed `m` is not: it
/// amplifies roundoff wherever the kernel decays. The Gaussian and `(2|γ|)^k`
/// factors are carried in log form so large `|γ|` cannot underflow.
pub fn wigner_point<T: Real>(rho: &DensityMatrix<T>, gamma: Complex<T>) -> T {
    let dim = rho.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let big = lit::<T>(WIGNER_RESCALE);
    let ln_big = big.ln();
    let x = lit::<T>(4.0) * gamma.norm_sqr();
    let ln_two_abs = (lit::<T>(2.0) * gamma.norm()).ln();
    let theta = gamma.arg();
    let lf = ln_factorials::<T>(dim);
    let mut total = T::zero();
    for k in 0..dim {
        if k > 0 && gamma == zero {
            break;
        }
        let fk = from_usize::<T>(k);
        let mut log_scale = ln_pow(ln_two_abs, k) - x / lit(2.0) - lf[k] / lit(2.0);
        let (mut prev, mut cur) = (T::zero(), T::one());
        let mut sum = zero;
        for m in 0..dim - k {
            let term = rho.get(m, m + k) * cur;
            sum = if m % 2 == 0 { sum + term } else { sum - term };
            let fm = from_usize::<T>(m);
            let next = ((lit::<T>(2.0) * fm + T::one() + fk - x) * cur - (fm * (fm + fk)).sqrt() * prev)
                / ((fm + T::one()) * (fm + fk + T::one())).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > big {
                prev = prev / big;
                cur = cur / big;
                sum = sum / big;
                log_scale = log_scale + ln_big;
            }
        }
        let rotated = sum * Complex::from_polar(T::one(), fk * theta);
        let weight = if k == 0 { T::one() } else { lit(2.0) };
        total = total + weight * rotated.re * log_scale.exp();
    }
    total * lit::<T>(2.0) / T::PI()
}

/// Wigner function of `rho` on the rectangle `re × im`.
///
/// Fails if the largest `|W|` on the rectangle's edge exceeds
/// [`BOUNDARY_LIMIT`] or if any value is below [`NEGATIVE_HARD`] times the peak.
pub fn wigner<T: Real>(rho: &DensityMatrix<T>, re: &GridSpec<T>, im: &GridSpec<T>) -> Result<WignerGrid<T>> {
    let re_pts = re.points();
    let values: Vec<Vec<T>> = im
        .points()
        .into_par_iter()
        .map(|y| re_pts.iter().map(|&x| wigner_point(rho, Complex::new(x, y))).collect())
        .collect();
    let (nr, ni) = (re_pts.len(), values.len());
    let mut boundary = T::zero();
    for (j, row) in values.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            if i == 0 || j == 0 || i + 1 == nr || j + 1 == ni {
                boundary = boundary.max(v.abs());
            }
        }
    }
    if boundary > lit(BOUNDARY_LIMIT) {
        return Err(Error::GridTooNarrow {
            boundary: to_f64(boundary),
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(WignerGrid {
        re: *re,
        im: *im,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, coherent_state_complex, FockVector};
    use std::f64::consts::PI;

    fn grid(a: f64, b: f64, s: f64) -> GridSpec<f64> {
        GridSpec::new(a, b, s).unwrap()
    }

    /// Direct quadrature of `W(γ) = (2/π²) e^{2|γ|²} ∫ ⟨−β|ρ|β⟩ e^{−2(βγ*−β*γ)} d²β`.
    /// Only usable for small `|γ|`: the `e^{2|γ|²}` prefactor amplifies cancellation.
    fn wigner_by_integral(rho: &DensityMatrix<f64>, gamma: Complex<f64>) -> f64 {
        let dim = rho.dim();
        let lf = crate::special::ln_factorials::<f64>(dim);
        let (l, h) = (7.0, 0.025);
        let n = (2.0 * l / h) as usize;
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                let beta = Complex::new(-l + i as f64 * h, -l + j as f64 * h);
                // ⟨−β|m⟩ = e^{−|β|²/2} (−β*)^m/√m!, ⟨n|β⟩ = e^{−|β|²/2} β^n/√n!
                let mut left = vec![Complex::new(0.0, 0.0); dim];
                let mut right = vec![Complex::new(0.0, 0.0); dim];
                let mut pl = Complex::new(1.0, 0.0);
                let mut pr = Complex::new(1.0, 0.0);
                for k in 0..dim {
                    let s = (-lf[k] / 2.0).exp();
                    left[k] = pl * s;
                    right[k] = pr * s;
                    pl *= -beta.conj();
                    pr *= beta;
                }
                let mut overlap = Complex::new(0.0, 0.0);
                for m in 0..dim {
                    for k in 0..dim {
                        overlap += left[m] * rho.get(m, k) * right[k];
                    }
                }
                let phase = (-(beta * gamma.conj() - beta.conj() * gamma) * 2.0).exp();
                acc += overlap * (-beta.norm_sqr()).exp() * phase;
            }
        }
        (acc * h * h).re * 2.0 / (PI * PI) * (2.0 * gamma.norm_sqr()).exp()
    }

    #[test]
    fn grid_points() {
        let g = grid(-5.0, 25.0, 0.01);
        assert_eq!(g.len(), 3001);
        assert!((g.point(3000) - 25.0).abs() < 1e-12);
        assert!(GridSpec::new(1.0, 0.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn vacuum_quadrature() {
        let rho = DensityMatrix::pure(&FockVector::<f64>::vacuum(10), 10);
        let d = quadrature_distribution(&rho, &grid(-8.0, 8.0, 0.01)).unwrap();
        for &(x, p) in &d.points {
            assert!((p - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        }
        assert_eq!(d.argmax().0.abs(), 0.0);
        assert!(d.norm_residual < 1e-12);
    }

    #[test]
    fn coherent_quadrature_peak_and_width() {
        let ap = 2.125_480_174_711_402_3;
        let rho = DensityMatrix::pure(&coherent_state(ap, 60, 1e-14).unwrap(), 60);
        let d = quadrature_distribution(&rho, &grid(-6.0, 12.0, 0.001)).unwrap();
        assert!((d.argmax().0 - 2f64.sqrt() * ap).abs() <= 0.001);
        assert!((d.mean() - 3.005_882_889_632_000_7).abs() < 1e-10);
        assert!((2.0 * d.variance() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn narrow_grid_rejected() {
        let rho = DensityMatrix::pure(&coherent_state(2.0, 40, 1e-14).unwrap(), 40);
        assert!(matches!(
            quadrature_distribution(&rho, &grid(-1.0, 2.0, 0.01)),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn photon_statistics_of_simple_states() {
        let vac = DensityMatrix::pure(&FockVector::<f64>::vacuum(4), 4);
        let d = photon_distribution(&vac).unwrap();
        assert_eq!(d.points[0].1, 1.0);
        assert_eq!(moments(&vac).unwrap().mandel_q, None);
        assert!(matches!(moments(&vac).unwrap().q(), Err(Error::UndefinedQ)));

        let five = DensityMatrix::pure(&FockVector::<f64>::number(5, 8), 8);
        assert!((moments(&five).unwrap().q().unwrap() + 1.0).abs() < 1e-15);

        let ap: f64 = 2.125_480_174_711_402_3;
        let coh = DensityMatrix::pure(&coherent_state(ap, 60, 1e-14).unwrap(), 60);
        let mom = moments(&coh).unwrap();
        assert!((mom.mean_n - ap * ap).abs() < 1e-12);
        assert!(mom.q().unwrap().abs() < 1e-9);
        let dist = photon_distribution(&coh).unwrap();
        assert_eq!(dist.argmax().0, 4.0);
    }

    #[test]
    fn negative_probability_is_fatal() {
        let data = vec![
            Complex::new(1.0 + 1e-6, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(-1e-6, 0.0),
        ];
        let rho = DensityMatrix::from_row_major(1, data);
        assert!(matches!(photon_distribution(&rho), Err(Error::NegativeProbability { index: 1, .. })));
        let data = vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(-1e-13, 0.0),
        ];
        let rho = DensityMatrix::from_row_major(1, data);
        assert_eq!(photon_distribution(&rho).unwrap().points[1].1, 0.0);
    }

    #[test]
    fn wigner_vacuum_and_fock_one() {
        let vac = DensityMatrix::pure(&FockVector::<f64>::vacuum(6), 6);
        let one = DensityMatrix::pure(&FockVector::<f64>::number(1, 6), 6);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.7), (1.5, 1.0), (-2.0, 0.1)] {
            let g: Complex<f64> = Complex::new(x, y);
            let r2 = g.norm_sqr();
            let w0 = 2.0 / PI * (-2.0 * r2).exp();
            assert!((wigner_point(&vac, g) - w0).abs() < 1e-15);
            let w1 = 2.0 / PI * (4.0 * r2 - 1.0) * (-2.0 * r2).exp();
            assert!((wigner_point(&one, g) - w1).abs() < 1e-14);
        }
    }

    #[test]
    fn wigner_coherent_is_displaced() {
        let beta = Complex::new(1.2, -0.8);
        let rho = DensityMatrix::pure(&coherent_state_complex(beta, 60, 1e-14).unwrap(), 60);
        for &(x, y) in &[(1.2, -0.8), (0.0, 0.0), (2.0, 0.5)] {
            let g: Complex<f64> = Complex::new(x, y);
            let expected = 2.0 / PI * (-2.0 * (g - beta).norm_sqr()).exp();
            assert!((wigner_point(&rho, g) - expected).abs() < 1e-13, "γ={g}");
        }
    }

    #[test]
    fn wigner_kernel_matches_direct_integral() {
        use crate::fock::SchemeParams;
        use crate::measurement::conditional_state;
        let params = SchemeParams::new(0.6_f64, 0.4, 0.5).unwrap();
        let rho = conditional_state(&params).unwrap();
        for g in [Complex::new(0.0, 0.0), Complex::new(0.4, 0.2), Complex::new(-0.3, 0.5)] {
            let kernel = wigner_point(&rho, g);
            let direct = wigner_by_integral(&rho, g);
            assert!((kernel - direct).abs() < 1e-9, "γ={g}: {kernel} vs {direct}");
        }
    }

    #[test]
    fn wigner_survives_large_photon_numbers() {
        // Fock |400⟩: W at γ on its ring is O(1e-2) though e^{−2|γ|²} underflows.
        let rho = DensityMatrix::pure(&FockVector::<f64>::number(400, 400), 400);
        let w = wigner_point(&rho, Complex::new(20.0, 0.0));
        assert!(w.is_finite() && w.abs() > 1e-4, "{w}");
    }

    #[test]
    fn wigner_is_stable_for_broad_mixtures() {
        // A recursion along the off-diagonal index loses everything here
        // (|W| ~ 1e7 at γ = 8 instead of 0.096).
        use crate::analytic::ClosedFormContext;
        use crate::fock::{amplitude_truncation, SchemeParams};
        use crate::measurement::condition_via_oracle;
        let mut params = SchemeParams::new(5.0_f64, 1.5, 0.1).unwrap();
        params.n_max = amplitude_truncation(&params).unwrap();
        let rho = condition_via_oracle(&params).unwrap();
        let ctx = ClosedFormContext::from_params(&params).unwrap();
        for &(x, y) in &[(4.0, 0.0), (8.0, 0.0), (8.0, 3.0), (11.0, -2.0), (14.0, 0.0), (20.0, 5.0)] {
            let g = Complex::new(x, y);
            let (num, exact) = (wigner_point(&rho, g), ctx.wigner_gaussian(g));
            assert!((num - exact).abs() < 1e-11, "γ={g}: {num} vs {exact}");
        }
    }

    #[test]
    fn wigner_grid_integral_and_marginal() {
        let ap = 1.3;
        let rho = DensityMatrix::pure(&coherent_state(ap, 50, 1e-14).unwrap(), 50);
        let s2 = 2f64.sqrt();
        let re = GridSpec::new(-4.0 / s2, 8.0 / s2, 0.05 / s2).unwrap();
        let im = grid(-6.0, 6.0, 0.05);
        let wg = wigner(&rho, &re, &im).unwrap();
        assert!((wg.integral() - 1.0).abs() < 1e-6);
        let quad = quadrature_distribution(&rho, &grid(-4.0, 8.0, 0.05)).unwrap();
        for (m, &(_, p)) in wg.marginal_re().iter().zip(&quad.points) {
            assert!((m / s2 - p).abs() < 1e-6);
        }
    }
}
