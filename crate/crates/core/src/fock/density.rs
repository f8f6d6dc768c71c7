use nalgebra::{Complex as NaComplex, DMatrix};
use num_complex::Complex;

use crate::fock::state::FockVector;
use crate::scalar::{to_f64, Real};

/// Single-mode density matrix over Fock indices `0..=n_max`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn zeros(n_max: usize) -> Self {
        let dim = n_max + 1;
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    /// Wraps row-major data and enforces exact Hermiticity by averaging with the adjoint.
    pub fn from_row_major(n_max: usize, data: Vec<Complex<T>>) -> Self {
        let dim = n_max + 1;
        assert_eq!(data.len(), dim * dim, "density matrix data has wrong length");
        let mut rho = Self { dim, data };
        rho.hermitize();
        rho
    }

    /// `|ψ⟩⟨ψ|` truncated (or zero-padded) to `n_max`.
    pub fn pure(state: &FockVector<T>, n_max: usize) -> Self {
        let mut rho = Self::zeros(n_max);
        let len = state.amps.len().min(rho.dim);
        for i in 0..len {
            for j in 0..len {
                rho.data[i * rho.dim + j] = state.amps[i] * state.amps[j].conj();
            }
        }
        rho.hermitize();
        rho
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(mut self, factor: T) -> Self {
        self.data.iter_mut().for_each(|z| *z = *z * factor);
        self
    }

    pub fn normalized(self) -> Self {
        let tr = self.trace();
        self.scaled(tr.recip())
    }

    fn hermitize(&mut self) {
        let half = (T::one() + T::one()).recip();
        for i in 0..self.dim {
            let d = self.data[i * self.dim + i];
            self.data[i * self.dim + i] = Complex::new(d.re, T::zero());
            for j in i + 1..self.dim {
                let a = self.data[i * self.dim + j];
                let b = self.data[j * self.dim + i].conj();
                let avg = (a + b) * half;
                self.data[i * self.dim + j] = avg;
                self.data[j * self.dim + i] = avg.conj();
            }
        }
    }

    fn to_nalgebra(&self, dim: usize) -> DMatrix<NaComplex<f64>> {
        DMatrix::from_fn(dim, dim, |i, j| {
            if i < self.dim && j < self.dim {
                let z = self.get(i, j);
                NaComplex::new(to_f64(z.re), to_f64(z.im))
            } else {
                NaComplex::new(0.0, 0.0)
            }
        })
    }

    /// Eigenvalues in ascending order, computed in `f64`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_nalgebra(self.dim).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `½ Tr|ρ − σ|`; the smaller matrix is zero-padded. Computed in `f64`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let dim = self.dim.max(other.dim);
        let diff = self.to_nalgebra(dim) - other.to_nalgebra(dim);
        0.5 * diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
    }

    /// Largest `|ρ_ij − σ_ij|` over the common index range, plus the largest
    /// entry of whichever matrix extends beyond it.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let dim = self.dim.max(other.dim);
        let at = |m: &Self, i: usize, j: usize| {
            if i < m.dim && j < m.dim {
                m.get(i, j)
            } else {
                Complex::new(T::zero(), T::zero())
            }
        };
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max(to_f64((at(self, i, j) - at(other, i, j)).norm()));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::coherent_state;

    #[test]
    fn pure_state_projector() {
        let psi = coherent_state(1.1_f64, 40, 1e-12).unwrap();
        let rho = DensityMatrix::pure(&psi, 40);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-13);
        let ev = rho.eigenvalues();
        assert!((ev[ev.len() - 1] - 1.0).abs() < 1e-12);
        assert!(ev[..ev.len() - 1].iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = DensityMatrix::pure(&FockVector::<f64>::number(0, 3), 3);
        let b = DensityMatrix::pure(&FockVector::<f64>::number(2, 3), 3);
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-14);
        assert!(a.trace_distance(&a) < 1e-15);
        // padding: same state in a larger basis
        let c = DensityMatrix::pure(&FockVector::<f64>::number(0, 7), 7);
        assert!(a.trace_distance(&c) < 1e-15);
    }

    #[test]
    fn hermiticity_is_exact() {
        let data = vec![
            Complex::new(0.5, 0.1),
            Complex::new(0.2, 0.3),
            Complex::new(0.2, -0.29),
            Complex::new(0.5, 0.0),
        ];
        let rho = DensityMatrix::from_row_major(1, data);
        assert_eq!(rho.get(0, 1), rho.get(1, 0).conj());
        assert_eq!(rho.get(0, 0).im, 0.0);
    }
}
