//! Closed forms against the two-mode oracle, and the oracle against the
//! ensemble path, over a parameter sweep with `n_det = 0`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::ClosedFormContext;
use crate::error::{Error, Result};
use crate::fock::{amplitude_truncation, DensityMatrix, SchemeParams, DEFAULT_HARD_CAP, DEFAULT_TAIL_TOL};
use crate::measurement::{condition_via_oracle, conditional_state};
use crate::observables::{moments, photon_distribution, quadrature_distribution, wigner_point, GridSpec};

pub const PATH_TOL: f64 = 1e-9;
pub const CLOSED_FORM_TOL: f64 = 1e-7;
pub const PURITY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
/// Closed-form probability above the cutoff; must be small enough for the
/// `1e-7` comparisons to be meaningful.
pub const CUTOFF_TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub alphas: Vec<f64>,
    pub rs: Vec<f64>,
    pub etas: Vec<f64>,
    pub tail_tol: f64,
    pub hard_cap: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.0, 1.0, 3.0, 5.0],
            rs: vec![0.3, 0.9, 1.5],
            etas: vec![0.1, 0.5, 0.9, 1.0],
            tail_tol: DEFAULT_TAIL_TOL,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub alpha: f64,
    pub r: f64,
    pub eta: f64,
    pub n_max: Option<usize>,
    /// Measured deviation; `NaN` when the computation itself failed.
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Every sweep point runs independently; a point whose setup fails contributes
/// a single failed `setup` check carrying the error text.
pub fn run_sweep(config: &VerifyConfig) -> VerifyReport {
    let points: Vec<(f64, f64, f64)> = config
        .alphas
        .iter()
        .flat_map(|&a| config.rs.iter().flat_map(move |&r| config.etas.iter().map(move |&e| (a, r, e))))
        .collect();
    let checks = points
        .into_par_iter()
        .flat_map_iter(|(a, r, e)| {
            verify_point(a, r, e, config.tail_tol, config.hard_cap).unwrap_or_else(|err| {
                vec![Check {
                    name: "setup",
                    alpha: a,
                    r,
                    eta: e,
                    n_max: None,
                    value: f64::NAN,
                    tol: 0.0,
                    passed: false,
                    detail: Some(err.to_string()),
                }]
            })
        })
        .collect();
    VerifyReport { checks }
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

/// All checks at one parameter point.
pub fn verify_point(alpha: f64, r: f64, eta: f64, tail_tol: f64, hard_cap: usize) -> Result<Vec<Check>> {
    let mut params = SchemeParams::builder(alpha, r, eta)
        .tail_tol(tail_tol)
        .hard_cap(hard_cap)
        .build()?;
    // The quadrature and Wigner comparisons are pointwise.
    params.n_max = amplitude_truncation(&params)?;
    let ctx = ClosedFormContext::from_params(&params)?;
    let oracle = condition_via_oracle(&params)?;
    let ensemble = conditional_state(&params)?;

    let mut out = Vec::new();
    let mut push = |name, value: Result<f64>, tol: f64| {
        let (value, detail) = match value {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        out.push(Check {
            name,
            alpha,
            r,
            eta,
            n_max: Some(params.n_max),
            value,
            tol,
            passed: value <= tol,
            detail,
        })
    };

    let cutoff_tail = (0..=params.n_max)
        .map(|n| ctx.photon_pmf(n))
        .sum::<Result<f64>>()
        .map(|s| (1.0 - s).abs());
    push("cutoff_tail", cutoff_tail, CUTOFF_TAIL_TOL);
    push("ensemble_vs_oracle", Ok(oracle.trace_distance(&ensemble)), PATH_TOL);

    let photons = photon_distribution(&oracle);
    push("trace_residual", photons.as_ref().map(|d| d.norm_residual).map_err(Clone::clone), NORM_TOL);
    let pmf_err = photons.and_then(|d| {
        d.points
            .iter()
            .map(|&(n, p)| Ok(p - ctx.photon_pmf(n as usize)?))
            .collect::<Result<Vec<f64>>>()
            .map(max_abs)
    });
    push("photon_pmf", pmf_err, CLOSED_FORM_TOL);

    let mom = moments(&oracle);
    push(
        "mean_photons",
        mom.as_ref().map(|m| (m.mean_n - ctx.mean_photons()).abs()).map_err(Clone::clone),
        CLOSED_FORM_TOL,
    );
    let q_err = mom.and_then(|m| match (m.q(), ctx.mandel_q()) {
        (Ok(a), Ok(b)) => Ok((a - b).abs()),
        (Err(Error::UndefinedQ), Err(Error::UndefinedQ)) => Ok(0.0),
        (Err(e), _) | (_, Err(e)) => Err(e),
    });
    push("mandel_q", q_err, CLOSED_FORM_TOL);

    let quad = quadrature_check(&oracle, &ctx);
    push("quad_pdf", quad.as_ref().map(|q| q.0).map_err(Clone::clone), CLOSED_FORM_TOL);
    push("quad_norm_residual", quad.map(|q| q.1), NORM_TOL);

    push("wigner_gaussian", Ok(wigner_check(&oracle, &ctx)), CLOSED_FORM_TOL);

    if ctx.epsilon == 0.0 {
        push("pure_state_purity", Ok((oracle.purity() - 1.0).abs()), PURITY_TOL);
    }
    Ok(out)
}

fn quadrature_check(rho: &DensityMatrix<f64>, ctx: &ClosedFormContext<f64>) -> Result<(f64, f64)> {
    let half = 7.0 * ctx.quad_width_sq().sqrt() + 1.0;
    let mean = ctx.quad_mean();
    let grid = GridSpec::new(mean - half, mean + half, 0.05)?;
    let dist = quadrature_distribution(rho, &grid)?;
    let err = max_abs(dist.points.iter().map(|&(x, p)| p - ctx.quad_pdf(x)));
    Ok((err, dist.norm_residual))
}

/// 9×9 points spanning ±3 standard deviations around the closed-form center.
fn wigner_check(rho: &DensityMatrix<f64>, ctx: &ClosedFormContext<f64>) -> f64 {
    let sd = (ctx.quad_width_sq() / 4.0).sqrt();
    let c = ctx.wigner_center();
    let offsets: Vec<f64> = (-4..=4).map(|i| f64::from(i) * 0.75 * sd).collect();
    max_abs(offsets.iter().flat_map(|&dx| {
        offsets.iter().map(move |&dy| {
            let g = c + Complex::new(dx, dy);
            wigner_point(rho, g) - ctx.wigner_gaussian(g)
        })
    }))
}
