use num_complex::Complex;
use rayon::prelude::*;

use weakval_core::analytic::ClosedFormContext;
use weakval_core::fock::{amplitude_truncation, DensityMatrix, SchemeParams};
use weakval_core::measurement::conditional_state;
use weakval_core::observables::{
    moments, photon_distribution, quadrature_distribution, wigner, Distribution1D, GridSpec, WignerGrid,
};
use weakval_core::verify::{run_sweep, VerifyConfig};
use weakval_core::Error;

use crate::args::RunConfig;
use crate::output::{Cell, Record, Table};
use crate::CliError;

pub const DEFAULT_ALPHA: f64 = 5.0;
pub const DEFAULT_R: f64 = 1.5;
pub const FIGURE_ETAS: [f64; 4] = [0.1, 0.33, 0.66, 1.0];
pub const DEFAULT_QUAD_GRID: (f64, f64, f64) = (-5.0, 25.0, 0.01);
pub const WIGNER_STEP: f64 = 0.2;
/// Automatic grids are widened at most this many times before giving up.
const MAX_WIDENINGS: usize = 8;

fn mandel_sweep() -> Vec<f64> {
    (1..=20).map(|k| f64::from(k) / 20.0).collect()
}

struct Setup {
    alpha: f64,
    r: f64,
    etas: Vec<f64>,
}

impl Setup {
    fn new(cfg: &RunConfig, default_etas: Vec<f64>) -> Result<Self, CliError> {
        let etas = cfg.etas.clone().unwrap_or(default_etas);
        Ok(Self {
            alpha: RunConfig::single(&cfg.alphas, "alpha", DEFAULT_ALPHA)?,
            r: RunConfig::single(&cfg.rs, "r", DEFAULT_R)?,
            etas,
        })
    }

    /// Validated parameters for every η before anything heavy runs.
    fn params(&self, cfg: &RunConfig) -> Result<Vec<SchemeParams<f64>>, CliError> {
        self.etas
            .iter()
            .map(|&eta| {
                SchemeParams::builder(self.alpha, self.r, eta)
                    .n_det(cfg.n_det)
                    .n_max_opt(cfg.n_max)
                    .tail_tol(cfg.tail_tol)
                    .hard_cap(cfg.hard_cap)
                    .build()
                    .map_err(CliError::from)
            })
            .collect()
    }

    fn provenance(&self, cfg: &RunConfig) -> Record {
        vec![
            ("alpha", self.alpha.into()),
            ("r", self.r.into()),
            ("n_det", cfg.n_det.into()),
            ("n_max", cfg.n_max.map_or(Cell::from("auto"), Cell::from)),
            ("tail_tol", cfg.tail_tol.into()),
            ("hard_cap", cfg.hard_cap.into()),
        ]
    }
}

/// Closed forms exist only for the vacuum detection record.
fn closed_form(params: &SchemeParams<f64>) -> Result<Option<ClosedFormContext<f64>>, CliError> {
    if params.n_det == 0 {
        Ok(Some(ClosedFormContext::from_params(params)?))
    } else {
        Ok(None)
    }
}

/// Pointwise observables use the stricter amplitude cutoff unless `--nmax` fixed one.
fn pointwise_state(params: &SchemeParams<f64>, cfg: &RunConfig) -> Result<(usize, DensityMatrix<f64>), CliError> {
    let mut p = *params;
    if cfg.n_max.is_none() {
        p.n_max = amplitude_truncation(&p)?;
    }
    Ok((p.n_max, conditional_state(&p)?))
}

/// `min:max:step`, rounded so snapped bounds print without binary noise.
fn grid_text(g: &GridSpec<f64>) -> String {
    let tidy = |v: f64| (v * 1e9).round() / 1e9;
    format!("{}:{}:{}", tidy(g.min), tidy(g.max), tidy(g.step))
}

fn widen(g: &GridSpec<f64>) -> GridSpec<f64> {
    let half = (g.max - g.min) / 2.0;
    GridSpec { min: g.min - half, max: g.max + half, step: g.step }
}

/// Evaluates on `grid`, doubling its width on a boundary failure when the grid
/// was chosen automatically. User grids are never changed.
fn on_grid<R>(
    grid: GridSpec<f64>,
    automatic: bool,
    mut eval: impl FnMut(&GridSpec<f64>) -> Result<R, Error>,
) -> Result<(GridSpec<f64>, R), CliError> {
    let mut grid = grid;
    for _ in 0..MAX_WIDENINGS {
        match eval(&grid) {
            Err(Error::GridTooNarrow { .. }) if automatic => grid = widen(&grid),
            other => return Ok((grid, other?)),
        }
    }
    Ok((grid, eval(&grid)?))
}

struct QuadRun {
    eta: f64,
    n_max: usize,
    grid: GridSpec<f64>,
    dist: Distribution1D<f64>,
    ctx: Option<ClosedFormContext<f64>>,
}

pub fn quadrature(cfg: &RunConfig) -> Result<Table, CliError> {
    let setup = Setup::new(cfg, FIGURE_ETAS.to_vec())?;
    let all = setup.params(cfg)?;
    let (lo, hi, step) = DEFAULT_QUAD_GRID;
    let (grid, automatic) = match cfg.grid {
        Some(g) => (g, false),
        None => (GridSpec::new(lo, hi, step)?, true),
    };
    let runs = all
        .par_iter()
        .map(|p| {
            let ctx = closed_form(p)?;
            let (n_max, rho) = pointwise_state(p, cfg)?;
            let (grid, dist) = on_grid(grid, automatic, |g| quadrature_distribution(&rho, g))?;
            Ok(QuadRun { eta: p.eta, n_max, grid, dist, ctx })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table {
        command: "quadrature",
        params: setup.provenance(cfg),
        runs: Vec::new(),
        columns: vec!["eta", "x", "p_numeric", "p_analytic"],
        rows: Vec::new(),
    };
    for run in runs {
        let (x_peak, _) = run.dist.argmax();
        table.runs.push(vec![
            ("eta", run.eta.into()),
            ("n_max", run.n_max.into()),
            ("grid", grid_text(&run.grid).into()),
            ("norm_residual", run.dist.norm_residual.into()),
            ("argmax", x_peak.into()),
            ("argmax_analytic", run.ctx.as_ref().map(|c| c.quad_mean()).into()),
        ]);
        for &(x, p) in &run.dist.points {
            let analytic = run.ctx.as_ref().map(|c| c.quad_pdf(x));
            table.rows.push(vec![run.eta.into(), x.into(), p.into(), analytic.into()]);
        }
    }
    Ok(table)
}

pub fn photons(cfg: &RunConfig) -> Result<Table, CliError> {
    let setup = Setup::new(cfg, FIGURE_ETAS.to_vec())?;
    let all = setup.params(cfg)?;
    let runs = all
        .par_iter()
        .map(|p| {
            let ctx = closed_form(p)?;
            let dist = photon_distribution(&conditional_state(p)?)?;
            let analytic = match &ctx {
                Some(c) => Some(
                    dist.points
                        .iter()
                        .map(|&(n, _)| c.photon_pmf(n as usize))
                        .collect::<Result<Vec<f64>, Error>>()?,
                ),
                None => None,
            };
            Ok((p, dist, ctx, analytic))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table {
        command: "photons",
        params: setup.provenance(cfg),
        runs: Vec::new(),
        columns: vec!["eta", "n", "p_numeric", "p_analytic"],
        rows: Vec::new(),
    };
    for (p, dist, ctx, analytic) in runs {
        table.runs.push(vec![
            ("eta", p.eta.into()),
            ("n_max", p.n_max.into()),
            ("norm_residual", dist.norm_residual.into()),
            ("argmax", (dist.argmax().0 as usize).into()),
            ("mean", dist.mean().into()),
            ("mean_analytic", ctx.as_ref().map(|c| c.mean_photons()).into()),
        ]);
        for (i, &(n, prob)) in dist.points.iter().enumerate() {
            let an = analytic.as_ref().map(|a| a[i]);
            table.rows.push(vec![p.eta.into(), (n as usize).into(), prob.into(), an.into()]);
        }
    }
    Ok(table)
}

pub fn mandel(cfg: &RunConfig) -> Result<Table, CliError> {
    let setup = Setup::new(cfg, mandel_sweep())?;
    let all = setup.params(cfg)?;
    let runs = all
        .par_iter()
        .map(|p| {
            let ctx = closed_form(p)?;
            let mom = moments(&conditional_state(p)?)?;
            let analytic = match &ctx {
                Some(c) => match c.mandel_q() {
                    Ok(q) => Some(q),
                    Err(Error::UndefinedQ) => None,
                    Err(e) => return Err(e.into()),
                },
                None => None,
            };
            Ok((p, mom, analytic))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let qs: Vec<Option<f64>> = runs.iter().map(|r| r.1.mandel_q).collect();
    let monotone = qs.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b < a));
    let high_eta_max = runs
        .iter()
        .filter(|r| r.0.eta > 0.9)
        .filter_map(|r| r.1.mandel_q)
        .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.max(q))));

    let mut params = setup.provenance(cfg);
    params.push(("decreasing_in_sweep_order", monotone.into()));
    params.push(("max_q_above_eta_0.9", high_eta_max.into()));
    let mut table = Table {
        command: "mandel",
        params,
        runs: Vec::new(),
        columns: vec!["eta", "q_numeric", "q_analytic", "mean_numeric", "var_numeric"],
        rows: Vec::new(),
    };
    for (p, mom, analytic) in runs {
        table.runs.push(vec![("eta", p.eta.into()), ("n_max", p.n_max.into())]);
        table.rows.push(vec![
            p.eta.into(),
            mom.mandel_q.into(),
            analytic.into(),
            mom.mean_n.into(),
            mom.var_n.into(),
        ]);
    }
    Ok(table)
}

/// `⟨a⟩` and the photon number beyond the coherent part, from the matrix elements.
fn center_and_spread(rho: &DensityMatrix<f64>) -> (Complex<f64>, f64) {
    let mut a = Complex::new(0.0, 0.0);
    let mut n = 0.0;
    for m in 0..rho.dim() {
        n += m as f64 * rho.get(m, m).re;
        if m > 0 {
            a += rho.get(m - 1, m) * (m as f64).sqrt();
        }
    }
    (a, (n - a.norm_sqr()).max(0.0))
}

fn snapped_grid(center: f64, half: f64) -> Result<GridSpec<f64>, Error> {
    let lo = ((center - half) / WIGNER_STEP).floor() * WIGNER_STEP;
    let hi = ((center + half) / WIGNER_STEP).ceil() * WIGNER_STEP;
    GridSpec::new(lo, hi, WIGNER_STEP)
}

struct WignerRun {
    eta: f64,
    n_max: usize,
    grid: WignerGrid<f64>,
    ctx: Option<ClosedFormContext<f64>>,
}

pub fn wigner_cmd(cfg: &RunConfig) -> Result<Table, CliError> {
    let setup = Setup::new(cfg, FIGURE_ETAS.to_vec())?;
    let all = setup.params(cfg)?;
    // Points within a grid already run in parallel.
    let runs = all
        .iter()
        .map(|p| {
            let ctx = closed_form(p)?;
            let (n_max, rho) = pointwise_state(p, cfg)?;
            let (c, excess) = center_and_spread(&rho);
            let half = 5.0 * (excess + 0.5).sqrt() + 1.0;
            let re_auto = cfg.grid.is_none();
            let im_auto = cfg.im_grid.is_none();
            let re = match cfg.grid {
                Some(g) => g,
                None => snapped_grid(c.re, half)?,
            };
            let im = match cfg.im_grid {
                Some(g) => g,
                None => snapped_grid(c.im, half)?,
            };
            let mut im_cur = im;
            let (_, grid) = on_grid(re, re_auto || im_auto, |g_re| {
                let res = wigner(&rho, g_re, &im_cur);
                if matches!(res, Err(Error::GridTooNarrow { .. })) && im_auto {
                    im_cur = widen(&im_cur);
                }
                res
            })?;
            Ok(WignerRun { eta: p.eta, n_max, grid, ctx })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut table = Table {
        command: "wigner",
        params: setup.provenance(cfg),
        runs: Vec::new(),
        columns: vec!["eta", "re", "im", "w_numeric", "w_analytic"],
        rows: Vec::new(),
    };
    for run in runs {
        let g = &run.grid;
        let (peak_re, peak_im, peak) = g.peak();
        let mass = g.integral();
        let (re_pts, im_pts) = (g.re.points(), g.im.points());
        let marginal = g.marginal_re();
        let center_re = weighted_mean(&re_pts, &marginal, g.re.step) / mass;
        let marginal_im: Vec<f64> = g.values.iter().map(|row| trapezoid(row, g.re.step)).collect();
        let center_im = weighted_mean(&im_pts, &marginal_im, g.im.step) / mass;
        table.runs.push(vec![
            ("eta", run.eta.into()),
            ("n_max", run.n_max.into()),
            ("re_grid", grid_text(&g.re).into()),
            ("im_grid", grid_text(&g.im).into()),
            ("integral", mass.into()),
            ("min", g.min_value().into()),
            ("center_re", center_re.into()),
            ("center_im", center_im.into()),
            ("peak_re", peak_re.into()),
            ("peak_im", peak_im.into()),
            ("peak", peak.into()),
            ("center_re_analytic", run.ctx.as_ref().map(|c| c.wigner_center().re).into()),
            ("center_im_analytic", run.ctx.as_ref().map(|c| c.wigner_center().im).into()),
            ("peak_analytic", run.ctx.as_ref().map(|c| c.wigner_peak()).into()),
        ]);
        for (j, row) in g.values.iter().enumerate() {
            for (i, &w) in row.iter().enumerate() {
                let gamma = Complex::new(re_pts[i], im_pts[j]);
                let analytic = run.ctx.as_ref().map(|c| c.wigner_gaussian(gamma));
                table
                    .rows
                    .push(vec![run.eta.into(), re_pts[i].into(), im_pts[j].into(), w.into(), analytic.into()]);
            }
        }
    }
    Ok(table)
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 || i + 1 == n { v / 2.0 } else { v })
        .sum::<f64>()
        * step
}

fn weighted_mean(points: &[f64], weights: &[f64], step: f64) -> f64 {
    let products: Vec<f64> = points.iter().zip(weights).map(|(x, w)| x * w).collect();
    trapezoid(&products, step)
}

pub fn verify(cfg: &RunConfig) -> Result<(Table, bool), CliError> {
    let defaults = VerifyConfig::default();
    let vc = VerifyConfig {
        alphas: cfg.alphas.clone().unwrap_or(defaults.alphas),
        rs: cfg.rs.clone().unwrap_or(defaults.rs),
        etas: cfg.etas.clone().unwrap_or(defaults.etas),
        tail_tol: cfg.tail_tol,
        hard_cap: cfg.hard_cap,
    };
    if cfg.n_max.is_some() {
        return Err(CliError::config("verify chooses its own cutoffs; --nmax is not accepted"));
    }
    if cfg.n_det != 0 {
        return Err(CliError::config("verify compares closed forms that exist only for --ndet 0"));
    }
    // Reject malformed points up front rather than reporting them as failed checks.
    for &a in &vc.alphas {
        for &r in &vc.rs {
            for &e in &vc.etas {
                SchemeParams::new(a, r, e)?;
            }
        }
    }
    let report = run_sweep(&vc);
    let passed = report.all_passed();
    let failed = report.failures().count();

    let table = Table {
        command: "verify",
        params: vec![
            ("tail_tol", vc.tail_tol.into()),
            ("hard_cap", vc.hard_cap.into()),
            ("points", (vc.alphas.len() * vc.rs.len() * vc.etas.len()).into()),
            ("checks", report.checks.len().into()),
            ("failed", failed.into()),
            ("passed", passed.into()),
        ],
        runs: Vec::new(),
        columns: vec!["check", "alpha", "r", "eta", "n_max", "value", "tol", "passed", "detail"],
        rows: report
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.into(),
                    c.alpha.into(),
                    c.r.into(),
                    c.eta.into(),
                    c.n_max.into(),
                    c.value.into(),
                    c.tol.into(),
                    c.passed.into(),
                    c.detail.clone().into(),
                ]
            })
            .collect(),
    };
    Ok((table, passed))
}
