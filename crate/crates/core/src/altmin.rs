//! Alternating minimization: a `v` step for fixed `u`, then a `u` step for
//! fixed `v`, each solving its quadratic subproblem.

use crate::energy::{gagliardo_ratio, total_energy, EnergyBreakdown};
use crate::error::{invalid, Error, Result};
use crate::grid::ScalarField;
use crate::linsolve::{assemble_u_system, LinearSystem, SolverKind, DEFAULT_TOL};
use crate::models::strategy;
use crate::params::ModelParams;

pub const DEFAULT_OUTER_TOL: f64 = 1e-4;
pub const DEFAULT_OUTER_MAXIT: usize = 500;

/// `max(|u_new - u_old|_inf / |u_new|_inf, |v_new - v_old|_inf / |v_new|_inf)`.
pub fn convergence_indicator(
    u_new: &ScalarField,
    u_old: &ScalarField,
    v_new: &ScalarField,
    v_old: &ScalarField,
) -> Result<f64> {
    if !(u_new.same_grid(u_old) && u_new.same_grid(v_new) && u_new.same_grid(v_old)) {
        return invalid("iterates live on different grids");
    }
    let rel = |new: &ScalarField, old: &ScalarField, what: &str| -> Result<f64> {
        let denom = new.max_abs();
        if denom == 0.0 {
            return Err(Error::Degenerate(format!(
                "{what} vanishes identically; relative change undefined"
            )));
        }
        let diff = new
            .values()
            .iter()
            .zip(old.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(diff / denom)
    };
    Ok(rel(u_new, u_old, "u")?.max(rel(v_new, v_old, "v")?))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub tol: f64,
    pub maxit: usize,
    pub solver: SolverKind,
    /// Relative residual target of each linear solve.
    pub solver_tol: f64,
    /// Iteration cap of iterative solves; `None` means ten per unknown.
    pub solver_maxit: Option<usize>,
    pub u0: Option<ScalarField>,
    pub v0: Option<ScalarField>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_OUTER_TOL,
            maxit: DEFAULT_OUTER_MAXIT,
            solver: SolverKind::Auto,
            solver_tol: DEFAULT_TOL,
            solver_maxit: None,
            u0: None,
            v0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub e_k: f64,
    /// Total energy between the two half steps of iteration `k`.
    pub after_v_step: f64,
    pub breakdown: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
}

impl IterationReport {
    pub fn final_breakdown(&self) -> Option<&EnergyBreakdown> {
        self.records.last().map(|r| &r.breakdown)
    }
}

#[derive(Debug, Clone)]
pub struct SegmentationResult {
    pub u: ScalarField,
    pub v: ScalarField,
    pub report: IterationReport,
    /// Energy of the starting pair.
    pub initial_energy: EnergyBreakdown,
}

fn solve_step(
    sys: &LinearSystem,
    warm: &ScalarField,
    opts: &RunOptions,
    k: usize,
) -> Result<ScalarField> {
    let n = sys.grid().len();
    let solver = opts.solver.resolve(n);
    let maxit = opts.solver_maxit.unwrap_or(10 * n);
    let out = solver.solve(sys, Some(warm.values()), opts.solver_tol, maxit)?;
    if !out.converged {
        return Err(Error::NonConvergence {
            iteration: k,
            residual: out.residual,
            solver_iterations: out.iterations,
        });
    }
    Ok(out.x)
}

/// `argmin_v` of the energy for fixed `u`.
pub fn v_step(u: &ScalarField, v_warm: &ScalarField, params: &ModelParams, opts: &RunOptions) -> Result<ScalarField> {
    let sys = strategy(params.model).assemble_v_system(u, params)?;
    solve_step(&sys, v_warm, opts, 0)
}

/// `argmin_u` of the energy for fixed `v`.
pub fn u_step(
    v: &ScalarField,
    g: &ScalarField,
    u_warm: &ScalarField,
    params: &ModelParams,
    opts: &RunOptions,
) -> Result<ScalarField> {
    let sys = assemble_u_system(v, g, params)?;
    solve_step(&sys, u_warm, opts, 0)
}

fn check_start(field: &Option<ScalarField>, g: &ScalarField, what: &str) -> Result<()> {
    match field {
        Some(f) if !f.same_grid(g) => invalid(format!("{what} is on a different grid than the data")),
        _ => Ok(()),
    }
}

/// Runs the alternating scheme from `u0 = g`, `v0 = 1` unless overridden.
pub fn run(g: &ScalarField, params: &ModelParams, opts: &RunOptions) -> Result<SegmentationResult> {
    params.validate()?;
    if !(opts.tol > 0.0 && opts.solver_tol > 0.0) {
        return invalid("tolerances must be positive");
    }
    if opts.maxit == 0 {
        return invalid("maxit must be at least 1");
    }
    if g.values().iter().any(|x| !(0.0..=1.0).contains(x)) {
        return invalid("data values must lie in [0, 1]");
    }
    check_start(&opts.u0, g, "u0")?;
    check_start(&opts.v0, g, "v0")?;

    let model = strategy(params.model);
    let mut u = opts.u0.clone().unwrap_or_else(|| g.clone());
    let mut v = opts.v0.clone().unwrap_or_else(|| ScalarField::constant(*g.grid(), 1.0));
    let initial_energy = total_energy(&u, &v, g, params)?;
    let mut report = IterationReport::default();

    for k in 1..=opts.maxit {
        let v_sys = model.assemble_v_system(&u, params)?;
        let v_new = solve_step(&v_sys, &v, opts, k)?;
        let after_v_step = total_energy(&u, &v_new, g, params)?.total;
        let u_sys = assemble_u_system(&v_new, g, params)?;
        let u_new = solve_step(&u_sys, &u, opts, k)?;

        let e_k = convergence_indicator(&u_new, &u, &v_new, &v)?;
        let breakdown = total_energy(&u_new, &v_new, g, params)?;
        report.records.push(IterationRecord {
            k,
            e_k,
            after_v_step,
            breakdown,
        });
        report.iterations = k;
        u = u_new;
        v = v_new;
        if e_k < opts.tol {
            report.converged = true;
            break;
        }
    }

    Ok(SegmentationResult {
        u,
        v,
        report,
        initial_energy,
    })
}

/// One row of an eps sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub min_total: f64,
    pub mm_at_convergence: f64,
    pub gagliardo_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "eps,min_total,mm_at_convergence,gagliardo_ratio,iterations";

    pub fn to_csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.eps, self.min_total, self.mm_at_convergence, self.gagliardo_ratio, self.iterations
        )
    }
}

/// Runs the scheme on `g` once per `eps` (strictly decreasing, at least
/// two values), handing each row to `emit` as soon as it is available.
pub fn sweep_eps(
    g: &ScalarField,
    eps_list: &[f64],
    params_for: impl Fn(f64) -> ModelParams,
    opts: &RunOptions,
    mut emit: impl FnMut(&SweepRow) -> Result<()>,
) -> Result<Vec<SweepRow>> {
    if eps_list.len() < 2 {
        return invalid("sweep needs at least two eps values");
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return invalid("sweep eps values must be strictly decreasing");
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let params = params_for(eps);
        let res = run(g, &params, opts)?;
        let last = res.report.final_breakdown().copied().unwrap_or(res.initial_energy);
        let ratio = match gagliardo_ratio(&res.v, &params) {
            Ok(r) => r,
            Err(Error::Degenerate(_)) => 0.0,
            Err(e) => return Err(e),
        };
        let row = SweepRow {
            eps,
            min_total: last.total,
            mm_at_convergence: last.mm,
            gagliardo_ratio: ratio,
            iterations: res.report.iterations,
            converged: res.report.converged,
        };
        emit(&row)?;
        rows.push(row);
    }
    Ok(rows)
}
