//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::altmin::{run, sweep_eps, RunOptions, SweepRow, DEFAULT_OUTER_MAXIT, DEFAULT_OUTER_TOL};
use crate::edges::{level_mask, DEFAULT_THRESHOLD};
use crate::energy::{mm_second_order_hessian, total_energy};
use crate::error::{invalid, Result};
use crate::grid::ScalarField;
use crate::imgio::{phantom_sidecar, read_f64_grid, read_pgm, write_f64_grid, write_history, write_pgm};
use crate::linsolve::SolverKind;
use crate::params::{
    default_eta, BoundaryCondition, ModelKind, ModelParams, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA,
    DEFAULT_INTENSITY_SCALE,
};
use crate::profile1d::{discrete_transition_minimum, optimal_energy, profile_energy, Profile1D};
use crate::synth::{generate, PhantomKind, PhantomSpec, DEFAULT_CONTRAST, DEFAULT_SIGMA, DEFAULT_SIZE};

#[derive(Debug, Parser)]
#[command(name = "phaseseg", version, about = "Phase-field image segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a PGM image and write u, v, the edge mask and the history.
    Segment(SegmentArgs),
    /// Write a synthetic phantom as PGM with a text sidecar.
    Synth(SynthArgs),
    /// Tabulate the optimal 1D transition profile and its energy constants.
    Profile(ProfileArgs),
    /// Segment one image for a decreasing list of eps values.
    Sweep(SweepArgs),
    /// Evaluate the energy of a given (u, v) pair.
    Energy(EnergyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "at")]
    pub model: ModelKind,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 3e-2)]
    pub eps: f64,
    /// Gradient perturbation weight [default: 1e-6 * eps^2]
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value = "neumann")]
    pub bc: BoundaryCondition,
    /// Gray-level range seen by the energy; image values are in [0, 1].
    #[arg(long, default_value_t = DEFAULT_INTENSITY_SCALE)]
    pub intensity_scale: f64,
}

impl ModelArgs {
    pub fn params_for(&self, eps: f64) -> ModelParams {
        ModelParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            eps,
            eta: self.eta.unwrap_or_else(|| default_eta(eps)),
            model: self.model,
            bc: self.bc,
            intensity_scale: self.intensity_scale,
        }
    }

    pub fn params(&self) -> ModelParams {
        self.params_for(self.eps)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = DEFAULT_OUTER_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_OUTER_MAXIT)]
    pub maxit: usize,
    #[arg(long, default_value = "auto")]
    pub solver: SolverKind,
}

impl SolveArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            tol: self.tol,
            maxit: self.maxit,
            solver: self.solver,
            ..RunOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input PGM image.
    pub input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// oned | ellipse | circles
    #[arg(long, default_value = "oned")]
    pub kind: PhantomKind,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    pub nx: usize,
    #[arg(long, default_value_t = DEFAULT_SIZE)]
    pub ny: usize,
    #[arg(long, default_value_t = DEFAULT_CONTRAST)]
    pub contrast: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output PGM; the sidecar goes next to it with extension `.txt`.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// CSV of (t, f(t)); printed to stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    /// Nodes of the discrete minimizer.
    #[arg(long, default_value_t = 4001)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    /// Decreasing eps values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_list: Vec<f64>,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// Data image (PGM).
    pub data: PathBuf,
    /// u as PGM or raw `.f64` grid.
    #[arg(long)]
    pub u: PathBuf,
    /// v as PGM or raw `.f64` grid.
    #[arg(long)]
    pub v: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// How a run ended; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    MaxitReached,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done => 0,
            Outcome::MaxitReached => 2,
        }
    }
}

fn load_field(path: &Path) -> Result<ScalarField> {
    let bytes = fs::read(path)?;
    if path.extension().is_some_and(|e| e == "f64") {
        read_f64_grid(&bytes)
    } else {
        read_pgm(&bytes)
    }
}

fn segment(a: &SegmentArgs, out: &mut dyn Write) -> Result<Outcome> {
    let g = load_field(&a.input)?;
    let params = a.model.params();
    let res = run(&g, &params, &a.solve.options())?;
    fs::create_dir_all(&a.out)?;
    let mask = level_mask(&res.v, a.threshold);
    let (u_bytes, _) = write_pgm(&res.u, 255)?;
    let (v_bytes, v_clamped) = write_pgm(&res.v, 255)?;
    let (m_bytes, _) = write_pgm(&mask.to_field(), 255)?;
    fs::write(a.out.join("u.pgm"), u_bytes)?;
    fs::write(a.out.join("v.pgm"), v_bytes)?;
    fs::write(a.out.join("v.f64"), write_f64_grid(&res.v)?)?;
    fs::write(a.out.join("mask.pgm"), m_bytes)?;
    fs::write(a.out.join("history.csv"), write_history(&res.report))?;
    let last = res.report.final_breakdown().copied().unwrap_or(res.initial_energy);
    writeln!(out, "model = {}", params.model)?;
    writeln!(out, "iterations = {}", res.report.iterations)?;
    writeln!(out, "converged = {}", res.report.converged)?;
    writeln!(out, "energy = {:.10e}", last.total)?;
    writeln!(out, "v range = [{:.6}, {:.6}]", res.v.min(), res.v.max())?;
    writeln!(out, "v.pgm clamped samples = {v_clamped}")?;
    writeln!(out, "mask pixels (v > {}) = {}", a.threshold, mask.count())?;
    Ok(if res.report.converged {
        Outcome::Done
    } else {
        Outcome::MaxitReached
    })
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<Outcome> {
    let spec = PhantomSpec {
        kind: a.kind,
        nx: a.nx,
        ny: a.ny,
        contrast: a.contrast,
        noise_sigma: a.sigma,
        seed: a.seed,
    };
    let (g, edges) = generate(&spec)?;
    let (bytes, _) = write_pgm(&g, 255)?;
    fs::write(&a.output, bytes)?;
    let side = a.output.with_extension("txt");
    fs::write(&side, phantom_sidecar(&spec, &edges))?;
    writeln!(out, "wrote {} and {}", a.output.display(), side.display())?;
    Ok(Outcome::Done)
}

fn profile(a: &ProfileArgs, out: &mut dyn Write) -> Result<Outcome> {
    let samples = Profile1D::closed_form(0.0, a.t_max, a.step)?;
    let mut csv = String::from("t,f\n");
    for (t, f) in samples.times().zip(samples.samples()) {
        csv.push_str(&format!("{t:.6},{f:.16e}\n"));
    }
    match &a.output {
        Some(p) => fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    // quadrature needs a long fine window for the constant
    let fine = Profile1D::closed_form(0.0, 50.0, 1e-3)?;
    writeln!(out, "# m (quadrature) = {:.10}", profile_energy(&fine)?)?;
    writeln!(out, "# m (exact) = {:.10}", optimal_energy(0.0))?;
    writeln!(out, "# d, m_d quadrature, m_d discrete, sqrt2 (d-1)^2")?;
    for d in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let q = profile_energy(&Profile1D::closed_form(d, 50.0, 1e-3)?)?;
        let m = discrete_transition_minimum(d, a.t_max, a.nodes)?;
        writeln!(out, "# {d:.2}, {q:.10}, {m:.10}, {:.10}", optimal_energy(d))?;
    }
    Ok(Outcome::Done)
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<Outcome> {
    let g = load_field(&a.input)?;
    let mut file = fs::File::create(&a.output)?;
    writeln!(file, "{}", SweepRow::CSV_HEADER)?;
    file.flush()?;
    let mut all_converged = true;
    sweep_eps(&g, &a.eps_list, |eps| a.model.params_for(eps), &a.solve.options(), |row| {
        all_converged &= row.converged;
        writeln!(file, "{}", row.to_csv())?;
        file.flush()?;
        writeln!(out, "{}", row.to_csv())?;
        Ok(())
    })?;
    Ok(if all_converged {
        Outcome::Done
    } else {
        Outcome::MaxitReached
    })
}

fn energy(a: &EnergyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let g = load_field(&a.data)?;
    let u = load_field(&a.u)?;
    let v = load_field(&a.v)?;
    let p = a.model.params();
    let e = total_energy(&u, &v, &g, &p)?;
    writeln!(out, "coupled = {:.16e}", e.coupled)?;
    writeln!(out, "mm = {:.16e}", e.mm)?;
    writeln!(out, "grad_perturb = {:.16e}", e.grad_perturb)?;
    writeln!(out, "fidelity = {:.16e}", e.fidelity)?;
    writeln!(out, "total = {:.16e}", e.total)?;
    writeln!(out, "mm_hessian = {:.16e}", mm_second_order_hessian(&v, &p))?;
    Ok(Outcome::Done)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Segment(a) => segment(a, out),
        Command::Synth(a) => synth(a, out),
        Command::Profile(a) => profile(a, out),
        Command::Sweep(a) => {
            if a.eps_list.len() < 2 {
                return invalid("sweep needs at least two eps values");
            }
            sweep(a, out)
        }
        Command::Energy(a) => energy(a, out),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
