//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use phaseseg::altmin::{run, IterationRecord, IterationReport, RunOptions, SegmentationResult};
use phaseseg::edges::{level_mask, two_sided_midpoints, DEFAULT_THRESHOLD};
use phaseseg::energy::{mm_second_order_hessian, mm_second_order_laplacian};
use phaseseg::grid::{bilaplacian, div_adjoint, grad_forward, laplacian};
use phaseseg::imgio::{encode_pgm, parse_pgm, quantize, read_history, read_pgm, write_history, PgmFormat, PgmImage};
use phaseseg::profile1d::{discrete_transition_minimum, hermite_bridge_energy};
use phaseseg::synth::{generate, PhantomKind, PhantomSpec};
use phaseseg::{EnergyBreakdown, Grid2D, ModelKind, ModelParams, ScalarField, VectorField2};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const PHANTOMS: [&str; 3] = ["oned", "ellipse", "circles"];
const DESCENT_SLACK: f64 = 1e-10;
const OVERSHOOT: f64 = 1.005;
// bound on the Gagliardo ratio across the eps sweep
const GAGLIARDO_BOUND: f64 = 1.0;

type Verdict = (bool, String);

fn phaseseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaseseg"))
        .args(args)
        .output()
        .expect("spawn phaseseg")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn field(g: Grid2D, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField::new(g, (0..g.len()).map(|_| 2.0 * unit(rng) - 1.0).collect()).unwrap()
}

struct Runs {
    // (phantom, model, eps, result) on the default noisy phantoms
    noisy: Vec<(&'static str, ModelKind, f64, SegmentationResult)>,
    // second-order, eps = 0.09, noiseless step
    step: SegmentationResult,
    step_params: ModelParams,
}

fn phantom(name: &str, sigma: f64) -> ScalarField {
    let spec = PhantomSpec {
        noise_sigma: sigma,
        ..PhantomSpec::new(name.parse::<PhantomKind>().unwrap())
    };
    generate(&spec).unwrap().0
}

fn solve_all() -> Runs {
    let configs = [
        (ModelKind::FirstOrderAT, 0.03),
        (ModelKind::SecondOrderLaplacian, 0.03),
        (ModelKind::SecondOrderLaplacian, 0.09),
    ];
    let mut noisy = Vec::new();
    for name in PHANTOMS {
        let g = phantom(name, phaseseg::synth::DEFAULT_SIGMA);
        for (model, eps) in configs {
            let res = run(&g, &ModelParams::new(model, eps), &RunOptions::default()).unwrap();
            noisy.push((name, model, eps, res));
        }
    }
    let step_params = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.09);
    let step = run(&phantom("oned", 0.0), &step_params, &RunOptions::default()).unwrap();
    Runs {
        noisy,
        step,
        step_params,
    }
}

fn criterion_1() -> Verdict {
    let t0 = Instant::now();
    let out = phaseseg(&["profile", "--t-max", "20", "--nodes", "4001"]);
    let secs = t0.elapsed().as_secs_f64();
    if out.status.code() != Some(0) {
        return (false, format!("profile exited with {:?}", out.status.code()));
    }
    let text = String::from_utf8(out.stdout).unwrap();
    let quad: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# m (quadrature) = "))
        .and_then(|x| x.trim().parse().ok())
        .unwrap_or(f64::NAN);
    let discrete: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# 0.00, "))
        .and_then(|x| x.split(',').nth(1))
        .and_then(|x| x.trim().parse().ok())
        .unwrap_or(f64::NAN);
    let (eq, ed) = ((quad - SQRT2).abs(), (discrete - SQRT2).abs());
    (
        eq <= 1e-6 && ed <= 2e-3 && secs < 5.0,
        format!("quadrature err {eq:.2e}, discrete err {ed:.2e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Verdict {
    let ds = [0.0, 0.25, 0.5, 0.75];
    let mut worst = 0.0f64;
    let mut ms = Vec::new();
    for d in ds {
        let m = discrete_transition_minimum(d, 20.0, 4001).unwrap();
        worst = worst.max((m - SQRT2 * (d - 1.0) * (d - 1.0)).abs());
        ms.push(m);
    }
    // least-squares c0 + c1 d + c2 d^2
    let a = DMatrix::from_fn(ds.len(), 3, |i, j| ds[i].powi(j as i32));
    let coef = a.svd(true, true).solve(&DVector::from_vec(ms), 1e-14).unwrap();
    let rel = (coef[2] - SQRT2).abs() / SQRT2;
    (
        worst <= 2e-3 && rel <= 0.01,
        format!("max |m_d - law| {worst:.2e}, leading coefficient {:.6} ({:.3}%)", coef[2], 100.0 * rel),
    )
}

fn criterion_3() -> Verdict {
    let g0 = hermite_bridge_energy(0.0, 0.0);
    let exact: f64 = 433.0 / 35.0;
    let ulps = (g0.to_bits() as i64 - exact.to_bits() as i64).abs();
    let vals: Vec<f64> = (1..=64)
        .map(|k| hermite_bridge_energy(1.0 - 1.0 / k as f64, 1.0 / k as f64))
        .collect();
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    // G(1 - t, t) is t^2 G(0, 1), so k^2 G_k is constant and G_k -> 0
    let scaled = vals
        .iter()
        .enumerate()
        .map(|(i, g)| ((i + 1) as f64).powi(2) * g)
        .map(|x| (x - vals[0]).abs() / vals[0])
        .fold(0.0f64, f64::max);
    (
        ulps <= 4 && decreasing && scaled <= 1e-12,
        format!(
            "G(0,0) = {g0:.17} ({ulps} ulp from 433/35), decreasing {decreasing}, G_64 = {:.3e}",
            vals[63]
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = Grid2D::new(16, 16).unwrap();
    let (mut adj, mut sym, mut bil, mut neg) = (0.0f64, 0.0f64, 0.0f64, false);
    for _ in 0..100 {
        let u = field(g, &mut rng);
        let w = field(g, &mut rng);
        let p = VectorField2::new(g, field(g, &mut rng).into_values(), field(g, &mut rng).into_values()).unwrap();
        let lhs = grad_forward(&u).dot(&p);
        adj = adj.max((lhs + u.dot(&div_adjoint(&p))).abs() / lhs.abs().max(1.0));
        let a = laplacian(&u).dot(&w);
        sym = sym.max((a - u.dot(&laplacian(&w))).abs() / a.abs().max(1.0));
        let lu = laplacian(&u);
        let (c, d) = (bilaplacian(&u).dot(&u), lu.dot(&lu));
        neg |= c < 0.0;
        bil = bil.max((c - d).abs() / d.max(1.0));
    }
    (
        adj <= 1e-12 && sym <= 1e-12 && bil <= 1e-12 && !neg,
        format!("adjointness {adj:.1e}, symmetry {sym:.1e}, bilaplacian {bil:.1e}"),
    )
}

fn monotone(initial: f64, records: &[IterationRecord]) -> Option<usize> {
    let mut prev = initial;
    for r in records {
        let tol = DESCENT_SLACK * prev.abs();
        if r.after_v_step > prev + tol || r.breakdown.total > r.after_v_step + DESCENT_SLACK * r.after_v_step.abs() {
            return Some(r.k);
        }
        prev = r.breakdown.total;
    }
    None
}

fn criterion_5(runs: &Runs) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, model, eps, res) in &runs.noisy {
        let r = &res.report;
        let last = r.records.last().map_or(f64::INFINITY, |x| x.e_k);
        let bad = monotone(res.initial_energy.total, &r.records);
        let pass = bad.is_none() && r.converged && last < 1e-4 && r.iterations <= 500;
        ok &= pass;
        if !pass {
            notes.push(format!("{name}/{model}/{eps}: iterations {}, increase at {bad:?}", r.iterations));
        }
    }
    let its: Vec<String> = runs.noisy.iter().map(|x| x.3.report.iterations.to_string()).collect();
    (ok, format!("9 runs, iterations [{}] {}", its.join(" "), notes.join("; ")))
}

fn criterion_6(runs: &Runs) -> Verdict {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, model, _, res) in &runs.noisy {
        if *model == ModelKind::FirstOrderAT {
            lo = lo.min(res.v.min());
            hi = hi.max(res.v.max());
        }
    }
    let max = runs.step.v.max();
    let mask = level_mask(&runs.step.v, OVERSHOOT).count();
    (
        lo >= 0.0 && hi <= 1.0 + 1e-12 && max > OVERSHOOT && mask > 0,
        format!("first-order v in [{lo:.3e}, {hi:.12}], second-order max v {max:.4}, mask {mask} px"),
    )
}

fn criterion_7(runs: &Runs) -> Verdict {
    let v = &runs.step.v;
    let g = v.grid();
    let row = g.ny() / 2;
    let mids = two_sided_midpoints(v, row, DEFAULT_THRESHOLD).unwrap();
    let edge = 0.5 * (g.nx() - 1) as f64 * g.h();
    let near = mids.iter().filter(|m| (*m - edge).abs() <= 2.0 * g.h()).count();
    let cells: Vec<String> = mids.iter().map(|m| format!("{:.2}", (m - edge) / g.h())).collect();
    (
        mids.len() == 1 && near == 1,
        format!("{} midpoint(s), offsets from edge in cells [{}]", mids.len(), cells.join(" ")),
    )
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("step.pgm");
    let csv = dir.path().join("sweep.csv");
    let out = phaseseg(&["synth", "--kind", "oned", "--sigma", "0", "-o", s(&img)]);
    if out.status.code() != Some(0) {
        return (false, "synth failed".into());
    }
    let out = phaseseg(&[
        "sweep",
        s(&img),
        "--model",
        "laplacian",
        "--eps-list",
        "0.08,0.04,0.02",
        "-o",
        s(&csv),
    ]);
    if out.status.code() != Some(0) {
        return (false, format!("sweep exited with {:?}", out.status.code()));
    }
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let target = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.08).beta;
    let gaps: Vec<f64> = rows.iter().map(|r| (r[2] - target).abs() / target).collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    let final_gap = *gaps.last().unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let bounded = ratios.iter().all(|r| r.is_finite() && *r <= GAGLIARDO_BOUND);
    let fmt = |v: &[f64], pct: bool| {
        v.iter()
            .map(|x| if pct { format!("{:.2}%", 100.0 * x) } else { format!("{x:.3}") })
            .collect::<Vec<_>>()
            .join(" ")
    };
    (
        shrinking && final_gap < 0.15 && bounded,
        format!(
            "gaps [{}] shrinking {shrinking}, gagliardo [{}] bounded by {GAGLIARDO_BOUND} {bounded}",
            fmt(&gaps, true),
            fmt(&ratios, false)
        ),
    )
}

fn criterion_9(runs: &Runs) -> Verdict {
    let p = runs.step_params;
    let a = mm_second_order_hessian(&runs.step.v, &p);
    let b = mm_second_order_laplacian(&runs.step.v, &p);
    // a second, coarse y-constant case
    let grid = Grid2D::new(64, 2).unwrap();
    let g = ScalarField::from_fn(grid, |x, _| if x < 0.3 { 0.2 } else { 0.9 });
    let res = run(&g, &p, &RunOptions::default()).unwrap();
    let c = mm_second_order_hessian(&res.v, &p);
    let d = mm_second_order_laplacian(&res.v, &p);
    let (e1, e2) = ((a - b).abs(), (c - d).abs());
    (e1 <= 1e-8 && e2 <= 1e-8, format!("128x128 diff {e1:.2e}, 64x2 diff {e2:.2e}"))
}

fn random_pgm(rng: &mut ChaCha8Rng) -> PgmImage {
    let width = 2 + (rng.next_u32() % 15) as usize;
    let height = 2 + (rng.next_u32() % 15) as usize;
    let maxval = 1 + (rng.next_u32() % 65535) as u16;
    let pixels = (0..width * height)
        .map(|_| (rng.next_u32() % (maxval as u32 + 1)) as u16)
        .collect();
    let format = if rng.next_u32() % 2 == 0 {
        PgmFormat::Ascii
    } else {
        PgmFormat::Binary
    };
    PgmImage {
        format,
        width,
        height,
        maxval,
        pixels,
    }
}

fn pgm_identity(img: &PgmImage) -> bool {
    let bytes = encode_pgm(img);
    let parsed = match parse_pgm(&bytes) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let f = match read_pgm(&bytes) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let (again, clamped) = quantize(&f, img.maxval, img.format).unwrap();
    parsed == *img && again == *img && clamped == 0 && encode_pgm(&again) == bytes
}

fn random_history(rng: &mut ChaCha8Rng) -> IterationReport {
    let n = (rng.next_u32() % 12) as usize;
    // any finite normal value: random sign and mantissa, exponent field in 1..=2046
    let mut real = || {
        let bits = rng.next_u64() & 0x800f_ffff_ffff_ffff;
        f64::from_bits(bits | ((rng.next_u64() % 2046 + 1) << 52))
    };
    let records = (0..n)
        .map(|k| IterationRecord {
            k: k + 1,
            e_k: real().abs(),
            after_v_step: 0.0,
            breakdown: EnergyBreakdown::new(real(), real(), real(), real()),
        })
        .collect();
    IterationReport {
        records,
        converged: true,
        iterations: n,
    }
}

fn history_identity(rep: &IterationReport) -> bool {
    let text = write_history(rep);
    let Ok(rows) = read_history(&text) else {
        return false;
    };
    let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
    rows.len() == rep.records.len()
        && rep.records.iter().zip(&rows).all(|(r, b)| {
            r.k == b.k
                && same(r.e_k, b.e_k)
                && same(r.breakdown.coupled, b.breakdown.coupled)
                && same(r.breakdown.mm, b.breakdown.mm)
                && same(r.breakdown.grad_perturb, b.breakdown.grad_perturb)
                && same(r.breakdown.fidelity, b.breakdown.fidelity)
                && same(r.breakdown.total, b.breakdown.total)
        })
}

fn cli_outputs(dir: &Path) -> Option<Vec<(String, Vec<u8>)>> {
    let img = dir.join("g.pgm");
    let out = dir.join("out");
    let synth = phaseseg(&["synth", "--kind", "circles", "--nx", "64", "--ny", "64", "--seed", "7", "-o", s(&img)]);
    let seg = phaseseg(&[
        "segment",
        s(&img),
        "-o",
        s(&out),
        "--model",
        "laplacian",
        "--eps",
        "0.09",
        "--solver",
        "direct",
    ]);
    if synth.status.code() != Some(0) || seg.status.code() != Some(0) {
        return None;
    }
    let mut files = vec![
        ("g.pgm".to_string(), fs::read(&img).ok()?),
        ("g.txt".to_string(), fs::read(dir.join("g.txt")).ok()?),
        ("stdout".to_string(), seg.stdout),
    ];
    for name in ["u.pgm", "v.pgm", "v.f64", "mask.pgm", "history.csv"] {
        files.push((name.to_string(), fs::read(out.join(name)).ok()?));
    }
    Some(files)
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pgm_fail = 0;
    let mut hist_fail = 0;
    for _ in 0..1000 {
        if !pgm_identity(&random_pgm(&mut rng)) {
            pgm_fail += 1;
        }
        if !history_identity(&random_history(&mut rng)) {
            hist_fail += 1;
        }
    }
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let identical = match (cli_outputs(a.path()), cli_outputs(b.path())) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    };
    (
        pgm_fail == 0 && hist_fail == 0 && identical,
        format!("pgm failures {pgm_fail}/1000, history failures {hist_fail}/1000, cli outputs identical {identical}"),
    )
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, (ok, detail): Verdict, t: Instant| {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("criterion {n}: {tag} {detail} [{:.1} s]", t.elapsed().as_secs_f64());
        if !ok {
            failed += 1;
        }
    };
    let t = Instant::now();
    report(1, criterion_1(), t);
    let t = Instant::now();
    report(2, criterion_2(), t);
    let t = Instant::now();
    report(3, criterion_3(), t);
    let t = Instant::now();
    report(4, criterion_4(), t);
    let t = Instant::now();
    let runs = solve_all();
    report(5, criterion_5(&runs), t);
    let t = Instant::now();
    report(6, criterion_6(&runs), t);
    report(7, criterion_7(&runs), t);
    let t = Instant::now();
    report(8, criterion_8(), t);
    let t = Instant::now();
    report(9, criterion_9(&runs), t);
    let t = Instant::now();
    report(10, criterion_10(), t);
    println!(
        "acceptance: {} of 10 passed in {:.1} s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
