use phaseseg::altmin::{run, sweep_eps, RunOptions};
use phaseseg::edges::{level_mask, DEFAULT_THRESHOLD};
use phaseseg::energy::{mm_second_order_hessian, mm_second_order_laplacian, total_energy};
use phaseseg::linsolve::SolverKind;
use phaseseg::synth::{generate, PhantomKind, PhantomSpec};
use phaseseg::{Error, Grid2D, ModelKind, ModelParams, ScalarField};

fn small(kind: &str, sigma: f64) -> ScalarField {
    let spec = PhantomSpec {
        noise_sigma: sigma,
        seed: 4,
        ..PhantomSpec::new(kind.parse::<PhantomKind>().unwrap()).with_size(32, 32)
    };
    generate(&spec).unwrap().0
}

fn direct() -> RunOptions {
    RunOptions {
        solver: SolverKind::Direct,
        ..RunOptions::default()
    }
}

#[test]
fn energy_decreases_across_half_steps() {
    for kind in ["oned", "ellipse", "circles"] {
        let g = small(kind, 0.05);
        for (model, eps) in [
            (ModelKind::FirstOrderAT, 0.1),
            (ModelKind::SecondOrderLaplacian, 0.1),
        ] {
            let p = ModelParams::new(model, eps);
            let r = run(&g, &p, &direct()).unwrap();
            let slack = 1e-10 * (1.0 + r.initial_energy.total);
            let mut prev = r.initial_energy.total;
            for rec in &r.report.records {
                assert!(rec.after_v_step <= prev + slack, "{kind} {model} k={}", rec.k);
                assert!(rec.breakdown.total <= rec.after_v_step + slack, "{kind} {model} k={}", rec.k);
                prev = rec.breakdown.total;
            }
            assert!(r.report.iterations <= 500);
            let last = r.report.final_breakdown().unwrap();
            let again = total_energy(&r.u, &r.v, &g, &p).unwrap();
            assert_eq!(*last, again);
        }
    }
}

#[test]
fn first_order_indicator_stays_in_unit_interval() {
    for kind in ["oned", "ellipse", "circles"] {
        let g = small(kind, 0.1);
        let r = run(&g, &ModelParams::new(ModelKind::FirstOrderAT, 0.08), &direct()).unwrap();
        assert!(r.v.min() >= 0.0 && r.v.max() <= 1.0 + 1e-12, "{kind}");
        assert!(level_mask(&r.v, DEFAULT_THRESHOLD).is_empty());
    }
}

#[test]
fn direct_runs_are_bit_identical() {
    let g = small("circles", 0.1);
    let p = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.06);
    let a = run(&g, &p, &direct()).unwrap();
    let b = run(&g, &p, &direct()).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.u, b.u);
    assert_eq!(a.v, b.v);
}

#[test]
fn converged_pair_is_a_fixed_point() {
    let g = small("ellipse", 0.0);
    let p = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.08);
    let opts = RunOptions {
        tol: 1e-12,
        ..direct()
    };
    let first = run(&g, &p, &opts).unwrap();
    assert!(first.report.converged);
    let again = run(
        &g,
        &p,
        &RunOptions {
            u0: Some(first.u.clone()),
            v0: Some(first.v.clone()),
            ..opts
        },
    )
    .unwrap();
    assert_eq!(again.report.iterations, 1);
    let du = again.u.lincomb(1.0, &first.u, -1.0).max_abs();
    let dv = again.v.lincomb(1.0, &first.v, -1.0).max_abs();
    assert!(du <= 10.0 * 1e-12 && dv <= 10.0 * 1e-12, "{du} {dv}");
}

#[test]
fn laplacian_model_overshoots_and_brackets_a_step() {
    let g = small("oned", 0.0);
    let r = run(&g, &ModelParams::new(ModelKind::SecondOrderLaplacian, 0.1), &direct()).unwrap();
    assert!(r.v.max() > 1.0 + 1e-3);
    let cols = level_mask(&r.v, 1.0 + 1e-3).columns();
    // edge between columns 15 and 16: overshoot on both sides
    assert!(cols.iter().any(|c| *c < 15) && cols.iter().any(|c| *c > 16));
}

#[test]
fn hessian_and_laplacian_energies_coincide_on_columns() {
    let grid = Grid2D::new(48, 2).unwrap();
    let g = ScalarField::from_fn(grid, |x, _| if x < 0.5 { 0.25 } else { 0.75 });
    let p = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.08);
    let r = run(&g, &p, &direct()).unwrap();
    let a = mm_second_order_hessian(&r.v, &p);
    let b = mm_second_order_laplacian(&r.v, &p);
    assert!((a - b).abs() <= 1e-8, "{a} {b}");
}

#[test]
fn cg_and_direct_runs_agree() {
    let g = small("oned", 0.0);
    let p = ModelParams::new(ModelKind::SecondOrderLaplacian, 0.1);
    let a = run(&g, &p, &direct()).unwrap();
    let b = run(
        &g,
        &p,
        &RunOptions {
            solver: SolverKind::Cg,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(a.v.lincomb(1.0, &b.v, -1.0).max_abs() < 1e-6);
    assert!(a.u.lincomb(1.0, &b.u, -1.0).max_abs() < 1e-6);
}

#[test]
fn sweep_rejects_bad_lists_and_handles_constant_images() {
    let g = ScalarField::constant(Grid2D::new(16, 16).unwrap(), 0.4);
    let params = |eps| ModelParams::new(ModelKind::SecondOrderLaplacian, eps);
    let noop = |_: &_| Ok(());
    assert!(sweep_eps(&g, &[0.05], params, &direct(), noop).is_err());
    assert!(sweep_eps(&g, &[0.05, 0.08], params, &direct(), noop).is_err());
    let rows = sweep_eps(&g, &[0.08, 0.04], params, &direct(), noop).unwrap();
    for r in rows {
        assert!(r.min_total.abs() < 1e-12);
        assert_eq!(r.iterations, 1);
    }
}

#[test]
fn inputs_are_validated() {
    let g = small("oned", 0.0);
    let p = ModelParams {
        gamma: 0.0,
        ..ModelParams::new(ModelKind::FirstOrderAT, 0.1)
    };
    assert!(matches!(run(&g, &p, &direct()), Err(Error::Degenerate(_))));
    let p = ModelParams {
        eps: -1.0,
        ..ModelParams::new(ModelKind::FirstOrderAT, 0.1)
    };
    assert!(matches!(run(&g, &p, &direct()), Err(Error::InvalidInput(_))));
}
