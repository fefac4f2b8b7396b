//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use viscontact::contact::ContactLaw;
use viscontact::fem::{self, DofMap, LoadData, MaterialParams};
use viscontact::harness::{self, ErrorMeasure, Scenario, ScenarioRun, SCENARIO_NAMES};
use viscontact::linalg::{BandCholesky, CsrMatrix};
use viscontact::mesh::Mesh;
use viscontact::nsopt::{powell_minimize, stationarity_gap, PowellConfig};
use viscontact::stepper::StepperConfig;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fmt_errors(e: &[f64]) -> String {
    e.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn time_axis() -> Check {
    let s = Scenario::preset("convergence").map_err(|e| e.to_string())?;
    let r = harness::time_sweep(&s, 32, &[2, 4, 8, 16], 64, &StepperConfig::default(), ErrorMeasure::FinalTime)
        .map_err(|e| e.to_string())?;
    let slope = harness::emit_loglog(&r, None).slope.ok_or("no slope")?;
    let msg = format!("errors [{}] slope {slope:.3}", fmt_errors(&r.errors()));
    ensure(r.strictly_decreasing(), format!("not strictly decreasing: {msg}"))?;
    ensure(slope >= 0.8, format!("slope below 0.8: {msg}"))?;
    Ok(msg)
}

fn space_axis() -> Check {
    let s = Scenario::preset("convergence").map_err(|e| e.to_string())?;
    let r = harness::space_sweep(&s, 64, &[2, 4, 8, 16], 64, &StepperConfig::default(), ErrorMeasure::FinalTime)
        .map_err(|e| e.to_string())?;
    let slope = harness::emit_loglog(&r, None).slope.ok_or("no slope")?;
    let msg = format!("errors [{}] slope {slope:.3}", fmt_errors(&r.errors()));
    ensure(r.strictly_decreasing(), format!("not strictly decreasing: {msg}"))?;
    ensure(slope >= 0.7, format!("slope below 0.7: {msg}"))?;
    Ok(msg)
}

fn dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let d = m.to_dense();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i][j])
}

fn frictionless_oracle() -> Check {
    let mut s = Scenario::preset("base").map_err(|e| e.to_string())?.with_resolution(16, 16);
    s.law = ContactLaw::frictionless_free();
    let p = s.problem().map_err(|e| e.to_string())?;
    let h = p.run(&StepperConfig::default()).map_err(|e| e.to_string())?;
    let a = dense(&p.viscosity).cholesky().ok_or("A not SPD")?;
    let b = dense(&p.elasticity);
    let f = DVector::from_column_slice(p.loads.at(1));
    let k = p.grid.step_size();
    let mut d = DVector::zeros(p.n_free());
    let mut worst = 0.0f64;
    for j in 1..=16 {
        let v = a.solve(&(&f - &b * &d));
        let diff: Vec<f64> = h.velocity(j).iter().zip(v.iter()).map(|(x, y)| x - y).collect();
        let e = fem::v_norm(&p.mesh, &p.dofmap, &diff).map_err(|e| e.to_string())?
            / fem::v_norm(&p.mesh, &p.dofmap, v.as_slice()).map_err(|e| e.to_string())?;
        worst = worst.max(e);
        d += k * v;
    }
    ensure(worst <= 1e-6, format!("worst relative V-norm error {worst:.3e}"))?;
    Ok(format!("worst relative V-norm error {worst:.3e} over 16 steps"))
}

/// Best value of `f` on a uniform grid with spacing `step` over `[lo, hi]`.
fn scan_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).map(|x| (x, f(x))).fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

/// Coarse 2D scan followed by a fine scan around the coarse winner.
fn scan_2d(f: impl Fn(f64, f64) -> f64) -> ([f64; 2], f64) {
    let mut best = ([0.0, 0.0], f64::INFINITY);
    let scan = |cx: f64, cy: f64, half: f64, step: f64, best: &mut ([f64; 2], f64)| {
        let n = (2.0 * half / step).round() as usize;
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (cx - half + i as f64 * step, cy - half + j as f64 * step);
                let v = f(x, y);
                if v < best.1 {
                    *best = ([x, y], v);
                }
            }
        }
    };
    scan(0.0, 0.0, 3.0, 1e-3, &mut best);
    let c = best.0;
    scan(c[0], c[1], 2e-3, 1e-6, &mut best);
    best
}

fn optimizer(runs: &[ScenarioRun]) -> Check {
    let cfg = PowellConfig::default();
    let mono = |h: &[f64]| h.windows(2).all(|w| w[1] <= w[0]);

    let q = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
    let r = powell_minimize(&q, &[0.0, 0.0], &cfg).map_err(|e| e.to_string())?;
    let eq = ((r.argmin[0] - 1.0).powi(2) + (r.argmin[1] + 2.0).powi(2)).sqrt();
    ensure(eq <= 1e-8 && mono(&r.history), format!("quadratic error {eq:.3e}"))?;

    let f1 = |x: f64| x.abs() + 0.5 * (x - 1.0).powi(2);
    let r1 = powell_minimize(&|x: &[f64]| f1(x[0]), &[2.0], &cfg).map_err(|e| e.to_string())?;
    let (x1, v1) = scan_1d(f1, -2.0, 2.0, 1e-6);
    let e1 = (r1.argmin[0] - x1).abs();
    ensure(e1 <= 1e-4 && (r1.value - v1).abs() <= 1e-6 && mono(&r1.history), format!("1D kink error {e1:.3e}"))?;

    let f2 = |x: f64, y: f64| x.abs() + y.abs() + 0.5 * ((x - 1.0).powi(2) + (y - 1.0).powi(2));
    let r2 = powell_minimize(&|x: &[f64]| f2(x[0], x[1]), &[-1.0, 2.0], &cfg).map_err(|e| e.to_string())?;
    let (x2, v2) = scan_2d(f2);
    let e2 = (r2.argmin[0] - x2[0]).hypot(r2.argmin[1] - x2[1]);
    ensure(e2 <= 1e-4 && (r2.value - v2).abs() <= 1e-6 && mono(&r2.history), format!("2D kink error {e2:.3e}"))?;

    let steps: usize = runs.iter().map(|r| r.history.steps.len()).sum();
    ensure(
        runs.iter().flat_map(|r| &r.history.steps).all(|s| mono(&s.history)),
        "non-monotone history in a scenario run",
    )?;
    Ok(format!("quadratic {eq:.1e}, 1D {e1:.1e}, 2D {e2:.1e}; monotone on 3 examples and {steps} scenario steps"))
}

fn stationarity(runs: &[ScenarioRun]) -> Check {
    let mut worst = (f64::NEG_INFINITY, String::new());
    for r in runs {
        let p = &r.problem;
        for j in 1..=p.grid.steps() {
            let lj = p.make_lj(j, &r.history.displacements[j - 1]).map_err(|e| e.to_string())?;
            let v = r.history.velocity(j);
            let rel = stationarity_gap(&lj, v, 1e-5) / (1.0 + viscontact::nsopt::Objective::value(&lj, v).abs());
            if rel > worst.0 {
                worst = (rel, format!("{} step {j}", r.scenario.name));
            }
        }
    }
    let msg = format!("worst gap/(1+|L_j|) {:.3e} at {}", worst.0, worst.1);
    ensure(worst.0 <= 1e-4, msg.clone())?;
    Ok(msg)
}

fn structural() -> Check {
    let params = MaterialParams::new(2.0, 2.0, 4.0, 4.0).map_err(|e| e.to_string())?;
    let mut worst_sym = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut worst_pou = 0.0f64;
    for n in [1, 4, 16, 32] {
        let mesh = Mesh::build_uniform(n).map_err(|e| e.to_string())?;
        let dm = DofMap::new(&mesh);
        let a = fem::assemble_viscosity(&mesh, &params, &dm);
        let b = fem::assemble_elasticity(&mesh, &params, &dm);
        for m in [&a, &b] {
            worst_sym = worst_sym.max(m.symmetry_defect());
            BandCholesky::factor(m).map_err(|e| format!("n={n}: {e}"))?;
        }
        let u: Vec<f64> = dm.restrict(&mesh.nodes().iter().flat_map(|p| [p[0], 0.0]).collect::<Vec<_>>());
        worst_energy = worst_energy.max((a.quadratic_form(&u) - 6.0).abs()).max((b.quadratic_form(&u) - 12.0).abs());

        let free = DofMap::unconstrained(&mesh);
        for (f0, f_n, expect) in [([1.0, 0.0], [0.0, 0.0], [1.0, 0.0]), ([0.0, 0.0], [0.0, 1.0], [0.0, 2.0])] {
            let l = fem::assemble_load(&mesh, &LoadData::constant(f0, f_n), 0.0, &free);
            for c in 0..2 {
                let total: f64 = l.iter().skip(c).step_by(2).sum();
                worst_pou = worst_pou.max((total - expect[c]).abs());
            }
        }
    }
    let msg = format!("symmetry {worst_sym:.1e}, energy {worst_energy:.1e}, load sums {worst_pou:.1e}");
    ensure(worst_sym <= 1e-12 && worst_energy <= 1e-12 && worst_pou <= 1e-12, msg.clone())?;
    Ok(msg)
}

fn differentials(runs: &[ScenarioRun]) -> Check {
    let get = |name: &str| runs.iter().find(|r| r.scenario.name == name).ok_or(format!("missing {name}"));
    let (base, stiff, rev, greased) = (get("base")?, get("stiff_gnu")?, get("reversed_f0")?, get("greased")?);
    let pb = base.metrics.max_penetration;
    let ps = stiff.metrics.max_penetration;
    ensure(ps < pb, format!("stiff_gnu penetration {ps:.3e} not below base {pb:.3e}"))?;
    let right: Vec<_> = greased.contact.iter().filter(|c| c.x > 0.5).collect();
    ensure(!right.is_empty() && right.iter().all(|c| c.g_tau == 0.0), "nonzero friction bound on x1 > 0.5")?;
    ensure(greased.problem.law.g_tau.eval([0.75, 0.0], 1.0) == 0.0, "greased law not frictionless on the right")?;
    let (ub, ur) = (base.metrics.mean_displacement[0], rev.metrics.mean_displacement[0]);
    ensure(ub < 0.0 && ur > 0.0, format!("mean u_x base {ub:.3e}, reversed_f0 {ur:.3e}"))?;
    Ok(format!(
        "penetration stiff {ps:.3e} < base {pb:.3e}; greased g_tau = 0 at {} points; mean u_x base {ub:.3e}, reversed {ur:.3e}",
        right.len()
    ))
}

fn zero_data() -> Check {
    let mut s = Scenario::preset("base").map_err(|e| e.to_string())?;
    s.f0 = [0.0, 0.0];
    s.f_n = [0.0, 0.0];
    let p = s.problem().map_err(|e| e.to_string())?;
    let h = p.run(&StepperConfig::default()).map_err(|e| e.to_string())?;
    ensure(h.velocities.iter().flatten().all(|&v| v == 0.0), "nonzero velocity")?;
    ensure(h.displacements.iter().flatten().all(|&v| v == 0.0), "nonzero displacement")?;
    ensure(h.steps.iter().all(|s| s.outer_iters == 1 && s.refinements == 0), "optimizer did not stop immediately")?;
    Ok(format!("v and d identically zero over {} steps, one sweep each", h.steps.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = StepperConfig::default();
    let runs: Result<Vec<ScenarioRun>, String> = SCENARIO_NAMES
        .iter()
        .map(|n| Scenario::preset(n).and_then(|s| harness::run_scenario(&s, &cfg)).map_err(|e| e.to_string()))
        .collect();

    let results: Vec<(&str, Check)> = match &runs {
        Ok(runs) => vec![
            ("1 time-axis convergence", time_axis()),
            ("2 space-axis convergence", space_axis()),
            ("3 frictionless oracle", frictionless_oracle()),
            ("4 optimizer correctness", optimizer(runs)),
            ("5 stationarity certificates", stationarity(runs)),
            ("6 structural invariants", structural()),
            ("7 scenario differentials", differentials(runs)),
            ("8 trivial-data identity", zero_data()),
        ],
        Err(e) => vec![("scenario runs", Err(e.clone()))],
    };

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
