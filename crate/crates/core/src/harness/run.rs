use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::fem::{self, ContactSample};
use crate::io::{self, PointVectors};
use crate::stepper::{DiscreteProblem, StateHistory, StepperConfig};

use super::Scenario;

/// Law-based contact quantities at one quadrature point of the contact side at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRow {
    pub x: f64,
    /// `u_nu`; positive values penetrate the foundation.
    pub penetration: f64,
    /// Normal pressure `g_nu(u_nu)`.
    pub g_nu: f64,
    /// Friction bound `g_tau(u_nu)`.
    pub g_tau: f64,
    /// Tangential velocity.
    pub v_tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioMetrics {
    /// Largest `u_nu` over the contact quadrature points at `t = T`.
    pub max_penetration: f64,
    /// Mean displacement over the unit square at `t = T`.
    pub mean_displacement: [f64; 2],
    pub final_velocity_norm: f64,
    pub max_velocity_norm: f64,
    /// Largest `gap / (1 + |L_j(v_j)|)` over all steps.
    pub max_relative_gap: f64,
    pub degraded_steps: usize,
    pub f_evals: usize,
}

pub struct ScenarioRun {
    pub scenario: Scenario,
    pub problem: DiscreteProblem<f64>,
    pub history: StateHistory<f64>,
    pub contact: Vec<ContactRow>,
    pub metrics: ScenarioMetrics,
}

/// Solves the scenario over `[0, T]` and collects diagnostics.
pub fn run_scenario(scenario: &Scenario, cfg: &StepperConfig<f64>) -> Result<ScenarioRun> {
    let problem = scenario.problem()?;
    let history = problem.run(cfg)?;
    let (mesh, dm) = (&problem.mesh, &problem.dofmap);

    let d = history.final_displacement();
    let v = history.final_velocity();
    let d_tr = fem::contact_trace(mesh, dm, d)?;
    let v_tr = fem::contact_trace(mesh, dm, v)?;
    let contact: Vec<ContactRow> = d_tr
        .iter()
        .zip(&v_tr)
        .map(|(du, vu): (&ContactSample<f64>, &ContactSample<f64>)| {
            let b = problem.law.freeze(du.x, du.u_nu);
            ContactRow { x: du.x[0], penetration: du.u_nu, g_nu: b.g_nu, g_tau: b.g_tau, v_tau: vu.u_tau[0] }
        })
        .collect();

    let norms = history
        .velocities
        .iter()
        .map(|v| fem::v_norm(mesh, dm, v))
        .collect::<Result<Vec<f64>>>()?;
    let metrics = ScenarioMetrics {
        max_penetration: contact.iter().map(|r| r.penetration).fold(f64::NEG_INFINITY, f64::max),
        mean_displacement: [0, 1].map(|c| fem::integrate_component(mesh, dm, d, c)),
        final_velocity_norm: *norms.last().expect("at least one step"),
        max_velocity_norm: norms.iter().copied().fold(0.0, f64::max),
        max_relative_gap: history
            .steps
            .iter()
            .map(|s| s.stationarity_gap / (1.0 + s.value.abs()))
            .fold(f64::NEG_INFINITY, f64::max),
        degraded_steps: history.steps.iter().filter(|s| s.degraded).count(),
        f_evals: history.steps.iter().map(|s| s.f_evals).sum(),
    };
    Ok(ScenarioRun { scenario: scenario.clone(), problem, history, contact, metrics })
}

impl ScenarioRun {
    /// Writes the final deformed mesh, contact forces, final state, per-step log
    /// and a summary into `dir`. `vtk_every` adds a VTK series at every
    /// `vtk_every`-th time node (plus the last one); `matrices` exports `A` and
    /// `B` in COO format.
    pub fn write_artifacts(&self, dir: &Path, vtk_every: Option<usize>, matrices: bool) -> Result<Vec<PathBuf>> {
        let name = &self.scenario.name;
        let p = &self.problem;
        let h = &self.history;
        let n_steps = p.grid.steps();
        let mut out = Vec::new();

        let d = p.dofmap.expand(h.final_displacement());
        let v = p.dofmap.expand(h.final_velocity());
        let path = dir.join(format!("{name}_final.vtk"));
        io::write_vtk_file(
            &path,
            &format!("{name} t={}", p.grid.final_time()),
            &p.mesh,
            Some(&d),
            &[PointVectors { name: "displacement", values: &d }, PointVectors { name: "velocity", values: &v }],
        )?;
        out.push(path);

        let path = dir.join(format!("{name}_contact.csv"));
        let rows: Vec<Vec<String>> = self
            .contact
            .iter()
            .map(|r| [r.x, r.penetration, r.g_nu, r.g_tau, r.v_tau].iter().map(f64::to_string).collect())
            .collect();
        io::write_csv_file(&path, &["x", "penetration", "g_nu", "g_tau", "v_tau"], &rows)?;
        out.push(path);

        let path = dir.join(format!("{name}_state.csv"));
        io::write_state_csv_file(&path, &p.mesh, &p.dofmap, h, n_steps)?;
        out.push(path);

        let path = dir.join(format!("{name}_steps.csv"));
        let rows: Vec<Vec<String>> = h
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                vec![
                    (i + 1).to_string(),
                    p.grid.node(i + 1).to_string(),
                    s.value.to_string(),
                    s.stationarity_gap.to_string(),
                    s.outer_iters.to_string(),
                    s.f_evals.to_string(),
                    s.degraded.to_string(),
                ]
            })
            .collect();
        io::write_csv_file(&path, &["step", "t", "L_j", "stationarity_gap", "sweeps", "f_evals", "degraded"], &rows)?;
        out.push(path);

        if let Some(every) = vtk_every {
            let mut nodes: Vec<usize> = (0..=n_steps).step_by(every.max(1)).collect();
            if nodes.last() != Some(&n_steps) {
                nodes.push(n_steps);
            }
            out.extend(io::write_vtk_series(dir, name, &p.mesh, &p.dofmap, h, &nodes)?);
        }

        if matrices {
            for (tag, m) in [("A", &p.viscosity), ("B", &p.elasticity)] {
                let path = dir.join(format!("{name}_{tag}.coo"));
                io::write_text_file(&path, &m.to_coo_string())?;
                out.push(path);
            }
        }

        let path = dir.join(format!("{name}_summary.txt"));
        io::write_text_file(&path, &self.summary())?;
        out.push(path);
        Ok(out)
    }

    pub fn summary(&self) -> String {
        let s = &self.scenario;
        let m = &self.metrics;
        let mut t = String::new();
        let _ = writeln!(t, "scenario            {}", s.name);
        let _ = writeln!(t, "n_per_side          {}", s.n_per_side);
        let _ = writeln!(t, "steps               {}", s.steps);
        let _ = writeln!(t, "max penetration     {:.6e}", m.max_penetration);
        let _ = writeln!(t, "mean u_x            {:.6e}", m.mean_displacement[0]);
        let _ = writeln!(t, "mean u_y            {:.6e}", m.mean_displacement[1]);
        let _ = writeln!(t, "|v(T)|_V            {:.6e}", m.final_velocity_norm);
        let _ = writeln!(t, "max_j |v_j|_V       {:.6e}", m.max_velocity_norm);
        let _ = writeln!(t, "max relative gap    {:.3e}", m.max_relative_gap);
        let _ = writeln!(t, "degraded steps      {}", m.degraded_steps);
        let _ = writeln!(t, "objective evals     {}", m.f_evals);
        t
    }
}
