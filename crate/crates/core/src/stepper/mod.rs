//! The fully discrete scheme.
//!
//! For `j = 1..N` the velocity `v_j` minimizes
//! `L_j(w) = 1/2 <A w, w> + <B d_{j-1} - f_j, w> + J(trace d_{j-1}, trace w)`
//! and the displacement advances as `d_j = d_{j-1} + k v_j`, `d_0 = u0h`.

mod condense;
mod objective;

pub use condense::{Condensation, ReducedObjective};
pub use objective::StepObjective;

use crate::contact::ContactLaw;
use crate::error::{Error, Result};
use crate::fem::{self, ContactQuadrature, DofMap, LoadData, MaterialParams};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;
use crate::nsopt::{powell_minimize, stationarity_gap, MinimizeReport, Objective, PowellConfig};
use crate::scalar::{axpy, Scalar};

/// Uniform grid `t_j = j k`, `k = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    final_time: T,
    steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(final_time: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidTimeGrid("at least one time step is required".into()));
        }
        if !(final_time > T::zero()) || !final_time.is_finite() {
            return Err(Error::InvalidTimeGrid(format!("final time must be positive, got {final_time}")));
        }
        Ok(Self { final_time, steps })
    }

    pub fn final_time(&self) -> T {
        self.final_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> T {
        self.final_time / T::from_usize_lossy(self.steps)
    }

    /// `t_j = j k`, computed by multiplication rather than accumulation.
    pub fn node(&self, j: usize) -> T {
        T::from_usize_lossy(j) * self.step_size()
    }
}

/// Response of the elasticity operator to a displacement (free DOFs).
pub trait ElasticOperator<T> {
    fn apply(&self, displacement: &[T]) -> Vec<T>;
}

impl<T: Scalar> ElasticOperator<T> for CsrMatrix<T> {
    fn apply(&self, displacement: &[T]) -> Vec<T> {
        self.mul_vec(displacement)
    }
}

/// Load vectors per time node.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSchedule<T> {
    /// Time-independent data, assembled once.
    Constant(Vec<T>),
    /// `f_j` for `j = 0..=N`.
    PerNode(Vec<Vec<T>>),
}

impl<T> LoadSchedule<T> {
    pub fn at(&self, j: usize) -> &[T] {
        match self {
            LoadSchedule::Constant(f) => f,
            LoadSchedule::PerNode(v) => &v[j],
        }
    }
}

/// Everything needed to form `L_j` at every step.
#[derive(Debug, Clone)]
pub struct DiscreteProblem<T: Scalar, B = CsrMatrix<T>> {
    pub mesh: Mesh<T>,
    pub dofmap: DofMap,
    pub viscosity: CsrMatrix<T>,
    pub elasticity: B,
    pub loads: LoadSchedule<T>,
    pub law: ContactLaw<T>,
    /// Initial displacement (free DOFs).
    pub u0: Vec<T>,
    pub grid: TimeGrid<T>,
    pub quadrature: ContactQuadrature<T>,
    condensation: Condensation<T>,
}

impl<T: Scalar> DiscreteProblem<T> {
    /// Assembles the Kelvin-Voigt problem with zero initial displacement.
    pub fn assemble(
        mesh: Mesh<T>,
        params: &MaterialParams<T>,
        loads: &LoadData<T>,
        law: ContactLaw<T>,
        grid: TimeGrid<T>,
    ) -> Result<Self> {
        params.validate()?;
        let dofmap = DofMap::new(&mesh);
        let viscosity = fem::assemble_viscosity(&mesh, params, &dofmap);
        let elasticity = fem::assemble_elasticity(&mesh, params, &dofmap);
        let schedule = if loads.is_time_independent() {
            LoadSchedule::Constant(fem::assemble_load(&mesh, loads, T::zero(), &dofmap))
        } else {
            LoadSchedule::PerNode(
                (0..=grid.steps()).map(|j| fem::assemble_load(&mesh, loads, grid.node(j), &dofmap)).collect(),
            )
        };
        Self::from_parts(mesh, dofmap, viscosity, elasticity, schedule, law, grid)
    }
}

impl<T: Scalar, B: ElasticOperator<T>> DiscreteProblem<T, B> {
    pub fn from_parts(
        mesh: Mesh<T>,
        dofmap: DofMap,
        viscosity: CsrMatrix<T>,
        elasticity: B,
        loads: LoadSchedule<T>,
        law: ContactLaw<T>,
        grid: TimeGrid<T>,
    ) -> Result<Self> {
        let expected = dofmap.n_free();
        let load_len = match &loads {
            LoadSchedule::Constant(f) => f.len(),
            LoadSchedule::PerNode(v) => {
                if v.len() != grid.steps() + 1 {
                    return Err(Error::DimensionMismatch { expected: grid.steps() + 1, got: v.len() });
                }
                v.iter().map(Vec::len).find(|&l| l != expected).unwrap_or(expected)
            }
        };
        if viscosity.nrows() != expected || load_len != expected {
            return Err(Error::DimensionMismatch { expected, got: viscosity.nrows().min(load_len) });
        }
        let quadrature = ContactQuadrature::new(&mesh);
        let condensation = Condensation::new(&mesh, &dofmap, &viscosity)?;
        Ok(Self {
            u0: vec![T::zero(); expected],
            mesh,
            dofmap,
            viscosity,
            elasticity,
            loads,
            law,
            grid,
            quadrature,
            condensation,
        })
    }

    /// Replaces the initial displacement (free DOFs).
    pub fn with_initial_displacement(mut self, u0: Vec<T>) -> Result<Self> {
        if u0.len() != self.dofmap.n_free() {
            return Err(Error::DimensionMismatch { expected: self.dofmap.n_free(), got: u0.len() });
        }
        self.u0 = u0;
        Ok(self)
    }

    pub fn n_free(&self) -> usize {
        self.dofmap.n_free()
    }

    pub fn condensation(&self) -> &Condensation<T> {
        &self.condensation
    }

    /// `L_j` for the given accumulated displacement `d_prev = (K^k v)_{j-1}`.
    pub fn make_lj(&self, j: usize, d_prev: &[T]) -> Result<StepObjective<'_, T>> {
        if j == 0 || j > self.grid.steps() {
            return Err(Error::InvalidTimeGrid(format!("step index {j} outside 1..={}", self.grid.steps())));
        }
        if d_prev.len() != self.n_free() {
            return Err(Error::DimensionMismatch { expected: self.n_free(), got: d_prev.len() });
        }
        let mut linear = self.elasticity.apply(d_prev);
        for (l, &f) in linear.iter_mut().zip(self.loads.at(j)) {
            *l -= f;
        }
        let prior = fem::trace_with(&self.quadrature, &self.dofmap.expand(d_prev));
        Ok(StepObjective::new(&self.viscosity, linear, &self.quadrature, &self.dofmap, &self.law, prior))
    }

    /// Minimizes `L_j` from `warm_start`.
    pub fn solve_step(
        &self,
        j: usize,
        d_prev: &[T],
        warm_start: &[T],
        cfg: &StepperConfig<T>,
    ) -> Result<StepOutcome<T>> {
        if warm_start.len() != self.n_free() {
            return Err(Error::DimensionMismatch { expected: self.n_free(), got: warm_start.len() });
        }
        if !(cfg.refine_factor > T::zero() && cfg.refine_factor <= T::one()) || !(cfg.probe > T::zero()) {
            return Err(Error::InvalidConfig("refine_factor must lie in (0, 1] and probe be positive".into()));
        }
        let lj = self.make_lj(j, d_prev)?;
        let reduced = match cfg.strategy {
            SolveStrategy::Condensed => Some(self.condensation.reduce(&lj)),
            SolveStrategy::FullSpace => None,
        };
        let mut powell = cfg.powell;
        let mut start = warm_start.to_vec();
        let mut total: Option<MinimizeReport<T>> = None;
        let mut refinements = 0;
        loop {
            let (velocity, report) = match &reduced {
                Some(r) => {
                    let report = powell_minimize(r, &r.project(&start), &powell)?;
                    (r.lift(&report.argmin), report)
                }
                None => {
                    let report = powell_minimize(&lj, &start, &powell)?;
                    (report.argmin.clone(), report)
                }
            };
            let total = match total.as_mut() {
                None => total.insert(report),
                Some(t) => {
                    t.argmin = report.argmin;
                    t.value = report.value;
                    t.outer_iters += report.outer_iters;
                    t.f_evals += report.f_evals;
                    t.converged = report.converged;
                    t.history.extend_from_slice(&report.history[1..]);
                    t.bracket_failures += report.bracket_failures;
                    t
                }
            };
            let value = lj.value(&velocity);
            let gap = stationarity_gap(&lj, &velocity, cfg.probe);
            let certified = cfg.gap_target.map_or(true, |eps| gap <= eps * (T::one() + value.abs()));
            if certified || refinements == cfg.max_refinements {
                return Ok(StepOutcome {
                    degraded: !total.converged || !certified,
                    velocity,
                    value,
                    stationarity_gap: gap,
                    refinements,
                    report: total.clone(),
                });
            }
            // Powell's sweep test can fire while still creeping along a kink;
            // restart from the current point with a fresh basis and tighter tolerances.
            refinements += 1;
            powell.tol_abs *= cfg.refine_factor;
            powell.tol_rel *= cfg.refine_factor;
            start = velocity;
        }
    }

    /// Runs the time loop, warm-starting every step from the previous velocity
    /// (`v_0 = 0`).
    pub fn run(&self, cfg: &StepperConfig<T>) -> Result<StateHistory<T>> {
        let n = self.grid.steps();
        let k = self.grid.step_size();
        let mut displacements = Vec::with_capacity(n + 1);
        displacements.push(self.u0.clone());
        let mut velocities: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut steps = Vec::with_capacity(n);
        let zero = vec![T::zero(); self.n_free()];
        for j in 1..=n {
            let warm = velocities.last().unwrap_or(&zero);
            let d_prev = &displacements[j - 1];
            let out = self.solve_step(j, d_prev, warm, cfg)?;
            let mut d = d_prev.clone();
            axpy(k, &out.velocity, &mut d);
            steps.push(StepSummary::from(&out));
            velocities.push(out.velocity);
            displacements.push(d);
        }
        Ok(StateHistory { velocities, displacements, steps })
    }
}

/// How each step's minimization is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveStrategy {
    /// Powell on the tangential contact unknowns after eliminating the rest.
    #[default]
    Condensed,
    /// Powell on every free DOF.
    FullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<T> {
    pub powell: PowellConfig<T>,
    pub strategy: SolveStrategy,
    /// Probe length of the stationarity certificate.
    pub probe: T,
    /// Accept a step once `gap <= target * (1 + |L_j|)`; `None` accepts Powell's result as is.
    pub gap_target: Option<T>,
    /// Restarts allowed when the certificate fails.
    pub max_refinements: usize,
    /// Factor applied to both Powell tolerances on every restart.
    pub refine_factor: T,
}

impl<T: Scalar> Default for StepperConfig<T> {
    fn default() -> Self {
        Self {
            powell: PowellConfig { tol_abs: T::lit(1e-16), tol_rel: T::lit(1e-15), ..PowellConfig::default() },
            strategy: SolveStrategy::default(),
            probe: T::lit(1e-5),
            gap_target: Some(T::lit(1e-5)),
            max_refinements: 4,
            refine_factor: T::lit(1e-2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub velocity: Vec<T>,
    /// `L_j(v_j)`.
    pub value: T,
    pub stationarity_gap: T,
    /// Powell ran out of sweeps or the certificate still fails after all restarts.
    pub degraded: bool,
    /// Certificate-triggered restarts used.
    pub refinements: usize,
    /// Accumulated over all restarts.
    pub report: MinimizeReport<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary<T> {
    pub value: T,
    pub stationarity_gap: T,
    pub degraded: bool,
    pub refinements: usize,
    pub outer_iters: usize,
    pub f_evals: usize,
    /// Powell's per-sweep values on the minimized functional.
    pub history: Vec<T>,
}

impl<T: Scalar> From<&StepOutcome<T>> for StepSummary<T> {
    fn from(o: &StepOutcome<T>) -> Self {
        Self {
            value: o.value,
            stationarity_gap: o.stationarity_gap,
            degraded: o.degraded,
            refinements: o.refinements,
            outer_iters: o.report.outer_iters,
            f_evals: o.report.f_evals,
            history: o.report.history.clone(),
        }
    }
}

/// Velocities `v_1..v_N` and displacements `d_0..d_N` (free DOFs).
#[derive(Debug, Clone)]
pub struct StateHistory<T> {
    pub velocities: Vec<Vec<T>>,
    pub displacements: Vec<Vec<T>>,
    pub steps: Vec<StepSummary<T>>,
}

impl<T: Scalar> StateHistory<T> {
    /// `v_j` for `1 <= j <= N`.
    pub fn velocity(&self, j: usize) -> &[T] {
        &self.velocities[j - 1]
    }

    pub fn final_velocity(&self) -> &[T] {
        self.velocities.last().expect("history has at least one step")
    }

    pub fn final_displacement(&self) -> &[T] {
        self.displacements.last().expect("history has d_0")
    }

    pub fn degraded(&self) -> bool {
        self.steps.iter().any(|s| s.degraded)
    }
}
