use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem;
use crate::mesh::{prolongate, Mesh};
use crate::stepper::{StateHistory, StepperConfig};

use super::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Time,
    Space,
}

impl Axis {
    pub fn symbol(self) -> &'static str {
        match self {
            Axis::Time => "k",
            Axis::Space => "h",
        }
    }
}

/// Which velocity error a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMeasure {
    /// `|v_ref(T) - v(T)|_V / |v_ref(T)|_V`
    #[default]
    FinalTime,
    /// `max_j |v_ref(t_j) - v(t_j)|_V / max_j |v_ref(t_j)|_V` over the level's time nodes.
    MaxOverSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Steps (time axis) or segments per side (space axis).
    pub level: usize,
    /// `k` or `h`.
    pub size: f64,
    pub error: f64,
    /// `log(e_prev / e) / log(size_prev / size)`; `None` on the first row or a zero error.
    pub order: Option<f64>,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub axis: Axis,
    pub measure: ErrorMeasure,
    /// Resolution held fixed (segments per side or steps).
    pub fixed: usize,
    pub reference: usize,
    pub rows: Vec<ConvergenceRow>,
    pub reference_final_norm: f64,
    pub reference_max_norm: f64,
    pub reference_degraded: bool,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

fn check_levels(levels: &[usize], reference: usize) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidSweep("no levels given".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSweep("levels must be strictly increasing".into()));
    }
    if let Some(&l) = levels.iter().find(|&&l| l == 0 || reference % l != 0) {
        return Err(Error::InvalidSweep(format!("level {l} does not divide reference {reference}")));
    }
    Ok(())
}

fn with_orders(mut rows: Vec<ConvergenceRow>) -> Vec<ConvergenceRow> {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        rows[i].order = (a.error > 0.0 && b.error > 0.0)
            .then(|| (a.error / b.error).ln() / (a.size / b.size).ln());
    }
    rows
}

fn run_all(runs: Vec<Scenario>, cfg: &StepperConfig<f64>) -> Result<Vec<StateHistory<f64>>> {
    runs.par_iter().map(|s| s.problem()?.run(cfg)).collect()
}

fn norms(mesh: &Mesh<f64>, fulls: impl Iterator<Item = Vec<f64>>) -> Vec<f64> {
    fulls.map(|f| fem::v_norm_full(mesh, &f)).collect()
}

/// Time-step refinement on a fixed mesh. `k_levels` and `k_ref` are step
/// counts over `[0, T]`; every level must divide the reference.
pub fn time_sweep(
    scenario: &Scenario,
    h_fixed: usize,
    k_levels: &[usize],
    k_ref: usize,
    cfg: &StepperConfig<f64>,
    measure: ErrorMeasure,
) -> Result<ConvergenceReport> {
    check_levels(k_levels, k_ref)?;
    let mut runs: Vec<Scenario> = k_levels.iter().map(|&n| scenario.clone().with_resolution(h_fixed, n)).collect();
    runs.push(scenario.clone().with_resolution(h_fixed, k_ref));
    let mut hist = run_all(runs, cfg)?;
    let reference = hist.pop().expect("reference run");

    let mesh = Mesh::build_uniform(h_fixed)?;
    let dm = fem::DofMap::new(&mesh);
    let ref_norms = norms(&mesh, reference.velocities.iter().map(|v| dm.expand(v)));

    let rows = k_levels
        .iter()
        .zip(&hist)
        .map(|(&n, h)| {
            let stride = k_ref / n;
            let js: Vec<usize> = match measure {
                ErrorMeasure::FinalTime => vec![n],
                ErrorMeasure::MaxOverSteps => (1..=n).collect(),
            };
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for j in js {
                let r = reference.velocity(j * stride);
                let diff: Vec<f64> = r.iter().zip(h.velocity(j)).map(|(a, b)| a - b).collect();
                num = num.max(fem::v_norm_full(&mesh, &dm.expand(&diff)));
                den = den.max(ref_norms[j * stride - 1]);
            }
            ConvergenceRow {
                level: n,
                size: scenario.final_time / n as f64,
                error: num / den,
                order: None,
                degraded: h.degraded(),
            }
        })
        .collect();

    Ok(ConvergenceReport {
        axis: Axis::Time,
        measure,
        fixed: h_fixed,
        reference: k_ref,
        rows: with_orders(rows),
        reference_final_norm: *ref_norms.last().expect("reference has steps"),
        reference_max_norm: ref_norms.iter().copied().fold(0.0, f64::max),
        reference_degraded: reference.degraded(),
    })
}

/// Mesh refinement at a fixed step count. Coarse velocities are prolongated to
/// the reference mesh; every level must divide the reference.
pub fn space_sweep(
    scenario: &Scenario,
    k_fixed: usize,
    h_levels: &[usize],
    h_ref: usize,
    cfg: &StepperConfig<f64>,
    measure: ErrorMeasure,
) -> Result<ConvergenceReport> {
    if let Some(&l) = h_levels.iter().find(|&&l| l > 0 && h_ref % l != 0) {
        return Err(Error::NotNested { coarse: l, fine: h_ref });
    }
    check_levels(h_levels, h_ref)?;
    let mut runs: Vec<Scenario> = h_levels.iter().map(|&n| scenario.clone().with_resolution(n, k_fixed)).collect();
    runs.push(scenario.clone().with_resolution(h_ref, k_fixed));
    let mut hist = run_all(runs, cfg)?;
    let reference = hist.pop().expect("reference run");

    let fine = Mesh::build_uniform(h_ref)?;
    let fine_dm = fem::DofMap::new(&fine);
    let ref_full: Vec<Vec<f64>> = reference.velocities.iter().map(|v| fine_dm.expand(v)).collect();
    let ref_norms = norms(&fine, ref_full.iter().cloned());

    let rows = h_levels
        .iter()
        .zip(&hist)
        .map(|(&n, h)| -> Result<ConvergenceRow> {
            let coarse = Mesh::build_uniform(n)?;
            let dm = fem::DofMap::new(&coarse);
            let js: Vec<usize> = match measure {
                ErrorMeasure::FinalTime => vec![k_fixed],
                ErrorMeasure::MaxOverSteps => (1..=k_fixed).collect(),
            };
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for j in js {
                let p = prolongate(&coarse, &fine, &dm.expand(h.velocity(j)))?;
                let diff: Vec<f64> = ref_full[j - 1].iter().zip(&p).map(|(a, b)| a - b).collect();
                num = num.max(fem::v_norm_full(&fine, &diff));
                den = den.max(ref_norms[j - 1]);
            }
            Ok(ConvergenceRow { level: n, size: 1.0 / n as f64, error: num / den, order: None, degraded: h.degraded() })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceReport {
        axis: Axis::Space,
        measure,
        fixed: k_fixed,
        reference: h_ref,
        rows: with_orders(rows),
        reference_final_norm: *ref_norms.last().expect("reference has steps"),
        reference_max_norm: ref_norms.iter().copied().fold(0.0, f64::max),
        reference_degraded: reference.degraded(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        Scenario::preset("convergence").unwrap()
    }

    #[test]
    fn rejects_bad_levels() {
        let cfg = StepperConfig::default();
        let s = small();
        let e = |r: Result<ConvergenceReport>| matches!(r, Err(Error::InvalidSweep(_)));
        assert!(e(time_sweep(&s, 2, &[], 4, &cfg, ErrorMeasure::FinalTime)));
        assert!(e(time_sweep(&s, 2, &[3], 4, &cfg, ErrorMeasure::FinalTime)));
        assert!(e(time_sweep(&s, 2, &[4, 2], 4, &cfg, ErrorMeasure::FinalTime)));
        assert!(matches!(
            space_sweep(&s, 2, &[2, 3], 4, &cfg, ErrorMeasure::FinalTime),
            Err(Error::NotNested { coarse: 3, fine: 4 })
        ));
    }

    #[test]
    fn self_comparison_is_zero() {
        let cfg = StepperConfig::default();
        let s = small();
        let t = time_sweep(&s, 2, &[2, 4], 4, &cfg, ErrorMeasure::FinalTime).unwrap();
        assert_eq!(t.rows[1].error, 0.0);
        assert!(t.rows[0].error > 0.0);
        assert_eq!(t.rows[1].order, None);
        let sp = space_sweep(&s, 2, &[2, 4], 4, &cfg, ErrorMeasure::MaxOverSteps).unwrap();
        assert_eq!(sp.rows[1].error, 0.0);
        assert!(sp.reference_max_norm >= sp.reference_final_norm);
    }

    #[test]
    fn orders_from_halvings() {
        let rows = [4.0, 1.0, 0.5].iter().enumerate().map(|(i, &e)| ConvergenceRow {
            level: 2 << i,
            size: 0.5 / (1 << i) as f64,
            error: e,
            order: None,
            degraded: false,
        });
        let rows = with_orders(rows.collect());
        assert_eq!(rows[0].order, None);
        assert!((rows[1].order.unwrap() - 2.0).abs() < 1e-14);
        assert!((rows[2].order.unwrap() - 1.0).abs() < 1e-14);
    }
}
