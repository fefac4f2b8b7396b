use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use viscontact::harness::{
    emit_loglog, format_table, run_scenario, space_sweep, time_sweep, write_report, ErrorMeasure, Scenario,
    ScenarioOverrides, SCENARIO_NAMES,
};
use viscontact::nsopt::LineSearchConfig;
use viscontact::stepper::{SolveStrategy, StepperConfig};

#[derive(Parser)]
#[command(name = "viscontact", version, about = "Quasistatic viscoelastic frictional contact solver")]
struct Cli {
    /// TOML file with `[scenario]` and `[solver]` overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one scenario and writes VTK, CSV and a summary.
    Solve {
        #[arg(long, default_value = "base")]
        scenario: String,
        /// Segments per side of the unit square.
        #[arg(long)]
        n: Option<usize>,
        /// Time steps over [0, T].
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the deformed mesh at every K-th time node.
        #[arg(long, value_name = "K")]
        vtk_every: Option<usize>,
        /// Also write the viscosity and elasticity matrices in COO format.
        #[arg(long)]
        export_matrices: bool,
    },
    /// Refines k or h against a fine reference and reports errors and orders.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Resolution held fixed: segments per side (time axis) or steps (space axis).
        #[arg(long, value_parser = parse_resolution)]
        fixed: usize,
        /// Comma separated resolutions, `1/4` or `4`.
        #[arg(long, value_delimiter = ',', value_parser = parse_resolution)]
        levels: Vec<usize>,
        #[arg(long = "ref", value_parser = parse_resolution)]
        reference: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "convergence")]
        scenario: String,
        #[arg(long, value_enum, default_value_t = MeasureArg::Final)]
        measure: MeasureArg,
        /// Fit the log-log slope on the last K levels only.
        #[arg(long, value_name = "K")]
        fit_last: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Time,
    Space,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    /// Error of the velocity at the final time.
    Final,
    /// Largest error over the time nodes.
    Max,
}

/// `1/32` and `32` both mean 32 divisions.
fn parse_resolution(s: &str) -> std::result::Result<usize, String> {
    let t = s.trim();
    let digits = t.strip_prefix("1/").unwrap_or(t).trim();
    match digits.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive resolution like 32 or 1/32, got `{s}`")),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    scenario: ScenarioOverrides,
    #[serde(default)]
    solver: SolverConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfig {
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    max_outer_iters: Option<usize>,
    restart_every: Option<usize>,
    strategy: Option<StrategyName>,
    probe: Option<f64>,
    /// Zero or negative disables the certificate.
    gap_target: Option<f64>,
    max_refinements: Option<usize>,
    refine_factor: Option<f64>,
    line_search: Option<LineSearchFile>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StrategyName {
    Condensed,
    FullSpace,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineSearchFile {
    growth: Option<f64>,
    tol: Option<f64>,
    max_expansions: Option<usize>,
}

impl SolverConfig {
    fn build(&self) -> Result<StepperConfig<f64>> {
        let mut c = StepperConfig::<f64>::default();
        let p = &mut c.powell;
        p.tol_abs = self.tol_abs.unwrap_or(p.tol_abs);
        p.tol_rel = self.tol_rel.unwrap_or(p.tol_rel);
        p.max_outer_iters = self.max_outer_iters.unwrap_or(p.max_outer_iters);
        if self.restart_every.is_some() {
            p.restart_every = self.restart_every;
        }
        if let Some(ls) = &self.line_search {
            let d = LineSearchConfig::<f64>::default();
            p.line_search = LineSearchConfig {
                growth: ls.growth.unwrap_or(d.growth),
                tol: ls.tol.unwrap_or(d.tol),
                max_expansions: ls.max_expansions.unwrap_or(d.max_expansions),
            };
        }
        p.validate()?;
        if let Some(s) = self.strategy {
            c.strategy = match s {
                StrategyName::Condensed => SolveStrategy::Condensed,
                StrategyName::FullSpace => SolveStrategy::FullSpace,
            };
        }
        c.probe = self.probe.unwrap_or(c.probe);
        if let Some(g) = self.gap_target {
            c.gap_target = (g > 0.0).then_some(g);
        }
        c.max_refinements = self.max_refinements.unwrap_or(c.max_refinements);
        c.refine_factor = self.refine_factor.unwrap_or(c.refine_factor);
        Ok(c)
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn scenario(name: &str, overrides: &ScenarioOverrides) -> Result<Scenario> {
    let mut s = Scenario::preset(name).with_context(|| format!("known scenarios: {}", SCENARIO_NAMES.join(", ")))?;
    s.apply(overrides)?;
    Ok(s)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = load_config(cli.config.as_deref())?;
    let cfg = config.solver.build()?;

    match cli.command {
        Command::Solve { scenario: name, n, steps, out, vtk_every, export_matrices } => {
            if vtk_every == Some(0) {
                bail!("--vtk-every must be at least 1");
            }
            let mut s = scenario(&name, &config.scenario)?;
            s = s.clone().with_resolution(n.unwrap_or(s.n_per_side), steps.unwrap_or(s.steps));
            create_dir(&out)?;
            let start = Instant::now();
            let run = run_scenario(&s, &cfg)?;
            let files = run.write_artifacts(&out, vtk_every, export_matrices)?;
            print!("{}", run.summary());
            println!("wall time {:.2} s", start.elapsed().as_secs_f64());
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { axis, fixed, levels, reference, out, scenario: name, measure, fit_last } => {
            if levels.is_empty() {
                bail!("--levels needs at least one resolution");
            }
            let s = scenario(&name, &config.scenario)?;
            let measure = match measure {
                MeasureArg::Final => ErrorMeasure::FinalTime,
                MeasureArg::Max => ErrorMeasure::MaxOverSteps,
            };
            create_dir(&out)?;
            let start = Instant::now();
            let report = match axis {
                AxisArg::Time => time_sweep(&s, fixed, &levels, reference, &cfg, measure)?,
                AxisArg::Space => space_sweep(&s, fixed, &levels, reference, &cfg, measure)?,
            };
            print!("{}", format_table(&report));
            let fit = emit_loglog(&report, fit_last);
            match fit.slope {
                Some(m) => println!("log-log slope {m:.3} over {} levels", fit.fit_points),
                None => println!("log-log slope undefined"),
            }
            if !report.strictly_decreasing() {
                println!("warning: errors are not strictly decreasing");
            }
            if report.reference_degraded || report.rows.iter().any(|r| r.degraded) {
                println!("warning: some steps failed the stationarity certificate");
            }
            println!("wall time {:.2} s", start.elapsed().as_secs_f64());
            for f in write_report(&out, &report, fit_last)? {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolutions() {
        assert_eq!(parse_resolution("32"), Ok(32));
        assert_eq!(parse_resolution("1/64"), Ok(64));
        assert_eq!(parse_resolution(" 1/ 8"), Ok(8));
        assert!(parse_resolution("0").is_err());
        assert!(parse_resolution("2/3").is_err());
        assert!(parse_resolution("x").is_err());
    }

    #[test]
    fn config_file() {
        let c: ConfigFile = toml::from_str(
            r#"
            [scenario]
            final_time = 0.5
            material = { phi = 3.0 }
            contact.g_nu = { kind = "ramp", slope = 10.0, cap_at = 0.2 }

            [solver]
            tol_abs = 1e-12
            strategy = "full_space"
            gap_target = 0
            line_search = { growth = 3.0 }
            "#,
        )
        .unwrap();
        let cfg = c.solver.build().unwrap();
        assert_eq!(cfg.powell.tol_abs, 1e-12);
        assert_eq!(cfg.strategy, SolveStrategy::FullSpace);
        assert_eq!(cfg.gap_target, None);
        assert_eq!(cfg.powell.line_search.growth, 3.0);
        let s = scenario("base", &c.scenario).unwrap();
        assert_eq!(s.final_time, 0.5);
        assert_eq!(s.params.phi, 3.0);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<ConfigFile>("[solver]\ntolerance = 1.0").is_err());
        assert!(toml::from_str::<ConfigFile>("[scenario]\nmesh = 4").is_err());
    }

    #[test]
    fn invalid_solver_values() {
        let s = SolverConfig { tol_abs: Some(-1.0), ..Default::default() };
        assert!(s.build().is_err());
    }
}
