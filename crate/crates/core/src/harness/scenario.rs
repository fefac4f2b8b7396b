use serde::Deserialize;

use crate::contact::{BoundFunction, ContactLaw, FrictionPotential};
use crate::error::{Error, Result};
use crate::fem::{LoadData, MaterialParams};
use crate::mesh::Mesh;
use crate::stepper::{DiscreteProblem, TimeGrid};

pub const SCENARIO_NAMES: [&str; 5] = ["base", "stiff_gnu", "reversed_f0", "greased", "convergence"];

/// One numerical experiment: data, contact law and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: MaterialParams<f64>,
    pub final_time: f64,
    /// Volume force.
    pub f0: [f64; 2],
    /// Surface traction on the Neumann part.
    pub f_n: [f64; 2],
    pub law: ContactLaw<f64>,
    pub n_per_side: usize,
    pub steps: usize,
}

impl Scenario {
    /// Built-in data sets, at `n = N = 32`.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Scenario {
            name: name.to_string(),
            params: MaterialParams { phi: 2.0, xi: 2.0, eta: 4.0, lambda: 4.0 },
            final_time: 1.0,
            f0: [-2.5, -0.5],
            f_n: [0.0, 0.0],
            law: ContactLaw::base(),
            n_per_side: 32,
            steps: 32,
        };
        Ok(match name {
            "base" => base,
            "stiff_gnu" => Scenario { law: ContactLaw { g_nu: BoundFunction::ramp(200.0, 0.1), ..base.law.clone() }, ..base },
            "reversed_f0" => Scenario { f0: [2.5, -0.5], ..base },
            "greased" => Scenario { law: ContactLaw { g_tau: crate::contact::greased_bound(), ..base.law.clone() }, ..base },
            "convergence" => Scenario {
                f0: [-1.0, -0.4],
                f_n: [-0.2, -0.2],
                law: ContactLaw {
                    g_nu: BoundFunction::ramp(60.0, 0.1),
                    g_tau: BoundFunction::ramp(120.0, 0.1),
                    j_tau: FrictionPotential::Norm,
                },
                ..base
            },
            other => return Err(Error::UnknownScenario(other.to_string())),
        })
    }

    pub fn with_resolution(mut self, n_per_side: usize, steps: usize) -> Self {
        self.n_per_side = n_per_side;
        self.steps = steps;
        self
    }

    pub fn loads(&self) -> LoadData<f64> {
        LoadData::constant(self.f0, self.f_n)
    }

    pub fn problem(&self) -> Result<DiscreteProblem<f64>> {
        let mesh = Mesh::build_uniform(self.n_per_side)?;
        let grid = TimeGrid::new(self.final_time, self.steps)?;
        DiscreteProblem::assemble(mesh, &self.params, &self.loads(), self.law.clone(), grid)
    }

    /// Applies every field set in `o`.
    pub fn apply(&mut self, o: &ScenarioOverrides) -> Result<()> {
        if let Some(m) = &o.material {
            let p = &mut self.params;
            p.phi = m.phi.unwrap_or(p.phi);
            p.xi = m.xi.unwrap_or(p.xi);
            p.eta = m.eta.unwrap_or(p.eta);
            p.lambda = m.lambda.unwrap_or(p.lambda);
            p.validate()?;
        }
        if let Some(t) = o.final_time {
            TimeGrid::new(t, 1)?;
            self.final_time = t;
        }
        if let Some(l) = &o.load {
            self.f0 = l.f0.unwrap_or(self.f0);
            self.f_n = l.f_n.unwrap_or(self.f_n);
        }
        if let Some(c) = &o.contact {
            if let Some(g) = &c.g_nu {
                self.law.g_nu = g.build()?;
            }
            if let Some(g) = &c.g_tau {
                self.law.g_tau = g.build()?;
            }
            if let Some(j) = &c.j_tau {
                self.law.j_tau = j.build()?;
            }
        }
        if let Some(n) = o.n_per_side {
            self.n_per_side = n;
        }
        if let Some(n) = o.steps {
            self.steps = n;
        }
        Ok(())
    }
}

/// Partial scenario data read from a config file; unset fields keep the
/// preset's values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub material: Option<MaterialOverrides>,
    pub final_time: Option<f64>,
    pub load: Option<LoadOverrides>,
    pub contact: Option<ContactOverrides>,
    pub n_per_side: Option<usize>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverrides {
    pub phi: Option<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadOverrides {
    pub f0: Option<[f64; 2]>,
    pub f_n: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactOverrides {
    pub g_nu: Option<BoundSpec>,
    pub g_tau: Option<BoundSpec>,
    pub j_tau: Option<FrictionSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    Zero,
    Ramp { slope: f64, cap_at: f64 },
    SplitX { at: f64, left: Box<BoundSpec>, right: Box<BoundSpec> },
}

impl BoundSpec {
    pub fn build(&self) -> Result<BoundFunction<f64>> {
        Ok(match self {
            BoundSpec::Zero => BoundFunction::Zero,
            BoundSpec::Ramp { slope, cap_at } => {
                if !(*slope >= 0.0 && *cap_at >= 0.0 && slope.is_finite() && cap_at.is_finite()) {
                    return Err(Error::InvalidConfig(format!("ramp needs finite nonnegative slope and cap, got {slope}, {cap_at}")));
                }
                BoundFunction::ramp(*slope, *cap_at)
            }
            BoundSpec::SplitX { at, left, right } => {
                BoundFunction::SplitX { at: *at, left: Box::new(left.build()?), right: Box::new(right.build()?) }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrictionSpec {
    ExpNorm { a: f64, b: f64 },
    Norm,
}

impl FrictionSpec {
    pub fn build(&self) -> Result<FrictionPotential<f64>> {
        Ok(match *self {
            FrictionSpec::ExpNorm { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidConfig("friction potential coefficients must be finite".into()));
                }
                FrictionPotential::ExpNorm { a, b }
            }
            FrictionSpec::Norm => FrictionPotential::Norm,
        })
    }
}
