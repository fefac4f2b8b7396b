use crate::error::{Error, Result};
use crate::scalar::{axpy, norm2, Scalar};

use super::line_search::{golden_section, LineSearchConfig};
use super::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowellConfig<T> {
    pub tol_abs: T,
    pub tol_rel: T,
    pub max_outer_iters: usize,
    pub line_search: LineSearchConfig<T>,
    /// Reset the direction set to the coordinate basis every this many sweeps;
    /// `None` uses the problem dimension.
    pub restart_every: Option<usize>,
}

impl<T: Scalar> Default for PowellConfig<T> {
    fn default() -> Self {
        Self {
            tol_abs: T::lit(1e-10),
            tol_rel: T::lit(1e-8),
            max_outer_iters: 200,
            line_search: LineSearchConfig::default(),
            restart_every: None,
        }
    }
}

impl<T: Scalar> PowellConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        if !(self.tol_abs > T::zero() && self.tol_rel > T::zero() && ls.tol > T::zero()) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_outer_iters < 1 {
            return Err(Error::InvalidConfig("max_outer_iters must be at least 1".into()));
        }
        if !(ls.growth > T::one()) {
            return Err(Error::InvalidConfig("bracket growth factor must exceed 1".into()));
        }
        if self.restart_every == Some(0) {
            return Err(Error::InvalidConfig("restart_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport<T> {
    pub argmin: Vec<T>,
    pub value: T,
    pub outer_iters: usize,
    pub f_evals: usize,
    pub converged: bool,
    /// Objective value at the start and after every outer sweep.
    pub history: Vec<T>,
    /// Line searches that failed to bracket a minimum.
    pub bracket_failures: usize,
}

struct Counter<'o, T: Scalar, O: Objective<T> + ?Sized> {
    objective: &'o O,
    evals: usize,
    bracket_failures: usize,
    cfg: LineSearchConfig<T>,
}

impl<T: Scalar, O: Objective<T> + ?Sized> Counter<'_, T, O> {
    fn value(&mut self, x: &[T]) -> Result<T> {
        self.evals += 1;
        let v = self.objective.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { value: v.to_f64_lossy(), evals: self.evals })
        }
    }

    /// Moves `x` to the line minimum along `d`; returns the new value.
    fn line_min(&mut self, x: &mut Vec<T>, fx: T, d: &[T]) -> Result<T> {
        let dn = norm2(d);
        if !(dn > T::zero()) {
            return Ok(fx);
        }
        let out = {
            let mut phi = self.objective.restrict(x, d);
            golden_section(&mut *phi, fx, T::one() / dn, &self.cfg)
        };
        let out = match out {
            Ok(o) => o,
            Err(Error::NonFiniteObjective { value, evals }) => {
                return Err(Error::NonFiniteObjective { value, evals: self.evals + evals })
            }
            Err(e) => return Err(e),
        };
        self.evals += out.evals;
        if !out.bracketed {
            self.bracket_failures += 1;
        }
        if out.step == T::zero() {
            return Ok(fx);
        }
        let mut trial = x.clone();
        axpy(out.step, d, &mut trial);
        let ft = self.value(&trial)?;
        // Accept only on a confirmed decrease so sweep values never go up.
        if ft < fx {
            *x = trial;
            Ok(ft)
        } else {
            Ok(fx)
        }
    }
}

fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            e
        })
        .collect()
}

/// Powell's conjugate direction method.
///
/// Each outer sweep line-minimizes along every direction of the current set.
/// The sweep displacement replaces the direction of largest decrease when
/// Powell's acceptance test allows it, and the set is reset to the coordinate
/// basis every `restart_every` sweeps. The run is converged once a sweep
/// improves the value by no more than `tol_abs + tol_rel * |value|`.
pub fn powell_minimize<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    x0: &[T],
    cfg: &PowellConfig<T>,
) -> Result<MinimizeReport<T>> {
    cfg.validate()?;
    let n = x0.len();
    let mut ctx = Counter { objective, evals: 0, bracket_failures: 0, cfg: cfg.line_search };
    let mut x = x0.to_vec();
    let mut fx = ctx.value(&x)?;
    let mut history = vec![fx];
    let restart = cfg.restart_every.unwrap_or(n).max(1);
    let mut dirs = identity::<T>(n);
    let mut converged = n == 0;
    let mut iters = 0;
    let two = T::lit(2.0);

    while !converged && iters < cfg.max_outer_iters {
        iters += 1;
        if iters > 1 && (iters - 1) % restart == 0 {
            dirs = identity(n);
        }
        let x_start = x.clone();
        let f_start = fx;
        let (mut big_i, mut big_drop) = (0usize, T::zero());
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            fx = ctx.line_min(&mut x, fx, d)?;
            if before - fx > big_drop {
                big_drop = before - fx;
                big_i = i;
            }
        }

        if f_start - fx <= cfg.tol_abs + cfg.tol_rel * fx.abs() {
            converged = true;
            history.push(fx);
            break;
        }

        let d_new: Vec<T> = x.iter().zip(&x_start).map(|(&a, &b)| a - b).collect();
        let x_ext: Vec<T> = x.iter().zip(&x_start).map(|(&a, &b)| two * a - b).collect();
        let f_ext = ctx.value(&x_ext)?;
        if f_ext < f_start {
            let t = two * (f_start - two * fx + f_ext) * (f_start - fx - big_drop).powi(2)
                - big_drop * (f_start - f_ext).powi(2);
            if t < T::zero() {
                fx = ctx.line_min(&mut x, fx, &d_new)?;
                dirs.remove(big_i);
                dirs.push(d_new);
            }
        }
        history.push(fx);
    }

    Ok(MinimizeReport {
        argmin: x,
        value: fx,
        outer_iters: iters,
        f_evals: ctx.evals,
        converged,
        history,
        bracket_failures: ctx.bracket_failures,
    })
}
