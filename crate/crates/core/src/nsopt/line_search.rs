use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

use super::Objective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig<T> {
    /// Expansion factor while walking downhill to find a bracket.
    pub growth: T,
    /// Golden-section stops once the bracket shrinks below `tol` times its initial width.
    pub tol: T,
    pub max_expansions: usize,
}

impl<T: Scalar> Default for LineSearchConfig<T> {
    fn default() -> Self {
        Self { growth: T::lit(2.0), tol: T::lit(1e-10), max_expansions: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome<T> {
    pub step: T,
    /// `phi(step)`; equals `phi(0)` when `step == 0`.
    pub value: T,
    pub bracketed: bool,
    pub evals: usize,
}

// 1 / golden ratio
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `phi` starting from the bracket `[-scale, scale]` around 0.
///
/// The bracket is expanded downhill by `cfg.growth` until the function turns
/// up, then refined by golden section. The returned step strictly improves on
/// `phi0 = phi(0)`, or is exactly zero.
pub fn golden_section<T: Scalar>(
    phi: &mut dyn FnMut(T) -> T,
    phi0: T,
    scale: T,
    cfg: &LineSearchConfig<T>,
) -> Result<LineSearchOutcome<T>> {
    let mut evals = 0usize;
    let mut eval = |t: T, evals: &mut usize| -> Result<T> {
        let v = phi(t);
        *evals += 1;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { value: v.to_f64_lossy(), evals: *evals })
        }
    };

    let zero = T::zero();
    let mut best = (zero, phi0);
    let track = |t: T, v: T, best: &mut (T, T)| {
        if v < best.1 {
            *best = (t, v);
        }
    };

    let fl = eval(-scale, &mut evals)?;
    let fr = eval(scale, &mut evals)?;
    track(-scale, fl, &mut best);
    track(scale, fr, &mut best);

    let (lo, hi) = if phi0 <= fl && phi0 <= fr {
        (-scale, scale)
    } else {
        let sign = if fr <= fl { T::one() } else { -T::one() };
        let (mut prev, mut cur, mut fcur) = (zero, sign * scale, if sign > zero { fr } else { fl });
        let mut found = None;
        for _ in 0..cfg.max_expansions {
            let next = cur + cfg.growth * (cur - prev);
            let fnext = eval(next, &mut evals)?;
            track(next, fnext, &mut best);
            if fnext >= fcur {
                found = Some(if sign > zero { (prev, next) } else { (next, prev) });
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
        match found {
            Some(b) => b,
            None => return Ok(LineSearchOutcome { step: zero, value: phi0, bracketed: false, evals }),
        }
    };

    let r = T::lit(INV_PHI);
    let (mut a, mut c) = (lo, hi);
    let stop = cfg.tol * (hi - lo);
    let mut x1 = c - r * (c - a);
    let mut x2 = a + r * (c - a);
    let mut f1 = eval(x1, &mut evals)?;
    let mut f2 = eval(x2, &mut evals)?;
    track(x1, f1, &mut best);
    track(x2, f2, &mut best);
    while c - a > stop {
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - r * (c - a);
            f1 = eval(x1, &mut evals)?;
            track(x1, f1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (c - a);
            f2 = eval(x2, &mut evals)?;
            track(x2, f2, &mut best);
        }
    }

    Ok(LineSearchOutcome { step: best.0, value: best.1, bracketed: true, evals })
}

/// Line search for `objective` along `d` from `x`; the initial bracket has unit
/// length in `x`-space.
pub fn golden_line_search<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    x: &[T],
    d: &[T],
    cfg: &LineSearchConfig<T>,
) -> Result<LineSearchOutcome<T>> {
    let dn = norm2(d);
    if !(dn > T::zero()) {
        return Err(Error::InvalidConfig("line search direction must be nonzero".into()));
    }
    let f0 = objective.value(x);
    let mut phi = objective.restrict(x, d);
    let mut out = golden_section(&mut *phi, f0, T::one() / dn, cfg)?;
    out.evals += 1;
    Ok(out)
}
