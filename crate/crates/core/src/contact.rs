//! Contact superpotential `j(x, eta, xi) = g_nu(x, eta_nu) xi_nu + g_tau(x, eta_nu) j_tau(xi_tau)`
//! and its boundary integral.
//!
//! Only values are exposed. The normal direction is the outward normal of the
//! contact side, `nu = (0, -1)`.

use crate::error::{Error, Result};
use crate::fem::ContactSample;
use crate::scalar::Scalar;

/// Penetration-dependent bound (`g_nu` or `g_tau`).
#[derive(Debug, Clone, PartialEq)]
pub enum BoundFunction<T> {
    Zero,
    /// `0` for `eta < 0`, `slope * eta` up to `cap_at`, `slope * cap_at` beyond.
    Ramp { slope: T, cap_at: T },
    /// `left` for `x_1 < at`, `right` otherwise.
    SplitX { at: T, left: Box<BoundFunction<T>>, right: Box<BoundFunction<T>> },
}

impl<T: Scalar> BoundFunction<T> {
    pub fn ramp(slope: T, cap_at: T) -> Self {
        BoundFunction::Ramp { slope, cap_at }
    }

    pub fn eval(&self, x: [T; 2], eta: T) -> T {
        match self {
            BoundFunction::Zero => T::zero(),
            BoundFunction::Ramp { slope, cap_at } => {
                if eta < T::zero() {
                    T::zero()
                } else if eta < *cap_at {
                    *slope * eta
                } else {
                    *slope * *cap_at
                }
            }
            BoundFunction::SplitX { at, left, right } => {
                if x[0] < *at {
                    left.eval(x, eta)
                } else {
                    right.eval(x, eta)
                }
            }
        }
    }

    /// Supremum over all arguments.
    pub fn upper_bound(&self) -> T {
        match self {
            BoundFunction::Zero => T::zero(),
            BoundFunction::Ramp { slope, cap_at } => *slope * *cap_at,
            BoundFunction::SplitX { left, right, .. } => left.upper_bound().max(right.upper_bound()),
        }
    }

    /// Lipschitz constant in the penetration argument.
    pub fn lipschitz(&self) -> T {
        match self {
            BoundFunction::Zero => T::zero(),
            BoundFunction::Ramp { slope, .. } => *slope,
            BoundFunction::SplitX { left, right, .. } => left.lipschitz().max(right.lipschitz()),
        }
    }
}

/// Friction bound with a frictionless right part: the ramp `(30, 0.1)` for
/// `x_1 < 0.5` and zero on `[0.5, 1]`.
pub fn greased_g_tau<T: Scalar>(x: [T; 2], eta: T) -> T {
    greased_bound().eval(x, eta)
}

pub fn greased_bound<T: Scalar>() -> BoundFunction<T> {
    BoundFunction::SplitX {
        at: T::lit(0.5),
        left: Box::new(BoundFunction::ramp(T::lit(30.0), T::lit(0.1))),
        right: Box::new(BoundFunction::Zero),
    }
}

/// Tangential superpotential `j_tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrictionPotential<T> {
    /// `-a exp(-|xi|) + b |xi|`; nonconvex for `a > 0`.
    ExpNorm { a: T, b: T },
    /// `|xi|`
    Norm,
}

impl<T: Scalar> FrictionPotential<T> {
    pub fn exp_norm_default() -> Self {
        FrictionPotential::ExpNorm { a: T::lit(0.3), b: T::lit(0.7) }
    }

    #[inline]
    pub fn eval_radial(&self, r: T) -> T {
        match *self {
            FrictionPotential::ExpNorm { a, b } => -a * (-r).exp() + b * r,
            FrictionPotential::Norm => r,
        }
    }

    #[inline]
    pub fn eval(&self, xi: [T; 2]) -> T {
        self.eval_radial((xi[0] * xi[0] + xi[1] * xi[1]).sqrt())
    }

    /// Global Lipschitz constant.
    pub fn lipschitz(&self) -> T {
        match *self {
            FrictionPotential::ExpNorm { a, b } => a.abs() + b.abs(),
            FrictionPotential::Norm => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactLaw<T> {
    pub g_nu: BoundFunction<T>,
    pub g_tau: BoundFunction<T>,
    pub j_tau: FrictionPotential<T>,
}

/// `j` with the penetration argument already evaluated: a linear normal term
/// plus a weighted tangential potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenBounds<T> {
    pub g_nu: T,
    pub g_tau: T,
}

impl<T: Scalar> ContactLaw<T> {
    /// Ramp `(30, 0.1)` for both bounds and the exp-norm friction potential.
    pub fn base() -> Self {
        let g = BoundFunction::ramp(T::lit(30.0), T::lit(0.1));
        Self { g_nu: g.clone(), g_tau: g, j_tau: FrictionPotential::exp_norm_default() }
    }

    pub fn frictionless_free() -> Self {
        Self { g_nu: BoundFunction::Zero, g_tau: BoundFunction::Zero, j_tau: FrictionPotential::Norm }
    }

    pub fn freeze(&self, x: [T; 2], eta_nu: T) -> FrozenBounds<T> {
        FrozenBounds { g_nu: self.g_nu.eval(x, eta_nu), g_tau: self.g_tau.eval(x, eta_nu) }
    }

    /// Pointwise superpotential for prior displacement trace `eta` and velocity
    /// trace `xi`.
    pub fn eval_j(&self, x: [T; 2], eta: [T; 2], xi: [T; 2]) -> T {
        let eta_s = ContactSample::from_vector(x, T::one(), eta);
        let xi_s = ContactSample::from_vector(x, T::one(), xi);
        self.eval_j_split(x, eta_s.u_nu, xi_s.u_nu, xi_s.u_tau)
    }

    #[inline]
    fn eval_j_split(&self, x: [T; 2], eta_nu: T, xi_nu: T, xi_tau: [T; 2]) -> T {
        let b = self.freeze(x, eta_nu);
        let normal = if b.g_nu == T::zero() { T::zero() } else { b.g_nu * xi_nu };
        let tangential = if b.g_tau == T::zero() { T::zero() } else { b.g_tau * self.j_tau.eval(xi_tau) };
        normal + tangential
    }

    /// `J(eta, xi) = int_{contact side} j(x, eta, xi) da` by the samples' quadrature.
    pub fn eval_big_j(&self, prior: &[ContactSample<T>], vel: &[ContactSample<T>]) -> Result<T> {
        if prior.len() != vel.len() {
            return Err(Error::SampleLayoutMismatch(format!("{} vs {} samples", prior.len(), vel.len())));
        }
        let mut acc = T::zero();
        for (i, (p, v)) in prior.iter().zip(vel).enumerate() {
            if p.x != v.x || p.weight != v.weight {
                return Err(Error::SampleLayoutMismatch(format!("sample {i} differs in position or weight")));
            }
            acc += p.weight * self.eval_j_split(p.x, p.u_nu, v.u_nu, v.u_tau);
        }
        Ok(acc)
    }
}

/// Free-function form of [`ContactLaw::eval_big_j`].
#[allow(non_snake_case)]
pub fn eval_J<T: Scalar>(law: &ContactLaw<T>, prior: &[ContactSample<T>], vel: &[ContactSample<T>]) -> Result<T> {
    law.eval_big_j(prior, vel)
}

pub fn eval_j<T: Scalar>(law: &ContactLaw<T>, x: [T; 2], eta: [T; 2], xi: [T; 2]) -> T {
    law.eval_j(x, eta, xi)
}
