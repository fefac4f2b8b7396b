//! The per-step functional
//! `L_j(w) = 1/2 <A w, w> + <B d_{j-1} - f_j, w> + J(trace d_{j-1}, trace w)`.

use crate::contact::{ContactLaw, FrictionPotential, FrozenBounds};
use crate::fem::{ContactQuadrature, ContactSample, DofMap};
use crate::linalg::CsrMatrix;
use crate::nsopt::Objective;
use crate::scalar::{dot, Scalar};

/// Free-DOF coordinates of a contact quadrature point: `(free index, component, shape value)`.
pub(crate) type SampleStencil<T> = Vec<(usize, usize, T)>;

pub(crate) fn sample_stencils<T: Scalar>(quad: &ContactQuadrature<T>, dofmap: &DofMap) -> Vec<SampleStencil<T>> {
    quad.points()
        .iter()
        .map(|p| {
            let mut s = Vec::with_capacity(4);
            for k in 0..2 {
                for comp in 0..2 {
                    if let Some(g) = dofmap.free_index(p.nodes[k], comp) {
                        s.push((g, comp, p.shape[k]));
                    }
                }
            }
            s
        })
        .collect()
}

/// `L_j` for one time step. Evaluation has no side effects.
pub struct StepObjective<'p, T: Scalar> {
    viscosity: &'p CsrMatrix<T>,
    diag: Vec<T>,
    linear: Vec<T>,
    stencils: Vec<SampleStencil<T>>,
    weights: Vec<T>,
    frozen: Vec<FrozenBounds<T>>,
    j_tau: FrictionPotential<T>,
    /// Samples touched by each free DOF.
    touching: Vec<Vec<usize>>,
    prior: Vec<ContactSample<T>>,
    quad: &'p ContactQuadrature<T>,
}

impl<'p, T: Scalar> StepObjective<'p, T> {
    /// `linear` is `B d_prev - f_j`; `prior` the contact trace of `d_prev`.
    pub(crate) fn new(
        viscosity: &'p CsrMatrix<T>,
        linear: Vec<T>,
        quad: &'p ContactQuadrature<T>,
        dofmap: &DofMap,
        law: &ContactLaw<T>,
        prior: Vec<ContactSample<T>>,
    ) -> Self {
        let stencils = sample_stencils(quad, dofmap);
        let weights = quad.points().iter().map(|p| p.weight).collect();
        let frozen = prior.iter().map(|s| law.freeze(s.x, s.u_nu)).collect();
        let mut touching = vec![Vec::new(); dofmap.n_free()];
        for (q, st) in stencils.iter().enumerate() {
            for &(g, _, _) in st {
                touching[g].push(q);
            }
        }
        Self {
            diag: viscosity.diagonal(),
            viscosity,
            linear,
            stencils,
            weights,
            frozen,
            j_tau: law.j_tau,
            touching,
            prior,
            quad,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// `B d_prev - f_j`.
    pub fn linear_term(&self) -> &[T] {
        &self.linear
    }

    pub fn prior_trace(&self) -> &[ContactSample<T>] {
        &self.prior
    }

    pub fn frozen_bounds(&self) -> &[FrozenBounds<T>] {
        &self.frozen
    }

    pub(crate) fn stencils(&self) -> &[SampleStencil<T>] {
        &self.stencils
    }

    pub(crate) fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn friction_potential(&self) -> FrictionPotential<T> {
        self.j_tau
    }

    /// Velocity trace at sample `q` given a free-DOF vector.
    #[inline]
    fn trace_at(&self, q: usize, w: &[T]) -> [T; 2] {
        let mut v = [T::zero(); 2];
        for &(g, comp, s) in &self.stencils[q] {
            v[comp] += s * w[g];
        }
        v
    }

    #[inline]
    fn sample_term(&self, q: usize, xi: [T; 2]) -> T {
        let b = self.frozen[q];
        // nu = (0, -1): xi_nu = -xi_y, xi_tau = (xi_x, 0)
        let mut v = T::zero();
        if b.g_nu != T::zero() {
            v += b.g_nu * (-xi[1]);
        }
        if b.g_tau != T::zero() {
            v += b.g_tau * self.j_tau.eval([xi[0], T::zero()]);
        }
        self.weights[q] * v
    }

    /// `J(trace d_prev, trace w)`.
    pub fn contact_term(&self, w: &[T]) -> T {
        (0..self.stencils.len()).map(|q| self.sample_term(q, self.trace_at(q, w))).sum()
    }

    /// `1/2 w^T A w + (B d_prev - f_j)^T w`.
    pub fn smooth_term(&self, w: &[T]) -> T {
        T::lit(0.5) * self.viscosity.quadratic_form(w) + dot(&self.linear, w)
    }

    /// Gradient of the smooth part, `A w + B d_prev - f_j`.
    pub fn smooth_gradient(&self, w: &[T]) -> Vec<T> {
        let mut g = self.viscosity.mul_vec(w);
        for (gi, &l) in g.iter_mut().zip(&self.linear) {
            *gi += l;
        }
        g
    }

    pub fn quadrature(&self) -> &ContactQuadrature<T> {
        self.quad
    }
}

impl<T: Scalar> Objective<T> for StepObjective<'_, T> {
    fn value(&self, w: &[T]) -> T {
        self.smooth_term(w) + self.contact_term(w)
    }

    fn restrict<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn FnMut(T) -> T + 'a> {
        let ax = self.viscosity.mul_vec(x);
        let ad = self.viscosity.mul_vec(d);
        let half = T::lit(0.5);
        let q0 = half * dot(&ax, x) + dot(&self.linear, x);
        let q1 = dot(&ad, x) + dot(&self.linear, d);
        let q2 = half * dot(&ad, d);
        let tx: Vec<[T; 2]> = (0..self.stencils.len()).map(|q| self.trace_at(q, x)).collect();
        let td: Vec<[T; 2]> = (0..self.stencils.len()).map(|q| self.trace_at(q, d)).collect();
        Box::new(move |t| {
            let contact: T = (0..tx.len())
                .map(|q| self.sample_term(q, [tx[q][0] + t * td[q][0], tx[q][1] + t * td[q][1]]))
                .sum();
            q0 + t * (q1 + t * q2) + contact
        })
    }

    fn coordinate_probes(&self, x: &[T], h: T) -> Vec<[T; 2]> {
        let grad = self.smooth_gradient(x);
        let base = self.value(x);
        let half = T::lit(0.5);
        (0..x.len())
            .map(|i| {
                [h, -h].map(|s| {
                    let smooth = s * grad[i] + half * s * s * self.diag[i];
                    let mut contact = T::zero();
                    for &q in &self.touching[i] {
                        let mut xi = self.trace_at(q, x);
                        let old = self.sample_term(q, xi);
                        for &(g, comp, sh) in &self.stencils[q] {
                            if g == i {
                                xi[comp] += sh * s;
                            }
                        }
                        contact += self.sample_term(q, xi) - old;
                    }
                    base + smooth + contact
                })
            })
            .collect()
    }
}
