//! Exact elimination of the DOFs on which `L_j` is quadratic.
//!
//! The friction term only sees the tangential (x) components of the contact
//! nodes; everything else enters `L_j` quadratically or linearly. Splitting the
//! free DOFs into those tangential unknowns `z` and the rest `y`,
//! `min_y L_j(z, y)` has the closed form `y*(z) = -A_yy^{-1} (c_y + A_yz z)`
//! and the reduced functional
//!
//! `R(z) = 1/2 z^T S z + b^T z + c0 + F(z)`, `S = A_zz - A_zy A_yy^{-1} A_yz`,
//!
//! satisfies `R(z) = L_j(z, y*(z))`. Powell runs on `R`.

use crate::contact::FrictionPotential;
use crate::error::Result;
use crate::fem::DofMap;
use crate::linalg::{BandCholesky, CsrMatrix};
use crate::mesh::{BoundaryTag, Mesh};
use crate::nsopt::Objective;
use crate::scalar::{dot, Scalar};

use super::objective::StepObjective;

/// Step-independent part of the elimination: depends only on `A`.
#[derive(Debug, Clone)]
pub struct Condensation<T> {
    z_dofs: Vec<usize>,
    y_dofs: Vec<usize>,
    /// Position of each free DOF in `z` (if tangential contact) else `None`.
    z_pos: Vec<Option<usize>>,
    a_yy: BandCholesky<T>,
    /// `A_yy^{-1} A_yz`, column `b` at `w[b * ny..(b + 1) * ny]`.
    w: Vec<T>,
    /// Dense Schur complement, row-major.
    s: Vec<T>,
}

impl<T: Scalar> Condensation<T> {
    pub fn new(mesh: &Mesh<T>, dofmap: &DofMap, viscosity: &CsrMatrix<T>) -> Result<Self> {
        let z_dofs: Vec<usize> = mesh
            .nodes_tagged(BoundaryTag::Contact)
            .into_iter()
            .filter_map(|node| dofmap.free_index(node, 0))
            .collect();
        let mut z_pos = vec![None; dofmap.n_free()];
        for (k, &g) in z_dofs.iter().enumerate() {
            z_pos[g] = Some(k);
        }
        let y_dofs: Vec<usize> = (0..dofmap.n_free()).filter(|g| z_pos[*g].is_none()).collect();

        let a_yy = BandCholesky::factor(&viscosity.submatrix(&y_dofs, &y_dofs))?;
        let a_yz = viscosity.submatrix(&y_dofs, &z_dofs);
        let a_zy = viscosity.submatrix(&z_dofs, &y_dofs);
        let (ny, nz) = (y_dofs.len(), z_dofs.len());

        let mut w = vec![T::zero(); ny * nz];
        let mut col = vec![T::zero(); ny];
        for b in 0..nz {
            for (r, c) in col.iter_mut().enumerate() {
                *c = a_yz.get(r, b);
            }
            a_yy.solve_in_place(&mut col);
            w[b * ny..(b + 1) * ny].copy_from_slice(&col);
        }

        let mut s = vec![T::zero(); nz * nz];
        for a in 0..nz {
            for b in 0..nz {
                let wb = &w[b * ny..(b + 1) * ny];
                let coupling: T = a_zy.row(a).map(|(k, v)| v * wb[k]).sum();
                s[a * nz + b] = viscosity.get(z_dofs[a], z_dofs[b]) - coupling;
            }
        }
        // Symmetrize away roundoff.
        let half = T::lit(0.5);
        for a in 0..nz {
            for b in a + 1..nz {
                let m = half * (s[a * nz + b] + s[b * nz + a]);
                s[a * nz + b] = m;
                s[b * nz + a] = m;
            }
        }

        Ok(Self { z_dofs, y_dofs, z_pos, a_yy, w, s })
    }

    /// Free indices of the reduced unknowns.
    pub fn z_dofs(&self) -> &[usize] {
        &self.z_dofs
    }

    pub fn y_dofs(&self) -> &[usize] {
        &self.y_dofs
    }

    pub fn schur(&self) -> &[T] {
        &self.s
    }

    /// Builds the reduced functional of one step.
    ///
    /// `c` collects every term of `L_j` linear in `w`: `B d_prev - f_j` plus the
    /// normal compliance term, which is linear once the prior trace is fixed.
    pub fn reduce<'s>(&'s self, step: &StepObjective<'_, T>) -> ReducedObjective<'s, T> {
        let mut c = step.linear_term().to_vec();
        let mut friction = Vec::new();
        for (q, stencil) in step.stencils().iter().enumerate() {
            let b = step.frozen_bounds()[q];
            let wq = step.weights()[q];
            let mut zs = Vec::with_capacity(2);
            for &(g, comp, sh) in stencil {
                if comp == 1 {
                    // xi_nu = -xi_y
                    c[g] -= wq * b.g_nu * sh;
                } else if let Some(k) = self.z_pos[g] {
                    zs.push((k, sh));
                }
            }
            if b.g_tau != T::zero() && !zs.is_empty() {
                friction.push(FrictionSample { coef: wq * b.g_tau, stencil: zs });
            }
        }

        let ny = self.y_dofs.len();
        let nz = self.z_dofs.len();
        let c_y: Vec<T> = self.y_dofs.iter().map(|&g| c[g]).collect();
        let y0 = self.a_yy.solve(&c_y);
        let b: Vec<T> = (0..nz).map(|k| c[self.z_dofs[k]] - dot(&self.w[k * ny..(k + 1) * ny], &c_y)).collect();
        let c0 = -T::lit(0.5) * dot(&c_y, &y0);

        ReducedObjective { cond: self, b, c0, y0, friction, j_tau: step.friction_potential() }
    }
}

#[derive(Debug, Clone)]
struct FrictionSample<T> {
    /// Quadrature weight times the frozen friction bound.
    coef: T,
    stencil: Vec<(usize, T)>,
}

/// `R(z) = L_j(z, y*(z))`.
pub struct ReducedObjective<'c, T: Scalar> {
    cond: &'c Condensation<T>,
    b: Vec<T>,
    c0: T,
    y0: Vec<T>,
    friction: Vec<FrictionSample<T>>,
    j_tau: FrictionPotential<T>,
}

impl<T: Scalar> ReducedObjective<'_, T> {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    fn s_mul(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n).map(|a| dot(&self.cond.s[a * n..(a + 1) * n], x)).collect()
    }

    #[inline]
    fn xi(&self, f: &FrictionSample<T>, z: &[T]) -> T {
        f.stencil.iter().map(|&(k, sh)| sh * z[k]).sum()
    }

    fn friction_value(&self, z: &[T]) -> T {
        self.friction.iter().map(|f| f.coef * self.j_tau.eval_radial(self.xi(f, z).abs())).sum()
    }

    /// Full free-DOF vector `(z, y*(z))`.
    pub fn lift(&self, z: &[T]) -> Vec<T> {
        let cond = self.cond;
        let ny = cond.y_dofs.len();
        let mut full = vec![T::zero(); cond.z_pos.len()];
        for (k, &g) in cond.z_dofs.iter().enumerate() {
            full[g] = z[k];
        }
        for (r, &g) in cond.y_dofs.iter().enumerate() {
            let mut v = -self.y0[r];
            for (k, &zk) in z.iter().enumerate() {
                if zk != T::zero() {
                    v -= cond.w[k * ny + r] * zk;
                }
            }
            full[g] = v;
        }
        full
    }

    /// Reduced coordinates of a full free-DOF vector.
    pub fn project(&self, full: &[T]) -> Vec<T> {
        self.cond.z_dofs.iter().map(|&g| full[g]).collect()
    }
}

impl<T: Scalar> Objective<T> for ReducedObjective<'_, T> {
    fn value(&self, z: &[T]) -> T {
        let sz = self.s_mul(z);
        T::lit(0.5) * dot(&sz, z) + dot(&self.b, z) + self.c0 + self.friction_value(z)
    }

    fn restrict<'a>(&'a self, x: &'a [T], d: &'a [T]) -> Box<dyn FnMut(T) -> T + 'a> {
        let sx = self.s_mul(x);
        let sd = self.s_mul(d);
        let half = T::lit(0.5);
        let q0 = half * dot(&sx, x) + dot(&self.b, x) + self.c0;
        let q1 = dot(&sd, x) + dot(&self.b, d);
        let q2 = half * dot(&sd, d);
        let pairs: Vec<(T, T, T)> =
            self.friction.iter().map(|f| (f.coef, self.xi(f, x), self.xi(f, d))).collect();
        let j_tau = self.j_tau;
        Box::new(move |t| {
            let fr: T = pairs.iter().map(|&(c, a, b)| c * j_tau.eval_radial((a + t * b).abs())).sum();
            q0 + t * (q1 + t * q2) + fr
        })
    }
}
