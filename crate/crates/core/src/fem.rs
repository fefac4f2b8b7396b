//! Piecewise linear finite elements for the Kelvin-Voigt body.
//!
//! DOFs are interleaved `(u_x, u_y)` per node. Nodes on the clamped side are
//! eliminated, so every assembled object lives on the free DOFs of a [`DofMap`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::Scalar;

/// Coefficients of the viscosity operator `2 phi tau + xi tr(tau) I` and the
/// elasticity operator `2 eta tau + lambda tr(tau) I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T> {
    pub phi: T,
    pub xi: T,
    pub eta: T,
    pub lambda: T,
}

impl<T: Scalar> MaterialParams<T> {
    pub fn new(phi: T, xi: T, eta: T, lambda: T) -> Result<Self> {
        let p = Self { phi, xi, eta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("phi", self.phi), ("xi", self.xi), ("eta", self.eta), ("lambda", self.lambda)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidMaterial(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Free/clamped DOF bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    free_dofs: Vec<usize>,
    full_to_free: Vec<Option<usize>>,
}

impl DofMap {
    /// Clamps both DOFs of every node on the Dirichlet side.
    pub fn new<T: Scalar>(mesh: &Mesh<T>) -> Self {
        let mut clamped = vec![false; mesh.node_count()];
        for n in mesh.nodes_tagged(BoundaryTag::Dirichlet) {
            clamped[n] = true;
        }
        Self::from_mask(&clamped)
    }

    /// Every DOF free; used for checks on the unconstrained operators.
    pub fn unconstrained<T: Scalar>(mesh: &Mesh<T>) -> Self {
        Self::from_mask(&vec![false; mesh.node_count()])
    }

    fn from_mask(clamped: &[bool]) -> Self {
        let mut free_dofs = Vec::new();
        let mut full_to_free = vec![None; 2 * clamped.len()];
        for (node, &c) in clamped.iter().enumerate() {
            if !c {
                for comp in 0..2 {
                    full_to_free[2 * node + comp] = Some(free_dofs.len());
                    free_dofs.push(2 * node + comp);
                }
            }
        }
        Self { free_dofs, full_to_free }
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn full_size(&self) -> usize {
        self.full_to_free.len()
    }

    /// Free index of `(node, component)`, `None` when clamped.
    #[inline]
    pub fn free_index(&self, node: usize, comp: usize) -> Option<usize> {
        self.full_to_free[2 * node + comp]
    }

    /// Full nodal vector with zeros on clamped DOFs.
    pub fn expand<T: Scalar>(&self, free: &[T]) -> Vec<T> {
        assert_eq!(free.len(), self.n_free());
        let mut full = vec![T::zero(); self.full_size()];
        for (k, &g) in self.free_dofs.iter().enumerate() {
            full[g] = free[k];
        }
        full
    }

    pub fn restrict<T: Scalar>(&self, full: &[T]) -> Vec<T> {
        assert_eq!(full.len(), self.full_size());
        self.free_dofs.iter().map(|&g| full[g]).collect()
    }

    fn check<T>(&self, v: &[T]) -> Result<()> {
        if v.len() != self.n_free() {
            return Err(Error::DimensionMismatch { expected: self.n_free(), got: v.len() });
        }
        Ok(())
    }
}

type FieldFn<T> = dyn Fn([T; 2], T) -> [T; 2] + Send + Sync;

/// A vector field of position and time.
#[derive(Clone)]
pub enum Field<T> {
    Constant([T; 2]),
    Function(Arc<FieldFn<T>>),
}

impl<T: Scalar> Field<T> {
    pub fn zero() -> Self {
        Field::Constant([T::zero(); 2])
    }

    pub fn function(f: impl Fn([T; 2], T) -> [T; 2] + Send + Sync + 'static) -> Self {
        Field::Function(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: [T; 2], t: T) -> [T; 2] {
        match self {
            Field::Constant(v) => *v,
            Field::Function(f) => f(x, t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Field::Constant(_))
    }
}

impl<T: fmt::Debug> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Field::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Body force density `f0` and surface traction `fN` on the traction side.
#[derive(Debug, Clone)]
pub struct LoadData<T> {
    pub f0: Field<T>,
    pub f_n: Field<T>,
}

impl<T: Scalar> LoadData<T> {
    pub fn constant(f0: [T; 2], f_n: [T; 2]) -> Self {
        Self { f0: Field::Constant(f0), f_n: Field::Constant(f_n) }
    }

    pub fn is_time_independent(&self) -> bool {
        self.f0.is_constant() && self.f_n.is_constant()
    }
}

/// Three-point Gauss-Legendre rule on `[0, 1]` as `(abscissa, weight)`.
pub fn gauss3<T: Scalar>() -> [(T, T); 3] {
    let half = T::lit(0.5);
    let off = T::lit(15.0).sqrt() / T::lit(10.0);
    let w_end = T::lit(5.0) / T::lit(18.0);
    let w_mid = T::lit(8.0) / T::lit(18.0);
    [(half - off, w_end), (half, w_mid), (half + off, w_end)]
}

/// Gradients of the three barycentric hat functions and the triangle area.
pub(crate) fn hat_gradients<T: Scalar>(mesh: &Mesh<T>, tri: usize) -> ([[T; 2]; 3], T) {
    let idx = mesh.triangles()[tri];
    let p = idx.map(|i| mesh.nodes()[i]);
    let area = mesh.signed_area(tri);
    let two_area = area + area;
    let mut g = [[T::zero(); 2]; 3];
    for a in 0..3 {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        g[a] = [(p[b][1] - p[c][1]) / two_area, (p[c][0] - p[b][0]) / two_area];
    }
    (g, area)
}

/// Constant strain `(e_xx, e_yy, e_xy)` of a P1 field on one triangle.
pub(crate) fn element_strain<T: Scalar>(grads: &[[T; 2]; 3], local: &[[T; 2]; 3]) -> [T; 3] {
    let mut e = [T::zero(); 3];
    let half = T::lit(0.5);
    for a in 0..3 {
        e[0] += local[a][0] * grads[a][0];
        e[1] += local[a][1] * grads[a][1];
        e[2] += half * (local[a][0] * grads[a][1] + local[a][1] * grads[a][0]);
    }
    e
}

/// Stiffness of `tau -> 2 mu tau + lam tr(tau) I` over free DOFs.
fn assemble_isotropic<T: Scalar>(mesh: &Mesh<T>, dofmap: &DofMap, mu: T, lam: T) -> CsrMatrix<T> {
    let two = T::lit(2.0);
    let d = [[two * mu + lam, lam, T::zero()], [lam, two * mu + lam, T::zero()], [T::zero(), T::zero(), mu]];
    let mut triplets = Vec::with_capacity(mesh.triangles().len() * 36);
    for (tri, nodes) in mesh.triangles().iter().enumerate() {
        let (g, area) = hat_gradients(mesh, tri);
        // Voigt rows (e_xx, e_yy, gamma_xy) against local dofs (a, comp).
        let mut bm = [[T::zero(); 6]; 3];
        for a in 0..3 {
            bm[0][2 * a] = g[a][0];
            bm[1][2 * a + 1] = g[a][1];
            bm[2][2 * a] = g[a][1];
            bm[2][2 * a + 1] = g[a][0];
        }
        let mut db = [[T::zero(); 6]; 3];
        for r in 0..3 {
            for c in 0..6 {
                db[r][c] = (0..3).map(|k| d[r][k] * bm[k][c]).sum();
            }
        }
        for i in 0..6 {
            let Some(gi) = dofmap.free_index(nodes[i / 2], i % 2) else { continue };
            for j in 0..6 {
                let Some(gj) = dofmap.free_index(nodes[j / 2], j % 2) else { continue };
                let kij: T = (0..3).map(|r| bm[r][i] * db[r][j]).sum();
                triplets.push((gi, gj, area * kij));
            }
        }
    }
    let n = dofmap.n_free();
    CsrMatrix::from_triplets(n, n, triplets)
}

/// Matrix of the viscosity operator: `M[i][j] = (A eps(phi_j), eps(phi_i))`.
pub fn assemble_viscosity<T: Scalar>(mesh: &Mesh<T>, params: &MaterialParams<T>, dofmap: &DofMap) -> CsrMatrix<T> {
    assemble_isotropic(mesh, dofmap, params.phi, params.xi)
}

/// Matrix of the elasticity operator with the Lamé pair `(eta, lambda)`.
pub fn assemble_elasticity<T: Scalar>(mesh: &Mesh<T>, params: &MaterialParams<T>, dofmap: &DofMap) -> CsrMatrix<T> {
    assemble_isotropic(mesh, dofmap, params.eta, params.lambda)
}

/// Load vector `F[i] = int f0 . phi_i dx + int_{traction side} fN . phi_i da`.
///
/// Interior integrals use the edge-midpoint rule (exact for quadratics), the
/// traction integral three-point Gauss per edge.
pub fn assemble_load<T: Scalar>(mesh: &Mesh<T>, loads: &LoadData<T>, t: T, dofmap: &DofMap) -> Vec<T> {
    let mut f = vec![T::zero(); dofmap.n_free()];
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    for (tri, nodes) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(tri);
        let p = nodes.map(|i| mesh.nodes()[i]);
        for m in 0..3 {
            // Midpoint of the edge opposite to vertex m: hats of the other two are 1/2.
            let (a, b) = ((m + 1) % 3, (m + 2) % 3);
            let x = [half * (p[a][0] + p[b][0]), half * (p[a][1] + p[b][1])];
            let val = loads.f0.eval(x, t);
            for &v in &[a, b] {
                for comp in 0..2 {
                    if let Some(g) = dofmap.free_index(nodes[v], comp) {
                        f[g] += area * third * half * val[comp];
                    }
                }
            }
        }
    }
    let rule = gauss3::<T>();
    for e in mesh.edges_tagged(BoundaryTag::Neumann) {
        let (pa, pb) = (mesh.nodes()[e.a], mesh.nodes()[e.b]);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        for &(s, w) in &rule {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let val = loads.f_n.eval(x, t);
            for (node, shape) in [(e.a, T::one() - s), (e.b, s)] {
                for comp in 0..2 {
                    if let Some(g) = dofmap.free_index(node, comp) {
                        f[g] += len * w * shape * val[comp];
                    }
                }
            }
        }
    }
    f
}

fn local_values<T: Scalar>(full: &[T], nodes: &[usize; 3]) -> [[T; 2]; 3] {
    nodes.map(|n| [full[2 * n], full[2 * n + 1]])
}

/// `sqrt(int eps(u) : eps(u) dx)`, exact per triangle.
pub fn v_norm<T: Scalar>(mesh: &Mesh<T>, dofmap: &DofMap, u: &[T]) -> Result<T> {
    dofmap.check(u)?;
    let full = dofmap.expand(u);
    Ok(v_norm_full(mesh, &full))
}

/// V-norm of a full nodal vector (clamped entries taken as given).
pub fn v_norm_full<T: Scalar>(mesh: &Mesh<T>, full: &[T]) -> T {
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for (tri, nodes) in mesh.triangles().iter().enumerate() {
        let (g, area) = hat_gradients(mesh, tri);
        let e = element_strain(&g, &local_values(full, nodes));
        acc += area * (e[0] * e[0] + e[1] * e[1] + two * e[2] * e[2]);
    }
    acc.sqrt()
}

/// `int_Omega u_comp dx` of a free-DOF field.
pub fn integrate_component<T: Scalar>(mesh: &Mesh<T>, dofmap: &DofMap, u: &[T], comp: usize) -> T {
    let full = dofmap.expand(u);
    let third = T::one() / T::lit(3.0);
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(tri, nodes)| mesh.signed_area(tri) * third * nodes.iter().map(|&n| full[2 * n + comp]).sum::<T>())
        .sum()
}

/// Outward unit normal of the contact side.
pub fn contact_normal<T: Scalar>() -> [T; 2] {
    [T::zero(), -T::one()]
}

/// One quadrature point on the contact side and the two nodes whose hats are
/// nonzero there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint<T> {
    pub x: [T; 2],
    /// Edge length times the Gauss weight.
    pub weight: T,
    pub nodes: [usize; 2],
    pub shape: [T; 2],
}

/// Quadrature layout on the contact side (three Gauss points per edge, edges
/// left to right).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactQuadrature<T> {
    points: Vec<ContactPoint<T>>,
}

impl<T: Scalar> ContactQuadrature<T> {
    pub fn new(mesh: &Mesh<T>) -> Self {
        let rule = gauss3::<T>();
        let mut points = Vec::with_capacity(3 * mesh.n_per_side());
        for e in mesh.edges_tagged(BoundaryTag::Contact) {
            let (pa, pb) = (mesh.nodes()[e.a], mesh.nodes()[e.b]);
            let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            for &(s, w) in &rule {
                points.push(ContactPoint {
                    x: [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])],
                    weight: len * w,
                    nodes: [e.a, e.b],
                    shape: [T::one() - s, s],
                });
            }
        }
        Self { points }
    }

    pub fn points(&self) -> &[ContactPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trace value of a full nodal field at point `q`.
    #[inline]
    pub fn value_at(&self, q: usize, full: &[T]) -> [T; 2] {
        let p = &self.points[q];
        let mut v = [T::zero(); 2];
        for k in 0..2 {
            for (comp, vc) in v.iter_mut().enumerate() {
                *vc += p.shape[k] * full[2 * p.nodes[k] + comp];
            }
        }
        v
    }
}

/// Trace sample on the contact side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSample<T> {
    pub x: [T; 2],
    pub weight: T,
    /// Full trace vector.
    pub u: [T; 2],
    /// Normal component `u . nu` (positive means penetration).
    pub u_nu: T,
    /// Tangential part `u - u_nu nu`.
    pub u_tau: [T; 2],
}

impl<T: Scalar> ContactSample<T> {
    pub fn from_vector(x: [T; 2], weight: T, u: [T; 2]) -> Self {
        let nu = contact_normal::<T>();
        let u_nu = u[0] * nu[0] + u[1] * nu[1];
        Self { x, weight, u, u_nu, u_tau: [u[0] - u_nu * nu[0], u[1] - u_nu * nu[1]] }
    }
}

/// Normal and tangential trace components of a free-DOF field at every contact
/// quadrature point.
pub fn contact_trace<T: Scalar>(mesh: &Mesh<T>, dofmap: &DofMap, u: &[T]) -> Result<Vec<ContactSample<T>>> {
    dofmap.check(u)?;
    let quad = ContactQuadrature::new(mesh);
    let full = dofmap.expand(u);
    Ok(trace_with(&quad, &full))
}

pub(crate) fn trace_with<T: Scalar>(quad: &ContactQuadrature<T>, full: &[T]) -> Vec<ContactSample<T>> {
    quad.points()
        .iter()
        .enumerate()
        .map(|(q, p)| ContactSample::from_vector(p.x, p.weight, quad.value_at(q, full)))
        .collect()
}
