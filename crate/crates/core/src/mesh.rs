//! Structured triangulations of the unit square.
//!
//! The boundary is split into a clamped side `{0} x [0,1]`, a contact side
//! `[0,1] x {0}` and a traction side made of the top and right edges. Every cell
//! is cut along its bottom-left to top-right diagonal, so the mesh with `2n`
//! segments per side refines the mesh with `n` segments and P1 functions embed
//! exactly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Contact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Start node; the domain lies to the left of `a -> b`.
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    n_per_side: usize,
    nodes: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl<T: Scalar> Mesh<T> {
    /// Uniform mesh with `n_per_side` segments on each side of the unit square.
    ///
    /// Nodes are numbered row by row (`index = row * (n + 1) + col`), triangles
    /// are counterclockwise.
    pub fn build_uniform(n_per_side: usize) -> Result<Self> {
        if n_per_side < 1 {
            return Err(Error::InvalidResolution(n_per_side));
        }
        let n = n_per_side;
        let side = n + 1;
        let nf = T::from_usize_lossy(n);
        let mut nodes = Vec::with_capacity(side * side);
        for row in 0..side {
            for col in 0..side {
                nodes.push([T::from_usize_lossy(col) / nf, T::from_usize_lossy(row) / nf]);
            }
        }

        let id = |col: usize, row: usize| row * side + col;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for row in 0..n {
            for col in 0..n {
                let p00 = id(col, row);
                let p10 = id(col + 1, row);
                let p11 = id(col + 1, row + 1);
                let p01 = id(col, row + 1);
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            }
        }

        let mut boundary_edges = Vec::with_capacity(4 * n);
        for col in 0..n {
            boundary_edges.push(BoundaryEdge { a: id(col, 0), b: id(col + 1, 0), tag: BoundaryTag::Contact });
        }
        for row in 0..n {
            boundary_edges.push(BoundaryEdge { a: id(n, row), b: id(n, row + 1), tag: BoundaryTag::Neumann });
        }
        for col in (0..n).rev() {
            boundary_edges.push(BoundaryEdge { a: id(col + 1, n), b: id(col, n), tag: BoundaryTag::Neumann });
        }
        for row in (0..n).rev() {
            boundary_edges.push(BoundaryEdge { a: id(0, row + 1), b: id(0, row), tag: BoundaryTag::Dirichlet });
        }

        Ok(Self { n_per_side, nodes, triangles, boundary_edges })
    }

    pub fn n_per_side(&self) -> usize {
        self.n_per_side
    }

    /// Mesh size `h = 1 / n_per_side`.
    pub fn h(&self) -> T {
        T::one() / T::from_usize_lossy(self.n_per_side)
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, col: usize, row: usize) -> usize {
        row * (self.n_per_side + 1) + col
    }

    pub fn edges_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> + '_ {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Nodes touched by at least one edge with the given tag, in ascending order.
    pub fn nodes_tagged(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges_tagged(tag).flat_map(|e| [e.a, e.b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Signed area of a triangle (positive for counterclockwise ordering).
    pub fn signed_area(&self, tri: usize) -> T {
        let [a, b, c] = self.triangles[tri];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let two = T::lit(2.0);
        ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])) / two
    }

    /// Embeds a nodal P1 field (two entries per node, interleaved) of `self` into
    /// the nested mesh `fine`.
    pub fn prolongate(&self, fine: &Mesh<T>, dof_vector: &[T]) -> Result<Vec<T>> {
        prolongate(self, fine, dof_vector)
    }
}

/// Exact P1 embedding of a coarse nodal field into a nested fine mesh.
///
/// `dof_vector` holds `(u_x, u_y)` for every coarse node. Each fine node is
/// located in its coarse cell by integer arithmetic, so the result carries no
/// point-location roundoff.
pub fn prolongate<T: Scalar>(coarse: &Mesh<T>, fine: &Mesh<T>, dof_vector: &[T]) -> Result<Vec<T>> {
    let nc = coarse.n_per_side;
    let nf = fine.n_per_side;
    if nf % nc != 0 {
        return Err(Error::NotNested { coarse: nc, fine: nf });
    }
    if dof_vector.len() != 2 * coarse.node_count() {
        return Err(Error::DimensionMismatch { expected: 2 * coarse.node_count(), got: dof_vector.len() });
    }
    let r = nf / nc;
    let rf = T::from_usize_lossy(r);
    let mut out = vec![T::zero(); 2 * fine.node_count()];
    for row in 0..=nf {
        for col in 0..=nf {
            let cc = (col / r).min(nc - 1);
            let cr = (row / r).min(nc - 1);
            let a = T::from_usize_lossy(col - cc * r) / rf;
            let b = T::from_usize_lossy(row - cr * r) / rf;
            let p00 = coarse.node_index(cc, cr);
            let p10 = coarse.node_index(cc + 1, cr);
            let p11 = coarse.node_index(cc + 1, cr + 1);
            let p01 = coarse.node_index(cc, cr + 1);
            // Lower triangle (p00, p10, p11) when a >= b, upper (p00, p11, p01) otherwise.
            let weights = if a >= b {
                [(p00, T::one() - a), (p10, a - b), (p11, b)]
            } else {
                [(p00, T::one() - b), (p01, b - a), (p11, a)]
            };
            let dst = fine.node_index(col, row);
            for comp in 0..2 {
                out[2 * dst + comp] = weights.iter().map(|&(p, w)| w * dof_vector[2 * p + comp]).sum();
            }
        }
    }
    Ok(out)
}
