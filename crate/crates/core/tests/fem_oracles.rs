use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscontact::contact::{eval_J, BoundFunction, ContactLaw, FrictionPotential};
use viscontact::fem::{self, ContactSample, DofMap, LoadData, MaterialParams};
use viscontact::mesh::{prolongate, BoundaryTag, Mesh};

/// Coefficients `(c_x, c_y, c_0)` of the affine function through three nodal values.
fn affine_fit(p: [[f64; 2]; 3], vals: [f64; 3]) -> Vector3<f64> {
    let m = Matrix3::from_fn(|r, c| if c < 2 { p[r][c] } else { 1.0 });
    m.lu().solve(&Vector3::from(vals)).unwrap()
}

/// Barycentric coordinates of `x` in triangle `p`, by a linear solve.
fn barycentric(p: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
    let m = Matrix3::new(p[0][0], p[1][0], p[2][0], p[0][1], p[1][1], p[2][1], 1.0, 1.0, 1.0);
    let l = m.lu().solve(&Vector3::new(x[0], x[1], 1.0)).unwrap();
    [l[0], l[1], l[2]]
}

/// Value of a P1 field at `x`, found by searching the triangle that contains it.
fn eval_p1(mesh: &Mesh<f64>, full: &[f64], x: [f64; 2]) -> [f64; 2] {
    for t in mesh.triangles() {
        let p = t.map(|i| mesh.nodes()[i]);
        let l = barycentric(p, x);
        if l.iter().all(|&v| v >= -1e-12) {
            return [0, 1].map(|c| (0..3).map(|a| l[a] * full[2 * t[a] + c]).sum());
        }
    }
    panic!("point {x:?} outside the mesh");
}

#[test]
fn prolongated_hat_matches_pointwise_evaluation() {
    let coarse = Mesh::<f64>::build_uniform(2).unwrap();
    let fine = Mesh::<f64>::build_uniform(4).unwrap();
    for node in 0..coarse.node_count() {
        for comp in 0..2 {
            let mut hat = vec![0.0; 2 * coarse.node_count()];
            hat[2 * node + comp] = 1.0;
            let p = prolongate(&coarse, &fine, &hat).unwrap();
            for (i, &x) in fine.nodes().iter().enumerate() {
                let want = eval_p1(&coarse, &hat, x);
                assert!((p[2 * i] - want[0]).abs() < 1e-14, "node {node} comp {comp} at {x:?}");
                assert!((p[2 * i + 1] - want[1]).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn prolongated_hat_averages_along_coarse_edges() {
    let coarse = Mesh::<f64>::build_uniform(2).unwrap();
    let fine = Mesh::<f64>::build_uniform(4).unwrap();
    let centre = coarse.node_index(1, 1);
    let mut hat = vec![0.0; 2 * coarse.node_count()];
    hat[2 * centre] = 1.0;
    let p = prolongate(&coarse, &fine, &hat).unwrap();
    // Mesh edges through the centre: horizontal, vertical and the diagonal.
    for (col, row) in [(1, 2), (3, 2), (2, 1), (2, 3), (1, 1), (3, 3)] {
        assert_eq!(p[2 * fine.node_index(col, row)], 0.5);
    }
    // Midpoint of a diagonal that does not end at the centre.
    assert_eq!(p[2 * fine.node_index(1, 3)], 0.0);
    assert_eq!(p[2 * fine.node_index(2, 2)], 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prolongation_preserves_v_norm(
        n in 1usize..=4,
        factor in 1usize..=4,
        seed in any::<u64>(),
    ) {
        let coarse = Mesh::<f64>::build_uniform(n).unwrap();
        let fine = Mesh::<f64>::build_uniform(n * factor).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..2 * coarse.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = fem::v_norm_full(&coarse, &u);
        let b = fem::v_norm_full(&fine, &prolongate(&coarse, &fine, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} vs {b}");
    }
}

/// Degree-5 seven-point rule: barycentric point and weight, weights sum to 1.
fn dunavant7() -> Vec<([f64; 3], f64)> {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let mut out = vec![([1.0 / 3.0; 3], 9.0 / 40.0)];
    for (a, w) in [(a1, w1), (a2, w2)] {
        let b = 1.0 - 2.0 * a;
        out.push(([a, a, b], w));
        out.push(([a, b, a], w));
        out.push(([b, a, a], w));
    }
    out
}

/// `int 2 mu |eps|^2 + lam (tr eps)^2` of a full nodal field, with strains
/// from an affine fit per triangle and a seven-point rule.
fn energy_oracle(mesh: &Mesh<f64>, full: &[f64], mu: f64, lam: f64) -> f64 {
    let mut acc = 0.0;
    for t in mesh.triangles() {
        let p = t.map(|i| mesh.nodes()[i]);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let gx = affine_fit(p, t.map(|i| full[2 * i]));
        let gy = affine_fit(p, t.map(|i| full[2 * i + 1]));
        for (_, w) in dunavant7() {
            let (exx, eyy, exy) = (gx[0], gy[1], 0.5 * (gx[1] + gy[0]));
            let density = 2.0 * mu * (exx * exx + eyy * eyy + 2.0 * exy * exy) + lam * (exx + eyy).powi(2);
            acc += area * w * density;
        }
    }
    acc
}

#[test]
fn random_field_energy_matches_quadrature() {
    let mesh = Mesh::<f64>::build_uniform(2).unwrap();
    let dm = DofMap::new(&mesh);
    let params = MaterialParams { phi: 2.0, xi: 2.0, eta: 4.0, lambda: 4.0 };
    let a = fem::assemble_viscosity(&mesh, &params, &dm);
    let b = fem::assemble_elasticity(&mesh, &params, &dm);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u: Vec<f64> = (0..dm.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let full = dm.expand(&u);
        let ea = energy_oracle(&mesh, &full, 2.0, 2.0);
        let eb = energy_oracle(&mesh, &full, 4.0, 4.0);
        assert!((a.quadratic_form(&u) - ea).abs() <= 1e-12 * ea);
        assert!((b.quadratic_form(&u) - eb).abs() <= 1e-12 * eb);
    }
}

#[test]
fn galerkin_consistency_on_affine_fields() {
    // For u = G x with u = 0 on the clamped side, u^T M u is the constant
    // strain energy density times the area of the unit square.
    let mesh = Mesh::<f64>::build_uniform(3).unwrap();
    let dm = DofMap::new(&mesh);
    let params = MaterialParams { phi: 1.5, xi: 0.7, eta: 1.0, lambda: 1.0 };
    let m = fem::assemble_viscosity(&mesh, &params, &dm);
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.3, -0.8)] {
        let full: Vec<f64> = mesh.nodes().iter().flat_map(|p| [a * p[0], b * p[0]]).collect();
        let u = dm.restrict(&full);
        let (exx, exy) = (a, 0.5 * b);
        let want = 2.0 * 1.5 * (exx * exx + 2.0 * exy * exy) + 0.7 * exx * exx;
        assert!((m.quadratic_form(&u) - want).abs() < 1e-12);
    }
}

#[test]
fn unit_cell_load_is_lumped_area() {
    let mesh = Mesh::<f64>::build_uniform(1).unwrap();
    let dm = DofMap::new(&mesh);
    let f = fem::assemble_load(&mesh, &LoadData::constant([-2.5, -0.5], [0.0, 0.0]), 0.0, &dm);
    // Lumped area of a node: a third of every triangle touching it.
    let mut lumped = vec![0.0; mesh.node_count()];
    for (t, nodes) in mesh.triangles().iter().enumerate() {
        for &n in nodes {
            lumped[n] += mesh.signed_area(t) / 3.0;
        }
    }
    let (mut fy, mut area) = (0.0, 0.0);
    for node in 0..mesh.node_count() {
        if let Some(g) = dm.free_index(node, 1) {
            fy += f[g];
            area += lumped[node];
        }
    }
    assert!((fy - (-0.5 * area)).abs() < 1e-15);
    // nodes (1, 0) and (1, 1): 1/6 + 1/3
    assert!((area - 0.5).abs() < 1e-15);
}

/// Composite midpoint rule for `int_0^1 g(x) dx`.
fn midpoint(g: &dyn Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    (0..m).map(|i| g((i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Piecewise-linear interpolation of nodal values on `[0, 1]`.
fn interp(vals: &[f64], x: f64) -> f64 {
    let n = vals.len() - 1;
    let s = x * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let t = s - i as f64;
    (1.0 - t) * vals[i] + t * vals[i + 1]
}

/// Compares `eval_J` on random traces with a dense quadrature of the same
/// integrand and returns the largest deviation.
fn contact_integral_deviation(j_tau: FrictionPotential<f64>, seed: u64) -> f64 {
    let mesh = Mesh::<f64>::build_uniform(4).unwrap();
    let dm = DofMap::unconstrained(&mesh);
    let bottom = mesh.nodes_tagged(BoundaryTag::Contact);
    assert_eq!(bottom.len(), 5);
    let law = ContactLaw { g_nu: BoundFunction::ramp(30.0, 0.1), g_tau: BoundFunction::ramp(20.0, 0.1), j_tau };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        // Penetration inside the linear part of the ramps and a one-signed
        // tangential velocity keep the integrand smooth on every edge.
        let pen: Vec<f64> = (0..5).map(|_| rng.gen_range(0.01..0.09)).collect();
        let vx: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..2.0)).collect();
        let vy: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut d = vec![0.0; 2 * mesh.node_count()];
        let mut v = vec![0.0; 2 * mesh.node_count()];
        for &node in &bottom {
            let col = (mesh.nodes()[node][0] * 4.0).round() as usize;
            d[2 * node + 1] = -pen[col];
            v[2 * node] = vx[col];
            v[2 * node + 1] = vy[col];
        }
        let prior: Vec<ContactSample<f64>> = fem::contact_trace(&mesh, &dm, &dm.restrict(&d)).unwrap();
        let vel = fem::contact_trace(&mesh, &dm, &dm.restrict(&v)).unwrap();
        let got = eval_J(&law, &prior, &vel).unwrap();

        let g = |x: f64| {
            let eta = interp(&pen, x);
            let xi_nu = -interp(&vy, x);
            let r = interp(&vx, x).abs();
            let jt = match j_tau {
                FrictionPotential::ExpNorm { a, b } => -a * (-r).exp() + b * r,
                FrictionPotential::Norm => r,
            };
            30.0 * eta * xi_nu + 20.0 * eta * jt
        };
        // Richardson extrapolation of the midpoint rule removes its h^2 term.
        let (m1, m2) = (midpoint(&g, 1000), midpoint(&g, 2000));
        worst = worst.max((got - (4.0 * m2 - m1) / 3.0).abs());
    }
    worst
}

#[test]
fn contact_integral_matches_dense_quadrature() {
    // Piecewise quadratic integrand: three Gauss points per edge are exact.
    let e = contact_integral_deviation(FrictionPotential::Norm, 3);
    assert!(e < 1e-10, "{e:e}");
    // The exponential part is integrated with the Gauss rule's h^6 error.
    let e = contact_integral_deviation(FrictionPotential::exp_norm_default(), 3);
    assert!(e < 1e-6, "{e:e}");
}
