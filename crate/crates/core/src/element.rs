//! Affine tetrahedra and the P1/P2 Lagrange bases on them.

use crate::{Mat3, Vec3};

/// Local edge numbering shared by the P2 basis and the DOF maps.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Geometry of one affine tetrahedron.
#[derive(Debug, Clone)]
pub struct TetGeometry {
    pub vertices: [Vec3; 4],
    /// Gradients of the four barycentric coordinates (constant on the element).
    pub bary_grads: [Vec3; 4],
    pub volume: f64,
    jac_inv: Mat3,
}

impl TetGeometry {
    pub fn new(vertices: [Vec3; 4]) -> Self {
        let jac = Mat3::from_columns(&[
            vertices[1] - vertices[0],
            vertices[2] - vertices[0],
            vertices[3] - vertices[0],
        ]);
        let det = jac.determinant();
        let jac_inv = jac.try_inverse().expect("degenerate tetrahedron");
        // rows of J⁻¹ are the gradients of λ1..λ3
        let g1 = jac_inv.row(0).transpose();
        let g2 = jac_inv.row(1).transpose();
        let g3 = jac_inv.row(2).transpose();
        let g0 = -(g1 + g2 + g3);
        Self {
            vertices,
            bary_grads: [g0, g1, g2, g3],
            volume: det.abs() / 6.0,
            jac_inv,
        }
    }

    pub fn signed_volume(vertices: &[Vec3; 4]) -> f64 {
        (vertices[1] - vertices[0])
            .cross(&(vertices[2] - vertices[0]))
            .dot(&(vertices[3] - vertices[0]))
            / 6.0
    }

    pub fn barycentric(&self, x: &Vec3) -> [f64; 4] {
        let r = self.jac_inv * (x - self.vertices[0]);
        [1.0 - r[0] - r[1] - r[2], r[0], r[1], r[2]]
    }

    pub fn point(&self, bary: &[f64; 4]) -> Vec3 {
        self.vertices
            .iter()
            .zip(bary)
            .fold(Vec3::zeros(), |acc, (v, &b)| acc + v * b)
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        self.barycentric(x).iter().all(|&b| b >= -tol)
    }

    /// Circumradius over inradius; 3 for the regular tetrahedron.
    pub fn aspect_ratio(&self) -> f64 {
        let v = &self.vertices;
        let area = |a: &Vec3, b: &Vec3, c: &Vec3| 0.5 * (b - a).cross(&(c - a)).norm();
        let surface = area(&v[1], &v[2], &v[3])
            + area(&v[0], &v[2], &v[3])
            + area(&v[0], &v[1], &v[3])
            + area(&v[0], &v[1], &v[2]);
        let inradius = 3.0 * self.volume / surface;
        // circumcenter c solves 2 (v_i - v_0)·c = |v_i|² - |v_0|²
        let m = Mat3::from_rows(&[
            (2.0 * (v[1] - v[0])).transpose(),
            (2.0 * (v[2] - v[0])).transpose(),
            (2.0 * (v[3] - v[0])).transpose(),
        ]);
        let rhs = Vec3::new(
            v[1].norm_squared() - v[0].norm_squared(),
            v[2].norm_squared() - v[0].norm_squared(),
            v[3].norm_squared() - v[0].norm_squared(),
        );
        let center = m.lu().solve(&rhs).expect("degenerate tetrahedron");
        (center - v[0]).norm() / inradius
    }
}

/// Number of local Lagrange nodes of degree `k` on a tetrahedron.
pub fn local_dofs(k: usize) -> usize {
    match k {
        1 => 4,
        2 => 10,
        _ => panic!("unsupported degree {k}"),
    }
}

/// Reference-node barycentric coordinates of local node `i` (vertices first, then edge midpoints).
pub fn node_barycentric(k: usize, i: usize) -> [f64; 4] {
    let mut b = [0.0; 4];
    if i < 4 {
        b[i] = 1.0;
    } else {
        debug_assert!(k == 2 && i < 10);
        let (p, q) = TET_EDGES[i - 4];
        b[p] = 0.5;
        b[q] = 0.5;
    }
    b
}

/// Basis values at a point given by barycentric coordinates.
pub fn shape_values(k: usize, bary: &[f64; 4], out: &mut [f64]) {
    match k {
        1 => out[..4].copy_from_slice(bary),
        2 => {
            for i in 0..4 {
                out[i] = bary[i] * (2.0 * bary[i] - 1.0);
            }
            for (e, &(p, q)) in TET_EDGES.iter().enumerate() {
                out[4 + e] = 4.0 * bary[p] * bary[q];
            }
        }
        _ => panic!("unsupported degree {k}"),
    }
}

/// Cartesian basis gradients at a point.
pub fn shape_gradients(k: usize, bary: &[f64; 4], geo: &TetGeometry, out: &mut [Vec3]) {
    let g = &geo.bary_grads;
    match k {
        1 => out[..4].copy_from_slice(g),
        2 => {
            for i in 0..4 {
                out[i] = g[i] * (4.0 * bary[i] - 1.0);
            }
            for (e, &(p, q)) in TET_EDGES.iter().enumerate() {
                out[4 + e] = (g[p] * bary[q] + g[q] * bary[p]) * 4.0;
            }
        }
        _ => panic!("unsupported degree {k}"),
    }
}

/// Cartesian Hessian of a P2 function with local nodal values `coeffs` (constant per element).
pub fn p2_hessian(coeffs: &[f64], geo: &TetGeometry) -> Mat3 {
    let g = &geo.bary_grads;
    let mut h = Mat3::zeros();
    for i in 0..4 {
        h += g[i] * g[i].transpose() * (4.0 * coeffs[i]);
    }
    for (e, &(p, q)) in TET_EDGES.iter().enumerate() {
        h += (g[p] * g[q].transpose() + g[q] * g[p].transpose()) * (4.0 * coeffs[4 + e]);
    }
    h
}
