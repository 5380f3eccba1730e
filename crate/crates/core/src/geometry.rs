//! Level sets, the piecewise planar surface Γ_h, normal fields and closest-point maps.

use std::io::Write;
use std::sync::Arc;

use crate::element::{self, TetGeometry};
use crate::mesh::{ActiveSet, BackgroundMesh};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSetKind {
    Sphere,
    Plane,
    Custom,
}

/// Implicit surface description `Γ = {φ = 0}` with `∇φ ≠ 0` near Γ.
pub trait LevelSet: Send + Sync {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Mat3;
    /// Closest point on the exact surface.
    fn closest_point(&self, x: &Vec3) -> Vec3;
    fn kind(&self) -> LevelSetKind {
        LevelSetKind::Custom
    }
}

/// `φ(x) = ‖x − c‖ − r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn unit() -> Self {
        Self::new(Vec3::zeros(), 1.0)
    }
}

impl LevelSet for Sphere {
    fn value(&self, x: &Vec3) -> f64 {
        (x - self.center).norm() - self.radius
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        (x - self.center).normalize()
    }

    fn hessian(&self, x: &Vec3) -> Mat3 {
        let d = x - self.center;
        let r = d.norm();
        let n = d / r;
        (Mat3::identity() - n * n.transpose()) / r
    }

    fn closest_point(&self, x: &Vec3) -> Vec3 {
        self.center + (x - self.center).normalize() * self.radius
    }

    fn kind(&self) -> LevelSetKind {
        LevelSetKind::Sphere
    }
}

/// `φ(x) = a·x + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `φ(x) = −x₃ + 4x₁ − 13/3`.
    pub fn test_plane() -> Self {
        Self::new(Vec3::new(4.0, 0.0, -1.0), -13.0 / 3.0)
    }
}

impl LevelSet for Plane {
    fn value(&self, x: &Vec3) -> f64 {
        self.normal.dot(x) + self.offset
    }

    fn gradient(&self, _x: &Vec3) -> Vec3 {
        self.normal
    }

    fn hessian(&self, _x: &Vec3) -> Mat3 {
        Mat3::zeros()
    }

    fn closest_point(&self, x: &Vec3) -> Vec3 {
        x - self.normal * (self.value(x) / self.normal.norm_squared())
    }

    fn kind(&self) -> LevelSetKind {
        LevelSetKind::Plane
    }
}

pub fn projector(n: &Vec3) -> Mat3 {
    Mat3::identity() - n * n.transpose()
}

/// `P Hφ P / ‖∇φ‖`: the Jacobian of `∇φ/‖∇φ‖` restricted to the tangent plane.
fn tangential_shape_operator(grad: &Vec3, hess: &Mat3) -> Mat3 {
    let norm = grad.norm();
    let p = projector(&(grad / norm));
    let h = p * hess * p / norm;
    (h + h.transpose()) * 0.5
}

/// Constant extension of surface functions along the closest-point map.
#[derive(Clone)]
pub struct ExtensionMap {
    phi: Arc<dyn LevelSet>,
}

impl ExtensionMap {
    pub fn new(phi: Arc<dyn LevelSet>) -> Self {
        Self { phi }
    }

    pub fn closest_point(&self, x: &Vec3) -> Vec3 {
        self.phi.closest_point(x)
    }

    pub fn extend<'a, T>(&'a self, f: impl Fn(&Vec3) -> T + 'a) -> impl Fn(&Vec3) -> T + 'a {
        move |x| f(&self.phi.closest_point(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalMode {
    /// `∇φ/‖∇φ‖` of the exact level set.
    Exact,
    /// `∇φ_h/‖∇φ_h‖` with `φ_h` the piecewise quadratic interpolant of φ.
    Interpolated,
}

/// Normal field on the narrow band, evaluated per active tetrahedron.
#[derive(Clone)]
pub struct NormalField {
    pub mode: NormalMode,
    phi: Arc<dyn LevelSet>,
    /// P2 nodal values of φ per active tet (interpolated mode only).
    local_phi: Vec<[f64; 10]>,
    geometries: Vec<TetGeometry>,
}

impl NormalField {
    pub fn new(
        mode: NormalMode,
        phi: Arc<dyn LevelSet>,
        mesh: &BackgroundMesh,
        active: &ActiveSet,
    ) -> Self {
        let geometries: Vec<TetGeometry> = active.tets.iter().map(|&t| mesh.tet_geometry(t)).collect();
        let local_phi = match mode {
            NormalMode::Exact => Vec::new(),
            NormalMode::Interpolated => geometries
                .iter()
                .map(|geo| {
                    let mut vals = [0.0; 10];
                    for (i, v) in vals.iter_mut().enumerate() {
                        *v = phi.value(&geo.point(&element::node_barycentric(2, i)));
                    }
                    vals
                })
                .collect(),
        };
        Self {
            mode,
            phi,
            local_phi,
            geometries,
        }
    }

    /// Gradient of φ (exact) or φ_h (interpolated) at `x` inside active tet number `cell`.
    pub fn level_set_gradient(&self, cell: usize, x: &Vec3) -> Vec3 {
        match self.mode {
            NormalMode::Exact => self.phi.gradient(x),
            NormalMode::Interpolated => {
                let geo = &self.geometries[cell];
                let bary = geo.barycentric(x);
                let mut grads = [Vec3::zeros(); 10];
                element::shape_gradients(2, &bary, geo, &mut grads);
                grads
                    .iter()
                    .zip(&self.local_phi[cell])
                    .fold(Vec3::zeros(), |acc, (g, &c)| acc + g * c)
            }
        }
    }

    /// Unit normal at `x` inside active tet number `cell`.
    pub fn normal(&self, cell: usize, x: &Vec3) -> Vec3 {
        self.level_set_gradient(cell, x).normalize()
    }

    pub fn projector(&self, cell: usize, x: &Vec3) -> Mat3 {
        projector(&self.normal(cell, x))
    }

    /// Symmetric shape operator with `H n = 0`.
    pub fn shape_operator(&self, cell: usize, x: &Vec3) -> Mat3 {
        match self.mode {
            NormalMode::Exact => shape_operator_exact(self.phi.as_ref(), x),
            NormalMode::Interpolated => {
                let geo = &self.geometries[cell];
                let hess = element::p2_hessian(&self.local_phi[cell], geo);
                tangential_shape_operator(&self.level_set_gradient(cell, x), &hess)
            }
        }
    }
}

/// Shape operator from the analytic derivatives of φ.
pub fn shape_operator_exact(phi: &dyn LevelSet, x: &Vec3) -> Mat3 {
    tangential_shape_operator(&phi.gradient(x), &phi.hessian(x))
}

/// Planar triangle of Γ_h inside one active tetrahedron.
#[derive(Debug, Clone)]
pub struct SurfaceTriangle {
    pub vertices: [Vec3; 3],
    /// Background tet index.
    pub tet: usize,
    /// Position of the tet in the active list.
    pub cell: usize,
    pub area: f64,
    /// Unit normal oriented along `∇(I₁φ)`.
    pub normal: Vec3,
}

impl SurfaceTriangle {
    pub fn centroid(&self) -> Vec3 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }

    pub fn point(&self, bary: &[f64; 3]) -> Vec3 {
        self.vertices[0] * bary[0] + self.vertices[1] * bary[1] + self.vertices[2] * bary[2]
    }
}

/// Zero level of the piecewise linear interpolant of φ.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub triangles: Vec<SurfaceTriangle>,
    /// Triangle indices per active cell.
    pub by_cell: Vec<Vec<usize>>,
}

impl SurfaceMesh {
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// ASCII VTK polydata; each point-data entry supplies one value per triangle vertex.
    pub fn write_vtk<W: Write>(
        &self,
        out: &mut W,
        point_vectors: &[(&str, Vec<Vec3>)],
        point_scalars: &[(&str, Vec<f64>)],
    ) -> std::io::Result<()> {
        let npts = 3 * self.triangles.len();
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "discrete surface")?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET POLYDATA")?;
        writeln!(out, "POINTS {npts} double")?;
        for tri in &self.triangles {
            for v in &tri.vertices {
                writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
            }
        }
        writeln!(out, "POLYGONS {} {}", self.triangles.len(), 4 * self.triangles.len())?;
        for i in 0..self.triangles.len() {
            writeln!(out, "3 {} {} {}", 3 * i, 3 * i + 1, 3 * i + 2)?;
        }
        if point_vectors.is_empty() && point_scalars.is_empty() {
            return Ok(());
        }
        writeln!(out, "POINT_DATA {npts}")?;
        for (name, data) in point_vectors {
            writeln!(out, "VECTORS {name} double")?;
            for v in data {
                writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
            }
        }
        for (name, data) in point_scalars {
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in data {
                writeln!(out, "{v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Marching-tetrahedra pieces of one tet given its vertex values (no value may be NaN).
///
/// Returns 0, 1 or 2 triangles as triples of cut points, each cut point identified by its
/// local edge `(a, b)` with `φ_a < 0 ≤ φ_b`.
pub fn cut_tetrahedron(points: &[Vec3; 4], values: &[f64; 4], keys: &[usize; 4]) -> Vec<[Vec3; 3]> {
    let neg: Vec<usize> = (0..4).filter(|&i| values[i] < 0.0).collect();
    let pos: Vec<usize> = (0..4).filter(|&i| values[i] >= 0.0).collect();
    let cut = |a: usize, b: usize| {
        let t = values[a] / (values[a] - values[b]);
        points[a] + (points[b] - points[a]) * t
    };
    match (neg.len(), pos.len()) {
        (1, 3) => vec![[cut(neg[0], pos[0]), cut(neg[0], pos[1]), cut(neg[0], pos[2])]],
        (3, 1) => vec![[cut(neg[0], pos[0]), cut(neg[1], pos[0]), cut(neg[2], pos[0])]],
        (2, 2) => {
            let (a, b) = (neg[0], neg[1]);
            let (c, d) = (pos[0], pos[1]);
            // cyclic order of the planar quad
            let mut quad = [(a, c), (a, d), (b, d), (b, c)];
            let edge_key = |(p, q): (usize, usize)| {
                let (x, y) = (keys[p], keys[q]);
                (x.min(y), x.max(y))
            };
            let start = (0..4).min_by_key(|&i| edge_key(quad[i])).unwrap_or(0);
            quad.rotate_left(start);
            let q = quad.map(|(p, r)| cut(p, r));
            vec![[q[0], q[1], q[2]], [q[0], q[2], q[3]]]
        }
        _ => Vec::new(),
    }
}

pub fn extract_surface(mesh: &BackgroundMesh, active: &ActiveSet) -> SurfaceMesh {
    let mut triangles = Vec::new();
    let mut by_cell = vec![Vec::new(); active.len()];
    for (cell, &t) in active.tets.iter().enumerate() {
        let ids = mesh.tets[t];
        let points = ids.map(|v| mesh.vertices[v]);
        let values = ids.map(|v| active.vertex_phi[v]);
        let geo = TetGeometry::new(points);
        let grad = geo
            .bary_grads
            .iter()
            .zip(&values)
            .fold(Vec3::zeros(), |acc, (g, &v)| acc + g * v);
        for mut tri in cut_tetrahedron(&points, &values, &ids) {
            let mut cross = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
            if cross.dot(&grad) < 0.0 {
                tri.swap(1, 2);
                cross = -cross;
            }
            let norm = cross.norm();
            if norm == 0.0 {
                continue;
            }
            by_cell[cell].push(triangles.len());
            triangles.push(SurfaceTriangle {
                vertices: tri,
                tet: t,
                cell,
                area: 0.5 * norm,
                normal: cross / norm,
            });
        }
    }
    SurfaceMesh { triangles, by_cell }
}
