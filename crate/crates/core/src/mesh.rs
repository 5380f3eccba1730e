//! Structured background tetrahedral mesh of a parallelepiped and its active (cut) set.

use std::collections::HashMap;
use std::io::Write;

use crate::element::TetGeometry;
use crate::geometry::LevelSet;
use crate::{Error, Mat3, Result, Vec3};

/// Parallelepiped `origin + s e1 + t e2 + u e3`, `(s, t, u) ∈ [0,1]³`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub origin: Vec3,
    pub spans: [Vec3; 3],
}

impl BoundingBox {
    pub fn new(origin: Vec3, spans: [Vec3; 3]) -> Result<Self> {
        let b = Self { origin, spans };
        let scale = spans.iter().map(|s| s.norm()).product::<f64>();
        if !(scale > 0.0) || b.signed_volume().abs() <= 1e-12 * scale {
            return Err(Error::DegenerateBox);
        }
        Ok(b)
    }

    /// The cube `[-5/3, 5/3]³` enclosing the unit sphere.
    pub fn sphere() -> Self {
        let side = 10.0 / 3.0;
        Self {
            origin: Vec3::repeat(-5.0 / 3.0),
            spans: [Vec3::x() * side, Vec3::y() * side, Vec3::z() * side],
        }
    }

    /// Sheared box whose faces cut by the plane `4x₁ − x₃ = 13/3` are perpendicular to it.
    pub fn plane() -> Self {
        Self {
            origin: Vec3::new(-2.0, -2.0, -65.0 / 48.0),
            spans: [
                Vec3::new(4.0, 0.0, -1.0),
                Vec3::new(0.0, 4.0, 0.0),
                Vec3::new(0.0, 0.0, 4.25),
            ],
        }
    }

    pub fn span_matrix(&self) -> Mat3 {
        Mat3::from_columns(&self.spans)
    }

    pub fn signed_volume(&self) -> f64 {
        self.span_matrix().determinant()
    }

    pub fn volume(&self) -> f64 {
        self.signed_volume().abs()
    }

    /// Point at parametric coordinates `(s, t, u)`.
    pub fn point(&self, param: &Vec3) -> Vec3 {
        self.origin + self.span_matrix() * param
    }

    /// Parametric coordinates of a physical point.
    pub fn param(&self, x: &Vec3) -> Vec3 {
        self.span_matrix()
            .try_inverse()
            .expect("box validated at construction")
            * (x - self.origin)
    }
}

/// Conforming Kuhn triangulation of a [`BoundingBox`] into `6 n³` tetrahedra.
#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    pub bbox: BoundingBox,
    pub level: u32,
    /// Sub-cells per axis.
    pub cells: usize,
    /// Characteristic mesh size.
    pub h: f64,
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[usize; 4]>,
}

// Kuhn paths: tet p walks from corner (0,0,0) to (1,1,1) along the axes of PERMS[p].
const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl BackgroundMesh {
    /// Cells per axis at `level` for the sphere box, `2^(ℓ+1)`.
    pub fn sphere_cells(level: u32) -> usize {
        1 << (level + 1)
    }

    /// Cells per axis at `level` for the plane box, `2^(ℓ+2)`.
    pub fn plane_cells(level: u32) -> usize {
        1 << (level + 2)
    }

    /// Builds the mesh with `cells` sub-cells per axis.
    pub fn build(bbox: &BoundingBox, level: u32, cells: usize) -> Result<Self> {
        if level < 1 {
            return Err(Error::InvalidLevel(level));
        }
        let bbox = BoundingBox::new(bbox.origin, bbox.spans)?;
        let n = cells;
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    let param = Vec3::new(i as f64, j as f64, k as f64) / n as f64;
                    vertices.push(bbox.point(&param));
                }
            }
        }
        let vid = |i: usize, j: usize, k: usize| i + np * (j + np * k);

        // the orientation of each Kuhn tet is the same in every cell of an affine box
        let flips: Vec<bool> = PERMS
            .iter()
            .map(|perm| {
                let path = kuhn_path(perm);
                let pts = path.map(|c| bbox.point(&Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)));
                TetGeometry::signed_volume(&pts) < 0.0
            })
            .collect();

        let mut tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for (perm, &flip) in PERMS.iter().zip(&flips) {
                        let mut tet = kuhn_path(perm).map(|c| vid(i + c[0], j + c[1], k + c[2]));
                        if flip {
                            tet.swap(2, 3);
                        }
                        tets.push(tet);
                    }
                }
            }
        }
        let min_span = bbox.spans.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min);
        Ok(Self {
            h: min_span / n as f64,
            bbox,
            level,
            cells: n,
            vertices,
            tets,
        })
    }

    pub fn sphere(level: u32) -> Result<Self> {
        Self::build(&BoundingBox::sphere(), level, Self::sphere_cells(level))
    }

    pub fn plane(level: u32) -> Result<Self> {
        Self::build(&BoundingBox::plane(), level, Self::plane_cells(level))
    }

    pub fn tet_vertices(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_geometry(&self, t: usize) -> TetGeometry {
        TetGeometry::new(self.tet_vertices(t))
    }

    /// Integer lattice coordinates of a vertex.
    pub fn vertex_lattice(&self, v: usize) -> [usize; 3] {
        let np = self.cells + 1;
        [v % np, (v / np) % np, v / (np * np)]
    }

    /// Finds a tetrahedron containing `x`, if `x` lies in the box.
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        let p = self.bbox.param(x) * self.cells as f64;
        let tol = 1e-10 * self.cells as f64;
        if p.iter().any(|&c| c < -tol || c > self.cells as f64 + tol) {
            return None;
        }
        let cell = p.map(|c| (c.floor().max(0.0) as usize).min(self.cells - 1));
        let n = self.cells;
        let base = 6 * (cell[0] + n * (cell[1] + n * cell[2]));
        (base..base + 6).find(|&t| self.tet_geometry(t).contains(x, 1e-12))
    }

    /// Writes the tetrahedra (all, or a subset) as a legacy ASCII VTK unstructured grid.
    pub fn write_vtk<W: Write>(&self, out: &mut W, subset: Option<&[usize]>) -> std::io::Result<()> {
        let all: Vec<usize>;
        let cells = match subset {
            Some(s) => s,
            None => {
                all = (0..self.tets.len()).collect();
                &all
            }
        };
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "background mesh level {}", self.level)?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
        }
        writeln!(out, "CELLS {} {}", cells.len(), 5 * cells.len())?;
        for &t in cells {
            let [a, b, c, d] = self.tets[t];
            writeln!(out, "4 {a} {b} {c} {d}")?;
        }
        writeln!(out, "CELL_TYPES {}", cells.len())?;
        for _ in cells {
            writeln!(out, "10")?;
        }
        Ok(())
    }
}

fn kuhn_path(perm: &[usize; 3]) -> [[usize; 3]; 4] {
    let mut path = [[0usize; 3]; 4];
    for s in 0..3 {
        path[s + 1] = path[s];
        path[s + 1][perm[s]] = 1;
    }
    path
}

/// Tetrahedra whose (perturbed) vertex signs of the level set are not all equal.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    /// Background tet indices, increasing.
    pub tets: Vec<usize>,
    /// Level set values at all mesh vertices after sign perturbation.
    pub vertex_phi: Vec<f64>,
    position: HashMap<usize, usize>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    /// Position of background tet `t` in the active list.
    pub fn position(&self, t: usize) -> Option<usize> {
        self.position.get(&t).copied()
    }

    /// Volume of the narrow band Ω_h^Γ.
    pub fn band_volume(&self, mesh: &BackgroundMesh) -> f64 {
        self.tets.iter().map(|&t| mesh.tet_geometry(t).volume).sum()
    }
}

/// Values with `|φ| < 1e-12 h` are snapped to zero and counted as positive.
pub fn perturbed_vertex_values(mesh: &BackgroundMesh, phi: &dyn LevelSet) -> Vec<f64> {
    let tol = 1e-12 * mesh.h;
    mesh.vertices
        .iter()
        .map(|x| {
            let v = phi.value(x);
            if v.abs() < tol {
                0.0
            } else {
                v
            }
        })
        .collect()
}

pub fn select_active(mesh: &BackgroundMesh, phi: &dyn LevelSet) -> Result<ActiveSet> {
    let vertex_phi = perturbed_vertex_values(mesh, phi);
    let tets: Vec<usize> = mesh
        .tets
        .iter()
        .enumerate()
        .filter(|(_, tet)| {
            let neg = tet.iter().filter(|&&v| vertex_phi[v] < 0.0).count();
            neg > 0 && neg < 4
        })
        .map(|(t, _)| t)
        .collect();
    if tets.is_empty() {
        return Err(Error::SurfaceNotFound);
    }
    let position = tets.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    Ok(ActiveSet {
        tets,
        vertex_phi,
        position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Plane, Sphere};
    use std::collections::HashMap;

    #[test]
    fn sphere_level1_counts() {
        let mesh = BackgroundMesh::sphere(1).unwrap();
        assert_eq!(mesh.cells, 4);
        assert_eq!(mesh.tets.len(), 384);
        assert!((mesh.h - (10.0 / 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn plane_level1_counts() {
        let mesh = BackgroundMesh::plane(1).unwrap();
        assert_eq!(mesh.cells, 8);
        assert_eq!(mesh.tets.len(), 3072);
        assert!((mesh.h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn volumes_positive_and_conserved() {
        for (bbox, level) in [(BoundingBox::sphere(), 2), (BoundingBox::plane(), 1)] {
            let mesh = BackgroundMesh::build(&bbox, level, 5).unwrap();
            let mut total = 0.0;
            for t in 0..mesh.tets.len() {
                let v = TetGeometry::signed_volume(&mesh.tet_vertices(t));
                assert!(v > 0.0);
                total += v;
            }
            assert!((total - bbox.volume()).abs() < 1e-12 * bbox.volume());
        }
    }

    #[test]
    fn conforming_faces() {
        let mesh = BackgroundMesh::build(&BoundingBox::plane(), 1, 3).unwrap();
        let mut faces: HashMap<[usize; 3], usize> = HashMap::new();
        for tet in &mesh.tets {
            for skip in 0..4 {
                let mut f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| tet[i]).collect();
                f.sort_unstable();
                *faces.entry([f[0], f[1], f[2]]).or_default() += 1;
            }
        }
        let on_boundary = |f: &[usize; 3]| {
            (0..3).any(|axis| {
                let c: Vec<usize> = f.iter().map(|&v| mesh.vertex_lattice(v)[axis]).collect();
                c.iter().all(|&x| x == 0) || c.iter().all(|&x| x == mesh.cells)
            })
        };
        for (f, count) in &faces {
            if on_boundary(f) {
                assert_eq!(*count, 1);
            } else {
                assert_eq!(*count, 2, "interior face {f:?}");
            }
        }
    }

    #[test]
    fn degenerate_box_rejected() {
        let r = BoundingBox::new(Vec3::zeros(), [Vec3::x(), Vec3::y(), Vec3::x() + Vec3::y()]);
        assert!(matches!(r, Err(Error::DegenerateBox)));
    }

    #[test]
    fn level_zero_rejected() {
        assert!(matches!(
            BackgroundMesh::build(&BoundingBox::sphere(), 0, 2),
            Err(Error::InvalidLevel(0))
        ));
    }

    #[test]
    fn sphere_active_set_near_surface() {
        let mesh = BackgroundMesh::sphere(1).unwrap();
        let active = select_active(&mesh, &Sphere::unit()).unwrap();
        assert!(!active.is_empty());
        let bound = 1.0 + mesh.h * 3.0_f64.sqrt();
        for &t in &active.tets {
            assert!(mesh.tet_vertices(t).iter().any(|x| x.norm() <= bound));
        }
    }

    #[test]
    fn constant_sign_is_an_error() {
        let mesh = BackgroundMesh::sphere(1).unwrap();
        let far = Sphere::new(Vec3::new(10.0, 0.0, 0.0), 1.0);
        assert!(matches!(select_active(&mesh, &far), Err(Error::SurfaceNotFound)));
    }

    #[test]
    fn plane_active_count_scales_like_h_minus_two() {
        let counts: Vec<usize> = (1..=4)
            .map(|l| {
                let mesh = BackgroundMesh::plane(l).unwrap();
                select_active(&mesh, &Plane::test_plane()).unwrap().len()
            })
            .collect();
        for w in counts.windows(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} from {counts:?}");
        }
    }

    #[test]
    fn shape_regularity_is_level_independent() {
        let worst = |level| {
            let mesh = BackgroundMesh::plane(level).unwrap();
            (0..mesh.tets.len())
                .map(|t| mesh.tet_geometry(t).aspect_ratio())
                .fold(0.0_f64, f64::max)
        };
        let bound = worst(1) * (1.0 + 1e-9);
        for level in 2..=3 {
            assert!(worst(level) <= bound);
        }
    }

    #[test]
    fn locate_finds_containing_tet() {
        let mesh = BackgroundMesh::plane(1).unwrap();
        let x = mesh.bbox.point(&Vec3::new(0.31, 0.77, 0.52));
        let t = mesh.locate(&x).unwrap();
        assert!(mesh.tet_geometry(t).contains(&x, 1e-12));
        assert!(mesh.locate(&Vec3::new(100.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn vtk_dump_has_all_cells() {
        let mesh = BackgroundMesh::sphere(1).unwrap();
        let mut buf = Vec::new();
        mesh.write_vtk(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("CELLS 384 1920"));
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
    }
}
