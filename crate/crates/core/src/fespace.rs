//! Outer Lagrange spaces on the active tetrahedra.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::element::{self, TetGeometry, TET_EDGES};
use crate::geometry::LevelSet;
use crate::mesh::{perturbed_vertex_values, ActiveSet, BackgroundMesh};
use crate::{Error, Mat3, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum NodeKey {
    Vertex(usize),
    Edge(usize, usize),
}

/// Which DOFs carry homogeneous Dirichlet constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirichletSpec {
    /// Closed surface, no constraints.
    #[default]
    None,
    /// Nodes on faces of ∂Ω that the surface intersects.
    CutBoundaryFaces,
}

/// Continuous P_k space on the active tets (`k ∈ {1, 2}`).
#[derive(Debug, Clone)]
pub struct TraceSpace {
    pub degree: usize,
    /// Node coordinates in global DOF order.
    pub nodes: Vec<Vec3>,
    /// Global DOF per local node, per active cell.
    pub cell_dofs: Vec<Vec<usize>>,
    pub constrained: Vec<bool>,
}

impl TraceSpace {
    pub fn build(
        mesh: &BackgroundMesh,
        active: &ActiveSet,
        degree: usize,
        dirichlet: DirichletSpec,
        phi: &dyn LevelSet,
    ) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        let node_key = |tet: &[usize; 4], i: usize| -> NodeKey {
            if i < 4 {
                NodeKey::Vertex(tet[i])
            } else {
                let (p, q) = TET_EDGES[i - 4];
                let (a, b) = (tet[p], tet[q]);
                NodeKey::Edge(a.min(b), a.max(b))
            }
        };
        let key_point = |key: &NodeKey| match *key {
            NodeKey::Vertex(v) => mesh.vertices[v],
            NodeKey::Edge(a, b) => (mesh.vertices[a] + mesh.vertices[b]) * 0.5,
        };

        let nloc = element::local_dofs(degree);
        let mut keys: Vec<(Vec3, NodeKey)> = Vec::new();
        let mut seen: HashSet<NodeKey> = HashSet::new();
        for &t in &active.tets {
            let tet = &mesh.tets[t];
            for i in 0..nloc {
                let key = node_key(tet, i);
                if seen.insert(key) {
                    keys.push((key_point(&key), key));
                }
            }
        }
        keys.sort_by(|(pa, ka), (pb, kb)| {
            lexicographic(pa, pb).then_with(|| ka.cmp(kb))
        });
        let index: HashMap<NodeKey, usize> = keys.iter().enumerate().map(|(i, (_, k))| (*k, i)).collect();
        let cell_dofs = active
            .tets
            .iter()
            .map(|&t| (0..nloc).map(|i| index[&node_key(&mesh.tets[t], i)]).collect())
            .collect();

        let constrained = match dirichlet {
            DirichletSpec::None => vec![false; keys.len()],
            DirichletSpec::CutBoundaryFaces => {
                let faces = cut_boundary_faces(mesh, phi);
                keys.iter()
                    .map(|(_, key)| {
                        let on_face = |axis: usize, side: usize| {
                            let target = if side == 0 { 0 } else { mesh.cells };
                            let check = |v: usize| mesh.vertex_lattice(v)[axis] == target;
                            match *key {
                                NodeKey::Vertex(v) => check(v),
                                NodeKey::Edge(a, b) => check(a) && check(b),
                            }
                        };
                        faces.iter().any(|&(axis, side)| on_face(axis, side))
                    })
                    .collect()
            }
        };
        Ok(Self {
            degree,
            nodes: keys.into_iter().map(|(p, _)| p).collect(),
            cell_dofs,
            constrained,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn local_dofs(&self) -> usize {
        element::local_dofs(self.degree)
    }

    pub fn num_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate(&self, f: impl Fn(&Vec3) -> f64) -> FeFunction<'_> {
        FeFunction {
            space: self,
            components: 1,
            coeffs: self.nodes.iter().map(f).collect(),
        }
    }

    /// Nodal interpolant of a vector function, interleaved layout.
    pub fn interpolate_vector(&self, f: impl Fn(&Vec3) -> Vec3) -> FeFunction<'_> {
        let coeffs = self
            .nodes
            .iter()
            .flat_map(|x| {
                let v = f(x);
                [v[0], v[1], v[2]]
            })
            .collect();
        FeFunction {
            space: self,
            components: 3,
            coeffs,
        }
    }

    pub fn function(&self, components: usize, coeffs: Vec<f64>) -> Result<FeFunction<'_>> {
        if coeffs.len() != components * self.ndofs() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                components * self.ndofs(),
                coeffs.len()
            )));
        }
        Ok(FeFunction {
            space: self,
            components,
            coeffs,
        })
    }
}

/// Boundary faces `(axis, side)` of the box on which φ changes sign.
fn cut_boundary_faces(mesh: &BackgroundMesh, phi: &dyn LevelSet) -> Vec<(usize, usize)> {
    let values = perturbed_vertex_values(mesh, phi);
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in 0..2 {
            let target = if side == 0 { 0 } else { mesh.cells };
            let (mut neg, mut pos) = (false, false);
            for (v, &val) in values.iter().enumerate() {
                if mesh.vertex_lattice(v)[axis] == target {
                    if val < 0.0 {
                        neg = true;
                    } else {
                        pos = true;
                    }
                }
            }
            if neg && pos {
                faces.push((axis, side));
            }
        }
    }
    faces
}

/// Coefficient vector of a scalar or (interleaved) vector function in a [`TraceSpace`].
#[derive(Debug, Clone)]
pub struct FeFunction<'a> {
    pub space: &'a TraceSpace,
    pub components: usize,
    pub coeffs: Vec<f64>,
}

impl FeFunction<'_> {
    fn local(&self, cell: usize, comp: usize) -> impl Iterator<Item = f64> + '_ {
        self.space.cell_dofs[cell]
            .iter()
            .map(move |&d| self.coeffs[d * self.components + comp])
    }

    /// Value of component `comp` at `x` in active cell `cell`.
    pub fn value(&self, cell: usize, geo: &TetGeometry, x: &Vec3, comp: usize) -> f64 {
        let mut phi = [0.0; 10];
        element::shape_values(self.space.degree, &geo.barycentric(x), &mut phi);
        self.local(cell, comp).zip(phi).map(|(c, p)| c * p).sum()
    }

    pub fn gradient(&self, cell: usize, geo: &TetGeometry, x: &Vec3, comp: usize) -> Vec3 {
        let mut grads = [Vec3::zeros(); 10];
        element::shape_gradients(self.space.degree, &geo.barycentric(x), geo, &mut grads);
        self.local(cell, comp)
            .zip(grads)
            .fold(Vec3::zeros(), |acc, (c, g)| acc + g * c)
    }

    pub fn vector_value(&self, cell: usize, geo: &TetGeometry, x: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| self.value(cell, geo, x, i))
    }

    /// Cartesian Jacobian; row `i` is `∇u_i`.
    pub fn jacobian(&self, cell: usize, geo: &TetGeometry, x: &Vec3) -> Mat3 {
        let rows: Vec<_> = (0..3).map(|i| self.gradient(cell, geo, x, i).transpose()).collect();
        Mat3::from_rows(&rows)
    }
}

/// Total order on points used for DOF numbering.
pub fn lexicographic(a: &Vec3, b: &Vec3) -> Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}
