//! Quadrature data and assembly of the saddle point blocks `A`, `B`, `M_u`, `M_λ`, `S_M`
//! and the load vector.
//!
//! Surface integrals run over the planar pieces of Γ_h, volume integrals over the active
//! tetrahedra. Vector unknowns are interleaved: component `a` of node `i` is `3 i + a`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::element::{self, TetGeometry};
use crate::fespace::{DirichletSpec, TraceSpace};
use crate::geometry::{extract_surface, projector, LevelSet, NormalField, NormalMode, SurfaceMesh};
use crate::linalg::{self, ConditionEstimate, CsrMatrix, PreconditionMode, SaddleOperator, TripletBuffer};
use crate::mesh::{select_active, ActiveSet, BackgroundMesh};
use crate::quadrature::{tet_rule_for_degree, triangle_degree4};
use crate::{Error, Result, Vec3};

/// Weights of the volume normal-derivative terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationParams {
    /// Weight in the velocity form `A_h`.
    pub rho: f64,
    /// Weight in the coupling form `b`.
    pub rho_tilde: f64,
}

impl StabilizationParams {
    pub fn new(rho: f64, rho_tilde: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("rho_tilde", rho_tilde)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidStabilization(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { rho, rho_tilde })
    }

    /// `ρ = ρ̃ = c h^(1−α)` with `α ∈ [0, 2]`.
    pub fn scaled(alpha: f64, c: f64, h: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&alpha) {
            return Err(Error::InvalidStabilization(format!("alpha must lie in [0, 2], got {alpha}")));
        }
        let rho = c * h.powf(1.0 - alpha);
        Self::new(rho, rho)
    }
}

/// Options fixing a discretization on a given background mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationOptions {
    pub velocity_degree: usize,
    pub multiplier_degree: usize,
    pub normal_mode: NormalMode,
    pub dirichlet: DirichletSpec,
    /// Exponent α in `ρ = c h^(1−α)`.
    pub alpha: f64,
    pub c: f64,
    /// Assemble element contributions on the rayon pool (results are bit-identical).
    pub parallel: bool,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        Self {
            velocity_degree: 1,
            multiplier_degree: 1,
            normal_mode: NormalMode::Interpolated,
            dirichlet: DirichletSpec::None,
            alpha: 0.0,
            c: 1.0,
            parallel: false,
        }
    }
}

/// A quadrature point inside active cell `cell` with the normal `n_h` evaluated there.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub cell: usize,
    pub x: Vec3,
    /// Physical weight (area or volume element included).
    pub weight: f64,
    pub bary: [f64; 4],
    pub normal: Vec3,
}

/// Everything the forms need at one refinement level.
pub struct Discretization {
    pub phi: Arc<dyn LevelSet>,
    pub mesh: BackgroundMesh,
    pub active: ActiveSet,
    pub surface: SurfaceMesh,
    pub normals: NormalField,
    pub velocity: TraceSpace,
    pub multiplier: TraceSpace,
    pub params: StabilizationParams,
    pub options: DiscretizationOptions,
    /// Geometry of every active cell.
    pub geometries: Vec<TetGeometry>,
    /// Surface quadrature points, grouped by cell.
    pub surface_points: Vec<QuadPoint>,
    pub volume_points: Vec<QuadPoint>,
    surface_ranges: Vec<(usize, usize)>,
    volume_ranges: Vec<(usize, usize)>,
}

impl Discretization {
    pub fn new(phi: Arc<dyn LevelSet>, mesh: BackgroundMesh, options: DiscretizationOptions) -> Result<Self> {
        let (k, l) = (options.velocity_degree, options.multiplier_degree);
        for d in [k, l] {
            if !(1..=2).contains(&d) {
                return Err(Error::UnsupportedDegree(d));
            }
        }
        if l > k {
            return Err(Error::DegreeMismatch {
                velocity: k,
                multiplier: l,
            });
        }
        let params = StabilizationParams::scaled(options.alpha, options.c, mesh.h)?;
        let active = select_active(&mesh, phi.as_ref())?;
        let surface = extract_surface(&mesh, &active);
        let normals = NormalField::new(options.normal_mode, phi.clone(), &mesh, &active);
        let velocity = TraceSpace::build(&mesh, &active, k, options.dirichlet, phi.as_ref())?;
        let multiplier = TraceSpace::build(&mesh, &active, l, options.dirichlet, phi.as_ref())?;
        let geometries: Vec<TetGeometry> = active.tets.iter().map(|&t| mesh.tet_geometry(t)).collect();

        let tri_rule = triangle_degree4();
        let mut surface_points = Vec::with_capacity(surface.len() * tri_rule.len());
        let mut surface_ranges = Vec::with_capacity(active.len());
        for (cell, tris) in surface.by_cell.iter().enumerate() {
            let start = surface_points.len();
            for &ti in tris {
                let tri = &surface.triangles[ti];
                for (p, w) in tri_rule.iter() {
                    let x = tri.point(p);
                    surface_points.push(QuadPoint {
                        cell,
                        x,
                        weight: w * tri.area,
                        bary: geometries[cell].barycentric(&x),
                        normal: normals.normal(cell, &x),
                    });
                }
            }
            surface_ranges.push((start, surface_points.len()));
        }

        let tet_rule = tet_rule_for_degree(k);
        let mut volume_points = Vec::with_capacity(active.len() * tet_rule.len());
        let mut volume_ranges = Vec::with_capacity(active.len());
        for (cell, geo) in geometries.iter().enumerate() {
            let start = volume_points.len();
            for (p, w) in tet_rule.iter() {
                let x = geo.point(p);
                volume_points.push(QuadPoint {
                    cell,
                    x,
                    weight: w * geo.volume,
                    bary: *p,
                    normal: normals.normal(cell, &x),
                });
            }
            volume_ranges.push((start, volume_points.len()));
        }

        Ok(Self {
            phi,
            mesh,
            active,
            surface,
            normals,
            velocity,
            multiplier,
            params,
            options,
            geometries,
            surface_points,
            volume_points,
            surface_ranges,
            volume_ranges,
        })
    }

    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    pub fn ncells(&self) -> usize {
        self.active.len()
    }

    pub fn cell_surface_points(&self, cell: usize) -> &[QuadPoint] {
        let (a, b) = self.surface_ranges[cell];
        &self.surface_points[a..b]
    }

    pub fn cell_volume_points(&self, cell: usize) -> &[QuadPoint] {
        let (a, b) = self.volume_ranges[cell];
        &self.volume_points[a..b]
    }

    /// Constraint mask of the interleaved velocity unknowns.
    pub fn velocity_mask(&self) -> Vec<bool> {
        self.velocity.constrained.iter().flat_map(|&c| [c; 3]).collect()
    }

    /// Runs `kernel` on every active cell and compresses the collected triplets.
    ///
    /// Cells are visited in increasing order in both modes, so the triplet stream and hence
    /// the compressed matrix is the same with and without the thread pool.
    fn assemble_cells<F>(&self, nrows: usize, ncols: usize, kernel: F) -> CsrMatrix
    where
        F: Fn(usize, &mut TripletBuffer) + Sync,
    {
        let n = self.ncells();
        if self.options.parallel {
            let chunk = 256;
            let parts: Vec<TripletBuffer> = (0..n.div_ceil(chunk))
                .into_par_iter()
                .map(|c| {
                    let mut buf = TripletBuffer::new(nrows, ncols);
                    for cell in c * chunk..((c + 1) * chunk).min(n) {
                        kernel(cell, &mut buf);
                    }
                    buf
                })
                .collect();
            let mut all = TripletBuffer::new(nrows, ncols);
            for p in parts {
                all.append(p);
            }
            CsrMatrix::from_triplets(&all)
        } else {
            let mut buf = TripletBuffer::new(nrows, ncols);
            for cell in 0..n {
                kernel(cell, &mut buf);
            }
            CsrMatrix::from_triplets(&buf)
        }
    }
}

/// Basis values and gradients of one space at one point.
pub(crate) struct Basis {
    pub vals: [f64; 10],
    pub grads: [Vec3; 10],
}

impl Basis {
    pub fn eval(degree: usize, bary: &[f64; 4], geo: &TetGeometry) -> Self {
        let mut vals = [0.0; 10];
        let mut grads = [Vec3::zeros(); 10];
        element::shape_values(degree, bary, &mut vals);
        element::shape_gradients(degree, bary, geo, &mut grads);
        Self { vals, grads }
    }
}

/// Dense local matrix scattered into the global buffer after mirroring its upper triangle.
fn scatter_symmetric(local: &mut [f64], size: usize, global: impl Fn(usize) -> usize, buf: &mut TripletBuffer) {
    for r in 0..size {
        for c in 0..r {
            local[r * size + c] = local[c * size + r];
        }
    }
    for r in 0..size {
        for c in 0..size {
            let v = local[r * size + c];
            if v != 0.0 {
                buf.push(global(r), global(c), v);
            }
        }
    }
}

fn velocity_surface_kernel(disc: &Discretization, cell: usize, rho: f64, local: &mut [f64]) {
    let k = disc.velocity.degree;
    let geo = &disc.geometries[cell];
    let nloc = element::local_dofs(k);
    let size = 3 * nloc;
    for q in disc.cell_surface_points(cell) {
        let basis = Basis::eval(k, &q.bary, geo);
        let p = projector(&q.normal);
        let s: Vec<Vec3> = basis.grads[..nloc].iter().map(|g| p * g).collect();
        for i in 0..nloc {
            for j in i..nloc {
                let ss = s[i].dot(&s[j]);
                let vv = basis.vals[i] * basis.vals[j];
                for a in 0..3 {
                    let b0 = if i == j { a } else { 0 };
                    for b in b0..3 {
                        // E_s(φ_i e_a) : E_s(φ_j e_b) + φ_i φ_j δ_ab
                        let mut v = 0.5 * p[(a, b)] * ss + 0.5 * s[j][a] * s[i][b];
                        if a == b {
                            v += vv;
                        }
                        local[(3 * i + a) * size + 3 * j + b] += q.weight * v;
                    }
                }
            }
        }
    }
    if rho == 0.0 {
        return;
    }
    for q in disc.cell_volume_points(cell) {
        let basis = Basis::eval(k, &q.bary, geo);
        let gn: Vec<f64> = basis.grads[..nloc].iter().map(|g| g.dot(&q.normal)).collect();
        for i in 0..nloc {
            for j in i..nloc {
                let v = rho * q.weight * gn[i] * gn[j];
                for a in 0..3 {
                    local[(3 * i + a) * size + 3 * j + a] += v;
                }
            }
        }
    }
}

/// `A_h(u, v) = ∫_Γh E_s(u):E_s(v) + u·v + ρ ∫_band (∇u n)·(∇v n)` with weight `rho`.
fn assemble_a_with(disc: &Discretization, rho: f64) -> CsrMatrix {
    let n = 3 * disc.velocity.ndofs();
    let size = 3 * disc.velocity.local_dofs();
    disc.assemble_cells(n, n, |cell, buf| {
        let mut local = vec![0.0; size * size];
        velocity_surface_kernel(disc, cell, rho, &mut local);
        let dofs = &disc.velocity.cell_dofs[cell];
        scatter_symmetric(&mut local, size, |r| 3 * dofs[r / 3] + r % 3, buf);
    })
}

/// Velocity matrix `A` (without Dirichlet elimination).
pub fn assemble_a(disc: &Discretization) -> CsrMatrix {
    assemble_a_with(disc, disc.params.rho)
}

/// Coupling matrix `B` (rows: multiplier DOFs, columns: interleaved velocity DOFs) realizing
/// `b(u, μ) = ∫_Γh (u·n) μ + ρ̃ ∫_band (nᵀ∇u n)(n·∇μ)`.
pub fn assemble_b(disc: &Discretization) -> CsrMatrix {
    let (k, l) = (disc.velocity.degree, disc.multiplier.degree);
    let nu = element::local_dofs(k);
    let nl = element::local_dofs(l);
    let rho_t = disc.params.rho_tilde;
    disc.assemble_cells(disc.multiplier.ndofs(), 3 * disc.velocity.ndofs(), |cell, buf| {
        let geo = &disc.geometries[cell];
        let mut local = vec![0.0; nl * 3 * nu];
        for q in disc.cell_surface_points(cell) {
            let bu = Basis::eval(k, &q.bary, geo);
            let bl = Basis::eval(l, &q.bary, geo);
            for i in 0..nl {
                for j in 0..nu {
                    let v = q.weight * bl.vals[i] * bu.vals[j];
                    for b in 0..3 {
                        local[i * 3 * nu + 3 * j + b] += v * q.normal[b];
                    }
                }
            }
        }
        for q in disc.cell_volume_points(cell) {
            let bu = Basis::eval(k, &q.bary, geo);
            let bl = Basis::eval(l, &q.bary, geo);
            for i in 0..nl {
                let mn = bl.grads[i].dot(&q.normal);
                for j in 0..nu {
                    let v = rho_t * q.weight * mn * bu.grads[j].dot(&q.normal);
                    for b in 0..3 {
                        local[i * 3 * nu + 3 * j + b] += v * q.normal[b];
                    }
                }
            }
        }
        let ldofs = &disc.multiplier.cell_dofs[cell];
        let udofs = &disc.velocity.cell_dofs[cell];
        for i in 0..nl {
            for c in 0..3 * nu {
                let v = local[i * 3 * nu + c];
                if v != 0.0 {
                    buf.push(ldofs[i], 3 * udofs[c / 3] + c % 3, v);
                }
            }
        }
    })
}

/// Scalar matrix over the multiplier space:
/// `surface ∫_Γh λμ + normal ∫_band (∇λ·n)(∇μ·n) + volume ∫_band λμ`.
fn assemble_scalar(disc: &Discretization, surface: f64, normal: f64, volume: f64) -> CsrMatrix {
    let l = disc.multiplier.degree;
    let nl = element::local_dofs(l);
    let m = disc.multiplier.ndofs();
    disc.assemble_cells(m, m, |cell, buf| {
        let geo = &disc.geometries[cell];
        let mut local = vec![0.0; nl * nl];
        if surface != 0.0 {
            for q in disc.cell_surface_points(cell) {
                let b = Basis::eval(l, &q.bary, geo);
                for i in 0..nl {
                    for j in i..nl {
                        local[i * nl + j] += surface * q.weight * b.vals[i] * b.vals[j];
                    }
                }
            }
        }
        if normal != 0.0 || volume != 0.0 {
            for q in disc.cell_volume_points(cell) {
                let b = Basis::eval(l, &q.bary, geo);
                for i in 0..nl {
                    let gi = b.grads[i].dot(&q.normal);
                    for j in i..nl {
                        let gj = b.grads[j].dot(&q.normal);
                        local[i * nl + j] +=
                            q.weight * (normal * gi * gj + volume * b.vals[i] * b.vals[j]);
                    }
                }
            }
        }
        let dofs = &disc.multiplier.cell_dofs[cell];
        scatter_symmetric(&mut local, nl, |r| dofs[r], buf);
    })
}

/// `⟨S_M λ, μ⟩ = (λ, μ)_{L²(Γh)} + ρ (∇λ·n, ∇μ·n)_{L²(band)}`.
pub fn assemble_sm(disc: &Discretization) -> CsrMatrix {
    assemble_scalar(disc, 1.0, disc.params.rho, 0.0)
}

/// Volume mass matrix of the multiplier space over the band.
pub fn assemble_mass_multiplier(disc: &Discretization) -> CsrMatrix {
    assemble_scalar(disc, 0.0, 0.0, 1.0)
}

/// Volume mass matrix of the vector velocity space over the band (interleaved).
pub fn assemble_mass_velocity(disc: &Discretization) -> CsrMatrix {
    let k = disc.velocity.degree;
    let nu = element::local_dofs(k);
    let n = 3 * disc.velocity.ndofs();
    disc.assemble_cells(n, n, |cell, buf| {
        let geo = &disc.geometries[cell];
        let size = 3 * nu;
        let mut local = vec![0.0; size * size];
        for q in disc.cell_volume_points(cell) {
            let b = Basis::eval(k, &q.bary, geo);
            for i in 0..nu {
                for j in i..nu {
                    let v = q.weight * b.vals[i] * b.vals[j];
                    for a in 0..3 {
                        local[(3 * i + a) * size + 3 * j + a] += v;
                    }
                }
            }
        }
        let dofs = &disc.velocity.cell_dofs[cell];
        scatter_symmetric(&mut local, size, |r| 3 * dofs[r / 3] + r % 3, buf);
    })
}

/// Load vector `∫_Γh g·v` for every interleaved velocity basis function; `g` is evaluated
/// at the quadrature points of Γ_h.
pub fn assemble_rhs(disc: &Discretization, g: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Vec<f64> {
    let k = disc.velocity.degree;
    let nu = element::local_dofs(k);
    let mut rhs = vec![0.0; 3 * disc.velocity.ndofs()];
    let values: Vec<Vec3> = if disc.options.parallel {
        disc.surface_points.par_iter().map(|q| g(&q.x)).collect()
    } else {
        disc.surface_points.iter().map(|q| g(&q.x)).collect()
    };
    for cell in 0..disc.ncells() {
        let geo = &disc.geometries[cell];
        let (start, end) = disc.surface_ranges[cell];
        let dofs = &disc.velocity.cell_dofs[cell];
        for (q, gv) in disc.surface_points[start..end].iter().zip(&values[start..end]) {
            let b = Basis::eval(k, &q.bary, geo);
            for i in 0..nu {
                for a in 0..3 {
                    rhs[3 * dofs[i] + a] += q.weight * b.vals[i] * gv[a];
                }
            }
        }
    }
    rhs
}

/// All blocks of the discrete saddle point problem with Dirichlet constraints eliminated.
///
/// Constrained velocity unknowns keep a unit diagonal in `A`. Multiplier nodes on the
/// Dirichlet boundary are dropped: the boundary velocity is fixed there, so those
/// multipliers would only add a kernel to `Bᵀ`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub mass_u: CsrMatrix,
    pub mass_lambda: CsrMatrix,
    pub s_m: CsrMatrix,
    /// Velocity block of the right-hand side; the multiplier block is zero.
    pub rhs_u: Vec<f64>,
    /// Constrained interleaved velocity unknowns.
    pub constrained: Vec<bool>,
    /// Multiplier DOF of every retained multiplier unknown, increasing.
    pub multiplier_dofs: Vec<usize>,
    multiplier_ndofs: usize,
}

impl SaddleSystem {
    pub fn assemble(disc: &Discretization, g: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Self {
        let mask = disc.velocity_mask();
        let mut rhs_u = assemble_rhs(disc, g);
        for (r, &c) in rhs_u.iter_mut().zip(&mask) {
            if c {
                *r = 0.0;
            }
        }
        let keep: Vec<usize> = (0..disc.multiplier.ndofs())
            .filter(|&i| !disc.multiplier.constrained[i])
            .collect();
        let all_u: Vec<usize> = (0..mask.len()).collect();
        let (a, b, mass_u) = if mask.iter().any(|&c| c) {
            let no_rows = vec![false; disc.multiplier.ndofs()];
            (
                assemble_a(disc).constrain_symmetric(&mask),
                assemble_b(disc).constrain(&no_rows, &mask, false),
                assemble_mass_velocity(disc).constrain_symmetric(&mask),
            )
        } else {
            (assemble_a(disc), assemble_b(disc), assemble_mass_velocity(disc))
        };
        let reduce = keep.len() < disc.multiplier.ndofs();
        let (b, mass_lambda, s_m) = if reduce {
            (
                b.submatrix(&keep, &all_u),
                assemble_mass_multiplier(disc).submatrix(&keep, &keep),
                assemble_sm(disc).submatrix(&keep, &keep),
            )
        } else {
            (b, assemble_mass_multiplier(disc), assemble_sm(disc))
        };
        Self {
            a,
            b,
            mass_u,
            mass_lambda,
            s_m,
            rhs_u,
            constrained: mask,
            multiplier_dofs: keep,
            multiplier_ndofs: disc.multiplier.ndofs(),
        }
    }

    /// Multiplier coefficients on the full multiplier space, zero at dropped nodes.
    pub fn expand_multiplier(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.multiplier_ndofs];
        for (&dof, &v) in self.multiplier_dofs.iter().zip(reduced) {
            full[dof] = v;
        }
        full
    }

    /// Number of interleaved velocity unknowns `3n`.
    pub fn velocity_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn multiplier_dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.velocity_dim() + self.multiplier_dim()
    }

    pub fn operator(&self) -> SaddleOperator<'_> {
        SaddleOperator::new(&self.a, &self.b)
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.rhs_u.clone();
        r.resize(self.dim(), 0.0);
        r
    }

    /// Spectral condition number of the system matrix, optionally preconditioned by
    /// `diag(M_u, M_λ)`.
    pub fn estimate_condition(&self, mode: PreconditionMode) -> Result<ConditionEstimate> {
        linalg::estimate_condition(&self.operator(), mode, &self.mass_u, &self.mass_lambda)
    }

    /// Generalized eigenvalues of `(B A⁻¹ Bᵀ, S_M)`.
    pub fn schur_spectrum(&self) -> Result<Vec<f64>> {
        linalg::schur_spectrum(&self.a, &self.b, &self.s_m)
    }

    /// Dense `[[A, Bᵀ], [B, 0]]`.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.velocity_dim();
        let mut d = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        d.view_mut((0, 0), (n, n)).copy_from(&self.a.to_dense());
        let b = self.b.to_dense();
        d.view_mut((n, 0), (b.nrows(), n)).copy_from(&b);
        d.view_mut((0, n), (n, b.nrows())).copy_from(&b.transpose());
        d
    }

    /// Writes every block as `<name>.mtx` into `dir`.
    pub fn write_matrix_market(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [
            ("A", &self.a),
            ("B", &self.b),
            ("Mu", &self.mass_u),
            ("Mlambda", &self.mass_lambda),
            ("SM", &self.s_m),
        ] {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{name}.mtx")))?);
            m.write_matrix_market(&mut f)?;
            f.flush()?;
        }
        Ok(())
    }
}
