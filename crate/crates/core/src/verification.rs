//! Manufactured solutions, discrete error norms, the MINRES driver and convergence studies.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{Basis, Discretization, DiscretizationOptions, SaddleSystem};
use crate::element;
use crate::fespace::DirichletSpec;
use crate::geometry::{projector, shape_operator_exact, ExtensionMap, LevelSet, NormalMode, Plane, Sphere};
use crate::io::DatTable;
use crate::linalg::{minres, BlockPreconditioner};
use crate::mesh::BackgroundMesh;
use crate::{Error, Mat3, Result, Vec3};

/// Default step of the central finite differences in the forcing oracle.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseKind {
    /// Unit sphere, `u* = P(−x₃², x₂, x₁)`.
    Sphere,
    /// Unit sphere, rigid rotation `u* = (x₂, −x₁, 0)`: zero strain.
    SphereKilling,
    /// Plane `4x₁ − x₃ = 13/3` in the sheared box, `u* = a sin(πx₂) sin(πx₃)`.
    Plane,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Sphere => "sphere",
            CaseKind::SphereKilling => "killing",
            CaseKind::Plane => "plane",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sphere" => Some(CaseKind::Sphere),
            "killing" => Some(CaseKind::SphereKilling),
            "plane" => Some(CaseKind::Plane),
            _ => None,
        }
    }
}

/// Tangential direction of the plane solution.
const PLANE_DIRECTION: [f64; 3] = [4.0 / 17.0, 1.0, 16.0 / 17.0];

/// Exact data of a verification problem: surface, solution, multiplier and forcing.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    /// Sphere center; sphere data are written in coordinates relative to it.
    pub center: Vec3,
    pub phi: Arc<dyn LevelSet>,
    pub extension: ExtensionMap,
    pub dirichlet: DirichletSpec,
    pub fd_step: f64,
}

impl ManufacturedCase {
    pub fn new(kind: CaseKind) -> Self {
        match kind {
            CaseKind::Sphere | CaseKind::SphereKilling => Self::shifted_sphere(kind, Vec3::zeros()),
            CaseKind::Plane => Self::with_level_set(kind, Arc::new(Plane::test_plane()), Vec3::zeros()),
        }
    }

    /// Sphere cases with a translated center (used for cut-position robustness checks).
    pub fn shifted_sphere(kind: CaseKind, center: Vec3) -> Self {
        assert!(kind != CaseKind::Plane, "only sphere cases can be shifted");
        Self::with_level_set(kind, Arc::new(Sphere::new(center, 1.0)), center)
    }

    fn with_level_set(kind: CaseKind, phi: Arc<dyn LevelSet>, center: Vec3) -> Self {
        Self {
            kind,
            center,
            extension: ExtensionMap::new(phi.clone()),
            phi,
            dirichlet: match kind {
                CaseKind::Plane => DirichletSpec::CutBoundaryFaces,
                _ => DirichletSpec::None,
            },
            fd_step: FD_STEP,
        }
    }

    pub fn background_mesh(&self, level: u32) -> Result<BackgroundMesh> {
        match self.kind {
            CaseKind::Plane => BackgroundMesh::plane(level),
            _ => BackgroundMesh::sphere(level),
        }
    }

    /// Exact unit normal at the closest point of `x`.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        let y = self.extension.closest_point(x);
        self.phi.gradient(&y).normalize()
    }

    /// `u*` at a point of Γ.
    pub fn solution(&self, y: &Vec3) -> Vec3 {
        match self.kind {
            CaseKind::Sphere => {
                let d = y - self.center;
                projector(&d.normalize()) * Vec3::new(-d[2] * d[2], d[1], d[0])
            }
            CaseKind::SphereKilling => {
                let d = y - self.center;
                Vec3::new(d[1], -d[0], 0.0)
            }
            CaseKind::Plane => {
                Vec3::from(PLANE_DIRECTION) * ((PI * y[1]).sin() * (PI * y[2]).sin())
            }
        }
    }

    /// Constant extension `u* ∘ p`.
    pub fn extended_solution(&self, x: &Vec3) -> Vec3 {
        self.solution(&self.extension.closest_point(x))
    }

    /// Jacobian (row i = ∇u_i) of `f` by central differences.
    fn jacobian(&self, f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3) -> Mat3 {
        let d = self.fd_step;
        let mut j = Mat3::zeros();
        for c in 0..3 {
            let mut e = Vec3::zeros();
            e[c] = d;
            j.set_column(c, &((f(&(x + e)) - f(&(x - e))) / (2.0 * d)));
        }
        j
    }

    /// Full Cartesian gradient of the extended solution.
    pub fn solution_jacobian(&self, x: &Vec3) -> Mat3 {
        self.jacobian(&|y| self.extended_solution(y), x)
    }

    /// Surface strain `E_s(u*) = ½ P (∇u + ∇uᵀ) P` at `x` (extended along normals).
    pub fn strain(&self, x: &Vec3) -> Mat3 {
        let j = self.solution_jacobian(x);
        let p = projector(&self.normal(x));
        p * (j + j.transpose()) * p * 0.5
    }

    /// `f = −P div_Γ E_s(u*) + u*` at the closest point of `x`, by nested central differences.
    pub fn forcing(&self, x: &Vec3) -> Vec3 {
        let y = self.extension.closest_point(x);
        let d = self.fd_step;
        let p = projector(&self.normal(&y));
        // (div_Γ E)_i = Σ_jk P_jk ∂_k E_ij
        let mut div = Vec3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = d;
            let dk = (self.strain(&(y + e)) - self.strain(&(y - e))) / (2.0 * d);
            for i in 0..3 {
                for j in 0..3 {
                    div[i] += p[(j, k)] * dk[(i, j)];
                }
            }
        }
        -(p * div) + self.solution(&y)
    }

    /// Closed-form forcing of the plane case, for cross-checking [`Self::forcing`].
    pub fn plane_forcing_closed_form(y: &Vec3) -> Vec3 {
        let a = Vec3::from(PLANE_DIRECTION);
        let n = Plane::test_plane().normal.normalize();
        let p = projector(&n);
        let (s2, c2) = (PI * y[1]).sin_cos();
        let (s3, c3) = (PI * y[2]).sin_cos();
        let s = s2 * s3;
        let pi2 = PI * PI;
        let hs = Mat3::new(0.0, 0.0, 0.0, 0.0, -pi2 * s, pi2 * c2 * c3, 0.0, pi2 * c2 * c3, -pi2 * s);
        let phs = p * hs;
        -(a * phs.trace() + phs * a) * 0.5 + a * s
    }

    /// `λ = −tr(E_s(u*) H)` from finite-difference strain and the analytic shape operator.
    pub fn exact_multiplier(&self, x: &Vec3) -> f64 {
        let y = self.extension.closest_point(x);
        let h = shape_operator_exact(self.phi.as_ref(), &y);
        -(self.strain(&y) * h).trace()
    }

    /// Multiplier used in error norms: hand-derived formulas where available.
    pub fn multiplier(&self, x: &Vec3) -> f64 {
        let y = self.extension.closest_point(x);
        match self.kind {
            CaseKind::Sphere => {
                // −div_Γ u* on the unit sphere
                let d = y - self.center;
                -(1.0 + 4.0 * d[0] * d[2] * d[2] - 3.0 * d[1] * d[1] - 3.0 * d[0] * d[2])
            }
            CaseKind::SphereKilling | CaseKind::Plane => 0.0,
        }
    }
}

/// Errors of one discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    /// `‖u* − u_h‖_U`.
    pub energy: f64,
    /// `‖u* − P_h u_h‖_{L²(Γ_h)}`.
    pub l2_tangential: f64,
    /// `‖u_h·n_h‖_{L²(Γ_h)}`.
    pub normal: f64,
    /// `‖λ − λ_h‖_M`.
    pub multiplier: f64,
}

/// Evaluates the four error norms with the exact data of `case`.
pub fn compute_errors(case: &ManufacturedCase, disc: &Discretization, u: &[f64], lambda: &[f64]) -> ErrorRow {
    let (k, l) = (disc.velocity.degree, disc.multiplier.degree);
    let nu = element::local_dofs(k);
    let nl = element::local_dofs(l);
    let rho = disc.params.rho;
    let local_u = |cell: usize, b: &Basis| -> (Vec3, Mat3) {
        let dofs = &disc.velocity.cell_dofs[cell];
        let mut val = Vec3::zeros();
        let mut jac = Mat3::zeros();
        for i in 0..nu {
            for a in 0..3 {
                let c = u[3 * dofs[i] + a];
                val[a] += c * b.vals[i];
                for j in 0..3 {
                    jac[(a, j)] += c * b.grads[i][j];
                }
            }
        }
        (val, jac)
    };
    let local_l = |cell: usize, b: &Basis| -> (f64, Vec3) {
        let dofs = &disc.multiplier.cell_dofs[cell];
        let mut val = 0.0;
        let mut grad = Vec3::zeros();
        for i in 0..nl {
            val += lambda[dofs[i]] * b.vals[i];
            grad += b.grads[i] * lambda[dofs[i]];
        }
        (val, grad)
    };

    let (mut energy, mut l2p, mut normal, mut mult) = (0.0, 0.0, 0.0, 0.0);
    for q in &disc.surface_points {
        let geo = &disc.geometries[q.cell];
        let bu = Basis::eval(k, &q.bary, geo);
        let bl = Basis::eval(l, &q.bary, geo);
        let (uh, juh) = local_u(q.cell, &bu);
        let (lh, _) = local_l(q.cell, &bl);
        let ue = case.extended_solution(&q.x);
        let e = ue - uh;
        let je = case.solution_jacobian(&q.x) - juh;
        let p = projector(&q.normal);
        let es = p * (je + je.transpose()) * p * 0.5;
        energy += q.weight * (es.norm_squared() + e.norm_squared());
        l2p += q.weight * (ue - p * uh).norm_squared();
        normal += q.weight * uh.dot(&q.normal).powi(2);
        mult += q.weight * (case.multiplier(&q.x) - lh).powi(2);
    }
    let d = case.fd_step;
    for q in &disc.volume_points {
        let geo = &disc.geometries[q.cell];
        let bu = Basis::eval(k, &q.bary, geo);
        let bl = Basis::eval(l, &q.bary, geo);
        let (_, juh) = local_u(q.cell, &bu);
        let (_, glh) = local_l(q.cell, &bl);
        let n = q.normal;
        // directional derivatives of the extended exact data along n_h
        let due = (case.extended_solution(&(q.x + n * d)) - case.extended_solution(&(q.x - n * d))) / (2.0 * d);
        let dle = (case.multiplier(&(q.x + n * d)) - case.multiplier(&(q.x - n * d))) / (2.0 * d);
        energy += rho * q.weight * (due - juh * n).norm_squared();
        mult += rho * q.weight * (dle - glh.dot(&n)).powi(2);
    }
    ErrorRow {
        energy: energy.sqrt(),
        l2_tangential: l2p.sqrt(),
        normal: normal.sqrt(),
        multiplier: mult.sqrt(),
    }
}

/// Tolerances and limits of the outer and inner iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// MINRES reduction of the preconditioned residual.
    pub outer_rtol: f64,
    /// Reduction of the inner SSOR-PCG solves in the preconditioner.
    pub inner_rtol: f64,
    pub max_iterations: usize,
    /// Block size of the SSOR sweeps on `A`: 1 is pointwise symmetric Gauss–Seidel,
    /// 3 relaxes the interleaved velocity components of a node together. Nodal blocks
    /// commute with the projection onto a constant normal, so on flat surfaces the
    /// inner solves never leak a normal component into a tangential iterate.
    pub a_block: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            outer_rtol: 1e-6,
            inner_rtol: 1e-4,
            max_iterations: 2000,
            a_block: 3,
        }
    }
}

/// Iteration counts of one saddle point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverStats {
    /// Outer MINRES iterations `N`.
    pub iterations: usize,
    /// Average inner iterations per preconditioner application.
    pub inner_a: f64,
    pub inner_s: f64,
    pub relative_residual: f64,
    pub history: Vec<f64>,
    pub seconds: f64,
}

/// Velocity coefficients, multiplier coefficients and statistics.
pub type Solution = (Vec<f64>, Vec<f64>, SolverStats);

/// Block-preconditioned MINRES on the assembled system from a zero initial guess.
pub fn solve(system: &SaddleSystem, settings: &SolverSettings) -> Result<Solution> {
    let start = Instant::now();
    let op = system.operator();
    let mut precond = BlockPreconditioner::new(&system.a, &system.s_m, settings.a_block, settings.inner_rtol);
    let out = minres(&op, &system.rhs(), &mut precond, settings.outer_rtol, settings.max_iterations)?;
    let n = system.velocity_dim();
    let counters = precond.counters;
    let mut x = out.x;
    let lambda = system.expand_multiplier(&x.split_off(n));
    Ok((
        x,
        lambda,
        SolverStats {
            iterations: out.iterations,
            inner_a: counters.average_a(),
            inner_s: counters.average_s(),
            relative_residual: *out.history.last().unwrap_or(&0.0),
            history: out.history,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Parameters of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub case: CaseKind,
    pub velocity_degree: usize,
    pub multiplier_degree: usize,
    pub alpha: f64,
    pub c: f64,
    pub levels: Vec<u32>,
    pub normal_mode: NormalMode,
    pub solver: SolverSettings,
    pub parallel: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::Sphere,
            velocity_degree: 1,
            multiplier_degree: 1,
            alpha: 0.0,
            c: 1.0,
            levels: (1..=4).collect(),
            normal_mode: NormalMode::Interpolated,
            solver: SolverSettings::default(),
            parallel: false,
            output_dir: None,
        }
    }
}

impl StudyConfig {
    pub fn options(&self, dirichlet: DirichletSpec) -> DiscretizationOptions {
        DiscretizationOptions {
            velocity_degree: self.velocity_degree,
            multiplier_degree: self.multiplier_degree,
            normal_mode: self.normal_mode,
            dirichlet,
            alpha: self.alpha,
            c: self.c,
            parallel: self.parallel,
        }
    }

    /// `h` for α = 0, `hinv` for α = 2, `1` for α = 1, `alpha<α>` otherwise.
    pub fn rho_tag(&self) -> String {
        match self.alpha {
            a if a == 0.0 => "h".into(),
            a if a == 1.0 => "1".into(),
            a if a == 2.0 => "hinv".into(),
            a => format!("alpha{a}"),
        }
    }

    /// `<case>P<k>-<rho>`, e.g. `sphereP1-h`.
    pub fn stem(&self) -> String {
        format!("{}P{}-{}", self.case.name(), self.velocity_degree, self.rho_tag())
    }
}

/// Results of one level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: u32,
    pub h: f64,
    pub velocity_dofs: usize,
    pub multiplier_dofs: usize,
    pub errors: ErrorRow,
    pub stats: SolverStats,
}

/// Case, discretization and assembled system of one level, forced by the manufactured `f`.
pub fn assemble_level(config: &StudyConfig, level: u32) -> Result<(ManufacturedCase, Discretization, SaddleSystem)> {
    let case = ManufacturedCase::new(config.case);
    let mesh = case.background_mesh(level)?;
    let disc = Discretization::new(case.phi.clone(), mesh, config.options(case.dirichlet))?;
    let system = SaddleSystem::assemble(&disc, &|x| case.forcing(x));
    Ok((case, disc, system))
}

/// Everything produced by one level, for callers that post-process the discrete solution.
pub struct LevelSolution {
    pub result: LevelResult,
    pub disc: Discretization,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Assembles, solves and measures one level.
pub fn solve_level(config: &StudyConfig, level: u32) -> Result<LevelSolution> {
    let (case, disc, system) = assemble_level(config, level)?;
    let (u, lambda, stats) = solve(&system, &config.solver)?;
    let errors = compute_errors(&case, &disc, &u, &lambda);
    let result = LevelResult {
        level,
        h: disc.h(),
        velocity_dofs: system.velocity_dim(),
        multiplier_dofs: system.multiplier_dim(),
        errors,
        stats,
    };
    Ok(LevelSolution { result, disc, u, lambda })
}

pub fn run_level(config: &StudyConfig, level: u32) -> Result<LevelResult> {
    solve_level(config, level).map(|s| s.result)
}

/// Outcome of a study: successful rows in level order plus per-level failures.
#[derive(Debug, Default)]
pub struct StudyResult {
    pub rows: Vec<LevelResult>,
    pub failures: Vec<(u32, Error)>,
}

impl StudyResult {
    pub fn error_table(&self) -> DatTable {
        let mut t = DatTable::new(&["level", "U", "L2P", "u_N", "M"]);
        for r in &self.rows {
            let e = r.errors;
            t.push(vec![r.level as f64, e.energy, e.l2_tangential, e.normal, e.multiplier]);
        }
        t
    }

    pub fn iteration_table(&self) -> DatTable {
        let mut t = DatTable::new(&["level", "N_A", "N_S", "N"]);
        for r in &self.rows {
            t.push(vec![r.level as f64, r.stats.inner_a, r.stats.inner_s, r.stats.iterations as f64]);
        }
        t
    }

    /// Column of the error table by name (`U`, `L2P`, `u_N`, `M`).
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.error_table().column(name).unwrap_or_default()
    }
}

/// Runs every configured level; failures are recorded and the remaining levels still run.
/// Tables are written to `output_dir` when set.
pub fn run_convergence_study(config: &StudyConfig) -> Result<StudyResult> {
    run_convergence_study_with(config, |_| Ok(()))
}

/// Like [`run_convergence_study`], calling `visit` on each solved level before it is dropped.
pub fn run_convergence_study_with(
    config: &StudyConfig,
    mut visit: impl FnMut(&LevelSolution) -> Result<()>,
) -> Result<StudyResult> {
    let mut result = StudyResult::default();
    for &level in &config.levels {
        match solve_level(config, level) {
            Ok(s) => {
                visit(&s)?;
                result.rows.push(s.result);
            }
            Err(e) => result.failures.push((level, e)),
        }
        // Tables are rewritten after every level so a later failure or abort keeps earlier rows.
        if let Some(dir) = &config.output_dir {
            write_tables(config, &result, dir)?;
        }
    }
    Ok(result)
}

fn write_tables(config: &StudyConfig, result: &StudyResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = config.stem();
    result.error_table().write_file(&dir.join(format!("{stem}.dat")))?;
    result.iteration_table().write_file(&dir.join(format!("{stem}-iters.dat")))
}

/// `log₂(e_{ℓ−1}/e_ℓ)` between consecutive entries.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    #[test]
    fn solutions_are_tangential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [CaseKind::Sphere, CaseKind::SphereKilling] {
            let case = ManufacturedCase::new(kind);
            for _ in 0..50 {
                let y = random_unit(&mut rng);
                assert!(case.solution(&y).dot(&y).abs() < 1e-15);
            }
        }
        let case = ManufacturedCase::new(CaseKind::Plane);
        let n = case.normal(&Vec3::zeros());
        for _ in 0..50 {
            let x = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(case.extended_solution(&x).dot(&n).abs() < 1e-15);
        }
    }

    #[test]
    fn plane_forcing_matches_closed_form() {
        let case = ManufacturedCase::new(CaseKind::Plane);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let y = case.extension.closest_point(&x);
            let fd = case.forcing(&y);
            let exact = ManufacturedCase::plane_forcing_closed_form(&y);
            assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0), "{fd} vs {exact}");
        }
    }

    #[test]
    fn forcing_is_tangential() {
        let case = ManufacturedCase::new(CaseKind::Sphere);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let y = random_unit(&mut rng);
            assert!(case.forcing(&y).dot(&y).abs() < 1e-6);
        }
    }

    #[test]
    fn sphere_multiplier_oracles_agree() {
        let case = ManufacturedCase::new(CaseKind::Sphere);
        let north = Vec3::new(0.0, 0.0, 1.0);
        assert!((case.exact_multiplier(&north) - case.multiplier(&north)).abs() < 1e-6);
        assert!((case.multiplier(&north) + 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let y = random_unit(&mut rng);
            assert!((case.exact_multiplier(&y) - case.multiplier(&y)).abs() < 1e-6);
        }
    }

    #[test]
    fn shifted_multiplier_oracles_agree() {
        let case = ManufacturedCase::shifted_sphere(CaseKind::Sphere, Vec3::new(0.05, -0.02, 0.03));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let y = case.center + random_unit(&mut rng);
            assert!((case.exact_multiplier(&y) - case.multiplier(&y)).abs() < 1e-6);
        }
    }

    #[test]
    fn killing_field_has_zero_strain() {
        let case = ManufacturedCase::new(CaseKind::SphereKilling);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let y = random_unit(&mut rng);
            assert!((case.forcing(&y) - case.solution(&y)).amax() < 1e-5);
            assert!(case.exact_multiplier(&y).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_discrete_solution_gives_exact_norm() {
        let case = ManufacturedCase::new(CaseKind::Sphere);
        let mesh = case.background_mesh(1).unwrap();
        let disc = Discretization::new(case.phi.clone(), mesh, DiscretizationOptions::default()).unwrap();
        let u = vec![0.0; 3 * disc.velocity.ndofs()];
        let l = vec![0.0; disc.multiplier.ndofs()];
        let row = compute_errors(&case, &disc, &u, &l);
        let exact: f64 = disc
            .surface_points
            .iter()
            .map(|q| q.weight * case.extended_solution(&q.x).norm_squared())
            .sum();
        assert!((row.l2_tangential - exact.sqrt()).abs() < 1e-14);
        assert_eq!(row.normal, 0.0);
    }

    #[test]
    fn orders_of_geometric_sequence() {
        let o = convergence_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
    }

    #[test]
    fn stems_follow_naming_scheme() {
        let mut c = StudyConfig::default();
        assert_eq!(c.stem(), "sphereP1-h");
        c.alpha = 2.0;
        assert_eq!(c.stem(), "sphereP1-hinv");
        c.case = CaseKind::Plane;
        c.velocity_degree = 2;
        c.alpha = 0.0;
        assert_eq!(c.stem(), "planeP2-h");
    }
}
