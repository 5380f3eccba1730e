//! Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero when any fails.
//!
//! Runs the full convergence studies (sphere levels 1–5 for two stabilization scalings,
//! quadratic plane levels 1–4), so expect a few minutes.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracefem::assembly::{assemble_b, Discretization, DiscretizationOptions, SaddleSystem};
use tracefem::fespace::FeFunction;
use tracefem::linalg::{minres, norm, CsrMatrix, IdentityPreconditioner, PreconditionMode};
use tracefem::quadrature::{tet_rule_for_degree, triangle_degree4};
use tracefem::verification::{
    compute_errors, convergence_orders, run_convergence_study, CaseKind, ManufacturedCase, StudyConfig, StudyResult,
};
use tracefem::Vec3;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(checks: &[(bool, String)], notes: Vec<String>) -> Self {
        let pass = checks.iter().all(|c| c.0);
        let detail = checks
            .iter()
            .map(|(ok, d)| if *ok { d.clone() } else { format!("{d} [violated]") })
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail, notes }
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn study(case: CaseKind, k: usize, alpha: f64, levels: std::ops::RangeInclusive<u32>) -> (StudyResult, f64) {
    let cfg = StudyConfig {
        case,
        velocity_degree: k,
        multiplier_degree: 1,
        alpha,
        levels: levels.collect(),
        parallel: true,
        ..Default::default()
    };
    let start = Instant::now();
    let result = run_convergence_study(&cfg).expect("study runs");
    for (level, e) in &result.failures {
        eprintln!("    level {level} failed: {e}");
    }
    (result, start.elapsed().as_secs_f64())
}

fn table_notes(r: &StudyResult) -> Vec<String> {
    r.rows
        .iter()
        .map(|row| {
            let e = row.errors;
            format!(
                "level {}: U {:.4e}  L2P {:.4e}  u_N {:.4e}  M {:.4e}  |  N {}  N_A {:.1}  N_S {:.1}",
                row.level,
                e.energy,
                e.l2_tangential,
                e.normal,
                e.multiplier,
                row.stats.iterations,
                row.stats.inner_a,
                row.stats.inner_s
            )
        })
        .collect()
}

fn last_order(r: &StudyResult, col: &str) -> f64 {
    *convergence_orders(&r.column(col)).last().unwrap_or(&f64::NAN)
}

fn complete(r: &StudyResult, levels: usize) -> (bool, String) {
    (r.failures.is_empty() && r.rows.len() == levels, format!("{} of {levels} levels solved", r.rows.len()))
}

fn sphere_h_orders(r: &StudyResult, seconds: f64) -> Outcome {
    let (u, l2p, un, m) = (last_order(r, "U"), last_order(r, "L2P"), last_order(r, "u_N"), last_order(r, "M"));
    let mut notes = table_notes(r);
    notes.push(format!("wall time {seconds:.1} s"));
    Outcome::new(
        &[
            complete(r, 5),
            (within(u, 0.85, 1.3), format!("U order {u:.3} in [0.85, 1.3]")),
            (within(l2p, 1.7, 2.3), format!("L2P order {l2p:.3} in [1.7, 2.3]")),
            (within(un, 1.7, 2.3), format!("u_N order {un:.3} in [1.7, 2.3]")),
            (within(m, 1.2, 1.8), format!("M order {m:.3} in [1.2, 1.8]")),
            (seconds < 900.0, format!("{seconds:.0} s < 900 s")),
        ],
        notes,
    )
}

fn sphere_hinv(r: &StudyResult, reference: &StudyResult) -> Outcome {
    let (u, l2p, m) = (last_order(r, "U"), last_order(r, "L2P"), last_order(r, "M"));
    let mut smaller = Vec::new();
    for col in ["U", "L2P", "u_N", "M"] {
        for ((a, b), row) in r.column(col).iter().zip(reference.column(col)).zip(&r.rows) {
            if a <= &b {
                smaller.push(format!("{col} at level {}: {a:.4e} <= {b:.4e}", row.level));
            }
        }
    }
    let mut notes = table_notes(r);
    notes.extend(smaller.iter().map(|s| format!("not larger than rho = h: {s}")));
    Outcome::new(
        &[
            complete(r, 5),
            (within(u, 0.85, 1.3), format!("U order {u:.3} in [0.85, 1.3]")),
            (within(l2p, 1.7, 2.3), format!("L2P order {l2p:.3} in [1.7, 2.3]")),
            (within(m, 0.8, 1.3), format!("M order {m:.3} in [0.8, 1.3]")),
            (
                smaller.is_empty(),
                format!("all errors above the rho = h run ({} exceptions)", smaller.len()),
            ),
        ],
        notes,
    )
}

fn plane(r: &StudyResult, seconds: f64) -> Outcome {
    let (u, l2p) = (last_order(r, "U"), last_order(r, "L2P"));
    let un = r.column("u_N").iter().fold(0.0_f64, |a, &b| a.max(b));
    let m = r.column("M").iter().fold(0.0_f64, |a, &b| a.max(b));
    // System scale: the U-norm of the exact solution, i.e. the error of the zero vector.
    let case = ManufacturedCase::new(CaseKind::Plane);
    let cfg = StudyConfig {
        case: CaseKind::Plane,
        velocity_degree: 2,
        ..Default::default()
    };
    let disc = Discretization::new(case.phi.clone(), case.background_mesh(1).unwrap(), cfg.options(case.dirichlet)).unwrap();
    let scale = compute_errors(
        &case,
        &disc,
        &vec![0.0; 3 * disc.velocity.ndofs()],
        &vec![0.0; disc.multiplier.ndofs()],
    )
    .energy;
    let bound = cfg.solver.outer_rtol * scale;
    let mut notes = table_notes(r);
    notes.push(format!("wall time {seconds:.1} s, solution scale {scale:.4e}"));
    Outcome::new(
        &[
            complete(r, 4),
            (within(u, 1.8, 2.3), format!("U order {u:.3} in [1.8, 2.3]")),
            (within(l2p, 2.7, 3.3), format!("L2P order {l2p:.3} in [2.7, 3.3]")),
            (un < 1e-10, format!("max u_N {un:.2e} < 1e-10")),
            (m < bound, format!("max |lambda_h|_M {m:.2e} < {bound:.2e}")),
        ],
        notes,
    )
}

fn factors(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] / w[0]).collect()
}

fn table_1(r: &StudyResult) -> Outcome {
    let n: Vec<f64> = r.rows.iter().map(|x| x.stats.iterations as f64).collect();
    let na: Vec<f64> = r.rows.iter().map(|x| x.stats.inner_a).collect();
    let ns: Vec<f64> = r.rows.iter().map(|x| x.stats.inner_s).collect();
    let from2 = &n[1.min(n.len())..];
    let in_range = from2.iter().all(|&x| within(x, 15.0, 60.0));
    let flat = from2.windows(2).all(|w| w[1] <= w[0] + 3.0);
    let fa = factors(&na);
    Outcome::new(
        &[
            complete(r, 5),
            (in_range, format!("N at levels 2-5 {from2:?} in [15, 60]")),
            (flat, "N non-increasing from level 2 within 3".into()),
            (ns.iter().all(|&x| x <= 15.0), format!("N_S {} <= 15", fmt_list(&ns))),
            (fa.iter().all(|&f| within(f, 1.6, 2.6)), format!("N_A factors {} in [1.6, 2.6]", fmt_list(&fa))),
        ],
        vec![format!("N_A {}", fmt_list(&na))],
    )
}

fn table_2(r: &StudyResult) -> Outcome {
    let ns: Vec<f64> = r.rows.iter().map(|x| x.stats.inner_s).collect();
    let fs = factors(&ns);
    let n: Vec<usize> = r.rows.iter().map(|x| x.stats.iterations).collect();
    Outcome::new(
        &[
            complete(r, 5),
            (fs.iter().all(|&f| within(f, 1.5, 2.6)), format!("N_S factors {} in [1.5, 2.6]", fmt_list(&fs))),
        ],
        vec![format!("N_S {}", fmt_list(&ns)), format!("N {n:?}")],
    )
}

fn shifted(center: Vec3, level: u32) -> (Discretization, SaddleSystem) {
    let case = ManufacturedCase::shifted_sphere(CaseKind::Sphere, center);
    let cfg = StudyConfig::default();
    let disc = Discretization::new(case.phi.clone(), case.background_mesh(level).unwrap(), cfg.options(case.dirichlet)).unwrap();
    let sys = SaddleSystem::assemble(&disc, &|_| Vec3::zeros());
    (disc, sys)
}

fn random_shifts(seed: u64, count: usize) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Vec3::from_fn(|_, _| rng.gen_range(-0.15..0.15)))
        .collect()
}

fn norm_equivalence() -> Outcome {
    // (h‖v‖²_Γ + h²‖n·∇v‖²_band) / ‖v‖²_band = h·vᵀS_M v / vᵀM_λ v when ρ = h.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut notes = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for level in 1..=3 {
        let (mut llo, mut lhi) = (f64::INFINITY, 0.0_f64);
        for center in random_shifts(100 + level as u64, 5) {
            let (disc, sys) = shifted(center, level);
            let h = disc.h();
            for _ in 0..50 {
                let v: Vec<f64> = (0..sys.multiplier_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ratio = h * sys.s_m.bilinear(&v, &v) / sys.mass_lambda.bilinear(&v, &v);
                llo = llo.min(ratio);
                lhi = lhi.max(ratio);
            }
        }
        notes.push(format!("level {level}: ratios in [{llo:.4}, {lhi:.4}]"));
        lo = lo.min(llo);
        hi = hi.max(lhi);
    }
    Outcome::new(
        &[(hi / lo < 50.0, format!("all ratios in [{lo:.4}, {hi:.4}], max/min {:.2} < 50", hi / lo))],
        notes,
    )
}

fn conditioning() -> Outcome {
    let mut conds = Vec::new();
    let mut notes = Vec::new();
    for level in 1..=3 {
        let (_, sys) = shifted(Vec3::zeros(), level);
        let est = sys.estimate_condition(PreconditionMode::MassBlock).unwrap();
        notes.push(format!(
            "level {level}: |eig| in [{:.4e}, {:.4e}], cond {:.4e}{}",
            est.min_abs,
            est.max_abs,
            est.cond,
            if est.converged { "" } else { " (Lanczos not converged)" }
        ));
        conds.push(est.cond);
    }
    let growth = factors(&conds);
    let mut shifted_conds = Vec::new();
    for center in random_shifts(7, 5) {
        let (_, sys) = shifted(center, 2);
        shifted_conds.push(sys.estimate_condition(PreconditionMode::MassBlock).unwrap().cond);
    }
    let spread = shifted_conds.iter().cloned().fold(0.0, f64::max) / shifted_conds.iter().cloned().fold(f64::INFINITY, f64::min);
    notes.push(format!("level 2 shifted: {}", fmt_sci(&shifted_conds)));
    Outcome::new(
        &[
            (growth.iter().all(|&g| within(g, 2.5, 6.0)), format!("growth per level {} in [2.5, 6]", fmt_list(&growth))),
            (spread < 2.0, format!("variation across 5 shifts {spread:.3} < 2")),
        ],
        notes,
    )
}

fn schur() -> Outcome {
    let mut intervals = Vec::new();
    for level in 1..=2 {
        let (_, sys) = shifted(Vec3::zeros(), level);
        let ev = sys.schur_spectrum().unwrap();
        intervals.push((ev[0], ev[ev.len() - 1]));
    }
    let (a, b) = (intervals[0], intervals[1]);
    let dlo = (b.0 - a.0).abs() / a.0.abs();
    let dhi = (b.1 - a.1).abs() / a.1.abs();
    Outcome::new(
        &[
            (dlo < 0.5, format!("lower endpoint change {:.1}% < 50%", 100.0 * dlo)),
            (dhi < 0.5, format!("upper endpoint change {:.1}% < 50%", 100.0 * dhi)),
        ],
        vec![
            format!("level 1: [{:.4e}, {:.4e}]", a.0, a.1),
            format!("level 2: [{:.4e}, {:.4e}]", b.0, b.1),
        ],
    )
}

/// `b(u_h, λ_h)` by quadrature over Γ_h and the band, evaluating the finite element
/// functions directly instead of going through element matrices.
fn coupling_by_quadrature(disc: &Discretization, u: &[f64], lambda: &[f64]) -> f64 {
    let uf = FeFunction {
        space: &disc.velocity,
        components: 3,
        coeffs: u.to_vec(),
    };
    let lf = FeFunction {
        space: &disc.multiplier,
        components: 1,
        coeffs: lambda.to_vec(),
    };
    let mut surface = 0.0;
    let rule = triangle_degree4();
    for tri in &disc.surface.triangles {
        let geo = &disc.geometries[tri.cell];
        for (p, w) in rule.iter() {
            let x = tri.point(p);
            let n = disc.normals.normal(tri.cell, &x);
            surface += w * tri.area * uf.vector_value(tri.cell, geo, &x).dot(&n) * lf.value(tri.cell, geo, &x, 0);
        }
    }
    let mut volume = 0.0;
    let rule = tet_rule_for_degree(disc.velocity.degree);
    for (cell, geo) in disc.geometries.iter().enumerate() {
        for (p, w) in rule.iter() {
            let x = geo.point(p);
            let n = disc.normals.normal(cell, &x);
            let dn: f64 = (0..3).map(|a| n[a] * uf.gradient(cell, geo, &x, a).dot(&n)).sum();
            volume += w * geo.volume * dn * lf.gradient(cell, geo, &x, 0).dot(&n);
        }
    }
    surface + disc.params.rho_tilde * volume
}

fn random_symmetric_indefinite(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = (&g + g.transpose()) * 0.5;
        let ev = a.symmetric_eigenvalues();
        let neg = ev.iter().filter(|e: &&f64| **e < 0.0).count();
        let gap = ev.iter().fold(f64::INFINITY, |m: f64, e: &f64| m.min(e.abs()));
        if neg > 0 && neg < n && gap > 0.05 {
            return a;
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_b: f64 = 0.0;
    for (kind, level, k) in [(CaseKind::Sphere, 2, 1), (CaseKind::Plane, 1, 2)] {
        let case = ManufacturedCase::new(kind);
        let options = DiscretizationOptions {
            velocity_degree: k,
            ..Default::default()
        };
        let disc = Discretization::new(case.phi.clone(), case.background_mesh(level).unwrap(), options).unwrap();
        let b = assemble_b(&disc);
        for _ in 0..10 {
            let u: Vec<f64> = (0..b.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l: Vec<f64> = (0..b.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let assembled = b.bilinear(&u, &l);
            let direct = coupling_by_quadrature(&disc, &u, &l);
            worst_b = worst_b.max((assembled - direct).abs() / direct.abs());
        }
    }

    let rtol = 1e-10;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..10 {
        let a = random_symmetric_indefinite(&mut rng, 50);
        let ev = a.symmetric_eigenvalues();
        let cond = ev.amax() / ev.iter().fold(f64::INFINITY, |m: f64, e: &f64| m.min(e.abs()));
        let rhs = DVector::from_fn(50, |_, _| rng.gen_range(-1.0..1.0));
        let exact = a.clone().lu().solve(&rhs).unwrap();
        let sparse = CsrMatrix::from_dense(&a);
        let out = minres(&sparse, rhs.as_slice(), &mut IdentityPreconditioner, rtol, 500).unwrap();
        let err: Vec<f64> = out.x.iter().zip(exact.iter()).map(|(x, e)| x - e).collect();
        // The residual reduction bounds the relative error by cond · rtol.
        worst_ratio = worst_ratio.max(norm(&err) / exact.norm() / (cond * rtol));
    }
    Outcome::new(
        &[
            (worst_b < 1e-12, format!("<Bu, lambda> vs quadrature: max relative gap {worst_b:.2e} < 1e-12")),
            (
                worst_ratio <= 1.0,
                format!("MINRES vs dense LU: max error / (cond * rtol) = {worst_ratio:.2e} <= 1"),
            ),
        ],
        vec![],
    )
}

fn zero_strain() -> Outcome {
    let case = ManufacturedCase::new(CaseKind::SphereKilling);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let y = loop {
            let v = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            if v.norm() > 0.1 && v.norm() <= 1.0 {
                break v.normalize();
            }
        };
        let diff = case.forcing(&y) - case.solution(&y);
        worst = worst.max(diff.amax());
    }
    Outcome::new(&[(worst < 1e-5, format!("max |f - u*| {worst:.2e} < 1e-5 over 100 samples"))], vec![])
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, outcome: Outcome| {
        println!("{} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        for note in &outcome.notes {
            println!("    {note}");
        }
        results.push((name, outcome));
    };

    report("zero-strain-oracle", zero_strain());
    report("oracle-equivalence", oracle_equivalence());
    report("norm-equivalence", norm_equivalence());
    report("conditioning", conditioning());
    report("schur-equivalence", schur());

    let (rho_h, t_h) = study(CaseKind::Sphere, 1, 0.0, 1..=5);
    report("sphere-rho-h-orders", sphere_h_orders(&rho_h, t_h));
    report("solver-table-1", table_1(&rho_h));
    let (rho_hinv, _) = study(CaseKind::Sphere, 1, 2.0, 1..=5);
    report("sphere-rho-hinv", sphere_hinv(&rho_hinv, &rho_h));
    report("solver-table-2", table_2(&rho_hinv));
    let (plane_p2, t_p) = study(CaseKind::Plane, 2, 0.0, 1..=4);
    report("plane-p2", plane(&plane_p2, t_p));

    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!("\n{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
