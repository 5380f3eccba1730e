use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracefem::assembly::{Discretization, SaddleSystem};
use tracefem::io::{write_solution_vtk, DatTable, RunConfig};
use tracefem::linalg::PreconditionMode;
use tracefem::verification::{assemble_level, run_convergence_study_with, LevelSolution, ManufacturedCase};
use tracefem::{Error, Vec3};

/// Overrides the output directory of the config file; flags still win.
const OUTPUT_ENV: &str = "TRACEFEM_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "tracefem",
    version,
    about = "Trace finite element solver for the vector-Laplace problem on implicit surfaces",
    after_help = "Settings are resolved as: defaults < --config file < TRACEFEM_OUTPUT_DIR < KEY=VALUE < flags.\n\
                  Keys: case k l alpha c levels normals outer_rtol inner_rtol maxit output vtk parallel verbose"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study: writes <stem>.dat and <stem>-iters.dat.
    Run(ConfigArgs),
    /// Spectral condition estimate of the saddle point matrix per level.
    Condition {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = Precond::Mass)]
        precond: Precond,
    },
    /// Generalized eigenvalue interval of (B A^-1 B^T, S_M) per level.
    Schur(ConfigArgs),
    /// Background mesh, active band and surface statistics per level.
    Mesh(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Precond {
    None,
    Mass,
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value settings file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// sphere, killing or plane.
    #[arg(long)]
    case: Option<String>,
    /// Velocity degree.
    #[arg(short = 'k', long)]
    k: Option<String>,
    /// Multiplier degree.
    #[arg(short = 'l', long)]
    l: Option<String>,
    /// Stabilization exponent: rho = c h^(1 - alpha).
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// 3, 1..4 or 1,2,5.
    #[arg(long)]
    levels: Option<String>,
    /// exact or interpolated.
    #[arg(long)]
    normals: Option<String>,
    #[arg(long)]
    outer_rtol: Option<String>,
    #[arg(long)]
    inner_rtol: Option<String>,
    #[arg(long)]
    maxit: Option<String>,
    /// Output directory.
    #[arg(short = 'o', long)]
    output: Option<String>,
    /// Also write VTK files.
    #[arg(long)]
    vtk: bool,
    /// Parallel element assembly.
    #[arg(long)]
    parallel: bool,
    /// Print and write residual histories.
    #[arg(short = 'v', long)]
    verbose: bool,
    /// Extra settings as key=value.
    #[arg(value_name = "KEY=VALUE")]
    pairs: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> tracefem::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.merge_text(&text)?;
        }
        if let Ok(dir) = std::env::var(OUTPUT_ENV) {
            if !dir.is_empty() {
                cfg.set("output", &dir)?;
            }
        }
        for pair in &self.pairs {
            cfg.set_pair(pair)?;
        }
        let flags = [
            ("case", &self.case),
            ("k", &self.k),
            ("l", &self.l),
            ("alpha", &self.alpha),
            ("c", &self.c),
            ("levels", &self.levels),
            ("normals", &self.normals),
            ("outer_rtol", &self.outer_rtol),
            ("inner_rtol", &self.inner_rtol),
            ("maxit", &self.maxit),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.vtk |= self.vtk;
        cfg.parallel |= self.parallel;
        cfg.verbose |= self.verbose;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Failure of a subcommand, mapped to the process exit code.
enum Failure {
    Usage(Error),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => args.resolve().map_err(Failure::Usage).and_then(|c| run(&c)),
        Command::Condition { config, precond } => config
            .resolve()
            .map_err(Failure::Usage)
            .and_then(|c| condition(&c, *precond)),
        Command::Schur(args) => args.resolve().map_err(Failure::Usage).and_then(|c| schur(&c)),
        Command::Mesh(args) => args.resolve().map_err(Failure::Usage).and_then(|c| mesh(&c)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}\n\nRun `tracefem --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn create_file(path: &Path) -> tracefem::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_surface_vtk(disc: &Discretization, path: &Path) -> tracefem::Result<()> {
    let mut out = create_file(path)?;
    let none: &[(&str, Vec<Vec3>)] = &[];
    disc.surface.write_vtk(&mut out, none, &[])?;
    Ok(())
}

fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let study = cfg.study();
    let stem = study.stem();
    std::fs::create_dir_all(&cfg.output).map_err(Error::from)?;
    let visit = |s: &LevelSolution| -> tracefem::Result<()> {
        let r = &s.result;
        println!(
            "level {}  h {:.5e}  dofs {}+{}  U {:.5e}  L2P {:.5e}  u_N {:.5e}  M {:.5e}  N {}  N_A {:.5e}  N_S {:.5e}",
            r.level,
            r.h,
            r.velocity_dofs,
            r.multiplier_dofs,
            r.errors.energy,
            r.errors.l2_tangential,
            r.errors.normal,
            r.errors.multiplier,
            r.stats.iterations,
            r.stats.inner_a,
            r.stats.inner_s,
        );
        if cfg.verbose {
            let mut t = DatTable::new(&["iteration", "residual"]);
            for (i, res) in r.stats.history.iter().enumerate() {
                println!("  {i} {res:.5e}");
                t.push(vec![i as f64, *res]);
            }
            t.write_file(&cfg.output.join(format!("{stem}-L{}-history.dat", r.level)))?;
        }
        if cfg.vtk {
            let base = format!("{stem}-L{}", r.level);
            write_surface_vtk(&s.disc, &cfg.output.join(format!("{base}.surface.vtk")))?;
            let mut out = create_file(&cfg.output.join(format!("{base}.solution.vtk")))?;
            write_solution_vtk(&s.disc, &s.u, &s.lambda, &mut out)?;
        }
        Ok(())
    };
    let result = run_convergence_study_with(&study, visit)?;
    println!("wrote {}", cfg.output.join(format!("{stem}.dat")).display());
    if result.failures.is_empty() {
        return Ok(());
    }
    let mut summary = format!("{} of {} levels failed:", result.failures.len(), cfg.levels.len());
    for (level, e) in &result.failures {
        summary.push_str(&format!("\n  level {level}: {e}"));
    }
    Err(Failure::Run(summary))
}

/// The saddle system of one level; the forcing does not enter the spectral diagnostics.
fn diagnostic_system(cfg: &RunConfig, level: u32) -> tracefem::Result<SaddleSystem> {
    let mut study = cfg.study();
    study.levels = vec![level];
    assemble_level(&study, level).map(|(_, _, system)| system)
}

fn condition(cfg: &RunConfig, precond: Precond) -> Result<(), Failure> {
    let (mode, tag) = match precond {
        Precond::None => (PreconditionMode::None, "none"),
        Precond::Mass => (PreconditionMode::MassBlock, "mass"),
    };
    let mut table = DatTable::new(&["level", "min_abs", "max_abs", "cond", "converged"]);
    for &level in &cfg.levels {
        let est = diagnostic_system(cfg, level)?.estimate_condition(mode)?;
        let rel = if est.converged { "=" } else { ">=" };
        println!(
            "level {level}  |eig| in [{:.5e}, {:.5e}]  cond {rel} {:.5e}",
            est.min_abs, est.max_abs, est.cond
        );
        table.push(vec![level as f64, est.min_abs, est.max_abs, est.cond, est.converged as u8 as f64]);
    }
    let path = cfg.output.join(format!("{}-cond-{tag}.dat", cfg.study().stem()));
    std::fs::create_dir_all(&cfg.output).map_err(Error::from)?;
    table.write_file(&path)?;
    Ok(())
}

fn schur(cfg: &RunConfig) -> Result<(), Failure> {
    let mut table = DatTable::new(&["level", "min", "max"]);
    for &level in &cfg.levels {
        let ev = diagnostic_system(cfg, level)?.schur_spectrum()?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        println!("level {level}  eigenvalues in [{lo:.5e}, {hi:.5e}]  ({} values)", ev.len());
        table.push(vec![level as f64, lo, hi]);
    }
    let path = cfg.output.join(format!("{}-schur.dat", cfg.study().stem()));
    std::fs::create_dir_all(&cfg.output).map_err(Error::from)?;
    table.write_file(&path)?;
    Ok(())
}

fn mesh(cfg: &RunConfig) -> Result<(), Failure> {
    let study = cfg.study();
    for &level in &cfg.levels {
        let case = ManufacturedCase::new(cfg.case);
        let disc = Discretization::new(case.phi.clone(), case.background_mesh(level)?, study.options(case.dirichlet))?;
        println!(
            "level {level}  n {}  h {:.5e}  tets {}  active {}  triangles {}  area {:.5e}  band volume {:.5e}  dofs {}x3+{}",
            disc.mesh.cells,
            disc.h(),
            disc.mesh.tets.len(),
            disc.active.len(),
            disc.surface.len(),
            disc.surface.area(),
            disc.active.band_volume(&disc.mesh),
            disc.velocity.ndofs(),
            disc.multiplier.ndofs(),
        );
        if cfg.vtk {
            let base = format!("{}-L{level}", case.kind.name());
            write_surface_vtk(&disc, &cfg.output.join(format!("{base}.surface.vtk")))?;
            let mut out = create_file(&cfg.output.join(format!("{base}.band.vtk")))?;
            disc.mesh.write_vtk(&mut out, Some(&disc.active.tets)).map_err(Error::from)?;
        }
    }
    Ok(())
}
