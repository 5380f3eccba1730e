//! Level-by-level convergence study with timings.
//!
//! `cargo run --release --example study -- sphere 1 0 5 [a_block]`
//! (case, velocity degree, alpha, finest level, SSOR block size of the velocity solve).

use std::time::Instant;

use tracefem::verification::{run_level, CaseKind, StudyConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 4 {
        eprintln!("usage: study CASE K ALPHA MAX_LEVEL [A_BLOCK]");
        std::process::exit(2);
    }
    let case = CaseKind::parse(&args[0]).expect("case is sphere, killing or plane");
    let k: usize = args[1].parse().expect("integer degree");
    let alpha: f64 = args[2].parse().expect("numeric alpha");
    let max: u32 = args[3].parse().expect("integer level");
    let mut cfg = StudyConfig {
        case,
        velocity_degree: k,
        alpha,
        levels: (1..=max).collect(),
        parallel: true,
        ..Default::default()
    };
    if let Some(b) = args.get(4) {
        cfg.solver.a_block = b.parse().expect("integer block size");
    }
    for &level in &cfg.levels {
        let t = Instant::now();
        match run_level(&cfg, level) {
            Ok(r) => println!(
                "{level} U {:.4e} L2P {:.4e} u_N {:.4e} M {:.4e} | N {} N_A {:.1} N_S {:.1} | {:.1}s",
                r.errors.energy,
                r.errors.l2_tangential,
                r.errors.normal,
                r.errors.multiplier,
                r.stats.iterations,
                r.stats.inner_a,
                r.stats.inner_s,
                t.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{level} failed: {e}"),
        }
    }
}
