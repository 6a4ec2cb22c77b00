//! Runs the spectral, geometric and L-function checks for a few (D, N) pairs and prints the rows.
//!
//! Usage: classical_average [DISC LEVEL]...
//! e.g. `classical_average -4 11 -23 37`.

use rtf_core::harness::{run, ExperimentConfig, ExperimentKind, HeckeChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<i64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let mut cfg = ExperimentConfig::empty(ExperimentKind::VerifyAverage);
    cfg.pairs = if args.is_empty() {
        vec![(-4, 11), (-23, 37)]
    } else {
        args.chunks_exact(2).map(|p| (p[0], p[1] as u64)).collect()
    };
    cfg.hecke = vec![HeckeChoice::identity(2)];
    cfg.afe = true;
    let out = run(&cfg)?;
    for r in &out.rows {
        let value = r.lhs.map(|v| format!("{:.12}", v.re)).unwrap_or_default();
        let reference = r.rhs.map(|v| format!("{:.12}", v.re)).unwrap_or_default();
        println!(
            "{:<20} D={:<4} N={:<4} Ω={:<5} {:<8} {value:>16} {reference:>16} {:?} {}",
            r.check,
            r.disc.unwrap_or(0),
            r.level.unwrap_or(0),
            r.omega,
            r.label,
            r.status,
            r.note
        );
    }
    println!("{}", out.summary());
    Ok(())
}
