//! Right ideal classes of a maximal order ramified at N and ∞: weights, mass and Brandt matrices.
//!
//! Usage: brandt_matrices [LEVEL] [PRIME]...
//! e.g. `brandt_matrices 37 2 3`.

use rtf_core::quatorder::classset::expected_mass;
use rtf_core::quatorder::ClassSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let (level, primes) = match args.split_first() {
        Some((&n, rest)) if !rest.is_empty() => (n, rest.to_vec()),
        Some((&n, _)) => (n, vec![2, 3]),
        None => (37, vec![2, 3]),
    };
    let cs = ClassSet::new(level)?;
    println!(
        "N = {level}: {} classes, weights {:?}, mass {} (expected {})",
        cs.len(),
        cs.weights(),
        cs.mass(),
        expected_mass(level)
    );
    for p in primes.into_iter().filter(|p| level % p != 0) {
        println!("B({p}):");
        for row in cs.brandt(p)? {
            println!("  {row:?}");
        }
    }
    Ok(())
}
