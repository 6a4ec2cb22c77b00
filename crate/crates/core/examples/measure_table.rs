//! Tabulates the local measures at q: Sato–Tate, Plancherel and the twisted measure of an inert prime,
//! on a grid of eigenvalue parameters x = λ/√q in [-2, 2].
//!
//! Usage: measure_table [Q] [STEPS]

use num_complex::Complex64;
use rtf_core::heckemeasure::{LocalTorus, Measure};
use rtf_core::qfield::Splitting;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let q: u64 = args.next().map_or(Ok(3), |s| s.parse())?;
    let steps: usize = args.next().map_or(Ok(16), |s| s.parse())?;
    let torus = LocalTorus {
        p: q,
        splitting: Splitting::Inert,
        zeta: Complex64::new(1.0, 0.0),
        conductor_exp: 0,
    };
    let measures = [
        ("sato-tate", Measure::SatoTate),
        ("plancherel", Measure::Plancherel { q }),
        ("twisted", Measure::Twisted(torus)),
    ];
    print!("{:>8}", "x");
    for (name, _) in &measures {
        print!("{name:>14}");
    }
    println!();
    for i in 0..=steps {
        let x = -2.0 + 4.0 * i as f64 / steps as f64;
        print!("{x:>8.3}");
        for (_, m) in &measures {
            print!("{:>14.8}", m.density(x).re);
        }
        println!();
    }
    Ok(())
}
