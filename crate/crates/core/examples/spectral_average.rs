//! Spectral side for one (D, N): Hecke eigenvalues, period squares and normalized central-value ratios
//! per eigenform, with the delta-basis and eigenbasis totals.
//!
//! Usage: spectral_average [DISC LEVEL]
//! e.g. `spectral_average -4 11`.

use rtf_core::heckemeasure::HeckeElement;
use rtf_core::qfield::{ClassGroup, QuadField};
use rtf_core::quatorder::ClassSet;
use rtf_core::spectralside::{spectral_average, EigenData};
use rtf_core::torusmap::PeriodData;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<i64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let (disc, level) = match args.as_slice() {
        [d, n] => (*d, *n as u64),
        _ => (-4, 11),
    };
    let field = QuadField::new(disc)?;
    let pic = ClassGroup::new(field);
    let cs = ClassSet::new(level)?;
    let primes: Vec<u64> = [2u64, 3, 5, 7, 11, 13]
        .into_iter()
        .filter(|p| level % p != 0)
        .collect();
    let eig = EigenData::new(&cs, &primes)?;
    let pd = PeriodData::new(&cs, &pic)?;
    println!(
        "D = {disc}, N = {level}: {} cusp forms, Hecke primes {primes:?}",
        eig.cusp_count()
    );
    for omega in pic.characters() {
        let rep = spectral_average(&eig, &pd, &field, &omega, &HeckeElement::identity(2), 1e-10)?;
        println!(
            "Ω {:?}: delta route {:.12}, eigen route {:.12}, L-average {:.12}",
            omega.label, rep.delta_route.re, rep.eigen_route.re, rep.l_average.re
        );
        for t in &rep.forms {
            let kind = if t.is_eisenstein {
                "eisenstein"
            } else {
                "cusp"
            };
            let ratio = t
                .l_ratio
                .map(|r| format!("{r:.12}"))
                .unwrap_or_else(|| "-".into());
            let eigenvalues: Vec<String> =
                t.eigenvalues.iter().map(|x| format!("{x:.0}")).collect();
            println!(
                "  {kind:<10} λ = [{}]  |P|² = {:.12}  L-ratio {ratio}",
                eigenvalues.join(", "),
                t.period_sq
            );
        }
    }
    Ok(())
}
