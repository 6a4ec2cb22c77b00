//! Central values from an eigenform coefficient file: standard, twisted and Rankin–Selberg L-values,
//! the adjoint value at 1, and the normalized term of the average for each class-group character.
//!
//! Usage: central_values FILE DISC
//! e.g. `central_values tests/data/level5_weight4.txt -3`.

use num_complex::Complex64;
use rtf_core::harness::CoefficientTable;
use rtf_core::lfunc::{average_term, Kind, LSeries};
use rtf_core::qfield::{ClassGroup, QuadField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [path, disc] = args.as_slice() else {
        return Err("usage: central_values FILE DISC".into());
    };
    let disc: i64 = disc.parse()?;
    let table = CoefficientTable::read(path.as_ref())?;
    table.check_hecke()?;
    let form = table.eigenform();
    let pic = ClassGroup::new(QuadField::new(disc)?);
    let k = form.k() as f64;
    println!(
        "{}: level {}, weight {}",
        form.label, form.level, form.weight
    );
    for (name, kind) in [("L(f)", Kind::Standard), ("L(f ⊗ χ_D)", Kind::Twist(disc))] {
        let v = LSeries::build(kind, &form, None)?.value(Complex64::new(k, 0.0), 1e-6)?;
        println!(
            "  {name} at the centre: {:.12} (error {:.1e})",
            v.finite.re, v.error
        );
    }
    let ad = LSeries::build(Kind::Adjoint, &form, None)?;
    let v = ad.value(Complex64::new(1.0, 0.0), 1e-6)?;
    println!("  L(1, Ad f) = {:.12}", v.finite.re);
    for omega in pic.characters() {
        let a = average_term(&form, &pic, &omega, 1e-6)?;
        println!(
            "  Ω {:?}: L(f × θ_Ω) = {:.12}, (f, f) = {:.6e}, normalized term {:.12}",
            omega.label, a.central, a.petersson, a.weighted
        );
    }
    Ok(())
}
