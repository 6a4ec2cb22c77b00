//! Optimal embedding of the ring of integers of Q(√D) into a maximal order of level N, the induced map
//! from ideal classes of Q(√D) to right ideal classes, and the period vector of each class-group character.
//!
//! Usage: torus_periods [DISC LEVEL]
//! e.g. `torus_periods -23 37`.

use rtf_core::qfield::{ClassGroup, QuadField};
use rtf_core::quatorder::ClassSet;
use rtf_core::torusmap::PeriodData;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<i64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let (disc, level) = match args.as_slice() {
        [d, n] => (*d, *n as u64),
        _ => (-23, 37),
    };
    let pic = ClassGroup::new(QuadField::new(disc)?);
    let cs = ClassSet::new(level)?;
    let pd = PeriodData::new(&cs, &pic)?;
    let meta = pd.embedding.meta();
    println!(
        "D = {disc}, N = {level}: y = {:?} (trace {}, norm {}), {} classes, image size {}",
        meta.y_coordinates,
        meta.trace,
        meta.norm,
        cs.len(),
        pd.image_size()
    );
    println!("ideal class -> right ideal class: {:?}", pd.iota);
    for omega in pic.characters() {
        let p: Vec<String> = pd
            .period_vector(&omega)
            .iter()
            .map(|z| format!("{:+.3}{:+.3}i", z.re, z.im))
            .collect();
        println!("Ω {:?}: [{}]", omega.label, p.join(", "));
    }
    Ok(())
}
