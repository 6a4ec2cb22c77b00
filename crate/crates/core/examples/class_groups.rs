//! Class groups of imaginary quadratic fields: reduced forms, element orders and character table.
//!
//! Usage: class_groups [DISC]...
//! e.g. `class_groups -23 -47 -84`.

use rtf_core::qfield::{reduced_forms, ClassGroup, QuadField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let discs: Vec<i64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let discs = if discs.is_empty() {
        vec![-23, -47, -84]
    } else {
        discs
    };
    for disc in discs {
        let field = QuadField::new(disc)?;
        let pic = ClassGroup::new(field);
        println!(
            "D = {disc}: h = {}, units = {}, exponent {}, L(1, η) = {:.12}",
            pic.h(),
            pic.field.units,
            pic.exponent(),
            pic.field.completed_l1(pic.h())
        );
        for form in reduced_forms(disc) {
            let class = pic.class_of(form);
            println!(
                "  ({}, {}, {})  order {}",
                form.a,
                form.b,
                form.c,
                pic.order(class)
            );
        }
        for chi in pic.characters() {
            let values: Vec<String> = (0..pic.h())
                .map(|x| {
                    let v = chi.value(x);
                    format!("{:+.3}{:+.3}i", v.re, v.im)
                })
                .collect();
            println!(
                "  Ω {:?} (order {}): {}",
                chi.label,
                chi.order(),
                values.join(" ")
            );
        }
    }
    Ok(())
}
