//! Prints the geometric side of the average for one (D, N, k): irregular part and each regular term.
//!
//! Usage: regular_terms DISC LEVEL [K]
//! e.g. `regular_terms -23 5` or `regular_terms -47 5 2`.

use rtf_core::geomside::{geometric_total, GeomConfig};
use rtf_core::heckemeasure::HeckeElement;
use rtf_core::qfield::{ClassGroup, QuadField};
use rtf_core::spectralside::adelic_scale;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [disc, level, rest @ ..] = args.as_slice() else {
        return Err("usage: regular_terms DISC LEVEL [K]".into());
    };
    let disc: i64 = disc.parse()?;
    let level: u64 = level.parse()?;
    let k: u32 = rest.first().map_or(Ok(1), |s| s.parse())?;
    let field = QuadField::new(disc)?;
    let pic = ClassGroup::new(field);
    let scale = adelic_scale(&pic.field) * pic.field.units as f64;
    println!("D = {disc}, N = {level}, weight {}, h = {}", 2 * k, pic.h());
    for omega in pic.characters() {
        let cfg = GeomConfig {
            level,
            pic: &pic,
            omega: &omega,
            k,
            hecke: HeckeElement::identity(2),
        };
        let g = geometric_total(&cfg, 1e-13)?;
        println!(
            "Ω = {:?} ({}): irregular {:.12} regular {:.12} normalized {:.12}",
            omega.label,
            if cfg.is_stable() {
                "stable"
            } else {
                "below stability"
            },
            g.irregular.re,
            g.regular.re,
            g.total.re / scale
        );
        for t in &g.regular_terms {
            let exact = t
                .exact
                .map(|(p, q)| format!(" = {p}/{q}"))
                .unwrap_or_default();
            println!(
                "  n = {:>4}  ξ = {}/{}  |R| = {}  σ = {}  P = {:.6}  term {:.6}{exact}",
                t.n, t.xi.0, t.xi.1, t.norm_count, t.sigma, t.pkm, t.term.re
            );
        }
    }
    Ok(())
}
