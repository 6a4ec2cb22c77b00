use num_complex::Complex64;
use rtf_core::geomside::{geometric_total, GeomConfig};
use rtf_core::heckemeasure::HeckeElement;
use rtf_core::qfield::{ClassGroup, QuadField};
use rtf_core::quatorder::ClassSet;
use rtf_core::spectralside::{adelic_scale, spectral_average, EigenData};
use rtf_core::torusmap::PeriodData;

fn check(d: i64, n: u64, p: u64, deg: usize) {
    let field = QuadField::new(d).unwrap();
    let pic = ClassGroup::new(field);
    let cs = ClassSet::new(n).unwrap();
    let primes: Vec<u64> = [2u64, 3, 5, 7]
        .into_iter()
        .filter(|q| !n.is_multiple_of(*q))
        .collect();
    let eig = EigenData::new(&cs, &primes).unwrap();
    let pd = PeriodData::new(&cs, &pic).unwrap();
    let f = HeckeElement::basis(p, deg);
    for omega in pic.characters() {
        let spectral = spectral_average(&eig, &pd, &field, &omega, &f, 1e-10).unwrap();
        let cfg = GeomConfig {
            level: n,
            pic: &pic,
            omega: &omega,
            k: 1,
            hecke: f.clone(),
        };
        let geom = geometric_total(&cfg, 1e-13).unwrap();
        let lhs: Complex64 = spectral.delta_route * adelic_scale(&field);
        let rel = (lhs - geom.total).norm() / geom.total.norm().max(lhs.norm()).max(1e-300);
        println!(
            "D={d} N={n} p={p} deg={deg} Ω={:?}: spectral {lhs} geometric {} rel {rel:e}",
            omega.label, geom.total
        );
        assert!(rel < 1e-8 || (lhs.norm() < 1e-12 && geom.total.norm() < 1e-12));
    }
}

#[test]
fn stable_and_unstable_configurations() {
    check(-4, 11, 3, 0);
    check(-4, 11, 2, 1);
    check(-23, 37, 2, 0);
    check(-3, 11, 2, 1);
    check(-23, 5, 2, 0);
    check(-7, 5, 2, 0);
    check(-23, 53, 2, 1);
}

#[test]
fn weight_four_below_stability() {
    use rtf_core::harness::{run, ExperimentConfig, ExperimentKind, Status};
    let data =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/level5_weight4.txt");
    let mut cfg = ExperimentConfig::empty(ExperimentKind::VerifyAverage);
    cfg.pairs = vec![(-7, 5), (-23, 5)];
    cfg.k = 2;
    cfg.coefficients = vec![data];
    let out = run(&cfg).unwrap();
    let checks: Vec<_> = out
        .rows
        .iter()
        .filter(|r| r.check == "afe=geometric")
        .collect();
    assert_eq!(checks.len(), 4);
    for r in checks {
        println!(
            "D={:?} Ω={} afe {:?} geometric {:?}",
            r.disc, r.omega, r.lhs, r.rhs
        );
        assert_eq!(r.status, Status::Pass, "{}", r.note);
    }
}
