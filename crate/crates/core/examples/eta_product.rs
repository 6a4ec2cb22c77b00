//! Writes the q-expansion of η(z)^r η(Nz)^r as an eigenform coefficient file.
//!
//! Usage: eta_product LEVEL EXPONENT BOUND [PATH]
//! e.g. `eta_product 5 4 2000 tests/data/level5_weight4.txt` (weight 4, level 5)
//! or `eta_product 11 2 2000` (weight 2, level 11) to stdout.

use std::fmt::Write as _;

fn expansion(level: usize, exponent: usize, bound: usize) -> Vec<i64> {
    // q^{r(N+1)/24} ∏ (1 − q^n)^r (1 − q^{Nn})^r, shifted so index n holds a_n;
    // partial products overflow, but the final coefficients are exact modulo 2^64
    let lead = exponent * (level + 1) / 24;
    let mut series = vec![0i64; bound + 1];
    series[0] = 1;
    for n in 1..=bound {
        for step in [n, level * n] {
            if step > bound {
                continue;
            }
            for _ in 0..exponent {
                for i in (step..=bound).rev() {
                    series[i] = series[i].wrapping_sub(series[i - step]);
                }
            }
        }
    }
    let mut a = vec![0i64; bound + 1];
    a[lead..].copy_from_slice(&series[..=bound - lead]);
    a
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: eta_product LEVEL EXPONENT BOUND [PATH]");
        std::process::exit(2);
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .unwrap_or_else(|_| panic!("not a positive integer: {s}"))
    };
    let (level, exponent, bound) = (parse(&args[0]), parse(&args[1]), parse(&args[2]));
    if exponent * (level + 1) % 24 != 0 {
        eprintln!("η(z)^{exponent} η({level}z)^{exponent} is not a form on Γ0({level}) with trivial character");
        std::process::exit(2);
    }
    let a = expansion(level, exponent, bound);
    let mut out = String::new();
    writeln!(out, "# eta product (eta(z) eta({level}z))^{exponent}").unwrap();
    writeln!(
        out,
        "level {level} weight {exponent} label eta{level}x{exponent}"
    )
    .unwrap();
    for (n, an) in a.iter().enumerate().skip(1) {
        writeln!(out, "{n},{an}").unwrap();
    }
    match args.get(3) {
        Some(path) => std::fs::write(path, out).expect("write coefficient file"),
        None => print!("{out}"),
    }
}
