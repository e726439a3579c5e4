//! Renewal radius, Feller limit and pressure for a closed-form toy and for
//! the Laughlin norms.
//!
//!     cargo run --release --example renewal -- 5.0 7

use fqh_imps::renewal::{big_tolerance, geometric_toy, laughlin_system, pressure, radius, renewal_report};
use num_bigint::BigInt;
use num_rational::BigRational;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gamma: f64 = args.first().map_or(5.0, |s| s.parse().unwrap());
    let exact: usize = args.get(1).map_or(7, |s| s.parse().unwrap());

    let toy = geometric_toy();
    let r = radius(&toy, &BigRational::new(1.into(), BigInt::from(1u64 << 60))).unwrap();
    let rep = renewal_report(&toy, &r.r, 8).unwrap();
    println!("toy: r = {} (exact {}), mu = {}, target = {}, C_n r^n = {:?}", rep.r, r.exact, rep.mu, rep.target, rep.feller.scaled);

    let sys = laughlin_system(2, gamma, 12, exact).unwrap();
    let rep = renewal_report(&sys, &big_tolerance(), 12).unwrap();
    println!("laughlin q=2 gamma={gamma}: -ln r = {:.6e}, segments beyond N={} dropped", rep.ln_inverse_r, exact);
    for (i, res) in rep.residuals.iter().enumerate() {
        println!("  n={:>2}  ln|C_n r^n - target| = {}", i + 1, res.map_or("exact".into(), |v| format!("{v:.3}")));
    }
    println!(
        "  fitted ln R {:.3}, guaranteed ln R {:.3}",
        -rep.feller.ln_rate.unwrap_or(f64::NAN),
        rep.feller.ln_rate_bound.unwrap_or(f64::NAN)
    );
    for suffix in [vec![0], vec![0, 1]] {
        let p = pressure(2, gamma, &suffix, 8, exact).unwrap();
        let tail: Vec<String> = suffix.iter().map(u32::to_string).collect();
        println!("  pressure, b ends in ({}): ln C_N / N = {:?}", tail.join(","), p.values);
    }
}
