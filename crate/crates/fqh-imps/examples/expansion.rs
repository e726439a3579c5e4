//! Print the occupation-basis expansion of Ψ_{b,N}.
//!
//!     cargo run --release --example expansion -- 2 4 0,0,0,1 1.5

use fqh_imps::partitions::{Partition, Root};
use fqh_imps::wavefunction::{build_expansion, norm_squared, Geometry};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let q: u32 = args.first().map_or(2, |s| s.parse().unwrap());
    let n: usize = args.get(1).map_or(3, |s| s.parse().unwrap());
    let b = match args.get(2) {
        Some(s) => Partition::new(s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap(),
        None => Partition::zeros(n),
    };
    let gamma: f64 = args.get(3).map_or(1.0, |s| s.parse().unwrap());

    let root = Root::new(q, n, b).expect("valid root");
    let exp = build_expansion(&root, &Geometry::cylinder(gamma).unwrap()).expect("expansion");
    println!("root partition {} ({} terms)", root.partition(), exp.terms.len());
    println!("{:<24} {:>12} {:>6} {:>4} {:>14}", "lambda", "w", "delta", "M!", "h");
    for t in &exp.terms {
        println!("{:<24} {:>12} {:>6} {:>4} {:>14.6e}", t.lambda.to_string(), t.w.to_string(), t.delta, t.m_factorial, t.h);
    }
    println!("norm^2 = {:.15}", norm_squared(&exp).unwrap());
}
