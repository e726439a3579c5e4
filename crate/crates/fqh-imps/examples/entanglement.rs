//! Entanglement spectra across every orbital cut and the gap bound at the
//! root-block boundaries.
//!
//!     cargo run --release --example entanglement -- 2 4 5.0

use fqh_imps::entanglement::{block_split, entanglement_gap_check, schmidt_spectrum};
use fqh_imps::partitions::Root;
use fqh_imps::wavefunction::{build_expansion, Geometry};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let q: u32 = args.first().map_or(2, |s| s.parse().unwrap());
    let n: usize = args.get(1).map_or(4, |s| s.parse().unwrap());
    let gamma: f64 = args.get(2).map_or(5.0, |s| s.parse().unwrap());

    let root = Root::laughlin(q, n);
    let exp = build_expansion(&root, &Geometry::cylinder(gamma).unwrap()).unwrap();
    for cut in 0..=root.partition().last() + 1 {
        let s = schmidt_spectrum(&exp, cut).unwrap();
        let es: Vec<String> = s.entanglement_spectrum.iter().take(5).map(|e| format!("{e:.3}")).collect();
        println!("cut {cut:>2}: {} values (+{} below 1e-14)  xi = [{}]", s.values.len(), s.tail_count, es.join(", "));
        if block_split(&root, cut).is_some() {
            match entanglement_gap_check(&root, gamma, cut) {
                Ok(g) => println!(
                    "         largest eigenvalue {:.15} >= {:.6}; distance {:.3e} <= {:.3e}",
                    g.largest_eigenvalue, g.gap_bound, g.factorization.distance, g.factorization.bound
                ),
                Err(e) => println!("         {e}"),
            }
        }
    }
}
