//! Connected density–density correlators against distance.
//!
//!     cargo run --release --example correlations -- 6 5.0

use fqh_imps::observables::{clustering_scan, Family};
use fqh_imps::partitions::Root;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(6, |s| s.parse().unwrap());
    let gamma: f64 = args.get(1).map_or(5.0, |s| s.parse().unwrap());

    for family in [Family::Density, Family::Hopping] {
        let rep = clustering_scan(&Root::laughlin(2, n), gamma, family, &[2, 3, 4, 5, 6, 7, 8]).unwrap();
        println!("{family:?}: slope {:.3} (need <= {:.3}), decreasing {}", rep.slope, -rep.c_constant / 6.0, rep.decreasing);
        for r in &rep.rows {
            println!("  d={} x={}  ln|conn| = {:>10.3}  ln bound = {:>8.3}", r.distance, r.anchor, r.ln_abs, r.ln_bound);
        }
    }
}
