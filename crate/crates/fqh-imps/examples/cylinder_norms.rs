//! Squared norms on the cylinder as exact polynomials in t = e^{−γ²}, the
//! renewal identity behind them, and the thin-cylinder bounds.
//!
//!     cargo run --release --example cylinder_norms -- 5.0

use fqh_imps::partitions::Root;
use fqh_imps::wavefunction::{
    c_constant, irreducible_norm_bound, norm_polynomial, supermultiplicativity, verify_renewal_identity, Geometry,
};

fn main() {
    let gamma: f64 = std::env::args().nth(1).map_or(5.0, |s| s.parse().unwrap());
    let geo = Geometry::cylinder(gamma).unwrap();
    println!("C_2({gamma}) = {:.6}", c_constant(2, gamma));

    for n in 1..=6 {
        let root = Root::laughlin(2, n);
        let p = norm_polynomial(&root).unwrap();
        let head: Vec<String> = p.terms.iter().take(4).map(|(k, c)| format!("{c}·t^{k}")).collect();
        let id = verify_renewal_identity(&root, &geo).unwrap();
        let seg = irreducible_norm_bound(&root, gamma).ok();
        let sm = supermultiplicativity(&root, &geo).unwrap().iter().all(|r| r.holds());
        println!(
            "N={n}: ||Psi||^2 = {} + ...  segmentations {}  identity exact {}  supermult {}  ln||Psi^||^2 {:.3} <= {:.3}",
            head.join(" + "),
            id.segmentations,
            id.exact,
            sm,
            seg.as_ref().map_or(f64::NAN, |r| r.ln_norm),
            seg.as_ref().map_or(f64::NAN, |r| r.ln_bound),
        );
    }
}
