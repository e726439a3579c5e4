//! Compare the iMPS coefficients with the brute-force expansion of
//! m_b(z) ∏(z_i − z_j)^q on a small grid of roots.
//!
//!     cargo run --release --example oracle_check

use std::time::Instant;

use fqh_imps::oracle::check_root;
use fqh_imps::partitions::{Partition, Root};

fn main() {
    let t = Instant::now();
    let mut total = 0;
    for q in 1..=3 {
        for n in 2..=4usize {
            for tail in [vec![], vec![1], vec![1, 1], vec![2]] {
                let mut b = vec![0; n - tail.len()];
                b.extend(&tail);
                let root = Root::new(q, n, Partition::new(b).unwrap()).unwrap();
                let rep = check_root(&root).unwrap();
                total += rep.coefficients_checked;
                println!(
                    "q={q} N={n} b={:<12} {:>5} coefficients  {}",
                    root.b.to_string(),
                    rep.coefficients_checked,
                    if rep.passed() { "ok" } else { "MISMATCH" }
                );
            }
        }
    }
    println!("{total} coefficients in {:.2}s", t.elapsed().as_secs_f64());
}
