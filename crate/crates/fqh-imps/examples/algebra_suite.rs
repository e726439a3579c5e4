//! Check the D±/W commutation identities and the weighted W_m norm bound.
//!
//!     cargo run --release --example algebra_suite -- 8 6

use std::time::Instant;

use fqh_imps::cft_ops::{verify_algebra, weighted_norm, Arithmetic};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("integer")).collect();
    let m_max = args.first().copied().unwrap_or(6);
    let range = args.get(1).copied().unwrap_or(4) as i64;

    for q in 1..=3 {
        let t = Instant::now();
        let rep = verify_algebra(q, m_max, (-range, range), Arithmetic::Modular);
        println!(
            "q={q}: {} checks, {} violations, certificate {:.1} bits, {:.1}s",
            rep.checks,
            rep.violations.len(),
            rep.worst_certificate_bits,
            t.elapsed().as_secs_f64()
        );
    }

    for q in 1..=3 {
        let worst = (-(range as i64)..=range as i64)
            .map(|m| (m, weighted_norm(m, q, m_max)))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        println!("q={q}: max weighted norm {:.12} at m={}", worst.1, worst.0);
    }
}
