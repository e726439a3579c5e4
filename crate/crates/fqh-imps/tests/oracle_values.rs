//! Coefficients frozen from the brute-force polynomial expansion.

use num_rational::BigRational;

use fqh_imps::cft_ops::{all_coefficients, w_coefficient, Route};
use fqh_imps::partitions::{Partition, Root};

fn p(v: &[u32]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn check(root: &Root, table: &[(&[u32], i64)]) {
    let all = all_coefficients(root, false);
    let nonzero: Vec<_> = all.iter().filter(|(_, w)| *w != r(0)).collect();
    assert_eq!(nonzero.len(), table.len(), "{all:?}");
    for &(lam, want) in table {
        for route in [Route::PermutationSum, Route::BoundaryCharge] {
            assert_eq!(w_coefficient(&p(lam), root, route).unwrap(), r(want), "{lam:?} {route:?}");
        }
        assert!(all.contains(&(p(lam), r(want))));
    }
}

#[test]
fn squared_vandermonde_three_particles() {
    check(
        &Root::laughlin(2, 3),
        &[(&[0, 2, 4], 1), (&[0, 3, 3], -2), (&[1, 1, 4], -2), (&[1, 2, 3], 2), (&[2, 2, 2], -6)],
    );
}

#[test]
fn cubed_vandermonde_with_void() {
    check(
        &Root::new(3, 3, p(&[0, 0, 1])).unwrap(),
        &[(&[0, 3, 7], 1), (&[0, 4, 6], -2), (&[1, 2, 7], -3), (&[1, 3, 6], 4), (&[1, 4, 5], 3), (&[2, 3, 5], -9)],
    );
}

#[test]
fn two_particles() {
    // (z₁ − z₂)^q
    check(&Root::laughlin(1, 2), &[(&[0, 1], 1)]);
    check(&Root::laughlin(2, 2), &[(&[0, 2], 1), (&[1, 1], -2)]);
    check(&Root::laughlin(3, 2), &[(&[0, 3], 1), (&[1, 2], -3)]);
}
