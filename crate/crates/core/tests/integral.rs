use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use padic_haar::integral::{
    change_of_variables_holds, compare_for, density_at, density_kappa, disc, disc_integral, integrate_zp,
    matrix_norm_bound, LocallyConstant,
};
use padic_haar::quotient::Budget;
use padic_haar::{Descriptor, KappaLabel, OddPrime, ResidueMatrix};

fn p(x: u64) -> OddPrime {
    OddPrime::new(x).unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn density_is_one_on_zp() {
    // 1 + alpha sigma^2 is a unit for every integral sigma
    for pr in [3, 5, 7, 13] {
        for label in KappaLabel::BINARY {
            let d = density_kappa(label, p(pr), 2).unwrap();
            assert!(d.values.iter().all(|v| v.is_one()), "{label} p={pr}");
        }
    }
}

#[test]
fn density_off_zp() {
    // |sigma|_p = p gives |1 + alpha sigma^2|_p = p^2 for -v
    assert_eq!(density_at(KappaLabel::MinusV, p(3), &r(1, 3)).unwrap(), r(1, 9));
    // alpha = p for kappa = p: |1 + p / p^2|_p = p
    assert_eq!(density_at(KappaLabel::P, p(5), &r(1, 5)).unwrap(), r(1, 5));
}

#[test]
fn integrals_stable_under_refinement() {
    let f = LocallyConstant::indicator(p(5), 1, |c| c == 2);
    let g = f.mul(&LocallyConstant::constant(p(5), BigRational::one())).unwrap();
    assert_eq!(integrate_zp(&f), r(1, 5));
    assert_eq!(integrate_zp(&g), r(1, 5));
    let fine = f.mul(&disc(p(5), 0).unwrap()).unwrap();
    assert_eq!(integrate_zp(&fine), r(1, 5));
}

#[test]
fn disc_integrals_are_volumes() {
    for label in KappaLabel::BINARY {
        assert_eq!(disc_integral(label, p(7), -2).unwrap(), r(1, 49));
    }
    assert!(disc(p(3), 1).is_err());
}

#[test]
fn norm_of_difference_from_identity() {
    let m = ResidueMatrix::from_i64(p(3), 3, 2, &[1, 9, 0, 1]).unwrap();
    let id = ResidueMatrix::identity(p(3), 3, 2);
    assert_eq!(matrix_norm_bound(&m.sub(&id).unwrap()), r(1, 9));
    assert_eq!(matrix_norm_bound(&id.sub(&id).unwrap()), r(1, 27));
}

#[test]
fn comparison_needs_a_plane_group() {
    let d = Descriptor::new(KappaLabel::Plus, p(3));
    assert!(compare_for(d, 1, &Budget::default()).is_err());
    let c = compare_for(Descriptor::new(KappaLabel::Up, p(5)), 2, &Budget::default()).unwrap();
    assert!(c.equal);
    assert_eq!(c.counting_value, "1/50");
}

proptest! {
    #[test]
    fn change_of_variables_at_random_points(num in -500i64..500, e in 0u32..4, pi in 0usize..3, li in 0usize..3) {
        prop_assume!(num != 0);
        let pr = [3u64, 5, 7][pi];
        let tau = r(num, (pr as i64).pow(e));
        prop_assert!(change_of_variables_holds(KappaLabel::BINARY[li], p(pr), &tau).unwrap());
    }
}
