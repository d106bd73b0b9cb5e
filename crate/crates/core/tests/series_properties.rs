use fuchsian_core::linalg::least_squares;
use fuchsian_core::{BigComplex, Derivative, PowerSeries, Var};
use proptest::prelude::*;

const P: u32 = 160;
const ORDER: usize = 12;
/// Coefficients are O(1) and products stay below 2^20, so 2^-120 absorbs rounding.
const TOL: f64 = -120.0;

fn series(re: Vec<f64>, im: Vec<f64>) -> PowerSeries {
    let coeffs = re.iter().zip(&im).map(|(&a, &b)| BigComplex::from_f64(P, a, b)).collect();
    PowerSeries::new(coeffs, Var::SmallQ)
}

fn arb_series() -> impl Strategy<Value = PowerSeries> {
    (prop::collection::vec(-2.0..2.0f64, ORDER + 1), prop::collection::vec(-2.0..2.0f64, ORDER + 1))
        .prop_map(|(re, im)| series(re, im))
}

/// Unit constant term, so the series is invertible.
fn arb_unit() -> impl Strategy<Value = PowerSeries> {
    arb_series().prop_map(|s| {
        let mut c = s.into_coeffs();
        c[0] = BigComplex::from_f64(P, 1.0, 0.25);
        PowerSeries::new(c, Var::SmallQ)
    })
}

/// Zero constant term and unit linear term, so the series is revertible.
fn arb_tangent() -> impl Strategy<Value = PowerSeries> {
    arb_series().prop_map(|s| {
        let mut c = s.into_coeffs();
        c[0] = BigComplex::zero(P);
        c[1] = BigComplex::one(P);
        PowerSeries::new(c, Var::SmallQ)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_is_commutative_and_associative(a in arb_series(), b in arb_series(), c in arb_series()) {
        prop_assert!(a.mul(&b).unwrap().max_log2_diff(&b.mul(&a).unwrap()) < TOL);
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(l.max_log2_diff(&r) < TOL);
    }

    #[test]
    fn multiplication_distributes(a in arb_series(), b in arb_series(), c in arb_series()) {
        let l = a.mul(&b.add(&c).unwrap()).unwrap();
        let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(l.max_log2_diff(&r) < TOL);
    }

    #[test]
    fn division_inverts_multiplication(a in arb_series(), u in arb_unit()) {
        let back = a.mul(&u).unwrap().div(&u).unwrap();
        prop_assert!(back.max_log2_diff(&a) < -100.0);
    }

    #[test]
    fn theta_is_a_derivation(a in arb_series(), b in arb_series()) {
        let th = Derivative::Theta;
        let l = a.mul(&b).unwrap().derive(th);
        let r = a.derive(th).mul(&b).unwrap().add(&a.mul(&b.derive(th)).unwrap()).unwrap();
        prop_assert!(l.max_log2_diff(&r) < TOL);
    }

    #[test]
    fn reversion_is_a_compositional_inverse(s in arb_tangent()) {
        let inv = s.revert().unwrap();
        let id = PowerSeries::identity(ORDER, Var::SmallQ, P);
        // coefficients of the inverse grow like ~4ⁿ, so the bound is relative to that scale
        prop_assert!(PowerSeries::compose(&s, &inv).unwrap().max_log2_diff(&id) < -90.0);
        prop_assert!(PowerSeries::compose(&inv, &s).unwrap().max_log2_diff(&id) < -90.0);
    }

    #[test]
    fn exp_turns_sums_into_products(a in arb_tangent(), b in arb_tangent()) {
        let l = a.add(&b).unwrap().exp_series();
        let r = a.exp_series().mul(&b.exp_series()).unwrap();
        prop_assert!(l.max_log2_diff(&r) < -100.0);
    }

    #[test]
    fn least_squares_recovers_consistent_systems(
        entries in prop::collection::vec(-1.0..1.0f64, 8 * 3),
        x in prop::collection::vec(-3.0..3.0f64, 3),
    ) {
        // diagonal boost keeps the system well conditioned
        let a: Vec<Vec<BigComplex>> = (0..8)
            .map(|i| (0..3).map(|j| {
                let boost = if i == j { 4.0 } else { 0.0 };
                BigComplex::from_f64(P, entries[3 * i + j] + boost, 0.5 * entries[(3 * i + j + 5) % 24])
            }).collect())
            .collect();
        let xs: Vec<BigComplex> = x.iter().map(|&v| BigComplex::from_f64(P, v, -v / 3.0)).collect();
        let b: Vec<BigComplex> = a.iter().map(|row| {
            row.iter().zip(&xs).fold(BigComplex::zero(P), |s, (aij, xj)| &s + &(aij * xj))
        }).collect();
        let ls = least_squares(&a, &b, -100.0);
        prop_assert_eq!(ls.rank, 3);
        for (got, want) in ls.x.iter().zip(&xs) {
            prop_assert!((got - want).log2_abs() < -120.0);
        }
        prop_assert!(ls.residual_norm.to_f64() < 1e-36);
    }
}

#[test]
fn mismatched_variables_do_not_mix() {
    let a = PowerSeries::one(4, Var::T, P);
    let b = PowerSeries::one(4, Var::SmallQ, P);
    assert!(a.add(&b).is_err());
    assert!(a.mul(&b).is_err());
}
