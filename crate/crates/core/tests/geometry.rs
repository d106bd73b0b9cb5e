use fuchsian_core::geometry::{
    build_generators, involution_lift, lift_fixed_point, parabolic, relation_product_exact, stabilizer_constants,
    stabilizer_constants_exact, MoebiusMatrix,
};
use proptest::prelude::*;
use rug::{Float, Rational};

const P: u32 = 256;

/// Width of the cusp `a/b` in Γ₁(N): least `b²h` with the stabilizer `±[[1−abh, a²h], [−b²h, 1+abh]]` in Γ₁(N).
fn congruence_width(a: i64, b: i64, n: i64) -> i64 {
    let member = |m: [i64; 4]| m[2].rem_euclid(n) == 0 && m[0].rem_euclid(n) == 1 && m[3].rem_euclid(n) == 1;
    let h = (1..=n * n)
        .find(|&h| {
            let m = [1 - a * b * h, a * a * h, -b * b * h, 1 + a * b * h];
            member(m) || member(m.map(|x| -x))
        })
        .expect("the principal congruence subgroup bounds the width");
    b * b * h
}

#[test]
fn gamma1_5_cusp_widths_match_the_congruence_oracle() {
    let d = stabilizer_constants_exact(&Rational::from((1, 3)), &Rational::from((2, 5))).unwrap();
    let oracle = [congruence_width(0, 1, 5), congruence_width(1, 3, 5), congruence_width(2, 5, 5)];
    assert_eq!(oracle, [5, 45, 25]);
    for (x, y) in d.iter().zip(oracle) {
        assert_eq!(*x, y);
    }
    let id = [Rational::from(1), Rational::new(), Rational::new(), Rational::from(1)];
    assert_eq!(relation_product_exact(&Rational::from((1, 3)), &Rational::from((2, 5))).unwrap(), id);
}

#[test]
fn theta_group_cusps_at_the_anchor() {
    // (c₁, c₂) = (1/4, 1/2) is the α = 2 configuration
    let d = stabilizer_constants_exact(&Rational::from((1, 4)), &Rational::from((1, 2))).unwrap();
    assert_eq!(d, [Rational::from(8), Rational::from(16), Rational::from(8)]);
}

#[test]
fn involution_lift_conjugates_inverse_translation_to_the_stabilizer() {
    let c = Float::with_val(P, 0.3);
    let d = Float::with_val(P, 7.5);
    let w = involution_lift(&c, &d);
    assert!(w.trace().log2_abs() < -240.0);
    assert!(w.mul(&w).log2_dist(&MoebiusMatrix::identity(P).neg()) < -240.0);
    let t = MoebiusMatrix::translation(P);
    let conj = w.mul(&t.inverse()).mul(&w.inverse());
    assert!(conj.log2_dist_projective(&parabolic(&c, &d)) < -230.0);
    // the lift is an involution of ℍ fixing its stored fixed point
    let z = lift_fixed_point(&c, &d);
    assert!(z.im > 0);
    assert!((&w.apply(&z) - &z).log2_abs() < -230.0);
}

#[test]
fn out_of_order_cusps_are_rejected() {
    let a = Float::with_val(P, 0.6);
    let b = Float::with_val(P, 0.2);
    assert!(stabilizer_constants(&a, &b).is_err());
    assert!(stabilizer_constants_exact(&Rational::from((1, 2)), &Rational::from(1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relation_holds_exactly_for_rational_cusps(p1 in 1i64..50, p2 in 1i64..50, q in 3i64..60) {
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        prop_assume!(lo != hi && hi < q);
        let c1 = Rational::from((lo, q));
        let c2 = Rational::from((hi, q));
        let id = [Rational::from(1), Rational::new(), Rational::new(), Rational::from(1)];
        prop_assert_eq!(relation_product_exact(&c1, &c2).unwrap(), id);
    }

    #[test]
    fn floating_generators_are_parabolic_and_satisfy_the_relation(x in 0.01..0.98f64, gap in 0.01..0.5f64) {
        let c1 = Float::with_val(P, x);
        let c2 = Float::with_val(P, (x + gap).min(0.99));
        prop_assume!(c1 < c2);
        let d = stabilizer_constants(&c1, &c2).unwrap();
        let g = build_generators(&c1, &c2, &d).unwrap();
        for m in g.generators() {
            let tr = m.trace();
            let four = fuchsian_core::BigComplex::from_f64(P, 4.0, 0.0);
            prop_assert!((&(&tr * &tr) - &four).log2_abs() < -200.0);
            prop_assert!((&m.det() - &fuchsian_core::BigComplex::one(P)).log2_abs() < -200.0);
        }
    }
}
