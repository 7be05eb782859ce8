use std::f64::consts::FRAC_PI_4;

use entpower::power::{
    c0_max, c1_min, can_reach_max, can_reach_zero, compare_gates, effective_angle, pairwise_c_max,
    pairwise_c_min, power_interval, saturation_condition, GateOrdering,
};
use entpower::WeylCoordinates;
use proptest::prelude::*;

fn chamber_point() -> impl Strategy<Value = WeylCoordinates> {
    (0.0..=FRAC_PI_4, 0.0..=1.0f64, -1.0..=1.0f64).prop_map(|(a1, s2, s3)| {
        let a2 = a1 * s2;
        WeylCoordinates::new(a1, a2, a2 * s3)
    })
}

fn grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 * 0.05).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn interval_contains_c0_and_is_monotone(w in chamber_point()) {
        let mut prev: Option<(f64, f64)> = None;
        for c0 in grid() {
            let p = power_interval(&w, c0).unwrap();
            prop_assert!(0.0 <= p.c_min && p.c_min <= p.c_max && p.c_max <= 1.0);
            prop_assert!(p.c_min <= c0 + 1e-12 && c0 <= p.c_max + 1e-12);
            if let Some((lo, hi)) = prev {
                prop_assert!(p.c_min >= lo - 1e-12);
                prop_assert!(p.c_max >= hi - 1e-12);
            }
            prev = Some((p.c_min, p.c_max));
        }
    }

    #[test]
    fn endpoint_formulas_agree_with_unified_form(w in chamber_point()) {
        prop_assert!((c0_max(&w) - power_interval(&w, 0.0).unwrap().c_max).abs() <= 1e-12);
        prop_assert!((c1_min(&w) - power_interval(&w, 1.0).unwrap().c_min).abs() <= 1e-12);
    }

    #[test]
    fn pairwise_formulas_agree_off_saturation(w in chamber_point(), c0 in 0.0..=1.0f64) {
        prop_assume!(!saturation_condition(&w));
        let p = power_interval(&w, c0).unwrap();
        if !can_reach_max(&w, c0).unwrap() {
            prop_assert!((pairwise_c_max(&w, c0).unwrap() - p.c_max).abs() <= 1e-12);
        }
        if !can_reach_zero(&w, c0).unwrap() {
            prop_assert!((pairwise_c_min(&w, c0).unwrap() - p.c_min).abs() <= 1e-12);
        }
    }

    #[test]
    fn intervals_nest_in_a_fixed_direction(a in chamber_point(), b in chamber_point()) {
        let mut direction = 0i8;
        for c0 in grid() {
            let pa = power_interval(&a, c0).unwrap();
            let pb = power_interval(&b, c0).unwrap();
            let a_in_b = pa.c_min >= pb.c_min - 1e-12 && pa.c_max <= pb.c_max + 1e-12;
            let b_in_a = pb.c_min >= pa.c_min - 1e-12 && pb.c_max <= pa.c_max + 1e-12;
            prop_assert!(a_in_b || b_in_a);
            let strict = if a_in_b && !b_in_a { -1 } else if b_in_a && !a_in_b { 1 } else { 0 };
            if strict != 0 {
                prop_assert!(direction == 0 || direction == strict);
                direction = strict;
            }
        }
        let expected = match direction { -1 => GateOrdering::Less, 1 => GateOrdering::Greater, _ => GateOrdering::Equal };
        if direction != 0 {
            prop_assert_eq!(compare_gates(&a, &b), expected);
        }
    }

    #[test]
    fn order_is_antisymmetric_and_transitive(a in chamber_point(), b in chamber_point(), c in chamber_point()) {
        prop_assert_eq!(compare_gates(&a, &b), compare_gates(&b, &a).reverse());
        let ab = compare_gates(&a, &b);
        let bc = compare_gates(&b, &c);
        if ab == bc && ab != GateOrdering::Equal {
            prop_assert_eq!(compare_gates(&a, &c), ab);
        }
        prop_assert_ne!(compare_gates(&WeylCoordinates::SWAP, &a), GateOrdering::Greater);
    }

    #[test]
    fn equal_gates_share_intervals(a in chamber_point()) {
        let b = WeylCoordinates::new(a.alpha[0], a.alpha[1], -a.alpha[2]);
        prop_assert_eq!(compare_gates(&a, &b), GateOrdering::Equal);
        for c0 in grid() {
            prop_assert_eq!(power_interval(&a, c0).unwrap(), power_interval(&b, c0).unwrap());
        }
    }

    #[test]
    fn effective_angle_in_range(w in chamber_point()) {
        let t = effective_angle(&w);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&t));
    }
}
