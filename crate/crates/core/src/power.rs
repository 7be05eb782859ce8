//! Closed-form range of output concurrence for a gate acting on pure states of
//! fixed input concurrence, free local unitaries allowed.
//!
//! Every gate class acts through a single effective angle `theta` in
//! `[0, pi/2]`: the reachable output concurrences from input `c0` are
//! `cos(arccos c0 ± theta)`, clipped to `[0, 1]`. Gates satisfying
//! `a1 + a2 >= pi/4` and `a2 + |a3| <= pi/4` saturate at `theta = pi/2` and
//! map any input to any output.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::canonical::{eigen_phases, WeylCoordinates};
use crate::error::{Error, Result};

/// Slack on the saturation inequalities and reachability comparisons.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Effective angles closer than this compare equal.
pub const ORDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerInterval {
    pub c_min: f64,
    pub c_max: f64,
}

impl PowerInterval {
    pub fn contains(&self, c: f64, tol: f64) -> bool {
        c >= self.c_min - tol && c <= self.c_max + tol
    }

    pub fn width(&self) -> f64 {
        self.c_max - self.c_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GateOrdering {
    Less,
    Equal,
    Greater,
}

impl GateOrdering {
    pub fn reverse(self) -> Self {
        match self {
            Self::Less => Self::Greater,
            Self::Equal => Self::Equal,
            Self::Greater => Self::Less,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Less => "<",
            Self::Equal => "=",
            Self::Greater => ">",
        }
    }
}

impl From<Ordering> for GateOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Self::Less,
            Ordering::Equal => Self::Equal,
            Ordering::Greater => Self::Greater,
        }
    }
}

pub fn saturation_condition(w: &WeylCoordinates) -> bool {
    let [a1, a2, a3] = w.alpha;
    a1 + a2 >= FRAC_PI_4 - BOUNDARY_TOL && a2 + a3.abs() <= FRAC_PI_4 + BOUNDARY_TOL
}

pub fn effective_angle(w: &WeylCoordinates) -> f64 {
    let [a1, a2, a3] = w.alpha;
    let theta = if saturation_condition(w) {
        FRAC_PI_2
    } else if a1 + a2 < FRAC_PI_4 {
        2.0 * (a1 + a2)
    } else {
        2.0 * (FRAC_PI_2 - a2 - a3.abs())
    };
    theta.clamp(0.0, FRAC_PI_2)
}

/// Accepts `c0` in `[0, 1]`, clamping values within 1e-12 outside.
pub(crate) fn validate_c0(c0: f64) -> Result<f64> {
    if (-BOUNDARY_TOL..=1.0 + BOUNDARY_TOL).contains(&c0) {
        Ok(c0.clamp(0.0, 1.0))
    } else {
        Err(Error::Domain {
            name: "c0",
            value: c0,
        })
    }
}

fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

pub fn power_interval(w: &WeylCoordinates, c0: f64) -> Result<PowerInterval> {
    let c0 = validate_c0(c0)?;
    let theta = effective_angle(w);
    let angle = acos_clamped(c0);
    let c_max = (angle - theta).max(0.0).cos();
    // cos(pi/2) is 6e-17 in floating point; the clipped branch is exactly zero
    let c_min = if angle + theta >= FRAC_PI_2 {
        0.0
    } else {
        (angle + theta).cos()
    };
    Ok(PowerInterval {
        c_min: c_min.clamp(0.0, 1.0),
        c_max: c_max.clamp(0.0, 1.0),
    })
}

/// Signed differences lambda_j - lambda_k over ordered pairs j != k, with the
/// third coordinate taken as |a3|.
fn phase_differences(w: &WeylCoordinates) -> impl Iterator<Item = f64> {
    let l = eigen_phases(&w.with_abs_third()).lambda;
    (0..4).flat_map(move |j| (0..4).filter(move |&k| k != j).map(move |k| l[j] - l[k]))
}

/// Largest output concurrence from a product input.
pub fn c0_max(w: &WeylCoordinates) -> f64 {
    if saturation_condition(w) {
        return 1.0;
    }
    phase_differences(w)
        .map(|d| d.sin().abs())
        .fold(0.0, f64::max)
}

/// Smallest output concurrence from a maximally entangled input.
pub fn c1_min(w: &WeylCoordinates) -> f64 {
    if saturation_condition(w) {
        return 0.0;
    }
    phase_differences(w)
        .map(|d| d.cos().abs())
        .fold(1.0, f64::min)
}

pub fn can_reach_max(w: &WeylCoordinates, c0: f64) -> Result<bool> {
    let c0 = validate_c0(c0)?;
    Ok(c0 >= c1_min(w) - BOUNDARY_TOL)
}

pub fn can_reach_zero(w: &WeylCoordinates, c0: f64) -> Result<bool> {
    let c0 = validate_c0(c0)?;
    Ok(c0 <= c0_max(w) + BOUNDARY_TOL)
}

/// max over pairs of |cos(arccos c0 + (lambda_j - lambda_k))|; the largest
/// reachable output when the output cannot reach 1.
pub fn pairwise_c_max(w: &WeylCoordinates, c0: f64) -> Result<f64> {
    let angle = acos_clamped(validate_c0(c0)?);
    Ok(phase_differences(w)
        .map(|d| (angle + d).cos().abs())
        .fold(0.0, f64::max))
}

/// min over pairs of |cos(arccos c0 + (lambda_j - lambda_k))|; the smallest
/// reachable output when the output cannot reach 0.
pub fn pairwise_c_min(w: &WeylCoordinates, c0: f64) -> Result<f64> {
    let angle = acos_clamped(validate_c0(c0)?);
    Ok(phase_differences(w)
        .map(|d| (angle + d).cos().abs())
        .fold(1.0, f64::min))
}

/// Orders gates by nesting of their reachable intervals, which reduces to
/// comparing effective angles.
pub fn compare_gates(a: &WeylCoordinates, b: &WeylCoordinates) -> GateOrdering {
    let (ta, tb) = (effective_angle(a), effective_angle(b));
    if (ta - tb).abs() <= ORDER_TOL {
        GateOrdering::Equal
    } else {
        ta.total_cmp(&tb).into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    const SQRT_SWAP: WeylCoordinates = WeylCoordinates::new(FRAC_PI_8, FRAC_PI_8, FRAC_PI_8);
    const EIGHTH: WeylCoordinates = WeylCoordinates::new(FRAC_PI_8, 0.0, 0.0);

    #[test]
    fn saturation_examples() {
        assert!(saturation_condition(&WeylCoordinates::CNOT));
        assert!(!saturation_condition(&WeylCoordinates::IDENTITY));
        assert!(!saturation_condition(&WeylCoordinates::SWAP));
        assert!(saturation_condition(&SQRT_SWAP));
        assert!(saturation_condition(&WeylCoordinates::ISWAP));
    }

    #[test]
    fn saturation_uses_abs_third() {
        let w = WeylCoordinates::new(0.7, 0.5, -0.4);
        assert_eq!(
            saturation_condition(&w),
            saturation_condition(&w.with_abs_third())
        );
        assert!(!saturation_condition(&w));
    }

    #[test]
    fn effective_angle_examples() {
        assert_eq!(effective_angle(&WeylCoordinates::CNOT), FRAC_PI_2);
        assert!((effective_angle(&EIGHTH) - FRAC_PI_4).abs() < 1e-15);
        assert!(effective_angle(&WeylCoordinates::SWAP).abs() < 1e-15);
        assert_eq!(effective_angle(&WeylCoordinates::IDENTITY), 0.0);
    }

    #[test]
    fn interval_examples() {
        for k in 0..=10 {
            let c0 = k as f64 / 10.0;
            let p = power_interval(&WeylCoordinates::CNOT, c0).unwrap();
            assert_eq!((p.c_min, p.c_max), (0.0, 1.0));
        }
        let p = power_interval(&WeylCoordinates::SWAP, 0.5).unwrap();
        assert!((p.c_min - 0.5).abs() < 1e-12 && (p.c_max - 0.5).abs() < 1e-12);

        let p = power_interval(&EIGHTH, 0.6).unwrap();
        assert!((p.c_max - 0.989_949_493_661_166_5).abs() < 1e-12);
        assert_eq!(p.c_min, 0.0);

        let p = power_interval(&EIGHTH, 0.0).unwrap();
        assert_eq!(p.c_min, 0.0);
        assert!((p.c_max - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn interval_domain() {
        assert!(power_interval(&EIGHTH, 1.0 + 1e-13).is_ok());
        assert!(power_interval(&EIGHTH, -1e-13).is_ok());
        assert!(matches!(
            power_interval(&EIGHTH, 1.1),
            Err(Error::Domain { .. })
        ));
        assert!(power_interval(&EIGHTH, f64::NAN).is_err());
    }

    #[test]
    fn c0_max_examples() {
        assert_eq!(c0_max(&WeylCoordinates::CNOT), 1.0);
        assert_eq!(c0_max(&WeylCoordinates::IDENTITY), 0.0);
        assert!((c0_max(&EIGHTH) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn c1_min_examples() {
        assert_eq!(c1_min(&WeylCoordinates::CNOT), 0.0);
        assert_eq!(c1_min(&WeylCoordinates::IDENTITY), 1.0);
        assert!((c1_min(&EIGHTH) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reachability_examples() {
        assert!(can_reach_max(&WeylCoordinates::CNOT, 0.0).unwrap());
        assert!(!can_reach_max(&WeylCoordinates::IDENTITY, 0.5).unwrap());
        assert!(can_reach_max(&EIGHTH, 0.8).unwrap());
        assert!(!can_reach_max(&EIGHTH, 0.6).unwrap());

        assert!(can_reach_zero(&WeylCoordinates::CNOT, 1.0).unwrap());
        assert!(!can_reach_zero(&WeylCoordinates::IDENTITY, 0.5).unwrap());
        assert!(can_reach_zero(&EIGHTH, 0.6).unwrap());
        assert!(!can_reach_zero(&EIGHTH, 0.8).unwrap());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(
            compare_gates(&WeylCoordinates::SWAP, &WeylCoordinates::CNOT),
            GateOrdering::Less
        );
        assert_eq!(
            compare_gates(&WeylCoordinates::CNOT, &SQRT_SWAP),
            GateOrdering::Equal
        );
        let w = WeylCoordinates::new(0.6, 0.4, 0.3);
        let adj = WeylCoordinates::new(0.6, 0.4, -0.3);
        assert_eq!(compare_gates(&w, &adj), GateOrdering::Equal);
        assert_eq!(
            compare_gates(&WeylCoordinates::CNOT, &WeylCoordinates::SWAP),
            GateOrdering::Greater
        );
    }

    #[test]
    fn swap_preserves_concurrence() {
        for k in 0..=20 {
            let c0 = k as f64 / 20.0;
            let p = power_interval(&WeylCoordinates::SWAP, c0).unwrap();
            assert!((p.c_min - c0).abs() < 1e-12 && (p.c_max - c0).abs() < 1e-12);
        }
    }
}
