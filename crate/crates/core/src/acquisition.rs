//! Modified expected improvement (MEI) and its feasibility-weighted
//! variant (CMEI).

use crate::math::{normal_cdf, normal_pdf};

/// Below this standard deviation MEI takes its zero-variance limit.
pub const SD_FLOOR: f64 = 1e-12;

/// Expected improvement of a prediction `(z_star, s_star)` over the
/// incumbent prediction `z_min` (minimization).
pub fn mei(z_min: f64, z_star: f64, s_star: f64) -> f64 {
    let diff = z_min - z_star;
    if !(s_star >= SD_FLOOR) {
        return diff.max(0.0);
    }
    let u = diff / s_star;
    (diff * normal_cdf(u) + s_star * normal_pdf(u)).max(0.0)
}

/// MEI weighted by the probability of feasibility.
#[inline]
pub fn cmei(mei_value: f64, pf: f64) -> f64 {
    mei_value * pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mei_examples() {
        assert_eq!(mei(1.0, 1.0, 0.0), 0.0);
        assert_eq!(mei(1.0, 2.0, 0.0), 0.0);
        assert!((mei(0.3, 0.3, 1.0) - 0.398_942).abs() < 1e-6);
        assert!((mei(1.0, 0.0, 1e-9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cmei_examples() {
        assert_eq!(cmei(0.7, 0.0), 0.0);
        assert_eq!(cmei(0.7, 1.0), 0.7);
        assert!((cmei(0.4, 0.5) - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn mei_non_negative(a in -1e3f64..1e3, b in -1e3f64..1e3, s in 0.0f64..1e2) {
            prop_assert!(mei(a, b, s) >= 0.0);
        }

        #[test]
        fn mei_grows_with_uncertainty(z in -5.0f64..5.0, s1 in 0.0f64..3.0, ds in 0.0f64..3.0) {
            prop_assert!(mei(z, z, s1 + ds) >= mei(z, z, s1));
        }

        #[test]
        fn cmei_bounded_by_mei(a in -10.0f64..10.0, b in -10.0f64..10.0, s in 0.0f64..5.0, pf in 0.0f64..=1.0) {
            let m = mei(a, b, s);
            prop_assert!(cmei(m, pf) <= m);
            prop_assert_eq!(cmei(m, 0.0), 0.0);
        }
    }
}
