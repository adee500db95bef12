//! Torus conventions shared by every module.
//!
//! Wavenumbers live on 𝕋 = [-1/2, 1/2); the 2π-parametrization p = 2πk is
//! used wherever the collisional-constraint algebra is cleaner, with two
//! canonical windows: [0, 2π) for the unpinned (FPU) branch formulas and
//! (-π, π] for the pinned onsite ones. All reductions are modulo the full
//! period, so identities such as p₃ = p₀ + p₁ - p₂ hold exactly as circle
//! arithmetic regardless of window.

use crate::scalar::Real;

/// Reduce a wavenumber to the canonical window [-1/2, 1/2).
#[inline]
pub fn wrap_k<T: Real>(k: T) -> T {
    let half = T::of(0.5);
    let r = k - (k + half).floor();
    // floor can land on the right endpoint through cancellation
    if r >= half {
        r - T::one()
    } else {
        r
    }
}

/// Reduce an angle to [0, 2π).
#[inline]
pub fn wrap_p<T: Real>(p: T) -> T {
    let two_pi = T::two_pi();
    let r = p - two_pi * (p / two_pi).floor();
    if r >= two_pi || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// Reduce an angle to the symmetric window (-π, π].
#[inline]
pub fn wrap_p_sym<T: Real>(p: T) -> T {
    let two_pi = T::two_pi();
    let r = p - two_pi * ((p + T::pi()) / two_pi).floor();
    if r > T::pi() {
        r - two_pi
    } else if r <= -T::pi() {
        r + two_pi
    } else {
        r
    }
}

/// Convert a [0, 2π) angle to the pinned window (-π, π].
#[inline]
pub fn p_to_sym<T: Real>(p: T) -> T {
    if p > T::pi() {
        p - T::two_pi()
    } else {
        p
    }
}

/// Convert a (-π, π] angle to the FPU window [0, 2π).
#[inline]
pub fn p_from_sym<T: Real>(p: T) -> T {
    if p < T::zero() {
        p + T::two_pi()
    } else {
        p
    }
}

/// Distance on the angle circle: min over lifts of |a - b|, in [0, π].
#[inline]
pub fn circle_dist<T: Real>(a: T, b: T) -> T {
    let d = wrap_p(a - b);
    if d > T::pi() {
        T::two_pi() - d
    } else {
        d
    }
}

/// Sign with the convention sign(0) = +1 used by the pinned branch formula.
#[inline]
pub fn sign_pos<T: Real>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_k_window() {
        assert_eq!(wrap_k(0.5f64), -0.5);
        assert_eq!(wrap_k(-0.5f64), -0.5);
        assert_eq!(wrap_k(1.25f64), 0.25);
        assert!((wrap_k(-0.75f64) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wrap_p_window() {
        let two_pi = std::f64::consts::TAU;
        assert_eq!(wrap_p(two_pi), 0.0);
        assert!((wrap_p(-1.0f64) - (two_pi - 1.0)).abs() < 1e-15);
        assert!(wrap_p(two_pi - 1e-12) < two_pi);
    }

    #[test]
    fn symmetric_window_includes_pi_excludes_minus_pi() {
        let pi = std::f64::consts::PI;
        assert_eq!(wrap_p_sym(pi), pi);
        assert_eq!(wrap_p_sym(-pi), pi);
        assert!((wrap_p_sym(3.0 * pi) - pi).abs() < 1e-12);
    }

    #[test]
    fn window_conversions_are_mutual_inverses() {
        for i in 0..64 {
            let p = std::f64::consts::TAU * (i as f64) / 64.0;
            let s = p_to_sym(p);
            assert!(s > -std::f64::consts::PI && s <= std::f64::consts::PI);
            assert!((p_from_sym(s) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_distance_is_symmetric_and_small_across_the_seam() {
        let eps = 1e-3f64;
        let d = circle_dist(eps, std::f64::consts::TAU - eps);
        assert!((d - 2.0 * eps).abs() < 1e-12);
        assert_eq!(circle_dist(1.0f64, 2.5), circle_dist(2.5f64, 1.0));
    }

    #[test]
    fn sign_convention_at_zero() {
        assert_eq!(sign_pos(0.0f64), 1.0);
        assert_eq!(sign_pos(-0.0f64), 1.0);
        assert_eq!(sign_pos(-1e-300f64), -1.0);
    }
}
