//! Quadrature helpers for the sampled route.

use crate::scalar::{lit, Scalar};

/// Trapezoid rule on an inclusive uniform grid of `n >= 2` points.
pub fn trapezoid_uniform<T: Scalar, F: Fn(T) -> T>(lo: T, hi: T, n: usize, f: F) -> T {
    assert!(n >= 2, "trapezoid needs at least two points");
    let h = (hi - lo) / lit::<T>((n - 1) as f64);
    let mut acc = (f(lo) + f(hi)) / lit::<T>(2.0);
    for i in 1..n - 1 {
        acc += f(lo + h * lit::<T>(i as f64));
    }
    acc * h
}

/// Whole-line integral of a function decaying faster than `1/x^2`, via the
/// substitution `x = scale * tan(u)` and a uniform trapezoid in `u`.
///
/// The substitution compresses both tails onto `u = +-pi/2`, where the
/// transformed integrand `f(scale tan u) * scale / cos^2 u` vanishes by the
/// decay assumption; those endpoints are therefore not evaluated. For
/// integrands analytic on the real line the rule converges spectrally in `n`,
/// which lets one quadrature bridge rate ratios of several decades.
///
/// `scale` should sit near the geometric mean of the features' widths.
pub fn tan_substituted_integral<T: Scalar, F: Fn(T) -> T>(scale: T, n: usize, f: F) -> T {
    assert!(n >= 3, "tan-substituted rule needs interior points");
    let half_pi = T::PI() / lit::<T>(2.0);
    let h = T::PI() / lit::<T>((n - 1) as f64);
    let mut acc = T::zero();
    for i in 1..n - 1 {
        let u = -half_pi + h * lit::<T>(i as f64);
        let (s, c) = u.sin_cos();
        let x = scale * s / c;
        acc += f(x) * scale / (c * c);
    }
    acc * h
}

/// Rectangle-weight sum of uniformly spaced samples. Equals the trapezoid
/// value once the integrand has decayed below rounding at both ends.
pub fn rectangle_sum<T: Scalar>(samples: impl Iterator<Item = T>, step: T) -> T {
    let mut acc = T::zero();
    for s in samples {
        acc += s;
    }
    acc * step
}
