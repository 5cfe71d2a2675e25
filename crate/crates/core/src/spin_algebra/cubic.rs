//! Real roots of a monic cubic with three real roots.

use crate::real::Real;

/// Outcome of the trigonometric solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CubicRoots<T> {
    /// Three ascending real roots.
    Distinct([T; 3]),
    /// The scaled discriminant is within `1e-13` of zero: two or more roots
    /// (nearly) coincide and the trigonometric formula loses accuracy.
    NearDegenerate,
}

/// Value of `x³ + a2·x² + a1·x + a0`.
#[inline]
pub fn eval_monic<T: Real>(a2: T, a1: T, a0: T, x: T) -> T {
    ((x + a2) * x + a1) * x + a0
}

/// Roots of `x³ + a2·x² + a1·x + a0 = 0` by the depressed-cubic
/// trigonometric method. The polynomial must have three real roots (the
/// characteristic polynomial of a Hermitian matrix, for instance).
pub fn real_roots_trig<T: Real>(a2: T, a1: T, a0: T) -> CubicRoots<T> {
    let three = T::lit(3.0);
    let shift = a2 / three;
    let p = a1 - a2 * a2 / three;
    let q = T::lit(2.0) * a2 * a2 * a2 / T::lit(27.0) - a2 * a1 / three + a0;

    let scale = a2
        .abs()
        .max(a1.abs().sqrt())
        .max(a0.abs().cbrt())
        .max(T::min_positive_value());
    let disc = -(T::lit(4.0) * p * p * p + T::lit(27.0) * q * q);
    let scale6 = scale.powi(6);
    if p >= T::zero() || disc / scale6 < T::tol(1e-13) {
        return CubicRoots::NearDegenerate;
    }

    let r = T::lit(2.0) * (-p / three).sqrt();
    let arg = (three * q / (T::lit(2.0) * p) * (-three / p).sqrt())
        .max(-T::one())
        .min(T::one());
    let phi = arg.acos() / three;
    let step = T::lit(2.0) * T::PI() / three;
    let mut roots = [T::zero(); 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let x = r * (phi - step * T::lit(k as f64)).cos() - shift;
        *root = polish(a2, a1, a0, x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    CubicRoots::Distinct(roots)
}

/// One guarded Newton step.
fn polish<T: Real>(a2: T, a1: T, a0: T, x: T) -> T {
    let f = eval_monic(a2, a1, a0, x);
    let df = (T::lit(3.0) * x + T::lit(2.0) * a2) * x + a1;
    if df == T::zero() {
        return x;
    }
    let xn = x - f / df;
    if eval_monic(a2, a1, a0, xn).abs() <= f.abs() {
        xn
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots_of(r: [f64; 3]) -> (f64, f64, f64) {
        let a2 = -(r[0] + r[1] + r[2]);
        let a1 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        let a0 = -r[0] * r[1] * r[2];
        (a2, a1, a0)
    }

    #[test]
    fn recovers_known_roots() {
        let (a2, a1, a0) = roots_of([-1.5, 0.25, 3.0]);
        match real_roots_trig(a2, a1, a0) {
            CubicRoots::Distinct(r) => {
                for (a, b) in r.iter().zip([-1.5, 0.25, 3.0]) {
                    assert!((a - b).abs() < 1e-13, "{a} vs {b}");
                }
            }
            CubicRoots::NearDegenerate => panic!("distinct roots flagged degenerate"),
        }
    }

    #[test]
    fn double_root_is_flagged() {
        // λ(λ - 1)²
        let (a2, a1, a0) = roots_of([0.0, 1.0, 1.0]);
        assert_eq!(real_roots_trig(a2, a1, a0), CubicRoots::NearDegenerate);
    }
}
