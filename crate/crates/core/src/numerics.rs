//! Small one-dimensional solvers used by the bounds and protocols.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (√5 − 1)/2

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))` once the bracket is narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Root of a continuous `f` with a sign change on `[lo, hi]`, to `tol` in `x`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!("no sign change on [{lo}, {hi}]")));
    }
    let neg_at_a = fa < 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// One classical fourth-order Runge–Kutta step of `y' = f(y)`.
pub fn rk4_step<F: Fn(f64) -> f64>(f: &F, y: f64, h: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * h * k1);
    let k3 = f(y + 0.5 * h * k2);
    let k4 = f(y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates the autonomous `y' = f(y)` from `y(0) = y0` to `t` with fixed
/// steps `h` and a final partial step.
pub fn rk4_integrate<F: Fn(f64) -> f64>(f: F, y0: f64, t: f64, h: f64) -> f64 {
    let full = (t / h).floor() as usize;
    let mut y = y0;
    for _ in 0..full {
        y = rk4_step(&f, y, h);
    }
    let rest = t - full as f64 * h;
    if rest > 0.0 {
        y = rk4_step(&f, y, rest);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 2.0, 1e-12);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(fx, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn rk4_exponential() {
        let y = rk4_integrate(|y| y, 1.0, 1.0, 1e-3);
        assert_abs_diff_eq!(y, std::f64::consts::E, epsilon = 1e-12);
        let y = rk4_integrate(|y| -2.0 * y, 1.0, 0.3005, 1e-3);
        assert_abs_diff_eq!(y, (-0.601f64).exp(), epsilon = 1e-12);
    }
}
