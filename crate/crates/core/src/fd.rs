//! Central finite differences with one level of Richardson extrapolation.
//!
//! The default step is h = 1e-4 * (1 + |x|); Richardson brings a plain
//! central difference from O(h^2) to O(h^4), which second-derivative
//! consumers (curvature, the TM oracle) need.

use nalgebra::DVector;

/// Default step scale for coordinate derivatives.
pub fn step(coord_scale: f64) -> f64 {
    1e-4 * (1.0 + coord_scale.abs())
}

/// Central difference of a scalar function of one real variable.
pub fn deriv_scalar(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Partial derivative along axis `axis` of a vector-valued function of coordinates.
pub fn partial_vec(
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    axis: usize,
    h: f64,
) -> DVector<f64> {
    let d = |h: f64| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[axis] += h;
        xm[axis] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (d2 * 4.0 - d1) / 3.0
}

/// Partial derivative along axis `axis` of a scalar function of coordinates.
pub fn partial_scalar(
    f: impl Fn(&DVector<f64>) -> f64,
    x: &DVector<f64>,
    axis: usize,
    h: f64,
) -> f64 {
    let d = |h: f64| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[axis] += h;
        xm[axis] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    };
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_hits_fourth_order() {
        let f = |x: f64| x.sin();
        let d = deriv_scalar(f, 0.7, 1e-3);
        assert!((d - 0.7f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn partial_of_quadratic() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let g = partial_scalar(|x| x[0] * x[0] * x[1], &x, 0, step(2.0));
        assert!((g - 4.0).abs() < 1e-10);
    }
}
