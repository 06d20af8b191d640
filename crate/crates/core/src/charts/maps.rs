//! Chart maps of the sphere and rotations onto the south pole.
//!
//! Points of `ℝⁿ` are stored as `[f64; 3]` with the unused third entry zero
//! when `n = 2`. The distinguished last variable `x_n` is entry `n - 1`.

use crate::error::{Error, Result};
use crate::spectral::Dim;

/// A square matrix acting on the first `n` entries of a point.
pub type Rot = [[f64; 3]; 3];

pub(crate) fn dot(n: usize, a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub(crate) fn norm(n: usize, a: [f64; 3]) -> f64 {
    dot(n, a, a).sqrt()
}

pub(crate) fn apply(m: &Rot, x: [f64; 3]) -> [f64; 3] {
    let mut o = [0.0; 3];
    for i in 0..3 {
        o[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
    }
    o
}

pub(crate) fn apply_t(m: &Rot, x: [f64; 3]) -> [f64; 3] {
    let mut o = [0.0; 3];
    for i in 0..3 {
        o[i] = m[0][i] * x[0] + m[1][i] * x[1] + m[2][i] * x[2];
    }
    o
}

pub(crate) fn mul(a: &Rot, b: &Rot) -> Rot {
    let mut o = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            o[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    o
}

pub(crate) fn transpose(a: &Rot) -> Rot {
    let mut o = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            o[i][j] = a[j][i];
        }
    }
    o
}

/// The south pole `p₀ = (0, …, 0, -1)`.
pub fn south_pole(dim: Dim) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[dim.n() - 1] = -1.0;
    p
}

/// `f(x) = (-x'/x_n, 1 - |x|)`, defined for `x_n < 0`.
pub fn chart_f(dim: Dim, x: [f64; 3]) -> Result<[f64; 3]> {
    let n = dim.n();
    let xn = x[n - 1];
    if !(xn < 0.0) {
        return Err(Error::Domain(format!("chart f needs x_n < 0, got {xn}")));
    }
    let mut y = [0.0; 3];
    for i in 0..n - 1 {
        y[i] = -x[i] / xn;
    }
    y[n - 1] = 1.0 - norm(n, x);
    Ok(y)
}

/// `g(y) = (1 - y_n)(1 + |y'|²)^{-1/2} (y', -1)`, defined for `y_n < 1`.
pub fn chart_g(dim: Dim, y: [f64; 3]) -> Result<[f64; 3]> {
    let n = dim.n();
    let yn = y[n - 1];
    if !(yn < 1.0) {
        return Err(Error::Domain(format!("chart g needs y_n < 1, got {yn}")));
    }
    let yy: f64 = (0..n - 1).map(|i| y[i] * y[i]).sum();
    let s = (1.0 - yn) / (1.0 + yy).sqrt();
    let mut x = [0.0; 3];
    for i in 0..n - 1 {
        x[i] = s * y[i];
    }
    x[n - 1] = -s;
    Ok(x)
}

/// A rotation `R` (determinant one) with `R p = p₀` for a unit vector `p`.
pub fn rotation_to_south(dim: Dim, p: [f64; 3]) -> Rot {
    match dim {
        Dim::Two => {
            let a = p[1].atan2(p[0]);
            let b = -std::f64::consts::FRAC_PI_2;
            let (s, c) = (b - a).sin_cos();
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        }
        Dim::Three => {
            // Rows (e, e × p, -p) with e ⟂ p form a positive orthonormal frame.
            let np = norm(3, p);
            let p = [p[0] / np, p[1] / np, p[2] / np];
            let axis = if p[0].abs() <= p[1].abs() && p[0].abs() <= p[2].abs() {
                [1.0, 0.0, 0.0]
            } else if p[1].abs() <= p[2].abs() {
                [0.0, 1.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            };
            let c = dot(3, axis, p);
            let mut e = [axis[0] - c * p[0], axis[1] - c * p[1], axis[2] - c * p[2]];
            let ne = norm(3, e);
            for v in e.iter_mut() {
                *v /= ne;
            }
            let f = [e[1] * p[2] - e[2] * p[1], e[2] * p[0] - e[0] * p[2], e[0] * p[1] - e[1] * p[0]];
            [e, f, [-p[0], -p[1], -p[2]]]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn south_pole_maps_to_origin() {
        for dim in [Dim::Two, Dim::Three] {
            let y = chart_f(dim, south_pole(dim)).unwrap();
            assert_eq!(y, [0.0; 3]);
        }
    }

    #[test]
    fn rotations_send_center_to_south_pole() {
        let pts = [[0.6, 0.0, 0.8], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [-0.48, 0.6, -0.64]];
        for p in pts {
            let r = rotation_to_south(Dim::Three, p);
            let q = apply(&r, p);
            assert!((q[0]).abs() < 1e-15 && (q[1]).abs() < 1e-15 && (q[2] + 1.0).abs() < 1e-15);
            let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
            assert!((det - 1.0).abs() < 1e-15);
            let rt = mul(&transpose(&r), &r);
            for i in 0..3 {
                for j in 0..3 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((rt[i][j] - id).abs() < 1e-15);
                }
            }
        }
        let r = rotation_to_south(Dim::Two, [0.6, 0.8, 0.0]);
        let q = apply(&r, [0.6, 0.8, 0.0]);
        assert!(q[0].abs() < 1e-15 && (q[1] + 1.0).abs() < 1e-15);
    }
}
