//! One-dimensional quadrature, interpolation and orthogonal polynomials.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess followed by Newton on P_n.
        let k = (i + 1) as f64;
        let mut z = ((k - 0.25) / (nf + 0.5) * PI).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Legendre polynomial `P_n(z)` and its derivative.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

/// Chebyshev-Gauss-Radau points on `(0, 1]`, starting at `r = 1` and
/// decreasing towards the origin without reaching it.
pub fn chebyshev_radau_unit(n: usize) -> Vec<f64> {
    assert!(n > 0, "need at least one radial node");
    let m = (2 * n - 1) as f64;
    (0..n)
        .map(|i| 0.5 * (1.0 + (2.0 * PI * i as f64 / m).cos()))
        .collect()
}

/// Barycentric Lagrange interpolation on a fixed set of nodes.
#[derive(Debug, Clone)]
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Barycentric {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let mut weights = vec![1.0; n];
        for j in 0..n {
            for k in 0..n {
                if k != j {
                    weights[j] /= 2.0 * (nodes[j] - nodes[k]);
                }
            }
        }
        let scale = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for w in &mut weights {
            *w /= scale;
        }
        Self {
            nodes: nodes.to_vec(),
            weights,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cardinal function values `L_j(t)` for all nodes `j`.
    pub fn cardinals(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        if let Some(j) = self.nodes.iter().position(|&x| x == t) {
            out[j] = 1.0;
            return out;
        }
        let mut sum = 0.0;
        for j in 0..n {
            let v = self.weights[j] / (t - self.nodes[j]);
            out[j] = v;
            sum += v;
        }
        for v in &mut out {
            *v /= sum;
        }
        out
    }

    /// Interpolates nodal values at `t`.
    pub fn eval(&self, values: &[f64], t: f64) -> f64 {
        self.cardinals(t)
            .iter()
            .zip(values)
            .map(|(l, v)| l * v)
            .sum()
    }

    /// Differentiation matrix `D[i][j] = L_j'(x_i)`, row-major.
    pub fn diff_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let v = (self.weights[j] / self.weights[i]) / (self.nodes[i] - self.nodes[j]);
                    d[i][j] = v;
                    diag -= v;
                }
            }
            d[i][i] = diag;
        }
        d
    }

    /// Interpolation matrix from the nodes to `targets`, row-major.
    pub fn interp_matrix(&self, targets: &[f64]) -> Vec<Vec<f64>> {
        targets.iter().map(|&t| self.cardinals(t)).collect()
    }
}

/// Jacobi polynomials `P_p^{(a,b)}(x)` for `p = 0..=pmax`.
pub fn jacobi(pmax: usize, a: f64, b: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(pmax + 1);
    out.push(1.0);
    if pmax == 0 {
        return out;
    }
    out.push(0.5 * (a - b) + 0.5 * (a + b + 2.0) * x);
    for n in 2..=pmax {
        let nf = n as f64;
        let c = 2.0 * nf + a + b;
        let a1 = 2.0 * nf * (nf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * c;
        let next = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1;
        out.push(next);
    }
    out
}

/// Jacobi polynomials and their derivatives with respect to `x`.
pub fn jacobi_with_derivative(pmax: usize, a: f64, b: f64, x: f64) -> (Vec<f64>, Vec<f64>) {
    let vals = jacobi(pmax, a, b, x);
    let mut ders = vec![0.0; pmax + 1];
    if pmax > 0 {
        let shifted = jacobi(pmax - 1, a + 1.0, b + 1.0, x);
        for p in 1..=pmax {
            ders[p] = 0.5 * (p as f64 + a + b + 1.0) * shifted[p - 1];
        }
    }
    (vals, ders)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 17, 64] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg} {q} {exact}");
            }
        }
    }

    #[test]
    fn radau_points_include_one_and_avoid_zero() {
        let r = chebyshev_radau_unit(9);
        assert_eq!(r[0], 1.0);
        assert!(r.iter().all(|&t| t > 0.0 && t <= 1.0));
        assert!(r.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn barycentric_differentiates_polynomials() {
        let nodes = chebyshev_radau_unit(12);
        let bary = Barycentric::new(&nodes);
        let f = |t: f64| 3.0 * t.powi(11) - t.powi(4) + 0.5;
        let df = |t: f64| 33.0 * t.powi(10) - 4.0 * t.powi(3);
        let vals: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
        let d = bary.diff_matrix();
        for (i, &t) in nodes.iter().enumerate() {
            let dv: f64 = d[i].iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((dv - df(t)).abs() < 1e-10);
        }
        assert!((bary.eval(&vals, 0.123) - f(0.123)).abs() < 1e-13);
    }

    #[test]
    fn jacobi_matches_closed_forms() {
        // P_2^{(a,b)} from the explicit hypergeometric expression.
        let (a, b, x) = (2.0, 5.0, 0.3);
        let p = jacobi(2, a, b, x);
        let exact = (a + 1.0) * (a + 2.0) / 2.0
            + (a + 2.0) * (a + b + 3.0) / 2.0 * (x - 1.0)
            + (a + b + 3.0) * (a + b + 4.0) / 8.0 * (x - 1.0).powi(2);
        assert!((p[2] - exact).abs() < 1e-13);
        let (v, d) = jacobi_with_derivative(6, a, b, x);
        let h = 1e-6;
        let vp = jacobi(6, a, b, x + h);
        let vm = jacobi(6, a, b, x - h);
        for k in 0..=6 {
            assert!((d[k] - (vp[k] - vm[k]) / (2.0 * h)).abs() < 1e-6 * (1.0 + v[k].abs()));
        }
    }
}
