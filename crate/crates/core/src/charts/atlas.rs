//! Chart system of the sphere: centers, rotations, partition of unity and
//! transition maps.

use serde::Serialize;

use super::cutoff::{plateau, plateau_derivative, smooth_step};
use super::maps::{apply, apply_t, chart_f, chart_g, dot, mul, norm, rotation_to_south, transpose, Rot};
use crate::error::{Error, Result};
use crate::spectral::Dim;

/// Construction parameters of an [`Atlas`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtlasOptions {
    pub delta: f64,
    /// Largest allowed chord from a sphere point to its nearest center,
    /// in units of `δ`.
    pub cover_chord: f64,
    /// Radius of the bump of each chart, in units of `δ` (below `2`).
    pub bump_radius: f64,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            cover_chord: 1.4,
            bump_radius: 1.95,
        }
    }
}

/// Charts `K_j = B_{2δ}(p_j)` covering the annulus `1 - δ ≤ |x| ≤ 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Atlas {
    pub dim: Dim,
    pub delta: f64,
    pub bump_radius: f64,
    pub centers: Vec<[f64; 3]>,
    pub rotations: Vec<Rot>,
    /// Measured covering chord of the centers on a dense test set.
    pub measured_cover: f64,
    /// For each chart, the charts whose bump can overlap its bump.
    #[serde(skip)]
    neighbors: Vec<Vec<usize>>,
}

/// Block form `[[A, b], [c, d]]` of `R_ℓ R_jᵀ`, with `A` of size `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionBlocks {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: f64,
    pub m: usize,
}

impl TransitionBlocks {
    /// `λ = 1/d`.
    pub fn lambda(&self) -> f64 {
        1.0 / self.d
    }

    /// `B = A d - b ⊗ c`.
    pub fn b_matrix(&self) -> [[f64; 2]; 2] {
        let mut o = [[0.0; 2]; 2];
        for i in 0..self.m {
            for j in 0..self.m {
                o[i][j] = self.a[i][j] * self.d - self.b[i] * self.c[j];
            }
        }
        o
    }

    fn c_dot(&self, y: [f64; 2]) -> f64 {
        (0..self.m).map(|i| self.c[i] * y[i]).sum()
    }
}

fn mat2_apply(m: &[[f64; 2]; 2], k: usize, y: [f64; 2]) -> [f64; 2] {
    let mut o = [0.0; 2];
    for i in 0..k {
        o[i] = (0..k).map(|j| m[i][j] * y[j]).sum();
    }
    o
}

/// Solves the `k × k` system `m z = y` for `k ∈ {1, 2}`.
pub(crate) fn mat2_solve(m: &[[f64; 2]; 2], k: usize, y: [f64; 2]) -> Option<[f64; 2]> {
    if k == 1 {
        if m[0][0] == 0.0 {
            return None;
        }
        return Some([y[0] / m[0][0], 0.0]);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 {
        return None;
    }
    Some([
        (m[1][1] * y[0] - m[0][1] * y[1]) / det,
        (-m[1][0] * y[0] + m[0][0] * y[1]) / det,
    ])
}

/// Fibonacci points on `S²`.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

fn circle_points(count: usize, offset: f64) -> Vec<[f64; 3]> {
    (0..count)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * (i as f64 + offset) / count as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect()
}

fn covering_chord(n: usize, centers: &[[f64; 3]], tests: &[[f64; 3]]) -> f64 {
    tests
        .iter()
        .map(|x| {
            centers
                .iter()
                .map(|p| {
                    let d = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
                    norm(n, d)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

impl Atlas {
    /// Smallest Fibonacci (n = 3) or equispaced (n = 2) center set whose
    /// covering chord, measured on a dense test set and padded by the test
    /// spacing, is at most `cover_chord · δ`.
    pub fn new(dim: Dim, opts: AtlasOptions) -> Result<Self> {
        let delta = opts.delta;
        if !(delta > 0.0 && delta < 0.125) {
            return Err(Error::Parameter(format!("δ must lie in (0, 1/8), got {delta}")));
        }
        if !(opts.bump_radius < 2.0) {
            return Err(Error::Parameter("bump radius must stay inside K_j".into()));
        }
        let target = opts.cover_chord * delta;
        // The annulus 1 - 1.2δ ≤ |x| ≤ 1 + 0.2δ must lie in the union of bumps.
        let inner = 1.0 - 1.2 * delta;
        let rb = opts.bump_radius * delta;
        let needed = ((rb * rb - (1.2 * delta).powi(2)) / inner).sqrt();
        if !(target < needed) {
            return Err(Error::Parameter(format!(
                "covering chord {target:.4} does not keep the annulus inside the bumps (need < {needed:.4})"
            )));
        }
        let n = dim.n();
        let (centers, measured) = match dim {
            Dim::Two => {
                let mut count = ((std::f64::consts::PI / (2.0 * (target / 2.0).asin())).ceil() as usize).max(3);
                loop {
                    let c = circle_points(count, 0.0);
                    let tests = circle_points(64 * count, 0.5 / 64.0);
                    let m = covering_chord(n, &c, &tests) + 2.0 * std::f64::consts::PI / (64 * count) as f64;
                    if m <= target {
                        break (c, m);
                    }
                    count += 1;
                }
            }
            Dim::Three => {
                let tests = fibonacci_sphere(40_000);
                let spacing = (4.0 * std::f64::consts::PI / 40_000.0).sqrt();
                let mut count = (4.0 * std::f64::consts::PI / (2.0 * target * target)).ceil() as usize;
                loop {
                    let c = fibonacci_sphere(count);
                    let m = covering_chord(n, &c, &tests) + spacing;
                    if m <= target {
                        break (c, m);
                    }
                    count += count / 20 + 1;
                }
            }
        };
        let rotations = centers.iter().map(|p| rotation_to_south(dim, *p)).collect();
        let neighbors = centers
            .iter()
            .map(|p| {
                (0..centers.len())
                    .filter(|&i| {
                        let q = centers[i];
                        norm(n, [p[0] - q[0], p[1] - q[1], p[2] - q[2]]) < 2.0 * rb
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            delta,
            bump_radius: rb,
            centers,
            rotations,
            measured_cover: measured,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn n(&self) -> usize {
        self.dim.n()
    }

    /// Unnormalized bump of chart `j`, supported in `|x - p_j| < bump_radius`.
    fn bump(&self, j: usize, x: [f64; 3]) -> f64 {
        let p = self.centers[j];
        let d = [x[0] - p[0], x[1] - p[1], x[2] - p[2]];
        let t2 = dot(self.n(), d, d) / (self.bump_radius * self.bump_radius);
        if t2 < 1.0 {
            (-1.0 / (1.0 - t2)).exp()
        } else {
            0.0
        }
    }

    /// Radial window equal to `1` on `1 - δ ≤ |x| ≤ 1` and `0` outside
    /// `1 - 1.2δ < |x| < 1 + 0.2δ`.
    fn window(&self, r: f64) -> f64 {
        let w = 0.2 * self.delta;
        smooth_step((r - (1.0 - 1.2 * self.delta)) / w) * smooth_step((1.0 + 0.2 * self.delta - r) / w)
    }

    /// Indices of the charts whose bump may be nonzero at `x`.
    pub fn charts_near(&self, x: [f64; 3]) -> Vec<usize> {
        let n = self.n();
        (0..self.len())
            .filter(|&j| {
                let p = self.centers[j];
                norm(n, [x[0] - p[0], x[1] - p[1], x[2] - p[2]]) < self.bump_radius
            })
            .collect()
    }

    /// `ψ_j(x)`.
    pub fn psi(&self, j: usize, x: [f64; 3]) -> f64 {
        let bj = self.bump(j, x);
        if bj == 0.0 {
            return 0.0;
        }
        let w = self.window(norm(self.n(), x));
        if w == 0.0 {
            return 0.0;
        }
        let total: f64 = self.neighbors[j].iter().map(|&i| self.bump(i, x)).sum();
        w * bj / total
    }

    /// `Σ_j ψ_j(x)`.
    pub fn partition_sum(&self, x: [f64; 3]) -> f64 {
        self.charts_near(x).into_iter().map(|j| self.psi(j, x)).sum()
    }

    /// Sum of the unnormalized bumps at `x`, which must stay positive on the
    /// support of the radial window.
    pub fn bump_sum(&self, x: [f64; 3]) -> f64 {
        self.charts_near(x).into_iter().map(|j| self.bump(j, x)).sum()
    }

    /// `f_j(x) = f(R_j x)`.
    pub fn chart_f(&self, j: usize, x: [f64; 3]) -> Result<[f64; 3]> {
        chart_f(self.dim, apply(&self.rotations[j], x))
    }

    /// `g_j(y) = R_jᵀ g(y)`.
    pub fn chart_g(&self, j: usize, y: [f64; 3]) -> Result<[f64; 3]> {
        Ok(apply_t(&self.rotations[j], chart_g(self.dim, y)?))
    }

    /// Whether `K_j ∩ K_ℓ ≠ ∅`.
    pub fn overlap(&self, l: usize, j: usize) -> bool {
        let (p, q) = (self.centers[l], self.centers[j]);
        norm(self.n(), [p[0] - q[0], p[1] - q[1], p[2] - q[2]]) < 4.0 * self.delta
    }

    /// All ordered pairs of overlapping charts.
    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for l in 0..self.len() {
            for j in 0..self.len() {
                if self.overlap(l, j) {
                    out.push((l, j));
                }
            }
        }
        out
    }

    /// Blocks of `R_ℓ R_jᵀ`.
    pub fn blocks(&self, l: usize, j: usize) -> Result<TransitionBlocks> {
        if !self.overlap(l, j) {
            return Err(Error::DisjointCharts(l, j));
        }
        let m = self.n() - 1;
        let r = mul(&self.rotations[l], &transpose(&self.rotations[j]));
        let mut t = TransitionBlocks {
            a: [[0.0; 2]; 2],
            b: [0.0; 2],
            c: [0.0; 2],
            d: r[m][m],
            m,
        };
        for i in 0..m {
            for k in 0..m {
                t.a[i][k] = r[i][k];
            }
            t.b[i] = r[i][m];
            t.c[i] = r[m][i];
        }
        Ok(t)
    }

    /// `f_ℓ ∘ g_j(y)` computed through the sphere.
    pub fn transition_direct(&self, l: usize, j: usize, y: [f64; 3]) -> Result<[f64; 3]> {
        if !self.overlap(l, j) {
            return Err(Error::DisjointCharts(l, j));
        }
        self.chart_f(l, self.chart_g(j, y)?)
    }

    /// `T_{ℓj}(y') = (-b + A y') / (d - c·y')`.
    pub fn transition_formula(&self, l: usize, j: usize, y: [f64; 2]) -> Result<[f64; 2]> {
        let t = self.blocks(l, j)?;
        let den = t.d - t.c_dot(y);
        if !(den > 0.0) {
            return Err(Error::Domain(format!("transition denominator {den} is not positive")));
        }
        let ay = mat2_apply(&t.a, t.m, y);
        let mut o = [0.0; 2];
        for i in 0..t.m {
            o[i] = (ay[i] - t.b[i]) / den;
        }
        Ok(o)
    }

    /// Extended transition `-λb + λ² B y' (1 + φ_δ(y') S(y'))` with
    /// `S(y') = λc·y' / (1 - λc·y')` and `φ_δ(y') = φ(|y'| / 4δ)`.
    pub fn transition_extended(&self, l: usize, j: usize, y: [f64; 2]) -> Result<[f64; 2]> {
        let t = self.blocks(l, j)?;
        Ok(self.extended_with(&t, y).0)
    }

    /// Value and Jacobian of the extended transition.
    fn extended_with(&self, t: &TransitionBlocks, y: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let k = t.m;
        let lam = t.lambda();
        let bm = t.b_matrix();
        let by = mat2_apply(&bm, k, y);
        let ny = (0..k).map(|i| y[i] * y[i]).sum::<f64>().sqrt();
        let q = 4.0 * self.delta;
        let phi = plateau(ny / q);
        let z = lam * t.c_dot(y);
        let s = z / (1.0 - z);
        let sfac = phi * s;
        let mut val = [0.0; 2];
        for i in 0..k {
            val[i] = -lam * t.b[i] + lam * lam * by[i] * (1.0 + sfac);
        }
        // ∇(φ S) = φ' S y/(|y| q) + φ λ c / (1 - z)².
        let mut grad = [0.0; 2];
        let dphi = if ny > 0.0 { plateau_derivative(ny / q) / (q * ny) } else { 0.0 };
        for i in 0..k {
            grad[i] = dphi * s * y[i] + phi * lam * t.c[i] / ((1.0 - z) * (1.0 - z));
        }
        let mut jac = [[0.0; 2]; 2];
        for i in 0..k {
            for c in 0..k {
                jac[i][c] = lam * lam * (bm[i][c] * (1.0 + sfac) + by[i] * grad[c]);
            }
        }
        (val, jac)
    }

    /// Inverse of the extended transition by Newton's method from the affine
    /// initial guess. Returns the preimage and the final residual.
    pub fn transition_extended_inverse(&self, l: usize, j: usize, x: [f64; 2]) -> Result<([f64; 2], f64)> {
        let t = self.blocks(l, j)?;
        let k = t.m;
        let lam = t.lambda();
        let bm = t.b_matrix();
        let mut rhs = [0.0; 2];
        for i in 0..k {
            rhs[i] = (x[i] + lam * t.b[i]) / (lam * lam);
        }
        let mut y = mat2_solve(&bm, k, rhs).ok_or_else(|| Error::Singular("transition block".into()))?;
        let mut res = f64::INFINITY;
        for _ in 0..60 {
            let (v, jac) = self.extended_with(&t, y);
            let mut r = [0.0; 2];
            for i in 0..k {
                r[i] = v[i] - x[i];
            }
            res = (0..k).map(|i| r[i] * r[i]).sum::<f64>().sqrt();
            if res <= 1e-15 * (1.0 + (0..k).map(|i| x[i] * x[i]).sum::<f64>().sqrt()) {
                return Ok((y, res));
            }
            let step = mat2_solve(&jac, k, r).ok_or_else(|| Error::Singular("transition Jacobian".into()))?;
            for i in 0..k {
                y[i] -= step[i];
            }
        }
        if res <= 1e-12 {
            Ok((y, res))
        } else {
            Err(Error::NonConvergence(format!(
                "Newton inversion of the extended transition stalled at residual {res:.3e}"
            )))
        }
    }

    /// The part of the extended transition beyond its affine map, which is
    /// compactly supported in `|y'| ≤ 8δ`.
    pub fn transition_nonlinear_part(&self, l: usize, j: usize, y: [f64; 2]) -> Result<[f64; 2]> {
        let t = self.blocks(l, j)?;
        let (v, _) = self.extended_with(&t, y);
        let lam = t.lambda();
        let by = mat2_apply(&t.b_matrix(), t.m, y);
        let mut o = [0.0; 2];
        for i in 0..t.m {
            o[i] = v[i] - (-lam * t.b[i] + lam * lam * by[i]);
        }
        Ok(o)
    }

    /// JSON dump: δ, centers and rotation matrices.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("atlas serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_atlas_covers_and_partitions() {
        let a = Atlas::new(Dim::Two, AtlasOptions::default()).unwrap();
        assert!(a.measured_cover <= 0.14 + 1e-12);
        for i in 0..2000 {
            let t = i as f64 * 0.0031;
            let r = 0.9 + 0.1 * (i % 7) as f64 / 6.0;
            let x = [r * t.cos(), r * t.sin(), 0.0];
            assert!((a.partition_sum(x) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn transitions_agree_in_the_common_domain() {
        let a = Atlas::new(Dim::Three, AtlasOptions::default()).unwrap();
        let pairs = a.overlapping_pairs();
        assert!(!pairs.is_empty());
        for &(l, j) in pairs.iter().step_by(37) {
            for y in [[0.0, 0.0], [0.05, -0.1], [-0.2, 0.07]] {
                let yy = [y[0], y[1], 0.03];
                let d = a.transition_direct(l, j, yy).unwrap();
                let f = a.transition_formula(l, j, y).unwrap();
                assert!((d[0] - f[0]).abs() < 1e-13 && (d[1] - f[1]).abs() < 1e-13);
                assert!((d[2] - 0.03).abs() < 1e-14, "{:e}", d[2] - 0.03);
            }
            let y = [0.1, -0.2];
            let x = a.transition_extended(l, j, y).unwrap();
            let (back, res) = a.transition_extended_inverse(l, j, x).unwrap();
            assert!(res < 1e-13 && (back[0] - y[0]).abs() < 1e-12 && (back[1] - y[1]).abs() < 1e-12);
        }
    }
}
