//! Smooth steps and the radial cut-off families `ζ_k`, `ζ*_k`.

use serde::Serialize;

fn e(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn de(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// `C^∞` step: `0` for `t ≤ 0`, `1` for `t ≥ 1`, monotone in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let (a, b) = (e(t), e(1.0 - t));
        a / (a + b)
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let (a, b) = (e(t), e(1.0 - t));
        let (da, db) = (de(t), -de(1.0 - t));
        (da * b - a * db) / ((a + b) * (a + b))
    }
}

/// Cut-off equal to `1` for `t ≤ 1` and `0` for `t ≥ 2`.
pub fn plateau(t: f64) -> f64 {
    1.0 - smooth_step(t - 1.0)
}

pub fn plateau_derivative(t: f64) -> f64 {
    -smooth_step_derivative(t - 1.0)
}

/// Radial cut-offs on the annuli `ρ_{k+1} < |x| < ρ_k`, with
/// `ρ_k = 1 - (δ/4) Σ_{ℓ≤k} 2^{-ℓ}`, and their starred versions built with
/// `δ/2` in place of `δ/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFamily {
    pub delta: f64,
    pub k_max: usize,
}

impl CutoffFamily {
    pub fn new(delta: f64, k_max: usize) -> Self {
        Self { delta, k_max }
    }

    fn radius(scale: f64, k: usize) -> f64 {
        1.0 - scale * (0..=k).map(|l| 0.5f64.powi(l as i32)).sum::<f64>()
    }

    pub fn rho(&self, k: usize) -> f64 {
        Self::radius(self.delta / 4.0, k)
    }

    pub fn rho_star(&self, k: usize) -> f64 {
        Self::radius(self.delta / 2.0, k)
    }

    /// `ζ_k` as a function of `|x|`.
    pub fn zeta(&self, k: usize, r: f64) -> f64 {
        let (a, b) = (self.rho(k + 1), self.rho(k));
        smooth_step((r - a) / (b - a))
    }

    /// `ζ*_k` as a function of `|x|`.
    pub fn zeta_star(&self, k: usize, r: f64) -> f64 {
        let (a, b) = (self.rho_star(k + 1), self.rho_star(k));
        smooth_step((r - a) / (b - a))
    }

    /// Radial derivative of `ζ_k`.
    pub fn zeta_derivative(&self, k: usize, r: f64) -> f64 {
        let (a, b) = (self.rho(k + 1), self.rho(k));
        smooth_step_derivative((r - a) / (b - a)) / (b - a)
    }

    /// `ζ_k` or `ζ*_k` at the point `x`.
    pub fn eval(&self, k: usize, starred: bool, r: f64) -> f64 {
        if starred {
            self.zeta_star(k, r)
        } else {
            self.zeta(k, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_smooth_and_bounded() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let fd = (smooth_step(t + 1e-6) - smooth_step(t - 1e-6)) / 2e-6;
            assert!((fd - smooth_step_derivative(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn cutoff_ladder() {
        let c = CutoffFamily::new(0.1, 6);
        for k in 0..6 {
            assert_eq!(c.zeta(k, c.rho(k + 1)), 0.0);
            assert_eq!(c.zeta(k, c.rho(k)), 1.0);
            // ζ_{k+1} = 1 wherever ζ_k ≠ 0.
            for i in 0..=200 {
                let r = c.rho(k + 1) + (1.0 - c.rho(k + 1)) * i as f64 / 200.0;
                if c.zeta(k, r) != 0.0 {
                    assert_eq!(c.zeta(k + 1, r), 1.0);
                    for kp in 0..6 {
                        assert_eq!(c.zeta_star(kp, r), 1.0);
                    }
                }
            }
        }
    }
}
