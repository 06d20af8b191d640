//! Dimension tag and the flat ordering of boundary modes.
//!
//! Circle (`n = 2`): index 0 is the constant mode, index `2k - 1` is
//! `cos kθ / √π` and index `2k` is `sin kθ / √π`. The degree of a mode is `k`
//! and its Laplace-Beltrami eigenvalue is `k²`.
//!
//! Sphere (`n = 3`): real spherical harmonics without the Condon-Shortley
//! phase, flat index `l² + l + m` for `-l ≤ m ≤ l`. Positive `m` carries
//! `cos mφ`, negative `m` carries `sin |m|φ`. The eigenvalue is `l(l + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient dimension of the ball (the boundary sphere has dimension `n - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::Dimension(other)),
        }
    }

    /// Ambient dimension `n`.
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of modes of degree at most `l_max`.
    pub fn n_modes(self, l_max: usize) -> usize {
        match self {
            Dim::Two => 2 * l_max + 1,
            Dim::Three => (l_max + 1) * (l_max + 1),
        }
    }

    /// Degree of the mode stored at `index`.
    pub fn degree_of(self, index: usize) -> usize {
        match self {
            Dim::Two => index.div_ceil(2),
            Dim::Three => {
                let mut l = (index as f64).sqrt() as usize;
                while l * l > index {
                    l -= 1;
                }
                while (l + 1) * (l + 1) <= index {
                    l += 1;
                }
                l
            }
        }
    }

    /// Laplace-Beltrami eigenvalue of degree `l`.
    pub fn eigenvalue(self, l: usize) -> f64 {
        let l = l as f64;
        match self {
            Dim::Two => l * l,
            Dim::Three => l * (l + 1.0),
        }
    }

    /// Degree and signed order of the mode stored at `index`.
    ///
    /// For the circle the order is `+k` for cosine and `-k` for sine.
    pub fn mode_of(self, index: usize) -> (usize, i64) {
        match self {
            Dim::Two => {
                if index == 0 {
                    (0, 0)
                } else {
                    let k = index.div_ceil(2);
                    if index % 2 == 1 {
                        (k, k as i64)
                    } else {
                        (k, -(k as i64))
                    }
                }
            }
            Dim::Three => {
                let l = self.degree_of(index);
                (l, index as i64 - (l * l + l) as i64)
            }
        }
    }

    /// Flat index of the mode with degree `l` and signed order `m`.
    pub fn index_of(self, l: usize, m: i64) -> usize {
        match self {
            Dim::Two => {
                debug_assert!(m.unsigned_abs() as usize == l);
                if l == 0 {
                    0
                } else if m > 0 {
                    2 * l - 1
                } else {
                    2 * l
                }
            }
            Dim::Three => {
                debug_assert!(m.unsigned_abs() as usize <= l);
                ((l * l + l) as i64 + m) as usize
            }
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Dim::new(n)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for dim in [Dim::Two, Dim::Three] {
            for idx in 0..dim.n_modes(9) {
                let (l, m) = dim.mode_of(idx);
                assert_eq!(dim.index_of(l, m), idx);
                assert_eq!(dim.degree_of(idx), l);
            }
        }
        assert_eq!(Dim::Three.index_of(1, 0), 2);
        assert_eq!(Dim::Two.mode_of(3), (2, 2));
        assert_eq!(Dim::Two.mode_of(4), (2, -2));
    }
}
