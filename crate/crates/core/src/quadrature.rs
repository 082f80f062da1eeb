// SPDX-License-Identifier: Apache-2.0

//! Gauss–Hermite and Gauss–Legendre rules (Newton iteration on the
//! three-term recurrences).
//!
//! Rules are symmetric and stored as the non-negative half, so integrals are
//! accumulated pairwise as `w * (h(u) + h(-u))`. Odd moments of the rule then
//! cancel exactly.

use alloc::vec::Vec;

use core::f64::consts::PI;

const NEWTON_TOL: f64 = 3.0e-15;
const MAX_NEWTON: usize = 100;

/// A symmetric quadrature rule normalized to a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricRule {
    /// Positive nodes, paired with their mirror image.
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Weight of the node at 0 (odd orders only).
    center: f64,
}

impl SymmetricRule {
    pub fn len(&self) -> usize {
        2 * self.nodes.len() + usize::from(self.center != 0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `∫ h dμ` for the measure the rule was built for.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut h: F) -> f64 {
        let mut acc = 0.0;
        for (&u, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * (h(u) + h(-u));
        }
        if self.center != 0.0 {
            acc += self.center * h(0.0);
        }
        acc
    }

    fn scaled(mut self, node_scale: f64, weight_scale: f64) -> Self {
        for u in &mut self.nodes {
            *u *= node_scale;
        }
        for w in &mut self.weights {
            *w *= weight_scale;
        }
        self.center *= weight_scale;
        self
    }

    /// `n`-node Gauss–Hermite rule for Normal(0, scale²).
    pub fn normal(n: usize, scale: f64) -> Self {
        gauss_hermite(n).scaled(core::f64::consts::SQRT_2 * scale, 1.0 / crate::math::sqrt(PI))
    }

    /// `n`-node Gauss–Legendre rule for Uniform(-scale, scale).
    pub fn uniform(n: usize, scale: f64) -> Self {
        gauss_legendre(n).scaled(scale, 0.5)
    }
}

/// Gauss–Hermite rule for the weight `exp(-x²)` on ℝ.
pub fn gauss_hermite(n: usize) -> SymmetricRule {
    assert!(n >= 1, "empty quadrature rule");
    let pi_m4 = crate::math::pow(PI, -0.25);
    let half = n / 2;
    let nf = n as f64;
    let mut roots: Vec<f64> = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    let mut z = 0.0;
    // Largest root first, then walk inwards.
    for i in 0..half {
        z = match i {
            0 => crate::math::sqrt(2.0 * nf + 1.0) - 1.85575 * crate::math::pow(2.0 * nf + 1.0, -0.16667),
            1 => z - 1.14 * crate::math::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0],
            3 => 1.91 * z - 0.91 * roots[1],
            _ => 2.0 * z - roots[i - 2],
        };
        let mut deriv = 0.0;
        for _ in 0..MAX_NEWTON {
            let (p, pp) = hermite_normalized(n, z, pi_m4);
            deriv = pp;
            let step = p / pp;
            z -= step;
            if crate::math::fabs(step) <= NEWTON_TOL * crate::math::fabs(z).max(1.0) {
                deriv = hermite_normalized(n, z, pi_m4).1;
                break;
            }
        }
        roots.push(z);
        weights.push(2.0 / (deriv * deriv));
    }
    let center = if n % 2 == 1 {
        let (_, pp) = hermite_normalized(n, 0.0, pi_m4);
        // p_n(0) = 0 for odd n; weight from the derivative formula
        2.0 / (pp * pp)
    } else {
        0.0
    };
    SymmetricRule { nodes: roots, weights, center }
}

/// Orthonormal Hermite polynomial of degree `n` and its derivative.
fn hermite_normalized(n: usize, z: f64, pi_m4: f64) -> (f64, f64) {
    let mut p1 = pi_m4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * crate::math::sqrt(2.0 / jf) * p2 - crate::math::sqrt((jf - 1.0) / jf) * p3;
    }
    (p1, crate::math::sqrt(2.0 * n as f64) * p2)
}

/// Gauss–Legendre rule on [-1, 1] (weights sum to 2).
pub fn gauss_legendre(n: usize) -> SymmetricRule {
    assert!(n >= 1, "empty quadrature rule");
    let nf = n as f64;
    let half = n / 2;
    let mut nodes = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    for i in 0..half {
        let mut z = crate::math::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut pp = 0.0;
        for _ in 0..MAX_NEWTON {
            let (p, d) = legendre(n, z);
            pp = d;
            let step = p / d;
            z -= step;
            if crate::math::fabs(step) <= NEWTON_TOL {
                pp = legendre(n, z).1;
                break;
            }
        }
        nodes.push(z);
        weights.push(2.0 / ((1.0 - z * z) * pp * pp));
    }
    let center = if n % 2 == 1 {
        let (_, d) = legendre(n, 0.0);
        2.0 / (d * d)
    } else {
        0.0
    };
    SymmetricRule { nodes, weights, center }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
    }
    (p1, n as f64 * (z * p1 - p2) / (z * z - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_reproduces_normal_moments() {
        for &n in &[5usize, 64, 128] {
            let rule = SymmetricRule::normal(n, 1.5);
            assert_eq!(rule.len(), n);
            assert_relative_eq!(rule.integrate(|_| 1.0), 1.0, max_relative = 1e-14);
            assert_relative_eq!(rule.integrate(|u| u * u), 2.25, max_relative = 1e-13);
            assert_relative_eq!(rule.integrate(|u| u.powi(4)), 3.0 * 1.5f64.powi(4), max_relative = 1e-13);
            assert_eq!(rule.integrate(|u| u * u * u), 0.0);
        }
    }

    #[test]
    fn hermite_integrates_smooth_functions() {
        // E[cos(u)] = exp(-1/2) for a standard normal
        let rule = SymmetricRule::normal(64, 1.0);
        assert_relative_eq!(rule.integrate(crate::math::cos), crate::math::exp(-0.5), max_relative = 1e-14);
    }

    #[test]
    fn legendre_reproduces_uniform_moments() {
        for &n in &[3usize, 64] {
            let rule = SymmetricRule::uniform(n, 2.0);
            assert_eq!(rule.len(), n);
            assert_relative_eq!(rule.integrate(|_| 1.0), 1.0, max_relative = 1e-14);
            assert_relative_eq!(rule.integrate(|u| u * u), 4.0 / 3.0, max_relative = 1e-13);
        }
        let rule = SymmetricRule::uniform(64, 1.0);
        assert_relative_eq!(rule.integrate(crate::math::exp), 1f64.sinh(), max_relative = 1e-14);
    }
}
