//! Quadrature grids used to discretize integral operators on a potential's
//! support.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsfError};
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    GaussLegendre,
    Trapezoid,
}

/// Nodes and weights on an interval (a, b). Nodes are strictly interior:
/// Gauss-Legendre nodes are interior by construction; the trapezoid rule is
/// applied on midpoint-shifted panels so that endpoint singularities of
/// Dirichlet kernels are never sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: QuadRule,
    pub a: f64,
    pub b: f64,
}

impl QuadratureGrid {
    pub fn on_interval(rule: QuadRule, a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a < b) {
            return Err(SsfError::InvalidInput(format!(
                "quadrature interval needs a < b, got ({a}, {b})"
            )));
        }
        if m == 0 {
            return Err(SsfError::InvalidInput("quadrature needs M ≥ 1 nodes".into()));
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (nodes, weights) = match rule {
            QuadRule::GaussLegendre => {
                let (x, w) = gauss_legendre(m);
                (
                    x.iter().map(|t| mid + half * t).collect::<Vec<_>>(),
                    w.iter().map(|t| half * t).collect::<Vec<_>>(),
                )
            }
            QuadRule::Trapezoid => {
                // Midpoint-panel variant: equal weights, interior nodes.
                let h = (b - a) / m as f64;
                (
                    (0..m).map(|i| a + (i as f64 + 0.5) * h).collect(),
                    vec![h; m],
                )
            }
        };
        Ok(Self {
            nodes,
            weights,
            rule,
            a,
            b,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f over the grid.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_measure() {
        for rule in [QuadRule::GaussLegendre, QuadRule::Trapezoid] {
            let g = QuadratureGrid::on_interval(rule, -1.5, 2.5, 64).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert_relative_eq!(total, 4.0, max_relative = 1e-13);
            assert!(g.nodes.iter().all(|&x| x > -1.5 && x < 2.5));
        }
    }

    #[test]
    fn gauss_legendre_integrates_smooth_functions() {
        let g = QuadratureGrid::on_interval(QuadRule::GaussLegendre, 0.0, std::f64::consts::PI, 32)
            .unwrap();
        let got = g.integrate(f64::sin);
        assert_relative_eq!(got, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_degenerate_intervals() {
        assert!(QuadratureGrid::on_interval(QuadRule::GaussLegendre, 1.0, 1.0, 8).is_err());
        assert!(QuadratureGrid::on_interval(QuadRule::Trapezoid, 0.0, 1.0, 0).is_err());
    }
}
