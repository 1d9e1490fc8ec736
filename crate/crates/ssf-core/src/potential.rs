//! Potential specifications, factorization V = u·v, and sign splits.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsfError};
use crate::quadrature::{QuadRule, QuadratureGrid};

/// Shape of the potential. `square_well` is V = −depth on |x| ≤ half_width
/// (depth > 0 attracts); `gaussian` is amplitude·exp(−(x/width)²) truncated
/// at the support radius; `sampled` interpolates linearly between abscissae
/// and vanishes outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    SquareWell { depth: f64, half_width: f64 },
    Gaussian { amplitude: f64, width: f64 },
    Sampled { abscissae: Vec<f64>, values: Vec<f64> },
}

/// A real, compactly supported potential in dimension 1 or 3. Radial specs
/// are functions of r = |x| on [0, support_radius]; dimension 3 requires
/// radial = true (partial-wave reduction is the only implemented 3D route).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub dimension: u8,
    pub profile: Profile,
    pub support_radius: f64,
    #[serde(default)]
    pub radial: bool,
}

/// A piece of a piecewise-constant potential: value `v` on (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstPiece {
    pub a: f64,
    pub b: f64,
    pub v: f64,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 3 {
            return Err(SsfError::InvalidInput(format!(
                "dimension must be 1 or 3, got {}",
                self.dimension
            )));
        }
        if self.dimension == 3 && !self.radial {
            return Err(SsfError::InvalidInput(
                "dimension 3 requires a radial potential".into(),
            ));
        }
        if !(self.support_radius > 0.0) || !self.support_radius.is_finite() {
            return Err(SsfError::InvalidInput(format!(
                "support_radius must be positive and finite, got {}",
                self.support_radius
            )));
        }
        match &self.profile {
            Profile::SquareWell { depth, half_width } => {
                if !depth.is_finite() {
                    return Err(SsfError::InvalidInput("square_well depth not finite".into()));
                }
                if !(*half_width > 0.0) || *half_width > self.support_radius {
                    return Err(SsfError::InvalidInput(format!(
                        "square_well half_width must lie in (0, support_radius], got {half_width}"
                    )));
                }
            }
            Profile::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() || !(*width > 0.0) || !width.is_finite() {
                    return Err(SsfError::InvalidInput(
                        "gaussian needs finite amplitude and width > 0".into(),
                    ));
                }
            }
            Profile::Sampled { abscissae, values } => {
                if abscissae.len() != values.len() || abscissae.len() < 2 {
                    return Err(SsfError::InvalidInput(
                        "sampled profile needs ≥ 2 abscissae matching values".into(),
                    ));
                }
                if !abscissae.windows(2).all(|w| w[0] < w[1]) {
                    return Err(SsfError::InvalidInput(
                        "sampled abscissae must be strictly increasing".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(SsfError::InvalidInput("sampled values must be finite".into()));
                }
                let lo = if self.radial { 0.0 } else { -self.support_radius };
                if abscissae[0] < lo - 1e-12 || *abscissae.last().unwrap() > self.support_radius + 1e-12
                {
                    return Err(SsfError::InvalidInput(
                        "sampled abscissae must lie within the support radius".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// V at the coordinate x (1D) or radius r ≥ 0 (radial).
    pub fn evaluate(&self, x: f64) -> f64 {
        let r = if self.radial { x } else { x.abs() };
        if self.radial && x < 0.0 {
            return 0.0;
        }
        match &self.profile {
            Profile::SquareWell { depth, half_width } => {
                if r <= *half_width {
                    -depth
                } else {
                    0.0
                }
            }
            Profile::Gaussian { amplitude, width } => {
                if r <= self.support_radius {
                    amplitude * (-(x / width) * (x / width)).exp()
                } else {
                    0.0
                }
            }
            Profile::Sampled { abscissae, values } => {
                if x < abscissae[0] || x > *abscissae.last().unwrap() {
                    return 0.0;
                }
                let idx = abscissae.partition_point(|&t| t <= x).min(abscissae.len() - 1);
                if idx == 0 {
                    return values[0];
                }
                let (x0, x1) = (abscissae[idx - 1], abscissae[idx]);
                let t = (x - x0) / (x1 - x0);
                values[idx - 1] * (1.0 - t) + values[idx] * t
            }
        }
    }

    /// The tight support of the profile: (−s, s) in 1D, (0, s) radial.
    pub fn support(&self) -> (f64, f64) {
        let s = match &self.profile {
            Profile::SquareWell { half_width, .. } => *half_width,
            Profile::Gaussian { .. } => self.support_radius,
            Profile::Sampled { abscissae, .. } => abscissae
                .iter()
                .fold(0.0f64, |m, &x| m.max(x.abs()))
                .min(self.support_radius),
        };
        if self.radial {
            (0.0, s)
        } else {
            (-s, s)
        }
    }

    /// Quadrature grid on the tight support.
    pub fn grid(&self, rule: QuadRule, m: usize) -> Result<QuadratureGrid> {
        let (a, b) = self.support();
        QuadratureGrid::on_interval(rule, a, b, m)
    }

    /// Points where V or its derivative jumps (kinks), in ambient
    /// coordinates. Integrators split at these to keep full order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let raw: Vec<f64> = match &self.profile {
            Profile::SquareWell { half_width, .. } => vec![-half_width, *half_width],
            Profile::Gaussian { .. } => vec![-self.support_radius, self.support_radius],
            Profile::Sampled { abscissae, .. } => abscissae.clone(),
        };
        if self.radial {
            raw.into_iter().filter(|&x| x > 0.0).collect()
        } else {
            raw
        }
    }

    /// Piecewise-constant representation, if the profile is one.
    pub fn const_pieces(&self) -> Option<Vec<ConstPiece>> {
        match &self.profile {
            Profile::SquareWell { depth, half_width } => {
                let (a, b) = if self.radial {
                    (0.0, *half_width)
                } else {
                    (-*half_width, *half_width)
                };
                Some(vec![ConstPiece { a, b, v: -depth }])
            }
            _ => None,
        }
    }

    /// The spec for −V.
    pub fn negated(&self) -> PotentialSpec {
        let profile = match &self.profile {
            Profile::SquareWell { depth, half_width } => Profile::SquareWell {
                depth: -depth,
                half_width: *half_width,
            },
            Profile::Gaussian { amplitude, width } => Profile::Gaussian {
                amplitude: -amplitude,
                width: *width,
            },
            Profile::Sampled { abscissae, values } => Profile::Sampled {
                abscissae: abscissae.clone(),
                values: values.iter().map(|v| -v).collect(),
            },
        };
        PotentialSpec {
            dimension: self.dimension,
            profile,
            support_radius: self.support_radius,
            radial: self.radial,
        }
    }

    /// Short human-readable description, used in curve pair ids.
    pub fn describe(&self) -> String {
        let p = match &self.profile {
            Profile::SquareWell { depth, half_width } => {
                format!("square well depth {depth} half-width {half_width}")
            }
            Profile::Gaussian { amplitude, width } => {
                format!("gaussian amplitude {amplitude} width {width}")
            }
            Profile::Sampled { abscissae, .. } => {
                format!("sampled profile ({} nodes)", abscissae.len())
            }
        };
        if self.radial {
            format!("radial {p} in {}D", self.dimension)
        } else {
            format!("{p} in {}D", self.dimension)
        }
    }

    /// (min V, max V) over all of space (both bracket 0).
    pub fn bounds(&self) -> (f64, f64) {
        match &self.profile {
            Profile::SquareWell { depth, .. } => ((-depth).min(0.0), (-depth).max(0.0)),
            Profile::Gaussian { amplitude, .. } => (amplitude.min(0.0), amplitude.max(0.0)),
            Profile::Sampled { values, .. } => values
                .iter()
                .fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        }
    }

    /// ∫ V over the ambient space: ∫V dx in 1D, 4π ∫ V(r) r² dr radially.
    pub fn integral(&self) -> f64 {
        self.weighted_integral(|v| v)
    }

    /// ∫ |V| over the ambient space (same volume weighting as `integral`).
    pub fn l1_norm(&self) -> f64 {
        self.weighted_integral(f64::abs)
    }

    fn weighted_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = self.support();
        let grid = QuadratureGrid::on_interval(QuadRule::GaussLegendre, a, b, 256)
            .expect("support interval is validated non-degenerate");
        if self.radial && self.dimension == 3 {
            grid.integrate(|r| 4.0 * std::f64::consts::PI * r * r * f(self.evaluate(r)))
        } else {
            grid.integrate(|x| f(self.evaluate(x)))
        }
    }
}

/// Restriction of a potential to a finite domain (Dirichlet box or ball);
/// the factor functions vanish outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Restriction {
    FullSpace,
    Interval { a: f64, b: f64 },
    Ball { radius: f64 },
}

impl Restriction {
    fn contains(&self, x: f64) -> bool {
        match *self {
            Restriction::FullSpace => true,
            Restriction::Interval { a, b } => x > a && x < b,
            Restriction::Ball { radius } => x >= 0.0 && x < radius,
        }
    }
}

/// Factorization V = u·v with v = |V|^{1/2} ≥ 0, u = sgn(V)·v.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub spec: PotentialSpec,
    pub restriction: Restriction,
}

impl FactorPair {
    pub fn v(&self, x: f64) -> f64 {
        if !self.restriction.contains(x) {
            return 0.0;
        }
        self.spec.evaluate(x).abs().sqrt()
    }

    pub fn u(&self, x: f64) -> f64 {
        if !self.restriction.contains(x) {
            return 0.0;
        }
        let val = self.spec.evaluate(x);
        val.signum() * val.abs().sqrt()
    }
}

pub fn factorize(spec: &PotentialSpec) -> FactorPair {
    FactorPair {
        spec: spec.clone(),
        restriction: Restriction::FullSpace,
    }
}

pub fn factorize_restricted(spec: &PotentialSpec, restriction: Restriction) -> FactorPair {
    FactorPair {
        spec: spec.clone(),
        restriction,
    }
}

/// Split into positive and negative parts: V = V₊ − V₋ with V± ≥ 0.
pub fn sign_split(spec: &PotentialSpec) -> (PotentialSpec, PotentialSpec) {
    let (plus, minus) = match &spec.profile {
        Profile::SquareWell { depth, half_width } => (
            Profile::SquareWell {
                depth: depth.min(0.0),
                half_width: *half_width,
            },
            Profile::SquareWell {
                // V₋ = max(depth, 0)·χ as a potential means depth −max(depth,0).
                depth: -depth.max(0.0),
                half_width: *half_width,
            },
        ),
        Profile::Gaussian { amplitude, width } => (
            Profile::Gaussian {
                amplitude: amplitude.max(0.0),
                width: *width,
            },
            Profile::Gaussian {
                amplitude: (-amplitude).max(0.0),
                width: *width,
            },
        ),
        Profile::Sampled { abscissae, values } => (
            Profile::Sampled {
                abscissae: abscissae.clone(),
                values: values.iter().map(|v| v.max(0.0)).collect(),
            },
            Profile::Sampled {
                abscissae: abscissae.clone(),
                values: values.iter().map(|v| (-v).max(0.0)).collect(),
            },
        ),
    };
    let mk = |profile: Profile| PotentialSpec {
        dimension: spec.dimension,
        profile,
        support_radius: spec.support_radius,
        radial: spec.radial,
    };
    (mk(plus), mk(minus))
}

/// The standard 1D square well used across examples: depth d on |x| ≤ w.
pub fn square_well_1d(depth: f64, half_width: f64) -> PotentialSpec {
    PotentialSpec {
        dimension: 1,
        profile: Profile::SquareWell { depth, half_width },
        support_radius: half_width,
        radial: false,
    }
}

/// Radial square well in dimension 3: V(r) = −depth for r ≤ half_width.
pub fn square_well_3d(depth: f64, half_width: f64) -> PotentialSpec {
    PotentialSpec {
        dimension: 3,
        profile: Profile::SquareWell { depth, half_width },
        support_radius: half_width,
        radial: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorization_reproduces_potential() {
        let spec = square_well_1d(2.0, 1.0);
        let pair = factorize(&spec);
        for x in [-1.5, -0.99, 0.0, 0.3, 1.0, 2.0] {
            assert_relative_eq!(pair.u(x) * pair.v(x), spec.evaluate(x), epsilon = 1e-15);
            assert!(pair.v(x) >= 0.0);
            assert_relative_eq!(pair.u(x).abs(), pair.v(x), epsilon = 1e-15);
        }
        // V = −2·χ: v = √2, u = −√2 inside the well.
        assert_relative_eq!(pair.v(0.5), 2.0f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(pair.u(0.5), -(2.0f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn sampled_factorization_exact_at_abscissae() {
        let spec = PotentialSpec {
            dimension: 1,
            profile: Profile::Sampled {
                abscissae: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
                values: vec![0.5, -1.0, 2.0, -0.25, 0.0],
            },
            support_radius: 1.0,
            radial: false,
        };
        spec.validate().unwrap();
        let pair = factorize(&spec);
        for (&x, &v) in [-1.0, -0.5, 0.0, 0.5, 1.0].iter().zip(&[0.5, -1.0, 2.0, -0.25, 0.0]) {
            assert_relative_eq!(pair.u(x) * pair.v(x), v, epsilon = 1e-15);
        }
    }

    #[test]
    fn sign_split_identities() {
        let spec = PotentialSpec {
            dimension: 1,
            profile: Profile::Sampled {
                abscissae: vec![-1.0, 0.0, 1.0],
                values: vec![1.5, -2.0, 0.5],
            },
            support_radius: 1.0,
            radial: false,
        };
        let (vp, vm) = sign_split(&spec);
        for x in [-1.0, -0.7, -0.2, 0.0, 0.4, 1.0] {
            let (p, m) = (vp.evaluate(x), vm.evaluate(x));
            assert!(p >= 0.0 && m >= 0.0);
            assert_relative_eq!(p - m, spec.evaluate(x), epsilon = 1e-15);
        }
        let well = square_well_1d(2.0, 1.0);
        let (wp, wm) = sign_split(&well);
        assert_eq!(wp.evaluate(0.0), 0.0);
        assert_relative_eq!(wm.evaluate(0.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn integral_and_bounds() {
        let spec = square_well_1d(2.0, 1.0);
        assert_relative_eq!(spec.integral(), -4.0, max_relative = 1e-12);
        assert_relative_eq!(spec.l1_norm(), 4.0, max_relative = 1e-12);
        assert_eq!(spec.bounds(), (-2.0, 0.0));

        let ball = square_well_3d(4.0, 1.0);
        // 4π ∫₀¹ (−4) r² dr = −16π/3.
        assert_relative_eq!(
            ball.integral(),
            -16.0 * std::f64::consts::PI / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn validation_catches_bad_specs() {
        let mut spec = square_well_3d(4.0, 1.0);
        spec.radial = false;
        assert!(spec.validate().is_err());

        let bad = PotentialSpec {
            dimension: 1,
            profile: Profile::SquareWell {
                depth: 1.0,
                half_width: 2.0,
            },
            support_radius: 1.0,
            radial: false,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn restriction_zeroes_factors_outside() {
        let spec = square_well_1d(2.0, 1.0);
        let pair = factorize_restricted(&spec, Restriction::Interval { a: -0.5, b: 0.5 });
        assert_eq!(pair.v(0.75), 0.0);
        assert!(pair.v(0.25) > 0.0);
    }
}
