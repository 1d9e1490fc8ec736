//! Spectral shift function curves by three pipelines: the Fredholm
//! determinant (1D), the 2-modified determinant with its trace correction
//! (1D and radial 3D), and finite-volume eigenvalue counting.
//!
//! All curves carry the same normalization: the value at the anchor (the
//! grid's left endpoint, below both spectra) is forced to 0, and the
//! determinant branch is traced continuously from a far-negative point
//! where det ≈ 1.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birman_schwinger::{
    assemble, assemble_relative, det2, det2_radial, eta_1d, fredholm_det,
    RadialDetOptions,
};
use crate::error::{Result, SsfError};
use crate::kernels::{Energy, Geometry, KernelId};
use crate::potential::{factorize, sign_split, FactorPair, PotentialSpec};
use crate::quadrature::{QuadRule, QuadratureGrid};
use crate::spectra::{count_ball_radial, count_interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Det,
    Det2,
    Counting,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Det => "det",
            Method::Det2 => "det2",
            Method::Counting => "counting",
        }
    }
}

/// A sampled SSF curve. `values[0]` is 0 by construction (anchor
/// normalization); `reliable` flags points outside exclusion zones whose
/// neighborhood the unwrap resolved.
#[derive(Debug, Clone, Serialize)]
pub struct SsfCurve {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    pub anchor: f64,
    pub epsilon_schedule: Option<Vec<f64>>,
    pub pair_id: String,
    pub reliable: Vec<bool>,
}

impl SsfCurve {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Linear interpolation; constant extension outside the grid.
    pub fn eval(&self, lambda: f64) -> f64 {
        let n = self.lambdas.len();
        if lambda <= self.lambdas[0] {
            return self.values[0];
        }
        if lambda >= self.lambdas[n - 1] {
            return self.values[n - 1];
        }
        let i = self.lambdas.partition_point(|&x| x <= lambda);
        let (x0, x1) = (self.lambdas[i - 1], self.lambdas[i]);
        let t = (lambda - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }
}

/// The determinant argument along one horizontal contour Im z = ε.
#[derive(Debug, Clone)]
pub struct BranchTrack {
    pub contour: Vec<Energy>,
    pub raw_args: Vec<f64>,
    pub unwrapped_args: Vec<f64>,
    pub epsilon: f64,
}

/// Finite domain for the counting pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Ball { radius: f64 },
}

impl DomainSpec {
    pub fn dimension(&self) -> u8 {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Ball { .. } => 3,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DomainSpec::Interval { a, b } => format!("({a}, {b})"),
            DomainSpec::Ball { radius } => format!("ball of radius {radius}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SsfOptions {
    /// Base Nyström size; each determinant is Richardson-accelerated over
    /// (m_base, 2·m_base).
    pub m_base: usize,
    /// |λ| below this is tagged unreliable (threshold zone).
    pub exclusion_radius: f64,
    /// Far-negative anchor gate: |det − 1| must not exceed this.
    pub anchor_tol: f64,
    /// First leftward extension step from the grid's left endpoint.
    pub anchor_step: f64,
    /// Extension budget: step doubles this many times before giving up.
    pub max_anchor_doublings: u32,
    /// Unwrap bisection depth per coarse gap.
    pub max_bisect_depth: u32,
    /// Channel truncation threshold for radial determinants.
    pub tau_channel: f64,
}

impl Default for SsfOptions {
    fn default() -> Self {
        SsfOptions {
            m_base: 64,
            exclusion_radius: 0.02,
            anchor_tol: 0.05,
            anchor_step: 1.0,
            max_anchor_doublings: 24,
            max_bisect_depth: 20,
            tau_channel: 1e-10,
        }
    }
}

pub const DEFAULT_EPS_SCHEDULE: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(SsfError::InvalidInput("empty λ grid".into()));
    }
    if lambdas.iter().any(|x| !x.is_finite()) {
        return Err(SsfError::NonFinite {
            context: "λ grid".into(),
        });
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SsfError::InvalidInput(
            "λ grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn validate_eps(eps: &[f64]) -> Result<Vec<f64>> {
    if eps.is_empty() {
        return Err(SsfError::InvalidInput("empty ε schedule".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(SsfError::InvalidInput(
            "ε schedule must be positive and finite".into(),
        ));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.dedup();
    Ok(sorted)
}

fn principal_diff(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = d % two_pi;
    if x > std::f64::consts::PI {
        x -= two_pi;
    } else if x <= -std::f64::consts::PI {
        x += two_pi;
    }
    x
}

/// det evaluator along a fixed-ε contour. Implementations must be pure in λ.
pub(crate) trait DetAt: Sync {
    fn det(&self, lambda: f64, eps: f64) -> Result<Complex64>;
}

struct Det1d<'a> {
    pair: &'a FactorPair,
    kernel: &'a KernelId,
    grid_lo: QuadratureGrid,
    grid_hi: QuadratureGrid,
    modified: bool,
}

impl DetAt for Det1d<'_> {
    fn det(&self, lambda: f64, eps: f64) -> Result<Complex64> {
        let z = Energy::upper_limit(lambda, eps)?;
        let eval = |grid: &QuadratureGrid| -> Result<Complex64> {
            let op = assemble(self.pair, self.kernel, &z, grid)?;
            if self.modified {
                det2(&op)
            } else {
                fredholm_det(&op)
            }
        };
        let d_lo = eval(&self.grid_lo)?;
        let d_hi = eval(&self.grid_hi)?;
        Ok((4.0 * d_hi - d_lo) / 3.0)
    }
}

struct Det3dRadial<'a> {
    pair: &'a FactorPair,
    kernel: &'a KernelId,
    m_base: usize,
    tau_channel: f64,
}

impl DetAt for Det3dRadial<'_> {
    fn det(&self, lambda: f64, eps: f64) -> Result<Complex64> {
        let z = Energy::upper_limit(lambda, eps)?;
        let eval = |m: usize| -> Result<Complex64> {
            let opts = RadialDetOptions {
                tau_channel: self.tau_channel,
                m,
                ..RadialDetOptions::default()
            };
            Ok(det2_radial(self.pair, self.kernel, &z, &opts)?.value)
        };
        let d_lo = eval(self.m_base)?;
        let d_hi = eval(2 * self.m_base)?;
        Ok((4.0 * d_hi - d_lo) / 3.0)
    }
}

struct DetRelative<'a> {
    pair_w: &'a FactorPair,
    pair_bg: &'a FactorPair,
    kernel: &'a KernelId,
    grid_lo: QuadratureGrid,
    grid_hi: QuadratureGrid,
}

impl DetAt for DetRelative<'_> {
    fn det(&self, lambda: f64, eps: f64) -> Result<Complex64> {
        let z = Energy::upper_limit(lambda, eps)?;
        let eval = |grid: &QuadratureGrid| -> Result<Complex64> {
            let op = assemble_relative(self.pair_w, self.pair_bg, self.kernel, &z, grid)?;
            fredholm_det(&op)
        };
        let d_lo = eval(&self.grid_lo)?;
        let d_hi = eval(&self.grid_hi)?;
        Ok((4.0 * d_hi - d_lo) / 3.0)
    }
}

fn refine_gap(
    det_at: &dyn DetAt,
    eps: f64,
    left: (f64, f64),
    right: (f64, f64),
    depth: u32,
) -> Result<Vec<(f64, f64)>> {
    if principal_diff(right.1 - left.1).abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(Vec::new());
    }
    if depth == 0 {
        return Err(SsfError::UnwrapFailure {
            lambda: 0.5 * (left.0 + right.0),
            depth: 0,
        });
    }
    let lm = 0.5 * (left.0 + right.0);
    let dm = det_at.det(lm, eps)?;
    let mid = (lm, dm.arg());
    let mut out = refine_gap(det_at, eps, left, mid, depth - 1)?;
    out.push(mid);
    out.extend(refine_gap(det_at, eps, mid, right, depth - 1)?);
    Ok(out)
}

struct PerEps {
    track: BranchTrack,
    /// Unwrapped arg at each user grid point.
    user_args: Vec<f64>,
}

/// Evaluate, anchor, refine and unwrap one horizontal contour.
fn trace_branch(
    det_at: &dyn DetAt,
    lambdas: &[f64],
    eps: f64,
    opts: &SsfOptions,
) -> Result<PerEps> {
    // Extend leftward from the grid start until the determinant is near 1,
    // so the branch has an unambiguous starting point.
    let mut chain: Vec<(f64, Complex64)> = Vec::new();
    let mut anchored = false;
    for j in 0..=opts.max_anchor_doublings {
        let lam = lambdas[0] - opts.anchor_step * ((1u64 << j) - 1) as f64;
        let d = det_at.det(lam, eps)?;
        chain.push((lam, d));
        let dev = (d - Complex64::new(1.0, 0.0)).norm();
        if dev <= opts.anchor_tol {
            anchored = true;
            break;
        }
        if j == opts.max_anchor_doublings {
            return Err(SsfError::AnchorNotConverged {
                lambda: lam,
                deviation: dev,
                tol: opts.anchor_tol,
            });
        }
    }
    if !anchored {
        let (lam, d) = *chain.last().unwrap();
        return Err(SsfError::AnchorNotConverged {
            lambda: lam,
            deviation: (d - Complex64::new(1.0, 0.0)).norm(),
            tol: opts.anchor_tol,
        });
    }
    chain.reverse(); // ascending in λ, ending at lambdas[0]

    let user_dets: Vec<Complex64> = lambdas[1..]
        .par_iter()
        .map(|&lam| det_at.det(lam, eps))
        .collect::<Result<_>>()?;

    let mut coarse: Vec<(f64, f64)> = chain.iter().map(|&(l, d)| (l, d.arg())).collect();
    coarse.extend(
        lambdas[1..]
            .iter()
            .zip(&user_dets)
            .map(|(&l, d)| (l, d.arg())),
    );

    // Refine every coarse gap until consecutive raw args differ by < π/2.
    let mut refined: Vec<(f64, f64)> = Vec::with_capacity(coarse.len());
    refined.push(coarse[0]);
    for w in 0..coarse.len() - 1 {
        let extra = refine_gap(det_at, eps, coarse[w], coarse[w + 1], opts.max_bisect_depth)?;
        refined.extend(extra);
        refined.push(coarse[w + 1]);
    }

    let mut unwrapped = Vec::with_capacity(refined.len());
    unwrapped.push(refined[0].1);
    for i in 1..refined.len() {
        let d = principal_diff(refined[i].1 - refined[i - 1].1);
        unwrapped.push(unwrapped[i - 1] + d);
    }

    // Pull out the user-grid values (user λs are bitwise-preserved).
    let mut user_args = Vec::with_capacity(lambdas.len());
    let mut j = 0usize;
    for (i, &(lam, _)) in refined.iter().enumerate() {
        if j < lambdas.len() && lam == lambdas[j] {
            user_args.push(unwrapped[i]);
            j += 1;
        }
    }
    if user_args.len() != lambdas.len() {
        return Err(SsfError::NonFinite {
            context: "unwrap bookkeeping lost grid points".into(),
        });
    }

    let contour: Vec<Energy> = refined
        .iter()
        .map(|&(l, _)| Energy::upper_limit(l, eps))
        .collect::<Result<_>>()?;
    let track = BranchTrack {
        contour,
        raw_args: refined.iter().map(|&(_, a)| a).collect(),
        unwrapped_args: unwrapped,
        epsilon: eps,
    };
    Ok(PerEps { track, user_args })
}

/// Richardson (linear-in-ε) extrapolation using the two smallest ε's.
fn extrapolate(eps: &[f64], per_eps: &[Vec<f64>]) -> Vec<f64> {
    let n = per_eps[0].len();
    if eps.len() == 1 {
        return per_eps[0].clone();
    }
    let k = eps.len();
    let (ea, eb) = (eps[k - 2], eps[k - 1]);
    let (fa, fb) = (&per_eps[k - 2], &per_eps[k - 1]);
    (0..n)
        .map(|i| (ea * fb[i] - eb * fa[i]) / (ea - eb))
        .collect()
}

fn reliability(lambdas: &[f64], values: &[f64], exclusion_radius: f64) -> Vec<bool> {
    let n = lambdas.len();
    (0..n)
        .map(|i| {
            if lambdas[i].abs() <= exclusion_radius {
                return false;
            }
            let jump_left = i > 0 && (values[i] - values[i - 1]).abs() >= 0.5;
            let jump_right = i + 1 < n && (values[i + 1] - values[i]).abs() >= 0.5;
            !(jump_left || jump_right)
        })
        .collect()
}

fn finish_curve(
    lambdas: &[f64],
    mut values: Vec<f64>,
    method: Method,
    eps: Option<Vec<f64>>,
    pair_id: String,
    exclusion_radius: f64,
) -> SsfCurve {
    let shift = values[0];
    for v in values.iter_mut() {
        *v -= shift;
    }
    values[0] = 0.0;
    let reliable = reliability(lambdas, &values, exclusion_radius);
    SsfCurve {
        lambdas: lambdas.to_vec(),
        values,
        method,
        anchor: lambdas[0],
        epsilon_schedule: eps,
        pair_id,
        reliable,
    }
}

fn run_det_pipeline(
    det_at: &dyn DetAt,
    lambdas: &[f64],
    eps: &[f64],
    opts: &SsfOptions,
    per_eps_extra: impl Fn(f64, f64) -> f64,
) -> Result<(Vec<f64>, Vec<BranchTrack>)> {
    let mut tracks = Vec::with_capacity(eps.len());
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(eps.len());
    for &e in eps {
        let traced = trace_branch(det_at, lambdas, e, opts)?;
        let xi: Vec<f64> = lambdas
            .iter()
            .zip(&traced.user_args)
            .map(|(&lam, &arg)| arg / std::f64::consts::PI + per_eps_extra(lam, e))
            .collect();
        cols.push(xi);
        tracks.push(traced.track);
    }
    Ok((extrapolate(eps, &cols), tracks))
}

/// ξ by the full Fredholm determinant: 1D, full line.
pub fn ssf_det(
    spec: &PotentialSpec,
    kernel: &KernelId,
    lambdas: &[f64],
    eps_schedule: &[f64],
) -> Result<SsfCurve> {
    ssf_det_opts(spec, kernel, lambdas, eps_schedule, &SsfOptions::default()).map(|(c, _)| c)
}

pub fn ssf_det_opts(
    spec: &PotentialSpec,
    kernel: &KernelId,
    lambdas: &[f64],
    eps_schedule: &[f64],
    opts: &SsfOptions,
) -> Result<(SsfCurve, Vec<BranchTrack>)> {
    validate_grid(lambdas)?;
    let eps = validate_eps(eps_schedule)?;
    if kernel.dimension != 1 || kernel.geometry != Geometry::FullSpace {
        return Err(SsfError::InvalidInput(
            "ssf_det runs on the full line in dimension 1".into(),
        ));
    }
    let pair = factorize(spec);
    let (a, b) = spec.support();
    let det_at = Det1d {
        pair: &pair,
        kernel,
        grid_lo: QuadratureGrid::on_interval(QuadRule::GaussLegendre, a, b, opts.m_base)?,
        grid_hi: QuadratureGrid::on_interval(QuadRule::GaussLegendre, a, b, 2 * opts.m_base)?,
        modified: false,
    };
    let (vals, tracks) = run_det_pipeline(&det_at, lambdas, &eps, opts, |_, _| 0.0)?;
    let pair_id = format!("(H0+V, H0) on the line; V: {}", spec.describe());
    Ok((
        finish_curve(
            lambdas,
            vals,
            Method::Det,
            Some(eps),
            pair_id,
            opts.exclusion_radius,
        ),
        tracks,
    ))
}

/// ξ by the 2-modified determinant plus trace correction: 1D or radial 3D.
pub fn ssf_det2(
    spec: &PotentialSpec,
    kernel: &KernelId,
    lambdas: &[f64],
    eps_schedule: &[f64],
) -> Result<SsfCurve> {
    ssf_det2_opts(spec, kernel, lambdas, eps_schedule, &SsfOptions::default()).map(|(c, _)| c)
}

pub fn ssf_det2_opts(
    spec: &PotentialSpec,
    kernel: &KernelId,
    lambdas: &[f64],
    eps_schedule: &[f64],
    opts: &SsfOptions,
) -> Result<(SsfCurve, Vec<BranchTrack>)> {
    validate_grid(lambdas)?;
    let eps = validate_eps(eps_schedule)?;
    if kernel.geometry != Geometry::FullSpace {
        return Err(SsfError::InvalidInput(
            "ssf_det2 runs on full space".into(),
        ));
    }
    let pair = factorize(spec);
    let (a, b) = spec.support();
    let pair_id = format!(
        "(H0+V, H0) in {}D; V: {}",
        kernel.dimension,
        spec.describe()
    );
    match kernel.dimension {
        1 => {
            let grid = QuadratureGrid::on_interval(QuadRule::GaussLegendre, a, b, 256)?;
            let etac = eta_1d(&pair, &grid);
            let det_at = Det1d {
                pair: &pair,
                kernel,
                grid_lo: QuadratureGrid::on_interval(QuadRule::GaussLegendre, a, b, opts.m_base)?,
                grid_hi: QuadratureGrid::on_interval(
                    QuadRule::GaussLegendre,
                    a,
                    b,
                    2 * opts.m_base,
                )?,
                modified: true,
            };
            // The η term is smooth in ε; add it per-ε so the extrapolation
            // sees the full λ+iε quantity.
            let extra = |lam: f64, e: f64| -> f64 {
                etac.eval(Complex64::new(lam, e)).im / std::f64::consts::PI
            };
            let (vals, tracks) = run_det_pipeline(&det_at, lambdas, &eps, opts, extra)?;
            Ok((
                finish_curve(
                    lambdas,
                    vals,
                    Method::Det2,
                    Some(eps),
                    pair_id,
                    opts.exclusion_radius,
                ),
                tracks,
            ))
        }
        3 => {
            if !spec.radial {
                return Err(SsfError::InvalidInput(
                    "3D det₂ pipeline needs a radial potential".into(),
                ));
            }
            let det_at = Det3dRadial {
                pair: &pair,
                kernel,
                m_base: opts.m_base,
                tau_channel: opts.tau_channel,
            };
            let (mut vals, tracks) = run_det_pipeline(&det_at, lambdas, &eps, opts, |_, _| 0.0)?;
            // Explicit real-λ correction: λ^{1/2}·∫V/(4π²) above the
            // threshold, zero below it.
            let iv = spec.integral();
            let c = iv / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
            for (v, &lam) in vals.iter_mut().zip(lambdas) {
                if lam > 0.0 {
                    *v += lam.sqrt() * c;
                }
            }
            Ok((
                finish_curve(
                    lambdas,
                    vals,
                    Method::Det2,
                    Some(eps),
                    pair_id,
                    opts.exclusion_radius,
                ),
                tracks,
            ))
        }
        d => Err(SsfError::InvalidInput(format!(
            "no det₂ pipeline for dimension {d}"
        ))),
    }
}

/// ξ_j(λ) = N_{H₀,domain}(λ) − N_{H,domain}(λ): the finite-volume counting
/// curve, integer-valued, sign fixed so V ≥ 0 gives ξ ≥ 0.
pub fn ssf_counting(
    spec: &PotentialSpec,
    domain: &DomainSpec,
    lambdas: &[f64],
) -> Result<SsfCurve> {
    validate_grid(lambdas)?;
    if spec.dimension != domain.dimension() {
        return Err(SsfError::InvalidInput(
            "potential dimension must match the domain".into(),
        ));
    }
    let free = free_spec_like(spec);
    let counts: Vec<(usize, usize, bool)> = lambdas
        .par_iter()
        .map(|&lam| -> Result<(usize, usize, bool)> {
            let (n_free, n_full) = match *domain {
                DomainSpec::Interval { a, b } => (
                    count_interval(&free, a, b, lam)?,
                    count_interval(spec, a, b, lam)?,
                ),
                DomainSpec::Ball { radius } => (
                    count_ball_radial(&free, radius, lam)?,
                    count_ball_radial(spec, radius, lam)?,
                ),
            };
            Ok((
                n_free.count,
                n_full.count,
                n_free.ambiguous || n_full.ambiguous,
            ))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = counts
        .iter()
        .map(|&(n0, nv, _)| n0 as f64 - nv as f64)
        .collect();
    let pair_id = format!(
        "(H0+V, H0) on {}; V: {}",
        domain.describe(),
        spec.describe()
    );
    let mut curve = finish_curve(lambdas, values, Method::Counting, None, pair_id, -1.0);
    // Counting reliability is about eigenvalue coincidence, not thresholds.
    curve.reliable = counts.iter().map(|&(_, _, amb)| !amb).collect();
    Ok(curve)
}

fn free_spec_like(spec: &PotentialSpec) -> PotentialSpec {
    PotentialSpec {
        dimension: spec.dimension,
        profile: crate::potential::Profile::SquareWell {
            depth: 0.0,
            half_width: spec.support_radius.min(1.0).max(1e-3),
        },
        support_radius: spec.support_radius,
        radial: spec.radial,
    }
}

/// Where the chain-rule identity is exercised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainDomain {
    /// Determinant pipeline on the full line.
    FullLineDet,
    /// Counting pipeline on a box (identity exact in integers).
    Box { a: f64, b: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainRuleReport {
    pub lambdas: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_plus: Vec<f64>,
    pub xi_minus: Vec<f64>,
    /// sup |ξ − (ξ₊ − ξ₋)|.
    pub residual_sup: f64,
    pub min_xi_plus: f64,
    pub min_xi_minus: f64,
    pub method: Method,
}

/// Split V = V₊ − V₋ and compare ξ(H, H₀) with ξ₊ − ξ₋ where
/// ξ₊ = ξ(H₀+V₊, H₀) and ξ₋ = −ξ(H, H₀+V₊). Both split terms must be ≥ 0.
pub fn chain_rule_check(
    spec: &PotentialSpec,
    domain: ChainDomain,
    lambdas: &[f64],
    eps_schedule: Option<&[f64]>,
) -> Result<ChainRuleReport> {
    validate_grid(lambdas)?;
    let (plus, minus) = sign_split(spec);
    match domain {
        ChainDomain::Box { a, b } => {
            let n = |s: &PotentialSpec, lam: f64| -> Result<usize> {
                Ok(count_interval(s, a, b, lam)?.count)
            };
            let free = free_spec_like(spec);
            let rows: Vec<(f64, f64, f64)> = lambdas
                .par_iter()
                .map(|&lam| -> Result<(f64, f64, f64)> {
                    let n0 = n(&free, lam)? as f64;
                    let np = n(&plus, lam)? as f64;
                    let nv = n(spec, lam)? as f64;
                    Ok((n0 - nv, n0 - np, nv - np))
                })
                .collect::<Result<_>>()?;
            let xi: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let xi_plus: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let xi_minus: Vec<f64> = rows.iter().map(|r| r.2).collect();
            Ok(build_report(
                lambdas,
                xi,
                xi_plus,
                xi_minus,
                Method::Counting,
            ))
        }
        ChainDomain::FullLineDet => {
            let eps_default = DEFAULT_EPS_SCHEDULE;
            let eps = eps_schedule.unwrap_or(&eps_default);
            let kernel = KernelId::new(1, Geometry::FullSpace)?;
            let opts = SsfOptions::default();
            let xi = ssf_det_opts(spec, &kernel, lambdas, eps, &opts)?.0;
            let xi_plus = if plus.bounds() == (0.0, 0.0) {
                vec![0.0; lambdas.len()]
            } else {
                ssf_det_opts(&plus, &kernel, lambdas, eps, &opts)?.0.values
            };
            let xi_neg = if minus.bounds() == (0.0, 0.0) {
                vec![0.0; lambdas.len()]
            } else {
                // ξ(H, H₀+V₊): determinant of the pair with background V₊.
                let pair_bg = factorize(&plus);
                let w_spec = minus.negated();
                let pair_w = factorize(&w_spec);
                let (a, b) = spec.support();
                let eps_sorted = validate_eps(eps)?;
                let det_at = DetRelative {
                    pair_w: &pair_w,
                    pair_bg: &pair_bg,
                    kernel: &kernel,
                    grid_lo: QuadratureGrid::on_interval(
                        QuadRule::GaussLegendre,
                        a,
                        b,
                        opts.m_base,
                    )?,
                    grid_hi: QuadratureGrid::on_interval(
                        QuadRule::GaussLegendre,
                        a,
                        b,
                        2 * opts.m_base,
                    )?,
                };
                let (mut vals, _) =
                    run_det_pipeline(&det_at, lambdas, &eps_sorted, &opts, |_, _| 0.0)?;
                let shift = vals[0];
                for v in vals.iter_mut() {
                    *v -= shift;
                }
                vals
            };
            let xi_minus: Vec<f64> = xi_neg.iter().map(|&v| -v).collect();
            let xi_vals = xi.values;
            let xp = xi_plus;
            Ok(build_report(lambdas, xi_vals, xp, xi_minus, Method::Det))
        }
    }
}

fn build_report(
    lambdas: &[f64],
    xi: Vec<f64>,
    xi_plus: Vec<f64>,
    xi_minus: Vec<f64>,
    method: Method,
) -> ChainRuleReport {
    let residual_sup = xi
        .iter()
        .zip(xi_plus.iter().zip(&xi_minus))
        .map(|(&x, (&p, &m))| (x - (p - m)).abs())
        .fold(0.0f64, f64::max);
    let min_xi_plus = xi_plus.iter().copied().fold(f64::INFINITY, f64::min);
    let min_xi_minus = xi_minus.iter().copied().fold(f64::INFINITY, f64::min);
    ChainRuleReport {
        lambdas: lambdas.to_vec(),
        xi,
        xi_plus,
        xi_minus,
        residual_sup,
        min_xi_plus,
        min_xi_minus,
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{square_well_1d, PotentialSpec, Profile};
    use crate::spectra::ground_state_energy;

    fn line_kernel() -> KernelId {
        KernelId::new(1, Geometry::FullSpace).unwrap()
    }

    fn grid(from: f64, to: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn zero_potential_gives_zero_curves() {
        let spec = square_well_1d(0.0, 1.0);
        let lambdas = grid(-2.0, 3.0, 11);
        let det = ssf_det(&spec, &line_kernel(), &lambdas, &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!(det.values.iter().all(|v| v.abs() < 1e-12));
        let cnt = ssf_counting(
            &spec,
            &DomainSpec::Interval { a: -10.0, b: 10.0 },
            &lambdas,
        )
        .unwrap();
        assert!(cnt.values.iter().all(|&v| v == 0.0));
        assert_eq!(det.anchor, lambdas[0]);
        assert_eq!(det.values[0], 0.0);
    }

    #[test]
    fn square_well_det_curve_has_minus_one_plateau() {
        let spec = square_well_1d(2.0, 1.0);
        let e0 = ground_state_energy(&spec, -40.0, 40.0).unwrap();
        assert!(e0 < -1.0 && e0 > -2.0);
        let lambdas = vec![-2.0, -1.6, -1.1, -0.8, -0.6, -0.4, -0.1];
        let curve = ssf_det(&spec, &line_kernel(), &lambdas, &DEFAULT_EPS_SCHEDULE).unwrap();
        for (lam, v) in curve.lambdas.iter().zip(&curve.values) {
            if *lam > e0 + 0.02 && *lam < -0.02 {
                assert!((v + 1.0).abs() < 1e-2, "ξ({lam}) = {v}");
            }
            if *lam < e0 - 0.02 {
                assert!(v.abs() < 1e-2, "ξ({lam}) = {v}");
            }
        }
    }

    #[test]
    fn counting_curve_square_well() {
        let spec = square_well_1d(2.0, 1.0);
        let lambdas = vec![-2.0, -1.5, -0.05];
        let curve = ssf_counting(
            &spec,
            &DomainSpec::Interval { a: -20.0, b: 20.0 },
            &lambdas,
        )
        .unwrap();
        assert_eq!(curve.values[2], -1.0);
        assert!(curve.values.iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn nonnegative_bump_keeps_curves_nonnegative() {
        let spec = PotentialSpec {
            dimension: 1,
            profile: Profile::Gaussian {
                amplitude: 1.0,
                width: 0.7,
            },
            support_radius: 6.0,
            radial: false,
        };
        spec.validate().unwrap();
        let lambdas = grid(-1.0, 6.0, 15);
        let det = ssf_det(&spec, &line_kernel(), &lambdas, &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!(det.values.iter().all(|&v| v >= -0.01), "{:?}", det.values);
        let cnt = ssf_counting(
            &spec,
            &DomainSpec::Interval { a: -15.0, b: 15.0 },
            &lambdas,
        )
        .unwrap();
        assert!(cnt.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn chain_rule_exact_for_counting_on_mixed_sign_potential() {
        let spec = PotentialSpec {
            dimension: 1,
            profile: Profile::Sampled {
                abscissae: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
                values: vec![0.0, 1.5, 0.0, -3.0, 0.0],
            },
            support_radius: 2.0,
            radial: false,
        };
        spec.validate().unwrap();
        let lambdas = grid(-3.0, 12.0, 31);
        let report =
            chain_rule_check(&spec, ChainDomain::Box { a: -12.0, b: 12.0 }, &lambdas, None)
                .unwrap();
        assert_eq!(report.residual_sup, 0.0);
        assert!(report.min_xi_plus >= 0.0);
        assert!(report.min_xi_minus >= 0.0);
    }

    #[test]
    fn chain_rule_sign_definite_leaves_one_term_zero() {
        let spec = square_well_1d(2.0, 1.0);
        let lambdas = grid(-3.0, 5.0, 17);
        let report =
            chain_rule_check(&spec, ChainDomain::Box { a: -15.0, b: 15.0 }, &lambdas, None)
                .unwrap();
        assert!(report.xi_plus.iter().all(|&v| v == 0.0));
        assert_eq!(report.residual_sup, 0.0);
    }

    #[test]
    fn branch_tracks_satisfy_step_bound() {
        let spec = square_well_1d(2.0, 1.0);
        let lambdas = grid(-2.0, 2.0, 9);
        let (_, tracks) = ssf_det_opts(
            &spec,
            &line_kernel(),
            &lambdas,
            &DEFAULT_EPS_SCHEDULE,
            &SsfOptions::default(),
        )
        .unwrap();
        for t in &tracks {
            assert!(!t.unwrapped_args.is_empty());
            assert!(t.unwrapped_args[0].abs() < 0.06, "anchor arg ≈ 0");
            for w in t.unwrapped_args.windows(2) {
                assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
            }
        }
    }

    #[test]
    fn anchor_extension_gives_up_on_huge_potentials() {
        let spec = square_well_1d(400.0, 1.0);
        let lambdas = vec![-402.0, -401.0];
        let opts = SsfOptions {
            max_anchor_doublings: 10,
            ..SsfOptions::default()
        };
        let err = ssf_det_opts(
            &spec,
            &line_kernel(),
            &lambdas,
            &DEFAULT_EPS_SCHEDULE,
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, SsfError::AnchorNotConverged { .. }));
    }

    #[test]
    fn exclusion_radius_tags_threshold_points() {
        let spec = square_well_1d(2.0, 1.0);
        let lambdas = vec![-2.0, -0.5, -0.01, 0.015, 0.5, 1.0];
        let curve = ssf_det(&spec, &line_kernel(), &lambdas, &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!(!curve.reliable[2]);
        assert!(!curve.reliable[3]);
        assert!(curve.reliable[4]);
    }
}
