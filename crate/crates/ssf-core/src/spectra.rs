//! Dirichlet eigenvalue counting by Sturm oscillation: modified Prüfer
//! phase on 1D intervals, and per-channel radial shooting with (2ℓ+1)
//! degeneracies on balls.
//!
//! The phase θ satisfies θ(a) = 0, crosses multiples of π upward only
//! (θ' = S > 0 there), and N(λ) = ⌊θ(b)/π⌋. Piecewise-constant potentials
//! advance the phase in closed form per segment; everything else uses an
//! embedded Runge-Kutta pair on the rescaled equation.

use rayon::prelude::*;

use crate::error::{Result, SsfError};
use crate::potential::PotentialSpec;

/// Hyperbolic cells are subdivided so κ·h never exceeds this (cosh stays
/// finite; the pair is renormalized after each cell anyway).
const MAX_KAPPA_H: f64 = 80.0;
/// Per-step absolute tolerance of the adaptive integrator.
const RK_TOL: f64 = 1e-10;
/// Coincidence tolerance in λ: phase distance to πℤ under this many units
/// of dθ/dλ raises the ambiguity flag instead of a silent tie-break.
const LAMBDA_COINCIDENCE: f64 = 1e-9;

/// One channel's contribution to a ball count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelCount {
    pub l: usize,
    pub count: usize,
    pub multiplicity: u32,
}

/// Eigenvalue count strictly below `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub lambda: f64,
    pub count: usize,
    /// Present for ball counts; `count` = Σ (2ℓ+1)·channel count.
    pub per_channel: Option<Vec<ChannelCount>>,
    /// λ sits within the coincidence tolerance of an eigenvalue.
    pub ambiguous: bool,
    /// Both admissible counts when ambiguous.
    pub candidates: Option<(usize, usize)>,
}

/// Prüfer phase θ = kπ + ρ with ρ ∈ [0, π), plus a running estimate of
/// dθ/dλ used to translate phase proximity into λ proximity.
#[derive(Debug, Clone, Copy)]
struct Phase {
    k: usize,
    rho: f64,
    dtheta_dlambda: f64,
}

impl Phase {
    fn start() -> Self {
        Phase {
            k: 0,
            rho: 0.0,
            dtheta_dlambda: 0.0,
        }
    }

    fn theta(&self) -> f64 {
        self.k as f64 * std::f64::consts::PI + self.rho
    }

    /// Fold a raw phase value θ ≥ 0 back into (k, ρ).
    fn absorb(&mut self, theta: f64) {
        debug_assert!(theta >= -1e-12);
        let t = theta.max(0.0);
        let k = (t / std::f64::consts::PI).floor();
        self.k += k as usize;
        self.rho = t - k * std::f64::consts::PI;
        if self.rho >= std::f64::consts::PI {
            self.k += 1;
            self.rho -= std::f64::consts::PI;
        }
    }
}

/// tan ρ_b = (S_b/S_a) tan ρ_a, branch kept in [0, π).
fn remap(rho: f64, s_from: f64, s_to: f64) -> f64 {
    if rho == 0.0 || s_from == s_to {
        return rho;
    }
    let r = (s_to * rho.sin()).atan2(s_from * rho.cos());
    if r < 0.0 {
        r + std::f64::consts::PI
    } else {
        r
    }
}

/// Exact phase advance over a cell of constant potential `v`.
/// `s_prev` is the scaling the incoming ρ is expressed in.
fn advance_const_cell(phase: &mut Phase, lambda: f64, v: f64, h: f64, s_prev: f64) -> f64 {
    let om2 = lambda - v;
    if om2 > 1.0 {
        // Oscillatory: scaling S = ω, phase advances linearly.
        let om = om2.sqrt();
        let rho = remap(phase.rho, s_prev, om);
        let end = rho + om * h;
        phase.rho = 0.0;
        let k0 = phase.k;
        phase.absorb(end);
        debug_assert!(phase.k >= k0);
        phase.dtheta_dlambda += h / (2.0 * om);
        om
    } else {
        // Hyperbolic / marginal: scaling 1, propagate (u, u') exactly.
        let kap2 = v - lambda;
        let mut u = phase.rho.sin();
        let mut du = s_prev * phase.rho.cos();
        let n_sub = if kap2 > 0.0 {
            ((kap2.sqrt() * h) / MAX_KAPPA_H).ceil().max(1.0) as usize
        } else if kap2 < 0.0 {
            // Trigonometric sub-case: node spacing is π/ω, so ω·hs ≤ 1
            // leaves at most one sign change per sub-cell.
            ((-kap2).sqrt() * h).ceil().max(1.0) as usize
        } else {
            1
        };
        let hs = h / n_sub as f64;
        for _ in 0..n_sub {
            let (u1, du1) = if kap2.abs() < 1e-14 {
                (u + du * hs, du)
            } else if kap2 > 0.0 {
                let kap = kap2.sqrt();
                let (ch, sh) = ((kap * hs).cosh(), (kap * hs).sinh());
                (u * ch + du * sh / kap, u * kap * sh + du * ch)
            } else {
                // 0 < λ − v ≤ 1: trigonometric but kept in the pair form.
                let om = (-kap2).sqrt();
                let (c, s) = ((om * hs).cos(), (om * hs).sin());
                (u * c + du * s / om, -u * om * s + du * c)
            };
            // The pair is only defined up to overall sign, so nodes
            // alternate crossing direction; every sign change is one
            // upward π-crossing of θ (θ' = S > 0 at nodes).
            if (u > 0.0 && u1 <= 0.0) || (u < 0.0 && u1 >= 0.0) {
                phase.k += 1;
            }
            u = u1;
            du = du1;
            let m = u.abs().max(du.abs());
            if m > 0.0 {
                u /= m;
                du /= m;
            }
            phase.dtheta_dlambda += hs / 2.0;
        }
        let r = u.atan2(du);
        phase.rho = if r < 0.0 {
            r + std::f64::consts::PI
        } else if r >= std::f64::consts::PI {
            r - std::f64::consts::PI
        } else {
            r
        };
        1.0
    }
}

// Cash-Karp embedded pair.
const CK_A: [f64; 5] = [1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0];
const CK_B: [[f64; 5]; 5] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0.0, 0.0],
    [-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CK_C5: [f64; 6] = [
    37.0 / 378.0,
    0.0,
    250.0 / 621.0,
    125.0 / 594.0,
    0.0,
    512.0 / 1771.0,
];
const CK_C4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    1.0 / 4.0,
];

/// Adaptive Cash-Karp integration of θ' = S + (λ − V(x) − S²)·sin²θ / S over
/// [x0, x0+h] with frozen scaling S. Returns the raw end phase (θ_in = ρ).
fn rk_chunk<F: Fn(f64) -> f64>(
    v: &F,
    lambda: f64,
    s: f64,
    x0: f64,
    h_total: f64,
    rho_in: f64,
) -> Result<f64> {
    let f = |x: f64, th: f64| -> f64 {
        let sin = th.sin();
        s + (lambda - v(x) - s * s) * sin * sin / s
    };
    let mut x = x0;
    let mut th = rho_in;
    let mut h = h_total.min(0.1 / s.max(1.0)).max(1e-12);
    let x_end = x0 + h_total;
    let mut steps = 0usize;
    while x < x_end {
        if x + h > x_end {
            h = x_end - x;
        }
        let mut kst = [0.0f64; 6];
        kst[0] = f(x, th);
        for i in 0..5 {
            let mut acc = 0.0;
            for (j, kj) in kst.iter().enumerate().take(i + 1) {
                acc += CK_B[i][j] * kj;
            }
            kst[i + 1] = f(x + CK_A[i] * h, th + h * acc);
        }
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for i in 0..6 {
            d5 += CK_C5[i] * kst[i];
            d4 += CK_C4[i] * kst[i];
        }
        let err = (h * (d5 - d4)).abs();
        if err <= RK_TOL || h <= 1e-13 * h_total.max(1.0) {
            x += h;
            th += h * d5;
            steps += 1;
            if steps > 4_000_000 {
                return Err(SsfError::NonFinite {
                    context: "phase integration exceeded step budget".into(),
                });
            }
        }
        let scale = if err > 0.0 {
            0.9 * (RK_TOL / err).powf(0.2)
        } else {
            5.0
        };
        h *= scale.clamp(0.2, 5.0);
    }
    if !th.is_finite() {
        return Err(SsfError::NonFinite {
            context: "phase integration produced a non-finite phase".into(),
        });
    }
    Ok(th)
}

struct SweepOutcome {
    phase: Phase,
}

/// March the phase across [a, b] for V_eff(x) = V(x) + centrifugal(x).
/// `pieces` triggers the closed-form path (1D or ℓ = 0 only).
fn sweep<F: Fn(f64) -> f64 + Sync>(
    v_eff: &F,
    edges: &[f64],
    lambda: f64,
    exact_values: Option<&[f64]>,
    start: Phase,
) -> Result<SweepOutcome> {
    let mut phase = start;
    let mut s_prev = 1.0f64.max(0.0);
    if let Some(vals) = exact_values {
        for (i, w) in edges.windows(2).enumerate() {
            let h = w[1] - w[0];
            if h <= 0.0 {
                continue;
            }
            s_prev = advance_const_cell(&mut phase, lambda, vals[i], h, s_prev);
        }
    } else {
        for w in edges.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let len = x1 - x0;
            if len <= 0.0 {
                continue;
            }
            // Chunks short enough that the frozen scaling tracks V.
            let n = (len / 0.5).ceil().max(1.0) as usize;
            let hc = len / n as f64;
            for j in 0..n {
                let xl = x0 + j as f64 * hc;
                let vm = v_eff(xl + 0.5 * hc);
                let s = (lambda - vm).max(1.0).sqrt();
                let rho = remap(phase.rho, s_prev, s);
                phase.rho = 0.0;
                let end = rk_chunk(v_eff, lambda, s, xl, hc, rho)?;
                phase.absorb(end);
                phase.dtheta_dlambda += hc / (2.0 * s);
                s_prev = s;
            }
        }
    }
    Ok(SweepOutcome { phase })
}

fn finish(lambda: f64, phase: Phase, per_channel: Option<Vec<ChannelCount>>) -> CountResult {
    let theta = phase.theta();
    let pi = std::f64::consts::PI;
    let dist = (phase.rho).min(pi - phase.rho);
    let threshold = (LAMBDA_COINCIDENCE * phase.dtheta_dlambda.max(1e-3)).max(1e-12);
    let near = dist < threshold;
    let n_round = (theta / pi).round() as usize;
    if near && n_round >= 1 {
        CountResult {
            lambda,
            count: n_round - 1,
            per_channel,
            ambiguous: true,
            candidates: Some((n_round - 1, n_round)),
        }
    } else {
        CountResult {
            lambda,
            count: phase.k,
            per_channel,
            ambiguous: false,
            candidates: None,
        }
    }
}

fn interval_edges(spec: &PotentialSpec, a: f64, b: f64) -> Vec<f64> {
    let mut edges = vec![a];
    let mut bps: Vec<f64> = spec
        .breakpoints()
        .into_iter()
        .filter(|&x| x > a && x < b)
        .collect();
    bps.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.extend(bps);
    edges.push(b);
    edges.dedup();
    edges
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CountOptions {
    /// Skip the closed-form piecewise-constant path (cross-checks).
    pub force_rk: bool,
}

/// Dirichlet eigenvalues of −d²/dx² + V on (a, b) strictly below λ.
pub fn count_interval(spec: &PotentialSpec, a: f64, b: f64, lambda: f64) -> Result<CountResult> {
    count_interval_opts(spec, a, b, lambda, CountOptions::default())
}

pub fn count_interval_opts(
    spec: &PotentialSpec,
    a: f64,
    b: f64,
    lambda: f64,
    opts: CountOptions,
) -> Result<CountResult> {
    if !(a < b) || !lambda.is_finite() {
        return Err(SsfError::InvalidInput(
            "count_interval needs a < b and finite λ".into(),
        ));
    }
    if spec.dimension != 1 {
        return Err(SsfError::InvalidInput(
            "count_interval takes 1D potentials; use count_ball_radial".into(),
        ));
    }
    let edges = interval_edges(spec, a, b);
    let exact: Option<Vec<f64>> = if opts.force_rk {
        None
    } else {
        spec.const_pieces().map(|_| {
            edges
                .windows(2)
                .map(|w| spec.evaluate(0.5 * (w[0] + w[1])))
                .collect()
        })
    };
    let v = |x: f64| spec.evaluate(x);
    let out = sweep(&v, &edges, lambda, exact.as_deref(), Phase::start())?;
    Ok(finish(lambda, out.phase, None))
}

/// Count for one radial channel: −u'' + [ℓ(ℓ+1)/r² + V(r)]u = λu on (0, R).
pub(crate) fn count_channel(
    spec: &PotentialSpec,
    radius: f64,
    lambda: f64,
    l: usize,
    opts: CountOptions,
) -> Result<CountResult> {
    let mut edges = interval_edges(spec, 0.0, radius);
    if l == 0 {
        let exact: Option<Vec<f64>> = if opts.force_rk {
            None
        } else {
            spec.const_pieces().map(|_| {
                edges
                    .windows(2)
                    .map(|w| spec.evaluate(0.5 * (w[0] + w[1])))
                    .collect()
            })
        };
        let v = |r: f64| spec.evaluate(r);
        let out = sweep(&v, &edges, lambda, exact.as_deref(), Phase::start())?;
        return Ok(finish(lambda, out.phase, None));
    }
    // ℓ ≥ 1: centrifugal term. Start just off r = 0 where u ~ r^{ℓ+1}, and
    // refine the mesh geometrically toward the origin.
    let cf = (l * (l + 1)) as f64;
    let r0 = radius * 1e-8;
    let turning = (cf / lambda.max(1.0)).sqrt().min(radius);
    let mut extra = Vec::new();
    let mut r = r0 * 2.0;
    while r < turning.min(radius) {
        extra.push(r);
        r *= 2.0;
    }
    edges[0] = r0;
    edges.extend(extra);
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();
    let v_eff = move |r: f64| spec.evaluate(r) + cf / (r * r);
    let mut start = Phase::start();
    // u = r^{ℓ+1}: tan θ₀ = S·u/u' = S·r₀/(ℓ+1) in the first chunk's scaling.
    let s0 = (lambda - v_eff(r0 + 0.5 * (edges[1] - r0).min(0.5)))
        .max(1.0)
        .sqrt();
    start.rho = (s0 * r0 / (l as f64 + 1.0)).atan();
    // sweep() remaps the incoming ρ from scaling 1 to the chunk scaling, so
    // hand it the angle expressed in scaling 1.
    start.rho = remap(start.rho, s0, 1.0);
    let out = sweep(&v_eff, &edges, lambda, None, start)?;
    Ok(finish(lambda, out.phase, None))
}

/// Eigenvalues of the Dirichlet ball operator strictly below λ, summed over
/// partial waves with multiplicity 2ℓ+1. L_max is the first ℓ whose free
/// channel has no spectrum below λ (ℓ(ℓ+1)/R² ≥ λ + max V₋), plus a margin
/// of two channels.
pub fn count_ball_radial(spec: &PotentialSpec, radius: f64, lambda: f64) -> Result<CountResult> {
    if spec.dimension != 3 || !spec.radial {
        return Err(SsfError::InvalidInput(
            "count_ball_radial takes radial 3D potentials".into(),
        ));
    }
    if !(radius > 0.0) || !lambda.is_finite() {
        return Err(SsfError::InvalidInput(
            "count_ball_radial needs R > 0 and finite λ".into(),
        ));
    }
    let v_minus = (-spec.bounds().0).max(0.0);
    let bar = lambda + v_minus;
    let mut l_cut = 0usize;
    while (l_cut * (l_cut + 1)) as f64 / (radius * radius) < bar {
        l_cut += 1;
        if l_cut > 100_000 {
            return Err(SsfError::InvalidInput(
                "channel cutoff exploded; check λ and R".into(),
            ));
        }
    }
    let l_max = l_cut + 2;
    let results: Vec<CountResult> = (0..=l_max)
        .into_par_iter()
        .map(|l| count_channel(spec, radius, lambda, l, CountOptions::default()))
        .collect::<Result<_>>()?;
    let mut per_channel = Vec::with_capacity(results.len());
    let mut total = 0usize;
    let mut lo_total = 0usize;
    let mut hi_total = 0usize;
    let mut ambiguous = false;
    for (l, r) in results.iter().enumerate() {
        let mult = 2 * l as u32 + 1;
        per_channel.push(ChannelCount {
            l,
            count: r.count,
            multiplicity: mult,
        });
        total += r.count * mult as usize;
        let (lo, hi) = r.candidates.unwrap_or((r.count, r.count));
        lo_total += lo * mult as usize;
        hi_total += hi * mult as usize;
        ambiguous |= r.ambiguous;
    }
    Ok(CountResult {
        lambda,
        count: total,
        per_channel: Some(per_channel),
        ambiguous,
        candidates: if ambiguous {
            Some((lo_total, hi_total))
        } else {
            None
        },
    })
}

/// Lowest Dirichlet eigenvalue on (a, b), by bisection on count transitions
/// to absolute tolerance 1e-8.
pub fn ground_state_energy(spec: &PotentialSpec, a: f64, b: f64) -> Result<f64> {
    let (vmin, _) = spec.bounds();
    let mut lo = vmin;
    let mut hi = vmin.max(0.0) + 1.0;
    let mut span = 1.0;
    while count_interval(spec, a, b, hi)?.count == 0 {
        span *= 2.0;
        hi += span;
        if hi > 1e12 {
            return Err(SsfError::NoBoundState { searched_below: hi });
        }
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if count_interval(spec, a, b, mid)?.count >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Free Dirichlet eigenvalues k²π²/(b−a)² below `lambda_max`.
pub fn free_interval_eigenvalues(a: f64, b: f64, lambda_max: f64) -> Vec<f64> {
    let len = b - a;
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let e = (k as f64 * std::f64::consts::PI / len).powi(2);
        if e >= lambda_max {
            return out;
        }
        out.push(e);
        k += 1;
    }
}

/// All Dirichlet eigenvalues below `lambda_max`, each bisected to `tol`.
/// Brackets come from eigenvalue monotonicity in V: the k-th eigenvalue lies
/// within [λ⁰_k + min V, λ⁰_k + max V].
pub fn eigenvalues_below(
    spec: &PotentialSpec,
    a: f64,
    b: f64,
    lambda_max: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(SsfError::InvalidInput("eigenvalue tolerance must be positive".into()));
    }
    let n = count_interval(spec, a, b, lambda_max)?.count;
    let (vmin, vmax) = spec.bounds();
    let len = b - a;
    let free = |k: usize| (k as f64 * std::f64::consts::PI / len).powi(2);
    let eigs: Vec<f64> = (1..=n)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut lo = free(k) + vmin - 1e-9;
            let mut hi = (free(k) + vmax + 1e-9).min(lambda_max);
            // Guard against bracket failure (should not happen; widen once).
            if count_interval(spec, a, b, lo)?.count >= k {
                lo = vmin - 1.0;
            }
            if count_interval(spec, a, b, hi)?.count < k {
                hi = lambda_max;
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if count_interval(spec, a, b, mid)?.count >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<_>>()?;
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{square_well_1d, square_well_3d, PotentialSpec, Profile};

    fn free_1d() -> PotentialSpec {
        square_well_1d(0.0, 1.0)
    }

    #[test]
    fn free_interval_counts_match_pole_set() {
        // Eigenvalues on (0, π) are 1, 4, 9, 16, ...
        let v = free_1d();
        let r = count_interval(&v, 0.0, std::f64::consts::PI, 10.5).unwrap();
        assert_eq!(r.count, 3);
        assert!(!r.ambiguous);
        let r = count_interval(&v, 0.0, std::f64::consts::PI, -2.0).unwrap();
        assert_eq!(r.count, 0);
    }

    #[test]
    fn lambda_on_an_eigenvalue_raises_the_ambiguity_flag() {
        let v = free_1d();
        let r = count_interval(&v, 0.0, std::f64::consts::PI, 4.0).unwrap();
        assert!(r.ambiguous);
        assert_eq!(r.candidates, Some((1, 2)));
        assert_eq!(r.count, 1);
    }

    #[test]
    fn square_well_has_one_state_below_minus_005() {
        let v = square_well_1d(2.0, 1.0);
        let r = count_interval(&v, -20.0, 20.0, -0.05).unwrap();
        assert_eq!(r.count, 1);
    }

    #[test]
    fn rk_path_agrees_with_closed_form_on_wells() {
        let v = square_well_1d(2.0, 1.0);
        for lambda in [-1.5, -0.5, 0.3, 3.7, 10.2, 55.3, 123.4, 388.1] {
            let exact = count_interval(&v, -20.0, 20.0, lambda).unwrap();
            let rk = count_interval_opts(&v, -20.0, 20.0, lambda, CountOptions { force_rk: true })
                .unwrap();
            assert_eq!(exact.count, rk.count, "λ = {lambda}");
        }
    }

    #[test]
    fn counts_monotone_in_lambda() {
        let v = square_well_1d(2.0, 1.0);
        let mut prev = 0usize;
        for i in 0..60 {
            let lambda = -2.0 + i as f64 * 1.3;
            let c = count_interval(&v, -15.0, 15.0, lambda).unwrap().count;
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn ground_state_free_interval_is_one() {
        let v = free_1d();
        let e0 = ground_state_energy(&v, 0.0, std::f64::consts::PI).unwrap();
        assert!((e0 - 1.0).abs() < 1e-7, "e0 = {e0}");
    }

    #[test]
    fn deep_well_ground_state_near_infinite_well_estimate() {
        let v = square_well_1d(100.0, 1.0);
        let e0 = ground_state_energy(&v, -20.0, 20.0).unwrap();
        let est = -100.0 + std::f64::consts::PI.powi(2) / 4.0;
        assert!((e0 - est).abs() < 1.0, "e0 = {e0}, estimate = {est}");
    }

    #[test]
    fn ball_counts_free_case_and_degeneracies() {
        let v = square_well_3d(0.0, 1.0);
        let r = count_ball_radial(&v, 1.0, 10.0).unwrap();
        assert_eq!(r.count, 1, "only the ℓ=0 state at π² lies below 10");
        let r = count_ball_radial(&v, 1.0, -0.5).unwrap();
        assert_eq!(r.count, 0);
        // λ = 25: ℓ=0 contributes 1 (π² < 25 < 4π²), ℓ=1 contributes 1×3
        // (4.4934² ≈ 20.19 < 25 < 7.7253²), ℓ=2 none (5.7635² ≈ 33.2).
        let r = count_ball_radial(&v, 1.0, 25.0).unwrap();
        let pc = r.per_channel.as_ref().unwrap();
        assert_eq!(pc[0].count, 1);
        assert_eq!(pc[1].count, 1);
        assert_eq!(pc[2].count, 0);
        assert_eq!(r.count, 1 + 3);
        let total: usize = pc
            .iter()
            .map(|c| c.count * c.multiplicity as usize)
            .sum();
        assert_eq!(total, r.count);
    }

    #[test]
    fn canonical_3d_well_has_exactly_one_s_state() {
        let v = square_well_3d(4.0, 1.0);
        let r = count_ball_radial(&v, 30.0, -1e-4).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.per_channel.as_ref().unwrap()[0].count, 1);
    }

    #[test]
    fn eigenvalues_below_free_interval_match_squares() {
        let v = free_1d();
        let eigs = eigenvalues_below(&v, 0.0, std::f64::consts::PI, 30.0, 1e-9).unwrap();
        let want = [1.0, 4.0, 9.0, 16.0, 25.0];
        assert_eq!(eigs.len(), want.len());
        for (got, w) in eigs.iter().zip(want) {
            assert!((got - w).abs() < 1e-7, "{got} vs {w}");
        }
    }

    #[test]
    fn sampled_profile_counts_smoothly() {
        // Tent potential: linear interpolation between samples.
        let spec = PotentialSpec {
            dimension: 1,
            profile: Profile::Sampled {
                abscissae: vec![-1.0, 0.0, 1.0],
                values: vec![0.0, -3.0, 0.0],
            },
            support_radius: 1.0,
            radial: false,
        };
        spec.validate().unwrap();
        let c_low = count_interval(&spec, -10.0, 10.0, -0.9).unwrap().count;
        assert_eq!(c_low, 1, "tent well binds exactly one state below −0.9");
        let mut prev = 0;
        for lambda in [0.5, 2.0, 8.0, 20.0] {
            let c = count_interval(&spec, -10.0, 10.0, lambda).unwrap().count;
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn domain_monotonicity_for_free_counts() {
        let v = free_1d();
        let small = count_interval(&v, 0.0, 2.0, 50.0).unwrap().count;
        let large = count_interval(&v, -1.0, 4.0, 50.0).unwrap().count;
        assert!(small <= large);
    }
}
