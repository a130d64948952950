//! The admissible cone `Γ^σ = {κ : Σ arctan κ_i > σ}` with
//! `σ = (n − 2)π/2 + δ`.
//!
//! Membership and structural checks, a rejection sampler that probes the
//! cone near its boundary, and the numerical calibration of the exponent
//! `A` that makes `G = −exp(−A·F)` concave on the cone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{concave_g, phase_f, sigma_for, validate_delta, OperatorParams};
use crate::seeded_rng;
use crate::smalldense::{sym_eigen, SymMatrix};

/// Slack allowed on each structural inequality.
pub const PROPERTY_TOL: f64 = 1e-12;
/// Second difference step for matrix concavity probes.
pub const HESSIAN_FD_STEP: f64 = 1e-4;
/// Largest second difference quotient still counted as concave.
pub const CONCAVITY_TOL: f64 = 1e-8;
/// Directions drawn per sample point during calibration.
pub const DIRECTIONS_PER_POINT: usize = 10;
/// Bracket searched by [`calibrate_a`].
pub const A_BRACKET: (f64, f64) = (1.0, 1e4);

const MIN_PROBE_MARGIN: f64 = 1e-6;
const STALL_WINDOW: usize = 1_000_000;
const STALL_RATE: f64 = 1e-4;

/// Result of checking one curvature vector against the cone properties.
///
/// `props[0..4]` are the four inequalities (i)–(iv); `props[4]` is a local
/// probe of convexity of the level set `{F = F(κ)}` at `κ`: the Hessian of
/// `F` restricted to the tangent space of the level set must be negative
/// semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub admissible: bool,
    pub margin: f64,
    pub props: [bool; 5],
    /// Largest amount by which any property was violated (0 when all hold).
    pub worst_violation: f64,
}

impl ConeReport {
    pub fn all_pass(&self) -> bool {
        self.props.iter().all(|&p| p)
    }
}

fn check_sorted(kappa: &[f64]) -> Result<()> {
    if kappa.windows(2).all(|w| w[0] >= w[1]) {
        Ok(())
    } else {
        Err(Error::NotSorted)
    }
}

/// Evaluates the structural properties of the cone at `kappa`.
pub fn check_cone_properties(kappa: &[f64], delta: f64) -> Result<ConeReport> {
    validate_delta(delta)?;
    check_sorted(kappa)?;
    let n = kappa.len();
    if n < 2 {
        return Err(Error::Dimension("cone properties need n ≥ 2".into()));
    }
    let margin = phase_f(kappa) - sigma_for(n, delta);
    let last = kappa[n - 1];
    let second_last = kappa[n - 2];

    let mut violations = [0.0f64; 5];
    // (i) κ_{n−1} > 0 and |κ_n| ≤ κ_{n−1}
    violations[0] = (-second_last).max(last.abs() - second_last).max(0.0);
    let strict_ok = second_last + PROPERTY_TOL > 0.0;
    // (ii) Σ κ_i ≥ 0
    violations[1] = (-kappa.iter().sum::<f64>()).max(0.0);
    // (iii) κ_n ≥ −1/tan δ
    violations[2] = (-1.0 / delta.tan() - last).max(0.0);
    // (iv) κ_n < 0 ⇒ Σ 1/κ_i ≤ −tan δ
    if last < 0.0 {
        let recip: f64 = kappa.iter().map(|k| 1.0 / k).sum();
        violations[3] = (recip + delta.tan()).max(0.0);
    }
    // (v) tangential Hessian of F at κ is negative semidefinite.
    violations[4] = level_set_curvature(kappa).max(0.0);

    let mut props = [true; 5];
    for (p, v) in props.iter_mut().zip(violations.iter()).take(4) {
        *p = *v <= PROPERTY_TOL;
    }
    props[0] &= strict_ok;
    let hess_scale = kappa
        .iter()
        .map(|k| 2.0 * k.abs() / (1.0 + k * k).powi(2))
        .fold(0.0f64, f64::max);
    props[4] = violations[4] <= PROPERTY_TOL * hess_scale.max(1.0);

    Ok(ConeReport {
        admissible: margin >= 0.0,
        margin,
        props,
        worst_violation: violations.iter().copied().fold(0.0, f64::max),
    })
}

/// Largest eigenvalue of `P·D²F·P`, `P` the projector onto `∇F^⊥`.
fn level_set_curvature(kappa: &[f64]) -> f64 {
    let n = kappa.len();
    let grad: Vec<f64> = kappa.iter().map(|k| 1.0 / (1.0 + k * k)).collect();
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let hdiag: Vec<f64> = kappa
        .iter()
        .map(|k| -2.0 * k / (1.0 + k * k).powi(2))
        .collect();
    let proj = SymMatrix::from_fn(n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - grad[i] * grad[j] / g2
    });
    let tangential = SymMatrix::from_diagonal(&hdiag).congruence(&proj);
    sym_eigen(&tangential).map_or(f64::INFINITY, |e| e.values[0])
}

/// Log-uniform magnitude proposal for the rejection sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposal {
    pub min_magnitude: f64,
    pub max_magnitude: f64,
}

impl Default for Proposal {
    fn default() -> Self {
        Self {
            min_magnitude: 1e-3,
            max_magnitude: 1e3,
        }
    }
}

impl Proposal {
    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let lo = self.min_magnitude.log10();
        let hi = self.max_magnitude.log10();
        let mut k: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(lo..hi))).collect();
        if rng.gen_bool(0.5) {
            let smallest = (0..n).min_by(|&a, &b| k[a].total_cmp(&k[b])).unwrap_or(0);
            k[smallest] = -k[smallest];
        }
        k.sort_by(|a, b| b.total_cmp(a));
        k
    }
}

/// Draws `count` curvature vectors (sorted descending) with `F(κ) ≥ σ`.
pub fn sample_admissible(n: usize, delta: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    sample_admissible_with(n, delta, count, seed, Proposal::default())
}

pub fn sample_admissible_with(
    n: usize,
    delta: f64,
    count: usize,
    seed: u64,
    proposal: Proposal,
) -> Result<Vec<Vec<f64>>> {
    validate_delta(delta)?;
    if count == 0 {
        return Err(Error::Validation("sample count must be at least 1".into()));
    }
    if !(2..=crate::smalldense::MAX_DIM).contains(&n) {
        return Err(Error::Validation(format!(
            "cone sampling needs 2 ≤ n ≤ 4, got {n}"
        )));
    }
    let sigma = sigma_for(n, delta);
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        let k = proposal.draw(&mut rng, n);
        draws += 1;
        if phase_f(&k) >= sigma {
            out.push(k);
        }
        if draws.is_multiple_of(STALL_WINDOW) && (out.len() as f64) < STALL_RATE * draws as f64 {
            return Err(Error::SamplerStalled {
                accepted: out.len(),
                draws,
            });
        }
    }
    Ok(out)
}

/// `G` evaluated on a symmetric matrix through its eigenvalues.
fn g_of_matrix(m: &SymMatrix, params: &OperatorParams) -> Result<(f64, f64)> {
    let e = sym_eigen(m)?;
    Ok((concave_g(&e.values, params), params.margin(&e.values)))
}

/// Central second difference of `G` at `diag(κ)` along `direction`, with
/// step [`HESSIAN_FD_STEP`]. Concavity predicts a value ≤ [`CONCAVITY_TOL`].
pub fn hessian_g_sampled(
    kappa: &[f64],
    params: &OperatorParams,
    direction: &SymMatrix,
) -> Result<f64> {
    if direction.dim() != kappa.len() {
        return Err(Error::Dimension(
            "direction and curvature dimensions differ".into(),
        ));
    }
    if (direction.max_abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "direction must have unit max-entry norm, got {}",
            direction.max_abs()
        )));
    }
    let margin = params.margin(kappa);
    if margin <= MIN_PROBE_MARGIN {
        return Err(Error::ConeBoundary { margin });
    }
    let eps = HESSIAN_FD_STEP;
    let base = SymMatrix::from_diagonal(kappa);
    let (g_plus, m_plus) = g_of_matrix(&base.add(&direction.scale(eps)), params)?;
    let (g_minus, m_minus) = g_of_matrix(&base.add(&direction.scale(-eps)), params)?;
    let worst = m_plus.min(m_minus);
    if worst < 0.0 {
        return Err(Error::LeftCone { margin: worst });
    }
    let g0 = concave_g(kappa, params);
    Ok((g_plus - 2.0 * g0 + g_minus) / (eps * eps))
}

/// Random symmetric direction with max-entry norm one.
pub fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    loop {
        let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let s = m.max_abs();
        if s > 1e-3 {
            return m.scale(1.0 / s);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationResult {
    pub a_param: f64,
    pub samples_tested: usize,
    /// Largest sampled second directional difference quotient of `G` at
    /// the returned `A`.
    pub max_hess_eigenvalue: f64,
}

/// Fixed set of (point, direction) pairs that stay in the cone under the
/// finite-difference perturbation.
#[derive(Clone, Debug)]
pub struct ConcavitySample {
    n: usize,
    delta: f64,
    pairs: Vec<(Vec<f64>, SymMatrix)>,
    points: usize,
}

impl ConcavitySample {
    pub fn draw(n: usize, delta: f64, count: usize, seed: u64) -> Result<Self> {
        let points = sample_admissible(n, delta, count, seed)?;
        let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        // Membership does not depend on A, so any A works for the screen.
        let probe = OperatorParams::new(n, delta, 1.0)?;
        let mut pairs = Vec::with_capacity(points.len() * DIRECTIONS_PER_POINT);
        let mut used = 0;
        for k in points {
            if probe.margin(&k) <= MIN_PROBE_MARGIN {
                continue;
            }
            let mut any = false;
            for _ in 0..DIRECTIONS_PER_POINT {
                let dir = random_direction(&mut rng, n);
                match hessian_g_sampled(&k, &probe, &dir) {
                    Ok(_) => {
                        pairs.push((k.clone(), dir));
                        any = true;
                    }
                    Err(Error::LeftCone { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            used += usize::from(any);
        }
        Ok(Self {
            n,
            delta,
            pairs,
            points: used,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Largest second difference quotient over the sample at exponent `a`.
    pub fn max_quotient(&self, a: f64) -> Result<f64> {
        let params = OperatorParams::new(self.n, self.delta, a)?;
        let mut worst = f64::NEG_INFINITY;
        for (k, dir) in &self.pairs {
            worst = worst.max(hessian_g_sampled(k, &params, dir)?);
        }
        Ok(worst)
    }
}

/// Smallest tested `A` in [`A_BRACKET`] for which every sampled second
/// difference quotient of `G` is at most [`CONCAVITY_TOL`].
///
/// The search is a bisection in `log A`, stopped once the bracket ratio
/// drops below 1.001.
pub fn calibrate_a(
    n: usize,
    delta: f64,
    sample_count: usize,
    seed: u64,
) -> Result<CalibrationResult> {
    if sample_count < 1000 {
        return Err(Error::Validation(format!(
            "calibration needs at least 1000 samples, got {sample_count}"
        )));
    }
    let sample = ConcavitySample::draw(n, delta, sample_count, seed)?;
    calibrate_on(&sample)
}

pub fn calibrate_on(sample: &ConcavitySample) -> Result<CalibrationResult> {
    let (mut lo, mut hi) = A_BRACKET;
    let at_hi = sample.max_quotient(hi)?;
    if at_hi > CONCAVITY_TOL {
        return Err(Error::CalibrationFailed {
            a_max: hi,
            quotient: at_hi,
        });
    }
    let done = |a: f64, q: f64| CalibrationResult {
        a_param: a,
        samples_tested: sample.points(),
        max_hess_eigenvalue: q,
    };
    let at_lo = sample.max_quotient(lo)?;
    if at_lo <= CONCAVITY_TOL {
        return Ok(done(lo, at_lo));
    }
    let mut q_hi = at_hi;
    while hi / lo > 1.001 {
        let mid = (lo * hi).sqrt();
        let q = sample.max_quotient(mid)?;
        if q <= CONCAVITY_TOL {
            hi = mid;
            q_hi = q;
        } else {
            lo = mid;
        }
    }
    Ok(done(hi, q_hi))
}

/// Empirical extremes of the quantities bounded by the structural
/// inequalities of the concave reformulation.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityProbes {
    /// min over the sample of `Σ κ_i ∂G/∂κ_i`.
    pub min_weighted_sum: f64,
    /// max over the sample of `|κ|² Σ ∂G/∂κ_i / Σ ∂G/∂κ_i κ_i²`.
    pub max_ratio: f64,
    /// min over the sample of `∂G/∂κ_n`.
    pub min_last_derivative: f64,
    /// min over the sample of `Σ ∂G/∂κ_i`.
    pub min_sum_derivative: f64,
}

/// `∂G/∂κ_i = A e^{−AF}/(1 + κ_i²)`.
pub fn g_derivatives(kappa: &[f64], params: &OperatorParams) -> Vec<f64> {
    let scale = params.a_param * (-params.a_param * phase_f(kappa)).exp();
    kappa.iter().map(|k| scale / (1.0 + k * k)).collect()
}

pub fn probe_inequalities(samples: &[Vec<f64>], params: &OperatorParams) -> InequalityProbes {
    let mut out = InequalityProbes {
        min_weighted_sum: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        min_last_derivative: f64::INFINITY,
        min_sum_derivative: f64::INFINITY,
    };
    for k in samples {
        let g = g_derivatives(k, params);
        let weighted: f64 = g.iter().zip(k).map(|(gi, ki)| gi * ki).sum();
        let sum_g: f64 = g.iter().sum();
        let norm2: f64 = k.iter().map(|x| x * x).sum();
        let weighted_sq: f64 = g.iter().zip(k).map(|(gi, ki)| gi * ki * ki).sum();
        out.min_weighted_sum = out.min_weighted_sum.min(weighted);
        out.max_ratio = out.max_ratio.max(norm2 * sum_g / weighted_sq);
        out.min_last_derivative = out.min_last_derivative.min(*g.last().unwrap_or(&0.0));
        out.min_sum_derivative = out.min_sum_derivative.min(sum_g);
    }
    out
}

/// Mixes admissible pairs at `t ∈ {¼, ½, ¾}` and counts mixtures whose
/// margin falls below `−PROPERTY_TOL`. Returns `(violations, checks, worst margin)`.
pub fn convexity_probe(samples: &[Vec<f64>], delta: f64, seed: u64) -> Result<(usize, usize, f64)> {
    validate_delta(delta)?;
    let mut rng = seeded_rng(seed);
    let mut violations = 0;
    let mut checks = 0;
    let mut worst = f64::INFINITY;
    if samples.len() < 2 {
        return Ok((0, 0, worst));
    }
    let n = samples[0].len();
    let sigma = sigma_for(n, delta);
    for a in samples {
        let b = &samples[rng.gen_range(0..samples.len())];
        for t in [0.25, 0.5, 0.75] {
            let mix: Vec<f64> = a
                .iter()
                .zip(b)
                .map(|(x, y)| t * x + (1.0 - t) * y)
                .collect();
            let margin = phase_f(&mix) - sigma;
            worst = worst.min(margin);
            checks += 1;
            if margin < -PROPERTY_TOL {
                violations += 1;
            }
        }
    }
    Ok((violations, checks, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn two_d_admissible_example() {
        let r = check_cone_properties(&[10.0, -0.05], 0.1).unwrap();
        assert!(r.admissible);
        assert_abs_diff_eq!(r.margin, 1.421169 - 0.1, epsilon = 1e-6);
        assert!(r.all_pass());
        assert!(r.worst_violation <= PROPERTY_TOL);
        // Predicate values from scalar evaluation.
        assert_abs_diff_eq!(-1.0 / 0.1f64.tan(), -9.96664, epsilon = 1e-5);
        assert_abs_diff_eq!(0.1 - 20.0, -19.9, epsilon = 1e-12);
        assert_abs_diff_eq!(-(0.1f64.tan()), -0.100335, epsilon = 1e-6);
    }

    #[test]
    fn antisymmetric_is_outside() {
        let r = check_cone_properties(&[1.0, -1.0], 0.1).unwrap();
        assert!(!r.admissible);
        assert_eq!(r.margin, -0.1);
    }

    #[test]
    fn three_d_umbilic() {
        let r = check_cone_properties(&[5.0, 5.0, 5.0], 0.05).unwrap();
        assert!(r.admissible);
        assert_abs_diff_eq!(3.0 * 5f64.atan(), 4.120202, epsilon = 1e-6);
        assert_abs_diff_eq!(
            r.margin,
            3.0 * 5f64.atan() - FRAC_PI_2 - 0.05,
            epsilon = 1e-14
        );
        assert!(r.all_pass());
    }

    #[test]
    fn unsorted_rejected() {
        assert!(matches!(
            check_cone_properties(&[-1.0, 2.0], 0.1),
            Err(Error::NotSorted)
        ));
    }

    #[test]
    fn violated_properties_are_reported() {
        // Outside the cone, (i) and (ii) can fail and the report must say so.
        let r = check_cone_properties(&[0.5, -2.0], 0.1).unwrap();
        assert!(!r.admissible);
        assert!(!r.props[0]);
        assert!(!r.props[1]);
        assert!(r.worst_violation > 1.0);
    }

    #[test]
    fn sampler_postcondition_and_determinism() {
        let a = sample_admissible(2, 0.1, 100, 7).unwrap();
        let b = sample_admissible(2, 0.1, 100, 7).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, b);
        let p = OperatorParams::new(2, 0.1, 1.0).unwrap();
        assert!(a.iter().all(|k| p.margin(k) >= 0.0));
        assert!(a.iter().all(|k| k.windows(2).all(|w| w[0] >= w[1])));
        assert_ne!(a, sample_admissible(2, 0.1, 100, 8).unwrap());
    }

    #[test]
    fn sampled_points_satisfy_properties() {
        let s = sample_admissible(3, 0.2, 10_000, 1).unwrap();
        for k in &s {
            let r = check_cone_properties(k, 0.2).unwrap();
            assert!(r.all_pass(), "{k:?} -> {r:?}");
        }
    }

    #[test]
    fn sampler_stalls_on_hopeless_proposal() {
        let tiny = Proposal {
            min_magnitude: 1e-6,
            max_magnitude: 1e-5,
        };
        assert!(matches!(
            sample_admissible_with(2, 0.1, 1, 0, tiny),
            Err(Error::SamplerStalled { .. })
        ));
    }

    #[test]
    fn concave_at_positive_curvature_for_large_a() {
        let p = OperatorParams::new(2, 0.1, 10.0).unwrap();
        let q = hessian_g_sampled(&[1.0, 1.0], &p, &SymMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        assert!(q <= CONCAVITY_TOL);
    }

    #[test]
    fn small_a_loses_concavity() {
        let p = OperatorParams::new(2, 0.1, 0.01).unwrap();
        let q =
            hessian_g_sampled(&[5.0, -0.1], &p, &SymMatrix::from_diagonal(&[0.0, 1.0])).unwrap();
        assert!(q > 0.0);
    }

    #[test]
    fn umbilic_direction_reduces_to_scalar() {
        let p = OperatorParams::new(3, 0.1, 3.0).unwrap();
        let t: f64 = 2.0;
        let q = hessian_g_sampled(&[t, t, t], &p, &SymMatrix::identity(3)).unwrap();
        let eps = HESSIAN_FD_STEP;
        let g = |s: f64| -(-3.0 * 3.0 * s.atan()).exp();
        let scalar = (g(t + eps) - 2.0 * g(t) + g(t - eps)) / (eps * eps);
        assert_abs_diff_eq!(q, scalar, epsilon = 1e-8);
    }

    #[test]
    fn leaving_the_cone_is_reported() {
        let p = OperatorParams::new(2, 0.1, 1.0).unwrap();
        // Margin ~2e-5 but the perturbation along −κ₂ pushes it out.
        let k2 = (0.1f64 + 2e-5 - 1f64.atan()).tan();
        let r = hessian_g_sampled(&[1.0, k2], &p, &SymMatrix::from_diagonal(&[-1.0, -1.0]));
        assert!(matches!(r, Err(Error::LeftCone { .. })), "{r:?}");
    }

    #[test]
    fn calibration_deterministic_and_stable_under_doubling() {
        let a = calibrate_a(2, 0.1, 1000, 5).unwrap();
        let b = calibrate_a(2, 0.1, 1000, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.max_hess_eigenvalue <= CONCAVITY_TOL);
        let sample = ConcavitySample::draw(2, 0.1, 1000, 5).unwrap();
        assert!(sample.max_quotient(2.0 * a.a_param).unwrap() <= CONCAVITY_TOL);
        assert!(sample.max_quotient(0.01).unwrap() > 1e-6);
    }

    #[test]
    fn inequality_probes_are_finite() {
        let s = sample_admissible(2, 0.1, 2000, 3).unwrap();
        let p = OperatorParams::new(2, 0.1, 20.0).unwrap();
        let r = probe_inequalities(&s, &p);
        assert!(r.min_weighted_sum.is_finite());
        assert!(r.max_ratio.is_finite());
        assert!(r.min_last_derivative > 0.0);
        assert!(r.min_sum_derivative > 0.0);
    }

    #[test]
    fn convexity_probe_finds_no_violations() {
        let s = sample_admissible(2, 0.1, 5000, 9).unwrap();
        let (v, checks, worst) = convexity_probe(&s, 0.1, 10).unwrap();
        assert_eq!(v, 0);
        assert_eq!(checks, 15_000);
        assert!(worst >= -PROPERTY_TOL);
    }
}
