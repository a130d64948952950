//! Pointwise geometry of the graph `x ↦ (x, u(x))`.
//!
//! Given `Du` and `D²u` at a point this builds the metric factor `w`, the
//! square root `b^ij` of the inverse metric, the symmetric curvature matrix
//! `a_ij` whose eigenvalues are the principal curvatures, and the phase
//! operators built on top of them.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::smalldense::{sym_eigen, DenseMatrix, EigenPair, SymMatrix, MAX_DIM};

/// Everything the operator needs to know about `u` at one point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
    pub w: f64,
    pub b_upper: SymMatrix,
    pub amat: SymMatrix,
    /// Principal curvatures, descending.
    pub kappa: Vec<f64>,
    /// Eigenframe of `amat` matching `kappa`.
    pub frame: EigenPair,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn phase(&self) -> f64 {
        phase_f(&self.kappa)
    }

    /// Inverse metric `g^ij = δ_ij − u_i u_j / w²`.
    pub fn g_inverse(&self) -> SymMatrix {
        inverse_metric(&self.grad)
    }

    /// Second fundamental form `h_ij = u_ij / w`.
    pub fn second_fundamental_form(&self) -> SymMatrix {
        self.hess.scale(1.0 / self.w)
    }

    /// The generally nonsymmetric shape operator `[h_ik g^kj]`.
    pub fn shape_operator(&self) -> DenseMatrix {
        DenseMatrix::from(self.second_fundamental_form()).mul(&DenseMatrix::from(self.g_inverse()))
    }
}

/// Operator parameters: dimension, phase margin `δ`, threshold `σ` and the
/// concavity exponent `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorParams {
    pub n: usize,
    pub delta: f64,
    pub sigma: f64,
    pub a_param: f64,
}

impl OperatorParams {
    pub fn new(n: usize, delta: f64, a_param: f64) -> Result<Self> {
        validate_delta(delta)?;
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::Validation(format!(
                "dimension {n} outside 1..={MAX_DIM}"
            )));
        }
        if !(a_param > 0.0 && a_param.is_finite()) {
            return Err(Error::Validation(format!(
                "concavity exponent A must be positive, got {a_param}"
            )));
        }
        Ok(Self {
            n,
            delta,
            sigma: sigma_for(n, delta),
            a_param,
        })
    }

    /// Copy with a different concavity exponent.
    pub fn with_a(&self, a_param: f64) -> Result<Self> {
        Self::new(self.n, self.delta, a_param)
    }

    /// Largest admissible phase value, `nπ/2` (excluded).
    pub fn phase_upper(&self) -> f64 {
        self.n as f64 * FRAC_PI_2
    }

    /// `F(κ) − σ`.
    pub fn margin(&self, kappa: &[f64]) -> f64 {
        phase_f(kappa) - self.sigma
    }
}

/// `(n − 2)π/2 + δ`.
pub fn sigma_for(n: usize, delta: f64) -> f64 {
    (n as f64 - 2.0) * FRAC_PI_2 + delta
}

/// The phase margin must lie in `(0, π/2)`.
pub fn validate_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "delta = {delta} must lie in (0, π/2) for the admissible cone properties to hold"
        )))
    }
}

/// `g^ij = δ_ij − u_i u_j / (1 + |Du|²)`.
pub fn inverse_metric(grad: &[f64]) -> SymMatrix {
    let w2 = 1.0 + grad.iter().map(|g| g * g).sum::<f64>();
    SymMatrix::from_fn(grad.len(), |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - grad[i] * grad[j] / w2
    })
}

/// `b^ij = δ_ij − u_i u_j / (w(1 + w))`, the positive square root of `g^ij`.
pub fn b_upper(grad: &[f64], w: f64) -> SymMatrix {
    let c = 1.0 / (w * (1.0 + w));
    SymMatrix::from_fn(grad.len(), |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - c * grad[i] * grad[j]
    })
}

/// Curvature matrix by the expanded formula
///
/// `a_ij = (1/w){u_ij − u_i u_l u_jl/(w(1+w)) − u_j u_l u_il/(w(1+w))
///        + u_i u_j u_k u_l u_kl/(w²(1+w)²)}`.
pub fn curvature_matrix(grad: &[f64], hess: &SymMatrix, w: f64) -> SymMatrix {
    let n = grad.len();
    let c = 1.0 / (w * (1.0 + w));
    // (D²u · Du)_i and Duᵀ D²u Du.
    let hp = hess.mul_vec(grad);
    let php: f64 = grad.iter().zip(&hp).map(|(a, b)| a * b).sum();
    SymMatrix::from_fn(n, |i, j| {
        (hess.get(i, j) - c * grad[i] * hp[j] - c * grad[j] * hp[i]
            + c * c * grad[i] * grad[j] * php)
            / w
    })
}

/// Builds the full pointwise geometry from `Du` and `D²u`.
pub fn assemble_point(grad: &[f64], hess: &SymMatrix) -> Result<PointGeometry> {
    if grad.len() != hess.dim() {
        return Err(Error::Dimension(format!(
            "gradient has {} entries, Hessian is {}×{}",
            grad.len(),
            hess.dim(),
            hess.dim()
        )));
    }
    if grad.iter().any(|g| !g.is_finite()) || !hess.is_finite() {
        return Err(Error::NonFinite("assemble_point input"));
    }
    let w = (1.0 + grad.iter().map(|g| g * g).sum::<f64>()).sqrt();
    let b = b_upper(grad, w);
    let amat = curvature_matrix(grad, hess, w);
    let frame = sym_eigen(&amat)?;
    Ok(PointGeometry {
        grad: grad.to_vec(),
        hess: *hess,
        w,
        b_upper: b,
        amat,
        kappa: frame.values.clone(),
        frame,
    })
}

/// `F(κ) = Σ arctan κ_i`.
pub fn phase_f(kappa: &[f64]) -> f64 {
    kappa.iter().map(|k| k.atan()).sum()
}

/// Concave reformulation `G(κ) = −exp(−A·F(κ))`.
pub fn concave_g(kappa: &[f64], params: &OperatorParams) -> f64 {
    -(-params.a_param * phase_f(kappa)).exp()
}

/// Right-hand side of the transformed equation, `ψ = −exp(−A·h)`.
///
/// `h` must lie in `[(n−2)π/2 + δ, nπ/2)`.
pub fn psi_of_h(h: f64, params: &OperatorParams) -> Result<f64> {
    let upper = params.phase_upper();
    if !(h >= params.sigma && h < upper) {
        return Err(Error::PhaseOutOfRange {
            h,
            lower: params.sigma,
            upper,
        });
    }
    Ok(-(-params.a_param * h).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_entry_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn flat_gradient_collapses() {
        let h = SymMatrix::from_rows(&[&[3.0, -1.5], &[-1.5, 0.25]]);
        let g = assemble_point(&[0.0, 0.0], &h).unwrap();
        assert_eq!(g.w, 1.0);
        assert_eq!(g.b_upper, SymMatrix::identity(2));
        assert_eq!(g.amat, h);
    }

    #[test]
    fn tilted_diagonal_example() {
        let h = SymMatrix::from_diagonal(&[2.0, 1.0]);
        let g = assemble_point(&[1.0, 0.0], &h).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(g.w, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.b_upper.get(0, 0), s, epsilon = 1e-15);
        assert_abs_diff_eq!(g.amat.get(0, 0), s, epsilon = 1e-15);
        assert_abs_diff_eq!(g.amat.get(1, 1), s, epsilon = 1e-15);
        assert_abs_diff_eq!(g.amat.get(0, 1), 0.0, epsilon = 1e-15);
        // h = diag(√2, 1/√2), g^ = diag(1/2, 1): shape operator diag(1/√2, 1/√2).
        let shape = g.shape_operator();
        assert_abs_diff_eq!(shape.get(0, 0), s, epsilon = 1e-15);
        assert_abs_diff_eq!(shape.get(1, 1), s, epsilon = 1e-15);
        for k in &g.kappa {
            assert_abs_diff_eq!(*k, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_dimensional_curvature() {
        let g = assemble_point(&[3f64.sqrt()], &SymMatrix::from_diagonal(&[8.0])).unwrap();
        assert_abs_diff_eq!(g.kappa[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_input() {
        let h = SymMatrix::identity(2);
        assert!(matches!(
            assemble_point(&[f64::INFINITY, 0.0], &h),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn phase_values() {
        assert_abs_diff_eq!(phase_f(&[1.0, 1.0]), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(phase_f(&[3.7, -3.7]), 0.0);
        assert_abs_diff_eq!(phase_f(&[10.0, -0.05]), 1.421169, epsilon = 1e-6);
    }

    #[test]
    fn concave_g_values() {
        let p = OperatorParams::new(2, 0.1, 2.0).unwrap();
        assert_abs_diff_eq!(concave_g(&[1.0, 1.0], &p), -(-PI).exp(), epsilon = 1e-16);
        assert_abs_diff_eq!(concave_g(&[1.0, 1.0], &p), -0.0432139, epsilon = 1e-7);
        assert_eq!(concave_g(&[2.0, -2.0], &p), -1.0);
        assert!(concave_g(&[1.1, 1.0], &p) > concave_g(&[1.0, 1.0], &p));
    }

    #[test]
    fn psi_range() {
        let p = OperatorParams::new(2, 0.1, 2.0).unwrap();
        assert_abs_diff_eq!(psi_of_h(FRAC_PI_2, &p).unwrap(), -0.0432139, epsilon = 1e-7);
        assert!(psi_of_h(p.sigma, &p).is_ok());
        assert!(matches!(
            psi_of_h(PI, &p),
            Err(Error::PhaseOutOfRange { .. })
        ));
        assert!(psi_of_h(0.05, &p).is_err());
        let p3 = OperatorParams::new(3, 0.2, 1.0).unwrap();
        assert!(psi_of_h(FRAC_PI_2 + 0.2, &p3).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(OperatorParams::new(2, 0.0, 1.0).is_err());
        assert!(OperatorParams::new(2, -0.1, 1.0).is_err());
        assert!(OperatorParams::new(2, FRAC_PI_2, 1.0).is_err());
        assert!(OperatorParams::new(2, 0.1, 0.0).is_err());
        let p = OperatorParams::new(3, 0.1, 1.0).unwrap();
        assert_abs_diff_eq!(p.sigma, FRAC_PI_2 + 0.1, epsilon = 1e-15);
    }

    #[test]
    fn expansion_matches_triple_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let n = rng.gen_range(2..=4);
            let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let hess = SymMatrix::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
            let g = assemble_point(&grad, &hess).unwrap();
            let triple = hess.congruence(&g.b_upper).scale(1.0 / g.w);
            assert!(max_entry_diff(&g.amat, &triple) <= 1e-12 * (1.0 + hess.max_abs()));
        }
    }

    fn rotation(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        // Orthonormalize a random matrix by Gram–Schmidt.
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-3 {
                cols.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        DenseMatrix::from_fn(n, |i, j| cols[j][i])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn b_squares_to_inverse_metric(grad in proptest::collection::vec(-100.0f64..100.0, 2..=4)) {
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let grad: Vec<f64> = if norm > 100.0 { grad.iter().map(|g| g * 100.0 / norm).collect() } else { grad };
            let w = (1.0 + grad.iter().map(|g| g * g).sum::<f64>()).sqrt();
            prop_assert!(w >= 1.0);
            let b = DenseMatrix::from(b_upper(&grad, w));
            let bb = b.mul(&b);
            let g = inverse_metric(&grad);
            for i in 0..grad.len() {
                for j in 0..grad.len() {
                    prop_assert!((bb.get(i, j) - g.get(i, j)).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn curvatures_rotation_invariant(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=3);
            let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let hess = SymMatrix::from_fn(n, |_, _| rng.gen_range(-5.0..5.0));
            let r = rotation(&mut rng, n);
            let rg = r.mul_vec(&grad);
            let rh_dense = r.mul(&DenseMatrix::from(hess)).mul(&r.transpose());
            let rh = SymMatrix::from_fn(n, |i, j| 0.5 * (rh_dense.get(i, j) + rh_dense.get(j, i)));
            let a = assemble_point(&grad, &hess).unwrap();
            let b = assemble_point(&rg, &rh).unwrap();
            for (x, y) in a.kappa.iter().zip(&b.kappa) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }

        #[test]
        fn phase_bounded_and_monotone(
            kappa in proptest::collection::vec(-1e6f64..1e6, 2..=4),
            idx in 0usize..4,
            bump in 1e-3f64..10.0,
        ) {
            let n = kappa.len();
            let f = phase_f(&kappa);
            prop_assert!(f.abs() < n as f64 * FRAC_PI_2);
            let mut bumped = kappa.clone();
            bumped[idx % n] += bump;
            prop_assert!(phase_f(&bumped) >= f);
        }
    }
}
