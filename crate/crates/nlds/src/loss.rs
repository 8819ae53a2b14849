//! Proxy loss, its gradient, the empirical Gram matrix, and error metrics
//! shared by every solver.
//!
//! The proxy loss for a candidate matrix `A` over a trajectory is
//!
//! ```text
//! L(A) = (1/T) sum_t sum_i [ Phi(<a_i, X_t>) - X_{t+1,i} * <a_i, X_t> ]
//! ```
//!
//! with `Phi` the link's antiderivative. It is convex because `phi` is
//! nondecreasing, and its gradient has the closed form
//! `(1/T) sum_t (phi(A X_t) - X_{t+1}) X_t^T`. Everything here is a pure
//! function of immutable inputs; the per-pair pieces are exposed so the
//! streaming solvers can reuse them on reordered data.

use crate::error::{Error, Result};
use crate::link::LinkFunction;
use crate::sim::Trajectory;
use nalgebra::{DMatrix, DVector};

/// Empirical second-moment matrix `G = (1/n) sum X_t X_t^T` with a cached
/// eigendecomposition for inverse / square-root application.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    g_hat: DMatrix<f64>,
    evals: DVector<f64>,
    evecs: DMatrix<f64>,
    t_used: usize,
}

impl GramMatrix {
    fn from_inputs(inputs: &[DVector<f64>]) -> Self {
        let d = inputs[0].len();
        let n = inputs.len() as f64;
        let mut g = DMatrix::zeros(d, d);
        for x in inputs {
            g.ger(1.0 / n, x, x, 1.0);
        }
        let eigen = g.clone().symmetric_eigen();
        Self { g_hat: g, evals: eigen.eigenvalues, evecs: eigen.eigenvectors, t_used: inputs.len() }
    }

    /// The matrix itself.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g_hat
    }

    /// Smallest eigenvalue (can dip slightly below zero from roundoff).
    pub fn lambda_min(&self) -> f64 {
        self.evals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.evals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// How many input states the average ran over.
    pub fn t_used(&self) -> usize {
        self.t_used
    }

    /// Whether the matrix is too ill-conditioned to invert
    /// (`lambda_min < 1e-12 * lambda_max`, or identically zero).
    pub fn near_singular(&self) -> bool {
        let max = self.lambda_max();
        max <= 0.0 || self.lambda_min() < 1e-12 * max
    }

    /// Apply a spectral function through the cached eigenbasis.
    fn spectral(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = self.g_hat.nrows();
        let scaled = DMatrix::from_fn(d, d, |i, j| self.evecs[(i, j)] * f(self.evals[j]));
        &scaled * self.evecs.transpose()
    }

    /// `G^{-1}`, or `None` when near-singular.
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        if self.near_singular() {
            None
        } else {
            Some(self.spectral(|l| 1.0 / l))
        }
    }

    /// Symmetric PSD square root `G^{1/2}` (negative roundoff clamped to 0).
    pub fn sqrt_matrix(&self) -> DMatrix<f64> {
        self.spectral(|l| l.max(0.0).sqrt())
    }

    /// `G^{-1/2}`, or `None` when near-singular.
    pub fn inv_sqrt(&self) -> Option<DMatrix<f64>> {
        if self.near_singular() {
            None
        } else {
            Some(self.spectral(|l| 1.0 / l.max(0.0).sqrt()))
        }
    }
}

/// Gram matrix over all trajectory inputs `X_0, ..., X_{T-1}` (every state
/// except the last, i.e. every state used as a regression input).
pub fn empirical_gram(traj: &Trajectory) -> GramMatrix {
    GramMatrix::from_inputs(&traj.states()[..traj.horizon()])
}

/// Gram matrix over the input range `t in [t_start, t_end)`.
pub fn empirical_gram_over(traj: &Trajectory, t_start: usize, t_end: usize) -> Result<GramMatrix> {
    if t_start >= t_end || t_end > traj.horizon() {
        return Err(Error::InvalidParam(format!(
            "gram range [{t_start}, {t_end}) must be nonempty and lie within horizon {}",
            traj.horizon()
        )));
    }
    Ok(GramMatrix::from_inputs(&traj.states()[t_start..t_end]))
}

/// Single-pair proxy-loss contribution
/// `sum_i [ Phi(<a_i, x>) - y_i * <a_i, x> ]`.
pub fn pair_loss(link: &LinkFunction, a: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let z = a * x;
    z.iter().zip(y.iter()).map(|(&zi, &yi)| link.antideriv(zi) - yi * zi).sum()
}

/// Proxy loss averaged over the trajectory's `T` transition pairs.
pub fn proxy_loss(link: &LinkFunction, a: &DMatrix<f64>, traj: &Trajectory) -> f64 {
    let t = traj.horizon() as f64;
    traj.pairs().map(|(x, y)| pair_loss(link, a, x, y)).sum::<f64>() / t
}

/// Gradient of the proxy loss: `(1/T) sum_t (phi(A X_t) - X_{t+1}) X_t^T`.
pub fn proxy_grad(link: &LinkFunction, a: &DMatrix<f64>, traj: &Trajectory) -> DMatrix<f64> {
    proxy_grad_over(link, a, traj, 0, traj.horizon())
}

/// Gradient restricted to the pairs `(X_t, X_{t+1})` for
/// `t in [t_start, t_end)`, averaged over that range.
pub fn proxy_grad_over(
    link: &LinkFunction,
    a: &DMatrix<f64>,
    traj: &Trajectory,
    t_start: usize,
    t_end: usize,
) -> DMatrix<f64> {
    debug_assert!(t_start < t_end && t_end <= traj.horizon());
    let d = a.nrows();
    let n = (t_end - t_start) as f64;
    let mut grad = DMatrix::zeros(d, d);
    let mut r = DVector::zeros(d);
    for t in t_start..t_end {
        let x = traj.state(t);
        r.gemv(1.0, a, x, 0.0);
        link.apply_mut(&mut r);
        r -= traj.state(t + 1);
        grad.ger(1.0 / n, &r, x, 1.0);
    }
    grad
}

/// One stochastic row update `A <- A - step * (phi(A x) - y) x^T`, in place.
///
/// Callers own the step-size convention: the reverse-replay family passes
/// `step = 2 * gamma` (their updates carry the factor two), plain projected
/// SGD passes its raw step.
pub fn sgd_pair_update(
    a: &mut DMatrix<f64>,
    link: &LinkFunction,
    x: &DVector<f64>,
    y: &DVector<f64>,
    step: f64,
) {
    // gemv keeps the accumulation order identical to the simulator's state
    // recursion, so a zero-noise residual is zero to the last bit.
    let mut r = DVector::zeros(y.nrows());
    r.gemv(1.0, a, x, 0.0);
    link.apply_mut(&mut r);
    r -= y;
    a.ger(-step, &r, x, 1.0);
}

/// Squared Frobenius distance `||A - B||_F^2`.
pub fn frob_sq_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "matrices must share a shape");
    (a - b).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{rand_bimod, simulate, NoiseModel, SystemSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn small_traj(link: LinkFunction, seed: u64, t: usize) -> Trajectory {
        let a = rand_bimod(2, 0.8, seed);
        let spec = SystemSpec::new(a.unwrap(), link, NoiseModel::gaussian(1.0).unwrap()).unwrap();
        simulate(&spec, t, seed, &DVector::zeros(2), 0).unwrap()
    }

    #[test]
    fn loss_matches_term_by_term_brute_force() {
        let link = LinkFunction::leaky_relu(0.5).unwrap();
        let traj = small_traj(link, 3, 4);
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -0.7, 1.1, 0.2]);

        // independent scalar evaluation of the same definition
        let mut total = 0.0;
        for t in 0..4 {
            for i in 0..2 {
                let mut dot = 0.0;
                for j in 0..2 {
                    dot += a[(i, j)] * traj.state(t)[j];
                }
                total += link.antideriv(dot) - traj.state(t + 1)[i] * dot;
            }
        }
        assert_relative_eq!(proxy_loss(&link, &a, &traj), total / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn loss_is_zero_at_the_zero_matrix() {
        for link in [
            LinkFunction::identity(),
            LinkFunction::relu(),
            LinkFunction::logistic(2.0).unwrap(),
        ] {
            let traj = small_traj(LinkFunction::identity(), 5, 6);
            assert_eq!(proxy_loss(&link, &DMatrix::zeros(2, 2), &traj), 0.0);
        }
    }

    #[test]
    fn identity_link_loss_and_grad_algebra() {
        let link = LinkFunction::identity();
        let traj = small_traj(link, 9, 12);
        let a = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, -0.3, 0.9]);
        let t = traj.horizon() as f64;

        let mut quad = 0.0;
        let mut cross = 0.0;
        let mut c_hat = DMatrix::zeros(2, 2);
        for (x, y) in traj.pairs() {
            quad += (&a * x).norm_squared();
            cross += y.dot(&(&a * x));
            c_hat.ger(1.0 / t, y, x, 1.0);
        }
        assert_relative_eq!(
            proxy_loss(&link, &a, &traj),
            0.5 * quad / t - cross / t,
            max_relative = 1e-13
        );

        let g = empirical_gram(&traj);
        let grad = proxy_grad(&link, &a, &traj);
        assert!((&grad - (&a * g.matrix() - &c_hat)).amax() < 1e-13);
    }

    #[test]
    fn grad_vanishes_at_the_truth_without_noise() {
        let a_star = rand_bimod(3, 0.9, 1).unwrap();
        let link = LinkFunction::leaky_relu(0.5).unwrap();
        let spec = SystemSpec::new(a_star.clone(), link, NoiseModel::none()).unwrap();
        let traj = simulate(&spec, 15, 0, &DVector::from_element(3, 1.0), 0).unwrap();
        let grad = proxy_grad(&link, &a_star, &traj);
        assert!(grad.amax() < 1e-14);
    }

    #[test]
    fn grad_matches_central_finite_differences() {
        for (link, seed) in [
            (LinkFunction::identity(), 2u64),
            (LinkFunction::leaky_relu(0.5).unwrap(), 3),
            (LinkFunction::logistic(4.0).unwrap(), 4),
        ] {
            let traj = small_traj(link, seed, 8);
            let a = DMatrix::from_row_slice(2, 2, &[0.6, -0.2, 0.8, 0.4]);
            let grad = proxy_grad(&link, &a, &traj);
            let scale = grad.amax().max(1.0);
            for i in 0..2 {
                for j in 0..2 {
                    let h = 1e-6 * a[(i, j)].abs().max(1.0);
                    let mut ap = a.clone();
                    let mut am = a.clone();
                    ap[(i, j)] += h;
                    am[(i, j)] -= h;
                    let fd =
                        (proxy_loss(&link, &ap, &traj) - proxy_loss(&link, &am, &traj)) / (2.0 * h);
                    assert!(
                        (fd - grad[(i, j)]).abs() / scale <= 1e-6,
                        "{link}: entry ({i},{j}) fd={fd} analytic={}",
                        grad[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn gram_hand_example_half_identity() {
        let states = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![0.0, 0.0]),
        ];
        let traj = Trajectory::from_states(states, LinkFunction::identity()).unwrap();
        let g = empirical_gram(&traj);
        assert_eq!(g.t_used(), 2);
        assert!((g.matrix() - DMatrix::from_diagonal_element(2, 2, 0.5)).amax() < 1e-15);
        assert_relative_eq!(g.lambda_min(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(g.lambda_max(), 0.5, epsilon = 1e-12);
        assert!(!g.near_singular());
    }

    #[test]
    fn gram_flags_rank_deficiency() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let traj = Trajectory::from_states(vec![e1.clone(), e1.clone(), e1], LinkFunction::identity())
            .unwrap();
        let g = empirical_gram(&traj);
        assert!(g.lambda_min().abs() < 1e-12);
        assert!(g.near_singular());
        assert!(g.inverse().is_none());
        assert!(g.inv_sqrt().is_none());

        let zero = DVector::zeros(2);
        let traj = Trajectory::from_states(vec![zero.clone(), zero.clone(), zero], LinkFunction::identity())
            .unwrap();
        assert!(empirical_gram(&traj).near_singular(), "zero gram is singular");
    }

    #[test]
    fn gram_spectral_functions_are_consistent() {
        let traj = small_traj(LinkFunction::identity(), 13, 60);
        let g = empirical_gram(&traj);
        assert!(!g.near_singular());
        let d = 2;
        let s = g.sqrt_matrix();
        assert!((&s * &s - g.matrix()).amax() < 1e-12, "sqrt squares back");
        let inv = g.inverse().unwrap();
        assert!((g.matrix() * &inv - DMatrix::identity(d, d)).amax() < 1e-10);
        let is = g.inv_sqrt().unwrap();
        assert!((&is * g.matrix() * &is - DMatrix::identity(d, d)).amax() < 1e-10);
        // symmetric & PSD up to roundoff
        assert!((g.matrix() - g.matrix().transpose()).amax() < 1e-12);
        assert!(g.lambda_min() >= -1e-10);
    }

    #[test]
    fn gram_range_selects_inputs() {
        let traj = small_traj(LinkFunction::identity(), 17, 10);
        let g = empirical_gram_over(&traj, 2, 5).unwrap();
        assert_eq!(g.t_used(), 3);
        let mut want = DMatrix::zeros(2, 2);
        for t in 2..5 {
            want.ger(1.0 / 3.0, traj.state(t), traj.state(t), 1.0);
        }
        assert!((g.matrix() - want).amax() < 1e-15);
        assert!(empirical_gram_over(&traj, 5, 5).is_err());
        assert!(empirical_gram_over(&traj, 0, 11).is_err());
    }

    #[test]
    fn frob_error_hand_values() {
        let i = DMatrix::<f64>::identity(2, 2);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(frob_sq_error(&i, &i), 0.0);
        assert_eq!(frob_sq_error(&i, &swap), 4.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(frob_sq_error(&a, &DMatrix::zeros(2, 2)), 30.0);
    }

    #[test]
    fn pair_update_hand_example() {
        let mut a = DMatrix::zeros(1, 1);
        let x = DVector::from_element(1, 2.0);
        let y = DVector::from_element(1, 1.0);
        sgd_pair_update(&mut a, &LinkFunction::identity(), &x, &y, 0.1);
        // A <- 0 - 0.1 * (0 - 1) * 2 = 0.2
        assert_relative_eq!(a[(0, 0)], 0.2, epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn loss_is_convex_along_segments(
            entries1 in proptest::collection::vec(-2.0f64..2.0, 4),
            entries2 in proptest::collection::vec(-2.0f64..2.0, 4),
            lambda in 0.0f64..1.0,
            link_idx in 0usize..4,
        ) {
            let link = match link_idx {
                0 => LinkFunction::identity(),
                1 => LinkFunction::leaky_relu(0.5).unwrap(),
                2 => LinkFunction::relu(),
                _ => LinkFunction::logistic(6.0).unwrap(),
            };
            let traj = small_traj(LinkFunction::leaky_relu(0.5).unwrap(), 7, 6);
            let a1 = DMatrix::from_row_slice(2, 2, &entries1);
            let a2 = DMatrix::from_row_slice(2, 2, &entries2);
            let mix = &a1 * lambda + &a2 * (1.0 - lambda);
            let lhs = proxy_loss(&link, &mix, &traj);
            let rhs = lambda * proxy_loss(&link, &a1, &traj)
                + (1.0 - lambda) * proxy_loss(&link, &a2, &traj);
            prop_assert!(lhs <= rhs + 1e-10, "convexity violated: {lhs} > {rhs}");
        }

        #[test]
        fn grad_monotonicity_brackets_the_gram(
            entries1 in proptest::collection::vec(-2.0f64..2.0, 4),
            entries2 in proptest::collection::vec(-2.0f64..2.0, 4),
            link_idx in 0usize..2,
        ) {
            // The difference-quotient-weighted Gram is sandwiched between
            // zeta*G and G for expansive 1-Lipschitz links:
            //   zeta * q(D) <= <grad(A1) - grad(A2), A1 - A2> <= q(D)
            // where q(D) = tr(D G D^T), D = A1 - A2.
            let link = match link_idx {
                0 => LinkFunction::identity(),
                _ => LinkFunction::leaky_relu(0.5).unwrap(),
            };
            let traj = small_traj(link, 11, 8);
            let a1 = DMatrix::from_row_slice(2, 2, &entries1);
            let a2 = DMatrix::from_row_slice(2, 2, &entries2);
            let diff = &a1 - &a2;
            let inner = (proxy_grad(&link, &a1, &traj) - proxy_grad(&link, &a2, &traj))
                .dot(&diff);
            let quad = (&diff * empirical_gram(&traj).matrix()).dot(&diff);
            let tol = 1e-10 * (1.0 + quad.abs());
            prop_assert!(inner >= link.zeta() * quad - tol, "{inner} < zeta*{quad}");
            prop_assert!(inner <= quad + tol, "{inner} > {quad}");
        }
    }
}
