//! Fredholm determinants, the exponential determinant identity and the
//! logarithmic derivative of determinants along paths.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Lu};
use crate::quadrature::{self, Quadrature, ADAPTIVE_TOLERANCE, DEFAULT_ORDER};
use crate::toeplitz::{Estimate, ToeplitzOp, SYMBOL_TOLERANCE};

/// An operator of the form `1 + K` with `K` trace class.
#[derive(Debug, Clone, PartialEq)]
pub struct DetClassOp(ToeplitzOp);

impl DetClassOp {
    pub fn new(op: ToeplitzOp) -> Result<Self> {
        let deviation = op.symbol().l1_distance(&crate::fourier::FourierLoop::one());
        if deviation > SYMBOL_TOLERANCE {
            return Err(Error::NotDeterminantClass { deviation });
        }
        Ok(Self(op))
    }

    pub fn op(&self) -> &ToeplitzOp {
        &self.0
    }

    pub fn det1p(&self) -> Result<Estimate> {
        self.0.det1p()
    }
}

/// Fredholm determinant of `X`, which must have symbol one.
pub fn det1p(x: &ToeplitzOp) -> Result<Estimate> {
    x.det1p()
}

/// Determinant of `X` computed at its window and again at twice the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingCheck {
    pub value: Estimate,
    pub doubled: Complex64,
    pub delta: f64,
}

/// Runs `build` at `window` and `2 * window` and compares the determinants
/// to relative `1e-9`.
pub fn det1p_doubling<F>(window: usize, build: F) -> Result<DoublingCheck>
where
    F: Fn(usize) -> Result<ToeplitzOp>,
{
    let value = build(window)?.det1p()?;
    let doubled = build(2 * window)?.det1p()?.value;
    let delta = (value.value - doubled).norm();
    if delta > 1e-9 * value.value.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::WindowTooSmall(format!("determinant moved by {delta:.3e} under window doubling")));
    }
    Ok(DoublingCheck { value, doubled, delta })
}

/// `e^{Tr(x - y)}`, which equals `det(e^x e^{-y})`.
pub fn det_exp_pair(x: &CMatrix, y: &CMatrix) -> Complex64 {
    (linalg::trace(&x.view()) - linalg::trace(&y.view())).exp()
}

/// Both sides of the exponential determinant identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    pub direct: Complex64,
    pub closed: Complex64,
    pub relative_error: f64,
}

/// Computes `det(e^x e^{-y})` densely and compares with [`det_exp_pair`].
pub fn check_det_exp_pair(x: &CMatrix, y: &CMatrix) -> Result<PairCheck> {
    let ex = linalg::expm(&x.view())?;
    let emy = linalg::expm(&y.mapv(|z| -z).view())?;
    let direct = linalg::det(&ex.dot(&emy).view())?;
    let closed = det_exp_pair(x, y);
    Ok(PairCheck { direct, closed, relative_error: (direct - closed).norm() / closed.norm() })
}

/// Operator-valued analogue of the pair identity: `det(e^X e^{-Y})` for
/// Toeplitz-algebra elements with equal symbols.
pub fn check_det_exp_pair_op(x: &ToeplitzOp, y: &ToeplitzOp) -> Result<PairCheck> {
    let prod = x.exp_op()?.mul(&y.neg().exp_op()?);
    let direct = prod.det1p_with_tolerance(SYMBOL_TOLERANCE * prod.norm_bound().max(1.0))?.value;
    let closed = x.sub(y).op_trace()?.exp();
    Ok(PairCheck { direct, closed, relative_error: (direct - closed).norm() / closed.norm() })
}

type PathFn<T> = Arc<dyn Fn(f64) -> Result<T> + Send + Sync>;

/// A `C^2` path `t ↦ F(t)` on `[0, 1]` given by value and derivative.
#[derive(Clone)]
pub struct OperatorPath<T> {
    value: PathFn<T>,
    derivative: PathFn<T>,
    pub order: usize,
}

impl<T> OperatorPath<T> {
    pub fn new<V, D>(value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> Result<T> + Send + Sync + 'static,
        D: Fn(f64) -> Result<T> + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), derivative: Arc::new(derivative), order: DEFAULT_ORDER }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn value(&self, t: f64) -> Result<T> {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> Result<T> {
        (self.derivative)(t)
    }
}

/// Path values for which `Tr(F^{-1} F')` makes sense.
pub trait LogDerivative {
    fn log_derivative_trace(value: &Self, derivative: &Self, t: f64) -> Result<Complex64>;
}

impl LogDerivative for CMatrix {
    fn log_derivative_trace(value: &Self, derivative: &Self, t: f64) -> Result<Complex64> {
        let lu = Lu::new(&value.view()).map_err(|_| Error::PathLeavesInvertibles { t })?;
        Ok(linalg::trace(&lu.solve(&derivative.view()).view()))
    }
}

impl LogDerivative for ToeplitzOp {
    fn log_derivative_trace(value: &Self, derivative: &Self, t: f64) -> Result<Complex64> {
        let inv = value.inv().map_err(|e| match e {
            Error::NumericallySingular(_) | Error::IndexObstruction { .. } => Error::PathLeavesInvertibles { t },
            other => other,
        })?;
        inv.mul(derivative).op_trace()
    }
}

/// `∫_0^1 Tr(F(t)^{-1} F'(t)) dt` by adaptive Gauss–Legendre quadrature, so
/// that its exponential is `det F(1) / det F(0)`.
pub fn path_log_det<T: LogDerivative>(path: &OperatorPath<T>) -> Result<Quadrature<Complex64>> {
    quadrature::integrate_adaptive(path.order, ADAPTIVE_TOLERANCE, |t| {
        let v = path.value(t)?;
        let d = path.derivative(t)?;
        T::log_derivative_trace(&v, &d, t)
    })
}

/// `det(U V U^{-1} V^{-1})` for invertible elements with commuting symbols.
pub fn mult_commutator_det(u: &ToeplitzOp, v: &ToeplitzOp) -> Result<Estimate> {
    let w = u.mul(v).mul(&u.inv()?.mul(&v.inv()?));
    let scale = u.norm_bound() * v.norm_bound();
    let tolerance = SYMBOL_TOLERANCE * (scale * scale).max(1.0);
    let deviation = w.symbol().l1_distance(&crate::fourier::FourierLoop::one());
    if deviation > tolerance {
        return Err(Error::InvariantViolation(format!(
            "multiplicative commutator has symbol {deviation:.3e} away from one"
        )));
    }
    w.det1p_with_tolerance(tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierLoop;
    use crate::toeplitz::commutator_trace_closed;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lp(pairs: &[(i64, f64)]) -> FourierLoop {
        FourierLoop::from_pairs(pairs.iter().map(|(k, v)| (*k, c(*v, 0.0))))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CMatrix {
        Array2::from_shape_fn((n, n), |_| c(rng.gen_range(-r..r), rng.gen_range(-r..r)))
    }

    #[test]
    fn det1p_examples() {
        let w = 16;
        assert_eq!(det1p(&ToeplitzOp::identity(w)).unwrap().value, c(1.0, 0.0));
        let lambda = c(0.7, -1.2);
        let x = ToeplitzOp::identity(w).sub(&ToeplitzOp::first_projection(w)).add(&ToeplitzOp::first_projection(w).scale(lambda));
        assert!((det1p(&x).unwrap().value - lambda).norm() < 1e-15);
        let a = lp(&[(1, 0.3), (-1, 0.2), (2, 0.1)]);
        let e = ToeplitzOp::toeplitz(&a, 64).unwrap().exp_op().unwrap();
        let em = ToeplitzOp::toeplitz(&a.neg(), 64).unwrap().exp_op().unwrap();
        let d = e.mul(&em).det1p_with_tolerance(1e-12).unwrap();
        assert!((d.value - 1.0).norm() < 1e-13);
        assert!(matches!(det1p(&ToeplitzOp::shift(w)), Err(Error::NotDeterminantClass { .. })));
        assert!(matches!(DetClassOp::new(ToeplitzOp::zero(w)), Err(Error::NotDeterminantClass { .. })));
    }

    #[test]
    fn det_exp_pair_examples() {
        let x = array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let y = Array2::zeros((2, 2));
        assert!((det_exp_pair(&x, &x) - 1.0).norm() == 0.0);
        assert!((det_exp_pair(&x, &y) - 0.5f64.exp()).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let x = random_matrix(&mut rng, 30, 0.3);
            let y = random_matrix(&mut rng, 30, 0.3);
            assert!(check_det_exp_pair(&x, &y).unwrap().relative_error < 1e-10);
        }
    }

    #[test]
    fn path_log_det_examples() {
        let x = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        let xc = x.clone();
        let path = OperatorPath::new(
            move |t| linalg::expm(&(&x * c(t, 0.0)).view()),
            move |t| Ok(xc.dot(&linalg::expm(&(&xc * c(t, 0.0)).view())?)),
        );
        let q = path_log_det(&path).unwrap();
        assert!((q.value - 3.0).norm() < 1e-12);
        let id = OperatorPath::new(|_| Ok(linalg::identity(3)), |_| Ok(Array2::zeros((3, 3))));
        assert_eq!(path_log_det(&id).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn path_through_singular_matrix_is_reported() {
        // F(t) = diag(1 - 2t, 1) is singular at t = 1/2, hit by no node but
        // the diagonal path below passes exactly through zero at a node
        let (nodes, _) = quadrature::gauss_legendre(DEFAULT_ORDER);
        let t0 = nodes[10];
        let path = OperatorPath::new(
            move |t| Ok(array![[c(t - t0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]),
            |_| Ok(array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]),
        );
        assert_eq!(path_log_det(&path).unwrap_err(), Error::PathLeavesInvertibles { t: t0 });
    }

    #[test]
    fn mult_commutator_examples() {
        let w = 64;
        let a = lp(&[(1, 0.1)]);
        let u = ToeplitzOp::toeplitz(&a, w).unwrap().exp_op().unwrap();
        assert!((mult_commutator_det(&u, &u).unwrap().value - 1.0).norm() < 1e-14);
        let b = lp(&[(-1, 0.1)]);
        let v = ToeplitzOp::toeplitz(&b, w).unwrap().exp_op().unwrap();
        let d = mult_commutator_det(&u, &v).unwrap().value;
        assert!((d - (-0.01f64).exp()).norm() < 1e-14);
        assert!((d - commutator_trace_closed(&a, &b).exp()).norm() < 1e-14);
        let back = mult_commutator_det(&v, &u).unwrap().value;
        assert!((d * back - 1.0).norm() < 1e-13);
    }

    #[test]
    fn operator_pair_identity() {
        let w = 64;
        let a = lp(&[(1, 0.2), (-2, 0.1)]);
        let x = ToeplitzOp::toeplitz(&a, w).unwrap();
        let mut k = Array2::zeros((3, 3));
        k[[0, 1]] = c(0.3, 0.1);
        k[[2, 2]] = c(-0.2, 0.0);
        let y = x.add(&ToeplitzOp::finite(&k.view(), w));
        let check = check_det_exp_pair_op(&x, &y).unwrap();
        assert!(check.relative_error < 1e-12, "{check:?}");
    }
}
