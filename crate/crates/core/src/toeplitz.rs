//! The Toeplitz extension algebra: operators `T_φ + C` on the one-sided
//! sequence space, where `φ` is a band-limited symbol and `C` a finite
//! correction window standing for a trace-class operator.

use ndarray::{s, Array2, ArrayView2};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{pairing_integral, FourierLoop, TRUNCATION_THRESHOLD};
use crate::linalg::{self, CMatrix, Lu, ONE, ZERO};

/// Symbols within this ℓ¹ distance are treated as equal when an exact
/// symbol is required (zero for traces, one for determinants).
pub const SYMBOL_TOLERANCE: f64 = 1e-12;
const MIN_SECTION_SUPPORT: usize = 32;
/// Correction entries at the edge of a resolved section are below this many
/// ulps of the section's scale.
const RIM_ULPS: f64 = 64.0;

/// Default window for a symbol of the given band.
pub fn default_window(band: usize) -> usize {
    4 * band + 16
}

/// Dense block of `T_φ` with rows `r0..r1` and columns `c0..c1`.
pub fn toeplitz_block(phi: &FourierLoop, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> CMatrix {
    let (r0, c0) = (rows.start, cols.start);
    let mut m = Array2::zeros((rows.len(), cols.len()));
    let band = phi.band() as i64;
    for j in rows {
        let lo = (j as i64 - band).max(c0 as i64) as usize;
        let hi = ((j as i64 + band + 1).max(0) as usize).min(cols.end);
        for k in lo..hi {
            m[[j - r0, k - c0]] = phi.coeff(j as i64 - k as i64);
        }
    }
    m
}

/// Dense `rows × cols` block of the Hankel operator `h_{jk} = φ_{j+k+1}`.
pub fn hankel_block(phi: &FourierLoop, rows: usize, cols: usize) -> CMatrix {
    let band = phi.band();
    let mut m = Array2::zeros((rows, cols));
    for j in 0..rows.min(band) {
        for k in 0..cols.min(band - j) {
            m[[j, k]] = phi.coeff((j + k + 1) as i64);
        }
    }
    m
}

/// The Hankel operator of a symbol on an `M × M` window.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelWindow {
    pub matrix: CMatrix,
}

impl HankelWindow {
    pub fn new(phi: &FourierLoop, window: usize) -> Self {
        Self { matrix: hankel_block(phi, window, window) }
    }
}

/// An element `T_φ + C` of the Toeplitz extension algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzOp {
    symbol: FourierLoop,
    correction: CMatrix,
    window: usize,
    tail_bound: f64,
}

/// A determinant together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl ToeplitzOp {
    /// `T_a` with zero correction.
    pub fn toeplitz(a: &FourierLoop, window: usize) -> Result<Self> {
        let required = 2 * a.band() + 2;
        if window < required {
            return Err(Error::WindowTooSmallForBand { window, required });
        }
        Ok(Self::from_symbol(a.clone(), window))
    }

    fn from_symbol(symbol: FourierLoop, window: usize) -> Self {
        Self { symbol, correction: Array2::zeros((window, window)), window, tail_bound: 0.0 }
    }

    /// `T_φ + C` with `C` placed in the top-left corner of the window; entries
    /// of `C` beyond the window count towards the tail bound.
    pub fn from_parts(symbol: FourierLoop, correction: &ArrayView2<'_, Complex64>, window: usize, tail_bound: f64) -> Self {
        let resized = linalg::resized(correction, window, window);
        let lost = linalg::entry_l1(correction) - linalg::entry_l1(&resized.view());
        Self { symbol, correction: resized, window, tail_bound: tail_bound + lost.max(0.0) }
    }

    /// A finite-rank operator (zero symbol).
    pub fn finite(correction: &ArrayView2<'_, Complex64>, window: usize) -> Self {
        Self::from_parts(FourierLoop::zero(), correction, window, 0.0)
    }

    pub fn identity(window: usize) -> Self {
        Self::from_symbol(FourierLoop::one(), window)
    }

    pub fn zero(window: usize) -> Self {
        Self::from_symbol(FourierLoop::zero(), window)
    }

    pub fn scalar(c: Complex64, window: usize) -> Self {
        Self::from_symbol(FourierLoop::constant(c), window)
    }

    /// The unilateral shift `e_n ↦ e_{n+1}`.
    pub fn shift(window: usize) -> Self {
        Self::from_symbol(FourierLoop::z(), window)
    }

    pub fn shift_adjoint(window: usize) -> Self {
        Self::from_symbol(FourierLoop::monomial(-1, ONE), window)
    }

    /// The projection `1 - SS*` onto the first basis vector.
    pub fn first_projection(window: usize) -> Self {
        let mut c = Array2::zeros((window, window));
        c[[0, 0]] = ONE;
        Self { symbol: FourierLoop::zero(), correction: c, window, tail_bound: 0.0 }
    }

    /// The Hankel operator of `φ` as a zero-symbol element.
    pub fn hankel(phi: &FourierLoop, window: usize) -> Self {
        let h = hankel_block(phi, phi.band(), phi.band());
        Self::from_parts(FourierLoop::zero(), &h.view(), window, 0.0)
    }

    pub fn symbol(&self) -> &FourierLoop {
        &self.symbol
    }

    pub fn correction(&self) -> &CMatrix {
        &self.correction
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail_bound = tail;
        self
    }

    /// Matrix entry `(j, k)` of the represented operator.
    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        let t = self.symbol.coeff(j as i64 - k as i64);
        if j < self.window && k < self.window {
            t + self.correction[[j, k]]
        } else {
            t
        }
    }

    /// The leading `n × n` section of the operator.
    pub fn section(&self, n: usize) -> CMatrix {
        let mut m = toeplitz_block(&self.symbol, 0..n, 0..n);
        let w = n.min(self.window);
        let mut top = m.slice_mut(s![..w, ..w]);
        top += &self.correction.slice(s![..w, ..w]);
        m
    }

    /// Same operator on a different window.
    pub fn resize(&self, window: usize) -> Self {
        Self::from_parts(self.symbol.clone(), &self.correction.view(), window, self.tail_bound)
    }

    /// Smallest `s` such that the correction vanishes outside its `s × s` corner.
    pub fn support(&self) -> usize {
        linalg::support(&self.correction.view())
    }

    /// Bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.symbol.l1_norm() + self.symbol.tail_bound() + linalg::norm_fro(&self.correction.view()) + self.tail_bound
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.window.max(other.window);
        let c = linalg::resized(&self.correction.view(), m, m) + linalg::resized(&other.correction.view(), m, m);
        Self { symbol: self.symbol.add(&other.symbol), correction: c, window: m, tail_bound: self.tail_bound + other.tail_bound }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            symbol: self.symbol.neg(),
            correction: self.correction.mapv(|z| -z),
            window: self.window,
            tail_bound: self.tail_bound,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            symbol: self.symbol.scale(c),
            correction: self.correction.mapv(|z| z * c),
            window: self.window,
            tail_bound: self.tail_bound * c.norm(),
        }
    }

    /// Product, using `T_φ T_ψ = T_{φψ} - H_φ H_ψ̃` for the Toeplitz parts.
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.window.max(other.window);
        let c = linalg::resized(&self.correction.view(), m, m);
        let d = linalg::resized(&other.correction.view(), m, m);
        let (sc, sd) = (linalg::support(&c.view()), linalg::support(&d.view()));
        let (phi, psi) = (&self.symbol, &other.symbol);
        let (kx, ky) = (phi.band(), psi.band());
        let ext = (m + kx.max(ky)).max(kx).max(ky);
        let mut acc: CMatrix = Array2::zeros((ext, ext));

        if kx > 0 && ky > 0 {
            let hp = hankel_block(phi, kx, kx);
            let hq = hankel_block(&psi.reflect(), kx, ky);
            let mut corner = acc.slice_mut(s![..kx, ..ky]);
            corner -= &hp.dot(&hq);
        }
        if sd > 0 {
            let t = toeplitz_block(phi, 0..sd + kx, 0..sd);
            let mut blk = acc.slice_mut(s![..sd + kx, ..sd]);
            blk += &t.dot(&d.slice(s![..sd, ..sd]));
        }
        if sc > 0 {
            let t = toeplitz_block(psi, 0..sc, 0..sc + ky);
            let mut blk = acc.slice_mut(s![..sc, ..sc + ky]);
            blk += &c.slice(s![..sc, ..sc]).dot(&t);
        }
        if sc > 0 && sd > 0 {
            let inner = sc.min(sd);
            let mut blk = acc.slice_mut(s![..sc, ..sd]);
            blk += &c.slice(s![..sc, ..inner]).dot(&d.slice(s![..inner, ..sd]));
        }

        let correction = acc.slice(s![..m, ..m]).to_owned();
        let overflow = linalg::entry_l1(&acc.view()) - linalg::entry_l1(&correction.view());
        let (tx, ty) = (self.tail_bound, other.tail_bound);
        let tail = self.norm_bound() * ty + tx * other.norm_bound() + tx * ty + overflow.max(0.0);
        Self { symbol: phi.mul(psi), correction, window: m, tail_bound: tail }
    }

    /// `XY - YX`; its symbol is exactly zero.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Applies a dense matrix function to growing sections until the part
    /// of the result not explained by `target` is resolved inside the
    /// window, and returns `T_target` plus that part.
    fn section_function<F>(&self, target: FourierLoop, f: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> Result<CMatrix>,
    {
        let k = self.symbol.band().max(target.band());
        let rim = k.max(8);
        let mut l = (self.support() + 2 * k + 8).max(MIN_SECTION_SUPPORT).min(self.window.max(MIN_SECTION_SUPPORT));
        loop {
            let n = (2 * l).max(l + 2 * k + 16);
            let fsec = f(&self.section(n))?;
            let scale = linalg::norm_2_bound(&fsec.view()).max(1.0);
            let mut e = fsec.slice(s![..l, ..l]).to_owned();
            e -= &toeplitz_block(&target, 0..l, 0..l);
            let rim_start = l.saturating_sub(rim);
            let mut rim_max: f64 = 0.0;
            let mut rim_mass = 0.0;
            for ((i, j), z) in e.indexed_iter() {
                if i >= rim_start || j >= rim_start {
                    rim_max = rim_max.max(z.norm());
                    rim_mass += z.norm();
                }
            }
            let resolved = rim_max <= RIM_ULPS * f64::EPSILON * scale;
            if resolved || l >= self.window {
                let dropped = linalg::drop_below(&mut e, TRUNCATION_THRESHOLD.max(RIM_ULPS * f64::EPSILON * scale));
                let tail = if resolved { rim_mass } else { rim_mass * 2.0 } + dropped;
                return Ok(Self::from_parts(target, &e.view(), self.window, tail));
            }
            l = (2 * l).min(self.window);
        }
    }

    /// `e^X`, with symbol `e^φ`.
    pub fn exp_op(&self) -> Result<Self> {
        let target = self.symbol.exp()?;
        let out = self.section_function(target, |m| linalg::expm(&m.view()))?;
        let propagated = self.norm_bound().exp() * self.tail_bound.exp_m1();
        Ok(Self { tail_bound: out.tail_bound + propagated, ..out })
    }

    /// Inverse in the extension algebra; needs a symbol of winding zero.
    pub fn inv(&self) -> Result<Self> {
        let target = match self.symbol.inv() {
            Ok(t) => t,
            Err(Error::NonzeroWinding { winding }) => return Err(Error::IndexObstruction { winding }),
            Err(e) => return Err(e),
        };
        let out = self.section_function(target, |m| Lu::new(&m.view()).map(|lu| lu.inverse()))?;
        let propagated = if self.tail_bound == 0.0 {
            0.0
        } else {
            let ninv = out.norm_bound();
            ninv * ninv * self.tail_bound
        };
        Ok(Self { tail_bound: out.tail_bound + propagated, ..out })
    }

    /// Trace of a zero-symbol (trace-class) element.
    pub fn op_trace(&self) -> Result<Complex64> {
        let mass = self.symbol.l1_norm();
        if mass > SYMBOL_TOLERANCE {
            return Err(Error::TraceUndefined { mass });
        }
        Ok(linalg::trace(&self.correction.view()))
    }

    /// Fredholm determinant of an element with symbol one.
    pub fn det1p(&self) -> Result<Estimate> {
        self.det1p_with_tolerance(SYMBOL_TOLERANCE)
    }

    /// As [`ToeplitzOp::det1p`], accepting symbols within `tolerance` of one.
    pub fn det1p_with_tolerance(&self, tolerance: f64) -> Result<Estimate> {
        let deviation = self.symbol.l1_distance(&FourierLoop::one());
        if deviation > tolerance {
            return Err(Error::NotDeterminantClass { deviation });
        }
        det_identity_plus(&self.correction, self.tail_bound)
    }
}

/// `det(1 + C)` on the support of `C`, with a first-order error estimate from
/// the trace-norm `tail` of discarded entries.
pub(crate) fn det_identity_plus(c: &CMatrix, tail: f64) -> Result<Estimate> {
    let s = linalg::support(&c.view());
    if s == 0 {
        return Ok(Estimate { value: ONE, error: tail });
    }
    let mut m = c.slice(s![..s, ..s]).to_owned();
    for i in 0..s {
        m[[i, i]] += ONE;
    }
    let lu = Lu::new(&m.view())?;
    let value = lu.det();
    // first-order perturbation of the determinant by the tail and by roundoff in the factorization
    let roundoff = s as f64 * f64::EPSILON * linalg::norm_2_bound(&m.view());
    let error = value.norm() * (tail + roundoff) * linalg::norm_2_bound(&lu.inverse().view());
    Ok(Estimate { value, error })
}

/// `Σ_k k a_{-k} b_k`, the trace of `[T_a, T_b]`.
pub fn commutator_trace_closed(a: &FourierLoop, b: &FourierLoop) -> Complex64 {
    pairing_integral(a, b)
}

/// `Tr(S T_b S* - T_b) = -b_0`.
pub fn shift_conjugation_trace(b: &FourierLoop) -> Complex64 {
    -b.coeff(0)
}

/// Hilbert–Schmidt norm of `[2P - 1, M_f]` on the circle: `sqrt(4 Σ |k| |f_k|^2)`.
#[allow(non_snake_case)]
pub fn schatten2_commutator_F(f: &FourierLoop) -> f64 {
    (4.0 * f.terms().map(|(k, c)| k.unsigned_abs() as f64 * c.norm_sqr()).sum::<f64>()).sqrt()
}

impl Serialize for ToeplitzOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<[f64; 2]> = self.correction.iter().map(|z| [z.re, z.im]).collect();
        let mut st = s.serialize_struct("ToeplitzOp", 4)?;
        st.serialize_field("symbol", &self.symbol)?;
        st.serialize_field("window", &self.window)?;
        st.serialize_field("correction", &entries)?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        st.end()
    }
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ± {:.1e}", self.value, self.error)
    }
}

#[doc(hidden)]
pub fn zero_matrix(n: usize) -> CMatrix {
    Array2::from_elem((n, n), ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lp(pairs: &[(i64, f64)]) -> FourierLoop {
        FourierLoop::from_pairs(pairs.iter().map(|(k, v)| (*k, c(*v, 0.0))))
    }

    fn t(a: &FourierLoop, w: usize) -> ToeplitzOp {
        ToeplitzOp::toeplitz(a, w).unwrap()
    }

    // bi-infinite-free dense oracle: T_φ on an n × n section
    fn dense(phi: &FourierLoop, n: usize) -> CMatrix {
        Array2::from_shape_fn((n, n), |(j, k)| phi.coeff(j as i64 - k as i64))
    }

    #[test]
    fn shift_and_identity() {
        let s = t(&FourierLoop::z(), 8);
        for j in 0..8 {
            for k in 0..8 {
                let expected = if j == k + 1 { ONE } else { ZERO };
                assert_eq!(s.entry(j, k), expected);
                assert_eq!(ToeplitzOp::shift_adjoint(8).entry(j, k), if k == j + 1 { ONE } else { ZERO });
                assert_eq!(t(&FourierLoop::one(), 8).entry(j, k), if j == k { ONE } else { ZERO });
            }
        }
    }

    #[test]
    fn window_must_dominate_band() {
        let err = ToeplitzOp::toeplitz(&lp(&[(4, 1.0)]), 9).unwrap_err();
        assert_eq!(err, Error::WindowTooSmallForBand { window: 9, required: 10 });
    }

    #[test]
    fn shift_products() {
        let (s, sa) = (ToeplitzOp::shift(64), ToeplitzOp::shift_adjoint(64));
        let ssa = s.mul(&sa);
        assert_eq!(ssa.symbol(), &FourierLoop::one());
        // 64 x 64 dense product oracle of S S*
        let ds = dense(&FourierLoop::z(), 65);
        let dsa = dense(&FourierLoop::monomial(-1, ONE), 65);
        let prod = ds.dot(&dsa);
        for j in 0..64 {
            for k in 0..64 {
                assert_eq!(ssa.entry(j, k), prod[[j, k]]);
            }
        }
        assert_eq!(ssa.correction()[[0, 0]], c(-1.0, 0.0));
        assert_eq!(ssa.support(), 1);
        let sas = sa.mul(&s);
        assert_eq!(sas.symbol(), &FourierLoop::one());
        assert_eq!(sas.support(), 0);
    }

    #[test]
    fn product_matches_dense_truncation() {
        let a = lp(&[(1, 0.3)]);
        let b = lp(&[(-1, 0.2)]);
        let p = t(&a, 16).mul(&t(&b, 16));
        assert!(p.symbol().l1_distance(&lp(&[(0, 0.06)])) < 1e-17);
        let oracle = dense(&a, 40).dot(&dense(&b, 40));
        for j in 0..16 {
            for k in 0..16 {
                assert!((p.entry(j, k) - oracle[[j, k]]).norm() < 1e-16);
            }
        }
        let hh = hankel_block(&a, 16, 16).dot(&hankel_block(&b.reflect(), 16, 16));
        assert!(linalg::max_abs(&(p.correction() + &hh).view()) < 1e-17);
    }

    #[test]
    fn traces() {
        let (s, sa) = (ToeplitzOp::shift(16), ToeplitzOp::shift_adjoint(16));
        let x = s.mul(&sa).sub(&ToeplitzOp::identity(16));
        assert_eq!(x.op_trace().unwrap(), c(-1.0, 0.0));
        assert_eq!(ToeplitzOp::zero(16).op_trace().unwrap(), ZERO);
        let comm = t(&FourierLoop::z(), 16).commutator(&t(&FourierLoop::monomial(-1, ONE), 16));
        assert!(comm.symbol().is_zero());
        assert_eq!(comm.op_trace().unwrap(), c(-1.0, 0.0));
        assert!(matches!(s.op_trace(), Err(Error::TraceUndefined { .. })));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(commutator_trace_closed(&lp(&[(1, 1.0)]), &lp(&[(-1, 1.0)])), c(-1.0, 0.0));
        let a = lp(&[(1, 0.3), (-2, 0.5)]);
        assert_eq!(commutator_trace_closed(&a, &a), ZERO);
        let v = commutator_trace_closed(&lp(&[(2, 0.5)]), &lp(&[(-2, 0.4)]));
        assert!((v - c(-0.4, 0.0)).norm() < 1e-16);
        assert!((v - pairing_integral(&lp(&[(2, 0.5)]), &lp(&[(-2, 0.4)]))).norm() == 0.0);

        assert_eq!(shift_conjugation_trace(&lp(&[(0, 1.0)])), c(-1.0, 0.0));
        assert_eq!(shift_conjugation_trace(&lp(&[(3, 7.0)])), ZERO);
        let b = FourierLoop::from_pairs([(0, c(2.0, 1.0)), (1, c(5.0, 0.0))]);
        assert_eq!(shift_conjugation_trace(&b), c(-2.0, -1.0));
        // window-trace oracle
        let tb = t(&b, 16);
        let conj = ToeplitzOp::shift(16).mul(&tb).mul(&ToeplitzOp::shift_adjoint(16)).sub(&tb);
        assert!((conj.op_trace().unwrap() - c(-2.0, -1.0)).norm() < 1e-15);
    }

    // oracle: Σ over j >= 0 > k (and mirror) of 4 |f_{j-k}|^2, truncated
    fn hs_oracle(f: &FourierLoop) -> f64 {
        let mut s = 0.0;
        for j in 0..64i64 {
            for k in -64..0i64 {
                s += 4.0 * f.coeff(j - k).norm_sqr() + 4.0 * f.coeff(k - j).norm_sqr();
            }
        }
        s.sqrt()
    }

    #[test]
    fn hilbert_schmidt_norms() {
        assert_eq!(schatten2_commutator_F(&lp(&[(0, 5.0)])), 0.0);
        let f = lp(&[(1, 1.0)]);
        assert!((schatten2_commutator_F(&f) - 2.0).abs() < 1e-15);
        assert!((hs_oracle(&f) - 2.0).abs() < 1e-15);
        let g = lp(&[(1, 1.0), (-1, 1.0)]);
        assert!((schatten2_commutator_F(&g) - 8f64.sqrt()).abs() < 1e-15);
        assert!((hs_oracle(&g) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exp_examples() {
        let e = ToeplitzOp::zero(16).exp_op().unwrap();
        assert_eq!(e.symbol(), &FourierLoop::one());
        assert!(linalg::max_abs(&e.correction().view()) < 1e-15);
        let e = t(&FourierLoop::constant(c(0.3, -0.2)), 16).exp_op().unwrap();
        assert!((e.symbol().coeff(0) - c(0.3, -0.2).exp()).norm() < 1e-15);
        assert!(linalg::max_abs(&e.correction().view()) < 1e-14);
    }

    #[test]
    fn exp_matches_dense_section_exponential() {
        let a = lp(&[(1, 0.3), (-2, 0.1)]);
        let e = t(&a, 64).exp_op().unwrap();
        assert!(e.symbol().l1_distance(&a.exp().unwrap()) == 0.0);
        let oracle = linalg::expm(&dense(&a, 256).view()).unwrap();
        for j in 0..64 {
            for k in 0..64 {
                assert!((e.entry(j, k) - oracle[[j, k]]).norm() < 1e-13, "({j},{k})");
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let id = ToeplitzOp::identity(16);
        let i = id.inv().unwrap();
        assert_eq!(i.symbol(), &FourierLoop::one());
        assert!(linalg::max_abs(&i.correction().view()) < 1e-15);
        let i = t(&lp(&[(0, 2.0)]), 16).inv().unwrap();
        assert_eq!(i.symbol(), &lp(&[(0, 0.5)]));
        assert!(linalg::max_abs(&i.correction().view()) < 1e-15);

        let a = lp(&[(1, 0.3), (-1, 0.1)]);
        let x = t(&a, 64).exp_op().unwrap();
        let y = x.inv().unwrap();
        let z = t(&a.neg(), 64).exp_op().unwrap();
        for r in [x.mul(&y), y.mul(&x)] {
            let d = r.sub(&ToeplitzOp::identity(64));
            assert!(d.symbol().l1_norm() < 1e-14);
            assert!(linalg::max_abs(&d.correction().view()) < 1e-10);
        }
        assert!(linalg::max_abs(&(y.correction() - z.correction()).view()) < 1e-12);
    }

    #[test]
    fn inverse_with_winding_is_obstructed() {
        let err = ToeplitzOp::shift(16).inv().unwrap_err();
        assert_eq!(err, Error::IndexObstruction { winding: 1 });
    }

    #[test]
    fn serialization_shape() {
        let v: serde_json::Value = serde_json::to_value(ToeplitzOp::first_projection(2)).unwrap();
        assert_eq!(v["window"], 2);
        assert_eq!(v["correction"].as_array().unwrap().len(), 4);
        assert_eq!(v["correction"][0], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["symbol"]["coeffs"], serde_json::json!([]));
    }

    fn arb_loop(band: usize, radius: f64) -> impl Strategy<Value = FourierLoop> {
        proptest::collection::vec((-radius..radius, -radius..radius), 2 * band + 1).prop_map(move |v| {
            FourierLoop::from_pairs(v.into_iter().enumerate().map(|(i, (re, im))| (i as i64 - band as i64, c(re, im))))
        })
    }

    fn arb_op(band: usize, window: usize) -> impl Strategy<Value = ToeplitzOp> {
        (arb_loop(band, 0.3), proptest::collection::vec((-0.1..0.1f64, -0.1..0.1f64), 36)).prop_map(move |(a, v)| {
            let m = Array2::from_shape_fn((6, 6), |(j, k)| c(v[6 * j + k].0, v[6 * j + k].1));
            let base = ToeplitzOp::toeplitz(&a, window).unwrap();
            base.add(&ToeplitzOp::finite(&m.view(), window))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symbol_map_is_multiplicative(x in arb_op(4, 48), y in arb_op(3, 48)) {
            let (p, q) = (x.mul(&y), x.add(&y));
            prop_assert_eq!(p.symbol(), &x.symbol().mul(y.symbol()));
            prop_assert_eq!(q.symbol(), &x.symbol().add(y.symbol()));
        }

        #[test]
        fn commutator_trace_matches_closed_form(a in arb_loop(8, 1.0), b in arb_loop(8, 1.0)) {
            let w = default_window(8);
            let comm = t(&a, w).commutator(&t(&b, w));
            prop_assert!(comm.symbol().is_zero());
            let tr = comm.op_trace().unwrap();
            prop_assert!((tr - commutator_trace_closed(&a, &b)).norm() < 1e-10);
            // window doubling leaves the trace unchanged up to the tail bound
            let comm2 = t(&a, 2 * w).commutator(&t(&b, 2 * w));
            let d = (comm2.op_trace().unwrap() - tr).norm();
            prop_assert!(d <= comm.tail_bound() + 1e-12);
        }

        #[test]
        fn mul_agrees_with_dense_truncation(x in arb_op(4, 40), y in arb_op(4, 40)) {
            let n = 40;
            let p = x.mul(&y);
            let oracle = x.section(n).dot(&y.section(n));
            for j in 0..n - 8 {
                for k in 0..n - 8 {
                    prop_assert!((p.entry(j, k) - oracle[[j, k]]).norm() < 1e-12);
                }
            }
        }
    }
}
