//! Determinant invariant and multiplicative character of Steinberg symbols
//! `{z^n e^a, z^m e^b}` of loops, computed three ways.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::block::BlockOp;
use crate::error::{Error, Result};
use crate::fourier::{pairing_integral_quadrature, FourierLoop, LoopLog};
use crate::fredholm::mult_commutator_det;
use crate::group::free::{evaluate, format_word, Abelianization};
use crate::group::{bar_boundary, psi_of_boundary, ConnectingSign, GroupChain};
use crate::toeplitz::{commutator_trace_closed, shift_conjugation_trace, Estimate, ToeplitzOp, SYMBOL_TOLERANCE};

/// Default window of the operator computation.
pub const DEFAULT_WINDOW: usize = 256;
/// Default number of trapezoidal nodes of the contour-integral path.
pub const QUADRATURE_POINTS: usize = 2048;
/// Relative change allowed when the window is doubled in strict mode.
pub const DOUBLING_TOLERANCE: f64 = 1e-9;

/// The pair of loops `{u, v}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinbergSymbol {
    pub u: LoopLog,
    pub v: LoopLog,
}

impl SteinbergSymbol {
    pub fn new(u: LoopLog, v: LoopLog) -> Self {
        Self { u, v }
    }

    /// Factors two loops given by coefficients.
    pub fn from_loops(u: &FourierLoop, v: &FourierLoop) -> Result<Self> {
        Ok(Self { u: u.log_split()?, v: v.log_split()? })
    }

    pub fn swapped(&self) -> Self {
        Self { u: self.v.clone(), v: self.u.clone() }
    }

    fn sign(&self) -> f64 {
        if (self.u.winding * self.v.winding).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn max_band(&self) -> usize {
        self.u.log.band().max(self.v.log.band())
    }
}

/// `n·Tr(S T_b S* - T_b) - m·Tr(S T_a S* - T_a) + Tr[T_a, T_b]`, the
/// logarithm of the invariant without the sign `(-1)^{nm}`.
fn exponent_closed(sym: &SteinbergSymbol) -> Complex64 {
    let (n, a) = (sym.u.winding as f64, &sym.u.log);
    let (m, b) = (sym.v.winding as f64, &sym.v.log);
    shift_conjugation_trace(b) * n - shift_conjugation_trace(a) * m + commutator_trace_closed(a, b)
}

/// `(-1)^{nm} exp(m a_0 - n b_0 + Σ k a_{-k} b_k)`.
pub fn det_invariant_closed(sym: &SteinbergSymbol) -> Complex64 {
    exponent_closed(sym).exp() * sym.sign()
}

/// The same invariant from contour integrals evaluated by the trapezoidal
/// rule: `(1/2π)∫(m a - n b) dθ + (1/2πi)∫ a b′ dθ`.
pub fn det_invariant_integral(sym: &SteinbergSymbol) -> Complex64 {
    det_invariant_integral_with(sym, QUADRATURE_POINTS)
}

/// [`det_invariant_integral`] with at least `points` nodes; more are used
/// when the bands need them.
pub fn det_invariant_integral_with(sym: &SteinbergSymbol, points: usize) -> Complex64 {
    let (n, a) = (sym.u.winding, &sym.u.log);
    let (m, b) = (sym.v.winding, &sym.v.log);
    let points = points.max((2 * (a.band() + b.band()) + 2).next_power_of_two());
    let mean = a
        .scale(Complex64::new(m as f64, 0.0))
        .sub(&b.scale(Complex64::new(n as f64, 0.0)))
        .circle_integral_quadrature(points);
    let pairing = pairing_integral_quadrature(a, b, points);
    (mean + pairing).exp() * sym.sign()
}

/// Operator-path value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorValue {
    pub value: Complex64,
    pub error: f64,
    pub window: usize,
    /// Value recomputed at twice the window (strict mode).
    pub doubled: Option<Complex64>,
}

impl OperatorValue {
    pub fn doubling_delta(&self) -> Option<f64> {
        self.doubled.map(|d| (d - self.value).norm())
    }
}

/// `S e^{T_c} S* e^{-T_c} + (1 - SS*) e^{-T_c}` with `c = n b - m a`.
pub fn shift_representative(sym: &SteinbergSymbol, window: usize) -> Result<ToeplitzOp> {
    let (n, a) = (sym.u.winding as f64, &sym.u.log);
    let (m, b) = (sym.v.winding as f64, &sym.v.log);
    let c = b.scale(Complex64::new(n, 0.0)).sub(&a.scale(Complex64::new(m, 0.0)));
    let tc = ToeplitzOp::toeplitz(&c, window)?;
    let e = tc.exp_op()?;
    let ei = tc.neg().exp_op()?;
    let s = ToeplitzOp::shift(window);
    let sa = ToeplitzOp::shift_adjoint(window);
    let p = ToeplitzOp::first_projection(window);
    Ok(s.mul(&e).mul(&sa).mul(&ei).add(&p.mul(&ei)))
}

fn operator_value_at(sym: &SteinbergSymbol, window: usize) -> Result<Estimate> {
    let rep = shift_representative(sym, window)?;
    let tol = SYMBOL_TOLERANCE * rep.norm_bound().powi(2).max(1.0);
    let d1 = rep.det1p_with_tolerance(tol)?;
    let ua = ToeplitzOp::toeplitz(&sym.u.log, window)?.exp_op()?;
    let vb = ToeplitzOp::toeplitz(&sym.v.log, window)?.exp_op()?;
    let d2 = mult_commutator_det(&ua, &vb)?;
    let value = d1.value * d2.value * sym.sign();
    let error = d1.error * d2.value.norm() + d2.error * d1.value.norm();
    Ok(Estimate { value, error })
}

/// The invariant from Fredholm determinants in the Toeplitz algebra:
/// `(-1)^{nm} det(S e^{T_c} S* e^{-T_c} + (1 - SS*) e^{-T_c}) det(e^{T_a} e^{T_b} e^{-T_a} e^{-T_b})`.
pub fn det_invariant_operator(sym: &SteinbergSymbol, window: usize, strict: bool) -> Result<OperatorValue> {
    let est = operator_value_at(sym, window)?;
    let doubled = if strict {
        let d = operator_value_at(sym, 2 * window)?.value;
        let delta = (d - est.value).norm();
        if delta > DOUBLING_TOLERANCE * est.value.norm() {
            return Err(Error::WindowTooSmall(format!("invariant moved by {delta:.3e} under window doubling")));
        }
        Some(d)
    } else {
        None
    };
    Ok(OperatorValue { value: est.value, error: est.error, window, doubled })
}

/// Reduces the imaginary part into `(-π, π]`.
pub fn reduce_mod_2pi_i(z: Complex64) -> Complex64 {
    let mut im = z.im.rem_euclid(2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    }
    Complex64::new(z.re, im)
}

/// `nm·πi + m a_0 - n b_0 + Σ k a_{-k} b_k` modulo `2πi`.
pub fn mult_character(sym: &SteinbergSymbol) -> Complex64 {
    let nm = (sym.u.winding * sym.v.winding) as f64;
    reduce_mod_2pi_i(exponent_closed(sym) + Complex64::new(0.0, nm * PI))
}

/// The 2×2 block operator `[[T_f, H_f], [H_f̃, T_f̃]]` of multiplication by `f`
/// on the full circle space, split into its two half spaces.
pub fn rho(f: &FourierLoop, window: usize) -> Result<BlockOp> {
    let fr = f.reflect();
    BlockOp::from_blocks(
        2,
        vec![
            ToeplitzOp::toeplitz(f, window)?,
            ToeplitzOp::hankel(f, window),
            ToeplitzOp::hankel(&fr, window),
            ToeplitzOp::toeplitz(&fr, window)?,
        ],
    )
}

/// `ρ(z) = [[S, 1 - SS*], [0, S*]]`.
pub fn rho_z(window: usize) -> BlockOp {
    BlockOp::from_blocks(
        2,
        vec![
            ToeplitzOp::shift(window),
            ToeplitzOp::first_projection(window),
            ToeplitzOp::zero(window),
            ToeplitzOp::shift_adjoint(window),
        ],
    )
    .expect("four blocks")
}

/// `ρ(z^{-1}) = [[S*, 0], [1 - SS*, S]]`.
pub fn rho_zinv(window: usize) -> BlockOp {
    BlockOp::from_blocks(
        2,
        vec![
            ToeplitzOp::shift_adjoint(window),
            ToeplitzOp::zero(window),
            ToeplitzOp::first_projection(window),
            ToeplitzOp::shift(window),
        ],
    )
    .expect("four blocks")
}

/// Hilbert–Schmidt norm of `[F, ρ(f)]` with `F = diag(1, -1)`, from the
/// off-diagonal block windows.
pub fn schatten2_commutator_from_blocks(r: &BlockOp) -> f64 {
    let hs = |op: &ToeplitzOp| op.correction().iter().map(|z| z.norm_sqr()).sum::<f64>();
    (4.0 * (hs(r.block(0, 1)) + hs(r.block(1, 0)))).sqrt()
}

/// The 2-cycle `(v, u) - (u, v)` on the labels of two elements commuting
/// modulo trace class, in the free abelian group they generate. The identity
/// gets label zero and equal elements share a label.
pub fn steinberg_to_h2_cycle(u: &BlockOp, v: &BlockOp) -> Result<GroupChain<Vec<i64>>> {
    let uv = u.commutator(v)?;
    let defect = uv.blocks().iter().map(|b| b.symbol().l1_norm()).fold(0.0, f64::max);
    let scale = (block_norm(u) * block_norm(v)).max(1.0);
    if defect > SYMBOL_TOLERANCE * scale {
        return Err(Error::NonCommuting(format!("symbol commutator has l1 mass {defect:.3e}")));
    }
    let id = BlockOp::identity(u.size(), u.window());
    let lu = if *u == id { vec![0, 0] } else { vec![1, 0] };
    let lv = if *v == id {
        vec![0, 0]
    } else if v == u {
        lu.clone()
    } else {
        vec![0, 1]
    };
    let cycle = GroupChain::from_terms(2, [(vec![lv.clone(), lu.clone()], 1), (vec![lu, lv], -1)])?;
    debug_assert!(bar_boundary(&crate::group::free::Lattice { rank: 2 }, &cycle).is_zero());
    Ok(cycle)
}

fn block_norm(b: &BlockOp) -> f64 {
    b.blocks().iter().map(|x| x.norm_bound()).sum()
}

/// Determinant of the kernel element attached to a Steinberg cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurewiczValue {
    /// Kernel factors as words in `x1 = u`, `x2 = v`, with exponents.
    pub factors: Vec<(String, i64)>,
    pub value: Complex64,
    pub error: f64,
}

/// Pushes the cycle of `{u, v}` through the relative boundary and the
/// cokernel isomorphism, evaluates the resulting kernel words on the given
/// lifts and takes Fredholm determinants.
pub fn hurewicz_determinant(u: (&BlockOp, &BlockOp), v: (&BlockOp, &BlockOp)) -> Result<HurewiczValue> {
    let cycle = steinberg_to_h2_cycle(u.0, v.0)?;
    let phi = Abelianization::new(2);
    let product = psi_of_boundary(&phi, &cycle, ConnectingSign::Inclusion)?;
    let images = [(u.0.clone(), u.1.clone()), (v.0.clone(), v.1.clone())];
    let id = BlockOp::identity(u.0.size(), u.0.window());
    let tol = SYMBOL_TOLERANCE * (block_norm(u.0) * block_norm(u.1) * block_norm(v.0) * block_norm(v.1)).max(1.0);
    let (mut value, mut rel) = (Complex64::new(1.0, 0.0), 0.0);
    let mut factors = Vec::with_capacity(product.len());
    for (word, e) in &product {
        let op = evaluate(word, &images, id.clone(), |a, b| a.mul(b))?;
        let d = op.det1p_with_tolerance(tol)?;
        value *= d.value.powi(*e as i32);
        rel += e.unsigned_abs() as f64 * d.error / d.value.norm();
        factors.push((format_word(word), *e));
    }
    Ok(HurewiczValue { factors, value, error: rel * value.norm() })
}

/// Lifts of `z` and `e^c` to 3×3 block operators placed in the block pairs
/// `(1, 2)` and `(1, 3)`, each with its inverse.
pub fn shift_exponential_lifts(c: &FourierLoop, window: usize) -> Result<[BlockOp; 4]> {
    let (s, sa, p) = (ToeplitzOp::shift(window), ToeplitzOp::shift_adjoint(window), ToeplitzOp::first_projection(window));
    let (zero, one) = (ToeplitzOp::zero(window), ToeplitzOp::identity(window));
    let ls = BlockOp::from_blocks(
        3,
        vec![s.clone(), p.clone(), zero.clone(), zero.clone(), sa.clone(), zero.clone(), zero.clone(), zero.clone(), one.clone()],
    )?;
    let ls_inv = BlockOp::from_blocks(3, vec![sa, zero.clone(), zero.clone(), p, s, zero.clone(), zero.clone(), zero, one.clone()])?;
    let tc = ToeplitzOp::toeplitz(c, window)?;
    let (e, ei) = (tc.exp_op()?, tc.neg().exp_op()?);
    let le = BlockOp::diagonal(vec![e.clone(), one.clone(), ei.clone()]);
    let le_inv = BlockOp::diagonal(vec![ei, one, e]);
    Ok([ls, ls_inv, le, le_inv])
}

/// The determinant of the Hurewicz image of `{z, e^c}`, from the group
/// homology pipeline on operator lifts.
pub fn hurewicz_shift_value(c: &FourierLoop, window: usize) -> Result<HurewiczValue> {
    let [ls, ls_inv, le, le_inv] = shift_exponential_lifts(c, window)?;
    hurewicz_determinant((&ls, &ls_inv), (&le, &le_inv))
}
