//! Chain-level cyclic homology: singular simplices in invertibles, their
//! normalized boundary, the logarithm into cyclic chains, the Connes `b`
//! operator, the odd cyclic cocycles of the Fredholm module and the
//! relative logarithm of pairs of paths.

use std::sync::Arc;

use num_complex::Complex64;

use crate::block::BlockOp;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Lu, ZERO};
use crate::quadrature::{self, Integrand, ADAPTIVE_TOLERANCE, DEFAULT_ORDER, DEFAULT_TRIANGLE_ORDER};
use crate::toeplitz::ToeplitzOp;

/// Largest symbol distance at which two path values count as equal modulo
/// trace class.
pub const SYMBOL_MATCH_TOLERANCE: f64 = 1e-10;
/// Agreement required between the two evaluations of the relative logarithm.
pub const FORM_AGREEMENT: f64 = 1e-9;
const BASE_POINT_TOLERANCE: f64 = 1e-12;

/// Coefficient rings for chains and paths.
pub trait Algebra: Clone + Send + Sync + 'static {
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, c: Complex64) -> Self;
    fn product(&self, other: &Self) -> Result<Self>;
    fn inverse(&self) -> Result<Self>;
    /// Trace of a trace-class element.
    fn trace(&self) -> Result<Complex64>;
    /// ℓ¹ distance between symbols; zero on finite matrices.
    fn symbol_distance(&self, other: &Self) -> f64;
}

impl Algebra for CMatrix {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, c: Complex64) -> Self {
        self * c
    }
    fn product(&self, other: &Self) -> Result<Self> {
        Ok(self.dot(other))
    }
    fn inverse(&self) -> Result<Self> {
        linalg::inverse(&self.view())
    }
    fn trace(&self) -> Result<Complex64> {
        Ok(linalg::trace(&self.view()))
    }
    fn symbol_distance(&self, _: &Self) -> f64 {
        0.0
    }
}

impl Algebra for ToeplitzOp {
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn product(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(other))
    }
    fn inverse(&self) -> Result<Self> {
        self.inv()
    }
    fn trace(&self) -> Result<Complex64> {
        self.op_trace()
    }
    fn symbol_distance(&self, other: &Self) -> f64 {
        self.symbol().l1_distance(other.symbol())
    }
}

impl Algebra for BlockOp {
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("block sizes agree")
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other).expect("block sizes agree")
    }
    fn times(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn product(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn inverse(&self) -> Result<Self> {
        Err(Error::InvalidInput("block operators are not inverted".into()))
    }
    fn trace(&self) -> Result<Complex64> {
        (0..self.size()).map(|i| self.block(i, i).op_trace()).sum()
    }
    fn symbol_distance(&self, other: &Self) -> f64 {
        self.blocks().iter().zip(other.blocks()).map(|(a, b)| a.symbol().l1_distance(b.symbol())).fold(0.0, f64::max)
    }
}

type Eval<A> = Arc<dyn Fn(&[f64]) -> Result<A> + Send + Sync>;

/// A `C^2` map from the standard simplex `{t_i >= 0, Σ t_i <= 1}` of
/// dimension 0, 1 or 2 into the invertibles, with its partial derivatives.
#[derive(Clone)]
pub struct SimplexPath<A> {
    dim: usize,
    value: Eval<A>,
    partials: Vec<Eval<A>>,
    /// Gauss–Legendre order per axis used when integrating over the simplex.
    pub order: usize,
}

impl<A: Algebra> SimplexPath<A> {
    /// `partials[i]` is `∂σ/∂t_{i+1}`.
    pub fn new<V>(dim: usize, value: V, partials: Vec<Eval<A>>) -> Result<Self>
    where
        V: Fn(&[f64]) -> Result<A> + Send + Sync + 'static,
    {
        if dim > 2 {
            return Err(Error::InvalidInput(format!("simplices of dimension {dim} are not supported")));
        }
        if partials.len() != dim {
            return Err(Error::InvalidInput(format!("{} partial derivatives for a {dim}-simplex", partials.len())));
        }
        let order = if dim == 2 { DEFAULT_TRIANGLE_ORDER } else { DEFAULT_ORDER };
        Ok(Self { dim, value: Arc::new(value), partials, order })
    }

    /// One-parameter path from its value and derivative.
    pub fn interval<V, D>(value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> Result<A> + Send + Sync + 'static,
        D: Fn(f64) -> Result<A> + Send + Sync + 'static,
    {
        let d: Eval<A> = Arc::new(move |t: &[f64]| derivative(t[0]));
        Self::new(1, move |t: &[f64]| value(t[0]), vec![d]).expect("one partial")
    }

    /// Two-parameter simplex from its value and both partial derivatives.
    pub fn triangle<V, D1, D2>(value: V, d1: D1, d2: D2) -> Self
    where
        V: Fn(f64, f64) -> Result<A> + Send + Sync + 'static,
        D1: Fn(f64, f64) -> Result<A> + Send + Sync + 'static,
        D2: Fn(f64, f64) -> Result<A> + Send + Sync + 'static,
    {
        let p1: Eval<A> = Arc::new(move |t: &[f64]| d1(t[0], t[1]));
        let p2: Eval<A> = Arc::new(move |t: &[f64]| d2(t[0], t[1]));
        Self::new(2, move |t: &[f64]| value(t[0], t[1]), vec![p1, p2]).expect("two partials")
    }

    pub fn point(a: A) -> Self {
        Self { dim: 0, value: Arc::new(move |_: &[f64]| Ok(a.clone())), partials: Vec::new(), order: DEFAULT_ORDER }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, t: &[f64]) -> Result<A> {
        (self.value)(t)
    }

    /// `∂σ/∂t_{i+1}` at `t`.
    pub fn partial(&self, i: usize, t: &[f64]) -> Result<A> {
        (self.partials[i])(t)
    }

    /// Value at the vertex `k`: the origin for `k = 0`, the unit vector
    /// `e_k` otherwise.
    pub fn vertex(&self, k: usize) -> Result<A> {
        let mut t = vec![0.0; self.dim];
        if k > 0 {
            t[k - 1] = 1.0;
        }
        self.value(&t)
    }

    /// Face `i`: coordinate `i` set to zero for `i >= 1`, and the face
    /// opposite the origin, `(1 - Σ t_j, t_1, ...)`, for `i = 0`.
    pub fn face(&self, i: usize) -> Result<Self> {
        if self.dim == 0 || i > self.dim {
            return Err(Error::InvalidInput(format!("no face {i} of a {}-simplex", self.dim)));
        }
        let lift: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = if i == 0 {
            Arc::new(|t: &[f64]| {
                let mut out = Vec::with_capacity(t.len() + 1);
                out.push(1.0 - t.iter().sum::<f64>());
                out.extend_from_slice(t);
                out
            })
        } else {
            Arc::new(move |t: &[f64]| {
                let mut out = t.to_vec();
                out.insert(i - 1, 0.0);
                out
            })
        };
        let inner = self.value.clone();
        let l = lift.clone();
        let value: Eval<A> = Arc::new(move |t: &[f64]| inner(&l(t)));
        let mut partials: Vec<Eval<A>> = Vec::with_capacity(self.dim - 1);
        for j in 0..self.dim - 1 {
            let l = lift.clone();
            let p: Eval<A> = if i == 0 {
                let (first, other) = (self.partials[0].clone(), self.partials[j + 1].clone());
                Arc::new(move |t: &[f64]| {
                    let s = l(t);
                    Ok(other(&s)?.minus(&first(&s)?))
                })
            } else {
                let src = self.partials[if j < i - 1 { j } else { j + 1 }].clone();
                Arc::new(move |t: &[f64]| src(&l(t)))
            };
            partials.push(p);
        }
        Ok(Self { dim: self.dim - 1, value, partials, order: self.order })
    }

    /// `t ↦ σ(t) g`.
    pub fn right_translate(&self, g: A) -> Self {
        let inner = self.value.clone();
        let gv = g.clone();
        let value: Eval<A> = Arc::new(move |t: &[f64]| inner(t)?.product(&gv));
        let partials = self
            .partials
            .iter()
            .map(|p| {
                let (p, g) = (p.clone(), g.clone());
                Arc::new(move |t: &[f64]| p(t)?.product(&g)) as Eval<A>
            })
            .collect();
        Self { dim: self.dim, value, partials, order: self.order }
    }
}

/// `d^N σ = Σ_{i>=1} (-1)^i d_i σ + d_0(σ) σ(e_1)^{-1}` as a formal
/// combination of faces.
pub fn normalized_boundary<A: Algebra>(sigma: &SimplexPath<A>) -> Result<Vec<(i64, SimplexPath<A>)>> {
    let n = sigma.dim();
    let mut out = Vec::with_capacity(n + 1);
    for i in 1..=n {
        out.push((if i % 2 == 0 { 1 } else { -1 }, sigma.face(i)?));
    }
    let g = sigma.vertex(1)?.inverse()?;
    out.push((1, sigma.face(0)?.right_translate(g)));
    Ok(out)
}

/// Formal combination of simplices.
pub type FaceChain<A> = Vec<(i64, SimplexPath<A>)>;

/// `d^N` extended linearly to formal combinations.
pub fn normalized_boundary_chain<A: Algebra>(chain: &FaceChain<A>) -> Result<FaceChain<A>> {
    let mut out = Vec::new();
    for (c, s) in chain {
        out.extend(normalized_boundary(s)?.into_iter().map(|(d, f)| (c * d, f)));
    }
    Ok(out)
}

/// Finite linear combination of elementary tensors `a_0 ⊗ ... ⊗ a_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicChain<A> {
    degree: usize,
    terms: Vec<(Complex64, Vec<A>)>,
}

impl<A: Algebra> CyclicChain<A> {
    pub fn zero(degree: usize) -> Self {
        Self { degree, terms: Vec::new() }
    }

    pub fn elementary(c: Complex64, factors: Vec<A>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("elementary tensor needs at least one factor".into()));
        }
        Ok(Self { degree: factors.len() - 1, terms: vec![(c, factors)] })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Complex64, Vec<A>)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, c: Complex64, factors: Vec<A>) -> Result<()> {
        if factors.len() != self.degree + 1 {
            return Err(Error::InvalidInput(format!("tensor of length {} in a degree {} chain", factors.len(), self.degree)));
        }
        self.terms.push((c, factors));
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!("degrees {} and {} differ", self.degree, other.degree)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { degree: self.degree, terms })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { degree: self.degree, terms: self.terms.iter().map(|(d, f)| (d * c, f.clone())).collect() }
    }

    /// `b(a_0 ⊗ ... ⊗ a_q) = Σ_{i<q} (-1)^i ... ⊗ a_i a_{i+1} ⊗ ... + (-1)^q a_q a_0 ⊗ ... ⊗ a_{q-1}`.
    pub fn b(&self) -> Result<Self> {
        let q = self.degree;
        if q == 0 {
            return Err(Error::InvalidInput("b is not defined on degree 0 chains".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * (q + 1));
        for (c, a) in &self.terms {
            for i in 0..q {
                let mut f = Vec::with_capacity(q);
                f.extend_from_slice(&a[..i]);
                f.push(a[i].product(&a[i + 1])?);
                f.extend_from_slice(&a[i + 2..]);
                terms.push((if i % 2 == 0 { *c } else { -c }, f));
            }
            let mut f = Vec::with_capacity(q);
            f.push(a[q].product(&a[0])?);
            f.extend_from_slice(&a[1..q]);
            terms.push((if q % 2 == 0 { *c } else { -c }, f));
        }
        Ok(Self { degree: q - 1, terms })
    }

    /// The cyclic operator `t(a_0 ⊗ ... ⊗ a_q) = (-1)^q a_q ⊗ a_0 ⊗ ... ⊗ a_{q-1}`.
    pub fn cyclic_t(&self) -> Self {
        let q = self.degree;
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        let terms = self
            .terms
            .iter()
            .map(|(c, a)| {
                let mut f = Vec::with_capacity(q + 1);
                f.push(a[q].clone());
                f.extend_from_slice(&a[..q]);
                (c * sign, f)
            })
            .collect();
        Self { degree: q, terms }
    }

    /// Average over the powers of `t`, a projection onto the cyclic quotient.
    pub fn project(&self) -> Self {
        let q = self.degree;
        let mut out = Self::zero(q);
        let mut cur = self.clone();
        for _ in 0..=q {
            out.terms.extend(cur.terms.iter().cloned());
            cur = cur.cyclic_t();
        }
        out.scale(Complex64::new(1.0 / (q + 1) as f64, 0.0))
    }
}

impl CyclicChain<CMatrix> {
    /// Sum of a degree 0 chain.
    pub fn collapse(&self) -> Result<CMatrix> {
        if self.degree != 0 {
            return Err(Error::InvalidInput(format!("cannot collapse a degree {} chain", self.degree)));
        }
        let m = self.terms.first().map(|(_, a)| a[0].nrows()).unwrap_or(0);
        let mut out = CMatrix::zeros((m, m));
        for (c, a) in &self.terms {
            out.scaled_add(*c, &a[0]);
        }
        Ok(out)
    }

    /// The chain as a dense element of `M_m^{⊗(q+1)}`, indexed by
    /// `(i_0, j_0, i_1, j_1, ...)`.
    pub fn to_tensor(&self, m: usize) -> Vec<Complex64> {
        let q = self.degree;
        let block = m * m;
        let mut out = vec![ZERO; block.pow(q as u32 + 1)];
        let mut scratch = vec![ZERO; out.len()];
        for (c, a) in &self.terms {
            scratch[0] = *c;
            let mut len = 1;
            for f in a {
                for k in (0..len).rev() {
                    let base = scratch[k];
                    for (e, z) in f.iter().enumerate() {
                        scratch[k * block + e] = base * z;
                    }
                }
                len *= block;
            }
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += s;
            }
        }
        out
    }

    /// Largest entry of the difference of the cyclic projections.
    pub fn cyclic_distance(&self, other: &Self, m: usize) -> Result<f64> {
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!("degrees {} and {} differ", self.degree, other.degree)));
        }
        let a = self.project().to_tensor(m);
        let b = other.project().to_tensor(m);
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

/// `-1/n!`, the normalization of the logarithm on `n`-simplices.
pub fn gamma_prefactor(n: usize) -> f64 {
    -1.0 / (1..=n).product::<usize>() as f64
}

fn check_base_point(sigma: &SimplexPath<CMatrix>) -> Result<()> {
    let v = sigma.vertex(0)?;
    let dev = linalg::max_abs(&(&v - &linalg::identity(v.nrows())).view());
    if dev > BASE_POINT_TOLERANCE {
        return Err(Error::InvalidInput(format!("simplex is not based at the identity (deviation {dev:.3e})")));
    }
    Ok(())
}

fn log_partials(sigma: &SimplexPath<CMatrix>, t: &[f64]) -> Result<Vec<CMatrix>> {
    let v = sigma.value(t)?;
    let lu = Lu::new(&v.view()).map_err(|_| Error::PathLeavesInvertibles { t: t[0] })?;
    let inv = lu.inverse();
    (0..sigma.dim()).map(|i| Ok(sigma.partial(i, t)?.dot(&inv))).collect()
}

fn kron(a: &CMatrix, b: &CMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a.iter() {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

/// The logarithm of a based simplex of dimension 1 or 2: the cyclic chain
/// `-(1/n!) Σ_s sgn(s) ∫ ∂_{s(1)}σ σ^{-1} ⊗ ... ⊗ ∂_{s(n)}σ σ^{-1}`.
///
/// In dimension 2 the chain carries one pair of tensors per quadrature node.
pub fn gamma_log(sigma: &SimplexPath<CMatrix>) -> Result<CyclicChain<CMatrix>> {
    check_base_point(sigma)?;
    let c = Complex64::new(gamma_prefactor(sigma.dim()), 0.0);
    match sigma.dim() {
        1 => {
            let q = quadrature::integrate_adaptive(sigma.order, ADAPTIVE_TOLERANCE, |t| {
                Ok(log_partials(sigma, &[t])?.remove(0))
            })?;
            CyclicChain::elementary(c, vec![q.value])
        }
        2 => {
            let q = quadrature::integrate_triangle_adaptive(sigma.order, ADAPTIVE_TOLERANCE, |t| {
                let a = log_partials(sigma, &t)?;
                let mut x = kron(&a[0], &a[1]);
                x.accumulate(-1.0, &kron(&a[1], &a[0]));
                Ok(x)
            })?;
            let mut chain = CyclicChain::zero(1);
            for (t, w) in quadrature::triangle_rule(q.order) {
                let a = log_partials(sigma, &t)?;
                chain.push(c * w, vec![a[0].clone(), a[1].clone()])?;
                chain.push(-c * w, vec![a[1].clone(), a[0].clone()])?;
            }
            Ok(chain)
        }
        d => Err(Error::InvalidInput(format!("the logarithm is defined on 1- and 2-simplices, not {d}"))),
    }
}

/// [`gamma_log`] extended linearly to formal combinations of simplices.
pub fn gamma_log_chain(chain: &FaceChain<CMatrix>) -> Result<CyclicChain<CMatrix>> {
    let mut out: Option<CyclicChain<CMatrix>> = None;
    for (c, s) in chain {
        let g = gamma_log(s)?.scale(Complex64::new(*c as f64, 0.0));
        out = Some(match out {
            None => g,
            Some(acc) => acc.add(&g)?,
        });
    }
    out.ok_or_else(|| Error::InvalidInput("empty chain".into()))
}

fn off_diagonal(x: &BlockOp) -> Result<BlockOp> {
    let w = x.window();
    BlockOp::from_blocks(2, vec![ToeplitzOp::zero(w), x.block(0, 1).clone(), x.block(1, 0).clone(), ToeplitzOp::zero(w)])
}

/// `τ_{2p-1}(x^0 ⊗ ... ⊗ x^{2p-1}) = (-1)^{p-1} ((2p-1)!/(p-1)!) Tr(F x^0_off ... x^{2p-1}_off)`
/// with `F = diag(1, -1)` and `x_off` the off-diagonal part of `x`.
pub fn tau_cocycle(p: usize, chain: &CyclicChain<BlockOp>) -> Result<Complex64> {
    if p == 0 || chain.degree() != 2 * p - 1 {
        return Err(Error::CocycleDegree { p, degree: chain.degree() });
    }
    let falling: usize = (p..2 * p).product();
    let norm = if p % 2 == 1 { 1.0 } else { -1.0 } * falling as f64;
    let mut total = ZERO;
    for (c, xs) in chain.terms() {
        if xs.iter().any(|x| x.size() != 2) {
            return Err(Error::InvalidInput("the cocycle needs 2x2 block operators".into()));
        }
        let mut prod = off_diagonal(&xs[0])?;
        for x in &xs[1..] {
            prod = prod.mul(&off_diagonal(x)?)?;
        }
        total += c * (prod.block(0, 0).op_trace()? - prod.block(1, 1).op_trace()?);
    }
    Ok(total * norm)
}

/// Both sides of the identity `τ_1 = T ∘ ∂` on a cyclic 1-cycle `w` of
/// 2×2 block operators with trace-class off-diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTraceCheck {
    pub tau: Complex64,
    /// Trace of the operator part of `-b` applied to the lifted chain.
    pub boundary_trace: Complex64,
    /// Size of `b(w)`, which vanishes on cycles.
    pub cycle_defect: f64,
}

/// Lifts each `x` to the pair `(x_11, x)` and traces the first component of
/// `-b` of the lifted chain, `-Σ c [x_11, y_11]`.
pub fn boundary_trace_check(w: &CyclicChain<BlockOp>) -> Result<BoundaryTraceCheck> {
    if w.degree() != 1 {
        return Err(Error::CocycleDegree { p: 1, degree: w.degree() });
    }
    let tau = tau_cocycle(1, w)?;
    let bw = w.b()?;
    let mut defect: f64 = 0.0;
    let mut lifted: Option<ToeplitzOp> = None;
    for (c, xs) in w.terms() {
        let (x, y) = (xs[0].block(0, 0), xs[1].block(0, 0));
        let comm = x.commutator(y).scale(-c);
        lifted = Some(match lifted {
            None => comm,
            Some(acc) => acc.add(&comm),
        });
    }
    if let Some((_, first)) = bw.terms().first() {
        let mut sum = first[0].scale(bw.terms()[0].0);
        for (c, f) in &bw.terms()[1..] {
            sum = sum.add(&f[0].scale(*c))?;
        }
        for blk in sum.blocks() {
            defect = defect.max(blk.symbol().l1_norm()).max(linalg::max_abs(&blk.correction().view()));
        }
    }
    let boundary_trace = match lifted {
        Some(s) => s.op_trace()?,
        None => ZERO,
    };
    Ok(BoundaryTraceCheck { tau, boundary_trace, cycle_defect: defect })
}

/// The relative logarithm of two one-parameter paths that agree modulo
/// trace class, computed both as `-Tr ∫ (σ_1 σ_2^{-1})' σ_2 σ_1^{-1}` and
/// as `Tr(∫ σ_2' σ_2^{-1} - ∫ σ_1' σ_1^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeGamma {
    pub value: Complex64,
    pub quotient_form: Complex64,
    pub difference_form: Complex64,
    pub delta: f64,
}

fn check_symbols<A: Algebra>(s1: &SimplexPath<A>, s2: &SimplexPath<A>) -> Result<()> {
    for t in [0.0, 0.5, 1.0] {
        let d = s1.value(&[t])?.symbol_distance(&s2.value(&[t])?);
        if d > SYMBOL_MATCH_TOLERANCE {
            return Err(Error::SymbolMismatch(format!("symbols differ by {d:.3e} at t = {t}")));
        }
    }
    Ok(())
}

pub fn tilde_gamma<A: Algebra>(s1: &SimplexPath<A>, s2: &SimplexPath<A>) -> Result<TildeGamma> {
    if s1.dim() != 1 || s2.dim() != 1 {
        return Err(Error::InvalidInput("the relative logarithm takes two 1-simplices".into()));
    }
    check_symbols(s1, s2)?;
    let singular = |t: f64| move |e: Error| match e {
        Error::NumericallySingular(_) | Error::IndexObstruction { .. } => Error::PathLeavesInvertibles { t },
        other => other,
    };
    let q = quadrature::integrate_adaptive(s1.order.max(s2.order), ADAPTIVE_TOLERANCE, |t| {
        let (v1, v2) = (s1.value(&[t])?, s2.value(&[t])?);
        let (d1, d2) = (s1.partial(0, &[t])?, s2.partial(0, &[t])?);
        let i1 = v1.inverse().map_err(singular(t))?;
        let i2 = v2.inverse().map_err(singular(t))?;
        // (σ_1 σ_2^{-1})' = σ_1' σ_2^{-1} - σ_1 σ_2^{-1} σ_2' σ_2^{-1}
        let v1i2 = v1.product(&i2)?;
        let deriv = d1.product(&i2)?.minus(&v1i2.product(&d2)?.product(&i2)?);
        let quotient = -deriv.product(&v2)?.product(&i1)?.trace()?;
        let difference = d2.product(&i2)?.minus(&d1.product(&i1)?).trace()?;
        Ok(vec![quotient, difference])
    })?;
    let (a, b) = (q.value[0], q.value[1]);
    let delta = (a - b).norm();
    if delta > FORM_AGREEMENT * a.norm().max(1.0) {
        return Err(Error::InvariantViolation(format!("relative logarithm forms differ by {delta:.3e}")));
    }
    Ok(TildeGamma { value: a, quotient_form: a, difference_form: b, delta })
}
