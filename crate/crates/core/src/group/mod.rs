//! Integer group homology: the inhomogeneous bar complex, the relative cone
//! complex of a surjection, the fiber-product cokernel complex and the maps
//! comparing the central-extension class of a 2-cycle with its relative
//! boundary.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::error::{Error, Result};

pub mod catalog;
pub mod finite;
pub mod free;
pub mod homology;
pub mod snf;

pub use finite::{FiniteGroup, FiniteHom, KernelQuotient};

/// A group with hashable, totally ordered elements.
pub trait Group {
    type Elem: Clone + Ord + Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn product<'a, I>(&self, it: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        it.into_iter().fold(self.identity(), |acc, g| self.mul(&acc, g))
    }

    /// `a^k` for any integer `k`.
    fn pow(&self, a: &Self::Elem, k: i64) -> Self::Elem {
        let base = if k < 0 { self.inv(a) } else { a.clone() };
        (0..k.unsigned_abs()).fold(self.identity(), |acc, _| self.mul(&acc, &base))
    }
}

/// A surjective homomorphism together with a set-theoretic section.
pub trait Surjection {
    type Source: Group;
    type Target: Group;

    fn source(&self) -> &Self::Source;
    fn target(&self) -> &Self::Target;
    fn apply(&self, g: &<Self::Source as Group>::Elem) -> <Self::Target as Group>::Elem;
    fn section(&self, h: &<Self::Target as Group>::Elem) -> <Self::Source as Group>::Elem;
}

type SourceElem<S> = <<S as Surjection>::Source as Group>::Elem;
type TargetElem<S> = <<S as Surjection>::Target as Group>::Elem;

/// Integer combination of `n`-tuples of group elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupChain<E: Ord> {
    degree: usize,
    terms: BTreeMap<Vec<E>, i64>,
}

impl<E: Clone + Ord + Debug> GroupChain<E> {
    pub fn zero(degree: usize) -> Self {
        Self { degree, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<E>, i64)>,
    {
        let mut out = Self::zero(degree);
        for (t, c) in terms {
            out.add_term(t, c)?;
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<E>, i64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, tuple: &[E]) -> i64 {
        self.terms.get(tuple).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, tuple: Vec<E>, c: i64) -> Result<()> {
        if tuple.len() != self.degree {
            return Err(Error::InvalidInput(format!("tuple {tuple:?} in a degree {} chain", self.degree)));
        }
        if c == 0 {
            return Ok(());
        }
        match self.terms.entry(tuple) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero(self.degree);
        }
        Self { degree: self.degree, terms: self.terms.iter().map(|(t, c)| (t.clone(), c * k)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    /// Sum of the coefficients.
    pub fn augmentation(&self) -> i64 {
        self.terms.values().sum()
    }
}

/// Bar boundary `Σ (-1)^i d_i`; the boundary of a 1-chain is zero.
pub fn bar_boundary<G: Group>(g: &G, chain: &GroupChain<G::Elem>) -> GroupChain<G::Elem> {
    let n = chain.degree();
    let mut out = GroupChain::zero(n.saturating_sub(1));
    if n <= 1 {
        return out;
    }
    for (t, c) in chain.terms() {
        for i in 0..=n {
            let face: Vec<G::Elem> = if i == 0 {
                t[1..].to_vec()
            } else if i == n {
                t[..n - 1].to_vec()
            } else {
                let mut f = t[..i - 1].to_vec();
                f.push(g.mul(&t[i - 1], &t[i]));
                f.extend_from_slice(&t[i + 1..]);
                f
            };
            let sign = if i % 2 == 0 { *c } else { -c };
            out.add_term(face, sign).expect("face has degree n - 1");
        }
    }
    out
}

/// `φ_*` applied entrywise.
pub fn push_forward<S: Surjection>(phi: &S, chain: &GroupChain<SourceElem<S>>) -> GroupChain<TargetElem<S>> {
    let mut out = GroupChain::zero(chain.degree());
    for (t, c) in chain.terms() {
        out.add_term(t.iter().map(|g| phi.apply(g)).collect(), *c).expect("same degree");
    }
    out
}

/// The section applied entrywise.
pub fn lift<S: Surjection>(phi: &S, chain: &GroupChain<TargetElem<S>>) -> GroupChain<SourceElem<S>> {
    let mut out = GroupChain::zero(chain.degree());
    for (t, c) in chain.terms() {
        out.add_term(t.iter().map(|h| phi.section(h)).collect(), *c).expect("same degree");
    }
    out
}

/// Degree `n` chain `(y, x)` of the shifted cone: `y` of degree `n + 1` over
/// the target and `x` of degree `n` over the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeChain<G: Ord, H: Ord> {
    pub y: GroupChain<H>,
    pub x: GroupChain<G>,
}

/// `d(y, x) = (dy + φ_* x, -dx)`.
pub fn cone_boundary<S: Surjection>(
    phi: &S,
    c: &ConeChain<SourceElem<S>, TargetElem<S>>,
) -> Result<ConeChain<SourceElem<S>, TargetElem<S>>> {
    let y = bar_boundary(phi.target(), &c.y).add(&push_forward(phi, &c.x))?;
    Ok(ConeChain { y, x: bar_boundary(phi.source(), &c.x).neg() })
}

/// Chain of the cokernel complex in normal form: the coefficient of the
/// tuple `g` stands for the pair `(g, tφ(g))`, where `t` is the section.
/// Tuples fixed by `tφ` represent zero and never appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokerChain<G: Ord> {
    pub chain: GroupChain<G>,
}

fn basepoint<S: Surjection>(phi: &S, g: &[SourceElem<S>]) -> Vec<SourceElem<S>> {
    g.iter().map(|x| phi.section(&phi.apply(x))).collect()
}

impl<G: Clone + Ord + Debug> CokerChain<G> {
    pub fn zero(degree: usize) -> Self {
        Self { chain: GroupChain::zero(degree) }
    }

    pub fn degree(&self) -> usize {
        self.chain.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.chain.is_zero()
    }
}

/// Normal form of `c · (g1, g2)`, which must lie in the fiber product.
pub fn coker_pair<S: Surjection>(
    phi: &S,
    g1: &[SourceElem<S>],
    g2: &[SourceElem<S>],
    c: i64,
) -> Result<CokerChain<SourceElem<S>>> {
    let (h1, h2): (Vec<_>, Vec<_>) = (g1.iter().map(|g| phi.apply(g)).collect(), g2.iter().map(|g| phi.apply(g)).collect());
    if h1 != h2 {
        return Err(Error::InvalidInput(format!("{g1:?} and {g2:?} lie over different tuples")));
    }
    let mut out = CokerChain::zero(g1.len());
    add_normalized(phi, &mut out, g1.to_vec(), c)?;
    add_normalized(phi, &mut out, g2.to_vec(), -c)?;
    Ok(out)
}

fn add_normalized<S: Surjection>(phi: &S, out: &mut CokerChain<SourceElem<S>>, g: Vec<SourceElem<S>>, c: i64) -> Result<()> {
    if basepoint(phi, &g) != g {
        out.chain.add_term(g, c)?;
    }
    Ok(())
}

/// `(g1, g2) ↦ Σ (-1)^i (d_i g1, d_i g2)` on normal forms.
pub fn coker_boundary<S: Surjection>(phi: &S, c: &CokerChain<SourceElem<S>>) -> Result<CokerChain<SourceElem<S>>> {
    let n = c.degree();
    let mut out = CokerChain::zero(n.saturating_sub(1));
    if n <= 1 {
        return Ok(out);
    }
    let g = phi.source();
    for (t, k) in c.chain.terms() {
        let base = basepoint(phi, t);
        let db = bar_boundary(g, &GroupChain::from_terms(n, [(base, -k)])?);
        let dt = bar_boundary(g, &GroupChain::from_terms(n, [(t.clone(), *k)])?);
        // both faces lie over the same tuple, so each term splits into two normal forms
        for (f, c) in dt.terms().iter().chain(db.terms()) {
            add_normalized(phi, &mut out, f.clone(), *c)?;
        }
    }
    Ok(out)
}

/// `i∘ε(g1, g2) = (0, g1 - g2)`; on a normal form `(0, Σ c (g - tφ(g)))`.
pub fn i_epsilon<S: Surjection>(
    phi: &S,
    c: &CokerChain<SourceElem<S>>,
) -> Result<ConeChain<SourceElem<S>, TargetElem<S>>> {
    let n = c.degree();
    let mut x = GroupChain::zero(n);
    for (t, k) in c.chain.terms() {
        x.add_term(t.clone(), *k)?;
        x.add_term(basepoint(phi, t), -k)?;
    }
    Ok(ConeChain { y: GroupChain::zero(n + 1), x })
}

/// Inverse of `i∘ε` on degree 1 chains of the form `(0, x)` with `φ_* x = 0`.
pub fn coker_representative<S: Surjection>(
    phi: &S,
    c: &ConeChain<SourceElem<S>, TargetElem<S>>,
) -> Result<CokerChain<SourceElem<S>>> {
    if c.x.degree() != 1 {
        return Err(Error::InvalidInput(format!("expected a degree 1 cone chain, got degree {}", c.x.degree())));
    }
    if !c.y.is_zero() {
        return Err(Error::NotInImage("target component is nonzero".into()));
    }
    let fibers = push_forward(phi, &c.x);
    if !fibers.is_zero() {
        return Err(Error::NotInImage(format!("{} fibers have nonzero coefficient sum", fibers.terms().len())));
    }
    let mut out = CokerChain::zero(1);
    for (t, k) in c.x.terms() {
        add_normalized(phi, &mut out, t.clone(), *k)?;
    }
    Ok(out)
}

/// A formal product `Π g_i^{e_i}` of kernel elements, meaningful in the
/// abelian group `K/Γ`.
pub type KernelProduct<E> = Vec<(E, i64)>;

/// `ψ(Σ z (g1, g2)) = Π (g1 g2^{-1})^z`, for degree 1 normal forms.
pub fn psi<S: Surjection>(phi: &S, c: &CokerChain<SourceElem<S>>) -> Result<KernelProduct<SourceElem<S>>> {
    if c.degree() != 1 {
        return Err(Error::InvalidInput(format!("psi is defined on degree 1, got {}", c.degree())));
    }
    let g = phi.source();
    Ok(c.chain
        .terms()
        .iter()
        .map(|(t, k)| {
            let b = phi.section(&phi.apply(&t[0]));
            (g.mul(&t[0], &g.inv(&b)), *k)
        })
        .collect())
}

/// Orientation of the lift used for the connecting map `H_2(H) → H_1(G, H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectingSign {
    /// `(0, d t(x))`, homologous to the inclusion `(x, 0)`.
    Inclusion,
    /// `(0, -d t(x))`, the form paired with the section formula.
    Section,
}

/// The relative cycle `(0, ∓d t(x))` representing the boundary of the
/// 2-cycle `x`.
pub fn boundary_to_relative<S: Surjection>(
    phi: &S,
    x: &GroupChain<TargetElem<S>>,
    sign: ConnectingSign,
) -> Result<ConeChain<SourceElem<S>, TargetElem<S>>> {
    check_two_cycle(phi.target(), x)?;
    let dtx = bar_boundary(phi.source(), &lift(phi, x));
    let x1 = match sign {
        ConnectingSign::Inclusion => dtx,
        ConnectingSign::Section => dtx.neg(),
    };
    Ok(ConeChain { y: GroupChain::zero(2), x: x1 })
}

fn check_two_cycle<H: Group>(h: &H, x: &GroupChain<H::Elem>) -> Result<()> {
    if x.degree() != 2 {
        return Err(Error::InvalidInput(format!("expected a 2-chain, got degree {}", x.degree())));
    }
    let d = bar_boundary(h, x);
    if !d.is_zero() {
        return Err(Error::NotACycle { terms: d.terms().len() });
    }
    Ok(())
}

/// Writes the 2-cycle as `Σ_{i=1}^{2n} (-1)^i (x_i, y_i)` by expanding
/// coefficients into repeated terms. A cycle has coefficient sum zero, so
/// the even and odd slots fill up evenly.
pub fn alternating_form<E: Clone + Ord + Debug>(x: &GroupChain<E>) -> (Vec<Vec<E>>, Vec<Vec<E>>) {
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for (t, c) in x.terms() {
        let slot = if *c > 0 { &mut even } else { &mut odd };
        for _ in 0..c.unsigned_abs() {
            slot.push(t.clone());
        }
    }
    (even, odd)
}

/// The class of the central extension on a 2-cycle through the section:
/// `(Π_even t(x)t(y)t(xy)^{-1}) (Π_odd t(x)t(y)t(xy)^{-1})^{-1}`.
pub fn f_phi_section<S: Surjection>(phi: &S, x: &GroupChain<TargetElem<S>>) -> Result<KernelProduct<SourceElem<S>>> {
    check_two_cycle(phi.target(), x)?;
    let (g, h) = (phi.source(), phi.target());
    let (even, odd) = alternating_form(x);
    debug_assert_eq!(even.len(), odd.len());
    let defect = |p: &Vec<TargetElem<S>>| {
        let (a, b) = (phi.section(&p[0]), phi.section(&p[1]));
        let ab = phi.section(&h.mul(&p[0], &p[1]));
        g.mul(&g.mul(&a, &b), &g.inv(&ab))
    };
    let mut out: KernelProduct<SourceElem<S>> = even.iter().map(|p| (defect(p), 1)).collect();
    out.extend(odd.iter().map(|p| (defect(p), -1)));
    Ok(out)
}

/// `ψ ∘ (i∘ε)^{-1} ∘ ∂` on a 2-cycle.
pub fn psi_of_boundary<S: Surjection>(
    phi: &S,
    x: &GroupChain<TargetElem<S>>,
    sign: ConnectingSign,
) -> Result<KernelProduct<SourceElem<S>>> {
    let rel = boundary_to_relative(phi, x, sign)?;
    let coker = coker_representative(phi, &rel).map_err(|e| match e {
        Error::NotInImage(m) => Error::InvariantViolation(format!("relative boundary not in the cokernel image: {m}")),
        other => other,
    })?;
    psi(phi, &coker)
}
