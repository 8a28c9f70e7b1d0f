//! Integral homology of small finite groups in degrees up to two, and random
//! 2-cycles for sweeps.

use std::fmt;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use super::finite::FiniteGroup;
use super::snf::{smith_form, SmithForm};
use super::{bar_boundary, Group, GroupChain};
use crate::error::{Error, Result};

/// Largest group order accepted in degree 2, where the boundary out of
/// 3-chains has `|G|³` columns.
pub const MAX_ORDER_DEGREE_TWO: usize = 16;
pub const MAX_ORDER_DEGREE_ONE: usize = 256;

/// `ℤ^rank ⊕ ⊕ ℤ/t_i`, with one generating cycle per torsion summand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub rank: usize,
    pub torsion: Vec<u64>,
    #[serde(skip)]
    pub generators: Vec<GroupChain<usize>>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn order(&self) -> Option<u64> {
        (self.rank == 0).then(|| self.torsion.iter().product())
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|t| format!("Z/{t}")).collect();
        match self.rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn tuple_index(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |acc, &g| acc * n + g)
}

fn index_tuple(mut idx: usize, n: usize, degree: usize) -> Vec<usize> {
    let mut t = vec![0; degree];
    for slot in t.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

/// Matrix of the bar boundary from `degree`-chains to `(degree-1)`-chains,
/// tuples numbered lexicographically.
pub fn boundary_matrix(g: &FiniteGroup, degree: usize) -> Vec<Vec<i64>> {
    let n = g.order();
    let cols = n.pow(degree as u32);
    let rows = n.pow(degree.saturating_sub(1) as u32);
    let mut m = vec![vec![0i64; cols]; rows];
    for j in 0..cols {
        let c = GroupChain::from_terms(degree, [(index_tuple(j, n, degree), 1)]).expect("degree matches");
        for (t, k) in bar_boundary(g, &c).terms() {
            m[tuple_index(t, n)][j] += k;
        }
    }
    m
}

fn chain_from_vector(v: &[num_bigint::BigInt], n: usize, degree: usize) -> Result<GroupChain<usize>> {
    let mut c = GroupChain::zero(degree);
    for (i, x) in v.iter().enumerate() {
        let k = x.to_i64().ok_or_else(|| Error::InvariantViolation("generator coefficient exceeds i64".into()))?;
        c.add_term(index_tuple(i, n, degree), k)?;
    }
    Ok(c)
}

/// `H_degree(G; ℤ)` for `degree ≤ 2`.
pub fn homology(g: &FiniteGroup, degree: usize) -> Result<HomologyGroup> {
    let n = g.order();
    let limit = match degree {
        0 => usize::MAX,
        1 => MAX_ORDER_DEGREE_ONE,
        2 => MAX_ORDER_DEGREE_TWO,
        _ => return Err(Error::InvalidInput(format!("homology is computed in degrees 0..=2, not {degree}"))),
    };
    if n > limit {
        return Err(Error::GroupTooLarge { order: n, degree });
    }
    if degree == 0 {
        return Ok(HomologyGroup { degree, rank: 1, torsion: vec![], generators: vec![] });
    }
    // the boundary out of degree 1 is zero
    let rank_out = if degree == 1 { 0 } else { smith_form(&boundary_matrix(g, degree), n.pow(degree as u32)).rank() };
    let incoming: SmithForm = smith_form(&boundary_matrix(g, degree + 1), n.pow(degree as u32 + 1));
    let dim = n.pow(degree as u32);
    let mut torsion = Vec::new();
    let mut generators = Vec::new();
    for (i, d) in incoming.torsion() {
        torsion.push(d.to_u64().ok_or_else(|| Error::InvariantViolation(format!("torsion coefficient {d} exceeds u64")))?);
        generators.push(chain_from_vector(&incoming.cokernel_basis[i], n, degree)?);
    }
    Ok(HomologyGroup { degree, rank: dim - rank_out - incoming.rank(), torsion, generators })
}

/// Random chain with up to `terms` tuples and coefficients in `-3..=3`.
pub fn random_chain<R: Rng>(g: &FiniteGroup, degree: usize, terms: usize, rng: &mut R) -> GroupChain<usize> {
    let mut c = GroupChain::zero(degree);
    for _ in 0..terms {
        let t = (0..degree).map(|_| rng.gen_range(0..g.order())).collect();
        c.add_term(t, rng.gen_range(-3..=3)).expect("degree matches");
    }
    c
}

/// Random 2-cycle mixing multiples of the degree 2 generators, boundaries of
/// random 3-chains and commutator cycles `(x, y) - (y, x)` of commuting pairs.
pub fn random_two_cycle<R: Rng>(g: &FiniteGroup, h2: &HomologyGroup, rng: &mut R) -> GroupChain<usize> {
    let mut x = GroupChain::zero(2);
    for gen in &h2.generators {
        x = x.add(&gen.scale(rng.gen_range(-2..=2))).expect("degree 2");
    }
    x = x.add(&bar_boundary(g, &random_chain(g, 3, rng.gen_range(0..=3), rng))).expect("degree 2");
    for _ in 0..rng.gen_range(0..=2) {
        let (a, b) = (rng.gen_range(0..g.order()), rng.gen_range(0..g.order()));
        if g.mul(&a, &b) == g.mul(&b, &a) {
            let k = rng.gen_range(-2..=2);
            x.add_term(vec![a, b], k).expect("degree 2");
            x.add_term(vec![b, a], -k).expect("degree 2");
        }
    }
    x
}
