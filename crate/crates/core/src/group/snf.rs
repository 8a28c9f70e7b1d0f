//! Smith normal form of integer matrices with the inverse of the row
//! transformation, so that cokernel generators can be read off.
//!
//! Elimination runs in checked `i128` and restarts with big integers on
//! overflow. Pivots are chosen deterministically.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};

/// `U A V = diag(d_1, ..., d_r, 0, ...)` with `d_i | d_{i+1}` and `d_i > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub divisors: Vec<BigInt>,
    /// Columns of `U^{-1}`; column `i` generates the `i`-th cyclic summand
    /// of the cokernel `ℤ^rows / im A`.
    pub cokernel_basis: Vec<Vec<BigInt>>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// Invariant factors greater than one, with their basis indices.
    pub fn torsion(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.divisors.iter().enumerate().filter(|(_, d)| !d.is_one())
    }
}

pub trait SnfInt: Clone + Debug + Zero + One + Signed + Integer + CheckedAdd + CheckedSub + CheckedMul + Into<BigInt> {}
impl SnfInt for i128 {}
impl SnfInt for BigInt {}

/// Smith normal form of a dense row-major matrix with `cols` columns.
pub fn smith_form(a: &[Vec<i64>], cols: usize) -> SmithForm {
    let conv = |f: fn(i64) -> i128| a.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect();
    if let Some(s) = smith_generic::<i128>(conv(i128::from), cols) {
        return s;
    }
    let big = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    smith_generic::<BigInt>(big, cols).expect("big integer elimination cannot overflow")
}

struct State<T> {
    a: Vec<Vec<T>>,
    /// Transposed `U^{-1}`: `uinv[k]` is column `k`.
    uinv: Vec<Vec<T>>,
}

impl<T: SnfInt> State<T> {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        self.uinv.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in &mut self.a {
            r.swap(i, j);
        }
    }

    /// `row_i -= q row_t`.
    fn row_sub(&mut self, i: usize, t: usize, q: &T) -> Option<()> {
        let (src, dst) = pair_mut(&mut self.a, t, i);
        axpy(dst, src, q, false)?;
        let (col_i, col_t) = pair_mut(&mut self.uinv, i, t);
        axpy(col_t, col_i, q, true)
    }

    /// `col_j -= q col_t`.
    fn col_sub(&mut self, j: usize, t: usize, q: &T) -> Option<()> {
        for r in &mut self.a {
            if !r[t].is_zero() {
                r[j] = r[j].checked_sub(&r[t].checked_mul(q)?)?;
            }
        }
        Some(())
    }

    /// `row_t += row_i`.
    fn row_add(&mut self, t: usize, i: usize) -> Option<()> {
        let (src, dst) = pair_mut(&mut self.a, i, t);
        axpy(dst, src, &T::one(), true)?;
        let (col_t, col_i) = pair_mut(&mut self.uinv, t, i);
        axpy(col_i, col_t, &T::one(), false)
    }

    fn negate_row(&mut self, t: usize) {
        for x in self.a[t].iter_mut().chain(self.uinv[t].iter_mut()) {
            *x = -x.clone();
        }
    }
}

/// Mutable references to two distinct rows, `(m[i], m[j])`.
fn pair_mut<T>(m: &mut [Vec<T>], i: usize, j: usize) -> (&Vec<T>, &mut Vec<T>) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = m.split_at_mut(j);
        (&lo[i], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(i);
        (&hi[0], &mut lo[j])
    }
}

/// `dst ± q src`, checked.
fn axpy<T: SnfInt>(dst: &mut [T], src: &[T], q: &T, add: bool) -> Option<()> {
    for (d, s) in dst.iter_mut().zip(src) {
        if s.is_zero() {
            continue;
        }
        let p = s.checked_mul(q)?;
        *d = if add { d.checked_add(&p)? } else { d.checked_sub(&p)? };
    }
    Some(())
}

/// Nonzero entry of least magnitude in the lower right block from `t`,
/// taking the first unit found in row-major order.
fn find_pivot<T: SnfInt>(a: &[Vec<T>], t: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().take(cols).skip(t) {
            if x.is_zero() {
                continue;
            }
            if x.abs().is_one() {
                return Some((i, j));
            }
            if best.map_or(true, |(bi, bj)| x.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

pub fn smith_generic<T: SnfInt>(a: Vec<Vec<T>>, cols: usize) -> Option<SmithForm> {
    let rows = a.len();
    let uinv = (0..rows).map(|i| (0..rows).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let mut s = State { a, uinv };
    let mut divisors = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = find_pivot(&s.a, t, cols) else { break };
        s.swap_rows(t, pi);
        s.swap_cols(t, pj);
        loop {
            let p = s.a[t][t].clone();
            let mut remainder = false;
            for i in t + 1..rows {
                if s.a[i][t].is_zero() {
                    continue;
                }
                let q = s.a[i][t].clone() / p.clone();
                s.row_sub(i, t, &q)?;
                remainder |= !s.a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if s.a[t][j].is_zero() {
                    continue;
                }
                let q = s.a[t][j].clone() / p.clone();
                s.col_sub(j, t, &q)?;
                remainder |= !s.a[t][j].is_zero();
            }
            if remainder {
                let (_, in_col, k) = (t + 1..rows)
                    .map(|i| (s.a[i][t].abs(), true, i))
                    .chain((t + 1..cols).map(|j| (s.a[t][j].abs(), false, j)))
                    .filter(|(x, _, _)| !x.is_zero())
                    .min_by(|x, y| x.0.cmp(&y.0))
                    .expect("a remainder leaves a nonzero entry");
                if in_col {
                    s.swap_rows(t, k);
                } else {
                    s.swap_cols(t, k);
                }
                continue;
            }
            if p.abs().is_one() {
                break;
            }
            let bad = (t + 1..rows).find(|&i| s.a[i][t + 1..cols].iter().any(|x| !(x.clone() % p.clone()).is_zero()));
            match bad {
                Some(i) => s.row_add(t, i)?,
                None => break,
            }
        }
        if s.a[t][t].is_negative() {
            s.negate_row(t);
        }
        divisors.push(s.a[t][t].clone().into());
    }
    Some(SmithForm {
        rows,
        cols,
        divisors,
        cokernel_basis: s.uinv.into_iter().map(|c| c.into_iter().map(Into::into).collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// gcd of all k×k minors, by cofactor expansion.
    fn minor_gcd(a: &[Vec<i64>], k: usize) -> i64 {
        fn det(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let sub: Vec<Vec<i64>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * det(&sub)
                })
                .sum()
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            (0..1usize << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
        }
        let mut g = 0i64;
        for r in subsets(a.len(), k) {
            for c in subsets(a[0].len(), k) {
                let m: Vec<Vec<i64>> = r.iter().map(|&i| c.iter().map(|&j| a[i][j]).collect()).collect();
                g = g.gcd(&det(&m));
            }
        }
        g
    }

    /// `U^{-1} D V^{-1} = A` implies every column of `A` lies in the span of
    /// `d_i u_i`; checked by solving in the `U^{-1}` basis.
    fn image_in_span(a: &[Vec<i64>], s: &SmithForm) {
        let n = a.len();
        let u: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|k| s.cokernel_basis[k][i].to_f64().unwrap()).collect()).collect();
        for j in 0..s.cols {
            // coordinates of column j in the basis: solve u x = a_j
            let mut m: Vec<Vec<f64>> = (0..n).map(|i| [u[i].clone(), vec![a[i][j] as f64]].concat()).collect();
            for c in 0..n {
                let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
                m.swap(c, p);
                for r in 0..n {
                    if r != c {
                        let f = m[r][c] / m[c][c];
                        for k in c..=n {
                            m[r][k] -= f * m[c][k];
                        }
                    }
                }
            }
            for i in 0..n {
                let x = m[i][n] / m[i][i];
                let d = s.divisors.get(i).map_or(0.0, |d| d.to_f64().unwrap());
                if d == 0.0 {
                    assert!(x.abs() < 1e-6, "column {j} leaves the image span");
                } else {
                    assert!((x / d - (x / d).round()).abs() < 1e-6, "column {j} has coordinate {x} off the lattice {d}");
                }
            }
        }
    }

    #[test]
    fn diagonal_of_known_matrix() {
        let a = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith_form(&a, 3);
        assert_eq!(s.divisors, big(&[2, 6, 12]));
        image_in_span(&a, &s);
    }

    #[test]
    fn zero_and_empty() {
        let s = smith_form(&[vec![0, 0], vec![0, 0]], 2);
        assert_eq!(s.rank(), 0);
        assert_eq!(s.cokernel_basis.len(), 2);
        assert_eq!(smith_form(&[], 3).rank(), 0);
    }

    #[test]
    fn big_integer_fallback_matches() {
        let a = vec![vec![i64::MAX, 3], vec![5, i64::MAX - 1], vec![7, 11]];
        let s = smith_form(&a, 2);
        let b = smith_generic::<BigInt>(a.iter().map(|r| big(r)).collect(), 2).unwrap();
        assert_eq!(s, b);
        assert_eq!(s.divisors[0], BigInt::from(1));
    }

    proptest! {
        #[test]
        fn divisors_match_minor_gcds(entries in prop::collection::vec(-6i64..=6, 12)) {
            let a: Vec<Vec<i64>> = entries.chunks(4).map(|r| r.to_vec()).collect();
            let s = smith_form(&a, 4);
            let mut prod = 1i64;
            for k in 1..=3 {
                let g = minor_gcd(&a, k);
                if k <= s.rank() {
                    prod *= i64::try_from(&s.divisors[k - 1]).unwrap();
                    prop_assert_eq!(prod, g);
                } else {
                    prop_assert_eq!(g, 0);
                }
            }
            for w in s.divisors.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
            image_in_span(&a, &s);
        }
    }
}
