//! Free groups, free abelian groups and the abelianization map with the
//! ordered-product section. Operator-valued elements are handled through
//! words in free generators and evaluated afterwards.

use super::{Group, Surjection};
use crate::error::{Error, Result};

/// Reduced word; letter `±(i + 1)` is the generator `x_i` or its inverse.
pub type Word = Vec<i32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeGroup {
    pub rank: usize,
}

impl FreeGroup {
    pub fn generator(&self, i: usize) -> Word {
        assert!(i < self.rank, "generator {i} of a rank {} free group", self.rank);
        vec![i as i32 + 1]
    }
}

impl Group for FreeGroup {
    type Elem = Word;

    fn identity(&self) -> Word {
        Vec::new()
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        let mut out = a.clone();
        for &x in b {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        out
    }

    fn inv(&self, a: &Word) -> Word {
        a.iter().rev().map(|x| -x).collect()
    }
}

/// `ℤ^rank` written additively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub rank: usize,
}

impl Group for Lattice {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.rank]
    }

    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inv(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }
}

/// Exponent-sum map `F_k → ℤ^k` with section `v ↦ x_1^{v_1} ⋯ x_k^{v_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Abelianization {
    free: FreeGroup,
    lattice: Lattice,
}

impl Abelianization {
    pub fn new(rank: usize) -> Self {
        Self { free: FreeGroup { rank }, lattice: Lattice { rank } }
    }
}

impl Surjection for Abelianization {
    type Source = FreeGroup;
    type Target = Lattice;

    fn source(&self) -> &FreeGroup {
        &self.free
    }

    fn target(&self) -> &Lattice {
        &self.lattice
    }

    fn apply(&self, g: &Word) -> Vec<i64> {
        let mut v = vec![0; self.lattice.rank];
        for &x in g {
            v[x.unsigned_abs() as usize - 1] += x.signum() as i64;
        }
        v
    }

    fn section(&self, h: &Vec<i64>) -> Word {
        let mut w = Vec::new();
        for (i, &e) in h.iter().enumerate() {
            let letter = if e < 0 { -(i as i32 + 1) } else { i as i32 + 1 };
            w.extend(std::iter::repeat(letter).take(e.unsigned_abs() as usize));
        }
        w
    }
}

/// Evaluates a word given images of the generators and of their inverses.
pub fn evaluate<T, F>(word: &[i32], images: &[(T, T)], one: T, mul: F) -> Result<T>
where
    T: Clone,
    F: Fn(&T, &T) -> Result<T>,
{
    word.iter().try_fold(one, |acc, &x| {
        let (g, gi) = images
            .get(x.unsigned_abs() as usize - 1)
            .ok_or_else(|| Error::InvalidInput(format!("letter {x} outside {} generators", images.len())))?;
        mul(&acc, if x > 0 { g } else { gi })
    })
}

/// Human-readable word such as `x1 x2 x1^-1`.
pub fn format_word(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|&x| if x > 0 { format!("x{x}") } else { format!("x{}^-1", -x) })
        .collect::<Vec<_>>()
        .join(" ")
}
