//! Finite groups given by multiplication tables, homomorphisms between them
//! and the quotient `K/Γ` of the kernel of a surjection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Group, KernelProduct, Surjection};
use crate::error::{Error, Result};

/// Group on `{0, ..., n-1}` with a multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupFile", into = "GroupFile")]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    labels: Vec<String>,
}

/// On-disk form `{"order": n, "table": [[...]], "labels": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl TryFrom<GroupFile> for FiniteGroup {
    type Error = Error;
    fn try_from(f: GroupFile) -> Result<Self> {
        if f.table.len() != f.order {
            return Err(Error::InvalidGroup(format!("order {} but {} table rows", f.order, f.table.len())));
        }
        let labels = if f.labels.is_empty() { (0..f.order).map(|i| i.to_string()).collect() } else { f.labels };
        FiniteGroup::new(f.table, labels)
    }
}

impl From<FiniteGroup> for GroupFile {
    fn from(g: FiniteGroup) -> Self {
        GroupFile { order: g.order(), table: g.table, labels: g.labels }
    }
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(table: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidGroup(format!("{} labels for order {n}", labels.len())));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidGroup(format!("row {i} is not a map into the group")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let h = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
            inverse.push(h);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(Self { table, identity, inverse, labels })
    }

    /// Group from a multiplication closure on `0..n`.
    pub fn from_fn<F: Fn(usize, usize) -> usize>(n: usize, labels: Vec<String>, f: F) -> Result<Self> {
        Self::new((0..n).map(|a| (0..n).map(|b| f(a, b)).collect()).collect(), labels)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Subgroup generated by `gens`.
    pub fn generated(&self, gens: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = [self.identity].into();
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.table[x][g];
                if out.insert(y) {
                    frontier.push(y);
                }
            }
        }
        out
    }
}

impl Group for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn inv(&self, a: &usize) -> usize {
        self.inverse[*a]
    }
}

/// Surjective homomorphism of finite groups with a chosen section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteHom {
    source: FiniteGroup,
    target: FiniteGroup,
    map: Vec<usize>,
    section: Vec<usize>,
}

impl FiniteHom {
    pub fn new(source: FiniteGroup, target: FiniteGroup, map: Vec<usize>, section: Vec<usize>) -> Result<Self> {
        if map.len() != source.order() || map.iter().any(|&h| h >= target.order()) {
            return Err(Error::InvalidGroup("map is not a function between the groups".into()));
        }
        for a in source.elements() {
            for b in source.elements() {
                if map[source.mul(&a, &b)] != target.mul(&map[a], &map[b]) {
                    return Err(Error::InvalidGroup(format!("map is not a homomorphism at ({a}, {b})")));
                }
            }
        }
        if section.len() != target.order() || section.iter().any(|&g| g >= source.order()) {
            return Err(Error::InvalidGroup("section is not a function from the target".into()));
        }
        for (h, &g) in section.iter().enumerate() {
            if map[g] != h {
                return Err(Error::InvalidGroup(format!("section does not split the map at {h}")));
            }
        }
        Ok(Self { source, target, map, section })
    }

    /// Homomorphism with the section picking the smallest element of each fiber.
    pub fn with_min_section(source: FiniteGroup, target: FiniteGroup, map: Vec<usize>) -> Result<Self> {
        let section = Self::fiber_choice(&target, &map, |fib| fib.first().copied())?;
        Self::new(source, target, map, section)
    }

    fn fiber_choice<F: Fn(&[usize]) -> Option<usize>>(target: &FiniteGroup, map: &[usize], pick: F) -> Result<Vec<usize>> {
        target
            .elements()
            .map(|h| {
                let fib: Vec<usize> = (0..map.len()).filter(|&g| map[g] == h).collect();
                pick(&fib).ok_or_else(|| Error::InvalidGroup(format!("map is not surjective: {h} has no preimage")))
            })
            .collect()
    }

    /// Same map with the section picking the largest element of each fiber.
    pub fn with_max_section(&self) -> Self {
        let section = Self::fiber_choice(&self.target, &self.map, |fib| fib.last().copied()).expect("surjective");
        Self { section, ..self.clone() }
    }

    pub fn with_section(&self, section: Vec<usize>) -> Result<Self> {
        Self::new(self.source.clone(), self.target.clone(), self.map.clone(), section)
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn section_table(&self) -> &[usize] {
        &self.section
    }

    pub fn kernel(&self) -> BTreeSet<usize> {
        self.source.elements().filter(|&g| self.map[g] == self.target.identity()).collect()
    }
}

impl Surjection for FiniteHom {
    type Source = FiniteGroup;
    type Target = FiniteGroup;

    fn source(&self) -> &FiniteGroup {
        &self.source
    }

    fn target(&self) -> &FiniteGroup {
        &self.target
    }

    fn apply(&self, g: &usize) -> usize {
        self.map[*g]
    }

    fn section(&self, h: &usize) -> usize {
        self.section[*h]
    }
}

/// The abelian group `K/Γ`, where `K` is the kernel and `Γ` the normal
/// subgroup generated by the commutators `[g, k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelQuotient {
    kernel: BTreeSet<usize>,
    gamma: BTreeSet<usize>,
    /// `coset[g]` is the smallest element of `gΓ` for `g` in the kernel.
    coset: Vec<Option<usize>>,
}

impl KernelQuotient {
    pub fn new(phi: &FiniteHom) -> Self {
        let g = phi.source();
        let kernel = phi.kernel();
        let comms: BTreeSet<usize> = g
            .elements()
            .flat_map(|x| kernel.iter().map(move |&k| (x, k)))
            .map(|(x, k)| g.mul(&g.mul(&x, &k), &g.mul(&g.inv(&x), &g.inv(&k))))
            .collect();
        // commutators with the kernel form a conjugation-invariant set
        let gamma = g.generated(&comms);
        let mut coset = vec![None; g.order()];
        for &k in &kernel {
            let rep = gamma.iter().map(|&y| g.mul(&k, &y)).min().expect("nonempty");
            coset[k] = Some(rep);
        }
        Self { kernel, gamma, coset }
    }

    pub fn kernel(&self) -> &BTreeSet<usize> {
        &self.kernel
    }

    pub fn gamma(&self) -> &BTreeSet<usize> {
        &self.gamma
    }

    /// Order of `K/Γ`.
    pub fn order(&self) -> usize {
        self.kernel.len() / self.gamma.len()
    }

    /// Canonical coset representatives.
    pub fn classes(&self) -> BTreeSet<usize> {
        self.coset.iter().flatten().copied().collect()
    }

    pub fn class_of(&self, k: usize) -> Result<usize> {
        self.coset
            .get(k)
            .copied()
            .flatten()
            .ok_or_else(|| Error::InvariantViolation(format!("element {k} is not in the kernel")))
    }

    /// Evaluates a formal product of kernel elements in `K/Γ`.
    pub fn evaluate(&self, g: &FiniteGroup, product: &KernelProduct<usize>) -> Result<usize> {
        let mut acc = g.identity();
        for (k, e) in product {
            self.class_of(*k)?;
            acc = g.mul(&acc, &g.pow(k, *e));
        }
        self.class_of(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::super::catalog;
    use super::*;

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(FiniteGroup::new(vec![vec![0, 1], vec![0, 1]], vec!["a".into(), "b".into()]), Err(Error::InvalidGroup(_))));
        assert!(matches!(FiniteGroup::new(vec![vec![0, 2], vec![1, 0]], vec!["a".into(), "b".into()]), Err(Error::InvalidGroup(_))));
        assert!(FiniteGroup::new(vec![], vec![]).is_err());
        // a Latin square without associativity
        let t = vec![vec![0, 1, 2, 3, 4], vec![1, 0, 3, 4, 2], vec![2, 4, 0, 1, 3], vec![3, 2, 4, 0, 1], vec![4, 3, 1, 2, 0]];
        assert!(FiniteGroup::new(t, (0..5).map(|i| i.to_string()).collect()).is_err());
    }

    #[test]
    fn group_json_round_trip() {
        let g = catalog::quaternion();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"order\":8"));
        let back: FiniteGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"order": 2, "table": [[0, 1]]}"#;
        assert!(serde_json::from_str::<FiniteGroup>(bad).is_err());
    }

    #[test]
    fn hom_validation() {
        let (z4, z2) = (catalog::cyclic(4), catalog::cyclic(2));
        assert!(FiniteHom::with_min_section(z4.clone(), z2.clone(), vec![0, 1, 0, 1]).is_ok());
        assert!(FiniteHom::with_min_section(z4.clone(), z2.clone(), vec![0, 1, 1, 0]).is_err());
        assert!(FiniteHom::with_min_section(z4.clone(), z2.clone(), vec![0, 0, 0, 0]).is_err());
        let phi = FiniteHom::with_min_section(z4, z2, vec![0, 1, 0, 1]).unwrap();
        assert!(phi.with_section(vec![0, 2]).is_err());
        assert_eq!(phi.with_max_section().section_table(), &[2, 3]);
    }

    #[test]
    fn kernel_quotients() {
        for s in catalog::standard_surjections() {
            let q = KernelQuotient::new(&s.hom);
            assert_eq!(q.kernel().len() * s.hom.target().order(), s.hom.source().order(), "{}", s.name);
            assert!(q.gamma().is_subset(q.kernel()));
            assert_eq!(q.classes().len(), q.order());
        }
        let q8 = catalog::standard_surjections().into_iter().find(|s| s.name.starts_with("Q8")).unwrap();
        let q = KernelQuotient::new(&q8.hom);
        assert_eq!(q.order(), 2);
        assert_eq!(q.gamma().len(), 1);
    }
}
