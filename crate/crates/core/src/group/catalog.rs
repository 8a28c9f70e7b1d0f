//! Small groups and the standard surjections between them, plus the JSON
//! catalog format.

use serde::{Deserialize, Serialize};

use super::finite::{FiniteGroup, FiniteHom};
use super::{Group, Surjection};
use crate::error::{Error, Result};

fn labels<F: Fn(usize) -> String>(n: usize, f: F) -> Vec<String> {
    (0..n).map(f).collect()
}

/// `ℤ/n` written additively.
pub fn cyclic(n: usize) -> FiniteGroup {
    FiniteGroup::from_fn(n, labels(n, |i| i.to_string()), |a, b| (a + b) % n).expect("cyclic group")
}

/// `A × B` with `(a, b)` stored at `a + |A|·b`.
pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
    let (na, nb) = (a.order(), b.order());
    let split = |g: usize| (g % na, g / na);
    let table = (0..na * nb)
        .map(|x| {
            (0..na * nb)
                .map(|y| {
                    let ((xa, xb), (ya, yb)) = (split(x), split(y));
                    a.mul(&xa, &ya) + na * b.mul(&xb, &yb)
                })
                .collect()
        })
        .collect();
    let names = labels(na * nb, |g| format!("({},{})", a.label(g % na), b.label(g / na)));
    FiniteGroup::new(table, names).expect("direct product")
}

/// Dihedral group of order 8; `r^i s^j` is stored at `i + 4j`.
pub fn dihedral4() -> FiniteGroup {
    FiniteGroup::from_fn(
        8,
        labels(8, |g| match (g % 4, g / 4) {
            (0, 0) => "e".into(),
            (i, 0) => format!("r{i}"),
            (0, _) => "s".into(),
            (i, _) => format!("r{i}s"),
        }),
        |x, y| {
            let ((a, b), (c, d)) = ((x % 4, x / 4), (y % 4, y / 4));
            let c = if b == 1 { (4 - c) % 4 } else { c };
            (a + c) % 4 + 4 * ((b + d) % 2)
        },
    )
    .expect("dihedral group")
}

/// Quaternion group in the order `1, i, j, k, -1, -i, -j, -k`.
pub fn quaternion() -> FiniteGroup {
    // unit products: (sign, unit) for units 1, i, j, k
    const UNIT: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    FiniteGroup::from_fn(
        8,
        ["1", "i", "j", "k", "-1", "-i", "-j", "-k"].iter().map(|s| s.to_string()).collect(),
        |x, y| {
            let (s, u) = UNIT[x % 4][y % 4];
            u + 4 * ((s + x / 4 + y / 4) % 2)
        },
    )
    .expect("quaternion group")
}

/// Permutations of three points in lexicographic order; product is composition
/// `(στ)(i) = σ(τ(i))`.
pub fn symmetric3() -> FiniteGroup {
    let perms = permutations3();
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
    FiniteGroup::from_fn(
        6,
        perms.iter().map(|p| format!("{}{}{}", p[0], p[1], p[2])).collect(),
        |x, y| {
            let (s, t) = (perms[x], perms[y]);
            index([s[t[0]], s[t[1]], s[t[2]]])
        },
    )
    .expect("symmetric group")
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

fn sign3(p: [usize; 3]) -> usize {
    (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count() % 2
}

/// A named surjection with a second section for independence checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogSurjection {
    pub name: String,
    pub hom: FiniteHom,
    pub alternate: FiniteHom,
}

impl CatalogSurjection {
    fn new(name: &str, source: FiniteGroup, target: FiniteGroup, map: Vec<usize>) -> Self {
        let hom = FiniteHom::with_min_section(source, target, map).expect("catalog surjection");
        let alternate = hom.with_max_section();
        Self { name: name.into(), hom, alternate }
    }
}

/// `ℤ/4 → ℤ/2`, `ℤ/2×ℤ/2 → ℤ/2`, `D4 → ℤ/2×ℤ/2`, `Q8 → ℤ/2×ℤ/2`, `S3 → ℤ/2`.
pub fn standard_surjections() -> Vec<CatalogSurjection> {
    let z2 = cyclic(2);
    let v4 = direct_product(&z2, &z2);
    let s3 = symmetric3();
    vec![
        CatalogSurjection::new("Z4->Z2", cyclic(4), z2.clone(), (0..4).map(|g| g % 2).collect()),
        CatalogSurjection::new("Z2xZ2->Z2", v4.clone(), z2.clone(), (0..4).map(|g| g % 2).collect()),
        CatalogSurjection::new("D4->Z2xZ2", dihedral4(), v4.clone(), (0..8).map(|g| (g % 4) % 2 + 2 * (g / 4)).collect()),
        CatalogSurjection::new("Q8->Z2xZ2", quaternion(), v4, (0..8).map(|g| g % 4).collect()),
        CatalogSurjection::new("S3->Z2", s3, z2, permutations3().into_iter().map(sign3).collect()),
    ]
}

/// Groups checked for `d² = 0`, including every order up to 8 used above and
/// two of order 16.
pub fn standard_groups() -> Vec<(String, FiniteGroup)> {
    let z2 = cyclic(2);
    let v4 = direct_product(&z2, &z2);
    vec![
        ("Z2".into(), z2.clone()),
        ("Z4".into(), cyclic(4)),
        ("Z2xZ2".into(), v4.clone()),
        ("S3".into(), symmetric3()),
        ("D4".into(), dihedral4()),
        ("Q8".into(), quaternion()),
        ("Z16".into(), cyclic(16)),
        ("D4xZ2".into(), direct_product(&dihedral4(), &z2)),
    ]
}

/// On-disk surjection: both groups inline, the map and one or two sections.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurjectionFile {
    pub name: String,
    pub source: FiniteGroup,
    pub target: FiniteGroup,
    pub map: Vec<usize>,
    pub section: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_section: Option<Vec<usize>>,
}

impl From<&CatalogSurjection> for SurjectionFile {
    fn from(s: &CatalogSurjection) -> Self {
        Self {
            name: s.name.clone(),
            source: s.hom.source().clone(),
            target: s.hom.target().clone(),
            map: s.hom.map().to_vec(),
            section: s.hom.section_table().to_vec(),
            alternate_section: Some(s.alternate.section_table().to_vec()),
        }
    }
}

impl TryFrom<SurjectionFile> for CatalogSurjection {
    type Error = Error;
    fn try_from(f: SurjectionFile) -> Result<Self> {
        let hom = FiniteHom::new(f.source, f.target, f.map, f.section)?;
        let alternate = match f.alternate_section {
            Some(s) => hom.with_section(s)?,
            None => hom.with_max_section(),
        };
        Ok(Self { name: f.name, hom, alternate })
    }
}

pub fn to_json(surjections: &[CatalogSurjection]) -> Result<String> {
    let files: Vec<SurjectionFile> = surjections.iter().map(SurjectionFile::from).collect();
    serde_json::to_string_pretty(&files).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Parses a JSON array of surjections and validates each one.
pub fn from_json(text: &str) -> Result<Vec<CatalogSurjection>> {
    let files: Vec<SurjectionFile> = serde_json::from_str(text).map_err(|e| Error::InvalidGroup(e.to_string()))?;
    files.into_iter().map(CatalogSurjection::try_from).collect()
}
