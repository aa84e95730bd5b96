//! Cellular cohomology of the subquotients T_a / T_b of a product of spheres.
//!
//! The product S^{m_1} x ... x S^{m_r} has one cell per subset of {1..r}.
//! T_s keeps the cells with at most r - s coordinates off the basepoint, so
//! T_a / T_b has a free basis of subsets S with r - b < |S| <= r - a.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported r; subsets are stored as bitmasks.
pub const MAX_R: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SphereTuple {
    dims: Vec<u32>,
}

impl SphereTuple {
    pub fn new(dims: Vec<u32>) -> Result<Self> {
        if dims.len() < 2 || dims.len() > MAX_R {
            return Err(Error::Invalid(format!("need 2 <= r <= {MAX_R}, got r = {}", dims.len())));
        }
        if dims.contains(&0) {
            return Err(Error::Invalid("sphere dimensions must be positive".into()));
        }
        Ok(SphereTuple { dims })
    }

    pub fn r(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn degree(&self, mask: u32) -> u32 {
        indices(mask).into_iter().map(|i| self.dims[i - 1]).sum()
    }

    fn full_mask(&self) -> u32 {
        (1u32 << self.r()) - 1
    }

    /// Subset from 1-based indices.
    pub fn mask_of(&self, subset: &[usize]) -> Result<u32> {
        let mut mask = 0;
        for &i in subset {
            if i == 0 || i > self.r() {
                return Err(Error::Invalid(format!("index {i} outside 1..{}", self.r())));
            }
            mask |= 1 << (i - 1);
        }
        if mask == 0 {
            return Err(Error::Invalid("empty subset".into()));
        }
        Ok(mask)
    }

    pub fn class(&self, mask: u32, coefficient: i64) -> SubsetClass {
        SubsetClass { subset: indices(mask), degree: self.degree(mask), coefficient, mask }
    }
}

fn indices(mut mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize + 1);
        mask &= mask - 1;
    }
    out
}

/// `coefficient * x_S`. Built through [`SphereTuple::class`] so the degree
/// always matches the subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetClass {
    subset: Vec<usize>,
    degree: u32,
    coefficient: i64,
    #[serde(skip)]
    mask: u32,
}

impl SubsetClass {
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn coefficient(&self) -> i64 {
        self.coefficient
    }
    pub fn mask(&self) -> u32 {
        self.mask
    }
}

impl fmt::Display for SubsetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: Vec<String> = self.subset.iter().map(|i| i.to_string()).collect();
        match self.coefficient {
            1 => write!(f, "x{{{}}}", set.join(",")),
            -1 => write!(f, "-x{{{}}}", set.join(",")),
            c => write!(f, "{c} x{{{}}}", set.join(",")),
        }
    }
}

/// Sign of x_S ⌣ x_T against x_{S∪T}: (-1)^(sum of m_i m_j over i in S, j in T, i > j).
pub fn koszul_sign(tuple: &SphereTuple, s: u32, t: u32) -> i64 {
    let mut exp = 0u64;
    for i in indices(s) {
        for j in indices(t) {
            if i > j {
                exp += u64::from(tuple.dims[i - 1]) * u64::from(tuple.dims[j - 1]);
            }
        }
    }
    if exp.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientRing {
    tuple: SphereTuple,
    levels: (usize, usize),
    #[serde(serialize_with = "ser_basis")]
    basis: Vec<u32>,
}

fn ser_basis<S: serde::Serializer>(basis: &[u32], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(basis.len()))?;
    for m in basis {
        seq.serialize_element(&indices(*m))?;
    }
    seq.end()
}

/// Cohomology of T_a / T_b. Levels may go up to b = r, where T_r is the base point.
pub fn ring(a: usize, b: usize, tuple: &SphereTuple) -> Result<QuotientRing> {
    let r = tuple.r();
    if a >= b || b > r {
        return Err(Error::BadLevels { a, b, r });
    }
    let mut basis: Vec<u32> = (1..=tuple.full_mask())
        .filter(|m| {
            let k = m.count_ones() as usize;
            r - b < k && k <= r - a
        })
        .collect();
    // Within a degree and size, lexicographic order on the sorted indices.
    basis.sort_by_cached_key(|&m| (tuple.degree(m), m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    Ok(QuotientRing { tuple: tuple.clone(), levels: (a, b), basis })
}

impl QuotientRing {
    pub fn tuple(&self) -> &SphereTuple {
        &self.tuple
    }

    pub fn levels(&self) -> (usize, usize) {
        self.levels
    }

    pub fn contains(&self, mask: u32) -> bool {
        Levels(self.levels.0, self.levels.1).contains(&self.tuple, mask)
    }

    pub fn basis(&self) -> Vec<SubsetClass> {
        self.basis.iter().map(|&m| self.tuple.class(m, 1)).collect()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Rank of each nonzero cohomology group, by degree.
    pub fn betti(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for &m in &self.basis {
            *out.entry(self.tuple.degree(m)).or_insert(0) += 1;
        }
        out
    }

    /// Product of two basis classes.
    pub fn cup_basis(&self, s: u32, t: u32) -> Result<i64> {
        for m in [s, t] {
            if !self.contains(m) {
                return Err(Error::NotInRing(self.tuple.class(m.max(1), 1).to_string()));
            }
        }
        Ok(Levels(self.levels.0, self.levels.1).cup(&self.tuple, s, t))
    }

    pub fn cup(&self, x: &[SubsetClass], y: &[SubsetClass]) -> Result<Vec<SubsetClass>> {
        let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
        for u in x {
            for v in y {
                let e = self.cup_basis(u.mask, v.mask)?;
                if e != 0 {
                    *acc.entry(u.mask | v.mask).or_insert(0) += e * u.coefficient * v.coefficient;
                }
            }
        }
        Ok(acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| self.tuple.class(m, c)).collect())
    }
}

impl fmt::Display for QuotientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.tuple.dims.iter().map(|d| d.to_string()).collect();
        let (a, b) = self.levels;
        let n = self.rank();
        writeln!(f, "H*(T_{a}/T_{b}) for dims ({}): {n} class{}", dims.join(","), if n == 1 { "" } else { "es" })?;
        let betti: Vec<String> = self.betti().iter().map(|(d, k)| format!("H^{d} = Z^{k}")).collect();
        writeln!(f, "betti: {}", if betti.is_empty() { "none".into() } else { betti.join(", ") })?;
        for c in self.basis() {
            writeln!(f, "  {c}  degree {}", c.degree)?;
        }
        Ok(())
    }
}

/// A pair of classes whose product vanishes in the smaller quotient but not in the larger one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub small: (usize, usize),
    pub large: (usize, usize),
    pub product: SubsetClass,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "witness ({{{}}},{{{}}}): x_S x_T = 0 in H*(T_{}/T_{}), = {} in H*(T_{}/T_{})",
            show(&self.s),
            show(&self.t),
            self.small.0,
            self.small.1,
            self.product,
            self.large.0,
            self.large.1
        )
    }
}

struct Levels(usize, usize);

impl Levels {
    fn contains(&self, tuple: &SphereTuple, mask: u32) -> bool {
        let (k, r) = (mask.count_ones() as usize, tuple.r());
        mask != 0 && mask <= tuple.full_mask() && r - self.1 < k && k <= r - self.0
    }

    fn cup(&self, tuple: &SphereTuple, s: u32, t: u32) -> i64 {
        if s & t != 0 || !self.contains(tuple, s | t) {
            0
        } else {
            koszul_sign(tuple, s, t)
        }
    }
}

fn check_pair(tuple: &SphereTuple, s: u32, t: u32, small: Levels, large: Levels) -> Option<Witness> {
    if ![&small, &large].iter().all(|l| l.contains(tuple, s) && l.contains(tuple, t)) {
        return None;
    }
    let hi = large.cup(tuple, s, t);
    (small.cup(tuple, s, t) == 0 && hi != 0).then(|| Witness {
        s: indices(s),
        t: indices(t),
        small: (small.0, small.1),
        large: (large.0, large.1),
        product: tuple.class(s | t, hi),
    })
}

/// First complementary pair (S, T), |S|, |T| >= 2, in ascending order of S,
/// whose product dies in T_1/T_{r-1} but survives in T_0/T_{r-1}.
pub fn retraction_obstruction(tuple: &SphereTuple) -> Option<Witness> {
    let r = tuple.r();
    let full = tuple.full_mask();
    (1..full)
        .filter(|&s| s < full ^ s && s.count_ones() >= 2 && (full ^ s).count_ones() >= 2)
        .find_map(|s| check_pair(tuple, s, full ^ s, Levels(1, r - 1), Levels(0, r - 1)))
}

/// The pair ({1}, {2..r}): zero on T_1 but the top class on the full product.
pub fn omega_nontriviality(tuple: &SphereTuple) -> Option<Witness> {
    let r = tuple.r();
    check_pair(tuple, 1, tuple.full_mask() ^ 1, Levels(1, r), Levels(0, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: &[u32]) -> SphereTuple {
        SphereTuple::new(d.to_vec()).unwrap()
    }

    #[test]
    fn ring_sizes() {
        assert_eq!(ring(1, 3, &t(&[1, 1, 1, 1])).unwrap().rank(), 10);
        assert_eq!(ring(0, 3, &t(&[1, 1, 1, 1])).unwrap().rank(), 11);
        let two = ring(0, 1, &t(&[3, 5])).unwrap();
        assert_eq!(two.rank(), 1);
        assert_eq!(two.betti(), BTreeMap::from([(8, 1)]));
        assert!(matches!(ring(2, 2, &t(&[1, 1, 1])), Err(Error::BadLevels { .. })));
        assert!(matches!(ring(0, 4, &t(&[1, 1, 1])), Err(Error::BadLevels { .. })));
    }

    #[test]
    fn cup_examples() {
        let tp = t(&[2, 3, 1, 1]);
        let s = tp.class(tp.mask_of(&[1, 2]).unwrap(), 1);
        let u = tp.class(tp.mask_of(&[3, 4]).unwrap(), 1);
        let full = ring(0, 3, &tp).unwrap().cup(std::slice::from_ref(&s), std::slice::from_ref(&u)).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].subset(), &[1, 2, 3, 4]);
        assert_eq!(full[0].coefficient().abs(), 1);
        assert!(ring(1, 3, &tp).unwrap().cup(std::slice::from_ref(&s), &[u]).unwrap().is_empty());
        assert!(ring(0, 3, &tp).unwrap().cup(std::slice::from_ref(&s), std::slice::from_ref(&s)).unwrap().is_empty());
        let single = tp.class(1, 1);
        assert!(matches!(
            ring(0, 3, &tp).unwrap().cup(std::slice::from_ref(&single), std::slice::from_ref(&single)),
            Err(Error::NotInRing(_))
        ));
    }

    #[test]
    fn koszul_odd_classes_anticommute() {
        let tp = t(&[1, 3]);
        assert_eq!(koszul_sign(&tp, 1, 2), 1);
        assert_eq!(koszul_sign(&tp, 2, 1), -1);
        let tp = t(&[2, 3]);
        assert_eq!(koszul_sign(&tp, 2, 1), 1);
    }

    #[test]
    fn obstruction_search() {
        let w = retraction_obstruction(&t(&[2, 2, 2, 2])).unwrap();
        assert_eq!((w.s.as_slice(), w.t.as_slice()), (&[1, 2][..], &[3, 4][..]));
        assert!(retraction_obstruction(&t(&[1, 2, 3])).is_none());
        assert!(retraction_obstruction(&t(&[1, 2])).is_none());
        let w = omega_nontriviality(&t(&[1, 2])).unwrap();
        assert_eq!((w.s.clone(), w.t.clone()), (vec![1], vec![2]));
        assert_eq!(w.to_string(), "witness ({1},{2}): x_S x_T = 0 in H*(T_1/T_2), = x{1,2} in H*(T_0/T_2)");
    }
}
