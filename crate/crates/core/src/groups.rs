//! Finitely generated abelian groups presented as `Z^f + Z_{o_1} + ... + Z_{o_n}`
//! over a named generator basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::space::TableKey;

/// Group order; `None` is infinite.
pub type Order = Option<u64>;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

fn modulo(c: i64, o: u64) -> i64 {
    if o == 0 {
        c
    } else {
        c.rem_euclid(o as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Full,
    /// Only the listed primary components are presented.
    Primes(Vec<u64>),
}

impl Completeness {
    pub fn is_full(&self) -> bool {
        matches!(self, Completeness::Full)
    }

    /// Whether every prime divisor of `n` is covered.
    pub fn covers(&self, n: u64) -> bool {
        match self {
            Completeness::Full => true,
            Completeness::Primes(ps) => {
                if n == 0 {
                    return false;
                }
                let mut m = n;
                for &p in ps {
                    while m.is_multiple_of(p) {
                        m /= p;
                    }
                }
                m == 1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableGen {
    pub expr: Expr,
    /// 0 encodes a free summand.
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    pub key: TableKey,
    pub completeness: Completeness,
    pub generators: Vec<TableGen>,
}

impl GroupTable {
    pub fn new(key: TableKey, completeness: Completeness, generators: Vec<TableGen>) -> Self {
        GroupTable { key, completeness, generators }
    }

    pub fn trivial(key: TableKey) -> Self {
        GroupTable::new(key, Completeness::Full, Vec::new())
    }

    pub fn orders(&self) -> Vec<u64> {
        self.generators.iter().map(|g| g.order).collect()
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Group order, `None` if a free summand is present.
    pub fn order(&self) -> Order {
        self.generators.iter().try_fold(1u64, |acc, g| (g.order != 0).then(|| acc * g.order))
    }

    pub fn exponent(&self) -> u64 {
        self.generators.iter().fold(1, |acc, g| lcm(acc, g.order))
    }

    pub fn element(&self, coeffs: Vec<i64>) -> GroupElement {
        assert_eq!(coeffs.len(), self.rank(), "coefficient vector length for {}", self.key);
        GroupElement::new(self.key, coeffs, self.orders())
    }

    pub fn zero(&self) -> GroupElement {
        self.element(vec![0; self.rank()])
    }

    pub fn basis_element(&self, i: usize) -> GroupElement {
        let mut c = vec![0; self.rank()];
        c[i] = 1;
        self.element(c)
    }

    pub fn to_expr(&self, e: &GroupElement) -> Expr {
        let terms: Vec<Expr> = e
            .coeffs
            .iter()
            .zip(&self.generators)
            .filter(|(c, _)| **c != 0)
            .map(|(&c, g)| if c == 1 { g.expr.clone() } else { Expr::scalar(c, g.expr.clone()) })
            .collect();
        Expr::sum(terms)
    }

    pub fn render(&self, e: &GroupElement) -> String {
        self.to_expr(e).to_string()
    }

    /// All elements of a finite table. Intended for small groups.
    pub fn enumerate(&self) -> Option<Vec<GroupElement>> {
        let orders = self.orders();
        if orders.contains(&0) {
            return None;
        }
        let mut out = vec![self.zero()];
        for (i, &o) in orders.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * o as usize);
            for e in &out {
                for c in 0..o as i64 {
                    let mut v = e.coeffs.clone();
                    v[i] = c;
                    next.push(self.element(v));
                }
            }
            out = next;
        }
        Some(out)
    }
}

/// An element of `pi_k(X)` as a coefficient vector, reduced modulo the finite orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub table: TableKey,
    pub coeffs: Vec<i64>,
    pub orders: Vec<u64>,
}

impl GroupElement {
    pub fn new(table: TableKey, coeffs: Vec<i64>, orders: Vec<u64>) -> Self {
        let coeffs = coeffs.iter().zip(&orders).map(|(&c, &o)| modulo(c, o)).collect();
        GroupElement { table, coeffs, orders }
    }

    /// Zero of a group that has no presented generators.
    pub fn zero_in(table: TableKey) -> Self {
        GroupElement { table, coeffs: Vec::new(), orders: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, n: i64) -> GroupElement {
        GroupElement::new(self.table, self.coeffs.iter().map(|c| c * n).collect(), self.orders.clone())
    }

    pub fn neg(&self) -> GroupElement {
        self.scale(-1)
    }

    fn check(&self, other: &GroupElement) -> Result<()> {
        if self.table != other.table || self.orders != other.orders {
            return Err(Error::TableMismatch(self.table.to_string(), other.table.to_string()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement> {
        add(self, &other.neg())
    }
}

pub fn add(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    a.check(b)?;
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
    Ok(GroupElement::new(a.table, coeffs, a.orders.clone()))
}

/// Least `n > 0` with `n e = 0`; `None` for infinite order.
pub fn order_of(e: &GroupElement) -> Order {
    let mut n = 1u64;
    for (&c, &o) in e.coeffs.iter().zip(&e.orders) {
        if c == 0 {
            continue;
        }
        if o == 0 {
            return None;
        }
        n = lcm(n, o / gcd(o, c.unsigned_abs()));
    }
    Some(n)
}

/// Hermite normal form of the row lattice, rows with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`.
#[allow(clippy::needless_range_loop)]
fn hermite(mut rows: Vec<Vec<i128>>, ncols: usize) -> Vec<Vec<i128>> {
    let mut r = 0;
    for c in 0..ncols {
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c] != 0 {
                    let q = rows[i][c].div_euclid(rows[r][c]);
                    for j in 0..ncols {
                        rows[i][j] -= q * rows[r][j];
                    }
                    if rows[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && rows[r][c] != 0 {
            if rows[r][c] < 0 {
                rows[r].iter_mut().for_each(|x| *x = -*x);
            }
            let piv = rows[r][c];
            for i in 0..r {
                let q = rows[i][c].div_euclid(piv);
                if q != 0 {
                    for j in 0..ncols {
                        rows[i][j] -= q * rows[r][j];
                    }
                }
            }
            r += 1;
        }
    }
    rows.truncate(r);
    rows
}

/// Subgroup generated by finitely many elements of one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    pub table: TableKey,
    pub orders: Vec<u64>,
    pub generators: Vec<GroupElement>,
    /// Nonzero rows of the Hermite form, reduced mod the orders.
    pub canonical_basis: Vec<GroupElement>,
    pub order: Order,
    #[serde(skip)]
    lattice: Vec<Vec<i128>>,
}

impl Subgroup {
    pub fn trivial(table: TableKey, orders: Vec<u64>) -> Subgroup {
        subgroup_in(table, orders, Vec::new()).expect("no elements to mismatch")
    }

    /// Canonical representative of `x + H`.
    pub fn reduce(&self, x: &GroupElement) -> Result<GroupElement> {
        if x.table != self.table || x.orders != self.orders {
            return Err(Error::TableMismatch(x.table.to_string(), self.table.to_string()));
        }
        let mut v: Vec<i128> = x.coeffs.iter().map(|&c| c as i128).collect();
        for row in &self.lattice {
            let c = row.iter().position(|&e| e != 0).unwrap();
            let q = v[c].div_euclid(row[c]);
            if q != 0 {
                for j in 0..v.len() {
                    v[j] -= q * row[j];
                }
            }
        }
        Ok(GroupElement::new(self.table, v.into_iter().map(|c| c as i64).collect(), self.orders.clone()))
    }

    pub fn contains(&self, x: &GroupElement) -> Result<bool> {
        Ok(self.reduce(x)?.is_zero())
    }

    /// Same subset of the ambient group.
    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.table == other.table && self.orders == other.orders && self.lattice == other.lattice
    }
}

fn subgroup_in(table: TableKey, orders: Vec<u64>, elems: Vec<GroupElement>) -> Result<Subgroup> {
    for e in &elems {
        if e.table != table || e.orders != orders {
            return Err(Error::TableMismatch(e.table.to_string(), table.to_string()));
        }
    }
    let n = orders.len();
    let mut rows: Vec<Vec<i128>> = elems.iter().map(|e| e.coeffs.iter().map(|&c| c as i128).collect()).collect();
    for (i, &o) in orders.iter().enumerate() {
        if o != 0 {
            let mut r = vec![0; n];
            r[i] = o as i128;
            rows.push(r);
        }
    }
    let lattice = hermite(rows, n);
    let infinite = elems.iter().any(|e| e.coeffs.iter().zip(&orders).any(|(&c, &o)| o == 0 && c != 0));
    let order = if infinite {
        None
    } else {
        // Torsion columns carry full-rank pivots; the index is prod(o) / prod(pivots).
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for row in &lattice {
            let c = row.iter().position(|&e| e != 0).unwrap();
            if orders[c] != 0 {
                den *= row[c] as u128;
            }
        }
        for &o in &orders {
            if o != 0 {
                num *= o as u128;
            }
        }
        Some((num / den) as u64)
    };
    let canonical_basis = lattice
        .iter()
        .map(|r| GroupElement::new(table, r.iter().map(|&c| c as i64).collect(), orders.clone()))
        .filter(|e| !e.is_zero())
        .collect();
    Ok(Subgroup { table, orders, generators: elems, canonical_basis, order, lattice })
}

/// Subgroup generated by `elems` inside `table`.
pub fn subgroup_generated(table: &GroupTable, elems: Vec<GroupElement>) -> Result<Subgroup> {
    subgroup_in(table.key, table.orders(), elems)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coset {
    pub representative: GroupElement,
    pub subgroup: Subgroup,
}

impl Coset {
    pub fn new(representative: GroupElement, subgroup: Subgroup) -> Result<Coset> {
        let representative = subgroup.reduce(&representative)?;
        Ok(Coset { representative, subgroup })
    }
}

pub fn coset_eq(c1: &Coset, c2: &Coset) -> Result<bool> {
    if !c1.subgroup.same_as(&c2.subgroup) {
        return Err(Error::SubgroupMismatch);
    }
    c1.subgroup.contains(&c1.representative.sub(&c2.representative)?)
}
