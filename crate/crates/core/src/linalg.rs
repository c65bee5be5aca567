//! Exact sparse elimination.
//!
//! Vectors are inserted one at a time into an [`Echelon`]. Each stored row
//! has a distinct leading index, and every row remembers which inserted
//! vectors it was built from. A vector that reduces to zero therefore yields
//! an explicit linear dependency, which is how kernels and particular
//! solutions are read off.
//!
//! Over F_p rows are kept monic. Over the rationals rows are integer vectors
//! reduced fraction-free (cross-multiplication followed by content removal),
//! so no rational normalization happens inside the elimination loop.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::field::{inverse_mod, Field, Scalar};

/// Sparse vector: strictly increasing indices, nonzero values.
pub type SparseVec = Vec<(usize, Scalar)>;

pub fn sparse_from_dense(v: &[Scalar]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

#[derive(Clone, Debug)]
struct Row<T> {
    main: Vec<(usize, T)>,
    track: Vec<(usize, T)>,
}

trait Backend {
    type Elem: Clone;
    /// Converts to backend form; the result is `multiplier * v`.
    fn convert(&self, v: &[(usize, Scalar)]) -> (Vec<(usize, Self::Elem)>, Self::Elem);
    /// Cancels the common leading entry of `target` against `pivot`.
    fn eliminate(&self, target: &mut Row<Self::Elem>, pivot: &Row<Self::Elem>);
    fn normalize(&self, row: &mut Row<Self::Elem>);
    fn to_scalar(&self, e: &Self::Elem) -> Scalar;
}

/// `a*x + b*y` on sparse vectors, dropping zeros.
fn combine<T, F, Z>(x: &[(usize, T)], y: &[(usize, T)], mut f: F, is_zero: Z) -> Vec<(usize, T)>
where
    F: FnMut(Option<&T>, Option<&T>) -> T,
    Z: Fn(&T) -> bool,
{
    let mut out = Vec::with_capacity(x.len().max(y.len()));
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let (idx, v) = match (x.get(i), y.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                i += 1;
                j += 1;
                (a.0, f(Some(&a.1), Some(&b.1)))
            }
            (Some(a), Some(b)) if a.0 < b.0 => {
                i += 1;
                (a.0, f(Some(&a.1), None))
            }
            (Some(a), None) => {
                i += 1;
                (a.0, f(Some(&a.1), None))
            }
            (_, Some(b)) => {
                j += 1;
                (b.0, f(None, Some(&b.1)))
            }
            (None, None) => unreachable!(),
        };
        if !is_zero(&v) {
            out.push((idx, v));
        }
    }
    out
}

struct Modular(u64);

impl Backend for Modular {
    type Elem = u64;

    fn convert(&self, v: &[(usize, Scalar)]) -> (Vec<(usize, u64)>, u64) {
        let out = v
            .iter()
            .filter_map(|(i, s)| match s {
                Scalar::Modular { value, .. } if *value != 0 => Some((*i, *value)),
                Scalar::Modular { .. } => None,
                Scalar::Rational(_) => panic!("rational scalar in F_p elimination"),
            })
            .collect();
        (out, 1)
    }

    fn eliminate(&self, target: &mut Row<u64>, pivot: &Row<u64>) {
        let p = self.0;
        let c = target.main[0].1;
        let neg_c = p - c;
        let step = |a: Option<&u64>, b: Option<&u64>| {
            let a = a.copied().unwrap_or(0) as u128;
            let b = b.copied().unwrap_or(0) as u128;
            ((a + neg_c as u128 * b) % p as u128) as u64
        };
        target.main = combine(&target.main, &pivot.main, step, |v| *v == 0);
        target.track = combine(&target.track, &pivot.track, step, |v| *v == 0);
    }

    fn normalize(&self, row: &mut Row<u64>) {
        let p = self.0;
        let Some(&(_, lead)) = row.main.first() else {
            return;
        };
        if lead == 1 {
            return;
        }
        let inv = inverse_mod(lead, p).expect("nonzero residue is invertible") as u128;
        for (_, v) in row.main.iter_mut().chain(row.track.iter_mut()) {
            *v = ((*v as u128 * inv) % p as u128) as u64;
        }
    }

    fn to_scalar(&self, e: &u64) -> Scalar {
        Scalar::Modular {
            value: *e,
            modulus: self.0,
        }
    }
}

struct Integral;

impl Backend for Integral {
    type Elem = BigInt;

    fn convert(&self, v: &[(usize, Scalar)]) -> (Vec<(usize, BigInt)>, BigInt) {
        let fracs: Vec<(usize, BigInt, BigInt)> = v
            .iter()
            .filter(|(_, s)| !s.is_zero())
            .map(|(i, s)| match s {
                Scalar::Rational(r) => (*i, r.numer().clone(), r.denom().clone()),
                Scalar::Modular { .. } => panic!("modular scalar in rational elimination"),
            })
            .collect();
        let lcm = fracs
            .iter()
            .fold(BigInt::one(), |acc, (_, _, d)| acc.lcm(d));
        let out = fracs
            .into_iter()
            .map(|(i, n, d)| (i, n * (&lcm / d)))
            .collect();
        (out, lcm)
    }

    fn eliminate(&self, target: &mut Row<BigInt>, pivot: &Row<BigInt>) {
        let t = &target.main[0].1;
        let p = &pivot.main[0].1;
        let g = t.gcd(p);
        let tf = p / &g;
        let pf = t / &g;
        let step = |a: Option<&BigInt>, b: Option<&BigInt>| match (a, b) {
            (Some(a), Some(b)) => a * &tf - b * &pf,
            (Some(a), None) => a * &tf,
            (None, Some(b)) => -(b * &pf),
            (None, None) => BigInt::zero(),
        };
        target.main = combine(&target.main, &pivot.main, step, BigInt::is_zero);
        target.track = combine(&target.track, &pivot.track, step, BigInt::is_zero);
        self.normalize(target);
    }

    fn normalize(&self, row: &mut Row<BigInt>) {
        let mut g = BigInt::zero();
        for (_, v) in row.main.iter().chain(row.track.iter()) {
            g = g.gcd(v);
            if g.is_one() {
                break;
            }
        }
        let negate = row
            .main
            .first()
            .or(row.track.first())
            .is_some_and(|(_, v)| v.is_negative());
        if g.is_zero() || (g.is_one() && !negate) {
            return;
        }
        if negate {
            g = -g;
        }
        for (_, v) in row.main.iter_mut().chain(row.track.iter_mut()) {
            *v = &*v / &g;
        }
    }

    fn to_scalar(&self, e: &BigInt) -> Scalar {
        Field::Rationals.from_bigint(e)
    }
}

struct EchelonImpl<B: Backend> {
    backend: B,
    rows: HashMap<usize, Row<B::Elem>>,
}

impl<B: Backend> EchelonImpl<B> {
    fn reduce(&self, row: &mut Row<B::Elem>) {
        while let Some(&(lead, _)) = row.main.first() {
            match self.rows.get(&lead) {
                Some(pivot) => self.backend.eliminate(row, pivot),
                None => break,
            }
        }
    }

    fn insert(&mut self, v: &[(usize, Scalar)], tag: Option<usize>) -> Option<SparseVec> {
        let (main, multiplier) = self.backend.convert(v);
        let mut row = Row {
            main,
            track: tag.map(|t| vec![(t, multiplier)]).unwrap_or_default(),
        };
        self.reduce(&mut row);
        match row.main.first() {
            Some(&(lead, _)) => {
                self.backend.normalize(&mut row);
                self.rows.insert(lead, row);
                None
            }
            None => Some(
                row.track
                    .iter()
                    .map(|(i, e)| (*i, self.backend.to_scalar(e)))
                    .collect(),
            ),
        }
    }

    fn contains(&self, v: &[(usize, Scalar)]) -> bool {
        let mut row = Row {
            main: self.backend.convert(v).0,
            track: Vec::new(),
        };
        self.reduce(&mut row);
        row.main.is_empty()
    }
}

enum Inner {
    Modular(EchelonImpl<Modular>),
    Integral(EchelonImpl<Integral>),
}

/// Incremental row-echelon form over the run's field.
pub struct Echelon {
    inner: Inner,
}

impl Echelon {
    pub fn new(field: Field) -> Self {
        let inner = match field {
            Field::Rationals => Inner::Integral(EchelonImpl {
                backend: Integral,
                rows: HashMap::new(),
            }),
            Field::Prime(p) => Inner::Modular(EchelonImpl {
                backend: Modular(p),
                rows: HashMap::new(),
            }),
        };
        Echelon { inner }
    }

    pub fn rank(&self) -> usize {
        match &self.inner {
            Inner::Modular(e) => e.rows.len(),
            Inner::Integral(e) => e.rows.len(),
        }
    }

    /// Inserts `v`; returns true if it was independent of the rows so far.
    pub fn insert(&mut self, v: &[(usize, Scalar)]) -> bool {
        self.insert_tagged(v, None).is_none()
    }

    /// Inserts `v` labelled `tag`. If `v` is dependent, returns the
    /// dependency as a sparse combination of tags that sums to zero; the
    /// coefficient of `tag` itself is nonzero. Only rows inserted with tags
    /// contribute to the reported combination.
    pub fn insert_tagged(&mut self, v: &[(usize, Scalar)], tag: Option<usize>) -> Option<SparseVec> {
        match &mut self.inner {
            Inner::Modular(e) => e.insert(v, tag),
            Inner::Integral(e) => e.insert(v, tag),
        }
    }

    /// Whether `v` lies in the span of the inserted vectors.
    pub fn contains(&self, v: &[(usize, Scalar)]) -> bool {
        match &self.inner {
            Inner::Modular(e) => e.contains(v),
            Inner::Integral(e) => e.contains(v),
        }
    }
}

/// Rank of a set of sparse vectors.
pub fn rank(field: Field, vectors: &[SparseVec]) -> usize {
    let mut e = Echelon::new(field);
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

fn densify(field: Field, n: usize, v: &[(usize, Scalar)]) -> Vec<Scalar> {
    let mut out = vec![field.zero(); n];
    for (i, c) in v {
        out[*i] = c.clone();
    }
    out
}

/// Kernel of the linear map sending unknown `j` to `columns[j]`.
///
/// Columns are processed in order; each column that depends on earlier ones
/// contributes one basis vector, normalized so that its own coefficient is 1.
pub fn kernel(field: Field, columns: &[SparseVec]) -> Vec<Vec<Scalar>> {
    let mut e = Echelon::new(field);
    let mut basis = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if let Some(dep) = e.insert_tagged(col, Some(j)) {
            let own = dep
                .iter()
                .find(|(i, _)| *i == j)
                .map(|(_, c)| c.clone())
                .expect("dependency involves the new column");
            let inv = own.inv().expect("nonzero");
            let scaled: SparseVec = dep.iter().map(|(i, c)| (*i, c * &inv)).collect();
            basis.push(densify(field, columns.len(), &scaled));
        }
    }
    basis
}

/// Solution of `sum_j x_j columns[j] = rhs` with every non-pivot unknown
/// set to zero, or `None` if the system is inconsistent.
pub fn solve(field: Field, columns: &[SparseVec], rhs: &[(usize, Scalar)]) -> Option<Vec<Scalar>> {
    let mut e = Echelon::new(field);
    for (j, col) in columns.iter().enumerate() {
        // Dependent columns are dropped: their unknowns stay zero.
        let _ = e.insert_tagged(col, Some(j));
    }
    let n = columns.len();
    if rhs.iter().all(|(_, c)| c.is_zero()) {
        return Some(vec![field.zero(); n]);
    }
    let dep = e.insert_tagged(rhs, Some(n))?;
    let own = dep.iter().find(|(i, _)| *i == n).map(|(_, c)| c.clone())?;
    let scale = (-own).inv().ok()?;
    let mut x = vec![field.zero(); n];
    for (i, c) in dep {
        if i < n {
            x[i] = &c * &scale;
        }
    }
    Some(x)
}
