//! Degree-bounded ground truth for Jacobian ideals: Macaulay-matrix ranks,
//! Hilbert functions, syzygy kernels, radical membership and a search for
//! Saito matrices among minimal syzygy generators.

use std::collections::HashMap;

use serde::Serialize;

use crate::field::{Field, Scalar};
use crate::linalg::{kernel, Echelon, SparseVec};
use crate::poly::{Monomial, Poly, Var};

/// Number of monomials of degree `t` in three variables.
pub fn monomial_count(t: i64) -> usize {
    if t < 0 {
        0
    } else {
        ((t + 1) * (t + 2) / 2) as usize
    }
}

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

/// Coefficient of z^t in N(z) / (1 - z)^k, with N given as (exponent, coefficient) pairs.
pub fn series_coefficient(numerator: &[(i64, i64)], k: i64, t: i64) -> i64 {
    numerator
        .iter()
        .map(|&(j, n)| n * binomial(t - j + k - 1, k - 1))
        .sum()
}

/// Coefficient vector of a degree-`t` form in the monomial basis of degree `t`.
pub fn coefficient_vector(p: &Poly, offset: usize) -> SparseVec {
    let mut v: SparseVec = p
        .terms()
        .map(|(m, c)| (offset + m.index_in_degree(3), c.clone()))
        .collect();
    v.sort_by_key(|(i, _)| *i);
    v
}

fn form_from_slice(field: Field, t: u32, coeffs: &[Scalar]) -> Poly {
    Poly::from_terms(
        field,
        Monomial::of_degree(t, 3)
            .into_iter()
            .zip(coeffs.iter().cloned()),
    )
}

/// Columns of the Macaulay matrix of `gens` in degree `t`: one column per
/// (generator, monomial multiplier) pair.
pub fn macaulay_columns(gens: &[Poly], t: u32) -> Vec<SparseVec> {
    let mut cols = Vec::new();
    for g in gens {
        let Some(dg) = g.degree() else { continue };
        if dg > t {
            continue;
        }
        for m in Monomial::of_degree(t - dg, 3) {
            cols.push(coefficient_vector(&g.mul_monomial(&m), 0));
        }
    }
    cols
}

fn field_of(gens: &[Poly]) -> Field {
    gens.first().map(|g| g.field()).unwrap_or(Field::Rationals)
}

/// Dimension of the degree-`t` piece of the ideal generated by `gens`.
pub fn ideal_dim(gens: &[Poly], t: u32) -> usize {
    let field = field_of(gens);
    let mut e = Echelon::new(field);
    for c in macaulay_columns(gens, t) {
        e.insert(&c);
    }
    e.rank()
}

pub fn hilbert_function_quotient(gens: &[Poly], t: u32) -> usize {
    monomial_count(t as i64) - ideal_dim(gens, t)
}

/// The Jacobian ideal (F_x, F_y, F_z, F).
pub fn jacobian_generators(f: &Poly) -> Vec<Poly> {
    let [fx, fy, fz] = f.gradient();
    vec![fx, fy, fz, f.clone()]
}

/// A syzygy (a, b, c, e) with a F_x + b F_y + c F_z + e F = 0.
pub type Syzygy = [Poly; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct SyzygyBasis {
    pub degree: u32,
    pub basis: Vec<Syzygy>,
}

/// Layout of the unknowns (a, b, c, e) of a degree-`t` syzygy.
struct SyzygyLayout {
    t: u32,
    block: usize,
    e_len: usize,
}

impl SyzygyLayout {
    fn new(t: u32) -> Self {
        SyzygyLayout {
            t,
            block: monomial_count(t as i64),
            e_len: monomial_count(t as i64 - 1),
        }
    }

    fn len(&self) -> usize {
        3 * self.block + self.e_len
    }

    fn flatten(&self, s: &Syzygy) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, p) in s.iter().enumerate() {
            out.extend(coefficient_vector(p, k * self.block));
        }
        out
    }

    fn unflatten(&self, field: Field, v: &[Scalar]) -> Syzygy {
        let b = self.block;
        let e = if self.t == 0 {
            Poly::zero(field)
        } else {
            form_from_slice(field, self.t - 1, &v[3 * b..])
        };
        [
            form_from_slice(field, self.t, &v[..b]),
            form_from_slice(field, self.t, &v[b..2 * b]),
            form_from_slice(field, self.t, &v[2 * b..3 * b]),
            e,
        ]
    }
}

/// Kernel of (a, b, c, e) ↦ a F_x + b F_y + c F_z + e F in degree `t`.
pub fn syzygy_kernel(f: &Poly, t: u32) -> SyzygyBasis {
    let field = f.field();
    let gens = jacobian_generators(f);
    let layout = SyzygyLayout::new(t);
    let mut columns = Vec::with_capacity(layout.len());
    for (k, g) in gens.iter().enumerate() {
        let deg = if k < 3 { t } else if t == 0 { continue } else { t - 1 };
        for m in Monomial::of_degree(deg, 3) {
            columns.push(coefficient_vector(&g.mul_monomial(&m), 0));
        }
    }
    let basis = kernel(field, &columns)
        .iter()
        .map(|v| layout.unflatten(field, v))
        .collect();
    SyzygyBasis { degree: t, basis }
}

/// Whether a syzygy of degree `t` lies in the span of `basis`.
pub fn syzygy_in_span(basis: &SyzygyBasis, s: &Syzygy) -> bool {
    let Some(first) = basis.basis.first() else {
        return s.iter().all(Poly::is_zero);
    };
    let layout = SyzygyLayout::new(basis.degree);
    let mut e = Echelon::new(first[0].field());
    for b in &basis.basis {
        e.insert(&layout.flatten(b));
    }
    e.contains(&layout.flatten(s))
}

/// Applies a syzygy to (F_x, F_y, F_z, F).
pub fn apply_syzygy(f: &Poly, s: &Syzygy) -> Poly {
    jacobian_generators(f)
        .iter()
        .zip(s.iter())
        .fold(Poly::zero(f.field()), |acc, (g, c)| &acc + &(g * c))
}

/// Hilbert-series numerator of S/J(F) predicted by the resolution shape.
pub fn predicted_numerator(d: u32) -> Vec<(i64, i64)> {
    let v = (d / 2) as i64;
    if d % 2 == 1 {
        vec![(0, 1), (2 * v, -3), (3 * v, 2)]
    } else {
        vec![(0, 1), (2 * v - 1, -3), (3 * v - 2, 1), (3 * v - 1, 1)]
    }
}

/// Stabilized Hilbert value of S/J(F): 3v² for odd d, 3v² − 3v + 1 for even d.
pub fn expected_multiplicity(d: u32) -> i64 {
    let v = (d / 2) as i64;
    if d % 2 == 1 {
        3 * v * v
    } else {
        3 * v * v - 3 * v + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertRow {
    pub t: u32,
    pub computed: usize,
    pub predicted: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolutionReport {
    pub pass: bool,
    pub t_max: u32,
    pub first_mismatch: Option<u32>,
    pub stabilized: Option<usize>,
    pub expected_multiplicity: i64,
    pub table: Vec<HilbertRow>,
}

/// Compares HF(S/J(F), t) with the resolution-implied series for t ≤ t_max.
pub fn resolution_check(f: &Poly, d: u32, t_max: u32) -> ResolutionReport {
    let gens = jacobian_generators(f);
    let num = predicted_numerator(d);
    let table: Vec<HilbertRow> = (0..=t_max)
        .map(|t| HilbertRow {
            t,
            computed: hilbert_function_quotient(&gens, t),
            predicted: series_coefficient(&num, 3, t as i64),
        })
        .collect();
    let first_mismatch = table
        .iter()
        .find(|r| r.computed as i64 != r.predicted)
        .map(|r| r.t);
    let stabilized = match table.as_slice() {
        [.., a, b] if a.computed == b.computed => Some(b.computed),
        _ => None,
    };
    let expected = expected_multiplicity(d);
    ResolutionReport {
        pass: first_mismatch.is_none() && stabilized == Some(expected as usize),
        t_max,
        first_mismatch,
        stabilized,
        expected_multiplicity: expected,
        table,
    }
}

/// Hilbert function table as CSV.
pub fn hilbert_csv(report: &ResolutionReport) -> String {
    let mut out = String::from("t,computed,predicted\n");
    for r in &report.table {
        out.push_str(&format!("{},{},{}\n", r.t, r.computed, r.predicted));
    }
    out
}

/// Jacobian ideal with echelon forms cached per degree.
pub struct JacobianIdeal {
    gens: Vec<Poly>,
    cache: HashMap<u32, Echelon>,
}

impl JacobianIdeal {
    pub fn new(f: &Poly) -> Self {
        JacobianIdeal {
            gens: jacobian_generators(f),
            cache: HashMap::new(),
        }
    }

    fn echelon(&mut self, t: u32) -> &Echelon {
        let gens = &self.gens;
        self.cache.entry(t).or_insert_with(|| {
            let mut e = Echelon::new(field_of(gens));
            for c in macaulay_columns(gens, t) {
                e.insert(&c);
            }
            e
        })
    }

    /// Membership of a homogeneous form in J(F).
    pub fn contains(&mut self, p: &Poly) -> bool {
        match p.homogeneous_degree() {
            Ok(None) => true,
            Ok(Some(t)) => {
                let v = coefficient_vector(p, 0);
                self.echelon(t).contains(&v)
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PointSupportStatus {
    Certified,
    BoundTooSmall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointSupportReport {
    pub status: PointSupportStatus,
    pub t_bound: u32,
    pub n_x: Option<u32>,
    pub n_y: Option<u32>,
}

impl PointSupportReport {
    pub fn certified(&self) -> bool {
        self.status == PointSupportStatus::Certified
    }
}

/// Searches the least N ≤ t_bound with x^N ∈ J(F), and likewise for y^N.
pub fn point_support_check(f: &Poly, t_bound: u32) -> PointSupportReport {
    let field = f.field();
    let mut ideal = JacobianIdeal::new(f);
    let mut first = |v: Var| {
        (1..=t_bound).find(|&n| {
            let mut m = Monomial::new(0, 0, 0);
            m.0[v.index()] = n;
            ideal.contains(&Poly::monomial(field, m))
        })
    };
    let n_x = first(Var::X);
    let n_y = first(Var::Y);
    let status = if n_x.is_some() && n_y.is_some() {
        PointSupportStatus::Certified
    } else {
        PointSupportStatus::BoundTooSmall
    };
    PointSupportReport {
        status,
        t_bound,
        n_x,
        n_y,
    }
}

/// Degree-graded minimal generators of the syzygy module of (F_x, F_y, F_z, F).
pub struct SyzygyGenerators {
    pub generators: Vec<(u32, Syzygy)>,
}

impl SyzygyGenerators {
    /// Collects new generators degree by degree up to `bound`, stopping early
    /// once `stop` returns true.
    pub fn compute(f: &Poly, bound: u32, mut stop: impl FnMut(&[(u32, Syzygy)]) -> bool) -> Self {
        let field = f.field();
        let mut generators: Vec<(u32, Syzygy)> = Vec::new();
        for t in 1..=bound {
            let layout = SyzygyLayout::new(t);
            let mut old = Echelon::new(field);
            for (s, g) in &generators {
                for m in Monomial::of_degree(t - s, 3) {
                    let shifted = g.clone().map(|p| p.mul_monomial(&m));
                    old.insert(&layout.flatten(&shifted));
                }
            }
            let before = generators.len();
            for s in syzygy_kernel(f, t).basis {
                if old.insert(&layout.flatten(&s)) {
                    generators.push((t, s));
                }
            }
            if generators.len() > before && stop(&generators) {
                break;
            }
        }
        SyzygyGenerators { generators }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorCount {
    pub degree: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub found: bool,
    pub degree_bound: u32,
    pub column_degrees: Option<[u32; 3]>,
    pub unit_c: Option<Scalar>,
    pub generators: Vec<GeneratorCount>,
    #[serde(skip)]
    pub matrix: Option<[[Poly; 3]; 3]>,
    #[serde(skip)]
    pub quotients: Option<[Poly; 3]>,
}

/// Unit c with p = c·f, if any.
pub fn unit_multiple(p: &Poly, f: &Poly) -> Option<Scalar> {
    let (m, lc) = f.leading_term()?;
    let c = p.coeff(m).checked_div(lc).ok()?;
    if c.is_zero() || p != &f.scale(&c) {
        return None;
    }
    Some(c)
}

/// Columns given as (a, b, c) triples, assembled into rows.
pub fn matrix_from_columns(cols: [&[Poly; 3]; 3]) -> [[Poly; 3]; 3] {
    std::array::from_fn(|r| std::array::from_fn(|c| cols[c][r].clone()))
}

fn column(s: &Syzygy) -> [Poly; 3] {
    [s[0].clone(), s[1].clone(), s[2].clone()]
}

/// Tries to assemble a Saito matrix out of minimal syzygy generators of
/// degree ≤ `degree_bound`: three generators whose degrees sum to deg F and
/// whose determinant is a nonzero multiple of F.
pub fn freeness_probe(f: &Poly, degree_bound: u32) -> ProbeReport {
    let d = f.degree().unwrap_or(0);
    let mut found: Option<([usize; 3], Scalar)> = None;
    let gens = SyzygyGenerators::compute(f, degree_bound, |gs| {
        found = find_triple(f, d, gs);
        found.is_some()
    });
    let mut counts: Vec<GeneratorCount> = Vec::new();
    for (t, _) in &gens.generators {
        match counts.last_mut() {
            Some(c) if c.degree == *t => c.count += 1,
            _ => counts.push(GeneratorCount {
                degree: *t,
                count: 1,
            }),
        }
    }
    match found {
        Some((idx, c)) => {
            let cols = idx.map(|i| column(&gens.generators[i].1));
            let quotients = idx.map(|i| -&gens.generators[i].1[3]);
            ProbeReport {
                found: true,
                degree_bound,
                column_degrees: Some(idx.map(|i| gens.generators[i].0)),
                unit_c: Some(c),
                generators: counts,
                matrix: Some(matrix_from_columns([&cols[0], &cols[1], &cols[2]])),
                quotients: Some(quotients),
            }
        }
        None => ProbeReport {
            found: false,
            degree_bound,
            column_degrees: None,
            unit_c: None,
            generators: counts,
            matrix: None,
            quotients: None,
        },
    }
}

/// Only triples involving the newest generator are tried, since earlier
/// triples were rejected on previous calls.
fn find_triple(f: &Poly, d: u32, gens: &[(u32, Syzygy)]) -> Option<([usize; 3], Scalar)> {
    let n = gens.len();
    let newest_degree = gens.last()?.0;
    for k in 0..n {
        for j in 0..k {
            for i in 0..j {
                if gens[k].0 != newest_degree {
                    continue;
                }
                if gens[i].0 + gens[j].0 + gens[k].0 != d {
                    continue;
                }
                let cols = [column(&gens[i].1), column(&gens[j].1), column(&gens[k].1)];
                let det = Poly::det3(&matrix_from_columns([&cols[0], &cols[1], &cols[2]]));
                if let Some(c) = unit_multiple(&det, f) {
                    return Some(([i, j, k], c));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_poly;

    const Q: Field = Field::Rationals;

    fn p(s: &str) -> Poly {
        parse_poly(s, Q).unwrap()
    }

    fn d5() -> Poly {
        p("x^5 + x^2*y^3 + x*y^4 + y^5 + y^4*z")
    }

    #[test]
    fn ideal_dimensions() {
        assert_eq!(ideal_dim(&[p("x"), p("y"), p("z")], 1), 3);
        assert_eq!(ideal_dim(&[p("x^2")], 3), 3);
        assert_eq!(ideal_dim(&jacobian_generators(&d5()), 4), 3);
        assert_eq!(hilbert_function_quotient(&jacobian_generators(&d5()), 0), 1);
    }

    #[test]
    fn redundant_generator_keeps_rank() {
        let f = d5();
        let [fx, fy, fz] = f.gradient();
        for t in 0..8 {
            assert_eq!(
                ideal_dim(&[fx.clone(), fy.clone(), fz.clone()], t),
                ideal_dim(&jacobian_generators(&f), t)
            );
        }
    }

    #[test]
    fn series_coefficients() {
        // (1 + z)^2 = (1 - 2z^2 + z^4) / (1 - z)^2
        let num = [(0, 1), (2, -2), (4, 1)];
        let seq: Vec<i64> = (0..6).map(|t| series_coefficient(&num, 2, t)).collect();
        assert_eq!(seq, vec![1, 2, 1, 0, 0, 0]);
        assert_eq!(series_coefficient(&predicted_numerator(5), 3, 20), 12);
        assert_eq!(series_coefficient(&predicted_numerator(6), 3, 20), 19);
    }

    #[test]
    fn euler_syzygy_in_degree_one() {
        let f = d5();
        let k = syzygy_kernel(&f, 1);
        let euler: Syzygy = [p("x"), p("y"), p("z"), p("-5")];
        assert!(syzygy_in_span(&k, &euler));
        for s in &k.basis {
            assert!(apply_syzygy(&f, s).is_zero());
        }
    }

    #[test]
    fn resolution_for_d5() {
        let r = resolution_check(&d5(), 5, 9);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.stabilized, Some(12));
    }

    #[test]
    fn non_free_control_mismatches() {
        let f = p("x^5 + y^5 + z^5 + x^2*y^2*z + 3*x*y*z^3");
        let r = resolution_check(&f, 5, 9);
        assert!(!r.pass);
        assert!(r.first_mismatch.is_some());
    }

    #[test]
    fn point_support() {
        let r = point_support_check(&d5(), 8);
        assert!(r.certified());
        assert!(r.n_x.unwrap() <= 8 && r.n_y.unwrap() <= 8);
        let nc = point_support_check(&p("x*y*z"), 8);
        assert_eq!(nc.status, PointSupportStatus::BoundTooSmall);
        assert_eq!(nc.n_x, None);
        let mut j = JacobianIdeal::new(&d5());
        assert!(j.contains(&Poly::zero(Q)));
    }

    #[test]
    fn probe_family_and_fermat() {
        let r = freeness_probe(&d5(), 9);
        assert!(r.found);
        assert_eq!(r.column_degrees, Some([1, 2, 2]));
        let fermat = freeness_probe(&p("x^5 + y^5 + z^5"), 9);
        assert!(!fermat.found);
        assert_eq!(fermat.generators[0], GeneratorCount { degree: 1, count: 1 });
    }

    #[test]
    fn even_degree_fresh_syzygies() {
        let f = p("x^6 + x^2*y^4 + x*y^5 + y^6 + y^5*z");
        let r = freeness_probe(&f, 4);
        assert_eq!(r.column_degrees, Some([1, 2, 3]));
    }
}
