//! Sparse polynomials in x, y, z over an exact [`Field`].
//!
//! Terms are kept in a map keyed by [`Monomial`] under graded lexicographic
//! order with x > y > z. Zero coefficients are never stored. Bivariate forms
//! in x, y are simply polynomials without z.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

use crate::field::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("Euler identity fails for degree {degree}")]
    EulerViolation { degree: u32 },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("zero polynomial")]
    ZeroPolynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }
}

/// Exponent vector (e_x, e_y, e_z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u32; 3]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0, 0, 0]);

    pub fn new(ex: u32, ey: u32, ez: u32) -> Self {
        Monomial([ex, ey, ez])
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0[v.index()]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        Some(Monomial([
            self.0[0].checked_sub(other.0[0])?,
            self.0[1].checked_sub(other.0[1])?,
            self.0[2].checked_sub(other.0[2])?,
        ]))
    }

    /// All monomials of total degree `t` in `nvars` variables (2 means x, y),
    /// in descending graded-lex order.
    pub fn of_degree(t: u32, nvars: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for ex in (0..=t).rev() {
            if nvars == 2 {
                out.push(Monomial::new(ex, t - ex, 0));
                continue;
            }
            for ey in (0..=t - ex).rev() {
                out.push(Monomial::new(ex, ey, t - ex - ey));
            }
        }
        out
    }

    /// Position of a degree-`t` monomial in [`Monomial::of_degree`] order.
    pub fn index_in_degree(&self, nvars: usize) -> usize {
        let t = self.degree();
        let [ex, ey, _] = self.0;
        if nvars == 2 {
            return (t - ex) as usize;
        }
        // Monomials with a larger x exponent come first; for x exponent a
        // there are t - a + 1 of them.
        let before: u32 = (ex + 1..=t).map(|a| t - a + 1).sum();
        (before + (t - ex - ey)) as usize
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in Var::ALL {
            let e = self.exp(v);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", v.name())?;
            } else {
                write!(f, "{}^{}", v.name(), e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(field: Field) -> Self {
        Poly {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        Poly::term(c, Monomial::ONE)
    }

    pub fn one(field: Field) -> Self {
        Poly::constant(field.one())
    }

    pub fn term(c: Scalar, m: Monomial) -> Self {
        let mut p = Poly::zero(c.field());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn monomial(field: Field, m: Monomial) -> Self {
        Poly::term(field.one(), m)
    }

    pub fn var(field: Field, v: Var) -> Self {
        Poly::monomial(field, Monomial::var(v))
    }

    /// `x^ex y^ey z^ez`.
    pub fn xyz(field: Field, ex: u32, ey: u32, ez: u32) -> Self {
        Poly::monomial(field, Monomial::new(ex, ey, ez))
    }

    pub fn from_terms(field: Field, terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = Poly::zero(field);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter().rev()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    /// Coefficient of `m`, or zero if absent.
    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    /// Total degree of the highest term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.leading_term().map(|(m, _)| m.degree())
    }

    /// Degree if every term has the same total degree. The zero polynomial
    /// is homogeneous of every degree and reports `None`.
    pub fn homogeneous_degree(&self) -> Result<Option<u32>, PolyError> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let Some(first) = it.next() else {
            return Ok(None);
        };
        if it.all(|d| d == first) {
            Ok(Some(first))
        } else {
            Err(PolyError::NotHomogeneous)
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_degree().is_ok()
    }

    pub fn is_bivariate(&self) -> bool {
        self.terms.keys().all(|m| m.exp(Var::Z) == 0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.field);
        }
        Poly {
            field: self.field,
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Poly {
        self.scale(&self.field.from_i64(n))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            field: self.field,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    /// `x^ex y^ey z^ez * self`.
    pub fn shift(&self, ex: u32, ey: u32, ez: u32) -> Poly {
        self.mul_monomial(&Monomial::new(ex, ey, ez))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Poly {
        let mut out = Poly::zero(self.field);
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.0[v.index()] -= 1;
            out.add_term(dm, &(c * &self.field.from_i64(e as i64)));
        }
        out
    }

    pub fn gradient(&self) -> [Poly; 3] {
        Var::ALL.map(|v| self.partial(v))
    }

    /// Checks x P_x + y P_y + z P_z = m P and returns m as a scalar.
    pub fn euler_check(&self) -> Result<Scalar, PolyError> {
        let m = self.homogeneous_degree()?.unwrap_or(0);
        let [px, py, pz] = self.gradient();
        let lhs = &(&px.shift(1, 0, 0) + &py.shift(0, 1, 0)) + &pz.shift(0, 0, 1);
        let ms = self.field.from_i64(m as i64);
        if lhs == self.scale(&ms) {
            Ok(ms)
        } else {
            Err(PolyError::EulerViolation { degree: m })
        }
    }

    /// Exact division: `Some(Q)` with `self = divisor * Q`, else `None`.
    ///
    /// Repeatedly cancels the leading term of the remainder against the
    /// leading term of `divisor`; for a single divisor this decides exact
    /// divisibility.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading_term()?;
        let lc_inv = lc.inv().ok()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.field);
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(lm)?;
            let qc = c * &lc_inv;
            rem = &rem - &divisor.mul_monomial(&qm).scale(&qc);
            quot.add_term(qm, &qc);
        }
        Some(quot)
    }

    /// Divisibility test returning the quotient when it exists.
    pub fn divides(divisor: &Poly, p: &Poly) -> (bool, Option<Poly>) {
        match p.exact_div(divisor) {
            Some(q) => (true, Some(q)),
            None => (false, None),
        }
    }

    /// Coefficient of z^k, as a polynomial in x, y.
    pub fn z_coefficient(&self, k: u32) -> Poly {
        Poly::from_terms(
            self.field,
            self.terms
                .iter()
                .filter(|(m, _)| m.exp(Var::Z) == k)
                .map(|(m, c)| (Monomial::new(m.0[0], m.0[1], 0), c.clone())),
        )
    }

    /// For a bivariate form of degree m: `P = x Q + c y^m` (axis x) or
    /// `P = y Q + c x^m` (axis y).
    pub fn split_pure_power(&self, axis: Var, m: u32) -> (Poly, Scalar) {
        let (pure, shift) = match axis {
            Var::X => (Monomial::new(0, m, 0), Monomial::var(Var::X)),
            Var::Y => (Monomial::new(m, 0, 0), Monomial::var(Var::Y)),
            Var::Z => panic!("split_pure_power is defined for x and y"),
        };
        let c = self.coeff(&pure);
        let mut rest = self.clone();
        rest.terms.remove(&pure);
        let q = rest
            .exact_div(&Poly::monomial(self.field, shift))
            .unwrap_or_else(|| Poly::zero(self.field));
        (q, c)
    }

    /// Substitutes a scalar for one variable.
    pub fn eval_var(&self, v: Var, value: &Scalar) -> Poly {
        let mut out = Poly::zero(self.field);
        for (m, c) in &self.terms {
            let mut rm = *m;
            rm.0[v.index()] = 0;
            out.add_term(rm, &(c * &value.pow(m.exp(v))));
        }
        out
    }

    /// Square-freeness of a nonzero bivariate form.
    ///
    /// Factors of x and y are stripped first and may appear at most once;
    /// the rest is dehomogenized at y = 1 and tested by gcd(p, p') = 1.
    pub fn is_squarefree_bivariate(&self) -> Result<bool, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        self.homogeneous_degree()?;
        let min_x = self.terms.keys().map(|m| m.0[0]).min().unwrap_or(0);
        let min_y = self.terms.keys().map(|m| m.0[1]).min().unwrap_or(0);
        if min_x > 1 || min_y > 1 {
            return Ok(false);
        }
        let stripped = Poly {
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial::new(m.0[0] - min_x, m.0[1] - min_y, 0), c.clone()))
                .collect(),
        };
        let p = UniPoly::dehomogenize_y(&stripped);
        let g = p.gcd(&p.derivative());
        Ok(g.degree() == Some(0))
    }

    /// Canonical text form, parseable by [`crate::parser::parse_poly`].
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Determinant of a 3x3 matrix given as rows.
    pub fn det3(m: &[[Poly; 3]; 3]) -> Poly {
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
            &(&m[r1][c1] * &m[r2][c2]) - &(&m[r1][c2] * &m[r2][c1])
        };
        let t0 = &m[0][0] * &minor(1, 2, 1, 2);
        let t1 = &m[0][1] * &minor(1, 2, 0, 2);
        let t2 = &m[0][2] * &minor(1, 2, 0, 1);
        &(&t0 - &t1) + &t2
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            let abs = if negative { -c } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if *m == Monomial::ONE {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, &-c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.field);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Dense univariate polynomial, coefficients by ascending power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct UniPoly {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl UniPoly {
    fn new(field: Field, mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        UniPoly { field, coeffs }
    }

    /// p(t) = P(t, 1) for a bivariate form P.
    fn dehomogenize_y(p: &Poly) -> Self {
        let deg = p.degree_in(Var::X) as usize;
        let mut coeffs = vec![p.field.zero(); deg + 1];
        for (m, c) in &p.terms {
            let i = m.0[0] as usize;
            coeffs[i] = &coeffs[i] + c;
        }
        UniPoly::new(p.field, coeffs)
    }

    fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &self.field.from_i64(i as i64))
            .collect();
        UniPoly::new(self.field, coeffs)
    }

    fn rem(&self, divisor: &UniPoly) -> UniPoly {
        let dd = divisor.degree().expect("nonzero divisor");
        let lead_inv = divisor.coeffs[dd].inv().expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let q = &r[top] * &lead_inv;
            if !q.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    let k = top - dd + j;
                    r[k] = &r[k] - &(&q * dc);
                }
            }
            r.pop();
            while r.last().is_some_and(Scalar::is_zero) {
                r.pop();
            }
        }
        UniPoly::new(self.field, r)
    }

    fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while b.degree().is_some() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_poly;

    const Q: Field = Field::Rationals;

    fn p(s: &str) -> Poly {
        parse_poly(s, Q).unwrap()
    }

    #[test]
    fn monomial_indexing_matches_enumeration() {
        for t in 0..7 {
            for nvars in [2, 3] {
                for (i, m) in Monomial::of_degree(t, nvars).iter().enumerate() {
                    assert_eq!(m.index_in_degree(nvars), i);
                }
            }
        }
        assert_eq!(Monomial::of_degree(4, 3).len(), 15);
    }

    #[test]
    fn products() {
        assert_eq!(&p("x") * &p("x + y"), p("x^2 + x*y"));
        assert_eq!(&p("x + y") * &p("x - y"), p("x^2 - y^2"));
        assert_eq!(&p("x^2 + x*y + y^2") * &p("x - y"), p("x^3 - y^3"));
    }

    #[test]
    fn partials() {
        let f = p("x^2*y^3*z");
        assert_eq!(f.partial(Var::Z), p("x^2*y^3"));
        assert!(p("y^5").partial(Var::X).is_zero());
        assert_eq!(p("x^5 + x^2*y^3").partial(Var::X), p("5*x^4 + 2*x*y^3"));
    }

    #[test]
    fn euler() {
        assert_eq!(p("x^5 + y^4*z").euler_check().unwrap(), Q.from_i64(5));
        assert_eq!(p("x*y*z").euler_check().unwrap(), Q.from_i64(3));
        assert_eq!(p("x^2 + y").euler_check(), Err(PolyError::NotHomogeneous));
        // In characteristic 5 a quintic satisfies the identity with m = 0.
        let f5 = parse_poly("x^5 + y^4*z", Field::Prime(5)).unwrap();
        assert!(f5.euler_check().unwrap().is_zero());
    }

    #[test]
    fn divisibility() {
        assert_eq!(Poly::divides(&p("y"), &p("x^5 + y^4*z")), (false, None));
        assert_eq!(
            Poly::divides(&p("x"), &p("x^2*y")),
            (true, Some(p("x*y")))
        );
        let a = p("x^2 + 3*x*z - y^2");
        let b = p("x*y - z^2 + y*z");
        assert_eq!((&a * &b).exact_div(&b), Some(a.clone()));
        assert_eq!((&(&a * &b) + &p("z^4")).exact_div(&b), None);
        assert_eq!(p("x").exact_div(&Poly::zero(Q)), None);
    }

    #[test]
    fn squarefree() {
        assert!(p("x*y*(x+y)").is_squarefree_bivariate().unwrap());
        assert!(!p("x^2 + 2*x*y + y^2").is_squarefree_bivariate().unwrap());
        assert!(p("x^2 + x*y + y^2").is_squarefree_bivariate().unwrap());
        assert!(!p("x^2*y").is_squarefree_bivariate().unwrap());
        assert!(!p("x*y^3 + y^4").is_squarefree_bivariate().unwrap());
        assert!(p("3").is_squarefree_bivariate().unwrap());
        assert_eq!(
            Poly::zero(Q).is_squarefree_bivariate(),
            Err(PolyError::ZeroPolynomial)
        );
        // x^2 + y^2 = (x + 2y)(x + 3y) over F_5, yet squarefree.
        let f5 = parse_poly("x^2 + y^2", Field::Prime(5)).unwrap();
        assert!(f5.is_squarefree_bivariate().unwrap());
        let sq5 = parse_poly("x^2 + 4*x*y + 4*y^2", Field::Prime(5)).unwrap();
        assert!(!sq5.is_squarefree_bivariate().unwrap());
    }

    #[test]
    fn coefficients_and_splits() {
        let f = p("x^2 + x*y + y^2");
        assert_eq!(f.coeff(&Monomial::new(2, 0, 0)), Q.one());
        assert!(f.coeff(&Monomial::new(3, 0, 0)).is_zero());
        // y * (2y) + 3 y^2 for F2 = x^2 + xy + y^2, d = 5, alpha = 0.
        let f2 = p("x^2 + x*y + y^2");
        let h = &f2.partial(Var::Y).shift(0, 1, 0) + &f2.scale_int(3);
        assert_eq!(h.coeff(&Monomial::new(0, 2, 0)), Q.from_i64(5));

        assert_eq!(f.split_pure_power(Var::X, 2), (p("x + y"), Q.one()));
        assert_eq!(p("x^3").split_pure_power(Var::Y, 3), (Poly::zero(Q), Q.one()));
    }

    #[test]
    fn rendering() {
        assert_eq!(p("y^4*z + x^5").render(), "x^5 + y^4*z");
        assert_eq!(p("-1/2*x*y + 3 - z^2").render(), "-1/2*x*y - z^2 + 3");
        assert_eq!(p("2*x - 2*x").render(), "0");
        let f = parse_poly("-x + 2", Field::Prime(7)).unwrap();
        assert_eq!(f.render(), "6*x + 2");
    }

    #[test]
    fn determinant() {
        let m = [
            [p("x"), p("0"), p("0")],
            [p("0"), p("y"), p("0")],
            [p("z"), p("1"), p("z")],
        ];
        assert_eq!(Poly::det3(&m), p("x*y*z"));
    }
}
