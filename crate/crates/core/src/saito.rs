//! Saito matrices for family members: the graded Lemma system, the
//! closed-form constants, explicit column assembly, the oracle fallback and
//! verification of Saito's criterion.

use serde::Serialize;
use thiserror::Error;

use crate::family::{DivisorInstance, FamilyParams};
use crate::field::{Field, Scalar};
use crate::linalg::{kernel, solve, SparseVec};
use crate::oracle::{self, series_coefficient, Syzygy};
use crate::poly::{Monomial, Poly, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SaitoError {
    #[error("the graded system has no solution")]
    NoSolution,
    #[error("degenerate constant: {0} vanishes")]
    DegenerateConstant(&'static str),
    #[error("construction failed at {identity}: residual {residual}")]
    ConstructionFailed { identity: String, residual: String },
    #[error("no Saito assembly among syzygies of degree <= {0}")]
    OracleExhausted(u32),
}

fn failed(identity: &str, residual: &Poly) -> SaitoError {
    SaitoError::ConstructionFailed {
        identity: identity.to_string(),
        residual: residual.render(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    ExplicitOdd,
    ExplicitBetaZero,
    /// Quadratic E for even degree; experimental.
    ExplicitEven,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RouteChoice {
    #[default]
    Auto,
    Explicit,
    Oracle,
}

/// Shorthand for x^a y^b z^c over a field.
fn mono(field: Field, a: u32, b: u32, c: u32) -> Poly {
    Poly::xyz(field, a, b, c)
}

/// `p * x^ex y^ey z^ez` where a negative x exponent must divide exactly.
fn shift_signed(p: &Poly, ex: i64, ey: u32, ez: u32) -> Option<Poly> {
    if ex >= 0 {
        return Some(p.shift(ex as u32, ey, ez));
    }
    let q = p.exact_div(&mono(p.field(), (-ex) as u32, 0, 0))?;
    Some(q.shift(0, ey, ez))
}

/// G1 = ∂F1/∂y, G2 = −(x ∂F1/∂x + (d−α) F1) and P = y ∂F2/∂y + (v+α+1) F2.
pub struct BasicForms {
    pub g1: Poly,
    pub g2: Poly,
    pub p: Poly,
    pub f2x: Poly,
}

impl BasicForms {
    pub fn new(params: &FamilyParams) -> Self {
        let (d, a, v) = (params.d as i64, params.alpha as i64, params.v() as i64);
        let f1 = &params.f1;
        let g1 = f1.partial(Var::Y);
        let g2 = -(&f1.partial(Var::X).shift(1, 0, 0) + &f1.scale_int(d - a));
        let f2x = params.f2.partial(Var::X);
        let p = &params.f2.partial(Var::Y).shift(0, 1, 0) + &params.f2.scale_int(v + a + 1);
        BasicForms { g1, g2, p, f2x }
    }
}

/// The graded system −G2 H1 + x G1 H3 = μ y^(n+α),
/// y F2x H1 + P H3 + x^β y^(d−1−v−α−β) H5 = −μ x^(v'−α+n) in unknowns of degree n.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSystem {
    pub rows: [[Poly; 3]; 2],
    pub rhs: [Poly; 2],
    pub unknown_degree: u32,
    pub mu: Scalar,
}

fn make_system(params: &FamilyParams, mu: &Scalar, n: u32) -> LemmaSystem {
    let field = params.field;
    let (d, a, b, v) = (params.d, params.alpha, params.beta, params.v());
    let vp = params.syzygy_degree();
    let f = BasicForms::new(params);
    let rows = [
        [-&f.g2, f.g1.shift(1, 0, 0), Poly::zero(field)],
        [f.f2x.shift(0, 1, 0), f.p.clone(), mono(field, b, d - 1 - v - a - b, 0)],
    ];
    let rhs = [
        mono(field, 0, n + a, 0).scale(mu),
        mono(field, vp - a + n, 0, 0).scale(&-mu),
    ];
    LemmaSystem {
        rows,
        rhs,
        unknown_degree: n,
        mu: mu.clone(),
    }
}

/// The Lemma system at the degree of the second Saito column.
pub fn build_lemma_system(params: &FamilyParams, mu: &Scalar) -> LemmaSystem {
    make_system(params, mu, params.syzygy_degree())
}

/// The system whose solution feeds the third Saito column (degree v).
pub fn build_column_system(params: &FamilyParams, mu: &Scalar) -> LemmaSystem {
    make_system(params, mu, params.v())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSolution {
    /// (H1, H3, H5) with every free unknown set to zero.
    pub h: [Poly; 3],
    pub kernel: Vec<[Poly; 3]>,
}

impl LemmaSystem {
    fn target_degrees(&self) -> [u32; 2] {
        self.rhs.clone().map(|r| r.degree().unwrap_or(0))
    }

    fn columns(&self) -> (Vec<SparseVec>, usize) {
        let [t0, _] = self.target_degrees();
        let off = (t0 + 1) as usize;
        let mut cols = Vec::new();
        for k in 0..3 {
            for m in Monomial::of_degree(self.unknown_degree, 2) {
                let mut col = SparseVec::new();
                for (r, offset) in [(0, 0), (1, off)] {
                    for (pm, c) in self.rows[r][k].mul_monomial(&m).terms() {
                        col.push((offset + pm.index_in_degree(2), c.clone()));
                    }
                }
                col.sort_by_key(|(i, _)| *i);
                cols.push(col);
            }
        }
        (cols, off)
    }

    fn field(&self) -> Field {
        self.mu.field()
    }

    fn unflatten(&self, v: &[Scalar]) -> [Poly; 3] {
        let n = self.unknown_degree as usize + 1;
        let monos = Monomial::of_degree(self.unknown_degree, 2);
        std::array::from_fn(|k| {
            Poly::from_terms(
                self.field(),
                monos.iter().copied().zip(v[k * n..(k + 1) * n].iter().cloned()),
            )
        })
    }

    /// rows · (H1, H3, H5) − rhs.
    pub fn residual(&self, h: &[Poly; 3]) -> [Poly; 2] {
        std::array::from_fn(|r| {
            let lhs = (0..3).fold(Poly::zero(self.field()), |acc, k| &acc + &(&self.rows[r][k] * &h[k]));
            &lhs - &self.rhs[r]
        })
    }
}

pub fn solve_lemma_system(sys: &LemmaSystem) -> Result<LemmaSolution, SaitoError> {
    let field = sys.field();
    let (cols, off) = sys.columns();
    let mut rhs: SparseVec = Vec::new();
    for (r, offset) in [(0, 0), (1, off)] {
        for (m, c) in sys.rhs[r].terms() {
            rhs.push((offset + m.index_in_degree(2), c.clone()));
        }
    }
    rhs.sort_by_key(|(i, _)| *i);
    let x = solve(field, &cols, &rhs).ok_or(SaitoError::NoSolution)?;
    let h = sys.unflatten(&x);
    let kernel = kernel(field, &cols).iter().map(|k| sys.unflatten(k)).collect();
    Ok(LemmaSolution { h, kernel })
}

/// (x^(β+1) y^(v'−α−β) G1, x^β y^(v'−α−β) G2, −x y F2x G1 − G2 P).
pub fn lemma_syzygy_generator(params: &FamilyParams) -> [Poly; 3] {
    let f = BasicForms::new(params);
    let e = params.syzygy_degree() - params.alpha - params.beta;
    let b = params.beta;
    [
        f.g1.shift(b + 1, e, 0),
        f.g2.shift(b, e, 0),
        -(&(&f.f2x * &f.g1).shift(1, 1, 0) + &(&f.g2 * &f.p)),
    ]
}

fn bivariate_count(t: i64) -> usize {
    if t < 0 {
        0
    } else {
        t as usize + 1
    }
}

/// Dimension of the degree-i piece of (S(−(v'−α)) ⊕ S(−α)) / N, N spanned by
/// the columns of the Lemma system's coefficient matrix.
pub fn lemma_module_hilbert(params: &FamilyParams, i: u32) -> usize {
    let field = params.field;
    let sys = build_lemma_system(params, &field.one());
    let (a, vp) = (params.alpha as i64, params.syzygy_degree() as i64);
    let i = i as i64;
    let n0 = bivariate_count(i - vp + a);
    let total = n0 + bivariate_count(i - a);
    let mut vectors = Vec::new();
    if i >= vp {
        for k in 0..3 {
            for m in Monomial::of_degree((i - vp) as u32, 2) {
                let mut v = SparseVec::new();
                for (r, offset) in [(0, 0), (1, n0)] {
                    for (pm, c) in sys.rows[r][k].mul_monomial(&m).terms() {
                        v.push((offset + pm.index_in_degree(2), c.clone()));
                    }
                }
                v.sort_by_key(|(j, _)| *j);
                vectors.push(v);
            }
        }
    }
    total - crate::linalg::rank(field, &vectors)
}

/// Coefficient of z^i in (z^α + z^(v'−α) − 3 z^(v') + z^(2v')) / (1 − z)^2.
pub fn lemma_module_series(params: &FamilyParams, i: u32) -> i64 {
    let (a, vp) = (params.alpha as i64, params.syzygy_degree() as i64);
    series_coefficient(&[(a, 1), (vp - a, 1), (vp, -3), (2 * vp, 1)], 2, i as i64)
}

/// Scalars of the explicit construction. E = a x^s + b y^s with s = 1 for
/// odd d and s = 2 for even d.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub a: Option<Scalar>,
    pub b: Option<Scalar>,
    pub mu: Option<Scalar>,
    pub lambda: Option<Scalar>,
}

impl Constants {
    pub fn none() -> Self {
        Constants {
            a: None,
            b: None,
            mu: None,
            lambda: None,
        }
    }
}

fn nonzero(s: Scalar, what: &'static str) -> Result<Scalar, SaitoError> {
    if s.is_zero() {
        Err(SaitoError::DegenerateConstant(what))
    } else {
        Ok(s)
    }
}

/// Closed-form constants from the pure-power conditions of the eq2 residual.
pub fn compute_constants(params: &FamilyParams) -> Result<Constants, SaitoError> {
    let field = params.field;
    let (d, a, b, v) = (params.d, params.alpha, params.beta, params.v());
    let vp = params.syzygy_degree();
    let forms = BasicForms::new(params);
    let di = |n: u32| field.from_i64(n as i64);
    let f1y = nonzero(params.f1.coeff(&Monomial::new(0, a, 0)), "[F1|y^alpha]")?;
    let f2x = nonzero(params.f2.coeff(&Monomial::new(vp - a, 0, 0)), "[F2|x^(v-alpha)]")?;
    let euler_x = nonzero(
        (-&forms.g2).coeff(&Monomial::new(a, 0, 0)),
        "[x F1x + (d-alpha) F1 | x^alpha]",
    )?;
    let p_y = nonzero(forms.p.coeff(&Monomial::new(0, vp - a, 0)), "[P|y^(v-alpha)]")?;
    let rho = di(v + a + 1);
    let ratio = |mu: &Scalar| -> Scalar {
        // a = −μ(d−β−1) / ((v+α+1)^2 [F2|x^(v−α)]^2 [x F1x + (d−α)F1 | x^α])
        let den = &(&(&rho * &rho) * &(&f2x * &f2x)) * &euler_x;
        -&(&(mu * &di(d - b - 1)) * &den.inv().expect("nonzero"))
    };
    let da2 = &di(d - a) * &di(d - a);
    let y_weight = &(&da2 * &(&f1y * &f1y)) * &p_y;
    if d % 2 == 1 && b >= 1 {
        let bb = field.one();
        let mu = &(&bb * &y_weight) * &di(b).inv().expect("beta > 0");
        let mu = nonzero(mu, "mu")?;
        Ok(Constants {
            a: Some(ratio(&mu)),
            b: Some(bb),
            mu: Some(mu),
            lambda: None,
        })
    } else if d % 2 == 1 {
        let mu = field.one();
        let a_ = ratio(&mu);
        Ok(Constants {
            lambda: Some(-&a_),
            a: Some(a_),
            b: Some(field.zero()),
            mu: Some(mu),
        })
    } else {
        let mu = field.one();
        let b_ = &di(b) * &y_weight.inv().expect("nonzero");
        Ok(Constants {
            a: Some(ratio(&mu)),
            b: Some(b_),
            mu: Some(mu),
            lambda: None,
        })
    }
}

/// Everything the explicit columns are assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingredients {
    pub g1: Poly,
    pub g2: Poly,
    pub g3: Poly,
    pub w: Poly,
    pub p: Poly,
    pub f2x: Poly,
    pub e: Poly,
    /// H1 … H6.
    pub h: [Poly; 6],
    pub constants: Constants,
}

/// How the eq2 residual interacts with the free direction of the solution set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Eq2Pin {
    /// The eq2 residual vanishes on the whole solution set; the free parameter is 0.
    Identical,
    /// The eq2 residual constrains the free parameter.
    Constraining,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSet {
    Point(Scalar),
    Line,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionNotes {
    pub kernel_dimension: usize,
    pub eq2_parameter: Eq2Pin,
    /// β = 0 only: λ solutions of the literal closing display.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_lambda: Option<LambdaSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaitoMatrix {
    pub route: Route,
    /// Columns of the bracket matrix B.
    pub columns: [[Poly; 3]; 3],
    /// q_k with (∇F) · col_k = q_k F.
    pub quotients: [Poly; 3],
    pub unit: Scalar,
    pub ingredients: Option<Ingredients>,
    pub notes: Option<SolutionNotes>,
}

impl SaitoMatrix {
    pub fn rows(&self) -> [[Poly; 3]; 3] {
        let c = &self.columns;
        oracle::matrix_from_columns([&c[0], &c[1], &c[2]])
    }

    /// B with its last column divided by the unit, so that det = F.
    pub fn normalized_rows(&self) -> [[Poly; 3]; 3] {
        let inv = self.unit.inv().expect("unit is nonzero");
        let mut cols = self.columns.clone();
        cols[2] = cols[2].clone().map(|p| p.scale(&inv));
        oracle::matrix_from_columns([&cols[0], &cols[1], &cols[2]])
    }

    pub fn column_degrees(&self) -> [u32; 3] {
        self.columns
            .clone()
            .map(|c| c.iter().filter_map(Poly::degree).max().unwrap_or(0))
    }
}

/// Second column from G1, G2, G3, W.
pub fn second_column(params: &FamilyParams, ing: &Ingredients) -> [Poly; 3] {
    let (b, g) = (params.beta, params.gamma() as u32);
    [
        ing.g1.shift(b + 1, g + 2, 0),
        ing.g2.shift(b, g + 2, 0),
        &ing.g3 - &ing.w.shift(b, g + 1, 1),
    ]
}

/// Third column from H1 … H6 and M = x^(β−1) y^γ.
pub fn third_column(params: &FamilyParams, ing: &Ingredients) -> Result<[Poly; 3], SaitoError> {
    let (d, b, g) = (params.d as i64, params.beta as i64, params.gamma() as u32);
    let [h1, h2, h3, h4, h5, h6] = &ing.h;
    let tail = &h2.shift(0, 1, 0).scale_int(b) + &h4.scale_int(d - b - 1);
    let c2 = shift_signed(h4, b - 1, g + 1, 1).ok_or_else(|| failed("x | H4", h4))?;
    let c3 = shift_signed(&tail, b - 1, g, 2).ok_or_else(|| failed("x | beta y H2 + (d-beta-1) H4", &tail))?;
    Ok([
        h1 + &h2.shift(b as u32, g + 1, 1),
        h3 + &c2,
        &(h5 + &h6.shift(0, 0, 1)) - &c3,
    ])
}

/// β y H1 + x y F2x H2 + (d−β−1) x H3 + P H4 + x y H6, the eq2 residual.
pub fn eq2_residual(params: &FamilyParams, ing: &Ingredients) -> Poly {
    &eq2_partial(params, ing) + &ing.h[5].shift(1, 1, 0)
}

fn eq2_partial(params: &FamilyParams, ing: &Ingredients) -> Poly {
    let (d, b) = (params.d as i64, params.beta as i64);
    let [h1, h2, h3, h4, ..] = &ing.h;
    let s1 = &h1.shift(0, 1, 0).scale_int(b) + &(&ing.f2x * h2).shift(1, 1, 0);
    let s2 = &h3.shift(1, 0, 0).scale_int(d - b - 1) + &(&ing.p * h4);
    &s1 + &s2
}

fn dot(col: &[Poly; 3], grad: &[Poly; 3]) -> Poly {
    col.iter()
        .zip(grad.iter())
        .fold(Poly::zero(grad[0].field()), |acc, (a, b)| &acc + &(a * b))
}

/// Residual of the second-column syzygy identity.
pub fn check_eq3(inst: &DivisorInstance, ing: &Ingredients) -> Poly {
    dot(&second_column(&inst.params, ing), &inst.jacobian)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eq4Strata {
    pub total: Poly,
    pub z2: Poly,
    pub z1: Poly,
    pub z0: Poly,
    pub g1h4_minus_g2h2: Poly,
}

impl Eq4Strata {
    pub fn all_zero(&self) -> bool {
        [&self.total, &self.z2, &self.z1, &self.z0, &self.g1h4_minus_g2h2]
            .iter()
            .all(|p| p.is_zero())
    }
}

/// Residual of the third-column syzygy identity, split by powers of z.
pub fn check_eq4(inst: &DivisorInstance, ing: &Ingredients) -> Result<Eq4Strata, SaitoError> {
    let total = dot(&third_column(&inst.params, ing)?, &inst.jacobian);
    Ok(Eq4Strata {
        z2: total.z_coefficient(2),
        z1: total.z_coefficient(1),
        z0: total.z_coefficient(0),
        g1h4_minus_g2h2: &(&ing.g1 * &ing.h[3]) - &(&ing.g2 * &ing.h[1]),
        total,
    })
}

/// Outcome of Saito's criterion for (F, B).
#[derive(Debug, Clone, PartialEq)]
pub struct SaitoVerification {
    pub det: Poly,
    pub unit: Option<Scalar>,
    pub quotients: [Option<Poly>; 3],
    pub pass: bool,
}

/// det(B) = c F with c ≠ 0 and (∇F) · col_k ≡ 0 mod F for every column.
pub fn verify_saito(f: &Poly, rows: &[[Poly; 3]; 3]) -> SaitoVerification {
    let det = Poly::det3(rows);
    let unit = oracle::unit_multiple(&det, f);
    let grad = f.gradient();
    let quotients: [Option<Poly>; 3] = std::array::from_fn(|k| {
        let col = [rows[0][k].clone(), rows[1][k].clone(), rows[2][k].clone()];
        dot(&col, &grad).exact_div(f)
    });
    let pass = unit.is_some() && quotients.iter().all(Option::is_some);
    SaitoVerification {
        det,
        unit,
        quotients,
        pass,
    }
}

/// Builds the explicit ingredients for odd d (both β cases) or, in the
/// experimental even mode, with quadratic E.
pub fn explicit_ingredients(inst: &DivisorInstance) -> Result<(Ingredients, SolutionNotes), SaitoError> {
    let params = &inst.params;
    let field = params.field;
    let (d, b, v) = (params.d as i64, params.beta, params.v());
    let forms = BasicForms::new(params);
    let constants = compute_constants(params)?;
    let mu = constants.mu.clone().expect("explicit routes fix mu");
    let sys = build_column_system(params, &mu);
    let sol = solve_lemma_system(&sys)?;
    let [h1, h3, h5] = sol.h.clone();

    // The eq2 residual only sees pure powers through β y H1 + (d−β−1) x H3.
    let pure = [Monomial::new(v + 1, 0, 0), Monomial::new(0, v + 1, 0)];
    let constraining = sol.kernel.iter().any(|k| {
        let s = &k[0].shift(0, 1, 0).scale_int(b as i64) + &k[1].shift(1, 0, 0).scale_int(d - b as i64 - 1);
        pure.iter().any(|m| !s.coeff(m).is_zero())
    });

    let s = if params.is_odd() { 1 } else { 2 };
    let e = &mono(field, s, 0, 0).scale(constants.a.as_ref().expect("a"))
        + &mono(field, 0, s, 0).scale(constants.b.as_ref().expect("b"));
    let h2 = &forms.g1 * &e;
    let h4 = &forms.g2 * &e;
    let w = &forms.g1.shift(0, 1, 0).scale_int(b as i64) + &forms.g2.scale_int(d - b as i64 - 1);
    let g3 = -(&(&forms.f2x * &forms.g1).shift(1, 1, 0) + &(&forms.p * &forms.g2));
    let mut ing = Ingredients {
        g1: forms.g1,
        g2: forms.g2,
        g3,
        w,
        p: forms.p,
        f2x: forms.f2x,
        e,
        h: [h1, h2, h3, h4, h5, Poly::zero(field)],
        constants,
    };
    let partial = eq2_partial(params, &ing);
    let h6 = (-&partial)
        .exact_div(&mono(field, 1, 1, 0))
        .ok_or_else(|| failed("eq2", &partial))?;
    ing.h[5] = h6;

    let literal_lambda = (params.is_odd() && b == 0).then(|| literal_beta_zero_lambda(inst, &sol.h, &mu));
    let notes = SolutionNotes {
        kernel_dimension: sol.kernel.len(),
        eq2_parameter: if constraining {
            Eq2Pin::Constraining
        } else {
            Eq2Pin::Identical
        },
        literal_lambda,
    };
    Ok((ing, notes))
}

/// Substitutes the proof's closing β = 0 display (with U, V3, W3) into the
/// syzygy identity and solves the resulting linear equation in λ.
pub fn literal_beta_zero_lambda(inst: &DivisorInstance, h: &[Poly; 3], mu: &Scalar) -> LambdaSet {
    let params = &inst.params;
    let field = params.field;
    let (d, a, v) = (params.d as i64, params.alpha, params.v());
    let f1x = params.f1.partial(Var::X);
    let f1y = params.f1.partial(Var::Y);
    let f2x = params.f2.partial(Var::X);
    let f2y = params.f2.partial(Var::Y);
    let mg2 = &params.f1.scale_int(d - a as i64) + &f1x.shift(1, 0, 0);
    let y = mono(field, 0, 1, 0);
    let strip = |p: &Poly| {
        let mut q = p.clone();
        q.add_term(Monomial::new(v, 0, 0), &-&p.coeff(&Monomial::new(v, 0, 0)));
        q.exact_div(&y).unwrap_or_else(|| Poly::zero(field))
    };
    let v3 = strip(&h[0]);
    let w3 = strip(&(&f1y * &params.f2).shift(1, 0, 0));
    let inv = field.from_i64(d - 1).inv().expect("d > 1");
    let column = |lambda: &Scalar| -> [Poly; 3] {
        let l = lambda * &inv;
        let inner = &(&v3 - &w3.scale(&(&l * &field.from_i64(d - v as i64 + a as i64))))
            - &(&f1y * &f2y).shift(1, 0, 0).scale(&l);
        let u = &(&(&mg2 * &inner) + &(&(&f1y * &f1y) * &f2x).shift(2, 0, 0).scale(&l))
            + &mono(field, 0, v + a - 1, 0).scale(mu);
        [
            &h[0] - &f1y.shift(1, v - a - 1, 1).scale(lambda),
            &h[1] + &mg2.shift(0, v - a - 1, 1).scale(lambda),
            &(&h[2] + &u.shift(0, 0, 1)) - &mg2.shift(0, v - a - 2, 2).scale(&(lambda * &field.from_i64(d - 1))),
        ]
    };
    let r0 = dot(&column(&field.zero()), &inst.jacobian);
    let r1 = &dot(&column(&field.one()), &inst.jacobian) - &r0;
    match r1.leading_term() {
        None if r0.is_zero() => LambdaSet::Line,
        None => LambdaSet::None,
        Some((m, c)) => {
            let lambda = -&(&r0.coeff(m) * &c.inv().expect("nonzero"));
            if (&r0 + &r1.scale(&lambda)).is_zero() {
                LambdaSet::Point(lambda)
            } else {
                LambdaSet::None
            }
        }
    }
}

fn euler_column(field: Field) -> [Poly; 3] {
    [mono(field, 1, 0, 0), mono(field, 0, 1, 0), mono(field, 0, 0, 1)]
}

fn finish(
    inst: &DivisorInstance,
    route: Route,
    columns: [[Poly; 3]; 3],
    quotients: [Poly; 3],
    ingredients: Option<Ingredients>,
    notes: Option<SolutionNotes>,
) -> Result<SaitoMatrix, SaitoError> {
    let f = &inst.f;
    for (k, (col, q)) in columns.iter().zip(quotients.iter()).enumerate() {
        let r = &dot(col, &inst.jacobian) - &(q * f);
        if !r.is_zero() {
            return Err(failed(&format!("column {}", k + 1), &r));
        }
    }
    let rows = oracle::matrix_from_columns([&columns[0], &columns[1], &columns[2]]);
    let det = Poly::det3(&rows);
    let unit = oracle::unit_multiple(&det, f).ok_or_else(|| failed("det", &det))?;
    Ok(SaitoMatrix {
        route,
        columns,
        quotients,
        unit,
        ingredients,
        notes,
    })
}

fn build_explicit(inst: &DivisorInstance) -> Result<SaitoMatrix, SaitoError> {
    let params = &inst.params;
    let field = params.field;
    let route = match (params.is_odd(), params.beta) {
        (true, 0) => Route::ExplicitBetaZero,
        (true, _) => Route::ExplicitOdd,
        (false, _) => Route::ExplicitEven,
    };
    let (ing, notes) = explicit_ingredients(inst)?;
    let columns = [
        euler_column(field),
        second_column(params, &ing),
        third_column(params, &ing)?,
    ];
    let quotients = [field.from_i64(params.d as i64), field.zero(), field.zero()].map(Poly::constant);
    finish(inst, route, columns, quotients, Some(ing), Some(notes))
}

/// Saito matrix from minimal syzygy generators of degree ≤ v.
pub fn build_oracle(inst: &DivisorInstance) -> Result<SaitoMatrix, SaitoError> {
    let bound = inst.v();
    let probe = oracle::freeness_probe(&inst.f, bound);
    let (Some(rows), Some(quotients)) = (probe.matrix, probe.quotients) else {
        return Err(SaitoError::OracleExhausted(bound));
    };
    let mut columns: [[Poly; 3]; 3] = std::array::from_fn(|c| std::array::from_fn(|r| rows[r][c].clone()));
    let mut quotients = quotients;
    // Scale the Euler generator to (x, y, z).
    let x = Monomial::new(1, 0, 0);
    let s = columns[0][0].coeff(&x).inv().map_err(|_| SaitoError::OracleExhausted(bound))?;
    columns[0] = columns[0].clone().map(|p| p.scale(&s));
    quotients[0] = quotients[0].scale(&s);
    finish(inst, Route::Oracle, columns, quotients, None, None)
}

pub fn build_saito_matrix(inst: &DivisorInstance, choice: RouteChoice) -> Result<SaitoMatrix, SaitoError> {
    match choice {
        RouteChoice::Auto if inst.params.is_odd() => build_explicit(inst),
        RouteChoice::Auto | RouteChoice::Oracle => build_oracle(inst),
        RouteChoice::Explicit => build_explicit(inst),
    }
}

/// Each non-Euler column, with its quotient, lies in the oracle's syzygy
/// space of its degree.
pub fn oracle_agreement(inst: &DivisorInstance, sm: &SaitoMatrix) -> bool {
    (1..3).all(|k| {
        let col = &sm.columns[k];
        let t = col.iter().filter_map(Poly::degree).max().unwrap_or(0);
        let syz: Syzygy = [col[0].clone(), col[1].clone(), col[2].clone(), -&sm.quotients[k]];
        oracle::syzygy_in_span(&oracle::syzygy_kernel(&inst.f, t), &syz)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub eq2: Option<Poly>,
    pub eq3: Option<Poly>,
    pub eq4: Option<Poly>,
    pub det: Option<Poly>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaitoReport {
    pub route: Route,
    pub pass: bool,
    pub unit_c: Option<Scalar>,
    pub column_degrees: [u32; 3],
    pub residuals: Residuals,
    pub constants: Constants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<SolutionNotes>,
}

/// Checks a built matrix against `f`, which may differ from the instance's
/// own polynomial.
pub fn saito_report(inst: &DivisorInstance, sm: &SaitoMatrix, f: &Poly) -> SaitoReport {
    let grad = f.gradient();
    let col_residual = |k: usize| &dot(&sm.columns[k], &grad) - &(&sm.quotients[k] * f);
    let check = verify_saito(f, &sm.rows());
    let det_residual = match &check.unit {
        Some(c) => &check.det - &f.scale(c),
        None => check.det.clone(),
    };
    let eq2 = sm.ingredients.as_ref().map(|ing| eq2_residual(&inst.params, ing));
    let (eq3, eq4) = (col_residual(1), col_residual(2));
    let euler_ok = col_residual(0).is_zero();
    let pass = check.pass
        && euler_ok
        && eq2.as_ref().is_none_or(Poly::is_zero)
        && eq3.is_zero()
        && eq4.is_zero()
        && det_residual.is_zero();
    SaitoReport {
        route: sm.route,
        pass,
        unit_c: check.unit,
        column_degrees: sm.column_degrees(),
        residuals: Residuals {
            eq2,
            eq3: Some(eq3),
            eq4: Some(eq4),
            det: Some(if check.det.is_zero() { f.clone() } else { det_residual }),
        },
        constants: sm
            .ingredients
            .as_ref()
            .map(|i| i.constants.clone())
            .unwrap_or_else(Constants::none),
        notes: sm.notes.clone(),
    }
}
