//! The divisor family: parameter validation, construction of
//! F = x^(d-α) F1 + y^(v+α+1) F2 + x^β y^(d-β-1) z, random members, and the
//! irreducibility test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, Scalar};
use crate::parser::{parse_poly, ParseError};
use crate::poly::{Monomial, Poly, Var};

const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("invalid parameters: {}", .0.failures().join(", "))]
    InvalidParams(ValidationReport),
    #[error("no valid instance after {0} attempts")]
    ExhaustedRetries(usize),
    #[error("(d, alpha, beta) = ({d}, {alpha}, {beta}) violates the parameter bounds")]
    IllegalShape { d: u32, alpha: u32, beta: u32 },
    #[error("irreducibility undecided: {0}")]
    Undecided(&'static str),
    #[error("instance field `{0}`: {1}")]
    BadRecord(&'static str, ParseError),
    #[error("instance field spec: {0}")]
    BadField(#[from] crate::field::FieldError),
}

/// One family member's defining data.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub d: u32,
    pub alpha: u32,
    pub beta: u32,
    pub f1: Poly,
    pub f2: Poly,
    pub field: Field,
}

/// Largest admissible α + β for degree d.
pub fn max_alpha_beta(d: u32) -> i64 {
    ((d as i64 + 1) / 2) - 3
}

/// All (α, β) with α, β ≥ 0 and α + β ≤ ⌊(d+1)/2⌋ − 3.
pub fn legal_pairs(d: u32) -> Vec<(u32, u32)> {
    let bound = max_alpha_beta(d);
    if d < 5 || bound < 0 {
        return Vec::new();
    }
    let bound = bound as u32;
    (0..=bound)
        .flat_map(|a| (0..=bound - a).map(move |b| (a, b)))
        .collect()
}

impl FamilyParams {
    pub fn v(&self) -> u32 {
        self.d / 2
    }

    /// γ = d − v − 3 − α − β (negative only for illegal shapes).
    pub fn gamma(&self) -> i64 {
        self.d as i64 - self.v() as i64 - 3 - self.alpha as i64 - self.beta as i64
    }

    /// Degree of the second Saito column, d − v − 1 (= v for odd d).
    pub fn syzygy_degree(&self) -> u32 {
        self.d - self.v() - 1
    }

    pub fn f2_degree(&self) -> i64 {
        self.d as i64 - self.v() as i64 - self.alpha as i64 - 1
    }

    pub fn is_odd(&self) -> bool {
        self.d % 2 == 1
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(ValidationOptions::default())
    }

    pub fn validate_with(&self, opts: ValidationOptions) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.push("d_at_least_5", self.d >= 5, format!("d = {}", self.d));
        r.push(
            "alpha_beta_bound",
            (self.alpha + self.beta) as i64 <= max_alpha_beta(self.d),
            format!(
                "alpha + beta = {} <= floor((d+1)/2) - 3 = {}",
                self.alpha + self.beta,
                max_alpha_beta(self.d)
            ),
        );
        let char_ok = self.field.admits_degree(self.d);
        r.push(
            "field_characteristic",
            char_ok.is_ok(),
            match char_ok {
                Ok(()) => format!("field {}", self.field),
                Err(e) => e.to_string(),
            },
        );
        r.push(
            "fields_agree",
            self.f1.field() == self.field && self.f2.field() == self.field,
            String::new(),
        );

        let f1_ok = is_form_of_degree(&self.f1, self.alpha as i64);
        r.push(
            "f1_degree",
            f1_ok,
            format!("F1 bivariate homogeneous of degree {}", self.alpha),
        );
        let sf = f1_ok && self.f1.is_squarefree_bivariate().unwrap_or(false);
        if opts.require_squarefree {
            r.push("f1_squarefree", sf, String::new());
        } else {
            r.push_waived("f1_squarefree", sf);
        }
        r.push("x_not_dividing_f1", f1_ok && !divisible_by(&self.f1, Var::X), String::new());
        r.push("y_not_dividing_f1", f1_ok && !divisible_by(&self.f1, Var::Y), String::new());

        let f2_ok = is_form_of_degree(&self.f2, self.f2_degree());
        r.push(
            "f2_degree",
            f2_ok,
            format!("F2 bivariate homogeneous of degree {}", self.f2_degree()),
        );
        r.push("x_not_dividing_f2", f2_ok && !divisible_by(&self.f2, Var::X), String::new());
        r.push("y_not_dividing_f2", f2_ok && !divisible_by(&self.f2, Var::Y), String::new());
        r
    }

    /// The defining polynomial, assembled without validation.
    pub fn assemble(&self) -> Poly {
        let (d, a, b, v) = (self.d, self.alpha, self.beta, self.v());
        let t1 = self.f1.shift(d - a, 0, 0);
        let t2 = self.f2.shift(0, v + a + 1, 0);
        let t3 = Poly::xyz(self.field, b, d - b - 1, 1);
        &(&t1 + &t2) + &t3
    }

    /// Whether the monomials of x^(d-α) F1 and y^(v+α+1) F2 are disjoint.
    pub fn supports_disjoint(&self) -> bool {
        let (d, a, v) = (self.d, self.alpha, self.v());
        let s1: Vec<Monomial> = self.f1.shift(d - a, 0, 0).terms().map(|(m, _)| *m).collect();
        self.f2
            .shift(0, v + a + 1, 0)
            .terms()
            .all(|(m, _)| !s1.contains(m))
    }
}

fn is_form_of_degree(p: &Poly, deg: i64) -> bool {
    !p.is_zero()
        && p.is_bivariate()
        && matches!(p.homogeneous_degree(), Ok(Some(k)) if k as i64 == deg)
}

/// For a nonzero form: does the variable divide it?
fn divisible_by(p: &Poly, v: Var) -> bool {
    p.terms().all(|(m, _)| m.exp(v) > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Off in the exploratory mode that drops the square-free hypothesis.
    pub require_squarefree: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            require_squarefree: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub waived: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub conditions: Vec<Condition>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.conditions.push(Condition {
            name: name.to_string(),
            pass,
            waived: false,
            detail,
        });
        self.pass = self.conditions.iter().all(|c| c.pass || c.waived);
    }

    fn push_waived(&mut self, name: &str, pass: bool) {
        self.conditions.push(Condition {
            name: name.to_string(),
            pass,
            waived: true,
            detail: "not required in this mode".to_string(),
        });
        self.pass = self.conditions.iter().all(|c| c.pass || c.waived);
    }

    pub fn failures(&self) -> Vec<String> {
        self.conditions
            .iter()
            .filter(|c| !c.pass && !c.waived)
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// A validated family member together with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorInstance {
    pub params: FamilyParams,
    pub f: Poly,
    pub jacobian: [Poly; 3],
}

impl DivisorInstance {
    pub fn build(params: FamilyParams) -> Result<Self, FamilyError> {
        Self::build_with(params, ValidationOptions::default())
    }

    pub fn build_with(params: FamilyParams, opts: ValidationOptions) -> Result<Self, FamilyError> {
        let report = params.validate_with(opts);
        if !report.pass {
            return Err(FamilyError::InvalidParams(report));
        }
        let f = params.assemble();
        let jacobian = f.gradient();
        debug_assert_eq!(
            f.euler_check().ok(),
            Some(params.field.from_i64(params.d as i64))
        );
        Ok(DivisorInstance { params, f, jacobian })
    }

    pub fn d(&self) -> u32 {
        self.params.d
    }

    pub fn v(&self) -> u32 {
        self.params.v()
    }

    pub fn field(&self) -> Field {
        self.params.field
    }
}

/// Irreducibility of a polynomial of degree one in z.
///
/// Writes F = A + B z. When B is a monomial in x, y the content gcd(A, B)
/// can only be built from x and y, so F is irreducible iff neither variable
/// of B divides A.
pub fn is_irreducible(f: &Poly) -> Result<bool, FamilyError> {
    if f.degree_in(Var::Z) != 1 {
        return Err(FamilyError::Undecided("polynomial is not linear in z"));
    }
    let a = f.z_coefficient(0);
    let b = f.z_coefficient(1);
    if b.len() != 1 {
        return Err(FamilyError::Undecided("z-coefficient is not a monomial"));
    }
    let (bm, _) = b.leading_term().expect("nonzero");
    if bm.degree() == 0 {
        return Ok(true);
    }
    if a.is_zero() {
        return Ok(false);
    }
    for v in [Var::X, Var::Y] {
        if bm.exp(v) > 0 && divisible_by(&a, v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Draws random family members deterministically from a seed.
pub struct InstanceSampler {
    rng: ChaCha8Rng,
    field: Field,
}

impl InstanceSampler {
    pub fn new(seed: u64, field: Field) -> Self {
        InstanceSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            field,
        }
    }

    fn scalar(&mut self) -> Scalar {
        match self.field {
            Field::Rationals => self.field.from_i64(self.rng.random_range(-10..=10)),
            Field::Prime(p) => self.field.from_i64(self.rng.random_range(0..p) as i64),
        }
    }

    fn nonzero_scalar(&mut self) -> Scalar {
        loop {
            let c = self.scalar();
            if !c.is_zero() {
                return c;
            }
        }
    }

    /// Dense bivariate form of degree `deg` with nonzero x^deg and y^deg terms.
    pub fn form(&mut self, deg: u32) -> Poly {
        let mut p = Poly::zero(self.field);
        for m in Monomial::of_degree(deg, 2) {
            let edge = m.exp(Var::X) == deg || m.exp(Var::Y) == deg;
            let c = if edge { self.nonzero_scalar() } else { self.scalar() };
            p.add_term(m, &c);
        }
        p
    }

    /// A form of degree `deg` ≥ 2 with a repeated linear factor (x + c y)^2.
    pub fn non_squarefree_form(&mut self, deg: u32) -> Poly {
        let c = self.nonzero_scalar();
        let l = &Poly::var(self.field, Var::X) + &Poly::var(self.field, Var::Y).scale(&c);
        let rest = if deg == 2 {
            Poly::constant(self.nonzero_scalar())
        } else {
            self.form(deg - 2)
        };
        &l.pow(2) * &rest
    }

    pub fn params(
        &mut self,
        d: u32,
        alpha: u32,
        beta: u32,
        mode: SampleMode,
    ) -> Result<FamilyParams, FamilyError> {
        if d < 5 || (alpha + beta) as i64 > max_alpha_beta(d) {
            return Err(FamilyError::IllegalShape { d, alpha, beta });
        }
        let opts = ValidationOptions {
            require_squarefree: mode == SampleMode::General,
        };
        let f2_deg = d - d / 2 - alpha - 1;
        for _ in 0..MAX_RETRIES {
            let f1 = match (alpha, mode) {
                (0, _) => Poly::one(self.field),
                (a, SampleMode::RepeatedFactor) if a >= 2 => self.non_squarefree_form(a),
                (a, _) => self.form(a),
            };
            let f2 = self.form(f2_deg);
            let params = FamilyParams {
                d,
                alpha,
                beta,
                f1,
                f2,
                field: self.field,
            };
            if params.validate_with(opts).pass {
                return Ok(params);
            }
        }
        Err(FamilyError::ExhaustedRetries(MAX_RETRIES))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    General,
    /// F1 carries a squared linear factor whenever α ≥ 2.
    RepeatedFactor,
}

/// A random valid family member with general coefficients.
pub fn random_instance(
    d: u32,
    alpha: u32,
    beta: u32,
    seed: u64,
    field: Field,
) -> Result<FamilyParams, FamilyError> {
    InstanceSampler::new(seed, field).params(d, alpha, beta, SampleMode::General)
}

/// Serialized form of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub d: u32,
    pub alpha: u32,
    pub beta: u32,
    pub field: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "F1")]
    pub f1: String,
    #[serde(rename = "F2")]
    pub f2: String,
    #[serde(rename = "F")]
    pub f: String,
}

impl InstanceRecord {
    pub fn new(params: &FamilyParams, seed: Option<u64>) -> Self {
        InstanceRecord {
            d: params.d,
            alpha: params.alpha,
            beta: params.beta,
            field: params.field,
            seed,
            f1: params.f1.render(),
            f2: params.f2.render(),
            f: params.assemble().render(),
        }
    }

    pub fn params(&self) -> Result<FamilyParams, FamilyError> {
        Ok(FamilyParams {
            d: self.d,
            alpha: self.alpha,
            beta: self.beta,
            f1: parse_poly(&self.f1, self.field).map_err(|e| FamilyError::BadRecord("F1", e))?,
            f2: parse_poly(&self.f2, self.field).map_err(|e| FamilyError::BadRecord("F2", e))?,
            field: self.field,
        })
    }

    /// The recorded F, which may differ from the family formula.
    pub fn polynomial(&self) -> Result<Poly, FamilyError> {
        parse_poly(&self.f, self.field).map_err(|e| FamilyError::BadRecord("F", e))
    }
}
