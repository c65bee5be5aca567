//! Standalone Macaulay2 and CoCoA-5 scripts for external cross-checks.

use std::fmt::Write;
use std::str::FromStr;

use crate::family::InstanceRecord;
use crate::field::Field;
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cas {
    Macaulay2,
    Cocoa,
}

impl FromStr for Cas {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "macaulay2" | "m2" => Ok(Cas::Macaulay2),
            "cocoa" | "cocoa5" => Ok(Cas::Cocoa),
            _ => Err(format!("unknown CAS `{s}` (expected cocoa or macaulay2)")),
        }
    }
}

fn header(rec: &InstanceRecord, comment: &str) -> String {
    let mut s = format!(
        "{comment} saito-forge export: d = {}, alpha = {}, beta = {}, field = {}\n",
        rec.d, rec.alpha, rec.beta, rec.field
    );
    if let Some(seed) = rec.seed {
        let _ = writeln!(s, "{comment} seed = {seed}");
    }
    s
}

fn matrix_literal(rows: &[[Poly; 3]; 3], open: &str, close: &str) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|r| format!("{open}{}{close}", r.iter().map(Poly::render).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("{open}{}{close}", body.join(", "))
}

/// Script asserting that J(F) has codimension 2 and is perfect, and that
/// `matrix` (rows, det normalized to F) is a Saito matrix for F.
pub fn export_script(cas: Cas, rec: &InstanceRecord, matrix: Option<&[[Poly; 3]; 3]>) -> String {
    match cas {
        Cas::Macaulay2 => macaulay2(rec, matrix),
        Cas::Cocoa => cocoa(rec, matrix),
    }
}

fn macaulay2(rec: &InstanceRecord, matrix: Option<&[[Poly; 3]; 3]>) -> String {
    let mut s = header(rec, "--");
    let ring = match rec.field {
        Field::Rationals => "QQ".to_string(),
        Field::Prime(p) => format!("ZZ/{p}"),
    };
    let _ = writeln!(s, "R = {ring}[x,y,z];");
    let _ = writeln!(s, "F = {};", rec.f);
    s.push_str("J = ideal(diff(x,F), diff(y,F), diff(z,F), F);\n");
    s.push_str("assert(codim J == 2);\n");
    s.push_str("-- perfect of codimension 2: projective dimension equals codimension\n");
    s.push_str("assert(pdim comodule J == 2);\n");
    match matrix {
        Some(m) => {
            let _ = writeln!(s, "A = matrix {};", matrix_literal(m, "{", "}"));
            s.push_str("assert(det A == F);\n");
            s.push_str("G = matrix {{diff(x,F), diff(y,F), diff(z,F)}};\n");
            s.push_str("assert((G * A) % ideal(F) == 0);\n");
        }
        None => s.push_str("error \"no Saito matrix could be built for this instance\";\n"),
    }
    s.push_str("print \"all assertions hold\";\n");
    s
}

fn cocoa(rec: &InstanceRecord, matrix: Option<&[[Poly; 3]; 3]>) -> String {
    let mut s = header(rec, "--");
    let ring = match rec.field {
        Field::Rationals => "QQ".to_string(),
        Field::Prime(p) => format!("ZZ/({p})"),
    };
    let _ = writeln!(s, "use R ::= {ring}[x,y,z];");
    let _ = writeln!(s, "F := {};", rec.f);
    s.push_str("J := ideal(deriv(F, x), deriv(F, y), deriv(F, z), F);\n");
    s.push_str("if dim(R/J) <> 1 then error(\"J(F) does not have codimension 2\"); endif;\n");
    s.push_str("-- by Saito's criterion the checks below make J(F) perfect of codimension 2\n");
    match matrix {
        Some(m) => {
            let _ = writeln!(s, "A := mat(R, {});", matrix_literal(m, "[", "]"));
            s.push_str("if det(A) <> F then error(\"det(A) <> F\"); endif;\n");
            s.push_str("G := mat(R, [[deriv(F, x), deriv(F, y), deriv(F, z)]]);\n");
            s.push_str("P := G * A;\n");
            s.push_str("for j := 1 to 3 do\n");
            s.push_str("  if NF(P[1, j], ideal(F)) <> 0 then error(\"column is not logarithmic\"); endif;\n");
            s.push_str("endfor;\n");
        }
        None => s.push_str("error(\"no Saito matrix could be built for this instance\");\n"),
    }
    s.push_str("println \"all assertions hold\";\n");
    s
}
