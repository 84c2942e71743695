//! Canonical text form of a spec document.

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

use super::SpecDocument;
use crate::domain::BoundTerm;

/// Render a document canonically: operator terms sorted by argument map,
/// bound terms by exponents, one term per line, rationals in lowest terms,
/// parameters alphabetical. `parse_spec(format_spec(doc)) == doc`
/// structurally, and formatting is idempotent.
pub fn format_spec(doc: &SpecDocument) -> String {
    let mut out = String::new();
    out.push_str("operator {\n");
    let mut terms = doc.operator.terms().to_vec();
    terms.sort_by(|l, r| l.map.cmp(&r.map));
    for t in &terms {
        let coef = if t.coef >= 0.0 {
            format!("+{}", t.coef)
        } else {
            format!("{}", t.coef)
        };
        out.push_str(&format!(
            "  {coef}*f({}, {})\n",
            format_lin(t.map.a(), t.map.b()),
            format_lin(t.map.c(), t.map.d()),
        ));
    }
    out.push_str("}\n");

    out.push_str("bound {\n");
    let mut bterms = doc.bound.terms().to_vec();
    bterms.sort_by(|l, r| {
        l.exp_first
            .total_cmp(&r.exp_first)
            .then(l.exp_second.total_cmp(&r.exp_second))
            .then(l.coef.total_cmp(&r.coef))
    });
    for t in &bterms {
        out.push_str(&format!("  {}\n", format_bound_term(t)));
    }
    out.push_str("}\n");

    if !doc.params.is_empty() {
        out.push_str("params {\n");
        for (name, value) in &doc.params {
            out.push_str(&format!("  {name} = {value}\n"));
        }
        out.push_str("}\n");
    }
    out
}

/// One linear combination, e.g. `2/5 x`, `x + y`, `-1/5 x`, `0`.
fn format_lin(coef_x: &BigRational, coef_y: &BigRational) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (coef, sym) in [(coef_x, "x"), (coef_y, "y")] {
        if coef.is_zero() {
            continue;
        }
        let magnitude = coef.abs();
        let text = if magnitude.is_one() {
            sym.to_string()
        } else {
            format!("{magnitude} {sym}")
        };
        parts.push((coef.is_negative(), text));
    }
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (negative, text)) in parts.iter().enumerate() {
        if i == 0 {
            if *negative {
                out.push('-');
            }
        } else {
            out.push_str(if *negative { " - " } else { " + " });
        }
        out.push_str(text);
    }
    out
}

/// One bound term, e.g. `0.3125*|x|^3`, `2*|x|^2*|y|`, `1.5`.
fn format_bound_term(t: &BoundTerm) -> String {
    let mut out = format!("{}", t.coef);
    for (exp, sym) in [(t.exp_first, "x"), (t.exp_second, "y")] {
        if exp == 0.0 {
            continue;
        }
        out.push_str(&format!("*|{sym}|"));
        if exp != 1.0 {
            out.push_str(&format!("^{exp}"));
        }
    }
    out
}
