//! Text-format tests: frozen canonical exports for both catalog entries,
//! acceptance of every documented source form, and rejection of malformed
//! or meaningless sources with exact positions and expected-token sets.

use std::collections::BTreeMap;

use feq_core::catalog::{thm31, thm32};
use feq_core::domain::{ArgMap, BoundSpec, OperatorSpec};
use feq_core::dsl::{format_spec, parse_spec, ParseError, SpecDocument};
use feq_core::engine::eigenfactor;

fn doc_of(entry_spec: OperatorSpec, bound: BoundSpec) -> SpecDocument {
    SpecDocument::from_parts(entry_spec, bound, BTreeMap::new())
}

/// Reorder a document's terms into the canonical order the parser and
/// formatter agree on, so order-insensitive comparisons can use `==`.
fn canonicalize(doc: &SpecDocument) -> SpecDocument {
    let mut terms = doc.operator.terms().to_vec();
    terms.sort_by(|l, r| l.map.cmp(&r.map));
    let operator = OperatorSpec::new(terms).expect("reordering preserves validity");
    let mut triples: Vec<(f64, f64, f64)> = doc
        .bound
        .terms()
        .iter()
        .map(|t| (t.coef, t.exp_first, t.exp_second))
        .collect();
    triples.sort_by(|l, r| {
        l.1.total_cmp(&r.1)
            .then(l.2.total_cmp(&r.2))
            .then(l.0.total_cmp(&r.0))
    });
    let bound = BoundSpec::from_triples(triples).expect("reordering preserves validity");
    SpecDocument::from_parts(operator, bound, doc.params.clone())
}

/// Parse, panicking with the rendered diagnostic on failure.
fn parse_ok(src: &str) -> SpecDocument {
    match parse_spec(src) {
        Ok(doc) => doc,
        Err(e) => panic!("expected source to parse, got: {e}\n---\n{src}"),
    }
}

/// Reject, asserting the diagnostic's message fragment and exact position.
fn parse_err(src: &str, line: usize, col: usize, fragment: &str) -> ParseError {
    let err = match parse_spec(src) {
        Err(e) => e,
        Ok(_) => panic!("expected source to be rejected ({fragment})\n---\n{src}"),
    };
    assert!(
        err.message.contains(fragment),
        "diagnostic {:?} does not mention {:?}\n---\n{src}",
        err.message,
        fragment
    );
    assert_eq!(
        (err.line, err.col),
        (line, col),
        "position of {:?} (message {:?})\n---\n{src}",
        fragment,
        err.message
    );
    err
}

const FIRST_FAMILY_CANONICAL: &str = "\
operator {
  -1*f(-1/5 x, 3 y)
  +2*f(2/5 x, 2 y)
  -2*f(3/5 x, y)
}
bound {
  0.05308415999999999*|x|^8*|y|^8
}
params {
  a = -0.2
  p = 4
}
";

const SECOND_FAMILY_CANONICAL: &str = "\
operator {
  -2*f(1/2 x, -1/2 y)
  +2*f(1/2 x, 1/2 y)
}
bound {
  0.3125*|y|^3
  0.3125*|x|^3
}
params {
  r = 3
  rho = 0.2
}
";

#[test]
fn canonical_export_is_frozen_and_round_trips() {
    for (entry, golden) in [
        (thm31(4.0).expect("valid"), FIRST_FAMILY_CANONICAL),
        (thm32(3.0, 0.2).expect("valid"), SECOND_FAMILY_CANONICAL),
    ] {
        let name = entry.name.clone();
        let doc = SpecDocument::from_parts(entry.spec, entry.bound, entry.params);
        let text = format_spec(&doc);
        assert_eq!(text, golden, "{name}: canonical text changed");
        let parsed = parse_ok(golden);
        assert_eq!(
            parsed,
            canonicalize(&doc),
            "{name}: golden text does not reproduce the document"
        );
        assert_eq!(format_spec(&parsed), golden, "{name}: formatting is not idempotent");
    }
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let src = "\
# whole-line comment
operator { # trailing comment
  +f(x, y)   # after a term

}
bound { 1 } # compact block
params {
  # nothing yet
  eta = 0.5
}
";
    let doc = parse_ok(src);
    assert_eq!(doc.operator.len(), 1);
    assert_eq!(doc.params.get("eta"), Some(&0.5));
}

#[test]
fn block_order_does_not_matter() {
    let canonical = parse_ok("operator { +2*f(x, y) }\nbound { |x|^2 }\nparams { t = 3 }\n");
    let shuffled = parse_ok("params { t = 3 }\nbound { |x|^2 }\noperator { +2*f(x, y) }\n");
    assert_eq!(canonical, shuffled);
}

#[test]
fn term_order_is_canonicalized() {
    // Consecutive |·| factors extend one term, so a reordered second term
    // must lead with its coefficient to start fresh.
    let a = parse_ok("operator { +2*f(2 x, y) -1*f(x, 3 y) }\nbound { |y| 2*|x| }\n");
    let b = parse_ok("operator { -1*f(x, 3 y) +2*f(2 x, y) }\nbound { 2*|x| 1*|y| }\n");
    assert_eq!(a, b);
    assert_eq!(format_spec(&a), format_spec(&b));
}

#[test]
fn rational_and_decimal_literals_agree_exactly() {
    let rational = parse_ok("operator { +f(2/5 x, 1/4 y) }\nbound { 1 }\n");
    let decimal = parse_ok("operator { +f(0.4 x, 25e-2 y) }\nbound { 1 }\n");
    assert_eq!(rational, decimal, "literal forms must convert to identical rationals");
}

#[test]
fn linear_combinations_accumulate() {
    let spelled = parse_ok("operator { +f(x + x - 1/2 x, y - 2 y) }\nbound { 1 }\n");
    let reduced = parse_ok("operator { +f(3/2 x, -1 y) }\nbound { 1 }\n");
    assert_eq!(spelled, reduced);
}

#[test]
fn mixed_slot_maps_parse_but_admit_no_envelope_factor() {
    let doc = parse_ok("operator { +1/2*f(x + y, x - y) }\nbound { |x|^2*|y|^2 }\n");
    assert!(!doc.operator.all_diagonal());
    assert_eq!(eigenfactor(&doc.operator, &doc.bound), None);
}

#[test]
fn zero_argument_and_divided_symbols_parse() {
    let doc = parse_ok("operator { +f(0, y / 2) }\nbound { 1 }\n");
    let expected = OperatorSpec::from_pairs(vec![(
        1.0,
        ArgMap::new(
            num::rational::BigRational::from_integer(0.into()),
            num::rational::BigRational::from_integer(0.into()),
            num::rational::BigRational::from_integer(0.into()),
            num::rational::BigRational::new(1.into(), 2.into()),
        ),
    )])
    .expect("valid operator");
    assert_eq!(doc.operator, expected);
}

#[test]
fn repeated_absolute_factors_add_exponents() {
    let twice = parse_ok("operator { +f(x, y) }\nbound { |x|*|x| }\n");
    let squared = parse_ok("operator { +f(x, y) }\nbound { |x|^2 }\n");
    assert_eq!(twice, squared);
}

#[test]
fn exponent_forms_and_coefficient_fractions_parse() {
    let doc = parse_ok("operator { +f(x, y) }\nbound { 1/4*|x|^2.5*|y|^0.5 2*|y| }\n");
    let expected = BoundSpec::from_triples(vec![(2.0, 0.0, 1.0), (0.25, 2.5, 0.5)])
        .expect("valid bound");
    assert_eq!(doc.bound, expected, "terms sort by exponents then coefficient");
}

#[test]
fn empty_bound_block_means_zero_envelope() {
    let doc = parse_ok("operator { +f(x, y) }\nbound {\n}\n");
    assert!(doc.bound.is_zero());
}

#[test]
fn signed_parameter_values_parse() {
    let doc = parse_ok("operator { +f(x, y) }\nbound { 1 }\nparams { rho = -0.25 up = +3 }\n");
    assert_eq!(doc.params.get("rho"), Some(&-0.25));
    assert_eq!(doc.params.get("up"), Some(&3.0));
}

#[test]
fn duplicate_blocks_are_rejected_at_the_second_keyword() {
    parse_err(
        "operator { +f(x, y) }\noperator { +f(x, y) }\nbound { 1 }\n",
        2,
        1,
        "duplicate operator block",
    );
    parse_err(
        "operator { +f(x, y) }\nbound { 1 }\nbound { 1 }\n",
        3,
        1,
        "duplicate bound block",
    );
    parse_err(
        "operator { +f(x, y) }\nbound { 1 }\nparams { a = 1 }\nparams { b = 2 }\n",
        4,
        1,
        "duplicate params block",
    );
}

#[test]
fn missing_blocks_are_rejected_at_end_of_input() {
    parse_err("bound { 1 }\n", 2, 1, "missing operator block");
    parse_err("operator { +f(x, y) }\n", 2, 1, "missing bound block");
}

#[test]
fn unknown_block_name_lists_the_alternatives() {
    let err = parse_err("widget {\n}\n", 1, 1, "unknown block 'widget'");
    assert_eq!(err.expected, vec!["'operator'", "'bound'", "'params'"]);
}

#[test]
fn empty_operator_block_is_rejected_at_the_keyword() {
    parse_err("operator {\n}\nbound { 1 }\n", 1, 1, "operator block has no terms");
}

#[test]
fn zero_and_non_finite_coefficients_are_rejected() {
    parse_err(
        "operator { 0*f(x, y) }\nbound { 1 }\n",
        1,
        12,
        "operator term has zero coefficient",
    );
    parse_err(
        "operator { 1e999*f(x, y) }\nbound { 1 }\n",
        1,
        12,
        "operator coefficient is not finite",
    );
    parse_err(
        "operator { +f(x, y) }\nbound { 0*|x| }\n",
        2,
        9,
        "bound term has zero coefficient",
    );
    parse_err(
        "operator { +f(x, y) }\nbound { -2*|x| }\n",
        2,
        9,
        "negative bound coefficient",
    );
}

#[test]
fn negative_bound_exponent_is_rejected_at_the_exponent() {
    parse_err(
        "operator { +f(x, y) }\nbound { |x|^-2 }\n",
        2,
        14,
        "negative bound exponent",
    );
}

#[test]
fn constant_map_arguments_are_rejected() {
    parse_err(
        "operator { +f(3, y) }\nbound { 1 }\n",
        1,
        15,
        "constant term in map argument",
    );
}

#[test]
fn division_by_zero_is_rejected_at_the_denominator() {
    parse_err(
        "operator { +f(x/0, y) }\nbound { 1 }\n",
        1,
        17,
        "division by zero in map coefficient",
    );
    parse_err(
        "operator { 1/0*f(x, y) }\nbound { 1 }\n",
        1,
        14,
        "division by zero in operator coefficient",
    );
}

#[test]
fn unclosed_blocks_are_rejected_at_end_of_input() {
    let err = parse_err("operator { +f(x, y)\n", 2, 1, "unclosed operator block");
    assert_eq!(err.expected, vec!["'}'"]);
    parse_err("operator { +f(x, y) }\nbound { 1\n", 3, 1, "unclosed bound block");
    parse_err(
        "operator { +f(x, y) }\nbound { 1 }\nparams { a = 1\n",
        4,
        1,
        "unclosed params block",
    );
}

#[test]
fn malformed_numbers_are_rejected_where_they_start() {
    let err = parse_err(
        "operator { +2.*f(x, y) }\nbound { 1 }\n",
        1,
        13,
        "expected digits after the decimal point",
    );
    assert_eq!(err.expected, vec!["digit"]);
    parse_err(
        "operator { +1e*f(x, y) }\nbound { 1 }\n",
        1,
        13,
        "expected digits in the exponent",
    );
}

#[test]
fn stray_characters_are_rejected() {
    parse_err(
        "operator { +f(x; y) }\nbound { 1 }\n",
        1,
        16,
        "unexpected character ';'",
    );
}

#[test]
fn duplicate_parameters_are_rejected() {
    parse_err(
        "operator { +f(x, y) }\nbound { 1 }\nparams { a = 1 a = 2 }\n",
        3,
        16,
        "duplicate parameter 'a'",
    );
}

#[test]
fn non_finite_parameter_values_are_rejected() {
    parse_err(
        "operator { +f(x, y) }\nbound { 1 }\nparams { big = 1e999 }\n",
        3,
        16,
        "parameter value is not finite",
    );
}

#[test]
fn missing_comma_reports_the_expected_token() {
    let err = parse_err("operator { +f(x y) }\nbound { 1 }\n", 1, 17, "unexpected");
    assert_eq!(err.expected, vec!["','"]);
}

#[test]
fn bad_linear_start_lists_the_alternatives() {
    let err = parse_err("operator { +f(, y) }\nbound { 1 }\n", 1, 15, "unexpected");
    assert_eq!(err.expected, vec!["number", "'x'", "'y'"]);
}

#[test]
fn diagnostics_render_position_and_expectations() {
    let err = parse_spec("widget {\n}\n").expect_err("unknown block");
    let rendered = err.to_string();
    assert!(
        rendered.contains("line 1, column 1")
            && rendered.contains("unknown block")
            && rendered.contains("expected"),
        "rendered diagnostic: {rendered}"
    );
}

#[test]
fn export_of_hand_built_document_round_trips() {
    let op = OperatorSpec::from_pairs(vec![
        (0.75, ArgMap::diagonal_ratio(1, 2, 1, 3)),
        (-0.5, ArgMap::diagonal_ratio(-2, 5, 4, 1)),
    ])
    .expect("valid operator");
    let bound = BoundSpec::from_triples(vec![(1.5, 2.0, 0.0), (0.5, 0.0, 2.0)]).expect("valid");
    let mut doc = doc_of(op, bound);
    doc.params.insert("scale".to_string(), 1.25);
    let text = format_spec(&doc);
    let parsed = parse_ok(&text);
    assert_eq!(parsed, canonicalize(&doc));
    assert_eq!(format_spec(&parsed), text);
}
