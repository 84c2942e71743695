//! Recursive-descent parser and validator for spec documents.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};

use super::lexer::{lex, Token, TokenKind};
use super::{ParseError, Span, SpecDocument};
use crate::domain::{ArgMap, BoundSpec, OperatorSpec};

/// Parse a `.feq` document. Terms are canonicalized (operator terms sorted
/// by argument map, bound terms by exponents), so structurally equal specs
/// parse to equal documents regardless of term order in the source.
pub fn parse_spec(text: &str) -> Result<SpecDocument, ParseError> {
    let tokens = lex(text)?;
    Parser { tokens, pos: 0 }.document()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ParseError> {
        if self.peek_kind() == &kind {
            Ok(self.bump())
        } else {
            Err(ParseError::syntax(
                format!("unexpected {}", self.peek_kind().describe()),
                self.peek().span,
                &[expected],
            ))
        }
    }

    fn expect_number(&mut self, context: &str) -> Result<(String, Span), ParseError> {
        match self.peek_kind().clone() {
            TokenKind::Number(text) => {
                let tok = self.bump();
                Ok((text, tok.span))
            }
            other => Err(ParseError::syntax(
                format!("unexpected {} in {context}", other.describe()),
                self.peek().span,
                &["number"],
            )),
        }
    }

    /// Consume an optional leading sign; `+1` when absent.
    fn sign(&mut self) -> f64 {
        if self.eat(&TokenKind::Plus) {
            1.0
        } else if self.eat(&TokenKind::Minus) {
            -1.0
        } else {
            1.0
        }
    }

    fn document(mut self) -> Result<SpecDocument, ParseError> {
        let mut operator: Option<(Vec<(f64, ArgMap)>, Vec<Span>)> = None;
        let mut bound: Option<(Vec<(f64, f64, f64)>, Vec<Span>)> = None;
        let mut params: Option<BTreeMap<String, f64>> = None;
        loop {
            match self.peek_kind().clone() {
                TokenKind::Eof => break,
                TokenKind::Ident(name) => {
                    let tok = self.bump();
                    match name.as_str() {
                        "operator" => {
                            if operator.is_some() {
                                return Err(ParseError::semantic(
                                    "duplicate operator block",
                                    tok.span,
                                ));
                            }
                            operator = Some(self.operator_block(tok.span)?);
                        }
                        "bound" => {
                            if bound.is_some() {
                                return Err(ParseError::semantic("duplicate bound block", tok.span));
                            }
                            bound = Some(self.bound_block()?);
                        }
                        "params" => {
                            if params.is_some() {
                                return Err(ParseError::semantic(
                                    "duplicate params block",
                                    tok.span,
                                ));
                            }
                            params = Some(self.params_block()?);
                        }
                        other => {
                            return Err(ParseError::syntax(
                                format!("unknown block '{other}'"),
                                tok.span,
                                &["'operator'", "'bound'", "'params'"],
                            ));
                        }
                    }
                }
                other => {
                    return Err(ParseError::syntax(
                        format!("unexpected {}", other.describe()),
                        self.peek().span,
                        &["'operator'", "'bound'", "'params'"],
                    ));
                }
            }
        }
        let eof_span = self.peek().span;
        let (op_terms, op_spans) =
            operator.ok_or_else(|| ParseError::semantic("missing operator block", eof_span))?;
        let (bd_terms, bd_spans) =
            bound.ok_or_else(|| ParseError::semantic("missing bound block", eof_span))?;

        // Canonical order: operator terms by argument map, bound terms by
        // exponents then coefficient. Stable, so equal keys keep source
        // order and round-trips are exact.
        let mut op: Vec<((f64, ArgMap), Span)> = op_terms.into_iter().zip(op_spans).collect();
        op.sort_by(|l, r| l.0 .1.cmp(&r.0 .1));
        let mut bd: Vec<((f64, f64, f64), Span)> = bd_terms.into_iter().zip(bd_spans).collect();
        bd.sort_by(|l, r| {
            l.0 .1
                .total_cmp(&r.0 .1)
                .then(l.0 .2.total_cmp(&r.0 .2))
                .then(l.0 .0.total_cmp(&r.0 .0))
        });

        let first_op_span = op.first().map(|t| t.1).unwrap_or(eof_span);
        let operator = OperatorSpec::from_pairs(op.iter().map(|t| t.0.clone()).collect())
            .map_err(|e| ParseError::semantic(format!("invalid operator: {e}"), first_op_span))?;
        let first_bd_span = bd.first().map(|t| t.1).unwrap_or(eof_span);
        let bound = BoundSpec::from_triples(bd.iter().map(|t| t.0).collect())
            .map_err(|e| ParseError::semantic(format!("invalid bound: {e}"), first_bd_span))?;
        Ok(SpecDocument {
            operator,
            bound,
            params: params.unwrap_or_default(),
            term_spans: op.into_iter().map(|t| t.1).collect(),
            bound_spans: bd.into_iter().map(|t| t.1).collect(),
        })
    }

    fn operator_block(
        &mut self,
        kw_span: Span,
    ) -> Result<(Vec<(f64, ArgMap)>, Vec<Span>), ParseError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut terms = Vec::new();
        let mut spans = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    return Err(ParseError::syntax(
                        "unclosed operator block",
                        self.peek().span,
                        &["'}'"],
                    ));
                }
                _ => {
                    let (coef, map, span) = self.operator_term()?;
                    terms.push((coef, map));
                    spans.push(span);
                }
            }
        }
        if terms.is_empty() {
            return Err(ParseError::semantic("operator block has no terms", kw_span));
        }
        Ok((terms, spans))
    }

    fn operator_term(&mut self) -> Result<(f64, ArgMap, Span), ParseError> {
        let span = self.peek().span;
        let sign = self.sign();
        let mut coef = 1.0;
        if matches!(self.peek_kind(), TokenKind::Number(_)) {
            let (text, nspan) = self.expect_number("operator coefficient")?;
            coef = parse_f64(&text, nspan)?;
            if self.eat(&TokenKind::Slash) {
                let (dtext, dspan) = self.expect_number("operator coefficient")?;
                let den = parse_f64(&dtext, dspan)?;
                if den == 0.0 {
                    return Err(ParseError::semantic(
                        "division by zero in operator coefficient",
                        dspan,
                    ));
                }
                coef /= den;
            }
            self.eat(&TokenKind::Star);
        }
        let coef = sign * coef;
        match self.peek_kind().clone() {
            TokenKind::Ident(s) if s == "f" => {
                self.bump();
            }
            other => {
                return Err(ParseError::syntax(
                    format!("unexpected {}", other.describe()),
                    self.peek().span,
                    &["'f('"],
                ));
            }
        }
        self.expect(TokenKind::LParen, "'('")?;
        let (a, b) = self.linear_combo()?;
        self.expect(TokenKind::Comma, "','")?;
        let (c, d) = self.linear_combo()?;
        self.expect(TokenKind::RParen, "')'")?;
        if coef == 0.0 {
            return Err(ParseError::semantic(
                "operator term has zero coefficient",
                span,
            ));
        }
        if !coef.is_finite() {
            return Err(ParseError::semantic(
                "operator coefficient is not finite",
                span,
            ));
        }
        Ok((coef, ArgMap::new(a, b, c, d), span))
    }

    /// A linear combination of the slot symbols: signed terms of the form
    /// `[coef] x|y [/ den]`, a bare symbol, or a literal `0`.
    fn linear_combo(&mut self) -> Result<(BigRational, BigRational), ParseError> {
        let mut coef_x = BigRational::zero();
        let mut coef_y = BigRational::zero();
        loop {
            let negative = if self.eat(&TokenKind::Plus) {
                false
            } else if self.eat(&TokenKind::Minus) {
                true
            } else {
                false
            };
            let term_span = self.peek().span;
            let (mut q, symbol) = match self.peek_kind().clone() {
                TokenKind::Number(text) => {
                    self.bump();
                    let mut q = decimal_to_rational(&text, term_span)?;
                    if self.eat(&TokenKind::Slash) {
                        let (dtext, dspan) = self.expect_number("map coefficient")?;
                        let den = decimal_to_rational(&dtext, dspan)?;
                        if den.is_zero() {
                            return Err(ParseError::semantic(
                                "division by zero in map coefficient",
                                dspan,
                            ));
                        }
                        q /= den;
                    }
                    self.eat(&TokenKind::Star);
                    match self.peek_kind().clone() {
                        TokenKind::Ident(s) if s == "x" || s == "y" => {
                            self.bump();
                            (q, Some(s))
                        }
                        _ => {
                            if !q.is_zero() {
                                return Err(ParseError::semantic(
                                    "constant term in map argument \
                                     (arguments must be linear in x and y)",
                                    term_span,
                                ));
                            }
                            (q, None)
                        }
                    }
                }
                TokenKind::Ident(s) if s == "x" || s == "y" => {
                    self.bump();
                    (BigRational::one(), Some(s))
                }
                other => {
                    return Err(ParseError::syntax(
                        format!("unexpected {}", other.describe()),
                        term_span,
                        &["number", "'x'", "'y'"],
                    ));
                }
            };
            if symbol.is_some() && self.eat(&TokenKind::Slash) {
                let (dtext, dspan) = self.expect_number("map coefficient")?;
                let den = decimal_to_rational(&dtext, dspan)?;
                if den.is_zero() {
                    return Err(ParseError::semantic(
                        "division by zero in map coefficient",
                        dspan,
                    ));
                }
                q /= den;
            }
            if negative {
                q = -q;
            }
            match symbol.as_deref() {
                Some("x") => coef_x += q,
                Some("y") => coef_y += q,
                _ => {}
            }
            if !matches!(self.peek_kind(), TokenKind::Plus | TokenKind::Minus) {
                break;
            }
        }
        Ok((coef_x, coef_y))
    }

    fn bound_block(&mut self) -> Result<(Vec<(f64, f64, f64)>, Vec<Span>), ParseError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut terms = Vec::new();
        let mut spans = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    return Err(ParseError::syntax(
                        "unclosed bound block",
                        self.peek().span,
                        &["'}'"],
                    ));
                }
                _ => {
                    let (coef, e1, e2, span) = self.bound_term()?;
                    terms.push((coef, e1, e2));
                    spans.push(span);
                }
            }
        }
        Ok((terms, spans))
    }

    fn bound_term(&mut self) -> Result<(f64, f64, f64, Span), ParseError> {
        let span = self.peek().span;
        let sign = self.sign();
        let mut coef = 1.0;
        let mut have_coef = false;
        if matches!(self.peek_kind(), TokenKind::Number(_)) {
            let (text, nspan) = self.expect_number("bound coefficient")?;
            coef = parse_f64(&text, nspan)?;
            have_coef = true;
            if self.eat(&TokenKind::Slash) {
                let (dtext, dspan) = self.expect_number("bound coefficient")?;
                let den = parse_f64(&dtext, dspan)?;
                if den == 0.0 {
                    return Err(ParseError::semantic(
                        "division by zero in bound coefficient",
                        dspan,
                    ));
                }
                coef /= den;
            }
            self.eat(&TokenKind::Star);
        }
        let mut e1 = 0.0;
        let mut e2 = 0.0;
        let mut have_factor = false;
        while self.peek_kind() == &TokenKind::Pipe {
            self.bump();
            let sym = match self.peek_kind().clone() {
                TokenKind::Ident(s) if s == "x" || s == "y" => {
                    self.bump();
                    s
                }
                other => {
                    return Err(ParseError::syntax(
                        format!("unexpected {} inside |·|", other.describe()),
                        self.peek().span,
                        &["'x'", "'y'"],
                    ));
                }
            };
            self.expect(TokenKind::Pipe, "'|'")?;
            let mut exp = 1.0;
            if self.eat(&TokenKind::Caret) {
                let negative = self.eat(&TokenKind::Minus);
                let (etext, espan) = self.expect_number("bound exponent")?;
                exp = parse_f64(&etext, espan)?;
                if negative {
                    exp = -exp;
                }
                if exp < 0.0 {
                    return Err(ParseError::semantic("negative bound exponent", espan));
                }
                if !exp.is_finite() {
                    return Err(ParseError::semantic("bound exponent is not finite", espan));
                }
            }
            if sym == "x" {
                e1 += exp;
            } else {
                e2 += exp;
            }
            have_factor = true;
            self.eat(&TokenKind::Star);
        }
        if !have_coef && !have_factor {
            return Err(ParseError::syntax(
                format!("unexpected {}", self.peek_kind().describe()),
                span,
                &["number", "'|'"],
            ));
        }
        let coef = sign * coef;
        if coef < 0.0 {
            return Err(ParseError::semantic("negative bound coefficient", span));
        }
        if coef == 0.0 {
            return Err(ParseError::semantic("bound term has zero coefficient", span));
        }
        if !coef.is_finite() {
            return Err(ParseError::semantic("bound coefficient is not finite", span));
        }
        Ok((coef, e1, e2, span))
    }

    fn params_block(&mut self) -> Result<BTreeMap<String, f64>, ParseError> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut params = BTreeMap::new();
        loop {
            match self.peek_kind().clone() {
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                TokenKind::Eof => {
                    return Err(ParseError::syntax(
                        "unclosed params block",
                        self.peek().span,
                        &["'}'"],
                    ));
                }
                TokenKind::Ident(name) => {
                    let tok = self.bump();
                    if params.contains_key(&name) {
                        return Err(ParseError::semantic(
                            format!("duplicate parameter '{name}'"),
                            tok.span,
                        ));
                    }
                    self.expect(TokenKind::Equals, "'='")?;
                    let sign = self.sign();
                    let (vtext, vspan) = self.expect_number("parameter value")?;
                    let value = sign * parse_f64(&vtext, vspan)?;
                    if !value.is_finite() {
                        return Err(ParseError::semantic(
                            "parameter value is not finite",
                            vspan,
                        ));
                    }
                    params.insert(name, value);
                }
                other => {
                    return Err(ParseError::syntax(
                        format!("unexpected {}", other.describe()),
                        self.peek().span,
                        &["parameter name", "'}'"],
                    ));
                }
            }
        }
        Ok(params)
    }
}

fn parse_f64(text: &str, span: Span) -> Result<f64, ParseError> {
    text.parse::<f64>()
        .map_err(|_| ParseError::semantic(format!("malformed number '{text}'"), span))
}

/// Exact rational value of a decimal literal (`0.4` → `2/5`,
/// `25e-2` → `1/4`). The lexer guarantees the shape
/// `digits[.digits][e[+-]digits]`.
fn decimal_to_rational(text: &str, span: Span) -> Result<BigRational, ParseError> {
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| {
                ParseError::semantic(format!("exponent out of range in '{text}'"), span)
            })?;
            (m, exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits: String = [int_part, frac_part].concat();
    let value = BigInt::from_str(&digits)
        .map_err(|_| ParseError::semantic(format!("malformed number '{text}'"), span))?;
    let net_exp = exp - frac_part.len() as i64;
    if net_exp.unsigned_abs() > 100_000 {
        return Err(ParseError::semantic(
            format!("exponent out of range in '{text}'"),
            span,
        ));
    }
    let shift = BigInt::from(10).pow(net_exp.unsigned_abs() as u32);
    let q = if net_exp >= 0 {
        BigRational::new(value * shift, BigInt::one())
    } else {
        BigRational::new(value, shift)
    };
    Ok(q)
}
