//! Tokenizer for the spec language.

use super::{ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Ident(String),
    /// Raw numeric literal text: `digits[.digits][(e|E)[+-]digits]`.
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Star,
    Slash,
    Plus,
    Minus,
    Pipe,
    Caret,
    Equals,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Number(s) => format!("number '{s}'"),
            TokenKind::LBrace => "'{'".to_string(),
            TokenKind::RBrace => "'}'".to_string(),
            TokenKind::LParen => "'('".to_string(),
            TokenKind::RParen => "')'".to_string(),
            TokenKind::Comma => "','".to_string(),
            TokenKind::Star => "'*'".to_string(),
            TokenKind::Slash => "'/'".to_string(),
            TokenKind::Plus => "'+'".to_string(),
            TokenKind::Minus => "'-'".to_string(),
            TokenKind::Pipe => "'|'".to_string(),
            TokenKind::Caret => "'^'".to_string(),
            TokenKind::Equals => "'='".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, buf: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(&c) = self.chars.peek() {
            if pred(c) {
                buf.push(c);
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<TokenKind, ParseError> {
        let start = self.span();
        let mut text = String::new();
        self.take_while(&mut text, |c| c.is_ascii_digit());
        if self.chars.peek() == Some(&'.') {
            text.push('.');
            self.bump();
            let before = text.len();
            self.take_while(&mut text, |c| c.is_ascii_digit());
            if text.len() == before {
                return Err(ParseError::syntax(
                    format!("malformed number '{text}': expected digits after the decimal point"),
                    start,
                    &["digit"],
                ));
            }
        }
        if matches!(self.chars.peek(), Some('e') | Some('E')) {
            text.push('e');
            self.bump();
            if matches!(self.chars.peek(), Some('+') | Some('-')) {
                text.push(self.bump().unwrap());
            }
            let before = text.len();
            self.take_while(&mut text, |c| c.is_ascii_digit());
            if text.len() == before {
                return Err(ParseError::syntax(
                    format!("malformed number '{text}': expected digits in the exponent"),
                    start,
                    &["digit"],
                ));
            }
        }
        Ok(TokenKind::Number(text))
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let Some(&c) = lx.chars.peek() else { break };
        if c == '\n' || c.is_whitespace() {
            lx.bump();
            continue;
        }
        if c == '#' {
            while let Some(&c) = lx.chars.peek() {
                if c == '\n' {
                    break;
                }
                lx.bump();
            }
            continue;
        }
        let span = lx.span();
        let kind = match c {
            '{' => {
                lx.bump();
                TokenKind::LBrace
            }
            '}' => {
                lx.bump();
                TokenKind::RBrace
            }
            '(' => {
                lx.bump();
                TokenKind::LParen
            }
            ')' => {
                lx.bump();
                TokenKind::RParen
            }
            ',' => {
                lx.bump();
                TokenKind::Comma
            }
            '*' => {
                lx.bump();
                TokenKind::Star
            }
            '/' => {
                lx.bump();
                TokenKind::Slash
            }
            '+' => {
                lx.bump();
                TokenKind::Plus
            }
            '-' => {
                lx.bump();
                TokenKind::Minus
            }
            '|' => {
                lx.bump();
                TokenKind::Pipe
            }
            '^' => {
                lx.bump();
                TokenKind::Caret
            }
            '=' => {
                lx.bump();
                TokenKind::Equals
            }
            c if c.is_ascii_digit() => lx.number()?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                lx.take_while(&mut ident, |c| c.is_ascii_alphanumeric() || c == '_');
                TokenKind::Ident(ident)
            }
            other => {
                return Err(ParseError::syntax(
                    format!("unexpected character '{other}'"),
                    span,
                    &[],
                ));
            }
        };
        tokens.push(Token { kind, span });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: lx.span(),
    });
    Ok(tokens)
}
