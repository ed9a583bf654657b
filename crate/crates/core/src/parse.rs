//! Byte-level scanner shared by the sequence DSL and the function grammar.

use thiserror::Error;

/// Syntax error with a byte offset into the input text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

pub(crate) struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(b) = self.peek_raw() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek_raw(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    /// Next non-whitespace byte without consuming it.
    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.peek_raw()
    }

    pub(crate) fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, b: u8, what: &str) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    pub(crate) fn unexpected(&mut self, what: &str) -> ParseError {
        self.skip_ws();
        match self.src[self.pos..].chars().next() {
            Some(c) => ParseError::new(self.pos, format!("expected {what}, found '{c}'")),
            None => ParseError::new(self.pos, format!("expected {what}, found end of input")),
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    /// `[a-z_][a-z0-9_]*`
    pub(crate) fn ident(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek_raw() {
            if b.is_ascii_lowercase() || b == b'_' || (self.pos > start && b.is_ascii_digit()) {
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then(|| (start, &self.src[start..self.pos]))
    }

    /// Decimal literal with optional sign, fraction and exponent; returns the
    /// raw text so callers can reparse it as an integer when needed.
    pub(crate) fn number(&mut self, allow_sign: bool) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if allow_sign && matches!(bytes.get(i), Some(b'+') | Some(b'-')) {
            i += 1;
        }
        let int_start = i;
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        let mut digits = i - int_start;
        if bytes.get(i) == Some(&b'.') {
            let frac_start = i + 1;
            let mut j = frac_start;
            while bytes.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            digits += j - frac_start;
            if digits > 0 {
                i = j;
            }
        }
        if digits == 0 {
            return None;
        }
        if matches!(bytes.get(i), Some(b'e') | Some(b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'+') | Some(b'-')) {
                j += 1;
            }
            let exp_start = j;
            while bytes.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        self.pos = i;
        Some((start, &self.src[start..i]))
    }

    /// Unsigned integer literal.
    pub(crate) fn integer(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.peek_raw().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, &self.src[start..self.pos]))
    }
}

/// Format a float so that parsing the text yields the same bits.
pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v}")
}
