//! Recursive-descent parser for the set and sequence expression language.
//!
//! ```text
//! setexpr  := "mod(" INT ";" INT {"," INT} ")"
//!           | "blocks(geom;" NUM "," NUM "," NUM ")"
//!           | "blocks(list;" interval {"," interval} ")"
//!           | "union(" setexpr "," setexpr ")"
//!           | "inter(" setexpr "," setexpr ")"
//!           | "compl(" setexpr ")"
//!           | "explicit(" [INT {"," INT}] ")"
//! interval := "[" INT "," INT ")"
//! seqexpr  := "ind(" setexpr ")" | "const(" NUM ")"
//!           | "periodic(" NUM {"," NUM} ")"
//!           | "affine(" NUM "," NUM "," seqexpr ")"
//!           | "rand01(" INT ")"
//!           | "prefix(" NUM {"," NUM} ";" NUM ")"
//!           | "round(" seqexpr ")" | "sum(" seqexpr "," seqexpr ")"
//! ```
//!
//! `NUM` accepts decimals and `p/q`. Printing a parsed expression with
//! `Display` and parsing it again gives a structurally equal value.

use crate::error::{Error, Result};
use crate::natset::NatSet;
use crate::scalar::Scalar;
use crate::seq::{rounding_transform, BoundedSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Ident,
    Number,
    Punct,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    text: String,
    line: usize,
    column: usize,
}

fn is_number_char(c: char) -> bool {
    c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-' | '/')
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        let (kind, word) = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    word.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            (Kind::Ident, word)
        } else if c.is_ascii_digit() || matches!(c, '.' | '+' | '-') {
            let mut word = String::new();
            while let Some(&d) = chars.peek() {
                if is_number_char(d) {
                    word.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            (Kind::Number, word)
        } else if "();,[".contains(c) {
            chars.next();
            (Kind::Punct, c.to_string())
        } else {
            return Err(Error::Syntax {
                line: tl,
                column: tc,
                token: c.to_string(),
                message: "unexpected character".into(),
            });
        };
        column += word.chars().count();
        tokens.push(Token {
            kind,
            text: word,
            line: tl,
            column: tc,
        });
    }
    tokens.push(Token {
        kind: Kind::End,
        text: "<end of input>".into(),
        line,
        column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Syntax {
                line: 1,
                column: 1,
                token: "<end of input>".into(),
                message: "empty expression".into(),
            });
        }
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Kind::End {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, token: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: token.line,
            column: token.column,
            token: token.text.clone(),
            message: message.into(),
        })
    }

    fn semantic(at: &Token, err: Error) -> Error {
        let message = match err {
            Error::InvalidSet(m) | Error::InvalidParameter(m) | Error::Domain(m) => m,
            other => other.to_string(),
        };
        Error::Semantic {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn expect(&mut self, punct: &str) -> Result<Token> {
        let t = self.next();
        if t.kind == Kind::Punct && t.text == punct {
            Ok(t)
        } else {
            self.syntax(&t, format!("expected `{punct}`"))
        }
    }

    fn eat(&mut self, punct: &str) -> bool {
        let t = self.peek();
        if t.kind == Kind::Punct && t.text == punct {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Token> {
        let t = self.next();
        if t.kind == Kind::Ident {
            Ok(t)
        } else {
            self.syntax(&t, "expected a constructor name")
        }
    }

    fn int(&mut self) -> Result<u64> {
        let t = self.next();
        match (t.kind, t.text.parse::<u64>()) {
            (Kind::Number, Ok(v)) => Ok(v),
            _ => self.syntax(&t, "expected a non-negative integer"),
        }
    }

    fn num<S: Scalar>(&mut self) -> Result<S> {
        let t = self.next();
        match (t.kind, S::parse_num(&t.text)) {
            (Kind::Number, Some(v)) => Ok(v),
            _ => self.syntax(&t, "expected a number"),
        }
    }

    fn int_list(&mut self, close: &str) -> Result<Vec<u64>> {
        let mut out = vec![self.int()?];
        while self.eat(",") {
            out.push(self.int()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    fn finish(&mut self) -> Result<()> {
        let t = self.next();
        if t.kind == Kind::End {
            Ok(())
        } else {
            self.syntax(&t, "unexpected trailing input")
        }
    }

    fn set_expr(&mut self) -> Result<NatSet> {
        let head = self.ident()?;
        self.expect("(")?;
        let built = match head.text.as_str() {
            "mod" => {
                let m = self.int()?;
                self.expect(";")?;
                let residues = self.int_list(")")?;
                NatSet::periodic(m, residues)
            }
            "blocks" => {
                let kind = self.ident()?;
                self.expect(";")?;
                match kind.text.as_str() {
                    "geom" => {
                        let start = self.int()?;
                        self.expect(",")?;
                        let on: f64 = self.num()?;
                        self.expect(",")?;
                        let off: f64 = self.num()?;
                        self.expect(")")?;
                        NatSet::geom_blocks(start, on, off)
                    }
                    "list" => {
                        let mut intervals = Vec::new();
                        loop {
                            self.expect("[")?;
                            let a = self.int()?;
                            self.expect(",")?;
                            let b = self.int()?;
                            self.expect(")")?;
                            intervals.push((a, b));
                            if !self.eat(",") {
                                break;
                            }
                        }
                        self.expect(")")?;
                        NatSet::block_list(intervals)
                    }
                    _ => return self.syntax(&kind, "expected `geom` or `list`"),
                }
            }
            "union" | "inter" => {
                let a = self.set_expr()?;
                self.expect(",")?;
                let b = self.set_expr()?;
                self.expect(")")?;
                if head.text == "union" {
                    NatSet::disjoint_union(vec![a, b])
                } else {
                    NatSet::intersection(vec![a, b])
                }
            }
            "compl" => {
                let a = self.set_expr()?;
                self.expect(")")?;
                Ok(a.complement())
            }
            "explicit" => {
                let elements = if self.eat(")") {
                    Vec::new()
                } else {
                    self.int_list(")")?
                };
                NatSet::explicit(elements)
            }
            _ => return self.syntax(&head, "unknown set constructor"),
        };
        built.map_err(|e| Self::semantic(&head, e))
    }

    fn seq_expr<S: Scalar>(&mut self) -> Result<BoundedSeq<S>> {
        let head = self.ident()?;
        self.expect("(")?;
        let built = match head.text.as_str() {
            "ind" => {
                let a = self.set_expr()?;
                self.expect(")")?;
                Ok(BoundedSeq::indicator(a))
            }
            "const" => {
                let c = self.num()?;
                self.expect(")")?;
                Ok(BoundedSeq::constant(c))
            }
            "periodic" => {
                let mut values = vec![self.num()?];
                while self.eat(",") {
                    values.push(self.num()?);
                }
                self.expect(")")?;
                BoundedSeq::periodic(values)
            }
            "affine" => {
                let c = self.num()?;
                self.expect(",")?;
                let d = self.num()?;
                self.expect(",")?;
                let inner = self.seq_expr()?;
                self.expect(")")?;
                Ok(BoundedSeq::affine(c, d, inner))
            }
            "rand01" => {
                let seed = self.int()?;
                self.expect(")")?;
                Ok(BoundedSeq::seeded_random01(seed))
            }
            "prefix" => {
                let mut values = Vec::new();
                if !self.eat(";") {
                    values.push(self.num()?);
                    while self.eat(",") {
                        values.push(self.num()?);
                    }
                    self.expect(";")?;
                }
                let tail = self.num()?;
                self.expect(")")?;
                Ok(BoundedSeq::prefix_tail(values, tail))
            }
            "round" => {
                let inner = self.seq_expr()?;
                self.expect(")")?;
                rounding_transform(&inner)
            }
            "sum" => {
                let a = self.seq_expr()?;
                self.expect(",")?;
                let b = self.seq_expr()?;
                self.expect(")")?;
                BoundedSeq::sum(vec![a, b])
            }
            _ => return self.syntax(&head, "unknown sequence constructor"),
        };
        built.map_err(|e| Self::semantic(&head, e))
    }
}

pub fn parse_set_expr(text: &str) -> Result<NatSet> {
    let mut p = Parser::new(text)?;
    let set = p.set_expr()?;
    p.finish()?;
    Ok(set)
}

pub fn parse_seq_expr<S: Scalar>(text: &str) -> Result<BoundedSeq<S>> {
    let mut p = Parser::new(text)?;
    let seq = p.seq_expr()?;
    p.finish()?;
    Ok(seq)
}
