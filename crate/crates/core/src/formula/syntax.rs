use super::{Atom, FormulaError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    Comma,
    Not,
    And,
    Or,
    Diamond,
    Square,
    Word(String),
    Int(u32),
    End,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = i;
        let two = |s: &[u8]| bytes.len() >= i + 2 && &bytes[i..i + 2] == s;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c == b'(' {
            i += 1;
            Tok::LParen
        } else if c == b')' {
            i += 1;
            Tok::RParen
        } else if c == b',' {
            i += 1;
            Tok::Comma
        } else if c == b'!' {
            i += 1;
            Tok::Not
        } else if two(b"&&") {
            i += 2;
            Tok::And
        } else if two(b"||") {
            i += 2;
            Tok::Or
        } else if two(b"<>") {
            i += 2;
            Tok::Diamond
        } else if two(b"[]") {
            i += 2;
            Tok::Square
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse::<u32>().map_err(|_| FormulaError::Syntax {
                pos,
                msg: "integer too large".into(),
            })?;
            Tok::Int(n)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Word(text[start..i].to_string())
        } else {
            return Err(FormulaError::Syntax {
                pos,
                msg: format!("unexpected character `{}`", c as char),
            });
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::End,
        pos: text.len(),
    });
    Ok(out)
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, FormulaError> {
        Ok(Cursor {
            toks: lex(text)?,
            at: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn pos(&self) -> usize {
        self.toks[self.at].pos
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), FormulaError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> FormulaError {
        FormulaError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    pub fn finish(&self) -> Result<(), FormulaError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error("trailing input"))
        }
    }

    /// Parses the remainder of `pi(i,j)` after the `pi` word was consumed.
    pub fn atom_args(&mut self) -> Result<Atom, FormulaError> {
        self.expect(&Tok::LParen, "`(` after `pi`")?;
        let robot = self.int()?;
        self.expect(&Tok::Comma, "`,`")?;
        let region = self.int()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(Atom::new(robot, region))
    }

    fn int(&mut self) -> Result<u32, FormulaError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("expected integer index")),
        }
    }
}
