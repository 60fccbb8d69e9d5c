//! Kernel spec mini-language.
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*
//! factor := '(' expr ')'
//!         | 'rbf' '(' ['l' '=' NUM] ')'
//!         | 'matern' '(' ['nu' '=' NUM] [',' 'l' '=' NUM] ')'
//!         | 'scale' '(' ['v' '=' NUM ','] expr ')'
//! ```
//!
//! Keyword arguments may appear in any order; omitted ones default to
//! `l = 1`, `nu = 1.5`, `v = 1`. `nu` must be 0.5, 1.5 or 2.5. Whitespace is
//! ignored. Errors carry the byte offset of the offending token.

use super::kernel::{Kernel, MaternNu};
use crate::error::{Error, Result};

const MAX_DEPTH: usize = 64;

pub fn parse_kernel(src: &str) -> Result<Kernel> {
    let mut p = Parser { src, pos: 0, depth: 0 };
    let k = p.expr()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error(p.pos, "unexpected trailing input"));
    }
    Ok(k)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            what: "kernel spec",
            pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |f| format!("`{f}`"));
            Err(self.error(self.pos, format!("expected `{c}`, found {found}")))
        }
    }

    fn ident(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..]
            .bytes()
            .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
            .count();
        self.pos += len;
        (start, &self.src[start..start + len])
    }

    fn number(&mut self) -> Result<(usize, f64)> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..]
            .bytes()
            .take_while(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
            .count();
        self.pos += len;
        let text = &self.src[start..start + len];
        let v: f64 = text
            .parse()
            .map_err(|_| self.error(start, format!("expected a number, found `{text}`")))?;
        Ok((start, v))
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error(self.pos, format!("nesting deeper than {MAX_DEPTH}")));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Kernel> {
        self.enter()?;
        let mut k = self.term()?;
        while self.eat('+') {
            let rhs = self.term()?;
            k = Kernel::sum(k, rhs);
        }
        self.depth -= 1;
        Ok(k)
    }

    fn term(&mut self) -> Result<Kernel> {
        let mut k = self.factor()?;
        while self.eat('*') {
            let rhs = self.factor()?;
            k = Kernel::product(k, rhs);
        }
        Ok(k)
    }

    fn factor(&mut self) -> Result<Kernel> {
        if self.eat('(') {
            let k = self.expr()?;
            self.expect(')')?;
            return Ok(k);
        }
        let (at, name) = self.ident();
        match name {
            "rbf" => {
                self.expect('(')?;
                let args = self.kwargs(&["l"], false)?;
                let l = args.get("l", 1.0);
                Kernel::rbf(l.1).map_err(|_| self.error(l.0, format!("lengthscale must be positive, got {}", l.1)))
            }
            "matern" => {
                self.expect('(')?;
                let args = self.kwargs(&["nu", "l"], false)?;
                let nu = args.get("nu", 1.5);
                let l = args.get("l", 1.0);
                let nu_v = MaternNu::from_f64(nu.1).ok_or_else(|| {
                    self.error(nu.0, format!("nu must be 0.5, 1.5 or 2.5, got {}", nu.1))
                })?;
                Kernel::matern(nu_v, l.1).map_err(|_| self.error(l.0, format!("lengthscale must be positive, got {}", l.1)))
            }
            "scale" => {
                self.expect('(')?;
                let args = self.kwargs(&["v"], true)?;
                let v = args.get("v", 1.0);
                let inner = self.expr()?;
                self.expect(')')?;
                Kernel::scaled(v.1, inner).map_err(|_| self.error(v.0, format!("variance must be positive, got {}", v.1)))
            }
            "" => Err(self.error(at, "expected a kernel name or `(`")),
            other => Err(self.error(
                at,
                format!("unknown kernel `{other}`; expected rbf, matern or scale"),
            )),
        }
    }

    /// Parses `key=NUM` pairs after an opening parenthesis. For ordinary
    /// kernels the list ends with `)`; for `scale` it ends with `,` followed
    /// by the inner expression (or directly with the inner expression when
    /// no arguments are given).
    fn kwargs(&mut self, allowed: &[&str], before_expr: bool) -> Result<Kwargs> {
        let mut out = Kwargs(Vec::new());
        loop {
            if !before_expr && self.eat(')') {
                return Ok(out);
            }
            let save = self.pos;
            let (at, key) = self.ident();
            if before_expr && (key.is_empty() || self.peek() != Some('=')) {
                self.pos = save;
                return Ok(out);
            }
            if !allowed.contains(&key) {
                return Err(self.error(
                    at,
                    format!("unexpected argument `{key}`; allowed: {}", allowed.join(", ")),
                ));
            }
            if out.0.iter().any(|(k, _, _)| k == key) {
                return Err(self.error(at, format!("argument `{key}` given twice")));
            }
            self.expect('=')?;
            let (vpos, v) = self.number()?;
            out.0.push((key.to_string(), vpos, v));
            if before_expr {
                self.expect(',')?;
            } else if !self.eat(',') {
                self.expect(')')?;
                return Ok(out);
            }
        }
    }
}

struct Kwargs(Vec<(String, usize, f64)>);

impl Kwargs {
    fn get(&self, key: &str, default: f64) -> (usize, f64) {
        self.0
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, p, v)| (*p, *v))
            .unwrap_or((0, default))
    }
}
