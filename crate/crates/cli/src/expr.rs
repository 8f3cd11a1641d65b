//! Set expressions over named balls.
//!
//! ```text
//! expr  := inter (('|' | '-') inter)*
//! inter := unary ('&' unary)*
//! unary := '!' unary | atom
//! atom  := NAME | '(' expr ')'
//! ```
//!
//! `|` is union, `-` difference, `&` intersection and `!` complement.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Name(String),
    Union(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Inter(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if "|-&!()".contains(c) {
            out.push(Tok::Op(c));
            chars.next();
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let mut name = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                name.push(c);
                chars.next();
            }
            out.push(Tok::Name(name));
        } else {
            return Err(format!("unexpected character {c:?} in set expression"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut left = self.inter()?;
        loop {
            if self.eat('|') {
                left = Expr::Union(Box::new(left), Box::new(self.inter()?));
            } else if self.eat('-') {
                left = Expr::Diff(Box::new(left), Box::new(self.inter()?));
            } else {
                return Ok(left);
            }
        }
    }

    fn inter(&mut self) -> Result<Expr, String> {
        let mut left = self.unary()?;
        while self.eat('&') {
            left = Expr::Inter(Box::new(left), Box::new(self.unary()?));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.eat('!') {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                return Err("missing ')' in set expression".into());
            }
            return Ok(e);
        }
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(Expr::Name(n))
            }
            other => Err(format!("expected a ball name, found {other:?}")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr, String> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input in set expression {s:?}"));
    }
    Ok(e)
}

impl Expr {
    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Name(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Union(a, b) | Expr::Diff(a, b) | Expr::Inter(a, b) => {
                a.names(out);
                b.names(out);
            }
            Expr::Not(a) => a.names(out),
        }
    }
}
