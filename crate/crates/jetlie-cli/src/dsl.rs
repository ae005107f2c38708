//! The input language: `system { .. }` and `manifold { .. }` blocks.
//!
//! ```text
//! system {
//!   independent: x;
//!   dependent: u;
//!   order: 2;
//!   eq u[x,x] = u[x]^2;   # comment
//! }
//!
//! manifold {
//!   x: 2; u: 1; chi: 1;
//!   truncation: 6;
//!   omega u1 = nu1 + x1*chi1;
//! }
//! ```
//!
//! Literals are integers and rationals `p/q`; decimals are rejected.
//! Jets list differentiation variables, `u[x1,x2,x1]`, in any order.

use std::collections::BTreeMap;
use std::fmt;

use jetlie::algebra::{Multiindex, Poly, Rat};
use jetlie::jet::{canonical_jet, JetCoord, SystemSpec};
use jetlie::manifold::ManifoldSpec;
use jetlie::prolong::{BaseSpace, JetPoly};
use thiserror::Error;

/// A located input error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, DslError> {
    Err(DslError {
        line: pos.line,
        col: pos.col,
        message: msg.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '.') {
                    j += 1;
                }
                let lit: String = chars[start..j].iter().collect();
                return err(
                    pos,
                    format!("decimal literal `{lit}` is not allowed; write an exact rational such as 3/2"),
                );
            }
            let v = digits
                .parse::<u64>()
                .or_else(|_| err(pos, format!("integer literal `{digits}` is too large")))?;
            col += i - start;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if "{};:,[]=+-*/^()".contains(c) {
            out.push((Tok::Sym(c), pos));
            i += 1;
            col += 1;
            continue;
        }
        return err(pos, format!("unexpected character `{c}`"));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Expression syntax tree.
#[derive(Clone, Debug)]
enum Expr {
    Num(u64, Pos),
    Var(String, Pos),
    Jet(String, Vec<(String, Pos)>, Pos),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos, DslError> {
        let (t, p) = self.bump();
        if t == Tok::Sym(c) {
            Ok(p)
        } else {
            err(p, format!("expected `{c}`, found {t}"))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), DslError> {
        match self.bump() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => err(p, format!("expected a name, found {t}")),
        }
    }

    fn int(&mut self) -> Result<(u64, Pos), DslError> {
        match self.bump() {
            (Tok::Int(v), p) => Ok((v, p)),
            (t, p) => err(p, format!("expected an integer, found {t}")),
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_sym('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if *self.peek() == Tok::Sym('/') {
                let p = self.bump().1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), p);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat_sym('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_sym('^') {
            let (e, p) = self.int()?;
            let e = u32::try_from(e).or_else(|_| err(p, "exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        match self.bump() {
            (Tok::Int(v), p) => Ok(Expr::Num(v, p)),
            (Tok::Ident(s), p) => {
                if self.eat_sym('[') {
                    let mut idx = Vec::new();
                    if *self.peek() != Tok::Sym(']') {
                        loop {
                            idx.push(self.ident()?);
                            if !self.eat_sym(',') {
                                break;
                            }
                        }
                    }
                    self.expect_sym(']')?;
                    Ok(Expr::Jet(s, idx, p))
                } else {
                    Ok(Expr::Var(s, p))
                }
            }
            (Tok::Sym('('), _) => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            (t, p) => err(p, format!("expected an expression, found {t}")),
        }
    }
}

fn expr_pos(e: &Expr) -> Pos {
    match e {
        Expr::Num(_, p) | Expr::Var(_, p) | Expr::Jet(_, _, p) | Expr::Div(_, _, p) => *p,
        Expr::Add(a, _) | Expr::Sub(a, _) | Expr::Mul(a, _) | Expr::Neg(a) | Expr::Pow(a, _) => {
            expr_pos(a)
        }
    }
}

/// Ring operations needed to evaluate an expression tree.
trait Ring: Sized {
    fn constant(&self, c: Rat) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn as_constant(&self) -> Option<Rat>;
}

impl Ring for JetPoly {
    fn constant(&self, c: Rat) -> JetPoly {
        JetPoly::constant(self.base(), c)
    }
    fn add(&self, o: &JetPoly) -> JetPoly {
        JetPoly::add(self, o)
    }
    fn sub(&self, o: &JetPoly) -> JetPoly {
        JetPoly::sub(self, o)
    }
    fn mul(&self, o: &JetPoly) -> JetPoly {
        JetPoly::mul(self, o).expect("symbol-free input")
    }
    fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        let (mono, f) = self.terms().next()?;
        (self.len() == 1 && mono.is_one() && f.cst.is_constant()).then(|| f.cst.constant_term())
    }
}

/// Polynomials cut at a fixed degree.
#[derive(Clone)]
struct Trunc(Poly, u32);

impl Ring for Trunc {
    fn constant(&self, c: Rat) -> Trunc {
        Trunc(Poly::constant(self.0.vars(), c), self.1)
    }
    fn add(&self, o: &Trunc) -> Trunc {
        Trunc(&self.0 + &o.0, self.1)
    }
    fn sub(&self, o: &Trunc) -> Trunc {
        Trunc(&self.0 - &o.0, self.1)
    }
    fn mul(&self, o: &Trunc) -> Trunc {
        Trunc(self.0.mul_trunc(&o.0, self.1), self.1)
    }
    fn as_constant(&self) -> Option<Rat> {
        self.0.is_constant().then(|| self.0.constant_term())
    }
}

fn eval<R: Ring + Clone>(
    e: &Expr,
    zero: &R,
    leaf: &dyn Fn(&Expr) -> Result<R, DslError>,
) -> Result<R, DslError> {
    Ok(match e {
        Expr::Num(v, p) => {
            let v = i64::try_from(*v).or_else(|_| err(*p, "integer literal too large"))?;
            zero.constant(Rat::from_int(v))
        }
        Expr::Var(..) | Expr::Jet(..) => leaf(e)?,
        Expr::Add(a, b) => eval(a, zero, leaf)?.add(&eval(b, zero, leaf)?),
        Expr::Sub(a, b) => eval(a, zero, leaf)?.sub(&eval(b, zero, leaf)?),
        Expr::Mul(a, b) => eval(a, zero, leaf)?.mul(&eval(b, zero, leaf)?),
        Expr::Neg(a) => zero.sub(&eval(a, zero, leaf)?),
        Expr::Div(a, b, p) => {
            let d = eval(b, zero, leaf)?
                .as_constant()
                .ok_or_else(|| DslError {
                    line: p.line,
                    col: p.col,
                    message: "division is only allowed by a nonzero rational constant".into(),
                })?;
            if d.is_zero() {
                return err(*p, "division by zero");
            }
            eval(a, zero, leaf)?.mul(&zero.constant(d.recip().expect("nonzero")))
        }
        Expr::Pow(a, k) => {
            let b = eval(a, zero, leaf)?;
            let mut acc = zero.constant(Rat::one());
            for _ in 0..*k {
                acc = acc.mul(&b);
            }
            acc
        }
    })
}

/// A parsed input file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    System(SystemSpec),
    Manifold(ManifoldSpec),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::System(_) => "system",
            Document::Manifold(_) => "manifold",
        }
    }
}

/// Parses one `system` or `manifold` block.
pub fn parse_document(src: &str) -> Result<Document, DslError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
    };
    let (kw, kp) = p.ident()?;
    let doc = match kw.as_str() {
        "system" => Document::System(parse_system(&mut p)?),
        "manifold" => Document::Manifold(parse_manifold(&mut p)?),
        _ => return err(kp, format!("expected `system` or `manifold`, found `{kw}`")),
    };
    match p.bump() {
        (Tok::Eof, _) => Ok(doc),
        (t, pos) => err(pos, format!("unexpected {t} after the block")),
    }
}

fn name_list(p: &mut Parser) -> Result<Vec<(String, Pos)>, DslError> {
    let mut v = vec![p.ident()?];
    while p.eat_sym(',') {
        v.push(p.ident()?);
    }
    Ok(v)
}

fn parse_system(p: &mut Parser) -> Result<SystemSpec, DslError> {
    let open = p.expect_sym('{')?;
    let mut xs: Option<Vec<(String, Pos)>> = None;
    let mut us: Option<Vec<(String, Pos)>> = None;
    let mut order: Option<(u64, Pos)> = None;
    let mut eqs: Vec<(Expr, Expr)> = Vec::new();
    loop {
        if p.eat_sym('}') {
            break;
        }
        let (key, kp) = p.ident()?;
        match key.as_str() {
            "independent" | "dependent" | "order" => {
                p.expect_sym(':')?;
                match key.as_str() {
                    "independent" if xs.is_none() => xs = Some(name_list(p)?),
                    "dependent" if us.is_none() => us = Some(name_list(p)?),
                    "order" if order.is_none() => order = Some(p.int()?),
                    _ => return err(kp, format!("`{key}` declared twice")),
                }
            }
            "eq" => {
                let lhs = p.atom()?;
                p.expect_sym('=')?;
                let rhs = p.expr()?;
                eqs.push((lhs, rhs));
            }
            _ => return err(kp, format!("unknown system item `{key}`")),
        }
        p.expect_sym(';')?;
    }
    let xs = xs.ok_or_else(|| DslError {
        line: open.line,
        col: open.col,
        message: "system block needs `independent: ...;`".into(),
    })?;
    let us = us.ok_or_else(|| DslError {
        line: open.line,
        col: open.col,
        message: "system block needs `dependent: ...;`".into(),
    })?;
    let (kappa, kpos) = order.ok_or_else(|| DslError {
        line: open.line,
        col: open.col,
        message: "system block needs `order: K;`".into(),
    })?;
    let mut seen: BTreeMap<&str, Pos> = BTreeMap::new();
    for (name, pos) in xs.iter().chain(&us) {
        if seen.insert(name, *pos).is_some() {
            return err(*pos, format!("name `{name}` declared twice"));
        }
    }
    let xnames: Vec<String> = xs.iter().map(|(s, _)| s.clone()).collect();
    let unames: Vec<String> = us.iter().map(|(s, _)| s.clone()).collect();
    let base = BaseSpace::new(xnames.len(), unames.len(), &xnames, &unames);
    let (n, m) = (base.n, base.m);
    let jet = |name: &str, idx: &[(String, Pos)], pos: Pos| -> Result<JetCoord, DslError> {
        let j = match unames.iter().position(|u| u == name) {
            Some(j) => j,
            None => return err(pos, format!("`{name}` is not a dependent variable")),
        };
        let mut ks = Vec::with_capacity(idx.len());
        for (xn, xp) in idx {
            match xnames.iter().position(|x| x == xn) {
                Some(k) => ks.push(k),
                None => return err(*xp, format!("`{xn}` is not an independent variable")),
            }
        }
        if ks.is_empty() {
            return err(pos, format!("jet `{name}[]` needs at least one variable"));
        }
        canonical_jet(n, m, j, &ks).or_else(|e| err(pos, e.to_string()))
    };
    let leaf = |e: &Expr| -> Result<JetPoly, DslError> {
        match e {
            Expr::Var(s, pos) => {
                if let Some(l) = xnames.iter().position(|x| x == s) {
                    Ok(JetPoly::from_poly(&base, base.x(l)))
                } else if let Some(j) = unames.iter().position(|u| u == s) {
                    Ok(JetPoly::from_poly(&base, base.u(j)))
                } else {
                    err(*pos, format!("unknown symbol `{s}`"))
                }
            }
            Expr::Jet(s, idx, pos) => Ok(JetPoly::coord(&base, &jet(s, idx, *pos)?)),
            _ => unreachable!("leaf"),
        }
    };
    let zero = JetPoly::zero(&base);
    let mut equations = BTreeMap::new();
    for (lhs, rhs) in &eqs {
        let c = match lhs {
            Expr::Jet(s, idx, pos) => {
                let c = jet(s, idx, *pos)?;
                if c.order() as u64 > kappa {
                    return err(*pos, format!("equation order {} exceeds the declared order {kappa}", c.order()));
                }
                c
            }
            other => {
                return err(
                    expr_pos(other),
                    "left-hand side must be a jet such as u[x,x]",
                )
            }
        };
        let v = eval(rhs, &zero, &leaf)?;
        if equations.insert(c, v).is_some() {
            return err(expr_pos(lhs), "jet determined twice");
        }
    }
    SystemSpec::new(base, kappa as usize, equations).or_else(|e| err(kpos, e.to_string()))
}

fn parse_manifold(p: &mut Parser) -> Result<ManifoldSpec, DslError> {
    let open = p.expect_sym('{')?;
    let mut dims: BTreeMap<&'static str, (u64, Pos)> = BTreeMap::new();
    let mut omegas: Vec<(String, Pos, Expr)> = Vec::new();
    loop {
        if p.eat_sym('}') {
            break;
        }
        let (key, kp) = p.ident()?;
        let slot = match key.as_str() {
            "x" => Some("x"),
            "u" => Some("u"),
            "chi" => Some("chi"),
            "truncation" => Some("truncation"),
            "omega" => None,
            _ => return err(kp, format!("unknown manifold item `{key}`")),
        };
        match slot {
            Some(s) => {
                p.expect_sym(':')?;
                let v = p.int()?;
                if dims.insert(s, v).is_some() {
                    return err(kp, format!("`{key}` declared twice"));
                }
            }
            None => {
                let (name, np) = p.ident()?;
                p.expect_sym('=')?;
                omegas.push((name, np, p.expr()?));
            }
        }
        p.expect_sym(';')?;
    }
    let need = |k: &str| -> Result<(usize, Pos), DslError> {
        match dims.get(k) {
            Some((v, pos)) if *v >= 1 => Ok((*v as usize, *pos)),
            Some((_, pos)) => err(*pos, format!("`{k}` must be at least 1")),
            None => err(open, format!("manifold block needs `{k}: N;`")),
        }
    };
    let (n, _) = need("x")?;
    let (m, _) = need("u")?;
    let (pp, _) = need("chi")?;
    let (nt, tpos) = need("truncation")?;
    let vars = ManifoldSpec::variables(n, m, pp);
    let lookup = |s: &str| -> Option<usize> {
        if let Some(i) = vars.index_of(s) {
            return Some(i);
        }
        match s {
            "x" if n == 1 => Some(0),
            "nu" if m == 1 => Some(n),
            "chi" if pp == 1 => Some(n + m),
            _ => None,
        }
    };
    let leaf = |e: &Expr| -> Result<Trunc, DslError> {
        match e {
            Expr::Var(s, pos) => match lookup(s) {
                Some(i) => Ok(Trunc(Poly::var(&vars, i), nt as u32)),
                None => err(*pos, format!("unknown symbol `{s}` (expected x.., nu.. or chi..)")),
            },
            Expr::Jet(_, _, pos) => err(*pos, "jets are not allowed in a manifold block"),
            _ => unreachable!("leaf"),
        }
    };
    let zero = Trunc(Poly::zero(&vars), nt as u32);
    let mut comps: Vec<Option<Poly>> = vec![None; m];
    for (name, np, e) in &omegas {
        let j = if m == 1 && name == "u" {
            0
        } else {
            match name.strip_prefix('u').and_then(|r| r.parse::<usize>().ok()) {
                Some(j) if (1..=m).contains(&j) => j - 1,
                _ => return err(*np, format!("`{name}` is not one of u1..u{m}")),
            }
        };
        if comps[j].is_some() {
            return err(*np, format!("omega for `{name}` given twice"));
        }
        comps[j] = Some(eval(e, &zero, &leaf)?.0);
    }
    let mut omega = Vec::with_capacity(m);
    for (j, c) in comps.into_iter().enumerate() {
        match c {
            Some(c) => omega.push(c),
            None => return err(open, format!("missing `omega u{} = ...;`", j + 1)),
        }
    }
    ManifoldSpec::new(n, m, pp, omega, nt as u32).or_else(|e| err(tpos, e.to_string()))
}

fn push_term(out: &mut String, c: &Rat, factors: &[String]) {
    let neg = c.is_negative();
    let a = c.abs();
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    if factors.is_empty() {
        out.push_str(&a.to_string());
    } else {
        if !a.is_one() {
            out.push_str(&a.to_string());
            out.push('*');
        }
        out.push_str(&factors.join("*"));
    }
}

fn power(name: &str, e: u16) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{e}")
    }
}

fn mono_factors(m: &Multiindex, names: &[String]) -> Vec<String> {
    m.exps()
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| power(&names[i], *e))
        .collect()
}

/// A polynomial in the input syntax.
pub fn format_poly(p: &Poly) -> String {
    let mut s = String::new();
    for (m, c) in p.terms().rev() {
        push_term(&mut s, c, &mono_factors(m, p.vars().names()));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn format_jet(c: &JetCoord, base: &BaseSpace) -> String {
    c.fmt_with(base.xnames(), base.unames())
}

/// A symbol-free jet polynomial in the input syntax.
pub fn format_jetpoly(e: &JetPoly) -> String {
    let base = e.base();
    let names = base.vars.names();
    let mut s = String::new();
    for (mono, form) in e.terms() {
        let jets: Vec<String> = mono
            .factors()
            .iter()
            .map(|(c, k)| power(&format_jet(c, base), *k))
            .collect();
        for (m, c) in form.cst.terms().rev() {
            let mut f = mono_factors(m, names);
            f.extend(jets.iter().cloned());
            push_term(&mut s, c, &f);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Canonical source text; parsing it gives back an equal document.
pub fn print_document(doc: &Document) -> String {
    let mut s = String::new();
    match doc {
        Document::System(spec) => {
            let b = spec.base();
            s.push_str("system {\n");
            s.push_str(&format!("  independent: {};\n", b.xnames().join(", ")));
            s.push_str(&format!("  dependent: {};\n", b.unames().join(", ")));
            s.push_str(&format!("  order: {};\n", spec.kappa()));
            for (c, rhs) in spec.equations() {
                s.push_str(&format!("  eq {} = {};\n", format_jet(c, b), format_jetpoly(rhs)));
            }
            s.push_str("}\n");
        }
        Document::Manifold(spec) => {
            s.push_str("manifold {\n");
            s.push_str(&format!("  x: {};\n  u: {};\n  chi: {};\n", spec.n(), spec.m(), spec.p()));
            s.push_str(&format!("  truncation: {};\n", spec.truncation()));
            for (j, w) in spec.omega().iter().enumerate() {
                s.push_str(&format!("  omega u{} = {};\n", j + 1, format_poly(w)));
            }
            s.push_str("}\n");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_third_order() {
        let d = parse_document("system { independent: x; dependent: u; order: 3; eq u[x,x,x] = 0; }").unwrap();
        match d {
            Document::System(s) => assert_eq!(s, SystemSpec::homogeneous(1, 1, 3).unwrap()),
            _ => panic!("expected a system"),
        }
    }

    #[test]
    fn squared_first_derivative() {
        let d = parse_document("system { independent: x; dependent: u; order: 2; eq u[x,x] = u[x]^2; }").unwrap();
        let Document::System(s) = d else { panic!() };
        let rhs = &s.equations()[&JetCoord::new(0, &[0, 0])];
        assert_eq!(format_jetpoly(rhs), "u[x]^2");
    }

    #[test]
    fn example_manifold() {
        let d = parse_document("manifold { x:2; u:1; chi:1; truncation:6; omega u1 = nu1 + x1*chi1; }").unwrap();
        let Document::Manifold(m) = &d else { panic!() };
        assert_eq!((m.n(), m.m(), m.p(), m.truncation()), (2, 1, 1, 6));
        assert_eq!(parse_document(&print_document(&d)).unwrap(), d);
    }

    #[test]
    fn errors_are_located() {
        let e = parse_document("system {\n  independent: x;\n  dependent: u;\n  order: 2;\n  eq u[x,x] = 1.5*x;\n}").unwrap_err();
        assert_eq!((e.line, e.col), (5, 15));
        assert!(e.message.contains("rational"));
        let e = parse_document("system { independent: x; dependent: u; order: 2; eq u[x,y] = 0; }").unwrap_err();
        assert!(e.message.contains("`y`"));
        let e = parse_document("manifold { x:1; u:1; chi:1; truncation:4; omega u1 = x; }").unwrap_err();
        assert!(e.message.contains("nu1"));
    }

    #[test]
    fn comments_and_rationals() {
        let src = "# header\nmanifold { x:1; u:1; chi:1; truncation:6;\n omega u = nu + x*chi + x^2*chi^2/2; # curved\n}";
        let d = parse_document(src).unwrap();
        let Document::Manifold(m) = &d else { panic!() };
        assert_eq!(format_poly(&m.omega()[0]), "1/2*x1^2*chi1^2 + x1*chi1 + nu1");
        assert_eq!(parse_document(&print_document(&d)).unwrap(), d);
    }
}
