//! Expressions on jet space: derivative symbols, coefficient forms, jet
//! polynomials and vector fields.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{Multiindex, Poly, Rat, Vars};
use crate::jet::{JetCoord, JetMonomial};
use crate::Error;

/// The base space `(x_1..x_n, u^1..u^m)` with variable names.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BaseSpace {
    pub n: usize,
    pub m: usize,
    pub vars: Vars,
}

impl BaseSpace {
    pub fn new(n: usize, m: usize, xnames: &[String], unames: &[String]) -> BaseSpace {
        assert_eq!(xnames.len(), n);
        assert_eq!(unames.len(), m);
        let names: Vec<String> = xnames.iter().chain(unames).cloned().collect();
        BaseSpace {
            n,
            m,
            vars: Vars::new(&names),
        }
    }

    /// Default names: `x`, `u` when single, otherwise `x1..`, `u1..`.
    pub fn standard(n: usize, m: usize) -> BaseSpace {
        let name = |p: &str, k: usize, i: usize| {
            if k == 1 {
                p.to_string()
            } else {
                format!("{p}{}", i + 1)
            }
        };
        let xs: Vec<String> = (0..n).map(|i| name("x", n, i)).collect();
        let us: Vec<String> = (0..m).map(|i| name("u", m, i)).collect();
        BaseSpace::new(n, m, &xs, &us)
    }

    pub fn xnames(&self) -> &[String] {
        &self.vars.names()[..self.n]
    }

    pub fn unames(&self) -> &[String] {
        &self.vars.names()[self.n..]
    }

    pub fn x(&self, l: usize) -> Poly {
        Poly::var(&self.vars, l)
    }

    pub fn u(&self, j: usize) -> Poly {
        Poly::var(&self.vars, self.n + j)
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(&self.vars)
    }

    pub fn constant(&self, c: Rat) -> Poly {
        Poly::constant(&self.vars, c)
    }
}

/// Which coefficient family a symbol refers to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SymKind {
    Q,
    R,
}

/// The partial derivative `Q^l_{x^α u^β}` or `R^j_{x^α u^β}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivSymbol {
    pub kind: SymKind,
    pub comp: usize,
    pub xo: Multiindex,
    pub uo: Multiindex,
}

impl DerivSymbol {
    pub fn base(kind: SymKind, comp: usize, n: usize, m: usize) -> DerivSymbol {
        DerivSymbol {
            kind,
            comp,
            xo: Multiindex::zero(n),
            uo: Multiindex::zero(m),
        }
    }

    pub fn q(l: usize, xo: &[u16], uo: &[u16]) -> DerivSymbol {
        DerivSymbol {
            kind: SymKind::Q,
            comp: l,
            xo: Multiindex::from_slice(xo),
            uo: Multiindex::from_slice(uo),
        }
    }

    pub fn r(j: usize, xo: &[u16], uo: &[u16]) -> DerivSymbol {
        DerivSymbol {
            kind: SymKind::R,
            comp: j,
            xo: Multiindex::from_slice(xo),
            uo: Multiindex::from_slice(uo),
        }
    }

    /// The symbol differentiated once more in base variable `i` (x's first).
    pub fn d(&self, i: usize) -> DerivSymbol {
        let n = self.xo.slots();
        let mut s = self.clone();
        if i < n {
            s.xo = s.xo.incremented(i);
        } else {
            s.uo = s.uo.incremented(i - n);
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.xo.order() + self.uo.order()
    }

    /// Combined multiindex over `(x, u)`.
    pub fn full_multiindex(&self) -> Multiindex {
        self.xo.concat(&self.uo)
    }

    pub fn fmt_with(&self, base: &BaseSpace) -> String {
        let letter = match self.kind {
            SymKind::Q => "Q",
            SymKind::R => "R",
        };
        let count = match self.kind {
            SymKind::Q => base.n,
            SymKind::R => base.m,
        };
        let head = if count == 1 {
            letter.to_string()
        } else {
            format!("{letter}{}", self.comp + 1)
        };
        let m = self.full_multiindex();
        if m.is_zero() {
            head
        } else {
            format!("{head}_{{{}}}", crate::algebra::fmt_monomial(&m, base.vars.names()))
        }
    }
}

impl fmt::Debug for DerivSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.kind {
            SymKind::Q => "Q",
            SymKind::R => "R",
        };
        write!(f, "{letter}{}_{:?}{:?}", self.comp + 1, self.xo, self.uo)
    }
}

/// An affine combination `Σ w_S(x,u)·S + c(x,u)` of derivative symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct CoeffForm {
    pub lin: BTreeMap<DerivSymbol, Poly>,
    pub cst: Poly,
}

impl CoeffForm {
    pub fn zero(vars: &Vars) -> CoeffForm {
        CoeffForm {
            lin: BTreeMap::new(),
            cst: Poly::zero(vars),
        }
    }

    pub fn from_poly(p: Poly) -> CoeffForm {
        CoeffForm {
            lin: BTreeMap::new(),
            cst: p,
        }
    }

    pub fn from_rat(vars: &Vars, c: Rat) -> CoeffForm {
        CoeffForm::from_poly(Poly::constant(vars, c))
    }

    pub fn symbol(vars: &Vars, s: DerivSymbol, w: Rat) -> CoeffForm {
        let mut f = CoeffForm::zero(vars);
        f.add_symbol(s, &Poly::constant(vars, w));
        f
    }

    pub fn vars(&self) -> &Vars {
        self.cst.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.lin.is_empty() && self.cst.is_zero()
    }

    /// True when no symbol occurs.
    pub fn is_concrete(&self) -> bool {
        self.lin.is_empty()
    }

    pub fn weight(&self, s: &DerivSymbol) -> Option<&Poly> {
        self.lin.get(s)
    }

    pub fn add_symbol(&mut self, s: DerivSymbol, w: &Poly) {
        if w.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.lin.entry(s) {
            Entry::Vacant(e) => {
                e.insert(w.clone());
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_scaled(w, &Rat::one());
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &CoeffForm, c: &Rat) {
        if c.is_zero() {
            return;
        }
        for (s, w) in &other.lin {
            self.add_symbol(s.clone(), &w.scale(c));
        }
        self.cst.add_scaled(&other.cst, c);
    }

    pub fn scale(&self, c: &Rat) -> CoeffForm {
        let mut out = CoeffForm::zero(self.vars());
        out.add_scaled(self, c);
        out
    }

    pub fn mul_poly(&self, p: &Poly) -> CoeffForm {
        let mut out = CoeffForm::zero(self.vars());
        for (s, w) in &self.lin {
            out.add_symbol(s.clone(), &(w * p));
        }
        out.cst = &self.cst * p;
        out
    }

    /// Product of two forms, at most one of which may contain symbols.
    pub fn mul(&self, other: &CoeffForm) -> Result<CoeffForm, Error> {
        match (self.is_concrete(), other.is_concrete()) {
            (_, true) => Ok(self.mul_poly(&other.cst)),
            (true, false) => Ok(other.mul_poly(&self.cst)),
            (false, false) => Err(Error::Domain(
                "product of two symbolic coefficient forms is not linear".into(),
            )),
        }
    }

    /// Partial derivative in base variable `i`, treating each symbol as a
    /// function of `(x,u)`.
    pub fn d_base(&self, i: usize) -> CoeffForm {
        let mut out = CoeffForm::zero(self.vars());
        for (s, w) in &self.lin {
            out.add_symbol(s.clone(), &w.diff(i));
            out.add_symbol(s.d(i), w);
        }
        out.cst = self.cst.diff(i);
        out
    }

    /// Replaces every symbol by the corresponding derivative of the concrete
    /// field coefficients.
    pub fn instantiate(&self, q: &[Poly], r: &[Poly]) -> Poly {
        let mut out = self.cst.clone();
        for (s, w) in &self.lin {
            let f = match s.kind {
                SymKind::Q => &q[s.comp],
                SymKind::R => &r[s.comp],
            };
            let d = f.diff_multi(&s.full_multiindex());
            if !d.is_zero() {
                out = &out + &(w * &d);
            }
        }
        out
    }

    /// Canonical representative up to a nonzero rational factor: the leading
    /// coefficient of the first nonzero weight becomes one.
    pub fn normalized(&self) -> CoeffForm {
        let lead = self
            .lin
            .values()
            .next()
            .or(if self.cst.is_zero() { None } else { Some(&self.cst) })
            .and_then(|p| p.leading().map(|(_, c)| c.clone()));
        match lead {
            Some(c) => self.scale(&c.recip().expect("nonzero")),
            None => self.clone(),
        }
    }

    pub fn fmt_with(&self, base: &BaseSpace) -> String {
        let mut parts: Vec<String> = Vec::new();
        let wrap = |p: &Poly| -> (bool, String) {
            if p.len() == 1 {
                let (m, c) = p.terms().next().unwrap();
                let neg = c.is_negative();
                let body = Poly::monomial(p.vars(), m.clone(), c.abs()).to_string();
                (neg, body)
            } else {
                (false, format!("({p})"))
            }
        };
        for (s, w) in &self.lin {
            let (neg, ws) = wrap(w);
            let term = if ws == "1" {
                s.fmt_with(base)
            } else {
                format!("{}*{}", ws, s.fmt_with(base))
            };
            parts.push(if neg { format!("-{term}") } else { term });
        }
        if !self.cst.is_zero() {
            let (neg, ws) = wrap(&self.cst);
            parts.push(if neg { format!("-{ws}") } else { ws });
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        s
    }
}

impl fmt::Debug for CoeffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.lin.keys().next().map(|s| s.xo.slots());
        match n {
            Some(_) => {
                for (s, w) in &self.lin {
                    write!(f, "({w})*{s:?} + ")?;
                }
                write!(f, "{}", self.cst)
            }
            None => write!(f, "{}", self.cst),
        }
    }
}

/// A polynomial in jet coordinates of order at least one whose coefficients
/// are [`CoeffForm`]s.
#[derive(Clone, PartialEq, Eq)]
pub struct JetPoly {
    base: BaseSpace,
    terms: BTreeMap<JetMonomial, CoeffForm>,
}

impl JetPoly {
    pub fn zero(base: &BaseSpace) -> JetPoly {
        JetPoly {
            base: base.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_form(base: &BaseSpace, f: CoeffForm) -> JetPoly {
        let mut p = JetPoly::zero(base);
        p.add_term(JetMonomial::one(), &f);
        p
    }

    pub fn from_poly(base: &BaseSpace, p: Poly) -> JetPoly {
        JetPoly::from_form(base, CoeffForm::from_poly(p))
    }

    pub fn constant(base: &BaseSpace, c: Rat) -> JetPoly {
        JetPoly::from_poly(base, Poly::constant(&base.vars, c))
    }

    /// A jet coordinate; order-zero coordinates become the base variable.
    pub fn coord(base: &BaseSpace, c: &JetCoord) -> JetPoly {
        if c.order() == 0 {
            return JetPoly::from_poly(base, base.u(c.comp()));
        }
        let mut p = JetPoly::zero(base);
        p.add_term(
            JetMonomial::coord(c.clone()),
            &CoeffForm::from_rat(&base.vars, Rat::one()),
        );
        p
    }

    pub fn symbol(base: &BaseSpace, s: DerivSymbol) -> JetPoly {
        JetPoly::from_form(base, CoeffForm::symbol(&base.vars, s, Rat::one()))
    }

    pub fn monomial(base: &BaseSpace, m: JetMonomial, f: CoeffForm) -> JetPoly {
        let mut p = JetPoly::zero(base);
        p.add_term(m, &f);
        p
    }

    pub fn base(&self) -> &BaseSpace {
        &self.base
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &CoeffForm)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &JetMonomial) -> CoeffForm {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| CoeffForm::zero(&self.base.vars))
    }

    pub fn is_concrete(&self) -> bool {
        self.terms.values().all(|f| f.is_concrete())
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(|m| m.max_order()).max().unwrap_or(0)
    }

    /// All jet coordinates occurring in some monomial.
    pub fn coords(&self) -> Vec<JetCoord> {
        let mut v: Vec<JetCoord> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(c, _)| c.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn add_term(&mut self, m: JetMonomial, f: &CoeffForm) {
        if f.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(f.clone());
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_scaled(f, &Rat::one());
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn add_term_scaled(&mut self, m: JetMonomial, f: &CoeffForm, c: &Rat) {
        if c.is_one() {
            self.add_term(m, f);
        } else {
            self.add_term(m, &f.scale(c));
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &JetPoly, c: &Rat) {
        if c.is_zero() {
            return;
        }
        for (m, f) in &other.terms {
            self.add_term_scaled(m.clone(), f, c);
        }
    }

    pub fn scale(&self, c: &Rat) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        out.add_scaled(self, c);
        out
    }

    pub fn add(&self, other: &JetPoly) -> JetPoly {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn sub(&self, other: &JetPoly) -> JetPoly {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::from_int(-1));
        out
    }

    pub fn mul_poly(&self, p: &Poly) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), &f.mul_poly(p));
        }
        out
    }

    pub fn mul_monomial(&self, mono: &JetMonomial) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            out.add_term(m.mul(mono), f);
        }
        out
    }

    /// Product; fails when both factors carry symbols.
    pub fn mul(&self, other: &JetPoly) -> Result<JetPoly, Error> {
        let mut out = JetPoly::zero(&self.base);
        for (ma, fa) in &self.terms {
            for (mb, fb) in &other.terms {
                out.add_term(ma.mul(mb), &fa.mul(fb)?);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<JetPoly, Error> {
        let mut acc = JetPoly::constant(&self.base, Rat::one());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Drops every term whose total degree, counting base variables and jet
    /// coordinates alike, exceeds `n`. Symbol parts are kept as they are.
    pub fn truncate_weighted(&self, n: u32) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            let d = m.degree();
            if d > n {
                continue;
            }
            let mut g = f.clone();
            g.cst = f.cst.truncate(n - d);
            out.add_term(m.clone(), &g);
        }
        out
    }

    /// Partial derivative in base variable `i` (x's first, then u's).
    pub fn d_base(&self, i: usize) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), &f.d_base(i));
        }
        out
    }

    /// Partial derivative in a jet coordinate of order at least one.
    pub fn d_coord(&self, c: &JetCoord) -> JetPoly {
        if c.order() == 0 {
            return self.d_base(self.base.n + c.comp());
        }
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            let e = m.power_of(c);
            if e > 0 {
                out.add_term_scaled(m.without(c, 1), f, &Rat::from_int(e as i64));
            }
        }
        out
    }

    /// The total derivative `D_k` (zero-based `k`).
    pub fn total_derivative(&self, k: usize) -> JetPoly {
        let n = self.base.n;
        let mut out = JetPoly::zero(&self.base);
        for (mono, f) in &self.terms {
            out.add_term(mono.clone(), &f.d_base(k));
            for i in 0..self.base.m {
                let fu = f.d_base(n + i);
                if !fu.is_zero() {
                    out.add_term(mono.times_coord(&JetCoord::new(i, &[k]), 1), &fu);
                }
            }
            for (c, e) in mono.factors() {
                let shifted = mono.without(c, 1).times_coord(&c.extended(k), 1);
                out.add_term_scaled(shifted, f, &Rat::from_int(*e as i64));
            }
        }
        out
    }

    /// Checked total derivative with a one-based-style range check.
    pub fn try_total_derivative(&self, k: usize) -> Result<JetPoly, Error> {
        if k >= self.base.n {
            return Err(Error::Domain(format!(
                "total derivative index {} out of range 1..{}",
                k + 1,
                self.base.n
            )));
        }
        Ok(self.total_derivative(k))
    }

    /// Replaces coordinates by jet polynomials. Replacement expressions must
    /// be symbol-free.
    pub fn substitute(&self, map: &BTreeMap<JetCoord, JetPoly>) -> Result<JetPoly, Error> {
        let mut out = JetPoly::zero(&self.base);
        let mut cache: BTreeMap<(JetCoord, u16), JetPoly> = BTreeMap::new();
        for (mono, f) in &self.terms {
            let mut keep = JetMonomial::one();
            let mut repl: Vec<(JetCoord, u16)> = Vec::new();
            for (c, e) in mono.factors() {
                if map.contains_key(c) {
                    repl.push((c.clone(), *e));
                } else {
                    keep = keep.times_coord(c, *e);
                }
            }
            if repl.is_empty() {
                out.add_term(mono.clone(), f);
                continue;
            }
            let mut acc = JetPoly::monomial(&self.base, keep, f.clone());
            for (c, e) in repl {
                let key = (c.clone(), e);
                if !cache.contains_key(&key) {
                    cache.insert(key.clone(), map[&c].pow(e as u32)?);
                }
                acc = acc.mul(&cache[&key])?;
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, &Rat::one());
        }
        Ok(out)
    }

    /// Substitutes concrete field coefficients for every symbol.
    pub fn instantiate(&self, q: &[Poly], r: &[Poly]) -> JetPoly {
        let mut out = JetPoly::zero(&self.base);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), &CoeffForm::from_poly(f.instantiate(q, r)));
        }
        out
    }

    /// Evaluates a symbol-free jet polynomial with every base variable and
    /// jet coordinate replaced by a value in some ring, given by callbacks.
    pub fn coefficient_forms(&self) -> impl Iterator<Item = &CoeffForm> {
        self.terms.values()
    }

    pub fn fmt_with_base(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let xn = self.base.xnames();
        let un = self.base.unames();
        let mut parts = Vec::new();
        for (m, f) in &self.terms {
            let fs = f.fmt_with(&self.base);
            let single = f.lin.len() + usize::from(!f.cst.is_zero()) == 1
                && !fs.contains(" + ")
                && !fs.contains(" - ");
            if m.is_one() {
                parts.push(fs);
            } else if fs == "1" {
                parts.push(m.fmt_with(xn, un));
            } else if fs == "-1" {
                parts.push(format!("-{}", m.fmt_with(xn, un)));
            } else if single {
                parts.push(format!("{}*{}", fs, m.fmt_with(xn, un)));
            } else {
                parts.push(format!("[{}]*{}", fs, m.fmt_with(xn, un)));
            }
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        s
    }
}

impl fmt::Display for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with_base())
    }
}

impl fmt::Debug for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetPoly({})", self.fmt_with_base())
    }
}

/// A vector field `Σ Q^l ∂/∂x_l + Σ R^j ∂/∂u^j`.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    base: BaseSpace,
    q: Vec<Poly>,
    r: Vec<Poly>,
    symbolic: bool,
}

impl VectorField {
    /// The fully symbolic field with unknown coefficients `Q^l`, `R^j`.
    pub fn symbolic(base: &BaseSpace) -> VectorField {
        VectorField {
            base: base.clone(),
            q: vec![base.zero(); base.n],
            r: vec![base.zero(); base.m],
            symbolic: true,
        }
    }

    pub fn concrete(base: &BaseSpace, q: Vec<Poly>, r: Vec<Poly>) -> Result<VectorField, Error> {
        if q.len() != base.n || r.len() != base.m {
            return Err(Error::Domain(format!(
                "vector field needs {} x-coefficients and {} u-coefficients",
                base.n, base.m
            )));
        }
        if q.iter().chain(&r).any(|p| *p.vars() != base.vars) {
            return Err(Error::Domain("coefficient variable set mismatch".into()));
        }
        Ok(VectorField {
            base: base.clone(),
            q,
            r,
            symbolic: false,
        })
    }

    pub fn zero(base: &BaseSpace) -> VectorField {
        VectorField::concrete(base, vec![base.zero(); base.n], vec![base.zero(); base.m])
            .expect("shape")
    }

    /// `∂/∂x_l`.
    pub fn dx(base: &BaseSpace, l: usize) -> VectorField {
        let mut v = VectorField::zero(base);
        v.q[l] = base.constant(Rat::one());
        v
    }

    /// `∂/∂u^j`.
    pub fn du(base: &BaseSpace, j: usize) -> VectorField {
        let mut v = VectorField::zero(base);
        v.r[j] = base.constant(Rat::one());
        v
    }

    /// `p ∂/∂x_l`.
    pub fn along_x(base: &BaseSpace, l: usize, p: Poly) -> VectorField {
        let mut v = VectorField::zero(base);
        v.q[l] = p;
        v
    }

    /// `p ∂/∂u^j`.
    pub fn along_u(base: &BaseSpace, j: usize, p: Poly) -> VectorField {
        let mut v = VectorField::zero(base);
        v.r[j] = p;
        v
    }

    pub fn base(&self) -> &BaseSpace {
        &self.base
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic
    }

    pub fn q(&self) -> &[Poly] {
        &self.q
    }

    pub fn r(&self) -> &[Poly] {
        &self.r
    }

    /// Coefficient of `∂/∂(base variable i)`.
    pub fn coeff(&self, i: usize) -> &Poly {
        if i < self.base.n {
            &self.q[i]
        } else {
            &self.r[i - self.base.n]
        }
    }

    /// All coefficients in base-variable order.
    pub fn coeffs(&self) -> Vec<Poly> {
        self.q.iter().chain(&self.r).cloned().collect()
    }

    pub fn from_coeffs(base: &BaseSpace, c: Vec<Poly>) -> VectorField {
        let r = c[base.n..].to_vec();
        let q = c[..base.n].to_vec();
        VectorField::concrete(base, q, r).expect("shape")
    }

    pub fn is_zero(&self) -> bool {
        !self.symbolic && self.q.iter().chain(&self.r).all(|p| p.is_zero())
    }

    /// Coefficient `Q^l` as a jet polynomial.
    pub fn q_jet(&self, l: usize) -> JetPoly {
        if self.symbolic {
            JetPoly::symbol(&self.base, DerivSymbol::base(SymKind::Q, l, self.base.n, self.base.m))
        } else {
            JetPoly::from_poly(&self.base, self.q[l].clone())
        }
    }

    /// Coefficient `R^j` as a jet polynomial.
    pub fn r_jet(&self, j: usize) -> JetPoly {
        if self.symbolic {
            JetPoly::symbol(&self.base, DerivSymbol::base(SymKind::R, j, self.base.n, self.base.m))
        } else {
            JetPoly::from_poly(&self.base, self.r[j].clone())
        }
    }

    /// `a·self + b·other` for concrete fields.
    pub fn combine(&self, a: &Rat, other: &VectorField, b: &Rat) -> VectorField {
        let f = |x: &Poly, y: &Poly| {
            let mut p = x.scale(a);
            p.add_scaled(y, b);
            p
        };
        VectorField {
            base: self.base.clone(),
            q: self.q.iter().zip(&other.q).map(|(x, y)| f(x, y)).collect(),
            r: self.r.iter().zip(&other.r).map(|(x, y)| f(x, y)).collect(),
            symbolic: false,
        }
    }

    /// Applies the field as a derivation to a polynomial in `(x,u)`.
    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = self.base.zero();
        for i in 0..self.base.n + self.base.m {
            let d = p.diff(i);
            if !d.is_zero() {
                out = &out + &(self.coeff(i) * &d);
            }
        }
        out
    }

    /// Flat coefficient vector over a fixed monomial basis of degree `≤ deg`.
    pub fn coefficient_vector(&self, deg: u32) -> Vec<Rat> {
        let basis = crate::algebra::multiindex_enumerate(self.base.n + self.base.m, deg);
        let mut v = Vec::new();
        for p in self.q.iter().chain(&self.r) {
            for mono in &basis {
                v.push(p.coeff(mono));
            }
        }
        v
    }

    /// Highest total degree among the coefficients.
    pub fn degree(&self) -> u32 {
        self.q
            .iter()
            .chain(&self.r)
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbolic {
            return write!(f, "Σ Q^l ∂/∂x_l + Σ R^j ∂/∂u^j");
        }
        let names = self.base.vars.names();
        let mut parts = Vec::new();
        for (i, p) in self.q.iter().chain(&self.r).enumerate() {
            if p.is_zero() {
                continue;
            }
            let d = format!("d/d{}", names[i]);
            if p.is_constant() && p.constant_term().is_one() {
                parts.push(d);
            } else if p.len() == 1 {
                parts.push(format!("{p}*{d}"));
            } else {
                parts.push(format!("({p})*{d}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_derivative_examples() {
        let b = BaseSpace::standard(1, 1);
        let x = JetPoly::from_poly(&b, b.x(0));
        assert_eq!(x.total_derivative(0), JetPoly::constant(&b, Rat::one()));

        let r = JetPoly::symbol(&b, DerivSymbol::base(SymKind::R, 0, 1, 1));
        let dr = r.total_derivative(0);
        let mut expect = JetPoly::symbol(&b, DerivSymbol::r(0, &[1], &[0]));
        expect.add_term(
            JetMonomial::coord(JetCoord::new(0, &[0])),
            &CoeffForm::symbol(&b.vars, DerivSymbol::r(0, &[0], &[1]), Rat::one()),
        );
        assert_eq!(dr, expect);

        let u1 = JetPoly::coord(&b, &JetCoord::new(0, &[0]));
        assert_eq!(u1.total_derivative(0), JetPoly::coord(&b, &JetCoord::new(0, &[0, 0])));
        assert!(u1.try_total_derivative(1).is_err());
    }

    #[test]
    fn product_rule() {
        let b = BaseSpace::standard(2, 1);
        let a = JetPoly::coord(&b, &JetCoord::new(0, &[0])).mul_poly(&b.x(1));
        let c = JetPoly::coord(&b, &JetCoord::new(0, &[1, 1])).mul_poly(&b.u(0));
        for k in 0..2 {
            let lhs = a.mul(&c).unwrap().total_derivative(k);
            let rhs = a
                .total_derivative(k)
                .mul(&c)
                .unwrap()
                .add(&a.mul(&c.total_derivative(k)).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}
