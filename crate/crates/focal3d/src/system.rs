//! System definitions and the line-oriented file grammar.
//!
//! A system file declares `lambda`, the unperturbed polynomials `P, Q, R`
//! (no constant or linear terms), a perturbation parameter list and the
//! perturbation polynomials `G1, G2, G3` whose monomial coefficients are
//! single declared parameters. Catalog entries additionally declare `free`
//! coefficient names inside P, Q, R and `condition` lines (solved
//! substitutions or polynomial constraints) describing a center variety.
//!
//! Example:
//!
//! ```text
//! # quadratic rigid system
//! lambda = 1
//! P = x^2 + 2*x*y + 3*x*z
//! Q = x*y + 2*y^2 + 3*y*z
//! R = 2/3*x^2 + x*y + 4*x*z - 2/3*y^2 + 3*y*z + 6*z^2
//! params = a002, a011, a020
//! G1 = a020*y^2 + a011*y*z + a002*z^2
//! G2 = 0
//! G3 = 0
//! ```

use crate::jet::{JetPoly, ParamIndex};
use crate::mpoly::MPoly;
use crate::poly3::{mono_degree, Mono3, Poly3};
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Validation(String),
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

/// The unperturbed system: `ẋ = -y + P`, `ẏ = x + Q`, `ż = -λz + R`, with
/// P, Q, R rational-coefficient polynomials carrying no constant or linear
/// terms, and λ ≠ 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub lambda: Rational,
    pub p: Poly3,
    pub q: Poly3,
    pub r: Poly3,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<(), ParseError> {
        if self.lambda.is_zero() {
            return Err(ParseError::Validation("lambda must be nonzero".into()));
        }
        for (name, poly) in [("P", &self.p), ("Q", &self.q), ("R", &self.r)] {
            if let Some(d) = poly.min_degree() {
                if d < 2 {
                    return Err(ParseError::Validation(format!(
                        "{name} contains a term of total degree {d}; constant and linear terms are forbidden"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The three components of the full vector field at jet order `trunc`,
    /// including the linear part and a perturbation.
    pub fn vector_field(&self, pert: &Perturbation, trunc: u32) -> [Poly3; 3] {
        let mut fx = Poly3::from_rational_terms([((0, 1, 0), -Rational::one())], trunc);
        fx.add_assign(&retrunc(&self.p, trunc));
        fx.add_assign(&retrunc(&pert.g[0], trunc));
        let mut fy = Poly3::from_rational_terms([((1, 0, 0), Rational::one())], trunc);
        fy.add_assign(&retrunc(&self.q, trunc));
        fy.add_assign(&retrunc(&pert.g[1], trunc));
        let mut fz = Poly3::from_rational_terms([((0, 0, 1), -self.lambda.clone())], trunc);
        fz.add_assign(&retrunc(&self.r, trunc));
        fz.add_assign(&retrunc(&pert.g[2], trunc));
        [fx, fy, fz]
    }
}

/// Reinterpret all jet coefficients at a different truncation order
/// (dropping terms when lowering).
pub fn retrunc(p: &Poly3, trunc: u32) -> Poly3 {
    let mut r = Poly3::zero();
    for (m, c) in p.terms() {
        r.add_term(*m, c.truncate_to(trunc));
    }
    r
}

/// The quadratic (or higher) perturbation: G₁, G₂, G₃ with one declared
/// parameter per monomial slot, plus the optional trace switch.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub params: Vec<ParamIndex>,
    /// Perturbation polynomials at jet order 1.
    pub g: [Poly3; 3],
    pub trace: bool,
}

impl Perturbation {
    pub fn empty() -> Self {
        Perturbation {
            params: Vec::new(),
            g: [Poly3::zero(), Poly3::zero(), Poly3::zero()],
            trace: false,
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.params {
            if !seen.insert(&p.name) {
                return Err(ParseError::Validation(format!(
                    "duplicate parameter name {}",
                    p.name
                )));
            }
        }
        for (i, g) in self.g.iter().enumerate() {
            if let Some(d) = g.min_degree() {
                if d < 2 {
                    return Err(ParseError::Validation(format!(
                        "G{} contains a term of total degree {d}; constant and linear terms are forbidden",
                        i + 1
                    )));
                }
            }
            for (m, c) in g.terms() {
                let ok = c.num_terms() == 1
                    && c.terms().all(|(mono, coeff)| {
                        mono.degree() == 1 && coeff.is_one()
                    });
                if !ok {
                    return Err(ParseError::Validation(format!(
                        "G{} coefficient of x^{} y^{} z^{} must be a single declared parameter",
                        i + 1,
                        m.0,
                        m.1,
                        m.2
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The full standard degree-`deg` perturbation: one parameter per monomial
/// of total degree `deg` in each component, named `<prefix><j><k><l>`.
/// Names listed in `mask` are omitted entirely. Only `deg = 2` is supported.
pub fn standard_perturbation(
    prefixes: [&str; 3],
    deg: u32,
    mask: &[&str],
) -> Result<Perturbation, ParseError> {
    if deg != 2 {
        return Err(ParseError::Validation(format!(
            "standard perturbation supports degree 2 only, not {deg}"
        )));
    }
    let mut params: Vec<ParamIndex> = Vec::new();
    let mut slots: Vec<(usize, Mono3)> = Vec::new(); // (component, monomial)
    for (comp, prefix) in prefixes.iter().enumerate() {
        for j in 0..=deg as u16 {
            for k in 0..=(deg as u16 - j) {
                let l = deg as u16 - j - k;
                let name = format!("{prefix}{j}{k}{l}");
                if mask.contains(&name.as_str()) {
                    continue;
                }
                params.push(ParamIndex {
                    name,
                    position: params.len(),
                });
                slots.push((comp, (j, k, l)));
            }
        }
    }
    let mut g = [Poly3::zero(), Poly3::zero(), Poly3::zero()];
    for (pos, (comp, m)) in slots.iter().enumerate() {
        g[*comp].add_term(*m, JetPoly::param(pos, 1));
    }
    let pert = Perturbation {
        params,
        g,
        trace: false,
    };
    pert.validate()?;
    Ok(pert)
}

/// A center condition: either a solved substitution `name = num/den` or a
/// polynomial constraint `poly = 0`, over the free coefficient names.
#[derive(Clone, Debug)]
pub enum Condition {
    Solved {
        name: usize,
        num: MPoly,
        den: MPoly,
        text: String,
    },
    Constraint {
        poly: MPoly,
        text: String,
    },
}

impl Condition {
    pub fn text(&self) -> &str {
        match self {
            Condition::Solved { text, .. } | Condition::Constraint { text, .. } => text,
        }
    }
}

/// A parsed system file: possibly a template with free coefficients and
/// center conditions (a catalog entry), possibly fully numeric.
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub id: String,
    pub source: String,
    pub lambda: Rational,
    pub free_names: Vec<String>,
    /// P, Q, R with coefficients polynomial in the free names.
    pub template: [BTreeMap<Mono3, MPoly>; 3],
    pub pert: Perturbation,
    pub conditions: Vec<Condition>,
    pub expected_rank: Option<usize>,
    pub rank_k: Option<usize>,
    pub alpha_scale: Rational,
    pub solve_for: Option<String>,
}

impl SystemFile {
    pub fn is_numeric(&self) -> bool {
        self.free_names.is_empty()
    }

    /// Instantiate with an assignment of the free coefficients.
    ///
    /// Solved conditions compute (or cross-check) their left-hand names;
    /// constraints are verified exactly. A violated or non-evaluable
    /// condition is reported with its source text.
    pub fn instantiate(
        &self,
        sample: &BTreeMap<String, Rational>,
    ) -> Result<SystemSpec, ParseError> {
        let n = self.free_names.len();
        let mut values: Vec<Option<Rational>> = vec![None; n];
        for (name, v) in sample {
            match self.free_names.iter().position(|f| f == name) {
                Some(i) => values[i] = Some(v.clone()),
                None => {
                    return Err(ParseError::Validation(format!(
                        "unknown free coefficient {name}"
                    )))
                }
            }
        }
        // solved conditions in declaration order
        for cond in &self.conditions {
            if let Condition::Solved { name, num, den, text } = cond {
                let den_v = eval_partial(den, &values, &self.free_names, text)?;
                if den_v.is_zero() {
                    return Err(ParseError::Validation(format!(
                        "condition `{text}` rejected: denominator vanishes at the sample"
                    )));
                }
                let rhs = eval_partial(num, &values, &self.free_names, text)? / den_v;
                match &values[*name] {
                    Some(existing) => {
                        if *existing != rhs {
                            return Err(ParseError::Validation(format!(
                                "condition `{text}` violated: {} = {existing}, expected {rhs}",
                                self.free_names[*name]
                            )));
                        }
                    }
                    None => values[*name] = Some(rhs),
                }
            }
        }
        let point = collect_point(&values, "system instantiation")?;
        for cond in &self.conditions {
            if let Condition::Constraint { poly, text } = cond {
                let v = poly.eval(&point);
                if !v.is_zero() {
                    return Err(ParseError::Validation(format!(
                        "condition `{text}` violated: evaluates to {v}"
                    )));
                }
            }
        }
        let polys: Vec<Poly3> = self
            .template
            .iter()
            .map(|t| {
                let mut p = Poly3::zero();
                for (m, c) in t {
                    p.add_term(*m, JetPoly::constant(c.eval(&point), 0));
                }
                p
            })
            .collect();
        let spec = SystemSpec {
            lambda: self.lambda.clone(),
            p: polys[0].clone(),
            q: polys[1].clone(),
            r: polys[2].clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Free names that a sample must provide: not determined by solved
    /// conditions and not the designated constraint-solving name.
    pub fn independent_names(&self) -> Vec<String> {
        self.free_names
            .iter()
            .enumerate()
            .filter(|(i, name)| {
                let solved = self.conditions.iter().any(|c| match c {
                    Condition::Solved { name: n, .. } => n == i,
                    _ => false,
                });
                !solved && Some(name.as_str()) != self.solve_for.as_deref()
            })
            .map(|(_, n)| n.clone())
            .collect()
    }
}

fn collect_point(values: &[Option<Rational>], ctx: &str) -> Result<Vec<Rational>, ParseError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.clone().ok_or_else(|| {
                ParseError::Validation(format!(
                    "free coefficient #{i} has no value (needed by {ctx})"
                ))
            })
        })
        .collect()
}

/// Evaluate a polynomial using only the values of the names it mentions.
fn eval_partial(
    p: &MPoly,
    values: &[Option<Rational>],
    names: &[String],
    ctx: &str,
) -> Result<Rational, ParseError> {
    let mut acc = Rational::zero();
    for (e, c) in p.terms() {
        let mut t = c.clone();
        for (v, &pow) in e.iter().enumerate() {
            if pow == 0 {
                continue;
            }
            let val = values[v].as_ref().ok_or_else(|| {
                ParseError::Validation(format!(
                    "free coefficient {} has no value (needed by `{ctx}`)",
                    names[v]
                ))
            })?;
            for _ in 0..pow {
                t *= val;
            }
        }
        acc += t;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// expression parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Int(Rational),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    Comma,
    Semi,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    line: usize,
}

impl Lexer {
    fn new(text: &str, line: usize, col0: usize) -> Result<Lexer, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = col0 + i + 1;
            match c {
                ' ' | '\t' => {
                    i += 1;
                }
                '+' => {
                    toks.push((Tok::Plus, line, col));
                    i += 1;
                }
                '-' => {
                    toks.push((Tok::Minus, line, col));
                    i += 1;
                }
                '*' => {
                    toks.push((Tok::Star, line, col));
                    i += 1;
                }
                '/' => {
                    toks.push((Tok::Slash, line, col));
                    i += 1;
                }
                '^' => {
                    toks.push((Tok::Caret, line, col));
                    i += 1;
                }
                '(' => {
                    toks.push((Tok::LParen, line, col));
                    i += 1;
                }
                ')' => {
                    toks.push((Tok::RParen, line, col));
                    i += 1;
                }
                '=' => {
                    toks.push((Tok::Eq, line, col));
                    i += 1;
                }
                ',' => {
                    toks.push((Tok::Comma, line, col));
                    i += 1;
                }
                ';' => {
                    toks.push((Tok::Semi, line, col));
                    i += 1;
                }
                '0'..='9' => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let v = s.parse::<num_bigint::BigInt>().map_err(|_| {
                        syntax(line, col, format!("invalid integer literal `{s}`"))
                    })?;
                    toks.push((Tok::Int(Rational::from_integer(v)), line, col));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                    {
                        i += 1;
                    }
                    toks.push((Tok::Name(chars[start..i].iter().collect()), line, col));
                }
                other => {
                    return Err(syntax(line, col, format!("unexpected character `{other}`")));
                }
            }
        }
        Ok(Lexer { toks, pos: 0, line })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((self.line, 0))
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            let (l, c) = self.here();
            return Err(syntax(l, c, "trailing input after expression"));
        }
        Ok(())
    }
}

/// A rational-function expression value over an indexed variable space.
#[derive(Clone, Debug)]
struct RatExpr {
    num: MPoly,
    den: MPoly,
}

impl RatExpr {
    fn poly(p: MPoly) -> Self {
        let n = p.nvars();
        RatExpr {
            num: p,
            den: MPoly::one(n),
        }
    }

    fn add(&self, o: &RatExpr) -> RatExpr {
        RatExpr {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    fn sub(&self, o: &RatExpr) -> RatExpr {
        RatExpr {
            num: self.num.mul(&o.den).sub(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    fn mul(&self, o: &RatExpr) -> RatExpr {
        RatExpr {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }

    fn div(&self, o: &RatExpr) -> Result<RatExpr, String> {
        if o.num.is_zero() {
            return Err("division by zero".into());
        }
        Ok(RatExpr {
            num: self.num.mul(&o.den),
            den: self.den.mul(&o.num),
        })
    }

    fn neg(&self) -> RatExpr {
        RatExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn pow(&self, e: u32) -> RatExpr {
        RatExpr {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }
}

struct ExprParser<'a> {
    lex: Lexer,
    vars: &'a BTreeMap<String, usize>,
    nvars: usize,
}

impl<'a> ExprParser<'a> {
    fn parse_expr(&mut self) -> Result<RatExpr, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.lex.peek() {
                Some(Tok::Plus) => {
                    self.lex.next();
                    acc = acc.add(&self.parse_term()?);
                }
                Some(Tok::Minus) => {
                    self.lex.next();
                    acc = acc.sub(&self.parse_term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<RatExpr, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.lex.peek() {
                Some(Tok::Star) => {
                    self.lex.next();
                    acc = acc.mul(&self.parse_unary()?);
                }
                Some(Tok::Slash) => {
                    self.lex.next();
                    let (l, c) = self.lex.here();
                    let rhs = self.parse_unary()?;
                    acc = acc.div(&rhs).map_err(|m| syntax(l, c, m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RatExpr, ParseError> {
        match self.lex.peek() {
            Some(Tok::Minus) => {
                self.lex.next();
                Ok(self.parse_unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.lex.next();
                self.parse_unary()
            }
            _ => self.parse_atom_pow(),
        }
    }

    fn parse_atom_pow(&mut self) -> Result<RatExpr, ParseError> {
        let base = self.parse_atom()?;
        if self.lex.peek() == Some(&Tok::Caret) {
            self.lex.next();
            let (l, c) = self.lex.here();
            match self.lex.next() {
                Some(Tok::Int(v)) => {
                    let e: u32 = v
                        .to_integer()
                        .try_into()
                        .map_err(|_| syntax(l, c, "exponent out of range"))?;
                    Ok(base.pow(e))
                }
                _ => Err(syntax(l, c, "expected integer exponent after `^`")),
            }
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<RatExpr, ParseError> {
        let (l, c) = self.lex.here();
        match self.lex.next() {
            Some(Tok::Int(v)) => Ok(RatExpr::poly(MPoly::constant(v, self.nvars))),
            Some(Tok::Name(n)) => match self.vars.get(&n) {
                Some(&i) => Ok(RatExpr::poly(MPoly::var(i, self.nvars))),
                None => Err(syntax(l, c, format!("unknown name `{n}`"))),
            },
            Some(Tok::LParen) => {
                let e = self.parse_expr()?;
                let (l2, c2) = self.lex.here();
                match self.lex.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(syntax(l2, c2, "expected `)`")),
                }
            }
            _ => Err(syntax(l, c, "expected a number, name or `(`")),
        }
    }
}

/// Parse a polynomial expression over the given variable names (rational
/// coefficients; division only by constants). Certificate files use this
/// with the single name `alpha`.
pub fn parse_polynomial_in(names: &[&str], text: &str) -> Result<MPoly, ParseError> {
    let vars: BTreeMap<String, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), i))
        .collect();
    let lex = Lexer::new(text, 1, 0)?;
    let mut p = ExprParser {
        lex,
        vars: &vars,
        nvars: names.len(),
    };
    let e = p.parse_expr()?;
    p.lex.expect_end()?;
    let den = e.den.constant_value().ok_or_else(|| {
        ParseError::Validation("expected a polynomial, found division by a variable".into())
    })?;
    if den.is_zero() {
        return Err(ParseError::Validation("division by zero".into()));
    }
    Ok(e.num.scale(&(Rational::one() / den)))
}

// ---------------------------------------------------------------------------
// file parsing
// ---------------------------------------------------------------------------

/// Parse a system (or catalog entry) file.
pub fn parse_system(text: &str) -> Result<SystemFile, ParseError> {
    // phase 1: key/value lines
    let mut kv: Vec<(String, String, usize, usize)> = Vec::new(); // key, value, line, value col
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let eq = stripped
            .find('=')
            .ok_or_else(|| syntax(line, 1, "expected `key = value`"))?;
        let key = stripped[..eq].trim().to_string();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(syntax(line, 1, format!("invalid key `{key}`")));
        }
        kv.push((key, stripped[eq + 1..].to_string(), line, eq + 1));
    }

    let find = |key: &str| kv.iter().find(|(k, _, _, _)| k == key);
    let mut taken: std::collections::BTreeSet<usize> = Default::default();

    // names
    let parse_names = |value: &str, line: usize| -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        for part in value.split(',') {
            let name = part.trim();
            if name.is_empty() {
                continue;
            }
            if !name.chars().next().unwrap().is_ascii_alphabetic()
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(syntax(line, 1, format!("invalid name `{name}`")));
            }
            out.push(name.to_string());
        }
        Ok(out)
    };

    let param_names: Vec<String> = match find("params") {
        Some((_, v, l, _)) => parse_names(v, *l)?,
        None => Vec::new(),
    };
    let free_names: Vec<String> = match find("free") {
        Some((_, v, l, _)) => parse_names(v, *l)?,
        None => Vec::new(),
    };
    for f in &free_names {
        if param_names.contains(f) {
            return Err(ParseError::Validation(format!(
                "name `{f}` declared both free and as a parameter"
            )));
        }
    }

    // variable space: x y z, then free names, then params
    let mut vars: BTreeMap<String, usize> = BTreeMap::new();
    for (i, v) in ["x", "y", "z"].into_iter().enumerate() {
        vars.insert(v.to_string(), i);
    }
    for (i, f) in free_names.iter().enumerate() {
        if vars.contains_key(f) {
            return Err(ParseError::Validation(format!("reserved name `{f}`")));
        }
        vars.insert(f.clone(), 3 + i);
    }
    for (i, p) in param_names.iter().enumerate() {
        if vars.contains_key(p) {
            return Err(ParseError::Validation(format!("reserved name `{p}`")));
        }
        vars.insert(p.clone(), 3 + free_names.len() + i);
    }
    let nvars = vars.len();
    let free_base = 3;
    let param_base = 3 + free_names.len();

    let parse_value_expr = |value: &str, line: usize, col: usize| -> Result<RatExpr, ParseError> {
        let lex = Lexer::new(value, line, col)?;
        let mut p = ExprParser {
            lex,
            vars: &vars,
            nvars,
        };
        let e = p.parse_expr()?;
        p.lex.expect_end()?;
        Ok(e)
    };

    // lambda
    let lambda = match find("lambda") {
        Some((_, v, l, c)) => {
            let e = parse_value_expr(v, *l, *c)?;
            let num = e.num.constant_value();
            let den = e.den.constant_value();
            match (num, den) {
                (Some(n), Some(d)) if !d.is_zero() => n / d,
                _ => return Err(syntax(*l, *c, "lambda must be a rational constant")),
            }
        }
        None => return Err(ParseError::Validation("missing `lambda = ...`".into())),
    };

    // polynomial bodies
    let mut template: [BTreeMap<Mono3, MPoly>; 3] = Default::default();
    let mut gpolys: [Poly3; 3] = [Poly3::zero(), Poly3::zero(), Poly3::zero()];
    for (key, value, line, col) in &kv {
        let (slot, is_g): (usize, bool) = match key.as_str() {
            "P" => (0, false),
            "Q" => (1, false),
            "R" => (2, false),
            "G1" => (0, true),
            "G2" => (1, true),
            "G3" => (2, true),
            _ => continue,
        };
        taken.insert(*line);
        let e = parse_value_expr(value, *line, *col)?;
        let den = e.den.constant_value().ok_or_else(|| {
            syntax(*line, *col, "polynomial bodies cannot divide by a variable")
        })?;
        if den.is_zero() {
            return Err(syntax(*line, *col, "division by zero"));
        }
        let poly = e.num.scale(&(Rational::one() / den));
        // split exponents into (x,y,z) monomial and coefficient variables
        for (exps, coeff) in poly.terms() {
            let m: Mono3 = (exps[0], exps[1], exps[2]);
            if is_g {
                // must be exactly one parameter, degree 1, coefficient 1
                let mut param: Option<usize> = None;
                let mut ok = coeff.is_one();
                for (v, &p) in exps.iter().enumerate().skip(3) {
                    if p == 0 {
                        continue;
                    }
                    if v < param_base || p != 1 || param.is_some() {
                        ok = false;
                        break;
                    }
                    param = Some(v - param_base);
                }
                let Some(pidx) = param else {
                    return Err(ParseError::Validation(format!(
                        "G{}: coefficient of x^{} y^{} z^{} must be a single declared parameter",
                        slot + 1,
                        m.0,
                        m.1,
                        m.2
                    )));
                };
                if !ok {
                    return Err(ParseError::Validation(format!(
                        "G{}: coefficient of x^{} y^{} z^{} must be a single declared parameter with unit coefficient",
                        slot + 1,
                        m.0,
                        m.1,
                        m.2
                    )));
                }
                if mono_degree(&m) < 2 {
                    return Err(ParseError::Validation(format!(
                        "G{} contains a term of total degree {}; constant and linear terms are forbidden",
                        slot + 1,
                        mono_degree(&m)
                    )));
                }
                gpolys[slot].add_term(m, JetPoly::param(pidx, 1));
            } else {
                // free-name polynomial coefficient; parameters forbidden
                if exps.iter().skip(param_base).any(|&p| p != 0) {
                    return Err(ParseError::Validation(format!(
                        "{key}: perturbation parameters cannot appear in P, Q, R"
                    )));
                }
                if mono_degree(&m) < 2 {
                    return Err(ParseError::Validation(format!(
                        "{key} contains a term of total degree {}; constant and linear terms are forbidden",
                        mono_degree(&m)
                    )));
                }
                let mut fe = vec![0u16; free_names.len()];
                fe.copy_from_slice(&exps[free_base..param_base]);
                let mut full = vec![0u16; free_names.len()];
                full.copy_from_slice(&fe);
                let mut c = MPoly::zero(free_names.len());
                c.add_term(full, coeff.clone());
                template[slot]
                    .entry(m)
                    .and_modify(|p| *p = p.add(&c))
                    .or_insert(c);
            }
        }
        // drop zero coefficients
        for t in template.iter_mut() {
            t.retain(|_, c| !c.is_zero());
        }
    }

    // conditions (over free names only)
    let mut conditions = Vec::new();
    let free_vars: BTreeMap<String, usize> = free_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    for (key, value, line, col) in &kv {
        if key != "condition" {
            continue;
        }
        for part in value.split(';') {
            let text = part.trim().to_string();
            if text.is_empty() {
                continue;
            }
            let lex = Lexer::new(part, *line, *col)?;
            // split at the Eq token
            let eq_pos = lex
                .toks
                .iter()
                .position(|(t, _, _)| *t == Tok::Eq)
                .ok_or_else(|| syntax(*line, *col, "condition must contain `=`"))?;
            let lhs_toks = lex.toks[..eq_pos].to_vec();
            let rhs_toks = lex.toks[eq_pos + 1..].to_vec();
            let parse_side = |toks: Vec<(Tok, usize, usize)>| -> Result<RatExpr, ParseError> {
                let mut p = ExprParser {
                    lex: Lexer {
                        toks,
                        pos: 0,
                        line: *line,
                    },
                    vars: &free_vars,
                    nvars: free_names.len(),
                };
                let e = p.parse_expr()?;
                p.lex.expect_end()?;
                Ok(e)
            };
            // solved form: bare name on the left
            let bare_name = match &lhs_toks[..] {
                [(Tok::Name(n), _, _)] => free_vars.get(n).copied(),
                _ => None,
            };
            let rhs = parse_side(rhs_toks)?;
            match bare_name {
                Some(idx) => {
                    conditions.push(Condition::Solved {
                        name: idx,
                        num: rhs.num,
                        den: rhs.den,
                        text,
                    });
                }
                None => {
                    let lhs = parse_side(lhs_toks)?;
                    let diff = lhs.sub(&rhs);
                    conditions.push(Condition::Constraint {
                        poly: diff.num,
                        text,
                    });
                }
            }
        }
    }

    // scalar metadata
    let get_usize = |key: &str| -> Result<Option<usize>, ParseError> {
        match find(key) {
            Some((_, v, l, _)) => v
                .trim()
                .parse::<usize>()
                .map(Some)
                .map_err(|_| syntax(*l, 1, format!("invalid integer for `{key}`"))),
            None => Ok(None),
        }
    };
    let id = find("id")
        .map(|(_, v, _, _)| v.trim().to_string())
        .unwrap_or_default();
    let source = find("source")
        .map(|(_, v, _, _)| v.trim().to_string())
        .unwrap_or_default();
    let expected_rank = get_usize("expected_rank")?;
    let rank_k = get_usize("rank_k")?;
    let alpha_scale = match find("alpha_scale") {
        Some((_, v, l, _)) => crate::rational::parse_rational(v)
            .ok_or_else(|| syntax(*l, 1, "invalid rational for `alpha_scale`"))?,
        None => Rational::one(),
    };
    let solve_for = find("solve_for").map(|(_, v, _, _)| v.trim().to_string());
    if let Some(sf) = &solve_for {
        if !free_names.contains(sf) {
            return Err(ParseError::Validation(format!(
                "solve_for name `{sf}` is not free"
            )));
        }
    }

    let params = param_names
        .iter()
        .enumerate()
        .map(|(position, name)| ParamIndex {
            name: name.clone(),
            position,
        })
        .collect();
    let pert = Perturbation {
        params,
        g: gpolys,
        trace: false,
    };
    pert.validate()?;

    let file = SystemFile {
        id,
        source,
        lambda,
        free_names,
        template,
        pert,
        conditions,
        expected_rank,
        rank_k,
        alpha_scale,
        solve_for,
    };
    if file.lambda.is_zero() {
        return Err(ParseError::Validation("lambda must be nonzero".into()));
    }
    Ok(file)
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

fn format_mono3(m: &Mono3) -> String {
    let mut parts = Vec::new();
    for (v, e) in [("x", m.0), ("y", m.1), ("z", m.2)] {
        match e {
            0 => {}
            1 => parts.push(v.to_string()),
            e => parts.push(format!("{v}^{e}")),
        }
    }
    parts.join("*")
}

/// Canonical rendering of a rational-coefficient polynomial: terms ordered
/// by total degree then by exponent triple.
pub fn format_poly3(p: &Poly3, param_names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Mono3, &JetPoly)> = p.terms().collect();
    terms.sort_by_key(|(m, _)| (mono_degree(m), **m));
    let mut out = String::new();
    for (m, c) in terms {
        let mono = format_mono3(m);
        // constant-rational coefficient fast path
        let (lead, body): (String, String) = if c.num_terms() == 1 && !c.constant_term().is_zero()
        {
            let v = c.constant_term();
            let neg = v.is_negative();
            let mag = v.abs();
            let coeff = if mag.is_one() && !mono.is_empty() {
                String::new()
            } else {
                mag.to_string()
            };
            let s = match (coeff.is_empty(), mono.is_empty()) {
                (true, false) => mono.clone(),
                (false, true) => coeff,
                (false, false) => format!("{coeff}*{mono}"),
                (true, true) => "1".to_string(),
            };
            ((if neg { "-" } else { "+" }).to_string(), s)
        } else if c.num_terms() == 1 {
            // single parameter-linear term
            let (jm, v) = c.terms().next().unwrap();
            let name = param_names
                .get(jm.factors()[0] as usize)
                .cloned()
                .unwrap_or_else(|| format!("l{}", jm.factors()[0]));
            let neg = v.is_negative();
            let mag = v.abs();
            let mut s = String::new();
            if !mag.is_one() {
                s.push_str(&format!("{mag}*"));
            }
            s.push_str(&name);
            if !mono.is_empty() {
                s.push_str(&format!("*{mono}"));
            }
            ((if neg { "-" } else { "+" }).to_string(), s)
        } else {
            (
                "+".to_string(),
                format!("({})*{mono}", c.format_with(param_names)),
            )
        };
        if out.is_empty() {
            if lead == "-" {
                out.push('-');
            }
        } else {
            out.push_str(if lead == "-" { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

/// Canonical print of a fully numeric system plus its perturbation; parsing
/// the output reproduces the same structures.
pub fn print_system(spec: &SystemSpec, pert: &Perturbation) -> String {
    let names = pert.names();
    let mut out = String::new();
    out.push_str(&format!("lambda = {}\n", spec.lambda));
    out.push_str(&format!("P = {}\n", format_poly3(&spec.p, &names)));
    out.push_str(&format!("Q = {}\n", format_poly3(&spec.q, &names)));
    out.push_str(&format!("R = {}\n", format_poly3(&spec.r, &names)));
    out.push_str(&format!("params = {}\n", names.join(", ")));
    for (i, g) in pert.g.iter().enumerate() {
        out.push_str(&format!("G{} = {}\n", i + 1, format_poly3(g, &names)));
    }
    out
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_system(self, &Perturbation::empty()))
    }
}
