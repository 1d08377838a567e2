//! Small sparse multivariate polynomials over the rationals.
//!
//! Used for catalog center-condition templates and for the resultant
//! elimination in the higher-order cyclicity machinery. Variables are
//! identified by position; name tables live with the callers.

use crate::rational::Rational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Exponent vector, one entry per variable.
pub type MExp = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<MExp, Rational>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(Rational::one(), nvars)
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return Some(self.terms.values().next().unwrap().clone());
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MExp, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, e: MExp, c: Rational) {
        assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c.clone());
        }
        r
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> MPoly {
        if s.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: MExp = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn pow(&self, mut e: u32) -> MPoly {
        let mut base = self.clone();
        let mut acc = MPoly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    pub fn degree_in(&self, v: usize) -> Option<u16> {
        self.terms.keys().map(|e| e[v]).max()
    }

    pub fn derivative_in(&self, v: usize) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[v] -= 1;
            r.add_term(d, c * Rational::from_integer(e[v].into()));
        }
        r
    }

    /// Substitute variable `v` by a rational constant.
    pub fn eval_var(&self, v: usize, value: &Rational) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut d = e.clone();
            let pow = d[v];
            d[v] = 0;
            let mut coeff = c.clone();
            for _ in 0..pow {
                coeff *= value;
            }
            r.add_term(d, coeff);
        }
        r
    }

    /// Substitute variable `v` by another polynomial.
    pub fn substitute(&self, v: usize, value: &MPoly) -> MPoly {
        assert_eq!(self.nvars, value.nvars);
        let mut r = MPoly::zero(self.nvars);
        let maxdeg = self.degree_in(v).unwrap_or(0);
        let mut pows = Vec::with_capacity(maxdeg as usize + 1);
        pows.push(MPoly::one(self.nvars));
        for _ in 0..maxdeg {
            pows.push(pows.last().unwrap().mul(value));
        }
        for (e, c) in &self.terms {
            let mut d = e.clone();
            let pow = d[v] as usize;
            d[v] = 0;
            let mut t = MPoly::zero(self.nvars);
            t.add_term(d, c.clone());
            r = r.add(&t.mul(&pows[pow]));
        }
        r
    }

    /// Full evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    t *= &point[v];
                }
            }
            acc += t;
        }
        acc
    }

    /// Coefficients as polynomials in the remaining variables, by power of
    /// `v` (ascending). The returned coefficients have `v`-exponent zero.
    pub fn as_univariate_in(&self, v: usize) -> Vec<MPoly> {
        let deg = self.degree_in(v).unwrap_or(0) as usize;
        let mut out = vec![MPoly::zero(self.nvars); deg + 1];
        for (e, c) in &self.terms {
            let mut d = e.clone();
            let pow = d[v] as usize;
            d[v] = 0;
            out[pow].add_term(d, c.clone());
        }
        out
    }

    /// Reinterpret a polynomial that uses only variable `v` as univariate.
    pub fn to_upoly(&self, v: usize) -> Option<crate::univar::UPoly> {
        let mut c = vec![Rational::zero(); self.degree_in(v).unwrap_or(0) as usize + 1];
        for (e, coeff) in &self.terms {
            for (i, &p) in e.iter().enumerate() {
                if i != v && p != 0 {
                    return None;
                }
            }
            c[e[v] as usize] = coeff.clone();
        }
        Some(crate::univar::UPoly::from_coeffs(c))
    }

    pub fn format_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (e, c) in &self.terms {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let unit = e.iter().all(|&x| x == 0);
            if !mag.is_one() || unit {
                factors.push(mag.to_string());
            }
            for (v, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if p == 1 {
                    factors.push(names[v].clone());
                } else {
                    factors.push(format!("{}^{}", names[v], p));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Determinant of a small matrix of polynomials by Laplace expansion with
/// column-subset memoization (no division needed).
pub fn mpoly_determinant(m: &[Vec<MPoly>]) -> MPoly {
    let n = m.len();
    assert!(n > 0 && m.iter().all(|r| r.len() == n));
    let nvars = m[0][0].nvars();
    assert!(n <= 16, "determinant expansion limited to small matrices");
    // memo[mask] = determinant of rows (n - popcount(mask))..n restricted to
    // the column set `mask`
    let mut memo: Vec<Option<MPoly>> = vec![None; 1 << n];
    fn rec(m: &[Vec<MPoly>], mask: usize, memo: &mut Vec<Option<MPoly>>, nvars: usize) -> MPoly {
        if mask == 0 {
            return MPoly::one(nvars);
        }
        if let Some(v) = &memo[mask] {
            return v.clone();
        }
        let n = m.len();
        let row = n - (mask.count_ones() as usize);
        let mut acc = MPoly::zero(nvars);
        let mut sign_pos = true;
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            if !m[row][col].is_zero() {
                let sub = rec(m, mask & !(1 << col), memo, nvars);
                let term = m[row][col].mul(&sub);
                acc = if sign_pos { acc.add(&term) } else { acc.sub(&term) };
            }
            sign_pos = !sign_pos;
        }
        memo[mask] = Some(acc.clone());
        acc
    }
    rec(m, (1 << n) - 1, &mut memo, nvars)
}

/// Resultant of `p` and `q` with respect to variable `v`, as a polynomial in
/// the remaining variables (the Sylvester determinant).
///
/// Returns `None` when either polynomial has degree 0 in `v` (nothing to
/// eliminate) — callers treat that case separately.
pub fn resultant_in(p: &MPoly, q: &MPoly, v: usize) -> Option<MPoly> {
    let dp = p.degree_in(v)? as usize;
    let dq = q.degree_in(v)? as usize;
    if dp == 0 || dq == 0 {
        return None;
    }
    let pc = p.as_univariate_in(v);
    let qc = q.as_univariate_in(v);
    let n = dp + dq;
    let nvars = p.nvars();
    let mut m = vec![vec![MPoly::zero(nvars); n]; n];
    for i in 0..dq {
        for (j, c) in pc.iter().enumerate() {
            m[i][i + dp - j] = c.clone();
        }
    }
    for i in 0..dp {
        for (j, c) in qc.iter().enumerate() {
            m[dq + i][i + dq - j] = c.clone();
        }
    }
    Some(mpoly_determinant(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat_int, Rational};

    fn x() -> MPoly {
        MPoly::var(0, 2)
    }
    fn y() -> MPoly {
        MPoly::var(1, 2)
    }
    fn c(v: i64) -> MPoly {
        MPoly::constant(rat_int(v), 2)
    }

    #[test]
    fn arithmetic_and_eval() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let s = x().add(&y());
        let sq = s.pow(2);
        assert_eq!(sq.num_terms(), 3);
        assert_eq!(sq.eval(&[rat_int(2), rat_int(3)]), rat_int(25));
        assert_eq!(sq.degree_in(0), Some(2));
        assert_eq!(sq.total_degree(), Some(2));
    }

    #[test]
    fn substitution() {
        // x^2 with x -> y + 1
        let p = x().pow(2);
        let q = p.substitute(0, &y().add(&c(1)));
        assert_eq!(q.eval(&[rat_int(0), rat_int(4)]), rat_int(25));
        assert_eq!(q.degree_in(0), Some(0));
    }

    #[test]
    fn resultant_eliminates_common_root() {
        // p = x^2 + y^2 - 1, q = x - y: res_x = 2y^2 - 1
        let p = x().pow(2).add(&y().pow(2)).sub(&c(1));
        let q = x().sub(&y());
        let r = resultant_in(&p, &q, 0).unwrap();
        let up = r.to_upoly(1).unwrap();
        assert_eq!(up, crate::univar::UPoly::from_i64(&[-1, 0, 2]));
    }

    #[test]
    fn determinant_matches_direct() {
        let m = vec![
            vec![x(), y()],
            vec![c(1), x()],
        ];
        let d = mpoly_determinant(&m);
        // x*x - y
        assert_eq!(d, x().pow(2).sub(&y()));
    }

    #[test]
    fn univariate_view_roundtrip() {
        let p = x().pow(2).mul(&y()).add(&x()).add(&c(7));
        let cs = p.as_univariate_in(0);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0], c(7));
        assert_eq!(cs[1], MPoly::one(2));
        assert_eq!(cs[2], y());
    }

    #[test]
    fn constant_detection() {
        assert_eq!(c(5).constant_value(), Some(rat_int(5)));
        assert_eq!(MPoly::zero(2).constant_value(), Some(Rational::zero()));
        assert_eq!(x().constant_value(), None);
    }
}
