//! The truncated parameter-jet ring.
//!
//! A [`JetPoly`] is a polynomial in the perturbation parameters
//! Λ = (λ₁,…,λ_m), truncated at a fixed total degree `T`: products simply
//! drop every term of degree exceeding `T`. Focal coefficients, the H-series
//! coefficients and everything else parameter-dependent live in this ring.
//! The homogeneous slices of degree 1 and 2 are the "linear parts" and
//! "quadratic parts" consumed by the cyclicity machinery.

use crate::rational::Rational;
use num_traits::Zero;
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;

/// A named perturbation parameter with its position in the declared list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamIndex {
    pub name: String,
    pub position: usize,
}

/// A monomial in the parameters: the sorted multiset of parameter positions.
///
/// `[3, 3, 7]` is λ₃²λ₇. The empty monomial is the unit. Ordering is graded:
/// by total degree first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct JetMono(SmallVec<[u16; 4]>);

impl JetMono {
    pub fn unit() -> Self {
        JetMono(SmallVec::new())
    }

    pub fn param(i: usize) -> Self {
        JetMono(SmallVec::from_slice(&[i as u16]))
    }

    pub fn pair(i: usize, j: usize) -> Self {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        JetMono(SmallVec::from_slice(&[a as u16, b as u16]))
    }

    pub fn degree(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Merge two sorted multisets.
    pub fn mul(&self, other: &JetMono) -> JetMono {
        let mut v = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                v.push(self.0[i]);
                i += 1;
            } else {
                v.push(other.0[j]);
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        JetMono(v)
    }

    pub fn factors(&self) -> &[u16] {
        &self.0
    }
}

impl Ord for JetMono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for JetMono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in the perturbation parameters truncated at total degree `T`.
///
/// Invariants: no stored term has a zero coefficient or degree exceeding `T`.
/// All binary operations require equal truncation orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetPoly {
    trunc: u32,
    terms: BTreeMap<JetMono, Rational>,
}

impl JetPoly {
    pub fn zero(trunc: u32) -> Self {
        JetPoly {
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, trunc: u32) -> Self {
        let mut p = Self::zero(trunc);
        if !c.is_zero() {
            p.terms.insert(JetMono::unit(), c);
        }
        p
    }

    /// The parameter λ_i itself; zero when `T = 0`.
    pub fn param(i: usize, trunc: u32) -> Self {
        let mut p = Self::zero(trunc);
        if trunc >= 1 {
            p.terms.insert(JetMono::param(i), Rational::from_integer(1.into()));
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (JetMono, Rational)>>(iter: I, trunc: u32) -> Self {
        let mut p = Self::zero(trunc);
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&JetMono::unit())
    }

    pub fn coeff(&self, m: &JetMono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the degree-1 monomial λ_i.
    pub fn linear_coeff(&self, i: usize) -> Rational {
        self.coeff(&JetMono::param(i))
    }

    pub fn add_term(&mut self, m: JetMono, c: Rational) {
        if c.is_zero() || m.degree() > self.trunc {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &JetPoly) {
        assert_eq!(self.trunc, other.trunc, "jet truncation order mismatch");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &JetPoly) {
        assert_eq!(self.trunc, other.trunc, "jet truncation order mismatch");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }

    pub fn add(&self, other: &JetPoly) -> JetPoly {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn sub(&self, other: &JetPoly) -> JetPoly {
        let mut r = self.clone();
        r.sub_assign(other);
        r
    }

    pub fn neg(&self) -> JetPoly {
        JetPoly {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    /// Exact product with all terms of degree > T discarded.
    pub fn mul(&self, other: &JetPoly) -> JetPoly {
        assert_eq!(self.trunc, other.trunc, "jet truncation order mismatch");
        let mut r = JetPoly::zero(self.trunc);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() > self.trunc {
                    continue;
                }
                r.add_term(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn scale(&self, c: &Rational) -> JetPoly {
        if c.is_zero() {
            return JetPoly::zero(self.trunc);
        }
        JetPoly {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    /// Multiply by the parameter λ_i, truncating.
    pub fn mul_param(&self, i: usize) -> JetPoly {
        let mut r = JetPoly::zero(self.trunc);
        let pi = JetMono::param(i);
        for (m, c) in &self.terms {
            if m.degree() + 1 <= self.trunc {
                r.terms.insert(m.mul(&pi), c.clone());
            }
        }
        r
    }

    /// Exactly the degree-`j` terms.
    pub fn homogeneous_part(&self, j: u32) -> JetPoly {
        JetPoly {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == j)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Reinterpret at a lower truncation order, dropping high-degree terms.
    pub fn truncate_to(&self, trunc: u32) -> JetPoly {
        JetPoly {
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= trunc)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Evaluate at a full parameter assignment.
    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &i in m.factors() {
                t *= &values[i as usize];
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = crate::rational::to_f64(c);
            for &i in m.factors() {
                t *= values[i as usize];
            }
            acc += t;
        }
        acc
    }

    /// Render with parameter names, e.g. `22/45*a011 + 4*a020`.
    pub fn format_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (m, c) in &self.terms {
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
            if !mag.is_one() || m.is_unit() {
                factors.push(mag.to_string());
            }
            let mut it = m.factors().iter().peekable();
            while let Some(&i) = it.next() {
                let mut pow = 1;
                while it.peek() == Some(&&i) {
                    it.next();
                    pow += 1;
                }
                let name = &names[i as usize];
                if pow == 1 {
                    factors.push(name.clone());
                } else {
                    factors.push(format!("{name}^{pow}"));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for JetPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = (0..1024).map(|i| format!("l{i}")).collect();
        write!(f, "{}", self.format_with(&names))
    }
}

use num_traits::One;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn one_plus(i: usize, t: u32) -> JetPoly {
        let mut p = JetPoly::constant(rat_int(1), t);
        p.add_assign(&JetPoly::param(i, t));
        p
    }

    #[test]
    fn difference_of_squares() {
        // (1 + a) * (1 - a) at T=2 is 1 - a^2
        let t = 2;
        let a = JetPoly::param(0, t);
        let lhs = one_plus(0, t).mul(&JetPoly::constant(rat_int(1), t).sub(&a));
        let mut want = JetPoly::constant(rat_int(1), t);
        want.add_term(JetMono::pair(0, 0), rat_int(-1));
        assert_eq!(lhs, want);
    }

    #[test]
    fn product_exceeds_truncation() {
        // a * b at T=1 truncates to zero
        let a = JetPoly::param(0, 1);
        let b = JetPoly::param(1, 1);
        assert!(a.mul(&b).is_zero());
    }

    #[test]
    fn scalar_distribution() {
        // (1/3 + 2a) * 3 = 1 + 6a at T=2
        let t = 2;
        let mut p = JetPoly::constant(rat(1, 3), t);
        p.add_assign(&JetPoly::param(0, t).scale(&rat_int(2)));
        let got = p.mul(&JetPoly::constant(rat_int(3), t));
        let mut want = JetPoly::constant(rat_int(1), t);
        want.add_term(JetMono::param(0), rat_int(6));
        assert_eq!(got, want);
    }

    #[test]
    #[should_panic(expected = "truncation order mismatch")]
    fn mismatched_truncation_is_a_usage_error() {
        let a = JetPoly::param(0, 1);
        let b = JetPoly::param(0, 2);
        let _ = a.mul(&b);
    }

    #[test]
    fn homogeneous_extraction() {
        let t = 2;
        let mut p = JetPoly::constant(rat_int(5), t);
        p.add_term(JetMono::param(1), rat(1, 2));
        p.add_term(JetMono::pair(0, 1), rat_int(7));
        assert_eq!(p.homogeneous_part(0).constant_term(), rat_int(5));
        assert_eq!(p.homogeneous_part(1).coeff(&JetMono::param(1)), rat(1, 2));
        assert_eq!(p.homogeneous_part(2).coeff(&JetMono::pair(0, 1)), rat_int(7));
        assert_eq!(p.homogeneous_part(1).num_terms(), 1);
    }

    #[test]
    fn graded_monomial_order() {
        assert!(JetMono::unit() < JetMono::param(0));
        assert!(JetMono::param(5) < JetMono::pair(0, 0));
        assert!(JetMono::pair(0, 3) < JetMono::pair(1, 2));
    }

    #[test]
    fn eval_at_point() {
        let t = 2;
        let mut p = JetPoly::constant(rat_int(1), t);
        p.add_term(JetMono::param(0), rat_int(3));
        p.add_term(JetMono::pair(0, 0), rat_int(2));
        // 1 + 3x + 2x^2 at x = 1/2 -> 3
        assert_eq!(p.eval(&[rat(1, 2)]), rat_int(3));
    }
}
