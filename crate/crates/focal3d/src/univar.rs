//! Dense univariate polynomials over the rationals: Euclidean arithmetic,
//! Sturm chains and exact real-root isolation.
//!
//! Coefficients are stored in ascending degree order; the vector is empty for
//! zero and never carries a trailing zero. Sturm chains are normalized to
//! primitive integer polynomials at every step to control coefficient swell.

use crate::linalg::DomainElem;
use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<Rational>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UPoly::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        let mut p = UPoly { c: vec![r] };
        p.normalize();
        p
    }

    pub fn x() -> Self {
        UPoly {
            c: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn from_coeffs<I: IntoIterator<Item = Rational>>(c: I) -> Self {
        let mut p = UPoly {
            c: c.into_iter().collect(),
        };
        p.normalize();
        p
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&v| Rational::from_integer(v.into())))
    }

    fn normalize(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) + o.coeff(i));
        }
        UPoly::from_coeffs(c)
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i) - o.coeff(i));
        }
        UPoly::from_coeffs(c)
    }

    pub fn neg(&self) -> UPoly {
        UPoly {
            c: self.c.iter().map(|x| -x.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> UPoly {
        if s.is_zero() {
            return UPoly::zero();
        }
        UPoly {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::from_coeffs(c)
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lead_inv = Rational::one() / d.leading();
        let mut rem = self.clone();
        let mut q = vec![Rational::zero(); self.c.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let f = rem.leading() * &lead_inv;
            let shift = rd - dd;
            q[shift] = f.clone();
            for (i, dc) in d.c.iter().enumerate() {
                let t = &f * dc;
                rem.c[shift + i] -= t;
            }
            rem.normalize();
        }
        (UPoly::from_coeffs(q), rem)
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.div_rem(d).1
    }

    pub fn derivative(&self) -> UPoly {
        if self.c.len() <= 1 {
            return UPoly::zero();
        }
        UPoly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * Rational::from_integer(BigInt::from(i))),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.c.iter().rev() {
            acc = acc * x + crate::rational::to_f64(a);
        }
        acc
    }

    /// Monic associate (leading coefficient 1); zero stays zero.
    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let inv = Rational::one() / self.leading();
        self.scale(&inv)
    }

    /// GCD, returned monic.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
            // keep coefficients small
            b = b.primitive_integer_associate();
        }
        a.monic()
    }

    /// The square-free part `p / gcd(p, p')`, monic.
    pub fn squarefree_part(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.monic();
        }
        self.div_rem(&g).0.monic()
    }

    /// Scale by the positive rational that makes coefficients coprime
    /// integers. Roots and signs are unchanged.
    pub fn primitive_integer_associate(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut lcm = BigInt::one();
        for a in &self.c {
            lcm = lcm.lcm(a.denom());
        }
        let ints: Vec<BigInt> = self.c.iter().map(|a| a.numer() * (&lcm / a.denom())).collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        UPoly {
            c: ints
                .into_iter()
                .map(|v| Rational::from_integer(&v / &g))
                .collect(),
        }
    }

    /// Primitive integer associate with positive leading coefficient.
    pub fn canonical_integer(&self) -> UPoly {
        let p = self.primitive_integer_associate();
        if p.leading() < Rational::zero() {
            p.neg()
        } else {
            p
        }
    }

    /// The polynomial whose roots are `s·r` for every root `r` of `self`
    /// (`s` nonzero), as a canonical integer polynomial.
    pub fn scale_roots(&self, s: &Rational) -> UPoly {
        assert!(!s.is_zero());
        let inv = Rational::one() / s;
        let mut pow = Rational::one();
        let mut c = Vec::with_capacity(self.c.len());
        for a in &self.c {
            c.push(a * &pow);
            pow *= &inv;
        }
        UPoly::from_coeffs(c).canonical_integer()
    }

    /// Composition `self(g(x))`.
    pub fn compose(&self, g: &UPoly) -> UPoly {
        let mut acc = UPoly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(g).add(&UPoly::constant(a.clone()));
        }
        acc
    }

    /// Cauchy root bound: every real root lies in (-B, B].
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading();
        let mut m = Rational::zero();
        for a in &self.c[..self.c.len() - 1] {
            let v = (a / &lead).abs();
            if v > m {
                m = v;
            }
        }
        m + Rational::one()
    }

    pub fn format_with_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a < &Rational::zero();
            let mag = if neg { -a.clone() } else { a.clone() };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if i == 0 {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&format!("{mag}*"));
                }
                if i == 1 {
                    out.push_str(var);
                } else {
                    out.push_str(&format!("{var}^{i}"));
                }
            }
        }
        out
    }
}

impl DomainElem for UPoly {
    fn dom_zero() -> Self {
        UPoly::zero()
    }
    fn dom_one() -> Self {
        UPoly::one()
    }
    fn dom_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn dom_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn dom_sub(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn dom_exact_div(&self, other: &Self) -> Self {
        let (q, r) = self.div_rem(other);
        debug_assert!(r.is_zero(), "inexact polynomial division in Bareiss");
        q
    }
}

/// Resultant of two univariate rational polynomials via the Sylvester
/// determinant with fraction-free elimination.
pub fn resultant(p: &UPoly, q: &UPoly) -> Rational {
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return Rational::zero();
    };
    if dp == 0 {
        return pow_rat(&p.leading(), dq as u32);
    }
    if dq == 0 {
        return pow_rat(&q.leading(), dp as u32);
    }
    let n = dp + dq;
    let mut m = crate::linalg::QMatrix::zero(n, n);
    for i in 0..dq {
        for (j, a) in p.c.iter().enumerate() {
            m.set(i, i + dp - j, a.clone());
        }
    }
    for i in 0..dp {
        for (j, a) in q.c.iter().enumerate() {
            m.set(dq + i, i + dq - j, a.clone());
        }
    }
    m.determinant()
}

fn pow_rat(r: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

fn sign(r: &Rational) -> i8 {
    match r.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// A Sturm chain for exact real-root counting.
pub struct SturmChain {
    seq: Vec<UPoly>,
}

impl SturmChain {
    pub fn new(p: &UPoly) -> Self {
        let mut seq = Vec::new();
        let p0 = p.primitive_integer_associate();
        if p0.is_zero() {
            return SturmChain { seq };
        }
        seq.push(p0.clone());
        let mut a = p0;
        let mut b = p.derivative().primitive_integer_associate();
        while !b.is_zero() {
            let r = a.rem(&b).neg().primitive_integer_associate();
            seq.push(b.clone());
            a = b;
            b = r;
        }
        SturmChain { seq }
    }

    fn variations<F: Fn(&UPoly) -> i8>(&self, sign_of: F) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.seq {
            let s = sign_of(p);
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        self.variations(|p| sign(&p.eval(x)))
    }

    pub fn variations_at_neg_inf(&self) -> usize {
        self.variations(|p| {
            let d = p.degree().unwrap_or(0);
            let s = sign(&p.leading());
            if d % 2 == 0 {
                s
            } else {
                -s
            }
        })
    }

    pub fn variations_at_pos_inf(&self) -> usize {
        self.variations(|p| sign(&p.leading()))
    }

    /// Number of distinct real roots in `(lo, hi]`. Endpoints must not be
    /// roots of the first chain element (callers arrange this).
    pub fn count_in(&self, lo: &Rational, hi: &Rational) -> usize {
        self.variations_at(lo) - self.variations_at(hi)
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_neg_inf() - self.variations_at_pos_inf()
    }
}

/// An isolating interval: either an exact rational root or an open interval
/// `(lo, hi)` with `p(lo)p(hi) != 0` containing exactly one real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

/// Isolate all distinct real roots of `p` (any nonzero polynomial), sorted
/// ascending. Rational roots come back as exact point intervals.
pub fn isolate_real_roots(p: &UPoly) -> Vec<RootInterval> {
    let sf = p.squarefree_part().primitive_integer_associate();
    if sf.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let bound = sf.root_bound();
    let chain = SturmChain::new(&sf);
    let mut out = Vec::new();
    // endpoints chosen beyond the root bound are never roots
    subdivide(&sf, &chain, &(-bound.clone()), &bound, &mut out);
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

fn subdivide(
    p: &UPoly,
    chain: &SturmChain,
    lo: &Rational,
    hi: &Rational,
    out: &mut Vec<RootInterval>,
) {
    let n = chain.count_in(lo, hi);
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(RootInterval {
            lo: lo.clone(),
            hi: hi.clone(),
        });
        return;
    }
    let mid = (lo + hi) / Rational::from_integer(2.into());
    if p.eval(&mid).is_zero() {
        out.push(RootInterval {
            lo: mid.clone(),
            hi: mid.clone(),
        });
        // nudge the endpoints off the root before recursing
        let quarter = (hi - lo) / Rational::from_integer(4.into());
        let left_hi = &mid - find_root_free_offset(p, &mid, &quarter, -1);
        let right_lo = &mid + find_root_free_offset(p, &mid, &quarter, 1);
        subdivide(p, chain, lo, &left_hi, out);
        subdivide(p, chain, &right_lo, hi, out);
    } else {
        subdivide(p, chain, lo, &mid, out);
        subdivide(p, chain, &mid, hi, out);
    }
}

/// Find `d <= step` such that `p(x ± d) != 0`; some halving always succeeds
/// because roots are isolated points.
fn find_root_free_offset(p: &UPoly, x: &Rational, step: &Rational, dir: i8) -> Rational {
    let mut d = step.clone();
    loop {
        let probe = if dir < 0 { x - &d } else { x + &d };
        if !p.eval(&probe).is_zero() {
            return d;
        }
        d /= Rational::from_integer(2.into());
    }
}

/// Shrink an isolating interval for the unique root of square-free `p` below
/// the requested width by bisection.
pub fn refine_interval(p: &UPoly, iv: &RootInterval, width: &Rational) -> RootInterval {
    if iv.is_exact() {
        return iv.clone();
    }
    let mut lo = iv.lo.clone();
    let mut hi = iv.hi.clone();
    let mut slo = sign(&p.eval(&lo));
    debug_assert!(slo != 0 && sign(&p.eval(&hi)) != 0);
    while &hi - &lo >= *width {
        let mid = (&lo + &hi) / Rational::from_integer(2.into());
        let sm = sign(&p.eval(&mid));
        if sm == 0 {
            return RootInterval {
                lo: mid.clone(),
                hi: mid,
            };
        }
        if sm == slo {
            lo = mid;
        } else {
            hi = mid;
            let _ = &mut slo;
        }
    }
    RootInterval { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    #[test]
    fn div_rem_roundtrip() {
        let p = UPoly::from_i64(&[-2, 0, 1]); // x^2 - 2
        let d = UPoly::from_i64(&[1, 1]); // x + 1
        let (q, r) = p.div_rem(&d);
        assert_eq!(p, q.mul(&d).add(&r));
        assert_eq!(r, UPoly::from_i64(&[-1]));
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^2 (x+2)
        let p = UPoly::from_i64(&[2, -3, 0, 1]);
        let sf = p.squarefree_part();
        // (x-1)(x+2) = x^2 + x - 2, monic
        assert_eq!(sf, UPoly::from_i64(&[-2, 1, 1]));
        let g = p.gcd(&p.derivative());
        assert_eq!(g, UPoly::from_i64(&[-1, 1])); // x - 1
    }

    #[test]
    fn isolate_sqrt2() {
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 2);
        let pos = &roots[1];
        let r = refine_interval(&p, pos, &rat(1, 1 << 20));
        let mid = crate::rational::to_f64(&r.midpoint());
        assert!((mid - std::f64::consts::SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn isolate_with_rational_root() {
        // roots: 1/2, 3, -3 -> (2x-1)(x-3)(x+3) = 2x^3 - x^2 - 18x + 9
        let p = UPoly::from_i64(&[9, -18, -1, 2]);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 3);
        // every interval contains exactly one root; check count via Sturm
        let chain = SturmChain::new(&p);
        assert_eq!(chain.count_all(), 3);
    }

    #[test]
    fn no_real_roots() {
        let p = UPoly::from_i64(&[1, 0, 1]); // x^2 + 1
        assert!(isolate_real_roots(&p).is_empty());
    }

    #[test]
    fn multiple_roots_counted_once() {
        // (x-1)^3
        let p = UPoly::from_i64(&[-1, 3, -3, 1]);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 1);
    }

    #[test]
    fn resultant_known_values() {
        // res(x^2 - 2, x^2 - 3) = 1 (no common roots; product formula)
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let q = UPoly::from_i64(&[-3, 0, 1]);
        assert_eq!(resultant(&p, &q), rat_int(1));
        // res(x - 2, x^2 - 4) = 0 (shared root)
        let a = UPoly::from_i64(&[-2, 1]);
        let b = UPoly::from_i64(&[-4, 0, 1]);
        assert_eq!(resultant(&a, &b), rat_int(0));
        // res(x^2+1, x-1) = 2
        let c = UPoly::from_i64(&[1, 0, 1]);
        let d = UPoly::from_i64(&[-1, 1]);
        assert_eq!(resultant(&c, &d), rat_int(2));
    }

    #[test]
    fn scale_roots_moves_roots() {
        // x^2 - 2 has roots ±√2; scaling by 3 gives roots ±3√2: x^2 - 18
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let s = p.scale_roots(&rat_int(3));
        assert_eq!(s, UPoly::from_i64(&[-18, 0, 1]));
        // and with denominators: roots of 3x^3 - 1 scaled by 3: x^3 - 9
        let q = UPoly::from_i64(&[-1, 0, 0, 3]);
        assert_eq!(q.scale_roots(&rat_int(3)), UPoly::from_i64(&[-9, 0, 0, 1]));
    }

    #[test]
    fn compose_evaluates() {
        let p = UPoly::from_i64(&[1, 2, 1]); // (x+1)^2
        let g = UPoly::from_i64(&[0, 0, 1]); // x^2
        let c = p.compose(&g); // (x^2+1)^2
        assert_eq!(c, UPoly::from_i64(&[1, 0, 2, 0, 1]));
    }

    #[test]
    fn format_polynomial() {
        let p = UPoly::from_coeffs(vec![rat(-1, 3), rat_int(0), rat_int(2)]);
        assert_eq!(p.format_with_var("t"), "2*t^2 - 1/3");
    }
}
