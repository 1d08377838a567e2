//! Exact arithmetic in ℚ(α) for a real algebraic number α.
//!
//! Elements are residues of ℚ[t] modulo the defining polynomial. Zero tests
//! never go through floating point: an element vanishes at α exactly when
//! the gcd of its representative with the modulus has a root inside α's
//! isolating interval (Sturm count), which stays sound even while the
//! modulus is only known to be square-free rather than irreducible.

use crate::rational::Rational;
use crate::univar::{
    isolate_real_roots, refine_interval, RootInterval, SturmChain, UPoly,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("defining polynomial is not square-free")]
    NotSquareFree,
    #[error("interval does not isolate exactly one real root (count = {0})")]
    NotIsolating(usize),
    #[error("interval endpoint is a root of the defining polynomial")]
    EndpointIsRoot,
}

/// A real algebraic number: an integer defining polynomial together with an
/// isolating interval containing exactly one of its real roots.
///
/// The defining polynomial is stored square-free, primitive and with a
/// positive leading coefficient. It is the minimal polynomial whenever
/// [`AlgebraicNumber::irreducibility_certified`] reports true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraicNumber {
    minpoly: UPoly,
    interval: RootInterval,
}

impl AlgebraicNumber {
    pub fn new(poly: UPoly, interval: RootInterval) -> Result<Self, FieldError> {
        let p = poly.canonical_integer();
        if p.gcd(&p.derivative()).degree() != Some(0) {
            return Err(FieldError::NotSquareFree);
        }
        if interval.is_exact() {
            if !p.eval(&interval.lo).is_zero() {
                return Err(FieldError::NotIsolating(0));
            }
        } else {
            if p.eval(&interval.lo).is_zero() || p.eval(&interval.hi).is_zero() {
                return Err(FieldError::EndpointIsRoot);
            }
            let chain = SturmChain::new(&p);
            let n = chain.count_in(&interval.lo, &interval.hi);
            if n != 1 {
                return Err(FieldError::NotIsolating(n));
            }
        }
        Ok(AlgebraicNumber {
            minpoly: p,
            interval,
        })
    }

    /// The rational number `r` as a degenerate algebraic number.
    pub fn from_rational(r: Rational) -> Self {
        let minpoly = UPoly::from_coeffs(vec![-r.clone(), Rational::one()]).canonical_integer();
        AlgebraicNumber {
            minpoly,
            interval: RootInterval { lo: r.clone(), hi: r },
        }
    }

    pub fn minpoly(&self) -> &UPoly {
        &self.minpoly
    }

    pub fn interval(&self) -> &RootInterval {
        &self.interval
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap_or(0)
    }

    pub fn refine_to(&mut self, width: &Rational) {
        self.interval = refine_interval(&self.minpoly, &self.interval, width);
    }

    pub fn approx_f64(&self) -> f64 {
        crate::rational::to_f64(&self.interval.midpoint())
    }

    /// True when the defining polynomial is provably irreducible over ℚ
    /// (hence genuinely minimal).
    pub fn irreducibility_certified(&self) -> bool {
        certify_irreducible(&self.minpoly)
    }

    /// The algebraic number `s·α`, with the defining polynomial scaled
    /// accordingly.
    pub fn scaled(&self, s: &Rational) -> AlgebraicNumber {
        assert!(!s.is_zero());
        let minpoly = self.minpoly.scale_roots(s);
        let (mut lo, mut hi) = (&self.interval.lo * s, &self.interval.hi * s);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        AlgebraicNumber {
            minpoly,
            interval: RootInterval { lo, hi },
        }
    }
}

/// Arithmetic in ℚ[t]/(m) at a chosen real root of `m`.
pub struct NumberField {
    alpha: AlgebraicNumber,
    modulus: UPoly, // monic associate of the defining polynomial
}

impl NumberField {
    pub fn new(alpha: AlgebraicNumber) -> Self {
        let modulus = alpha.minpoly.monic();
        NumberField { alpha, modulus }
    }

    pub fn alpha(&self) -> &AlgebraicNumber {
        &self.alpha
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    /// The canonical residue of a polynomial in the generator.
    pub fn reduce(&self, p: &UPoly) -> UPoly {
        p.rem(&self.modulus)
    }

    pub fn generator(&self) -> UPoly {
        self.reduce(&UPoly::x())
    }

    pub fn from_rational(&self, r: Rational) -> UPoly {
        UPoly::constant(r)
    }

    pub fn add(&self, a: &UPoly, b: &UPoly) -> UPoly {
        a.add(b)
    }

    pub fn sub(&self, a: &UPoly, b: &UPoly) -> UPoly {
        a.sub(b)
    }

    pub fn mul(&self, a: &UPoly, b: &UPoly) -> UPoly {
        self.reduce(&a.mul(b))
    }

    pub fn pow(&self, a: &UPoly, mut e: u32) -> UPoly {
        let mut base = self.reduce(a);
        let mut acc = UPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm. `Err` carries a
    /// nontrivial factor of the modulus when one is discovered (the element
    /// is a zero divisor of the reducible quotient ring).
    pub fn try_inv(&self, a: &UPoly) -> Result<UPoly, UPoly> {
        let a = self.reduce(a);
        assert!(!a.is_zero(), "inverse of zero");
        // extended euclid: r0 = modulus, r1 = a
        let (mut r0, mut r1) = (self.modulus.clone(), a.clone());
        let (mut s0, mut s1) = (UPoly::zero(), UPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() == Some(0) {
            let inv = s0.scale(&(Rational::one() / r0.leading()));
            Ok(self.reduce(&inv))
        } else {
            Err(r0.monic())
        }
    }

    /// Sound test of `e(α) = 0`, valid even for a reducible modulus.
    pub fn vanishes(&self, e: &UPoly) -> bool {
        let e = self.reduce(e);
        if e.is_zero() {
            return true;
        }
        if self.alpha.interval.is_exact() {
            return e.eval(&self.alpha.interval.lo).is_zero();
        }
        let g = e.gcd(&self.alpha.minpoly);
        if g.degree() == Some(0) {
            return false;
        }
        // the interval endpoints are not roots of the modulus, hence not of g
        let chain = SturmChain::new(&g);
        chain.count_in(&self.alpha.interval.lo, &self.alpha.interval.hi) == 1
    }

    /// Exact sign of `e(α)`: -1, 0 or 1.
    pub fn sign_at_alpha(&self, e: &UPoly) -> i8 {
        let e = self.reduce(e);
        if self.vanishes(&e) {
            return 0;
        }
        if self.alpha.interval.is_exact() {
            let v = e.eval(&self.alpha.interval.lo);
            return if v.is_positive() { 1 } else { -1 };
        }
        // refine the isolating interval until e has no root inside it, then
        // a single evaluation decides
        let esf = e.squarefree_part();
        let chain = SturmChain::new(&esf);
        let mut iv = self.alpha.interval.clone();
        loop {
            let clear = if esf.eval(&iv.lo).is_zero() || esf.eval(&iv.hi).is_zero() {
                false
            } else {
                chain.count_in(&iv.lo, &iv.hi) == 0
            };
            if clear {
                let v = e.eval(&iv.midpoint());
                return if v.is_positive() { 1 } else { -1 };
            }
            let half = iv.width() / Rational::from_integer(2.into());
            iv = refine_interval(&self.alpha.minpoly, &iv, &half);
            if iv.is_exact() {
                let v = e.eval(&iv.lo);
                return if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                };
            }
        }
    }

    pub fn approx_f64(&self, e: &UPoly) -> f64 {
        self.reduce(e).eval_f64(self.alpha.approx_f64())
    }

    /// Characteristic polynomial of multiplication by `e` on the power
    /// basis; its square-free part is the minimal polynomial of `e(α)` when
    /// the modulus is irreducible.
    pub fn charpoly_of(&self, e: &UPoly) -> UPoly {
        let n = self.degree();
        let e = self.reduce(e);
        // columns: e * t^i reduced
        let mut cols = Vec::with_capacity(n);
        let mut cur = e.clone();
        cols.push(cur.clone());
        for _ in 1..n {
            cur = self.mul(&cur, &UPoly::x());
            cols.push(cur.clone());
        }
        // det(x I - M) over Q[x] via fraction-free elimination
        let mut m: Vec<Vec<UPoly>> = vec![vec![UPoly::zero(); n]; n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                let mij = col.coeff(i);
                let mut entry = UPoly::constant(-mij);
                if i == j {
                    entry = entry.add(&UPoly::x());
                }
                m[i][j] = entry;
            }
        }
        crate::linalg::bareiss_determinant(m)
    }

    /// Defining polynomial (square-free) of the element `e(α)`, canonical
    /// integer form. Minimal when the field modulus is irreducible.
    pub fn element_defining_poly(&self, e: &UPoly) -> UPoly {
        self.charpoly_of(e).squarefree_part().canonical_integer()
    }

    /// Narrow an interval around `e(α)` to at most the requested width.
    pub fn interval_of(&self, e: &UPoly, width: &Rational) -> RootInterval {
        let e = self.reduce(&e.clone());
        if self.alpha.interval.is_exact() {
            let v = e.eval(&self.alpha.interval.lo);
            return RootInterval { lo: v.clone(), hi: v };
        }
        // interval arithmetic by monotone refinement: evaluate on endpoints
        // of a sufficiently refined alpha interval and pad with the
        // derivative bound
        let mut iv = self.alpha.interval.clone();
        let dp = e.derivative();
        loop {
            let (a, b) = (e.eval(&iv.lo), e.eval(&iv.hi));
            // bound |e'| on the interval crudely by max coefficient growth
            let bound = upper_abs_bound(&dp, &iv);
            let pad = bound * iv.width();
            let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
            lo -= &pad;
            hi += &pad;
            if &hi - &lo <= *width {
                return RootInterval { lo, hi };
            }
            let half = iv.width() / Rational::from_integer(2.into());
            iv = refine_interval(&self.alpha.minpoly, &iv, &half);
        }
    }
}

/// Crude upper bound on |p| over an interval: sum of |c_i| B^i with B a
/// bound on |x|.
fn upper_abs_bound(p: &UPoly, iv: &RootInterval) -> Rational {
    let b = iv.lo.abs().max(iv.hi.abs());
    let mut acc = Rational::zero();
    let mut pow = Rational::one();
    for c in p.coeffs() {
        acc += c.abs() * &pow;
        pow *= &b;
    }
    acc
}

/// Try to certify irreducibility over ℚ.
///
/// Primary route: irreducibility modulo a small prime not dividing the
/// leading coefficient (a sufficient condition). Backup for degree ≤ 3:
/// soundly rule out rational roots by isolating the real roots of the
/// monicized integer polynomial and testing the nearby integers.
pub fn certify_irreducible(p: &UPoly) -> bool {
    let p = p.canonical_integer();
    let n = match p.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    for &q in &[
        2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
        83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    ] {
        if let Some(true) = irreducible_mod_p(&p, q) {
            return true;
        }
    }
    if n <= 3 {
        // degree 2 or 3: irreducible iff no rational root
        return !has_rational_root(&p);
    }
    false
}

/// Sound, complete rational-root detection for an integer polynomial:
/// rational roots of `p` correspond to integer roots of the monicization,
/// which are found by isolation and rounding.
pub fn has_rational_root(p: &UPoly) -> bool {
    let p = p.canonical_integer();
    if p.degree().unwrap_or(0) == 0 {
        return false;
    }
    let lead = p.leading();
    // y = c_n x turns p into a monic integer polynomial in y
    let n = p.degree().unwrap();
    let mut c = Vec::with_capacity(n + 1);
    let mut scale = Rational::one();
    for i in (0..=n).rev() {
        c.push((p.coeff(i) * &scale, i));
        scale *= &lead;
    }
    let mut coeffs = vec![Rational::zero(); n + 1];
    for (v, i) in c {
        coeffs[i] = v;
    }
    let monic = UPoly::from_coeffs(coeffs);
    debug_assert!(monic.coeffs().iter().all(|x| x.is_integer()));
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for iv in isolate_real_roots(&monic) {
        if iv.is_exact() {
            if iv.lo.is_integer() {
                return true;
            }
            continue;
        }
        let r = refine_interval(&monic, &iv, &half);
        if r.is_exact() {
            if r.lo.is_integer() {
                return true;
            }
            continue;
        }
        let cand = r.lo.ceil();
        if cand < r.hi && monic.eval(&cand).is_zero() {
            return true;
        }
    }
    false
}

/// `Some(true)` when `p mod q` has the same degree and is irreducible over
/// F_q; `None` when the prime is unusable.
fn irreducible_mod_p(p: &UPoly, q: u64) -> Option<bool> {
    let n = p.degree()?;
    let f = reduce_mod(p, q)?;
    if f.len() - 1 != n {
        return None; // leading coefficient vanished
    }
    // distinct-degree criterion: x^(q^n) == x mod f, and for every prime
    // divisor l of n, gcd(x^(q^(n/l)) - x, f) == 1
    let x = vec![0, 1];
    let mut xq = x.clone();
    for _ in 0..n {
        xq = fp_powmod_frobenius(&xq, q, &f);
    }
    // after n Frobenius steps we have x^(q^n)
    if fp_sub(&xq, &x, q) != vec![] {
        return Some(false);
    }
    for l in prime_divisors(n) {
        let mut t = x.clone();
        for _ in 0..n / l {
            t = fp_powmod_frobenius(&t, q, &f);
        }
        let d = fp_gcd(&fp_sub(&t, &x, q), &f, q);
        if d.len() > 1 {
            return Some(false);
        }
    }
    Some(true)
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// --- tiny F_q[t] helpers (coefficients ascending, no trailing zeros) ---

fn reduce_mod(p: &UPoly, q: u64) -> Option<Vec<u64>> {
    let qb = BigInt::from(q);
    let mut out = Vec::with_capacity(p.coeffs().len());
    for c in p.coeffs() {
        if !c.denom().is_one() {
            return None; // callers pass integer polynomials
        }
        let m = ((c.numer() % &qb) + &qb) % &qb;
        let digits = m.to_u64_digits().1;
        out.push(digits.first().copied().unwrap_or(0));
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    Some(out)
}

fn fp_trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn fp_sub(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let av = a.get(i).copied().unwrap_or(0);
        let bv = b.get(i).copied().unwrap_or(0);
        out[i] = (av + q - bv) % q;
    }
    fp_trim(out)
}

fn fp_mulmod(a: &[u64], b: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &av) in a.iter().enumerate() {
        if av == 0 {
            continue;
        }
        for (j, &bv) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u128 + av as u128 * bv as u128) % q as u128) as u64;
        }
    }
    fp_rem(&prod, f, q)
}

fn fp_rem(a: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    let mut r = fp_trim(a.to_vec());
    let df = f.len() - 1;
    let lead_inv = mod_inv(f[df], q);
    while r.len() > df {
        let k = r.len() - 1 - df;
        let c = ((r[r.len() - 1] as u128 * lead_inv as u128) % q as u128) as u64;
        for (i, &fv) in f.iter().enumerate() {
            let t = (c as u128 * fv as u128) % q as u128;
            r[k + i] = ((r[k + i] as u128 + q as u128 - t) % q as u128) as u64;
        }
        r = fp_trim(r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn fp_gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let (mut a, mut b) = (fp_trim(a.to_vec()), fp_trim(b.to_vec()));
    while !b.is_empty() {
        let r = fp_rem(&a, &b, q);
        a = b;
        b = r;
    }
    a
}

fn mod_inv(a: u64, q: u64) -> u64 {
    // q is prime
    mod_pow(a, q - 2, q)
}

fn mod_pow(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % q as u128) as u64;
        }
        b = ((b as u128 * b as u128) % q as u128) as u64;
        e >>= 1;
    }
    acc
}

/// `g(t)^q mod f` — one Frobenius application via square-and-multiply on
/// the exponent q.
fn fp_powmod_frobenius(g: &[u64], q: u64, f: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = fp_trim(g.to_vec());
    let mut e = q;
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_mulmod(&acc, &base, f, q);
        }
        base = fp_mulmod(&base, &base, f, q);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn sqrt2_field() -> NumberField {
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let alpha = AlgebraicNumber::new(
            p,
            RootInterval {
                lo: rat_int(1),
                hi: rat_int(2),
            },
        )
        .unwrap();
        NumberField::new(alpha)
    }

    #[test]
    fn sqrt2_arithmetic() {
        let f = sqrt2_field();
        let a = f.generator(); // √2
        assert!(f.vanishes(&f.sub(&f.mul(&a, &a), &f.from_rational(rat_int(2)))));
        let inv = f.try_inv(&a).unwrap(); // 1/√2 = √2/2
        assert_eq!(inv, UPoly::from_coeffs(vec![rat_int(0), rat(1, 2)]));
        assert_eq!(f.sign_at_alpha(&a), 1);
        assert_eq!(f.sign_at_alpha(&a.sub(&UPoly::from_i64(&[2]))), -1);
        assert_eq!(f.sign_at_alpha(&UPoly::zero()), 0);
    }

    #[test]
    fn element_defining_poly_of_1_plus_sqrt2() {
        let f = sqrt2_field();
        let e = f.generator().add(&UPoly::one());
        let m = f.element_defining_poly(&e);
        // minimal polynomial of 1+√2 is x^2 - 2x - 1
        assert_eq!(m, UPoly::from_i64(&[-1, -2, 1]));
    }

    #[test]
    fn zero_divisor_detected_in_reducible_quotient() {
        // modulus (t^2-2)(t^2-3), alpha = √2
        let p = UPoly::from_i64(&[6, 0, -5, 0, 1]);
        let alpha = AlgebraicNumber::new(
            p,
            RootInterval {
                lo: rat(5, 4),
                hi: rat(3, 2),
            },
        )
        .unwrap();
        let f = NumberField::new(alpha);
        let t2m2 = UPoly::from_i64(&[-2, 0, 1]);
        let t2m3 = UPoly::from_i64(&[-3, 0, 1]);
        // t^2-2 vanishes at √2, t^2-3 does not
        assert!(f.vanishes(&t2m2));
        assert!(!f.vanishes(&t2m3));
        assert_eq!(f.sign_at_alpha(&t2m3), -1); // 2 - 3 < 0
        // inversion of the zero divisor reveals a factor
        let err = f.try_inv(&t2m2).unwrap_err();
        assert_eq!(err, t2m2.monic());
    }

    #[test]
    fn rational_algebraic_number() {
        let a = AlgebraicNumber::from_rational(rat(3, 4));
        assert_eq!(a.degree(), 1);
        let f = NumberField::new(a);
        let g = f.generator();
        assert_eq!(f.sign_at_alpha(&g.sub(&UPoly::from_i64(&[1]))), -1);
        assert!(f.vanishes(&g.sub(&UPoly::from_coeffs(vec![rat(3, 4)]))));
    }

    #[test]
    fn irreducibility_certificates() {
        assert!(certify_irreducible(&UPoly::from_i64(&[-2, 0, 1]))); // x^2-2
        assert!(!certify_irreducible(&UPoly::from_i64(&[-1, 0, 1]))); // (x-1)(x+1)
        assert!(certify_irreducible(&UPoly::from_i64(&[-2, 0, 0, 1]))); // x^3-2
        assert!(certify_irreducible(&UPoly::from_i64(&[1, 1]))); // linear
        // cubic with a rational root 1/3: 3x^3 - x^2 + 3x - 1 = (3x-1)(x^2+1)
        assert!(!certify_irreducible(&UPoly::from_i64(&[-1, 3, -1, 3])));
        // x^4 + 1: irreducible over Q but reducible mod every prime;
        // degree > 3 so the certificate must simply decline
        assert!(!certify_irreducible(&UPoly::from_i64(&[1, 0, 0, 0, 1])));
    }

    #[test]
    fn rational_root_detection() {
        assert!(has_rational_root(&UPoly::from_i64(&[-1, 3, -1, 3])));
        assert!(!has_rational_root(&UPoly::from_i64(&[-2, 0, 1])));
        assert!(has_rational_root(&UPoly::from_i64(&[-4, 0, 1]))); // ±2
    }

    #[test]
    fn scaled_generator() {
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let alpha = AlgebraicNumber::new(
            p,
            RootInterval {
                lo: rat_int(1),
                hi: rat_int(2),
            },
        )
        .unwrap();
        let beta = alpha.scaled(&rat_int(3)); // 3√2, minpoly x^2 - 18
        assert_eq!(beta.minpoly(), &UPoly::from_i64(&[-18, 0, 1]));
        assert!((beta.approx_f64() - 3.0 * std::f64::consts::SQRT_2).abs() < 1.0);
    }

    #[test]
    fn interval_of_element() {
        let f = sqrt2_field();
        // 1 + √2 ≈ 2.4142
        let e = f.generator().add(&UPoly::one());
        let iv = f.interval_of(&e, &rat(1, 1000));
        let lo = crate::rational::to_f64(&iv.lo);
        let hi = crate::rational::to_f64(&iv.hi);
        assert!(lo <= 2.41421357 && 2.41421355 <= hi);
        assert!(hi - lo <= 0.002);
    }
}
