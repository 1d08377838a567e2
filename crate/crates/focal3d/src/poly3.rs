//! Sparse trivariate polynomials with jet coefficients.
//!
//! A [`Poly3`] stores terms `c · x^j y^k z^l` with `c` a [`JetPoly`]. The
//! unperturbed system polynomials P, Q, R carry degree-0 jets (plain
//! rationals); the perturbations G₁, G₂, G₃ carry parameter-linear jets; the
//! H-series built by the focal engine carries general jets.

use crate::jet::JetPoly;
use crate::rational::Rational;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Exponent triple `(j, k, l)` for `x^j y^k z^l`.
pub type Mono3 = (u16, u16, u16);

pub fn mono_degree(m: &Mono3) -> u32 {
    m.0 as u32 + m.1 as u32 + m.2 as u32
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly3 {
    terms: BTreeMap<Mono3, JetPoly>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    /// Build from rational monomial coefficients at jet order `trunc`.
    pub fn from_rational_terms<I: IntoIterator<Item = (Mono3, Rational)>>(
        iter: I,
        trunc: u32,
    ) -> Self {
        let mut p = Poly3::zero();
        for (m, c) in iter {
            p.add_term(m, JetPoly::constant(c, trunc));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono3, &JetPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono3) -> Option<&JetPoly> {
        self.terms.get(m)
    }

    /// Total degree of the highest monomial, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).min()
    }

    pub fn add_term(&mut self, m: Mono3, c: JetPoly) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly3) {
        for (m, c) in &other.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn sub(&self, other: &Poly3) -> Poly3 {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(*m, c.neg());
        }
        r
    }

    pub fn neg(&self) -> Poly3 {
        Poly3 {
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly3 {
        if c.is_zero() {
            return Poly3::zero();
        }
        Poly3 {
            terms: self.terms.iter().map(|(m, v)| (*m, v.scale(c))).collect(),
        }
    }

    pub fn scale_jet(&self, c: &JetPoly) -> Poly3 {
        let mut r = Poly3::zero();
        for (m, v) in &self.terms {
            r.add_term(*m, v.mul(c));
        }
        r
    }

    /// Exact product; terms of total degree exceeding `cap` (when given) are
    /// dropped.
    pub fn mul_capped(&self, other: &Poly3, cap: Option<u32>) -> Poly3 {
        let mut r = Poly3::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = (ma.0 + mb.0, ma.1 + mb.1, ma.2 + mb.2);
                if let Some(cap) = cap {
                    if mono_degree(&m) > cap {
                        continue;
                    }
                }
                r.add_term(m, ca.mul(cb));
            }
        }
        r
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        self.mul_capped(other, None)
    }

    /// Partial derivative along axis 0 = x, 1 = y, 2 = z.
    pub fn diff(&self, axis: usize) -> Poly3 {
        let mut r = Poly3::zero();
        for (m, c) in &self.terms {
            let e = match axis {
                0 => m.0,
                1 => m.1,
                2 => m.2,
                _ => panic!("axis out of range"),
            };
            if e == 0 {
                continue;
            }
            let dm = match axis {
                0 => (m.0 - 1, m.1, m.2),
                1 => (m.0, m.1 - 1, m.2),
                _ => (m.0, m.1, m.2 - 1),
            };
            r.add_term(dm, c.scale(&Rational::from_integer(e.into())));
        }
        r
    }

    /// The homogeneous slice of total degree `d`.
    pub fn slice_degree(&self, d: u32) -> Poly3 {
        Poly3 {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| mono_degree(m) == d)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Drop every term of total degree exceeding `cap`.
    pub fn truncate_degree(&self, cap: u32) -> Poly3 {
        Poly3 {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| mono_degree(m) <= cap)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Substitute `z -> h(x, y)` (a z-free polynomial), keeping total degree
    /// at most `cap`.
    pub fn substitute_z(&self, h: &Poly3, cap: u32) -> Poly3 {
        assert!(
            h.terms.keys().all(|m| m.2 == 0),
            "substitution polynomial must be z-free"
        );
        // cache of h^l
        let mut pows: Vec<Poly3> = vec![Poly3::from_rational_terms(
            [((0, 0, 0), Rational::from_integer(1.into()))],
            self.terms
                .values()
                .next()
                .map(|c| c.trunc())
                .unwrap_or_else(|| h.terms.values().next().map(|c| c.trunc()).unwrap_or(0)),
        )];
        let mut r = Poly3::zero();
        for (m, c) in &self.terms {
            let l = m.2 as usize;
            while pows.len() <= l {
                let next = pows.last().unwrap().mul_capped(h, Some(cap));
                pows.push(next);
            }
            let base = Poly3 {
                terms: [((m.0, m.1, 0), c.clone())].into_iter().collect(),
            };
            r.add_assign(&base.mul_capped(&pows[l], Some(cap)));
        }
        r.truncate_degree(cap)
    }

    /// Evaluate at floats, with parameter values for the jets.
    pub fn eval_f64(&self, x: f64, y: f64, z: f64, params: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += c.eval_f64(params)
                * x.powi(m.0 as i32)
                * y.powi(m.1 as i32)
                * z.powi(m.2 as i32);
        }
        acc
    }

    /// Evaluate all jet coefficients at an exact parameter point, producing a
    /// rational-coefficient polynomial at jet order 0.
    pub fn eval_params(&self, values: &[Rational]) -> Poly3 {
        let mut r = Poly3::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, JetPoly::constant(c.eval(values), 0));
        }
        r
    }
}

/// The directional derivative of `h` along the vector field `x`:
/// `X h = h_x·ẋ + h_y·ẏ + h_z·ż`.
pub fn apply_vector_field(x: &[Poly3; 3], h: &Poly3) -> Poly3 {
    let mut r = Poly3::zero();
    for axis in 0..3 {
        r.add_assign(&h.diff(axis).mul(&x[axis]));
    }
    r
}

/// Same as [`apply_vector_field`] but dropping products beyond `cap`.
pub fn apply_vector_field_capped(x: &[Poly3; 3], h: &Poly3, cap: u32) -> Poly3 {
    let mut r = Poly3::zero();
    for axis in 0..3 {
        r.add_assign(&h.diff(axis).mul_capped(&x[axis], Some(cap)));
    }
    r
}
