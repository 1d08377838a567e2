//! Finite-order center-manifold jets and rigidity classification.
//!
//! The local center manifold is the graph `z = h(x, y)` with `h` starting at
//! degree 2. Its jet is the unique degree-by-degree solution of the
//! invariance equation
//! `h_x·ẋ + h_y·ẏ = -λ h + R(x, y, h)`; at each degree the operator
//! (planar rotation derivative + λ) is nonsingular for λ ≠ 0 because the
//! planar linear part is a rotation.
//!
//! Rigidity verdicts: `xQ - yP ≡ 0` is rigidity by cylindrical coordinates;
//! vanishing of `(xQ - yP)|_{z=h}` through a finite degree is a necessary
//! check for rigidity proper (the manifold is generally non-analytic, so
//! only jets are decidable).

use crate::linalg::{QLu, QMatrix};
use crate::poly3::{mono_degree, Poly3};
use crate::rational::Rational;
use crate::system::SystemSpec;
use num_traits::{One, Zero};

/// Jet of a local center manifold `z = h(x, y)` through total degree
/// `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterManifoldJet {
    /// Bivariate polynomial (z-exponent 0 throughout), rational
    /// coefficients, no terms below degree 2.
    pub h: Poly3,
    pub order: u32,
}

/// Compute the center-manifold jet through degree `n` (requires λ ≠ 0).
pub fn center_manifold_jet(spec: &SystemSpec, n: u32) -> CenterManifoldJet {
    assert!(!spec.lambda.is_zero(), "center manifold requires lambda != 0");
    assert!(n >= 2);
    let mut h = Poly3::zero();
    for d in 2..=n {
        // rhs = [R(x,y,h) - h_x P(x,y,h) - h_y Q(x,y,h)]_d, which only
        // involves slices of h below degree d
        let r_sub = spec.r.substitute_z(&h, d);
        let p_sub = spec.p.substitute_z(&h, d);
        let q_sub = spec.q.substitute_z(&h, d);
        let mut rhs = r_sub;
        rhs.add_assign(&h.diff(0).mul_capped(&p_sub, Some(d)).neg());
        rhs.add_assign(&h.diff(1).mul_capped(&q_sub, Some(d)).neg());
        let rhs_d = rhs.slice_degree(d);
        if rhs_d.is_zero() {
            continue;
        }
        // solve (Rot + lambda) h_d = rhs_d on the degree-d bivariate basis
        let dim = d as usize + 1;
        let mut m = QMatrix::zero(dim, dim);
        for j in 0..=d as u16 {
            let col = j as usize;
            if j >= 1 {
                m.set(col - 1, col, -Rational::from_integer(j.into()));
            }
            if (j as u32) < d {
                m.set(col + 1, col, Rational::from_integer((d as u16 - j).into()));
            }
            m.set(col, col, spec.lambda.clone());
        }
        let lu = QLu::factor(&m).expect("rotation-shifted operator is singular");
        let mut rhs_vec = vec![Rational::zero(); dim];
        for (mono, c) in rhs_d.terms() {
            debug_assert_eq!(mono.2, 0);
            rhs_vec[mono.0 as usize] = c.constant_term();
        }
        let x = lu.solve(&rhs_vec);
        for (j, v) in x.into_iter().enumerate() {
            if !v.is_zero() {
                h.add_term(
                    (j as u16, d as u16 - j as u16, 0),
                    crate::jet::JetPoly::constant(v, 0),
                );
            }
        }
    }
    CenterManifoldJet { h, order: n }
}

/// Residual of the invariance equation through degree `order`; zero iff the
/// jet is consistent.
pub fn jet_residual(spec: &SystemSpec, jet: &CenterManifoldJet) -> Poly3 {
    let cap = jet.order;
    let h = &jet.h;
    let xdot = {
        let mut p = Poly3::from_rational_terms([((0, 1, 0), -Rational::one())], 0);
        p.add_assign(&spec.p);
        p.substitute_z(h, cap)
    };
    let ydot = {
        let mut p = Poly3::from_rational_terms([((1, 0, 0), Rational::one())], 0);
        p.add_assign(&spec.q);
        p.substitute_z(h, cap)
    };
    let zdot = {
        let mut p = h.scale(&-spec.lambda.clone());
        p.add_assign(&spec.r.substitute_z(h, cap));
        p
    };
    let mut resid = h.diff(0).mul_capped(&xdot, Some(cap));
    resid.add_assign(&h.diff(1).mul_capped(&ydot, Some(cap)));
    resid.add_assign(&zdot.neg());
    resid.truncate_degree(cap)
}

/// `xQ(x,y,z) - yP(x,y,z)`.
pub fn angular_defect(spec: &SystemSpec) -> Poly3 {
    let x = Poly3::from_rational_terms([((1, 0, 0), Rational::one())], 0);
    let y = Poly3::from_rational_terms([((0, 1, 0), Rational::one())], 0);
    x.mul(&spec.q).sub(&y.mul(&spec.p))
}

/// Rigidity by cylindrical coordinates: `xQ - yP ≡ 0`.
pub fn is_rigid_cylindrical(spec: &SystemSpec) -> bool {
    angular_defect(spec).is_zero()
}

/// Verdict for rigidity on the center manifold through degree `n`: true iff
/// `(xQ - yP)|_{z=h}` has no terms of total degree ≤ n. A finite-order
/// necessary condition, not a proof.
pub fn is_rigid_on_cm(spec: &SystemSpec, n: u32) -> bool {
    assert!(n >= 2);
    let defect = angular_defect(spec);
    if defect.is_zero() {
        return true;
    }
    let jet = center_manifold_jet(spec, n);
    let restricted = defect.substitute_z(&jet.h, n);
    let ok = restricted.terms().all(|(m, _)| mono_degree(m) > n);
    ok
}
