//! Degree-by-degree solution of the homological equation
//! `XH = Σ_{k≥2} L_{k-1}·B_{2k}` producing the focal coefficients as
//! parameter jets.
//!
//! `H = x² + y² + Σ_{j+k+l≥3} p_{jkl} x^j y^k z^l` is built one homogeneous
//! degree at a time. At degree `d` the linear part of the field acts layer
//! by layer in the z-exponent: for `z^l` with `l ≥ 1` the operator
//! (planar rotation derivative − λl) is invertible; the planar layer `l = 0`
//! is invertible at odd degree, while at even degree its one-dimensional
//! cokernel carries the focal coefficient `L_{d/2-1}` and the matching
//! kernel freedom is fixed by the mode's normalization. Every elimination
//! happens over ℚ: one LU factorization per degree and layer is reused for
//! each parameter-jet monomial on the right-hand side.
//!
//! Two resonant-bundle conventions are supported. `paper` places `L_k` on
//! the monomial `x^{2k+2}` and zeroes the `x^d` coefficient of `H`, which is
//! the convention behind the printed coefficient tables this crate
//! reproduces; `radial` places `L_k` on `(x²+y²)^{k+1}` with the
//! circle-average normalization, and is the convention in which the reduced
//! displacement map satisfies `𝐝(ρ₀) = π L_k ρ₀^{2k+1} + …` at the first
//! nonzero coefficient (the floating-point oracle checks against this one).

use crate::jet::{JetMono, JetPoly};
use crate::linalg::{QLu, QMatrix};
use crate::mpoly::MPoly;
use crate::poly3::{apply_vector_field_capped, mono_degree, Mono3, Poly3};
use crate::rational::Rational;
use crate::system::{Perturbation, SystemSpec};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Bundle {
    /// `L_k` sits on the resonant monomial `x^{2k+2}`.
    ResonantX,
    /// `L_k` sits on `(x²+y²)^{k+1}`.
    Radial,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// The `x^d` coefficient of the degree-`d` slice of `H` is set to 0.
    CoeffXZero,
    /// The `y^d` coefficient is set to 0.
    CoeffYZero,
    /// The circle-average projection of the planar slice onto
    /// `(x²+y²)^{d/2}` is set to 0.
    ProjectionZero,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FocalMode {
    pub bundle: Bundle,
    pub normalization: Normalization,
}

impl FocalMode {
    /// The convention of the printed focal-coefficient tables.
    pub fn paper() -> Self {
        FocalMode {
            bundle: Bundle::ResonantX,
            normalization: Normalization::CoeffXZero,
        }
    }

    /// The convention satisfying `l_k = π L_k` against the displacement map.
    pub fn radial() -> Self {
        FocalMode {
            bundle: Bundle::Radial,
            normalization: Normalization::ProjectionZero,
        }
    }
}

impl Default for FocalMode {
    fn default() -> Self {
        FocalMode::paper()
    }
}

#[derive(Clone, Debug)]
pub struct FocalOptions {
    /// Number of focal coefficients L₁…L_K to compute.
    pub k: usize,
    /// Jet truncation order in the perturbation parameters.
    pub trunc: u32,
    pub mode: FocalMode,
    /// Retain the full H-series (memory permitting); otherwise slices are
    /// dropped as soon as later degrees no longer need them.
    pub keep_h: bool,
    /// Refuse computations whose H-series degree `2K+2` exceeds this cap.
    pub max_degree: Option<u32>,
}

impl FocalOptions {
    pub fn new(k: usize, trunc: u32) -> Self {
        FocalOptions {
            k,
            trunc,
            mode: FocalMode::paper(),
            keep_h: false,
            max_degree: None,
        }
    }

    pub fn with_mode(mut self, mode: FocalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_keep_h(mut self) -> Self {
        self.keep_h = true;
        self
    }

    pub fn with_max_degree(mut self, cap: u32) -> Self {
        self.max_degree = Some(cap);
        self
    }
}

#[derive(Debug, Error)]
pub enum FocalError {
    #[error("lambda = 0 makes the homological operator singular")]
    ZeroLambda,
    #[error("degree budget exceeded (last completed focal index: {last_completed_k})")]
    Resource { last_completed_k: usize },
    #[error("internal residual check failed at degree {degree}")]
    SelfCheck { degree: u32 },
}

/// The formal first integral candidate built by the solve.
#[derive(Clone, Debug)]
pub struct HSeries {
    pub trunc: u32,
    pub computed_degree: u32,
    /// `x² + y²` plus every computed `p_{jkl}` slice, as one polynomial.
    pub poly: Poly3,
}

/// The ordered focal coefficients L₁…L_K with their provenance.
#[derive(Clone, Debug)]
pub struct FocalSequence {
    pub l: Vec<JetPoly>,
    pub trunc: u32,
    pub mode: FocalMode,
    pub param_names: Vec<String>,
    pub system: SystemSpec,
    pub pert: Perturbation,
}

impl FocalSequence {
    pub fn k(&self) -> usize {
        self.l.len()
    }

    /// True when every coefficient vanishes identically at Λ = 0.
    pub fn vanishes_at_origin(&self) -> bool {
        self.l.iter().all(|l| l.constant_term().is_zero())
    }
}

/// Compute the focal coefficients L₁…L_K of the perturbed system as jets of
/// order `T`, together with the H-series when requested.
pub fn focal_coefficients(
    spec: &SystemSpec,
    pert: &Perturbation,
    opts: &FocalOptions,
) -> Result<(FocalSequence, Option<HSeries>), FocalError> {
    if spec.lambda.is_zero() {
        return Err(FocalError::ZeroLambda);
    }
    assert!(opts.k >= 1, "K must be at least 1");
    let top_degree = 2 * opts.k as u32 + 2;
    if let Some(cap) = opts.max_degree {
        if top_degree > cap {
            let last = if cap >= 4 { (cap as usize - 2) / 2 } else { 0 };
            return Err(FocalError::Resource {
                last_completed_k: last.min(opts.k),
            });
        }
    }
    let t = opts.trunc;
    let lambda = &spec.lambda;

    // nonlinear field components (degree >= 2 terms only)
    let nl: [Poly3; 3] = {
        let full = spec.vector_field(pert, t);
        let linear = linear_field(lambda, t);
        [
            full[0].sub(&linear[0]),
            full[1].sub(&linear[1]),
            full[2].sub(&linear[2]),
        ]
    };

    let mut h2 = Poly3::zero();
    h2.add_term((2, 0, 0), JetPoly::constant(Rational::one(), t));
    h2.add_term((0, 2, 0), JetPoly::constant(Rational::one(), t));

    // pending[d] accumulates the degree-d part of X_nl applied to the
    // H-slices already known
    let mut pending: BTreeMap<u32, BTreeMap<Mono3, JetPoly>> = BTreeMap::new();
    scatter_products(&nl, &h2, top_degree, &mut pending);

    let mut h_full = h2.clone();
    let mut ls: Vec<JetPoly> = Vec::with_capacity(opts.k);

    for d in 3..=top_degree {
        let s_d = pending.remove(&d).unwrap_or_default();
        let (h_d, l_d) = solve_degree(d, lambda, t, &s_d, opts.mode);

        // cheap residual check: X₀H_d + S_d must equal the resonant term
        residual_check(d, lambda, &h_d, &s_d, &l_d, opts.mode, t)
            .map_err(|_| FocalError::SelfCheck { degree: d })?;

        if let Some(l) = l_d {
            ls.push(l);
        }
        if d < top_degree {
            scatter_products(&nl, &h_d, top_degree, &mut pending);
        }
        if opts.keep_h {
            h_full.add_assign(&h_d);
        }
    }

    let seq = FocalSequence {
        l: ls,
        trunc: t,
        mode: opts.mode,
        param_names: pert.names(),
        system: spec.clone(),
        pert: pert.clone(),
    };
    let h = opts.keep_h.then_some(HSeries {
        trunc: t,
        computed_degree: top_degree,
        poly: h_full,
    });
    Ok((seq, h))
}

fn linear_field(lambda: &Rational, t: u32) -> [Poly3; 3] {
    [
        Poly3::from_rational_terms([((0, 1, 0), -Rational::one())], t),
        Poly3::from_rational_terms([((1, 0, 0), Rational::one())], t),
        Poly3::from_rational_terms([((0, 0, 1), -lambda.clone())], t),
    ]
}

/// Add every term of `X_nl` applied to the slice `h` into the per-degree
/// accumulator, dropping degrees beyond `top`.
fn scatter_products(
    nl: &[Poly3; 3],
    h: &Poly3,
    top: u32,
    pending: &mut BTreeMap<u32, BTreeMap<Mono3, JetPoly>>,
) {
    for axis in 0..3 {
        let dh = h.diff(axis);
        if dh.is_zero() || nl[axis].is_zero() {
            continue;
        }
        for (mf, cf) in nl[axis].terms() {
            let fast = classify_coeff(cf);
            for (mh, ch) in dh.terms() {
                let m = (mf.0 + mh.0, mf.1 + mh.1, mf.2 + mh.2);
                let deg = mono_degree(&m);
                if deg > top {
                    continue;
                }
                let prod = match &fast {
                    CoeffKind::Constant(r) => ch.scale(r),
                    CoeffKind::Param(i) => ch.mul_param(*i),
                    CoeffKind::General => cf.mul(ch),
                };
                if prod.is_zero() {
                    continue;
                }
                pending
                    .entry(deg)
                    .or_default()
                    .entry(m)
                    .and_modify(|acc| acc.add_assign(&prod))
                    .or_insert(prod);
            }
        }
    }
    if let Some(d) = pending.keys().next() {
        if pending[d].is_empty() {
            let d = *d;
            pending.remove(&d);
        }
    }
}

enum CoeffKind {
    Constant(Rational),
    Param(usize),
    General,
}

fn classify_coeff(c: &JetPoly) -> CoeffKind {
    if c.num_terms() == 1 {
        let (m, v) = c.terms().next().unwrap();
        if m.is_unit() {
            return CoeffKind::Constant(v.clone());
        }
        if m.degree() == 1 && v.is_one() {
            return CoeffKind::Param(m.factors()[0] as usize);
        }
    }
    CoeffKind::General
}

/// Circle average of `cos^j sin^k` over a full period (zero unless both
/// exponents are even).
fn circle_avg(j: u16, k: u16) -> Rational {
    if j % 2 == 1 || k % 2 == 1 {
        return Rational::zero();
    }
    // (j-1)!!(k-1)!!/(j+k)!!
    fn double_fact(n: i64) -> Rational {
        let mut acc = Rational::one();
        let mut i = n;
        while i > 1 {
            acc *= Rational::from_integer(i.into());
            i -= 2;
        }
        acc
    }
    double_fact(j as i64 - 1) * double_fact(k as i64 - 1) / double_fact((j + k) as i64)
}

/// Coefficient vector of the mode's resonant bundle on the planar degree-n
/// monomial basis indexed by the x-exponent.
fn bundle_vector(n: u16, bundle: Bundle) -> Vec<Rational> {
    let mut b = vec![Rational::zero(); n as usize + 1];
    match bundle {
        Bundle::ResonantX => {
            b[n as usize] = Rational::one();
        }
        Bundle::Radial => {
            // (x²+y²)^(n/2)
            let half = n / 2;
            let mut c = Rational::one();
            for i in 0..=half {
                b[(2 * i) as usize] = c.clone();
                if i < half {
                    c = c * Rational::from_integer((half - i).into())
                        / Rational::from_integer((i + 1).into());
                }
            }
        }
    }
    b
}

/// Solve the degree-`d` homological equation given the accumulated
/// lower-degree contributions `s_d`. Returns the degree-`d` slice of H and,
/// at even degree, the focal coefficient `L_{d/2-1}`.
fn solve_degree(
    d: u32,
    lambda: &Rational,
    t: u32,
    s_d: &BTreeMap<Mono3, JetPoly>,
    mode: FocalMode,
) -> (Poly3, Option<JetPoly>) {
    let mut h = Poly3::zero();
    let mut l_out: Option<JetPoly> = if d % 2 == 0 {
        Some(JetPoly::zero(t))
    } else {
        None
    };

    for l in (0..=d as u16).rev() {
        let n = d as u16 - l;
        let resonant = l == 0 && d % 2 == 0;
        let dim = n as usize + 1;
        let size = if resonant { dim + 1 } else { dim };

        // collect the jet-monomial columns of the right-hand side -S
        let mut rhs_cols: BTreeMap<JetMono, Vec<Rational>> = BTreeMap::new();
        for j in 0..=n {
            let m = (j, n - j, l);
            if let Some(c) = s_d.get(&m) {
                for (jm, v) in c.terms() {
                    rhs_cols
                        .entry(jm.clone())
                        .or_insert_with(|| vec![Rational::zero(); size])[j as usize] = -v.clone();
                }
            }
        }
        if rhs_cols.is_empty() && !resonant {
            continue;
        }

        // operator matrix for this layer
        let mut m = QMatrix::zero(size, size);
        let shift = -(lambda * Rational::from_integer(l.into()));
        for j in 0..=n {
            let col = j as usize;
            if j >= 1 {
                m.set(
                    j as usize - 1,
                    col,
                    -Rational::from_integer(j.into()),
                );
            }
            if j + 1 <= n {
                m.set(
                    j as usize + 1,
                    col,
                    Rational::from_integer((n - j).into()),
                );
            }
            if !shift.is_zero() {
                m.set(col, col, shift.clone());
            }
        }
        if resonant {
            let b = bundle_vector(n, mode.bundle);
            for (r, bv) in b.iter().enumerate() {
                m.set(r, dim, -bv.clone());
            }
            match mode.normalization {
                Normalization::CoeffXZero => m.set(dim, n as usize, Rational::one()),
                Normalization::CoeffYZero => m.set(dim, 0, Rational::one()),
                Normalization::ProjectionZero => {
                    for j in 0..=n {
                        m.set(dim, j as usize, circle_avg(j, n - j));
                    }
                }
            }
        }
        let lu = QLu::factor(&m).expect("homological operator is singular (lambda = 0?)");

        for (jm, rhs) in rhs_cols {
            let x = lu.solve(&rhs);
            for j in 0..=n {
                let v = &x[j as usize];
                if !v.is_zero() {
                    let mut jp = JetPoly::zero(t);
                    jp.add_term(jm.clone(), v.clone());
                    h.add_term((j, n - j, l), jp);
                }
            }
            if resonant {
                if let Some(acc) = l_out.as_mut() {
                    acc.add_term(jm.clone(), x[dim].clone());
                }
            }
        }
    }
    (h, l_out)
}

/// Verify `X₀H_d + S_d = L·B_d` exactly (the per-degree residual of the
/// homological equation). Cheap; runs on every solve.
fn residual_check(
    d: u32,
    lambda: &Rational,
    h_d: &Poly3,
    s_d: &BTreeMap<Mono3, JetPoly>,
    l_d: &Option<JetPoly>,
    mode: FocalMode,
    t: u32,
) -> Result<(), ()> {
    let lin = linear_field(lambda, t);
    let mut resid = apply_vector_field_capped(&lin, h_d, d);
    for (m, c) in s_d {
        resid.add_term(*m, c.clone());
    }
    if let Some(l) = l_d {
        let n = d as u16;
        let b = bundle_vector(n, mode.bundle);
        for (j, bv) in b.iter().enumerate() {
            if !bv.is_zero() {
                resid.add_term((j as u16, n - j as u16, 0), l.scale(bv).neg());
            }
        }
    }
    if resid.is_zero() {
        Ok(())
    } else {
        Err(())
    }
}

/// Independent full verification of the focal identity: recompute `XH`
/// through degree `2K+2` with the generic polynomial machinery and check
/// that nothing remains after subtracting the resonant series.
pub fn verify_focal_identity(seq: &FocalSequence, h: &HSeries) -> bool {
    let top = h.computed_degree;
    let field = seq.system.vector_field(&seq.pert, seq.trunc);
    let mut xh = apply_vector_field_capped(&field, &h.poly, top);
    for (k, l) in seq.l.iter().enumerate() {
        let deg = 2 * (k as u32 + 1) + 2; // L_{k+1 frame}: L index k -> degree 2k+4? no: L_{k+1}
        let n = (2 * (k + 2)) as u16; // degree of bundle for L_{k+1}: 2(k+2)
        debug_assert_eq!(deg, n as u32);
        let b = bundle_vector(n, seq.mode.bundle);
        for (j, bv) in b.iter().enumerate() {
            if !bv.is_zero() {
                xh.add_term((j as u16, n - j as u16, 0), l.scale(bv).neg());
            }
        }
    }
    let ok = xh.terms().all(|(m, _)| mono_degree(m) > top);
    ok
}

/// Row `i` = gradient of `L_{i+1}` in the parameters at Λ = 0.
pub fn linear_part_matrix(seq: &FocalSequence) -> QMatrix {
    let m = seq.param_names.len();
    let mut out = QMatrix::zero(seq.l.len(), m);
    for (i, l) in seq.l.iter().enumerate() {
        for j in 0..m {
            out.set(i, j, l.linear_coeff(j));
        }
    }
    out
}

/// Homogeneous degree-2 jet slices of the selected coefficients (1-based
/// indices into L₁…L_K), as quadratic forms over the full parameter list.
pub fn quadratic_parts(seq: &FocalSequence, indices: &[usize]) -> Vec<MPoly> {
    assert!(seq.trunc >= 2, "quadratic parts require jet order T >= 2");
    let m = seq.param_names.len();
    indices
        .iter()
        .map(|&i| {
            assert!(i >= 1 && i <= seq.l.len(), "focal index out of range");
            let slice = seq.l[i - 1].homogeneous_part(2);
            let mut q = MPoly::zero(m);
            for (jm, c) in slice.terms() {
                let f = jm.factors();
                let mut e = vec![0u16; m];
                e[f[0] as usize] += 1;
                e[f[1] as usize] += 1;
                q.add_term(e, c.clone());
            }
            q
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::system::parse_system;

    fn thm38_file() -> crate::system::SystemFile {
        parse_system(
            r#"
lambda = 1
P = x^2 + 2*x*y + 3*x*z
Q = x*y + 2*y^2 + 3*y*z
R = 2/3*x^2 + x*y + 4*x*z - 2/3*y^2 + 3*y*z + 6*z^2
params = a002, a011, a020, a101, a110, a200, b002, b011, b020, b101, b110, b200, c002
G1 = a200*x^2 + a110*x*y + a101*x*z + a020*y^2 + a011*y*z + a002*z^2
G2 = b200*x^2 + b110*x*y + b101*x*z + b020*y^2 + b011*y*z + b002*z^2
G3 = c002*z^2
"#,
        )
        .unwrap()
    }

    #[test]
    fn planar_embedding_radial_l1() {
        // P = c·x(x²+y²), Q = c·y(x²+y²), R = 0: in the radial convention
        // XH = 2c(x²+y²)² exactly, so L₁ = 2c at jet order 0.
        let c = rat(5, 7);
        let spec = SystemSpec {
            lambda: rat_int(1),
            p: Poly3::from_rational_terms(
                [((3, 0, 0), c.clone()), ((1, 2, 0), c.clone())],
                0,
            ),
            q: Poly3::from_rational_terms(
                [((2, 1, 0), c.clone()), ((0, 3, 0), c.clone())],
                0,
            ),
            r: Poly3::zero(),
        };
        let pert = Perturbation::empty();
        let opts = FocalOptions::new(2, 0).with_mode(FocalMode::radial()).with_keep_h();
        let (seq, h) = focal_coefficients(&spec, &pert, &opts).unwrap();
        assert_eq!(seq.l[0].constant_term(), &c * rat_int(2));
        assert!(verify_focal_identity(&seq, &h.unwrap()));
    }

    #[test]
    fn zero_perturbation_on_center_yields_zero_sequence() {
        // the unperturbed Theorem 3.8 system is a center: every focal
        // coefficient vanishes at jet order 0
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let opts = FocalOptions::new(4, 0).with_keep_h();
        let (seq, h) = focal_coefficients(&spec, &Perturbation::empty(), &opts).unwrap();
        assert!(seq.l.iter().all(|l| l.is_zero()));
        assert!(verify_focal_identity(&seq, &h.unwrap()));
    }

    #[test]
    fn paper_l1_linear_part_matches_print() {
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let opts = FocalOptions::new(1, 1).with_keep_h();
        let (seq, h) = focal_coefficients(&spec, &f.pert, &opts).unwrap();
        assert!(verify_focal_identity(&seq, &h.unwrap()));
        let l1 = &seq.l[0];
        let pos = |n: &str| f.pert.position(n).unwrap();
        let expect = [
            ("a011", rat(22, 45)),
            ("a020", rat_int(4)),
            ("a101", rat(-4, 45)),
            ("a110", rat(2, 3)),
            ("a200", rat(4, 3)),
            ("b011", rat(4, 45)),
            ("b020", rat(-2, 3)),
            ("b101", rat(22, 45)),
            ("b110", rat(-4, 3)),
            ("b200", rat_int(-2)),
            ("a002", rat_int(0)),
            ("b002", rat_int(0)),
            ("c002", rat_int(0)),
        ];
        for (name, want) in expect {
            assert_eq!(l1.linear_coeff(pos(name)), want, "coefficient of {name}");
        }
        assert!(l1.constant_term().is_zero());
    }

    #[test]
    fn radial_l1_relates_by_double_factorial_ratio() {
        // paper-mode L₁ = (8/3)·radial-mode L₁ (L₁ is normalization
        // independent; only the bundle projection differs)
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let paper = focal_coefficients(&spec, &f.pert, &FocalOptions::new(1, 1))
            .unwrap()
            .0;
        let radial = focal_coefficients(
            &spec,
            &f.pert,
            &FocalOptions::new(1, 1).with_mode(FocalMode::radial()),
        )
        .unwrap()
        .0;
        assert_eq!(paper.l[0], radial.l[0].scale(&rat(8, 3)));
    }

    #[test]
    fn rank_is_normalization_and_bundle_invariant() {
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let modes = [
            FocalMode::paper(),
            FocalMode::radial(),
            FocalMode {
                bundle: Bundle::ResonantX,
                normalization: Normalization::CoeffYZero,
            },
            FocalMode {
                bundle: Bundle::Radial,
                normalization: Normalization::CoeffXZero,
            },
        ];
        let ranks: Vec<usize> = modes
            .iter()
            .map(|&mode| {
                let opts = FocalOptions::new(4, 1).with_mode(mode);
                let (seq, _) = focal_coefficients(&spec, &f.pert, &opts).unwrap();
                linear_part_matrix(&seq).rank()
            })
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] == w[1]), "{ranks:?}");
        assert_eq!(ranks[0], 4);
    }

    #[test]
    fn scaling_covariance_in_jet_order() {
        // multiplying the perturbation polynomials by c scales the degree-j
        // jet slice of every L_k by c^j
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let c = rat_int(2);
        let mut scaled = f.pert.clone();
        for g in scaled.g.iter_mut() {
            *g = g.scale(&c);
        }
        let opts = FocalOptions::new(2, 2);
        let (base, _) = focal_coefficients(&spec, &f.pert, &opts).unwrap();
        let (scl, _) = focal_coefficients(&spec, &scaled, &opts).unwrap();
        for (lb, lsx) in base.l.iter().zip(&scl.l) {
            for j in 0..=2u32 {
                let mut factor = Rational::one();
                for _ in 0..j {
                    factor *= &c;
                }
                assert_eq!(
                    lb.homogeneous_part(j).scale(&factor),
                    lsx.homogeneous_part(j)
                );
            }
        }
    }

    #[test]
    fn zero_lambda_is_refused() {
        let spec = SystemSpec {
            lambda: rat_int(0),
            p: Poly3::zero(),
            q: Poly3::zero(),
            r: Poly3::zero(),
        };
        let err = focal_coefficients(&spec, &Perturbation::empty(), &FocalOptions::new(1, 0))
            .unwrap_err();
        assert!(matches!(err, FocalError::ZeroLambda));
    }

    #[test]
    fn degree_cap_reports_progress() {
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let opts = FocalOptions::new(10, 0).with_max_degree(12);
        let err = focal_coefficients(&spec, &Perturbation::empty(), &opts).unwrap_err();
        match err {
            FocalError::Resource { last_completed_k } => assert_eq!(last_completed_k, 5),
            other => panic!("expected resource error, got {other:?}"),
        }
        let _ = spec;
    }

    #[test]
    fn quadratic_parts_extract_degree_two_slices() {
        let f = thm38_file();
        let spec = f.instantiate(&Default::default()).unwrap();
        let (seq, _) = focal_coefficients(&spec, &f.pert, &FocalOptions::new(2, 2)).unwrap();
        let qs = quadratic_parts(&seq, &[1, 2]);
        // evaluating the quadratic form at a point equals the degree-2 slice
        // of the jet evaluated there
        let m = seq.param_names.len();
        let point: Vec<Rational> = (0..m).map(|i| rat(i as i64 + 1, 3)).collect();
        for (q, l) in qs.iter().zip(&seq.l) {
            assert_eq!(q.eval(&point), l.homogeneous_part(2).eval(&point));
        }
    }
}
