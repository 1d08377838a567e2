//! The two bifurcation machines.
//!
//! Rank criterion: the rank `r` of the linear-part matrix of the focal
//! coefficients certifies `r - 1` small-amplitude limit cycles, plus one
//! more from a perturbation of the trace of the linear part (the trace is
//! accounted arithmetically; it never enters the jets).
//!
//! Higher-order criterion: after a linear change of parameters the first
//! `r` coefficients become coordinates `u`; setting `u = 0` leaves the next
//! coefficients as quadratic forms `h_i` in the residual parameters. A line
//! `η` with `h_i(η) = 0` for all but the last, transversal intersection,
//! and `h_last(η) ≠ 0` certifies `r + l` cycles. The line is found by
//! dehomogenizing, eliminating through resultants to one coordinate,
//! isolating its real roots, and back-substituting; every certificate fact
//! is then verified in exact ℚ(α) arithmetic.

use crate::focal::{linear_part_matrix, quadratic_parts, FocalSequence};
use crate::linalg::{QLu, QMatrix};
use crate::mpoly::{resultant_in, MPoly};
use crate::numfield::{AlgebraicNumber, NumberField};
use crate::rational::Rational;
use crate::univar::{isolate_real_roots, refine_interval, UPoly};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CyclicityError {
    #[error("no verifying line found")]
    NotFound,
    #[error("degenerate elimination at stage `{0}`: identically zero resultant")]
    Degenerate(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Unsupported(String),
}

/// Evidence for the rank criterion.
#[derive(Clone, Debug)]
pub struct RankCertificate {
    /// Number of focal coefficients the matrix was built from.
    pub k: usize,
    pub matrix: QMatrix,
    pub rank: usize,
    /// Lexicographically-first maximal independent column set.
    pub pivot_cols: Vec<usize>,
    /// Lexicographically-first maximal independent row set.
    pub pivot_rows: Vec<usize>,
    pub param_names: Vec<String>,
}

impl RankCertificate {
    pub fn lower_bound_without_trace(&self) -> usize {
        self.rank.saturating_sub(1)
    }

    /// One extra cycle from perturbing the trace of the linear part.
    pub fn lower_bound_with_trace(&self) -> usize {
        self.rank
    }
}

pub fn rank_certificate(seq: &FocalSequence) -> RankCertificate {
    assert!(seq.trunc >= 1, "rank certificate requires jet order T >= 1");
    let matrix = linear_part_matrix(seq);
    let (rank, pivot_cols) = matrix.pivot_columns();
    let (_, pivot_rows) = matrix.pivot_rows();
    RankCertificate {
        k: seq.k(),
        matrix,
        rank,
        pivot_cols,
        pivot_rows,
        param_names: seq.param_names.clone(),
    }
}

/// The reduced quadratic data of the higher-order criterion.
#[derive(Clone, Debug)]
pub struct HigherOrderProblem {
    /// Count of independent linear parts (the `u` coordinates).
    pub k: usize,
    pub residual_names: Vec<String>,
    /// Positions of the residual parameters in the original list.
    pub residual_positions: Vec<usize>,
    /// Quadratic forms over the residual parameters for the focal indices
    /// `k+1 … k+l` (the last one is the target).
    pub h: Vec<MPoly>,
    /// Linear expressions of the pivot parameters in the residuals (used by
    /// consistency tests): pivot position -> linear form.
    pub pivot_solutions: Vec<(usize, MPoly)>,
}

impl HigherOrderProblem {
    pub fn extra(&self) -> usize {
        self.h.len()
    }

    pub fn target_index(&self) -> usize {
        self.k + self.h.len()
    }

    pub fn vanishing_indices(&self) -> Vec<usize> {
        (self.k + 1..self.k + self.h.len()).collect()
    }

    pub fn total_cycles(&self) -> usize {
        self.k + self.h.len()
    }
}

/// Solve the pivot parameters in terms of `u` and the residual parameters at
/// first order, set `u = 0`, and return the degree-2 slices of
/// `L_{r+1} … L_{r+l}` as quadratic forms purely in the residuals.
pub fn reduce_to_quadratic_problem(
    seq: &FocalSequence,
    cert: &RankCertificate,
    extra: usize,
) -> Result<HigherOrderProblem, CyclicityError> {
    if seq.trunc < 2 {
        return Err(CyclicityError::Usage(
            "higher-order reduction requires jet order T >= 2".into(),
        ));
    }
    let r = cert.rank;
    if seq.k() < r + extra {
        return Err(CyclicityError::Usage(format!(
            "requested {extra} extra coefficients beyond rank {r}, but only K = {} are available",
            seq.k()
        )));
    }
    if cert.pivot_rows.iter().enumerate().any(|(i, &row)| i != row) || cert.pivot_rows.len() != r
    {
        return Err(CyclicityError::Unsupported(
            "the first r focal coefficients must have independent linear parts".into(),
        ));
    }
    let m = seq.param_names.len();
    let residual_positions: Vec<usize> =
        (0..m).filter(|j| !cert.pivot_cols.contains(j)).collect();
    let nres = residual_positions.len();

    // A = rows 0..r x pivot cols (invertible), B = rows 0..r x residual cols
    let rows: Vec<usize> = (0..r).collect();
    let a = cert.matrix.submatrix(&rows, &cert.pivot_cols);
    let b = cert.matrix.submatrix(&rows, &residual_positions);
    let lu = QLu::factor(&a).expect("pivot submatrix is singular");

    // pivot parameter i = -(A^{-1} B r)_i as a linear form in the residuals
    let mut pivot_solutions: Vec<(usize, MPoly)> = cert
        .pivot_cols
        .iter()
        .map(|&pos| (pos, MPoly::zero(nres)))
        .collect();
    for (jres, _) in residual_positions.iter().enumerate() {
        let col: Vec<Rational> = (0..r).map(|i| b.get(i, jres).clone()).collect();
        let x = lu.solve(&col);
        for (i, xi) in x.into_iter().enumerate() {
            if !xi.is_zero() {
                let mut e = vec![0u16; nres];
                e[jres] = 1;
                pivot_solutions[i].1.add_term(e, -xi);
            }
        }
    }

    // substitute into the quadratic slices
    let indices: Vec<usize> = (r + 1..=r + extra).collect();
    let quads = quadratic_parts(seq, &indices);
    // linear form over the residuals for every original parameter
    let param_form: Vec<MPoly> = (0..m)
        .map(|pos| {
            if let Some(jres) = residual_positions.iter().position(|&p| p == pos) {
                MPoly::var(jres, nres)
            } else {
                pivot_solutions
                    .iter()
                    .find(|(p, _)| *p == pos)
                    .map(|(_, f)| f.clone())
                    .unwrap()
            }
        })
        .collect();
    let h: Vec<MPoly> = quads
        .iter()
        .map(|q| {
            let mut acc = MPoly::zero(nres);
            for (e, c) in q.terms() {
                // quadratic monomial: product of at most two parameters
                let mut factors: Vec<usize> = Vec::new();
                for (pos, &pow) in e.iter().enumerate() {
                    for _ in 0..pow {
                        factors.push(pos);
                    }
                }
                debug_assert_eq!(factors.len(), 2);
                let term = param_form[factors[0]]
                    .mul(&param_form[factors[1]])
                    .scale(c);
                acc = acc.add(&term);
            }
            acc
        })
        .collect();

    Ok(HigherOrderProblem {
        k: r,
        residual_names: residual_positions
            .iter()
            .map(|&p| seq.param_names[p].clone())
            .collect(),
        residual_positions,
        h,
        pivot_solutions,
    })
}

/// A verified transversal line in the residual parameter space.
#[derive(Clone, Debug)]
pub struct LineCertificate {
    pub alpha: AlgebraicNumber,
    /// Whether the defining polynomial is certified irreducible (hence truly
    /// minimal).
    pub alpha_certified_minimal: bool,
    /// Residual coordinates as polynomials in α (paired with their names).
    pub eta: Vec<(String, UPoly)>,
    /// Name of the residual coordinate that was dehomogenized to 1.
    pub pivot: String,
    /// Focal indices required to vanish on the line.
    pub vanishing_indices: Vec<usize>,
    pub target_index: usize,
    /// The Jacobian minor with respect to the non-pivot residuals, at η.
    pub determinant: UPoly,
    /// Value of the target quadratic form at η.
    pub target_value: UPoly,
    pub k: usize,
}

impl LineCertificate {
    pub fn total_cycles(&self) -> usize {
        self.target_index
    }
}

/// Evaluate a polynomial over the residuals at a point with ℚ(α)
/// coordinates.
fn eval_in_field(field: &NumberField, p: &MPoly, point: &[UPoly]) -> UPoly {
    let mut acc = UPoly::zero();
    for (e, c) in p.terms() {
        let mut t = UPoly::constant(c.clone());
        for (v, &pow) in e.iter().enumerate() {
            for _ in 0..pow {
                t = field.mul(&t, &point[v]);
            }
        }
        acc = acc.add(&t);
    }
    field.reduce(&acc)
}

/// Determinant over ℚ(α) by cofactor expansion (matrices here are tiny).
fn field_det(field: &NumberField, m: &[Vec<UPoly>]) -> UPoly {
    let n = m.len();
    if n == 0 {
        return UPoly::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = UPoly::zero();
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UPoly>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != col)
                    .map(|j| m[i][j].clone())
                    .collect()
            })
            .collect();
        let term = field.mul(&m[0][col], &field_det(field, &minor));
        acc = if col % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    field.reduce(&acc)
}

/// Sound complete list of rational roots of an integer polynomial (via
/// integer roots of the monicization, found by isolation).
fn rational_roots(p: &UPoly) -> Vec<Rational> {
    let p = p.canonical_integer();
    let mut out = Vec::new();
    let Some(n) = p.degree() else { return out };
    if n == 0 {
        return out;
    }
    let lead = p.leading();
    let mut coeffs = vec![Rational::zero(); n + 1];
    let mut scale = Rational::one();
    for i in (0..=n).rev() {
        coeffs[i] = p.coeff(i) * &scale;
        scale *= &lead;
    }
    let monic = UPoly::from_coeffs(coeffs);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for iv in isolate_real_roots(&monic) {
        let r = refine_interval(&monic, &iv, &half);
        let cand = if r.is_exact() { r.lo.clone() } else { r.lo.ceil() };
        if monic.eval(&cand).is_zero() {
            out.push(cand / &lead);
        }
    }
    out
}

/// Width target for isolating intervals before a certificate is emitted.
fn certificate_width() -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << 64)
}

struct EliminationStage {
    var: usize,
    polys: Vec<MPoly>, // the polynomials available when `var` was eliminated
}

/// Search for a line η on which the intermediate quadratic forms vanish with
/// transversal intersection and a nonzero final form.
///
/// The first residual parameter is dehomogenized to 1 (moving on to the next
/// one when no verifying root exists); the remaining unknowns are eliminated
/// through successive resultants — variables occurring only linearly first,
/// then declared order — down to a single coordinate, whose real roots are
/// isolated and back-substituted. `alpha_scale` only changes the printed
/// generator: α = scale·(base coordinate).
pub fn solve_line(
    problem: &HigherOrderProblem,
    alpha_scale: &Rational,
) -> Result<LineCertificate, CyclicityError> {
    let nres = problem.residual_names.len();
    let l = problem.h.len();
    if l == 0 || nres != l {
        return Err(CyclicityError::Usage(format!(
            "need (residual count) = (vanishing conditions) + 1: got {nres} residuals, {} conditions",
            l.saturating_sub(1)
        )));
    }
    let mut last_diag: Option<CyclicityError> = None;
    for pivot_var in 0..nres {
        match solve_line_with_pivot(problem, pivot_var, alpha_scale) {
            Ok(cert) => return Ok(cert),
            Err(CyclicityError::NotFound) => {}
            Err(diag @ (CyclicityError::Degenerate(_) | CyclicityError::Unsupported(_))) => {
                last_diag = Some(diag);
            }
            Err(other) => return Err(other),
        }
    }
    Err(last_diag.unwrap_or(CyclicityError::NotFound))
}

fn solve_line_with_pivot(
    problem: &HigherOrderProblem,
    pivot_var: usize,
    alpha_scale: &Rational,
) -> Result<LineCertificate, CyclicityError> {
    let nres = problem.residual_names.len();
    let l = problem.h.len();
    let one = Rational::one();
    let conditions: Vec<MPoly> = problem.h[..l - 1]
        .iter()
        .map(|h| h.eval_var(pivot_var, &one))
        .collect();
    if conditions.iter().any(|c| c.is_zero()) {
        return Err(CyclicityError::Degenerate(format!(
            "condition identically zero after setting {} = 1",
            problem.residual_names[pivot_var]
        )));
    }
    let unknowns: Vec<usize> = (0..nres).filter(|&v| v != pivot_var).collect();

    // base coordinate: last-declared unknown occurring nonlinearly; the
    // variables occurring only linearly are eliminated first
    let occurs_nonlinearly = |v: usize| {
        conditions
            .iter()
            .any(|c| c.degree_in(v).unwrap_or(0) >= 2)
    };
    let base = unknowns
        .iter()
        .rev()
        .copied()
        .find(|&v| occurs_nonlinearly(v))
        .unwrap_or(*unknowns.last().unwrap());
    let mut elim_order: Vec<usize> = Vec::new();
    for &v in &unknowns {
        if v != base && !occurs_nonlinearly(v) {
            elim_order.push(v);
        }
    }
    for &v in &unknowns {
        if v != base && occurs_nonlinearly(v) {
            elim_order.push(v);
        }
    }

    // forward elimination
    let mut polys = conditions.clone();
    let mut stages: Vec<EliminationStage> = Vec::new();
    for &v in &elim_order {
        stages.push(EliminationStage {
            var: v,
            polys: polys.clone(),
        });
        let mut with_v: Vec<&MPoly> = Vec::new();
        let mut without_v: Vec<MPoly> = Vec::new();
        for p in &polys {
            if p.degree_in(v).unwrap_or(0) >= 1 {
                with_v.push(p);
            } else if !p.is_zero() {
                without_v.push(p.clone());
            }
        }
        if with_v.is_empty() {
            // the variable is unconstrained here; back-substitution pins it
            // to 0 (any value on the line family would do)
            stages.last_mut().unwrap().polys.clear();
            continue;
        }
        // eliminator: minimal positive degree in v, earliest on ties
        let f0 = *with_v
            .iter()
            .min_by_key(|p| p.degree_in(v).unwrap())
            .unwrap();
        let mut next = without_v;
        for p in &with_v {
            if std::ptr::eq(*p, f0) {
                continue;
            }
            let res = resultant_in(f0, p, v).expect("degrees checked above");
            if res.is_zero() {
                return Err(CyclicityError::Degenerate(format!(
                    "resultant in {} vanished identically",
                    problem.residual_names[v]
                )));
            }
            next.push(res);
        }
        if next.is_empty() {
            return Err(CyclicityError::Degenerate(format!(
                "system exhausted while eliminating {}",
                problem.residual_names[v]
            )));
        }
        polys = next;
    }

    // final univariate polynomials in `base`
    let mut finals: Vec<UPoly> = Vec::new();
    for p in &polys {
        match p.to_upoly(base) {
            Some(u) if !u.is_zero() => finals.push(u),
            Some(_) => {}
            None => {
                return Err(CyclicityError::Degenerate(
                    "elimination left a polynomial in more than one variable".into(),
                ))
            }
        }
    }
    if finals.is_empty() {
        return Err(CyclicityError::NotFound);
    }
    let mut container = finals[0].clone();
    for f in &finals[1..] {
        container = container.gcd(f);
    }
    if container.degree().unwrap_or(0) == 0 {
        return Err(CyclicityError::NotFound);
    }
    let mut container = container.squarefree_part().canonical_integer();
    // deflate certified rational roots so the remaining factor can be
    // certified irreducible more often
    let rat_roots = rational_roots(&container);
    for r in &rat_roots {
        let lin = UPoly::from_coeffs(vec![-r.clone(), Rational::one()]);
        let (q, rem) = container.div_rem(&lin);
        debug_assert!(rem.is_zero());
        container = q.canonical_integer();
    }

    // candidate roots, ordered by interval left endpoint; rational roots are
    // exact points
    let mut candidates: Vec<AlgebraicNumber> = Vec::new();
    for r in rat_roots {
        candidates.push(AlgebraicNumber::from_rational(r));
    }
    if container.degree().unwrap_or(0) >= 1 {
        let certified = crate::numfield::certify_irreducible(&container);
        for iv in isolate_real_roots(&container) {
            let iv = refine_interval(&container, &iv, &certificate_width());
            if let Ok(a) = AlgebraicNumber::new(container.clone(), iv) {
                let _ = certified;
                candidates.push(a);
            }
        }
    }
    candidates.sort_by(|a, b| a.interval().lo.cmp(&b.interval().lo));

    let mut last_diag: Option<CyclicityError> = None;
    for alpha0 in candidates {
        match try_candidate(problem, pivot_var, base, &stages, &alpha0, alpha_scale) {
            Ok(cert) => return Ok(cert),
            Err(CyclicityError::NotFound) => continue,
            Err(diag) => last_diag = Some(diag),
        }
    }
    Err(last_diag.unwrap_or(CyclicityError::NotFound))
}

/// Back-substitute the remaining coordinates for one root candidate and
/// verify every certificate invariant in ℚ(α).
fn try_candidate(
    problem: &HigherOrderProblem,
    pivot_var: usize,
    base: usize,
    stages: &[EliminationStage],
    alpha0: &AlgebraicNumber,
    alpha_scale: &Rational,
) -> Result<LineCertificate, CyclicityError> {
    let nres = problem.residual_names.len();
    let field = NumberField::new(alpha0.clone());
    let mut point: Vec<Option<UPoly>> = vec![None; nres];
    point[pivot_var] = Some(UPoly::one());
    point[base] = Some(field.generator());

    for stage in stages.iter().rev() {
        let v = stage.var;
        if stage.polys.is_empty() {
            // unconstrained coordinate, pinned to 0
            point[v] = Some(UPoly::zero());
            continue;
        }
        // evaluate each available polynomial as a univariate in v over the
        // field; all other variables in it are already known
        let mut uni: Vec<Vec<UPoly>> = Vec::new(); // coefficient lists in v
        for p in &stage.polys {
            let coeffs = p.as_univariate_in(v);
            let mut evaluated: Vec<UPoly> = Vec::with_capacity(coeffs.len());
            for c in &coeffs {
                let val = eval_known(&field, c, &point).ok_or_else(|| {
                    CyclicityError::Degenerate(
                        "back-substitution hit an unknown coordinate".into(),
                    )
                })?;
                evaluated.push(val);
            }
            while evaluated.last().is_some_and(|c| field.vanishes(c)) {
                evaluated.pop();
            }
            if !evaluated.is_empty() {
                uni.push(evaluated);
            }
        }
        // gcd over the field of the nonconstant ones
        let mut g: Option<Vec<UPoly>> = None;
        for u in uni {
            if u.len() <= 1 {
                if u.len() == 1 {
                    // nonzero constant: inconsistent -> spurious root
                    return Err(CyclicityError::NotFound);
                }
                continue;
            }
            g = Some(match g {
                None => u,
                Some(prev) => field_poly_gcd(&field, prev, u)?,
            });
        }
        let Some(g) = g else {
            return Err(CyclicityError::NotFound);
        };
        // a repeated root is still a unique value: strip multiplicities
        let g = field_poly_squarefree(&field, g)?;
        match g.len() {
            0 | 1 => return Err(CyclicityError::NotFound),
            2 => {
                // linear: v = -c0/c1
                let inv = field
                    .try_inv(&g[1])
                    .map_err(|_| CyclicityError::NotFound)?;
                let val = field.mul(&g[0].neg(), &inv);
                point[v] = Some(val);
            }
            _ => {
                return Err(CyclicityError::Unsupported(format!(
                    "coordinate {} satisfies an equation of degree {} over ℚ(α)",
                    problem.residual_names[v],
                    g.len() - 1
                )))
            }
        }
    }

    let eta: Vec<UPoly> = point
        .into_iter()
        .map(|p| p.expect("all coordinates assigned"))
        .collect();

    // verify h_i(η) = 0 for the vanishing indices and h_last(η) != 0
    let l = problem.h.len();
    for h in &problem.h[..l - 1] {
        let v = eval_in_field(&field, h, &eta);
        if !field.vanishes(&v) {
            return Err(CyclicityError::NotFound);
        }
    }
    let target_value = eval_in_field(&field, &problem.h[l - 1], &eta);
    if field.vanishes(&target_value) {
        return Err(CyclicityError::NotFound);
    }

    // transversality: Jacobian of the vanishing forms with respect to the
    // non-pivot residuals, evaluated at η
    let jac_vars: Vec<usize> = (0..nres).filter(|&v| v != pivot_var).collect();
    let jac: Vec<Vec<UPoly>> = problem.h[..l - 1]
        .iter()
        .map(|h| {
            jac_vars
                .iter()
                .map(|&v| eval_in_field(&field, &h.derivative_in(v), &eta))
                .collect()
        })
        .collect();
    let determinant = field_det(&field, &jac);
    if field.vanishes(&determinant) {
        return Err(CyclicityError::NotFound);
    }

    // presentation: α = scale · (base coordinate)
    let (alpha, eta, determinant, target_value) = if alpha_scale.is_one() {
        (alpha0.clone(), eta, determinant, target_value)
    } else {
        let alpha = alpha0.scaled(alpha_scale);
        let newfield = NumberField::new(alpha.clone());
        // t -> x / scale
        let sub = UPoly::from_coeffs(vec![Rational::zero(), Rational::one() / alpha_scale]);
        let convert = |e: &UPoly| newfield.reduce(&e.compose(&sub));
        (
            alpha.clone(),
            eta.iter().map(&convert).collect(),
            convert(&determinant),
            convert(&target_value),
        )
    };

    let certified = alpha.irreducibility_certified();
    Ok(LineCertificate {
        alpha,
        alpha_certified_minimal: certified,
        eta: problem
            .residual_names
            .iter()
            .cloned()
            .zip(eta)
            .collect(),
        pivot: problem.residual_names[pivot_var].clone(),
        vanishing_indices: problem.vanishing_indices(),
        target_index: problem.target_index(),
        determinant,
        target_value,
        k: problem.k,
    })
}

fn eval_known(field: &NumberField, p: &MPoly, point: &[Option<UPoly>]) -> Option<UPoly> {
    let mut acc = UPoly::zero();
    for (e, c) in p.terms() {
        let mut t = UPoly::constant(c.clone());
        for (v, &pow) in e.iter().enumerate() {
            if pow == 0 {
                continue;
            }
            let val = point[v].as_ref()?;
            for _ in 0..pow {
                t = field.mul(&t, val);
            }
        }
        acc = acc.add(&t);
    }
    Some(field.reduce(&acc))
}

/// Square-free part of a polynomial with ℚ(α) coefficients: divide out
/// `gcd(g, g')`.
fn field_poly_squarefree(
    field: &NumberField,
    g: Vec<UPoly>,
) -> Result<Vec<UPoly>, CyclicityError> {
    if g.len() <= 2 {
        return Ok(g);
    }
    let deriv: Vec<UPoly> = g
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&Rational::from_integer(BigInt::from(i))))
        .collect();
    let d = field_poly_gcd(field, g.clone(), deriv)?;
    if d.len() <= 1 {
        return Ok(g);
    }
    // exact division g / d over the field
    let mut rem = g;
    let mut quot = vec![UPoly::zero(); rem.len() - d.len() + 1];
    let lead_inv = field
        .try_inv(&d[d.len() - 1])
        .map_err(|_| CyclicityError::NotFound)?;
    let trim = |v: &mut Vec<UPoly>| {
        while v.last().is_some_and(|c| field.vanishes(c)) {
            v.pop();
        }
    };
    trim(&mut rem);
    while rem.len() >= d.len() && !rem.is_empty() {
        let f = field.mul(&rem[rem.len() - 1], &lead_inv);
        let shift = rem.len() - d.len();
        quot[shift] = f.clone();
        for (i, dc) in d.iter().enumerate() {
            let t = field.mul(&f, dc);
            rem[shift + i] = field.sub(&rem[shift + i], &t);
        }
        trim(&mut rem);
    }
    let mut quot = quot;
    trim(&mut quot);
    Ok(quot)
}

/// Monic gcd of two polynomials with ℚ(α) coefficients (coefficient lists
/// ascending). Inversion failures surface as `NotFound` (reducible modulus
/// with the candidate landing on a zero divisor — the candidate is simply
/// rejected).
fn field_poly_gcd(
    field: &NumberField,
    a: Vec<UPoly>,
    b: Vec<UPoly>,
) -> Result<Vec<UPoly>, CyclicityError> {
    let trim = |mut v: Vec<UPoly>| -> Vec<UPoly> {
        while v.last().is_some_and(|c| field.vanishes(c)) {
            v.pop();
        }
        v
    };
    let mut a = trim(a);
    let mut b = trim(b);
    while !b.is_empty() {
        // a mod b
        let lead_inv = field
            .try_inv(&b[b.len() - 1])
            .map_err(|_| CyclicityError::NotFound)?;
        while a.len() >= b.len() && !a.is_empty() {
            let f = field.mul(&a[a.len() - 1], &lead_inv);
            let shift = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                let t = field.mul(&f, bc);
                a[shift + i] = field.sub(&a[shift + i], &t);
            }
            a = trim(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    // normalize monic
    if let Some(lead) = a.last().cloned() {
        if let Ok(inv) = field.try_inv(&lead) {
            for c in a.iter_mut() {
                *c = field.mul(c, &inv);
            }
        }
    }
    Ok(a)
}

/// Report of an exact re-verification of a line certificate.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub ok: bool,
    pub vanishing_ok: Vec<(usize, bool)>,
    pub determinant_nonzero: bool,
    pub target_nonzero: bool,
    pub pivot_is_one: bool,
    pub notes: Vec<String>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verified: {}", self.ok)?;
        for (i, ok) in &self.vanishing_ok {
            writeln!(f, "h_{i}(eta) = 0: {ok}")?;
        }
        writeln!(f, "transversality determinant nonzero: {}", self.determinant_nonzero)?;
        writeln!(f, "target value nonzero: {}", self.target_nonzero)?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Exact re-verification of a certificate against the reduced problem: the
/// defining polynomial is revalidated (square-free, isolating interval) and
/// every invariant is recomputed in ℚ(α).
pub fn verify_line(problem: &HigherOrderProblem, cert: &LineCertificate) -> VerifyReport {
    let mut notes = Vec::new();
    // revalidate the algebraic number (square-free modulus + isolation)
    let alpha = match AlgebraicNumber::new(cert.alpha.minpoly().clone(), cert.alpha.interval().clone())
    {
        Ok(a) => a,
        Err(e) => {
            return VerifyReport {
                ok: false,
                vanishing_ok: Vec::new(),
                determinant_nonzero: false,
                target_nonzero: false,
                pivot_is_one: false,
                notes: vec![format!("invalid algebraic number: {e}")],
            }
        }
    };
    if !cert.alpha_certified_minimal {
        notes.push("defining polynomial not certified irreducible; zero tests use gcd + isolation".into());
    }
    let field = NumberField::new(alpha);
    let point: Vec<UPoly> = cert.eta.iter().map(|(_, e)| field.reduce(e)).collect();
    let pivot_idx = problem
        .residual_names
        .iter()
        .position(|n| *n == cert.pivot);
    let pivot_is_one = match pivot_idx {
        Some(i) => field.vanishes(&point[i].sub(&UPoly::one())),
        None => false,
    };
    let l = problem.h.len();
    let mut vanishing_ok = Vec::new();
    for (offset, h) in problem.h[..l - 1].iter().enumerate() {
        let idx = problem.k + 1 + offset;
        let v = eval_in_field(&field, h, &point);
        vanishing_ok.push((idx, field.vanishes(&v)));
    }
    let target = eval_in_field(&field, &problem.h[l - 1], &point);
    let target_nonzero = !field.vanishes(&target);
    let nres = problem.residual_names.len();
    let jac_vars: Vec<usize> = (0..nres)
        .filter(|&v| Some(v) != pivot_idx)
        .collect();
    let jac: Vec<Vec<UPoly>> = problem.h[..l - 1]
        .iter()
        .map(|h| {
            jac_vars
                .iter()
                .map(|&v| eval_in_field(&field, &h.derivative_in(v), &point))
                .collect()
        })
        .collect();
    let determinant = field_det(&field, &jac);
    let determinant_nonzero = !field.vanishes(&determinant);
    let ok = pivot_is_one
        && vanishing_ok.iter().all(|(_, b)| *b)
        && determinant_nonzero
        && target_nonzero;
    VerifyReport {
        ok,
        vanishing_ok,
        determinant_nonzero,
        target_nonzero,
        pivot_is_one,
        notes,
    }
}

// ---------------------------------------------------------------------------
// certificate rendering and parsing
// ---------------------------------------------------------------------------

impl LineCertificate {
    /// Machine-readable rendering (same grammar as system files, with
    /// polynomials in the single name `alpha`).
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("k = {}\n", self.k));
        out.push_str(&format!("extra = {}\n", self.target_index - self.k));
        out.push_str(&format!(
            "residuals = {}\n",
            self.eta
                .iter()
                .map(|(n, _)| n.clone())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!("pivot = {}\n", self.pivot));
        out.push_str(&format!(
            "vanishing = {}\n",
            self.vanishing_indices
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!("target = {}\n", self.target_index));
        out.push_str(&format!(
            "alpha_minpoly = {}\n",
            self.alpha.minpoly().format_with_var("alpha")
        ));
        out.push_str(&format!("alpha_lo = {}\n", self.alpha.interval().lo));
        out.push_str(&format!("alpha_hi = {}\n", self.alpha.interval().hi));
        out.push_str(&format!(
            "alpha_certified_minimal = {}\n",
            self.alpha_certified_minimal
        ));
        for (name, e) in &self.eta {
            out.push_str(&format!("eta_{name} = {}\n", e.format_with_var("alpha")));
        }
        out.push_str(&format!(
            "det = {}\n",
            self.determinant.format_with_var("alpha")
        ));
        out.push_str(&format!(
            "h_target = {}\n",
            self.target_value.format_with_var("alpha")
        ));
        out
    }

    /// Human-oriented report.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "line certificate: {} + {} = {} limit cycles\n",
            self.k,
            self.target_index - self.k,
            self.total_cycles()
        ));
        out.push_str(&format!(
            "alpha: real root of {} in ({}, {})\n",
            self.alpha.minpoly().format_with_var("x"),
            self.alpha.interval().lo,
            self.alpha.interval().hi
        ));
        out.push_str(&format!("alpha ~ {:.12}\n", self.alpha.approx_f64()));
        out.push_str(&format!(
            "minimal polynomial certified irreducible: {}\n",
            self.alpha_certified_minimal
        ));
        out.push_str(&format!("dehomogenized: {} = 1\n", self.pivot));
        for (name, e) in &self.eta {
            out.push_str(&format!("  {name} = {}\n", e.format_with_var("alpha")));
        }
        out.push_str(&format!(
            "vanishing: {}\n",
            self.vanishing_indices
                .iter()
                .map(|i| format!("L{i}^2"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!(
            "transversality determinant = {}  (nonzero)\n",
            self.determinant.format_with_var("alpha")
        ));
        out.push_str(&format!(
            "L{}^2(eta) = {}  (nonzero)\n",
            self.target_index,
            self.target_value.format_with_var("alpha")
        ));
        out
    }

    /// Parse the machine rendering back.
    pub fn from_machine(text: &str) -> Result<LineCertificate, String> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut eta_order: Vec<String> = Vec::new();
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("expected key = value: `{line}`"))?;
            let key = k.trim().to_string();
            if let Some(name) = key.strip_prefix("eta_") {
                eta_order.push(name.to_string());
            }
            map.insert(key, v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String, String> {
            map.get(k).ok_or_else(|| format!("missing `{k}`"))
        };
        let parse_upoly = |s: &str| -> Result<UPoly, String> {
            crate::system::parse_polynomial_in(&["alpha"], s)
                .map_err(|e| e.to_string())?
                .to_upoly(0)
                .ok_or_else(|| "not univariate in alpha".to_string())
        };
        let minpoly = parse_upoly(get("alpha_minpoly")?)?;
        let lo = crate::rational::parse_rational(get("alpha_lo")?)
            .ok_or("invalid alpha_lo")?;
        let hi = crate::rational::parse_rational(get("alpha_hi")?)
            .ok_or("invalid alpha_hi")?;
        let alpha = AlgebraicNumber::new(
            minpoly,
            crate::univar::RootInterval { lo, hi },
        )
        .map_err(|e| e.to_string())?;
        let parse_list_usize = |s: &str| -> Result<Vec<usize>, String> {
            s.split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
                .collect()
        };
        let mut eta = Vec::new();
        for name in &eta_order {
            eta.push((name.clone(), parse_upoly(&map[&format!("eta_{name}")])?));
        }
        Ok(LineCertificate {
            alpha,
            alpha_certified_minimal: get("alpha_certified_minimal")? == "true",
            eta,
            pivot: get("pivot")?.clone(),
            vanishing_indices: parse_list_usize(get("vanishing")?)?,
            target_index: get("target")?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            determinant: parse_upoly(get("det")?)?,
            target_value: parse_upoly(get("h_target")?)?,
            k: get("k")?.parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn mv(i: usize, n: usize) -> MPoly {
        MPoly::var(i, n)
    }

    /// A hand-built quadratic problem with a known verifying line:
    /// residuals (r0, r1, r2), conditions h1 = r0^2 - r1^2 = 0 and
    /// h2 = r1^2 - r2^2 - r0 r1 + r1 r2... keep it simple instead:
    /// h1 = r1^2 - 2 r0^2, h2 = r2 - ... must stay quadratic forms.
    fn simple_problem() -> HigherOrderProblem {
        // conditions: h1 = r1² - 2 r0², h2 = r2 r0 - r1², target h3 = r2² + r0².
        // with r0 = 1: r1 = ±√2, r2 = r1² = 2.
        let n = 3;
        let h1 = mv(1, n).pow(2).sub(&mv(0, n).pow(2).scale(&rat_int(2)));
        let h2 = mv(2, n).mul(&mv(0, n)).sub(&mv(1, n).pow(2));
        let h3 = mv(2, n).pow(2).add(&mv(0, n).pow(2));
        HigherOrderProblem {
            k: 5,
            residual_names: vec!["r0".into(), "r1".into(), "r2".into()],
            residual_positions: vec![0, 1, 2],
            h: vec![h1, h2, h3],
            pivot_solutions: vec![],
        }
    }

    #[test]
    fn solve_line_finds_sqrt2_line() {
        let p = simple_problem();
        let cert = solve_line(&p, &Rational::one()).unwrap();
        assert_eq!(cert.k, 5);
        assert_eq!(cert.target_index, 8);
        assert_eq!(cert.vanishing_indices, vec![6, 7]);
        // alpha = r1 = ±√2 (minpoly x^2 - 2), leftmost root first: -√2
        assert_eq!(cert.alpha.minpoly(), &UPoly::from_i64(&[-2, 0, 1]));
        assert!(cert.alpha_certified_minimal);
        assert!(cert.alpha.approx_f64() < 0.0);
        // r2 = 2 exactly
        let r2 = &cert.eta[2].1;
        assert_eq!(r2, &UPoly::from_i64(&[2]));
        let report = verify_line(&p, &cert);
        assert!(report.ok, "{report}");
    }

    #[test]
    fn verify_rejects_tampered_line() {
        let p = simple_problem();
        let cert = solve_line(&p, &Rational::one()).unwrap();
        let mut bad = cert.clone();
        bad.eta[2].1 = bad.eta[2].1.add(&UPoly::from_coeffs(vec![rat(1, 1000)]));
        let report = verify_line(&p, &bad);
        assert!(!report.ok);
        // eta = 0 is rejected as well (pivot must be 1)
        let mut zero = cert.clone();
        for (_, e) in zero.eta.iter_mut() {
            *e = UPoly::zero();
        }
        assert!(!verify_line(&p, &zero).ok);
    }

    #[test]
    fn no_real_line_reports_not_found() {
        // positive definite conditions: only the trivial real zero, no line
        let n = 2;
        let h1 = mv(0, n).pow(2).add(&mv(1, n).pow(2));
        let h2 = mv(0, n).pow(2).sub(&mv(0, n).mul(&mv(1, n)));
        let p = HigherOrderProblem {
            k: 3,
            residual_names: vec!["r0".into(), "r1".into()],
            residual_positions: vec![0, 1],
            h: vec![h1, h2],
            pivot_solutions: vec![],
        };
        // sampling oracle: h1 > 0 on a grid of nonzero directions
        for i in -6i64..=6 {
            for j in -6i64..=6 {
                if i == 0 && j == 0 {
                    continue;
                }
                let v = p.h[0].eval(&[rat_int(i), rat_int(j)]);
                assert!(v > Rational::zero());
            }
        }
        match solve_line(&p, &Rational::one()) {
            Err(CyclicityError::NotFound) => {}
            other => panic!("expected NotFound, got {other:?}"),
        }
    }

    #[test]
    fn coordinate_line_found_after_pivot_retry() {
        // h_i = r_i·r_3 for i = 0..2 in 4 unknowns, target r_3²: the only
        // verifying line is the coordinate axis η = (0,0,0,1), where the
        // Jacobian with respect to (r0,r1,r2) is the identity. The first
        // three pivots force a coordinate to 1 and fail, so the solver must
        // retry down to r3.
        let n = 4;
        let h: Vec<MPoly> = (0..3).map(|i| mv(i, n).mul(&mv(3, n))).collect();
        let target = mv(3, n).pow(2);
        let mut hs = h;
        hs.push(target);
        let p = HigherOrderProblem {
            k: 9,
            residual_names: vec!["r0".into(), "r1".into(), "r2".into(), "r3".into()],
            residual_positions: vec![0, 1, 2, 3],
            h: hs,
            pivot_solutions: vec![],
        };
        let cert = solve_line(&p, &Rational::one()).unwrap();
        assert_eq!(cert.pivot, "r3");
        // eta = (0,0,0,1)
        for (name, e) in &cert.eta {
            if name == "r3" {
                assert_eq!(e, &UPoly::one());
            } else {
                assert!(e.is_zero());
            }
        }
        assert!(verify_line(&p, &cert).ok);
        assert_eq!(cert.total_cycles(), 13);
    }

    #[test]
    fn machine_roundtrip() {
        let p = simple_problem();
        let cert = solve_line(&p, &rat_int(3)).unwrap();
        // presentation scale: alpha = 3·r1, minpoly x^2 - 18
        assert_eq!(cert.alpha.minpoly(), &UPoly::from_i64(&[-18, 0, 1]));
        let text = cert.to_machine();
        let back = LineCertificate::from_machine(&text).unwrap();
        assert_eq!(back.alpha.minpoly(), cert.alpha.minpoly());
        assert_eq!(back.eta, cert.eta);
        assert_eq!(back.determinant, cert.determinant);
        assert_eq!(back.target_value, cert.target_value);
        assert!(verify_line(&p, &back).ok);
    }

    #[test]
    fn scaling_eta_preserves_signs() {
        // determinant and target scale by even powers under positive
        // rescaling of η; verify on the simple problem by direct evaluation
        let p = simple_problem();
        let cert = solve_line(&p, &Rational::one()).unwrap();
        let field = NumberField::new(cert.alpha.clone());
        let eta: Vec<UPoly> = cert.eta.iter().map(|(_, e)| e.clone()).collect();
        let scaled: Vec<UPoly> = eta.iter().map(|e| e.scale(&rat_int(4))).collect();
        let t1 = eval_in_field(&field, &p.h[2], &eta);
        let t4 = eval_in_field(&field, &p.h[2], &scaled);
        // homogeneous degree 2: factor 16
        assert!(field.vanishes(&t4.sub(&t1.scale(&rat_int(16)))));
        assert_eq!(field.sign_at_alpha(&t1), field.sign_at_alpha(&t4));
    }
}
