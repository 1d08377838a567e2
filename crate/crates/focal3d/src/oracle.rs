//! Floating-point cross-check of the symbolic pipeline.
//!
//! In the coordinates `x = ρcosθ, y = ρsinθ, z = ρω` the perturbed system
//! becomes a θ-parameterized planar system for `(ρ, ω)`; integrating it from
//! θ = 0 to 2π gives the return map with no event detection. The second
//! return component has a unique section `ω̃(ρ₀)` with `d₂(ρ₀, ω̃) = 0`,
//! found by Newton from the center-manifold-jet initial guess; the reduced
//! displacement `𝐝(ρ₀) = d₁(ρ₀, ω̃)` then satisfies
//! `𝐝(ρ₀) = π L_k ρ₀^{2k+1} + O(ρ₀^{2k+2})` with `L_k` the first nonzero
//! focal coefficient in the radial convention.
//!
//! The oracle is advisory: it never participates in a certificate.

use crate::manifold::center_manifold_jet;
use crate::poly3::Poly3;
use crate::rational::to_f64;
use crate::system::{Perturbation, SystemSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("orbit escaped the polar chart (1 + phi reached {0})")]
    OrbitEscape(f64),
    #[error("step budget exceeded after {steps} steps at theta = {theta}")]
    AccuracyBudget { steps: usize, theta: f64 },
    #[error("Newton failed to locate the section point in {0} iterations")]
    NoSectionPoint(usize),
}

/// One sample of the reduced displacement map.
#[derive(Clone, Debug)]
pub struct DisplacementSample {
    pub rho0: f64,
    pub omega_tilde: f64,
    pub d: f64,
    pub steps: usize,
    pub tol: f64,
}

/// Float-evaluable right-hand side of the θ-parameterized system.
pub struct PolarField {
    lambda: f64,
    /// Trace perturbation coefficient λ₀ (0 disables it).
    pub trace: f64,
    p: Vec<(i32, i32, i32, f64)>,
    q: Vec<(i32, i32, i32, f64)>,
    r: Vec<(i32, i32, i32, f64)>,
}

fn flatten(poly: &Poly3, params: &[f64], out: &mut Vec<(i32, i32, i32, f64)>) {
    for (m, c) in poly.terms() {
        let v = c.eval_f64(params);
        if v != 0.0 {
            out.push((m.0 as i32, m.1 as i32, m.2 as i32, v));
        }
    }
}

impl PolarField {
    /// Bake the system plus a perturbation at concrete parameter values
    /// into float monomial tables.
    pub fn new(spec: &SystemSpec, pert: &Perturbation, values: &[f64]) -> Self {
        assert_eq!(values.len(), pert.params.len());
        let mut p = Vec::new();
        let mut q = Vec::new();
        let mut r = Vec::new();
        flatten(&spec.p, &[], &mut p);
        flatten(&spec.q, &[], &mut q);
        flatten(&spec.r, &[], &mut r);
        flatten(&pert.g[0], values, &mut p);
        flatten(&pert.g[1], values, &mut q);
        flatten(&pert.g[2], values, &mut r);
        PolarField {
            lambda: to_f64(&spec.lambda),
            trace: 0.0,
            p,
            q,
            r,
        }
    }

    pub fn with_trace(mut self, lambda0: f64) -> Self {
        self.trace = lambda0;
        self
    }

    fn eval_table(t: &[(i32, i32, i32, f64)], x: f64, y: f64, z: f64) -> f64 {
        let mut acc = 0.0;
        for &(j, k, l, c) in t {
            acc += c * x.powi(j) * y.powi(k) * z.powi(l);
        }
        acc
    }

    /// `(dρ/dθ, dω/dθ)`; `Err` when the angular speed denominator crosses 0.
    fn rhs(&self, theta: f64, rho: f64, omega: f64) -> Result<(f64, f64), OracleError> {
        let (s, c) = theta.sin_cos();
        let x = rho * c;
        let y = rho * s;
        let z = rho * omega;
        let pt = Self::eval_table(&self.p, x, y, z);
        let qt = Self::eval_table(&self.q, x, y, z);
        let rt = Self::eval_table(&self.r, x, y, z);
        // psi = rho' along the flow, phi = angular speed defect
        let psi = self.trace * rho + (x * pt + y * qt) / rho;
        let phi = (x * qt - y * pt) / (rho * rho);
        let den = 1.0 + phi;
        if den <= 0.0 {
            return Err(OracleError::OrbitEscape(den));
        }
        let omega_dot = -self.lambda * omega + rt / rho - psi * omega / rho;
        Ok((psi / den, omega_dot / den))
    }
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Integrate from θ = 0 to 2π with adaptive local error control.
/// Returns `(ρ(2π), ω(2π), accepted steps)`.
pub fn return_map(
    field: &PolarField,
    rho0: f64,
    omega0: f64,
    tol: f64,
) -> Result<(f64, f64, usize), OracleError> {
    let end = 2.0 * std::f64::consts::PI;
    let mut theta = 0.0_f64;
    let mut y = [rho0, omega0];
    let mut h = 1e-3_f64;
    let mut steps = 0usize;
    while theta < end {
        if steps > MAX_STEPS {
            return Err(OracleError::AccuracyBudget { steps, theta });
        }
        if theta + h > end {
            h = end - theta;
        }
        let mut k = [[0.0_f64; 2]; 7];
        let mut failed = false;
        for stage in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                ys[0] += h * DP_A[stage][j] * kj[0];
                ys[1] += h * DP_A[stage][j] * kj[1];
            }
            match field.rhs(theta + DP_C[stage] * h, ys[0], ys[1]) {
                Ok((dr, dw)) => {
                    k[stage] = [dr, dw];
                }
                Err(_) if h > 1e-12 => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            steps += 1;
            continue;
        }
        // 5th-order solution is stage row 6 of A (FSAL form)
        let mut y5 = y;
        let mut y4 = y;
        for j in 0..7 {
            let w5 = if j < 6 { DP_A[6][j] } else { 0.0 };
            y5[0] += h * w5 * k[j][0];
            y5[1] += h * w5 * k[j][1];
            y4[0] += h * DP_B4[j] * k[j][0];
            y4[1] += h * DP_B4[j] * k[j][1];
        }
        let sc0 = tol * (1.0 + y[0].abs());
        let sc1 = tol * (1.0 + y[1].abs());
        let err = (((y5[0] - y4[0]) / sc0).powi(2) + ((y5[1] - y4[1]) / sc1).powi(2))
            .sqrt()
            / std::f64::consts::SQRT_2;
        if err <= 1.0 {
            theta += h;
            y = y5;
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        h = h.max(1e-13);
        steps += 1;
    }
    Ok((y[0], y[1], steps))
}

/// Initial guess for the section value from the unperturbed
/// center-manifold jet: ω ≈ h(ρ₀, 0)/ρ₀.
pub fn section_guess(spec: &SystemSpec, rho0: f64) -> f64 {
    let jet = center_manifold_jet(spec, 4);
    let mut acc = 0.0;
    for (m, c) in jet.h.terms() {
        if m.1 == 0 {
            acc += to_f64(&c.constant_term()) * rho0.powi(m.0 as i32);
        }
    }
    acc / rho0
}

/// Newton iteration on `ω₀ ↦ d₂(ρ₀, ω₀)` from the jet initial guess,
/// returning the reduced displacement sample.
pub fn reduced_displacement(
    spec: &SystemSpec,
    field: &PolarField,
    rho0: f64,
    tol: f64,
) -> Result<DisplacementSample, OracleError> {
    let mut omega = section_guess(spec, rho0);
    let mut total_steps = 0usize;
    const NEWTON_MAX: usize = 50;
    for _ in 0..NEWTON_MAX {
        let (r1, w1, s1) = return_map(field, rho0, omega, tol)?;
        total_steps += s1;
        let d2 = w1 - omega;
        if d2.abs() <= tol * 10.0 {
            return Ok(DisplacementSample {
                rho0,
                omega_tilde: omega,
                d: r1 - rho0,
                steps: total_steps,
                tol,
            });
        }
        let dw = 1e-7 * (1.0 + omega.abs());
        let (_, w2, s2) = return_map(field, rho0, omega + dw, tol)?;
        total_steps += s2;
        let slope = ((w2 - (omega + dw)) - d2) / dw;
        if slope == 0.0 {
            break;
        }
        omega -= d2 / slope;
    }
    Err(OracleError::NoSectionPoint(NEWTON_MAX))
}

/// CSV header + rows for displacement samples.
pub fn samples_to_csv(samples: &[DisplacementSample]) -> String {
    let mut out = String::from("rho0,omega_tilde,d,steps,tol\n");
    for s in samples {
        out.push_str(&format!(
            "{:e},{:e},{:e},{},{:e}\n",
            s.rho0, s.omega_tilde, s.d, s.steps, s.tol
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::parse_system;

    fn linear_spec(lambda: i64) -> SystemSpec {
        parse_system(&format!("lambda = {lambda}\n"))
            .unwrap()
            .instantiate(&Default::default())
            .unwrap()
    }

    #[test]
    fn unperturbed_linear_system_has_explicit_solution() {
        // rho stays fixed, omega decays by e^(-2 pi lambda)
        let spec = linear_spec(1);
        let field = PolarField::new(&spec, &Perturbation::empty(), &[]);
        let (r, w, _) = return_map(&field, 0.5, 0.25, 1e-12).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let expect = 0.25 * (-2.0 * std::f64::consts::PI).exp();
        assert!((w - expect).abs() < 1e-12, "{w} vs {expect}");
    }

    #[test]
    fn integrator_tolerance_scaling() {
        let spec = linear_spec(2);
        let field = PolarField::new(&spec, &Perturbation::empty(), &[]);
        let exact = 0.25 * (-4.0 * std::f64::consts::PI).exp();
        let (_, w_lo, s_lo) = return_map(&field, 0.5, 0.25, 1e-8).unwrap();
        let (_, w_hi, s_hi) = return_map(&field, 0.5, 0.25, 1e-12).unwrap();
        assert!((w_hi - exact).abs() <= (w_lo - exact).abs() + 1e-15);
        assert!(s_hi >= s_lo);
    }

    #[test]
    fn center_displacement_vanishes() {
        // the 13-cycle system is a center: d ~ 0 on the section
        let spec = parse_system(
            "lambda = 1\nP = x^2 + 2*x*y + 3*x*z\nQ = x*y + 2*y^2 + 3*y*z\nR = 2/3*x^2 + x*y + 4*x*z - 2/3*y^2 + 3*y*z + 6*z^2\n",
        )
        .unwrap()
        .instantiate(&Default::default())
        .unwrap();
        let field = PolarField::new(&spec, &Perturbation::empty(), &[]);
        for rho0 in [1e-3, 1e-2] {
            let s = reduced_displacement(&spec, &field, rho0, 1e-12).unwrap();
            assert!(s.d.abs() <= 1e-9, "rho0 = {rho0}: d = {}", s.d);
        }
    }

    #[test]
    fn trace_perturbation_brackets_a_cycle() {
        // a perturbation with L1 > 0 plus a small negative trace: the
        // displacement changes sign on [1e-4, 1e-1], an empirical limit
        // cycle bracket
        let file = parse_system(
            "lambda = 1\nP = x^2 + 2*x*y + 3*x*z\nQ = x*y + 2*y^2 + 3*y*z\nR = 2/3*x^2 + x*y + 4*x*z - 2/3*y^2 + 3*y*z + 6*z^2\nparams = a020\nG1 = a020*y^2\n",
        )
        .unwrap();
        let spec = file.instantiate(&Default::default()).unwrap();
        // radial-mode dL1/da020 = 3/2 > 0, so a020 = 1/2 gives L1 ~ 3/4 > 0
        let field = PolarField::new(&spec, &file.pert, &[0.5]).with_trace(-1e-4);
        let lo = reduced_displacement(&spec, &field, 1e-4, 1e-12).unwrap();
        let hi = reduced_displacement(&spec, &field, 1e-1, 1e-12).unwrap();
        assert!(
            lo.d < 0.0 && hi.d > 0.0,
            "expected sign change: d(1e-4) = {}, d(1e-1) = {}",
            lo.d,
            hi.d
        );
    }

    #[test]
    fn csv_rendering() {
        let s = DisplacementSample {
            rho0: 1e-3,
            omega_tilde: 2.5e-4,
            d: -3.1e-9,
            steps: 420,
            tol: 1e-12,
        };
        let csv = samples_to_csv(&[s]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("rho0,omega_tilde,d,steps,tol"));
        assert!(lines.next().unwrap().starts_with("1e-3,"));
    }
}
