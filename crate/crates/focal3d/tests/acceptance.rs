//! Acceptance suite: each test prints one PASS line when its criterion
//! holds, and fails loudly otherwise.
//!
//! Criteria (at exact arithmetic unless stated):
//!  1. printed-coefficient regression for the 13-cycle quadratic example
//!  2. rank reproduction for every catalog center at recorded seeds
//!  3. the 13-cycle line certificate (degree-3 α, b200 = α/3, nonzero
//!     transversality determinant and final value)
//!  4. all focal coefficients vanish on every instantiated catalog center
//!  5. the focal identity XH = Σ L_{k-1}·B_k holds through degree 2K+2
//!  6. displacement-map oracle agreement (see oracle_agreement.rs)
//!  7. rigidity classification across the catalog

use focal3d::catalog::{instantiate_sampled, Catalog};
use focal3d::cyclicity::{
    rank_certificate, reduce_to_quadratic_problem, solve_line, verify_line,
};
use focal3d::focal::{
    focal_coefficients, verify_focal_identity, FocalMode, FocalOptions,
};
use focal3d::manifold::is_rigid_cylindrical;
use focal3d::rational::{rat, rat_int, Rational};
use focal3d::univar::UPoly;
use num_traits::Zero;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn catalog_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../catalog")
}

fn load_catalog() -> Catalog {
    Catalog::load_dir(&catalog_dir()).expect("catalog loads")
}

/// Recorded seeds for the generic samples of criterion 2 and 4; entries not
/// listed use seed 1.
fn recorded_seed(id: &str) -> u64 {
    match id {
        _ => 1,
    }
}

#[test]
fn criterion1_printed_coefficient_regression() {
    let t0 = Instant::now();
    let cat = load_catalog();
    let file = cat.find("quad13").unwrap();
    let spec = file.instantiate(&Default::default()).unwrap();
    let opts = FocalOptions::new(3, 1);
    let (seq, _) = focal_coefficients(&spec, &file.pert, &opts).unwrap();
    let pos = |n: &str| file.pert.position(n).unwrap();

    let l1 = [
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
    let l2 = [
        ("b200", rat(3713, 25)),
        ("c002", rat(4, 3)),
        ("a002", rat(-2, 9)),
        ("a011", rat(-39937, 1125)),
        ("a020", rat(-7297, 25)),
        ("a101", rat(6409, 1125)),
        ("a110", rat(-3389, 75)),
        ("a200", rat(-1463, 15)),
        ("b011", rat(-9409, 1125)),
        ("b020", rat(3839, 75)),
        ("b101", rat(-37687, 1125)),
        ("b110", rat(1433, 15)),
        ("b002", rat_int(0)),
    ];
    let l3 = [
        ("a002", rat(44084, 1785)),
        ("a011", rat(28460414, 7875)),
        ("a020", rat(442099341, 14875)),
        ("a101", rat(-76527541, 133875)),
        ("c002", rat(-5168, 35)),
        ("a110", rat(203415874, 44625)),
        ("a200", rat(444002837, 44625)),
        ("b002", rat(5707, 1785)),
        ("b011", rat(116062741, 133875)),
        ("b020", rat(-233857774, 44625)),
        ("b101", rat(26669714, 7875)),
        ("b110", rat(-433328537, 44625)),
        ("b200", rat(-225465802, 14875)),
    ];
    for (k, table) in [(0usize, &l1[..]), (1, &l2[..]), (2, &l3[..])] {
        for (name, want) in table {
            let got = seq.l[k].linear_coeff(pos(name));
            assert_eq!(
                &got,
                want,
                "L{}^1 coefficient of {name}: got {got}, want {want}",
                k + 1
            );
        }
        assert!(seq.l[k].constant_term().is_zero());
    }
    println!(
        "ACCEPTANCE 1 PASS: printed linear parts of L1..L3 reproduced exactly ({:.2?})",
        t0.elapsed()
    );
}

fn rank_case(cat: &Catalog, id: &str) {
    let t0 = Instant::now();
    let file = cat.find(id).unwrap();
    let expected = file.expected_rank.expect("entry records expected rank");
    let k = file.rank_k.unwrap_or(12);
    let seed = recorded_seed(id);
    let (spec, sample) = instantiate_sampled(file, id, seed).unwrap();
    let opts = FocalOptions::new(k, 1);
    let (seq, _) = focal_coefficients(&spec, &file.pert, &opts).unwrap();
    let cert = rank_certificate(&seq);
    assert_eq!(
        cert.rank, expected,
        "{id}: rank {} != expected {expected} (seed {seed}, sample {sample:?})",
        cert.rank
    );
    assert_eq!(cert.lower_bound_with_trace(), expected);
    println!(
        "ACCEPTANCE 2 PASS: {id} rank {} over K={k} (seed {seed}, {:.2?})",
        cert.rank,
        t0.elapsed()
    );
}

#[test]
fn criterion2_rank_reproduction() {
    let cat = load_catalog();
    // all catalog ranks except the K=17 deep case, which runs separately
    for (id, file) in &cat.entries {
        if file.expected_rank.is_none() || id == "fz3r3_c2" {
            continue;
        }
        rank_case(&cat, id);
    }
}

#[test]
fn criterion2_rank_reproduction_deep_case() {
    // K = 17 at jet order 1: the long-running rank case
    let cat = load_catalog();
    rank_case(&cat, "fz3r3_c2");
}

#[test]
fn criterion3_thirteen_cycle_certificate() {
    let t0 = Instant::now();
    let cat = load_catalog();
    let file = cat.find("quad13").unwrap();
    let spec = file.instantiate(&Default::default()).unwrap();
    let opts = FocalOptions::new(13, 2);
    let (seq, _) = focal_coefficients(&spec, &file.pert, &opts).unwrap();

    let cert = rank_certificate(&seq);
    assert_eq!(cert.rank, 9);
    // pivots: the nine parameters whose linear parts are solved for u
    let pivot_names: Vec<&str> = cert
        .pivot_cols
        .iter()
        .map(|&c| cert.param_names[c].as_str())
        .collect();
    assert_eq!(
        pivot_names,
        ["a002", "a011", "a020", "a101", "a110", "a200", "b002", "b011", "b020"]
    );

    let problem = reduce_to_quadratic_problem(&seq, &cert, 4).unwrap();
    assert_eq!(problem.residual_names, ["b101", "b110", "b200", "c002"]);
    // the printed quadratic slices carry every quadratic monomial in the
    // residuals except c002^2
    let c002 = 3usize;
    for (i, h) in problem.h[..3].iter().enumerate() {
        let mut has_c002_sq = false;
        let mut support = 0usize;
        for (e, _) in h.terms() {
            if e[c002] == 2 {
                has_c002_sq = true;
            }
            support += 1;
        }
        assert!(!has_c002_sq, "h_{} contains c002^2", 10 + i);
        assert_eq!(support, 9, "h_{} support", 10 + i);
    }

    let line = solve_line(&problem, &file.alpha_scale).unwrap();
    assert_eq!(line.total_cycles(), 13);
    assert_eq!(line.pivot, "b101");
    assert_eq!(line.alpha.degree(), 3, "alpha has a cubic defining polynomial");
    assert!(line.alpha_certified_minimal, "cubic certified irreducible");
    // b101 = 1 and b200 = alpha/3 exactly
    let eta_b101 = &line.eta.iter().find(|(n, _)| n == "b101").unwrap().1;
    assert_eq!(eta_b101, &UPoly::one());
    let eta_b200 = &line.eta.iter().find(|(n, _)| n == "b200").unwrap().1;
    assert_eq!(
        eta_b200,
        &UPoly::from_coeffs(vec![Rational::zero(), rat(1, 3)])
    );
    // exact nonzero-ness was established during the solve; re-verify all
    // invariants from scratch, including after a machine round-trip
    let report = verify_line(&problem, &line);
    assert!(report.ok, "{report}");
    let back =
        focal3d::cyclicity::LineCertificate::from_machine(&line.to_machine()).unwrap();
    assert!(verify_line(&problem, &back).ok);
    println!(
        "ACCEPTANCE 3 PASS: 13-cycle line certificate (alpha cubic, b200 = alpha/3, det != 0, final != 0) ({:.2?})",
        t0.elapsed()
    );
    println!("{}", line.to_text());
}

#[test]
fn criterion4_center_vanishing() {
    let t0 = Instant::now();
    let cat = load_catalog();
    let mut cases = 0;
    for (id, file) in &cat.entries {
        let k = file.rank_k.unwrap_or(12);
        for seed in [1u64, 2, 3] {
            let (spec, sample) = instantiate_sampled(file, id, seed).unwrap();
            let opts = FocalOptions::new(k, 0);
            let (seq, _) = focal_coefficients(&spec, &file.pert, &opts).unwrap();
            for (i, l) in seq.l.iter().enumerate() {
                assert!(
                    l.is_zero(),
                    "{id} seed {seed}: L_{} = {} != 0 at a center (sample {sample:?})",
                    i + 1,
                    l.constant_term()
                );
            }
            cases += 1;
        }
    }
    println!(
        "ACCEPTANCE 4 PASS: L_1..L_K vanish on {cases} instantiated centers ({:.2?})",
        t0.elapsed()
    );
}

#[test]
fn criterion5_focal_identity() {
    let t0 = Instant::now();
    let cat = load_catalog();
    // both conventions, across a numeric entry and two sampled templates
    for id in ["quad13", "f1r2_c4", "f2eq_c2"] {
        let file = cat.find(id).unwrap();
        let (spec, _) = instantiate_sampled(file, id, 1).unwrap();
        for mode in [FocalMode::paper(), FocalMode::radial()] {
            let opts = FocalOptions::new(4, 1).with_mode(mode).with_keep_h();
            let (seq, h) = focal_coefficients(&spec, &file.pert, &opts).unwrap();
            assert!(
                verify_focal_identity(&seq, &h.unwrap()),
                "{id}: focal identity residue in mode {mode:?}"
            );
        }
    }
    println!(
        "ACCEPTANCE 5 PASS: XH - sum of resonant terms vanishes through degree 2K+2 ({:.2?})",
        t0.elapsed()
    );
}

#[test]
fn criterion7_rigidity_classification() {
    let t0 = Instant::now();
    let cat = load_catalog();
    for (id, file) in &cat.entries {
        let (spec, _) = instantiate_sampled(file, id, 1).unwrap();
        assert!(
            is_rigid_cylindrical(&spec),
            "{id}: expected rigidity by cylindrical coordinates"
        );
    }
    // mutated control: adding x^2 to Q breaks rigidity
    let file = load_catalog();
    let file = file.find("quad13").unwrap();
    let mut spec = file.instantiate(&Default::default()).unwrap();
    spec.q.add_term(
        (2, 0, 0),
        focal3d::jet::JetPoly::constant(rat_int(1), 0),
    );
    assert!(!is_rigid_cylindrical(&spec));
    println!(
        "ACCEPTANCE 7 PASS: all catalog systems rigid by cylindrical coordinates; mutated control is not ({:.2?})",
        t0.elapsed()
    );
}
