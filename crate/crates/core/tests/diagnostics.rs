use anosovlab::charts::{collinear_in_pq, ProjPoint};
use anosovlab::diagnostics::{
    check_hk, check_hyperconvex, check_transversality, check_collinearity, check_cyclic_order, check_maximal,
    equivalence_suite, gap_profile, hyperconvex_abc, collinearity_points, run_checks, sample_triples,
    tangent_check, tangent_consistency, CheckConfig,
};
use anosovlab::flags::{sample_boundary, veronese_flag, FlagSample, Strategy};
use anosovlab::group::Word;
use anosovlab::linalg::Mat;
use anosovlab::rep::{bend, direct_sum, fuchsian_genus2, sym_power_frame, sym_power_lift, Representation};
use anosovlab::Error;

fn flags4(thetas: &[f64]) -> Vec<FlagSample> {
    thetas.iter().map(|&t| veronese_flag(t, 4).unwrap()).collect()
}

fn eta() -> Representation {
    sym_power_lift(&fuchsian_genus2().unwrap(), 4).unwrap()
}

const GENERIC: [f64; 3] = [0.3, 2.1, 4.4];

#[test]
fn h2_passes_on_a_generic_positive_triple() {
    let f = flags4(&GENERIC);
    let r = check_hk(&f[0], &f[1], &f[2], 2).unwrap();
    assert!(r.pass && r.margin > 1e-6, "{r:?}");
    assert_eq!(r.details["agree"], 1.0);
}

#[test]
fn h1_and_h3_agree_and_are_symmetric_in_x_and_y() {
    let f = flags4(&GENERIC);
    for k in 1..4 {
        let xy = check_hk(&f[0], &f[1], &f[2], k).unwrap();
        let yx = check_hk(&f[1], &f[0], &f[2], k).unwrap();
        assert_eq!(xy.pass, yx.pass, "k = {k}");
    }
    let h1 = check_hk(&f[0], &f[1], &f[2], 1).unwrap();
    let h3 = check_hk(&f[0], &f[1], &f[2], 3).unwrap();
    assert_eq!(h1.pass, h3.pass);
}

#[test]
fn coincident_points_are_rejected() {
    let f = flags4(&[1.0, 1.0, 3.0]);
    assert!(matches!(check_hk(&f[0], &f[1], &f[2], 2), Err(Error::InvalidArgument(_))));
    assert!(check_maximal(&f[0], &f[1], &f[2]).is_err());
    assert!(check_hyperconvex(&[&f[0], &f[1], &f[2], &flags4(&[5.0])[0]]).is_err());
}

#[test]
fn maximal_form_flips_definiteness_with_orientation() {
    let f = flags4(&GENERIC);
    let pos = check_maximal(&f[0], &f[1], &f[2]).unwrap();
    assert!(pos.pass && pos.details["min_eigenvalue"] > 0.0);
    assert_eq!(pos.details["orientation"], 1.0);
    let neg = check_maximal(&f[2], &f[1], &f[0]).unwrap();
    assert!(neg.pass && neg.details["max_eigenvalue"] < 0.0);
    assert_eq!(neg.details["orientation"], -1.0);
}

#[test]
fn doubled_fuchsian_is_maximal_with_middle_flags() {
    let rho0 = fuchsian_genus2().unwrap();
    let ds = direct_sum(&rho0, &rho0).unwrap();
    let sample = sample_boundary(
        &ds,
        12,
        &Strategy::Attracting { radius: 3, ks: Some(vec![2]) },
    )
    .unwrap();
    assert!(sample.flags.len() >= 3);
    let f = &sample.flags;
    let m = f.len();
    for t in sample_triples(m, 20, 7).unwrap() {
        let r = check_maximal(&f[t[0]], &f[t[1]], &f[t[2]]).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn transversality_items_hold_on_a_generic_triple() {
    let f = flags4(&GENERIC);
    let r = check_transversality(&f[0], &f[1], &f[2]).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.details["iv_asserted"], 1.0);
    for item in ["i", "ii", "iii", "iv"] {
        assert!(r.details[item] > 1e-6, "{item}: {}", r.details[item]);
    }
}

#[test]
fn transversality_item_ii_shrinks_as_y_approaches_x() {
    let mut last = f64::INFINITY;
    for gap in [1.0, 0.3, 0.1, 0.03] {
        let f = flags4(&[0.3, 0.3 + gap, 4.4]);
        let r = check_transversality(&f[0], &f[1], &f[2]).unwrap();
        let ii = r.details["ii"];
        assert!(ii < last, "gap {gap}: {ii} !< {last}");
        last = ii;
    }
}

#[test]
fn collinearity_holds_and_fault_detected() {
    let f = flags4(&GENERIC);
    let r = check_collinearity(&f[0], &f[1], &f[2]).unwrap();
    assert!(r.pass && r.margin < 1e-8, "{r:?}");

    let [q, a, b] = collinearity_points(&f[0], &f[1], &f[2]).unwrap();
    let mut c: Vec<f64> = q.as_slice().to_vec();
    let dir = a.coords().cross(&b.coords()).normalize();
    for i in 0..3 {
        c[i] += 1e-3 * dir[i];
    }
    let moved = ProjPoint::from_slice(&c).unwrap();
    let res = collinear_in_pq(&moved, &a, &b).unwrap();
    assert!(!res.pass);
    assert!(res.value > 1e-6);
}

#[test]
fn cross_ratio_stays_negative_along_a_path() {
    for i in 1..20 {
        let ty = 0.3 + (4.4 - 0.3) * i as f64 / 20.0;
        let f = flags4(&[0.3, ty, 4.4]);
        let r = check_cyclic_order(&f[0], &f[1], &f[2]).unwrap();
        assert!(r.pass && r.margin < 0.0, "theta_y {ty}: {r:?}");
    }
}

#[test]
fn veronese_lines_span_and_112_hyperconvex() {
    let f = flags4(&[0.2, 1.7, 3.1, 5.0]);
    let r = check_hyperconvex(&[&f[0], &f[1], &f[2], &f[3]]).unwrap();
    assert!(r.pass && r.margin > 1e-6, "{r:?}");
    let m = hyperconvex_abc(&f[0], &f[1], &f[2], 1, 1, 2).unwrap();
    assert!(m.pass);
    assert!(check_hyperconvex(&[&f[0], &f[1], &f[2]]).is_err());
}

#[test]
fn tangent_law_and_first_order_scaling() {
    let frame = sym_power_frame(4).unwrap();
    let (check, res) = tangent_check(&frame, 0.3, 4.4, 2.1, 1e-4).unwrap();
    assert!(check.pass, "{check:?}");
    assert!(res.rank < 1e-3 && res.kernel < 1e-3 && res.image < 1e-3 && res.signature < 1e-3);
    let halving = tangent_consistency(&frame, 0.3, 4.4, 2.1, 1e-4).unwrap();
    assert!(halving.pass, "{halving:?}");
    let signs: Vec<f64> = (1..8)
        .map(|i| tangent_check(&frame, 0.3, 4.4, 0.3 + 4.1 * i as f64 / 8.0, 1e-4).unwrap().1.sign)
        .collect();
    assert!(signs.iter().all(|&s| s == signs[0]));
}

#[test]
fn tangent_rejects_moving_point_on_an_endpoint() {
    let frame = sym_power_frame(4).unwrap();
    assert!(tangent_check(&frame, 0.3, 4.4, 0.3, 1e-4).is_err());
}

#[test]
fn gap_profiles_of_doubled_fuchsian() {
    let rho0 = fuchsian_genus2().unwrap();
    let ds = direct_sum(&rho0, &rho0).unwrap();
    let p = gap_profile(&ds, &[1, 2], 4).unwrap();
    assert!(p[0].points.iter().all(|&(_, r)| r.abs() < 1e-12));
    assert!(!p[0].pass);
    assert!(p[1].pass, "{:?}", p[1].fitted_slope);
}

#[test]
fn symmetric_power_gap_slopes_agree_across_k() {
    let p = gap_profile(&eta(), &[1, 2, 3], 4).unwrap();
    assert!(p.iter().all(|g| g.pass));
    for g in &p[1..] {
        assert!((g.fitted_slope - p[0].fitted_slope).abs() < 1e-6 * p[0].fitted_slope.abs());
    }
}

#[test]
fn equivalence_suite_holds_for_the_symmetric_power() {
    let rep = eta();
    let flags = sample_boundary(&rep, 24, &Strategy::Veronese { seed: 3 }).unwrap().flags;
    let triples = sample_triples(flags.len(), 60, 3).unwrap();
    let results = equivalence_suite(&rep, &flags, &triples).unwrap();
    let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
    for want in ["equiv_maximal_hn", "implies_hn_h1", "equiv_h1_h3", "equiv_h1_hyperconvex_112"] {
        assert!(names.contains(&want), "{names:?}");
    }
    for r in &results {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.details["agreeing"], r.details["triples"]);
    }
}

#[test]
fn equivalence_suite_refuses_a_broken_representation() {
    let rep = eta();
    let mut images: Vec<Mat> = rep.images().to_vec();
    images[0][(0, 1)] += 1e-3;
    let broken = Representation::unchecked(
        *rep.presentation(),
        rep.kind(),
        images,
        rep.base().map(|b| b.images().to_vec()),
        true,
    )
    .unwrap();
    let flags = sample_boundary(&rep, 8, &Strategy::Veronese { seed: 1 }).unwrap().flags;
    let triples = sample_triples(flags.len(), 5, 1).unwrap();
    assert!(matches!(
        equivalence_suite(&broken, &flags, &triples),
        Err(Error::Precondition(_))
    ));
    assert!(run_checks(&broken, &CheckConfig::default()).is_err());
}

#[test]
fn equivalences_survive_a_small_bending() {
    let curve: Word = "a1 b1 A1 B1".parse().unwrap();
    let bent = bend(&eta(), &curve, 0.1).unwrap();
    let sample = sample_boundary(&bent, 24, &Strategy::Attracting { radius: 3, ks: None }).unwrap();
    let triples = sample_triples(sample.flags.len(), 40, 5).unwrap();
    let results = equivalence_suite(&bent, &sample.flags, &triples).unwrap();
    assert!(!results.is_empty());
    for r in &results {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn full_suite_on_symmetric_power_passes_and_direct_sum_fails_gap() {
    let config = CheckConfig { triples: 60, samples: 24, ..CheckConfig::default() };
    let report = run_checks(&eta(), &config).unwrap();
    assert!(report.pass, "failing: {:?}", report.failing());

    let rho0 = fuchsian_genus2().unwrap();
    let ds = direct_sum(&rho0, &rho0).unwrap();
    let config = CheckConfig { checks: Some(vec!["gap".into()]), ..config };
    let report = run_checks(&ds, &config).unwrap();
    assert!(!report.pass);
    assert!(report.failing().contains(&"gap_k1"));
    assert!(!report.failing().contains(&"gap_k2"));
}

#[test]
fn check_sorting_is_by_name() {
    let config = CheckConfig { triples: 20, samples: 12, radius: 3, ..CheckConfig::default() };
    let report = run_checks(&eta(), &config).unwrap();
    let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(report.checks.iter().all(|c| c.margin.is_finite()));
}

#[test]
fn doubling_the_boundary_sample_keeps_verdicts_and_spacing_free_margins() {
    let rep = eta();
    let coarse = run_checks(&rep, &CheckConfig { samples: 32, triples: 200, ..CheckConfig::default() }).unwrap();
    let fine = run_checks(&rep, &CheckConfig { samples: 64, triples: 200, ..CheckConfig::default() }).unwrap();
    let names = |r: &anosovlab::diagnostics::Report| r.checks.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
    assert_eq!(names(&coarse), names(&fine));
    for (a, b) in coarse.checks.iter().zip(&fine.checks) {
        assert_eq!(a.pass, b.pass, "{}", a.name);
        let spacing_free = a.name.starts_with("gap_")
            || a.name.starts_with("limit_")
            || a.name == "tangent"
            || a.name == "psi_nonconstant"
            || a.name == "cyclic_order";
        if spacing_free {
            let rel = (b.margin / a.margin - 1.0).abs();
            assert!(rel < 0.1, "{}: {} vs {}", a.name, a.margin, b.margin);
        }
    }
}
