//! Acceptance criteria, run as a plain binary so that every criterion prints
//! exactly one PASS/FAIL line. Exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use anosovlab::charts::{collinear_in_pq, ProjPoint};
use anosovlab::diagnostics::{
    check_hk, check_hyperconvex, check_transversality, check_collinearity, check_cyclic_order, check_maximal,
    gap_profile, hyperconvex_abc, collinearity_points, limit_checks, sample_triples, sample_tuples, tangent_check,
    tangent_consistency,
};
use anosovlab::flags::{flag_from_witness, is_positive_triple, sample_boundary, veronese_flag, FlagSample, Strategy};
use anosovlab::group::enumerate_ball;
use anosovlab::rep::{direct_sum, fuchsian_genus2, sym_power_frame, sym_power_lift, Representation};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_anosovlab");
const TRIPLES: usize = 500;
const SAMPLES: usize = 64;
const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn eta() -> Representation {
    sym_power_lift(&fuchsian_genus2().unwrap(), 4).unwrap()
}

/// Veronese boundary sample and the positive triples used by criteria 4-8.
struct Fixture {
    flags: Vec<FlagSample>,
    triples: Vec<[usize; 3]>,
}

impl Fixture {
    fn new() -> Self {
        let flags = sample_boundary(&eta(), SAMPLES, &Strategy::Veronese { seed: SEED })
            .unwrap()
            .flags;
        let triples = sample_triples(flags.len(), TRIPLES, SEED).unwrap();
        Fixture { flags, triples }
    }

    fn each(&self) -> impl Iterator<Item = (&FlagSample, &FlagSample, &FlagSample)> {
        self.triples
            .iter()
            .map(|t| (&self.flags[t[0]], &self.flags[t[1]], &self.flags[t[2]]))
    }
}

fn construction_certificates(dir: &Path) -> Outcome {
    let out = dir.join("eta.json");
    let start = Instant::now();
    let run = Command::new(BIN)
        .args(["build", "--kind", "sym-power", "--N", "4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    if !run.status.success() {
        return outcome(false, format!("build failed: {}", String::from_utf8_lossy(&run.stderr)));
    }
    let cert: Value = serde_json::from_slice(&run.stdout).unwrap();
    let rel = cert["relator_residual"].as_f64().unwrap();
    let sp = cert["symplectic_residual"].as_f64().unwrap();
    let ball_sp = cert["ball_symplectic_residual"].as_f64().unwrap();
    let elements = cert["ball_elements"].as_u64().unwrap();
    let reloaded = Representation::load(&out).is_ok();
    outcome(
        rel < 1e-8 && sp < 1e-8 && ball_sp < 1e-8 && cert["ball_radius"] == 4 && reloaded && secs < 5.0,
        format!(
            "relator {rel:.2e}, generators symplectic {sp:.2e}, ball(4) relative symplectic {ball_sp:.2e} over {elements} elements, {secs:.2}s"
        ),
    )
}

fn boundary_oracle_agreement() -> Outcome {
    let rep = eta();
    let ball = enumerate_ball(&rep, 3).unwrap();
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for e in &ball.elements[1..] {
        let Ok(flag) = flag_from_witness(&rep, &e.word) else {
            continue;
        };
        let oracle = veronese_flag(flag.theta(), 4).unwrap();
        for k in 1..4 {
            worst = worst.max(flag.space(k).unwrap().distance(oracle.space(k).unwrap()));
        }
        compared += 1;
    }
    outcome(
        compared >= 100 && worst < 1e-6,
        format!("{compared} ball elements, worst principal-angle sine {worst:.2e}"),
    )
}

fn gap_decay() -> Outcome {
    let start = Instant::now();
    let profiles = gap_profile(&eta(), &[1, 2, 3], 6).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs < 60.0;
    let mut parts = Vec::new();
    for p in &profiles {
        let decreasing = p.max_by_radius[2..6].windows(2).all(|w| w[1] < w[0]);
        ok &= p.fitted_slope < -0.1 && p.envelope_r_squared > 0.9 && decreasing && !p.truncated;
        parts.push(format!(
            "k={} slope {:.3} envelope R² {:.3} (all-points R² {:.3}) decreasing {}",
            p.k, p.fitted_slope, p.envelope_r_squared, p.r_squared, decreasing
        ));
    }
    let rho0 = fuchsian_genus2().unwrap();
    let control = gap_profile(&direct_sum(&rho0, &rho0).unwrap(), &[1], 6).unwrap();
    let flat = control[0].points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    ok &= flat < 1e-12 && !control[0].pass;
    parts.push(format!(
        "control k=1 max |log ratio| {flat:.1e} over {} elements",
        control[0].points.len()
    ));
    outcome(ok, format!("{}; {secs:.1}s", parts.join("; ")))
}

fn maximality_and_h(fx: &Fixture) -> Outcome {
    let mut disagreements = 0;
    let mut h13 = 0;
    let mut not_positive = 0;
    let mut min_eig = f64::INFINITY;
    let mut min_h2 = f64::INFINITY;
    let mut passing = 0;
    for (x, y, z) in fx.each() {
        if !is_positive_triple(&x.point, &y.point, &z.point) {
            not_positive += 1;
        }
        let m = check_maximal(x, y, z).unwrap();
        let h2 = check_hk(x, y, z, 2).unwrap();
        let eig = m.details["min_eigenvalue"];
        let maximal = eig > 0.0;
        let h2_ok = h2.margin > 1e-6;
        min_eig = min_eig.min(eig);
        min_h2 = min_h2.min(h2.margin);
        if maximal != h2_ok {
            disagreements += 1;
        }
        if maximal && h2_ok {
            passing += 1;
        }
        let h1 = check_hk(x, y, z, 1).unwrap();
        let h3 = check_hk(x, y, z, 3).unwrap();
        if h1.pass != h3.pass {
            h13 += 1;
        }
    }
    let n = fx.triples.len();
    outcome(
        n >= 500 && not_positive == 0 && passing == n && disagreements == 0 && h13 == 0,
        format!(
            "{passing}/{n} positive triples maximal and H2; min eigenvalue {min_eig:.2e}, min H2 margin {min_h2:.2e}; {disagreements} maximal/H2 and {h13} H1/H3 disagreements"
        ),
    )
}

fn transversality_inside_x(fx: &Fixture) -> Outcome {
    let mut worst = [f64::INFINITY; 4];
    let mut all_asserted = true;
    for (x, y, z) in fx.each() {
        let r = check_transversality(x, y, z).unwrap();
        for (w, item) in worst.iter_mut().zip(["i", "ii", "iii", "iv"]) {
            *w = w.min(r.details[item]);
        }
        all_asserted &= r.details["iv_asserted"] == 1.0;
    }
    outcome(
        worst.iter().all(|&m| m > 1e-6) && all_asserted,
        format!(
            "{} triples, worst margins (i) {:.2e} (ii) {:.2e} (iii) {:.2e} (iv) {:.2e}",
            fx.triples.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    )
}

fn tangent_law(fx: &Fixture) -> Outcome {
    let frame = sym_power_frame(4).unwrap();
    let m = fx.flags.len();
    let arcs = 8;
    let delta = 1e-4;
    let mut worst = [0.0f64; 4];
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut sign_flips = 0;
    let mut evaluated = 0;
    for i in 0..arcs {
        let tx = fx.flags[i * m / arcs].theta();
        let tz = fx.flags[(i * m / arcs + m / 2) % m].theta();
        let arc = (tz - tx).rem_euclid(TAU);
        let mut signs = Vec::new();
        for j in 1..8 {
            let ty = tx + arc * j as f64 / 8.0;
            let (_, r) = tangent_check(&frame, tx, tz, ty, delta).unwrap();
            worst[0] = worst[0].max(r.rank);
            worst[1] = worst[1].max(r.kernel);
            worst[2] = worst[2].max(r.image);
            worst[3] = worst[3].max(r.signature);
            signs.push(r.sign);
            let h = tangent_consistency(&frame, tx, tz, ty, delta).unwrap();
            for key in ["ratio", "kernel", "image"] {
                let v = h.details[key];
                ratio_range = (ratio_range.0.min(v), ratio_range.1.max(v));
            }
            evaluated += 1;
        }
        if signs.iter().any(|&s| s != signs[0]) {
            sign_flips += 1;
        }
    }
    outcome(
        worst.iter().all(|&w| w < 1e-3)
            && sign_flips == 0
            && ratio_range.0 >= 1.5
            && ratio_range.1 <= 2.5,
        format!(
            "{evaluated} points on {arcs} arcs: rank {:.1e}, kernel {:.1e}, image {:.1e}, signature {:.1e}; halving ratios in [{:.3}, {:.3}]; {sign_flips} arcs with a sign change",
            worst[0], worst[1], worst[2], worst[3], ratio_range.0, ratio_range.1
        ),
    )
}

fn collinearity_and_order(fx: &Fixture) -> Outcome {
    let mut worst_col: f64 = 0.0;
    let mut worst_cr = f64::NEG_INFINITY;
    let mut undetected = 0;
    for (x, y, z) in fx.each() {
        worst_col = worst_col.max(check_collinearity(x, y, z).unwrap().margin);
        worst_cr = worst_cr.max(check_cyclic_order(x, y, z).unwrap().margin);
        let [q, a, b] = collinearity_points(x, y, z).unwrap();
        let (a, b) = (a.coords(), b.coords());
        let normal = a.cross(&b).normalize();
        let moved: Vec<f64> = q.as_slice().iter().zip(normal.iter()).map(|(c, n)| c + 1e-3 * n).collect();
        let moved = ProjPoint::from_slice(&moved).unwrap();
        let a = ProjPoint::new(a).unwrap();
        let b = ProjPoint::new(b).unwrap();
        if collinear_in_pq(&moved, &a, &b).unwrap().value < 1e-6 {
            undetected += 1;
        }
    }
    outcome(
        worst_col < 1e-8 && worst_cr < 0.0 && undetected == 0,
        format!(
            "{} triples: worst collinearity residual {worst_col:.2e}, largest cross ratio {worst_cr:.4}, {undetected} undetected 1e-3 perturbations",
            fx.triples.len()
        ),
    )
}

fn hyperconvexity(fx: &Fixture) -> Outcome {
    let tuples = sample_tuples(fx.flags.len(), TRIPLES, 4, SEED + 1).unwrap();
    let mut worst = f64::INFINITY;
    for t in &tuples {
        let fs: Vec<&FlagSample> = t.iter().map(|&i| &fx.flags[i]).collect();
        worst = worst.min(check_hyperconvex(&fs).unwrap().margin);
    }
    let mut disagreements = 0;
    for (x, y, z) in fx.each() {
        let h1 = check_hk(x, y, z, 1).unwrap();
        let abc = hyperconvex_abc(x, y, z, 1, 1, 2).unwrap();
        if h1.pass != abc.pass {
            disagreements += 1;
        }
    }
    outcome(
        worst > 1e-6 && disagreements == 0,
        format!(
            "{} four-tuples, smallest spanning margin {worst:.2e}; {disagreements} H1 versus {{1,1,2}} disagreements over {} triples",
            tuples.len(),
            fx.triples.len()
        ),
    )
}

fn limits(fx: &Fixture) -> Outcome {
    let frame = sym_power_frame(4).unwrap();
    let m = fx.flags.len();
    let mut worst_x: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for i in 0..8 {
        let tx = fx.flags[i * m / 8].theta();
        let tz = fx.flags[(i * m / 8 + m / 2) % m].theta();
        for c in limit_checks(&frame, tx, tz, 1e-3).unwrap() {
            match c.name.as_str() {
                "limit_x" => worst_x = worst_x.max(c.margin),
                "limit_z" => worst_z = worst_z.max(c.margin),
                _ => {}
            }
        }
    }
    outcome(
        worst_x < 1e-3 && worst_z < 1e-3,
        format!("8 arcs at distance 1e-3: distance to the x limit {worst_x:.2e}, to the z limit {worst_z:.2e}"),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let rep = dir.join("eta.json");
    if !rep.exists() {
        eta().save(&rep).unwrap();
    }
    let mut reports = Vec::new();
    for name in ["run1.json", "run2.json"] {
        let path = dir.join(name);
        let status = Command::new(BIN)
            .arg("check")
            .arg(&rep)
            .args(["--seed", "42", "--out"])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        if status.code() != Some(0) {
            return outcome(false, format!("check exited with {status}"));
        }
        reports.push(path);
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    let same = strip(&reports[0]) == strip(&reports[1]);
    let diff = Command::new(BIN)
        .arg("report-diff")
        .args(&reports)
        .output()
        .unwrap()
        .status;
    outcome(
        same && diff.success(),
        format!("reports identical modulo timestamp: {same}; report-diff exit {:?}", diff.code()),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let fx = Fixture::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("construction certificates", Box::new(|| construction_certificates(dir.path()))),
        ("boundary map agrees with the Veronese oracle", Box::new(boundary_oracle_agreement)),
        ("singular value gap decay", Box::new(gap_decay)),
        ("maximality versus H2, H1 versus H3", Box::new(|| maximality_and_h(&fx))),
        ("transversality inside x^n", Box::new(|| transversality_inside_x(&fx))),
        ("tangent law of chart curves", Box::new(|| tangent_law(&fx))),
        ("collinearity and cyclic order", Box::new(|| collinearity_and_order(&fx))),
        ("hyperconvexity", Box::new(|| hyperconvexity(&fx))),
        ("limits of chart curves", Box::new(|| limits(&fx))),
        ("deterministic reports", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| outcome(false, "panicked".into()));
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
