//! Running every applicable check over sampled boundary triples and
//! assembling a deterministic report.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flags::{sample_boundary, FlagSample, Strategy};
use crate::rep::{sym_power_frame, Kind, Representation, Residuals};
use crate::tolerance::{self, Tolerances};

use super::gap::{gap_profile, GapProfile};
use super::scan::{limit_checks, psi_variation, tangent_check, tangent_consistency};
use super::triple::{
    check_hk, check_hyperconvex, check_transversality, check_collinearity, check_cyclic_order, check_maximal,
    hyperconvex_abc,
};
use super::{CheckResult, FlagSource};

/// Check groups selectable in [`CheckConfig::checks`].
pub const CHECK_NAMES: [&str; 10] = [
    "gap",
    "hk",
    "maximal",
    "transversality",
    "tangent",
    "collinearity",
    "cyclic_order",
    "hyperconvex",
    "equivalence",
    "limits",
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckConfig {
    /// Ball radius for gap profiles (and attracting-flag witnesses, capped
    /// at 4).
    pub radius: usize,
    /// Number of boundary samples.
    pub samples: usize,
    /// Number of sampled positive triples (and of sampled `N`-tuples).
    pub triples: usize,
    pub seed: u64,
    /// Selected check groups; `None` runs all of [`CHECK_NAMES`].
    pub checks: Option<Vec<String>>,
    /// Finite-difference step of the tangent checks.
    pub delta: f64,
    /// Circle distance used by the limit checks.
    pub limit_distance: f64,
    /// Number of arcs used by the tangent, limit and `ψ` scans.
    pub scans: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            radius: 4,
            samples: 64,
            triples: 500,
            seed: 42,
            checks: None,
            delta: 1e-4,
            limit_distance: 1e-3,
            scans: 8,
        }
    }
}

impl CheckConfig {
    fn wants(&self, group: &str) -> bool {
        self.checks
            .as_ref()
            .is_none_or(|c| c.iter().any(|g| g == group))
    }

    fn validate(&self) -> Result<()> {
        if let Some(c) = &self.checks {
            if let Some(bad) = c.iter().find(|g| !CHECK_NAMES.contains(&g.as_str())) {
                return Err(Error::InvalidArgument(format!(
                    "unknown check group `{bad}` (known: {})",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        if self.radius > 10 {
            return Err(Error::InvalidArgument(format!(
                "radius {} exceeds the maximum of 10",
                self.radius
            )));
        }
        if self.triples == 0 {
            return Err(Error::InvalidArgument("need at least one triple".into()));
        }
        if self.samples < 3 {
            return Err(Error::InvalidArgument("need at least three boundary samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepInfo {
    pub kind: Kind,
    pub dim: usize,
    pub genus: usize,
    pub symplectic: bool,
    pub residuals: Residuals,
}

/// The machine-readable outcome of [`run_checks`]. `checks` is sorted by
/// name, then witness.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: u32,
    pub rep: RepInfo,
    pub config: CheckConfig,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub gap_profiles: Vec<GapProfile>,
    /// Checks that could not run for this representation, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

impl Report {
    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// `count` triples of distinct indices into `0..samples`, each sorted
/// ascending (so counterclockwise for angle-sorted samples).
pub fn sample_triples(samples: usize, count: usize, seed: u64) -> Result<Vec<[usize; 3]>> {
    sample_tuples(samples, count, 3, seed).map(|v| v.into_iter().map(|t| [t[0], t[1], t[2]]).collect())
}

/// `count` sets of `size` distinct indices into `0..samples`, each sorted
/// ascending.
pub fn sample_tuples(samples: usize, count: usize, size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if samples < size {
        return Err(Error::InvalidArgument(format!(
            "need at least {size} samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut t = sample(&mut rng, samples, size).into_vec();
            t.sort_unstable();
            t
        })
        .collect())
}

/// Per-triple outcomes used by the aggregated checks and the equivalence
/// suite; `Err` entries are flag-quality problems.
#[derive(Default)]
struct TripleVerdicts {
    hk: BTreeMap<usize, Result<CheckResult>>,
    maximal: Option<Result<CheckResult>>,
    transversality: Option<Result<CheckResult>>,
    collinearity: Option<Result<CheckResult>>,
    cyclic_order: Option<Result<CheckResult>>,
    hyper112: Option<Result<CheckResult>>,
    hyper_all: Option<Result<CheckResult>>,
}

/// Selects one per-triple verdict from the table.
type PickVerdict = fn(&TripleVerdicts) -> Option<&Result<CheckResult>>;

fn available(flags: &[FlagSample], k: usize) -> bool {
    flags.iter().all(|f| f.has(k))
}

fn triple_verdicts(flags: &[FlagSample], t: &[usize; 3], config: &CheckConfig) -> TripleVerdicts {
    let (x, y, z) = (&flags[t[0]], &flags[t[1]], &flags[t[2]]);
    let big_n = x.dim();
    let symplectic_even = big_n % 2 == 0;
    let n = big_n / 2;
    let mut v = TripleVerdicts::default();
    let has = |k: usize| available(flags, k);
    if config.wants("hk") || config.wants("equivalence") || config.wants("transversality") {
        for k in 1..big_n {
            if has(k) && has(big_n + 1 - k) && has(big_n - 1 - k) {
                v.hk.insert(k, check_hk(x, y, z, k));
            }
        }
    }
    if symplectic_even && has(n) && (config.wants("maximal") || config.wants("equivalence")) {
        v.maximal = Some(check_maximal(x, y, z));
    }
    if symplectic_even && n >= 1 && (1..big_n).all(has) {
        if config.wants("transversality") {
            v.transversality = Some(check_transversality(x, y, z));
        }
        if big_n == 4 && config.wants("collinearity") {
            v.collinearity = Some(check_collinearity(x, y, z));
        }
        if big_n == 4 && config.wants("cyclic_order") {
            v.cyclic_order = Some(check_cyclic_order(x, y, z));
        }
    }
    if has(1) && has(2) && big_n >= 4 && (config.wants("hyperconvex") || config.wants("equivalence")) {
        v.hyper112 = Some(hyperconvex_abc(x, y, z, 1, 1, 2).map(|m| {
            CheckResult::above("hyperconvex_112", m.value, m.tolerance)
                .with_witness(vec![x.theta(), y.theta(), z.theta()])
        }));
    }
    if (1..big_n).all(has) && config.wants("hyperconvex") {
        v.hyper_all = Some(hyperconvex_all(x, y, z));
    }
    v
}

/// Smallest directness margin of `x^a + y^b + z^c` over all positive
/// `a + b + c <= N`.
fn hyperconvex_all(x: &FlagSample, y: &FlagSample, z: &FlagSample) -> Result<CheckResult> {
    let big_n = x.dim();
    let mut worst = f64::INFINITY;
    let mut tol = tolerance::current().rank;
    let mut arg = (0, 0, 0);
    for a in 1..big_n {
        for b in 1..big_n {
            for c in 1..big_n {
                if a + b + c > big_n {
                    continue;
                }
                let m = hyperconvex_abc(x, y, z, a, b, c)?;
                tol = m.tolerance;
                if m.value < worst {
                    worst = m.value;
                    arg = (a, b, c);
                }
            }
        }
    }
    Ok(CheckResult::above("hyperconvex_abc", worst, tol)
        .with_witness(vec![x.theta(), y.theta(), z.theta()])
        .detail("a", arg.0 as f64)
        .detail("b", arg.1 as f64)
        .detail("c", arg.2 as f64))
}

/// Aggregates per-triple results; flag-quality errors are counted, other
/// errors propagate.
fn collect(
    name: &str,
    items: Vec<&Result<CheckResult>>,
    quality: &mut BTreeMap<String, usize>,
) -> Result<Option<CheckResult>> {
    let mut ok = Vec::new();
    for item in items {
        match item {
            Ok(r) => ok.push(r.clone()),
            Err(Error::FlagQuality(_)) => *quality.entry(name.to_string()).or_default() += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    Ok(CheckResult::aggregate(name, ok))
}

fn verdict(r: &Option<Result<CheckResult>>) -> Option<&CheckResult> {
    r.as_ref().and_then(|r| r.as_ref().ok())
}

fn implication(
    name: &str,
    table: &[TripleVerdicts],
    pick: impl Fn(&TripleVerdicts) -> Option<(&CheckResult, &CheckResult)>,
    equivalence: bool,
) -> Option<CheckResult> {
    let pairs: Vec<(&CheckResult, &CheckResult)> = table.iter().filter_map(pick).collect();
    if pairs.is_empty() {
        return None;
    }
    let violations: Vec<&(&CheckResult, &CheckResult)> = pairs
        .iter()
        .filter(|(a, b)| if equivalence { a.pass != b.pass } else { a.pass && !b.pass })
        .collect();
    let worst_left = pairs.iter().map(|p| p.0.margin).fold(f64::INFINITY, f64::min);
    let worst_right = pairs.iter().map(|p| p.1.margin).fold(f64::INFINITY, f64::min);
    let witness = violations.first().map(|p| p.0.witness.clone()).unwrap_or_default();
    Some(
        CheckResult::below(name, violations.len() as f64, 0.5)
            .with_witness(witness)
            .detail("triples", pairs.len() as f64)
            .detail("agreeing", (pairs.len() - violations.len()) as f64)
            .detail("worst_left_margin", worst_left)
            .detail("worst_right_margin", worst_right),
    )
}

fn implications(table: &[TripleVerdicts], big_n: usize) -> Vec<CheckResult> {
    let n = big_n / 2;
    fn hk(v: &TripleVerdicts, k: usize) -> Option<&CheckResult> {
        v.hk.get(&k).and_then(|r| r.as_ref().ok())
    }
    let mut out = Vec::new();
    if big_n.is_multiple_of(2) {
        out.extend(implication(
            "equiv_maximal_hn",
            table,
            |v| Some((verdict(&v.maximal)?, hk(v, n)?)),
            true,
        ));
        if n > 1 {
            out.extend(implication(
                "implies_hn_h1",
                table,
                |v| Some((hk(v, n)?, hk(v, 1)?)),
                false,
            ));
        }
    }
    for k in 1..big_n {
        if k < big_n - k {
            out.extend(implication(
                &format!("equiv_h{k}_h{}", big_n - k),
                table,
                |v| Some((hk(v, k)?, hk(v, big_n - k)?)),
                true,
            ));
        }
    }
    if big_n >= 4 {
        out.extend(implication(
            "equiv_h1_hyperconvex_112",
            table,
            |v| Some((hk(v, 1)?, verdict(&v.hyper112)?)),
            true,
        ));
    }
    out
}

fn gate(rep: &Representation) -> Result<()> {
    rep.verify().map_err(|e| {
        Error::Precondition(format!("representation fails its construction certificate: {e}"))
    })
}

/// Joint per-triple verdicts: maximality versus `H_n`, `H_n ⟹ H_1`,
/// `H_k ⟺ H_{N-k}` and `H_1` versus `{1,1,2}`-hyperconvexity. Refuses to
/// run on a representation that fails its relator certificate.
pub fn equivalence_suite(
    rep: &Representation,
    flags: &[FlagSample],
    triples: &[[usize; 3]],
) -> Result<Vec<CheckResult>> {
    gate(rep)?;
    let config = CheckConfig {
        checks: Some(vec!["equivalence".into()]),
        ..CheckConfig::default()
    };
    if let Some(bad) = triples.iter().flatten().find(|&&i| i >= flags.len()) {
        return Err(Error::InvalidArgument(format!("triple index {bad} out of range")));
    }
    let table: Vec<TripleVerdicts> = triples
        .par_iter()
        .map(|t| triple_verdicts(flags, t, &config))
        .collect();
    Ok(implications(&table, rep.dim()))
}

fn boundary_flags(rep: &Representation, config: &CheckConfig, warnings: &mut Vec<String>) -> Result<(Vec<FlagSample>, bool)> {
    let exact = matches!(rep.kind(), Kind::SymPower | Kind::FuchsianBase);
    let strategy = if exact {
        Strategy::Veronese { seed: config.seed }
    } else {
        Strategy::Attracting {
            radius: config.radius.min(4),
            ks: None,
        }
    };
    let sample = sample_boundary(rep, config.samples, &strategy)?;
    if sample.partial {
        warnings.push(format!(
            "only {} of {} boundary samples found",
            sample.flags.len(),
            config.samples
        ));
    }
    Ok((sample.flags, exact))
}

fn arc_pairs(flags: &[FlagSample], scans: usize) -> Vec<(f64, f64, f64)> {
    let m = flags.len();
    (0..scans.min(m))
        .map(|i| {
            let a = i * m / scans.min(m);
            let c = (a + m / 2).min(m - 1);
            let (tx, tz) = (flags[a].theta(), flags[c].theta());
            let arc = (tz - tx).rem_euclid(TAU);
            (tx, tz, (tx + 0.37 * arc).rem_euclid(TAU))
        })
        .collect()
}

fn sort_checks(checks: &mut [CheckResult]) {
    checks.sort_by(|a, b| {
        a.name.cmp(&b.name).then_with(|| {
            a.witness
                .iter()
                .zip(&b.witness)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(a.witness.len().cmp(&b.witness.len()))
        })
    });
}

/// Runs gap profiles and every applicable selected check.
pub fn run_checks(rep: &Representation, config: &CheckConfig) -> Result<Report> {
    config.validate()?;
    gate(rep)?;
    let big_n = rep.dim();
    let mut checks = Vec::new();
    let mut skipped = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut gap_profiles = Vec::new();

    if config.wants("gap") {
        let ks: Vec<usize> = (1..big_n).collect();
        gap_profiles = gap_profile(rep, &ks, config.radius)?;
        for p in &gap_profiles {
            if p.truncated {
                warnings.push(format!("gap profile k={} used a truncated ball", p.k));
            }
            let decreasing = p.pass || -p.fitted_slope <= tolerance::current().alpha_min;
            let mut c = CheckResult::above(&format!("gap_k{}", p.k), -p.fitted_slope, tolerance::current().alpha_min)
                .detail("r_squared", p.r_squared)
                .detail("envelope_slope", p.envelope_slope)
                .detail("envelope_r_squared", p.envelope_r_squared)
                .detail("intercept", p.fitted_intercept)
                .detail("maxima_decreasing", if decreasing { 1.0 } else { 0.0 });
            c.pass = p.pass;
            checks.push(c);
        }
    }

    let triple_groups = ["hk", "maximal", "transversality", "collinearity", "cyclic_order", "hyperconvex", "equivalence", "tangent", "limits"];
    if triple_groups.iter().any(|g| config.wants(g)) {
        let (flags, exact) = boundary_flags(rep, config, &mut warnings)?;
        if flags.len() < 3 {
            for g in triple_groups {
                skipped.insert(g.to_string(), "fewer than three boundary samples".into());
            }
        } else {
            let triples = sample_triples(flags.len(), config.triples, config.seed)?;
            let table: Vec<TripleVerdicts> = triples
                .par_iter()
                .map(|t| triple_verdicts(&flags, t, config))
                .collect();
            let mut quality = BTreeMap::new();
            if config.wants("hk") {
                for k in 1..big_n {
                    let items: Vec<_> = table.iter().filter_map(|v| v.hk.get(&k)).collect();
                    match collect(&format!("H{k}"), items, &mut quality)? {
                        Some(c) => checks.push(c),
                        None => {
                            skipped.insert(format!("H{k}"), "flag spaces unavailable".into());
                        }
                    }
                }
            }
            let singles: [(&str, &str, PickVerdict); 6] = [
                ("maximal", "maximal", |v| v.maximal.as_ref()),
                ("transversality", "transversality", |v| v.transversality.as_ref()),
                ("collinearity", "collinearity", |v| v.collinearity.as_ref()),
                ("cyclic_order", "cyclic_order", |v| v.cyclic_order.as_ref()),
                ("hyperconvex", "hyperconvex_112", |v| v.hyper112.as_ref()),
                ("hyperconvex", "hyperconvex_abc", |v| v.hyper_all.as_ref()),
            ];
            for (group, name, get) in singles {
                if !config.wants(group) {
                    continue;
                }
                let items: Vec<_> = table.iter().filter_map(get).collect();
                match collect(name, items, &mut quality)? {
                    Some(c) => checks.push(c),
                    None => {
                        skipped.insert(name.to_string(), "not applicable to this representation".into());
                    }
                }
            }
            if config.wants("hyperconvex") && (1..big_n).all(|k| available(&flags, k)) && flags.len() >= big_n {
                let tuples = sample_tuples(flags.len(), config.triples, big_n, config.seed.wrapping_add(1))?;
                let results: Vec<Result<CheckResult>> = tuples
                    .par_iter()
                    .map(|t| {
                        let fs: Vec<&FlagSample> = t.iter().map(|&i| &flags[i]).collect();
                        check_hyperconvex(&fs)
                    })
                    .collect();
                if let Some(c) = collect("hyperconvex_lines", results.iter().collect(), &mut quality)? {
                    checks.push(c);
                }
            }
            if config.wants("equivalence") {
                checks.extend(implications(&table, big_n));
            }
            if !quality.is_empty() {
                let total: usize = quality.values().sum();
                let mut c = CheckResult::below("flag_quality", total as f64, 0.5);
                for (k, v) in &quality {
                    c = c.detail(k, *v as f64);
                }
                checks.push(c);
            }
            let scans_apply = exact && big_n.is_multiple_of(2) && big_n >= 4;
            if scans_apply {
                let frame = sym_power_frame(big_n)?;
                let source: &dyn FlagSource = &frame;
                let arcs = arc_pairs(&flags, config.scans);
                if config.wants("tangent") {
                    let mut tangents = Vec::new();
                    let mut halvings = Vec::new();
                    for &(tx, tz, ty) in &arcs {
                        tangents.push(tangent_check(source, tx, tz, ty, config.delta)?.0);
                        halvings.push(tangent_consistency(source, tx, tz, ty, config.delta)?);
                    }
                    let mut signs = Vec::new();
                    for &(tx, tz, _) in &arcs {
                        let arc = (tz - tx).rem_euclid(TAU);
                        let s: Vec<f64> = (1..8)
                            .map(|i| tangent_check(source, tx, tz, tx + arc * i as f64 / 8.0, config.delta).map(|r| r.1.sign))
                            .collect::<Result<_>>()?;
                        let constant = s.iter().all(|&v| v == s[0]);
                        signs.push(
                            CheckResult::above("tangent_sign_constant", if constant { 1.0 } else { 0.0 }, 0.5)
                                .with_witness(vec![tx, tz])
                                .detail("sign", s[0]),
                        );
                    }
                    checks.extend(CheckResult::aggregate("tangent", tangents));
                    checks.extend(CheckResult::aggregate("tangent_halving", halvings));
                    checks.extend(CheckResult::aggregate("tangent_sign_constant", signs));
                }
                if config.wants("limits") && big_n == 4 {
                    let mut by_name: BTreeMap<String, Vec<CheckResult>> = BTreeMap::new();
                    let mut psi = Vec::new();
                    for &(tx, tz, _) in &arcs {
                        for c in limit_checks(source, tx, tz, config.limit_distance)? {
                            by_name.entry(c.name.clone()).or_default().push(c);
                        }
                        psi.push(psi_variation(source, tx, tz, 1e-2)?);
                    }
                    for (name, list) in by_name {
                        checks.extend(CheckResult::aggregate(&name, list));
                    }
                    checks.extend(CheckResult::aggregate("psi_nonconstant", psi));
                }
            } else {
                for g in ["tangent", "limits"] {
                    if config.wants(g) {
                        skipped.insert(g.to_string(), "needs exact Veronese flags in Sp(4, R) or higher".into());
                    }
                }
            }
        }
    }
    sort_checks(&mut checks);
    let pass = checks.iter().all(|c| c.pass);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Report {
        version: 1,
        rep: RepInfo {
            kind: rep.kind(),
            dim: big_n,
            genus: rep.genus(),
            symplectic: rep.is_symplectic(),
            residuals: *rep.residuals(),
        },
        config: config.clone(),
        tolerances: tolerance::current(),
        pass,
        checks,
        gap_profiles,
        skipped,
        warnings,
        timestamp,
    })
}
