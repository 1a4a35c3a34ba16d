//! Seeded batch verification with machine-readable reports.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::axioms::{random_field, run_axiom_suite, AxiomReport};
use crate::disk_bundle::{
    bracket_identity_residual, failure_term, fiber_integral_residual, flow_commutation_residual, radial_factor,
    sample_points, seed_ring, BaseFunction, ChartPoint, GridSpec, LiftedFlow, ThetaProfile,
};
use crate::error::{Error, Result};
use crate::geom;
use crate::group_qm::{
    brooks_homogenized, brooks_qm, defect_over_pairs, pullback, pushforward, quasi_homomorphism_defect, GroupMap,
    GroupWord, PushforwardSamples, QuasiMorphism, Section, WordSampler,
};
use crate::hirzebruch::{classify, verify_class_identities, Classification};
use crate::reduction::{
    lift_displacer, parse_mu, parse_zeta, qs_from_qm, reduce_quasi_state, sampled_defect, scale_identity_check,
    stability_ratio, BaseSet, BundleQuasiState, CalabiOnE, EQuadrature, PointEvaluation, ReducedQuasiState, ZeroQm,
};
use crate::reeb_median::{bracket_inequality_report, MedianQuasiState};
use crate::sphere_field::{displacing_rotation, make_mesh, HamiltonianPath, Polynomial, ScalarField, SphereMesh};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Axioms,
    Poisson,
    Fiber,
    Commute,
    Reduce,
    Group,
    Hirzebruch,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Hirzebruch,
        Suite::Group,
        Suite::Axioms,
        Suite::Poisson,
        Suite::Fiber,
        Suite::Commute,
        Suite::Reduce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Poisson => "poisson",
            Suite::Fiber => "fiber",
            Suite::Commute => "commute",
            Suite::Reduce => "reduce",
            Suite::Group => "group",
            Suite::Hirzebruch => "hirzebruch",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a run depends on. Missing fields in a JSON config take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Sphere mesh level for the axiom, fiber, commute and reduce suites.
    pub level: u32,
    /// Mesh level paired with `grid` in the bracket-identity suite; the
    /// refined run uses level + 1 with the doubled grid.
    pub bundle_level: u32,
    pub grid: GridSpec,
    pub eps: f64,
    pub dt: f64,
    pub trials: usize,
    pub pairs: usize,
    /// Group-suite sample pairs.
    pub group_pairs: usize,
    pub k_max: i64,
    pub zeta: String,
    pub mu: String,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: Suite::All,
            level: 4,
            bundle_level: 5,
            grid: GridSpec::default(),
            eps: 0.1,
            dt: 1e-2,
            trials: 100,
            pairs: 10,
            group_pairs: 10_000,
            k_max: 10,
            zeta: "median".into(),
            mu: "calabi:0,0,1,0.2".into(),
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.pairs == 0 || self.group_pairs == 0 || self.k_max < 1 {
            return Err(Error::Config("all counts must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::EpsOutOfRange(self.eps));
        }
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::Config(format!("dt must lie in (0, 0.1], got {}", self.dt)));
        }
        if self.level > 7 || self.bundle_level > 7 {
            return Err(Error::Config("mesh levels above 7 are not supported".into()));
        }
        GridSpec::new(self.grid.u, self.grid.v, self.grid.r, self.grid.phi)?;
        Ok(())
    }
}

/// Direction of the comparison between value and tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One measured quantity with its acceptance threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Record {
    /// Passes when value ≤ tolerance.
    pub fn at_most(name: impl Into<String>, anchor: &str, value: f64, tolerance: f64) -> Self {
        Record {
            name: name.into(),
            anchor: anchor.to_string(),
            value,
            tolerance,
            bound: Bound::AtMost,
            pass: value <= tolerance,
        }
    }

    /// Passes when value > threshold.
    pub fn above(name: impl Into<String>, anchor: &str, value: f64, threshold: f64) -> Self {
        Record {
            name: name.into(),
            anchor: anchor.to_string(),
            value,
            tolerance: threshold,
            bound: Bound::AtLeast,
            pass: value > threshold,
        }
    }

    /// Recorded without a threshold; always passes when finite.
    pub fn info(name: impl Into<String>, anchor: &str, value: f64) -> Self {
        Record {
            pass: value.is_finite(),
            ..Record::at_most(name, anchor, value, f64::MAX)
        }
    }

    /// Passes when the condition holds; value is 0 on success and 1 otherwise.
    pub fn check(name: impl Into<String>, anchor: &str, ok: bool) -> Self {
        Record::at_most(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub timestamp_unix: u64,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl EnvStamp {
    pub fn now() -> Self {
        EnvStamp {
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub suite: Suite,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub env: EnvStamp,
    pub pass: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the configured suite. Deterministic for a fixed config apart from
/// the timestamp.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let suites: Vec<Suite> = match config.suite {
        Suite::All => Suite::ALL.to_vec(),
        s => vec![s],
    };
    let mut records = Vec::new();
    for s in suites {
        records.extend(run_suite(s, config)?);
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        suite: config.suite,
        seed: config.seed,
        config: config.clone(),
        env: EnvStamp::now(),
        pass: records.iter().all(|r| r.pass),
        records,
    })
}

pub fn run_suite(suite: Suite, c: &ExperimentConfig) -> Result<Vec<Record>> {
    match suite {
        Suite::Hirzebruch => hirzebruch_suite(c.k_max),
        Suite::Group => group_suite(c),
        Suite::Axioms => axioms_suite(c),
        Suite::Poisson => poisson_suite(c),
        Suite::Fiber => fiber_suite(c),
        Suite::Commute => commute_suite(c),
        Suite::Reduce => reduce_suite(c),
        Suite::All => Err(Error::Config("`all` is not a single suite".into())),
    }
}

/// Distinct sub-seeds for independent parts of a suite.
fn sub_seed(seed: u64, part: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(part.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}

pub fn hirzebruch_suite(k_max: i64) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        let l = k / 2;
        let got = classify(k)?;
        let mismatch = match got {
            Classification::Product { areas, .. } => (areas[0] - 1).abs() + (areas[1] - 3 * l).abs(),
            Classification::BlowUp {
                line_area,
                exceptional_area,
                ..
            } => (line_area - (3 * l + 2)).abs() + (exceptional_area - (3 * l + 1)).abs(),
        };
        let kind_ok = matches!(got, Classification::Product { .. }) == (k % 2 == 0);
        out.push(Record::at_most(
            format!("hirzebruch.k{k}.areas"),
            "hirzebruch/areas",
            (mismatch + i64::from(!kind_ok)) as f64,
            0.0,
        ));
        let ok = verify_class_identities(k).is_ok();
        out.push(Record::check(format!("hirzebruch.k{k}.intersections"), "hirzebruch/intersections", ok));
    }
    Ok(out)
}

fn word(s: &str) -> GroupWord {
    GroupWord::parse(s).expect("fixed word")
}

/// g ↦ g with every letter a doubled; a map that is not a homomorphism.
fn square_first() -> GroupMap {
    GroupMap::from_fn("square-a", false, |g| {
        let mut out = GroupWord::identity();
        for l in g.letters() {
            let one = GroupWord::generator(l.generator, l.sign);
            out = out.mul(&one);
            if l.generator == 0 {
                out = out.mul(&one);
            }
        }
        out
    })
}

/// Two sections of the total-exponent map F₂ → ℤ = ⟨a⟩.
fn power_sections() -> [Section; 2] {
    let s1: Section = Arc::new(|h: &GroupWord| GroupWord::generator(0, 1).pow(h.total_exponent()));
    let s2: Section = Arc::new(|h: &GroupWord| {
        let n = h.total_exponent();
        let mut out = word("ab").pow(n.div_euclid(2));
        if n.rem_euclid(2) == 1 {
            out = out.mul(&GroupWord::generator(0, 1));
        }
        out
    });
    [s1, s2]
}

pub fn group_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let mu = brooks_qm(&word("ab"))?;
    let maps = [
        GroupMap::identity(),
        GroupMap::conjugation(word("bAb")),
        GroupMap::substitution(vec![word("ab"), word("B")]),
        square_first(),
    ];
    let per_map = c.group_pairs.div_ceil(maps.len());
    let mut worst: f64 = 0.0;
    for (i, phi) in maps.iter().enumerate() {
        let mut s = WordSampler::new(2, 12, sub_seed(c.seed, 10 + i as u64));
        let pairs: Vec<_> = (0..per_map).map(|_| s.sample_pair()).collect();
        let d_phi = quasi_homomorphism_defect(phi, &mu, pairs.iter().map(|(a, b)| (a, b)));
        let pb = pullback(phi, &mu, d_phi)?;
        let bound = pb.defect_bound().unwrap_or(f64::INFINITY);
        let sampled = defect_over_pairs(&pb, pairs.iter().map(|(a, b)| (a, b)));
        worst = worst.max(sampled / bound.max(f64::MIN_POSITIVE));
        worst = worst.max(if sampled > bound { f64::INFINITY } else { 0.0 });
    }
    let mut out = vec![Record::at_most("group.pullback.defect_over_bound", "group/pullback", worst, 1.0)];

    let mut s = WordSampler::new(2, 10, sub_seed(c.seed, 20));
    let mut cauchy: f64 = 0.0;
    for qm in [mu.clone(), brooks_qm(&word("abA"))?] {
        let dq = qm.defect_bound().unwrap_or(0.0);
        for _ in 0..c.trials.max(100) {
            let g = s.sample();
            for n in [1i64, 2, 5, 16] {
                let a = qm.evaluate(&g.pow(n)) / n as f64;
                let b = qm.evaluate(&g.pow(2 * n)) / (2 * n) as f64;
                cauchy = cauchy.max((a - b).abs() * n as f64 / dq);
            }
        }
    }
    out.push(Record::at_most("group.homogenization.cauchy_over_bound", "group/homogenization", cauchy, 1.0));

    let tests: Vec<_> = (-4..=4).map(|n| GroupWord::generator(0, 1).pow(n)).collect();
    let kernel = vec![word("aB"), word("abAB"), word("aaBB")];
    let rejected = pushforward(
        &GroupMap::abelianize_total(),
        &power_sections(),
        &brooks_homogenized(&word("ab"))?,
        &PushforwardSamples {
            kernel: &kernel[1..2],
            kernel_bound: 1.0,
            test_points: &tests,
        },
    );
    out.push(Record::check(
        "group.pushforward.rejects_brooks",
        "group/pushforward",
        matches!(rejected, Err(Error::NotWellDefined { .. })),
    ));
    let accepted = pushforward(
        &GroupMap::abelianize_total(),
        &power_sections(),
        &QuasiMorphism::total_exponent(),
        &PushforwardSamples {
            kernel: &kernel,
            kernel_bound: 0.0,
            test_points: &tests,
        },
    );
    let ok = accepted.is_ok_and(|p| (-4..=4).zip(&tests).all(|(n, h)| p.evaluate(h) == n as f64));
    out.push(Record::check("group.pushforward.accepts_homomorphism", "group/pushforward", ok));
    Ok(out)
}

fn axiom_records(prefix: &str, rep: &AxiomReport) -> Vec<Record> {
    let a = "quasi-state/axioms";
    vec![
        Record::at_most(format!("{prefix}.normalization"), a, rep.normalization_error, 0.0),
        Record::at_most(format!("{prefix}.monotonicity_violations"), a, rep.monotonicity_violations as f64, 0.0),
        Record::at_most(format!("{prefix}.quasi_linearity"), a, rep.quasi_linearity_max, 1e-2),
        Record::at_most(format!("{prefix}.lipschitz_violations"), a, rep.lipschitz_violations as f64, 0.0),
        Record::at_most(format!("{prefix}.vanishing"), a, rep.vanishing_max, 0.0),
    ]
}

/// Pairs of functions of one random field, which Poisson-commute.
fn commuting_pairs(mesh: &Arc<SphereMesh>, count: usize, seed: u64) -> Result<Vec<(ScalarField, ScalarField)>> {
    (0..count as u64)
        .map(|i| {
            let f = random_field(mesh, sub_seed(seed, i))?;
            Ok((f.map(|s| 0.5 * s * s)?, f.map(|s| (PI * s).sin() / PI)?))
        })
        .collect()
}

fn random_pairs(mesh: &Arc<SphereMesh>, count: usize, seed: u64) -> Result<Vec<(ScalarField, ScalarField)>> {
    (0..count as u64)
        .map(|i| {
            let h = random_field(mesh, sub_seed(seed, 2 * i))?;
            let k = random_field(mesh, sub_seed(seed, 2 * i + 1))?;
            Ok((h, k))
        })
        .collect()
}

/// Largest bracket ratio Π/√‖{H,K}‖ over random pairs at mesh levels
/// `level` and `level + 1`, from the same polynomials.
pub fn bracket_ratio_levels(level: u32, count: usize, seed: u64) -> Result<(f64, f64)> {
    let coarse = make_mesh(level);
    let fine = make_mesh(level + 1);
    let a = bracket_inequality_report(&random_pairs(&coarse, count, seed)?, &MedianQuasiState)?.max_ratio;
    let b = bracket_inequality_report(&random_pairs(&fine, count, seed)?, &MedianQuasiState)?.max_ratio;
    Ok((a, b))
}

pub fn axioms_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let mesh = make_mesh(c.level);
    let rep = run_axiom_suite(&MedianQuasiState, &mesh, c.trials, sub_seed(c.seed, 1))?;
    let mut out = axiom_records("axioms", &rep);
    let comm = bracket_inequality_report(&commuting_pairs(&mesh, c.pairs, sub_seed(c.seed, 2))?, &MedianQuasiState)?;
    let pi = comm.rows.iter().map(|r| r.pi).fold(0.0, f64::max);
    out.push(Record::at_most("axioms.bracket.commuting_pi", "quasi-state/bracket-inequality", pi, 1e-2));
    let (a, b) = bracket_ratio_levels(c.level, c.trials, sub_seed(c.seed, 3))?;
    let a_name = format!("axioms.bracket.max_ratio_level{}", c.level);
    out.push(Record::info(a_name, "quasi-state/bracket-inequality", a));
    let b_name = format!("axioms.bracket.max_ratio_level{}", c.level + 1);
    out.push(Record::info(b_name, "quasi-state/bracket-inequality", b));
    out.push(Record::at_most(
        "axioms.bracket.ratio_drift",
        "quasi-state/bracket-inequality",
        (b / a - 1.0).abs(),
        0.25,
    ));
    Ok(out)
}

fn poly_base(seed: u64) -> BaseFunction {
    let p = Polynomial::random(3, seed);
    BaseFunction::smooth(move |x| p.eval(x))
}

/// Worst relative residual of the first bracket identity and of the second
/// over `pairs` random cubic pairs.
pub fn poisson_residuals(
    c: &ExperimentConfig,
    mesh: &Arc<SphereMesh>,
    grid: GridSpec,
) -> Result<(f64, f64)> {
    let theta = ThetaProfile::new(c.eps)?;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for i in 0..c.pairs as u64 {
        let h = poly_base(sub_seed(c.seed, 100 + 2 * i));
        let k = poly_base(sub_seed(c.seed, 101 + 2 * i));
        let pts = sample_points(20, 1.0 - c.eps, sub_seed(c.seed, 300 + i));
        let rep = bracket_identity_residual(&h, &k, theta, mesh, &pts, grid.steps())?;
        first = first.max(rep.max_rel_first);
        second = second.max(rep.max_rel_second);
    }
    Ok((first, second))
}

pub fn poisson_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let a = "bundle/bracket-identity";
    let (coarse, second) = poisson_residuals(c, &make_mesh(c.bundle_level), c.grid)?;
    let (fine, _) = poisson_residuals(c, &make_mesh(c.bundle_level + 1), c.grid.doubled())?;
    Ok(vec![
        Record::at_most("poisson.relative_residual", a, coarse, 2e-2),
        Record::at_most("poisson.refinement_ratio", a, fine / coarse, 0.6),
        Record::at_most("poisson.second_identity", a, second, 1e-10),
    ])
}

pub fn fiber_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let a = "bundle/fiber-integral";
    let mesh = make_mesh(c.level);
    let theta = ThetaProfile::new(c.eps)?;
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        let h = random_field(&mesh, sub_seed(c.seed, 400 + i))?;
        worst = worst.max(fiber_integral_residual(&h, theta, c.grid)?.residual);
    }
    Ok(vec![
        Record::at_most(
            "fiber.radial_factor_limit",
            a,
            (radial_factor(ThetaProfile::limit()) - 1.0 / 3.0).abs(),
            1e-6,
        ),
        Record::at_most("fiber.identity_residual", a, worst, 1e-2),
    ])
}

/// Largest distance between lifted trajectories of the height function
/// projected to the base and the exact rotation by 4πt.
pub fn rotation_oracle_distance(mesh: &Arc<SphereMesh>, theta: ThetaProfile, seeds: &[ChartPoint]) -> Result<f64> {
    let path = HamiltonianPath::autonomous_fn(mesh, |p| p[2])?;
    let flow = LiftedFlow::new(&path, theta)?;
    let steps = 1000;
    let mut worst: f64 = 0.0;
    for s in seeds {
        let mut e = *s;
        let mut hint = 0;
        let p0 = s.base();
        for i in 0..steps {
            let t = i as f64 / steps as f64;
            e = flow.rk4_step(&e, t, 1.0 / steps as f64, &mut hint)?;
            let (sn, cs) = (4.0 * PI * (t + 1.0 / steps as f64)).sin_cos();
            let want = [cs * p0[0] + sn * p0[1], -sn * p0[0] + cs * p0[1], p0[2]];
            worst = worst.max(geom::angle(e.base(), want));
        }
    }
    Ok(worst)
}

pub fn commute_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let a = "bundle/flow-projection";
    let mesh = make_mesh(c.level);
    let theta = ThetaProfile::new(c.eps)?;
    let core = theta.core_radius();
    let mut seeds = seed_ring(6, 0.3);
    seeds.extend(seed_ring(6, core));
    let rot = rotation_oracle_distance(&mesh, theta, &seeds)?;
    let f = random_field(&mesh, sub_seed(c.seed, 500))?.scale(0.1);
    let path = HamiltonianPath::autonomous(&f);
    let coarse = flow_commutation_residual(&path, theta, &seeds, c.dt)?;
    let fine = flow_commutation_residual(&path, theta, &seeds, 0.5 * c.dt)?;
    let g = HamiltonianPath::autonomous(&random_field(&mesh, sub_seed(c.seed, 501))?.scale(0.1));
    let fail = failure_term(&path, &g, theta, &seed_ring(4, 0.5), c.dt)?;
    let ratio = if coarse.max_distance > 0.0 {
        fine.max_distance / coarse.max_distance
    } else {
        0.0
    };
    Ok(vec![
        Record::at_most("commute.rotation_oracle", a, rot, 1e-4),
        Record::at_most("commute.random_discrepancy", a, coarse.max_distance, 5e-3),
        Record::at_most("commute.refinement_ratio", a, ratio, 0.6),
        Record::at_most("commute.r_drift", a, coarse.max_r_drift.max(fine.max_r_drift), 1e-6),
        Record::at_most("commute.failure_term", a, fail, 1e-6),
    ])
}

pub fn reduce_suite(c: &ExperimentConfig) -> Result<Vec<Record>> {
    let a = "reduction";
    let mesh = make_mesh(c.level);
    let mut out = Vec::new();

    let zeta_pt = PointEvaluation {
        point: ChartPoint::over(geom::normalize([0.3, -0.5, 0.8]), 0.0, 0.0),
    };
    let f = random_field(&mesh, sub_seed(c.seed, 600))?;
    let want = f.interpolate(zeta_pt.point.base())?;
    let mut worst: f64 = 0.0;
    for eps in [0.05, c.eps, 0.45] {
        let got = reduce_quasi_state(&zeta_pt, ThetaProfile::new(eps)?, &f)?;
        worst = worst.max((got - want).abs());
    }
    out.push(Record::at_most("reduce.point_evaluation", a, worst, 1e-10));

    let theta = ThetaProfile::new(c.eps)?;
    let zeta: Arc<dyn BundleQuasiState> = Arc::from(parse_zeta(&c.zeta, &mesh, c.grid)?);
    let reduced = ReducedQuasiState::new(zeta, theta)?;
    out.push(Record::above("reduce.hypothesis.profile_value", a, reduced.normalizer(), 0.0));
    let rep = run_axiom_suite(&reduced, &mesh, c.trials, sub_seed(c.seed, 601))?;
    out.extend(axiom_records("reduce.axioms", &rep));

    let mu = parse_mu(&c.mu, &mesh)?;
    let h = random_field(&mesh, sub_seed(c.seed, 602))?.normalized();
    let lambdas: [(&str, fn(f64) -> f64); 3] = [
        ("one", |_| 1.0),
        ("2t", |t| 2.0 * t),
        ("sin2pit", |t| (2.0 * PI * t).sin()),
    ];
    for (name, lambda) in lambdas {
        let rep = scale_identity_check(mu.as_ref(), lambda, &h, 64)?;
        out.push(Record::at_most(format!("reduce.scale.{name}"), a, rep.residual, 1e-6));
    }

    let pairs: Vec<_> = (0..c.pairs as u64)
        .map(|i| {
            let f = random_field(&mesh, sub_seed(c.seed, 700 + 2 * i))?;
            let g = random_field(&mesh, sub_seed(c.seed, 701 + 2 * i))?;
            Ok((HamiltonianPath::autonomous(&f), HamiltonianPath::autonomous(&g)))
        })
        .collect::<Result<_>>()?;
    out.push(Record::at_most("reduce.stability_ratio", a, stability_ratio(mu.as_ref(), &pairs)?, 1.0));

    let mut violations = 0usize;
    for i in 0..c.trials as u64 {
        let h = random_field(&mesh, sub_seed(c.seed, 800 + i))?;
        let bump = random_field(&mesh, sub_seed(c.seed, 900 + i))?.map(|s| s.abs())?;
        if qs_from_qm(mu.as_ref(), &h, 1.0)? > qs_from_qm(mu.as_ref(), &h.add(&bump)?, 1.0)? + 1e-12 {
            violations += 1;
        }
    }
    out.push(Record::at_most("reduce.qs_from_qm.monotonicity_violations", a, violations as f64, 0.0));
    let zero = qs_from_qm(&ZeroQm, &f, 1.0)?;
    out.push(Record::at_most("reduce.qs_from_qm.zero_is_mean", a, (zero - f.integrate()).abs(), 1e-12));

    let small: Vec<_> = pairs
        .iter()
        .take(3)
        .map(|(f, g)| {
            let n = |p: &HamiltonianPath| HamiltonianPath::autonomous(&p.slices()[0].normalized().scale(0.1));
            (n(f), n(g))
        })
        .collect();
    let defect = sampled_defect(&CalabiOnE::collar(c.eps, EQuadrature::Factored), c.eps, &small, c.dt)?;
    out.push(Record::at_most(
        "reduce.sampled_defect",
        a,
        defect.max_defect,
        defect.bound.unwrap_or(0.0) + 1e-9,
    ));

    let center = [0.0, 0.0, 1.0];
    let g = displacing_rotation(&mesh, center, 0.2)?;
    let sep = match lift_displacer(&g, BaseSet::Cap { center, area: 0.2 }, 0.2, 0.5, 24, c.dt) {
        Ok((_, cert)) => cert.separation,
        Err(Error::Certification(s)) => s,
        Err(e) => return Err(e),
    };
    out.push(Record::above("reduce.displacement.separation", a, sep, 0.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"suite": "fiber", "eps": 0.2}"#).unwrap();
        assert_eq!(c.suite, Suite::Fiber);
        assert_eq!(c.level, 4);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
        let bad = ExperimentConfig { eps: 0.7, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hirzebruch_suite_passes() {
        let recs = hirzebruch_suite(10).unwrap();
        assert_eq!(recs.len(), 20);
        assert!(recs.iter().all(|r| r.pass));
    }

    #[test]
    fn group_suite_is_deterministic() {
        let c = ExperimentConfig {
            group_pairs: 400,
            trials: 20,
            ..Default::default()
        };
        let a = group_suite(&c).unwrap();
        assert_eq!(a, group_suite(&c).unwrap());
        assert!(a.iter().all(|r| r.pass), "{a:?}");
    }
}
