//! Suite configuration, check runners and the JSON report.
//!
//! Every check is deterministic given the config (all randomness flows from
//! `config.seed`), so two runs of the same suite produce byte-identical
//! reports unless timings are requested.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::berezin::{berezin_integrate, quadrature, BerezinDomain};
use crate::deformations::{self, DecompositionParams, DecompositionSummary};
use crate::error::{Error, Result};
use crate::fixtures::{self, FIELD_GENERATORS, SUSY_GENERATOR};
use crate::grassmann::GrassmannNumber;
use crate::grid::{Grid, GridField};
use crate::sigma2d::{self, ActionCoefficients, ComponentFields, FlowParams, GravitinoMode, MapField, Target};
use crate::spin_surface::{GravitinoField, SpinorField, SurfaceGeometry};
use crate::superdomain::{Embedding, SuperFunction};
use crate::toy_model::{self, ToyConventions, ToyFields};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SUPERGEOM_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSizes {
    pub berezin: usize,
    pub toy: usize,
    pub reduction: usize,
    pub susy: usize,
    pub currents: usize,
    pub flow: usize,
    pub decompose: Vec<usize>,
}

impl Default for GridSizes {
    fn default() -> Self {
        Self {
            berezin: 32,
            toy: 64,
            reduction: 64,
            susy: 10,
            currents: 16,
            flow: 16,
            decompose: vec![32, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureCounts {
    pub algebra: usize,
    pub berezin: usize,
    pub toy: usize,
    pub reduction: usize,
    pub susy: usize,
    pub currents: usize,
    pub decompose: usize,
}

impl Default for FixtureCounts {
    fn default() -> Self {
        Self {
            algebra: 1000,
            berezin: 100,
            toy: 100,
            reduction: 50,
            susy: 3,
            currents: 3,
            decompose: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub exact: f64,
    pub berezin: f64,
    pub toy: f64,
    pub reduction: f64,
    pub susy: f64,
    pub calibration: f64,
    pub classical: f64,
    pub conformal: f64,
    pub energy_momentum_relative: f64,
    pub holomorphic: f64,
    pub flow_energy: f64,
    pub decomposition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: 0.0,
            berezin: 1e-12,
            toy: 1e-10,
            reduction: 1e-8,
            susy: 1e-8,
            calibration: 1e-6,
            classical: 1e-10,
            conformal: 1e-8,
            energy_momentum_relative: 1e-6,
            holomorphic: 1e-8,
            flow_energy: 1e-6,
            decomposition: 1e-8,
        }
    }
}

impl Tolerances {
    fn all(&self) -> [f64; 12] {
        [
            self.exact,
            self.berezin,
            self.toy,
            self.reduction,
            self.susy,
            self.calibration,
            self.classical,
            self.conformal,
            self.energy_momentum_relative,
            self.holomorphic,
            self.flow_energy,
            self.decomposition,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSettings {
    pub steps: usize,
    pub dt: f64,
    pub tol: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        // sup norm of the tension; the energy error is quadratic in it
        Self {
            steps: 5000,
            dt: 1e-3,
            tol: 1e-5,
        }
    }
}

/// Frozen conventions written by `calibrate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    pub action: ActionCoefficients,
    pub toy_fermion_sign: f64,
    pub toy_superfield_coefficient: f64,
}

impl Conventions {
    pub fn toy(&self) -> ToyConventions {
        ToyConventions {
            fermion_sign: self.toy_fermion_sign,
            superfield_coefficient: self.toy_superfield_coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub generators: usize,
    pub grids: GridSizes,
    pub fixtures: FixtureCounts,
    pub tolerances: Tolerances,
    pub flow: FlowSettings,
    /// Absent until `calibrate` has run; checks then calibrate in process.
    pub conventions: Option<Conventions>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            generators: fixtures::DEFAULT_GENERATORS,
            grids: GridSizes::default(),
            fixtures: FixtureCounts::default(),
            tolerances: Tolerances::default(),
            flow: FlowSettings::default(),
            conventions: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generators != fixtures::DEFAULT_GENERATORS {
            return Err(Error::Config(format!(
                "the suites use {} generators (fields, SUSY parameter, probe); got {}",
                fixtures::DEFAULT_GENERATORS,
                self.generators
            )));
        }
        if self.tolerances.all().iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("tolerances must be finite and non-negative".into()));
        }
        let g = &self.grids;
        if [g.berezin, g.toy, g.reduction, g.susy, g.currents, g.flow]
            .iter()
            .chain(&g.decompose)
            .any(|&n| n < 8)
        {
            return Err(Error::Config("grids need at least 8 points per axis".into()));
        }
        if !(self.flow.dt > 0.0 && self.flow.dt.is_finite()) {
            return Err(Error::Config("flow dt must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    ClosedForm,
    Derived,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            // NaN never passes
            passed: residual <= tolerance,
            provenance,
            runtime_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub seed: u64,
    pub config_hash: String,
    pub conventions: Conventions,
    pub suite: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: ReportHeader,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Toy,
    Berezin,
    Reduction,
    Susy2d,
    Currents,
    Flow,
    Decompose,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 9] = [
        "algebra",
        "toy",
        "berezin",
        "reduction",
        "susy2d",
        "currents",
        "flow",
        "decompose",
        "all",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Toy => "toy",
            Suite::Berezin => "berezin",
            Suite::Reduction => "reduction",
            Suite::Susy2d => "susy2d",
            Suite::Currents => "currents",
            Suite::Flow => "flow",
            Suite::Decompose => "decompose",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Algebra,
                Suite::Berezin,
                Suite::Toy,
                Suite::Reduction,
                Suite::Susy2d,
                Suite::Currents,
                Suite::Flow,
                Suite::Decompose,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "algebra" => Suite::Algebra,
            "toy" => Suite::Toy,
            "berezin" => Suite::Berezin,
            "reduction" => Suite::Reduction,
            "susy2d" => Suite::Susy2d,
            "currents" => Suite::Currents,
            "flow" => Suite::Flow,
            "decompose" => Suite::Decompose,
            "all" => Suite::All,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

/// Calibration battery for the 2D model: χ = 0 fixtures plus fixtures
/// whose gravitino lives on one generator (all χ-linear terms).
pub fn calibration_battery(cfg: &SuiteConfig) -> Vec<sigma2d::SusyFixture> {
    let g = Grid::torus(cfg.grids.susy);
    let mut b = sigma2d::susy_battery(cfg.seed, &g, cfg.fixtures.susy, GravitinoMode::Zero);
    b.extend(sigma2d::susy_battery(
        cfg.seed.wrapping_add(1),
        &g,
        cfg.fixtures.susy,
        GravitinoMode::Linear,
    ));
    b
}

fn toy_battery(cfg: &SuiteConfig, count: usize, seed: u64) -> Vec<(ToyFields, GrassmannNumber)> {
    let g = Grid::circle(cfg.grids.toy);
    let n = cfg.generators;
    let mut r = fixtures::rng(seed);
    (0..count)
        .map(|_| {
            let phi = fixtures::trig_even(&mut r, &g, n, 5, FIELD_GENERATORS);
            let psi = fixtures::trig_odd(&mut r, &g, n, 5, FIELD_GENERATORS);
            let q = GrassmannNumber::generator(n, SUSY_GENERATOR).expect("SUSY generator in range");
            (ToyFields::new(phi, psi).expect("typed fixture"), q)
        })
        .collect()
}

/// Calibrate both models on their default batteries.
pub fn calibrate(cfg: &SuiteConfig) -> Result<Conventions> {
    let toy = toy_model::calibrate_fermion_sign(&toy_battery(cfg, 5, cfg.seed), cfg.tolerances.toy.max(1e-10))?;
    let action = sigma2d::calibrate_conventions(&calibration_battery(cfg), cfg.tolerances.calibration)?;
    Ok(Conventions {
        action,
        toy_fermion_sign: toy.fermion_sign,
        toy_superfield_coefficient: toy.superfield_coefficient,
    })
}

/// Conventions from the config, or calibrated now when the block is absent.
pub fn active_conventions(cfg: &SuiteConfig) -> Result<Conventions> {
    match cfg.conventions {
        Some(c) => Ok(c),
        None => calibrate(cfg),
    }
}

/// Run a suite and assemble its report.
pub fn run_suite(cfg: &SuiteConfig, suite: Suite, timings: bool) -> Result<Report> {
    cfg.validate()?;
    let conv = active_conventions(cfg)?;
    let mut checks = Vec::new();
    for s in suite.members() {
        let start = Instant::now();
        let mut part = match s {
            Suite::Algebra => algebra_checks(cfg)?,
            Suite::Berezin => berezin_checks(cfg)?,
            Suite::Toy => toy_checks(cfg, &conv)?,
            Suite::Reduction => reduction_checks(cfg, &conv)?,
            Suite::Susy2d => susy_checks(cfg, &conv)?,
            Suite::Currents => current_checks(cfg, &conv)?,
            Suite::Flow => flow_checks(cfg)?,
            Suite::Decompose => decompose_checks(cfg, &conv)?,
            Suite::All => unreachable!("expanded by members()"),
        };
        if timings {
            let ms = start.elapsed().as_millis() as u64;
            part.iter_mut().for_each(|c| c.runtime_ms = Some(ms));
        }
        checks.extend(part);
    }
    Ok(Report {
        header: ReportHeader {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            conventions: conv,
            suite: suite.name().to_string(),
        },
        checks,
    })
}

pub fn algebra_checks(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let n = cfg.generators;
    let tol = cfg.tolerances.exact;
    let mut r = fixtures::rng(cfg.seed);
    let mut assoc: f64 = 0.0;
    let mut comm: f64 = 0.0;
    let mut nil: f64 = 0.0;
    for i in 0..cfg.fixtures.algebra {
        let a = fixtures::random_element(&mut r, n);
        let b = fixtures::random_element(&mut r, n);
        let c = fixtures::random_element(&mut r, n);
        assoc = assoc.max((&(&a * &b) * &c - &a * &(&b * &c)).max_abs());
        let (pa, pb) = (i % 2 == 1, (i / 2) % 2 == 1);
        let x = fixtures::random_homogeneous(&mut r, n, pa);
        let y = fixtures::random_homogeneous(&mut r, n, pb);
        let sign = if pa && pb { -1.0 } else { 1.0 };
        comm = comm.max((&x * &y - (&y * &x).scale(sign)).max_abs());
        let o = fixtures::random_homogeneous(&mut r, n, true);
        let soul = a.soul();
        // odd squares vanish and any soul is nilpotent of order ≤ N + 1
        let mut power = GrassmannNumber::one(n);
        for _ in 0..=n {
            power = &power * &soul;
        }
        nil = nil.max((&o * &o).max_abs()).max(power.max_abs());
    }
    Ok(vec![
        CheckReport::new("algebra.associativity", assoc, tol, Provenance::Exact),
        CheckReport::new("algebra.graded_commutativity", comm, tol, Provenance::Exact),
        CheckReport::new("algebra.nilpotency", nil, tol, Provenance::Exact),
    ])
}

pub fn berezin_checks(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let n = cfg.generators;
    let g = Grid::circle(cfg.grids.berezin);
    let dom = BerezinDomain::new(g.clone(), 1);
    let mut r = fixtures::rng(cfg.seed);
    let mut worst: f64 = 0.0;
    let mut adapted: f64 = 0.0;
    for i in 0..cfg.fixtures.berezin {
        let f0 = fixtures::trig_even(&mut r, &g, n, 4, FIELD_GENERATORS);
        let f1 = fixtures::trig_odd(&mut r, &g, n, 4, FIELD_GENERATORS);
        let f = SuperFunction::from_terms(&g, 1, n, [(vec![], f0), (vec![0], f1.clone())])?;
        let got = berezin_integrate(&f, &dom)?;
        worst = worst.max((&got - &quadrature(&f1)).max_abs());
        if i < 10 {
            let xi = fixtures::trig_odd(&mut r, &g, n, 2, SUSY_GENERATOR..SUSY_GENERATOR + 1);
            let emb = BerezinDomain::new(g.clone(), 1).with_embedding(Embedding::new(vec![xi])?);
            adapted = adapted.max((&berezin_integrate(&f, &emb)? - &got).max_abs());
        }
    }
    Ok(vec![
        CheckReport::new("berezin.reduction", worst, cfg.tolerances.berezin, Provenance::Derived),
        CheckReport::new(
            "berezin.adapted_embedding",
            adapted,
            cfg.tolerances.berezin,
            Provenance::Derived,
        ),
    ])
}

pub fn toy_checks(cfg: &SuiteConfig, conv: &Conventions) -> Result<Vec<CheckReport>> {
    let n = cfg.generators;
    let tc = conv.toy();
    let tol = cfg.tolerances.toy;
    let battery = toy_battery(cfg, cfg.fixtures.toy, cfg.seed);
    let mut equiv: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for (f, q) in &battery {
        let a = toy_model::toy_action_component_with(f, &tc)?;
        let b = toy_model::toy_action_superfield_with(&f.superfield(), &tc)?;
        equiv = equiv.max((&a - &b).max_abs());
        inv = inv.max(toy_model::toy_invariance_residual_with(f, q, &tc)?);
    }

    let g = Grid::circle(cfg.grids.toy);
    let xi = |i| GrassmannNumber::generator(n, i);
    let phi = GridField::from_fn(&g, n, |x| x[0].sin());
    let psi = &GridField::constant_times(&g, &xi(0)?, |x| x[0].cos())
        + &GridField::constant_times(&g, &xi(1)?, |x| x[0].sin());
    let closed = toy_model::toy_action_component_with(&ToyFields::new(phi, psi)?, &tc)?;
    // reference value π/2 + πξ₀ξ₁; the calibrated fermion sign gives π/2 − πξ₀ξ₁
    let expected = &GrassmannNumber::scalar(n, PI / 2.0) + &(&xi(0)? * &xi(1)?).scale(PI);
    let closed_res = (&closed - &expected).max_abs();

    let mut emb: f64 = 0.0;
    for (k, (f, _)) in battery.iter().take(10).enumerate() {
        let phi = f.superfield();
        let base = toy_model::toy_action_component(f)?;
        let shifted = toy_model::toy_action_along_embedding(&phi, &xi(SUSY_GENERATOR)?.scale(0.3 + 0.1 * k as f64))?;
        emb = emb.max((&base - &shifted).max_abs());
    }
    Ok(vec![
        CheckReport::new("toy.equivalence", equiv, tol, Provenance::Derived),
        CheckReport::new("toy.closed_form", closed_res, tol, Provenance::ClosedForm),
        CheckReport::new("toy.invariance", inv, tol, Provenance::Derived),
        CheckReport::new("toy.embedding_independence", emb, tol, Provenance::Derived),
    ])
}

pub fn reduction_checks(cfg: &SuiteConfig, conv: &Conventions) -> Result<Vec<CheckReport>> {
    let n = cfg.generators;
    let g = Grid::torus(cfg.grids.reduction);
    let geom = SurfaceGeometry::flat(&g, n)?;
    let chi = GravitinoField::zeros(&g, n);
    let t = Target::Flat { dim: 2 };
    let mut r = fixtures::rng(cfg.seed);
    let mut worst: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    for _ in 0..cfg.fixtures.reduction {
        let fields = sigma2d::random_component_fields(&mut r, &g, n, 2, 3, FIELD_GENERATORS, true);
        let sf = sigma2d::superfield_of(&fields)?;
        roundtrip = roundtrip.max(sigma2d::component_fields_of(&sf)?.max_abs_diff(&fields));
        let a = sigma2d::action_superfield_flat(&sf)?;
        let b = sigma2d::action_component(&geom, &chi, &fields, &t, &conv.action)?;
        worst = worst.max((&a - &b).max_abs());
    }
    Ok(vec![
        CheckReport::new(
            "reduction.superfield_component",
            worst,
            cfg.tolerances.reduction,
            Provenance::Derived,
        ),
        CheckReport::new(
            "reduction.component_roundtrip",
            roundtrip,
            cfg.tolerances.reduction,
            Provenance::Derived,
        ),
    ])
}

fn battery_residual(battery: &[sigma2d::SusyFixture], c: &ActionCoefficients) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for fx in battery {
        worst = worst.max(sigma2d::susy_invariance_residual(&fx.config, &fx.q, c)?);
    }
    Ok(worst)
}

pub fn susy_checks(cfg: &SuiteConfig, conv: &Conventions) -> Result<Vec<CheckReport>> {
    let g = Grid::torus(cfg.grids.susy);
    let tol = cfg.tolerances.susy;
    let cal = battery_residual(&calibration_battery(cfg), &conv.action)?;
    let seed = cfg.seed.wrapping_add(100);
    let count = cfg.fixtures.susy;
    let zero = battery_residual(
        &sigma2d::susy_battery(seed, &g, count, GravitinoMode::Zero),
        &conv.action,
    )?;
    let linear = battery_residual(
        &sigma2d::susy_battery(seed + 1, &g, count, GravitinoMode::Linear),
        &conv.action,
    )?;
    let generic = battery_residual(
        &sigma2d::susy_battery(seed + 2, &g, count, GravitinoMode::Generic),
        &conv.action,
    )?;
    Ok(vec![
        CheckReport::new(
            "susy2d.calibration",
            cal,
            cfg.tolerances.calibration,
            Provenance::Derived,
        ),
        CheckReport::new("susy2d.invariance_chi_zero", zero, tol, Provenance::Derived),
        CheckReport::new("susy2d.invariance_chi_linear", linear, tol, Provenance::Derived),
        CheckReport::new("susy2d.invariance_chi_generic", generic, tol, Provenance::Derived),
    ])
}

/// The χ = 0 critical configuration used by the current checks: affine φ
/// and constant ψ.
fn critical_fields(g: &Grid, n: usize, r: &mut impl rand::Rng) -> Result<ComponentFields> {
    let slopes = vec![
        [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)],
        [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)],
    ];
    let mut phi = MapField::affine(g, n, slopes);
    for p in phi.periodic.iter_mut() {
        *p = GridField::constant(g, &GrassmannNumber::scalar(n, r.gen_range(-1.0..1.0)));
    }
    let psi = (0..2)
        .map(|_| {
            let a = fixtures::random_odd(r, n, FIELD_GENERATORS);
            let b = fixtures::random_odd(r, n, FIELD_GENERATORS);
            SpinorField::constant(g, [&a, &b])
        })
        .collect();
    ComponentFields::new(phi, psi, vec![GridField::zeros(g, n); 2])
}

pub fn current_checks(cfg: &SuiteConfig, conv: &Conventions) -> Result<Vec<CheckReport>> {
    let n = cfg.generators;
    let tols = &cfg.tolerances;
    let g = Grid::torus(cfg.grids.currents);
    let geom = SurfaceGeometry::flat(&g, n)?;
    let chi0 = GravitinoField::zeros(&g, n);
    let c = &conv.action;
    let mut r = fixtures::rng(cfg.seed);

    let sin = MapField::periodic(vec![GridField::from_fn(&g, n, |x| x[0].sin())]);
    let a = sigma2d::action_component(
        &geom,
        &chi0,
        &ComponentFields::bosonic(sin),
        &Target::Flat { dim: 1 },
        c,
    )?;
    let sin_res = (&a - &GrassmannNumber::scalar(n, 2.0 * PI * PI)).max_abs();

    let mut harm: f64 = 0.0;
    let mut conformal: f64 = 0.0;
    let mut em: f64 = 0.0;
    for _ in 0..cfg.fixtures.currents {
        let phi = MapField::periodic(vec![
            fixtures::trig_even(&mut r, &g, n, 3, FIELD_GENERATORS),
            fixtures::trig_even(&mut r, &g, n, 3, FIELD_GENERATORS),
        ]);
        let fields = ComponentFields::bosonic(phi.clone());
        let t = Target::Flat { dim: 2 };
        let full = sigma2d::action_component(&geom, &chi0, &fields, &t, c)?;
        let dirichlet = sigma2d::harmonic_action(&geom, &phi)?;
        harm = harm.max((&full - &dirichlet).max_abs() / dirichlet.max_abs().max(1.0));
        let log = fixtures::trig_real(&mut r, &g, n, 2, 0.3).body();
        let lambda = GridField::from_real(&g, n, log.iter().map(|v| v.exp()).collect());
        let w = sigma2d::harmonic_action(&geom.weyl(&lambda)?, &phi)?;
        conformal = conformal.max((&w - &dirichlet).max_abs());
        let fd = sigma2d::energy_momentum(&geom, &chi0, &fields, &t, c, sigma2d::METRIC_STEP)?;
        let exact = sigma2d::dirichlet_energy_momentum(&phi)?;
        let scale = exact.max_abs().max(f64::MIN_POSITIVE);
        let diff = [(&fd.t11 - &exact.t11), (&fd.t12 - &exact.t12), (&fd.t22 - &exact.t22)];
        em = em.max(diff.iter().map(GridField::max_abs).fold(0.0, f64::max) / scale);
    }

    let mut trace: f64 = 0.0;
    let mut div: f64 = 0.0;
    let mut holo: f64 = 0.0;
    let mut j_zero: f64 = 0.0;
    let mut j_trace: f64 = 0.0;
    let mut j_holo: f64 = 0.0;
    for _ in 0..cfg.fixtures.currents {
        let fields = critical_fields(&g, n, &mut r)?;
        let t = Target::Flat { dim: 2 };
        let em = sigma2d::energy_momentum(
            &geom,
            &chi0,
            &ComponentFields::bosonic(fields.phi.clone()),
            &t,
            c,
            sigma2d::METRIC_STEP,
        )?;
        trace = trace.max(em.trace()?.max_abs());
        div = div.max(em.divergence()?.iter().map(GridField::max_abs).fold(0.0, f64::max));
        let (re, im) = em.dbar_t_zz()?;
        holo = holo.max(re.max_abs()).max(im.max_abs());

        let chi = GravitinoField {
            comps: [
                fixtures::trig_spinor(&mut r, &g, n, 1, FIELD_GENERATORS),
                fixtures::trig_spinor(&mut r, &g, n, 1, FIELD_GENERATORS),
            ],
        };
        let bosonic = ComponentFields::bosonic(fields.phi.clone());
        j_zero = j_zero.max(sigma2d::super_current(&geom, &chi, &bosonic, &t, c)?.max_abs());
        let j = sigma2d::super_current(&geom, &chi0, &fields, &t, c)?;
        j_trace = j_trace.max(j.gamma_trace()?.max_abs());
        let (wr, wi) = sigma2d::complex_component(&sigma2d::spin_three_halves(&j)?);
        let (dr, di) = sigma2d::dbar(&wr, &wi)?;
        j_holo = j_holo.max(dr.max_abs()).max(di.max_abs());
    }
    Ok(vec![
        CheckReport::new("classical.sin_action", sin_res, tols.classical, Provenance::ClosedForm),
        CheckReport::new(
            "classical.harmonic_reduction",
            harm,
            tols.classical,
            Provenance::Derived,
        ),
        CheckReport::new(
            "classical.conformal_invariance",
            conformal,
            tols.conformal,
            Provenance::Derived,
        ),
        CheckReport::new(
            "energy_momentum.closed_form",
            em,
            tols.energy_momentum_relative,
            Provenance::ClosedForm,
        ),
        CheckReport::new("energy_momentum.trace", trace, tols.holomorphic, Provenance::Derived),
        CheckReport::new("energy_momentum.divergence", div, tols.holomorphic, Provenance::Derived),
        CheckReport::new(
            "energy_momentum.holomorphic",
            holo,
            tols.holomorphic,
            Provenance::Derived,
        ),
        CheckReport::new(
            "super_current.zero_without_fermions",
            j_zero,
            tols.exact,
            Provenance::Trivial,
        ),
        CheckReport::new(
            "super_current.gamma_trace",
            j_trace,
            tols.holomorphic,
            Provenance::Derived,
        ),
        CheckReport::new(
            "super_current.holomorphic",
            j_holo,
            tols.holomorphic,
            Provenance::Derived,
        ),
    ])
}

/// Identity map of the torus plus a seeded band-limited perturbation.
pub fn perturbed_identity(cfg: &SuiteConfig) -> MapField {
    let g = Grid::torus(cfg.grids.flow);
    let mut r = fixtures::rng(cfg.seed);
    let mut phi = MapField::identity(&g, cfg.generators);
    for p in phi.periodic.iter_mut() {
        *p = fixtures::trig_real(&mut r, &g, cfg.generators, 3, 0.05);
    }
    phi
}

pub fn flow_params(cfg: &SuiteConfig) -> FlowParams {
    FlowParams {
        steps: cfg.flow.steps,
        dt: cfg.flow.dt,
        tol: cfg.flow.tol,
    }
}

pub fn flow_checks(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let t = Target::Flat { dim: 2 };
    let res = sigma2d::harmonic_flow(&perturbed_identity(cfg), &t, flow_params(cfg))?;
    let linear = 8.0 * PI * PI;
    let id = sigma2d::harmonic_flow(
        &MapField::identity(&Grid::torus(cfg.grids.flow), cfg.generators),
        &t,
        flow_params(cfg),
    )?;
    Ok(vec![
        CheckReport::new(
            "flow.final_energy",
            (res.energy - linear).abs(),
            cfg.tolerances.flow_energy,
            Provenance::Derived,
        ),
        CheckReport::new("flow.converged", res.gradient_norm, cfg.flow.tol, Provenance::Derived),
        CheckReport::new("flow.step_budget", res.steps as f64, 5000.0, Provenance::Trivial),
        CheckReport::new(
            "flow.identity_fixed_point",
            id.gradient_norm,
            cfg.tolerances.classical,
            Provenance::Trivial,
        ),
    ])
}

/// Input of `decompose --fixture`: a planted deformation built from seeded
/// parameters plus constant true parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeFixture {
    pub grid: usize,
    pub seed: u64,
    pub kmax: i64,
    pub gravitino: GravitinoMode,
    /// `(a, b)` of the planted trace-free constant `[[a, b], [b, −a]]`.
    pub true_even: [f64; 2],
    /// Coefficients of ξ₂ and ξ₀ in the planted gamma-trace-free constant.
    pub true_odd: [f64; 2],
    pub frame_sign: Option<f64>,
}

impl Default for DecomposeFixture {
    fn default() -> Self {
        Self {
            grid: 32,
            seed: 7,
            kmax: 2,
            gravitino: GravitinoMode::Generic,
            true_even: [0.5, -0.25],
            true_odd: [1.0, 0.3],
            frame_sign: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOutcome {
    pub summary: DecompositionSummary,
    pub planted_even_error: f64,
    pub planted_odd_error: f64,
    pub dimensions: (usize, usize),
}

fn zero_mean(f: GridField) -> GridField {
    let mean = f.integrate().scale(1.0 / f.grid().volume());
    &f - &GridField::constant(f.grid(), &mean)
}

pub fn run_decompose(fx: &DecomposeFixture, frame_sign: f64) -> Result<DecomposeOutcome> {
    if fx.grid < 8 {
        return Err(Error::Config("decomposition grid needs at least 8 points".into()));
    }
    let n = fixtures::DEFAULT_GENERATORS;
    let g = Grid::torus(fx.grid);
    let mut r = fixtures::rng(fx.seed);
    let chi = match fx.gravitino {
        GravitinoMode::Zero => GravitinoField::zeros(&g, n),
        GravitinoMode::Linear => GravitinoField {
            comps: [
                fixtures::trig_parameter(&mut r, &g, n, 1, 3),
                fixtures::trig_parameter(&mut r, &g, n, 1, 3),
            ],
        },
        GravitinoMode::Generic => GravitinoField {
            comps: [
                fixtures::trig_spinor(&mut r, &g, n, 1, FIELD_GENERATORS),
                fixtures::trig_spinor(&mut r, &g, n, 1, FIELD_GENERATORS),
            ],
        },
    };
    let gens = FIELD_GENERATORS;
    let lambda = fixtures::trig_even(&mut r, &g, n, fx.kmax, gens.clone());
    let x = [
        zero_mean(fixtures::trig_even(&mut r, &g, n, fx.kmax, gens.clone())),
        zero_mean(fixtures::trig_even(&mut r, &g, n, fx.kmax, gens.clone())),
    ];
    let q = fixtures::trig_spinor(&mut r, &g, n, fx.kmax, gens.clone());
    let q = SpinorField {
        comps: q.comps.map(zero_mean),
    };
    let t = fixtures::trig_spinor(&mut r, &g, n, fx.kmax, gens);
    let (dg, dchi) = deformations::assemble(&chi, &lambda, &x, &q, &t, frame_sign)?;

    let c = |v: f64| GridField::constant(&g, &GrassmannNumber::scalar(n, v));
    let [a, b] = fx.true_even;
    let tt = sigma2d::SymmetricTensor {
        t11: c(a),
        t12: c(b),
        t22: c(-a),
    };
    let s1 = SpinorField::constant(
        &g,
        [
            &GrassmannNumber::generator(n, 2)?.scale(fx.true_odd[0]),
            &GrassmannNumber::generator(n, 0)?.scale(fx.true_odd[1]),
        ],
    );
    let planted = GravitinoField {
        comps: [s1.clone(), s1.clifford(0).clifford(1).scale(-1.0)],
    };
    let dg = sigma2d::SymmetricTensor {
        t11: dg.t11.try_add(&tt.t11)?,
        t12: dg.t12.try_add(&tt.t12)?,
        t22: dg.t22.try_add(&tt.t22)?,
    };
    let dchi = dchi.try_add(&planted)?;
    let params = DecompositionParams {
        frame_sign,
        ..Default::default()
    };
    let res = deformations::decompose(&chi, &dg, &dchi, &params)?;
    let even_err = [(&res.d.t11 - &tt.t11), (&res.d.t12 - &tt.t12), (&res.d.t22 - &tt.t22)]
        .iter()
        .map(GridField::max_abs)
        .fold(0.0, f64::max);
    let odd_err = res.d_odd.try_add(&planted.scale(-1.0))?.max_abs();
    Ok(DecomposeOutcome {
        summary: res.summary(),
        planted_even_error: even_err,
        planted_odd_error: odd_err,
        dimensions: deformations::true_deformation_dimensions(&g, None, params.rcond)?,
    })
}

pub fn decompose_checks(cfg: &SuiteConfig, conv: &Conventions) -> Result<Vec<CheckReport>> {
    let tol = cfg.tolerances.decomposition;
    let mut reassembly: f64 = 0.0;
    let mut constraints: f64 = 0.0;
    let mut planted: f64 = 0.0;
    let first = *cfg
        .grids
        .decompose
        .first()
        .ok_or_else(|| Error::Config("no decomposition grid".into()))?;
    for k in 0..cfg.fixtures.decompose {
        let fx = DecomposeFixture {
            grid: first,
            seed: cfg.seed.wrapping_add(k as u64),
            ..Default::default()
        };
        let out = run_decompose(&fx, conv.action.s3)?;
        let r = out.summary.residuals;
        reassembly = reassembly.max(r.reassembly_even).max(r.reassembly_odd);
        constraints = constraints
            .max(r.trace)
            .max(r.divergence)
            .max(r.gamma_trace)
            .max(r.divergence_odd);
        planted = planted.max(out.planted_even_error).max(out.planted_odd_error);
    }
    let mut checks = vec![
        CheckReport::new("decompose.reassembly", reassembly, tol, Provenance::Derived),
        CheckReport::new("decompose.true_part_constraints", constraints, tol, Provenance::Derived),
        CheckReport::new("decompose.planted_true_parts", planted, tol, Provenance::Derived),
    ];
    for &n in &cfg.grids.decompose {
        let (e, o) = deformations::true_deformation_dimensions(&Grid::torus(n), None, 1e-10)?;
        let miss = (e as f64 - 2.0).abs() + (o as f64 - 2.0).abs();
        checks.push(CheckReport::new(
            format!("decompose.dimensions_{n}"),
            miss,
            cfg.tolerances.exact,
            Provenance::Derived,
        ));
    }
    Ok(checks)
}
