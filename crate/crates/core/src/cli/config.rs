//! Experiment configuration: a TOML document validated against a fixed schema.
//!
//! ```toml
//! scenario = "eps-sweep"   # nfunc-check | cell | fhom-table | eps-sweep | recovery | twoscale-check
//! seed = 7
//!
//! [nfunc]                  # family = power | power-log | quadratic | exponential
//! family = "power"
//! p = 2.0
//! scale = 1.0
//!
//! [integrand]              # coefficient = constant | sine | laminate | checkerboard
//! coefficient = "laminate"
//! a1 = 1.0
//! a2 = 4.0
//! potential = "quadratic"  # quadratic | power | orlicz (uses [nfunc])
//!
//! [grid]
//! dim = 1
//! cell_n = 256
//! domain_n = 2048
//!
//! [xi]
//! value = [1.0]
//!
//! [eps]
//! reciprocals = [8, 16, 32, 64]
//! ```

use std::fmt;
use std::path::Path;

use toml::{Table, Value};

use crate::epsproblem::{admissible_periods, DeltaSchedule, MIN_NODES_PER_PERIOD};
use crate::error::{Error, Result};
use crate::integrand::{CoefficientField, Integrand, Potential};
use crate::nfunc::NFunction;
use crate::solver::SolverSettings;
use crate::twoscale::TwoScaleSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    NfuncCheck,
    Cell,
    FhomTable,
    EpsSweep,
    Recovery,
    TwoscaleCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::NfuncCheck,
        Scenario::Cell,
        Scenario::FhomTable,
        Scenario::EpsSweep,
        Scenario::Recovery,
        Scenario::TwoscaleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NfuncCheck => "nfunc-check",
            Scenario::Cell => "cell",
            Scenario::FhomTable => "fhom-table",
            Scenario::EpsSweep => "eps-sweep",
            Scenario::Recovery => "recovery",
            Scenario::TwoscaleCheck => "twoscale-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|sc| sc.name() == s)
    }

    fn needs_integrand(self) -> bool {
        !matches!(self, Scenario::NfuncCheck | Scenario::TwoscaleCheck)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NFunctionSpec {
    pub family: String,
    pub p: f64,
    pub scale: f64,
}

impl NFunctionSpec {
    pub fn build(&self) -> Result<NFunction> {
        match self.family.as_str() {
            "power" if self.scale == 1.0 => NFunction::power(self.p),
            "power" => NFunction::scaled_power(self.p, self.scale),
            "power-log" => NFunction::power_log(self.p),
            "quadratic" => Ok(NFunction::quadratic()),
            "exponential" => Ok(NFunction::exponential()),
            other => Err(Error::Config(format!("unknown N-function family `{other}`"))),
        }
    }
}

impl Default for NFunctionSpec {
    fn default() -> Self {
        Self {
            family: "power".into(),
            p: 2.0,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandSpec {
    pub coefficient: CoefficientField,
    pub potential: PotentialSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Quadratic,
    Power(f64),
    Orlicz,
}

#[derive(Debug, Clone, PartialEq)]
pub enum XiSpec {
    Values(Vec<Vec<f64>>),
    Range { min: Vec<f64>, max: Vec<f64>, count: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative terminal gap `|E_ε − E_hom| / E_hom` (eps-sweep).
    pub gap: f64,
    /// Allowed undershoot of `E_ε` below `E_hom` (eps-sweep).
    pub lower_bound: f64,
    /// Slack when judging a gap sequence non-increasing.
    pub monotone_slack: f64,
    /// Relative distance of the recovery energy to the two-scale target.
    pub energy: f64,
    /// Allowed relative excess of the recovery energy over `E_ε`.
    pub upper_excess: f64,
    /// Young and conjugacy residuals (nfunc-check).
    pub young: f64,
    /// Optional reference value for `cell` with relative tolerance `expected_rel`.
    pub expected: Option<f64>,
    pub expected_rel: f64,
    /// Allowed negative midpoint-convexity slack of an f_hom table.
    pub convexity: f64,
    pub twoscale: TwoScaleSettings,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: 0.05,
            lower_bound: 1e-3,
            monotone_slack: 1e-8,
            energy: 0.05,
            upper_excess: 0.10,
            young: 1e-8,
            expected: None,
            expected_rel: 0.01,
            convexity: 1e-6,
            twoscale: TwoScaleSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoScaleSequence {
    /// `u_ε(x) = sin(2π x₁/ε)`
    Oscillation,
    /// Gradients of ε-minimizers against `ξ + D_y u₁*`.
    Minimizers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoScaleTarget {
    /// `u₀(x, y) = sin(2π y₁)`
    Profile,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleSpec {
    pub sequence: TwoScaleSequence,
    pub limit: TwoScaleTarget,
    pub nodes_per_period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NfuncCheckSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub nfunc: NFunctionSpec,
    pub integrand: Option<IntegrandSpec>,
    pub dim: usize,
    pub cell_n: usize,
    pub domain_n: usize,
    pub xi: XiSpec,
    pub eps: Vec<f64>,
    pub solver: SolverSettings,
    pub tolerance: Tolerances,
    pub recovery: DeltaSchedule,
    pub twoscale: TwoScaleSpec,
    pub nfunc_check: NfuncCheckSpec,
    pub certificate_samples: usize,
    /// The document as read, echoed into reports.
    pub source: String,
}

impl ExperimentConfig {
    pub fn build_nfunction(&self) -> Result<NFunction> {
        self.nfunc.build()
    }

    pub fn build_integrand(&self) -> Result<Integrand> {
        let spec = self
            .integrand
            .as_ref()
            .ok_or_else(|| Error::Config("missing [integrand] section".into()))?;
        let potential = match spec.potential {
            PotentialSpec::Quadratic => Potential::Quadratic,
            PotentialSpec::Power(p) => Potential::power(p)?,
            PotentialSpec::Orlicz => Potential::orlicz(self.nfunc.build()?),
        };
        Ok(Integrand::new(spec.coefficient, potential))
    }

    /// Every ξ the scenario evaluates, in row-major order.
    pub fn xi_points(&self) -> Vec<Vec<f64>> {
        match &self.xi {
            XiSpec::Values(v) => v.clone(),
            XiSpec::Range { min, max, count } => {
                let axes: Vec<Vec<f64>> = (0..min.len())
                    .map(|k| crate::sampling::lin_space(min[k], max[k], count[k]))
                    .collect();
                let mut out = vec![Vec::new()];
                for axis in axes {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(*v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }
}

/// Reads `path` and validates it; see [`parse_config`].
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Tracks which keys of one table were consumed, and collects errors.
struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
    used: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: Option<&'a Table>) -> Self {
        Self {
            name,
            table,
            used: Vec::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn float(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                errs.push(format!("{}: expected a number, found {}", self.path(key), other.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<usize> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            other => {
                errs.push(format!("{}: expected a non-negative integer, found {other}", self.path(key)));
                None
            }
        }
    }

    fn string(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                errs.push(format!("{}: expected a string, found {}", self.path(key), other.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
        let v = self.raw(key)?;
        let path = self.path(key);
        let Value::Array(items) = v else {
            errs.push(format!("{path}: expected an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                Value::Array(_) => {
                    errs.push(format!("{path}: nested arrays are not allowed here"));
                    return None;
                }
                other => {
                    errs.push(format!("{path}: expected numbers, found {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn uints(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<Vec<usize>> {
        let v = self.raw(key)?;
        let path = self.path(key);
        match v {
            Value::Array(items) if items.iter().all(|i| matches!(i, Value::Integer(x) if *x > 0)) => {
                Some(items.iter().map(|i| i.as_integer().unwrap_or_default() as usize).collect())
            }
            _ => {
                errs.push(format!("{path}: expected an array of positive integers"));
                None
            }
        }
    }

    fn finish(self, errs: &mut Vec<String>) {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.used.contains(&key.as_str()) {
                    errs.push(format!("unknown key `{}`", self.path(key)));
                }
            }
        }
    }
}

fn sub_table<'a>(root: &'a Table, name: &str, errs: &mut Vec<String>) -> Option<&'a Table> {
    match root.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errs.push(format!("`{name}` must be a table"));
            None
        }
    }
}

/// Parses and validates a configuration document. All problems are
/// reported together in one [`Error::Config`], one per line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(format!("syntax: {}", e.message())))?;
    let mut errs = Vec::new();
    const SECTIONS: [&str; 11] = [
        "nfunc",
        "integrand",
        "grid",
        "xi",
        "eps",
        "solver",
        "tolerance",
        "recovery",
        "twoscale",
        "nfunc_check",
        "cell",
    ];

    let mut top = Section::new("", Some(&root));
    let scenario = match top.string("scenario", &mut errs) {
        Some(s) => match Scenario::parse(s) {
            Some(sc) => Some(sc),
            None => {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                errs.push(format!("scenario: unknown scenario `{s}` (expected one of {})", names.join(", ")));
                None
            }
        },
        None => {
            if !errs.iter().any(|e| e.starts_with("scenario")) {
                errs.push("scenario: required field is missing".into());
            }
            None
        }
    };
    let seed = match top.raw("seed") {
        None => 0,
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(other) => {
            errs.push(format!("seed: expected a non-negative integer, found {other}"));
            0
        }
    };
    for s in SECTIONS {
        top.used.push(s);
    }
    top.finish(&mut errs);

    // [nfunc]
    let nf_table = sub_table(&root, "nfunc", &mut errs);
    let mut sec = Section::new("nfunc", nf_table);
    let mut nfunc = NFunctionSpec::default();
    if let Some(f) = sec.string("family", &mut errs) {
        nfunc.family = f.to_string();
    }
    if let Some(p) = sec.float("p", &mut errs) {
        nfunc.p = p;
    }
    if let Some(s) = sec.float("scale", &mut errs) {
        nfunc.scale = s;
    }
    sec.finish(&mut errs);
    if let Err(e) = nfunc.build() {
        errs.push(format!("nfunc: {e}"));
    }

    // [grid]
    let mut sec = Section::new("grid", sub_table(&root, "grid", &mut errs));
    let dim = sec.uint("dim", &mut errs).unwrap_or(1);
    let cell_n = sec.uint("cell_n", &mut errs).unwrap_or(256);
    let domain_n = sec.uint("domain_n", &mut errs).unwrap_or(2048);
    sec.finish(&mut errs);
    if !(1..=2).contains(&dim) {
        errs.push(format!("grid.dim: must be 1 or 2, got {dim}"));
    }
    if cell_n < 2 {
        errs.push(format!("grid.cell_n: must be at least 2, got {cell_n}"));
    }
    if domain_n < 2 {
        errs.push(format!("grid.domain_n: must be at least 2, got {domain_n}"));
    }

    // [integrand]
    let integrand_table = sub_table(&root, "integrand", &mut errs);
    let integrand = integrand_table.and_then(|t| parse_integrand(t, dim, &mut errs));
    if let Some(sc) = scenario {
        if sc.needs_integrand() && integrand_table.is_none() {
            errs.push(format!("integrand: required for scenario `{sc}`"));
        }
    }

    // [xi]
    let mut sec = Section::new("xi", sub_table(&root, "xi", &mut errs));
    let value = sec.raw("value");
    let min = sec.floats("min", &mut errs);
    let max = sec.floats("max", &mut errs);
    let count = sec.uints("count", &mut errs);
    sec.finish(&mut errs);
    let xi = match (value, &min, &max, &count) {
        (Some(v), None, None, None) => match parse_xi_values(v, dim) {
            Ok(points) => XiSpec::Values(points),
            Err(e) => {
                errs.push(e);
                XiSpec::Values(vec![vec![1.0; dim]])
            }
        },
        (None, Some(lo), Some(hi), Some(c)) => {
            if lo.len() != dim || hi.len() != dim || c.len() != dim {
                errs.push(format!("xi: min, max and count need {dim} entries each"));
            } else if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                errs.push("xi: each min must be below the matching max".into());
            }
            XiSpec::Range {
                min: lo.clone(),
                max: hi.clone(),
                count: c.clone(),
            }
        }
        (None, None, None, None) => {
            if scenario == Some(Scenario::FhomTable) {
                errs.push("xi: fhom-table needs min, max and count".into());
            }
            let mut e1 = vec![0.0; dim];
            e1[0] = 1.0;
            XiSpec::Values(vec![e1])
        }
        _ => {
            errs.push("xi: give either `value` or all of `min`, `max`, `count`".into());
            XiSpec::Values(vec![vec![1.0; dim]])
        }
    };
    if scenario == Some(Scenario::FhomTable) && matches!(xi, XiSpec::Values(_)) && value.is_some() {
        errs.push("xi: fhom-table needs a range (min, max, count), not `value`".into());
    }

    // [eps]
    let mut sec = Section::new("eps", sub_table(&root, "eps", &mut errs));
    let recips = sec.uints("reciprocals", &mut errs);
    let values = sec.floats("values", &mut errs);
    sec.finish(&mut errs);
    let eps: Vec<f64> = match (recips, values) {
        (Some(r), None) => r.iter().map(|m| 1.0 / *m as f64).collect(),
        (None, Some(v)) => v,
        (None, None) => [8.0, 16.0, 32.0, 64.0].iter().map(|m| 1.0 / m).collect(),
        (Some(_), Some(_)) => {
            errs.push("eps: give either `reciprocals` or `values`, not both".into());
            Vec::new()
        }
    };
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        errs.push("eps: values must be strictly decreasing".into());
    }

    // [twoscale]
    let mut sec = Section::new("twoscale", sub_table(&root, "twoscale", &mut errs));
    let sequence = match sec.string("sequence", &mut errs).unwrap_or("oscillation") {
        "oscillation" => TwoScaleSequence::Oscillation,
        "minimizers" => TwoScaleSequence::Minimizers,
        other => {
            errs.push(format!("twoscale.sequence: unknown value `{other}` (oscillation | minimizers)"));
            TwoScaleSequence::Oscillation
        }
    };
    let limit = match sec.string("limit", &mut errs).unwrap_or("profile") {
        "profile" => TwoScaleTarget::Profile,
        "zero" => TwoScaleTarget::Zero,
        other => {
            errs.push(format!("twoscale.limit: unknown value `{other}` (profile | zero)"));
            TwoScaleTarget::Profile
        }
    };
    let nodes_per_period = sec.uint("nodes_per_period", &mut errs).unwrap_or(64);
    sec.finish(&mut errs);
    if nodes_per_period < MIN_NODES_PER_PERIOD {
        errs.push(format!(
            "twoscale.nodes_per_period: {nodes_per_period} is below the minimum of {MIN_NODES_PER_PERIOD}"
        ));
    }
    if scenario == Some(Scenario::TwoscaleCheck) && sequence == TwoScaleSequence::Minimizers && integrand_table.is_none() {
        errs.push("integrand: required for twoscale-check with sequence = \"minimizers\"".into());
    }

    // admissibility of ε against the grid that will be used
    let uses_domain = matches!(scenario, Some(Scenario::EpsSweep | Scenario::Recovery));
    for &e in &eps {
        if uses_domain {
            if let Err(err) = admissible_periods(e, domain_n) {
                errs.push(format!("eps: {err}"));
            }
        } else if scenario == Some(Scenario::TwoscaleCheck) {
            let inv = 1.0 / e;
            if (inv - inv.round()).abs() > 1e-9 * inv || !(e > 0.0 && e <= 1.0) {
                errs.push(format!("eps: 1/epsilon = {inv} is not a positive integer"));
            }
        }
    }

    // [solver]
    let mut sec = Section::new("solver", sub_table(&root, "solver", &mut errs));
    let mut solver = SolverSettings::default();
    if let Some(t) = sec.float("tol", &mut errs) {
        solver.tol = t;
    }
    if let Some(m) = sec.uint("max_iter", &mut errs) {
        solver.max_iter = m;
    }
    if let Some(Value::Boolean(b)) = sec.raw("precondition") {
        solver.precondition = *b;
    }
    sec.finish(&mut errs);
    if !(solver.tol > 0.0) {
        errs.push("solver.tol: must be positive".into());
    }

    // [tolerance]
    let mut sec = Section::new("tolerance", sub_table(&root, "tolerance", &mut errs));
    let mut tol = Tolerances::default();
    macro_rules! take {
        ($key:literal, $slot:expr) => {
            if let Some(v) = sec.float($key, &mut errs) {
                $slot = v;
            }
        };
    }
    take!("gap", tol.gap);
    take!("lower_bound", tol.lower_bound);
    take!("monotone_slack", tol.monotone_slack);
    take!("energy", tol.energy);
    take!("upper_excess", tol.upper_excess);
    take!("young", tol.young);
    take!("expected_rel", tol.expected_rel);
    take!("convexity", tol.convexity);
    take!("defect_abs", tol.twoscale.abs_tol);
    take!("defect_rel", tol.twoscale.rel_tol);
    take!("defect_floor", tol.twoscale.exact_floor);
    take!("min_slope", tol.twoscale.min_slope);
    tol.expected = sec.float("expected", &mut errs);
    sec.finish(&mut errs);

    // [recovery]
    let mut sec = Section::new("recovery", sub_table(&root, "recovery", &mut errs));
    let mut recovery = DeltaSchedule::default();
    if let Some(v) = sec.float("delta_factor", &mut errs) {
        recovery.factor = v;
    }
    if let Some(v) = sec.float("delta_exponent", &mut errs) {
        recovery.exponent = v;
    }
    sec.finish(&mut errs);

    // [nfunc_check]
    let mut sec = Section::new("nfunc_check", sub_table(&root, "nfunc_check", &mut errs));
    let nfunc_check = NfuncCheckSpec {
        t_min: sec.float("t_min", &mut errs).unwrap_or(1e-3),
        t_max: sec.float("t_max", &mut errs).unwrap_or(1e3),
        count: sec.uint("count", &mut errs).unwrap_or(100),
    };
    sec.finish(&mut errs);
    if !(nfunc_check.t_min > 0.0 && nfunc_check.t_min < nfunc_check.t_max) || nfunc_check.count < 2 {
        errs.push("nfunc_check: need 0 < t_min < t_max and count >= 2".into());
    }

    // [cell]
    let mut sec = Section::new("cell", sub_table(&root, "cell", &mut errs));
    let certificate_samples = sec.uint("certificate_samples", &mut errs).unwrap_or(32);
    sec.finish(&mut errs);

    if let Some(spec) = &integrand {
        if spec.coefficient.needs_even_grid() && !cell_n.is_multiple_of(2) {
            errs.push(format!("grid.cell_n: discontinuous coefficients need an even cell grid, got {cell_n}"));
        }
    }

    if !errs.is_empty() {
        return Err(Error::Config(errs.join("\n")));
    }
    Ok(ExperimentConfig {
        scenario: scenario.expect("checked above"),
        seed,
        nfunc,
        integrand,
        dim,
        cell_n,
        domain_n,
        xi,
        eps,
        solver,
        tolerance: tol,
        recovery,
        twoscale: TwoScaleSpec {
            sequence,
            limit,
            nodes_per_period,
        },
        nfunc_check,
        certificate_samples,
        source: text.to_string(),
    })
}

fn parse_xi_values(v: &Value, dim: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    let num = |x: &Value| match x {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let Value::Array(items) = v else {
        return Err("xi.value: expected an array".into());
    };
    let points: Option<Vec<Vec<f64>>> = if items.iter().all(|i| matches!(i, Value::Array(_))) {
        items
            .iter()
            .map(|p| p.as_array().and_then(|a| a.iter().map(num).collect()))
            .collect()
    } else {
        items.iter().map(num).collect::<Option<Vec<f64>>>().map(|p| vec![p])
    };
    let points = points.ok_or("xi.value: expected numbers")?;
    if points.is_empty() || points.iter().any(|p| p.len() != dim) {
        return Err(format!("xi.value: every point needs {dim} entries"));
    }
    Ok(points)
}

fn parse_integrand(t: &Table, dim: usize, errs: &mut Vec<String>) -> Option<IntegrandSpec> {
    let mut sec = Section::new("integrand", Some(t));
    let kind = sec.string("coefficient", errs);
    let a0 = sec.float("a0", errs);
    let alpha = sec.float("alpha", errs);
    let beta = sec.float("beta", errs);
    let a1 = sec.float("a1", errs);
    let a2 = sec.float("a2", errs);
    let axis = sec.uint("axis", errs);
    let potential = sec.string("potential", errs);
    let p = sec.float("p", errs);
    sec.finish(errs);

    let need = |v: Option<f64>, key: &str, errs: &mut Vec<String>| {
        if v.is_none() {
            errs.push(format!("integrand.{key}: required for this coefficient"));
        }
        v.unwrap_or(1.0)
    };
    let coefficient = match kind {
        None => {
            errs.push("integrand.coefficient: required field is missing".into());
            None
        }
        Some("constant") => Some(CoefficientField::constant(need(a0, "a0", errs))),
        Some("sine") => Some(CoefficientField::sine(need(alpha, "alpha", errs), need(beta, "beta", errs))),
        Some("laminate") => {
            let ax = axis.unwrap_or(0);
            if ax >= dim {
                errs.push(format!("integrand.axis: {ax} is not below grid.dim = {dim}"));
            }
            Some(CoefficientField::laminate(need(a1, "a1", errs), need(a2, "a2", errs), ax))
        }
        Some("checkerboard") => {
            if dim != 2 {
                errs.push("integrand.coefficient: checkerboard needs grid.dim = 2".into());
            }
            Some(CoefficientField::checkerboard(need(a1, "a1", errs), need(a2, "a2", errs)))
        }
        Some(other) => {
            errs.push(format!(
                "integrand.coefficient: unknown value `{other}` (constant | sine | laminate | checkerboard)"
            ));
            None
        }
    };
    let coefficient = match coefficient {
        Some(Ok(c)) => Some(c),
        Some(Err(e)) => {
            errs.push(format!("integrand: {e}"));
            None
        }
        None => None,
    };
    let potential = match potential.unwrap_or("quadratic") {
        "quadratic" => Some(PotentialSpec::Quadratic),
        "power" => match p {
            Some(p) if p >= 2.0 => Some(PotentialSpec::Power(p)),
            Some(p) => {
                errs.push(format!("integrand.p: power potentials need p >= 2, got {p}"));
                None
            }
            None => {
                errs.push("integrand.p: required for potential = \"power\"".into());
                None
            }
        },
        "orlicz" => Some(PotentialSpec::Orlicz),
        other => {
            errs.push(format!("integrand.potential: unknown value `{other}` (quadratic | power | orlicz)"));
            None
        }
    };
    Some(IntegrandSpec {
        coefficient: coefficient?,
        potential: potential?,
    })
}
