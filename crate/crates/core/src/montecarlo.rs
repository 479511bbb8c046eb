//! Replication engine for the simulation study.
//!
//! Replication `r` of a scenario draws from its own stream
//! `(seed, scenario id, r)`, so results do not depend on worker count or on
//! how many replications are requested after it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::copula::Copula;
use crate::error::{MonteCarloError, ReplicationFailure};
use crate::estimation::{footrule_hat, gini_hat, phi_hat, rank_data, FootruleNorm, TiePolicy};
use crate::par::Execution;
use crate::rng;
use crate::sampling;
use crate::truth::{self, TrueValues};

/// The default simulation grid, ten copulas × n ∈ {100, 200, 500}, B = 10⁴.
pub const DEFAULT_MANIFEST: &str = include_str!("../data/grid.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Phi,
    Footrule,
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub spec: Copula,
    pub n: usize,
    pub replications: u64,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
}

impl Scenario {
    /// A scenario recording all three estimators.
    pub fn new(
        spec: Copula,
        n: usize,
        replications: u64,
        seed: u64,
    ) -> Result<Self, MonteCarloError> {
        if n < 2 {
            return Err(MonteCarloError::InvalidScenario(format!(
                "{spec}: n must be at least 2, got {n}"
            )));
        }
        if replications == 0 {
            return Err(MonteCarloError::InvalidScenario(format!(
                "{spec}: need at least one replication"
            )));
        }
        if !sampling::is_samplable(&spec) {
            return Err(MonteCarloError::InvalidScenario(format!(
                "{spec} is not samplable"
            )));
        }
        Ok(Self {
            spec,
            n,
            replications,
            seed,
            estimators: vec![Estimator::Phi, Estimator::Footrule, Estimator::Gini],
        })
    }

    pub fn with_estimators(mut self, estimators: &[Estimator]) -> Self {
        let mut e = estimators.to_vec();
        e.sort();
        e.dedup();
        self.estimators = e;
        self
    }

    /// Stream key derived from the copula and n only.
    pub fn id(&self) -> u64 {
        rng::fnv1a(self.label().as_bytes())
    }

    pub fn label(&self) -> String {
        format!("{} n={}", self.spec, self.n)
    }
}

/// Estimates from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    pub phi: f64,
    pub footrule: f64,
    pub gini: f64,
}

/// Runs replication `r` of `s`.
pub fn replicate(s: &Scenario, r: u64) -> Result<Replicate, ReplicationFailure> {
    let mut rng = rng::stream(s.seed, s.id(), r);
    let pairs = sampling::sample_with(&s.spec, s.n, &mut rng)?;
    let (us, vs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let rs = rank_data(&us, &vs, TiePolicy::MidRank)?;
    Ok(Replicate {
        phi: phi_hat(&rs),
        footrule: footrule_hat(&rs, FootruleNorm::Pseudo),
        gini: gini_hat(&rs, FootruleNorm::Pseudo),
    })
}

/// All replications of `s`, in replication order.
pub fn replicates(s: &Scenario, exec: Execution) -> Result<Vec<Replicate>, MonteCarloError> {
    exec.try_map(s.replications as usize, |r| replicate(s, r as u64))
        .map_err(|(r, source)| MonteCarloError::Replication {
            scenario: s.label(),
            replication: r as u64,
            source,
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub bias: f64,
    /// Sample standard deviation with the B − 1 divisor; 0 when B = 1.
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64], truth: f64) -> Self {
        // Shifting by the first value keeps a constant sequence exact.
        let first = values[0];
        let b = values.len() as f64;
        let mean = first + values.iter().map(|x| x - first).sum::<f64>() / b;
        let sd = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            bias: mean - truth,
            sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub scenario: Scenario,
    pub truth: TrueValues,
    pub phi: Option<Summary>,
    pub footrule: Option<Summary>,
    pub gini: Option<Summary>,
    pub wall_time: f64,
}

impl McResult {
    pub fn summary(&self, e: Estimator) -> Option<Summary> {
        match e {
            Estimator::Phi => self.phi,
            Estimator::Footrule => self.footrule,
            Estimator::Gini => self.gini,
        }
    }
}

pub fn run_scenario(s: &Scenario, exec: Execution) -> Result<McResult, MonteCarloError> {
    let start = Instant::now();
    let truth = truth::true_values(&s.spec, truth::DEFAULT_TOL).map_err(|source| {
        MonteCarloError::Truth {
            scenario: s.label(),
            source,
        }
    })?;
    let reps = replicates(s, exec)?;
    let summarise = |e: Estimator, get: fn(&Replicate) -> f64, t: f64| {
        s.estimators.contains(&e).then(|| {
            let xs: Vec<f64> = reps.iter().map(get).collect();
            Summary::of(&xs, t)
        })
    };
    Ok(McResult {
        phi: summarise(Estimator::Phi, |r| r.phi, truth.phi_w),
        footrule: summarise(Estimator::Footrule, |r| r.footrule, truth.footrule),
        gini: summarise(Estimator::Gini, |r| r.gini, truth.gini),
        truth,
        scenario: s.clone(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One table row: the scenario and either its result or the error that
/// stopped it.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub scenario: Scenario,
    pub result: Result<McResult, MonteCarloError>,
}

/// Runs every scenario in order. A failing scenario does not stop the rest.
pub fn run_table(scenarios: &[Scenario], exec: Execution) -> Vec<TableRow> {
    scenarios
        .iter()
        .map(|s| TableRow {
            scenario: s.clone(),
            result: run_scenario(s, exec),
        })
        .collect()
}

/// Fixed 5-decimal formatting.
pub fn fmt5(x: f64) -> String {
    let s = format!("{x:.5}");
    if s == "-0.00000" {
        "0.00000".into()
    } else {
        s
    }
}

/// 5 decimals with an explicit sign, except for zero.
pub fn fmt5_signed(x: f64) -> String {
    let s = fmt5(x);
    if s == "0.00000" || s.starts_with('-') || !x.is_finite() {
        s
    } else {
        format!("+{s}")
    }
}

fn param_text(spec: &Copula) -> String {
    spec.parameter().map(|p| p.to_string()).unwrap_or_default()
}

pub const CSV_COLUMNS: [&str; 13] = [
    "family",
    "param",
    "n",
    "truth_phi",
    "truth_footrule",
    "mean_phi",
    "bias_phi",
    "sd_phi",
    "mean_footrule",
    "bias_footrule",
    "sd_footrule",
    "seed",
    "status",
];

fn cells(row: &TableRow) -> Vec<String> {
    let s = &row.scenario;
    let mut out = vec![
        s.spec.family_name().to_string(),
        param_text(&s.spec),
        s.n.to_string(),
    ];
    match &row.result {
        Ok(r) => {
            out.push(fmt5(r.truth.phi_w));
            out.push(fmt5(r.truth.footrule));
            for sm in [r.phi, r.footrule] {
                match sm {
                    Some(sm) => {
                        out.push(fmt5(sm.mean));
                        out.push(fmt5_signed(sm.bias));
                        out.push(fmt5(sm.sd));
                    }
                    None => out.extend(std::iter::repeat_n(String::new(), 3)),
                }
            }
            out.push(s.seed.to_string());
            out.push("ok".into());
        }
        Err(e) => {
            out.extend(std::iter::repeat_n(String::new(), 8));
            out.push(s.seed.to_string());
            out.push(format!("failed: {e}"));
        }
    }
    out
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("writing to memory");
    for row in rows {
        w.write_record(cells(row)).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

/// Pipe table with padded columns.
pub fn render_markdown(rows: &[TableRow]) -> String {
    let header = [
        "Copula",
        "Param",
        "n",
        "True Φ",
        "True φ",
        "Φ̂ mean",
        "Φ̂ bias",
        "Φ̂ SD",
        "φ̂ mean",
        "φ̂ bias",
        "φ̂ SD",
        "Status",
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let mut c = cells(row);
            c.remove(11);
            c
        })
        .collect();
    let width = |i: usize| {
        body.iter()
            .map(|r| r[i].chars().count())
            .chain([header[i].chars().count()])
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..header.len()).map(width).collect();
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for r in body {
        out.push_str(&line(r));
    }
    out
}

/// How bias and SD shrink between consecutive sample sizes of one copula.
/// Ratios are later over earlier, so halving gives 0.5.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRatios {
    pub copula: String,
    pub from_n: usize,
    pub to_n: usize,
    pub bias_ratio_phi: f64,
    pub sd_ratio_phi: f64,
    pub bias_ratio_footrule: f64,
    pub sd_ratio_footrule: f64,
}

fn ratio(later: Option<f64>, earlier: Option<f64>) -> f64 {
    match (later, earlier) {
        (Some(a), Some(b)) if a == b => 1.0,
        (Some(a), Some(b)) => a / b,
        _ => f64::NAN,
    }
}

pub fn bias_decay_report(results: &[McResult]) -> Vec<DecayRatios> {
    let mut groups: BTreeMap<String, Vec<&McResult>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in results {
        let key = r.scenario.spec.to_string();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for key in order {
        let mut g = groups.remove(&key).unwrap_or_default();
        g.sort_by_key(|r| r.scenario.n);
        for w in g.windows(2) {
            let (a, b) = (w[0], w[1]);
            out.push(DecayRatios {
                copula: key.clone(),
                from_n: a.scenario.n,
                to_n: b.scenario.n,
                bias_ratio_phi: ratio(b.phi.map(|s| s.bias), a.phi.map(|s| s.bias)),
                sd_ratio_phi: ratio(b.phi.map(|s| s.sd), a.phi.map(|s| s.sd)),
                bias_ratio_footrule: ratio(b.footrule.map(|s| s.bias), a.footrule.map(|s| s.bias)),
                sd_ratio_footrule: ratio(b.footrule.map(|s| s.sd), a.footrule.map(|s| s.sd)),
            });
        }
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    scenario: Vec<ManifestBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestBlock {
    family: String,
    param: Option<f64>,
    n: usize,
    #[serde(rename = "B")]
    replications: u64,
    seed: Option<u64>,
    estimators: Option<Vec<Estimator>>,
}

/// Parses `[[scenario]]` blocks with keys `family`, `param`, `n`, `B` and
/// optional `seed` (defaults to `seed`) and `estimators`. Every B is
/// multiplied by `scale` and rounded, with a floor of 1.
pub fn parse_manifest(text: &str, seed: u64, scale: f64) -> Result<Vec<Scenario>, MonteCarloError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(MonteCarloError::Manifest(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let file: ManifestFile =
        toml::from_str(text).map_err(|e| MonteCarloError::Manifest(e.to_string()))?;
    file.scenario
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let spec = Copula::from_parts(&b.family, b.param)
                .map_err(|e| MonteCarloError::Manifest(format!("scenario {}: {e}", i + 1)))?;
            let reps = ((b.replications as f64 * scale).round() as u64).max(1);
            let s = Scenario::new(spec, b.n, reps, b.seed.unwrap_or(seed))?;
            Ok(match b.estimators {
                Some(e) => s.with_estimators(&e),
                None => s,
            })
        })
        .collect()
}
