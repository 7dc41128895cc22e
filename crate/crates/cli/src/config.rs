//! Key/value configuration: built-in defaults, per-scenario defaults, an
//! optional file, then `--set` overrides. The last layer wins.

use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use cqed_metrology::{AtomLevel, CavityMode, ImperfectionModel, ProtocolParams, SpreadRule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    /// P_g versus preparation time without phase flip.
    Collapse,
    /// Revival versus measurement time for several displacements.
    Revival,
    /// P_g versus displacement with the extracted Fisher information.
    Fringes,
    /// √F versus measurement time for several preparation times.
    FisherScan,
    /// Single-shot precision versus preparation time.
    PrecisionCurve,
    /// Fisher information summary at the longest preparation time.
    Table1,
    /// Monte Carlo Cramér-Rao trial.
    Estimate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Collapse => "collapse",
            Scenario::Revival => "revival",
            Scenario::Fringes => "fringes",
            Scenario::FisherScan => "fisher_scan",
            Scenario::PrecisionCurve => "precision_curve",
            Scenario::Table1 => "table1",
            Scenario::Estimate => "estimate",
        }
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Scenario::Revival => &[("t1_us", "13.4"), ("t2_grid_us", "0:28:281")],
            Scenario::Fringes => &[("t1_us", "12.0"), ("t2_us", "13.5")],
            _ => &[],
        }
    }
}

const DEFAULTS: &[(&str, &str)] = &[
    ("mean_photons", "12.7"),
    ("rabi_khz", "46"),
    ("waist_mm", "5.96"),
    ("velocity_m_per_s", "250"),
    ("t1_us", "14.7"),
    ("t2_us", "16.3"),
    ("beta", "0"),
    ("n_max", "64"),
    ("auto_truncation", "true"),
    ("initial_atom", "g"),
    ("phase_flip", "true"),
    ("detection_error", "0.05"),
    ("position_sigma_mm", "0.5"),
    ("spread_samples", "15"),
    ("spread_rule", "gauss_hermite"),
    ("seed", "1"),
    ("t1_grid_us", "0:40:401"),
    ("t2_grid_us", "0:30:301"),
    ("beta_grid", "-0.6:0.6:13"),
    ("revival_betas", "0,1"),
    ("fisher_t1_values_us", "0,6.8,9.2,12.0,14.7"),
    ("table1_t2_values_us", "13.5,16.3"),
    ("precision_t1_grid_us", "0:20:101"),
    ("fit_degree", "6"),
    ("nu", "10000"),
    ("replicas", "400"),
    ("beta_true", "0"),
    ("simulated_row", "true"),
];

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: ProtocolParams,
    pub imperfections: ImperfectionModel,
    pub auto_truncation: bool,
    pub seed: u64,
    pub t1_grid: Grid,
    pub t2_grid: Grid,
    pub beta_grid: Grid,
    pub revival_betas: Vec<f64>,
    pub fisher_t1_values: Vec<f64>,
    pub table1_t2_values: Vec<f64>,
    pub precision_t1_grid: Grid,
    pub fit_degree: usize,
    pub nu: u64,
    pub replicas: usize,
    pub beta_true: f64,
    pub simulated_row: bool,
    /// Every key with its final textual value, as written to metadata.
    pub resolved: BTreeMap<String, String>,
}

fn parse_line(line: &str) -> Result<Option<(String, String)>, CliError> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected key=value, got `{line}`")))?;
    Ok(Some((k.trim().to_string(), v.trim().to_string())))
}

fn set_key(map: &mut BTreeMap<String, String>, key: String, value: String) -> Result<(), CliError> {
    match map.get_mut(&key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(CliError::Config(format!(
            "unknown configuration key `{key}`"
        ))),
    }
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn raw(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or_default()
    }

    fn bad(&self, key: &str, what: &str) -> CliError {
        CliError::Config(format!("`{key} = {}` is not {what}", self.raw(key)))
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        self.raw(key)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.bad(key, "a finite number"))
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.raw(key)
            .parse()
            .map_err(|_| self.bad(key, "a non-negative integer"))
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(self.bad(key, "a boolean")),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v: Option<Vec<f64>> = self
            .raw(key)
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        v.filter(|v| !v.is_empty())
            .ok_or_else(|| self.bad(key, "a comma-separated list of numbers"))
    }

    fn grid(&self, key: &str) -> Result<Grid, CliError> {
        let parts: Vec<&str> = self.raw(key).split(':').map(str::trim).collect();
        let err = || self.bad(key, "a start:stop:count grid with count >= 1");
        if parts.len() != 3 {
            return Err(err());
        }
        let start: f64 = parts[0].parse().map_err(|_| err())?;
        let stop: f64 = parts[1].parse().map_err(|_| err())?;
        let count: usize = parts[2].parse().map_err(|_| err())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() || (count > 1 && stop <= start) {
            return Err(err());
        }
        Ok(Grid { start, stop, count })
    }
}

impl ScenarioConfig {
    /// Layers defaults, the optional file and the overrides, then
    /// validates every value.
    pub fn resolve(
        scenario: Scenario,
        file: Option<&Path>,
        overrides: &[String],
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in scenario.defaults() {
            map.insert(k.to_string(), v.to_string());
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            for line in text.lines() {
                if let Some((k, v)) = parse_line(line)? {
                    set_key(&mut map, k, v)?;
                }
            }
        }
        for item in overrides {
            match parse_line(item)? {
                Some((k, v)) => set_key(&mut map, k, v)?,
                None => return Err(CliError::Config(format!("empty override `{item}`"))),
            }
        }
        if let Some(s) = seed {
            map.insert("seed".into(), s.to_string());
        }
        Self::from_map(scenario, map)
    }

    fn from_map(scenario: Scenario, map: BTreeMap<String, String>) -> Result<Self, CliError> {
        let r = Reader(&map);
        let mean_photons = r.real("mean_photons")?;
        if mean_photons < 0.0 {
            return Err(r.bad("mean_photons", "non-negative"));
        }
        let mode = CavityMode::new(
            2.0 * std::f64::consts::PI * r.real("rabi_khz")? * 1e-3,
            r.real("waist_mm")?,
            r.real("velocity_m_per_s")? * 1e-3,
        )?;
        let initial_atom = match r.raw("initial_atom") {
            "g" | "ground" => AtomLevel::Ground,
            "e" | "excited" => AtomLevel::Excited,
            _ => return Err(r.bad("initial_atom", "`g` or `e`")),
        };
        let seed: u64 = r.integer("seed")?;
        let params = ProtocolParams {
            alpha: mean_photons.sqrt(),
            t1: r.real("t1_us")?,
            t2: r.real("t2_us")?,
            beta: r.real("beta")?,
            mode,
            n_max: r.integer("n_max")?,
            initial_atom,
            flip_enabled: r.flag("phase_flip")?,
        };
        let spread_rule = match r.raw("spread_rule") {
            "gauss_hermite" => SpreadRule::GaussHermite,
            "monte_carlo" => SpreadRule::MonteCarlo { seed },
            _ => return Err(r.bad("spread_rule", "`gauss_hermite` or `monte_carlo`")),
        };
        let imperfections = ImperfectionModel {
            detection_error: r.real("detection_error")?,
            position_sigma: r.real("position_sigma_mm")?,
            spread_samples: r.integer("spread_samples")?,
            spread_rule,
        };
        imperfections.validate()?;
        let nu: u64 = r.integer("nu")?;
        let replicas: usize = r.integer("replicas")?;
        if nu == 0 || replicas == 0 {
            return Err(CliError::Config(
                "nu and replicas must be at least 1".into(),
            ));
        }
        let cfg = ScenarioConfig {
            scenario,
            params,
            imperfections,
            auto_truncation: r.flag("auto_truncation")?,
            seed,
            t1_grid: r.grid("t1_grid_us")?,
            t2_grid: r.grid("t2_grid_us")?,
            beta_grid: r.grid("beta_grid")?,
            revival_betas: r.list("revival_betas")?,
            fisher_t1_values: r.list("fisher_t1_values_us")?,
            table1_t2_values: r.list("table1_t2_values_us")?,
            precision_t1_grid: r.grid("precision_t1_grid_us")?,
            fit_degree: r.integer("fit_degree")?,
            nu,
            replicas,
            beta_true: r.real("beta_true")?,
            simulated_row: r.flag("simulated_row")?,
            resolved: map,
        };
        Ok(cfg)
    }

    /// Protocol parameters able to represent displacements up to
    /// `max_beta` when automatic truncation is on.
    pub fn params_for(&self, max_beta: f64) -> ProtocolParams {
        if !self.auto_truncation {
            return self.params;
        }
        let n_max = self
            .params
            .with_beta(max_beta)
            .with_sufficient_truncation()
            .n_max;
        ProtocolParams {
            n_max,
            ..self.params
        }
    }
}
