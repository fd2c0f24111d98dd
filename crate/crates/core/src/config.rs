//! Scenario configuration files.
//!
//! The format is sectioned `key = value` text (a TOML subset) with `#`
//! comments:
//!
//! ```text
//! [source]        v_minus + v_plus | squeezing_db + antisqueezing_db
//!                 | pump_x + linewidth_mhz (+ escape_eff)
//! [vbs]           t | mode = "balance" | "optimize"     (default: balance)
//! [arm_1550]      efficiency_power                       (default 0.88)
//! [arm_532]       sfg_efficiency_power, pd_efficiency_power, extra_power
//! [detection]     phase_1550_rad, phase_532_rad, dark_floor_db
//! [analysis]      frequency_mhz, sweep_start_mhz/sweep_stop_mhz/sweep_points,
//!                 scan_start_rad/scan_stop_rad/scan_points
//! ```
//!
//! Unknown sections or keys are rejected, as are mixed alternatives.

use std::fmt::Write as _;

use thiserror::Error;
use toml::{Table, Value};

use crate::scenario::{
    ArmEfficiencies, ScenarioConfig, Source, VbsSetting, DEFAULT_ANALYSIS_FREQ_MHZ,
    DEFAULT_EFFICIENCY_1550, DEFAULT_PD_EFFICIENCY_532, DEFAULT_SFG_EFFICIENCY,
};
use crate::spectral::SourceSpectrumModel;
use crate::trace::Grid;

/// Built-in configuration of the reference experiment.
pub const EXPERIMENT_DEFAULTS: &str = include_str!("../configs/experiment_defaults.toml");

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "source",
        &[
            "v_minus",
            "v_plus",
            "squeezing_db",
            "antisqueezing_db",
            "pump_x",
            "linewidth_mhz",
            "escape_eff",
        ],
    ),
    ("vbs", &["t", "mode"]),
    ("arm_1550", &["efficiency_power"]),
    (
        "arm_532",
        &["sfg_efficiency_power", "pd_efficiency_power", "extra_power"],
    ),
    ("detection", &["phase_1550_rad", "phase_532_rad", "dark_floor_db"]),
    (
        "analysis",
        &[
            "frequency_mhz",
            "sweep_start_mhz",
            "sweep_stop_mhz",
            "sweep_points",
            "scan_start_rad",
            "scan_stop_rad",
            "scan_points",
        ],
    ),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("[{section}] unknown key `{key}`")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] missing key `{key}`")]
    MissingKey { section: String, key: String },
    #[error("[{section}] conflicting keys: {keys}")]
    Conflict { section: String, keys: String },
    #[error("[{section}] {key} = {value} is outside {range}")]
    Range {
        section: String,
        key: String,
        value: f64,
        range: String,
    },
    #[error("[{section}] {key}: {message}")]
    InvalidValue {
        section: String,
        key: String,
        message: String,
    },
}

impl ConfigError {
    /// Stable machine-readable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Syntax(_) => "syntax",
            ConfigError::UnknownSection(_) => "unknown_section",
            ConfigError::UnknownKey { .. } => "unknown_key",
            ConfigError::MissingKey { .. } => "missing_key",
            ConfigError::Conflict { .. } => "conflict",
            ConfigError::Range { .. } => "range",
            ConfigError::InvalidValue { .. } => "invalid_value",
        }
    }
}

/// A parsed configuration file: the scenario plus optional analysis grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigDocument {
    pub scenario: ScenarioConfig,
    /// Frequency sweep in MHz.
    pub sweep: Option<Grid>,
    /// Detector phase scan in radians.
    pub scan: Option<Grid>,
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            section: self.name.into(),
            key: key.into(),
            message: message.into(),
        }
    }

    fn range(&self, key: &str, value: f64, range: &str) -> ConfigError {
        ConfigError::Range {
            section: self.name.into(),
            key: key.into(),
            value,
            range: range.into(),
        }
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::MissingKey {
            section: self.name.into(),
            key: key.into(),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.table.and_then(|t| t.get(key)) {
            None => Ok(None),
            Some(Value::Float(v)) if v.is_finite() => Ok(Some(*v)),
            Some(Value::Float(_)) => Err(self.invalid(key, "must be a finite number")),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(self.invalid(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    fn require(&self, key: &str) -> Result<f64, ConfigError> {
        self.float(key)?.ok_or_else(|| self.missing(key))
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.table.and_then(|t| t.get(key)) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.invalid(key, "expected a non-negative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.table.and_then(|t| t.get(key)) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(self.invalid(key, format!("expected a string, got {}", other.type_str()))),
        }
    }

    fn unit(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.float(key)?.unwrap_or(default);
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(self.range(key, v, "[0, 1]"))
        }
    }
}

fn check_layout(root: &Table) -> Result<(), ConfigError> {
    for (name, value) in root {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
            return Err(ConfigError::UnknownSection(name.clone()));
        };
        let Value::Table(table) = value else {
            return Err(ConfigError::Syntax(format!("`{name}` must be a [section]")));
        };
        if let Some(key) = table.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey {
                section: name.clone(),
                key: key.clone(),
            });
        }
    }
    Ok(())
}

fn section<'a>(root: &'a Table, name: &'static str) -> Section<'a> {
    Section {
        name,
        table: root.get(name).and_then(Value::as_table),
    }
}

fn parse_source(sec: &Section) -> Result<Source, ConfigError> {
    let groups: [(&str, &[&str]); 3] = [
        ("variances", &["v_minus", "v_plus"]),
        ("dB levels", &["squeezing_db", "antisqueezing_db"]),
        ("cavity model", &["pump_x", "linewidth_mhz", "escape_eff"]),
    ];
    let present: Vec<&[&str]> = groups
        .iter()
        .filter(|(_, keys)| keys.iter().any(|k| sec.has(k)))
        .map(|(_, keys)| *keys)
        .collect();
    match present.as_slice() {
        [] => Err(sec.missing("v_minus | squeezing_db | pump_x")),
        [keys] if keys[0] == "v_minus" => {
            let v_minus = sec.require("v_minus")?;
            let v_plus = sec.require("v_plus")?;
            if v_minus <= 0.0 {
                return Err(sec.range("v_minus", v_minus, "(0, inf)"));
            }
            if v_plus * v_minus < 1.0 - 1e-12 {
                return Err(sec.range("v_plus", v_plus, "[1 / v_minus, inf)"));
            }
            Ok(Source::Fixed { v_minus, v_plus })
        }
        [keys] if keys[0] == "squeezing_db" => {
            let sq = sec.require("squeezing_db")?;
            let asq = sec.require("antisqueezing_db")?;
            if sq > 0.0 {
                return Err(sec.range("squeezing_db", sq, "(-inf, 0]"));
            }
            if asq < -sq {
                return Err(sec.range("antisqueezing_db", asq, "[-squeezing_db, inf)"));
            }
            Ok(Source::Fixed {
                v_minus: 10f64.powf(sq / 10.0),
                v_plus: 10f64.powf(asq / 10.0),
            })
        }
        [_] => {
            let x = sec.require("pump_x")?;
            let gamma = sec.require("linewidth_mhz")?;
            let eta = sec.float("escape_eff")?.unwrap_or(1.0);
            if !(0.0..1.0).contains(&x) {
                return Err(sec.range("pump_x", x, "[0, 1)"));
            }
            if gamma <= 0.0 {
                return Err(sec.range("linewidth_mhz", gamma, "(0, inf)"));
            }
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(sec.range("escape_eff", eta, "(0, 1]"));
            }
            Ok(Source::Spectrum(SourceSpectrumModel {
                pump_x: x,
                linewidth_mhz: gamma,
                escape_efficiency: eta,
            }))
        }
        _ => Err(ConfigError::Conflict {
            section: "source".into(),
            keys: present.iter().map(|k| k.join("+")).collect::<Vec<_>>().join(" vs "),
        }),
    }
}

fn parse_vbs(sec: &Section) -> Result<VbsSetting, ConfigError> {
    let t = sec.float("t")?;
    let mode = sec.string("mode")?;
    match (t, mode) {
        (Some(_), Some(_)) => Err(ConfigError::Conflict {
            section: "vbs".into(),
            keys: "t vs mode".into(),
        }),
        (Some(t), None) if (0.0..=1.0).contains(&t) => Ok(VbsSetting::Transmittance(t)),
        (Some(t), None) => Err(sec.range("t", t, "[0, 1]")),
        (None, Some("balance")) | (None, None) => Ok(VbsSetting::Balance),
        (None, Some("optimize")) => Ok(VbsSetting::Optimize),
        (None, Some(other)) => Err(sec.invalid(
            "mode",
            format!("expected \"balance\" or \"optimize\", got \"{other}\""),
        )),
    }
}

fn parse_grid(
    sec: &Section,
    keys: [&str; 3],
    non_negative: bool,
) -> Result<Option<Grid>, ConfigError> {
    let [start_key, stop_key, points_key] = keys;
    if !keys.iter().any(|k| sec.has(k)) {
        return Ok(None);
    }
    let start = sec.require(start_key)?;
    let stop = sec.require(stop_key)?;
    let points = sec.count(points_key)?.ok_or_else(|| sec.missing(points_key))?;
    if non_negative && start < 0.0 {
        return Err(sec.range(start_key, start, "[0, inf)"));
    }
    if stop <= start {
        return Err(sec.range(stop_key, stop, &format!("({start}, inf)")));
    }
    if points < 2 {
        return Err(sec.range(points_key, points as f64, "[2, inf)"));
    }
    Ok(Some(Grid { start, stop, points }))
}

/// Parses and validates a configuration file, applying defaults.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigError> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    check_layout(&root)?;
    let section = |name| section(&root, name);

    let source = parse_source(&section("source"))?;
    let vbs = parse_vbs(&section("vbs"))?;

    let arm_1550 = section("arm_1550");
    let eta_1550 = arm_1550.unit("efficiency_power", DEFAULT_EFFICIENCY_1550)?;
    let arm_532 = section("arm_532");
    let eta_532 = arm_532.unit("sfg_efficiency_power", DEFAULT_SFG_EFFICIENCY)?
        * arm_532.unit("pd_efficiency_power", DEFAULT_PD_EFFICIENCY_532)?
        * arm_532.unit("extra_power", 1.0)?;

    let detection = section("detection");
    let phase_1550 = detection.float("phase_1550_rad")?.unwrap_or(0.0);
    let phase_532 = detection.float("phase_532_rad")?.unwrap_or(0.0);
    let dark_floor_db = detection.float("dark_floor_db")?;

    let analysis = section("analysis");
    let analysis_freq_mhz = analysis
        .float("frequency_mhz")?
        .unwrap_or(DEFAULT_ANALYSIS_FREQ_MHZ);
    if analysis_freq_mhz < 0.0 {
        return Err(analysis.range("frequency_mhz", analysis_freq_mhz, "[0, inf)"));
    }
    let sweep = parse_grid(
        &analysis,
        ["sweep_start_mhz", "sweep_stop_mhz", "sweep_points"],
        true,
    )?;
    let scan = parse_grid(
        &analysis,
        ["scan_start_rad", "scan_stop_rad", "scan_points"],
        false,
    )?;

    Ok(ConfigDocument {
        scenario: ScenarioConfig {
            source,
            vbs,
            arms: ArmEfficiencies { eta_532, eta_1550 },
            phase_1550,
            phase_532,
            analysis_freq_mhz,
            dark_floor_db,
        },
        sweep,
        scan,
    })
}

/// Parses a configuration file and returns only the scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    Ok(parse_document(text)?.scenario)
}

/// Renders a document in the configuration format. Numbers are written in
/// shortest round-trip form, so `parse_document(&serialize(d)) == d`.
pub fn serialize(doc: &ConfigDocument) -> String {
    let s = &doc.scenario;
    let mut out = String::new();
    out.push_str("[source]\n");
    match s.source {
        Source::Fixed { v_minus, v_plus } => {
            let _ = writeln!(out, "v_minus = {v_minus:?}\nv_plus = {v_plus:?}");
        }
        Source::Spectrum(m) => {
            let _ = writeln!(
                out,
                "pump_x = {:?}\nlinewidth_mhz = {:?}\nescape_eff = {:?}",
                m.pump_x, m.linewidth_mhz, m.escape_efficiency
            );
        }
    }
    out.push_str("\n[vbs]\n");
    match s.vbs {
        VbsSetting::Transmittance(t) => {
            let _ = writeln!(out, "t = {t:?}");
        }
        VbsSetting::Balance => out.push_str("mode = \"balance\"\n"),
        VbsSetting::Optimize => out.push_str("mode = \"optimize\"\n"),
    }
    let _ = writeln!(out, "\n[arm_1550]\nefficiency_power = {:?}", s.arms.eta_1550);
    let _ = writeln!(
        out,
        "\n[arm_532]\nsfg_efficiency_power = {:?}\npd_efficiency_power = 1.0",
        s.arms.eta_532
    );
    let _ = writeln!(
        out,
        "\n[detection]\nphase_1550_rad = {:?}\nphase_532_rad = {:?}",
        s.phase_1550, s.phase_532
    );
    if let Some(floor) = s.dark_floor_db {
        let _ = writeln!(out, "dark_floor_db = {floor:?}");
    }
    let _ = writeln!(out, "\n[analysis]\nfrequency_mhz = {:?}", s.analysis_freq_mhz);
    if let Some(g) = doc.sweep {
        let _ = writeln!(
            out,
            "sweep_start_mhz = {:?}\nsweep_stop_mhz = {:?}\nsweep_points = {}",
            g.start, g.stop, g.points
        );
    }
    if let Some(g) = doc.scan {
        let _ = writeln!(
            out,
            "scan_start_rad = {:?}\nscan_stop_rad = {:?}\nscan_points = {}",
            g.start, g.stop, g.points
        );
    }
    out
}
