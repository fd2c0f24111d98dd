//! Machine-readable reports of an evaluated operating point.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::mc::SampleRun;
use crate::scenario::{OperatingPoint, OptimizeOutcome, ScenarioConfig};
use crate::spectral::Calibration;
use crate::trace::{format_db, format_number};

pub const TOOL_NAME: &str = "cvbridge";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
            samples: None,
        }
    }
}

/// Resolved config, operating point (Duan result and points A to D) and
/// optional Monte-Carlo runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub provenance: Provenance,
    pub config: ScenarioConfig,
    pub operating_point: OperatingPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizeOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sample_runs: Vec<SampleRun>,
}

impl ReportDocument {
    pub fn new(config: ScenarioConfig, operating_point: OperatingPoint) -> Self {
        Self {
            provenance: Provenance::current(),
            config,
            operating_point,
            optimization: None,
            sample_runs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serialisable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Flat `quantity,value` rows for CSV output.
    pub fn rows(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("tool".to_string(), self.provenance.tool.clone()),
            ("version".to_string(), self.provenance.version.clone()),
        ];
        rows.extend(operating_point_rows(&self.operating_point));
        if let Some(opt) = &self.optimization {
            rows.extend(optimization_rows(opt));
        }
        for run in &self.sample_runs {
            rows.extend(sample_run_rows(run));
        }
        if let Some(seed) = self.provenance.seed {
            rows.push(("seed".into(), seed.to_string()));
        }
        if let Some(n) = self.provenance.samples {
            rows.push(("samples".into(), n.to_string()));
        }
        rows
    }
}

fn num(v: f64) -> String {
    format_number(v)
}

pub fn operating_point_rows(op: &OperatingPoint) -> Vec<(String, String)> {
    let p = &op.points;
    vec![
        ("t".into(), num(op.t)),
        ("r".into(), num(op.r)),
        ("phase_1550_rad".into(), num(op.phase_1550)),
        ("phase_532_rad".into(), num(op.phase_532)),
        ("analysis_freq_mhz".into(), num(op.analysis_freq_mhz)),
        ("v_minus".into(), num(op.v_minus)),
        ("v_plus".into(), num(op.v_plus)),
        ("var_x_sum".into(), num(op.duan.var_x_sum)),
        ("var_p_diff".into(), num(op.duan.var_p_diff)),
        ("duan_i".into(), num(op.duan.i_value)),
        ("entangled".into(), op.duan.entangled.to_string()),
        ("point_a_db".into(), format_db(p.a.rel_db)),
        ("point_b_db".into(), format_db(p.b.rel_db)),
        ("point_c_db".into(), format_db(p.c.rel_db)),
        ("point_d_db".into(), format_db(p.d.rel_db)),
    ]
}

pub fn optimization_rows(opt: &OptimizeOutcome) -> Vec<(String, String)> {
    vec![
        ("t_optimal".into(), num(opt.point.t)),
        ("duan_i_optimal".into(), num(opt.point.duan.i_value)),
        ("t_balance".into(), num(opt.t_balance)),
        ("duan_i_balance".into(), num(opt.i_balance)),
        ("flat_objective".into(), opt.flat_objective.to_string()),
    ]
}

pub fn calibration_rows(cal: &Calibration) -> Vec<(String, String)> {
    vec![
        ("pump_x".into(), num(cal.model.pump_x)),
        ("linewidth_mhz".into(), num(cal.model.linewidth_mhz)),
        ("escape_eff".into(), num(cal.model.escape_efficiency)),
        ("t".into(), num(cal.transmittance)),
        ("target_db".into(), num(cal.landmarks.target_db)),
        ("ref_mhz".into(), num(cal.landmarks.ref_mhz)),
        ("achieved_ref_db".into(), num(cal.achieved_ref_db)),
        ("crossing_db".into(), num(cal.landmarks.crossing_db)),
        ("crossing_mhz".into(), num(cal.landmarks.crossing_mhz)),
        ("achieved_crossing_db".into(), num(cal.achieved_crossing_db)),
    ]
}

fn combo_label(run: &SampleRun) -> String {
    run.combo
        .terms()
        .iter()
        .map(|(obs, c)| format!("{}*X{}@{}", num(*c), obs.mode, num(obs.phase())))
        .collect::<Vec<_>>()
        .join("+")
}

pub fn sample_run_rows(run: &SampleRun) -> Vec<(String, String)> {
    let label = combo_label(run);
    vec![
        (format!("estimate[{label}]"), num(run.estimate)),
        (format!("std_error[{label}]"), num(run.std_error)),
    ]
}

/// Writes `quantity,value` CSV with LF line endings.
pub fn write_rows<W: Write>(rows: &[(String, String)], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["quantity", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()
}
