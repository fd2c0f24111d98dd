//! Frequency-dependent squeezing from a below-threshold parametric cavity.
//!
//! The squeezed and anti-squeezed variances follow the usual Lorentzian
//! cavity response
//!
//! ```text
//! V-(f) = 1 - eta 4x / ((1 + x)^2 + (f / gamma)^2)
//! V+(f) = 1 + eta 4x / ((1 - x)^2 + (f / gamma)^2)
//! ```
//!
//! with `x` the pump amplitude relative to threshold, `gamma` the cavity
//! half-width (MHz) and `eta` the escape efficiency.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{self, JointCombination};
use crate::error::{check_range, Error, Result};
use crate::scenario::{self, ScenarioConfig, Source, VbsSetting, MODE_1550, MODE_532};
use crate::search;
use crate::trace::{Axis, FrequencyGrid, TracePoint, TraceSeries};

const PUMP_MAX: f64 = 1.0 - 1e-9;
const LINEWIDTH_MIN_MHZ: f64 = 1e-6;
const LINEWIDTH_MAX_MHZ: f64 = 1e6;
const PARAM_TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpectrumModel {
    /// Pump amplitude normalised to threshold, in `[0, 1)`.
    pub pump_x: f64,
    /// Cavity half-width at half maximum in MHz.
    pub linewidth_mhz: f64,
    /// Escape efficiency of the cavity, in `(0, 1]`.
    pub escape_efficiency: f64,
}

impl SourceSpectrumModel {
    pub fn new(pump_x: f64, linewidth_mhz: f64, escape_efficiency: f64) -> Result<Self> {
        let model = Self {
            pump_x,
            linewidth_mhz,
            escape_efficiency,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_x.is_finite() && self.pump_x >= 0.0 && self.pump_x < 1.0) {
            return Err(Error::OutOfRange {
                name: "pump parameter x",
                value: self.pump_x,
                range: "[0, 1)",
            });
        }
        if !(self.linewidth_mhz.is_finite() && self.linewidth_mhz > 0.0) {
            return Err(Error::OutOfRange {
                name: "linewidth (MHz)",
                value: self.linewidth_mhz,
                range: "(0, inf)",
            });
        }
        if !(self.escape_efficiency > 0.0 && self.escape_efficiency <= 1.0) {
            return Err(Error::OutOfRange {
                name: "escape efficiency",
                value: self.escape_efficiency,
                range: "(0, 1]",
            });
        }
        Ok(())
    }

    /// `(V-, V+)` at sideband frequency `freq_mhz`.
    pub fn variances(&self, freq_mhz: f64) -> Result<(f64, f64)> {
        check_range("sideband frequency (MHz)", freq_mhz, 0.0, f64::MAX, "[0, inf)")?;
        let x = self.pump_x;
        let detuning = (freq_mhz / self.linewidth_mhz).powi(2);
        let gain = self.escape_efficiency * 4.0 * x;
        let v_minus = 1.0 - gain / ((1.0 + x).powi(2) + detuning);
        let v_plus = 1.0 + gain / ((1.0 - x).powi(2) + detuning);
        Ok((v_minus, v_plus))
    }
}

/// Spectral features the calibrated source must reproduce: a noise level at a
/// reference frequency, and the frequency at which a second level is crossed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub target_db: f64,
    pub ref_mhz: f64,
    pub crossing_db: f64,
    pub crossing_mhz: f64,
}

impl Default for Landmarks {
    /// -5.5 dB at 5 MHz, still 3 dB of correlation at 20 MHz.
    fn default() -> Self {
        Self {
            target_db: -5.5,
            ref_mhz: 5.0,
            crossing_db: -3.0,
            crossing_mhz: 20.0,
        }
    }
}

/// Calibrated model and the landmark values it actually reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: SourceSpectrumModel,
    pub landmarks: Landmarks,
    pub transmittance: f64,
    /// X-sum noise at the reference frequency.
    pub achieved_ref_db: f64,
    /// X-sum noise at the crossing frequency.
    pub achieved_crossing_db: f64,
}

/// X-sum noise (dB) through the full pipeline for a given source model.
fn xsum_db(base: &ScenarioConfig, model: SourceSpectrumModel, freq_mhz: f64) -> Result<f64> {
    let cfg = ScenarioConfig {
        source: Source::Spectrum(model),
        ..base.with_analysis_freq(freq_mhz)
    };
    let state = scenario::build_state(&cfg)?;
    Ok(criteria::joint_variance(&state, &JointCombination::x_sum(MODE_1550, MODE_532))?.rel_db)
}

/// Finds pump parameter and linewidth such that the X-sum noise of `config`
/// hits `landmarks`. Outer bisection on the pump parameter against the
/// reference level; inner bisection on the linewidth against the crossing.
///
/// The escape efficiency is taken from `config` when its source is already
/// a spectrum model, and is 1 otherwise. The beam splitter must be set
/// explicitly or to the balance point.
pub fn calibrate_to_landmarks(landmarks: &Landmarks, config: &ScenarioConfig) -> Result<Calibration> {
    let Landmarks {
        target_db,
        ref_mhz,
        crossing_db,
        crossing_mhz,
    } = *landmarks;
    for (name, v) in [
        ("target_db", target_db),
        ("crossing_db", crossing_db),
        ("ref_mhz", ref_mhz),
        ("crossing_mhz", crossing_mhz),
    ] {
        if !v.is_finite() {
            return Err(Error::OutOfRange {
                name,
                value: v,
                range: "finite reals",
            });
        }
    }
    check_range("reference frequency (MHz)", ref_mhz, 0.0, f64::MAX, "[0, inf)")?;
    if crossing_mhz <= ref_mhz {
        return Err(Error::Infeasible(format!(
            "crossing frequency {crossing_mhz} MHz must lie above the reference frequency {ref_mhz} MHz"
        )));
    }
    if matches!(config.vbs, VbsSetting::Optimize) {
        return Err(Error::Infeasible(
            "calibration needs a fixed beam splitter (explicit t or balance), not optimize".into(),
        ));
    }
    let escape = match config.source {
        Source::Spectrum(m) => m.escape_efficiency,
        Source::Fixed { .. } => 1.0,
    };
    let base = config.resolved()?;
    let t = base.resolve_transmittance()?;

    if target_db > 0.0 || crossing_db > 0.0 {
        return Err(Error::Infeasible(format!(
            "a squeezed source cannot raise the X-sum noise above vacuum ({target_db} dB, {crossing_db} dB requested)"
        )));
    }
    if target_db == 0.0 {
        if crossing_db == 0.0 {
            return Ok(Calibration {
                model: SourceSpectrumModel::new(0.0, crossing_mhz, escape)?,
                landmarks: *landmarks,
                transmittance: t,
                achieved_ref_db: 0.0,
                achieved_crossing_db: 0.0,
            });
        }
        return Err(Error::Infeasible(format!(
            "noise must rise with frequency, but {crossing_db} dB at {crossing_mhz} MHz lies below {target_db} dB at {ref_mhz} MHz"
        )));
    }
    if crossing_db <= target_db {
        return Err(Error::Infeasible(format!(
            "noise must rise with frequency, but {crossing_db} dB at {crossing_mhz} MHz does not lie above {target_db} dB at {ref_mhz} MHz"
        )));
    }

    // Loss-limited floor: V- -> 1 - eta as x -> 1 at zero frequency.
    let tau_532 = base.arms.tau_532();
    let tau_1550 = base.arms.tau_1550();
    let gain = (t * tau_532 + (1.0 - t * t).sqrt() * tau_1550).powi(2);
    let floor_var = 2.0 - escape * gain;
    let floor_db = if floor_var > 0.0 {
        criteria::to_db(floor_var, 2.0)?
    } else {
        f64::NEG_INFINITY
    };
    if target_db <= floor_db {
        return Err(Error::Infeasible(format!(
            "{target_db} dB exceeds the loss-limited bound {floor_db:.4} dB \
             (2 - eta_src (t tau532 + r tau1550)^2 = {floor_var:.6})"
        )));
    }
    if crossing_db <= floor_db {
        return Err(Error::Infeasible(format!(
            "{crossing_db} dB exceeds the loss-limited bound {floor_db:.4} dB"
        )));
    }

    let model_at = |x: f64, gamma: f64| SourceSpectrumModel {
        pump_x: x,
        linewidth_mhz: gamma,
        escape_efficiency: escape,
    };
    // Linewidth placing the crossing landmark, or None if pump x cannot reach it.
    let linewidth_for = |x: f64| -> Option<f64> {
        let residual = |gamma: f64| {
            xsum_db(&base, model_at(x, gamma), crossing_mhz).map_or(f64::NAN, |db| db - crossing_db)
        };
        search::bisect(residual, LINEWIDTH_MIN_MHZ, LINEWIDTH_MAX_MHZ, PARAM_TOL, MAX_ITER)
    };
    let ref_residual = |x: f64| match linewidth_for(x) {
        Some(gamma) => xsum_db(&base, model_at(x, gamma), ref_mhz).map_or(f64::NAN, |db| db - target_db),
        None => f64::INFINITY,
    };

    let x = search::bisect(ref_residual, 0.0, PUMP_MAX, PARAM_TOL * 1e-3, MAX_ITER).ok_or_else(|| {
        Error::Infeasible(format!(
            "no pump parameter below threshold gives {target_db} dB at {ref_mhz} MHz while \
             keeping {crossing_db} dB at {crossing_mhz} MHz (loss-limited bound {floor_db:.4} dB)"
        ))
    })?;
    let gamma = linewidth_for(x).ok_or_else(|| {
        Error::Infeasible(format!("crossing {crossing_db} dB at {crossing_mhz} MHz unreachable"))
    })?;
    let model = SourceSpectrumModel::new(x, gamma, escape)?;
    Ok(Calibration {
        model,
        landmarks: *landmarks,
        transmittance: t,
        achieved_ref_db: xsum_db(&base, model, ref_mhz)?,
        achieved_crossing_db: xsum_db(&base, model, crossing_mhz)?,
    })
}

/// Noise of `X1550 + X532` and `P1550 - P532` against sideband frequency.
///
/// The beam splitter is resolved once at the configured analysis frequency
/// and held fixed across the sweep. Every point is the single-frequency
/// [`scenario::evaluate`] of the config at that frequency, plus the dark
/// floor when one is configured.
pub fn spectrum_sweep(config: &ScenarioConfig, grid: &FrequencyGrid) -> Result<TraceSeries> {
    grid.validate()?;
    if grid.start < 0.0 {
        return Err(Error::InvalidGrid(format!(
            "frequency grid starts at {} MHz",
            grid.start
        )));
    }
    let fixed = config.resolved()?;
    let freqs: Vec<f64> = grid.values().collect();
    let points = freqs
        .par_iter()
        .map(|&f| {
            let op = scenario::evaluate(&fixed.with_analysis_freq(f))?;
            let a = &op.points.a;
            let d = &op.points.d;
            let xsum = scenario::measured_level(a.variance, a.reference_variance, fixed.dark_floor_db)?;
            let pdiff = scenario::measured_level(d.variance, d.reference_variance, fixed.dark_floor_db)?;
            Ok(TracePoint::new(f, vec![xsum, pdiff]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSeries::new(
        Axis::FreqMhz,
        vec!["xsum_db".into(), "pdiff_db".into()],
        points,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ArmEfficiencies, Source};

    #[test]
    fn pump_off_is_vacuum() {
        let m = SourceSpectrumModel::new(0.0, 10.0, 1.0).unwrap();
        for f in [0.0, 3.0, 100.0] {
            assert_eq!(m.variances(f).unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn far_out_of_band_approaches_vacuum() {
        let m = SourceSpectrumModel::new(0.7, 10.0, 0.95).unwrap();
        let (vm, vp) = m.variances(1e7).unwrap();
        assert!((vm - 1.0).abs() < 1e-9 && (vp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_threshold_at_dc() {
        let m = SourceSpectrumModel::new(0.5, 10.0, 1.0).unwrap();
        let (vm, vp) = m.variances(0.0).unwrap();
        assert!((vm - (1.0 - 2.0 / 2.25)).abs() < 1e-15);
        assert!((vm - 0.111_111_111_111).abs() < 1e-12);
        assert!((vp - 9.0).abs() < 1e-12);
        assert!(vm * vp >= 1.0 - 1e-12);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(SourceSpectrumModel::new(1.0, 10.0, 1.0).is_err());
        assert!(SourceSpectrumModel::new(-0.1, 10.0, 1.0).is_err());
        assert!(SourceSpectrumModel::new(0.5, 0.0, 1.0).is_err());
        assert!(SourceSpectrumModel::new(0.5, 10.0, 0.0).is_err());
        assert!(SourceSpectrumModel::new(0.5, 10.0, 1.0).unwrap().variances(-1.0).is_err());
    }

    fn lossless() -> ScenarioConfig {
        ScenarioConfig::new(
            Source::fixed(1.0, 1.0).unwrap(),
            VbsSetting::Balance,
            ArmEfficiencies::new(1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn zero_target_gives_pump_off() {
        let lm = Landmarks {
            target_db: 0.0,
            ref_mhz: 5.0,
            crossing_db: 0.0,
            crossing_mhz: 20.0,
        };
        let cal = calibrate_to_landmarks(&lm, &lossless()).unwrap();
        assert_eq!(cal.model.pump_x, 0.0);
        assert_eq!(cal.model.linewidth_mhz, 20.0);
    }

    #[test]
    fn infeasible_targets_raise() {
        let reference = ScenarioConfig::new(
            Source::fixed(1.0, 1.0).unwrap(),
            VbsSetting::Balance,
            ArmEfficiencies::default(),
        );
        let too_deep = Landmarks {
            target_db: -15.0,
            ..Landmarks::default()
        };
        let err = calibrate_to_landmarks(&too_deep, &reference).unwrap_err();
        match err {
            Error::Infeasible(msg) => assert!(msg.contains("loss-limited bound"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let inverted = Landmarks {
            crossing_db: -6.0,
            ..Landmarks::default()
        };
        assert!(matches!(calibrate_to_landmarks(&inverted, &reference), Err(Error::Infeasible(_))));
        let optimize = ScenarioConfig { vbs: VbsSetting::Optimize, ..reference };
        assert!(calibrate_to_landmarks(&Landmarks::default(), &optimize).is_err());
    }

    #[test]
    fn flat_sweep_without_pump() {
        let cfg = ScenarioConfig {
            source: Source::Spectrum(SourceSpectrumModel::new(0.0, 8.0, 1.0).unwrap()),
            ..lossless()
        };
        let trace = spectrum_sweep(&cfg, &FrequencyGrid::frequency(0.0, 50.0, 11).unwrap()).unwrap();
        for p in &trace.points {
            assert!(p.values_db.iter().all(|v| v.abs() < 1e-12));
        }
    }
}
