//! The up-conversion experiment as a Gaussian pipeline.
//!
//! A squeezed vacuum is split on a variable beam splitter. The transmitted
//! part is up-converted and detected at 532 nm; the reflected part is
//! detected directly at 1550 nm. Up-conversion and detection are pure-loss
//! channels, so each arm is described by one overall power efficiency.
//!
//! Mode 0 is the 1550 nm arm and mode 1 the 532 nm arm. The source enters
//! the beam splitter on mode 1 and vacuum on mode 0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::criteria::{self, DuanResult, JointCombination, NoiseLevel, QuadratureObservable};
use crate::error::{check_range, Error, Result};
use crate::gaussian::{GaussianState, LossChannel};
use crate::search;
use crate::spectral::SourceSpectrumModel;
use crate::trace::{Axis, Grid, TracePoint, TraceSeries};

pub const MODE_1550: usize = 0;
pub const MODE_532: usize = 1;

/// SFG conversion efficiency at 532 nm.
pub const DEFAULT_SFG_EFFICIENCY: f64 = 0.9;
/// Photodiode quantum efficiency at 532 nm.
pub const DEFAULT_PD_EFFICIENCY_532: f64 = 0.9;
/// Overall efficiency of the 1550 nm arm (about 12 % loss).
pub const DEFAULT_EFFICIENCY_1550: f64 = 0.88;
/// Sideband frequency of the zero-span measurements.
pub const DEFAULT_ANALYSIS_FREQ_MHZ: f64 = 5.0;

/// Squeezed-light source feeding the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// Frequency-independent squeezed and anti-squeezed variances.
    Fixed { v_minus: f64, v_plus: f64 },
    /// Cavity source with a Lorentzian spectrum.
    Spectrum(SourceSpectrumModel),
}

impl Source {
    pub fn fixed(v_minus: f64, v_plus: f64) -> Result<Self> {
        let source = Source::Fixed { v_minus, v_plus };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Source::Fixed { v_minus, v_plus } => {
                check_range("V-", v_minus, f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
                check_range("V+", v_plus, f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
                if v_minus * v_plus < 1.0 - 1e-12 {
                    return Err(Error::OutOfRange {
                        name: "V- * V+",
                        value: v_minus * v_plus,
                        range: "[1, inf) (uncertainty relation)",
                    });
                }
                Ok(())
            }
            Source::Spectrum(model) => model.validate(),
        }
    }

    /// `(V-, V+)` at the given sideband frequency.
    pub fn variances_at(&self, freq_mhz: f64) -> Result<(f64, f64)> {
        match *self {
            Source::Fixed { v_minus, v_plus } => Ok((v_minus, v_plus)),
            Source::Spectrum(model) => model.variances(freq_mhz),
        }
    }
}

/// How the variable beam splitter is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VbsSetting {
    /// Explicit amplitude transmittance `t` towards the 532 nm arm.
    Transmittance(f64),
    /// Cancel the anti-squeezed noise in `P1550 - P532`.
    Balance,
    /// Minimise the Duan quantity.
    Optimize,
}

/// Overall power efficiencies of the two detection arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmEfficiencies {
    /// Up-conversion times 532 nm detection efficiency.
    pub eta_532: f64,
    pub eta_1550: f64,
}

impl ArmEfficiencies {
    pub fn new(eta_532: f64, eta_1550: f64) -> Result<Self> {
        let arms = Self { eta_532, eta_1550 };
        arms.validate()?;
        Ok(arms)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("532 nm arm efficiency", self.eta_532, 0.0, 1.0, "[0, 1]")?;
        check_range("1550 nm arm efficiency", self.eta_1550, 0.0, 1.0, "[0, 1]")?;
        Ok(())
    }

    /// Amplitude transmittance of the 532 nm arm.
    pub fn tau_532(&self) -> f64 {
        self.eta_532.sqrt()
    }

    /// Amplitude transmittance of the 1550 nm arm.
    pub fn tau_1550(&self) -> f64 {
        self.eta_1550.sqrt()
    }
}

impl Default for ArmEfficiencies {
    fn default() -> Self {
        Self {
            eta_532: DEFAULT_SFG_EFFICIENCY * DEFAULT_PD_EFFICIENCY_532,
            eta_1550: DEFAULT_EFFICIENCY_1550,
        }
    }
}

/// Which homodyne detector a phase refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "1550")]
    Nm1550,
    #[serde(rename = "532")]
    Nm532,
}

/// Full description of one experimental configuration.
///
/// Detector phases are measured from the squeezed quadrature of the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub source: Source,
    pub vbs: VbsSetting,
    pub arms: ArmEfficiencies,
    pub phase_1550: f64,
    pub phase_532: f64,
    pub analysis_freq_mhz: f64,
    /// Detector dark noise relative to vacuum; added to traces in the power domain.
    pub dark_floor_db: Option<f64>,
}

impl ScenarioConfig {
    pub fn new(source: Source, vbs: VbsSetting, arms: ArmEfficiencies) -> Self {
        Self {
            source,
            vbs,
            arms,
            phase_1550: 0.0,
            phase_532: 0.0,
            analysis_freq_mhz: DEFAULT_ANALYSIS_FREQ_MHZ,
            dark_floor_db: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.arms.validate()?;
        if let VbsSetting::Transmittance(t) = self.vbs {
            check_range("beam splitter transmittance t", t, 0.0, 1.0, "[0, 1]")?;
        }
        check_range(
            "analysis frequency (MHz)",
            self.analysis_freq_mhz,
            0.0,
            f64::MAX,
            "[0, inf)",
        )?;
        for (name, phase) in [("phase_1550", self.phase_1550), ("phase_532", self.phase_532)] {
            if !phase.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    value: phase,
                    range: "finite reals",
                });
            }
        }
        if let Some(floor) = self.dark_floor_db {
            if !floor.is_finite() {
                return Err(Error::OutOfRange {
                    name: "dark_floor_db",
                    value: floor,
                    range: "finite reals",
                });
            }
        }
        Ok(())
    }

    pub fn with_transmittance(mut self, t: f64) -> Self {
        self.vbs = VbsSetting::Transmittance(t);
        self
    }

    pub fn with_phases(mut self, phase_1550: f64, phase_532: f64) -> Self {
        self.phase_1550 = phase_1550;
        self.phase_532 = phase_532;
        self
    }

    pub fn with_analysis_freq(mut self, freq_mhz: f64) -> Self {
        self.analysis_freq_mhz = freq_mhz;
        self
    }

    /// Source variances at the analysis frequency.
    pub fn source_variances(&self) -> Result<(f64, f64)> {
        self.source.variances_at(self.analysis_freq_mhz)
    }

    /// Amplitude transmittance after applying the beam splitter directive.
    pub fn resolve_transmittance(&self) -> Result<f64> {
        match self.vbs {
            VbsSetting::Transmittance(t) => {
                check_range("beam splitter transmittance t", t, 0.0, 1.0, "[0, 1]")
            }
            VbsSetting::Balance => solve_balance(self.arms.tau_532(), self.arms.tau_1550()),
            VbsSetting::Optimize => Ok(optimize_vbs(self)?.point.t),
        }
    }

    /// Copy of the config with the beam splitter pinned to its resolved value.
    pub fn resolved(&self) -> Result<Self> {
        Ok(self.with_transmittance(self.resolve_transmittance()?))
    }
}

/// Variances of the four joint quadratures at the extrema of a phase scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTable {
    /// `Var[X1550 + X532]`
    pub a: NoiseLevel,
    /// `Var[X1550 - X532]`
    pub b: NoiseLevel,
    /// `Var[P1550 + P532]`
    pub c: NoiseLevel,
    /// `Var[P1550 - P532]`
    pub d: NoiseLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub t: f64,
    pub r: f64,
    pub phase_1550: f64,
    pub phase_532: f64,
    pub analysis_freq_mhz: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub duan: DuanResult,
    pub points: PointTable,
}

/// Result of tuning the beam splitter for the smallest Duan value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub point: OperatingPoint,
    pub t_balance: f64,
    pub i_balance: f64,
    /// Set when the source is not squeezed and the balance point is returned.
    pub flat_objective: bool,
}

/// Two-mode state at the detectors: mode 0 is the 1550 nm arm, mode 1 the
/// 532 nm arm, each rotated by its detector phase.
pub fn build_state(config: &ScenarioConfig) -> Result<GaussianState> {
    let t = match config.vbs {
        VbsSetting::Transmittance(t) => t,
        _ => return Err(Error::UnresolvedSplitter),
    };
    config.validate()?;
    let (v_minus, v_plus) = config.source_variances()?;
    // `validate` has checked V- V+ >= 1, which is exact for a diagonal
    // source; a numerical eigenvalue test loses precision once V+ is huge.
    let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, v_minus, v_plus]));
    GaussianState::from_validated(DVector::zeros(4), cov)
        .beamsplitter(MODE_1550, MODE_532, t)?
        .attenuate(&LossChannel::new(MODE_1550, config.arms.eta_1550)?)?
        .attenuate(&LossChannel::new(MODE_532, config.arms.eta_532)?)?
        .rotate(MODE_1550, config.phase_1550)?
        .rotate(MODE_532, config.phase_532)
}

/// Closed-form joint variances:
///
/// ```text
/// Var[X1550 + X532] = 2 - (1 - V-) (t tau532 + r tau1550)^2
/// Var[P1550 - P532] = 2 + (V+ - 1) (t tau532 - r tau1550)^2
/// ```
///
/// with `r = sqrt(1 - t^2)` and `tau` the amplitude efficiencies.
pub fn analytic_variances(
    v_minus: f64,
    v_plus: f64,
    t: f64,
    tau_532: f64,
    tau_1550: f64,
) -> Result<(f64, f64)> {
    check_range("V-", v_minus, 0.0, f64::MAX, "[0, inf)")?;
    check_range("V+", v_plus, 0.0, f64::MAX, "[0, inf)")?;
    check_range("beam splitter transmittance t", t, 0.0, 1.0, "[0, 1]")?;
    check_range("tau_532", tau_532, 0.0, 1.0, "[0, 1]")?;
    check_range("tau_1550", tau_1550, 0.0, 1.0, "[0, 1]")?;
    let r = (1.0 - t * t).sqrt();
    let sum = t * tau_532 + r * tau_1550;
    let diff = t * tau_532 - r * tau_1550;
    Ok((
        2.0 - (1.0 - v_minus) * sum * sum,
        2.0 + (v_plus - 1.0) * diff * diff,
    ))
}

/// Transmittance satisfying `t tau532 = r tau1550`.
pub fn solve_balance(tau_532: f64, tau_1550: f64) -> Result<f64> {
    check_range("tau_532", tau_532, 0.0, 1.0, "[0, 1]")?;
    check_range("tau_1550", tau_1550, 0.0, 1.0, "[0, 1]")?;
    let norm = tau_532.hypot(tau_1550);
    if norm == 0.0 {
        return Err(Error::OutOfRange {
            name: "tau_532 and tau_1550",
            value: 0.0,
            range: "not both zero",
        });
    }
    Ok(tau_1550 / norm)
}

fn duan_objective(v_minus: f64, v_plus: f64, tau_532: f64, tau_1550: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let (x, p) = analytic_variances(v_minus, v_plus, t.clamp(0.0, 1.0), tau_532, tau_1550)
            .expect("parameters validated by caller");
        x + p
    }
}

/// Beam splitter transmittance minimising the Duan value, with the source
/// taken at the analysis frequency. The Duan test assumes both detectors are
/// locked to the source quadratures, so the returned point is evaluated with
/// both phases at zero whatever the config says.
pub fn optimize_vbs(config: &ScenarioConfig) -> Result<OptimizeOutcome> {
    config.validate()?;
    let (v_minus, v_plus) = config.source_variances()?;
    let (tau_532, tau_1550) = (config.arms.tau_532(), config.arms.tau_1550());
    let t_balance = solve_balance(tau_532, tau_1550)?;
    let objective = duan_objective(v_minus, v_plus, tau_532, tau_1550);
    let i_balance = objective(t_balance);

    let flat_objective = v_minus >= 1.0;
    let t_star = if flat_objective {
        t_balance
    } else {
        let golden = search::golden_section(&objective, 0.0, 1.0, 1e-10, 200);
        // The objective is a sinusoid in the splitter angle; guard against a
        // bracket that settles on the wrong side by checking the ends too.
        let mut best = (t_balance, i_balance);
        for candidate in [golden, 0.0, 1.0] {
            let value = objective(candidate);
            if value < best.1 {
                best = (candidate, value);
            }
        }
        best.0
    };

    let point = evaluate(&config.with_transmittance(t_star).with_phases(0.0, 0.0))?;
    Ok(OptimizeOutcome {
        point,
        t_balance,
        i_balance,
        flat_objective,
    })
}

/// Builds the state, runs the Duan test and tabulates points A to D.
pub fn evaluate(config: &ScenarioConfig) -> Result<OperatingPoint> {
    let config = config.resolved()?;
    let t = config.resolve_transmittance()?;
    let state = build_state(&config)?;
    let (v_minus, v_plus) = config.source_variances()?;
    let duan = criteria::duan(&state, MODE_1550, MODE_532)?;
    let pair = |phase: f64, sign: f64| -> Result<NoiseLevel> {
        let combo = JointCombination::new(vec![
            (QuadratureObservable::new(MODE_1550, phase), 1.0),
            (QuadratureObservable::new(MODE_532, phase), sign),
        ])?;
        criteria::joint_variance(&state, &combo)
    };
    let quarter = std::f64::consts::FRAC_PI_2;
    Ok(OperatingPoint {
        t,
        r: (1.0 - t * t).sqrt(),
        phase_1550: config.phase_1550,
        phase_532: config.phase_532,
        analysis_freq_mhz: config.analysis_freq_mhz,
        v_minus,
        v_plus,
        duan,
        points: PointTable {
            a: pair(0.0, 1.0)?,
            b: pair(0.0, -1.0)?,
            c: pair(quarter, 1.0)?,
            d: pair(quarter, -1.0)?,
        },
    })
}

/// Adds the dark-noise floor (if any) to a variance with vacuum reference 2
/// and converts to dB.
pub(crate) fn measured_level(variance: f64, reference: f64, floor_db: Option<f64>) -> Result<f64> {
    let floor = match floor_db {
        Some(db) => reference * 10f64.powf(db / 10.0),
        None => 0.0,
    };
    Ok(NoiseLevel::new(variance + floor, reference)?.rel_db)
}

/// Noise of the summed detector signals `X^theta_1550 + X^phi_532` while one
/// detector's phase is swept over `grid`; the other keeps its configured phase.
pub fn phase_scan(config: &ScenarioConfig, grid: &Grid, scanned: Arm) -> Result<TraceSeries> {
    grid.validate()?;
    let config = config.resolved()?;
    let points = grid
        .values()
        .map(|phase| {
            let cfg = match scanned {
                Arm::Nm532 => config.with_phases(config.phase_1550, phase),
                Arm::Nm1550 => config.with_phases(phase, config.phase_532),
            };
            let state = build_state(&cfg)?;
            let level = criteria::joint_variance(&state, &JointCombination::x_sum(MODE_1550, MODE_532))?;
            let db = measured_level(level.variance, level.reference_variance, cfg.dark_floor_db)?;
            Ok(TracePoint::new(phase, vec![db]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSeries::new(Axis::PhaseRad, vec!["sum_db".into()], points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn paper_like(v_minus: f64, v_plus: f64) -> ScenarioConfig {
        ScenarioConfig::new(
            Source::fixed(v_minus, v_plus).unwrap(),
            VbsSetting::Balance,
            ArmEfficiencies::default(),
        )
    }

    #[test]
    fn unsqueezed_source_gives_vacuum() {
        for &t in &[0.0, 0.3, 0.9, 1.0] {
            let cfg = paper_like(1.0, 1.0).with_transmittance(t);
            let s = build_state(&cfg).unwrap();
            assert!((s.cov() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        }
    }

    #[test]
    fn full_transmission_routes_squeezing_to_532() {
        let cfg = paper_like(0.2, 5.0).with_transmittance(1.0);
        let s = build_state(&cfg).unwrap();
        let eta = cfg.arms.eta_532;
        assert!((s.cov()[(2, 2)] - (eta * 0.2 + 1.0 - eta)).abs() < 1e-12);
        assert!((s.cov()[(3, 3)] - (eta * 5.0 + 1.0 - eta)).abs() < 1e-12);
        let arm = s.reduce(&[MODE_1550]).unwrap();
        assert!((arm.cov() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn unresolved_directive_rejected() {
        assert_eq!(build_state(&paper_like(0.5, 2.0)), Err(Error::UnresolvedSplitter));
    }

    #[test]
    fn analytic_vacuum_and_balance() {
        assert_eq!(analytic_variances(1.0, 1.0, 0.4, 0.9, 0.8).unwrap(), (2.0, 2.0));
        let (t532, t1550) = (0.9, 0.88f64.sqrt());
        let t = solve_balance(t532, t1550).unwrap();
        let (_, p) = analytic_variances(0.1, 30.0, t, t532, t1550).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert!(analytic_variances(0.5, 2.0, 1.1, 0.9, 0.9).is_err());
    }

    #[test]
    fn balance_examples() {
        assert!((solve_balance(0.7, 0.7).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        let t = solve_balance(0.9, 0.88f64.sqrt()).unwrap();
        // t^2 = 0.88 / (0.81 + 0.88)
        assert!((t * t - 0.88 / 1.69).abs() < 1e-12);
        assert!(t * t > 0.5);
        assert!((t * t - 0.521).abs() < 1e-3);
        assert_eq!(solve_balance(1.0, 0.0).unwrap(), 0.0);
        assert!(solve_balance(0.0, 0.0).is_err());
    }

    #[test]
    fn paper_point_reconstruction() {
        let (t532, t1550) = (0.9, 0.88f64.sqrt());
        let t = solve_balance(t532, t1550).unwrap();
        // Invert the X-sum formula for -5.5 dB at balance.
        let target = criteria::from_db(-5.5, 2.0).unwrap();
        let gain = (t * t532 + (1.0 - t * t).sqrt() * t1550).powi(2);
        let v_minus = 1.0 - (2.0 - target) / gain;
        assert!((v_minus - 0.1486).abs() < 1e-3);
        let (x, _) = analytic_variances(v_minus, 20.0, t, t532, t1550).unwrap();
        assert!((x - 0.5636).abs() < 1e-4);

        let cfg = paper_like(v_minus, 20.0);
        let op = evaluate(&cfg).unwrap();
        assert!((op.duan.var_x_sum - target).abs() < 1e-12);
        assert!((op.duan.var_p_diff - 2.0).abs() < 1e-12);
        assert!((op.duan.i_value - 2.5636).abs() < 1e-3);
        assert!(op.duan.entangled);
        assert!((op.points.a.rel_db + 5.5).abs() < 1e-9);
        assert!(op.points.d.rel_db.abs() < 1e-9);
    }

    #[test]
    fn decoupled_splitter_is_not_entangled() {
        let op = evaluate(&paper_like(0.2, 5.0).with_transmittance(0.0)).unwrap();
        assert!(op.duan.i_value >= 4.0);
        assert!(!op.duan.entangled);
        let op = evaluate(&paper_like(1.0, 1.0)).unwrap();
        assert!((op.duan.i_value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn points_match_joint_variances() {
        let cfg = paper_like(0.15, 12.0).with_transmittance(0.6);
        let op = evaluate(&cfg).unwrap();
        assert_eq!(op.points.a.variance, op.duan.var_x_sum);
        assert!((op.points.d.variance - op.duan.var_p_diff).abs() < 1e-12);
        // B and C differ from A and D only by the combination signs.
        let s = build_state(&cfg).unwrap();
        let b = criteria::joint_variance(
            &s,
            &JointCombination::new(vec![
                (QuadratureObservable::x(0), 1.0),
                (QuadratureObservable::x(1), -1.0),
            ])
            .unwrap(),
        )
        .unwrap();
        assert!((b.variance - op.points.b.variance).abs() < 1e-12);
    }

    #[test]
    fn optimizer_symmetric_case_hits_balance() {
        let cfg = ScenarioConfig::new(
            Source::fixed(0.2, 6.0).unwrap(),
            VbsSetting::Optimize,
            ArmEfficiencies::new(0.8, 0.8).unwrap(),
        );
        let out = optimize_vbs(&cfg).unwrap();
        assert!((out.point.t - FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(!out.flat_objective);
    }

    #[test]
    fn optimizer_flags_unsqueezed_source() {
        let cfg = ScenarioConfig::new(
            Source::fixed(1.0, 1.0).unwrap(),
            VbsSetting::Optimize,
            ArmEfficiencies::default(),
        );
        let out = optimize_vbs(&cfg).unwrap();
        assert!(out.flat_objective);
        assert_eq!(out.point.t, out.t_balance);
    }

    #[test]
    fn phase_scan_vacuum_is_flat() {
        let cfg = paper_like(1.0, 1.0);
        let grid = Grid::new(0.0, 2.0 * PI, 33).unwrap();
        let trace = phase_scan(&cfg, &grid, Arm::Nm532).unwrap();
        assert_eq!(trace.points.len(), 33);
        assert!(trace.points.iter().all(|p| p.values_db[0].abs() < 1e-12));
    }

    #[test]
    fn phase_scan_extrema() {
        let (t532, t1550) = (0.9, 0.88f64.sqrt());
        let t = solve_balance(t532, t1550).unwrap();
        let gain = (t * t532 + (1.0 - t * t).sqrt() * t1550).powi(2);
        let v_minus = 1.0 - (2.0 - criteria::from_db(-5.5, 2.0).unwrap()) / gain;
        let grid = Grid::new(0.0, 2.0 * PI, 721).unwrap();

        let squeezed = paper_like(v_minus, 15.0);
        let trace = phase_scan(&squeezed, &grid, Arm::Nm532).unwrap();
        let min = trace.points.iter().map(|p| p.values_db[0]).fold(f64::INFINITY, f64::min);
        assert!((min + 5.5).abs() < 1e-9);

        // Anti-squeezed 1550 quadrature: the sum only reaches the vacuum
        // level, exactly at point D and to within a small cross term elsewhere.
        let anti = squeezed.with_phases(FRAC_PI_2, 0.0);
        let trace = phase_scan(&anti, &grid, Arm::Nm532).unwrap();
        let min = trace.points.iter().map(|p| p.values_db[0]).fold(f64::INFINITY, f64::min);
        assert!(min > -0.1 && min < 1e-9, "min = {min}");
        let at_d = trace.points.iter().find(|p| (p.x - 3.0 * FRAC_PI_2).abs() < 1e-9).unwrap();
        assert!(at_d.values_db[0].abs() < 1e-9);
    }

    #[test]
    fn dark_floor_raises_trace() {
        let mut cfg = paper_like(1.0, 1.0);
        cfg.dark_floor_db = Some(-10.0);
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let trace = phase_scan(&cfg, &grid, Arm::Nm532).unwrap();
        let expected = 10.0 * 1.1f64.log10();
        assert!(trace.points.iter().all(|p| (p.values_db[0] - expected).abs() < 1e-12));
    }
}
