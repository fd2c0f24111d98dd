//! Sampled curves (phase scans, spectra) and their CSV/JSON forms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criteria::BELOW_FLOOR;
use crate::error::{Error, Result};

/// Inclusive, linearly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Grid of sideband frequencies in MHz.
pub type FrequencyGrid = Grid;

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let grid = Self { start, stop, points };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid of sideband frequencies; must not go below zero.
    pub fn frequency(start_mhz: f64, stop_mhz: f64, points: usize) -> Result<Self> {
        let grid = Self::new(start_mhz, stop_mhz, points)?;
        if start_mhz < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "frequency grid starts at {start_mhz} MHz"
            )));
        }
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.start >= self.stop {
            return Err(Error::InvalidGrid(format!(
                "start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(move |i| {
            if i + 1 == self.points {
                self.stop
            } else {
                self.start + step * i as f64
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    PhaseRad,
    FreqMhz,
}

impl Axis {
    pub fn column(&self) -> &'static str {
        match self {
            Axis::PhaseRad => "phase_rad",
            Axis::FreqMhz => "freq_mhz",
        }
    }
}

/// Statistical metadata of a Monte-Carlo point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSampling {
    pub stderr_db: Vec<f64>,
    pub n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub x: f64,
    #[serde(with = "db_vec")]
    pub values_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<PointSampling>,
}

impl TracePoint {
    pub fn new(x: f64, values_db: Vec<f64>) -> Self {
        Self {
            x,
            values_db,
            sampling: None,
        }
    }
}

/// A curve of relative noise powers (dB above vacuum) on one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub axis: Axis,
    pub channels: Vec<String>,
    pub points: Vec<TracePoint>,
}

impl TraceSeries {
    pub fn new(axis: Axis, channels: Vec<String>, points: Vec<TracePoint>) -> Self {
        Self {
            axis,
            channels,
            points,
        }
    }

    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.channels.iter().position(|c| c == name)?;
        Some(self.points.iter().map(|p| p.values_db[idx]).collect())
    }

    fn is_sampled(&self) -> bool {
        self.points.iter().any(|p| p.sampling.is_some())
    }

    fn header(&self) -> Vec<String> {
        let mut header = vec![self.axis.column().to_string()];
        header.extend(self.channels.iter().cloned());
        if self.is_sampled() {
            if self.channels.len() == 1 {
                header.push("stderr_db".into());
            } else {
                header.extend(self.channels.iter().map(|c| format!("{c}_stderr")));
            }
            header.push("n".into());
            header.push("seed".into());
        }
        header
    }

    /// CSV with a header row, `,` delimiter and LF line endings. Numbers carry
    /// 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let sampled = self.is_sampled();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header())?;
        for p in &self.points {
            let mut row = vec![format_number(p.x)];
            row.extend(p.values_db.iter().map(|&v| format_db(v)));
            if sampled {
                match &p.sampling {
                    Some(s) => {
                        row.extend(s.stderr_db.iter().map(|&v| format_number(v)));
                        row.push(s.n.to_string());
                        row.push(s.seed.to_string());
                    }
                    None => row.extend(
                        std::iter::repeat_n(String::new(), self.channels.len() + 2),
                    ),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Formats a float with 9 significant digits, trimming trailing zeros, like
/// C's `%.9g`.
pub fn format_number(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round first so the exponent reflects the rounded value (e.g. 9.9999999996).
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.to_string() }
    } else {
        s
    }
}

/// dB value for output; `-inf` becomes [`BELOW_FLOOR`].
pub fn format_db(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        BELOW_FLOOR.into()
    } else {
        format_number(v)
    }
}

mod db_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Db(#[serde(with = "crate::criteria::db_serde")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| Db(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Db>::deserialize(d)?.into_iter().map(|Db(x)| x).collect())
    }
}
