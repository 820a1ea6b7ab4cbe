//! Input signals `u(t) ∈ ℝᵐ`.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CalError, Result};
use crate::overload::{Phase, Schedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSignal {
    Zero {
        dim: usize,
    },
    /// `uᵢ(t) = offsetᵢ + amplitudeᵢ·sin(2π·frequencyᵢ·t + phaseᵢ)`.
    Sinusoid {
        amplitude: Vec<f64>,
        frequency: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        phase: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        offset: Vec<f64>,
    },
    /// `values[j]` holds on `[breakpoints[j-1], breakpoints[j])`; needs
    /// `values.len() == breakpoints.len() + 1`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    SmoothNoise(SmoothNoise),
    FromFile(SampledTable),
    /// The inner signal on A-phases, exactly zero elsewhere.
    Gated {
        inner: Box<InputSignal>,
        schedule: Schedule,
    },
}

impl InputSignal {
    pub fn constant(value: Vec<f64>) -> Self {
        InputSignal::PiecewiseConstant {
            breakpoints: Vec::new(),
            values: vec![value],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InputSignal::Zero { dim } => *dim,
            InputSignal::Sinusoid { amplitude, .. } => amplitude.len(),
            InputSignal::PiecewiseConstant { values, .. } => values.first().map_or(0, Vec::len),
            InputSignal::SmoothNoise(n) => n.spec.dim,
            InputSignal::FromFile(t) => t.dim(),
            InputSignal::Gated { inner, .. } => inner.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputSignal::Zero { .. } => "zero",
            InputSignal::Sinusoid { .. } => "sinusoid",
            InputSignal::PiecewiseConstant { .. } => "piecewise_constant",
            InputSignal::SmoothNoise(_) => "smooth_noise",
            InputSignal::FromFile(_) => "from_file",
            InputSignal::Gated { .. } => "gated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CalError::InvalidArgument(msg));
        match self {
            InputSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let m = amplitude.len();
                if frequency.len() != m
                    || !(phase.is_empty() || phase.len() == m)
                    || !(offset.is_empty() || offset.len() == m)
                {
                    return bad("sinusoid channel lists must have equal lengths".into());
                }
            }
            InputSignal::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad(format!(
                        "piecewise-constant input needs {} value rows, got {}",
                        breakpoints.len() + 1,
                        values.len()
                    ));
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("piecewise-constant breakpoints must be strictly increasing".into());
                }
                let m = values[0].len();
                if values.iter().any(|v| v.len() != m) {
                    return bad("piecewise-constant rows must share one dimension".into());
                }
            }
            InputSignal::SmoothNoise(n) => {
                if !(n.spec.bandwidth > 0.0) {
                    return bad("smooth-noise bandwidth must be > 0".into());
                }
            }
            InputSignal::Gated { inner, schedule } => {
                inner.validate()?;
                schedule.validate()?;
            }
            InputSignal::Zero { .. } | InputSignal::FromFile(_) => {}
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    /// Writes `u(t)` into `out`, which must have length [`dim`](Self::dim).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            InputSignal::Zero { .. } => out.iter_mut().for_each(|x| *x = 0.0),
            InputSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let ph = phase.get(i).copied().unwrap_or(0.0);
                    let off = offset.get(i).copied().unwrap_or(0.0);
                    *o = off + amplitude[i] * (2.0 * PI * frequency[i] * t + ph).sin();
                }
            }
            InputSignal::PiecewiseConstant { breakpoints, values } => {
                let seg = breakpoints.partition_point(|&b| b <= t);
                out.copy_from_slice(&values[seg]);
            }
            InputSignal::SmoothNoise(n) => n.eval_into(t, out),
            InputSignal::FromFile(table) => table.eval_into(t, out),
            InputSignal::Gated { inner, schedule } => {
                if matches!(schedule.phase_at(t), Phase::InA) {
                    inner.eval_into(t, out);
                } else {
                    out.iter_mut().for_each(|x| *x = 0.0);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothNoiseSpec {
    pub dim: usize,
    pub seed: u64,
    /// Highest frequency present (Hz).
    pub bandwidth: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Band-limited pseudo-random signal: a fixed number of sine harmonics at
/// or below the bandwidth with seeded amplitudes and phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "SmoothNoiseSpec", into = "SmoothNoiseSpec")]
pub struct SmoothNoise {
    spec: SmoothNoiseSpec,
    /// Per channel: (frequency, amplitude, phase) triples.
    harmonics: Vec<Vec<(f64, f64, f64)>>,
}

const NOISE_HARMONICS: usize = 8;

impl SmoothNoise {
    pub fn new(spec: SmoothNoiseSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let norm = spec.amplitude / (NOISE_HARMONICS as f64).sqrt();
        let harmonics = (0..spec.dim)
            .map(|_| {
                (1..=NOISE_HARMONICS)
                    .map(|j| {
                        let f = spec.bandwidth * j as f64 / NOISE_HARMONICS as f64;
                        let a = norm * rng.random_range(-1.0..1.0);
                        let ph = rng.random_range(0.0..2.0 * PI);
                        (f, a, ph)
                    })
                    .collect()
            })
            .collect();
        Self { spec, harmonics }
    }

    pub fn spec(&self) -> &SmoothNoiseSpec {
        &self.spec
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (o, channel) in out.iter_mut().zip(&self.harmonics) {
            *o = channel
                .iter()
                .map(|&(f, a, ph)| a * (2.0 * PI * f * t + ph).sin())
                .sum();
        }
    }
}

impl PartialEq for SmoothNoise {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl From<SmoothNoiseSpec> for SmoothNoise {
    fn from(spec: SmoothNoiseSpec) -> Self {
        SmoothNoise::new(spec)
    }
}

impl From<SmoothNoise> for SmoothNoiseSpec {
    fn from(n: SmoothNoise) -> Self {
        n.spec
    }
}

/// Samples loaded from a delimited text file: first column time (strictly
/// increasing), remaining columns the signal. Linear interpolation inside,
/// clamped to the end values outside.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SampledTable {
    path: String,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl SampledTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| CalError::InputFile {
            path: path_str.clone(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path_str)
    }

    /// Parses table text; `origin` is only used in error messages and
    /// serialization.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |reason: String| CalError::InputFile {
            path: origin.to_string(),
            reason,
        };
        let mut times = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() < 2 {
                return Err(err(format!("line {}: need a time column and at least one value", lineno + 1)));
            }
            if let Some(first) = values.first() {
                if first.len() != fields.len() - 1 {
                    return Err(err(format!("line {}: inconsistent column count", lineno + 1)));
                }
            }
            if let Some(&last) = times.last() {
                if fields[0] <= last {
                    return Err(err(format!("line {}: time column must be strictly increasing", lineno + 1)));
                }
            }
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(err(format!("line {}: non-finite value", lineno + 1)));
            }
            times.push(fields[0]);
            values.push(fields[1..].to_vec());
        }
        if times.is_empty() {
            return Err(err("no samples".into()));
        }
        Ok(Self {
            path: origin.to_string(),
            times,
            values,
        })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            out.copy_from_slice(&self.values[0]);
            return;
        }
        if t >= self.times[last] {
            out.copy_from_slice(&self.values[last]);
            return;
        }
        let hi = self.times.partition_point(|&s| s <= t);
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (1.0 - w) * self.values[lo][i] + w * self.values[hi][i];
        }
    }
}

impl PartialEq for SampledTable {
    fn eq(&self, other: &Self) -> bool {
        self.path == other.path && self.times == other.times && self.values == other.values
    }
}

impl TryFrom<String> for SampledTable {
    type Error = CalError;

    fn try_from(path: String) -> Result<Self> {
        SampledTable::load(path)
    }
}

impl From<SampledTable> for String {
    fn from(t: SampledTable) -> String {
        t.path
    }
}
