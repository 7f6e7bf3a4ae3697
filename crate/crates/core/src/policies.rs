//! Static and scheduled mutation-rate streams `t ↦ p_t`.

use std::path::Path;

use crate::error::{invalid, Result};

/// Default upper clamp for scheduled rates.
pub const DEFAULT_CLAMP: f64 = 0.5;

/// A deterministic mutation-rate stream indexed by round `t >= 1`.
pub trait RateSchedule {
    fn rate_at(&self, t: u64) -> f64;

    /// `Some(p)` when every round uses the same rate `p`.
    fn constant_rate(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(u64) -> f64> RateSchedule for F {
    fn rate_at(&self, t: u64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateKind {
    Constant(f64),
    OptimalSchedule { alpha: f64 },
    ScaledSchedule { alpha: f64, c: f64 },
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePolicySpec {
    pub kind: RateKind,
    /// Upper clamp for schedules and tables. Constant rates ignore it.
    pub clamp_max: f64,
}

impl RatePolicySpec {
    pub fn constant(p: f64) -> Self {
        Self {
            kind: RateKind::Constant(p),
            clamp_max: DEFAULT_CLAMP,
        }
    }

    pub fn optimal(alpha: f64) -> Self {
        Self {
            kind: RateKind::OptimalSchedule { alpha },
            clamp_max: DEFAULT_CLAMP,
        }
    }

    pub fn scaled(alpha: f64, c: f64) -> Self {
        Self {
            kind: RateKind::ScaledSchedule { alpha, c },
            clamp_max: DEFAULT_CLAMP,
        }
    }

    pub fn table(rates: Vec<f64>) -> Self {
        Self {
            kind: RateKind::Table(rates),
            clamp_max: DEFAULT_CLAMP,
        }
    }
}

/// `min(clamp_max, α·ln(t)/t)`.
pub fn optimal_schedule_rate(t: u64, alpha: f64, clamp_max: f64) -> f64 {
    scaled_schedule_rate(t, alpha, 1.0, clamp_max)
}

/// `min(clamp_max, c·α·ln(t)/t)`.
pub fn scaled_schedule_rate(t: u64, alpha: f64, c: f64, clamp_max: f64) -> f64 {
    let t = t.max(1) as f64;
    (c * alpha * t.ln() / t).min(clamp_max)
}

/// A validated rate stream built from a [`RatePolicySpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateStream {
    spec: RatePolicySpec,
}

impl RateStream {
    pub fn spec(&self) -> &RatePolicySpec {
        &self.spec
    }
}

impl RateSchedule for RateStream {
    #[inline]
    fn rate_at(&self, t: u64) -> f64 {
        let clamp = self.spec.clamp_max;
        match &self.spec.kind {
            RateKind::Constant(p) => *p,
            RateKind::OptimalSchedule { alpha } => optimal_schedule_rate(t, *alpha, clamp),
            RateKind::ScaledSchedule { alpha, c } => scaled_schedule_rate(t, *alpha, *c, clamp),
            RateKind::Table(rates) => {
                let i = (t.max(1) - 1).min(rates.len() as u64 - 1) as usize;
                rates[i].min(clamp)
            }
        }
    }

    fn constant_rate(&self) -> Option<f64> {
        match &self.spec.kind {
            RateKind::Constant(p) => Some(*p),
            RateKind::Table(r) if r.len() == 1 => Some(r[0].min(self.spec.clamp_max)),
            _ => None,
        }
    }
}

pub fn make_rate_stream(spec: RatePolicySpec) -> Result<RateStream> {
    if !(0.0..=1.0).contains(&spec.clamp_max) {
        return invalid(format!("clamp_max {} outside [0, 1]", spec.clamp_max));
    }
    match &spec.kind {
        RateKind::Constant(p) if !(0.0..=1.0).contains(p) => {
            return invalid(format!("constant rate {p} outside [0, 1]"))
        }
        RateKind::OptimalSchedule { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => {
            return invalid(format!("alpha must be positive, got {alpha}"))
        }
        RateKind::ScaledSchedule { alpha, c } => {
            if !(*alpha > 0.0 && alpha.is_finite()) {
                return invalid(format!("alpha must be positive, got {alpha}"));
            }
            if !(*c > 0.0 && c.is_finite()) {
                return invalid(format!("scale c must be positive, got {c}"));
            }
        }
        RateKind::Table(rates) => {
            if rates.is_empty() {
                return invalid("rate table is empty");
            }
            if let Some(p) = rates.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return invalid(format!("table rate {p} outside [0, 1]"));
            }
        }
        _ => {}
    }
    Ok(RateStream { spec })
}

/// Reads one decimal rate per line; blank lines and `#` comments are skipped.
pub fn read_rate_table(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut rates = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(p) => rates.push(p),
            Err(_) => {
                return invalid(format!(
                    "{}:{}: `{line}` is not a number",
                    path.display(),
                    lineno + 1
                ))
            }
        }
    }
    Ok(rates)
}
