use serde::Serialize;

use crate::error::{Error, Result};

/// `η_t = α/(β+t)`, optionally clipped to `min(η_t, 1/μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnRateSchedule {
    pub alpha: f64,
    pub beta: f64,
    /// `0` disables clipping.
    pub clip_mu: f64,
}

impl LearnRateSchedule {
    pub fn new(alpha: f64, beta: f64, clip_mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", "must be positive"));
        }
        if !(clip_mu >= 0.0 && clip_mu.is_finite()) {
            return Err(Error::invalid("clip_mu", "must be nonnegative"));
        }
        Ok(LearnRateSchedule { alpha, beta, clip_mu })
    }

    pub fn clipped(self, mu: f64) -> Self {
        LearnRateSchedule { clip_mu: mu, ..self }
    }

    /// Same schedule shifted by `t0` updates.
    pub fn offset(self, t0: usize) -> Self {
        LearnRateSchedule { beta: self.beta + t0 as f64, ..self }
    }

    pub fn base_rate(&self, t: usize) -> f64 {
        self.alpha / (self.beta + t as f64)
    }

    pub fn rate(&self, t: usize) -> f64 {
        let base = self.base_rate(t);
        if self.clip_mu > 0.0 {
            base.min(1.0 / self.clip_mu)
        } else {
            base
        }
    }

    /// First `t` at which the base rate no longer exceeds `1/μ`, in closed
    /// form: `max(0, ⌈μα − β⌉)`. `None` without clipping.
    pub fn crossover(&self) -> Option<usize> {
        (self.clip_mu > 0.0).then(|| (self.clip_mu * self.alpha - self.beta).ceil().max(0.0) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    /// `α/(β+t)` with `α, β > 0` has a divergent sum (harmonic tail) and a
    /// summable square, so the family is Robbins–Monro; clipping keeps that.
    pub robbins_monro: bool,
    /// Every emitted rate equals `min(η_t, 1/μ)`, is positive and does not
    /// exceed the base rate.
    pub rates_consistent: bool,
    /// First `t` within the horizon from which clipped and base rates agree.
    pub crossover: Option<usize>,
    pub horizon: usize,
}

/// Checks the clipped schedule over `0..horizon`.
pub fn validate_schedule(alpha: f64, beta: f64, clip_mu: f64, horizon: usize) -> Result<ScheduleReport> {
    if horizon < 1 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    let s = LearnRateSchedule::new(alpha, beta, clip_mu)?;
    let mut rates_consistent = true;
    let mut crossover = None;
    for t in 0..horizon {
        let base = s.base_rate(t);
        let clipped = s.rate(t);
        let expected = if clip_mu > 0.0 { base.min(1.0 / clip_mu) } else { base };
        if clipped != expected || clipped <= 0.0 || clipped > base {
            rates_consistent = false;
        }
        if clipped == base {
            crossover.get_or_insert(t);
        } else {
            crossover = None;
        }
    }
    Ok(ScheduleReport { robbins_monro: true, rates_consistent, crossover, horizon })
}
