use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("schedule start must be at least 1")]
    Start,
    #[error("schedule growth factor must exceed 1, got {0}")]
    Growth(f64),
    #[error("schedule needs at least 3 stages, got {0}")]
    Stages(usize),
    #[error("{name} must be positive, got {value}")]
    Tolerance { name: &'static str, value: f64 },
    #[error("maximum subdivision depth must be at least 10, got {0}")]
    Depth(usize),
}

/// Indices at which eventual properties are probed.
///
/// Stage `s` starts at `N₀ · gᔆ` and samples a block of consecutive indices
/// there, plus a few indices spread between consecutive stage starts.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSchedule {
    start: u64,
    growth: f64,
    stages: usize,
}

const BLOCK: u64 = 8;
const SPREAD: u64 = 3;

impl Default for SamplingSchedule {
    fn default() -> Self {
        SamplingSchedule {
            start: 8,
            growth: 2.0,
            stages: 12,
        }
    }
}

impl SamplingSchedule {
    pub fn new(start: u64, growth: f64, stages: usize) -> Result<SamplingSchedule, ConfigError> {
        if start < 1 {
            return Err(ConfigError::Start);
        }
        if !(growth > 1.0) || !growth.is_finite() {
            return Err(ConfigError::Growth(growth));
        }
        if stages < 3 {
            return Err(ConfigError::Stages(stages));
        }
        Ok(SamplingSchedule {
            start,
            growth,
            stages,
        })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn stage_count(&self) -> usize {
        self.stages
    }

    /// First index of every stage, strictly increasing.
    pub fn stage_starts(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::with_capacity(self.stages);
        let mut x = self.start as f64;
        for _ in 0..self.stages {
            let mut n = x.round() as u64;
            if let Some(&prev) = out.last() {
                n = n.max(prev + BLOCK);
            }
            out.push(n);
            x *= self.growth;
        }
        out
    }

    /// Indices sampled in each stage, in increasing order overall.
    pub fn stages(&self) -> Vec<Vec<u64>> {
        let starts = self.stage_starts();
        starts
            .iter()
            .enumerate()
            .map(|(s, &n)| {
                let mut idx: Vec<u64> = (n..n + BLOCK).collect();
                if let Some(&next) = starts.get(s + 1) {
                    let lo = n + BLOCK;
                    if next > lo {
                        let gap = next - lo;
                        for j in 1..=SPREAD {
                            let m = lo + gap * j / (SPREAD + 1);
                            if m > *idx.last().unwrap() && m < next {
                                idx.push(m);
                            }
                        }
                    }
                }
                idx
            })
            .collect()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.stages().into_iter().flatten().collect()
    }

    pub fn max_index(&self) -> u64 {
        self.stage_starts().last().copied().unwrap_or(1) + BLOCK - 1
    }
}

/// Per-index quadrature settings.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    pub presplit: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 50,
            presplit: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("quadrature absolute tolerance", self.abs_tol)?;
        positive("quadrature relative tolerance", self.rel_tol)?;
        if self.max_depth < 10 {
            return Err(ConfigError::Depth(self.max_depth));
        }
        Ok(())
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Tolerance { name, value })
    }
}

/// Whether per-index work may be spread over threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Settings shared by every decision procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct Context {
    pub schedule: SamplingSchedule,
    /// Tolerance for limits and reductions.
    pub tol: f64,
    /// Magnitude beyond which a monotone sequence counts as divergent.
    pub divergence_threshold: f64,
    pub quadrature: QuadratureConfig,
    pub execution: Execution,
}

impl Default for Context {
    fn default() -> Self {
        Context {
            schedule: SamplingSchedule::default(),
            tol: 1e-8,
            divergence_threshold: 1e12,
            quadrature: QuadratureConfig::default(),
            execution: Execution::default(),
        }
    }
}

impl Context {
    pub fn with_execution(mut self, execution: Execution) -> Context {
        self.execution = execution;
        self
    }

    pub fn with_schedule(mut self, schedule: SamplingSchedule) -> Context {
        self.schedule = schedule;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Context {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("tolerance", self.tol)?;
        positive("divergence threshold", self.divergence_threshold)?;
        self.quadrature.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_shape() {
        let s = SamplingSchedule::default();
        let starts = s.stage_starts();
        assert_eq!(starts.len(), 12);
        assert_eq!(starts[0], 8);
        assert_eq!(*starts.last().unwrap(), 16384);
        let idx = s.indices();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fractional_growth_still_increases() {
        let s = SamplingSchedule::new(1, 1.1, 20).unwrap();
        let idx = s.indices();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(SamplingSchedule::new(0, 2.0, 5).is_err());
        assert!(SamplingSchedule::new(1, 1.0, 5).is_err());
        assert!(Context::default().with_tol(0.0).validate().is_err());
    }
}
