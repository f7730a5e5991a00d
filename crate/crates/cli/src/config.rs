//! Run configuration: a flat JSON file whose fields can each be overridden
//! from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use extsum::splitting::AlgorithmConfig;
use extsum::trace::Algorithm;
use extsum::{SelectionStrategy, StepSchedule};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, FieldError};

pub const SEED_ENV: &str = "EXTSUM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    MinNorm,
    Boundary,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// A real given either as a JSON number or as a string such as `"1/3"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Str(s) => parse_real(&s).map(Real).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a decimal number or a fraction `a/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("invalid number '{s}'"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("invalid number '{s}'"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in '{s}'"));
            }
            num / den
        }
        None => s.parse().map_err(|_| format!("invalid number '{s}'"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFields {
    pub c: Option<Real>,
    pub p: Option<Real>,
    pub q: Option<Real>,
}

/// Every field optional, as read from a file or collected from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub problem_id: Option<String>,
    pub algorithm: Option<Algorithm>,
    pub schedule: Option<ScheduleFields>,
    pub strategy: Option<StrategyName>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub record_every: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<OutputFormat>,
    pub unsafe_schedule: Option<bool>,
    pub early_stop_tol: Option<Real>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: PartialConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            problem_id,
            algorithm,
            strategy,
            seed,
            max_iter,
            record_every,
            output_path,
            output_format,
            unsafe_schedule,
            early_stop_tol
        );
        if let Some(s) = other.schedule {
            let base = self.schedule.get_or_insert_with(ScheduleFields::default);
            if s.c.is_some() {
                base.c = s.c;
            }
            if s.p.is_some() {
                base.p = s.p;
            }
            if s.q.is_some() {
                base.q = s.q;
            }
        }
        self
    }

    /// Checks every field and reports all problems at once.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let mut errors = Vec::new();
        let mut missing = |field: &'static str| errors.push(FieldError::new(field, "is required"));

        let problem_id = self.problem_id.clone();
        if problem_id.is_none() {
            missing("problem_id");
        }
        let schedule = self.schedule.clone().unwrap_or_default();
        let c = schedule.c.map_or(1.0, |r| r.0);
        let p = schedule.p.map(|r| r.0);
        let q = schedule.q.map(|r| r.0);
        if p.is_none() {
            missing("schedule.p");
        }
        if q.is_none() {
            missing("schedule.q");
        }
        if self.max_iter.is_none() {
            missing("max_iter");
        }
        if self.output_path.is_none() {
            missing("output_path");
        }

        if let Some(id) = &problem_id {
            if extsum::problems::builtin(id).is_err() {
                errors.push(FieldError::new(
                    "problem_id",
                    format!("unknown problem '{id}' (known: {})", extsum::problems::BUILTIN_IDS.join(", ")),
                ));
            }
        }
        for (name, v) in [("schedule.c", Some(c)), ("schedule.p", p), ("schedule.q", q)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    errors.push(FieldError::new(name, format!("must be finite and positive, got {v}")));
                }
            }
        }
        if self.max_iter == Some(0) {
            errors.push(FieldError::new("max_iter", "must be at least 1"));
        }
        let record_every = self.record_every.unwrap_or(1);
        if record_every == 0 {
            errors.push(FieldError::new("record_every", "must be at least 1"));
        }
        let strategy = self.strategy.unwrap_or(StrategyName::MinNorm);
        if strategy == StrategyName::Random && self.seed.is_none() {
            errors.push(FieldError::new("seed", format!("required by the random strategy (or set {SEED_ENV})")));
        }
        let early_stop_tol = self.early_stop_tol.map(|r| r.0);
        if let Some(t) = early_stop_tol {
            if !(t.is_finite() && t > 0.0) {
                errors.push(FieldError::new("early_stop_tol", format!("must be finite and positive, got {t}")));
            }
        }

        if !errors.is_empty() {
            return Err(CliError::InvalidConfig(errors));
        }
        Ok(RunConfig {
            problem_id: problem_id.unwrap(),
            algorithm: self.algorithm.unwrap_or(Algorithm::Efb),
            schedule: ScheduleParams {
                c,
                p: p.unwrap(),
                q: q.unwrap(),
            },
            strategy,
            seed: self.seed,
            max_iter: self.max_iter.unwrap(),
            record_every,
            output_path: self.output_path.unwrap(),
            output_format: self.output_format.unwrap_or_default(),
            unsafe_schedule: self.unsafe_schedule.unwrap_or(false),
            early_stop_tol,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

/// A fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem_id: String,
    pub algorithm: Algorithm,
    pub schedule: ScheduleParams,
    pub strategy: StrategyName,
    pub seed: Option<u64>,
    pub max_iter: usize,
    pub record_every: usize,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
    pub unsafe_schedule: bool,
    pub early_stop_tol: Option<f64>,
}

impl RunConfig {
    pub fn selection(&self) -> SelectionStrategy {
        match self.strategy {
            StrategyName::MinNorm => SelectionStrategy::MinNorm,
            StrategyName::Boundary => SelectionStrategy::Boundary,
            StrategyName::Random => SelectionStrategy::Random {
                seed: self.seed.unwrap_or(0),
            },
        }
    }

    pub fn algorithm_config(&self) -> Result<AlgorithmConfig, CliError> {
        let s = self.schedule;
        let schedule = StepSchedule::power(s.c, s.p, s.q)?;
        let mut cfg = AlgorithmConfig::new(schedule, self.selection(), self.max_iter)
            .with_record_every(self.record_every)
            .with_unsafe_schedule(self.unsafe_schedule);
        if let Some(t) = self.early_stop_tol {
            cfg = cfg.with_early_stop(t);
        }
        Ok(cfg)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} power(c={}, p={}, q={}) {:?} max_iter={}",
            self.problem_id, self.algorithm, self.schedule.c, self.schedule.p, self.schedule.q, self.strategy, self.max_iter
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_real(" 0.5 ").unwrap(), 0.5);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn file_values_and_overrides() {
        let file: PartialConfig = serde_json::from_str(
            r#"{"problem_id": "abs-box", "schedule": {"c": 1, "p": 1, "q": "1/3"},
                "max_iter": 10, "output_path": "t.csv", "strategy": "boundary"}"#,
        )
        .unwrap();
        let flags = PartialConfig {
            max_iter: Some(20),
            schedule: Some(ScheduleFields {
                p: Some(Real(0.9)),
                ..Default::default()
            }),
            ..Default::default()
        };
        let cfg = file.overlay(flags).resolve().unwrap();
        assert_eq!(cfg.max_iter, 20);
        assert_eq!(cfg.schedule, ScheduleParams { c: 1.0, p: 0.9, q: 1.0 / 3.0 });
        assert_eq!(cfg.strategy, StrategyName::Boundary);
        assert_eq!(cfg.algorithm, Algorithm::Efb);
        assert_eq!(cfg.output_format, OutputFormat::Csv);
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: Result<PartialConfig, _> = serde_json::from_str(r#"{"problem": "abs-box"}"#);
        assert!(r.unwrap_err().to_string().contains("unknown field `problem`"));
    }

    #[test]
    fn field_level_errors() {
        let cfg = PartialConfig {
            problem_id: Some("nope".into()),
            schedule: Some(ScheduleFields {
                c: Some(Real(-1.0)),
                p: Some(Real(1.0)),
                q: None,
            }),
            max_iter: Some(0),
            strategy: Some(StrategyName::Random),
            ..Default::default()
        };
        let Err(CliError::InvalidConfig(errs)) = cfg.resolve() else {
            panic!("expected field errors")
        };
        let fields: Vec<&str> = errs.iter().map(|e| e.field).collect();
        for f in ["problem_id", "schedule.c", "schedule.q", "max_iter", "output_path", "seed"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }
}
