//! Run configuration: named presets and a flat `key = value` file format.
//!
//! ```text
//! # lines starting with '#' are comments
//! preset = kappa-n2-p3      # optional, must come first
//! epsilons = 3^-2, 3^-3, 3^-4
//! samples = 4000
//! ```

use serde::{Deserialize, Serialize};

use crate::covering::{Basepoint, Region, SamplerConfig};
use crate::error::{Error, Result};
use crate::hecke_enum::{self, Limits};

pub const PRESETS: [&str; 3] = ["figure1", "kappa-n2-p3", "kappa-n3-p2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: String,
    pub n: usize,
    pub p: u64,
    /// Height used by single coverage runs.
    pub k: u32,
    /// Largest height tried by minimal-height scans.
    pub k_max: u32,
    pub epsilons: Vec<f64>,
    pub x0: Basepoint,
    pub region: Region,
    pub samples: u64,
    pub seed: u64,
    pub target: f64,
    pub max_reps: u64,
    pub metric_scale: f64,
    pub output_dir: String,
    /// Top of the half-plane window drawn by the figure.
    pub y_view: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            n: 2,
            p: 3,
            k: 3,
            k_max: 6,
            epsilons: vec![3f64.powi(-3)],
            x0: Basepoint::Random { seed: 1 },
            region: Region::StandardDomain { y_max: 2.0 },
            samples: 2000,
            seed: 0,
            target: 0.9,
            max_reps: Limits::default().max_reps,
            metric_scale: 1.0,
            output_dir: "out".into(),
            y_view: 2.0,
        }
    }
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self { name: name.to_string(), output_dir: format!("out/{name}"), ..Self::default() };
        let cfg = match name {
            "figure1" => Self { samples: 200_000, ..base },
            "kappa-n2-p3" => Self {
                epsilons: (2..=5).map(|j| 3f64.powi(-j)).collect(),
                target: 0.8,
                samples: 2000,
                k_max: 7,
                ..base
            },
            "kappa-n3-p2" => Self {
                n: 3,
                p: 2,
                k: 2,
                k_max: 3,
                // consecutive points one unit apart on the regression axis
                epsilons: (0..3).map(|j| 0.44 * 2f64.powf(-1.2 * j as f64)).collect(),
                region: Region::IwasawaBox { x_bound: 0.5, t_min: -0.15, t_max: 0.6 },
                target: 0.8,
                samples: 600,
                ..base
            },
            other => {
                return Err(Error::InvalidArgument(format!("unknown preset {other:?}; known presets: {}", PRESETS.join(", "))))
            }
        };
        Ok(cfg)
    }

    /// Parses the `key = value` format, starting from the defaults or from a
    /// `preset = ...` line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen_setting = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "preset" {
                if seen_setting {
                    return Err(Error::Parse(format!("line {}: preset must precede other settings", lineno + 1)));
                }
                cfg = Self::preset(value)?;
            } else {
                cfg.set(key, value).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            }
            seen_setting = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one setting. Region keys are `region` (`standard_domain` or
    /// `iwasawa_box`) and `region.y_max`, `region.x_bound`, `region.t_min`,
    /// `region.t_max`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("bad value {v:?} for {key}")))
        }
        match key {
            "name" => self.name = value.to_string(),
            "n" => self.n = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "k_max" => self.k_max = num(key, value)?,
            "epsilon" | "epsilons" => {
                self.epsilons = value.split(',').map(|v| parse_real(v.trim())).collect::<Result<_>>()?;
            }
            "x0" => self.x0 = Basepoint::parse(value)?,
            "samples" => self.samples = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "target" => self.target = num(key, value)?,
            "max_reps" | "cap" => self.max_reps = num(key, value)?,
            "metric_scale" => self.metric_scale = parse_real(value)?,
            "output_dir" => self.output_dir = value.to_string(),
            "y_view" => self.y_view = parse_real(value)?,
            "region" => {
                self.region = match value {
                    "standard_domain" => Region::StandardDomain { y_max: 2.0 },
                    "iwasawa_box" => Region::IwasawaBox { x_bound: 0.5, t_min: -0.15, t_max: 0.6 },
                    other => return Err(Error::Parse(format!("unknown region {other:?}"))),
                }
            }
            "region.y_max" => match &mut self.region {
                Region::StandardDomain { y_max } => *y_max = parse_real(value)?,
                _ => return Err(Error::Parse("region.y_max needs region = standard_domain".into())),
            },
            "region.x_bound" | "region.t_min" | "region.t_max" => match &mut self.region {
                Region::IwasawaBox { x_bound, t_min, t_max } => {
                    let slot = match key {
                        "region.x_bound" => x_bound,
                        "region.t_min" => t_min,
                        _ => t_max,
                    };
                    *slot = parse_real(value)?;
                }
                _ => return Err(Error::Parse(format!("{key} needs region = iwasawa_box"))),
            },
            other => return Err(Error::Parse(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("n must be at least 2".into()));
        }
        if !hecke_enum::is_prime(self.p) {
            return Err(Error::InvalidArgument(format!("{} is not prime", self.p)));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidArgument("epsilons must be a non-empty list of positive numbers".into()));
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(Error::InvalidArgument("target must lie in (0, 1)".into()));
        }
        if !(self.metric_scale > 0.0) || !self.metric_scale.is_finite() {
            return Err(Error::InvalidArgument("metric_scale must be positive".into()));
        }
        if self.max_reps == 0 {
            return Err(Error::InvalidArgument("the representative cap must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        self.region.validate(self.n)
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig { region: self.region.clone(), samples: self.samples, seed: self.seed, metric_scale: self.metric_scale }
    }

    pub fn limits(&self) -> Limits {
        Limits { max_reps: self.max_reps }
    }
}

/// A decimal number or `base^exponent`, e.g. `3^-2`.
pub fn parse_real(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad number {s:?}"));
    match s.split_once('^') {
        Some((b, e)) => {
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let e: f64 = e.trim().parse().map_err(|_| bad())?;
            Ok(b.powf(e))
        }
        None => s.parse().map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            RunConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn file_format() {
        let cfg = RunConfig::parse(
            "preset = kappa-n2-p3\n# comment\nepsilons = 3^-2, 0.05 # trailing\nsamples=10\nregion.y_max = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.name, "kappa-n2-p3");
        assert_eq!(cfg.samples, 10);
        assert!((cfg.epsilons[0] - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(cfg.region, Region::StandardDomain { y_max: 3.0 });
        assert!(RunConfig::parse("samples = 3\npreset = figure1").is_err());
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("p = 4").is_err());
        assert!(RunConfig::parse("n = 3").is_err(), "standard domain needs n = 2");
    }
}
