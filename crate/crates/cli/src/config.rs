//! `key = value` run configuration, merged with command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use perpetual_core::report::Format;
use perpetual_core::{SimParams, SourcePhasing};

use crate::CliError;

/// Every field optional: the result of reading a file or a set of flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub n_lines: Option<usize>,
    pub bias: Option<f64>,
    pub t_max: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub p_m: Option<f64>,
    pub p_s: Option<f64>,
    pub p_loss: Option<f64>,
    pub source_phasing: Option<SourcePhasing>,
    pub record_cadence: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! merge_fields {
    ($self:ident, $other:ident; $($f:ident),*) => {
        $( if $other.$f.is_some() { $self.$f = $other.$f; } )*
    };
}

impl PartialConfig {
    /// Fields set in `other` win.
    pub fn merge(mut self, other: PartialConfig) -> Self {
        merge_fields!(self, other; n_lines, bias, t_max, trials, seed, p_m, p_s, p_loss,
            source_phasing, record_cadence, out, format);
        self
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(v: &str) -> Result<Option<T>, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map(Some).map_err(|e| e.to_string())
        }
        match key {
            "n_lines" | "n" => self.n_lines = parse(value)?,
            "bias" => self.bias = parse(value)?,
            "t_max" => self.t_max = parse(value)?,
            "trials" => self.trials = parse(value)?,
            "seed" => self.seed = parse(value)?,
            "p_m" => self.p_m = parse(value)?,
            "p_s" => self.p_s = parse(value)?,
            "p_loss" => self.p_loss = parse(value)?,
            "source_phasing" | "phasing" => self.source_phasing = Some(parse_phasing(value)?),
            "record_cadence" => self.record_cadence = parse(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = parse(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

pub fn parse_phasing(s: &str) -> Result<SourcePhasing, String> {
    match s {
        "staggered" => Ok(SourcePhasing::Staggered),
        "in-phase" | "in_phase" => Ok(SourcePhasing::InPhase),
        other => Err(format!(
            "unknown phasing `{other}` (expected staggered or in-phase)"
        )),
    }
}

/// Parses configuration text. Errors name the 1-based line number.
pub fn parse_config(text: &str) -> Result<PartialConfig, CliError> {
    let mut cfg = PartialConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {lineno}: expected `key = value`, got `{}`",
                raw.trim()
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Config(format!(
                "line {lineno}: empty key or value"
            )));
        }
        cfg.set(key, value)
            .map_err(|e| CliError::Config(format!("line {lineno}: {key}: {e}")))?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<PartialConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_SATURATION_TRIALS: u64 = 3000;

/// Validated configuration of one simulation command.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SimParams,
    pub trials: u64,
    pub record_cadence: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl PartialConfig {
    /// Builds simulation parameters for `n_lines` and `bias`, taking every
    /// other value from `self` or its default.
    pub fn params_for(&self, n_lines: usize, bias: f64) -> Result<SimParams, CliError> {
        let cfg_err = |e: perpetual_core::Error| CliError::Config(e.to_string());
        let mut p = SimParams::new(n_lines, bias).map_err(cfg_err)?;
        if let Some(t) = self.t_max {
            p = p.with_t_max(t);
        }
        p = p.with_seed(self.seed.unwrap_or(0));
        p = p.with_phasing(self.source_phasing.unwrap_or_default());
        if let Some(v) = self.p_m {
            p = p.with_p_m(v).map_err(cfg_err)?;
        }
        if let Some(v) = self.p_s {
            p = p.with_p_s(v).map_err(cfg_err)?;
        }
        if let Some(v) = self.p_loss {
            p = p.with_p_loss(v).map_err(cfg_err)?;
        }
        Ok(p)
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n_lines.ok_or_else(|| {
            CliError::Config("missing `n_lines` (set it in the config or pass --n)".into())
        })
    }

    pub fn require_bias(&self) -> Result<f64, CliError> {
        self.bias.ok_or_else(|| {
            CliError::Config("missing `bias` (set it in the config or pass --bias)".into())
        })
    }

    /// Resolves a full configuration; `n_lines` and `bias` are required.
    pub fn resolve(&self, default_trials: u64) -> Result<Config, CliError> {
        let params = self.params_for(self.require_n()?, self.require_bias()?)?;
        self.finish(params, default_trials)
    }

    pub fn finish(&self, params: SimParams, default_trials: u64) -> Result<Config, CliError> {
        let trials = self.trials.unwrap_or(default_trials);
        if trials == 0 {
            return Err(CliError::Config("trials must be >= 1".into()));
        }
        let record_cadence = self
            .record_cadence
            .unwrap_or(perpetual_core::montecarlo::DEFAULT_CADENCE);
        if record_cadence == 0 {
            return Err(CliError::Config("record_cadence must be >= 1".into()));
        }
        Ok(Config {
            params,
            trials,
            record_cadence,
            out: self.out.clone(),
            format: self.format.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = parse_config(
            "# run setup\nn_lines = 40\nbias = 32   # near threshold\n\nseed=7\nsource_phasing = in-phase\nformat = json\n",
        )
        .unwrap();
        assert_eq!(cfg.n_lines, Some(40));
        assert_eq!(cfg.bias, Some(32.0));
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.source_phasing, Some(SourcePhasing::InPhase));
        assert_eq!(cfg.format, Some(Format::Json));
    }

    #[test]
    fn errors_name_the_line() {
        for (text, needle) in [
            ("n_lines = 40\nbias 32\n", "line 2"),
            ("n_lines = 40\n\nwidth = 3\n", "line 3: width: unknown key"),
            ("trials = many\n", "line 1: trials"),
            ("bias =\n", "line 1"),
        ] {
            let err = parse_config(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err}");
        }
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("n_lines = 40\nbias = 32\n").unwrap();
        let flags = PartialConfig {
            n_lines: Some(88),
            ..Default::default()
        };
        let cfg = file.merge(flags).resolve(DEFAULT_TRIALS).unwrap();
        assert_eq!(cfg.params.n_lines, 88);
        assert_eq!(cfg.params.bias, 32.0);
        assert_eq!(cfg.params.t_max, 300 * 88);
    }

    #[test]
    fn rejects_odd_n_and_missing_bias() {
        let odd = parse_config("n_lines = 7\nbias = 32\n").unwrap();
        assert!(matches!(odd.resolve(1), Err(CliError::Config(_))));
        let no_bias = parse_config("n_lines = 8\n").unwrap();
        let err = no_bias.resolve(1).unwrap_err().to_string();
        assert!(err.contains("bias"), "{err}");
    }

    #[test]
    fn overrides_reach_params() {
        let cfg = parse_config("n = 8\nbias = 32\np_s = 0.5\np_loss = 0.01\nt_max = 100\n")
            .unwrap()
            .resolve(1)
            .unwrap();
        assert_eq!(cfg.params.p_s(), 0.5);
        assert_eq!(cfg.params.p_loss(), 0.01);
        assert!(cfg.params.has_overrides());
        assert_eq!(cfg.params.t_max, 100);
    }
}
