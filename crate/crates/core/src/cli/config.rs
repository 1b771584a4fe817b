use std::collections::BTreeMap;
use std::path::Path;

use super::CliError;

pub const DEFAULT_N_MAX: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

/// Settings shared by every subcommand. Values from a config file are
/// applied first and command-line flags override them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_max: usize,
    /// Overrides the main tolerance of whichever subcommand runs.
    pub tolerance: Option<f64>,
    /// Overrides keyed by tolerance name.
    pub tolerances: BTreeMap<String, f64>,
    pub format: OutputFormat,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_max: DEFAULT_N_MAX,
            tolerance: None,
            tolerances: BTreeMap::new(),
            format: OutputFormat::Csv,
            seed: 0,
            parallel: false,
        }
    }
}

impl RunConfig {
    /// The tolerance called `name`: a named override, else the generic one,
    /// else `default`.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().or(self.tolerance).unwrap_or(default)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "n_max" | "n-max" => {
                let n: usize = value.parse().map_err(|_| format!("n_max must be an integer, got {value:?}"))?;
                if n < 1 {
                    return Err("n_max must be at least 1".into());
                }
                self.n_max = n;
            }
            "format" => self.format = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| format!("seed must be an integer, got {value:?}"))?,
            "parallel" => {
                self.parallel = value.parse().map_err(|_| format!("parallel must be true or false, got {value:?}"))?
            }
            "tol" => self.apply_tol(value)?,
            _ => match key.strip_prefix("tol.") {
                Some(name) => {
                    let v = parse_tol(value)?;
                    self.tolerances.insert(name.to_string(), v);
                }
                None => return Err(format!("unknown key {key:?}")),
            },
        }
        Ok(())
    }

    /// `VALUE` sets the generic tolerance, `NAME=VALUE` a named one.
    pub fn apply_tol(&mut self, spec: &str) -> Result<(), String> {
        match spec.split_once('=') {
            Some((name, v)) => {
                let v = parse_tol(v)?;
                self.tolerances.insert(name.trim().to_string(), v);
            }
            None => self.tolerance = Some(parse_tol(spec)?),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.load_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn load_str(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            self.set(key.trim(), value.trim()).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("tolerance must be a number, got {s:?}"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("tolerance must be positive, got {s}"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_precedence() {
        let mut c = RunConfig::default();
        c.load_str("# comment\nn_max = 12\nformat=json\ntol=1e-6\ntol.kms=1e-3\nseed=9\n").unwrap();
        assert_eq!(c.n_max, 12);
        assert_eq!(c.format, OutputFormat::Json);
        assert_eq!(c.tol("kms", 1.0), 1e-3);
        assert_eq!(c.tol("other", 1.0), 1e-6);
        assert_eq!(c.seed, 9);
        assert_eq!(RunConfig::default().tol("x", 0.5), 0.5);
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut c = RunConfig::default();
        assert_eq!(c.load_str("n_max=4\nbogus\n").unwrap_err(), "line 2: expected key=value");
        assert!(c.load_str("n_max=0").unwrap_err().contains("at least 1"));
        assert!(c.load_str("tol=-1").unwrap_err().contains("positive"));
        assert!(c.load_str("colour=red").unwrap_err().contains("unknown key"));
    }
}
