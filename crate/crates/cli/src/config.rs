use std::path::{Path, PathBuf};
use std::str::FromStr;

use robustscan_core::{CorruptionKind, DatasetName, DatasetProfile, Severity};

use crate::error::CliError;

/// Directory searched for `<dataset>.toml` before falling back to the built-in profile.
pub const PROFILE_DIR_ENV: &str = "ROBUSTSCAN_PROFILE_DIR";

/// Resolves a dataset profile: an explicit file wins, then
/// `<profile_dir>/<dataset>.toml` if it exists, then the built-in table.
/// `overrides` are `key=value` strings applied last.
pub fn load_profile(
    dataset: &str,
    profile_file: Option<&Path>,
    profile_dir: Option<&Path>,
    overrides: &[String],
) -> Result<DatasetProfile, CliError> {
    let name = DatasetName::from_str(dataset).map_err(|e| CliError::Config(e.to_string()))?;
    let from_dir = profile_dir
        .map(|d| d.join(format!("{}.toml", name.as_str())))
        .filter(|p| p.is_file());
    let mut profile = match profile_file.map(Path::to_path_buf).or(from_dir) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let profile = DatasetProfile::from_toml_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if profile.name != name {
                return Err(CliError::Config(format!(
                    "{} describes {}, not {}",
                    path.display(),
                    profile.name,
                    name
                )));
            }
            profile
        }
        None => DatasetProfile::builtin(name),
    };
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {item:?} is not KEY=VALUE")))?;
        profile
            .set_override(key.trim(), value.trim())
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(profile)
}

/// Parses a comma list of corruption names; empty or `all` selects all eight.
pub fn parse_corruptions(items: &[String]) -> Result<Vec<CorruptionKind>, CliError> {
    parse_selection(items, &CorruptionKind::ALL)
}

pub fn parse_severities(items: &[String]) -> Result<Vec<Severity>, CliError> {
    parse_selection(items, &Severity::ALL)
}

fn parse_selection<T>(items: &[String], all: &[T]) -> Result<Vec<T>, CliError>
where
    T: FromStr<Err = robustscan_core::Error> + Copy + PartialEq,
{
    if items.is_empty() || items.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(all.to_vec());
    }
    let mut out = Vec::new();
    for s in items {
        let v = T::from_str(s.trim()).map_err(|e| CliError::Config(e.to_string()))?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile: DatasetProfile,
    pub input: PathBuf,
    pub output: PathBuf,
    pub corruptions: Vec<CorruptionKind>,
    pub severities: Vec<Severity>,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.corruptions.is_empty() || self.severities.is_empty() {
            return Err(CliError::Config("select at least one corruption and one severity".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        if !self.input.is_dir() {
            return Err(CliError::Config(format!("input {} is not a directory", self.input.display())));
        }
        let input = self.input.canonicalize().map_err(|e| CliError::io(&self.input, e))?;
        let output = self.output.canonicalize().unwrap_or_else(|_| self.output.clone());
        if input == output {
            return Err(CliError::Config("output root must differ from input root".into()));
        }
        Ok(())
    }
}
