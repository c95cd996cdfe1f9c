//! `key = value` config files, applied underneath flags and the environment.

use std::path::Path;

use crate::CliError;

pub const ENV_PREFIX: &str = "CLUSTERKIT_";

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = k.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(CliError::Config(format!("line {}: bad key {key:?}", i + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Environment variable for a config key: `max-n` becomes `CLUSTERKIT_MAX_N`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('-', "_").to_ascii_uppercase())
}

/// Exports each entry as an environment variable unless one is already set,
/// so that flags override the environment, which overrides the file.
pub fn apply(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for (k, v) in parse(&text)? {
        let name = env_name(&k);
        if std::env::var_os(&name).is_none() {
            std::env::set_var(name, v);
        }
    }
    Ok(())
}

/// Config path from `--config PATH`, `--config=PATH` or `CLUSTERKIT_CONFIG`.
pub fn locate(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    std::env::var(format!("{ENV_PREFIX}CONFIG")).ok()
}
