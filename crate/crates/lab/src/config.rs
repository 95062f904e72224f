//! Config files supply default flag values.
//!
//! A config file is TOML whose top-level keys are long flag names without the
//! leading dashes. A table named after a subcommand applies to that subcommand
//! only. Values become `--key value` arguments unless the flag already appears
//! on the command line, so explicit flags always win. Booleans set to `true`
//! become bare switches.
//!
//! ```toml
//! ensemble = "gue"
//! d = 64
//! seed = 7
//!
//! [escape]
//! eps = 0.4
//! t = "0:1:0.01"
//! ```

use std::path::Path;

use crate::error::{LabError, LabResult};

fn scalar(key: &str, v: &toml::Value) -> LabResult<Option<String>> {
    Ok(Some(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(x) => x.to_string(),
        toml::Value::Boolean(true) => return Ok(None),
        toml::Value::Array(a) => a
            .iter()
            .map(|x| {
                scalar(key, x)?
                    .ok_or_else(|| LabError::Usage(format!("config key `{key}`: bad list entry")))
            })
            .collect::<LabResult<Vec<_>>>()?
            .join(","),
        _ => {
            return Err(LabError::Usage(format!(
                "config key `{key}` has an unsupported value"
            )))
        }
    }))
}

fn on_command_line(args: &[String], flag: &str) -> bool {
    args.iter()
        .any(|a| a == flag || a.strip_prefix(flag).is_some_and(|r| r.starts_with('=')))
}

/// Extra arguments derived from the config text for `subcommand`, skipping
/// flags already present in `args`.
pub fn config_args(text: &str, subcommand: &str, args: &[String]) -> LabResult<Vec<String>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::format("config file", e.message().to_string()))?;
    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (k, v) in &table {
        match v {
            toml::Value::Table(section) => {
                if k == subcommand {
                    entries.extend(section.iter().map(|(k, v)| (k.clone(), v.clone())));
                }
            }
            _ => entries.push((k.clone(), v.clone())),
        }
    }
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    // Subcommand tables come after top-level keys, so they take precedence.
    for (k, v) in entries.into_iter().rev() {
        if k == "config" {
            return Err(LabError::Usage(
                "config files cannot include other config files".into(),
            ));
        }
        let flag = format!("--{k}");
        if !seen.insert(k.clone()) || on_command_line(args, &flag) {
            continue;
        }
        if matches!(v, toml::Value::Boolean(false)) {
            continue;
        }
        out.push(flag);
        if let Some(val) = scalar(&k, &v)? {
            out.push(val);
        }
    }
    Ok(out)
}

pub fn load_config_args(path: &Path, subcommand: &str, args: &[String]) -> LabResult<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    config_args(&text, subcommand, args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_override_config() {
        let extra = config_args(
            "seed = 3\nd = 16\n",
            "escape",
            &args(&["escape", "--seed", "9"]),
        )
        .unwrap();
        assert_eq!(extra, args(&["--d", "16"]));
        let extra = config_args("seed = 3\n", "escape", &args(&["escape", "--seed=9"])).unwrap();
        assert!(extra.is_empty());
    }

    #[test]
    fn sections_apply_to_their_subcommand() {
        let text = "eps = 0.1\nquiet = true\n[escape]\neps = 0.4\n[compile]\nn = 3\n";
        let mut extra = config_args(text, "escape", &args(&["escape"])).unwrap();
        extra.sort();
        assert_eq!(extra, args(&["--eps", "--quiet", "0.4"]));
    }

    #[test]
    fn arrays_become_comma_lists() {
        let extra = config_args("d = [16, 64]\n", "escape-scaling", &[]).unwrap();
        assert_eq!(extra, args(&["--d", "16,64"]));
    }

    #[test]
    fn malformed_config() {
        assert!(config_args("d = ", "x", &[]).is_err());
        assert!(config_args("config = \"a\"", "x", &[]).is_err());
    }
}
