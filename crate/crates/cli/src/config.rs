//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without dashes. Entries become command-line
//! flags placed before the user's own, and are dropped for any key the user
//! passes explicitly, so flags always win.

use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value", i + 1);
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key == "config" {
            bail!("line {}: bad key {key:?}", i + 1);
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

/// The value of `--config`, if present.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn passes_flag(args: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    args.iter()
        .any(|a| *a == long || a.strip_prefix(&long).is_some_and(|r| r.starts_with('=')))
}

/// `argv` with the configuration inserted right after the program name.
pub fn merge(args: &[String], entries: &[(String, String)]) -> Vec<String> {
    let mut out = vec![args[0].clone()];
    for (k, v) in entries {
        if !passes_flag(&args[1..], k) {
            out.push(format!("--{k}={v}"));
        }
    }
    out.extend(args[1..].iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let e = parse("# header\nform = fermat4\n\nc=1,-2,3,4  # tuple\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("form".to_string(), "fermat4".to_string()),
                ("c".to_string(), "1,-2,3,4".to_string())
            ]
        );
        assert!(parse("no equals sign").is_err());
        assert!(parse("--form = x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let entries = parse("form = fermat6\nn = 7").unwrap();
        let merged = merge(&argv("dcubic expsum --form fermat4 --c 1,1,1,1"), &entries);
        assert_eq!(
            merged,
            argv("dcubic --n=7 expsum --form fermat4 --c 1,1,1,1")
        );
    }

    #[test]
    fn finds_config_path() {
        assert_eq!(
            config_path(&argv("dcubic x --config a.cfg")),
            Some("a.cfg".into())
        );
        assert_eq!(
            config_path(&argv("dcubic --config=b.cfg x")),
            Some("b.cfg".into())
        );
        assert_eq!(config_path(&argv("dcubic x")), None);
    }
}
