use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", n + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key `{}`", n + 1, k.trim());
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut flags = Vec::new();
    for (k, v) in parse_config(&text)? {
        match v.as_str() {
            "true" => flags.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                flags.push(format!("--{k}").into());
                flags.push(v.into());
            }
        }
    }
    Ok(flags)
}

/// Splices flags from `--config FILE` in right after the subcommand name, so
/// that flags given on the command line, which come later, take precedence.
pub fn expand_config(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(it.next().context("--config needs a file")?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let flags = config_flags(Path::new(&path))?;
    let pos = rest
        .iter()
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()))
        .context("--config given without a subcommand")?;
    rest.splice(pos + 1..pos + 1, flags);
    Ok(rest)
}
