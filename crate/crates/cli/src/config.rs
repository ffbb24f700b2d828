//! Flat `key = value` config files. Each key is the long name of a flag of
//! the chosen subcommand; entries are spliced in ahead of the command-line
//! flags so that the command line wins.

use std::ffi::OsString;
use std::fs;

use clap::{ArgAction, Command};

use crate::error::CliError;

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Removes `--config PATH` from `args` and returns the path.
fn take_config(args: &mut Vec<OsString>) -> Result<Option<OsString>, CliError> {
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--" {
            break;
        }
        if a == "--config" {
            if i + 1 >= args.len() {
                return Err(CliError::Usage("--config needs a path".into()));
            }
            found = Some(args.remove(i + 1));
            args.remove(i);
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            found = Some(OsString::from(p));
            args.remove(i);
            continue;
        }
        i += 1;
    }
    Ok(found)
}

/// Returns `args` with the config file entries inserted after the subcommand.
pub fn expand(mut args: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>, CliError> {
    let Some(path) = take_config(&mut args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let entries = parse(&text)?;
    let pos = args
        .iter()
        .position(|a| cmd.find_subcommand(a).is_some())
        .ok_or_else(|| CliError::Usage("a subcommand is required".into()))?;
    let sub = cmd.find_subcommand(&args[pos]).expect("found above");
    let mut injected = Vec::new();
    for (key, value) in entries {
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| CliError::Config(format!("unknown config key '{key}' for '{}'", sub.get_name())))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => {
                    return Err(CliError::Config(format!(
                        "'{key}' expects true or false, got '{other}'"
                    )))
                }
            }
        } else {
            injected.push(OsString::from(format!("--{key}={value}")));
        }
    }
    args.splice(pos + 1..pos + 1, injected);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let e = parse("# header\nseed = 42\n\nmethod=rose # trailing\nmcd_starts = 10\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("seed".into(), "42".into()),
                ("method".into(), "rose".into()),
                ("mcd-starts".into(), "10".into())
            ]
        );
        assert!(parse("seed 42\n").is_err());
    }
}
