//! Config files: TOML keys named after long flags (`grid_n` or `grid-n`).
//! Top-level keys apply to every subcommand that has the flag; a table named
//! after the subcommand applies to that subcommand only and wins over the
//! top level. Flags given on the command line win over both.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, Command};
use toml::{Table, Value};

use crate::CliError;

/// Path given with `--config PATH` or `--config=PATH`, if any.
fn config_path(args: &[OsString]) -> Result<Option<PathBuf>, CliError> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return match it.next() {
                Some(p) => Ok(Some(PathBuf::from(p))),
                None => Err(CliError::Usage("--config needs a path".into())),
            };
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(PathBuf::from(p)));
        }
    }
    Ok(None)
}

fn render(v: &Value) -> Result<Option<String>, String> {
    Ok(Some(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(_) => return Ok(None),
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|x| render(x)?.ok_or_else(|| "arrays of booleans are not supported".to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            parts.join(",")
        }
        Value::Datetime(d) => d.to_string(),
        Value::Table(_) => return Err("nested tables are not supported".into()),
    }))
}

fn flag_arg<'a>(cmd: &'a Command, key: &str) -> Option<&'a Arg> {
    let long = key.replace('_', "-");
    cmd.get_arguments().find(|a| a.get_long() == Some(long.as_str()) || (a.is_positional() && a.get_id() == key))
}

fn takes_value(a: &Arg) -> bool {
    a.get_action().takes_values()
}

/// Whether the arguments after the subcommand already hold a positional.
fn has_positional(cmd: &Command, rest: &[OsString]) -> bool {
    let mut i = 0;
    while i < rest.len() {
        let s = rest[i].to_string_lossy();
        if s == "--" {
            return i + 1 < rest.len();
        }
        if let Some(name) = s.strip_prefix("--") {
            if !name.contains('=') {
                if let Some(a) = cmd.get_arguments().find(|a| a.get_long() == Some(name)) {
                    if takes_value(a) {
                        i += 1;
                    }
                }
            }
        } else if !s.starts_with('-') || s == "-" {
            return true;
        }
        i += 1;
    }
    false
}

fn given(rest: &[OsString], long: &str) -> bool {
    let eq = format!("--{long}=");
    rest.iter().any(|a| {
        let s = a.to_string_lossy();
        s == format!("--{long}") || s.starts_with(&eq)
    })
}

/// Returns `args` with defaults from the config file spliced in.
pub fn merge(args: Vec<OsString>, root: &Command) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;

    // Building propagates global flags such as `--config` to subcommands.
    let mut root = root.clone();
    root.build();
    let root = &root;
    let Some((pos, cmd)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a.to_string_lossy().as_ref()).map(|c| (i, c)))
    else {
        return Ok(args);
    };
    let sub = cmd.get_name().to_string();

    let mut entries: Vec<(String, Value)> = Vec::new();
    for (k, v) in &table {
        if v.is_table() {
            continue;
        }
        if flag_arg(cmd, k).is_some() {
            entries.push((k.clone(), v.clone()));
        } else if !root.get_subcommands().any(|c| flag_arg(c, k).is_some()) {
            return Err(CliError::Usage(format!("config key {k:?} matches no flag")));
        }
    }
    if let Some(section) = table.get(&sub) {
        let section = section
            .as_table()
            .ok_or_else(|| CliError::Usage(format!("config entry {sub:?} must be a table")))?;
        for (k, v) in section {
            if flag_arg(cmd, k).is_none() {
                return Err(CliError::Usage(format!("config key {sub}.{k} matches no flag of {sub}")));
            }
            entries.retain(|(old, _)| old.replace('_', "-") != k.replace('_', "-"));
            entries.push((k.clone(), v.clone()));
        }
    }

    let mut out = args[..=pos].to_vec();
    let mut rest = args[pos + 1..].to_vec();
    let mut extra = Vec::new();
    for (k, v) in entries {
        let arg = flag_arg(cmd, &k).expect("checked above");
        let text = render(&v).map_err(|e| CliError::Usage(format!("config key {k}: {e}")))?;
        if arg.is_positional() {
            if !has_positional(cmd, &rest) {
                let text = text.ok_or_else(|| CliError::Usage(format!("config key {k} must be a string")))?;
                out.push(text.into());
            }
            continue;
        }
        let long = arg.get_long().expect("named flag");
        if given(&rest, long) {
            continue;
        }
        match (takes_value(arg), text, v.as_bool()) {
            (true, Some(t), _) => extra.push(format!("--{long}={t}").into()),
            (false, None, Some(true)) => extra.push(format!("--{long}").into()),
            (false, None, Some(false)) => {}
            _ => return Err(CliError::Usage(format!("config key {k} has the wrong type"))),
        }
    }
    out.append(&mut rest);
    // Config flags go before any `--` so they are not read as positionals.
    let at = out.iter().position(|a| a == "--").unwrap_or(out.len());
    out.splice(at..at, extra);
    Ok(out)
}
