//! `--config file.json`: keys are long flag names, values are what would
//! follow the flag. The file's flags are spliced in ahead of the command
//! line's, so with `args_override_self` the command line wins.

use serde_json::Value;

use crate::CliError;

const NESTED: [&str; 5] = ["kernel", "curvature", "shift", "localize", "hs"];

fn config_path(args: &[String]) -> Result<Option<String>, CliError> {
    let mut found = None;
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        if a == "--" {
            break;
        }
        if a == "--config" {
            let v = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
            found = Some(v.clone());
            i += 1;
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
        i += 1;
    }
    Ok(found)
}

/// Flags equivalent to a config document.
pub fn flags_from_config(doc: &Value) -> Result<Vec<String>, CliError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| CliError::Usage("config must be a JSON object".into()))?;
    let mut out = Vec::new();
    for (key, value) in obj {
        if key == "config" {
            return Err(CliError::Usage(
                "config files cannot include other configs".into(),
            ));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| -> Result<String, CliError> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(CliError::Usage(format!(
                    "config key {key:?} has an unsupported value {v}"
                ))),
            }
        };
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone());
                    out.push(scalar(item)?);
                }
            }
            v => {
                out.push(flag);
                out.push(scalar(v)?);
            }
        }
    }
    Ok(out)
}

/// `argv` with the config file's flags inserted right after the
/// (sub)command words.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    let flags = flags_from_config(&doc)?;
    let words = match args.get(1) {
        Some(cmd) if NESTED.contains(&cmd.as_str()) => 3,
        _ => 2,
    };
    let at = words.min(args.len());
    let mut out = args[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}
