//! Job files: a JSON object naming a `command` plus flag values, e.g.
//! `{"command": "symmetry", "group": "orth", "n": 3, "K": 4, "in": "m.json",
//! "samples": 10000, "seed": 6, "tol": "1/1000000000"}`.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

const COMMANDS: [&str; 5] = ["partitions", "transform", "independence", "symmetry", "verify"];

/// Command line equivalent to the job, program name included.
pub fn argv(job: &Map<String, Value>) -> Result<Vec<String>, String> {
    let command = match job.get("command") {
        Some(Value::String(c)) if COMMANDS.contains(&c.as_str()) => c.clone(),
        Some(other) => return Err(format!("unknown command {other}")),
        None => return Err("job file needs a \"command\"".into()),
    };
    let mut out = vec!["finetti".to_string(), command];
    for (key, value) in job {
        if key == "command" {
            continue;
        }
        let flag = format!("--{key}");
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            _ => return Err(format!("value of {key:?} must be a string, number or boolean")),
        }
    }
    Ok(out)
}

pub fn argv_from_file(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))? {
        Value::Object(job) => argv(&job),
        _ => Err(format!("{}: job file must be a JSON object", path.display())),
    }
}
