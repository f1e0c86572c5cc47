use std::io::Read;
use std::path::Path;

/// Why a data file could not be turned into observations.
#[derive(Debug)]
pub enum InputError {
    /// Unreadable or not a number.
    Parse(String),
    /// Well-formed but not a single scalar observation.
    Unsupported(String),
}

fn is_json_lines(path: Option<&Path>) -> bool {
    matches!(
        path.and_then(|p| p.extension()).and_then(|e| e.to_str()),
        Some("jsonl" | "ndjson" | "json")
    )
}

/// Reads observations from `path`, or standard input when `None`. Files
/// ending in `.jsonl`, `.ndjson` or `.json` are JSON lines; everything else is
/// CSV with one observation per row and `#` comments.
pub fn read_observations(path: Option<&Path>) -> Result<Vec<f64>, InputError> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(|e| InputError::Parse(format!("{}: {e}", p.display())))?;
        }
        None => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| InputError::Parse(format!("stdin: {e}")))?;
        }
    }
    if is_json_lines(path) {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_json_line(l).map_err(|e| tag(e, i + 1)))
            .collect()
    } else {
        parse_csv(&text)
    }
}

fn tag(e: InputError, line: usize) -> InputError {
    match e {
        InputError::Parse(m) => InputError::Parse(format!("line {line}: {m}")),
        InputError::Unsupported(m) => InputError::Unsupported(format!("line {line}: {m}")),
    }
}

fn parse_csv(text: &str) -> Result<Vec<f64>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| InputError::Parse(e.to_string()))?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [] => {}
            [field] => out.push(parse_number(field).map_err(|e| tag(e, i + 1))?),
            _ => {
                return Err(InputError::Unsupported(format!(
                    "row {} has {} values; every family here takes one scalar per observation",
                    i + 1,
                    fields.len()
                )))
            }
        }
    }
    Ok(out)
}

fn parse_number(s: &str) -> Result<f64, InputError> {
    s.parse::<f64>().map_err(|_| InputError::Parse(format!("'{s}' is not a number")))
}

/// One observation from a line holding a plain number, a JSON number, or a
/// one-element JSON array.
pub fn parse_json_line(line: &str) -> Result<f64, InputError> {
    let value: serde_json::Value =
        serde_json::from_str(line.trim()).map_err(|e| InputError::Parse(format!("invalid JSON: {e}")))?;
    match value {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| InputError::Parse(format!("{n} is not an f64"))),
        serde_json::Value::Array(items) => match items.as_slice() {
            [serde_json::Value::Number(n)] => {
                n.as_f64().ok_or_else(|| InputError::Parse(format!("{n} is not an f64")))
            }
            [_] => Err(InputError::Parse(format!("{line} does not hold a number"))),
            _ => Err(InputError::Unsupported(format!("{line} has {} values, expected one", items.len()))),
        },
        other => Err(InputError::Parse(format!("{other} is not a number"))),
    }
}

/// A line of the `test` stream: a bare number or a JSON line.
pub fn parse_stream_line(line: &str) -> Result<f64, InputError> {
    let t = line.trim();
    match t.parse::<f64>() {
        Ok(v) => Ok(v),
        Err(_) if t.starts_with('[') => parse_json_line(t),
        Err(_) => Err(InputError::Parse(format!("'{t}' is not a number"))),
    }
}
