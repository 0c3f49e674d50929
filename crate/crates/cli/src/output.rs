//! JSON and CSV writers with floats fixed to 17 significant digits.

use std::io::{self, Write};

use serde_json::{Map, Value};

/// `1.2345678901234567e-3`; non-finite values become `null`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format_float(n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

pub fn write_json(v: &Value, out: &mut impl Write) -> io::Result<()> {
    write_value(v, out, 0)?;
    writeln!(out)
}

fn indent(out: &mut impl Write, depth: usize) -> io::Result<()> {
    write!(out, "\n{:width$}", "", width = 2 * depth)
}

fn write_value(v: &Value, out: &mut impl Write, depth: usize) -> io::Result<()> {
    match v {
        Value::Null => write!(out, "null"),
        Value::Bool(b) => write!(out, "{b}"),
        Value::Number(n) => write!(out, "{}", number(n)),
        Value::String(s) => write!(out, "{}", serde_json::to_string(s)?),
        Value::Array(items) => {
            // Numeric leaves stay on one line.
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                write!(out, "[")?;
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        write!(out, ", ")?;
                    }
                    write_value(item, out, depth)?;
                }
                return write!(out, "]");
            }
            write!(out, "[")?;
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    write!(out, ",")?;
                }
                indent(out, depth + 1)?;
                write_value(item, out, depth + 1)?;
            }
            indent(out, depth)?;
            write!(out, "]")
        }
        Value::Object(map) => {
            if map.is_empty() {
                return write!(out, "{{}}");
            }
            write!(out, "{{")?;
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    write!(out, ",")?;
                }
                indent(out, depth + 1)?;
                write!(out, "{}: ", serde_json::to_string(key)?)?;
                write_value(item, out, depth + 1)?;
            }
            indent(out, depth)?;
            write!(out, "}}")
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Null => {}
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::Number(n) => out.push((prefix.into(), number(n))),
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}_{k}"), item, out);
            }
        }
        Value::Object(map) => {
            for (key, item) in map {
                let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}_{key}") };
                flatten(&name, item, out);
            }
        }
    }
}

/// One row per record, nested values flattened to `name_index` columns.
/// Columns appear in first-seen order; absent values are empty cells.
pub fn write_csv(records: &[Map<String, Value>], out: &mut impl Write) -> io::Result<()> {
    let rows: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|r| {
            let mut cells = Vec::new();
            for (key, item) in r {
                let before = cells.len();
                flatten(key, item, &mut cells);
                if cells.len() == before {
                    cells.push((key.clone(), String::new()));
                }
            }
            cells
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for (name, _) in row {
            if !header.contains(name) {
                header.push(name.clone());
            }
        }
    }
    // A bare column is dropped when the same field is expanded elsewhere.
    let expanded: Vec<bool> = header
        .iter()
        .map(|h| header.iter().any(|o| o.starts_with(&format!("{h}_"))))
        .collect();
    let header: Vec<String> = header
        .into_iter()
        .zip(expanded)
        .filter(|(_, e)| !e)
        .map(|(h, _)| h)
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for row in rows {
        let record: Vec<&str> = header
            .iter()
            .map(|h| row.iter().find(|(n, _)| n == h).map_or("", |(_, v)| v.as_str()))
            .collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "null");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_is_valid_and_stable() {
        let v = json!({"a": [1.5, 2], "b": {"c": null, "d": "x"}, "e": [[1.0, 2.0]]});
        let mut buf = Vec::new();
        write_json(&v, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["a"][0], json!(1.5));
        assert_eq!(parsed["a"][1], json!(2));
        assert!(text.contains("1.5000000000000000e0"));
    }

    #[test]
    fn csv_flattens_and_aligns() {
        let rows: Vec<Map<String, Value>> = vec![
            json!({"i": 0, "m": null, "p": [0.5, 1.0]}).as_object().unwrap().clone(),
            json!({"i": 1, "m": [[1.0, 0.0]], "p": [0.25, 1.0]}).as_object().unwrap().clone(),
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,p_0,p_1,m_0_0,m_0_1");
        assert!(lines[1].ends_with(",,"));
        assert_eq!(lines.len(), 3);
    }
}
