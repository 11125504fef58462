use std::fs;
use std::io;
use std::path::Path;

use serde_json::Value;

use crate::commands::Table;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(t: &Table) -> String {
    let mut out = t.columns.join(",");
    out.push('\n');
    for row in &t.rows {
        let line: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes `report.json` and one `<name>.csv` per table.
pub fn write_all(dir: &Path, report: &Value, tables: &[Table]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    for t in tables {
        fs::write(dir.join(format!("{}.csv", t.name)), render_csv(t))?;
    }
    Ok(())
}
