use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

/// How to pick the two data columns.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRef {
    /// 1-based position.
    Index(usize),
    Name(String),
}

pub fn parse_cols(s: &str) -> Result<(ColumnRef, ColumnRef), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
        return Err(format!("expected two comma-separated columns, got `{s}`"));
    }
    let one = |p: &str| match p.parse::<usize>() {
        Ok(0) => Err("column indices start at 1".to_string()),
        Ok(i) => Ok(ColumnRef::Index(i)),
        Err(_) => Ok(ColumnRef::Name(p.to_string())),
    };
    Ok((one(parts[0])?, one(parts[1])?))
}

pub struct Columns {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Source line of each observation.
    pub lines: Vec<u64>,
}

/// Reads two numeric columns from a CSV file. A first row that does not
/// parse as numbers in the selected columns is taken as a header.
pub fn read_columns(path: &Path, cols: Option<&(ColumnRef, ColumnRef)>) -> Result<Columns> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r.with_context(|| format!("{}: malformed CSV", path.display()))?,
        None => bail!("{}: no data rows", path.display()),
    };

    let default = (ColumnRef::Index(1), ColumnRef::Index(2));
    let (a, b) = cols.unwrap_or(&default);
    let looks_numeric = |rec: &csv::StringRecord| {
        [a, b].iter().all(|c| match c {
            ColumnRef::Index(i) => rec.get(i - 1).is_some_and(|f| f.parse::<f64>().is_ok()),
            ColumnRef::Name(_) => false,
        })
    };
    let header = (!looks_numeric(&first)).then(|| first.clone());
    let position = |c: &ColumnRef| -> Result<usize> {
        match c {
            ColumnRef::Index(i) => Ok(i - 1),
            ColumnRef::Name(name) => {
                let h = header.as_ref().ok_or_else(|| {
                    anyhow!("column `{name}` requested but the file has no header")
                })?;
                h.iter()
                    .position(|f| f == name)
                    .ok_or_else(|| anyhow!("no column named `{name}` in header"))
            }
        }
    };
    let (ia, ib) = (position(a)?, position(b)?);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lines = Vec::new();
    let mut push = |rec: &csv::StringRecord, line: u64| -> Result<()> {
        lines.push(line);
        for (idx, out) in [(ia, &mut xs), (ib, &mut ys)] {
            let field = rec
                .get(idx)
                .ok_or_else(|| anyhow!("line {line}: missing column {}", idx + 1))?;
            let value: f64 = field.parse().map_err(|_| {
                anyhow!(
                    "line {line}: `{field}` in column {} is not a number",
                    idx + 1
                )
            })?;
            out.push(value);
        }
        Ok(())
    };
    if header.is_none() {
        push(&first, line_of(&first))?;
    }
    for rec in records {
        let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
        push(&rec, line_of(&rec))?;
    }
    Ok(Columns { xs, ys, lines })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}
