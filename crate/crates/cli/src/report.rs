//! Plain-text report formatting.

use std::fmt::Write;

use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Simulated,
    Reference,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Simulated => "[sim]",
            Source::Reference => "[ref]",
        }
    }
}

/// A number together with where it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tagged {
    pub value: f64,
    pub err: Option<f64>,
    pub source: Source,
}

impl Tagged {
    pub fn sim(value: f64, err: Option<f64>) -> Self {
        Self {
            value,
            err,
            source: Source::Simulated,
        }
    }

    pub fn reference(value: f64, err: Option<f64>) -> Self {
        Self {
            value,
            err,
            source: Source::Reference,
        }
    }

    pub fn render(&self, decimals: usize) -> String {
        match self.err {
            Some(e) => format!("{:.*}±{:.*}{}", decimals, self.value, decimals, e, self.source.tag()),
            None => format!("{:.*}{}", decimals, self.value, self.source.tag()),
        }
    }
}

pub struct Column {
    pub header: &'static str,
    pub decimals: usize,
}

/// Aligned table whose first column is a row label and every other cell a
/// tagged number or `-`. Fails if any rendered number lacks a source tag.
pub fn tagged_table(columns: &[Column], rows: &[(String, Vec<Option<Tagged>>)]) -> CliResult<String> {
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("row")
        .chain(columns.iter().map(|c| c.header))
        .map(String::from)
        .collect()];
    for (label, cells) in rows {
        if cells.len() != columns.len() {
            return Err(CliError::Other(format!("row {label}: {} cells for {} columns", cells.len(), columns.len())));
        }
        let mut line = vec![label.clone()];
        line.extend(
            cells
                .iter()
                .zip(columns)
                .map(|(c, col)| c.map_or_else(|| "-".to_string(), |t| t.render(col.decimals))),
        );
        grid.push(line);
    }
    let widths: Vec<usize> = (0..=columns.len())
        .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in grid.iter().enumerate() {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * columns.len()));
        }
    }
    check_tags(&out)?;
    Ok(out)
}

/// Every numeric cell of a rendered table body carries a source tag.
pub fn check_tags(table: &str) -> CliResult<()> {
    for line in table.lines().skip(2) {
        for cell in line.split_whitespace().skip(1) {
            let tagged = cell.ends_with(Source::Simulated.tag()) || cell.ends_with(Source::Reference.tag());
            if cell != "-" && !tagged {
                return Err(CliError::Other(format!("untagged value `{cell}` in report row `{line}`")));
            }
        }
    }
    Ok(())
}

/// `key: value` lines under a title.
pub fn key_values(title: &str, items: &[(&str, String)]) -> String {
    let w = items.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = format!("{title}\n");
    for (k, v) in items {
        let _ = writeln!(out, "  {k:<w$}  {v}");
    }
    out
}
