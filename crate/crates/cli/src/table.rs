//! Plain-text table of result rows for standard output.

use ldtail::report::{format_float, ResultRow, COLUMNS};

const RED: &str = "\x1b[31m";
const RESET: &str = "\x1b[0m";

/// Whether to color output: only on a terminal and only without `NO_COLOR`.
pub fn use_color(is_terminal: bool) -> bool {
    is_terminal && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn cells(row: &ResultRow) -> [String; 8] {
    [
        row.family.clone(),
        row.n_or_t.to_string(),
        row.x_or_c.to_string(),
        row.method.clone(),
        opt(row.value),
        row.error_note.clone(),
        opt(row.exact),
        opt(row.ratio_to_exact),
    ]
}

/// Renders rows as aligned columns; errored rows are red when `color` is set.
pub fn render(rows: &[ResultRow], color: bool) -> String {
    let body: Vec<[String; 8]> = rows.iter().map(cells).collect();
    let mut widths = COLUMNS.map(str::len);
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(&COLUMNS.map(String::from));
    out.push('\n');
    for (row, r) in rows.iter().zip(&body) {
        let text = line(r);
        if color && row.is_error() {
            out.push_str(&format!("{RED}{text}{RESET}\n"));
        } else {
            out.push_str(&text);
            out.push('\n');
        }
    }
    out
}
