//! Plain-text rendering helpers. Output is byte-stable: fixed column
//! layout, four decimal places with trailing zeros trimmed.

use crate::scalar::Scalar;

/// Four places, trailing zeros trimmed, negative zero folded to `0`.
pub fn fmt_num<T: Scalar>(value: &T) -> String {
    fmt_f64(value.approx())
}

pub fn fmt_f64(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let text = format!("{:.4}", value);
    let text = if text.contains('.') { text.trim_end_matches('0').trim_end_matches('.') } else { &text };
    match text {
        "-0" => "0".to_string(),
        other => other.to_string(),
    }
}

pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TextTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    pub fn render(&self) -> String {
        let columns = self.rows.iter().map(Vec::len).chain([self.header.len()]).max().unwrap_or(0);
        let mut widths = vec![0usize; columns];
        for line in std::iter::once(&self.header).chain(&self.rows) {
            for (i, cell) in line.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let mut text = String::new();
            for (i, cell) in line.iter().enumerate() {
                if i > 0 {
                    text.push_str("  ");
                }
                text.push_str(&format!("{cell:<width$}", width = widths[i]));
            }
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_rounds() {
        assert_eq!(fmt_f64(6.0), "6");
        assert_eq!(fmt_f64(3.6000000000000005), "3.6");
        assert_eq!(fmt_f64(7.28), "7.28");
        assert_eq!(fmt_f64(-0.00001), "0");
        assert_eq!(fmt_f64(13.666666), "13.6667");
        assert_eq!(fmt_f64(120.0), "120");
    }

    #[test]
    fn aligns_columns() {
        let mut t = TextTable::new(["a", "long"]);
        t.row(["123", "x"]);
        assert_eq!(t.render(), "a    long\n123  x\n");
    }
}
