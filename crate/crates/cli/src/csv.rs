//! Minimal CSV with a fixed float format, so that parse followed by emit
//! reproduces a file byte for byte.

use std::fmt::Write as _;

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Field {
    fn parse(s: &str) -> Self {
        if let Ok(i) = s.parse::<i64>() {
            return Field::Int(i);
        }
        match s.parse::<f64>() {
            Ok(v) if fmt_float(v) == s => Field::Float(v),
            _ => Field::Text(s.to_string()),
        }
    }

    fn emit(&self, out: &mut String) {
        match self {
            Field::Int(i) => write!(out, "{i}").unwrap(),
            Field::Float(v) => out.push_str(&fmt_float(*v)),
            Field::Text(s) => out.push_str(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Field::Int(i) => Some(*i as f64),
            Field::Float(v) => Some(*v),
            Field::Text(_) => None,
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Int(v as i64)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Line {
    /// A line starting with `#`, kept verbatim.
    Marker(String),
    Record(Vec<Field>),
}

/// Header plus records. Marker lines may separate sections.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub header: Vec<String>,
    pub lines: Vec<Line>,
}

impl Document {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.lines.push(Line::Record(row));
    }

    pub fn marker(&mut self, text: &str) {
        self.lines.push(Line::Marker(format!("# {text}")));
    }

    pub fn records(&self) -> impl Iterator<Item = &Vec<Field>> {
        self.lines.iter().filter_map(|l| match l {
            Line::Record(r) => Some(r),
            Line::Marker(_) => None,
        })
    }

    /// Records of the section after the `n`-th marker (0 = before any marker).
    pub fn section(&self, n: usize) -> Vec<&Vec<Field>> {
        let mut seen = 0;
        let mut out = Vec::new();
        for l in &self.lines {
            match l {
                Line::Marker(_) => seen += 1,
                Line::Record(r) if seen == n => out.push(r),
                Line::Record(_) => {}
            }
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn emit(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for l in &self.lines {
            match l {
                Line::Marker(m) => out.push_str(m),
                Line::Record(r) => {
                    for (i, f) in r.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        f.emit(&mut out);
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut it = text.lines();
        let header: Vec<String> = it
            .next()
            .ok_or("empty CSV")?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut doc = Document {
            header,
            lines: Vec::new(),
        };
        for (n, line) in it.enumerate() {
            if line.starts_with('#') {
                doc.lines.push(Line::Marker(line.to_string()));
                continue;
            }
            let row: Vec<Field> = line.split(',').map(Field::parse).collect();
            if row.len() != doc.header.len() {
                return Err(format!(
                    "line {}: {} fields, header has {}",
                    n + 2,
                    row.len(),
                    doc.header.len()
                ));
            }
            doc.lines.push(Line::Record(row));
        }
        Ok(doc)
    }
}
