use std::io::{self, Write};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    Json,
}

/// Rows that can be printed for people as well as serialized.
pub trait Human {
    fn human(&self) -> String;
}

/// One solver result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub x: f64,
    pub p: Option<f64>,
    pub form: Option<String>,
    pub method: String,
    pub branch: Option<String>,
    pub initial_guess: Option<f64>,
    pub y: f64,
    pub residual: f64,
    pub relative_error: f64,
    pub iterations: usize,
    pub status: String,
    pub precision_limited: bool,
    pub retried: bool,
}

impl Human for OutputRecord {
    fn human(&self) -> String {
        let mut s = format!("X = {}", sig10(self.x));
        if let Some(p) = self.p {
            s += &format!("  p = {}", sig10(p));
        }
        if let Some(b) = &self.branch {
            s += &format!("  branch = {b}");
        }
        s += &format!(
            "  y = {}  residual = {}  iterations = {}  method = {}  status = {}",
            sig10(self.y),
            sig3(self.residual),
            self.iterations,
            self.method,
            self.status
        );
        if self.precision_limited {
            s += "  (precision limited)";
        }
        if self.retried {
            s += "  (restarted)";
        }
        s
    }
}

/// Ten significant digits, fixed-point where that stays readable.
pub fn sig10(v: f64) -> String {
    sig(v, 10)
}

fn sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.2e}")
}

fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..10).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.prec$e}", prec = digits - 1)
    }
}

/// Writes `rows` in the requested format. Machine formats keep every bit of
/// each number: floats are written in shortest round-trip form.
pub fn emit<T: Serialize + Human>(
    format: Format,
    rows: &[T],
    out: &mut dyn Write,
) -> io::Result<()> {
    match format {
        Format::Human => {
            for r in rows {
                writeln!(out, "{}", r.human())?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(io::Error::other)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in rows {
                serde_json::to_writer(&mut *out, r).map_err(io::Error::other)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_digits() {
        assert_eq!(sig10(0.269_874_137_575_6), "0.2698741376");
        assert_eq!(sig10(122_744.035_394_309_3), "122744.0354");
        assert_eq!(sig10(3.677_441_56e-4), "0.000367744156");
        assert_eq!(sig10(1e20), "1.000000000e20");
        assert_eq!(sig10(1.0), "1");
        assert_eq!(sig10(0.0), "0");
    }

    fn record() -> OutputRecord {
        OutputRecord {
            command: "solve".into(),
            x: 1.0,
            p: None,
            form: None,
            method: "method2".into(),
            branch: None,
            initial_guess: Some(2.0),
            y: 0.269_874_137_575_640_1,
            residual: 1e-17,
            relative_error: 1e-17,
            iterations: 4,
            status: "converged".into(),
            precision_limited: false,
            retried: false,
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        emit(Format::Csv, &[record()], &mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let back: OutputRecord = rd.deserialize().next().unwrap().unwrap();
        assert_eq!(back, record());
    }

    #[test]
    fn json_round_trip() {
        let mut buf = Vec::new();
        emit(Format::Json, &[record(), record()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: OutputRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, record());
    }
}
