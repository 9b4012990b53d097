//! Deterministic output formatting: every float is printed with 17
//! significant digits (round-trip safe), in CSV and JSON alike, so repeated
//! runs with identical flags produce byte-identical artifacts.

use std::io::{self, Write};

use serde::Serialize;

/// 17-significant-digit scientific form, e.g. `1.2500000000000000e0`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// serde_json formatter that routes every f64 through [`fmt_f64`].
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serialize to a JSON string with fixed-width floats and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Comma-separated row writer with LF line endings.
pub struct CsvWriter<W: Write> {
    writer: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(writer: W) -> Self {
        Self { writer }
    }

    pub fn header(&mut self, columns: &[&str]) -> io::Result<()> {
        writeln!(self.writer, "{}", columns.join(","))
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.writer, "{}", fields.join(","))
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.writer.flush()
    }
}

#[derive(Serialize)]
pub struct EnergyJson {
    pub distortion: f64,
    pub volumetric: f64,
    pub total: f64,
    pub total_absolute: f64,
}

impl From<&annuli::energy::EnergyBreakdown> for EnergyJson {
    fn from(e: &annuli::energy::EnergyBreakdown) -> Self {
        Self {
            distortion: e.distortion,
            volumetric: e.volumetric,
            total: e.total,
            total_absolute: e.total_absolute,
        }
    }
}

#[derive(Serialize)]
pub struct SolveSummary {
    pub lambda: f64,
    pub outer_image: f64,
    pub r_circ: f64,
    pub regime: String,
    pub energy: EnergyJson,
}

#[derive(Serialize)]
pub struct NoSolutionSummary {
    pub no_solution: bool,
    pub r_circ: f64,
}

#[derive(Serialize)]
pub struct RcircSummary {
    pub n: u32,
    #[serde(rename = "R")]
    pub r_outer: f64,
    pub r_circ: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_circ_closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

#[derive(Serialize)]
pub struct EnergySummary {
    pub lambda: f64,
    pub regime: String,
    pub energy: EnergyJson,
}

#[derive(Serialize)]
pub struct CheckJson {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Serialize)]
pub struct VerifyJson {
    pub passed: bool,
    pub checks: Vec<CheckJson>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [1.25, -3.5e-7, 0.1 + 0.2, 1.0 / 3.0, 2.0_f64.sqrt() * 1e17] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn json_floats_use_fixed_width() {
        #[derive(Serialize)]
        struct T {
            x: f64,
        }
        let s = to_json_string(&T { x: 1.25 }).unwrap();
        assert_eq!(s, "{\"x\":1.2500000000000000e0}\n");
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["x"].as_f64(), Some(1.25));
    }
}
