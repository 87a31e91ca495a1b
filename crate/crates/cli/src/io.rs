//! Output formats: schema-versioned JSON with fixed 17-digit floats, flat CSV,
//! and a human-readable text mode.

use std::fmt::Write as _;
use std::io::{self, Write};

use anyhow::{Context, Result};
use qes_core::bethe::BetheSolution;
use qes_core::poly::{is_real, C64};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Serialize)]
pub struct Document<'a, I: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub input: I,
    pub result: R,
}

/// Pretty JSON with every float written as `d.dddddddddddddddde±x`.
struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if !v.is_finite() {
            return w.write_all(b"null");
        }
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// `12` significant digits, fixed notation for moderate magnitudes.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

/// `a+bi` with 12 significant digits; values with negligible imaginary part
/// print as `a  (real)`.
pub fn complex(z: C64) -> String {
    if is_real(z) {
        return format!("{}  (real)", sig12(z.re));
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", sig12(z.re), sign, sig12(z.im.abs()))
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner().context("flushing csv")?)?)
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Leading columns, then `c2, c1, c0`, residuals and the roots padded to the
/// largest degree with empty cells.
pub fn solutions_table(extra: &[&str], rows: &[(Vec<String>, &BetheSolution)]) -> Table {
    let width = rows.iter().map(|(_, s)| s.roots.len()).max().unwrap_or(0);
    let mut header: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    for h in ["c2_re", "c2_im", "c1_re", "c1_im", "c0_re", "c0_im", "bae_residual", "ode_residual", "certified"] {
        header.push(h.into());
    }
    for k in 1..=width {
        header.push(format!("z{k}_re"));
        header.push(format!("z{k}_im"));
    }
    let mut table = Table { header, rows: Vec::new() };
    for (lead, s) in rows {
        let mut row = lead.clone();
        for c in s.coeffs() {
            row.push(num(c.re));
            row.push(num(c.im));
        }
        row.push(num(s.bae_residual));
        row.push(num(s.ode_residual));
        row.push(s.certified.to_string());
        for z in s.roots.as_slice() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.resize(table.header.len(), String::new());
        table.rows.push(row);
    }
    table
}

pub fn pretty_solution(out: &mut String, idx: usize, s: &BetheSolution) {
    let _ = writeln!(
        out,
        "solution {idx}: {} (bae {:.2e}, ode {:.2e})",
        if s.certified { "certified" } else { "NOT certified" },
        s.bae_residual,
        s.ode_residual
    );
    let _ = writeln!(out, "  c2 = {}", complex(s.c2));
    let _ = writeln!(out, "  c1 = {}", complex(s.c1));
    let _ = writeln!(out, "  c0 = {}", complex(s.c0));
    for (k, z) in s.roots.as_slice().iter().enumerate() {
        let _ = writeln!(out, "  z{} = {}", k + 1, complex(*z));
    }
}

pub fn emit(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "y": [1.0, -2.5e-300], "n": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"], 0.1);
    }

    #[test]
    fn pretty_numbers() {
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(-std::f64::consts::SQRT_2), "-1.41421356237");
        assert_eq!(complex(C64::new(2.0, 0.0)), "2.00000000000  (real)");
        assert_eq!(complex(C64::new(0.5, -0.25)), "0.500000000000-0.250000000000i");
        assert_eq!(sig12(1.5e-7), "1.50000000000e-7");
    }
}
