//! JSON encodings: the dense matrix format and a serializer that writes every
//! floating-point number with 17 significant digits.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Dense complex matrix, row-major: `re[i * cols + j]` is `Re m[i][j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let expected = self
            .rows
            .checked_mul(self.cols)
            .ok_or_else(|| Error::MatrixFormat("dimensions overflow".into()))?;
        if self.re.len() != expected || self.im.len() != expected {
            return Err(Error::MatrixFormat(format!(
                "expected {expected} entries for a {}x{} matrix, got re={} im={}",
                self.rows,
                self.cols,
                self.re.len(),
                self.im.len()
            )));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err(Error::MatrixFormat("non-finite entry".into()));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            c(self.re[k], self.im[k])
        }))
    }
}

pub fn parse_matrix_json(text: &str) -> Result<CMatrix> {
    let raw: MatrixJson = serde_json::from_str(text)?;
    raw.to_matrix()
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    to_json_string(&MatrixJson::from_matrix(m))
}

/// Formats a double like C's `%.17g`.
pub fn format_f64(value: f64) -> String {
    if !value.is_finite() {
        return "null".into();
    }
    if value == 0.0 {
        return if value.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, value);
        trim_fraction(&fixed).to_string()
    } else {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Compact JSON formatter that prints doubles with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrecisionFormatter;

impl Formatter for PrecisionFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(format_f64(value as f64).as_bytes())
    }
}

pub fn to_json_writer<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, PrecisionFormatter);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    to_json_writer(&mut buf, value).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
