//! `%.12g`-style number formatting shared by every CSV and text output.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix4};

/// Significant digits of all numeric output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats like C's `printf("%.12g", x)`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let p = SIGNIFICANT_DIGITS;
    // Rounding to p digits may bump the exponent (9.9999... -> 1e+01), so
    // read it back from the rounded scientific form.
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the precision [`fmt_g`] prints, so that formatting and
/// parsing back is lossless.
pub fn quantize(x: f64) -> f64 {
    fmt_g(x).parse().unwrap_or(x)
}

pub fn join_g<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut out = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g(*v));
    }
    out
}

/// One comma-separated line per row.
pub fn matrix_rows(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        writeln!(out, "{}", join_g(row.iter())).unwrap();
    }
    out
}

pub fn transform_rows(h: &Matrix4<f64>) -> String {
    matrix_rows(&DMatrix::from_fn(4, 4, |r, c| h[(r, c)]))
}

pub fn vector_line(v: &DVector<f64>) -> String {
    format!("{}\n", join_g(v.iter()))
}

/// Parses `"1, 2.5,-3"` into numbers; an empty string yields an empty list.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        })
        .collect()
}
