//! Number formatting and range parsing shared by the report writers.

use crate::error::CliError;

/// `%.6g`-style rendering: six significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-5, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exponent) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("exponent is an integer");
    if !(-5..6).contains(&exponent) {
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exponent.abs())
    } else {
        let decimals = (5 - exponent) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Values are snapped to 12 decimals so `0.1:0.5:0.1` yields `0.3` rather
/// than `0.30000000000000004`.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Parses `start:stop:step` (inclusive of `start`, and of `stop` when it is
/// reached within 1e-9) or a single number.
pub fn parse_range(input: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("invalid range `{input}`: {why}"));
    let parts: Vec<&str> = input.split(':').map(str::trim).collect();
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(&format!("`{s}` is not a finite number")))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 {
                return Err(bad("step must be > 0"));
            }
            if stop < start {
                return Err(bad("range is empty (stop < start)"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| snap(start + i as f64 * step)).collect())
        }
        _ => Err(bad("expected start:stop:step")),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(input: &str) -> Result<Vec<f64>, CliError> {
    let values = input
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("invalid number `{s}` in list `{input}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty list `{input}`")));
    }
    Ok(values)
}
