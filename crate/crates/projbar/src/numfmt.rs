//! Text formatting for floating-point values in CLI output and CSV files.
//!
//! All numeric output uses the shortest representation that preserves 15
//! significant digits, mirroring the C `printf("%.15g")` conversion. This
//! keeps reports reproducible across runs and easy to diff.

/// Formats `x` with up to 15 significant digits, trimming trailing zeros.
///
/// Matches C's `%.15g`: fixed notation when the decimal exponent lies in
/// `[-4, 15)`, scientific notation otherwise. Non-finite values render as
/// `nan`, `inf`, or `-inf`.
pub fn g15(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // Probe the decimal exponent via scientific notation with full precision.
    let probe = format!("{:.14e}", x);
    let exp: i32 = probe
        .split(['e', 'E'])
        .nth(1)
        .expect("scientific format always has an exponent")
        .parse()
        .expect("exponent is a valid integer");
    if (-4..15).contains(&exp) {
        // Fixed notation with 15 significant digits total.
        let frac_digits = (15 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", frac_digits, x);
        trim_trailing_zeros(&s)
    } else {
        // Scientific notation: mantissa with 15 significant digits.
        let mantissa = probe.split(['e', 'E']).next().unwrap();
        let mantissa = trim_trailing_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", mantissa, sign, exp.abs())
    }
}

/// Removes trailing zeros after a decimal point, and the point itself if
/// nothing remains behind it.
fn trim_trailing_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}
