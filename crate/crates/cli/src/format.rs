//! Deterministic number formatting for reports.

/// Twelve significant digits; scientific notation below `1e-4` (and at or
/// above `1e12`). Trailing zeros are dropped, and zero prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if !(1e-4..1e12).contains(&a) {
        let s = format!("{x:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent present");
        return format!("{}e{exp}", trim(mantissa));
    }
    let exp = a.log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

/// `x` rounded to what [`num`] prints.
pub fn round(x: f64) -> f64 {
    num(x).parse().unwrap_or(x)
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
