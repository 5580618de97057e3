//! Ten-significant-digit number formatting for CSV and JSON output.

use serde_json::{Number, Value};

pub const SIGNIFICANT: usize = 10;

/// `x` with exactly ten significant digits; fixed notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT - 1, 0.0);
    }
    // the exponent of the rounded value decides the layout
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..10).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// JSON number carrying the digits of [`sig`]; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    sig(x).parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_digits() {
        assert_eq!(sig(0.1420683), "0.1420683000");
        assert_eq!(sig(3.0), "3.000000000");
        assert_eq!(sig(-1234.5), "-1234.500000");
        assert_eq!(sig(1.5e-7), "1.500000000e-7");
        assert_eq!(sig(0.0), "0.000000000");
        assert_eq!(sig(0.99999999999), "1.000000000");
    }

    #[test]
    fn json_numbers_keep_digits() {
        assert_eq!(num(0.5).to_string(), "0.5000000000");
        assert_eq!(num(f64::NAN), Value::Null);
    }

    proptest::proptest! {
        #[test]
        fn keeps_ten_significant_digits(x in proptest::num::f64::NORMAL) {
            let s = sig(x);
            let back: f64 = s.parse().unwrap();
            proptest::prop_assert!(((back - x) / x).abs() <= 5e-10, "{} -> {}", x, s);
            let mantissa = s.split('e').next().unwrap();
            let digits = mantissa.chars().filter(char::is_ascii_digit).collect::<String>();
            proptest::prop_assert_eq!(digits.trim_start_matches('0').len(), SIGNIFICANT, "{}", s);
        }
    }
}
