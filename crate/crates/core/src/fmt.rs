// SPDX-License-Identifier: MIT OR Apache-2.0

//! Stable numeric formatting for file output.

/// Formats `x` with at most nine significant digits.
///
/// Values with decimal exponent in `-5..15` are printed positionally with
/// trailing zeros trimmed; anything else falls back to scientific notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        trim_zeros(&fixed).to_string()
    } else {
        fixed
    }
}

fn trim_zeros(s: &str) -> &str {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(0.857_142_857_142_857), "0.857142857");
        assert_eq!(sig9(123_456.789_123), "123456.789");
        assert_eq!(sig9(9.999_999_999_6), "10");
        assert_eq!(sig9(1.234_567_891_23e-7), "1.23456789e-7");
        assert_eq!(sig9(6.02e23), "6.02e23");
        assert_eq!(sig9(-0.010_751_636_2), "-0.0107516362");
    }

    #[test]
    fn parses_back_within_nine_digits() {
        for x in [0.1163491, 1.0 / 3.0, -7.77e-3, 31.22788, 1e-9, 12345678.9] {
            let y: f64 = sig9(x).parse().unwrap();
            assert!((x - y).abs() <= 5e-9 * x.abs());
        }
    }
}
