//! Fixed-precision number formatting for reports and CSV output.

/// Formats `x` with nine significant digits in scientific notation.
pub fn sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Rounds `x` to nine significant digits.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        sig9(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(1.0), "1.00000000e0");
        assert_eq!(sig9(-0.000123456789123), "-1.23456789e-4");
        assert_eq!(sig9(f64::INFINITY), "inf");
        assert_eq!(round9(2.0 / 3.0), 0.666666667);
    }
}
