//! Number formatting shared by every CSV and summary writer.

/// Scientific notation with 17 significant digits, enough to round-trip an
/// `f64`. Non-finite values are written as `inf`, `-inf` or `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_parse() {
        for x in [
            0.0,
            1.0,
            -2.5e-11,
            std::f64::consts::PI,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }
}
