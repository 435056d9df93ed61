//! Number formatting shared by the CSV exports.

/// Scientific notation with 17 significant digits; infinities are written
/// as `inf` / `-inf` and negative zero as `0`.
pub fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        // Adding +0 turns -0 into +0 and leaves everything else unchanged.
        format!("{:.16e}", v + 0.0)
    }
}

/// Parses a value written by [`num`].
pub fn parse_num(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for v in [0.1, -1.0 / 3.0, 6.14e-4, 1e300, 0.0, f64::INFINITY] {
            assert_eq!(parse_num(&num(v)), Some(v));
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(-0.0), num(0.0));
    }
}
