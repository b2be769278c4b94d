//! Number formatting for emitted artifacts: every float is written with at
//! most nine significant digits.

/// Round to nine significant digits. Non-finite values pass through.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Shortest decimal rendering of `x` rounded to nine significant digits.
/// NaN renders as an empty field.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    let r = round_sig9(x);
    if r == 0.0 {
        // drop the sign of negative zero
        return "0".to_string();
    }
    format!("{r}")
}

/// Serde helper: serialize an `f64` rounded to nine significant digits
/// (non-finite values become `null`).
pub fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig9(*x))
    } else {
        s.serialize_none()
    }
}

pub fn ser_f64_slice<S: serde::Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        if x.is_finite() {
            seq.serialize_element(&round_sig9(*x))?;
        } else {
            seq.serialize_element(&Option::<f64>::None)?;
        }
    }
    seq.end()
}

pub fn ser_opt_f64<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig9(0.048_790_164_169_432), "0.0487901642");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(2.0), "2");
        assert_eq!(sig9(f64::NAN), "");
        assert_eq!(sig9(123_456_789_012.0), "123456789000");
    }
}
