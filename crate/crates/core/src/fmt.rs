/// Formats `x` with `digits` significant digits, in the style of C's `%.*g`.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects the rounded value.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn general_format() {
        assert_eq!(sig(36.0 / 23.0, 15), "1.56521739130435");
        assert_eq!(sig(0.0, 15), "0");
        assert_eq!(sig(-2.5, 15), "-2.5");
        assert_eq!(sig(1e-7, 15), "1e-7");
        assert_eq!(sig(123456.0, 3), "1.23e5");
        assert_eq!(sig(9.9999999, 3), "10");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -1e-300, 6.02e23] {
            assert_eq!(sig(x, 17).parse::<f64>().unwrap(), x);
        }
    }
}
