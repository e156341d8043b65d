//! Number formatting shared by circuit dumps and CSV output.

/// Formats `x` with `sig` significant digits, trimming trailing zeros. Uses
/// scientific notation for very small or very large magnitudes.
pub fn sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -5 || exp >= sig as i32 {
        return format!("{}e{}", trim(mantissa), exp);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
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
    fn formats_like_general_notation() {
        assert_eq!(sig(std::f64::consts::PI, 12), "3.14159265359");
        assert_eq!(sig(-std::f64::consts::FRAC_PI_2, 12), "-1.57079632679");
        assert_eq!(sig(0.0, 9), "0");
        assert_eq!(sig(1.0, 9), "1");
        assert_eq!(sig(0.0070000001, 9), "0.0070000001");
        assert_eq!(sig(1.5e-7, 9), "1.5e-7");
        assert_eq!(sig(123456789012.0, 9), "1.23456789e11");
        assert_eq!(sig(999.9999999999, 9), "1000");
    }
}
