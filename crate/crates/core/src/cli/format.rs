/// 12 significant digits, scientific below `1e-4`, trailing zeros trimmed.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < 1e-4 {
        let s = format!("{x:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
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
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(0.6597396084411711), "0.659739608441");
        assert_eq!(format_value(-1.0), "-1");
        assert_eq!(format_value(123.456789012345), "123.456789012");
        assert_eq!(format_value(1.2345678901234e-5), "1.23456789012e-5");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(2.0e-4), "0.0002");
    }
}
