/// Formats a real with 17 significant digits in plain decimal notation,
/// which is enough for an exact `f64` round trip.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).clamp(0, 340) as usize;
    let s = format!("{x:.decimals$}");
    trim_zeros(s)
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    // Keep at least 12 significant digits.
    let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
    let lead = s
        .chars()
        .filter(|c| c.is_ascii_digit())
        .take_while(|&c| c == '0')
        .count();
    let mut sig = digits - lead;
    let mut out = s;
    while sig > 12 && out.ends_with('0') {
        out.pop();
        sig -= 1;
    }
    if out.ends_with('.') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for &x in &[0.1, 0.287682072451781, 1e-7, 123456.789, 2.0 / 3.0, 1e-300, 5e300] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn keeps_twelve_significant_digits() {
        assert_eq!(fmt_real(0.5), "0.500000000000");
        assert_eq!(fmt_real(-2.0), "-2.00000000000");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-0.0), "0");
    }
}
