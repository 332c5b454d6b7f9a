/// Rounds to 12 significant digits and prints the shortest string that
/// round-trips the rounded value. Negative zero prints as `0`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("scientific notation parses");
    if rounded == 0.0 {
        return "0".to_string();
    }
    rounded.to_string()
}

#[cfg(test)]
mod tests {
    use super::format_number;

    #[test]
    fn formats() {
        assert_eq!(format_number(0.03125), "0.03125");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(1.0 / 512.0), "0.001953125");
    }
}
