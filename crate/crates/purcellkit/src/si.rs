//! SI-suffixed number parsing shared by the netlist grammar and CLI flags.
//!
//! Recognized suffixes (case-sensitive):
//!
//! ```text
//! f 1e-15   p 1e-12   n 1e-9   u 1e-6   m 1e-3
//! k 1e3     M 1e6     G 1e9
//! ```
//!
//! A bare number (`50`, `3.1e-7`) parses as-is.

/// Suffix table with decimal exponents, in display order.
pub const SUFFIXES: [(char, i32); 8] = [
    ('f', -15),
    ('p', -12),
    ('n', -9),
    ('u', -6),
    ('m', -3),
    ('k', 3),
    ('M', 6),
    ('G', 9),
];

/// Parse a number with an optional SI suffix, e.g. `"30f"` -> `30e-15`.
///
/// Suffixed values parse exactly as their expanded decimal form would
/// (`"30f"` and `"30e-15"` yield the same f64 bit pattern), so suffixes
/// never cost a rounding step.
pub fn parse(text: &str) -> Result<f64, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty value".into());
    }
    let expanded: std::borrow::Cow<'_, str> = match text.chars().last() {
        Some(last) if last.is_ascii_alphabetic() => {
            let exp = SUFFIXES
                .iter()
                .find(|(c, _)| *c == last)
                .map(|(_, e)| *e)
                .ok_or_else(|| format!("unknown SI suffix '{last}' in '{text}'"))?;
            let mantissa = &text[..text.len() - 1];
            if mantissa.is_empty() {
                return Err(format!("invalid number '{text}'"));
            }
            if mantissa.contains(['e', 'E']) {
                // fold the suffix into the existing exponent
                let (m, e) = mantissa
                    .split_once(['e', 'E'])
                    .expect("contains check above");
                let e: i32 = e.parse().map_err(|_| format!("invalid number '{text}'"))?;
                format!("{m}e{}", e + exp).into()
            } else {
                format!("{mantissa}e{exp}").into()
            }
        }
        _ => text.into(),
    };
    expanded
        .parse()
        .map_err(|_| format!("invalid number '{text}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_table_exhaustive() {
        for (suffix, exp) in SUFFIXES {
            let parsed = parse(&format!("2.5{suffix}")).unwrap();
            let direct: f64 = format!("2.5e{exp}").parse().unwrap();
            assert_eq!(parsed, direct, "suffix {suffix}");
        }
    }

    #[test]
    fn plain_and_scientific() {
        assert_eq!(parse("50").unwrap(), 50.0);
        assert_eq!(parse("6.93G").unwrap(), 6.93e9);
        assert_eq!(parse("30f").unwrap(), 30e-15);
        assert_eq!(parse("2n").unwrap(), 2e-9);
        assert_eq!(parse("1.5e-7").unwrap(), 1.5e-7);
        assert_eq!(parse("-3m").unwrap(), -3e-3);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.2Q").is_err());
        // upper/lower case matters: 'K' is not a suffix, 'k' is
        assert!(parse("1K").is_err());
        assert!(parse("1k").is_ok());
    }
}
