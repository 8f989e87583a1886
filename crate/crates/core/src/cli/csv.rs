//! CSV artifacts: a `# params: key=value ...` line, a column header, then
//! data rows with 12 significant digits. UTF-8, LF line endings.

use std::collections::BTreeMap;
use std::io::{self, Write};

pub const PARAMS_PREFIX: &str = "# params:";

/// Formats `x` with 12 significant digits, plain decimal where reasonable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

pub fn write_params(out: &mut dyn Write, params: &[(&str, String)]) -> io::Result<()> {
    write!(out, "{PARAMS_PREFIX}")?;
    for (key, value) in params {
        write!(out, " {key}={value}")?;
    }
    writeln!(out)
}

pub fn write_row(out: &mut dyn Write, values: &[f64]) -> io::Result<()> {
    let cells: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
    writeln!(out, "{}", cells.join(","))
}

/// Parses a `# params:` line back into its key/value pairs.
pub fn parse_params(line: &str) -> Option<BTreeMap<String, String>> {
    let rest = line.strip_prefix(PARAMS_PREFIX)?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

/// Affine-uniform grid of `points ≥ 2` values from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| {
            let u = k as f64 / last;
            from * (1.0 - u) + to * u
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(0.115_164_716_490_445_16), "0.11516471649");
        assert_eq!(fmt_num(69.098_829_894_267_1), "69.0988298943");
        assert_eq!(fmt_num(-3.0), "-3");
        assert_eq!(fmt_num(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_num(123_456_789_012_345.0), "123456789012345");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    #[test]
    fn params_round_trip() {
        let mut buf = Vec::new();
        write_params(&mut buf, &[("mu", 0.1.to_string()), ("rule", "and".into())]).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line, "# params: mu=0.1 rule=and\n");
        let parsed = parse_params(line.trim_end()).unwrap();
        assert_eq!(parsed["mu"], "0.1");
        assert_eq!(parsed["rule"], "and");
        assert!(parse_params("t2,m1").is_none());
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(-3.0, 3.0, 601);
        assert_eq!(g.len(), 601);
        assert_eq!(g[0], -3.0);
        assert_eq!(g[300], 0.0);
        assert_eq!(g[600], 3.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn formatted_value_parses_close(x in prop::num::f64::NORMAL) {
                let back: f64 = fmt_num(x).parse().unwrap();
                prop_assert!((back - x).abs() <= 5e-12 * x.abs());
            }
        }
    }
}
