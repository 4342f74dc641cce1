//! Value lists on the command line: `a:b:step` (inclusive), `a,b,c` or a
//! single value.

use anyhow::{bail, Context, Result};

/// Grid used to snap real-valued ranges, so `0:0.5:0.05` yields `0.3`
/// rather than `0.30000000000000004`.
const SNAP: f64 = 1e9;

pub fn parse_uints(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((start, stop, step)) = split_range(text)? {
        let (start, stop, step): (u64, u64, u64) = (
            start
                .parse()
                .with_context(|| format!("bad range start `{start}`"))?,
            stop.parse()
                .with_context(|| format!("bad range stop `{stop}`"))?,
            step.parse()
                .with_context(|| format!("bad range step `{step}`"))?,
        );
        if step == 0 {
            bail!("range step must be positive in `{text}`");
        }
        if stop < start {
            bail!("range `{text}` is empty");
        }
        return Ok((start..=stop).step_by(step as usize).collect());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<u64>()
                .with_context(|| format!("`{t}` is not a non-negative integer"))
        })
        .collect()
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((start, stop, step)) = split_range(text)? {
        let parse = |what: &str, t: &str| -> Result<f64> {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .with_context(|| format!("bad range {what} `{t}`"))
        };
        let (start, stop, step) = (
            parse("start", start)?,
            parse("stop", stop)?,
            parse("step", step)?,
        );
        if step <= 0.0 {
            bail!("range step must be positive in `{text}`");
        }
        if stop < start {
            bail!("range `{text}` is empty");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * SNAP).round() / SNAP)
            .collect());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .with_context(|| format!("`{t}` is not a number"))
        })
        .collect()
}

fn split_range(text: &str) -> Result<Option<(&str, &str, &str)>> {
    if !text.contains(':') {
        return Ok(None);
    }
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, c] => Ok(Some((a, b, c))),
        [a, b] => Ok(Some((a, b, "1"))),
        _ => bail!("range `{text}` must look like start:stop:step"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_forms() {
        let teams = parse_uints("4:50:2").unwrap();
        assert_eq!(teams.len(), 24);
        assert_eq!(teams.first(), Some(&4));
        assert_eq!(teams.last(), Some(&50));
        assert_eq!(parse_uints("20, 100,10000").unwrap(), vec![20, 100, 10_000]);
        assert_eq!(parse_uints("7").unwrap(), vec![7]);
        assert_eq!(parse_uints("3:5").unwrap(), vec![3, 4, 5]);
        assert!(parse_uints("4:50:0").is_err());
        assert!(parse_uints("9:4:1").is_err());
        assert!(parse_uints("a,b").is_err());
        assert!(parse_uints("1:2:3:4").is_err());
    }

    #[test]
    fn real_forms() {
        let p = parse_reals("0:0.5:0.05").unwrap();
        assert_eq!(p.len(), 11);
        assert_eq!(p[6], 0.3);
        assert_eq!(p[10], 0.5);
        assert_eq!(parse_reals("0.1,0.45").unwrap(), vec![0.1, 0.45]);
        assert!(parse_reals("0:1:-0.1").is_err());
        assert!(parse_reals("nan").is_err());
    }
}
