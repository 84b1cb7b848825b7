use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    /// The text given on the command line.
    pub raw: String,
    pub hz: bool,
    /// Intervals in radians.
    pub radians: Vec<(f64, f64)>,
}

fn parse_bound(s: &str) -> Result<f64, ConfigError> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("pi") {
        return Ok(PI);
    }
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError(format!("invalid band bound '{t}'")))
}

/// Parses `LO:HI[,LO:HI...]` in radians, or with an `Hz` suffix in Hertz
/// (converted with `ω = 2π f / fs`).
pub fn parse_band(raw: &str, sampling_rate: Option<f64>) -> Result<BandSpec, ConfigError> {
    let trimmed = raw.trim();
    let lower = trimmed.to_ascii_lowercase();
    let (body, hz) = match lower.strip_suffix("hz") {
        Some(b) => (&trimmed[..b.len()], true),
        None => (trimmed, false),
    };
    let scale = if hz {
        match sampling_rate {
            Some(fs) if fs.is_finite() && fs > 0.0 => 2.0 * PI / fs,
            Some(fs) => return err(format!("sampling rate must be positive, got {fs}")),
            None => return err("a band in Hz needs --sampling-rate"),
        }
    } else {
        1.0
    };
    let mut radians = Vec::new();
    for part in body.split(',') {
        let Some((lo, hi)) = part.split_once(':') else {
            return err(format!("band '{part}' is not of the form LO:HI"));
        };
        let (lo, hi) = (parse_bound(lo)? * scale, parse_bound(hi)? * scale);
        if lo >= hi {
            return err(format!("band lower bound {lo} must be below upper bound {hi}"));
        }
        if lo < 0.0 || hi > PI + 1e-12 {
            return err(format!("band [{lo}, {hi}] rad is not inside [0, pi]"));
        }
        radians.push((lo, hi.min(PI)));
    }
    Ok(BandSpec {
        raw: raw.to_string(),
        hz,
        radians,
    })
}

/// `auto` or a positive integer.
pub fn parse_auto_usize(s: &str, what: &str) -> Result<Option<usize>, ConfigError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(Some(v)),
        _ => err(format!("{what} must be 'auto' or a positive integer, got '{s}'")),
    }
}

/// `auto` or a positive number.
pub fn parse_auto_f64(s: &str, what: &str) -> Result<Option<f64>, ConfigError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
        _ => err(format!("{what} must be 'auto' or a positive number, got '{s}'")),
    }
}

pub fn parse_switch(s: &str, what: &str) -> Result<bool, ConfigError> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => err(format!("{what} must be 'on' or 'off', got '{s}'")),
    }
}

/// `U-V[,U-V...]` with 1-based indices; returns 0-based pairs.
pub fn parse_pairs(s: &str, p: usize) -> Result<Vec<(usize, usize)>, ConfigError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let parsed = part
            .split_once('-')
            .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)));
        match parsed {
            Some((a, b)) if a >= 1 && b >= 1 && a <= p && b <= p && a != b => out.push((a - 1, b - 1)),
            _ => return err(format!("invalid pair '{part}' for {p} columns (use U-V, 1-based)")),
        }
    }
    Ok(out)
}

pub fn check_delta_alpha(delta: f64, alpha: f64) -> Result<(), ConfigError> {
    if !(0.0..1.0).contains(&delta) {
        return err(format!("delta must lie in [0, 1), got {delta}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return err(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_band_converts() {
        let b = parse_band("14:25Hz", Some(256.0)).unwrap();
        assert!(b.hz);
        let (lo, hi) = b.radians[0];
        assert!((lo - 2.0 * PI * 14.0 / 256.0).abs() < 1e-15);
        assert!((hi - 2.0 * PI * 25.0 / 256.0).abs() < 1e-15);
        assert!(parse_band("14:25Hz", None).is_err());
        assert!(parse_band("14:200Hz", Some(256.0)).is_err());
    }

    #[test]
    fn radian_bands() {
        let b = parse_band("0:pi", None).unwrap();
        assert_eq!(b.radians, vec![(0.0, PI)]);
        let b = parse_band("0:1,2:3", None).unwrap();
        assert_eq!(b.radians.len(), 2);
        assert!(parse_band("1:0.5", None).is_err());
        assert!(parse_band("0:4", None).is_err());
        assert!(parse_band("abc", None).is_err());
    }

    #[test]
    fn auto_values() {
        assert_eq!(parse_auto_usize("auto", "m").unwrap(), None);
        assert_eq!(parse_auto_usize("12", "m").unwrap(), Some(12));
        assert!(parse_auto_usize("0", "m").is_err());
        assert_eq!(parse_auto_f64("0.25", "l").unwrap(), Some(0.25));
        assert!(parse_auto_f64("-1", "l").is_err());
    }

    #[test]
    fn pairs_are_one_based() {
        assert_eq!(parse_pairs("1-2,3-1", 3).unwrap(), vec![(0, 1), (2, 0)]);
        assert!(parse_pairs("0-1", 3).is_err());
        assert!(parse_pairs("2-2", 3).is_err());
        assert!(parse_pairs("1-4", 3).is_err());
    }

    #[test]
    fn delta_alpha_ranges() {
        assert!(check_delta_alpha(0.0, 0.1).is_ok());
        assert!(check_delta_alpha(1.0, 0.1).is_err());
        assert!(check_delta_alpha(0.2, 0.0).is_err());
    }
}
