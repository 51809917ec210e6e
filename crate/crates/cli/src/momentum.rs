use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Radians from `pi`, `0.4pi`, `0.4*pi`, `-pi/3`, `2pi/5`, `3/4pi` or a plain number.
pub fn parse_momentum(text: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("cannot read momentum `{text}`"));
    let s: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad());
    }
    let num = |t: &str| -> Result<f64, CliError> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => {
                let t = t.strip_suffix('*').unwrap_or(t);
                if let Some((a, b)) = t.split_once('/') {
                    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                    if b == 0.0 {
                        return Err(bad());
                    }
                    Ok(a / b)
                } else {
                    t.parse().map_err(|_| bad())
                }
            }
        }
    };
    let v = match s.find("pi") {
        Some(i) => {
            let (pre, post) = (&s[..i], &s[i + 2..]);
            let mut v = num(pre)? * PI;
            if !post.is_empty() {
                let d: f64 = post.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if d == 0.0 {
                    return Err(bad());
                }
                v /= d;
            }
            v
        }
        None => num(&s)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// A requested momentum and where it landed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumMap {
    pub spec: String,
    pub requested: f64,
    /// grid size, absent for continuous momenta
    pub grid: Option<usize>,
    pub index: Option<usize>,
    pub p: f64,
}

/// Nearest point of the grid 2 pi j / m.
pub fn to_grid(spec: &str, m: usize) -> Result<MomentumMap, CliError> {
    let requested = parse_momentum(spec)?;
    let step = 2.0 * PI / m as f64;
    let j = (requested / step).round().rem_euclid(m as f64) as usize % m;
    Ok(MomentumMap { spec: spec.to_string(), requested, grid: Some(m), index: Some(j), p: j as f64 * step })
}

/// Momentum used as given.
pub fn exact(spec: &str) -> Result<MomentumMap, CliError> {
    let requested = parse_momentum(spec)?;
    Ok(MomentumMap { spec: spec.to_string(), requested, grid: None, index: None, p: requested })
}
