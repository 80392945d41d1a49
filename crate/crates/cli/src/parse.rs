//! Parsing of command-line values and the `key = value` config file.

use std::collections::BTreeMap;

use quadiff::C64;

/// Parses `re,im`, `re+imi`, `re-imi`, `imi`, `i` or a plain real.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let z = if let Some((re, im)) = t.split_once(',') {
        C64::new(real(re)?, real(im)?)
    } else if let Some(body) = t.strip_suffix(['i', 'j']) {
        // split at the last sign that is not the leading one or part of an exponent
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => C64::new(real(&body[..k])?, imag(&body[k..])?),
            None => C64::new(0.0, imag(body)?),
        }
    } else {
        C64::new(real(&t)?, 0.0)
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(format!("non-finite complex number '{s}'"));
    }
    Ok(z)
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number '{s}'"))
    }
}

fn imag(s: &str) -> Result<f64, String> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(s),
    }
}

/// Parses `x0,x1,y0,y1`.
pub fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("region '{s}' must be x0,x1,y0,y1"));
    }
    let mut r = [0.0; 4];
    for (slot, p) in r.iter_mut().zip(&parts) {
        *slot = real(p)?;
    }
    if !(r[1] > r[0] && r[3] > r[2]) {
        return Err(format!("region '{s}' is empty"));
    }
    Ok(r)
}

/// A parsed config file. Keys are normalized to use `_`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "a",
    "b",
    "A",
    "n",
    "region",
    "resolution",
    "seed",
    "tol_level",
    "tol_crit",
    "trace_sample",
    "svg",
    "json",
    "csv",
    "rtol",
    "atol",
    "launch_offset",
    "r_max",
    "r_min",
    "eps_hit",
    "max_steps",
    "spiral_windings",
    "spiral_shrink",
    "step_fraction",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", k + 1))?;
            let key = key.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(format!("config line {}: unknown key '{key}'", k + 1));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<V>(&self, key: &str, parse: impl Fn(&str) -> Result<V, String>) -> Result<Option<V>, String> {
        self.entries
            .get(key)
            .map(|v| parse(v).map_err(|e| format!("config key '{key}': {e}")))
            .transpose()
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be positive"))
    }
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("invalid count '{s}'"))
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("invalid seed '{s}'"))
}
