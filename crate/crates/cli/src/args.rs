//! Tiny flag parser: `--name value` pairs and boolean switches, with unknown
//! flags rejected so typos fail loudly.

use std::collections::{BTreeMap, BTreeSet};

pub struct Args {
    pub positional: Vec<String>,
    values: BTreeMap<String, String>,
    switches: BTreeSet<String>,
}

pub struct Spec {
    /// flags taking a value
    pub valued: &'static [&'static str],
    /// boolean switches
    pub switches: &'static [&'static str],
}

impl Args {
    pub fn parse(raw: &[String], spec: &Spec) -> Result<Args, String> {
        let mut positional = vec![];
        let mut values = BTreeMap::new();
        let mut switches = BTreeSet::new();
        let mut it = raw.iter().peekable();
        while let Some(tok) = it.next() {
            if let Some(name) = tok.strip_prefix("--") {
                if spec.switches.contains(&name) {
                    switches.insert(name.to_string());
                } else if spec.valued.contains(&name) {
                    let val = it
                        .next()
                        .ok_or_else(|| format!("flag --{name} needs a value"))?;
                    values.insert(name.to_string(), val.clone());
                } else {
                    return Err(format!("unknown flag --{name}"));
                }
            } else {
                positional.push(tok.clone());
            }
        }
        Ok(Args {
            positional,
            values,
            switches,
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.switches.contains(name)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    pub fn require(&self, name: &str) -> Result<&str, String> {
        self.get(name).ok_or_else(|| format!("missing --{name}"))
    }

    pub fn get_f64(&self, name: &str) -> Result<Option<f64>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("--{name}: cannot parse '{v}' as a number")),
        }
    }

    pub fn require_f64(&self, name: &str) -> Result<f64, String> {
        self.get_f64(name)?.ok_or_else(|| format!("missing --{name}"))
    }

    pub fn get_usize(&self, name: &str) -> Result<Option<usize>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| format!("--{name}: cannot parse '{v}' as a count")),
        }
    }

    pub fn get_u64(&self, name: &str) -> Result<Option<u64>, String> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| format!("--{name}: cannot parse '{v}' as a seed")),
        }
    }

    /// All parsed parameters, for the run manifest.
    pub fn manifest_params(&self) -> BTreeMap<String, String> {
        let mut out = self.values.clone();
        for s in &self.switches {
            out.insert(s.clone(), "true".into());
        }
        if !self.positional.is_empty() {
            out.insert("mode".into(), self.positional.join(" "));
        }
        out
    }
}

/// Parses "lo:hi:n" into n evenly spaced values.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{text}' is not of the form lo:hi:n"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid lo '{}'", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid hi '{}'", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
    if n == 0 || hi < lo {
        return Err(format!("grid '{text}' is empty or reversed"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

/// Parses "value:prob,value:prob,..." into prior atoms.
pub fn parse_prior(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|pair| {
            let (v, p) = pair
                .split_once(':')
                .ok_or_else(|| format!("prior atom '{pair}' is not value:prob"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("bad atom value '{v}'"))?;
            let p: f64 = p.trim().parse().map_err(|_| format!("bad atom prob '{p}'"))?;
            Ok((v, p))
        })
        .collect()
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse '{v}' as a number"))
        })
        .collect()
}
