//! Flat key=value configuration files for the simulate command.
//!
//! Unknown keys are rejected outright so a misspelled option can never
//! fall back to a silent default.

use std::collections::BTreeMap;

use uipdyn::series::Design;

#[derive(Debug, Clone, serde::Serialize)]
pub struct SimConfig {
    /// Raw weekly series length.
    pub t: usize,
    /// Replications for the size/bias/MSE table.
    pub reps: usize,
    /// Replications for the power curves.
    pub power_reps: usize,
    pub seed: u64,
    pub design: Design,
    pub contract_days: u32,
    pub days_per_period: u32,
    /// Innovation variance; `None` calibrates from a pilot regression.
    pub sigma2: Option<f64>,
    /// Weekly sd of the synthetic spot walk.
    pub weekly_sd: f64,
    /// Power-curve grid of generated slopes (offsets from the null).
    pub alternatives: Vec<f64>,
    /// Whether to run the size-corrected power study.
    pub power: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t: 1941,
            reps: 1000,
            power_reps: 2000,
            seed: 20210926,
            design: Design::HansenHodrick,
            contract_days: 22,
            days_per_period: 5,
            sigma2: None,
            weekly_sd: 0.014,
            alternatives: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3],
            power: true,
        }
    }
}

pub fn parse_sim_config(text: &str) -> Result<SimConfig, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
        if map.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key {:?}", lineno + 1, key.trim()));
        }
    }

    let mut config = SimConfig::default();
    for (key, value) in map {
        match key.as_str() {
            "t" => config.t = parse(&key, &value)?,
            "reps" => config.reps = parse(&key, &value)?,
            "power_reps" => config.power_reps = parse(&key, &value)?,
            "seed" => config.seed = parse(&key, &value)?,
            "design" => {
                config.design = value
                    .parse()
                    .map_err(|e: uipdyn::Error| e.to_string())?
            }
            "contract_days" => config.contract_days = parse(&key, &value)?,
            "days_per_period" => config.days_per_period = parse(&key, &value)?,
            "sigma2" => {
                config.sigma2 = if value == "calibrate" {
                    None
                } else {
                    Some(parse(&key, &value)?)
                }
            }
            "weekly_sd" => config.weekly_sd = parse(&key, &value)?,
            "alternatives" => {
                config.alternatives = value
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| format!("alternatives entry {v:?}: {e}"))
                    })
                    .collect::<Result<Vec<f64>, String>>()?
            }
            "power" => config.power = parse_bool(&value).ok_or_else(|| {
                format!("key power: expected true/false, got {value:?}")
            })?,
            other => return Err(format!("unknown configuration key {other:?}")),
        }
    }
    Ok(config)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("key {key}: cannot parse {value:?}: {e}"))
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_defaults() {
        let config = parse_sim_config("t = 500\nreps=10\ndesign=hh\nalternatives=-0.1,0,0.1\n")
            .unwrap();
        assert_eq!(config.t, 500);
        assert_eq!(config.reps, 10);
        assert_eq!(config.power_reps, 2000);
        assert_eq!(config.alternatives, vec![-0.1, 0.0, 0.1]);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_sim_config("repz=10\n").unwrap_err();
        assert!(err.contains("unknown configuration key"), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(parse_sim_config("t=1\nt=2\n").unwrap_err().contains("duplicate"));
        assert!(parse_sim_config("just some words\n").unwrap_err().contains("key=value"));
        assert!(parse_sim_config("reps=soon\n").unwrap_err().contains("cannot parse"));
    }
}
