//! Run configuration with three-layer precedence: command-line flags
//! override config-file values, which override built-in defaults. The
//! defaults mirror the standard figure parameters: gamma = 1, pump ratios
//! {0.03, 0.3, 0.7}, filter bandwidth 0.4, sweep axis [0.05, 10] log-spaced.

use std::collections::HashMap;
use std::env;
use std::fs;
use std::path::PathBuf;

/// Sweep axis for the relative-bandwidth parameter; reused both for the
/// equivalent-loss x-axis (gamma_rel) and the filter scan (1/Gamma_rel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl RelRange {
    pub fn axis(&self) -> Vec<f64> {
        let n = self.points;
        if self.log {
            let (a, b) = (self.min.ln(), self.max.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        } else {
            (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub epsilon_list: Vec<f64>,
    pub rel_range: RelRange,
    pub big_gamma: f64,
    pub cutoff: usize,
    pub output_dir: PathBuf,
    pub json: bool,
}

/// One precedence layer: any subset of the configuration keys.
#[derive(Debug, Clone, Default)]
pub struct Layer {
    pub gamma: Option<f64>,
    pub epsilon: Option<Vec<f64>>,
    pub big_gamma: Option<f64>,
    pub rel_min: Option<f64>,
    pub rel_max: Option<f64>,
    pub rel_points: Option<usize>,
    pub rel_log: Option<bool>,
    pub cutoff: Option<usize>,
    pub out: Option<PathBuf>,
    pub json: Option<bool>,
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, String> {
    raw.trim().parse().map_err(|_| format!("config key {key}: cannot parse value {raw:?}"))
}

/// Flat `key = value` file; `#` starts a comment, blank lines are skipped.
pub fn parse_file(path: &PathBuf) -> Result<Layer, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read config {path:?}: {e}"))?;
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut layer = Layer::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
        let key = key.trim();
        if seen.insert(key, ()).is_some() {
            return Err(format!("config key {key} given twice"));
        }
        match key {
            "gamma" => layer.gamma = Some(parse_num(key, value)?),
            "epsilon" => {
                let list: Result<Vec<f64>, String> =
                    value.split(',').map(|v| parse_num(key, v)).collect();
                layer.epsilon = Some(list?);
            }
            "big_gamma" => layer.big_gamma = Some(parse_num(key, value)?),
            "gamma_rel_min" => layer.rel_min = Some(parse_num(key, value)?),
            "gamma_rel_max" => layer.rel_max = Some(parse_num(key, value)?),
            "gamma_rel_points" => layer.rel_points = Some(parse_num(key, value)?),
            "gamma_rel_log" => layer.rel_log = Some(parse_num(key, value)?),
            "cutoff" => layer.cutoff = Some(parse_num(key, value)?),
            "out" => layer.out = Some(PathBuf::from(value.trim())),
            "format" => match value.trim() {
                "csv" => layer.json = Some(false),
                "json" => layer.json = Some(true),
                other => return Err(format!("config key format: unknown format {other:?}")),
            },
            other => return Err(format!("unknown config key {other:?}")),
        }
    }
    Ok(layer)
}

/// Merge flag and file layers over the defaults and validate. The output
/// directory additionally falls back to `CATFILTER_OUT` before the default.
pub fn resolve(flags: Layer, file: Option<Layer>) -> Result<RunConfig, String> {
    let file = file.unwrap_or_default();
    let pick = |a: Option<f64>, b: Option<f64>, d: f64| a.or(b).unwrap_or(d);
    let cfg = RunConfig {
        gamma: pick(flags.gamma, file.gamma, 1.0),
        epsilon_list: flags
            .epsilon
            .or(file.epsilon)
            .unwrap_or_else(|| vec![0.03, 0.3, 0.7]),
        rel_range: RelRange {
            min: pick(flags.rel_min, file.rel_min, 0.05),
            max: pick(flags.rel_max, file.rel_max, 10.0),
            points: flags.rel_points.or(file.rel_points).unwrap_or(61),
            log: flags.rel_log.or(file.rel_log).unwrap_or(true),
        },
        big_gamma: pick(flags.big_gamma, file.big_gamma, 0.4),
        cutoff: flags.cutoff.or(file.cutoff).unwrap_or(40),
        output_dir: flags
            .out
            .or(file.out)
            .or_else(|| env::var_os("CATFILTER_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
        json: flags.json.or(file.json).unwrap_or(false),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), String> {
    if !(cfg.gamma.is_finite() && cfg.gamma > 0.0) {
        return Err(format!("gamma must be positive and finite, got {}", cfg.gamma));
    }
    if cfg.epsilon_list.is_empty() {
        return Err("epsilon list is empty".into());
    }
    for &e in &cfg.epsilon_list {
        if !(e.is_finite() && (0.0..cfg.gamma).contains(&e)) {
            return Err(format!(
                "epsilon must satisfy 0 <= epsilon < gamma = {}, got {e}",
                cfg.gamma
            ));
        }
    }
    let r = &cfg.rel_range;
    if !(r.min.is_finite() && r.max.is_finite() && r.min > 0.0 && r.max > r.min) {
        return Err(format!("range needs 0 < min < max, got [{}, {}]", r.min, r.max));
    }
    if r.points < 2 {
        return Err(format!("range needs at least 2 points, got {}", r.points));
    }
    if !(cfg.big_gamma.is_finite() && cfg.big_gamma > 0.0) {
        return Err(format!("big_gamma must be positive and finite, got {}", cfg.big_gamma));
    }
    if cfg.cutoff == 0 || cfg.cutoff > 60 {
        return Err(format!("cutoff must lie in 1..=60, got {}", cfg.cutoff));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = resolve(Layer::default(), None).unwrap();
        assert_eq!(cfg.gamma, 1.0);
        assert_eq!(cfg.epsilon_list, vec![0.03, 0.3, 0.7]);
        assert_eq!(cfg.big_gamma, 0.4);
        assert_eq!(cfg.rel_range.points, 61);
        assert!(cfg.rel_range.log);
        assert!(!cfg.json);
    }

    #[test]
    fn flags_beat_file_values() {
        let flags = Layer { gamma: Some(2.0), ..Default::default() };
        let file = Layer { gamma: Some(3.0), big_gamma: Some(0.5), ..Default::default() };
        let cfg = resolve(flags, Some(file)).unwrap();
        assert_eq!(cfg.gamma, 2.0);
        assert_eq!(cfg.big_gamma, 0.5);
    }

    #[test]
    fn pump_at_or_above_gamma_is_rejected() {
        let flags = Layer { epsilon: Some(vec![1.1]), ..Default::default() };
        assert!(resolve(flags, None).is_err());
        let flags = Layer { epsilon: Some(vec![1.0]), ..Default::default() };
        assert!(resolve(flags, None).is_err());
    }

    #[test]
    fn log_axis_hits_both_ends() {
        let r = RelRange { min: 0.05, max: 10.0, points: 61, log: true };
        let axis = r.axis();
        assert_eq!(axis.len(), 61);
        assert!((axis[0] - 0.05).abs() < 1e-15);
        assert!((axis[60] - 10.0).abs() < 1e-12);
        assert!(axis.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn file_parser_handles_comments_and_lists() {
        let dir = std::env::temp_dir().join("catfilter-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(
            &path,
            "# a comment\ngamma = 2.0\nepsilon = 0.1, 0.2 # trailing note\nformat = json\n",
        )
        .unwrap();
        let layer = parse_file(&path).unwrap();
        assert_eq!(layer.gamma, Some(2.0));
        assert_eq!(layer.epsilon, Some(vec![0.1, 0.2]));
        assert_eq!(layer.json, Some(true));

        std::fs::write(&path, "gamma = 1\ngamma = 2\n").unwrap();
        assert!(parse_file(&path).is_err());
        std::fs::write(&path, "mystery = 1\n").unwrap();
        assert!(parse_file(&path).is_err());
    }
}
