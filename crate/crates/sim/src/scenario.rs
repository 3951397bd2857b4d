//! Scenario files: one `key = value` pair per line, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bundleobs::integrate::{IntegratorConfig, Method};
use nalgebra::Vector3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<V>(msg: impl Into<String>) -> Result<V, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Attitude,
    SlamContinuous,
    SlamDiscrete,
    SphereSplitDemo,
}

impl FromStr for SystemKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "attitude" => Ok(SystemKind::Attitude),
            "slam_continuous" => Ok(SystemKind::SlamContinuous),
            "slam_discrete" => Ok(SystemKind::SlamDiscrete),
            "sphere_split_demo" => Ok(SystemKind::SphereSplitDemo),
            other => err(format!("unknown system `{other}`")),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Attitude => "attitude",
            SystemKind::SlamContinuous => "slam_continuous",
            SystemKind::SlamDiscrete => "slam_discrete",
            SystemKind::SphereSplitDemo => "sphere_split_demo",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: SystemKind,
    pub gain: f64,
    pub integrator: IntegratorConfig<f64>,
    /// Initial attitude error axis; drawn from the seed when absent.
    pub error_axis: Option<Vector3<f64>>,
    pub error_angle_deg: f64,
    /// Initial SE(3) error twist `(linear, angular)`.
    pub error_twist: [f64; 6],
    pub noise: f64,
    pub seed: u64,
    /// Number of discrete SLAM steps.
    pub steps: usize,
    pub landmarks: usize,
    /// Output directory; the `--out-dir` flag takes precedence.
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "name",
    "system",
    "gain",
    "method",
    "step",
    "t_final",
    "projection_interval",
    "error_axis",
    "error_angle_deg",
    "error_twist",
    "noise",
    "seed",
    "steps",
    "landmarks",
    "output",
];

fn parse_num<V: FromStr>(key: &str, v: &str) -> Result<V, ConfigError> {
    v.parse().or_else(|_| err(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list(key: &str, v: &str, n: usize) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_, _>>()?;
    if items.len() != n {
        return err(format!("`{key}` needs {n} numbers, got {}", items.len()));
    }
    if items.iter().any(|x| !x.is_finite()) {
        return err(format!("`{key}` must be finite"));
    }
    Ok(items)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).or_else(|e| err(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return err(format!("line {}: unknown key `{k}`", lineno + 1));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return err(format!("line {}: duplicate key `{k}`", lineno + 1));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);

        let name = get("name").unwrap_or("").to_string();
        if name.is_empty() {
            return err("`name` is required");
        }
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || name.starts_with('.') {
            return err(format!("`name` must be a plain file stem, got `{name}`"));
        }
        let system: SystemKind = get("system")
            .ok_or(ConfigError("`system` is required".into()))?
            .parse()?;
        let gain: f64 = get("gain").map(|v| parse_num("gain", v)).transpose()?.unwrap_or(1.0);
        if !(gain > 0.0 && gain.is_finite()) {
            return err(format!("`gain` must be positive, got {gain}"));
        }
        let method: Method = match get("method") {
            Some(v) => v
                .parse()
                .or_else(|_| err(format!("`method`: unknown integrator `{v}`")))?,
            None => Method::Rk4Cg,
        };
        let step = get("step").map(|v| parse_num("step", v)).transpose()?.unwrap_or(1e-3);
        let t_final = get("t_final")
            .map(|v| parse_num("t_final", v))
            .transpose()?
            .unwrap_or(10.0);
        let mut integrator = IntegratorConfig::new(method, step, t_final).map_err(|e| ConfigError(e.to_string()))?;
        if let Some(v) = get("projection_interval") {
            integrator.projection_interval = parse_num("projection_interval", v)?;
            integrator.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        let error_axis = match get("error_axis") {
            Some(v) => {
                let a = parse_list("error_axis", v, 3)?;
                let axis = Vector3::new(a[0], a[1], a[2]);
                if axis.norm() == 0.0 {
                    return err("`error_axis` must be nonzero");
                }
                Some(axis.normalize())
            }
            None => None,
        };
        let error_angle_deg: f64 = get("error_angle_deg")
            .map(|v| parse_num("error_angle_deg", v))
            .transpose()?
            .unwrap_or(0.0);
        if !error_angle_deg.is_finite() || error_angle_deg.abs() >= 180.0 {
            return err("`error_angle_deg` must lie strictly between -180 and 180");
        }
        let error_twist = match get("error_twist") {
            Some(v) => {
                let t = parse_list("error_twist", v, 6)?;
                [t[0], t[1], t[2], t[3], t[4], t[5]]
            }
            None => [0.0; 6],
        };
        let noise: f64 = get("noise").map(|v| parse_num("noise", v)).transpose()?.unwrap_or(0.0);
        if !(noise >= 0.0 && noise.is_finite()) {
            return err(format!("`noise` must be non-negative, got {noise}"));
        }
        let seed = get("seed")
            .map(|v| parse_num("seed", v))
            .transpose()?
            .unwrap_or(bundleobs::random::DEFAULT_SEED);
        let steps = get("steps").map(|v| parse_num("steps", v)).transpose()?.unwrap_or(50);
        if steps == 0 {
            return err("`steps` must be at least 1");
        }
        let landmarks = get("landmarks")
            .map(|v| parse_num("landmarks", v))
            .transpose()?
            .unwrap_or(6);
        if landmarks < 4 {
            return err(format!("`landmarks` must be at least 4, got {landmarks}"));
        }
        let output = get("output").map(PathBuf::from);
        Ok(Scenario {
            name,
            system,
            gain,
            integrator,
            error_axis,
            error_angle_deg,
            error_twist,
            noise,
            seed,
            steps,
            landmarks,
            output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_defaults_and_comments() {
        let s = Scenario::parse("# demo\nname = a1\nsystem = attitude  # trailing\n\nerror_angle_deg = 60\n").unwrap();
        assert_eq!(s.name, "a1");
        assert_eq!(s.system, SystemKind::Attitude);
        assert_eq!(s.gain, 1.0);
        assert_eq!(s.integrator.method, Method::Rk4Cg);
        assert_eq!(s.integrator.step, 1e-3);
        assert_eq!(s.error_angle_deg, 60.0);
        assert_eq!(s.seed, 42);
        assert!(s.error_axis.is_none());
    }

    #[test]
    fn parses_lists() {
        let s = Scenario::parse("name=s\nsystem=slam_continuous\nerror_twist = 0.1, 0, 0 0.2 0 0\nerror_axis=0,0,2")
            .unwrap();
        assert_eq!(s.error_twist, [0.1, 0.0, 0.0, 0.2, 0.0, 0.0]);
        assert_eq!(s.error_axis, Some(Vector3::z()));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "system = attitude",
            "name = x\nsystem = pendulum",
            "name = x\nsystem = attitude\ngain = 0",
            "name = x\nsystem = attitude\nnoise = -1",
            "name = x\nsystem = attitude\nstep = 0",
            "name = x\nsystem = attitude\ncolour = red",
            "name = x\nname = y\nsystem = attitude",
            "name = ../x\nsystem = attitude",
            "name = x\nsystem = attitude\nerror_axis = 1,2",
            "name = x\nsystem = slam_discrete\nlandmarks = 3",
            "name = x\nsystem = attitude\nthis line has no equals sign",
        ] {
            assert!(Scenario::parse(bad).is_err(), "{bad}");
        }
    }
}
