use crate::Common;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TSpec {
    Value(f64),
    /// `4π·d/V + offset`
    Auto(f64),
}

impl TSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("auto") {
            if rest.is_empty() {
                return Ok(TSpec::Auto(0.0));
            }
            let off: f64 = rest
                .parse()
                .map_err(|_| format!("bad t offset '{rest}', expected auto+x"))?;
            return Ok(TSpec::Auto(off));
        }
        s.parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .map(TSpec::Value)
            .ok_or_else(|| format!("bad t '{s}', expected a number or auto+x"))
    }

    pub fn resolve(&self, degree: i64, volume: f64) -> f64 {
        match *self {
            TSpec::Value(t) => t,
            TSpec::Auto(off) => 4.0 * PI * degree as f64 / volume + off,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub size: usize,
    pub length: f64,
    pub degree: i64,
    pub n: usize,
    pub t: TSpec,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub constant_alpha: bool,
    pub jobs: usize,
    pub flip_omega_sign: bool,
}

const KEYS: &[&str] = &[
    "dim", "size", "length", "degree", "n", "t", "tol", "seed", "out", "alpha", "jobs",
];

fn read_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{} line {}: expected key = value", path.display(), no + 1))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(format!(
                "{} line {}: unknown key '{k}'",
                path.display(),
                no + 1
            ));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("invalid value '{v}' for {key}"))
}

impl RunConfig {
    pub fn resolve(c: &Common) -> Result<Self, String> {
        let file = match &c.config {
            Some(p) => read_config_file(p)?,
            None => HashMap::new(),
        };
        let flags: [(&str, &Option<String>); 11] = [
            ("dim", &c.dim),
            ("size", &c.size),
            ("length", &c.length),
            ("degree", &c.degree),
            ("n", &c.n),
            ("t", &c.t),
            ("tol", &c.tol),
            ("seed", &c.seed),
            ("out", &c.out),
            ("alpha", &c.alpha),
            ("jobs", &c.jobs),
        ];
        let get = |key: &str, default: &str| -> String {
            flags
                .iter()
                .find(|(k, _)| *k == key)
                .and_then(|(_, v)| (*v).clone())
                .or_else(|| file.get(key).cloned())
                .unwrap_or_else(|| default.to_string())
        };
        let dim: usize = num("dim", &get("dim", "2"))?;
        if dim != 2 && dim != 4 {
            return Err(format!("dim must be 2 or 4, got {dim}"));
        }
        let size: usize = num("size", &get("size", "64"))?;
        if size < 4 || !size.is_multiple_of(2) {
            return Err(format!("size must be even and at least 4, got {size}"));
        }
        let length: f64 = num("length", &get("length", &format!("{}", 2.0 * PI)))?;
        if !(length.is_finite() && length > 0.0) {
            return Err(format!("length must be positive, got {length}"));
        }
        let degree: i64 = num("degree", &get("degree", "1"))?;
        let n: usize = num("n", &get("n", "1"))?;
        if n == 0 {
            return Err("n must be at least 1".into());
        }
        let t = TSpec::parse(&get("t", "auto+1"))?;
        let tol: f64 = num("tol", &get("tol", "1e-8"))?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(format!("tol must be positive, got {tol}"));
        }
        let seed: u64 = num("seed", &get("seed", "0"))?;
        let out = PathBuf::from(get("out", "gsw-out"));
        let constant_alpha = match get("alpha", "theta").as_str() {
            "theta" => false,
            "const" => true,
            other => return Err(format!("alpha must be theta or const, got '{other}'")),
        };
        if constant_alpha && degree != 0 {
            return Err(format!("--alpha const needs --degree 0, got {degree}"));
        }
        if degree < 0 {
            return Err(format!(
                "degree must be non-negative for holomorphic test data, got {degree}"
            ));
        }
        let jobs: usize = num("jobs", &get("jobs", "1"))?;
        if jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        Ok(RunConfig {
            dim,
            size,
            length,
            degree,
            n,
            t,
            tol,
            seed,
            out,
            constant_alpha,
            jobs,
            flip_omega_sign: c.flip_omega_sign,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        if self.dim == 2 {
            vec![self.size; 2]
        } else {
            vec![self.size, self.size, 4, 4]
        }
    }

    pub fn lengths(&self) -> Vec<f64> {
        if self.dim == 2 {
            vec![self.length; 2]
        } else {
            vec![self.length, self.length, 1.0, 1.0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_spec() {
        assert_eq!(TSpec::parse("2.5").unwrap(), TSpec::Value(2.5));
        assert_eq!(TSpec::parse("auto+1").unwrap(), TSpec::Auto(1.0));
        assert_eq!(TSpec::parse("auto-0.5").unwrap(), TSpec::Auto(-0.5));
        assert_eq!(TSpec::parse("auto").unwrap(), TSpec::Auto(0.0));
        assert!(TSpec::parse("autox").is_err());
        assert!(TSpec::parse("nan").is_err());
        let v = 4.0 * PI * PI;
        assert!((TSpec::Auto(1.0).resolve(1, v) - (1.0 / PI + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::resolve(&Common::default()).unwrap();
        assert_eq!((c.dim, c.size, c.degree, c.n, c.seed), (2, 64, 1, 1, 0));
        let c = RunConfig::resolve(&Common {
            degree: Some("0".into()),
            alpha: Some("const".into()),
            ..Common::default()
        })
        .unwrap();
        assert!(c.constant_alpha);
        for bad in [
            Common {
                dim: Some("3".into()),
                ..Common::default()
            },
            Common {
                size: Some("7".into()),
                ..Common::default()
            },
            Common {
                alpha: Some("const".into()),
                ..Common::default()
            },
            Common {
                tol: Some("-1".into()),
                ..Common::default()
            },
        ] {
            assert!(RunConfig::resolve(&bad).is_err());
        }
    }

    #[test]
    fn config_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "# run\nsize = 32\nseed = 7 # comment\n").unwrap();
        let c = RunConfig::resolve(&Common {
            config: Some(p.clone()),
            seed: Some("9".into()),
            ..Common::default()
        })
        .unwrap();
        assert_eq!((c.size, c.seed), (32, 9));
        std::fs::write(&p, "colour = red\n").unwrap();
        assert!(RunConfig::resolve(&Common {
            config: Some(p),
            ..Common::default()
        })
        .is_err());
    }
}
