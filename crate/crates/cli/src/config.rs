//! Run parameters from flags and an optional `key=value` file. Flags win over
//! the file, the file wins over built-in defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use crate::Result;

/// Keys a config file may set. They match the long flag names.
const KEYS: &[&str] = &[
    "g", "xc", "omega0", "E", "gamma", "rho0", "rho0-tilde", "N", "h", "inv-h-min", "inv-h-max",
    "samples", "f-min", "f-max", "f-samples", "out",
];

#[derive(Args, Debug, Clone, Default)]
pub struct Params {
    /// Interorbit coupling g.
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Half distance between orbit centres.
    #[arg(long, allow_negative_numbers = true)]
    pub xc: Option<f64>,
    /// Constant current amplitude ω0.
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    /// Fermi energy.
    #[arg(long = "E", allow_negative_numbers = true)]
    pub energy: Option<f64>,
    /// Gaussian broadening in level index.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho0: Option<f64>,
    #[arg(long = "rho0-tilde", allow_negative_numbers = true)]
    pub rho0_tilde: Option<f64>,
    /// Chain size: 2N+2 orbits.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Effective Planck constant, for commands that work at fixed field.
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long = "inv-h-min", allow_negative_numbers = true)]
    pub inv_h_min: Option<f64>,
    #[arg(long = "inv-h-max", allow_negative_numbers = true)]
    pub inv_h_max: Option<f64>,
    /// Samples of the inverse-field grid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long = "f-min", allow_negative_numbers = true)]
    pub f_min: Option<f64>,
    #[arg(long = "f-max", allow_negative_numbers = true)]
    pub f_max: Option<f64>,
    #[arg(long = "f-samples")]
    pub f_samples: Option<usize>,
    /// Output base path; companion files append a suffix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text `key=value` file with defaults for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run every map on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub g: f64,
    pub xc: f64,
    pub omega0: f64,
    pub energy: f64,
    pub gamma: f64,
    pub rho0: f64,
    pub rho0_tilde: f64,
    pub n: usize,
    pub h: f64,
    pub inv_h_min: f64,
    pub inv_h_max: f64,
    pub samples: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub f_samples: usize,
    pub out: Option<PathBuf>,
    pub sequential: bool,
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected key=value", path.display(), i + 1).into());
        };
        let k = k.trim().trim_start_matches("--");
        if !KEYS.contains(&k) {
            return Err(format!("{}:{}: unknown key '{k}'", path.display(), i + 1).into());
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(s) => s
            .parse()
            .map_err(|_| format!("config value for '{key}' is not valid: '{s}'").into()),
        None => Ok(default),
    }
}

impl Params {
    pub fn resolve(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let out = match &self.out {
            Some(p) => Some(p.clone()),
            None => file.get("out").map(PathBuf::from),
        };
        let s = Settings {
            g: pick(self.g, &file, "g", 0.2)?,
            xc: pick(self.xc, &file, "xc", 1.0)?,
            omega0: pick(self.omega0, &file, "omega0", 1.0)?,
            energy: pick(self.energy, &file, "E", 3.0)?,
            gamma: pick(self.gamma, &file, "gamma", 0.1)?,
            rho0: pick(self.rho0, &file, "rho0", 1.0)?,
            rho0_tilde: pick(self.rho0_tilde, &file, "rho0-tilde", 1.0)?,
            n: pick(self.n, &file, "N", 1)?,
            h: pick(self.h, &file, "h", 1.0)?,
            inv_h_min: pick(self.inv_h_min, &file, "inv-h-min", 1.0)?,
            inv_h_max: pick(self.inv_h_max, &file, "inv-h-max", 60.0)?,
            samples: pick(self.samples, &file, "samples", 4096)?,
            f_min: pick(self.f_min, &file, "f-min", 0.0)?,
            f_max: pick(self.f_max, &file, "f-max", 5.0)?,
            f_samples: pick(self.f_samples, &file, "f-samples", 5001)?,
            out,
            sequential: self.sequential,
        };
        s.check()?;
        Ok(s)
    }
}

impl Settings {
    fn check(&self) -> Result<()> {
        let finite = [
            ("g", self.g),
            ("xc", self.xc),
            ("omega0", self.omega0),
            ("E", self.energy),
            ("gamma", self.gamma),
            ("rho0", self.rho0),
            ("rho0-tilde", self.rho0_tilde),
            ("h", self.h),
            ("inv-h-min", self.inv_h_min),
            ("inv-h-max", self.inv_h_max),
            ("f-min", self.f_min),
            ("f-max", self.f_max),
        ];
        if let Some((k, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("{k} must be finite, got {v}").into());
        }
        if !(self.inv_h_min > 0.0 && self.inv_h_max > self.inv_h_min) {
            return Err(format!(
                "need 0 < inv-h-min < inv-h-max, got {} and {}",
                self.inv_h_min, self.inv_h_max
            )
            .into());
        }
        if self.samples < 2 || self.f_samples < 2 {
            return Err("samples and f-samples must be at least 2".into());
        }
        if !(self.f_max > self.f_min && self.f_min >= 0.0) {
            return Err(format!("need 0 <= f-min < f-max, got {} and {}", self.f_min, self.f_max).into());
        }
        Ok(())
    }

    pub fn exec(&self) -> magorbits::Exec {
        if self.sequential {
            magorbits::Exec::Sequential
        } else {
            magorbits::Exec::default()
        }
    }

    /// `<base><suffix>.<ext>`, with any extension on the base dropped.
    pub fn output(&self, default_base: &str, suffix: &str, ext: &str) -> PathBuf {
        let base = self.out.clone().unwrap_or_else(|| PathBuf::from(default_base));
        let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        base.with_file_name(format!("{stem}{suffix}.{ext}"))
    }
}
