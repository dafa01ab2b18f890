//! Run configuration: built-in defaults, overlaid by a config file, overlaid
//! by `--key value` flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gevrey_bbm::analytics::radius::{BandPolicy, DEFAULT_NOISE_FLOOR, DEFAULT_T_MIN};
use gevrey_bbm::analytics::Calibration;
use gevrey_bbm::keyvalue::KeyValues;
use gevrey_bbm::{GevreyWeight, Grid, InitialData, ModelParams, SymbolKind};
use serde::Serialize;

use crate::CliError;

/// `(section, key, default)`. Every accepted key appears here exactly once.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("model", "alpha", "2.0"),
    ("model", "n_points", "256"),
    ("model", "domain_length", "64.0"),
    ("model", "dt", "0.001"),
    ("model", "t_end", "10.0"),
    ("model", "linear_only", "false"),
    ("model", "sample_every", "100"),
    ("weight", "sigma", "0.1"),
    ("weight", "s", "1.0"),
    ("weight", "symbol", "cosh"),
    ("initial", "initial", "gaussian"),
    ("initial", "amplitude", "-1.0"),
    ("initial", "width", "2.0"),
    ("initial", "mode", "1"),
    ("identities", "k_max", "20"),
    ("identities", "coordinate_range", "10"),
    ("identities", "fab_samples", "10000"),
    ("identities", "fab_sigmas", "0.01, 0.1, 0.5"),
    ("identities", "triad_range", "20.0"),
    (
        "conservation",
        "sigma_list",
        "0.01, 0.0162, 0.0262, 0.0424, 0.0686, 0.111, 0.1797, 0.3",
    ),
    ("conservation", "delta", "auto"),
    ("conservation", "calibration", "shipped"),
    ("radius", "band", "adaptive"),
    ("radius", "xi_lo", "0.0"),
    ("radius", "xi_hi", "inf"),
    ("radius", "noise_floor", "1e-14"),
    ("radius", "t_min", "1.0"),
    ("schedule", "horizon", "1000.0"),
    ("schedule", "horizons", "10, 100, 1000, 10000, 100000"),
    ("schedule", "sigma0", "0.3"),
    ("schedule", "c1", "auto"),
    ("schedule", "c2", "auto"),
    ("schedule", "schedule_simulate", "false"),
    ("sweep", "sweep_alphas", "2.0, 3.0"),
    ("sweep", "sweep_sigmas", "0.01, 0.03, 0.1, 0.3"),
    ("sweep", "jobs", "4"),
    ("run", "seed", "20240611"),
    ("run", "output_dir", "out"),
    ("run", "calibration_out", "calibration.cal"),
    ("run", "bilinear_samples", "200"),
];

/// Fully resolved key set.
#[derive(Debug, Clone)]
pub struct RunConfig {
    kv: KeyValues,
    /// Directory of the config file; relative paths resolve against it.
    base: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::config(msg)
}

impl RunConfig {
    pub fn defaults() -> Self {
        let mut kv = KeyValues::default();
        for (section, key, value) in KEYS {
            kv.set(section, key, *value);
        }
        Self {
            kv,
            base: PathBuf::from("."),
        }
    }

    /// Defaults, then the file, then `overrides` (`--key value` pairs).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config '{}': {e}", path.display())))?;
        let file =
            KeyValues::parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::defaults();
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for e in file.entries() {
            cfg.set(&e.key, &e.value).map_err(|err| {
                config_err(format!(
                    "{} line {}: {}",
                    path.display(),
                    e.line,
                    err.message
                ))
            })?;
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let file = KeyValues::parse(text).map_err(|e| config_err(e.to_string()))?;
        let mut cfg = Self::defaults();
        for e in file.entries() {
            cfg.set(&e.key, &e.value)?;
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        let mut it = overrides.iter();
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| config_err(format!("expected --key, found '{flag}'")))?;
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| config_err(format!("flag --{key} needs a value")))?;
                    (key.to_string(), v.clone())
                }
            };
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let section = KEYS
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(s, _, _)| *s)
            .ok_or_else(|| config_err(format!("unknown key '{key}'")))?;
        self.kv.set(section, key, value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.kv.get(key).expect("every key has a default")
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.kv
            .require::<f64>(key)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.kv
            .require::<usize>(key)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.kv
            .require::<u64>(key)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        self.kv
            .require::<bool>(key)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        Ok(self
            .kv
            .float_list(key)
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or_default())
    }

    /// `None` for the literal `auto`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.get(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        self.model()?;
        self.weight()?;
        self.initial()?;
        self.band_policy()?;
        self.u64("seed")?;
        for key in [
            "sample_every",
            "k_max",
            "fab_samples",
            "jobs",
            "bilinear_samples",
        ] {
            self.usize(key)?;
        }
        self.u64("coordinate_range")?;
        for key in [
            "fab_sigmas",
            "sigma_list",
            "horizons",
            "sweep_alphas",
            "sweep_sigmas",
        ] {
            self.list(key)?;
        }
        for key in ["triad_range", "noise_floor", "t_min", "horizon", "sigma0"] {
            self.f64(key)?;
        }
        for key in ["delta", "c1", "c2"] {
            self.auto_f64(key)?;
        }
        self.bool("schedule_simulate")?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.usize("n_points")?, self.f64("domain_length")?)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        let p = ModelParams::new(
            self.f64("alpha")?,
            self.grid()?,
            self.f64("dt")?,
            self.f64("t_end")?,
        )
        .map_err(|e| config_err(e.to_string()))?;
        Ok(if self.bool("linear_only")? {
            p.linear()
        } else {
            p
        })
    }

    pub fn weight(&self) -> Result<GevreyWeight, CliError> {
        let kind = match self.get("symbol") {
            "cosh" => SymbolKind::CoshSymbol,
            "exp" => SymbolKind::ExpSymbol,
            other => {
                return Err(config_err(format!(
                    "symbol must be cosh|exp, got '{other}'"
                )))
            }
        };
        GevreyWeight::new(self.f64("sigma")?, self.f64("s")?, kind)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn initial(&self) -> Result<InitialData, CliError> {
        let mode = self
            .kv
            .require::<u32>("mode")
            .map_err(|e| config_err(e.to_string()))?;
        InitialData::parse(
            self.get("initial"),
            self.f64("amplitude")?,
            self.f64("width")?,
            mode,
        )
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn band_policy(&self) -> Result<BandPolicy, CliError> {
        match self.get("band") {
            "adaptive" => Ok(BandPolicy::Adaptive),
            "fixed" => Ok(BandPolicy::Fixed {
                xi_lo: self.f64("xi_lo")?,
                xi_hi: self.f64("xi_hi")?,
            }),
            other => Err(config_err(format!(
                "band must be adaptive|fixed, got '{other}'"
            ))),
        }
    }

    pub fn noise_floor(&self) -> Result<f64, CliError> {
        let v = self.f64("noise_floor")?;
        Ok(if v > 0.0 { v } else { DEFAULT_NOISE_FLOOR })
    }

    pub fn t_min(&self) -> Result<f64, CliError> {
        let v = self.f64("t_min")?;
        Ok(if v >= 0.0 { v } else { DEFAULT_T_MIN })
    }

    /// `calibration = shipped` uses the constants bundled for α = 2, 3;
    /// anything else is a path to a calibration file.
    pub fn calibration(&self, alpha: f64) -> Result<Calibration, CliError> {
        let src = self.get("calibration");
        if src == "shipped" {
            return Calibration::frozen(alpha).map_err(|e| config_err(e.to_string()));
        }
        let path = self.resolve(src);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            config_err(format!("cannot read calibration '{}': {e}", path.display()))
        })?;
        let cal = Calibration::from_text(&text).map_err(|e| config_err(e.to_string()))?;
        if cal.alpha != alpha {
            return Err(config_err(format!(
                "calibration file is for alpha = {}, run uses alpha = {alpha}",
                cal.alpha
            )));
        }
        Ok(cal)
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.get("output_dir"))
    }

    /// Every key and value, grouped by section; embedded in all outputs.
    pub fn resolved(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.kv.to_sorted_map()
    }

    pub fn render(&self) -> String {
        self.kv.render()
    }
}

/// Header block written into every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: BTreeMap<String, BTreeMap<String, String>>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.u64("seed")?,
            config: cfg.resolved(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_unique() {
        for (i, (_, k, _)) in KEYS.iter().enumerate() {
            assert!(KEYS[i + 1..].iter().all(|(_, k2, _)| k2 != k), "{k}");
        }
    }

    #[test]
    fn defaults_validate() {
        let c = RunConfig::from_text("", &[]).unwrap();
        assert_eq!(c.model().unwrap().alpha, 2.0);
        assert_eq!(c.initial().unwrap(), InitialData::DEFAULT);
        assert_eq!(c.list("sigma_list").unwrap().len(), 8);
    }

    #[test]
    fn overrides_win() {
        let c = RunConfig::from_text(
            "[model]\nalpha = 3\n",
            &["--alpha".into(), "2.5".into(), "--dt=0.01".into()],
        )
        .unwrap();
        assert_eq!(c.f64("alpha").unwrap(), 2.5);
        assert_eq!(c.f64("dt").unwrap(), 0.01);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for (text, flags) in [
            ("bogus = 1\n", vec![]),
            ("alpha = x\n", vec![]),
            ("alpha = 0.5\n", vec![]),
            ("", vec!["--dt".to_string()]),
            ("", vec!["dt".to_string(), "1".to_string()]),
            ("symbol = gauss\n", vec![]),
            ("initial = square\n", vec![]),
        ] {
            let e = RunConfig::from_text(text, &flags).unwrap_err();
            assert_eq!(e.code, crate::exit::CONFIG, "{text} {flags:?}");
        }
    }
}
