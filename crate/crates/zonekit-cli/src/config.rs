//! Run configuration: a JSON document, optionally patched with dotted
//! `key=value` overrides.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use zonekit::raster::Grid;
use zonekit::sites::{Site, SiteSet};
use zonekit::NormSpec;

/// Smallest accepted resolution along either axis.
pub const MIN_RESOLUTION: usize = 32;

/// Which iteration to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// Inner and outer chains together, giving `(R, S)`.
    Paired,
    /// `Dom²` from the site rasters.
    Bottom,
    /// `Dom²` from the full grid.
    Top,
    /// `Dom` from the tuple favoring one site.
    Asymmetric(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Labelmap,
    PerRegionPgm,
    Svg,
    Csv,
    LemmaReports,
}

/// Checks a run can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// The iteration reached bitmap stationarity.
    Convergence,
    /// Recorded chain counts are monotone.
    MonotoneChain,
    /// The result is a fixed point up to the boundary band: `Dom R = S` and
    /// `Dom S = R` (paired), `Dom² T = T` (bottom, top) or `Dom T = T`.
    FixedPoint,
    /// `R` and `S` agree up to the boundary band (paired).
    Uniqueness,
    EpsNeighborhood,
    /// Cone lemma on the converged `R` (paired, rotund norms).
    Cone,
    /// Strict triangle inequality (rotund norms).
    StrictTriangle,
    /// Two distinct zone diagrams from the asymmetric seeds (two sites).
    Nonuniqueness,
}

impl CheckId {
    pub fn name(self) -> &'static str {
        match self {
            CheckId::Convergence => "convergence",
            CheckId::MonotoneChain => "monotone_chain",
            CheckId::FixedPoint => "fixed_point",
            CheckId::Uniqueness => "uniqueness",
            CheckId::EpsNeighborhood => "eps_neighborhood",
            CheckId::Cone => "cone",
            CheckId::StrictTriangle => "strict_triangle",
            CheckId::Nonuniqueness => "nonuniqueness",
        }
    }
}

fn default_max_iter() -> usize {
    500
}

fn default_samples() -> usize {
    200
}

/// Parameters for the sampled checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    /// Cone radius as a fraction of the minimum site separation.
    #[serde(default = "default_rho_fraction")]
    pub cone_rho_fraction: f64,
    /// Boundary cells sampled by the cone check.
    #[serde(default = "default_samples")]
    pub cone_samples: usize,
    /// Vector pairs sampled by the strict triangle check.
    #[serde(default = "default_triangle_samples")]
    pub triangle_samples: usize,
}

fn default_rho_fraction() -> f64 {
    0.125
}

fn default_triangle_samples() -> usize {
    100_000
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            cone_rho_fraction: default_rho_fraction(),
            cone_samples: default_samples(),
            triangle_samples: default_triangle_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub norm: NormSpec,
    pub sites: Vec<Site>,
    /// `[xmin, ymin, xmax, ymax]`.
    pub window: [f64; 4],
    /// `[nx, ny]`.
    pub resolution: [usize; 2],
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_seed_mode")]
    pub seed_mode: SeedMode,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub exports: Vec<ExportKind>,
    #[serde(default)]
    pub checks: Vec<CheckId>,
    #[serde(default)]
    pub check_params: CheckParams,
}

fn default_seed_mode() -> SeedMode {
    SeedMode::Paired
}

/// A configuration problem, with the line of the offending entry when it
/// can be located.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.source, l, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated configuration with its derived objects.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub sites: SiteSet,
    pub grid: Grid,
}

/// Line (1-based) of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// Sets the value at a dotted path, creating objects along the way. Array
/// elements are addressed by index. The value is read as JSON when it
/// parses, as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("override path `{path}` has an empty component"));
    }
    let mut node = doc;
    for (depth, key) in keys.iter().enumerate() {
        let last = depth + 1 == keys.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| format!("`{key}` in `{path}` is not an array index"))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| format!("index {idx} in `{path}` out of range ({len})"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{path}` descends into a scalar at `{key}`")),
        };
    }
    unreachable!("loop returns on the last key")
}

impl RunConfig {
    /// Parses `text` (named `source` in messages) and applies `overrides`.
    pub fn parse(text: &str, source: &str, overrides: &[String]) -> Result<Prepared, ConfigError> {
        let err = |line: Option<usize>, message: String| ConfigError { source: source.to_string(), line, message };
        let config: RunConfig = if overrides.is_empty() {
            serde_json::from_str(text).map_err(|e| err(Some(e.line()), strip_position(&e)))?
        } else {
            let mut doc: Value = serde_json::from_str(text).map_err(|e| err(Some(e.line()), strip_position(&e)))?;
            for o in overrides {
                apply_override(&mut doc, o).map_err(|m| err(None, m))?;
            }
            serde_json::from_value(doc).map_err(|e| err(None, format!("after overrides: {e}")))?
        };
        config.prepare().map_err(|(key, message)| err(line_of(text, key), message))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Prepared, ConfigError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { source: source.clone(), line: None, message: e.to_string() })?;
        Self::parse(&text, &source, overrides)
    }

    /// Semantic validation. Errors carry the key they concern.
    fn prepare(self) -> Result<Prepared, (&'static str, String)> {
        self.norm.validate().map_err(|e| ("norm", e.to_string()))?;
        let [xmin, ymin, xmax, ymax] = self.window;
        let [nx, ny] = self.resolution;
        if nx < MIN_RESOLUTION || ny < MIN_RESOLUTION {
            return Err(("resolution", format!("resolution must be at least {MIN_RESOLUTION} x {MIN_RESOLUTION}, got {nx} x {ny}")));
        }
        let grid = Grid::new(xmin, ymin, xmax, ymax, nx, ny).map_err(|e| ("window", e.to_string()))?;
        if self.max_iter == 0 {
            return Err(("max_iter", "max_iter must be at least 1".into()));
        }
        if self.sites.is_empty() {
            return Err(("sites", "at least one site is required".into()));
        }
        let sites = SiteSet::new(&self.norm, self.sites.clone()).map_err(|e| ("sites", e.to_string()))?;
        let (lo, hi) = sites.bounds();
        let gap = (lo.x - xmin).min(lo.y - ymin).min(xmax - hi.x).min(ymax - hi.y);
        let need = if sites.len() > 1 { sites.min_separation() } else { 0.0 };
        if !(gap > 0.0 && gap >= need) {
            return Err((
                "window",
                format!("window must contain every site with a margin of at least {need} (the minimum site separation); the margin is {gap}"),
            ));
        }
        if let SeedMode::Asymmetric(i) = self.seed_mode {
            if i >= sites.len() {
                return Err(("seed_mode", format!("asymmetric seed names site {i}, but there are {} sites", sites.len())));
            }
        }
        for &c in &self.checks {
            let paired_only = matches!(c, CheckId::Uniqueness | CheckId::EpsNeighborhood | CheckId::Cone);
            if paired_only && self.seed_mode != SeedMode::Paired {
                return Err(("checks", format!("check `{}` needs seed_mode \"paired\"", c.name())));
            }
            if c == CheckId::MonotoneChain && !matches!(self.seed_mode, SeedMode::Paired) {
                return Err(("checks", "check `monotone_chain` needs seed_mode \"paired\"".into()));
            }
            if matches!(c, CheckId::Cone | CheckId::StrictTriangle) && !self.norm.is_rotund() {
                return Err(("checks", format!("check `{}` needs a rotund norm; {} is not", c.name(), self.norm)));
            }
            if c == CheckId::Nonuniqueness && sites.len() != 2 {
                return Err(("checks", "check `nonuniqueness` needs exactly two sites".into()));
            }
        }
        let p = &self.check_params;
        if !(p.cone_rho_fraction > 0.0 && p.cone_rho_fraction <= 0.25) {
            return Err(("cone_rho_fraction", "cone_rho_fraction must lie in (0, 0.25]".into()));
        }
        Ok(Prepared { config: self, sites, grid })
    }
}

/// serde_json appends " at line L column C"; the line is reported
/// separately.
fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "norm": {"kind": "euclidean"},
  "sites": [
    {"points": [[-1.5, 0]]},
    {"points": [[1.5, 0]]}
  ],
  "window": [-6, -6, 6, 6],
  "resolution": [64, 64]
}"#;

    #[test]
    fn defaults() {
        let p = RunConfig::parse(BASE, "base", &[]).unwrap();
        assert_eq!(p.config.seed_mode, SeedMode::Paired);
        assert_eq!(p.config.max_iter, 500);
        assert_eq!(p.grid.nx, 64);
        assert_eq!(p.sites.min_separation(), 3.0);
    }

    #[test]
    fn overrides() {
        let o = vec![
            "resolution=[40,48]".to_string(),
            "norm.kind=lp".to_string(),
            "norm.p=4".to_string(),
            "sites.1.points.0=[2,0]".to_string(),
            "seed_mode={\"asymmetric\":1}".to_string(),
        ];
        let p = RunConfig::parse(BASE, "base", &o).unwrap();
        assert_eq!(p.config.resolution, [40, 48]);
        assert_eq!(p.config.norm, NormSpec::Lp { p: 4.0 });
        assert_eq!(p.config.sites[1].points[0].x, 2.0);
        assert_eq!(p.config.seed_mode, SeedMode::Asymmetric(1));
        assert!(RunConfig::parse(BASE, "base", &["sites.7.points=[]".into()]).is_err());
        assert!(RunConfig::parse(BASE, "base", &["window.0.x=1".into()]).is_err());
        assert!(RunConfig::parse(BASE, "base", &["nokey".into()]).is_err());
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse(&BASE.replace("[64, 64]", "[16, 64]"), "c.json", &[]).unwrap_err();
        assert_eq!(e.line, Some(8));
        assert!(e.to_string().starts_with("c.json:8: resolution"));

        let e = RunConfig::parse(&BASE.replace("[-6, -6, 6, 6]", "[-2, -6, 6, 6]"), "c.json", &[]).unwrap_err();
        assert_eq!(e.line, Some(7));

        let e = RunConfig::parse(&BASE.replace("\"euclidean\"", "\"taxicab\""), "c.json", &[]).unwrap_err();
        assert_eq!(e.line, Some(2));

        let e = RunConfig::parse(&BASE.replace("\"window\"", "\"windoww\""), "c.json", &[]).unwrap_err();
        assert!(e.line.is_some() && e.message.contains("windoww"));
    }

    #[test]
    fn check_compatibility() {
        let with = |extra: &str| BASE.replace("\"resolution\": [64, 64]", &format!("\"resolution\": [64, 64], {extra}"));
        assert!(RunConfig::parse(&with(r#""checks": ["cone"], "seed_mode": "top""#), "c", &[]).is_err());
        let l1 = with(r#""checks": ["strict_triangle"]"#).replace("\"euclidean\"", "\"l1\"");
        assert!(RunConfig::parse(&l1, "c", &[]).is_err());
        assert!(RunConfig::parse(&with(r#""seed_mode": {"asymmetric": 2}"#), "c", &[]).is_err());
        assert!(RunConfig::parse(&with(r#""checks": ["fixed_point", "nonuniqueness"]"#), "c", &[]).is_ok());
    }
}
