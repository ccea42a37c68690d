//! The pipeline behind the `zonekit` binary.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use zonekit::analysis::{
    check_cone_lemma, check_eps_neighborhood, check_strict_triangle, demonstrate_two_sites, LemmaReport,
    NonUniquenessSummary, TriangleMode,
};
use zonekit::dominance::{
    band_violations, DiagramState, DomOperator, ExtremalSeed, ResidualReport, BOUNDARY_BAND_CELLS,
};
use zonekit::export::{label_map_pgm, metrics_csv, region_pgm, svg};
use zonekit::raster::{Grid, RegionTuple};
use zonekit::{NormSpec, ZoneError};

use crate::config::{CheckId, ExportKind, Prepared, SeedMode};

/// Identifies the summary layout; bumped on incompatible changes.
pub const SUMMARY_SCHEMA: &str = "zonekit.summary";
pub const SUMMARY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Zone(#[from] ZoneError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Run the checks listed in the config.
    pub verify: bool,
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: CheckId,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_violations: Option<usize>,
    /// Path of the written report, relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub version: u32,
    pub name: String,
    pub norm: NormSpec,
    pub grid: Grid,
    pub n_sites: usize,
    pub min_separation: f64,
    pub seed_mode: SeedMode,
    pub rng_seed: u64,
    pub converged: bool,
    pub iterations: usize,
    /// Cells per region of the primary tuple (`R` for paired runs).
    pub region_counts: Vec<usize>,
    /// Cells per region of `S` (paired runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_counts: Option<Vec<usize>>,
    /// Cells where `R` and `S` differ (paired runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symdiff: Option<usize>,
    /// The primary tuple against its `Dom` image.
    pub residual: ResidualReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonuniqueness: Option<NonUniquenessSummary>,
    pub checks: Vec<CheckOutcome>,
    /// Files written, relative to the output directory, sorted.
    pub files: Vec<String>,
    pub pass: bool,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io { path: parent.to_path_buf(), source })?;
        }
        fs::write(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("summary types serialize");
        text.push('\n');
        self.write(name, text)
    }
}

enum Outcome {
    Paired(DiagramState),
    Single { tuple: RegionTuple, iterations: usize, converged: bool },
}

impl Outcome {
    fn primary(&self) -> &RegionTuple {
        match self {
            Outcome::Paired(st) => &st.r,
            Outcome::Single { tuple, .. } => tuple,
        }
    }
}

fn band_report(id: &str, grid: &Grid, pairs: &[(&RegionTuple, &RegionTuple)]) -> Result<LemmaReport, ZoneError> {
    let band = BOUNDARY_BAND_CELLS * grid.cell_diag();
    let mut report = LemmaReport::new(id);
    for (a, b) in pairs {
        report.samples_checked += a.symdiff_counts(b)?.iter().sum::<usize>();
        for (_, k) in band_violations(a, b, band)? {
            report.violation(grid.center_of(k));
        }
    }
    Ok(report)
}

/// Mirror line for two single-point sites stacked vertically.
fn mirror_line(p: &Prepared) -> Option<f64> {
    let s = p.sites.sites();
    if s.len() != 2 || s.iter().any(|x| x.points.len() != 1 || !x.segments.is_empty()) {
        return None;
    }
    let (a, b) = (s[0].points[0], s[1].points[0]);
    (a.x == b.x).then_some(0.5 * (a.y + b.y))
}

/// Runs the configured iteration, writes the requested exports and
/// `summary.json` into `opts.out_dir`, and returns the summary.
pub fn run(prepared: &Prepared, opts: &RunOptions) -> Result<Summary, RunError> {
    let cfg = &prepared.config;
    let (spec, grid) = (cfg.norm, prepared.grid);
    let say = |msg: String| {
        if !opts.quiet {
            println!("{msg}");
        }
    };
    fs::create_dir_all(&opts.out_dir).map_err(|source| RunError::Io { path: opts.out_dir.clone(), source })?;
    let mut out = Writer { dir: &opts.out_dir, files: Vec::new() };

    let op = DomOperator::new(&spec, &prepared.sites, &grid)?;
    let outcome = match cfg.seed_mode {
        SeedMode::Paired => Outcome::Paired(op.double_zone(cfg.max_iter)?),
        SeedMode::Bottom | SeedMode::Top => {
            let seed = if cfg.seed_mode == SeedMode::Bottom { ExtremalSeed::Bottom } else { ExtremalSeed::Top };
            let r = op.extremal(seed, cfg.max_iter)?;
            Outcome::Single { tuple: r.tuple, iterations: r.iterations, converged: r.converged }
        }
        SeedMode::Asymmetric(i) => {
            let r = op.asymmetric(i, cfg.max_iter)?;
            Outcome::Single { tuple: r.tuple, iterations: r.iterations, converged: r.converged }
        }
    };
    let (converged, iterations) = match &outcome {
        Outcome::Paired(st) => (st.converged, st.iterations),
        Outcome::Single { iterations, converged, .. } => (*converged, *iterations),
    };
    say(format!(
        "{}: {} after {iterations} iterations",
        cfg.name.as_deref().unwrap_or("run"),
        if converged { "converged" } else { "not converged" }
    ));
    let primary = outcome.primary();
    let residual = op.residual(primary)?;

    let wants = |k: ExportKind| cfg.exports.contains(&k);
    if wants(ExportKind::Labelmap) {
        match &outcome {
            Outcome::Paired(st) => {
                out.write("labelmap_R.pgm", label_map_pgm(&st.r))?;
                out.write("labelmap_S.pgm", label_map_pgm(&st.s))?;
            }
            Outcome::Single { tuple, .. } => out.write("labelmap.pgm", label_map_pgm(tuple))?,
        }
    }
    if wants(ExportKind::PerRegionPgm) {
        for (i, r) in primary.regions().iter().enumerate() {
            out.write(&format!("R_{i}.pgm"), region_pgm(r))?;
        }
        if let Outcome::Paired(st) = &outcome {
            for (i, r) in st.s.regions().iter().enumerate() {
                out.write(&format!("S_{i}.pgm"), region_pgm(r))?;
            }
        }
    }
    if wants(ExportKind::Svg) {
        out.write("diagram.svg", svg(primary, Some(&prepared.sites)))?;
    }
    if wants(ExportKind::Csv) {
        let text = match &outcome {
            Outcome::Paired(st) => metrics_csv(&st.history),
            Outcome::Single { tuple, iterations, .. } => {
                let mut t = String::from("iterations,region,cells\n");
                for (i, c) in tuple.counts().iter().enumerate() {
                    t.push_str(&format!("{iterations},{i},{c}\n"));
                }
                t
            }
        };
        out.write("metrics.csv", text)?;
    }

    let mut checks = Vec::new();
    let mut nonuniqueness = None;
    for &id in &cfg.checks {
        if !opts.verify {
            checks.push(CheckOutcome { id, status: CheckStatus::Skipped, samples: None, n_violations: None, report: None, detail: None });
            continue;
        }
        let mut detail = None;
        let report: Option<LemmaReport> = match (id, &outcome) {
            (CheckId::Convergence, _) => {
                if !converged {
                    detail = Some(format!("no stationarity within {} iterations", cfg.max_iter));
                }
                None
            }
            (CheckId::MonotoneChain, Outcome::Paired(st)) => {
                let ok = st.history.windows(2).all(|w| {
                    w[0].r_counts.iter().zip(&w[1].r_counts).all(|(a, b)| a <= b)
                        && w[0].s_counts.iter().zip(&w[1].s_counts).all(|(a, b)| a >= b)
                });
                if !ok {
                    detail = Some("recorded counts are not monotone".into());
                }
                None
            }
            (CheckId::FixedPoint, Outcome::Paired(st)) => {
                let (dr, ds) = (op.apply(&st.r)?, op.apply(&st.s)?);
                Some(band_report("fixed_point", &grid, &[(&st.s, &dr), (&st.r, &ds)])?)
            }
            (CheckId::FixedPoint, Outcome::Single { tuple, .. }) => {
                let image = op.apply(tuple)?;
                let target = if matches!(cfg.seed_mode, SeedMode::Asymmetric(_)) { image } else { op.apply(&image)? };
                Some(band_report("fixed_point", &grid, &[(tuple, &target)])?)
            }
            (CheckId::Uniqueness, Outcome::Paired(st)) => {
                let mut r = band_report("uniqueness", &grid, &[(&st.r, &st.s)])?;
                r.metric("symdiff", st.symdiff() as f64);
                Some(r)
            }
            (CheckId::EpsNeighborhood, Outcome::Paired(st)) => Some(check_eps_neighborhood(&spec, &prepared.sites, st)?),
            (CheckId::Cone, Outcome::Paired(st)) => {
                let rho = cfg.check_params.cone_rho_fraction * prepared.sites.min_separation();
                Some(check_cone_lemma(&spec, &prepared.sites, st, rho, cfg.check_params.cone_samples, cfg.rng_seed)?)
            }
            (CheckId::StrictTriangle, _) => Some(check_strict_triangle(
                &spec,
                cfg.check_params.triangle_samples,
                cfg.rng_seed,
                TriangleMode::Strict,
            )?),
            (CheckId::Nonuniqueness, _) => {
                match demonstrate_two_sites(&spec, &prepared.sites, &grid, mirror_line(prepared)) {
                    Ok(demo) => {
                        if wants(ExportKind::Labelmap) {
                            out.write("labelmap_a.pgm", label_map_pgm(&demo.a))?;
                            out.write("labelmap_b.pgm", label_map_pgm(&demo.b))?;
                        }
                        if wants(ExportKind::Svg) {
                            out.write("diagram_a.svg", svg(&demo.a, Some(&prepared.sites)))?;
                            out.write("diagram_b.svg", svg(&demo.b, Some(&prepared.sites)))?;
                        }
                        nonuniqueness = Some(demo.summary);
                    }
                    Err(ZoneError::DemonstrationFailed(m)) => detail = Some(m),
                    Err(e) => return Err(e.into()),
                }
                None
            }
            _ => unreachable!("check/mode combinations are validated with the config"),
        };
        let status = match (&report, &detail) {
            (Some(r), _) if !r.pass => CheckStatus::Fail,
            (_, Some(_)) => CheckStatus::Fail,
            _ => CheckStatus::Pass,
        };
        let mut path = None;
        if let Some(r) = &report {
            if wants(ExportKind::LemmaReports) {
                let name = format!("reports/{}.json", id.name());
                out.json(&name, r)?;
                path = Some(name);
            }
        }
        say(format!("check {}: {}", id.name(), if status == CheckStatus::Pass { "PASS" } else { "FAIL" }));
        checks.push(CheckOutcome {
            id,
            status,
            samples: report.as_ref().map(|r| r.samples_checked),
            n_violations: report.as_ref().map(|r| r.n_violations),
            report: path,
            detail,
        });
    }

    let (outer_counts, symdiff) = match &outcome {
        Outcome::Paired(st) => (Some(st.s.counts()), Some(st.symdiff())),
        Outcome::Single { .. } => (None, None),
    };
    out.files.push("summary.json".into());
    out.files.sort();
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        version: SUMMARY_VERSION,
        name: cfg.name.clone().unwrap_or_else(|| "run".into()),
        norm: spec,
        grid,
        n_sites: prepared.sites.len(),
        min_separation: prepared.sites.min_separation(),
        seed_mode: cfg.seed_mode,
        rng_seed: cfg.rng_seed,
        converged,
        iterations,
        region_counts: primary.counts(),
        outer_counts,
        symdiff,
        residual,
        nonuniqueness,
        pass: checks.iter().all(|c| c.status != CheckStatus::Fail),
        checks,
        files: out.files.clone(),
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}
