//! Orchestration behind the `bl-verify` binary: build transports, simulate
//! embeddings, run the verifier and render every output file in memory.
//!
//! Nothing touches the filesystem until [`write_outputs`], so a failing run
//! leaves no partial results behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bl_skorokhod::config::{ExperimentConfig, ResolvedPotential};
use bl_skorokhod::convex::ConvexTest;
use bl_skorokhod::embedding::{
    embedded_law_check, t_bound_check, wald_check, ClarkIntegrand, EmbeddingEnsemble, TimeRule,
};
use bl_skorokhod::local_time::auxiliary_inequality_check;
use bl_skorokhod::potentials::{uniform_grid, Reference};
use bl_skorokhod::report::{
    format_number, EmbeddingSummary, ExperimentReport, HazardSummary, PotentialSummary, RunSettings,
};
use bl_skorokhod::transport::TransportMap;
use bl_skorokhod::verifier::{mc_crosscheck, sandwich, verify_appendix, verify_theorem, Check, VerificationReport};

/// Half-width and step of the x-grid for the g′ bound and the plot data.
pub const G_GRID_HALF_WIDTH: f64 = 8.0;
pub const G_GRID_STEP: f64 = 0.01;
const PLOT_STEP: f64 = 0.05;
const HAZARD_STEP: f64 = 0.05;
const G_FUNCTION_STEP: f64 = 0.001;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, flags or output directory: exit status 2.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical stage could not produce a verdict: exit status 2.
    #[error("{0}")]
    Compute(#[from] bl_skorokhod::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Transport, embedding, verification and the sandwich.
    Run,
    /// Ensembles and their checks only.
    Embed,
    /// Quadrature only, no Monte Carlo.
    Verify,
    /// Local-time sandwich curves.
    Sandwich,
    /// Slope-map potentials only.
    Appendix,
}

impl Command {
    fn simulates(self) -> bool {
        matches!(self, Command::Run | Command::Embed | Command::Sandwich)
    }
    fn verifies(self) -> bool {
        matches!(self, Command::Run | Command::Verify | Command::Appendix)
    }
}

/// A rendered output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub files: Vec<OutputFile>,
    /// Human-readable descriptions of every failed check.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.report.all_pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Runs `command` on a validated config and renders all outputs.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut resolved = cfg.resolve_potentials().map_err(|e| CliError::Config(e.to_string()))?;
    if command == Command::Appendix {
        resolved.retain(|r| r.appendix.is_some());
        if resolved.is_empty() {
            return Err(CliError::Config(
                "appendix needs at least one slope-map potential".into(),
            ));
        }
    }
    let psis = cfg.build_psis().map_err(|e| CliError::Config(e.to_string()))?;
    let n_paths = if command.simulates() { cfg.n_paths } else { 0 };

    let mut potentials = Vec::new();
    let mut entries = Vec::new();
    let mut files = Vec::new();
    let mut first_ensemble: Option<String> = None;

    for (idx, r) in resolved.iter().enumerate() {
        let map = TransportMap::build(&r.potential, r.a, cfg.quadrature_tol)?;
        let slug = slug(idx, r.potential.label());
        let ensemble = if n_paths > 0 {
            let clark = ClarkIntegrand::new(&map);
            Some(clark.simulate(n_paths, cfg.n_steps, cfg.seed, TimeRule::Trapezoid)?)
        } else {
            None
        };
        if let Some(e) = &ensemble {
            if first_ensemble.is_none() {
                first_ensemble = Some(e.to_csv());
            }
            if command == Command::Embed {
                files.push(OutputFile {
                    path: Path::new("ensembles").join(format!("{slug}.csv")),
                    contents: e.to_csv(),
                });
            }
        }
        let summary = potential_summary(command, cfg, r, &map, ensemble.as_ref())?;
        if command.verifies() {
            files.push(OutputFile {
                path: Path::new("plotdata").join(format!("transport_{slug}.csv")),
                contents: transport_plot(&map),
            });
        }
        if let Some(emb) = summary.embedding.as_ref().filter(|e| !e.sandwich.is_empty()) {
            files.push(OutputFile {
                path: Path::new("plotdata").join(format!("sandwich_{slug}.csv")),
                contents: sandwich_plot(emb, &cfg.p_list),
            });
        }
        potentials.push(summary);

        if command.verifies() {
            for psi in &psis {
                let mut rep = verify_entry(psi, &map, r, &cfg.p_list)?;
                if let (Some(e), Command::Run) = (&ensemble, command) {
                    rep.mc_crosscheck = Some(mc_crosscheck(psi, e, &map)?);
                }
                entries.push(rep);
            }
        }
    }

    let settings = RunSettings {
        a: cfg.a,
        n_paths,
        n_steps: cfg.n_steps,
        seed: cfg.seed,
        p_list: cfg.p_list.clone(),
        quadrature_tol: cfg.quadrature_tol,
    };
    let report = ExperimentReport::new(settings, potentials, entries);
    let failures = describe_failures(&report);

    let mut out = vec![OutputFile {
        path: "report.json".into(),
        contents: report.to_json(),
    }];
    if command.verifies() {
        out.push(OutputFile {
            path: "summary.csv".into(),
            contents: report.summary_csv(),
        });
        out.push(OutputFile {
            path: Path::new("plotdata").join("margins.csv"),
            contents: margins_plot(&report),
        });
    }
    if let Some(csv) = first_ensemble {
        out.push(OutputFile {
            path: "ensemble.csv".into(),
            contents: csv,
        });
    }
    out.extend(files);
    Ok(Outcome {
        report,
        files: out,
        failures,
    })
}

fn verify_entry(
    psi: &ConvexTest,
    map: &TransportMap,
    r: &ResolvedPotential,
    p_list: &[f64],
) -> Result<VerificationReport, CliError> {
    Ok(match &r.appendix {
        Some(bounds) => verify_appendix(psi, map, bounds, p_list)?,
        None => verify_theorem(psi, map, p_list)?,
    })
}

fn potential_summary(
    command: Command,
    cfg: &ExperimentConfig,
    r: &ResolvedPotential,
    map: &TransportMap,
    ensemble: Option<&EmbeddingEnsemble>,
) -> Result<PotentialSummary, CliError> {
    let grid = uniform_grid(-G_GRID_HALF_WIDTH, G_GRID_HALF_WIDTH, G_GRID_STEP);
    let convex_gaussian = r.potential.reference() == Reference::Gaussian && r.potential.is_convex();
    let (hazard, g_nonnegative) = if convex_gaussian {
        let h = map.check_hazard_inequalities(&uniform_grid(-G_GRID_HALF_WIDTH, G_GRID_HALF_WIDTH, HAZARD_STEP))?;
        let xi: Vec<f64> = uniform_grid(G_FUNCTION_STEP, 1.0 - G_FUNCTION_STEP, G_FUNCTION_STEP);
        let g = map.check_g_nonnegative(&xi)?;
        let summary = HazardSummary {
            points: h.points,
            min_ratio_slack: h.min_ratio_slack,
            min_density_slack: h.min_density_slack,
            violations: h.violations.len(),
            pass: h.pass(),
        };
        (Some(summary), Some(g))
    } else {
        (None, None)
    };
    let embedding = match ensemble {
        Some(e) => {
            let (sandwich_points, auxiliary) = if matches!(command, Command::Run | Command::Sandwich) {
                let pts = sandwich(e, map, &cfg.sandwich_grid, &cfg.p_list)?;
                let aux = cfg
                    .sandwich_grid
                    .iter()
                    .map(|&x| auxiliary_inequality_check(e, x, r.a, r.a))
                    .collect::<bl_skorokhod::Result<Vec<_>>>()?;
                (pts, aux)
            } else {
                (vec![], vec![])
            };
            Some(EmbeddingSummary {
                n_paths: e.samples().len(),
                n_steps: e.n_steps(),
                seed: e.seed(),
                mean_g: e.mean_g(),
                clamp_count: e.clamp_count(),
                wald: wald_check(e, map.variance())?,
                t_bound: t_bound_check(e)?,
                law: embedded_law_check(e, map)?,
                sandwich: sandwich_points,
                auxiliary,
            })
        }
        None => None,
    };
    Ok(PotentialSummary {
        label: r.potential.label().to_string(),
        reference: r.potential.reference(),
        a: r.a,
        log_normalizer: map.log_normalizer(),
        mean: map.mean(),
        variance: map.variance(),
        g_prime_bound: map.check_g_prime_bound(&grid),
        hazard,
        g_nonnegative,
        embedding,
    })
}

/// `NN_label` with every non-alphanumeric run replaced by `_`.
fn slug(idx: usize, label: &str) -> String {
    let mut s = format!("{idx:02}_");
    let mut last_sep = true;
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c);
            last_sep = false;
        } else if !last_sep {
            s.push('_');
            last_sep = true;
        }
        if s.len() >= 48 {
            break;
        }
    }
    s.trim_end_matches('_').to_string()
}

fn transport_plot(map: &TransportMap) -> String {
    let mut out = String::from("x,g,g_prime,sqrt_a\n");
    let root = format_number(map.sqrt_a());
    for x in uniform_grid(-G_GRID_HALF_WIDTH, G_GRID_HALF_WIDTH, PLOT_STEP) {
        let _ = writeln!(
            out,
            "{},{},{},{root}",
            format_number(x),
            format_number(map.transport_g(x)),
            format_number(map.transport_g_prime(x)),
        );
    }
    out
}

fn sandwich_plot(e: &EmbeddingSummary, p_list: &[f64]) -> String {
    let mut out = String::from("x,est1,mc_gap,mc_std_error");
    for p in p_list {
        let _ = write!(out, ",est2_p{p}");
    }
    out.push('\n');
    for pt in &e.sandwich {
        let _ = write!(
            out,
            "{},{},{},{}",
            format_number(pt.x),
            format_number(pt.est1),
            format_number(pt.gap.estimate),
            format_number(pt.gap.std_error),
        );
        for u in &pt.est2 {
            let _ = write!(out, ",{}", format_number(u.value));
        }
        out.push('\n');
    }
    out
}

/// Every named check of every entry.
fn named_checks(e: &VerificationReport) -> Vec<(String, &Check)> {
    let mut out = vec![("bl1".to_string(), &e.bl1), ("bl2".to_string(), &e.bl2)];
    for b in &e.bl3 {
        out.push((format!("bl3_p{}", b.p), &b.check));
    }
    out.push(("mad".to_string(), &e.remark.mad));
    if let Some(c) = &e.remark.p_to_one {
        out.push(("p_to_one".to_string(), c));
    }
    if let Some(app) = &e.appendix {
        out.push((format!("appendix_upper_alpha{}", app.alpha), &app.upper));
        if let Some(l) = &app.lower {
            out.push((format!("appendix_lower_beta{}", l.alpha), &l.check));
        }
        for x in &app.extra_upper {
            out.push((format!("appendix_upper_alpha{}", x.alpha), &x.check));
        }
    }
    out
}

fn margins_plot(report: &ExperimentReport) -> String {
    let mut out = String::from("potential,psi,check,margin,tolerance,pass\n");
    for e in &report.entries {
        for (name, c) in named_checks(e) {
            let _ = writeln!(
                out,
                "\"{}\",\"{}\",{name},{},{},{}",
                e.potential,
                e.psi,
                c.margin.map(format_number).unwrap_or_default(),
                format_number(c.tolerance),
                c.pass
            );
        }
    }
    out
}

fn describe_failures(report: &ExperimentReport) -> Vec<String> {
    let mut out = Vec::new();
    for p in &report.potentials {
        if !p.g_prime_bound.pass {
            out.push(format!(
                "{}: max g' = {} exceeds sqrt(A)",
                p.label, p.g_prime_bound.max_g_prime
            ));
        }
        if p.hazard.as_ref().is_some_and(|h| !h.pass) {
            out.push(format!("{}: hazard inequalities violated", p.label));
        }
        if p.g_nonnegative.as_ref().is_some_and(|g| !g.pass) {
            out.push(format!("{}: G < 0 somewhere", p.label));
        }
        if let Some(e) = &p.embedding {
            for (name, ok) in [("wald", e.wald.pass), ("T <= A", e.t_bound.pass), ("law", e.law.pass)] {
                if !ok {
                    out.push(format!("{}: embedding check `{name}` failed", p.label));
                }
            }
            for s in e.sandwich.iter().filter(|s| !s.pass()) {
                out.push(format!("{}: sandwich fails at x = {}", p.label, s.x));
            }
            for a in e.auxiliary.iter().filter(|a| !a.pass) {
                out.push(format!("{}: auxiliary inequality fails at x = {}", p.label, a.x));
            }
        }
    }
    for e in &report.entries {
        for (name, c) in named_checks(e) {
            if !c.pass {
                out.push(format!(
                    "{} / {}: {name} failed (margin {:?})",
                    e.potential, e.psi, c.margin
                ));
            }
        }
        if e.mc_crosscheck.as_ref().is_some_and(|m| !m.pass) {
            out.push(format!("{} / {}: Monte Carlo cross-check failed", e.potential, e.psi));
        }
    }
    out
}

/// Fails early when the output directory cannot be created or written.
pub fn check_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output_dir {}: {e}", dir.display())))?;
    let probe = dir.join(".bl-verify-probe");
    fs::write(&probe, b"").map_err(|e| CliError::Config(format!("output_dir {} not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

/// Writes every rendered file under `dir`.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<(), CliError> {
    for f in files {
        let path = dir.join(&f.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, &f.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
