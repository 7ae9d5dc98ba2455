//! Convergence studies and viscosity sweeps over structured meshes.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use log::{debug, info};

use crate::assembly::assemble_system;
use crate::error::{Error, Result};
use crate::geometry::{classify, InterfaceGeometry};
use crate::mesh::{build_structured_mesh, Mesh, Rectangle};
use crate::norms::{compute_errors, rates, ErrorReport, ExactLoad};
use crate::registry::{build, Example, ExampleKind, MU1_SWEEP};
use crate::solver::{solve, Solution};
use crate::spaces::DofMap;
use crate::vec2::Vec2;
use crate::Real;

pub const CSV_HEADER: &str = "h,e1_u,rate1,e0_u,rate0,e0_p,ratep";
pub const SWEEP_HEADER: &str = "mu1,mu2,e1_u,e0_u,e0_p";
pub const DEFAULT_N_LIST: [usize; 5] = [8, 16, 32, 64, 128];
pub const DEFAULT_SWEEP_N: usize = 64;

/// Everything produced by one discretization level.
pub struct LevelOutcome<T: Real> {
    pub mesh: Mesh<T>,
    pub geometry: InterfaceGeometry<T>,
    pub dofs: DofMap,
    pub solution: Solution<T>,
    pub report: ErrorReport<T>,
}

/// Discretizes `example` on the `n × n` mesh of `[-1, 1]²`, solves, and
/// measures errors.
pub fn solve_level<T: Real>(example: &Example<T>, n: usize) -> Result<LevelOutcome<T>> {
    let start = Instant::now();
    let mesh = build_structured_mesh(Rectangle::symmetric_unit(), n)?;
    let geometry = classify(&mesh, &example.interface)?;
    let dofs = DofMap::new(&mesh, &geometry);
    let t_geo = start.elapsed();
    let system = assemble_system(&mesh, &geometry, &dofs, &example.params, &ExactLoad(example.exact.as_ref()))?;
    let t_asm = start.elapsed();
    let solution = solve(&system)?;
    let t_solve = start.elapsed();
    let report = compute_errors(&mesh, &geometry, &dofs, &solution.field, example.exact.as_ref(), &example.params)?;
    debug!("n={n}: geometry {t_geo:.2?}, assembly {t_asm:.2?}, solve {t_solve:.2?}");
    info!(
        "{} n={n}: {} cut, {} unknowns, residual {:.2e}, {:.2?}",
        example.kind,
        geometry.num_cut(),
        system.size(),
        solution.residual_norm.to_f64_lossy(),
        start.elapsed()
    );
    Ok(LevelOutcome { mesh, geometry, dofs, solution, report })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub example: ExampleKind,
    pub n_list: Vec<usize>,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    /// Outer viscosities of a sweep at fixed `sweep_n`.
    pub sweep_mu1: Option<Vec<f64>>,
    pub sweep_n: usize,
    /// Displacement of the interface center.
    pub center_offset: [f64; 2],
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            example: ExampleKind::Example1,
            n_list: DEFAULT_N_LIST.to_vec(),
            gamma0: crate::assembly::DEFAULT_PENALTY,
            gamma1: crate::assembly::DEFAULT_PENALTY,
            gamma2: crate::assembly::DEFAULT_PENALTY,
            mu1: None,
            mu2: None,
            sweep_mu1: None,
            sweep_n: DEFAULT_SWEEP_N,
            center_offset: [0.0, 0.0],
            out: None,
        }
    }
}

fn parse_list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn parse_one<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value.trim().parse().map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{value}'")))
}

impl StudyConfig {
    /// Sets one option by its command-line name (without dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim().replace('_', "-").as_str() {
            "example" => self.example = value.trim().parse()?,
            "n-list" => self.n_list = parse_list(key, value)?,
            "gamma0" => self.gamma0 = parse_one(key, value)?,
            "gamma1" => self.gamma1 = parse_one(key, value)?,
            "gamma2" => self.gamma2 = parse_one(key, value)?,
            "mu1" => self.mu1 = Some(parse_one(key, value)?),
            "mu2" => self.mu2 = Some(parse_one(key, value)?),
            "sweep-mu1" => {
                self.sweep_mu1 =
                    Some(if value.trim() == "default" { MU1_SWEEP.to_vec() } else { parse_list(key, value)? })
            }
            "sweep-n" => self.sweep_n = parse_one(key, value)?,
            "center-offset" => {
                let v: Vec<f64> = parse_list(key, value)?;
                let [x, y] = v[..] else {
                    return Err(Error::InvalidInput(format!("{key}: expected two values, got '{value}'")));
                };
                self.center_offset = [x, y];
            }
            "out" => self.out = Some(PathBuf::from(value.trim())),
            other => return Err(Error::InvalidInput(format!("unknown option '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidInput(format!("config line {}: expected key=value, got '{line}'", i + 1)));
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::InvalidInput("n-list needs positive subdivisions".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneMeshSizes(format!("n-list {:?} is not strictly increasing", self.n_list)));
        }
        for (name, g) in [("gamma0", self.gamma0), ("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {g}")));
            }
        }
        let mus = self.mu1.iter().chain(&self.mu2).chain(self.sweep_mu1.iter().flatten());
        for &mu in mus {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::InvalidInput(format!("viscosities must be positive, got {mu}")));
            }
        }
        if self.sweep_n == 0 {
            return Err(Error::InvalidInput("sweep-n must be positive".into()));
        }
        Ok(())
    }

    /// The configured example with overrides and penalties applied.
    pub fn example(&self, mu1: Option<f64>) -> Example<f64> {
        let mut ex = build(self.example, mu1.or(self.mu1), self.mu2);
        ex.params = ex.params.with_penalties(self.gamma0, self.gamma1, self.gamma2);
        let [dx, dy] = self.center_offset;
        ex.with_center(Vec2::new(dx, dy))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub report: ErrorReport<f64>,
    /// Rates of `e1_u`, `e0_u`, `e0_p` against the previous level.
    pub rates: [Option<f64>; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub mu: [f64; 2],
    pub report: ErrorReport<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StudyOutput {
    Convergence(Vec<StudyRow>),
    Sweep(Vec<SweepRow>),
}

fn rate_cell(r: Option<f64>) -> String {
    r.map_or(String::new(), |r| format!("{r:.4}"))
}

impl StudyOutput {
    pub fn csv(&self) -> String {
        let mut s = String::new();
        match self {
            StudyOutput::Convergence(rows) => {
                writeln!(s, "{CSV_HEADER}").unwrap();
                for r in rows {
                    let e = &r.report;
                    writeln!(
                        s,
                        "{},{:.6e},{},{:.6e},{},{:.6e},{}",
                        e.h,
                        e.e1_u,
                        rate_cell(r.rates[0]),
                        e.e0_u,
                        rate_cell(r.rates[1]),
                        e.e0_p,
                        rate_cell(r.rates[2])
                    )
                    .unwrap();
                }
            }
            StudyOutput::Sweep(rows) => {
                writeln!(s, "{SWEEP_HEADER}").unwrap();
                for r in rows {
                    let e = &r.report;
                    writeln!(s, "{},{},{:.6e},{:.6e},{:.6e}", r.mu[0], r.mu[1], e.e1_u, e.e0_u, e.e0_p).unwrap();
                }
            }
        }
        s
    }

    /// Fixed-width table for reading on a terminal.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let rate = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.4}"));
        match self {
            StudyOutput::Convergence(rows) => {
                writeln!(
                    s,
                    "{:>7} {:>10} {:>7} {:>10} {:>7} {:>10} {:>7}",
                    "h", "e1_u", "rate", "e0_u", "rate", "e0_p", "rate"
                )
                .unwrap();
                for r in rows {
                    let e = &r.report;
                    let h = if (e.h.recip() - e.h.recip().round()).abs() < 1e-9 {
                        format!("1/{}", e.h.recip().round())
                    } else {
                        format!("{:.4}", e.h)
                    };
                    writeln!(
                        s,
                        "{:>7} {:>10.4} {:>7} {:>10.4} {:>7} {:>10.4} {:>7}",
                        h,
                        e.e1_u,
                        rate(r.rates[0]),
                        e.e0_u,
                        rate(r.rates[1]),
                        e.e0_p,
                        rate(r.rates[2])
                    )
                    .unwrap();
                }
            }
            StudyOutput::Sweep(rows) => {
                writeln!(s, "{:>10} {:>6} {:>10} {:>10} {:>10}", "mu1", "mu2", "e1_u", "e0_u", "e0_p").unwrap();
                for r in rows {
                    let e = &r.report;
                    writeln!(s, "{:>10} {:>6} {:>10.4} {:>10.4} {:>10.4}", r.mu[0], r.mu[1], e.e1_u, e.e0_u, e.e0_p)
                        .unwrap();
                }
            }
        }
        s
    }
}

/// Runs the configured convergence study or viscosity sweep.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutput> {
    config.validate()?;
    if let Some(mus) = &config.sweep_mu1 {
        let mut rows = Vec::with_capacity(mus.len());
        for &mu1 in mus {
            let ex = config.example(Some(mu1));
            let level = solve_level(&ex, config.sweep_n)?;
            rows.push(SweepRow { mu: ex.params.mu, report: level.report });
        }
        return Ok(StudyOutput::Sweep(rows));
    }
    let ex = config.example(None);
    let mut reports = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        reports.push(solve_level(&ex, n)?.report);
    }
    let hs: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let column = |f: fn(&ErrorReport<f64>) -> f64| -> Result<Vec<Option<f64>>> {
        rates(&hs, &reports.iter().map(f).collect::<Vec<_>>())
    };
    let (r1, r0, rp) = (column(|r| r.e1_u)?, column(|r| r.e0_u)?, column(|r| r.e0_p)?);
    Ok(StudyOutput::Convergence(
        config
            .n_list
            .iter()
            .enumerate()
            .map(|(i, &n)| StudyRow { n, report: reports[i], rates: [r1[i], r0[i], rp[i]] })
            .collect(),
    ))
}

/// Process exit code for an error: 1 for violated interface assumptions,
/// 2 for solver failures, 3 for invalid input or I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::AssumptionViolation(_) | Error::GeometryDegenerate(_) => 1,
        Error::SingularSystem(_) => 2,
        _ => 3,
    }
}
