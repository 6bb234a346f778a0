use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use shiftlap::acceptance::{run_criterion, AcceptanceConfig, TITLES};
use shiftlap::bvp::{solve, verify_solution, BoundaryData, BoundaryFile};
use shiftlap::energy::{
    effective_resistance, energy_trace, resistance_at_level, unbounded_pair, LimitFlag,
};
use shiftlap::green::{
    green_function_fast, green_operator_level, pointwise_laplacian_trace, GreenPotential,
};
use shiftlap::measure::{CylinderFunction, FunctionFile};
use shiftlap::numeric::{format_rational, Rational};
use shiftlap::operators::{blocks, build_dense_h, green_matrix, structural_check};
use shiftlap::report::{convergence_csv, rational_json, write_text, CheckList, Report, RunConfig};
use shiftlap::shift::{enumerate_level_capped, rho, RhoValue};
use shiftlap::{Alphabet, ExecMode, Word};

use crate::{Cli, Command, GlobalArgs, OUT_DIR_ENV};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, out-of-range requests.
    Usage(String),
    /// A computed property did not hold; lists the failing properties.
    Assertion(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Assertion(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Assertion(m) => write!(f, "assertion failed: {m}"),
        }
    }
}

impl From<shiftlap::Error> for CliError {
    fn from(e: shiftlap::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

struct Context {
    cfg: RunConfig,
    mode: ExecMode,
    /// Whether `--N` was given explicitly.
    n_flag: Option<usize>,
}

impl Context {
    fn new(g: &GlobalArgs) -> CliResult<Self> {
        let mut cfg = match &g.config {
            Some(p) => {
                RunConfig::load(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            cfg.out_dir = PathBuf::from(dir);
        }
        if let Some(dir) = &g.out_dir {
            cfg.out_dir = dir.clone();
        }
        if let Some(n) = g.n {
            cfg.n = n;
        }
        if let Some(seed) = g.seed {
            cfg.seed = seed;
        }
        if let Some(s) = g.solver {
            cfg.solver = s.into();
        }
        cfg.validate()?;
        Ok(Self {
            cfg,
            mode: if g.sequential {
                ExecMode::Sequential
            } else {
                ExecMode::Parallel
            },
            n_flag: g.n,
        })
    }

    fn alphabet(&self) -> CliResult<Alphabet> {
        Ok(Alphabet::new(self.cfg.n)?)
    }

    fn check_points(&self, a: Alphabet, m: usize) -> CliResult<()> {
        let count = a.pow(m + 1).unwrap_or(u128::MAX);
        if count > self.cfg.point_cap {
            return Err(CliError::Usage(format!(
                "V_{m} has {count} points, above the point cap {}",
                self.cfg.point_cap
            )));
        }
        Ok(())
    }

    fn check_level(&self, m: usize) -> CliResult<()> {
        if m > self.cfg.max_level {
            return Err(CliError::Usage(format!(
                "level {m} exceeds the level cap {}",
                self.cfg.max_level
            )));
        }
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn write(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let p = self.path(name);
        write_text(&p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        Ok(p)
    }

    /// Writes the report next to the other outputs, prints it, and turns
    /// failed checks into an assertion error.
    fn finish(&self, stem: &str, report: Report) -> CliResult<()> {
        let text = report.to_json();
        self.write(&format!("{stem}.json"), &text)?;
        println!("{text}");
        if report.passed {
            Ok(())
        } else {
            let failed: Vec<String> = report
                .checks
                .failures()
                .iter()
                .map(|c| c.property.clone())
                .collect();
            Err(CliError::Assertion(format!(
                "{}: {}",
                report.command,
                failed.join(", ")
            )))
        }
    }

    fn load_function(&self, path: &Path) -> CliResult<CylinderFunction> {
        let file: FunctionFile = read_json(path)?;
        self.check_file_n(path, file.n)?;
        Ok(CylinderFunction::from_file(&file)?)
    }

    fn check_file_n(&self, path: &Path, n: usize) -> CliResult<()> {
        match self.n_flag {
            Some(flag) if flag != n => Err(CliError::Usage(format!(
                "{} is over N={n} but --N {flag} was given",
                path.display()
            ))),
            _ => Ok(()),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn trace_rows_json(rows: &[(usize, Rational)]) -> Value {
    rows.iter()
        .map(|(m, v)| {
            let mut r = rational_json(v);
            r["m"] = (*m).into();
            r
        })
        .collect()
}

/// Repeats `prefix` cyclically to length `len`.
pub fn cyclic_prefix(prefix: &[u8], len: usize) -> Vec<u8> {
    prefix.iter().copied().cycle().take(len).collect()
}

pub fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context::new(&cli.global)?;
    match cli.command {
        Command::VmEnum { m } => vm_enum(&ctx, m),
        Command::Operator { m, blocks } => operator(&ctx, m, blocks),
        Command::Check { m } => check(&ctx, m),
        Command::EnergyTrace { f, mmax } => energy(&ctx, &f, mmax.unwrap_or(ctx.cfg.max_level)),
        Command::Resistance { m, a, b } => resistance(&ctx, m, a, b),
        Command::GreenEval { x, y } => green_eval(&ctx, &x, &y),
        Command::GreenApply { f, level } => green_apply(&ctx, &f, level),
        Command::LaplacianTrace {
            u,
            prefix,
            mmax,
            green,
        } => laplacian_trace(&ctx, &u, &prefix, mmax.unwrap_or(ctx.cfg.max_level), green),
        Command::SolveBvp {
            f,
            zeta,
            sample_depth,
            verify,
        } => solve_bvp(&ctx, &f, &zeta, sample_depth, verify),
        Command::ReportAll { only } => report_all(&ctx, only),
    }
}

fn vm_enum(ctx: &Context, m: usize) -> CliResult<()> {
    let a = ctx.alphabet()?;
    let levels = enumerate_level_capped(a, m, ctx.cfg.point_cap)?;
    let name = format!("vm_N{}_m{m}", a.size());
    ctx.write(&format!("{name}_points.json"), &levels.to_json())?;
    let report = Report::new("vm-enum", json!({ "N": a.size(), "m": m })).with_results(json!({
        "count": levels.len(),
        "new_from": levels.new_range().start,
        "points": levels.points().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    }));
    ctx.finish(&name, report)
}

fn operator(ctx: &Context, m: usize, with_blocks: bool) -> CliResult<()> {
    let a = ctx.alphabet()?;
    ctx.check_points(a, m)?;
    let stem = format!("operator_N{}_m{m}", a.size());
    let h = build_dense_h(a, m, ctx.mode)?;
    let mut files = vec![ctx.write(&format!("{stem}_H.csv"), &h.to_csv())?];
    if with_blocks {
        if m == 0 {
            return Err(CliError::Usage("blocks need m >= 1".into()));
        }
        let b = blocks(a, m, ctx.mode)?;
        let g = green_matrix(a, m)?;
        for (tag, mat) in [("T", &b.t), ("J", &b.j), ("X", &b.x), ("G", &g.matrix)] {
            files.push(ctx.write(&format!("{stem}_{tag}.csv"), &mat.to_csv())?);
        }
    }
    let report = Report::new(
        "operator",
        json!({ "N": a.size(), "m": m, "blocks": with_blocks }),
    )
    .with_results(json!({
        "size": h.rows(),
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }));
    ctx.finish(&stem, report)
}

fn check(ctx: &Context, m: usize) -> CliResult<()> {
    let a = ctx.alphabet()?;
    ctx.check_points(a, m)?;
    let r = structural_check(a, m, ctx.cfg.seed, ctx.mode)?;
    let report = Report::new(
        "check",
        json!({ "N": a.size(), "m": m, "seed": ctx.cfg.seed }),
    )
    .with_results(json!({ "size": r.size, "rank": r.rank }))
    .with_checks(r.checks.clone());
    ctx.finish(&format!("check_N{}_m{m}", a.size()), report)
}

fn energy(ctx: &Context, path: &Path, mmax: usize) -> CliResult<()> {
    let f = ctx.load_function(path)?;
    ctx.check_level(mmax)?;
    ctx.check_points(f.alphabet(), mmax)?;
    let t = energy_trace(&f, mmax, ctx.mode)?;
    let csv = ctx.write("energy_trace.csv", &convergence_csv(&t.entries)?)?;
    let flag = match t.flag {
        Some(LimitFlag::Stabilized) => "stabilized",
        Some(LimitFlag::Growing) => "growing",
        Some(LimitFlag::Undetermined) => "undetermined",
        None => "empty",
    };
    let mut checks = CheckList::new();
    let monotone = t.entries.windows(2).all(|w| w[0].1 <= w[1].1);
    checks.push("level forms are non-decreasing", monotone, "");
    let report = Report::new("energy-trace", json!({ "f": path.display().to_string(), "mmax": mmax }))
        .with_results(json!({ "flag": flag, "csv": csv.display().to_string(), "trace": trace_rows_json(&t.entries) }))
        .with_checks(checks);
    ctx.finish("energy_trace", report)
}

fn resistance(
    ctx: &Context,
    m: Option<usize>,
    a: Option<String>,
    b: Option<String>,
) -> CliResult<()> {
    let alphabet = ctx.alphabet()?;
    let (result, asserted) = match (a, b) {
        (Some(a), Some(b)) => {
            let (pa, pb) = (alphabet.parse_point(&a)?, alphabet.parse_point(&b)?);
            let r = match m {
                Some(m) => resistance_at_level(alphabet, &pa, &pb, m, ctx.cfg.solver, ctx.mode)?,
                None => effective_resistance(alphabet, &pa, &pb, ctx.cfg.solver, ctx.mode)?,
            };
            (r, false)
        }
        (None, None) => {
            let m = m.ok_or_else(|| CliError::Usage("give --m, or both --a and --b".into()))?;
            let (pa, pb) = unbounded_pair(alphabet, m)?;
            (
                resistance_at_level(alphabet, &pa, &pb, m, ctx.cfg.solver, ctx.mode)?,
                m >= 2,
            )
        }
        _ => return Err(CliError::Usage("--a and --b must be given together".into())),
    };
    ctx.check_points(alphabet, result.level)?;
    let summary = result.to_json();
    let mut checks = CheckList::new();
    if asserted {
        let exceeds = summary["exceeds_level_plus_one"].as_bool().unwrap_or(false);
        checks.push(
            "resistance of the unbounded pair exceeds m+1",
            exceeds,
            format!(
                "R = {} vs {}",
                summary["resistance_decimal"],
                result.level + 1
            ),
        );
    }
    let report = Report::new(
        "resistance",
        json!({ "N": alphabet.size(), "m": result.level, "solver": ctx.cfg.solver }),
    )
    .with_results(summary)
    .with_checks(checks);
    ctx.finish(
        &format!("resistance_N{}_m{}", alphabet.size(), result.level),
        report,
    )
}

fn green_eval(ctx: &Context, x: &str, y: &str) -> CliResult<()> {
    let a = ctx.alphabet()?;
    let (px, py) = (a.parse_point(x)?, a.parse_point(y)?);
    let g = green_function_fast(a, &px, &py);
    let rho_text = match rho(&px, &py) {
        RhoValue::Finite(k) => k.to_string(),
        RhoValue::Infinite => "inf".into(),
    };
    let mut value = match g.finite() {
        Some(v) => rational_json(v),
        None => json!({ "exact": "inf" }),
    };
    value["rho"] = rho_text.into();
    let report = Report::new(
        "green-eval",
        json!({ "N": a.size(), "x": px.to_string(), "y": py.to_string() }),
    )
    .with_results(value);
    ctx.finish("green_eval", report)
}

fn green_apply(ctx: &Context, path: &Path, level: usize) -> CliResult<()> {
    let f = ctx.load_function(path)?;
    let a = f.alphabet();
    ctx.check_level(level)?;
    ctx.check_points(a, level)?;
    let levels = enumerate_level_capped(a, level, ctx.cfg.point_cap)?;
    let g = green_operator_level(&f, &levels, ctx.mode);
    let out = ctx.write(
        &format!("green_apply_m{level}_values.json"),
        &serde_json::to_string_pretty(&g.to_file()).expect("level vector serializes"),
    )?;
    let mut checks = CheckList::new();
    let boundary: Vec<String> = g.values()[..a.size()].iter().map(format_rational).collect();
    checks.push(
        "Green potential vanishes on the fixed points",
        boundary.iter().all(|v| v == "0"),
        boundary.join(","),
    );
    let report = Report::new(
        "green-apply",
        json!({ "f": path.display().to_string(), "level": level }),
    )
    .with_results(json!({ "size": g.len(), "file": out.display().to_string() }))
    .with_checks(checks);
    ctx.finish(&format!("green_apply_m{level}"), report)
}

fn laplacian_trace(
    ctx: &Context,
    path: &Path,
    prefix: &str,
    mmax: usize,
    green: bool,
) -> CliResult<()> {
    let f = ctx.load_function(path)?;
    let a = f.alphabet();
    ctx.check_level(mmax)?;
    let word = Word::parse(prefix)?;
    a.check_word(&word)?;
    if word.is_empty() {
        return Err(CliError::Usage("--prefix must be nonempty".into()));
    }
    let x = cyclic_prefix(word.symbols(), mmax);
    let trace = if green {
        pointwise_laplacian_trace(&GreenPotential::new(f.clone()), &x, mmax, ctx.mode)?
    } else {
        pointwise_laplacian_trace(&f, &x, mmax, ctx.mode)?
    };
    let rows = trace.rows();
    let csv = ctx.write("laplacian_trace.csv", &convergence_csv(&rows)?)?;
    let entries: Vec<Value> = trace
        .entries
        .iter()
        .map(|e| {
            let mut r = rational_json(&e.value);
            r["m"] = e.m.into();
            r["point"] = e.point.to_string().into();
            r
        })
        .collect();
    let report = Report::new(
        "laplacian-trace",
        json!({ "u": path.display().to_string(), "prefix": prefix, "mmax": mmax, "green": green }),
    )
    .with_results(json!({ "csv": csv.display().to_string(), "trace": entries }));
    ctx.finish("laplacian_trace", report)
}

fn solve_bvp(
    ctx: &Context,
    f_path: &Path,
    zeta_path: &Path,
    sample_depth: Option<usize>,
    verify: Option<usize>,
) -> CliResult<()> {
    let f = ctx.load_function(f_path)?;
    let zfile: BoundaryFile = read_json(zeta_path)?;
    ctx.check_file_n(zeta_path, zfile.n)?;
    let zeta = BoundaryData::from_file(&zfile)?;
    let sol = solve(&f, &zeta)?;
    let m = sample_depth.unwrap_or(f.depth().max(1));
    ctx.check_level(m)?;
    ctx.check_points(f.alphabet(), m)?;
    let sample = sol.sample(m)?;
    let sample_file = ctx.write(
        "bvp_solution.json",
        &serde_json::to_string_pretty(&sample.to_file()).expect("function serializes"),
    )?;
    let mut results = json!({
        "sample_level": m,
        "sample_file": sample_file.display().to_string(),
        "exact_from": sol.exact_from(),
        "boundary": zeta.values().iter().map(format_rational).collect::<Vec<_>>(),
    });
    let mut checks = CheckList::new();
    if let Some(mmax) = verify {
        ctx.check_level(mmax)?;
        ctx.check_points(f.alphabet(), mmax)?;
        let v = verify_solution(&sol, &zeta, mmax, ctx.mode)?;
        checks.push("boundary values", v.boundary_exact, "");
        for l in &v.levels {
            if l.asserted {
                checks.push(
                    format!("interior identity at m={}", l.m),
                    l.passed,
                    format!("max residual {}", l.residual),
                );
            }
        }
        results["verification"] = serde_json::to_value(&v).expect("report serializes");
        ctx.write(
            "bvp_verification.json",
            &serde_json::to_string_pretty(&v).expect("report serializes"),
        )?;
    }
    let report = Report::new(
        "solve-bvp",
        json!({
            "f": f_path.display().to_string(),
            "zeta": zeta_path.display().to_string(),
            "sample_depth": sample_depth,
            "verify": verify,
        }),
    )
    .with_results(results)
    .with_checks(checks);
    ctx.finish("solve_bvp", report)
}

fn report_all(ctx: &Context, only: Vec<usize>) -> CliResult<()> {
    let ids: Vec<usize> = if only.is_empty() {
        (1..=TITLES.len()).collect()
    } else {
        only
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > TITLES.len()) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let cfg = AcceptanceConfig {
        seed: ctx.cfg.seed,
        mode: ctx.mode,
    };
    let mut checks = CheckList::new();
    let mut outcomes = Vec::new();
    for id in ids {
        let o = run_criterion(id, &cfg)?;
        eprintln!("{}", o.line());
        checks.push(
            format!("criterion {id}: {}", o.title),
            o.passed,
            o.summary.clone(),
        );
        outcomes.push(o);
    }
    let report = Report::new("report-all", json!({ "seed": cfg.seed, "mode": cfg.mode }))
        .with_results(serde_json::to_value(&outcomes).expect("outcomes serialize"))
        .with_checks(checks);
    ctx.finish("report_all", report)
}
