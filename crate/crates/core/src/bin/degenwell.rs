use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use degenwell::acceptance;
use degenwell::asymptotics::{eigenvector_residual, first_ratio_probe, sine_profile, sweep, ProbeThresholds};
use degenwell::potentials::{zoo, AngularFactor, Potential};
use degenwell::radial::{ball_dirichlet_reference, radial_eigensolve_with, RadialGrid};
use degenwell::report::{loglog_svg, write_csv, JsonLines, RunConfig, Series};
use degenwell::spectral1d::{eigensolve, well_widths, GridSpec, Spectrum};
use degenwell::star2d::{star_domain_eigensolve_2d, star_reference_study, AngularCoupling, Grid2d};
use degenwell::tridiag::DEFAULT_SEED;
use degenwell::wellwidth::solve_radial_delta;
use degenwell::{Error, Result};

const JOBS_ENV: &str = "DEGENWELL_JOBS";

/// Low-lying eigenvalues of -h^2 Δ + V for potentials with flat wells.
#[derive(Parser)]
#[command(name = "degenwell", version)]
struct Cli {
    /// Worker threads (default: all cores; DEGENWELL_JOBS overrides).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for the random starts of the iterative eigensolvers.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write JSON lines here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Well widths for each h.
    Delta(DeltaArgs),
    /// Eigenvalues for each h.
    Solve(SolveArgs),
    /// Ratios to the leading-order law along an h sweep, with a remainder fit.
    Sweep(SweepArgs),
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Verify,
    /// Eigenvectors against the limiting sine profiles.
    Profile(ProfileArgs),
    /// Radial potentials in dimension d >= 2.
    Radial(RadialArgs),
    /// Planar potentials V0(|x| theta(x/|x|)).
    Star2d(StarArgs),
    /// Track lambda_1 / h^2 to decide whether it stays bounded.
    ProbeNull(ProbeArgs),
    /// List the builtin potentials.
    Zoo,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Delta(_) => "delta",
            Command::Solve(_) => "solve",
            Command::Sweep(_) => "sweep",
            Command::Verify => "verify",
            Command::Profile(_) => "profile",
            Command::Radial(_) => "radial",
            Command::Star2d(_) => "star2d",
            Command::ProbeNull(_) => "probe-null",
            Command::Zoo => "zoo",
        }
    }
}

#[derive(Args, Serialize)]
struct HArgs {
    /// Comma-separated h values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = false)]
    h: Vec<f64>,
    /// Geometric grid FROM:TO[:PER_DECADE], e.g. 1e-4:1e-15.
    #[arg(long)]
    h_grid: Option<String>,
}

impl HArgs {
    fn values(&self) -> Result<Vec<f64>> {
        let mut hs = self.h.clone();
        if let Some(g) = &self.h_grid {
            hs.extend(parse_h_grid(g)?);
        }
        if hs.is_empty() {
            return Err(Error::InvalidInput("give --h or --h-grid".into()));
        }
        if let Some(h) = hs.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidInput(format!("h = {h} must be positive")));
        }
        Ok(hs)
    }
}

#[derive(Args, Serialize)]
struct GridArgs {
    /// Interior points on the user box.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Rescaled box LEFT,RIGHT; must contain [0, 1].
    #[arg(long = "box", value_delimiter = ',', default_values_t = [-1.0, 2.0], allow_negative_numbers = true)]
    box_: Vec<f64>,
    /// Keep the box as given instead of extending it into the walls.
    #[arg(long)]
    fixed_box: bool,
    /// Skip Richardson extrapolation.
    #[arg(long)]
    no_richardson: bool,
}

impl GridArgs {
    fn spec(&self, vectors: bool, seed: u64) -> Result<GridSpec> {
        if self.box_.len() != 2 {
            return Err(Error::InvalidGrid("--box takes LEFT,RIGHT".into()));
        }
        Ok(GridSpec {
            n_points: self.n,
            box_left: self.box_[0],
            box_right: self.box_[1],
            richardson: !self.no_richardson,
            auto_box: !self.fixed_box,
            vectors,
            seed,
        })
    }
}

#[derive(Args, Serialize)]
struct DeltaArgs {
    /// JSON object {family, params}, a file holding one, or a zoo name.
    #[arg(long)]
    potential: String,
    #[command(flatten)]
    h: HArgs,
    /// Solve the radial equation delta^2 V0(delta) = h^2 instead.
    #[arg(long)]
    radial: bool,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    #[arg(long)]
    potential: String,
    #[command(flatten)]
    h: HArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Include eigenvectors in the output.
    #[arg(long)]
    vectors: bool,
    /// Also write the eigenvalues as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    potential: String,
    #[command(flatten)]
    h: HArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Compute eigenvector residuals against the sine profiles.
    #[arg(long)]
    vectors: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Log-log plot of |ratio - 1| against h.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ProfileArgs {
    #[arg(long)]
    potential: String,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Sampled eigenvectors and sine profiles on the physical grid.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RadialArgs {
    #[arg(long)]
    potential: String,
    #[command(flatten)]
    h: HArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Radial cells.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Outer radius in rescaled units.
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    #[arg(long)]
    fixed_radius: bool,
    #[arg(long)]
    no_richardson: bool,
    /// Highest angular momentum tried.
    #[arg(long, default_value_t = 64)]
    l_max: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Coupling {
    /// V0(|x| theta)
    Argument,
    /// V0(|x|) theta
    Factor,
}

#[derive(Args, Serialize)]
struct StarArgs {
    #[arg(long)]
    potential: String,
    /// JSON array of samples on [0, 2 pi), a file holding one,
    /// `ellipse:A,B[,SAMPLES]` or a constant.
    #[arg(long, default_value = "1")]
    theta: String,
    #[command(flatten)]
    h: HArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Lattice spacing in rescaled units.
    #[arg(long, default_value_t = 0.01)]
    spacing: f64,
    #[arg(long, value_enum, default_value_t = Coupling::Argument)]
    coupling: Coupling,
    /// Box half-widths as a multiple of the domain extents (with --fixed-box).
    #[arg(long, default_value_t = 1.5)]
    box_scale: f64,
    #[arg(long)]
    fixed_box: bool,
    /// Also compute the masked Dirichlet reference of the star domain.
    #[arg(long)]
    reference: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ProbeArgs {
    #[arg(long)]
    potential: String,
    #[command(flatten)]
    h: HArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Divergent when the last ratio reaches this multiple of the first.
    #[arg(long, default_value_t = 10.0)]
    growth: f64,
    /// Bounded when the relative spread stays below this.
    #[arg(long, default_value_t = 0.05)]
    variation: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct Options<'a, T: Serialize> {
    seed: u64,
    #[serde(flatten)]
    args: &'a T,
}

fn parse_h_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("h grid `{s}` is not FROM:TO[:PER_DECADE]"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let from: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let to: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let per: usize = match parts.get(2) {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => 1,
    };
    if !(from > 0.0 && to > 0.0 && per > 0) {
        return Err(bad());
    }
    let (a, b) = (from.log10(), to.log10());
    let steps = ((b - a).abs() * per as f64).round() as usize;
    Ok((0..=steps)
        .map(|i| {
            let e = if steps == 0 { a } else { a + (b - a) * i as f64 / steps as f64 };
            let r = e.round();
            // Exact decades print and parse as themselves.
            if (e - r).abs() < 1e-9 {
                format!("1e{}", r as i32).parse().expect("decade literal")
            } else {
                10f64.powf(e)
            }
        })
        .collect())
}

fn parse_potential(s: &str) -> Result<Potential> {
    let t = s.trim();
    if !t.starts_with('{') && Path::new(t).is_file() {
        return std::fs::read_to_string(t)?.parse();
    }
    t.parse()
}

fn parse_theta(s: &str) -> Result<AngularFactor> {
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("ellipse:") {
        let v: Vec<f64> = rest
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidTheta(format!("`{t}` is not ellipse:A,B[,SAMPLES]")))?;
        return match v.as_slice() {
            [a, b] => AngularFactor::ellipse(*a, *b, 720),
            [a, b, n] if *n >= 1.0 => AngularFactor::ellipse(*a, *b, *n as usize),
            _ => Err(Error::InvalidTheta(format!("`{t}` is not ellipse:A,B[,SAMPLES]"))),
        };
    }
    if t.starts_with('[') {
        return Ok(serde_json::from_str(t)?);
    }
    if let Ok(c) = t.parse::<f64>() {
        return AngularFactor::constant(c);
    }
    if Path::new(t).is_file() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(t)?)?);
    }
    Err(Error::InvalidTheta(format!("cannot read `{t}`")))
}

fn jobs(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(JOBS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::InvalidInput(format!("{JOBS_ENV}={v} is not a positive integer"))),
        };
    }
    match flag {
        Some(0) => Err(Error::InvalidInput("--jobs must be positive".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn spectrum_record(p: &Potential, s: &Spectrum) -> Result<Value> {
    let mut v = serde_json::to_value(s)?;
    v["potential"] = serde_json::to_value(p.spec())?;
    Ok(v)
}

type Sink = JsonLines<Box<dyn Write + Send>>;

fn run_delta(a: &DeltaArgs, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    for h in a.h.values()? {
        if a.radial {
            out.emit("radial_delta", &solve_radial_delta(&p, h)?)?;
        } else {
            out.emit("delta", &well_widths(&p, h)?)?;
        }
    }
    Ok(true)
}

fn run_solve(a: &SolveArgs, seed: u64, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let grid = a.grid.spec(a.vectors, seed)?;
    let mut rows = Vec::new();
    for h in a.h.values()? {
        let s = eigensolve(&p, h, a.k, &grid)?;
        for (i, l) in s.eigenvalues.iter().enumerate() {
            rows.push(vec![h, (i + 1) as f64, *l, s.rescaled_eigenvalues[i], s.error_estimates[i]]);
        }
        out.emit("spectrum", &spectrum_record(&p, &s)?)?;
    }
    if let Some(path) = &a.csv {
        write_csv(path, &["h", "k", "eigenvalue", "rescaled", "error_estimate"], &rows)?;
    }
    Ok(true)
}

fn run_sweep(a: &SweepArgs, seed: u64, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let r = sweep(&p, &a.h.values()?, a.k, &a.grid.spec(a.vectors, seed)?)?;
    let mut rows = Vec::new();
    for rec in &r.records {
        out.emit("sweep_point", rec)?;
        for i in 0..a.k {
            let residual = rec.eigvec_residual.as_ref().map_or(f64::NAN, |v| v[i]);
            rows.push(vec![
                rec.h,
                (i + 1) as f64,
                rec.lambda_numeric[i],
                rec.lambda_predicted[i],
                rec.ratio[i],
                residual,
            ]);
        }
    }
    out.emit(
        "sweep_summary",
        &json!({
            "potential": r.potential,
            "k_max": r.k_max,
            "h_grid": r.h_grid,
            "fitted_remainder": r.fitted_remainder,
            "remainder_trend": r.remainder_trend,
            "converging": r.converging,
        }),
    )?;
    if let Some(path) = &a.csv {
        write_csv(path, &["h", "k", "lambda", "predicted", "ratio", "eigvec_residual"], &rows)?;
    }
    if let Some(path) = &a.svg {
        let series: Vec<Series> = (0..a.k)
            .map(|i| Series {
                label: format!("k = {}", i + 1),
                points: r.records.iter().map(|rec| (rec.h, (rec.ratio[i] - 1.0).abs())).collect(),
            })
            .collect();
        std::fs::write(path, loglog_svg(&p.describe(), "h", "|ratio - 1|", &series))?;
    }
    Ok(true)
}

fn run_profile(a: &ProfileArgs, seed: u64, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let s = eigensolve(&p, a.h, a.k, &a.grid.spec(true, seed)?)?;
    let widths = s.widths().cloned().expect("interval rescaling");
    for k in 1..=a.k {
        out.emit(
            "profile",
            &json!({
                "potential": p.spec(),
                "h": a.h,
                "k": k,
                "eigenvalue": s.eigenvalues[k - 1],
                "rescaled_eigenvalue": s.rescaled_eigenvalues[k - 1],
                "eigvec_residual": eigenvector_residual(&s, k)?,
                "widths": widths,
            }),
        )?;
    }
    if let Some(path) = &a.csv {
        let x = s.abscissae().ok_or(Error::MissingVectors)?;
        let u = s.physical_eigenvectors()?;
        let v: Vec<Vec<f64>> = (1..=a.k).map(|k| sine_profile(&widths, k, &x)).collect();
        let mut header = vec!["x".to_string()];
        header.extend((1..=a.k).map(|k| format!("u{k}")));
        header.extend((1..=a.k).map(|k| format!("v{k}")));
        let rows: Vec<Vec<f64>> = (0..x.len())
            .map(|i| {
                std::iter::once(x[i])
                    .chain(u.iter().map(|c| c[i]))
                    .chain(v.iter().map(|c| c[i]))
                    .collect()
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(path, &header, &rows)?;
    }
    Ok(true)
}

fn run_radial(a: &RadialArgs, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let grid = RadialGrid {
        n_cells: a.n,
        radius: a.radius,
        richardson: !a.no_richardson,
        auto_radius: !a.fixed_radius,
        l_max_cap: a.l_max,
    };
    let ball = ball_dirichlet_reference(a.dim, a.k);
    let mut rows = Vec::new();
    for h in a.h.values()? {
        let s = radial_eigensolve_with(&p, h, a.dim, a.k, &grid)?;
        let ratio: Vec<f64> = s
            .rescaled_eigenvalues
            .iter()
            .zip(&ball.eigenvalues)
            .map(|(q, b)| q / b)
            .collect();
        for (i, l) in s.eigenvalues.iter().enumerate() {
            rows.push(vec![h, (i + 1) as f64, *l, s.rescaled_eigenvalues[i], ratio[i]]);
        }
        let mut rec = spectrum_record(&p, &s)?;
        rec["ball_reference"] = serde_json::to_value(&ball.eigenvalues)?;
        rec["ratio_to_ball"] = serde_json::to_value(&ratio)?;
        out.emit("radial_spectrum", &rec)?;
    }
    if let Some(path) = &a.csv {
        write_csv(path, &["h", "k", "eigenvalue", "rescaled", "ratio_to_ball"], &rows)?;
    }
    Ok(true)
}

fn run_star(a: &StarArgs, seed: u64, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let theta = parse_theta(&a.theta)?;
    let grid = Grid2d {
        spacing: a.spacing,
        auto_box: !a.fixed_box,
        box_scale: a.box_scale,
        seed,
    };
    let coupling = match a.coupling {
        Coupling::Argument => AngularCoupling::Argument,
        Coupling::Factor => AngularCoupling::Factor,
    };
    if a.reference {
        out.emit("star_reference", &star_reference_study(&theta, &grid, a.k)?)?;
    }
    let mut rows = Vec::new();
    for h in a.h.values()? {
        let s = star_domain_eigensolve_2d(&p, &theta, h, a.k, &grid, coupling)?;
        for (i, l) in s.eigenvalues.iter().enumerate() {
            rows.push(vec![h, (i + 1) as f64, *l, s.rescaled_eigenvalues[i], s.rescaled_error_estimates[i]]);
        }
        out.emit("star_spectrum", &spectrum_record(&p, &s)?)?;
    }
    if let Some(path) = &a.csv {
        write_csv(path, &["h", "k", "eigenvalue", "rescaled", "rescaled_error"], &rows)?;
    }
    Ok(true)
}

fn run_probe(a: &ProbeArgs, seed: u64, out: &mut Sink) -> Result<bool> {
    let p = parse_potential(&a.potential)?;
    let thresholds = ProbeThresholds {
        divergent_growth: a.growth,
        bounded_variation: a.variation,
    };
    let r = first_ratio_probe(&p, &a.h.values()?, &a.grid.spec(false, seed)?, thresholds)?;
    if let Some(path) = &a.csv {
        let rows: Vec<Vec<f64>> = r.h_grid.iter().zip(&r.ratios).map(|(h, q)| vec![*h, *q]).collect();
        write_csv(path, &["h", "lambda1_over_h2"], &rows)?;
    }
    out.emit("probe", &r)?;
    Ok(true)
}

fn run_verify(jobs: usize, out: &mut Sink) -> Result<bool> {
    let outcomes = acceptance::run_suite(jobs)?;
    for o in &outcomes {
        eprintln!("{}", o.summary_line());
        out.emit("criterion", o)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    eprintln!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(failed == 0)
}

fn run_zoo(out: &mut Sink) -> Result<bool> {
    for e in zoo() {
        let p = &e.potential;
        out.emit(
            "zoo_entry",
            &json!({
                "name": e.name,
                "potential": p.spec(),
                "description": p.describe(),
                "origin": e.origin,
                "point_well": p.is_point_well(),
                "side_monotone": p.is_side_monotone(),
                "even": p.is_even(),
                "flat": p.is_flat(),
            }),
        )?;
    }
    Ok(true)
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let seed = cli.seed;
    let name = cli.command.name();
    match &cli.command {
        Command::Delta(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Solve(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Sweep(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Profile(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Radial(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Star2d(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::ProbeNull(a) => RunConfig::new(name, &Options { seed, args: a }),
        Command::Verify | Command::Zoo => RunConfig::new(name, &json!({ "seed": seed })),
    }
}

fn dispatch(cli: &Cli, jobs: usize, out: &mut Sink) -> Result<bool> {
    let seed = cli.seed;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Delta(a) => run_delta(a, out),
        Command::Solve(a) => run_solve(a, seed, out),
        Command::Sweep(a) => run_sweep(a, seed, out),
        Command::Verify => run_verify(jobs, out),
        Command::Profile(a) => run_profile(a, seed, out),
        Command::Radial(a) => run_radial(a, out),
        Command::Star2d(a) => run_star(a, seed, out),
        Command::ProbeNull(a) => run_probe(a, seed, out),
        Command::Zoo => run_zoo(out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let sink: Box<dyn Write + Send> = match &cli.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let mut out = JsonLines::new(sink, &cfg);
    let result = jobs(cli.jobs).and_then(|n| dispatch(&cli, n, &mut out));
    let code = match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let record = json!({ "kind": e.kind(), "message": e.to_string() });
            if out.emit("error", &record).is_err() {
                eprintln!("error: could not write the error record");
            }
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    };
    let mut sink = out.into_inner();
    if let Err(e) = sink.flush() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    code
}
