use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scanseg::ingest::{parse_points, write_las, InputFormat};
use scanseg::io::{read_labels, read_truth, write_labels, write_truth};
use scanseg::noise::{estimate_point_spacing, propagated_sigma_dslope};
use scanseg::{
    error_report, estimate_sigma_z, generate_scene, overlay_compare, prepare_scan_lines, run_filter,
    segment_cloud, sensitivity_sweep, write_xyzl, EvaluatedSet, FilterParams, Label, NoiseEstimate,
    PointRecord, SceneSpec, SweepParameter,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] scanseg::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "scanseg", version, about = "Scan-line segmentation ground filter for airborne LiDAR")]
struct Cli {
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Label every point ground, non-ground or unclassified.
    Filter(FilterArgs),
    /// Segmentation and region extraction only.
    Segment(SegmentArgs),
    /// Generate a synthetic scene with truth labels.
    Synth(SynthArgs),
    /// Type I/II errors of a labels file against truth.
    Eval(EvalArgs),
    /// Elevation noise and slope-difference threshold report for a flat patch.
    Noise(NoiseArgs),
    /// Segment and region counts over a range of one threshold.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Default)]
struct ParamArgs {
    /// `key = value` file of filter parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tdslope: Option<f64>,
    #[arg(long)]
    tdx: Option<f64>,
    #[arg(long)]
    tdh: Option<f64>,
    #[arg(long)]
    ttheta: Option<f64>,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long)]
    h2: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    seed_tile: Option<f64>,
    #[arg(long)]
    h_high: Option<f64>,
    #[arg(long)]
    min_seg_points: Option<usize>,
    #[arg(long)]
    min_seg_length: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<FilterParams> {
        let mut p = FilterParams::default();
        if let Some(path) = &self.config {
            p.apply_config(&read_text(path)?)?;
        }
        let floats = [
            (&mut p.t_dslope, self.tdslope),
            (&mut p.t_dx, self.tdx),
            (&mut p.t_dh, self.tdh),
            (&mut p.t_theta_deg, self.ttheta),
            (&mut p.h1, self.h1),
            (&mut p.h2, self.h2),
            (&mut p.cell_size, self.cell_size),
            (&mut p.seed_tile, self.seed_tile),
            (&mut p.h_high, self.h_high),
            (&mut p.min_seg_length, self.min_seg_length),
        ];
        for (slot, value) in floats {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if let Some(v) = self.min_seg_points {
            p.min_seg_points = v;
        }
        if let Some(v) = self.max_iter {
            p.max_iter = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Input points (`.las`, or `x y z scan_line` text).
    #[arg(long = "in")]
    input: PathBuf,
    /// Labeled points, `x y z label` per row.
    #[arg(long)]
    out: PathBuf,
    /// Final DTM as an ESRI ASCII grid.
    #[arg(long)]
    dtm: Option<PathBuf>,
    /// Interpolate empty DTM cells before writing.
    #[arg(long)]
    fill_dtm: bool,
    /// Truth file; prints Type I/II errors when given.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "segmented")]
    evaluated_set: EvaluatedSet,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Points with their region id, `x y z region` per row (-1 outside all regions).
    #[arg(long)]
    out: PathBuf,
    /// Similarity graph edges, `seg_a seg_b d_x dh theta_z` per row.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Scene description (`key = value`).
    #[arg(long, conflicts_with = "town", required_unless_present = "town")]
    spec: Option<PathBuf>,
    /// Use the built-in reference town.
    #[arg(long)]
    town: bool,
    /// Override the scene's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Points; `.las` writes LAS 1.2, anything else text.
    #[arg(long)]
    out: PathBuf,
    /// Truth sidecar, `id label` per row.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write the scene description that was used.
    #[arg(long)]
    dump_spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Labels file written by `filter`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value = "segmented")]
    evaluated_set: EvaluatedSet,
    /// Second labels file to cross-tabulate against the first.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Comma-separated output instead of aligned text.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Flat patch as "x0 y0 x1 y1".
    #[arg(long)]
    patch: String,
    /// Point spacing; estimated from the scan lines when omitted.
    #[arg(long)]
    spacing: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// t_dslope, t_dh or t_theta_deg.
    #[arg(long)]
    param: SweepParameter,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    params: ParamArgs,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File {
            path: path.to_path_buf(),
            source,
        })
}

fn load_points(path: &Path) -> Result<Vec<PointRecord>> {
    let points = parse_points(open(path)?, InputFormat::from_extension(path))?;
    log::info!("read {} points from {}", points.len(), path.display());
    Ok(points)
}

fn load_truth(path: &Path, n: usize) -> Result<Vec<Label>> {
    let truth = read_truth(BufReader::new(open(path)?))?;
    if truth.len() != n {
        return Err(scanseg::Error::LengthMismatch {
            left: n,
            right: truth.len(),
        }
        .into());
    }
    Ok(truth)
}

fn filter(args: FilterArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let points = load_points(&args.input)?;
    let result = run_filter(&points, &params)?;
    write_labels(&points, &result.labels, create(&args.out)?)?;
    if let Some(path) = &args.dtm {
        let grid = if args.fill_dtm { result.dtm.filled() } else { result.dtm.clone() };
        grid.write_esri_ascii(create(path)?)?;
    }

    let s = &result.stats;
    let count = |l: Label| result.labels.iter().filter(|&&x| x == l).count();
    println!("points            {}", s.points);
    println!("scan lines        {} ({} degenerate)", s.lines, s.degenerate_lines);
    println!("back-scan removed {}", s.backscan_removed);
    println!("deleted (dslope)  {}", s.deleted);
    println!("short dropped     {}", s.short_dropped);
    println!("segments          {}", s.segments);
    println!(
        "regions           {} ({} ground, {} non-ground)",
        s.regions, s.ground_regions, s.non_ground_regions
    );
    println!(
        "iterations        {}{}",
        s.iterations,
        if result.converged { "" } else { " (not converged)" }
    );
    println!(
        "labels            {} ground, {} non-ground, {} unclassified",
        count(Label::Ground),
        count(Label::NonGround),
        count(Label::Unclassified)
    );
    if let Some(path) = &args.truth {
        let truth = load_truth(path, points.len())?;
        print!("{}", error_report(&result.labels, &truth, args.evaluated_set)?.to_text());
    }
    Ok(())
}

fn segment(args: SegmentArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let points = load_points(&args.input)?;
    let cloud = segment_cloud(&points, &params)?;
    let regions = cloud.region_of_points(points.len());
    let mut out = create(&args.out)?;
    for (p, r) in points.iter().zip(&regions) {
        let id = r.map_or(-1, |r| r as i64);
        writeln!(out, "{:.4} {:.4} {:.4} {}", p.x, p.y, p.z, id).map_err(scanseg::Error::from)?;
    }
    out.flush().map_err(scanseg::Error::from)?;
    if let Some(path) = &args.edges {
        cloud.graph.write_edges(create(path)?)?;
    }
    println!("points            {}", points.len());
    println!("scan lines        {}", cloud.lines.lines.len());
    println!("back-scan removed {}", cloud.lines.backscan.len());
    println!("deleted (dslope)  {}", cloud.segmentation.deleted.len());
    println!("short dropped     {}", cloud.segmentation.dropped.len());
    println!("segments          {}", cloud.segments().len());
    println!("edges             {}", cloud.graph.edges.len());
    println!("regions           {}", cloud.regions.len());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => read_text(path)?.parse::<SceneSpec>()?,
        None => SceneSpec::standard_town(),
    };
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    let scene = generate_scene(&spec)?;
    if let Some(path) = &args.dump_spec {
        let mut out = create(path)?;
        out.write_all(spec.to_config_string().as_bytes())
            .and_then(|_| out.flush())
            .map_err(scanseg::Error::from)?;
    }
    match InputFormat::from_extension(&args.out) {
        InputFormat::Las => write_las(&scene.points, 0.001, create(&args.out)?)?,
        InputFormat::XyzlText => write_xyzl(&scene.points, create(&args.out)?)?,
    }
    if let Some(path) = &args.truth {
        write_truth(&scene.truth, create(path)?)?;
    }
    let ground = scene.truth.iter().filter(|&&l| l == Label::Ground).count();
    println!("points            {}", scene.len());
    println!("truth ground      {}", ground);
    println!("truth non-ground  {}", scene.len() - ground);
    println!("outliers          {}", scene.outlier.iter().filter(|&&o| o).count());
    println!("back-scan         {}", scene.backscan.iter().filter(|&&b| b).count());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let labels = read_labels(BufReader::new(open(&args.input)?))?;
    let truth = load_truth(&args.truth, labels.len())?;
    let report = error_report(&labels, &truth, args.evaluated_set)?;
    if args.csv {
        println!("{}", scanseg::ErrorReport::CSV_HEADER);
        println!("{}", report.to_csv_row());
    } else {
        print!("{}", report.to_text());
    }
    if let Some(path) = &args.compare {
        let other = read_labels(BufReader::new(open(path)?))?;
        let table = overlay_compare(&labels, &other)?;
        if args.csv {
            print!("{}", table.to_csv());
        } else {
            print!("{}", table.to_text());
        }
    }
    Ok(())
}

fn parse_patch(text: &str) -> Result<[f64; 4]> {
    let v: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--patch: {e}")))?;
    match v[..] {
        [x0, y0, x1, y1] => Ok([x0.min(x1), y0.min(y1), x0.max(x1), y0.max(y1)]),
        _ => Err(CliError::Usage(format!(
            "--patch expects \"x0 y0 x1 y1\", got {} numbers",
            v.len()
        ))),
    }
}

fn noise(args: NoiseArgs) -> Result<()> {
    let [x0, y0, x1, y1] = parse_patch(&args.patch)?;
    let points = load_points(&args.input)?;
    let patch: Vec<PointRecord> = points
        .iter()
        .filter(|p| p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1)
        .cloned()
        .collect();
    let sigma_z = estimate_sigma_z(&patch)?;
    let d = match args.spacing {
        Some(d) => d,
        None => estimate_point_spacing(&prepare_scan_lines(&points).lines)?,
    };
    let est = NoiseEstimate::new(sigma_z, d)?;
    println!("patch points      {}", patch.len());
    println!("sigma_z           {:.4}", est.sigma_z);
    println!("d_points          {:.4}", est.d_points);
    println!("sigma_dslope      {:.4}", est.sigma_dslope);
    println!("suggested tdslope {:.4}", est.suggested_tdslope);
    println!(
        "propagated sigma  {:.4} (three-point error propagation)",
        propagated_sigma_dslope(sigma_z, d, d)?
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let params = args.params.resolve()?;
    let points = load_points(&args.input)?;
    let result = sensitivity_sweep(&points, &params, args.param, &args.values)?;
    if args.csv {
        print!("{}", result.to_csv());
    } else {
        print!("{}", result.to_text());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Filter(a) => filter(a),
        Command::Segment(a) => segment(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Noise(a) => noise(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
