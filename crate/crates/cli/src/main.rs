use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use palmspace::report::{
    compare, convergence_study, read_csv, write_csv, write_json, write_ply, write_run,
    ComparisonRow, ExportFormat, ReferenceTable, DEFAULT_DELTA,
};
use palmspace::{overlap, Analyzer, CaseRun, Digit, HandConfig};

#[derive(Parser, Debug)]
#[command(name = "palmspace", version, about = "Fingertip workspace and thumb opposability analysis")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Options {
    /// Voxel edge length, in hand lengths.
    #[arg(long, global = true, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Joint sampling step in radians; accepts forms like `pi/60` or `0.0524`.
    #[arg(long, global = true, default_value = "pi/60", value_parser = parse_angle)]
    step: f64,
    /// TOML file with hand parameters and optional custom cases.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Output directory; without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<ExportFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one case and report volumes, overlaps and VWRC statistics.
    Case { id: u32 },
    /// Run every built-in case plus any custom cases from --params.
    All,
    /// Volume of selected digits over a grid of voxel sizes and steps.
    Converge {
        /// Comma-separated voxel sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.025])]
        deltas: Vec<f64>,
        /// Comma-separated joint steps.
        #[arg(long, value_delimiter = ',', value_parser = parse_angle, default_values = ["pi/60", "pi/90"])]
        steps: Vec<f64>,
        /// Targets as `case:digit`.
        #[arg(long, value_delimiter = ',', value_parser = parse_target,
              default_values = ["7:thumb", "7:index", "7:little"])]
        digits: Vec<(u32, Digit)>,
    },
    /// Compare computed values against the reference table.
    Compare {
        /// Reference table (TOML); defaults to the bundled one.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Also evaluate entries recorded at other resolutions.
        #[arg(long)]
        all_resolutions: bool,
    },
    /// Write voxel clouds for a case, or overlap two previously exported CSV files.
    Export {
        /// Case to export.
        #[arg(required_unless_present = "overlap_of")]
        id: Option<u32>,
        /// Two CSV voxel lists whose intersection is written instead.
        #[arg(long, num_args = 2, value_names = ["THUMB_CSV", "FINGER_CSV"], conflicts_with = "id")]
        overlap_of: Option<Vec<PathBuf>>,
    },
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi");
    let value = if let Some((num, den)) = t.split_once('/') {
        let num = num.trim();
        let coeff = match num.strip_suffix("pi").map(str::trim) {
            Some("") => std::f64::consts::PI,
            Some(k) => k.parse::<f64>().map_err(|e| e.to_string())? * std::f64::consts::PI,
            None => num.parse::<f64>().map_err(|e| e.to_string())?,
        };
        coeff / den.trim().parse::<f64>().map_err(|e| e.to_string())?
    } else if t == "pi" {
        std::f64::consts::PI
    } else {
        t.parse::<f64>().map_err(|e| e.to_string())?
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(format!("angle must be positive and finite, got {s}"))
    }
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse().map_err(|e: palmspace::Error| e.to_string())
}

fn parse_target(s: &str) -> Result<(u32, Digit), String> {
    let (case, digit) = s
        .split_once(':')
        .ok_or_else(|| format!("expected case:digit, got {s}"))?;
    let case = case.trim().parse().map_err(|e| format!("{e}"))?;
    let digit = digit.trim().parse().map_err(|e: palmspace::Error| e.to_string())?;
    Ok((case, digit))
}

fn load_config(opts: &Options) -> Result<HandConfig<f64>> {
    match &opts.params {
        Some(path) => HandConfig::load(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(HandConfig::default()),
    }
}

fn analyzer(opts: &Options, cfg: &HandConfig<f64>, delta: f64, step: f64) -> Result<Analyzer> {
    Ok(Analyzer::new(cfg.hand.clone(), delta, step, opts.threads)?)
}

fn summary_line(run: &CaseRun) -> String {
    let r = &run.report;
    let mut line = format!("case {} ({} DoF, {:.1?}):", r.case_id, r.total_dof, r.duration);
    for d in &r.digits {
        line.push_str(&format!(" {}={:.6}", d.digit, d.volume));
    }
    for p in &r.pairs {
        line.push_str(&format!(" | {} overlap {:.6} ({:.2}%)", p.finger, p.overlap_volume, p.ratio_own_pct));
    }
    line
}

fn emit_run(opts: &Options, run: &CaseRun) -> Result<()> {
    let format = opts.format.unwrap_or(ExportFormat::Json);
    match &opts.out {
        Some(dir) => {
            for path in write_run(run, dir, format)? {
                log::info!("wrote {}", path.display());
            }
            println!("{}", summary_line(run));
        }
        None if format == ExportFormat::Json => println!("{}", run.report.to_json()?),
        None => bail!("--format {format} needs --out"),
    }
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn print_rows(rows: &[ComparisonRow]) {
    println!(
        "{:<5} {:<7} {:<17} {:>6} {:>9} {:>10} {:>10} {:>8} {:>6}  result",
        "case", "digit", "metric", "delta", "step", "expected", "actual", "error", "tol"
    );
    for r in rows {
        println!(
            "{:<5} {:<7} {:<17} {:>6} {:>9} {:>10.6} {:>10.6} {:>7.2}% {:>5.0}%  {}",
            r.case,
            r.digit.to_string(),
            format!("{:?}", r.metric),
            r.delta,
            format!("pi/{:.0}", std::f64::consts::PI / r.step),
            r.expected,
            r.actual,
            100.0 * r.relative_error,
            100.0 * r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let opts = &cli.opts;
    let cfg = load_config(opts)?;
    match &cli.command {
        Command::Case { id } => {
            let a = analyzer(opts, &cfg, opts.delta, opts.step)?;
            emit_run(opts, &a.run(&cfg.case(*id)?)?)?;
        }
        Command::All => {
            let a = analyzer(opts, &cfg, opts.delta, opts.step)?;
            let mut ids: Vec<u32> = palmspace::cases::CASE_IDS.collect();
            for c in &cfg.cases {
                if !ids.contains(&c.id) {
                    ids.push(c.id);
                }
            }
            let mut reports = Vec::new();
            for id in ids {
                let run = a.run(&cfg.case(id)?)?;
                match (&opts.out, opts.format.unwrap_or(ExportFormat::Json)) {
                    (Some(dir), format) => {
                        write_run(&run, dir, format)?;
                        println!("{}", summary_line(&run));
                    }
                    (None, ExportFormat::Json) => reports.push(run.report),
                    (None, format) => bail!("--format {format} needs --out"),
                }
            }
            if !reports.is_empty() {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            }
        }
        Command::Converge { deltas, steps, digits } => {
            let study = convergence_study(&cfg.hand, digits, deltas, steps, opts.threads)?;
            let text = serde_json::to_string_pretty(&study)?;
            match &opts.out {
                Some(dir) => {
                    let path = write_text(dir, "convergence.json", &(text + "\n"))?;
                    log::info!("wrote {}", path.display());
                }
                None => println!("{text}"),
            }
            for f in &study.flags {
                eprintln!(
                    "case {} {} delta {}: changes {:?}% -> converged at {}",
                    f.case_id,
                    f.digit,
                    f.delta,
                    f.changes_pct.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>(),
                    f.converged_step
                        .map_or("none".to_string(), |s| format!("pi/{:.0}", std::f64::consts::PI / s))
                );
            }
        }
        Command::Compare { reference, all_resolutions } => {
            let table = match reference {
                Some(path) => ReferenceTable::load(path)?,
                None => ReferenceTable::builtin(),
            };
            let mut rows = Vec::new();
            for (delta, step, ids) in table.resolutions() {
                let selected = (delta - opts.delta).abs() < 1e-12 && (step - opts.step).abs() < 1e-12;
                if !selected && !all_resolutions {
                    continue;
                }
                let a = analyzer(opts, &cfg, delta, step)?;
                for id in ids {
                    rows.extend(compare(&a.run(&cfg.case(id)?)?.report, &table)?);
                }
            }
            if rows.is_empty() {
                bail!("no reference entries at delta {} step {}", opts.delta, opts.step);
            }
            print_rows(&rows);
            if let Some(dir) = &opts.out {
                write_text(dir, "comparison.json", &(serde_json::to_string_pretty(&rows)? + "\n"))?;
            }
            let failed = rows.iter().filter(|r| !r.pass).count();
            println!("{} of {} entries within tolerance", rows.len() - failed, rows.len());
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Export { id, overlap_of } => {
            let dir = opts.out.as_deref().unwrap_or(Path::new("."));
            let format = opts.format.unwrap_or(ExportFormat::Csv);
            if let Some(paths) = overlap_of {
                let thumb = read_csv(&paths[0], opts.delta)?;
                let finger = read_csv(&paths[1], opts.delta)?;
                let ov = overlap(&thumb, &finger)?;
                let path = dir.join(format!("overlap.{}", format.extension()));
                match format {
                    ExportFormat::Csv => write_csv(&ov.finger_set(), &path)?,
                    ExportFormat::Ply => write_ply(&ov.finger_set(), &path)?,
                    ExportFormat::Json => bail!("overlaps export as csv or ply"),
                }
                println!("{} overlap voxels, volume {:.6} -> {}", ov.len(), ov.volume, path.display());
            } else if let Some(id) = id {
                let a = analyzer(opts, &cfg, opts.delta, opts.step)?;
                let run = a.run(&cfg.case(*id)?)?;
                let mut written = write_run(&run, dir, format)?;
                if format != ExportFormat::Json {
                    let path = dir.join(format!("case{id}.json"));
                    write_json(&run.report, &path)?;
                    written.push(path);
                }
                for path in written {
                    println!("{}", path.display());
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
