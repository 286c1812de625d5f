use std::fs::File;
use std::io::{BufReader, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use depm::discovery::discover_model;
use depm::enhancement::{add_aggregation_with, recompute_for_variant, AggregationRequest, DataEnhancedProcessModel};
use depm::eventlog::{infer_schema, parse_csv, parse_xes, write_xes, ColumnMapping};
use depm::export::{from_json, to_dot, to_json, RankDirection, RenderOptions};
use depm::synthlog::{generate, GeneratorConfig};
use depm::variants::{compare_variants, filter_variant, partition, Bins, Level, VariantKey};
use depm::{AttributeValue, EventLog};
use depm_service::{ApiError, Config, DEFAULT_PAYLOAD_LIMIT};
use serde_json::json;

#[derive(Parser)]
#[command(name = "depm", version, about = "Discover and enhance process models from event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover a directly-follows model and write it as a DEP document without aggregations.
    Discover {
        #[command(flatten)]
        log: LogInput,
        /// Keep activities occurring in at least this fraction of cases.
        #[arg(long, default_value_t = 0.0)]
        activity_threshold: f64,
        /// Keep edges at least this fraction of the strongest edge.
        #[arg(long, default_value_t = 0.0)]
        edge_threshold: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Attach aggregations to a model, computing their values from a log.
    #[command(after_help = AGG_HELP)]
    Enhance {
        #[command(flatten)]
        log: LogInput,
        /// DEP document to start from. Its aggregations are recomputed on
        /// the log. Without it an unfiltered model is discovered.
        #[arg(short, long)]
        model: Option<PathBuf>,
        /// Aggregation spec, repeatable.
        #[arg(long = "agg", value_name = "SPEC")]
        aggregations: Vec<AggregationRequest>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Select one process variant of a log, or list all of them.
    Variant {
        #[command(flatten)]
        log: LogInput,
        /// Attribute whose value defines the variant.
        #[arg(long)]
        by: String,
        #[arg(long, value_enum, default_value_t = LevelArg::Trace)]
        level: LevelArg,
        /// Attribute value selecting the variant. Without it, variant sizes are listed.
        #[arg(long, conflicts_with_all = ["bins", "bin"])]
        value: Option<String>,
        /// Comma-separated ascending bin edges for numeric attributes.
        #[arg(long, value_delimiter = ',', requires = "bin")]
        bins: Vec<f64>,
        /// Index of the selected bin; 0 is everything below the first edge.
        #[arg(long, requires = "bins")]
        bin: Option<usize>,
        /// Write the variant's traces as XES.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Recompute this DEP document's aggregations on the variant.
        #[arg(long, requires = "dep_output")]
        dep: Option<PathBuf>,
        #[arg(long)]
        dep_output: Option<PathBuf>,
    },
    /// Compare the aggregations of two DEP documents.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a DEP document.
    Export {
        dep: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Lay the graph out left to right.
        #[arg(long)]
        left_right: bool,
        /// Show how many values each aggregation saw.
        #[arg(long)]
        show_support: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate the synthetic heart-failure log.
    Generate {
        /// JSON generator configuration; omitted fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        traces: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the ground-truth manifest as JSON.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "DEPM_HOST", default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, env = "DEPM_PORT", default_value_t = 8080)]
        port: u16,
        /// Largest accepted request body in bytes.
        #[arg(long, env = "DEPM_PAYLOAD_LIMIT", default_value_t = DEFAULT_PAYLOAD_LIMIT)]
        payload_limit: usize,
        /// Persist logs and models here and reload them on start.
        #[arg(long, env = "DEPM_SNAPSHOT_DIR")]
        snapshot_dir: Option<PathBuf>,
    },
}

const AGG_HELP: &str = "\
Aggregation specs have the form ACTIVITY:ATTRIBUTE:FUNCTION[:TARGET].
FUNCTION is one of sum, mean, median, min, max, frequency, percentage;
frequency and percentage need a TARGET. Everything after the third colon
is the target, so timestamps can be written as is. Write \\: for a colon
and \\\\ for a backslash inside the activity or attribute.

  depm enhance log.xes --agg 'Analyse Troponin T Value:flag:percentage:abnormal_high'";

/// Where a log comes from. Files ending in `.csv` are read as CSV, anything
/// else as XES.
#[derive(Args)]
struct LogInput {
    log: PathBuf,
    #[arg(long, default_value = "case_id", help_heading = "CSV input")]
    case_column: String,
    #[arg(long, default_value = "activity", help_heading = "CSV input")]
    activity_column: String,
    #[arg(long, default_value = "timestamp", help_heading = "CSV input")]
    timestamp_column: String,
    #[arg(long, default_value_t = ',', help_heading = "CSV input")]
    delimiter: char,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Trace,
    Event,
}

impl From<LevelArg> for Level {
    fn from(level: LevelArg) -> Self {
        match level {
            LevelArg::Trace => Level::Trace,
            LevelArg::Event => Level::Event,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

impl LogInput {
    fn load(&self) -> Result<EventLog> {
        let file = File::open(&self.log).with_context(|| format!("cannot open {}", self.log.display()))?;
        let csv = self.log.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let ingested = if csv {
            if !self.delimiter.is_ascii() {
                bail!("delimiter must be a single ASCII character");
            }
            let mapping = ColumnMapping {
                case_column: self.case_column.clone(),
                activity_column: self.activity_column.clone(),
                timestamp_column: self.timestamp_column.clone(),
                delimiter: self.delimiter as u8,
                source_name: file_stem(&self.log),
                ..ColumnMapping::default()
            };
            parse_csv(file, &mapping)?
        } else {
            parse_xes(BufReader::new(file))?
        };
        for warning in &ingested.warnings {
            eprintln!("warning: {warning}");
        }
        Ok(ingested.log)
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn read_dep(path: &Path) -> Result<DataEnhancedProcessModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(from_json(&text)?)
}

/// Writes to `path`, or stdout when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            Ok(out.flush()?)
        }
    }
}

fn enhance(log: &EventLog, start: DataEnhancedProcessModel, requests: &[AggregationRequest]) -> Result<DataEnhancedProcessModel> {
    let fresh = DataEnhancedProcessModel::new(start.model.clone(), log);
    let mut dep = recompute_for_variant(
        &DataEnhancedProcessModel {
            enhancements: start.enhancements,
            ..fresh
        },
        log,
        None,
    );
    let schema = infer_schema(log);
    for request in requests {
        dep = add_aggregation_with(&dep, log, &schema, request)?;
    }
    Ok(dep)
}

fn variant_key(log: &EventLog, attribute: &str, level: Level, value: Option<String>, bins: Vec<f64>, bin: Option<usize>) -> Result<VariantKey> {
    if let Some(bin) = bin {
        let bins = Bins::new(bins)?;
        if bin > bins.edges.len() {
            bail!("bin {bin} out of range 0..={}", bins.edges.len());
        }
        return Ok(VariantKey::binned(attribute, level, bins, bin));
    }
    let text = value.expect("caller checked");
    let schema = infer_schema(log);
    let value = schema
        .get(attribute)
        .and_then(|info| info.declared_type.parse_value(&text))
        .unwrap_or(AttributeValue::Text(text));
    Ok(VariantKey {
        attribute: attribute.to_owned(),
        level,
        value,
        bins: None,
    })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Discover {
            log,
            activity_threshold,
            edge_threshold,
            output,
        } => {
            let log = log.load()?;
            let model = discover_model(&log, activity_threshold, edge_threshold)?;
            emit(output.as_deref(), to_json(&DataEnhancedProcessModel::new(model, &log)).as_bytes())
        }
        Command::Enhance {
            log,
            model,
            aggregations,
            output,
        } => {
            let log = log.load()?;
            let start = match model {
                Some(path) => read_dep(&path)?,
                None => DataEnhancedProcessModel::new(discover_model(&log, 0.0, 0.0)?, &log),
            };
            let dep = enhance(&log, start, &aggregations)?;
            emit(output.as_deref(), to_json(&dep).as_bytes())
        }
        Command::Variant {
            log,
            by,
            level,
            value,
            bins,
            bin,
            output,
            dep,
            dep_output,
        } => {
            let log = log.load()?;
            if value.is_none() && bin.is_none() {
                let parts = partition(&log, &by, level.into())?;
                let sizes: Vec<_> = parts
                    .sizes()
                    .into_iter()
                    .map(|(key, traces)| json!({"value": key.value, "traces": traces}))
                    .collect();
                let listing = json!({"variants": sizes, "unassigned": parts.unassigned.len()});
                return emit(output.as_deref(), format!("{listing:#}\n").as_bytes());
            }
            let key = variant_key(&log, &by, level.into(), value, bins, bin)?;
            let sublog = filter_variant(&log, &key);
            eprintln!("{key}: {} of {} traces", sublog.len(), log.len());
            if let Some(path) = dep {
                let base = read_dep(&path)?;
                let recomputed = recompute_for_variant(&base, &sublog, Some(key));
                emit(dep_output.as_deref(), to_json(&recomputed).as_bytes())?;
            }
            match output {
                Some(path) => Ok(write_xes(&sublog, File::create(&path)?)?),
                None => Ok(write_xes(&sublog, std::io::stdout().lock())?),
            }
        }
        Command::Compare { a, b, output } => {
            let report = compare_variants(&read_dep(&a)?, &read_dep(&b)?);
            emit(output.as_deref(), format!("{:#}\n", serde_json::to_value(&report)?).as_bytes())
        }
        Command::Export {
            dep,
            format,
            left_right,
            show_support,
            output,
        } => {
            let dep = read_dep(&dep)?;
            let text = match format {
                Format::Json => to_json(&dep),
                Format::Dot => to_dot(
                    &dep,
                    &RenderOptions {
                        rank_direction: if left_right { RankDirection::LeftRight } else { RankDirection::TopBottom },
                        show_support,
                    },
                ),
            };
            emit(output.as_deref(), text.as_bytes())
        }
        Command::Generate {
            config,
            seed,
            traces,
            output,
            manifest,
        } => {
            let mut config: GeneratorConfig = match config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(&path)?)
                    .with_context(|| format!("invalid generator config {}", path.display()))?,
                None => GeneratorConfig::default(),
            };
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(traces) = traces {
                config.trace_count = traces;
            }
            let (log, truth) = generate(&config)?;
            write_xes(&log, File::create(&output)?)?;
            if let Some(path) = manifest {
                std::fs::write(path, serde_json::to_vec_pretty(&truth)?)?;
            }
            Ok(())
        }
        Command::Serve {
            host,
            port,
            payload_limit,
            snapshot_dir,
        } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = Config {
                payload_limit,
                snapshot_dir,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            Ok(runtime.block_on(depm_service::serve(config, SocketAddr::new(host, port)))?)
        }
    }
}

/// Errors go to stderr as one JSON object, using the service's error codes
/// where the failure comes from the library.
fn report(error: anyhow::Error) {
    let message = format!("{error:#}");
    let body = match error.downcast::<depm::Error>() {
        Ok(depm) => serde_json::to_value(ApiError::from(depm).body).unwrap_or_default(),
        Err(_) => json!({"error": "failed", "message": message}),
    };
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            report(error);
            ExitCode::FAILURE
        }
    }
}
