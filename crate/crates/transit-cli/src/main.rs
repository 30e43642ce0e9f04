use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use transit::bench::{self, BenchConfig, Engine, PreparedLayout};
use transit::fillin::{compute_fillin, enumerate_pqueries, read_fillin, write_fillin, FillIn, FillinEngine};
use transit::hyp::{hypraptor_query, hyptbtr_query, HypContext};
use transit::partition::{build_layout, hmetis, Hypergraph, LayoutFile, PartitionError, PartitionSpec, WeightScheme};
use transit::raptor::{departure_times, otm_rraptor, raptor_query_counted};
use transit::synth::{generate, sample_queries, SynthParams};
use transit::tbtr::{otm_rtbtr, tbtr_query_counted};
use transit::ted::oracle_pareto;
use transit::timetable::gtfs::{read_timetable, write_gtfs, BuildOptions};
use transit::timetable::snapshot::{read_snapshot, stats_json, write_snapshot};
use transit::timetable::{StopId, Time, Timetable};
use transit::transfers::{preprocess, read_transfers, write_transfers, TripTransferSet};
use transit::{format_time, parse_time, ParetoSet};

#[derive(Parser)]
#[command(name = "transit", version, about = "Bicriterion public transit journey planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Ted,
    Raptor,
    Tbtr,
    Hyptbtr,
    Hypraptor,
    OtmRtbtr,
    OtmRraptor,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Ted => Engine::Ted,
            EngineArg::Raptor => Engine::Raptor,
            EngineArg::Tbtr => Engine::Tbtr,
            EngineArg::Hyptbtr => Engine::Hyptbtr,
            EngineArg::Hypraptor => Engine::Hypraptor,
            EngineArg::OtmRtbtr => Engine::OtmRtbtr,
            EngineArg::OtmRraptor => Engine::OtmRraptor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Sc1,
    Sc2,
    Sc3,
}

impl From<SchemeArg> for WeightScheme {
    fn from(s: SchemeArg) -> WeightScheme {
        match s {
            SchemeArg::Sc1 => WeightScheme::Sc1,
            SchemeArg::Sc2 => WeightScheme::Sc2,
            SchemeArg::Sc3 => WeightScheme::Sc3,
        }
    }
}

/// Timetable input shared by most commands.
#[derive(Args)]
struct Input {
    /// Snapshot file written by `ingest`, or a GTFS directory.
    timetable: PathBuf,
    /// Service day for GTFS input (YYYY-MM-DD); all services when omitted.
    #[arg(long)]
    date: Option<NaiveDate>,
}

#[derive(Args)]
struct PartitionArgs {
    /// Cell count `P`, or `AxB` for `A` parents split `B` ways.
    #[arg(long, default_value = "2")]
    partitions: PartitionSpec,
    #[arg(long, value_enum, default_value = "sc3")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a GTFS directory into a binary snapshot plus a JSON stats file.
    Ingest {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute the trip-transfer set and write it with a JSON stats file.
    Preprocess {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Partition the route hypergraph and write the layout JSON.
    Partition {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        part: PartitionArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute the fill-in of a layout and write it with a JSON stats file.
    Fillin {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        layout: PathBuf,
        /// Trip-transfer file; computed when omitted.
        #[arg(long)]
        transfers: Option<PathBuf>,
        /// `tbtr` collects trips, `raptor` routes.
        #[arg(long, default_value = "tbtr")]
        engine: FillinEngine,
        #[arg(long, default_value_t = 4)]
        max_transfers: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Bicriterion query for one departure time.
    Query {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "tbtr")]
        engine: EngineArg,
        /// Source stop id.
        #[arg(long)]
        from: String,
        /// Target stop id.
        #[arg(long)]
        to: String,
        /// Departure time, HH:MM[:SS].
        #[arg(long)]
        at: String,
        #[arg(long)]
        transfers: Option<PathBuf>,
        #[arg(long)]
        layout: Option<PathBuf>,
        #[arg(long)]
        fillin: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_transfers: usize,
        #[arg(long, value_enum)]
        out: Option<OutFormat>,
    },
    /// One-to-many range query over every departure of the source in a window.
    Profile {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "otm-rtbtr")]
        engine: EngineArg,
        #[arg(long)]
        from: String,
        /// Target stop ids.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        to: Vec<String>,
        /// File with one target stop id per line.
        #[arg(long)]
        dlist_file: Option<PathBuf>,
        #[arg(long, default_value = "00:00")]
        start: String,
        #[arg(long, default_value = "48:00")]
        end: String,
        #[arg(long)]
        transfers: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_transfers: usize,
        #[arg(long, value_enum)]
        out: Option<OutFormat>,
    },
    /// Cross-check every engine on random queries.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 500)]
        queries: usize,
        /// Layouts for the partitioned engines (repeatable).
        #[arg(long = "partitions", default_values = ["2", "3", "2x2"])]
        partitions: Vec<PartitionSpec>,
        #[arg(long, value_enum, default_value = "sc3")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_transfers: usize,
        /// Directory for reproducers of failing queries.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Time engines on random queries and report per-engine and per-layout
    /// statistics.
    Bench {
        #[command(flatten)]
        input: Input,
        /// Engines to run (repeatable or comma separated).
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["raptor", "tbtr", "hyptbtr", "hypraptor"])]
        engine: Vec<EngineArg>,
        #[arg(long = "partitions", value_delimiter = ',', default_values = ["4"])]
        partitions: Vec<PartitionSpec>,
        #[arg(long, value_enum, default_value = "sc3")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_transfers: usize,
        #[arg(long, default_value_t = 200)]
        queries: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// Destinations per one-to-many query.
        #[arg(long, default_value_t = 10)]
        destinations: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
    /// Write a deterministic synthetic GTFS feed.
    Synth {
        #[arg(long, default_value_t = 200)]
        stops: usize,
        #[arg(long, default_value_t = 40)]
        routes: usize,
        #[arg(long, default_value_t = 50)]
        trips_per_route: usize,
        #[arg(long, default_value_t = 0.05)]
        footpath_density: f64,
        /// Separate grids joined by intercity lines.
        #[arg(long, default_value_t = 1)]
        towns: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the route hypergraph in hMETIS format.
    ExportHmetis {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "sc3")]
        scheme: SchemeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn load(input: &Input) -> Result<Timetable> {
    let path = &input.timetable;
    if path.is_dir() {
        let (tt, report) = read_timetable(path, input.date, &BuildOptions::default())
            .with_context(|| format!("reading GTFS {}", path.display()))?;
        for w in &report.warnings {
            log::warn!("{w}");
        }
        Ok(tt)
    } else {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        read_snapshot(BufReader::new(f)).with_context(|| format!("reading snapshot {}", path.display()))
    }
}

fn load_transfers(tt: &Timetable, path: Option<&Path>) -> Result<TripTransferSet> {
    match path {
        Some(p) => {
            let set = read_transfers(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))?;
            set.validate(tt).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
            Ok(set)
        }
        None => Ok(preprocess(tt).0),
    }
}

fn stop(tt: &Timetable, code: &str) -> Result<StopId> {
    tt.stop_by_code(code)
        .with_context(|| format!("unknown stop id {code:?}"))
}

fn time(s: &str) -> Result<Time> {
    parse_time(s).with_context(|| format!("bad time {s:?}, expected HH:MM[:SS]"))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn read_layout(path: &Path) -> Result<LayoutFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing layout {}", path.display()))
}

fn format_set(set: &ParetoSet) -> String {
    set.iter()
        .map(|(a, k)| format!("({}, {k})", format_time(*a)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn set_json(set: &ParetoSet) -> serde_json::Value {
    set.iter()
        .map(|(a, k)| serde_json::json!({"arrival": format_time(*a), "transfers": k}))
        .collect()
}

/// Layouts for every spec the timetable admits; specs with no balanced
/// partition are skipped with a warning.
fn prepare_all(
    tt: &Timetable,
    transfers: &TripTransferSet,
    specs: &[PartitionSpec],
    scheme: WeightScheme,
    epsilon: f64,
    seed: u64,
    max_transfers: usize,
) -> Result<Vec<PreparedLayout>> {
    let mut out = Vec::new();
    for &spec in specs {
        match bench::prepare_layout(tt, transfers, spec, scheme, epsilon, seed, max_transfers) {
            Ok(l) => out.push(l),
            Err(e @ (PartitionError::Infeasible(_) | PartitionError::TooManyCells { .. })) => {
                log::warn!("skipping layout {spec}: {e}")
            }
            Err(e) => return Err(e).with_context(|| format!("partitioning into {spec}")),
        }
    }
    if out.is_empty() && !specs.is_empty() {
        bail!("none of the requested layouts can be built");
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, output } => {
            let path = &input.timetable;
            if !path.is_dir() {
                bail!("{} is not a GTFS directory", path.display());
            }
            let (tt, report) = read_timetable(path, input.date, &BuildOptions::default())?;
            for w in &report.warnings {
                log::warn!("{w}");
            }
            let mut w = BufWriter::new(File::create(&output)?);
            write_snapshot(&tt, &mut w)?;
            w.flush()?;
            fs::write(sidecar(&output), stats_json(&tt, &report.closure) + "\n")?;
            println!("{}", serde_json::to_string(&tt.stats())?);
        }
        Command::Preprocess { input, output } => {
            let tt = load(&input)?;
            let (set, report) = preprocess(&tt);
            let mut w = BufWriter::new(File::create(&output)?);
            write_transfers(&set, &mut w)?;
            w.flush()?;
            let json = serde_json::to_string_pretty(&report)?;
            fs::write(sidecar(&output), json.clone() + "\n")?;
            println!("{json}");
        }
        Command::Partition { input, part, output } => {
            let tt = load(&input)?;
            let layout = build_layout(&tt, part.scheme.into(), part.partitions, part.epsilon, part.seed)?;
            let file = LayoutFile::new(layout, part.scheme.into(), part.epsilon, part.seed);
            fs::write(&output, serde_json::to_string_pretty(&file)? + "\n")?;
            println!("scut {} ({:.2}%)", file.scut, file.scut_pct);
        }
        Command::Fillin {
            input,
            layout,
            transfers,
            engine,
            max_transfers,
            output,
        } => {
            let tt = load(&input)?;
            let set = load_transfers(&tt, transfers.as_deref())?;
            let layout = read_layout(&layout)?.layout;
            let work = enumerate_pqueries(&tt, &layout);
            let (fill, stats) = compute_fillin(&tt, &set, &work, engine, max_transfers);
            write_fillin(&fill, BufWriter::new(File::create(&output)?))?;
            let json = serde_json::to_string_pretty(&stats)?;
            fs::write(sidecar(&output), json.clone() + "\n")?;
            println!("{json}");
        }
        Command::Query {
            input,
            engine,
            from,
            to,
            at,
            transfers,
            layout,
            fillin,
            max_transfers,
            out,
        } => {
            let tt = load(&input)?;
            let (o, d, tau) = (stop(&tt, &from)?, stop(&tt, &to)?, time(&at)?);
            let engine = Engine::from(engine);
            let needs_set = matches!(engine, Engine::Tbtr | Engine::Hyptbtr);
            let set = if needs_set { load_transfers(&tt, transfers.as_deref())? } else { TripTransferSet::empty(tt.num_trips()) };
            let (result, counters) = match engine {
                Engine::Ted => (oracle_pareto(&tt, o, d, tau, max_transfers), serde_json::Value::Null),
                Engine::Raptor => {
                    let (r, c) = raptor_query_counted(&tt, o, d, tau, max_transfers, None)?;
                    (r, serde_json::to_value(c)?)
                }
                Engine::Tbtr => {
                    let (r, c) = tbtr_query_counted(&tt, &set, o, d, tau, max_transfers, None)?;
                    (r, serde_json::to_value(c)?)
                }
                Engine::Hyptbtr | Engine::Hypraptor => {
                    let (Some(layout), Some(fillin)) = (layout, fillin) else {
                        bail!("{} needs --layout and --fillin", engine.name());
                    };
                    let layout = read_layout(&layout)?.layout;
                    let fill: FillIn = read_fillin(File::open(&fillin)?)?;
                    let ctx = HypContext::new(&tt, &layout, &fill);
                    if engine == Engine::Hyptbtr {
                        let (r, c) = hyptbtr_query(&tt, &set, &ctx, o, d, tau, max_transfers)?;
                        (r, serde_json::to_value(c)?)
                    } else {
                        let (r, c) = hypraptor_query(&tt, &ctx, o, d, tau, max_transfers)?;
                        (r, serde_json::to_value(c)?)
                    }
                }
                Engine::OtmRtbtr | Engine::OtmRraptor => bail!("use `profile` for {}", engine.name()),
            };
            match out {
                Some(OutFormat::Json) => {
                    let v = serde_json::json!({"engine": engine, "pareto": set_json(&result), "counters": counters});
                    println!("{}", serde_json::to_string_pretty(&v)?);
                }
                Some(OutFormat::Csv) => {
                    println!("arrival,transfers");
                    for (a, k) in &result {
                        println!("{},{k}", format_time(*a));
                    }
                }
                None => println!("{}", format_set(&result)),
            }
        }
        Command::Profile {
            input,
            engine,
            from,
            to,
            dlist_file,
            start,
            end,
            transfers,
            max_transfers,
            out,
        } => {
            let tt = load(&input)?;
            let o = stop(&tt, &from)?;
            let mut codes = to;
            if let Some(p) = dlist_file {
                let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                codes.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
            }
            if codes.is_empty() {
                bail!("give targets with --to or --dlist-file");
            }
            let dlist = codes.iter().map(|c| stop(&tt, c)).collect::<Result<Vec<_>>>()?;
            let (lo, hi) = (time(&start)?, time(&end)?);
            let tlist: Vec<Time> = departure_times(&tt, o).into_iter().filter(|t| (lo..=hi).contains(t)).collect();
            let profiles = match Engine::from(engine) {
                Engine::OtmRtbtr => {
                    let set = load_transfers(&tt, transfers.as_deref())?;
                    otm_rtbtr(&tt, &set, o, &dlist, max_transfers, &tlist)?.profiles
                }
                Engine::OtmRraptor => otm_rraptor(&tt, o, &dlist, max_transfers, &tlist)?.profiles,
                other => bail!("{} is not a profile engine", other.name()),
            };
            match out {
                Some(OutFormat::Json) => {
                    let v: serde_json::Map<String, serde_json::Value> = profiles
                        .iter()
                        .map(|(&d, rows)| {
                            let rows: Vec<_> = rows
                                .iter()
                                .map(|(tau, set)| serde_json::json!({"departure": format_time(*tau), "pareto": set_json(set)}))
                                .collect();
                            (tt.stops[d].code.clone(), serde_json::Value::Array(rows))
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&v)?);
                }
                Some(OutFormat::Csv) => {
                    println!("target,departure,arrival,transfers");
                    for (&d, rows) in &profiles {
                        for (tau, set) in rows {
                            for (a, k) in set {
                                println!("{},{},{},{k}", tt.stops[d].code, format_time(*tau), format_time(*a));
                            }
                        }
                    }
                }
                None => {
                    for (&d, rows) in &profiles {
                        println!("# {}", tt.stops[d].code);
                        print!("{}", bench::format_profile(rows));
                    }
                }
            }
        }
        Command::Verify {
            input,
            queries,
            partitions,
            scheme,
            epsilon,
            seed,
            max_transfers,
            dump,
        } => {
            let tt = load(&input)?;
            let set = preprocess(&tt).0;
            let layouts = prepare_all(&tt, &set, &partitions, scheme.into(), epsilon, seed, max_transfers)?;
            let qs = sample_queries(&tt, queries, seed);
            let report = bench::verify(&tt, &set, &layouts, &qs, max_transfers);
            for (k, m) in report.failures.iter().enumerate() {
                eprintln!(
                    "mismatch {} -> {} at {}{}: {:?}",
                    tt.stops[m.source].code,
                    tt.stops[m.target].code,
                    format_time(m.departure),
                    m.layout.as_ref().map(|l| format!(" layout {l}")).unwrap_or_default(),
                    m.results
                );
                if let Some(dir) = &dump {
                    let sub = dir.join(format!("failure-{k}"));
                    bench::dump_reproducer(&tt, &layouts, m, &sub)?;
                    eprintln!("  reproducer in {}", sub.display());
                }
            }
            println!(
                "{} queries, {} layouts, {} mismatches: {}",
                report.queries,
                layouts.len(),
                report.failures.len(),
                if report.passed() { "PASS" } else { "FAIL" }
            );
            if !report.passed() {
                std::process::exit(1);
            }
        }
        Command::Bench {
            input,
            engine,
            partitions,
            scheme,
            epsilon,
            seed,
            max_transfers,
            queries,
            repetitions,
            destinations,
            out,
        } => {
            let tt = load(&input)?;
            let set = preprocess(&tt).0;
            let engines: Vec<Engine> = engine.into_iter().map(Engine::from).collect();
            let partitions = if engines.iter().any(|e| e.is_partitioned()) { partitions } else { Vec::new() };
            let layouts = prepare_all(&tt, &set, &partitions, scheme.into(), epsilon, seed, max_transfers)?;
            let cfg = BenchConfig {
                partitions,
                scheme: scheme.into(),
                epsilon,
                seed,
                max_transfers,
                queries,
                repetitions,
                destinations,
                ..BenchConfig::new(engines)
            };
            let qs = sample_queries(&tt, queries, seed);
            let report = bench::bench(&tt, &set, &layouts, &qs, &cfg);
            match out {
                OutFormat::Csv => print!("{}", report.to_csv()),
                OutFormat::Json => println!("{}", report.to_json()),
            }
        }
        Command::Synth {
            stops,
            routes,
            trips_per_route,
            footpath_density,
            towns,
            seed,
            output,
        } => {
            if stops < 2 * towns.max(1) || routes.div_ceil(2) < towns.max(1) || trips_per_route == 0 {
                bail!("need at least two stops and one line per town and one trip per route");
            }
            let params = SynthParams {
                towns,
                ..SynthParams::new(stops, routes, trips_per_route, footpath_density, seed)
            };
            let raw = generate(&params);
            for w in &raw.warnings {
                log::warn!("{w}");
            }
            write_gtfs(&raw, &output)?;
            println!("wrote {} stops, {} trips to {}", raw.stops.len(), raw.trips.len(), output.display());
        }
        Command::ExportHmetis { input, scheme, output } => {
            let tt = load(&input)?;
            let hg = Hypergraph::build(&tt, scheme.into());
            fs::write(&output, hmetis::export(&hg))?;
            println!("{} hyperedges, {} nodes", hg.num_edges(), hg.num_nodes());
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
