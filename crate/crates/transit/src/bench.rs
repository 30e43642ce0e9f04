//! Engine cross-checking and the benchmark report.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::fillin::{compute_fillin, count_pairs, enumerate_pqueries, FillIn, FillInStats, FillinEngine};
use crate::hyp::{hypraptor_query, hyptbtr_query, HypContext};
use crate::pareto::ParetoSet;
use crate::partition::{build_layout, Layout, PartitionError, PartitionSpec, WeightScheme};
use crate::raptor::{departure_times, otm_rraptor, raptor_query_counted, rraptor};
use crate::synth::stream;
use crate::tbtr::{otm_rtbtr, rtbtr, tbtr_query_counted};
use crate::ted::TeGraph;
use crate::timetable::gtfs::{raw_feed, write_gtfs};
use crate::timetable::{RouteId, StopId, Time, Timetable};
use crate::transfers::{preprocess, TripTransferSet};
use crate::format_time;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Ted,
    Raptor,
    Tbtr,
    Hyptbtr,
    Hypraptor,
    OtmRtbtr,
    OtmRraptor,
}

impl Engine {
    pub const ALL: [Engine; 7] = [
        Engine::Ted,
        Engine::Raptor,
        Engine::Tbtr,
        Engine::Hyptbtr,
        Engine::Hypraptor,
        Engine::OtmRtbtr,
        Engine::OtmRraptor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ted => "ted",
            Engine::Raptor => "raptor",
            Engine::Tbtr => "tbtr",
            Engine::Hyptbtr => "hyptbtr",
            Engine::Hypraptor => "hypraptor",
            Engine::OtmRtbtr => "otm-rtbtr",
            Engine::OtmRraptor => "otm-rraptor",
        }
    }

    pub fn is_partitioned(self) -> bool {
        matches!(self, Engine::Hyptbtr | Engine::Hypraptor)
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine {s:?}"))
    }
}

/// A layout with both fill-in flavors.
#[derive(Clone, Debug)]
pub struct PreparedLayout {
    pub spec: PartitionSpec,
    pub layout: Layout,
    pub trips: FillIn,
    pub trip_stats: FillInStats,
    pub routes: FillIn,
    pub route_stats: FillInStats,
}

pub fn prepare_layout(
    tt: &Timetable,
    transfers: &TripTransferSet,
    spec: PartitionSpec,
    scheme: WeightScheme,
    epsilon: f64,
    seed: u64,
    max_transfers: usize,
) -> Result<PreparedLayout, PartitionError> {
    let layout = build_layout(tt, scheme, spec, epsilon, seed)?;
    let work = enumerate_pqueries(tt, &layout);
    let (trips, trip_stats) = compute_fillin(tt, transfers, &work, FillinEngine::Tbtr, max_transfers);
    let (routes, route_stats) = compute_fillin(tt, transfers, &work, FillinEngine::Raptor, max_transfers);
    Ok(PreparedLayout {
        spec,
        layout,
        trips,
        trip_stats,
        routes,
        route_stats,
    })
}

/// Disagreeing engine results for one query. `routes` is the smallest route
/// subset found that still shows the disagreement.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub source: StopId,
    pub target: StopId,
    pub departure: Time,
    pub max_transfers: usize,
    pub results: Vec<(String, ParetoSet)>,
    pub layout: Option<String>,
    pub routes: Vec<RouteId>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub queries: usize,
    pub failures: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn base_results(tt: &Timetable, transfers: &TripTransferSet, o: StopId, d: StopId, tau: Time, lambda: usize) -> Vec<(String, ParetoSet)> {
    let oracle = TeGraph::build(tt, lambda).pareto(tt, o, d, tau);
    let raptor = raptor_query_counted(tt, o, d, tau, lambda, None).expect("stops checked").0;
    let tbtr = tbtr_query_counted(tt, transfers, o, d, tau, lambda, None).expect("stops checked").0;
    vec![("ted".into(), oracle), ("raptor".into(), raptor), ("tbtr".into(), tbtr)]
}

fn disagree(results: &[(String, ParetoSet)]) -> bool {
    results.iter().any(|(_, r)| *r != results[0].1)
}

/// Drops routes one at a time while the base engines still disagree.
fn shrink(tt: &Timetable, o: StopId, d: StopId, tau: Time, lambda: usize) -> Vec<RouteId> {
    let mut keep: Vec<RouteId> = (0..tt.num_routes()).collect();
    let mut k = 0;
    while k < keep.len() {
        let mut trial = keep.clone();
        trial.remove(k);
        let sub = tt.restrict_routes(&trial);
        let set = preprocess(&sub).0;
        if disagree(&base_results(&sub, &set, o, d, tau, lambda)) {
            keep = trial;
        } else {
            k += 1;
        }
    }
    keep
}

/// Checks oracle, RAPTOR and TBTR against each other and the partitioned
/// engines against the oracle for every layout.
pub fn verify(
    tt: &Timetable,
    transfers: &TripTransferSet,
    layouts: &[PreparedLayout],
    queries: &[(StopId, StopId, Time)],
    max_transfers: usize,
) -> VerifyReport {
    let graph = TeGraph::build(tt, max_transfers);
    let contexts: Vec<_> = layouts
        .iter()
        .map(|l| {
            (
                HypContext::new(tt, &l.layout, &l.trips),
                HypContext::new(tt, &l.layout, &l.routes),
            )
        })
        .collect();
    let failures: Vec<Mismatch> = queries
        .par_iter()
        .flat_map_iter(|&(o, d, tau)| {
            let lambda = max_transfers;
            let mismatch = |results: Vec<(String, ParetoSet)>, layout: Option<String>, routes: Vec<RouteId>| Mismatch {
                source: o,
                target: d,
                departure: tau,
                max_transfers: lambda,
                results,
                layout,
                routes,
            };
            let oracle = graph.pareto(tt, o, d, tau);
            let raptor = raptor_query_counted(tt, o, d, tau, lambda, None).expect("stops checked").0;
            let tbtr = tbtr_query_counted(tt, transfers, o, d, tau, lambda, None).expect("stops checked").0;
            let base = vec![("ted".into(), oracle.clone()), ("raptor".into(), raptor), ("tbtr".into(), tbtr)];
            let mut out = Vec::new();
            if disagree(&base) {
                out.push(mismatch(base, None, shrink(tt, o, d, tau, lambda)));
            }
            for (l, (tctx, rctx)) in layouts.iter().zip(&contexts) {
                let hyptbtr = hyptbtr_query(tt, transfers, tctx, o, d, tau, lambda).expect("layout checked").0;
                let hypraptor = hypraptor_query(tt, rctx, o, d, tau, lambda).expect("layout checked").0;
                if hyptbtr != oracle || hypraptor != oracle {
                    let results = vec![
                        ("ted".into(), oracle.clone()),
                        ("hyptbtr".into(), hyptbtr),
                        ("hypraptor".into(), hypraptor),
                    ];
                    out.push(mismatch(results, Some(l.spec.to_string()), (0..tt.num_routes()).collect()));
                }
            }
            out
        })
        .collect();
    VerifyReport {
        queries: queries.len(),
        failures,
    }
}

/// Writes the route slice as GTFS plus the query and results; for a
/// partitioned failure also the layout and both fill-ins.
pub fn dump_reproducer(tt: &Timetable, layouts: &[PreparedLayout], m: &Mismatch, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_gtfs(&raw_feed(&tt.restrict_routes(&m.routes)), &dir.join("gtfs"))?;
    let query = serde_json::json!({
        "source": tt.stops[m.source].code,
        "target": tt.stops[m.target].code,
        "departure": format_time(m.departure),
        "max_transfers": m.max_transfers,
        "results": m.results,
    });
    fs::write(dir.join("query.json"), serde_json::to_string_pretty(&query)? + "\n")?;
    if let Some(name) = &m.layout {
        if let Some(l) = layouts.iter().find(|l| &l.spec.to_string() == name) {
            fs::write(dir.join("layout.json"), serde_json::to_string_pretty(&l.layout)? + "\n")?;
            crate::fillin::write_fillin(&l.trips, fs::File::create(dir.join("fillin-tbtr.txt"))?)?;
            crate::fillin::write_fillin(&l.routes, fs::File::create(dir.join("fillin-raptor.txt"))?)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub engines: Vec<Engine>,
    pub partitions: Vec<PartitionSpec>,
    pub scheme: WeightScheme,
    pub epsilon: f64,
    pub seed: u64,
    pub max_transfers: usize,
    pub queries: usize,
    pub repetitions: usize,
    /// Destinations per one-to-many query.
    pub destinations: usize,
}

impl BenchConfig {
    pub fn new(engines: Vec<Engine>) -> Self {
        BenchConfig {
            engines,
            partitions: Vec::new(),
            scheme: WeightScheme::Sc3,
            epsilon: 0.2,
            seed: 1,
            max_transfers: 4,
            queries: 100,
            repetitions: 1,
            destinations: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EngineRow {
    pub engine: Engine,
    pub layout: Option<String>,
    pub queries: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub rounds: f64,
    /// Mean segments (trip-based) or routes (round-based) scanned.
    pub scans: f64,
    pub label_updates: f64,
    /// Base engine mean time: plain engine for partitioned rows, repeated
    /// single-destination range queries for one-to-many rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_mean_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_scans: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_gain_pct: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionRow {
    pub layout: String,
    pub scut: usize,
    pub scut_pct: f64,
    pub pqueries: usize,
    pub fillin_trips_pct: f64,
    pub fillin_routes_pct: f64,
    pub fillin_seconds: f64,
}

/// Profile-query counts of a nested layout against the flat layout with the
/// same number of leaf cells.
#[derive(Clone, Debug, Serialize)]
pub struct PqueryRow {
    pub multilevel: String,
    pub standard: String,
    pub multilevel_pqueries: usize,
    pub standard_pqueries: usize,
    pub gain_pct: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub stops: usize,
    pub routes: usize,
    pub trips: usize,
    pub transfers: usize,
    pub seed: u64,
    pub max_transfers: usize,
    pub engines: Vec<EngineRow>,
    pub partitions: Vec<PartitionRow>,
    pub pqueries: Vec<PqueryRow>,
}

/// `(base - variant) / base` in percent; `None` without a base.
pub fn gain_pct(base: f64, variant: f64) -> Option<f64> {
    (base > 0.0).then(|| 100.0 * (base - variant) / base)
}

#[derive(Clone, Copy, Default)]
struct Sample {
    ms: f64,
    rounds: usize,
    scans: usize,
    updates: usize,
    base_ms: f64,
    base_scans: usize,
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let start = Instant::now();
    let mut out = f();
    for _ in 1..reps {
        out = f();
    }
    (start.elapsed().as_secs_f64() * 1000.0 / reps as f64, out)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn summarize(engine: Engine, layout: Option<String>, samples: &[Sample], with_base: bool) -> EngineRow {
    let avg = |f: fn(&Sample) -> f64| mean(samples.iter().map(f));
    let mean_ms = avg(|s| s.ms);
    let scans = avg(|s| s.scans as f64);
    let (base_mean_ms, base_scans) = if with_base {
        (Some(avg(|s| s.base_ms)), Some(avg(|s| s.base_scans as f64)))
    } else {
        (None, None)
    };
    EngineRow {
        engine,
        layout,
        queries: samples.len(),
        mean_ms,
        median_ms: median(samples.iter().map(|s| s.ms).collect()),
        rounds: avg(|s| s.rounds as f64),
        scans,
        label_updates: avg(|s| s.updates as f64),
        base_mean_ms,
        base_scans,
        gain_pct: base_mean_ms.and_then(|b| gain_pct(b, mean_ms)),
        scan_gain_pct: base_scans.and_then(|b| gain_pct(b, scans)),
    }
}

/// Runs every configured engine on the same random queries. Partitioned
/// engines get one row per layout; one-to-many engines use each query's
/// source with `destinations` random targets over all its departures.
pub fn bench(
    tt: &Timetable,
    transfers: &TripTransferSet,
    layouts: &[PreparedLayout],
    queries: &[(StopId, StopId, Time)],
    cfg: &BenchConfig,
) -> BenchReport {
    let lambda = cfg.max_transfers;
    let reps = cfg.repetitions.max(1);
    let has = |e: Engine| cfg.engines.contains(&e);
    let mut rows = Vec::new();
    let mut plain = std::collections::HashMap::new();
    for &engine in &cfg.engines {
        let run_plain = |engine: Engine| -> Vec<Sample> {
            let graph = (engine == Engine::Ted).then(|| TeGraph::build(tt, lambda));
            queries
                .par_iter()
                .map(|&(o, d, tau)| match engine {
                    Engine::Ted => {
                        let g = graph.as_ref().expect("built above");
                        let (ms, _) = timed(reps, || g.pareto(tt, o, d, tau));
                        Sample { ms, ..Sample::default() }
                    }
                    Engine::Raptor => {
                        let (ms, (_, c)) = timed(reps, || raptor_query_counted(tt, o, d, tau, lambda, None).expect("valid stops"));
                        Sample { ms, rounds: c.rounds, scans: c.routes_scanned, updates: c.label_updates, ..Sample::default() }
                    }
                    _ => {
                        let (ms, (_, c)) = timed(reps, || tbtr_query_counted(tt, transfers, o, d, tau, lambda, None).expect("valid stops"));
                        Sample { ms, rounds: c.rounds, scans: c.segments_scanned, updates: c.label_updates, ..Sample::default() }
                    }
                })
                .collect()
        };
        match engine {
            Engine::Ted | Engine::Raptor | Engine::Tbtr => {
                let samples = run_plain(engine);
                rows.push(summarize(engine, None, &samples, false));
                plain.insert(engine, samples);
            }
            Engine::Hyptbtr | Engine::Hypraptor => {
                let base_engine = if engine == Engine::Hyptbtr { Engine::Tbtr } else { Engine::Raptor };
                let base = has(base_engine).then(|| plain.get(&base_engine).cloned().unwrap_or_else(|| run_plain(base_engine)));
                for l in layouts {
                    let fill = if engine == Engine::Hyptbtr { &l.trips } else { &l.routes };
                    let ctx = HypContext::new(tt, &l.layout, fill);
                    let mut samples: Vec<Sample> = queries
                        .par_iter()
                        .map(|&(o, d, tau)| {
                            if engine == Engine::Hyptbtr {
                                let (ms, (_, c)) = timed(reps, || hyptbtr_query(tt, transfers, &ctx, o, d, tau, lambda).expect("valid stops"));
                                Sample { ms, rounds: c.rounds, scans: c.segments_scanned, updates: c.label_updates, ..Sample::default() }
                            } else {
                                let (ms, (_, c)) = timed(reps, || hypraptor_query(tt, &ctx, o, d, tau, lambda).expect("valid stops"));
                                Sample { ms, rounds: c.rounds, scans: c.routes_scanned, updates: c.label_updates, ..Sample::default() }
                            }
                        })
                        .collect();
                    if let Some(base) = &base {
                        for (s, b) in samples.iter_mut().zip(base) {
                            s.base_ms = b.ms;
                            s.base_scans = b.scans;
                        }
                    }
                    rows.push(summarize(engine, Some(l.spec.to_string()), &samples, base.is_some()));
                }
            }
            Engine::OtmRtbtr | Engine::OtmRraptor => {
                let samples: Vec<Sample> = queries
                    .par_iter()
                    .enumerate()
                    .map(|(k, &(o, _, _))| {
                        let mut rng = stream(cfg.seed.wrapping_add(k as u64), "destinations");
                        let mut dlist: Vec<StopId> = (0..tt.num_stops()).filter(|&s| s != o).collect();
                        dlist.shuffle(&mut rng);
                        dlist.truncate(cfg.destinations);
                        let tlist = departure_times(tt, o);
                        if engine == Engine::OtmRtbtr {
                            let (ms, res) = timed(reps, || otm_rtbtr(tt, transfers, o, &dlist, lambda, &tlist).expect("valid stops"));
                            let (base_ms, base_scans) = timed(reps, || {
                                dlist
                                    .iter()
                                    .map(|&d| {
                                        let one = otm_rtbtr(tt, transfers, o, &[d], lambda, &tlist).expect("valid stops");
                                        one.counters.segments_scanned
                                    })
                                    .sum::<usize>()
                            });
                            let c = res.counters;
                            Sample { ms, rounds: c.rounds, scans: c.segments_scanned, updates: c.label_updates, base_ms, base_scans }
                        } else {
                            let (ms, res) = timed(reps, || otm_rraptor(tt, o, &dlist, lambda, &tlist).expect("valid stops"));
                            let (base_ms, base_scans) = timed(reps, || {
                                dlist
                                    .iter()
                                    .map(|&d| {
                                        let one = otm_rraptor(tt, o, &[d], lambda, &tlist).expect("valid stops");
                                        one.counters.routes_scanned
                                    })
                                    .sum::<usize>()
                            });
                            let c = res.counters;
                            Sample { ms, rounds: c.rounds, scans: c.routes_scanned, updates: c.label_updates, base_ms, base_scans }
                        }
                    })
                    .collect();
                rows.push(summarize(engine, None, &samples, true));
            }
        }
    }
    let partitions = layouts
        .iter()
        .map(|l| {
            let (scut, scut_pct) = l.layout.leaf().scut();
            PartitionRow {
                layout: l.spec.to_string(),
                scut,
                scut_pct,
                pqueries: l.trip_stats.pqueries,
                fillin_trips_pct: l.trip_stats.size_pct,
                fillin_routes_pct: l.route_stats.size_pct,
                fillin_seconds: l.trip_stats.seconds,
            }
        })
        .collect();
    let pqueries = layouts
        .iter()
        .filter_map(|l| match l.spec {
            PartitionSpec::Nested(a, b) => {
                let flat = PartitionSpec::Flat(a * b);
                let standard = build_layout(tt, cfg.scheme, flat, cfg.epsilon, cfg.seed).ok()?;
                let standard_pqueries = count_pairs(&enumerate_pqueries(tt, &standard));
                let multilevel_pqueries = l.trip_stats.pqueries;
                Some(PqueryRow {
                    multilevel: l.spec.to_string(),
                    standard: flat.to_string(),
                    multilevel_pqueries,
                    standard_pqueries,
                    gain_pct: gain_pct(standard_pqueries as f64, multilevel_pqueries as f64).unwrap_or(0.0),
                })
            }
            PartitionSpec::Flat(_) => None,
        })
        .collect();
    BenchReport {
        stops: tt.num_stops(),
        routes: tt.num_routes(),
        trips: tt.num_trips(),
        transfers: transfers.len(),
        seed: cfg.seed,
        max_transfers: lambda,
        engines: rows,
        partitions,
        pqueries,
    }
}

fn csv_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields"));
}

fn num(x: f64) -> String {
    format!("{x:.4}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl BenchReport {
    /// Engine table, then partition and profile-query tables when present,
    /// separated by blank lines. Gain columns only appear when some row has
    /// a base to compare with.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let gains = self.engines.iter().any(|r| r.gain_pct.is_some() || r.scan_gain_pct.is_some());
        let mut header = vec!["engine", "layout", "queries", "mean_ms", "median_ms", "rounds", "scans", "label_updates"];
        if gains {
            header.extend(["base_mean_ms", "base_scans", "gain_pct", "scan_gain_pct"]);
        }
        let rows: Vec<Vec<String>> = self
            .engines
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.engine.name().to_string(),
                    r.layout.clone().unwrap_or_default(),
                    r.queries.to_string(),
                    num(r.mean_ms),
                    num(r.median_ms),
                    num(r.rounds),
                    num(r.scans),
                    num(r.label_updates),
                ];
                if gains {
                    row.extend([opt(r.base_mean_ms), opt(r.base_scans), opt(r.gain_pct), opt(r.scan_gain_pct)]);
                }
                row
            })
            .collect();
        csv_table(&mut out, &header, &rows);
        if !self.partitions.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .partitions
                .iter()
                .map(|p| {
                    vec![
                        p.layout.clone(),
                        p.scut.to_string(),
                        num(p.scut_pct),
                        p.pqueries.to_string(),
                        num(p.fillin_trips_pct),
                        num(p.fillin_routes_pct),
                        num(p.fillin_seconds),
                    ]
                })
                .collect();
            csv_table(
                &mut out,
                &["layout", "scut", "scut_pct", "pqueries", "fillin_trips_pct", "fillin_routes_pct", "fillin_seconds"],
                &rows,
            );
        }
        if !self.pqueries.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .pqueries
                .iter()
                .map(|p| {
                    vec![
                        p.multilevel.clone(),
                        p.standard.clone(),
                        p.multilevel_pqueries.to_string(),
                        p.standard_pqueries.to_string(),
                        num(p.gain_pct),
                    ]
                })
                .collect();
            csv_table(
                &mut out,
                &["multilevel", "standard", "multilevel_pqueries", "standard_pqueries", "gain_pct"],
                &rows,
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Human-readable profile: one line per departure with its Pareto set.
pub fn format_profile(profile: &[(Time, ParetoSet)]) -> String {
    let mut out = String::new();
    for (tau, set) in profile {
        let _ = write!(out, "{}", format_time(*tau));
        for (arr, k) in set {
            let _ = write!(out, " ({},{k})", format_time(*arr));
        }
        out.push('\n');
    }
    out
}

/// Range query for one destination with either profile engine.
pub fn profile(
    tt: &Timetable,
    transfers: &TripTransferSet,
    engine: Engine,
    s_o: StopId,
    s_d: StopId,
    max_transfers: usize,
    tlist: &[Time],
) -> Result<Vec<(Time, ParetoSet)>, String> {
    match engine {
        Engine::OtmRtbtr => rtbtr(tt, transfers, s_o, s_d, max_transfers, tlist).map_err(|e| e.to_string()),
        Engine::OtmRraptor => rraptor(tt, s_o, s_d, max_transfers, tlist).map_err(|e| e.to_string()),
        other => Err(format!("{} is not a profile engine", other.name())),
    }
}
