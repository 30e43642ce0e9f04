//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines are printed on success too.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use transit::bench::prepare_layout;
use transit::fillin::{compute_fillin, count_pairs, enumerate_pqueries, write_fillin, FillinEngine};
use transit::hyp::{hypraptor_query, hyptbtr_query, labeling, HypContext};
use transit::partition::exact::{exhaustive_best, partition_exact};
use transit::partition::hmetis::import_hypergraph;
use transit::partition::multilevel::{balance_bounds, partition_multilevel};
use transit::partition::{derive_cells, Layout, LayoutFile, NestedLayout, PartitionSpec, WeightScheme};
use transit::raptor::{departure_times, otm_rraptor, otm_rraptor_with, raptor_query, rraptor, RaptorOptions};
use transit::synth::{sample_queries, stream, synth_timetable, SynthParams};
use transit::tbtr::{otm_rtbtr, otm_rtbtr_with, rtbtr, tbtr_query, tbtr_query_counted, TbtrOptions};
use transit::ted::oracle_pareto;
use transit::timetable::gtfs::{build_timetable, read_timetable, BuildOptions, RawEvent, RawFeed, RawStop, RawTrip};
use transit::timetable::snapshot::write_snapshot;
use transit::transfers::{generate_transfers, preprocess, reduce_transfers, remove_uturns, write_transfers};
use transit::{StopId, Time, Timetable, TripTransferSet};

const LAMBDA: usize = 4;
const TOY_TIME_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(300);
const ORACLE_INSTANCES: u64 = 20;
const ORACLE_QUERIES_PER_INSTANCE: usize = 100;
const OTM_MIN_DLIST: usize = 10;
const OTM_STRICT_SHARE: f64 = 0.9;
const HYP_MIN_QUERIES: usize = 1000;
const HYP_STRICT_SHARE: f64 = 0.5;
const HEURISTIC_CUT_FACTOR: f64 = 1.5;
const EPSILON: f64 = 0.2;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn hm(t: Time) -> String {
    transit::format_time(t)
}

fn toy() -> Timetable {
    read_timetable(&fixture("toy"), None, &BuildOptions::default()).unwrap().0
}

fn toy_route(tt: &Timetable, code: &str) -> usize {
    tt.routes.iter().position(|r| r.code == code).unwrap()
}

/// Route cells r4 -> 1, r2 and r3 -> 2, r1 and r5 -> 3.
fn toy_cells(tt: &Timetable) -> Vec<usize> {
    let mut cells = vec![0; tt.num_routes()];
    for (code, c) in ["r1", "r2", "r3", "r4", "r5"].iter().zip([3, 2, 2, 1, 3]) {
        cells[toy_route(tt, code)] = c;
    }
    cells
}

fn row(profile: &[(Time, Vec<(Time, usize)>)], tau: Time) -> Option<Vec<(Time, usize)>> {
    profile.iter().find(|(t, _)| *t == tau).map(|(_, s)| s.clone())
}

fn toy_ground_truth() -> Outcome {
    let start = Instant::now();
    let tt = toy();
    let o = tt.stop_by_code("s0").unwrap();
    let d = tt.stop_by_code("sd").unwrap();
    let tau = 8 * 3600;
    let want = vec![(9 * 3600, 0), (8 * 3600 + 50 * 60, 2)];
    let set = preprocess(&tt).0;
    let mut got = vec![
        ("ted".to_string(), oracle_pareto(&tt, o, d, tau, LAMBDA)),
        ("raptor".to_string(), raptor_query(&tt, o, d, tau, LAMBDA).unwrap()),
        ("tbtr".to_string(), tbtr_query(&tt, &set, o, d, tau, LAMBDA).unwrap()),
    ];
    let mut layouts = vec![("hyptbtr on given cells".to_string(), Layout::Standard(derive_cells(&tt, &toy_cells(&tt), 3)))];
    // The toy hypergraph admits no balanced split for some cell counts;
    // those are not valid layouts and are skipped.
    for p in 2..=4 {
        if let Ok(l) = prepare_layout(&tt, &set, PartitionSpec::Flat(p), WeightScheme::Sc3, EPSILON, 1, LAMBDA) {
            layouts.push((format!("hyptbtr p={p}"), l.layout));
        }
    }
    ensure(layouts.len() >= 2, || "no partitioned toy layout".into())?;
    for (name, layout) in &layouts {
        let work = enumerate_pqueries(&tt, layout);
        let fill = compute_fillin(&tt, &set, &work, FillinEngine::Tbtr, LAMBDA).0;
        let ctx = HypContext::new(&tt, layout, &fill);
        got.push((name.clone(), hyptbtr_query(&tt, &set, &ctx, o, d, tau, LAMBDA).unwrap().0));
    }
    let tlist = departure_times(&tt, o);
    let profiles = [
        ("rraptor", rraptor(&tt, o, d, LAMBDA, &tlist).unwrap()),
        ("rtbtr", rtbtr(&tt, &set, o, d, LAMBDA, &tlist).unwrap()),
        ("otm-rraptor", otm_rraptor(&tt, o, &[d], LAMBDA, &tlist).unwrap().profiles[&d].clone()),
        ("otm-rtbtr", otm_rtbtr(&tt, &set, o, &[d], LAMBDA, &tlist).unwrap().profiles[&d].clone()),
    ];
    for (name, p) in &profiles {
        got.push((format!("{name} 08:00 row"), row(p, tau).unwrap_or_default()));
    }
    for (name, set) in &got {
        ensure(*set == want, || format!("{name} returned {set:?}"))?;
    }
    let took = start.elapsed();
    ensure(took < TOY_TIME_LIMIT, || format!("took {took:?}"))?;
    Ok(format!(
        "{} results are {{({}, 0), ({}, 2)}} in {took:.2?}",
        got.len(),
        hm(want[0].0),
        hm(want[1].0)
    ))
}

struct Instance {
    tt: Timetable,
    queries: Vec<(StopId, StopId, Time)>,
}

fn oracle_instances() -> Vec<Instance> {
    (0..ORACLE_INSTANCES)
        .map(|seed| {
            let stops = 30 + (seed as usize * 37) % 171;
            let params = SynthParams::new(stops, (stops / 4).max(4), 10, 0.1, seed);
            let tt = synth_timetable(&params).unwrap();
            let queries = sample_queries(&tt, ORACLE_QUERIES_PER_INSTANCE, seed);
            Instance { tt, queries }
        })
        .collect()
}

fn oracle_equivalence(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut n = 0;
    for (i, inst) in instances.iter().enumerate() {
        let set = preprocess(&inst.tt).0;
        for &(o, d, tau) in &inst.queries {
            let want = oracle_pareto(&inst.tt, o, d, tau, LAMBDA);
            let r = raptor_query(&inst.tt, o, d, tau, LAMBDA).unwrap();
            let t = tbtr_query(&inst.tt, &set, o, d, tau, LAMBDA).unwrap();
            ensure(r == want && t == want, || {
                format!("instance {i} query {o}->{d}@{tau}: oracle {want:?} raptor {r:?} tbtr {t:?}")
            })?;
            n += 1;
        }
    }
    let took = start.elapsed();
    ensure(n >= 2000 && instances.len() >= 20, || format!("only {n} queries"))?;
    ensure(took < ORACLE_TIME_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("{n} queries on {} instances agree in {took:.1?}", instances.len()))
}

fn stage_soundness(instances: &[Instance]) -> Outcome {
    let mut n = 0;
    let (mut first, mut last) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        let tt = &inst.tt;
        let generated = generate_transfers(tt);
        let no_uturns = remove_uturns(tt, &generated);
        let reduced = reduce_transfers(tt, &no_uturns);
        let sizes = [generated.len(), no_uturns.len(), reduced.len()];
        ensure(sizes.windows(2).all(|w| w[0] >= w[1]), || format!("instance {i} sizes {sizes:?}"))?;
        first += sizes[0];
        last += sizes[2];
        let stages: [&TripTransferSet; 3] = [&generated, &no_uturns, &reduced];
        for &(o, d, tau) in &inst.queries {
            let want = tbtr_query(tt, stages[0], o, d, tau, LAMBDA).unwrap();
            for (k, s) in stages.iter().enumerate().skip(1) {
                let got = tbtr_query(tt, s, o, d, tau, LAMBDA).unwrap();
                ensure(got == want, || format!("instance {i} stage {k} query {o}->{d}@{tau}"))?;
            }
            n += 1;
        }
    }
    Ok(format!(
        "{n} queries equal on all stages; transfers {first} -> {last} ({:.0}% kept)",
        100.0 * last as f64 / first as f64
    ))
}

fn otm_setup(inst: &Instance, i: usize) -> (StopId, Vec<StopId>, Vec<Time>) {
    let mut rng = stream(i as u64, "acceptance-dlist");
    let tt = &inst.tt;
    let served: Vec<StopId> = (0..tt.num_stops()).filter(|&s| !tt.stop_routes(s).is_empty()).collect();
    let o = served[rng.gen_range(0..served.len())];
    let want = OTM_MIN_DLIST + rng.gen_range(0..=tt.num_stops() / 3);
    let mut dlist: Vec<StopId> = (0..tt.num_stops()).filter(|&s| s != o).collect();
    for k in 0..dlist.len() {
        let j = rng.gen_range(k..dlist.len());
        dlist.swap(k, j);
    }
    dlist.truncate(want);
    dlist.sort_unstable();
    (o, dlist, departure_times(tt, o))
}

fn otm_tbtr(instances: &[Instance]) -> Outcome {
    let (mut strict, mut eligible) = (0, 0);
    let (mut pruned_total, mut repeated_total) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        let tt = &inst.tt;
        let set = preprocess(tt).0;
        let (o, dlist, tlist) = otm_setup(inst, i);
        let pruned = otm_rtbtr(tt, &set, o, &dlist, LAMBDA, &tlist).unwrap();
        let off = TbtrOptions { prune_destinations: false, ..TbtrOptions::new(LAMBDA) };
        let unpruned = otm_rtbtr_with(tt, &set, o, &dlist, &tlist, off).unwrap();
        ensure(pruned.profiles == unpruned.profiles, || format!("instance {i}: pruning changes profiles"))?;
        let mut repeated = 0;
        for &d in &dlist {
            let single = otm_rtbtr(tt, &set, o, &[d], LAMBDA, &tlist).unwrap();
            ensure(single.profiles[&d] == pruned.profiles[&d], || format!("instance {i}: destination {d} differs"))?;
            ensure(rtbtr(tt, &set, o, d, LAMBDA, &tlist).unwrap() == pruned.profiles[&d], || {
                format!("instance {i}: rtbtr differs at {d}")
            })?;
            repeated += single.counters.segments_scanned;
        }
        if dlist.len() >= OTM_MIN_DLIST {
            eligible += 1;
            strict += usize::from(pruned.counters.segments_scanned < repeated);
        }
        pruned_total += pruned.counters.segments_scanned;
        repeated_total += repeated;
    }
    let share = strict as f64 / eligible as f64;
    ensure(eligible > 0 && share >= OTM_STRICT_SHARE, || format!("fewer scans on {strict}/{eligible} instances"))?;
    Ok(format!(
        "profiles equal; fewer segment scans on {strict}/{eligible} instances ({pruned_total} vs {repeated_total})"
    ))
}

fn otm_raptor(instances: &[Instance]) -> Outcome {
    let (mut strict, mut eligible) = (0, 0);
    let (mut pruned_total, mut repeated_total) = (0, 0);
    for (i, inst) in instances.iter().enumerate() {
        let tt = &inst.tt;
        let (o, dlist, tlist) = otm_setup(inst, i);
        let pruned = otm_rraptor(tt, o, &dlist, LAMBDA, &tlist).unwrap();
        let off = RaptorOptions { prune_destinations: false, ..RaptorOptions::new(LAMBDA) };
        let unpruned = otm_rraptor_with(tt, o, &dlist, &tlist, off).unwrap();
        ensure(pruned.profiles == unpruned.profiles, || format!("instance {i}: pruning changes profiles"))?;
        let mut repeated = 0;
        for &d in &dlist {
            let single = otm_rraptor(tt, o, &[d], LAMBDA, &tlist).unwrap();
            ensure(single.profiles[&d] == pruned.profiles[&d], || format!("instance {i}: destination {d} differs"))?;
            ensure(rraptor(tt, o, d, LAMBDA, &tlist).unwrap() == pruned.profiles[&d], || {
                format!("instance {i}: rraptor differs at {d}")
            })?;
            repeated += single.counters.label_updates;
        }
        if dlist.len() >= OTM_MIN_DLIST {
            eligible += 1;
            strict += usize::from(pruned.counters.label_updates < repeated);
        }
        pruned_total += pruned.counters.label_updates;
        repeated_total += repeated;
    }
    let share = strict as f64 / eligible as f64;
    ensure(eligible > 0 && share >= OTM_STRICT_SHARE, || format!("fewer updates on {strict}/{eligible} instances"))?;
    Ok(format!(
        "profiles equal; fewer label updates on {strict}/{eligible} instances ({pruned_total} vs {repeated_total})"
    ))
}

/// Counters of one partitioned-query workload.
#[derive(Default)]
struct HypTally {
    queries: usize,
    worse: usize,
    cross: usize,
    strict_cross: usize,
}

const HYP_SPECS: [PartitionSpec; 5] = [
    PartitionSpec::Flat(1),
    PartitionSpec::Flat(2),
    PartitionSpec::Flat(3),
    PartitionSpec::Flat(4),
    PartitionSpec::Nested(2, 2),
];

/// Runs both partitioned engines against their bases. An inexact answer is
/// an error; work counts are tallied.
fn hyp_workload(tt: &Timetable, specs: &[PartitionSpec], queries: &[(StopId, StopId, Time)], seed: u64) -> Result<HypTally, String> {
    let set = preprocess(tt).0;
    let mut tally = HypTally::default();
    for &spec in specs {
        let prepared = prepare_layout(tt, &set, spec, WeightScheme::Sc3, EPSILON, seed, LAMBDA)
            .map_err(|e| format!("layout {spec}: {e}"))?;
        let tctx = HypContext::new(tt, &prepared.layout, &prepared.trips);
        let rctx = HypContext::new(tt, &prepared.layout, &prepared.routes);
        for &(o, d, tau) in queries {
            let (want, base) = tbtr_query_counted(tt, &set, o, d, tau, LAMBDA, None).unwrap();
            let (got, hc) = hyptbtr_query(tt, &set, &tctx, o, d, tau, LAMBDA).unwrap();
            ensure(got == want, || format!("hyptbtr {spec} query {o}->{d}@{tau}: {got:?} vs {want:?}"))?;
            let rwant = raptor_query(tt, o, d, tau, LAMBDA).unwrap();
            let rgot = hypraptor_query(tt, &rctx, o, d, tau, LAMBDA).unwrap().0;
            ensure(rgot == rwant, || format!("hypraptor {spec} query {o}->{d}@{tau}: {rgot:?} vs {rwant:?}"))?;
            tally.queries += 1;
            tally.worse += usize::from(hc.segments_scanned > base.segments_scanned);
            let labels = labeling(tt, &prepared.layout, o, d).unwrap();
            if labels.source_cell != labels.target_cell || labels.source_cell == 0 {
                tally.cross += 1;
                tally.strict_cross += usize::from(hc.segments_scanned < base.segments_scanned);
            }
        }
    }
    Ok(tally)
}

fn hyp_instances() -> Vec<(u64, Timetable)> {
    (0..4)
        .map(|seed| {
            let params = SynthParams { towns: 4, ..SynthParams::new(120, 60, 30, 0.05, seed) };
            (seed, synth_timetable(&params).unwrap())
        })
        .collect()
}

fn partitioned_exactness(total: &mut HypTally) -> Outcome {
    for (seed, tt) in hyp_instances() {
        let queries = sample_queries(&tt, 60, seed + 1000);
        let t = hyp_workload(&tt, &HYP_SPECS, &queries, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        total.queries += t.queries;
        total.worse += t.worse;
        total.cross += t.cross;
        total.strict_cross += t.strict_cross;
    }
    ensure(total.queries >= HYP_MIN_QUERIES, || format!("only {} queries", total.queries))?;
    Ok(format!(
        "{} queries over p = 1, 2, 3, 4 and 2x2 exact for both engines",
        total.queries
    ))
}

fn work_dominance(total: &HypTally) -> Outcome {
    let desk = synth_timetable(&SynthParams::new(200, 40, 50, 0.05, 1)).unwrap();
    let queries = sample_queries(&desk, 200, 1);
    let desk_specs = [PartitionSpec::Flat(3), PartitionSpec::Flat(6), PartitionSpec::Nested(2, 2), PartitionSpec::Nested(3, 2)];
    let desk_tally = hyp_workload(&desk, &desk_specs, &queries, 1)?;
    let share = total.strict_cross as f64 / total.cross.max(1) as f64;
    let detail = format!(
        "worse on {}/{} queries, fewer scans on {}/{} cross-cell ({:.0}%); single-town desk instance (not gated): worse on {}/{}",
        total.worse,
        total.queries,
        total.strict_cross,
        total.cross,
        100.0 * share,
        desk_tally.worse,
        desk_tally.queries
    );
    ensure(total.worse == 0 && total.cross > 0 && share >= HYP_STRICT_SHARE, || detail.clone())?;
    Ok(detail)
}

/// Three parents of two leaves each. Stops x1..x4 join parents, a, b and c
/// join the two leaves of one parent.
fn nested_shape() -> (Timetable, Vec<usize>) {
    let codes = ["x1", "x2", "x3", "x4", "a", "b", "c"];
    let stops = codes
        .iter()
        .enumerate()
        .map(|(i, c)| RawStop { code: c.to_string(), lat: 52.0 + 0.01 * i as f64, lon: 5.0 })
        .collect();
    let lines: [(&[usize], usize); 6] = [
        (&[0, 4, 3], 1),
        (&[4, 2], 2),
        (&[0, 5, 3], 3),
        (&[5, 1], 4),
        (&[1, 6], 5),
        (&[6, 2], 6),
    ];
    let trips = lines
        .iter()
        .enumerate()
        .map(|(r, (seq, _))| RawTrip {
            code: format!("t{r}"),
            route_code: format!("r{r}"),
            events: seq
                .iter()
                .enumerate()
                .map(|(i, &s)| RawEvent { stop: s, arrival: 3600 + 60 * i as Time, departure: 3600 + 60 * i as Time })
                .collect(),
        })
        .collect();
    let raw = RawFeed { stops, trips, transfers: Some(Vec::new()), warnings: Vec::new() };
    let tt = build_timetable(&raw, &BuildOptions::default()).unwrap().0;
    let mut cells = vec![0; tt.num_routes()];
    for (r, (_, c)) in lines.iter().enumerate() {
        cells[toy_route(&tt, &format!("r{r}"))] = *c;
    }
    (tt, cells)
}

fn fillin_counting() -> Outcome {
    let (tt, cells) = nested_shape();
    let flat = derive_cells(&tt, &cells, 6);
    ensure(flat.cutstops().len() == 7, || format!("{} leaf cutstops", flat.cutstops().len()))?;
    let standard = count_pairs(&enumerate_pqueries(&tt, &Layout::Standard(flat)));
    let nested = NestedLayout::from_route_cells(&tt, &cells, 3, 2);
    let level1 = nested.level1_cutstops().len();
    let multilevel = count_pairs(&enumerate_pqueries(&tt, &Layout::Nested(nested)));
    ensure(standard == 42 && multilevel == 28, || format!("standard {standard}, multilevel {multilevel}"))?;
    Ok(format!("7 leaf cutstops: standard {standard} pairs, multilevel {multilevel} ({level1} level-1 cutstops)"))
}

fn partitioner_optimality() -> Outcome {
    let (mut cases, mut equal) = (0, 0);
    let mut worst: f64 = 1.0;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(fixture("hypergraphs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for path in &entries {
        let hg = import_hypergraph(&std::fs::read_to_string(path).unwrap()).map_err(|e| e.to_string())?;
        if hg.num_nodes() > 12 {
            continue;
        }
        let name = path.file_name().unwrap().to_string_lossy();
        for p in 2..=3 {
            if p > hg.num_nodes() {
                continue;
            }
            let (lo, hi) = balance_bounds(hg.total_node_weight(), p, EPSILON);
            let (lower, upper) = (vec![lo; p], vec![hi; p]);
            let brute = exhaustive_best(&hg, p, &lower, &upper);
            let exact = partition_exact(&hg, p, &lower, &upper).ok();
            let Some(exact) = exact else {
                ensure(brute.is_none(), || format!("{name} p={p}: exact found nothing"))?;
                continue;
            };
            let brute = brute.ok_or_else(|| format!("{name} p={p}: no feasible assignment"))?;
            ensure((exact.objective - brute).abs() < 1e-9, || {
                format!("{name} p={p}: exact {} vs exhaustive {brute}", exact.objective)
            })?;
            let cells = partition_multilevel(&hg, p, EPSILON, 1).map_err(|e| e.to_string())?;
            let cut = hg.cut_weight(&cells);
            ensure(cut <= HEURISTIC_CUT_FACTOR * exact.cut + 1e-9, || {
                format!("{name} p={p}: heuristic cut {cut} vs exact {}", exact.cut)
            })?;
            cases += 1;
            if (cut - exact.cut).abs() < 1e-9 {
                equal += 1;
            } else {
                worst = worst.max(cut / exact.cut);
            }
        }
    }
    ensure(cases > 0 && 2 * equal >= cases, || format!("heuristic optimal on {equal}/{cases}"))?;
    Ok(format!("exact = exhaustive on {cases} cases; heuristic optimal on {equal}, worst ratio {worst:.2}"))
}

fn stop_cell_algebra() -> Outcome {
    let tt = toy();
    let layout = derive_cells(&tt, &toy_cells(&tt), 3);
    let names = |c: usize| {
        let mut v: Vec<&str> = layout.stop_cell(c).iter().map(|&s| tt.stops[s].code.as_str()).collect();
        v.sort_unstable();
        v
    };
    let got: Vec<Vec<&str>> = (0..=3).map(names).collect();
    let want: Vec<Vec<&str>> = vec![vec!["s0", "s2", "s8", "s9"], vec![], vec!["s5", "s6"], vec!["s3", "s7", "sd"]];
    ensure(got == want, || format!("got {got:?}"))?;
    Ok(format!("S0 {:?}, S1 {:?}, S2 {:?}, S3 {:?}", got[0], got[1], got[2], got[3]))
}

fn pipeline_bytes(seed: u64) -> [Vec<u8>; 4] {
    let tt = synth_timetable(&SynthParams { towns: 3, ..SynthParams::new(80, 30, 12, 0.1, seed) }).unwrap();
    let mut snapshot = Vec::new();
    write_snapshot(&tt, &mut snapshot).unwrap();
    let set = preprocess(&tt).0;
    let mut transfers = Vec::new();
    write_transfers(&set, &mut transfers).unwrap();
    let prepared = prepare_layout(&tt, &set, PartitionSpec::Nested(2, 2), WeightScheme::Sc3, EPSILON, seed, LAMBDA).unwrap();
    let layout = serde_json::to_vec_pretty(&LayoutFile::new(prepared.layout, WeightScheme::Sc3, EPSILON, seed)).unwrap();
    let mut fill = Vec::new();
    write_fillin(&prepared.trips, &mut fill).unwrap();
    write_fillin(&prepared.routes, &mut fill).unwrap();
    [snapshot, transfers, layout, fill]
}

fn determinism() -> Outcome {
    let names = ["snapshot", "transfers", "layout", "fill-in"];
    for seed in [3, 11] {
        let a = pipeline_bytes(seed);
        let b = pipeline_bytes(seed);
        for k in 0..4 {
            ensure(a[k] == b[k], || format!("seed {seed}: {} differs", names[k]))?;
        }
    }
    Ok("snapshot, transfers, layout and fill-in identical across runs".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, title: &str, out: Outcome| {
        let (tag, detail) = match out {
            Ok(d) => ("pass", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {n:>2} {tag}: {title}: {detail}");
    };
    report(1, "toy ground truth", toy_ground_truth());
    let instances = oracle_instances();
    report(2, "oracle equivalence", oracle_equivalence(&instances));
    report(3, "transfer stage soundness", stage_soundness(&instances));
    report(4, "one-to-many trip-based", otm_tbtr(&instances));
    report(5, "one-to-many round-based", otm_raptor(&instances));
    let mut tally = HypTally::default();
    let exact = partitioned_exactness(&mut tally);
    let exact_ok = exact.is_ok();
    report(6, "partitioned exactness", exact);
    report(
        7,
        "pruning work dominance",
        if exact_ok { work_dominance(&tally) } else { Err("needs the exactness workload".into()) },
    );
    report(8, "fill-in pair counting", fillin_counting());
    report(9, "partitioner optimality", partitioner_optimality());
    report(10, "stop-cell algebra", stop_cell_algebra());
    report(11, "determinism", determinism());
    if failed == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria fail");
        ExitCode::FAILURE
    }
}
