use proptest::prelude::*;

use transit::fillin::{compute_fillin, count_pairs, enumerate_pqueries, enumerate_pqueries_standard, FillinEngine};
use transit::pareto::is_pareto;
use transit::partition::multilevel::{balance_bounds, partition_multilevel};
use transit::partition::{nested_partition, Hypergraph, Layout, WeightScheme};
use transit::raptor::{departure_times, otm_rraptor, otm_rraptor_with, raptor_query, raptor_query_counted, RaptorOptions, RaptorSearch};
use transit::synth::{sample_queries, synth_timetable, SynthParams};
use transit::tbtr::{otm_rtbtr, otm_rtbtr_with, tbtr_query, tbtr_query_counted, TbtrOptions};
use transit::ted::oracle_pareto;
use transit::transfers::{generate_transfers, preprocess, reduce_transfers, remove_uturns, write_transfers};
use transit::Timetable;

fn instance() -> impl Strategy<Value = (Timetable, u64)> {
    (20usize..70, 1usize..4, 0u64..1000).prop_map(|(stops, towns, seed)| {
        let params = SynthParams { towns, ..SynthParams::new(stops, (stops / 3).max(2 * towns), 8, 0.15, seed) };
        (synth_timetable(&params).unwrap(), seed)
    })
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn query_outputs_are_pareto_and_monotone((tt, seed) in instance()) {
        let set = preprocess(&tt).0;
        for (o, d, tau) in sample_queries(&tt, 15, seed) {
            let full = raptor_query(&tt, o, d, tau, 4).unwrap();
            prop_assert!(is_pareto(&full));
            prop_assert_eq!(&tbtr_query(&tt, &set, o, d, tau, 4).unwrap(), &full);
            // Fewer allowed transfers is the prefix of the full set.
            for lambda in 0..4 {
                let part = raptor_query(&tt, o, d, tau, lambda).unwrap();
                let prefix: Vec<_> = full.iter().copied().filter(|&(_, n)| n <= lambda).collect();
                prop_assert_eq!(part, prefix);
            }
            // A later departure never arrives earlier with the same transfer budget.
            let later = raptor_query(&tt, o, d, tau + 600, 4).unwrap();
            for &(a, n) in &later {
                let best = full.iter().filter(|&&(_, m)| m <= n).map(|&(b, _)| b).min();
                prop_assert!(best.is_none_or(|b| a >= b));
            }
        }
    }

    #[test]
    fn round_labels_never_increase((tt, seed) in instance()) {
        let mut search = RaptorSearch::new(&tt, RaptorOptions::new(4));
        for (o, d, tau) in sample_queries(&tt, 10, seed) {
            search.run(o, tau, &[d]);
            let labels = search.transfer_labels(d);
            prop_assert!(labels.windows(2).all(|w| w[0] >= w[1]), "{:?}", labels);
        }
    }

    #[test]
    fn transfer_stages_preserve_answers((tt, seed) in instance()) {
        let generated = generate_transfers(&tt);
        let no_uturns = remove_uturns(&tt, &generated);
        let reduced = reduce_transfers(&tt, &no_uturns);
        prop_assert!(generated.len() >= no_uturns.len() && no_uturns.len() >= reduced.len());
        for (o, d, tau) in sample_queries(&tt, 15, seed) {
            let want = oracle_pareto(&tt, o, d, tau, 4);
            prop_assert_eq!(&tbtr_query(&tt, &generated, o, d, tau, 4).unwrap(), &want);
            prop_assert_eq!(&tbtr_query(&tt, &reduced, o, d, tau, 4).unwrap(), &want);
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_transfers(&reduced, &mut a).unwrap();
        write_transfers(&preprocess(&tt).0, &mut b).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn destination_pruning_is_exact_and_saves_work((tt, seed) in instance()) {
        let set = preprocess(&tt).0;
        let o = seed as usize % tt.num_stops();
        let dlist: Vec<usize> = (0..tt.num_stops()).filter(|&s| s != o && s % 3 == seed as usize % 3).collect();
        let tlist = departure_times(&tt, o);
        let r_on = otm_rraptor(&tt, o, &dlist, 4, &tlist).unwrap();
        let r_off = otm_rraptor_with(&tt, o, &dlist, &tlist, RaptorOptions { prune_destinations: false, ..RaptorOptions::new(4) }).unwrap();
        prop_assert_eq!(&r_on.profiles, &r_off.profiles);
        prop_assert!(r_on.counters.label_updates <= r_off.counters.label_updates);
        let t_on = otm_rtbtr(&tt, &set, o, &dlist, 4, &tlist).unwrap();
        let t_off = otm_rtbtr_with(&tt, &set, o, &dlist, &tlist, TbtrOptions { prune_destinations: false, ..TbtrOptions::new(4) }).unwrap();
        prop_assert_eq!(&t_on.profiles, &t_off.profiles);
        prop_assert!(t_on.counters.segments_scanned <= t_off.counters.segments_scanned);
        prop_assert_eq!(&t_on.profiles, &r_on.profiles);
    }

    #[test]
    fn partitions_are_balanced_and_seeded((tt, seed) in instance(), p in 2usize..5) {
        let hg = Hypergraph::build(&tt, WeightScheme::Sc3);
        let sc2 = Hypergraph::build(&tt, WeightScheme::Sc2);
        for (e3, e2) in hg.edges.iter().zip(&sc2.edges) {
            prop_assert_eq!(&e3.pins, &e2.pins);
            prop_assert!(e3.weight >= e2.weight - 1e-9);
        }
        match partition_multilevel(&hg, p, 0.2, seed) {
            Ok(cells) => {
                let (lo, hi) = balance_bounds(hg.total_node_weight(), p, 0.2);
                for w in hg.cell_weights(&cells, p) {
                    prop_assert!(w >= lo - 1e-9 && w <= hi + 1e-9);
                }
                prop_assert_eq!(partition_multilevel(&hg, p, 0.2, seed).unwrap(), cells);
            }
            Err(e) => prop_assert!(e.to_string().contains("partition"), "{}", e),
        }
    }

    #[test]
    fn fill_in_is_sufficient((tt, seed) in instance()) {
        let set = preprocess(&tt).0;
        let hg = Hypergraph::build(&tt, WeightScheme::Sc3);
        let Ok(nested) = nested_partition(&hg, &tt, 2, 2, 0.2, seed) else { return Ok(()) };
        let standard = count_pairs(&enumerate_pqueries_standard(&nested.leaf));
        let layout = Layout::Nested(nested);
        let work = enumerate_pqueries(&tt, &layout);
        prop_assert!(count_pairs(&work) <= standard);
        let (trips, _) = compute_fillin(&tt, &set, &work, FillinEngine::Tbtr, 4);
        let (routes, _) = compute_fillin(&tt, &set, &work, FillinEngine::Raptor, 4);
        for &t in &trips.trips {
            prop_assert!(routes.routes.binary_search(&tt.trips[t].route).is_ok());
        }
        let leaf = layout.leaf();
        let own = |s: usize| leaf.stop_cells[s];
        for (a, dests) in work.iter().take(3) {
            for &b in dests.iter().take(3) {
                let flags: Vec<bool> = (0..tt.num_trips())
                    .map(|t| {
                        let c = leaf.route_cells[tt.trips[t].route];
                        trips.trips.binary_search(&t).is_ok() || (c != 0 && (c == own(*a) || c == own(b)))
                    })
                    .collect();
                let rflags: Vec<bool> = (0..tt.num_routes()).map(|r| routes.routes.binary_search(&r).is_ok()).collect();
                for tau in departure_times(&tt, *a).into_iter().step_by(5) {
                    let want = tbtr_query(&tt, &set, *a, b, tau, 4).unwrap();
                    prop_assert_eq!(&tbtr_query_counted(&tt, &set, *a, b, tau, 4, Some(&flags)).unwrap().0, &want);
                    prop_assert_eq!(&raptor_query_counted(&tt, *a, b, tau, 4, Some(&rflags)).unwrap().0, &want);
                }
            }
        }
    }
}
