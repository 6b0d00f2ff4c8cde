use catalyst_bench::config::ExperimentConfig;
use catalyst_bench::csv::{read_trace_csv, write_rows, CsvRow};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64, Just(0.0)]
}

fn row() -> impl Strategy<Value = CsvRow> {
    (any::<[u64; 5]>(), finite(), finite(), 0.0..1e7f64).prop_map(|(i, f_value, rel_gap, wall_ms)| CsvRow {
        grad_evals: i[0],
        full_passes: i[1],
        effective_grads: i[2],
        outer_iter: i[3],
        inner_iters: i[4],
        f_value,
        rel_gap,
        wall_ms,
    })
}

proptest! {
    #[test]
    fn csv_rows_round_trip(rows in prop::collection::vec(row(), 0..20)) {
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let parsed = read_trace_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(parsed, rows);
    }

    #[test]
    fn config_render_round_trips(
        n in 1usize..5000,
        p in 1usize..500,
        cond in 1.0..1e6f64,
        mu in 0.0..1.0f64,
        method in prop::sample::select(vec!["ista", "svrg", "saga", "miso"]),
        mode in prop::sample::select(vec!["plain", "catalyst"]),
        criterion in prop::sample::select(vec!["c1", "c2", "c3", "c1star"]),
        kappa in prop::option::of(1e-8..1e3f64),
        seed in any::<u64>(),
    ) {
        let mut c = ExperimentConfig::default();
        for (k, v) in [
            ("n", n.to_string()),
            ("p", p.to_string()),
            ("condition", format!("{cond:?}")),
            ("mu", format!("{mu:?}")),
            ("method", method.to_string()),
            ("mode", mode.to_string()),
            ("criterion", criterion.to_string()),
            ("kappa", kappa.map_or("auto".into(), |k| format!("{k:?}"))),
            ("seed", seed.to_string()),
        ] {
            c.set(k, &v).unwrap();
        }
        let back = ExperimentConfig::parse(&c.render()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn config_parser_never_panics(text in "[a-z_=#0-9. \n-]{0,200}") {
        let _ = ExperimentConfig::parse(&text);
    }
}
