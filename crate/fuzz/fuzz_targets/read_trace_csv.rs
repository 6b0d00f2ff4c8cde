#![no_main]

use catalyst_bench::csv::{read_trace_csv, write_rows};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = read_trace_csv(text) {
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let again = read_trace_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        // NaN fields compare unequal
        if rows.iter().all(|r| !r.f_value.is_nan() && !r.rel_gap.is_nan() && !r.wall_ms.is_nan()) {
            assert_eq!(again, rows);
        }
    }
});
