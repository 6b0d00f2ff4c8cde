#![no_main]

use catalyst_core::data::parse_svmlight;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // first byte picks an optional fixed dimension
    let (dim, body) = match data.split_first() {
        Some((&d, rest)) if d & 0x80 != 0 => (Some((d & 0x7f) as usize), rest),
        Some((_, rest)) => (None, rest),
        None => (None, data),
    };
    if let Ok(ds) = parse_svmlight(body, dim) {
        if let Some(d) = dim {
            assert_eq!(ds.dim(), d);
        }
    }
});
