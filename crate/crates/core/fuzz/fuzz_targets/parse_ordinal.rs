#![no_main]

use ea_strata::ordinal::{ord_parse, ord_render};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(a) = ord_parse(text) {
        assert_eq!(ord_parse(&ord_render(a)), Ok(a));
    }
});
