#![no_main]

use ea_strata::theory::{parse_theory, render_theory};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(t) = parse_theory(text) {
        assert_eq!(parse_theory(&render_theory(&t)).ok(), Some(t));
    }
});
