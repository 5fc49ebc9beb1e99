#![no_main]

use ea_strata::semantics::{parse_structure, render_structure};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok((_, arith, oracle)) = parse_structure(text) {
        let printed = render_structure(&arith, &oracle);
        let (_, a2, o2) = parse_structure(&printed).expect("rendered structures parse");
        assert_eq!(render_structure(&a2, &o2), printed);
    }
});
