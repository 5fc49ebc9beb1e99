#![no_main]

use ea_strata::syntax::{parse_formula, render_formula};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(phi) = parse_formula(text) {
        let printed = render_formula(&phi);
        let back = parse_formula(&printed).expect("rendered formulas parse");
        assert_eq!(back, phi);
    }
});
