#![no_main]

use ea_strata::stratify::StratifierSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(x) = text.parse::<StratifierSpec>() {
        assert_eq!(x.to_string().parse::<StratifierSpec>().ok(), Some(x));
    }
});
