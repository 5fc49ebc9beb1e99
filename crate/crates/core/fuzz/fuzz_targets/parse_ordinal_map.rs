#![no_main]

use ea_strata::stratify::OrdinalMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(h) = text.parse::<OrdinalMap>() {
        assert_eq!(h.to_string().parse::<OrdinalMap>().ok(), Some(h));
    }
});
