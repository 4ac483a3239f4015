#![no_main]

use cubemoments::BiPoly;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(poly) = BiPoly::from_json_str(text) {
        // anything that parses must survive a round trip unchanged
        let rendered = poly.to_json_string();
        let again = BiPoly::from_json_str(&rendered).expect("rendered JSON must parse");
        assert_eq!(poly, again);
    }
});
