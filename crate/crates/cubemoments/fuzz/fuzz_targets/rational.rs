#![no_main]

use cubemoments::exactalg::parse_rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = parse_rational(text) {
        let again = parse_rational(&x.to_string()).expect("display must re-parse");
        assert_eq!(x, again);
    }
});
