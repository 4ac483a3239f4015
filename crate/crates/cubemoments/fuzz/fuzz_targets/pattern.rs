#![no_main]

use cubemoments::cubes::CubePattern;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = CubePattern::parse(text) {
        let again = CubePattern::parse(&p.to_string()).expect("display must re-parse");
        assert_eq!(p, again);
        assert_eq!(p.volume(), 1u64 << p.star_count());
        // a pattern always contains its own fixed-bit point
        assert!(p.contains_point(p.bits()));
        assert_eq!(p.intersect(&p).unwrap(), Some(p));
    }
});
