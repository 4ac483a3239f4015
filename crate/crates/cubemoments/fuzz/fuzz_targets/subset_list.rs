#![no_main]

use cubemoments::oracle::{count_subcubes, CountMethod, SubsetBitmap};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = SubsetBitmap::parse(text) {
        let n = s.n();
        assert!(s.len() <= 1 << n);
        // the two counting methods must agree on whatever parsed
        if n <= 10 {
            for r in 0..=n {
                assert_eq!(
                    count_subcubes(&s, r, CountMethod::Naive).unwrap(),
                    count_subcubes(&s, r, CountMethod::BitParallel).unwrap()
                );
            }
        }
    }
});
