#![no_main]
use libfuzzer_sys::fuzz_target;
use multicritical::lenard::LenardTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = LenardTable::from_json(text) {
        assert_eq!(LenardTable::from_json(&t.to_json()).expect("round trip"), t);
    }
});
