#![no_main]
use libfuzzer_sys::fuzz_target;
use multicritical::diffpoly::DiffPoly;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<DiffPoly>() {
        // printed form must parse back to the same polynomial
        let again: DiffPoly = p.to_string().parse().expect("display output parses");
        assert_eq!(p, again);
    }
});
