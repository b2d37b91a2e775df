#![no_main]
use libfuzzer_sys::fuzz_target;
use multicritical::finite_n::Potential;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = text.parse::<Potential>() {
        let again: Potential = p.to_string().parse().expect("display output parses");
        assert_eq!(p, again);
    }
});
