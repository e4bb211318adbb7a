#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoplate::bounded::TripletMatrix;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = TripletMatrix::parse(text) {
        let text = m.to_text();
        let again = TripletMatrix::parse(&text).expect("written matrix must parse");
        assert_eq!(again.to_text(), text);
    }
});
