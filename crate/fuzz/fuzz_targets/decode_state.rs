#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoplate::spectral::StateField;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = StateField::from_bytes(data) {
        let bytes = field.to_bytes();
        let again = StateField::from_bytes(&bytes).expect("encoded state must decode");
        assert_eq!(again.to_bytes(), bytes);
    }
});
