#![no_main]
use libfuzzer_sys::fuzz_target;
use macro_ale::io::matrix_market;

const MAX_INPUT_SIZE: usize = 64 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(a) = matrix_market::read(text) {
        let mut out = Vec::new();
        matrix_market::write(&mut out, &a, "").unwrap();
        let again = matrix_market::read(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(a, again);
    }
});
