#![no_main]

use afrelay::format::parse_m_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ms) = parse_m_list(text) {
        let joined = ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ");
        assert_eq!(parse_m_list(&joined).unwrap(), ms);
    }
});
