#![no_main]

use afrelay::format::parse_beta_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_beta_list(text) {
        assert!(values.iter().all(|v| v.is_finite()));
        let joined = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_beta_list(&joined).unwrap(), values);
    }
});
