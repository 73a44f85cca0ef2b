#![no_main]

use afrelay::format::{load_network, save_network};
use afrelay::paths::max_equal_beta;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(net) = load_network(text) else { return };
    if net.relays() > 64 {
        return;
    }
    let again = load_network(&save_network(&net)).expect("saved network reloads");
    assert_eq!(again.relays(), net.relays());
    assert_eq!(again.edges(), net.edges());
    let b = max_equal_beta(&net);
    assert!(b >= 0.0);
});
