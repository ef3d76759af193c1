//! Named-seed derivation.
//!
//! Every random stream in a run is derived from one master seed and a
//! short domain label, so independent streams never alias and any stream
//! can be reproduced in isolation.

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from a master seed and a domain label such as
/// `"traj:E1:a"` or `"sensors:E3:b"`.
pub fn derive_seed(master: u64, domain: &str) -> u64 {
    splitmix64(master ^ fnv1a64(domain.as_bytes()))
}
