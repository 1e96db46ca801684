//! Per-sample seeds.
//!
//! `sample_seed(base, t, i) = mix(mix(mix(base) ^ bits(t)) ^ i)` with `mix` the
//! SplitMix64 finalizer; sub-streams add a tag the same way.

/// SplitMix64 output function applied to `z`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Environment seed of sample `index` at horizon `t`.
pub fn sample_seed(base: u64, t: f64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ t.to_bits()) ^ index)
}

/// Independent stream derived from `seed`.
pub fn stream_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag.wrapping_mul(0xA24B_AED4_963E_E407)))
}

pub(crate) const TAG_SHIFT_BITS: u64 = 1;
pub(crate) const TAG_SHIFT_FLIP: u64 = 2;
pub(crate) const TAG_BOOTSTRAP: u64 = 3;
pub(crate) const TAG_TREND: u64 = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn splitmix_reference() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn no_collisions_on_a_campaign_grid() {
        let mut seen = HashSet::new();
        for t in [8.0, 16.0, 32.0, 64.0] {
            for i in 0..2000 {
                assert!(seen.insert(sample_seed(7, t, i)));
            }
        }
    }
}
