//! Zobrist keys for position hashing.
//!
//! Keys are generated at compile time from a fixed SplitMix64 stream so
//! hashes are stable across runs and platforms.

const fn splitmix(state: u64) -> (u64, u64) {
    let next = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = next;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (next, z ^ (z >> 31))
}

pub(crate) struct Keys {
    pub pieces: [[u64; 64]; 12],
    pub side: u64,
    pub castling: [u64; 16],
    pub en_passant_file: [u64; 8],
}

const fn build() -> Keys {
    let mut state = 0x5048_4F45_4E49_5821u64;
    let mut pieces = [[0u64; 64]; 12];
    let mut p = 0;
    while p < 12 {
        let mut s = 0;
        while s < 64 {
            let (st, v) = splitmix(state);
            state = st;
            pieces[p][s] = v;
            s += 1;
        }
        p += 1;
    }
    let (st, side) = splitmix(state);
    state = st;
    let mut castling = [0u64; 16];
    let mut c = 1;
    while c < 16 {
        let (st, v) = splitmix(state);
        state = st;
        castling[c] = v;
        c += 1;
    }
    let mut en_passant_file = [0u64; 8];
    let mut f = 0;
    while f < 8 {
        let (st, v) = splitmix(state);
        state = st;
        en_passant_file[f] = v;
        f += 1;
    }
    Keys {
        pieces,
        side,
        castling,
        en_passant_file,
    }
}

pub(crate) static KEYS: Keys = build();

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn keys_are_distinct() {
        let mut seen = HashSet::new();
        for row in KEYS.pieces.iter() {
            for &k in row {
                assert!(seen.insert(k));
            }
        }
        assert!(seen.insert(KEYS.side));
        for &k in &KEYS.castling[1..] {
            assert!(seen.insert(k));
        }
        for &k in &KEYS.en_passant_file {
            assert!(seen.insert(k));
        }
    }
}
